//! Ordinal notations in Cantor normal form below epsilon-0.
//!
//! An [`Ordinal`] is a finite sum `w^e1*c1 + ... + w^ek*ck` with strictly
//! decreasing exponents (themselves ordinals) and positive coefficients.
//! The empty sum is 0. This is exactly what the transfinite clock needs:
//! the interpreter only ever builds clock values by `+n` on the right and
//! `*w` (limit jumps), so epsilon-0 is unreachable and every value has a
//! unique canonical form with decidable order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::nat::Nat;

/// An ordinal below epsilon-0 in Cantor normal form.
///
/// Invariants: term exponents strictly decrease, coefficients are >= 1.
/// Equal ordinals therefore have identical representations, and `Eq`/`Ord`
/// below agree with the ordinal order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ordinal<N: Nat> {
    /// `(exponent, coefficient)` pairs, highest exponent first.
    terms: Vec<(Ordinal<N>, N)>,
}

/// Zero / successor / limit trichotomy used by the limit rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdinalClass {
    Zero,
    Successor,
    Limit,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrdinalError {
    /// `sub_left(a, b)` requires `a <= b`.
    #[error("cannot left-subtract: minuend is smaller than subtrahend")]
    Underflow,
    /// `times_omega` requires a positive ordinal.
    #[error("cannot multiply zero by omega")]
    ZeroPeriod,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrdinalParseError {
    #[error("empty ordinal string")]
    Empty,
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("malformed coefficient at byte {0}")]
    BadCoefficient(usize),
    #[error("zero coefficient at byte {0}")]
    ZeroCoefficient(usize),
    #[error("exponents must strictly decrease (term {0})")]
    NonDecreasingExponents(usize),
    #[error("unbalanced parenthesis at byte {0}")]
    Unbalanced(usize),
    #[error("trailing input at byte {0}")]
    Trailing(usize),
}

impl<N: Nat> Ordinal<N> {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_nat(N::one())
    }

    /// The ordinal `w`.
    pub fn omega() -> Self {
        Ordinal {
            terms: vec![(Self::one(), N::one())],
        }
    }

    /// Embed a natural number.
    pub fn from_nat(n: N) -> Self {
        if n.is_zero() {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![(Self::zero(), n)],
            }
        }
    }

    pub fn from_usize(n: usize) -> Self {
        Self::from_nat(N::from_usize_exact(n))
    }

    /// `w^e * c`; returns zero when `c` is zero.
    pub fn single(exponent: Ordinal<N>, coefficient: N) -> Self {
        if coefficient.is_zero() {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![(exponent, coefficient)],
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(n)` iff this ordinal is the natural number `n`.
    pub fn as_nat(&self) -> Option<&N> {
        match self.terms.as_slice() {
            [] => None,
            [(e, c)] if e.is_zero() => Some(c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.is_zero() || self.as_nat().is_some()
    }

    pub fn terms(&self) -> &[(Ordinal<N>, N)] {
        &self.terms
    }

    pub fn classify(&self) -> OrdinalClass {
        match self.terms.last() {
            None => OrdinalClass::Zero,
            Some((e, _)) if e.is_zero() => OrdinalClass::Successor,
            Some(_) => OrdinalClass::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.classify() == OrdinalClass::Limit
    }

    /// Ordinal sum `self + rhs`. Terms of `self` below the leading exponent
    /// of `rhs` are absorbed, e.g. `1 + w = w`.
    pub fn add(&self, rhs: &Ordinal<N>) -> Ordinal<N> {
        let Some((lead_exp, lead_coeff)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Ordinal<N>, N)> = Vec::new();
        for (e, c) in &self.terms {
            match e.cmp(lead_exp) {
                Ordering::Greater => terms.push((e.clone(), c.clone())),
                Ordering::Equal | Ordering::Less => break,
            }
        }
        // Merge coefficients when self still carries the leading exponent.
        let keep = self
            .terms
            .iter()
            .find(|(e, _)| e == lead_exp)
            .map(|(_, c)| c.clone());
        match keep {
            Some(c) => terms.push((lead_exp.clone(), c + lead_coeff.clone())),
            None => terms.push((lead_exp.clone(), lead_coeff.clone())),
        }
        terms.extend(rhs.terms.iter().skip(1).cloned());
        Ordinal { terms }
    }

    pub fn add_nat(&self, n: N) -> Ordinal<N> {
        self.add(&Self::from_nat(n))
    }

    pub fn succ(&self) -> Ordinal<N> {
        self.add(&Self::one())
    }

    /// The unique `rho` with `self + rho = rhs`, defined whenever
    /// `self <= rhs`.
    pub fn sub_left(&self, rhs: &Ordinal<N>) -> Result<Ordinal<N>, OrdinalError> {
        let mut a = self.terms.as_slice();
        let mut b = rhs.terms.as_slice();
        loop {
            match (a.first(), b.first()) {
                (None, _) => return Ok(Ordinal { terms: b.to_vec() }),
                (Some(_), None) => return Err(OrdinalError::Underflow),
                (Some((ea, ca)), Some((eb, cb))) => match ea.cmp(eb) {
                    Ordering::Less => return Ok(Ordinal { terms: b.to_vec() }),
                    Ordering::Greater => return Err(OrdinalError::Underflow),
                    Ordering::Equal => match ca.cmp(cb) {
                        Ordering::Greater => return Err(OrdinalError::Underflow),
                        Ordering::Less => {
                            let mut terms = vec![(eb.clone(), cb.clone() - ca.clone())];
                            terms.extend(b[1..].iter().cloned());
                            return Ok(Ordinal { terms });
                        }
                        Ordering::Equal => {
                            a = &a[1..];
                            b = &b[1..];
                        }
                    },
                },
            }
        }
    }

    /// `self * w`: the supremum of `self * n`, which is `w^(e+1)` for
    /// leading exponent `e`. This is the clock period of one limit jump.
    pub fn times_omega(&self) -> Result<Ordinal<N>, OrdinalError> {
        match self.terms.first() {
            None => Err(OrdinalError::ZeroPeriod),
            Some((e, _)) => Ok(Self::single(e.succ(), N::one())),
        }
    }
}

impl<N: Nat> PartialOrd for Ordinal<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<N: Nat> Ord for Ordinal<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        for ((ea, ca), (eb, cb)) in self.terms.iter().zip(other.terms.iter()) {
            match ea.cmp(eb).then_with(|| ca.cmp(cb)) {
                Ordering::Equal => continue,
                non_eq => return non_eq,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl<N: Nat> fmt::Display for Ordinal<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            write!(f, "w")?;
            if e.as_nat().map_or(true, |n| !n.is_one()) {
                if let Some(n) = e.as_nat() {
                    write!(f, "^{n}")?;
                } else if *e == Self::omega() {
                    write!(f, "^w")?;
                } else {
                    write!(f, "^({e})")?;
                }
            }
            if !c.is_one() {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl<N: Nat> fmt::Debug for Ordinal<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl<N: Nat> FromStr for Ordinal<N> {
    type Err = OrdinalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            input: s.as_bytes(),
            pos: 0,
        };
        let o = p.parse_sum()?;
        if p.pos != p.input.len() {
            return Err(OrdinalParseError::Trailing(p.pos));
        }
        Ok(o)
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn parse_sum<N: Nat>(&mut self) -> Result<Ordinal<N>, OrdinalParseError> {
        if self.input.is_empty() {
            return Err(OrdinalParseError::Empty);
        }
        let mut terms: Vec<(Ordinal<N>, N)> = Vec::new();
        loop {
            let (e, c): (Ordinal<N>, N) = self.parse_term()?;
            if !c.is_zero() {
                if let Some((prev, _)) = terms.last() {
                    if *prev <= e {
                        return Err(OrdinalParseError::NonDecreasingExponents(terms.len()));
                    }
                }
                terms.push((e, c));
            } else if !(terms.is_empty() && self.peek() != Some(b'+')) {
                // "0" is only legal as the entire string.
                return Err(OrdinalParseError::ZeroCoefficient(self.pos));
            }
            match self.peek() {
                Some(b'+') => self.pos += 1,
                _ => return Ok(Ordinal { terms }),
            }
        }
    }

    /// One `w^E*C` unit (with the optional parts), or a bare natural.
    fn parse_term<N: Nat>(&mut self) -> Result<(Ordinal<N>, N), OrdinalParseError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.parse_exponent()?
                } else {
                    Ordinal::one()
                };
                let coefficient = if self.peek() == Some(b'*') {
                    self.pos += 1;
                    let c: N = self.parse_nat()?;
                    if c.is_zero() {
                        return Err(OrdinalParseError::ZeroCoefficient(self.pos));
                    }
                    c
                } else {
                    N::one()
                };
                Ok((exponent, coefficient))
            }
            Some(d) if d.is_ascii_digit() => Ok((Ordinal::zero(), self.parse_nat()?)),
            Some(other) => Err(OrdinalParseError::UnexpectedChar(other as char, self.pos)),
            None => Err(OrdinalParseError::Empty),
        }
    }

    /// After `^`: a bare natural, a bare `w`, or a parenthesised sum.
    fn parse_exponent<N: Nat>(&mut self) -> Result<Ordinal<N>, OrdinalParseError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(b'(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.parse_sum()?;
                if self.peek() != Some(b')') {
                    return Err(OrdinalParseError::Unbalanced(open));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(d) if d.is_ascii_digit() => Ok(Ordinal::from_nat(self.parse_nat()?)),
            Some(other) => Err(OrdinalParseError::UnexpectedChar(other as char, self.pos)),
            None => Err(OrdinalParseError::Empty),
        }
    }

    fn parse_nat<N: Nat>(&mut self) -> Result<N, OrdinalParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(OrdinalParseError::BadCoefficient(start));
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        N::from_decimal(text).ok_or(OrdinalParseError::BadCoefficient(start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Ord64 = Ordinal<u64>;

    fn o(s: &str) -> Ord64 {
        s.parse().unwrap()
    }

    #[test]
    fn comparison_basics() {
        assert!(o("w") > o("5"));
        assert_eq!(o("w+1"), o("w+1"));
        assert!(o("w^2") > o("w*9+100"));
        assert!(o("0") < o("1"));
        assert!(o("w^w") > o("w^5*9"));
    }

    #[test]
    fn addition_basics() {
        assert_eq!(o("w").add(&o("1")), o("w+1"));
        assert_eq!(o("1").add(&o("w")), o("w"));
        assert_eq!(o("w*2+3").add(&o("w+1")), o("w*3+1"));
        assert_eq!(o("w^2").add(&o("w^2*2+w")), o("w^2*3+w"));
        assert_eq!(o("5").add(&o("0")), o("5"));
        assert_eq!(o("0").add(&o("w^w")), o("w^w"));
    }

    #[test]
    fn left_subtraction() {
        assert_eq!(o("0").sub_left(&o("w")), Ok(o("w")));
        assert_eq!(o("5").sub_left(&o("5")), Ok(o("0")));
        assert_eq!(o("w").sub_left(&o("w*2+3")), Ok(o("w+3")));
        assert_eq!(o("w+4").sub_left(&o("w*2")), Ok(o("w")));
        assert_eq!(o("w*2").sub_left(&o("w")), Err(OrdinalError::Underflow));
        // The defining property on the documented example.
        assert_eq!(o("w").add(&o("w").sub_left(&o("w*2+3")).unwrap()), o("w*2+3"));
    }

    #[test]
    fn times_omega_basics() {
        assert_eq!(o("3").times_omega(), Ok(o("w")));
        assert_eq!(o("w").times_omega(), Ok(o("w^2")));
        assert_eq!(o("w*2+5").times_omega(), Ok(o("w^2")));
        assert_eq!(o("w^2*7+w").times_omega(), Ok(o("w^3")));
        assert_eq!(o("0").times_omega(), Err(OrdinalError::ZeroPeriod));
    }

    #[test]
    fn classification() {
        assert_eq!(o("0").classify(), OrdinalClass::Zero);
        assert_eq!(o("7").classify(), OrdinalClass::Successor);
        assert_eq!(o("w*2").classify(), OrdinalClass::Limit);
        assert_eq!(o("w^2+w+5").classify(), OrdinalClass::Successor);
        assert_eq!(o("w^2+w").classify(), OrdinalClass::Limit);
    }

    #[test]
    fn parse_accepts_redundant_spellings() {
        assert_eq!(o("w^2*3+w*1+5"), o("w^2*3+w+5"));
        assert_eq!(o("w^1*1"), o("w"));
        assert_eq!(o("w^0*5"), o("5"));
        assert_eq!(o("w^(w+1)*2+w^w"), Ord64 {
            terms: vec![
                (o("w+1"), 2),
                (o("w"), 1),
            ],
        });
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(Ord64::from_str("").is_err());
        assert!(Ord64::from_str("x").is_err());
        assert!(Ord64::from_str("w+w").is_err());
        assert!(Ord64::from_str("5+w").is_err());
        assert!(Ord64::from_str("w*0").is_err());
        assert!(Ord64::from_str("w+0").is_err());
        assert!(Ord64::from_str("w^(w").is_err());
        assert!(Ord64::from_str("w^w^2").is_err());
        assert!(Ord64::from_str("7 ").is_err());
    }

    #[test]
    fn display_round_trip_on_canonical_strings() {
        for s in [
            "0",
            "7",
            "w",
            "w+1",
            "w*3",
            "w^2*3+w+5",
            "w^w",
            "w^w*2+w^3+w^2*4+1",
            "w^(w+1)",
            "w^(w^2*2+1)*9+w^w+w*2+17",
        ] {
            assert_eq!(o(s).to_string(), s);
        }
    }

    /// Independent oracle for ordinals below w^3: lexicographic triples
    /// `(a, b, c)` standing for `w^2*a + w*b + c`, with concatenation-style
    /// addition derived directly from order types.
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
    struct Triple(u64, u64, u64);

    impl Triple {
        fn add(self, rhs: Triple) -> Triple {
            if rhs.0 > 0 {
                Triple(self.0 + rhs.0, rhs.1, rhs.2)
            } else if rhs.1 > 0 {
                Triple(self.0, self.1 + rhs.1, rhs.2)
            } else {
                Triple(self.0, self.1, self.2 + rhs.2)
            }
        }

        fn to_ordinal(self) -> Ord64 {
            Ordinal::single(o("2"), self.0)
                .add(&Ordinal::single(o("1"), self.1))
                .add(&Ordinal::from_nat(self.2))
        }
    }

    #[test]
    fn agrees_with_triple_oracle_below_w3() {
        let mut all = Vec::new();
        for a in 0..6u64 {
            for b in 0..6u64 {
                for c in 0..6u64 {
                    all.push(Triple(a, b, c));
                }
            }
        }
        for &x in &all {
            for &y in &all {
                let ox = x.to_ordinal();
                let oy = y.to_ordinal();
                assert_eq!(ox.cmp(&oy), x.cmp(&y), "cmp {x:?} {y:?}");
                assert_eq!(ox.add(&oy), x.add(y).to_ordinal(), "add {x:?} {y:?}");
            }
        }
    }

    fn arb_ordinal() -> impl Strategy<Value = Ord64> {
        // Ordinals below w^w with small coefficients, via triples of
        // (exponent, coefficient) pairs.
        proptest::collection::vec((0u64..5, 1u64..6), 0..4).prop_map(|mut pairs| {
            pairs.sort_by(|a, b| b.0.cmp(&a.0));
            pairs.dedup_by_key(|p| p.0);
            Ordinal {
                terms: pairs
                    .into_iter()
                    .map(|(e, c)| (Ordinal::from_nat(e), c))
                    .collect(),
            }
        })
    }

    proptest! {
        #[test]
        fn add_is_associative(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn add_identity_and_growth(a in arb_ordinal(), b in arb_ordinal()) {
            prop_assert_eq!(a.add(&Ordinal::zero()), a.clone());
            prop_assert_eq!(Ordinal::zero().add(&a), a.clone());
            let sum = a.add(&b);
            if b.is_zero() {
                prop_assert_eq!(&sum, &a);
            } else {
                prop_assert!(sum > a);
            }
        }

        #[test]
        fn sub_left_inverts_add(a in arb_ordinal(), b in arb_ordinal()) {
            let sum = a.add(&b);
            let rho = a.sub_left(&sum).unwrap();
            prop_assert_eq!(a.add(&rho), sum);
        }

        #[test]
        fn display_parse_round_trip(a in arb_ordinal()) {
            let s = a.to_string();
            prop_assert_eq!(s.parse::<Ord64>().unwrap(), a);
        }
    }
}
