//! Oracle reals: total 0/1 bit streams indexed by naturals.
//!
//! Three backends: an ultimately periodic description, a finite prefix
//! with a constant declared tail, and a computed backend whose decider may
//! answer `Undecided`. The first two are written `prefix;period` (either
//! part may be empty, an empty period means a constant-0 tail), with
//! aliases `zeros` and `ones`.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::nat::Nat;

/// An oracle answer. `Undecided` is a value, not an error: the halting-set
/// backend is inherently partial at finite budgets, and callers must
/// surface that rather than coerce it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trit {
    Zero,
    One,
    Undecided,
}

impl Trit {
    pub fn from_bit(bit: bool) -> Trit {
        if bit {
            Trit::One
        } else {
            Trit::Zero
        }
    }

    pub fn to_bit(self) -> Option<bool> {
        match self {
            Trit::Zero => Some(false),
            Trit::One => Some(true),
            Trit::Undecided => None,
        }
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trit::Zero => write!(f, "0"),
            Trit::One => write!(f, "1"),
            Trit::Undecided => write!(f, "undecided"),
        }
    }
}

/// Decider callback for computed oracles. Must be a pure function of the
/// index and reentrant: independent runs may query it concurrently.
pub type Decider<N> = dyn Fn(&N) -> Trit + Send + Sync;

#[derive(Clone)]
pub enum OracleReal<N: Nat> {
    /// `prefix` then `period` repeated forever; `period` is nonempty.
    UltimatelyPeriodic { prefix: Vec<bool>, period: Vec<bool> },
    /// `prefix` then the constant `tail` forever.
    FinitePrefix { prefix: Vec<bool>, tail: bool },
    /// Bits computed on demand.
    Computed { name: String, decider: Arc<Decider<N>> },
}

/// What is known about the tail of an oracle; the accelerator uses this to
/// prove that a growing read index keeps producing the same bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailInfo {
    /// All bits at index >= `from` equal `bit`.
    Constant { bit: bool, from: usize },
    /// Bits at index >= `prefix_len` repeat `period` forever.
    Periodic { prefix_len: usize, period: Vec<bool> },
    /// Computed backend: nothing is promised.
    Unknown,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleSpecError {
    #[error("oracle spec {0:?}: expected `prefix;period`, `zeros` or `ones`")]
    MissingSeparator(String),
    #[error("oracle spec contains {0:?}; bits must be 0 or 1")]
    BadBit(char),
}

impl<N: Nat> OracleReal<N> {
    pub fn zeros() -> Self {
        OracleReal::FinitePrefix { prefix: Vec::new(), tail: false }
    }

    pub fn ones() -> Self {
        OracleReal::FinitePrefix { prefix: Vec::new(), tail: true }
    }

    pub fn computed(name: impl Into<String>, decider: Arc<Decider<N>>) -> Self {
        OracleReal::Computed { name: name.into(), decider }
    }

    /// Parse an oracle spec string.
    pub fn parse(spec: &str) -> Result<Self, OracleSpecError> {
        let spec = spec.trim();
        match spec {
            "zeros" => return Ok(Self::zeros()),
            "ones" => return Ok(Self::ones()),
            _ => {}
        }
        let Some((prefix, period)) = spec.split_once(';') else {
            return Err(OracleSpecError::MissingSeparator(spec.to_string()));
        };
        let prefix = parse_bits(prefix)?;
        let period = parse_bits(period)?;
        if period.is_empty() {
            Ok(OracleReal::FinitePrefix { prefix, tail: false })
        } else {
            Ok(OracleReal::UltimatelyPeriodic { prefix, period })
        }
    }

    /// The bit at index `n`. Deterministic; periodic backends never answer
    /// `Undecided`.
    pub fn bit(&self, n: &N) -> Trit {
        match self {
            OracleReal::UltimatelyPeriodic { prefix, period } => {
                match n.to_usize() {
                    Some(i) if i < prefix.len() => Trit::from_bit(prefix[i]),
                    _ => {
                        let offset = n.clone() - N::from_usize_exact(prefix.len());
                        let idx = offset
                            .mod_floor(&N::from_usize_exact(period.len()))
                            .to_usize()
                            .expect("reduced index fits");
                        Trit::from_bit(period[idx])
                    }
                }
            }
            OracleReal::FinitePrefix { prefix, tail } => match n.to_usize() {
                Some(i) if i < prefix.len() => Trit::from_bit(prefix[i]),
                _ => Trit::from_bit(*tail),
            },
            OracleReal::Computed { decider, .. } => decider(n),
        }
    }

    /// Exact tail description for descriptive backends, `Unknown` for
    /// computed ones. A periodic backend whose period is a constant block
    /// reports the stronger `Constant` form.
    pub fn eventually_constant_info(&self) -> TailInfo {
        match self {
            OracleReal::FinitePrefix { prefix, tail } => TailInfo::Constant {
                bit: *tail,
                from: prefix.len(),
            },
            OracleReal::UltimatelyPeriodic { prefix, period } => {
                if period.iter().all(|&b| b == period[0]) {
                    TailInfo::Constant { bit: period[0], from: prefix.len() }
                } else {
                    TailInfo::Periodic {
                        prefix_len: prefix.len(),
                        period: period.clone(),
                    }
                }
            }
            OracleReal::Computed { .. } => TailInfo::Unknown,
        }
    }

    /// The join `self (+) other`: even bits from `self`, odd from `other`.
    /// Descriptive backends join into a closed periodic form; anything
    /// involving a computed backend stays computed.
    pub fn join(&self, other: &OracleReal<N>) -> OracleReal<N> {
        let descriptive = |o: &OracleReal<N>| -> Option<(Vec<bool>, Vec<bool>)> {
            match o {
                OracleReal::UltimatelyPeriodic { prefix, period } => {
                    Some((prefix.clone(), period.clone()))
                }
                OracleReal::FinitePrefix { prefix, tail } => {
                    Some((prefix.clone(), vec![*tail]))
                }
                OracleReal::Computed { .. } => None,
            }
        };
        match (descriptive(self), descriptive(other)) {
            (Some((pa, qa)), Some((pb, qb))) => {
                let prefix_len = pa.len().max(pb.len());
                let period_len = qa.len().lcm(&qb.len());
                let bit_at = |prefix: &[bool], period: &[bool], i: usize| -> bool {
                    if i < prefix.len() {
                        prefix[i]
                    } else {
                        period[(i - prefix.len()) % period.len()]
                    }
                };
                let prefix: Vec<bool> = (0..2 * prefix_len)
                    .map(|i| {
                        if i % 2 == 0 {
                            bit_at(&pa, &qa, i / 2)
                        } else {
                            bit_at(&pb, &qb, i / 2)
                        }
                    })
                    .collect();
                let period: Vec<bool> = (0..2 * period_len)
                    .map(|i| {
                        if i % 2 == 0 {
                            bit_at(&[], &qa, (prefix_len - pa.len()) + i / 2)
                        } else {
                            bit_at(&[], &qb, (prefix_len - pb.len()) + i / 2)
                        }
                    })
                    .collect();
                OracleReal::UltimatelyPeriodic { prefix, period }
            }
            _ => {
                let a = self.clone();
                let b = other.clone();
                OracleReal::computed(
                    format!("join({a}, {b})"),
                    Arc::new(move |n: &N| {
                        let two = N::from_usize_exact(2);
                        let (half, parity) = n.div_mod_floor(&two);
                        if parity.is_zero() {
                            a.bit(&half)
                        } else {
                            b.bit(&half)
                        }
                    }),
                )
            }
        }
    }

    /// First index below `window` where the two oracles provably differ.
    /// `None` means "not distinguishable on the tested prefix" (including
    /// undecided bits).
    pub fn first_difference(&self, other: &OracleReal<N>, window: usize) -> Option<usize> {
        (0..window).find(|&i| {
            let n = N::from_usize_exact(i);
            match (self.bit(&n).to_bit(), other.bit(&n).to_bit()) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            }
        })
    }
}

impl<N: Nat> fmt::Debug for OracleReal<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OracleReal({self})")
    }
}

impl<N: Nat> fmt::Display for OracleReal<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleReal::UltimatelyPeriodic { prefix, period } => {
                write!(f, "{};{}", bits_string(prefix), bits_string(period))
            }
            OracleReal::FinitePrefix { prefix, tail } => {
                if *tail {
                    write!(f, "{};1", bits_string(prefix))
                } else {
                    write!(f, "{};", bits_string(prefix))
                }
            }
            OracleReal::Computed { name, .. } => write!(f, "<computed {name}>"),
        }
    }
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<Vec<bool>, OracleSpecError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(OracleSpecError::BadBit(other)),
        })
        .collect()
}
