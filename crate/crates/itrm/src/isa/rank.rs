//! The pairing bijection and the canonical enumeration `(P_n | n in N)`
//! of all programs.
//!
//! Enumeration layout, from the outside in:
//!
//! * rank 0 is the empty program;
//! * rank `1 + pair(L-1, m)` is the length-`L` program whose instruction
//!   codes fold into `m` by iterated pairing (`m = c_0` for `L = 1`, else
//!   `m = pair(c_0, pair(c_1, ...))`);
//! * instruction code 0 is `HALT`; code `1 + 5*payload + tag` carries the
//!   operand instructions with tags `INC 0, DEC 1, COPY 2, ORACLE 3, JZ 4`
//!   and payload `r-1` (unary) or `pair(a-1, b-1)` / `pair(reg-1, target)`
//!   (binary).
//!
//! Because programs of every length are infinite in number, no bijection
//! with the naturals can put literally all shorter programs first; the
//! pairing step interleaves the length classes instead. Within a fixed
//! length, rank order is instruction-code order, and the all-`HALT`
//! program is the least of its length.

use num_bigint::BigUint;

use num_traits::{One, Zero};

use crate::nat::Nat;

use super::{Instruction, Program};

/// Cantor pairing `p(i, j) = (i + j)(i + j + 1)/2 + j`.
pub fn pair<N: Nat>(i: &N, j: &N) -> N {
    let s = i.clone() + j.clone();
    let t = (s.clone() * (s + N::one())) / N::from_usize_exact(2);
    t + j.clone()
}

/// Inverse of [`pair`].
pub fn unpair<N: Nat>(n: &N) -> (N, N) {
    let eight = N::from_usize_exact(8);
    let w = ((eight * n.clone() + N::one()).sqrt() - N::one()) / N::from_usize_exact(2);
    let t = (w.clone() * (w.clone() + N::one())) / N::from_usize_exact(2);
    let j = n.clone() - t;
    let i = w - j.clone();
    (i, j)
}

const TAG_INC: usize = 0;
const TAG_DEC: usize = 1;
const TAG_COPY: usize = 2;
const TAG_ORACLE: usize = 3;
const TAG_JZ: usize = 4;
const TAG_COUNT: usize = 5;

fn instruction_code(instruction: &Instruction) -> BigUint {
    let (tag, payload) = match *instruction {
        Instruction::Halt => return BigUint::ZERO,
        Instruction::Inc(r) => (TAG_INC, BigUint::from(r - 1)),
        Instruction::Dec(r) => (TAG_DEC, BigUint::from(r - 1)),
        Instruction::Copy { src, dst } => {
            (TAG_COPY, pair(&BigUint::from(src - 1), &BigUint::from(dst - 1)))
        }
        Instruction::Oracle { idx, dst } => {
            (TAG_ORACLE, pair(&BigUint::from(idx - 1), &BigUint::from(dst - 1)))
        }
        Instruction::Jz { reg, target } => {
            (TAG_JZ, pair(&BigUint::from(reg - 1), &BigUint::from(target)))
        }
    };
    BigUint::one() + payload * BigUint::from(TAG_COUNT) + BigUint::from(tag)
}

fn decode_instruction(code: &BigUint) -> Instruction {
    if code.is_zero() {
        return Instruction::Halt;
    }
    let shifted = code - BigUint::one();
    let tag = usize::try_from(&shifted % BigUint::from(TAG_COUNT)).unwrap();
    let payload = shifted / BigUint::from(TAG_COUNT);
    let unary = || usize::try_from(&payload).expect("register index overflows usize") + 1;
    let binary = || {
        let (a, b) = unpair(&payload);
        (
            usize::try_from(&a).expect("operand overflows usize"),
            usize::try_from(&b).expect("operand overflows usize"),
        )
    };
    match tag {
        TAG_INC => Instruction::Inc(unary()),
        TAG_DEC => Instruction::Dec(unary()),
        TAG_COPY => {
            let (src, dst) = binary();
            Instruction::Copy { src: src + 1, dst: dst + 1 }
        }
        TAG_ORACLE => {
            let (idx, dst) = binary();
            Instruction::Oracle { idx: idx + 1, dst: dst + 1 }
        }
        TAG_JZ => {
            let (reg, target) = binary();
            Instruction::Jz { reg: reg + 1, target }
        }
        _ => unreachable!(),
    }
}

/// Fold instruction codes of a nonempty program into one natural.
fn fold_codes(codes: &[BigUint]) -> BigUint {
    let (last, init) = codes.split_last().expect("nonempty");
    init.iter()
        .rev()
        .fold(last.clone(), |acc, c| pair(c, &acc))
}

fn unfold_codes(mut m: BigUint, len: usize) -> Vec<BigUint> {
    let mut codes = Vec::with_capacity(len);
    for _ in 0..len - 1 {
        let (c, rest) = unpair(&m);
        codes.push(c);
        m = rest;
    }
    codes.push(m);
    codes
}

/// Position of a program in the canonical enumeration.
pub fn rank(program: &Program) -> BigUint {
    if program.is_empty() {
        return BigUint::ZERO;
    }
    let codes: Vec<BigUint> = program.lines().iter().map(instruction_code).collect();
    let len_index = BigUint::from(codes.len() - 1);
    BigUint::one() + pair(&len_index, &fold_codes(&codes))
}

/// The program at position `n`; total on all naturals.
pub fn unrank(n: &BigUint) -> Program {
    if n.is_zero() {
        return Program::empty();
    }
    let (len_index, m) = unpair(&(n - BigUint::one()));
    let len = usize::try_from(&len_index).expect("program length overflows usize") + 1;
    unfold_codes(m, len)
        .iter()
        .map(decode_instruction)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn pairing_follows_the_anti_diagonals() {
        assert_eq!(pair(&0u64, &0), 0);
        assert_eq!(pair(&1u64, &0), 1);
        assert_eq!(pair(&0u64, &1), 2);
        assert_eq!(pair(&2u64, &0), 3);
        assert_eq!(pair(&1u64, &1), 4);
        assert_eq!(pair(&0u64, &2), 5);
    }

    #[test]
    fn unpair_inverts_pair_on_a_grid() {
        for i in 0..100u64 {
            for j in 0..100u64 {
                assert_eq!(unpair(&pair(&i, &j)), (i, j));
            }
        }
        // Same convention at arbitrary precision.
        let i = BigUint::parse_bytes(b"123456789123456789123456789", 10).unwrap();
        let j = BigUint::parse_bytes(b"98765432109876543210", 10).unwrap();
        assert_eq!(unpair(&pair(&i, &j)), (i, j));
    }

    #[test]
    fn enumeration_starts_with_the_empty_program() {
        assert_eq!(unrank(&BigUint::ZERO), Program::empty());
        assert_eq!(rank(&Program::empty()), BigUint::ZERO);
    }

    #[test]
    fn halt_is_the_least_one_line_program() {
        // Smallest one-line rank = 1 + pair(0, smallest code); HALT has
        // code 0, so [HALT] sits at rank 1.
        assert_eq!(rank(&Program::new(vec![Instruction::Halt])), big(1));
        assert_eq!(unrank(&big(1)), Program::new(vec![Instruction::Halt]));
    }

    #[test]
    fn first_instruction_codes_are_stable() {
        // The documented order of the first few instruction codes.
        let decoded: Vec<Instruction> =
            (0..7u64).map(|c| decode_instruction(&big(c))).collect();
        assert_eq!(
            decoded,
            vec![
                Instruction::Halt,
                Instruction::Inc(1),
                Instruction::Dec(1),
                Instruction::Copy { src: 1, dst: 1 },
                Instruction::Oracle { idx: 1, dst: 1 },
                Instruction::Jz { reg: 1, target: 0 },
                Instruction::Inc(2),
            ]
        );
        for c in 0..500u64 {
            assert_eq!(instruction_code(&decode_instruction(&big(c))), big(c));
        }
    }

    #[test]
    fn rank_unrank_round_trip_on_a_prefix() {
        for n in 0..10_000u64 {
            let n = big(n);
            assert_eq!(rank(&unrank(&n)), n);
        }
    }

    #[test]
    fn within_a_length_rank_follows_code_order() {
        // Collect the first 10^4 programs and check that, per length
        // class, rank order equals the documented fold-code order.
        let mut by_len: std::collections::BTreeMap<usize, Vec<(u64, BigUint)>> =
            Default::default();
        for n in 1..10_000u64 {
            let p = unrank(&big(n));
            let codes: Vec<BigUint> = p.lines().iter().map(instruction_code).collect();
            by_len.entry(p.len()).or_default().push((n, fold_codes(&codes)));
        }
        for (_, entries) in by_len {
            for w in entries.windows(2) {
                assert!(w[0].0 < w[1].0);
                assert!(w[0].1 < w[1].1, "code order must match rank order");
            }
        }
    }

    #[test]
    fn transformed_ranks_stay_exact_at_scale() {
        // A ten-line program already has an astronomically large rank;
        // make sure the arbitrary-precision path round-trips it.
        let p: Program = (0..10).map(|i| Instruction::Jz { reg: i + 1, target: 3 * i }).collect();
        let r = rank(&p);
        assert!(r.to_string().len() > 50);
        assert_eq!(unrank(&r), p);
    }
}
