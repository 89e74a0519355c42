//! Experiment drivers: the halting-set oracle service, the universal
//! evaluator built on it, recognizability experiments, and enumeration
//! censuses.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use rayon::prelude::*;
use thiserror::Error;

use crate::isa::{emit_asm, rank, transform_output_filter, transform_set_input, unrank, Program};
use crate::nat::Nat;
use crate::oracle::{OracleReal, Trit};
use crate::vm::{run, Budget, MachineMode, Verdict};

/// Memoized answers about `{n | program n halts from the all-zero
/// configuration, empty oracle}`. Answers are certificate-backed and
/// stable: a fixed budget is part of the service, so repeated queries
/// agree, and concurrent queries behave as an atomic map.
pub struct HaltingService<N: Nat> {
    mode: MachineMode,
    budget: Budget,
    oracle: OracleReal<N>,
    memo: RwLock<HashMap<BigUint, Verdict<N>>>,
}

impl<N: Nat> HaltingService<N> {
    pub fn new(mode: MachineMode, budget: Budget) -> Self {
        HaltingService {
            mode,
            budget: budget.without_trace(),
            oracle: OracleReal::zeros(),
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn mode(&self) -> MachineMode {
        self.mode
    }

    /// The memoized verdict for the program of rank `n`.
    pub fn verdict(&self, n: &BigUint) -> Verdict<N> {
        if let Some(verdict) = self.memo.read().expect("memo lock").get(n) {
            return verdict.clone();
        }
        let program = unrank(n);
        let result = run(&program, &self.oracle, self.mode, N::zero(), &self.budget);
        let mut memo = self.memo.write().expect("memo lock");
        memo.entry(n.clone()).or_insert(result.verdict).clone()
    }

    /// One bit of the halting set: 1 if program `n` halts, 0 if divergence
    /// is certified, undecided on budget exhaustion. Ranks are unbounded
    /// naturals; transformed programs routinely have astronomical ones.
    pub fn halting_bit(&self, n: &BigUint) -> Trit {
        match self.verdict(n) {
            Verdict::Halted { .. } => Trit::One,
            Verdict::Diverges { .. } => Trit::Zero,
            Verdict::Unknown { .. } => Trit::Undecided,
        }
    }

    /// The halting set as a computed oracle backend.
    pub fn as_oracle(self: &Arc<Self>) -> OracleReal<N> {
        let service = Arc::clone(self);
        let name = format!("halting-set-{}", self.mode);
        OracleReal::computed(name, Arc::new(move |n: &N| {
            let n = n.to_biguint().expect("unsigned scalar converts");
            service.halting_bit(&n)
        }))
    }

    /// Evaluate program `i` on input `j` through the halting set alone:
    /// first ask whether it halts at all, then filter on each candidate
    /// output in turn. The filter program for the true output halts, all
    /// others provably spin, so the loop ends as soon as the prior
    /// halting answer is trustworthy.
    pub fn universal_eval(&self, i: &BigUint, j: usize) -> UniversalEval {
        let program = unrank(i);
        let halts = self.halting_bit(&rank(&transform_set_input(&program, j)));
        match halts {
            Trit::Zero => return UniversalEval::Diverges,
            Trit::Undecided => return UniversalEval::Undecided,
            Trit::One => {}
        }
        // Register values grow by at most one per concrete step and never
        // grow at limits, so the output of a halting run is bounded by the
        // input plus the total concrete-step allowance.
        let output_bound = j + self.budget.max_steps * self.budget.max_jumps + 1;
        for k in 0..=output_bound {
            let filtered = transform_set_input(&transform_output_filter(&program, k), j);
            match self.halting_bit(&rank(&filtered)) {
                Trit::One => return UniversalEval::Halts(k),
                Trit::Undecided => return UniversalEval::Undecided,
                Trit::Zero => {}
            }
        }
        UniversalEval::Undecided
    }
}

/// Result of the universal evaluator, conventionally coded as a single
/// natural: 0 for divergence, `k + 1` for output `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniversalEval {
    Diverges,
    Halts(usize),
    Undecided,
}

impl UniversalEval {
    pub fn code(&self) -> Option<u64> {
        match self {
            UniversalEval::Diverges => Some(0),
            UniversalEval::Halts(k) => Some(*k as u64 + 1),
            UniversalEval::Undecided => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error("decoy {index} is not bitwise-distinguishable from the designated real on the first {window} bits")]
    IndistinguishableDecoy { index: usize, window: usize },
}

/// Outcome of running the recognizer on one candidate oracle.
#[derive(Debug, Clone)]
pub struct CandidateOutcome<N: Nat> {
    pub oracle: String,
    pub designated: bool,
    pub verdict: Verdict<N>,
}

/// Overall classification of a recognition experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecognitionOutcome {
    /// Output 1 on the designated real, 0 on every decoy, all runs halted.
    Passes,
    /// A definite counterexample: wrong output or certified divergence on
    /// the named candidate.
    Fails { witness: usize },
    /// No counterexample, but these candidates came back undecided.
    Inconclusive { unknowns: Vec<usize> },
}

/// Report of one recognizability experiment.
#[derive(Debug, Clone)]
pub struct RecognitionReport<N: Nat> {
    pub program_rank: BigUint,
    pub program_text: String,
    /// Candidate 0 is the designated real, then the decoys in order.
    pub candidates: Vec<CandidateOutcome<N>>,
    pub outcome: RecognitionOutcome,
}

const DISTINGUISH_WINDOW: usize = 512;

/// Does `program` recognize `designated` against the decoys? Runs it with
/// input 0 on every candidate and classifies per the definition: output 1
/// exactly on the designated real, output 0 on the others, always halting.
pub fn recognize_experiment<N: Nat>(
    program: &Program,
    designated: &OracleReal<N>,
    decoys: &[OracleReal<N>],
    mode: MachineMode,
    budget: &Budget,
) -> Result<RecognitionReport<N>, RecognizeError> {
    for (index, decoy) in decoys.iter().enumerate() {
        if designated.first_difference(decoy, DISTINGUISH_WINDOW).is_none() {
            return Err(RecognizeError::IndistinguishableDecoy {
                index,
                window: DISTINGUISH_WINDOW,
            });
        }
    }
    let mut candidates = Vec::with_capacity(decoys.len() + 1);
    for (position, oracle) in std::iter::once(designated).chain(decoys).enumerate() {
        let designated = position == 0;
        let result = run(program, oracle, mode, N::zero(), budget);
        candidates.push(CandidateOutcome {
            oracle: oracle.to_string(),
            designated,
            verdict: result.verdict,
        });
    }

    let mut unknowns = Vec::new();
    let mut failure = None;
    for (index, candidate) in candidates.iter().enumerate() {
        match &candidate.verdict {
            Verdict::Halted { output, .. } => {
                let expected = if candidate.designated { N::one() } else { N::zero() };
                if *output != expected && failure.is_none() {
                    failure = Some(index);
                }
            }
            Verdict::Diverges { .. } => {
                if failure.is_none() {
                    failure = Some(index);
                }
            }
            Verdict::Unknown { .. } => unknowns.push(index),
        }
    }
    let outcome = match failure {
        Some(witness) => RecognitionOutcome::Fails { witness },
        None if !unknowns.is_empty() => RecognitionOutcome::Inconclusive { unknowns },
        None => RecognitionOutcome::Passes,
    };
    Ok(RecognitionReport {
        program_rank: rank(program),
        program_text: emit_asm(program),
        candidates,
        outcome,
    })
}

/// One row of a halting census.
#[derive(Debug, Clone)]
pub struct CensusRow<N: Nat> {
    pub rank: u64,
    pub verdict: Verdict<N>,
}

/// The census over an initial segment of the enumeration.
#[derive(Debug, Clone)]
pub struct Census<N: Nat> {
    pub mode: MachineMode,
    pub rows: Vec<CensusRow<N>>,
    pub halts: usize,
    pub diverges: usize,
    pub unknown: usize,
}

/// Classify every program of rank below `max_rank`. Runs are independent,
/// so the table is computed in parallel; the result is ordered by rank
/// and deterministic.
pub fn halting_census<N: Nat>(mode: MachineMode, max_rank: u64, budget: &Budget) -> Census<N> {
    let budget = budget.clone().without_trace();
    let oracle: OracleReal<N> = OracleReal::zeros();
    let rows: Vec<CensusRow<N>> = (0..max_rank)
        .into_par_iter()
        .map(|r| {
            let program = unrank(&BigUint::from(r));
            let result = run(&program, &oracle, mode, N::zero(), &budget);
            CensusRow { rank: r, verdict: result.verdict }
        })
        .collect();
    let halts = rows.iter().filter(|r| matches!(r.verdict, Verdict::Halted { .. })).count();
    let diverges = rows.iter().filter(|r| matches!(r.verdict, Verdict::Diverges { .. })).count();
    let unknown = rows.len() - halts - diverges;
    Census { mode, rows, halts, diverges, unknown }
}

/// Bundled demonstration programs.
pub mod demos {
    /// Recognizer for the all-zeros real: scans oracle bits in an
    /// unbounded loop, rejecting on the first 1; only crossing the first
    /// limit (all bits zero) resets the scan flag and accepts.
    pub const ZEROS_RECOGNIZER: &str = include_str!("../demos/zeros_recognizer.itrm");

    /// The two-line increment loop: grows `r1` forever. Diverges at the
    /// first limit on an unresetting machine; on a resetting one the limit
    /// configuration equals the start, so the run is periodic forever.
    pub const INCREMENT_LOOP: &str = include_str!("../demos/increment_loop.itrm");

    /// A counter that survives one level of limits: each scan loop resets
    /// at omega, omega*2, ..., while `r2` climbs once per limit, so the
    /// clock has to reach omega^2 (and divergence is only certified at
    /// omega^3).
    pub const NESTED_COUNTER: &str = include_str!("../demos/nested_counter.itrm");

    /// Two alternating scan loops per outer round: one outer iteration
    /// spans omega*2 of clock, so the outer loop closes at omega^2.
    pub const ALTERNATING_LOOPS: &str = include_str!("../demos/alternating_loops.itrm");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_asm;
    use crate::vm::simulate;
    use crate::vm::SimOutcome;

    fn service() -> HaltingService<u64> {
        HaltingService::new(MachineMode::Itrm, Budget::default())
    }

    #[test]
    fn halting_bits_for_tiny_programs() {
        let s = service();
        let halt = rank(&parse_asm("HALT").unwrap());
        assert_eq!(s.halting_bit(&halt), Trit::One);
        let spin = rank(&parse_asm("JZ r1 0").unwrap());
        assert_eq!(s.halting_bit(&spin), Trit::Zero);
        // The empty program halts immediately by convention.
        assert_eq!(s.halting_bit(&BigUint::ZERO), Trit::One);
    }

    #[test]
    fn memoized_answers_are_stable() {
        let s = service();
        let n = rank(&parse_asm("INC r1\nJZ r2 0").unwrap());
        let first = s.verdict(&n);
        let second = s.verdict(&n);
        assert_eq!(first, second);
    }

    #[test]
    fn service_as_oracle_backend() {
        let s = Arc::new(service());
        let oracle = s.as_oracle();
        let halt = rank(&parse_asm("HALT").unwrap());
        let spin = rank(&parse_asm("JZ r1 0").unwrap());
        let halt64 = u64::try_from(&halt).unwrap();
        let spin64 = u64::try_from(&spin).unwrap();
        assert_eq!(oracle.bit(&halt64), Trit::One);
        assert_eq!(oracle.bit(&spin64), Trit::Zero);
    }

    #[test]
    fn universal_eval_matches_direct_simulation() {
        let s = service();
        // [HALT]: output equals the input.
        let halt = rank(&parse_asm("HALT").unwrap());
        assert_eq!(s.universal_eval(&halt, 5), UniversalEval::Halts(5));
        assert_eq!(s.universal_eval(&halt, 5).code(), Some(6));
        // [JZ r1 0] on input 0 spins.
        let spin = rank(&parse_asm("JZ r1 0").unwrap());
        assert_eq!(s.universal_eval(&spin, 0), UniversalEval::Diverges);
        assert_eq!(s.universal_eval(&spin, 0).code(), Some(0));
        // ...but halts immediately on nonzero input.
        assert_eq!(s.universal_eval(&spin, 3), UniversalEval::Halts(3));
        // [INC r1, HALT] outputs input + 1.
        let inc = rank(&parse_asm("INC r1\nHALT").unwrap());
        assert_eq!(s.universal_eval(&inc, 0), UniversalEval::Halts(1));
        assert_eq!(s.universal_eval(&inc, 0).code(), Some(2));
        // Cross-check one against the simulator.
        let program = parse_asm("INC r1\nINC r1\nHALT").unwrap();
        match simulate(&program, &OracleReal::<u64>::zeros(), 4u64, 100) {
            SimOutcome::Halted { output, .. } => {
                assert_eq!(
                    s.universal_eval(&rank(&program), 4),
                    UniversalEval::Halts(output as usize)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn census_over_a_small_prefix() {
        let census: Census<u64> = halting_census(MachineMode::Itrm, 64, &Budget::default());
        assert_eq!(census.rows.len(), 64);
        assert_eq!(census.halts + census.diverges + census.unknown, 64);
        // The first two programs (empty, [HALT]) both halt at stage 0.
        assert!(matches!(census.rows[0].verdict, Verdict::Halted { output: 0, ref at } if at.is_zero()));
        assert!(matches!(census.rows[1].verdict, Verdict::Halted { output: 0, ref at } if at.is_zero()));
    }

    #[test]
    fn census_monotone_under_budget() {
        // Raising the budget never flips a decided verdict, it only
        // shrinks the undecided set.
        let small: Census<u64> =
            halting_census(MachineMode::Witrm, 128, &Budget::default().with_max_steps(40));
        let large: Census<u64> =
            halting_census(MachineMode::Witrm, 128, &Budget::default().with_max_steps(400));
        let mut shrunk = true;
        for (a, b) in small.rows.iter().zip(&large.rows) {
            match (&a.verdict, &b.verdict) {
                (Verdict::Halted { output: o1, at: t1 }, Verdict::Halted { output: o2, at: t2 }) => {
                    assert_eq!((o1, t1), (o2, t2));
                }
                (Verdict::Diverges { .. }, Verdict::Diverges { .. }) => {}
                (Verdict::Unknown { .. }, _) => {}
                (decided, other) => panic!("budget flip at rank {}: {decided:?} vs {other:?}", a.rank),
            }
        }
        shrunk &= large.unknown <= small.unknown;
        assert!(shrunk);
    }

    #[test]
    fn recognize_rejects_indistinguishable_decoys() {
        let program = parse_asm("HALT").unwrap();
        let designated = OracleReal::<u64>::zeros();
        let same = OracleReal::parse(";0").unwrap();
        assert!(matches!(
            recognize_experiment(&program, &designated, &[same], MachineMode::Itrm, &Budget::default()),
            Err(RecognizeError::IndistinguishableDecoy { index: 0, .. })
        ));
    }

    #[test]
    fn constant_output_program_fails() {
        // Always outputs 1: must fail on the first decoy.
        let program = parse_asm("INC r1\nHALT").unwrap();
        let designated = OracleReal::<u64>::zeros();
        let decoys = [OracleReal::parse("1;0").unwrap()];
        let report = recognize_experiment(
            &program,
            &designated,
            &decoys,
            MachineMode::Itrm,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(report.outcome, RecognitionOutcome::Fails { witness: 1 });
    }
}
