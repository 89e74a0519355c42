//! Deterministic execution of a program against an oracle, under resetting
//! (ITRM) or unresetting (wITRM) limit semantics, with an ordinal clock.
//!
//! Successor stages work exactly like a classical register machine. Limit
//! stages are never reached by brute force: the accelerator
//! ([`crate::accel`]) certifies a loop and [`limit_config`] applies the
//! limit rule to it. At a limit, each register takes the liminf of its
//! history when that is finite; an infinite liminf resets the register to
//! zero on an ITRM and makes the whole run divergent on a wITRM. The
//! active line always takes the (finite) liminf, which for a certified
//! loop is the least line the loop visits cofinally.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::accel::{Accelerator, Certificate, LoopSummary};
use crate::isa::{Instruction, Program};
use crate::nat::{dec_clamped, Nat};
use crate::oracle::{OracleReal, Trit};
use crate::ordinal::Ordinal;

/// Resetting or unresetting limit behaviour; fixed for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineMode {
    Itrm,
    Witrm,
}

impl fmt::Display for MachineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineMode::Itrm => write!(f, "itrm"),
            MachineMode::Witrm => write!(f, "witrm"),
        }
    }
}

impl FromStr for MachineMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "itrm" => Ok(MachineMode::Itrm),
            "witrm" => Ok(MachineMode::Witrm),
            other => Err(format!("unknown machine mode {other:?} (itrm or witrm)")),
        }
    }
}

/// The clock-free part of a configuration: active line and register file.
/// Registers are sparse; an absent index reads as zero, and zero values are
/// never stored, so equal states compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineState<N: Nat> {
    pub line: usize,
    pub regs: BTreeMap<usize, N>,
}

impl<N: Nat> Default for MachineState<N> {
    fn default() -> Self {
        MachineState { line: 0, regs: BTreeMap::new() }
    }
}

impl<N: Nat> MachineState<N> {
    pub fn initial(input: N) -> Self {
        let mut state = MachineState { line: 0, regs: BTreeMap::new() };
        state.set(1, input);
        state
    }

    pub fn get(&self, register: usize) -> N {
        self.regs.get(&register).cloned().unwrap_or_else(N::zero)
    }

    pub fn set(&mut self, register: usize, value: N) {
        if value.is_zero() {
            self.regs.remove(&register);
        } else {
            self.regs.insert(register, value);
        }
    }

    pub fn output(&self) -> N {
        self.get(1)
    }
}

/// A full configuration: transfinite clock plus machine state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration<N: Nat> {
    pub clock: Ordinal<N>,
    pub state: MachineState<N>,
}

/// What one successor step observed; the accelerator compares these across
/// loop iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepInfo<N: Nat> {
    pub line: usize,
    /// `Some(true)` when a `JZ` jumped, `Some(false)` when it fell through.
    pub branch_taken: Option<bool>,
    /// Oracle read: index queried and the bit obtained.
    pub oracle_read: Option<(N, bool)>,
    /// A `DEC` hit an already-zero register.
    pub clamped: bool,
}

/// Result of executing the active line once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecResult<N: Nat> {
    /// State advanced by one successor stage.
    Step(StepInfo<N>),
    /// The active line was `HALT` or out of range.
    Halt { output: N },
    /// The oracle could not answer; the run cannot proceed.
    OracleUndecided { index: N },
}

/// Execute the active line of `state` in place.
pub fn exec<N: Nat>(
    program: &Program,
    oracle: &OracleReal<N>,
    state: &mut MachineState<N>,
) -> ExecResult<N> {
    let line = state.line;
    let Some(instruction) = program.get(line) else {
        return ExecResult::Halt { output: state.output() };
    };
    let mut info = StepInfo { line, branch_taken: None, oracle_read: None, clamped: false };
    match *instruction {
        Instruction::Halt => return ExecResult::Halt { output: state.output() },
        Instruction::Inc(r) => {
            state.set(r, state.get(r) + N::one());
            state.line += 1;
        }
        Instruction::Dec(r) => {
            let value = state.get(r);
            info.clamped = value.is_zero();
            state.set(r, dec_clamped(&value));
            state.line += 1;
        }
        Instruction::Copy { src, dst } => {
            state.set(dst, state.get(src));
            state.line += 1;
        }
        Instruction::Oracle { idx, dst } => {
            let index = state.get(idx);
            match oracle.bit(&index) {
                Trit::Undecided => return ExecResult::OracleUndecided { index },
                answer => {
                    let bit = answer.to_bit().unwrap();
                    info.oracle_read = Some((index.clone(), bit));
                    state.set(dst, if bit { N::one() } else { N::zero() });
                    state.line += 1;
                }
            }
        }
        Instruction::Jz { reg, target } => {
            let taken = state.get(reg).is_zero();
            info.branch_taken = Some(taken);
            state.line = if taken { target } else { state.line + 1 };
        }
    }
    ExecResult::Step(info)
}

/// Why a divergence certificate was issued, for display and traces.
impl<N: Nat> Certificate<N> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Certificate::Cycle(_) => "cycle",
            Certificate::InfiniteLiminf { .. } => "infinite-liminf",
            Certificate::LimitFixedPoint { .. } => "limit-fixed-point",
        }
    }
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<N: Nat> {
    /// The run reached `HALT` (or ran off the program) at stage `at`; the
    /// output is the content of `r1` there.
    Halted { output: N, at: Ordinal<N> },
    /// The run provably never halts.
    Diverges { certificate: Certificate<N> },
    /// The budget ran out before anything could be certified.
    Unknown { reason: UnknownReason, steps: usize, jumps: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    /// Concrete step budget exhausted at the current acceleration level.
    StepBudget,
    /// Limit-jump budget exhausted.
    JumpBudget,
    /// A level's history exceeded its cap, so loop detection gave up.
    HistoryCap,
    /// The oracle answered `Undecided` at this bit index.
    OracleUndecided { index: String },
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::StepBudget => write!(f, "step budget exhausted"),
            UnknownReason::JumpBudget => write!(f, "limit-jump budget exhausted"),
            UnknownReason::HistoryCap => write!(f, "history cap exceeded"),
            UnknownReason::OracleUndecided { index } => {
                write!(f, "oracle undecided at bit {index}")
            }
        }
    }
}

/// Resource limits for a run.
#[derive(Debug, Clone)]
pub struct Budget {
    /// Concrete steps allowed since the last limit jump.
    pub max_steps: usize,
    /// Total limit jumps allowed.
    pub max_jumps: usize,
    /// Retained configurations per acceleration level.
    pub history_cap: usize,
    /// Consecutive isomorphic iterations required before accepting a
    /// monotone loop.
    pub window: usize,
    /// Collect a trace (disable for bulk censuses).
    pub trace: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 5000,
            max_jumps: 64,
            history_cap: 10_000,
            window: 3,
            trace: true,
        }
    }
}

impl Budget {
    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn without_trace(mut self) -> Self {
        self.trace = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceEvent {
    Step,
    Limit,
    Halt,
    Certificate,
}

/// One line of the run trace; serialises to the line-delimited JSON form
/// `{"stage": "...", "line": n, "regs": {"1": "..."}, "event": "..."}`.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub stage: String,
    pub line: usize,
    pub regs: BTreeMap<usize, String>,
    pub event: TraceEvent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

impl TraceRecord {
    pub fn at<N: Nat>(stage: &Ordinal<N>, state: &MachineState<N>, event: TraceEvent) -> Self {
        TraceRecord {
            stage: stage.to_string(),
            line: state.line,
            regs: state.regs.iter().map(|(r, v)| (*r, v.to_string())).collect(),
            event,
            kind: None,
            sigma: None,
            tau: None,
            level: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace records serialise")
    }
}

/// A verdict plus the structured trace of concrete steps and limit jumps.
#[derive(Debug, Clone)]
pub struct RunResult<N: Nat> {
    pub verdict: Verdict<N>,
    pub trace: Vec<TraceRecord>,
}

/// Run `program` on `oracle` starting from all-zero registers except
/// `r1 = input`, interleaving concrete steps with certified limit jumps.
pub fn run<N: Nat>(
    program: &Program,
    oracle: &OracleReal<N>,
    mode: MachineMode,
    input: N,
    budget: &Budget,
) -> RunResult<N> {
    Accelerator::new(program, oracle, mode, budget.clone()).run(MachineState::initial(input))
}

/// Outcome of the limit rule for a certified loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitOutcome<N: Nat> {
    /// The configuration at the limit stage.
    Config(Configuration<N>),
    /// wITRM only: some register had an infinite liminf, so the limit
    /// state is undefined and the run diverges.
    WitrmDiverges { register: usize },
}

/// Apply the limit rule to a certified loop summary.
///
/// Registers with a cofinally recurring (delta-zero) value take the least
/// such value; registers that grow at every recurrence have infinite
/// liminf: zero on an ITRM, divergence on a wITRM. The active line becomes
/// the least line the loop visits, and the clock jumps to
/// `entry + period * omega`.
pub fn limit_config<N: Nat>(summary: &LoopSummary<N>, mode: MachineMode) -> LimitOutcome<N> {
    if let Some(&register) = summary.infinite_regs.first() {
        if mode == MachineMode::Witrm {
            return LimitOutcome::WitrmDiverges { register };
        }
    }
    let mut state = MachineState { line: summary.limit_line, regs: BTreeMap::new() };
    for (&register, value) in &summary.finite_liminf {
        state.set(register, value.clone());
    }
    let clock = summary
        .entry_stage
        .add(&summary.period.times_omega().expect("loop period is positive"));
    LimitOutcome::Config(Configuration { clock, state })
}

/// How a plain (never transfinite) simulation ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimOutcome<N: Nat> {
    Halted { output: N, steps: usize },
    OracleUndecided { index: N, step: usize },
    /// Still running after the step budget.
    Exhausted,
}

/// Step-by-step simulation with no acceleration and no history, on a flat
/// register file. This is the cheap path for bulk confirmation runs; limit
/// stages are out of its reach by construction.
pub fn simulate<N: Nat>(
    program: &Program,
    oracle: &OracleReal<N>,
    input: N,
    max_steps: usize,
) -> SimOutcome<N> {
    simulate_with(program, oracle, input, max_steps, |_, _, _| {})
}

/// [`simulate`], invoking `visit(step, line, regs)` on the configuration
/// at each stage before it executes (including the initial one).
pub fn simulate_with<N: Nat>(
    program: &Program,
    oracle: &OracleReal<N>,
    input: N,
    max_steps: usize,
    mut visit: impl FnMut(usize, usize, &[N]),
) -> SimOutcome<N> {
    let width = program.used_registers().into_iter().max().unwrap_or(1).max(1);
    let mut regs: Vec<N> = vec![N::zero(); width + 1];
    regs[1] = input;
    let mut line = 0usize;
    for step in 0..=max_steps {
        visit(step, line, &regs);
        if step == max_steps {
            return SimOutcome::Exhausted;
        }
        let Some(instruction) = program.get(line) else {
            return SimOutcome::Halted { output: regs[1].clone(), steps: step };
        };
        match *instruction {
            Instruction::Halt => {
                return SimOutcome::Halted { output: regs[1].clone(), steps: step }
            }
            Instruction::Inc(r) => {
                regs[r] = regs[r].clone() + N::one();
                line += 1;
            }
            Instruction::Dec(r) => {
                regs[r] = dec_clamped(&regs[r]);
                line += 1;
            }
            Instruction::Copy { src, dst } => {
                regs[dst] = regs[src].clone();
                line += 1;
            }
            Instruction::Oracle { idx, dst } => match oracle.bit(&regs[idx]) {
                Trit::Undecided => {
                    return SimOutcome::OracleUndecided { index: regs[idx].clone(), step }
                }
                answer => {
                    regs[dst] = if answer == Trit::One { N::one() } else { N::zero() };
                    line += 1;
                }
            },
            Instruction::Jz { reg, target } => {
                line = if regs[reg].is_zero() { target } else { line + 1 };
            }
        }
    }
    SimOutcome::Exhausted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{parse_asm, transform_output_filter, transform_set_input};

    type S = MachineState<u64>;

    fn zeros() -> OracleReal<u64> {
        OracleReal::zeros()
    }

    #[test]
    fn successor_steps_match_urm_semantics() {
        let p = parse_asm("INC r1").unwrap();
        let mut s = S::initial(5);
        assert!(matches!(exec(&p, &zeros(), &mut s), ExecResult::Step(_)));
        assert_eq!((s.line, s.get(1)), (1, 6));

        let p = parse_asm("ORACLE r1 r2").unwrap();
        let mut s = S::initial(0);
        let oracle = OracleReal::parse("1;0").unwrap();
        exec(&p, &oracle, &mut s);
        assert_eq!(s.get(2), 1, "reads bit 0");

        let p = parse_asm("DEC r1").unwrap();
        let mut s = S::initial(0);
        match exec(&p, &zeros(), &mut s) {
            ExecResult::Step(info) => assert!(info.clamped),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(s.get(1), 0, "DEC clamps at zero");
    }

    #[test]
    fn halting_cases() {
        // Explicit HALT: output is r1 at that stage.
        let p = parse_asm("HALT").unwrap();
        let mut s = S::initial(7);
        assert_eq!(exec(&p, &zeros(), &mut s), ExecResult::Halt { output: 7 });
        // Out-of-range active line halts too.
        let p = Program::empty();
        let mut s = S::initial(3);
        assert_eq!(exec(&p, &zeros(), &mut s), ExecResult::Halt { output: 3 });
    }

    #[test]
    fn jump_out_of_range_halts_on_arrival() {
        let p = parse_asm("JZ r1 99").unwrap();
        assert_eq!(
            simulate(&p, &zeros(), 0u64, 100),
            SimOutcome::Halted { output: 0, steps: 1 }
        );
    }

    #[test]
    fn set_input_transform_is_step_equivalent() {
        // run(transform_set_input(P, j)) from zero == run(P with r1 = j).
        let programs = [
            "INC r1\nHALT",
            "DEC r1\nJZ r1 3\nJZ r2 0\nHALT",
            "COPY r1 r2\nINC r2\nJZ r3 5\nHALT\nHALT\nCOPY r2 r1\nHALT",
        ];
        for text in programs {
            let p = parse_asm(text).unwrap();
            for j in 0..6u64 {
                let direct = simulate(&p, &zeros(), j, 2000);
                let staged = simulate(
                    &transform_set_input(&p, j as usize),
                    &zeros(),
                    0u64,
                    2000 + j as usize,
                );
                match (direct, staged) {
                    (
                        SimOutcome::Halted { output: a, steps: sa },
                        SimOutcome::Halted { output: b, steps: sb },
                    ) => {
                        assert_eq!(a, b, "{text} with j={j}");
                        assert_eq!(sa + j as usize, sb, "step offset is exactly j");
                    }
                    (SimOutcome::Exhausted, SimOutcome::Exhausted) => {}
                    other => panic!("mismatch on {text} j={j}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn output_filter_halts_exactly_on_match() {
        // P = [HALT] outputs 0: filter k=0 halts, k=1 spins.
        let halt = parse_asm("HALT").unwrap();
        let ok = transform_output_filter(&halt, 0);
        assert!(matches!(
            simulate(&ok, &zeros(), 0u64, 1000),
            SimOutcome::Halted { .. }
        ));
        let spin = transform_output_filter(&halt, 1);
        assert_eq!(simulate(&spin, &zeros(), 0u64, 1000), SimOutcome::Exhausted);

        // P = [INC r1, HALT] outputs 1: k=1 halts, k=0 spins.
        let inc = parse_asm("INC r1\nHALT").unwrap();
        assert!(matches!(
            simulate(&transform_output_filter(&inc, 1), &zeros(), 0u64, 1000),
            SimOutcome::Halted { .. }
        ));
        assert_eq!(
            simulate(&transform_output_filter(&inc, 0), &zeros(), 0u64, 1000),
            SimOutcome::Exhausted
        );
    }

    #[test]
    fn filter_composite_brute_force() {
        // All programs with <= 2 instructions over a small universe, inputs
        // and expected outputs <= 3: the set-input/output-filter composite
        // halts iff P on input j halts with output k.
        let universe = small_instruction_universe();
        let mut programs: Vec<Program> = vec![Program::empty()];
        for a in &universe {
            programs.push(Program::new(vec![a.clone()]));
            for b in &universe {
                programs.push(Program::new(vec![a.clone(), b.clone()]));
            }
        }
        for p in &programs {
            for j in 0..4u64 {
                let direct = simulate(p, &zeros(), j, 400);
                for k in 0..4usize {
                    let composite =
                        transform_set_input(&transform_output_filter(p, k), j as usize);
                    let got = simulate(&composite, &zeros(), 0u64, 4000);
                    match &direct {
                        SimOutcome::Halted { output, .. } => {
                            if *output == k as u64 {
                                assert!(
                                    matches!(got, SimOutcome::Halted { .. }),
                                    "{p:?} j={j} k={k} should pass the filter"
                                );
                            } else {
                                assert_eq!(
                                    got,
                                    SimOutcome::Exhausted,
                                    "{p:?} j={j} k={k} must spin"
                                );
                            }
                        }
                        // P never halts concretely: the composite must not
                        // halt either (its P-part never reaches the block).
                        SimOutcome::Exhausted => {
                            assert_eq!(got, SimOutcome::Exhausted, "{p:?} j={j} k={k}")
                        }
                        SimOutcome::OracleUndecided { .. } => unreachable!(),
                    }
                }
            }
        }
    }

    fn small_instruction_universe() -> Vec<Instruction> {
        let mut u = vec![Instruction::Halt];
        for r in 1..3usize {
            u.push(Instruction::Inc(r));
            u.push(Instruction::Dec(r));
            for s in 1..3usize {
                u.push(Instruction::Copy { src: r, dst: s });
            }
            for t in 0..4usize {
                u.push(Instruction::Jz { reg: r, target: t });
            }
        }
        u
    }
}
