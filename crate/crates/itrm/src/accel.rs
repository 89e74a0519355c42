//! Loop detection, certified limit jumps, and divergence certificates.
//!
//! The engine runs concrete steps and keeps, per acceleration level, the
//! history of configurations since the last limit at that level. Two kinds
//! of loop are recognised:
//!
//! * **Exact repeat** — the same state at two stages with no register ever
//!   dipping below its value at the first (the cycle criterion). On a
//!   wITRM this certifies divergence outright. On an ITRM it certifies a
//!   verbatim replay, so the limit rule applies with every recurring value
//!   a liminf candidate.
//! * **Monotone loop** — `window` consecutive iterations whose line,
//!   branch, clamp and oracle outcomes coincide and whose per-offset
//!   register values form arithmetic progressions with non-negative
//!   common differences. Three collinear points pin each progression, so
//!   the structure replays forever: a zero branch forces a zero delta, a
//!   clamp forces the decremented register constant, and a growing oracle
//!   index is accepted only when the oracle's tail provably keeps
//!   answering the same bit.
//!
//! A certified loop of period `rho` entered at stage `sigma` jumps the
//! clock to `sigma + rho*omega`. The produced configuration is pushed one
//! level up, and that level's history carries, per entry, the minimum each
//! register attained over the whole spanned interval: the liminf at a
//! higher limit is the least such minimum that recurs unchanged, which is
//! what makes nested jumps (omega^2, omega^3, ...) sound. When a produced
//! limit configuration equals the loop's entry configuration the run is
//! literally periodic from there on and a fixed-point divergence
//! certificate is issued.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::isa::Program;
use crate::nat::Nat;
use crate::oracle::{OracleReal, TailInfo};
use crate::ordinal::Ordinal;
use crate::vm::{
    exec, limit_config, Budget, ExecResult, LimitOutcome, MachineMode, MachineState, RunResult,
    StepInfo, TraceEvent, TraceRecord, UnknownReason, Verdict,
};

/// An exact state repeat `Z(tau) = Z(sigma)`, `R_i(tau) = R_i(sigma)`,
/// with `R_i(theta) >= R_i(sigma)` throughout `(sigma, tau)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness<N: Nat> {
    pub level: usize,
    pub sigma: Ordinal<N>,
    pub tau: Ordinal<N>,
    /// The repeated state.
    pub state: MachineState<N>,
    /// Per-register minimum over `(sigma, tau)`; the comparison data
    /// showing the no-dip condition.
    pub between_min: BTreeMap<usize, N>,
}

/// A verified monotone loop, digested to what the limit rule needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSummary<N: Nat> {
    pub level: usize,
    /// Stage at which the verified window starts.
    pub entry_stage: Ordinal<N>,
    pub entry_state: MachineState<N>,
    /// Clock distance covered by one iteration.
    pub period: Ordinal<N>,
    /// History entries per iteration.
    pub period_len: usize,
    /// Iterations verified (1 for verbatim repeats).
    pub window: usize,
    /// Least line the loop visits; the liminf of the active line.
    pub limit_line: usize,
    /// Registers whose liminf is finite, with that value (zeros omitted).
    pub finite_liminf: BTreeMap<usize, N>,
    /// Registers that grow at every recurrence: liminf infinite.
    pub infinite_regs: Vec<usize>,
}

/// Machine-checkable divergence evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate<N: Nat> {
    /// wITRM cycle criterion.
    Cycle(CycleWitness<N>),
    /// wITRM: a limit was reached with some register's liminf infinite,
    /// so the unresetting machine has no defined limit state.
    InfiniteLiminf {
        stage: Ordinal<N>,
        register: usize,
        level: usize,
    },
    /// The configuration produced at `limit_stage` equals the loop entry
    /// configuration at `entry_stage`: the run is periodic forever.
    LimitFixedPoint {
        entry_stage: Ordinal<N>,
        limit_stage: Ordinal<N>,
        level: usize,
    },
}

/// What loop detection found at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectOutcome<N: Nat> {
    None,
    Cycle(CycleWitness<N>),
    Summary(LoopSummary<N>),
}

/// The cycle criterion certifies divergence for unresetting machines; an
/// ITRM can escape an exact repeat through the limit rule, so there the
/// witness feeds the limit configuration instead.
pub fn certify_divergence<N: Nat>(
    witness: &CycleWitness<N>,
    mode: MachineMode,
) -> Option<Certificate<N>> {
    match mode {
        MachineMode::Witrm => Some(Certificate::Cycle(witness.clone())),
        MachineMode::Itrm => None,
    }
}

/// Fixed-point rule: a limit configuration equal to its loop's entry
/// configuration replays the loop verbatim through every later stage
/// (oracle reads are register-determined, so determinism carries the
/// periodicity through all further limits).
pub fn limit_fixed_point<N: Nat>(
    summary: &LoopSummary<N>,
    produced: &MachineState<N>,
    limit_stage: &Ordinal<N>,
) -> Option<Certificate<N>> {
    if summary.entry_state == *produced {
        Some(Certificate::LimitFixedPoint {
            entry_stage: summary.entry_stage.clone(),
            limit_stage: limit_stage.clone(),
            level: summary.level,
        })
    } else {
        None
    }
}

/// Everything recorded about the interval a higher-level entry spans: the
/// retired lower history plus the certified period that closed it.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MacroSpan<N: Nat> {
    slice: Vec<Entry<N>>,
    period: Ordinal<N>,
    period_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum EntryKind<N: Nat> {
    /// Transition out of this entry not yet observed.
    Pending,
    /// One successor step.
    Concrete(StepInfo<N>),
    /// The interval up to the next entry at this level, ending in a jump.
    Macro(Arc<MacroSpan<N>>),
}

/// One history entry: the configuration at a stage, plus the minimum each
/// register (and the line) attains over the interval this entry covers.
/// Level-0 entries cover a single stage, so their span is their state;
/// `None` encodes that.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry<N: Nat> {
    stage: Ordinal<N>,
    state: MachineState<N>,
    span_min: Option<BTreeMap<usize, N>>,
    span_line_min: Option<usize>,
    kind: EntryKind<N>,
}

impl<N: Nat> Entry<N> {
    fn span_reg(&self, register: usize) -> N {
        match &self.span_min {
            Some(map) => map.get(&register).cloned().unwrap_or_else(N::zero),
            None => self.state.get(register),
        }
    }

    fn span_line(&self) -> usize {
        self.span_line_min.unwrap_or(self.state.line)
    }
}

/// Per-level history with repeat and candidate-period indexes.
struct Level<N: Nat> {
    entries: Vec<Entry<N>>,
    /// State -> most recent entry index (entries already indexed).
    by_state: HashMap<MachineState<N>, usize>,
    /// Line -> recent entry indexes, most recent first.
    by_line: HashMap<usize, VecDeque<usize>>,
    /// History cap reached; detection disabled until the level clears.
    capped: bool,
}

const LINE_CANDIDATES: usize = 32;

impl<N: Nat> Level<N> {
    fn new() -> Self {
        Level {
            entries: Vec::new(),
            by_state: HashMap::new(),
            by_line: HashMap::new(),
            capped: false,
        }
    }

    fn clear(&mut self) {
        self.entries.clear();
        self.by_state.clear();
        self.by_line.clear();
        self.capped = false;
    }

    fn index_last(&mut self) {
        let index = self.entries.len() - 1;
        let entry = &self.entries[index];
        self.by_state.insert(entry.state.clone(), index);
        let recent = self.by_line.entry(entry.state.line).or_default();
        recent.push_front(index);
        recent.truncate(LINE_CANDIDATES);
    }
}

enum JumpOutcome<N: Nat> {
    Jumped,
    Finished(Verdict<N>),
}

/// The run driver: concrete steps interleaved with certified limit jumps.
pub struct Accelerator<'a, N: Nat> {
    program: &'a Program,
    oracle: &'a OracleReal<N>,
    mode: MachineMode,
    budget: Budget,
    tail_info: TailInfo,
    clock: Ordinal<N>,
    state: MachineState<N>,
    levels: Vec<Level<N>>,
    steps_since_jump: usize,
    total_steps: usize,
    jumps: usize,
    trace: Vec<TraceRecord>,
}

impl<'a, N: Nat> Accelerator<'a, N> {
    pub fn new(
        program: &'a Program,
        oracle: &'a OracleReal<N>,
        mode: MachineMode,
        budget: Budget,
    ) -> Self {
        Accelerator {
            program,
            oracle,
            mode,
            budget,
            tail_info: oracle.eventually_constant_info(),
            clock: Ordinal::zero(),
            state: MachineState::default(),
            levels: vec![Level::new()],
            steps_since_jump: 0,
            total_steps: 0,
            jumps: 0,
            trace: Vec::new(),
        }
    }

    pub fn run(mut self, initial: MachineState<N>) -> RunResult<N> {
        self.state = initial;
        self.push_entry(0);
        self.record(TraceEvent::Step);
        if let Some(verdict) = self.detect_cascade() {
            return self.finish(verdict);
        }
        loop {
            match exec(self.program, self.oracle, &mut self.state) {
                ExecResult::Halt { output } => {
                    self.record(TraceEvent::Halt);
                    let at = self.clock.clone();
                    return self.finish(Verdict::Halted { output, at });
                }
                ExecResult::OracleUndecided { index } => {
                    let reason = UnknownReason::OracleUndecided { index: index.to_string() };
                    let verdict = self.unknown(reason);
                    return self.finish(verdict);
                }
                ExecResult::Step(info) => {
                    if let Some(last) = self.levels[0].entries.last_mut() {
                        last.kind = EntryKind::Concrete(info);
                    }
                    self.clock = self.clock.succ();
                    self.steps_since_jump += 1;
                    self.total_steps += 1;
                    if self.steps_since_jump > self.budget.max_steps {
                        let reason = if self.levels[0].capped {
                            UnknownReason::HistoryCap
                        } else {
                            UnknownReason::StepBudget
                        };
                        let verdict = self.unknown(reason);
                        return self.finish(verdict);
                    }
                    self.push_entry(0);
                    self.record(TraceEvent::Step);
                    if let Some(verdict) = self.detect_cascade() {
                        return self.finish(verdict);
                    }
                }
            }
        }
    }

    fn finish(self, verdict: Verdict<N>) -> RunResult<N> {
        RunResult { verdict, trace: self.trace }
    }

    fn unknown(&self, reason: UnknownReason) -> Verdict<N> {
        Verdict::Unknown { reason, steps: self.total_steps, jumps: self.jumps }
    }

    fn record(&mut self, event: TraceEvent) {
        if self.budget.trace {
            self.trace.push(TraceRecord::at(&self.clock, &self.state, event));
        }
    }

    fn record_certificate(&mut self, certificate: &Certificate<N>) {
        if !self.budget.trace {
            return;
        }
        let mut record = TraceRecord::at(&self.clock, &self.state, TraceEvent::Certificate);
        record.kind = Some(certificate.kind_name().to_string());
        match certificate {
            Certificate::Cycle(w) => {
                record.sigma = Some(w.sigma.to_string());
                record.tau = Some(w.tau.to_string());
                record.level = Some(w.level);
            }
            Certificate::InfiniteLiminf { stage, level, .. } => {
                record.sigma = Some(stage.to_string());
                record.level = Some(*level);
            }
            Certificate::LimitFixedPoint { entry_stage, limit_stage, level } => {
                record.sigma = Some(entry_stage.to_string());
                record.tau = Some(limit_stage.to_string());
                record.level = Some(*level);
            }
        }
        self.trace.push(record);
    }

    fn push_entry(&mut self, level: usize) {
        while self.levels.len() <= level {
            self.levels.push(Level::new());
        }
        let lv = &mut self.levels[level];
        if lv.entries.len() >= self.budget.history_cap {
            lv.capped = true;
            return;
        }
        lv.entries.push(Entry {
            stage: self.clock.clone(),
            state: self.state.clone(),
            span_min: None,
            span_line_min: None,
            kind: EntryKind::Pending,
        });
    }

    /// Run detection at level 0, applying jumps and cascading upward as
    /// long as the freshly produced limit configurations close loops of
    /// their own. `Some` ends the run.
    fn detect_cascade(&mut self) -> Option<Verdict<N>> {
        let mut level = 0;
        loop {
            match self.detect(level) {
                DetectOutcome::None => {
                    if !self.levels[level].capped && !self.levels[level].entries.is_empty() {
                        self.levels[level].index_last();
                    }
                    return None;
                }
                DetectOutcome::Cycle(witness) => {
                    if let Some(certificate) = certify_divergence(&witness, self.mode) {
                        self.record_certificate(&certificate);
                        return Some(Verdict::Diverges { certificate });
                    }
                    let summary = self.exact_repeat_summary(level, &witness);
                    match self.apply_jump(summary) {
                        JumpOutcome::Jumped => level += 1,
                        JumpOutcome::Finished(verdict) => return Some(verdict),
                    }
                }
                DetectOutcome::Summary(summary) => match self.apply_jump(summary) {
                    JumpOutcome::Jumped => level += 1,
                    JumpOutcome::Finished(verdict) => return Some(verdict),
                },
            }
        }
    }

    /// Loop detection over the current history of one level. Exact repeats
    /// win over monotone windows; smaller candidate periods are tried
    /// first.
    fn detect(&self, level: usize) -> DetectOutcome<N> {
        let Some(lv) = self.levels.get(level) else {
            return DetectOutcome::None;
        };
        if lv.capped || lv.entries.len() < 2 {
            return DetectOutcome::None;
        }
        let m = lv.entries.len() - 1;
        let current = &lv.entries[m];

        if let Some(&sigma_idx) = lv.by_state.get(&current.state) {
            if let Some(between_min) = self.no_dip(lv, sigma_idx, m) {
                return DetectOutcome::Cycle(CycleWitness {
                    level,
                    sigma: lv.entries[sigma_idx].stage.clone(),
                    tau: current.stage.clone(),
                    state: current.state.clone(),
                    between_min,
                });
            }
        }

        let w = self.budget.window;
        if let Some(recent) = lv.by_line.get(&current.state.line) {
            for &prev in recent {
                let period_len = m - prev;
                if period_len == 0 || m < w * period_len {
                    continue;
                }
                if let Some(summary) = self.try_window(level, m - w * period_len, period_len) {
                    return DetectOutcome::Summary(summary);
                }
            }
        }
        DetectOutcome::None
    }

    /// Check `R_i(theta) >= R_i(sigma)` for all registers over the open
    /// interval, through the spans of any accelerated segments. Returns
    /// the per-register minima as witness data.
    fn no_dip(
        &self,
        lv: &Level<N>,
        sigma_idx: usize,
        tau_idx: usize,
    ) -> Option<BTreeMap<usize, N>> {
        let floor = &lv.entries[sigma_idx].state;
        let mut between: BTreeMap<usize, N> = BTreeMap::new();
        for entry in &lv.entries[sigma_idx + 1..tau_idx] {
            for (&register, value) in &floor.regs {
                let low = entry.span_reg(register);
                if low < *value {
                    return None;
                }
                between
                    .entry(register)
                    .and_modify(|m| {
                        if low < *m {
                            *m = low.clone();
                        }
                    })
                    .or_insert(low);
            }
        }
        Some(between)
    }

    /// An exact repeat replays verbatim, so every register value recurring
    /// in the loop is a liminf candidate and no liminf is infinite.
    fn exact_repeat_summary(&self, level: usize, witness: &CycleWitness<N>) -> LoopSummary<N> {
        let lv = &self.levels[level];
        let tau_idx = lv.entries.len() - 1;
        let sigma_idx = lv
            .entries
            .iter()
            .position(|e| e.stage == witness.sigma)
            .expect("witness stage is in history");
        let offsets = &lv.entries[sigma_idx..tau_idx];
        let universe = register_universe(offsets);
        let mut finite_liminf = BTreeMap::new();
        for &register in &universe {
            let low = offsets
                .iter()
                .map(|e| e.span_reg(register))
                .min()
                .expect("nonempty loop");
            if !low.is_zero() {
                finite_liminf.insert(register, low);
            }
        }
        let period = lv.entries[sigma_idx]
            .stage
            .sub_left(&lv.entries[tau_idx].stage)
            .expect("tau is later than sigma");
        LoopSummary {
            level,
            entry_stage: witness.sigma.clone(),
            entry_state: witness.state.clone(),
            period,
            period_len: tau_idx - sigma_idx,
            window: 1,
            limit_line: offsets.iter().map(|e| e.span_line()).min().expect("nonempty"),
            finite_liminf,
            infinite_regs: Vec::new(),
        }
    }

    /// Verify `window` consecutive iterations of length `period_len`
    /// starting at `sigma_idx`, plus the boundary entry that anchors the
    /// next iteration. Produces the loop summary or rejects.
    fn try_window(
        &self,
        level: usize,
        sigma_idx: usize,
        period_len: usize,
    ) -> Option<LoopSummary<N>> {
        let w = self.budget.window;
        let lv = &self.levels[level];
        let entries = &lv.entries[sigma_idx..];
        debug_assert_eq!(entries.len(), w * period_len + 1);

        let period = entries[0].stage.sub_left(&entries[period_len].stage).ok()?;
        if period.is_zero() {
            return None;
        }
        for i in 1..w {
            let step = entries[i * period_len]
                .stage
                .sub_left(&entries[(i + 1) * period_len].stage)
                .ok()?;
            if step != period {
                return None;
            }
        }

        let mut universe = register_universe(entries);
        for entry in entries {
            if let EntryKind::Macro(span) = &entry.kind {
                universe.extend(register_universe(&span.slice));
            }
        }

        let mut check = WindowCheck {
            accel: self,
            universe: &universe,
            constant_min: BTreeMap::new(),
            finite: BTreeSet::new(),
        };
        let mut limit_line = usize::MAX;
        for t in 0..period_len {
            let column: Vec<&Entry<N>> =
                (0..w).map(|i| &entries[t + i * period_len]).collect();
            limit_line = limit_line.min(column[0].span_line());
            check.column(&column, (t == 0).then(|| &entries[w * period_len]))?;
        }

        let mut finite_liminf = check.constant_min;
        finite_liminf.retain(|_, v| !v.is_zero());
        let infinite_regs: Vec<usize> = universe
            .iter()
            .copied()
            .filter(|r| !check.finite.contains(r))
            .collect();

        Some(LoopSummary {
            level,
            entry_stage: entries[0].stage.clone(),
            entry_state: entries[0].state.clone(),
            period,
            period_len,
            window: w,
            limit_line,
            finite_liminf,
            infinite_regs,
        })
    }

    /// A growing oracle-read index is only sound when the oracle's tail
    /// provably answers the same bit along the whole progression.
    fn oracle_read_stable(&self, first_index: &N, delta: &N) -> bool {
        if delta.is_zero() {
            return true;
        }
        match &self.tail_info {
            TailInfo::Constant { from, .. } => *first_index >= N::from_usize_exact(*from),
            TailInfo::Periodic { prefix_len, period } => {
                *first_index >= N::from_usize_exact(*prefix_len)
                    && delta.mod_floor(&N::from_usize_exact(period.len())).is_zero()
            }
            TailInfo::Unknown => false,
        }
    }

    /// Apply a certified jump: compute the limit configuration, retire the
    /// closed level into a span one level up, and resume from the limit.
    fn apply_jump(&mut self, summary: LoopSummary<N>) -> JumpOutcome<N> {
        if self.jumps >= self.budget.max_jumps {
            return JumpOutcome::Finished(self.unknown(UnknownReason::JumpBudget));
        }
        self.jumps += 1;
        let level = summary.level;
        match limit_config(&summary, self.mode) {
            LimitOutcome::WitrmDiverges { register } => {
                let stage = summary
                    .entry_stage
                    .add(&summary.period.times_omega().expect("positive period"));
                let certificate = Certificate::InfiniteLiminf { stage, register, level };
                self.record_certificate(&certificate);
                JumpOutcome::Finished(Verdict::Diverges { certificate })
            }
            LimitOutcome::Config(configuration) => {
                self.retire_level(level, &summary);
                for lv in &mut self.levels[..=level] {
                    lv.clear();
                }
                self.state = configuration.state;
                self.clock = configuration.clock;
                self.steps_since_jump = 0;
                self.push_entry(level + 1);
                self.push_entry(0);
                self.levels[0].index_last();
                self.record(TraceEvent::Limit);
                if let Some(certificate) =
                    limit_fixed_point(&summary, &self.state, &self.clock)
                {
                    self.record_certificate(&certificate);
                    return JumpOutcome::Finished(Verdict::Diverges { certificate });
                }
                JumpOutcome::Jumped
            }
        }
    }

    /// Fold the closed history of `level` into the pending entry one level
    /// up: its span minima, span line, and the full slice as the macro
    /// fingerprint for detection at that level.
    fn retire_level(&mut self, level: usize, summary: &LoopSummary<N>) {
        while self.levels.len() <= level + 1 {
            self.levels.push(Level::new());
        }
        let slice = self.levels[level].entries.clone();
        if slice.is_empty() {
            return;
        }
        let universe = register_universe(&slice);
        let mut aggregate: BTreeMap<usize, N> = BTreeMap::new();
        for &register in &universe {
            let low = slice
                .iter()
                .map(|e| e.span_reg(register))
                .min()
                .expect("nonempty slice");
            if !low.is_zero() {
                aggregate.insert(register, low);
            }
        }
        let line_min = slice.iter().map(|e| e.span_line()).min().expect("nonempty");
        if let Some(prev) = self.levels[level + 1].entries.last_mut() {
            prev.span_min = Some(aggregate);
            prev.span_line_min = Some(line_min);
            prev.kind = EntryKind::Macro(Arc::new(MacroSpan {
                slice,
                period: summary.period.clone(),
                period_len: summary.period_len,
            }));
        }
    }
}

fn register_universe<N: Nat>(entries: &[Entry<N>]) -> BTreeSet<usize> {
    entries
        .iter()
        .flat_map(|e| e.state.regs.keys().copied())
        .collect()
}

/// Shared scratch for verifying one window, column by column.
struct WindowCheck<'w, 'a, N: Nat> {
    accel: &'w Accelerator<'a, N>,
    universe: &'w BTreeSet<usize>,
    /// Per register: least span value among the points shown constant.
    constant_min: BTreeMap<usize, N>,
    /// Registers with at least one constant point (liminf finite).
    finite: BTreeSet<usize>,
}

impl<'w, 'a, N: Nat> WindowCheck<'w, 'a, N> {
    /// Verify one offset across the window iterations; `boundary` is the
    /// extra anchoring entry for offset 0.
    fn column(&mut self, column: &[&Entry<N>], boundary: Option<&Entry<N>>) -> Option<()> {
        let head = column[0];
        if column.iter().any(|e| e.state.line != head.state.line) {
            return None;
        }
        if column.iter().any(|e| e.span_line() != head.span_line()) {
            return None;
        }
        if let Some(b) = boundary {
            if b.state.line != head.state.line {
                return None;
            }
        }

        match &head.kind {
            EntryKind::Concrete(info) => {
                let infos: Vec<&StepInfo<N>> = column
                    .iter()
                    .map(|e| match &e.kind {
                        EntryKind::Concrete(i) => Some(i),
                        _ => None,
                    })
                    .collect::<Option<_>>()?;
                self.concrete_outcomes(&infos)?;
                let _ = info;
            }
            EntryKind::Macro(span) => {
                let spans: Vec<&Arc<MacroSpan<N>>> = column
                    .iter()
                    .map(|e| match &e.kind {
                        EntryKind::Macro(s) => Some(s),
                        _ => None,
                    })
                    .collect::<Option<_>>()?;
                self.macro_spans(&spans)?;
                let _ = span;
            }
            // Pending entries carry no transition to compare; they only
            // occur at a detection boundary.
            EntryKind::Pending => {
                if column
                    .iter()
                    .any(|e| !matches!(e.kind, EntryKind::Pending))
                {
                    return None;
                }
            }
        }

        for &register in self.universe {
            self.register_progression(column, boundary, register)?;
        }
        Some(())
    }

    /// Branch, clamp and oracle outcomes must repeat. Oracle indices may
    /// grow arithmetically only into a provably stable tail; the zero
    /// branch and clamp cases need no extra rule because the value
    /// progressions already force their registers constant.
    fn concrete_outcomes(&self, infos: &[&StepInfo<N>]) -> Option<()> {
        let head = infos[0];
        for info in &infos[1..] {
            if info.branch_taken != head.branch_taken || info.clamped != head.clamped {
                return None;
            }
        }
        match &head.oracle_read {
            None => {
                if infos.iter().any(|i| i.oracle_read.is_some()) {
                    return None;
                }
            }
            Some((first_index, bit)) => {
                let mut indices = Vec::with_capacity(infos.len());
                for info in infos {
                    let (index, b) = info.oracle_read.as_ref()?;
                    if b != bit {
                        return None;
                    }
                    indices.push(index.clone());
                }
                let delta = consistent_delta(&indices)?;
                if !self.accel.oracle_read_stable(first_index, &delta) {
                    return None;
                }
            }
        }
        Some(())
    }

    /// Point-by-point comparison of the intervals spanned by aligned
    /// higher-level entries. Every lower entry must match structurally,
    /// with per-point value progressions; nested spans deeper down must
    /// repeat verbatim.
    fn macro_spans(&mut self, spans: &[&Arc<MacroSpan<N>>]) -> Option<()> {
        let head = spans[0];
        for span in &spans[1..] {
            if span.period != head.period
                || span.period_len != head.period_len
                || span.slice.len() != head.slice.len()
            {
                return None;
            }
        }
        for q in 0..head.slice.len() {
            let points: Vec<&Entry<N>> = spans.iter().map(|s| &s.slice[q]).collect();
            let first = points[0];
            if points.iter().any(|p| p.state.line != first.state.line) {
                return None;
            }
            if points.iter().any(|p| p.span_line() != first.span_line()) {
                return None;
            }
            match &first.kind {
                EntryKind::Concrete(_) => {
                    let infos: Vec<&StepInfo<N>> = points
                        .iter()
                        .map(|p| match &p.kind {
                            EntryKind::Concrete(i) => Some(i),
                            _ => None,
                        })
                        .collect::<Option<_>>()?;
                    self.concrete_outcomes(&infos)?;
                }
                EntryKind::Macro(_) => {
                    // Conservative cut below omega^2-size structure:
                    // deeper spans must recur verbatim.
                    if points.iter().any(|p| *p != first) {
                        return None;
                    }
                }
                EntryKind::Pending => {
                    if points.iter().any(|p| !matches!(p.kind, EntryKind::Pending)) {
                        return None;
                    }
                }
            }
            for &register in self.universe {
                self.register_progression(&points, None, register)?;
            }
        }
        Some(())
    }

    /// State values and span minima at aligned points must form arithmetic
    /// progressions with a shared non-negative difference; a difference of
    /// zero makes the point a liminf candidate.
    fn register_progression(
        &mut self,
        points: &[&Entry<N>],
        boundary: Option<&Entry<N>>,
        register: usize,
    ) -> Option<()> {
        let values: Vec<N> = points.iter().map(|p| p.state.get(register)).collect();
        let delta = consistent_delta(&values)?;
        if let Some(b) = boundary {
            if b.state.get(register) != values[values.len() - 1].clone() + delta.clone() {
                return None;
            }
        }
        let spans: Vec<N> = points.iter().map(|p| p.span_reg(register)).collect();
        let span_delta = consistent_delta(&spans)?;
        if delta.is_zero() && span_delta.is_zero() {
            self.finite.insert(register);
            let low = spans[0].clone();
            self.constant_min
                .entry(register)
                .and_modify(|m| {
                    if low < *m {
                        *m = low.clone();
                    }
                })
                .or_insert(low);
        }
        Some(())
    }
}

/// The common difference of an arithmetic progression, provided it is
/// non-negative and consistent; rejects otherwise.
fn consistent_delta<N: Nat>(values: &[N]) -> Option<N> {
    if values.len() < 2 {
        return Some(N::zero());
    }
    if values[1] < values[0] {
        return None;
    }
    let delta = values[1].clone() - values[0].clone();
    for pair in values.windows(2).skip(1) {
        if pair[1] < pair[0] || pair[1].clone() - pair[0].clone() != delta {
            return None;
        }
    }
    Some(delta)
}
