//! Explicit construction of a real generic for a finite family of dense
//! sets of binary conditions.
//!
//! Conditions are finite binary strings ordered by extension. Given an
//! enumerated family of (claimed) dense sets, the chain starts at the
//! empty condition and each step extends the current condition to the
//! length-lexicographically least extension inside the next set; entries
//! not claimed dense leave the condition unchanged. The union of the
//! chain, read as a finite prefix with constant-zero tail, is the
//! constructed real, generic with respect to exactly the given family.
//! Diagonal sets force the result to differ from a given real, which is
//! the engine of the construction.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::nat::Nat;
use crate::oracle::OracleReal;

/// A finite binary string; the conditions of the forcing order, with
/// `s <= t` iff `t` extends `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Condition(Vec<bool>);

impl Condition {
    pub fn empty() -> Self {
        Condition(Vec::new())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// Is `self` an initial segment of `other`?
    pub fn extended_by(&self, other: &Condition) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            // Epsilon for the empty condition keeps chains readable.
            return write!(f, "\u{03b5}");
        }
        for &bit in &self.0 {
            write!(f, "{}", if bit { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Condition {
    type Err = ForcingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "\u{03b5}" || s.is_empty() {
            return Ok(Condition::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ForcingError::BadCondition(other)),
            })
            .collect::<Result<Vec<bool>, _>>()
            .map(Condition)
    }
}

/// Predicate callback for custom dense sets.
pub type ConditionPredicate = dyn Fn(&Condition) -> bool + Send + Sync;

/// One dense set, given as a predicate on conditions.
#[derive(Clone)]
pub enum DensePredicate<N: Nat> {
    /// Conditions differing from `z` at some position below their length.
    /// Dense: any condition extends by one unequal bit.
    Diagonal(OracleReal<N>),
    /// Conditions longer than `n`. Dense.
    HitCoordinate(usize),
    /// A named registered predicate.
    Custom {
        name: String,
        predicate: Arc<ConditionPredicate>,
    },
}

impl<N: Nat> DensePredicate<N> {
    pub fn holds(&self, condition: &Condition) -> bool {
        match self {
            DensePredicate::Diagonal(z) => condition.bits().iter().enumerate().any(|(i, &b)| {
                z.bit(&N::from_usize_exact(i)).to_bit().is_some_and(|zb| zb != b)
            }),
            DensePredicate::HitCoordinate(n) => condition.len() > *n,
            DensePredicate::Custom { predicate, .. } => predicate(condition),
        }
    }
}

impl<N: Nat> fmt::Display for DensePredicate<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensePredicate::Diagonal(z) => write!(f, "diagonal {z}"),
            DensePredicate::HitCoordinate(n) => write!(f, "coordinate {n}"),
            DensePredicate::Custom { name, .. } => write!(f, "custom {name}"),
        }
    }
}

/// A family entry: the predicate plus its density claim. Claims are
/// trusted but budget-checked; a false claim fails loudly.
#[derive(Clone)]
pub struct FamilyEntry<N: Nat> {
    pub predicate: DensePredicate<N>,
    pub claimed_dense: bool,
}

impl<N: Nat> FamilyEntry<N> {
    pub fn dense(predicate: DensePredicate<N>) -> Self {
        FamilyEntry { predicate, claimed_dense: true }
    }

    pub fn not_dense(predicate: DensePredicate<N>) -> Self {
        FamilyEntry { predicate, claimed_dense: false }
    }
}

/// An enumerated finite family of dense sets.
#[derive(Clone, Default)]
pub struct DenseFamily<N: Nat> {
    pub entries: Vec<FamilyEntry<N>>,
}

/// Predicate registry for `custom` lines in family files.
pub type PredicateRegistry = std::collections::BTreeMap<String, Arc<ConditionPredicate>>;

#[derive(Debug, Error)]
pub enum ForcingError {
    #[error("condition bits must be 0 or 1, found {0:?}")]
    BadCondition(char),
    #[error("entry {entry} ({what}): no extension found within {budget} candidates; the density claim looks false")]
    DensityBudgetExceeded {
        entry: usize,
        what: String,
        budget: usize,
    },
    #[error("family file line {line}: {message}")]
    BadFamilyLine { line: usize, message: String },
    #[error("family file line {line}: unknown custom predicate {name:?}")]
    UnknownPredicate { line: usize, name: String },
    #[error(transparent)]
    OracleSpec(#[from] crate::oracle::OracleSpecError),
}

/// How many candidate extensions to try before declaring a density claim
/// false.
pub const DEFAULT_SEARCH_BUDGET: usize = 1 << 16;

/// The one-step extension operator: the length-lexicographically least
/// extension of `s` satisfying a claimed-dense entry, or `s` unchanged for
/// an entry not claimed dense.
pub fn g<N: Nat>(
    s: &Condition,
    entry: &FamilyEntry<N>,
    entry_index: usize,
    budget: usize,
) -> Result<Condition, ForcingError> {
    if !entry.claimed_dense {
        return Ok(s.clone());
    }
    // Breadth by length, then lexicographic with 0 < 1: enumerate suffixes
    // of each length in binary counting order.
    let mut tried = 0usize;
    for extra in 0usize.. {
        if extra >= usize::BITS as usize {
            break;
        }
        let suffixes = 1usize << extra;
        for suffix in 0..suffixes {
            let mut candidate = s.clone();
            for position in (0..extra).rev() {
                candidate.push(suffix >> position & 1 == 1);
            }
            if entry.predicate.holds(&candidate) {
                return Ok(candidate);
            }
            tried += 1;
            if tried >= budget {
                return Err(ForcingError::DensityBudgetExceeded {
                    entry: entry_index,
                    what: entry.predicate.to_string(),
                    budget,
                });
            }
        }
    }
    Err(ForcingError::DensityBudgetExceeded {
        entry: entry_index,
        what: entry.predicate.to_string(),
        budget,
    })
}

/// The chain `h(0) = empty, h(i+1) = g(h(i), entry i)` together with the
/// constructed real.
#[derive(Debug, Clone)]
pub struct GenericChain<N: Nat> {
    /// `h(0) ... h(N)`, monotone under extension.
    pub steps: Vec<Condition>,
    /// The final condition as a finite-prefix oracle with constant-zero
    /// tail. Generic only with respect to the family it was built from.
    pub real: OracleReal<N>,
}

impl<N: Nat> GenericChain<N> {
    pub fn result(&self) -> &Condition {
        self.steps.last().expect("chain contains h(0)")
    }
}

/// Run the recursion over the whole family.
pub fn build_generic<N: Nat>(
    family: &DenseFamily<N>,
    budget: usize,
) -> Result<GenericChain<N>, ForcingError> {
    let mut steps = vec![Condition::empty()];
    for (index, entry) in family.entries.iter().enumerate() {
        let next = g(steps.last().unwrap(), entry, index, budget)?;
        steps.push(next);
    }
    let real = OracleReal::FinitePrefix {
        prefix: steps.last().unwrap().bits().to_vec(),
        tail: false,
    };
    Ok(GenericChain { steps, real })
}

/// Where the chain met one family entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryReport {
    /// Least `i` with `predicate(h(i))`, if any.
    pub met_at: Option<usize>,
    /// For diagonal entries: a position where the constructed real
    /// provably differs from the diagonalised one.
    pub differs_at: Option<usize>,
}

/// Check the chain against every entry of the family it was built from.
pub fn verify_meets<N: Nat>(chain: &GenericChain<N>, family: &DenseFamily<N>) -> Vec<EntryReport> {
    family
        .entries
        .iter()
        .map(|entry| {
            let met_at = chain.steps.iter().position(|h| entry.predicate.holds(h));
            let differs_at = match &entry.predicate {
                DensePredicate::Diagonal(z) => {
                    (0..chain.result().len().max(diag_probe_window(z))).find(|&i| {
                        let ours = chain.real.bit(&N::from_usize_exact(i)).to_bit();
                        let theirs = z.bit(&N::from_usize_exact(i)).to_bit();
                        matches!((ours, theirs), (Some(a), Some(b)) if a != b)
                    })
                }
                _ => None,
            };
            EntryReport { met_at, differs_at }
        })
        .collect()
}

// Past the prefix the constructed real is constant zero, so any 1 in the
// other real's tail within this window also witnesses a difference.
fn diag_probe_window<N: Nat>(z: &OracleReal<N>) -> usize {
    match z.eventually_constant_info() {
        crate::oracle::TailInfo::Constant { from, .. } => from + 2,
        crate::oracle::TailInfo::Periodic { prefix_len, period } => prefix_len + 2 * period.len(),
        crate::oracle::TailInfo::Unknown => 64,
    }
}

/// Parse a family file: one entry per line, `diagonal <oracle-spec>`,
/// `coordinate <n>`, or `custom <name>` resolved against the registry.
/// `#` comments and blank lines are skipped; a `!` before the keyword
/// marks the entry as not claimed dense.
pub fn parse_family<N: Nat>(
    text: &str,
    registry: &PredicateRegistry,
) -> Result<DenseFamily<N>, ForcingError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let (claimed_dense, code) = match code.strip_prefix('!') {
            Some(rest) => (false, rest.trim_start()),
            None => (true, code),
        };
        let (keyword, argument) = match code.split_once(char::is_whitespace) {
            Some((k, a)) => (k, a.trim()),
            None => (code, ""),
        };
        let predicate = match keyword {
            "diagonal" => DensePredicate::Diagonal(OracleReal::parse(argument)?),
            "coordinate" => {
                let n: usize = argument.parse().map_err(|_| ForcingError::BadFamilyLine {
                    line,
                    message: format!("bad coordinate {argument:?}"),
                })?;
                DensePredicate::HitCoordinate(n)
            }
            "custom" => match registry.get(argument) {
                Some(predicate) => DensePredicate::Custom {
                    name: argument.to_string(),
                    predicate: Arc::clone(predicate),
                },
                None => {
                    return Err(ForcingError::UnknownPredicate {
                        line,
                        name: argument.to_string(),
                    })
                }
            },
            other => {
                return Err(ForcingError::BadFamilyLine {
                    line,
                    message: format!(
                        "unknown entry kind {other:?} (diagonal, coordinate or custom)"
                    ),
                })
            }
        };
        entries.push(FamilyEntry { predicate, claimed_dense });
    }
    Ok(DenseFamily { entries })
}
