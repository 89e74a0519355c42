//! Instruction set, assembly format, canonical program enumeration and the
//! program transformers used by the universal evaluator.

mod asm;
mod rank;
mod transform;

pub use asm::{emit_asm, parse_asm, AsmError};
pub use rank::{pair, rank, unpair, unrank};
pub use transform::{transform_output_filter, transform_set_input};

use std::collections::BTreeSet;
use std::fmt;

/// One program line. Register indices are 1-based (`r1` is the
/// input/output register); any natural is a legal jump target, with
/// out-of-range targets meaning "halt on arrival".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instruction {
    /// Increment a register.
    Inc(usize),
    /// Decrement a register, clamping at zero.
    Dec(usize),
    /// Copy `src` into `dst`.
    Copy { src: usize, dst: usize },
    /// Read the oracle bit whose index is the content of `idx` into `dst`.
    Oracle { idx: usize, dst: usize },
    /// Jump to `target` when the register is zero, else fall through.
    Jz { reg: usize, target: usize },
    /// Stop; the output is the content of `r1`.
    Halt,
}

impl Instruction {
    /// Registers this instruction touches (reads or writes).
    pub fn registers(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Instruction::Inc(r) | Instruction::Dec(r) => (Some(r), None),
            Instruction::Copy { src, dst } | Instruction::Oracle { idx: src, dst } => {
                (Some(src), Some(dst))
            }
            Instruction::Jz { reg, .. } => (Some(reg), None),
            Instruction::Halt => (None, None),
        };
        a.into_iter().chain(b)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc(r) => write!(f, "INC r{r}"),
            Instruction::Dec(r) => write!(f, "DEC r{r}"),
            Instruction::Copy { src, dst } => write!(f, "COPY r{src} r{dst}"),
            Instruction::Oracle { idx, dst } => write!(f, "ORACLE r{idx} r{dst}"),
            Instruction::Jz { reg, target } => write!(f, "JZ r{reg} {target}"),
            Instruction::Halt => write!(f, "HALT"),
        }
    }
}

/// A finite, possibly empty sequence of instructions, 0-indexed.
/// The empty program halts immediately with output `r1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    lines: Vec<Instruction>,
}

impl Program {
    pub fn new(lines: Vec<Instruction>) -> Self {
        Program { lines }
    }

    pub fn empty() -> Self {
        Program::default()
    }

    pub fn lines(&self) -> &[Instruction] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn get(&self, line: usize) -> Option<&Instruction> {
        self.lines.get(line)
    }

    /// The finite set of register indices the program mentions.
    pub fn used_registers(&self) -> BTreeSet<usize> {
        self.lines.iter().flat_map(|i| i.registers()).collect()
    }

    /// One more than the largest register index in use; `r<scratch>` is
    /// guaranteed untouched. At least 2, so `r1` keeps its i/o role.
    pub fn fresh_register(&self) -> usize {
        self.used_registers().into_iter().max().unwrap_or(1) + 1
    }
}

impl FromIterator<Instruction> for Program {
    fn from_iter<T: IntoIterator<Item = Instruction>>(iter: T) -> Self {
        Program::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", emit_asm(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn used_registers_and_fresh() {
        let p = Program::new(vec![
            Instruction::Inc(1),
            Instruction::Copy { src: 3, dst: 2 },
            Instruction::Jz { reg: 1, target: 0 },
        ]);
        assert_eq!(p.used_registers().into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(p.fresh_register(), 4);
        assert_eq!(Program::empty().fresh_register(), 2);
    }
}
