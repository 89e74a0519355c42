//! Program transformers backing the universal evaluator: fixing an input
//! value, and filtering on a particular output.

use super::{Instruction, Program};

/// A program that behaves, from the all-zero configuration, exactly like
/// `program` started with `r1 = input`: `input` increments are prepended
/// and every jump target shifts accordingly.
pub fn transform_set_input(program: &Program, input: usize) -> Program {
    let mut lines: Vec<Instruction> = (0..input).map(|_| Instruction::Inc(1)).collect();
    lines.extend(program.lines().iter().map(|instruction| match *instruction {
        Instruction::Jz { reg, target } => Instruction::Jz {
            reg,
            target: target + input,
        },
        ref other => other.clone(),
    }));
    Program::new(lines)
}

/// A program that halts iff `program` halts with output `expected`, and
/// runs forever otherwise.
///
/// Every way `program` can stop (explicit `HALT`, a jump out of range,
/// falling off the end) is redirected into an appended check block that
/// tests `r1 == expected` by guarded decrements: before each of the
/// `expected` `DEC r1` steps the block verifies `r1 != 0` (a plain
/// decrement chain would conflate smaller outputs with `expected`, since
/// `DEC` clamps at zero), and after them it verifies `r1 == 0`. On success
/// the block halts; on mismatch it enters a one-line self-loop. A fresh
/// scratch register, never touched elsewhere, provides the unconditional
/// jumps.
pub fn transform_output_filter(program: &Program, expected: usize) -> Program {
    let base = program.len();
    let scratch = program.fresh_register();
    let accept = base + 2 * expected + 2;
    let spin = base + 2 * expected + 3;

    let mut lines: Vec<Instruction> = program
        .lines()
        .iter()
        .map(|instruction| match *instruction {
            Instruction::Halt => Instruction::Jz {
                reg: scratch,
                target: base,
            },
            Instruction::Jz { reg, target } => Instruction::Jz {
                reg,
                target: target.min(base),
            },
            ref other => other.clone(),
        })
        .collect();

    for _ in 0..expected {
        lines.push(Instruction::Jz { reg: 1, target: spin });
        lines.push(Instruction::Dec(1));
    }
    lines.push(Instruction::Jz { reg: 1, target: accept });
    lines.push(Instruction::Jz { reg: scratch, target: spin });
    lines.push(Instruction::Halt);
    lines.push(Instruction::Jz { reg: scratch, target: spin });
    Program::new(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_prefix_is_identity() {
        let p = Program::new(vec![
            Instruction::Inc(1),
            Instruction::Jz { reg: 2, target: 0 },
            Instruction::Halt,
        ]);
        assert_eq!(transform_set_input(&p, 0), p);
    }

    #[test]
    fn prefix_shifts_targets() {
        assert_eq!(
            transform_set_input(&Program::new(vec![Instruction::Halt]), 2),
            Program::new(vec![
                Instruction::Inc(1),
                Instruction::Inc(1),
                Instruction::Halt,
            ])
        );
        let p = Program::new(vec![Instruction::Jz { reg: 1, target: 0 }]);
        assert_eq!(
            transform_set_input(&p, 3).lines()[3],
            Instruction::Jz { reg: 1, target: 3 }
        );
    }

    #[test]
    fn filter_rewrites_every_exit() {
        let p = Program::new(vec![
            Instruction::Halt,
            Instruction::Jz { reg: 1, target: 50 },
        ]);
        let filtered = transform_output_filter(&p, 1);
        // Both the HALT and the out-of-range jump now land on the block;
        // r2 is the fresh scratch register here.
        assert_eq!(filtered.lines()[0], Instruction::Jz { reg: 2, target: 2 });
        assert_eq!(filtered.lines()[1], Instruction::Jz { reg: 1, target: 2 });
        assert_eq!(
            filtered.lines()[2..],
            [
                Instruction::Jz { reg: 1, target: 7 }, // r1 == 0 already: too small
                Instruction::Dec(1),
                Instruction::Jz { reg: 1, target: 6 }, // r1 == 0 after k decs: accept
                Instruction::Jz { reg: 2, target: 7 }, // still nonzero: too big
                Instruction::Halt,
                Instruction::Jz { reg: 2, target: 7 },
            ]
        );
    }

    // Behavioural checks live in the vm tests, where a simulator exists.
}
