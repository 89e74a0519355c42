//! Line-oriented assembly: one instruction per line, `#` comments,
//! mnemonics `INC DEC COPY ORACLE JZ HALT`, registers written `r<n>` with
//! `n >= 1`, jump targets as bare line numbers.

use thiserror::Error;

use super::{Instruction, Program};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {line}: unknown mnemonic {text:?}")]
    UnknownMnemonic { line: usize, text: String },
    #[error("line {line}: register index 0 is not allowed (registers start at r1)")]
    ZeroRegister { line: usize },
    #[error("line {line}: malformed operand {text:?} (expected {expected})")]
    MalformedOperand {
        line: usize,
        text: String,
        expected: &'static str,
    },
    #[error("line {line}: expected {expected} operand(s), found {found}")]
    WrongArity {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Parse assembly text. Blank lines and comments do not occupy program
/// lines, so jump targets refer to instruction indices, not text lines.
pub fn parse_asm(text: &str) -> Result<Program, AsmError> {
    let mut lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let mut parts = code.split_whitespace();
        let mnemonic = parts.next().unwrap();
        let operands: Vec<&str> = parts.collect();
        let arity = |n: usize| -> Result<(), AsmError> {
            if operands.len() == n {
                Ok(())
            } else {
                Err(AsmError::WrongArity {
                    line,
                    expected: n,
                    found: operands.len(),
                })
            }
        };
        let instruction = match mnemonic.to_ascii_uppercase().as_str() {
            "INC" => {
                arity(1)?;
                Instruction::Inc(parse_register(line, operands[0])?)
            }
            "DEC" => {
                arity(1)?;
                Instruction::Dec(parse_register(line, operands[0])?)
            }
            "COPY" => {
                arity(2)?;
                Instruction::Copy {
                    src: parse_register(line, operands[0])?,
                    dst: parse_register(line, operands[1])?,
                }
            }
            "ORACLE" => {
                arity(2)?;
                Instruction::Oracle {
                    idx: parse_register(line, operands[0])?,
                    dst: parse_register(line, operands[1])?,
                }
            }
            "JZ" => {
                arity(2)?;
                Instruction::Jz {
                    reg: parse_register(line, operands[0])?,
                    target: parse_target(line, operands[1])?,
                }
            }
            "HALT" => {
                arity(0)?;
                Instruction::Halt
            }
            other => {
                return Err(AsmError::UnknownMnemonic {
                    line,
                    text: other.to_string(),
                })
            }
        };
        lines.push(instruction);
    }
    Ok(Program::new(lines))
}

/// Canonical text: uppercase mnemonics, one instruction per line with a
/// trailing newline on nonempty programs. `parse_asm(emit_asm(p)) == p`.
pub fn emit_asm(program: &Program) -> String {
    let mut out = String::new();
    for instruction in program.lines() {
        out.push_str(&instruction.to_string());
        out.push('\n');
    }
    out
}

fn parse_register(line: usize, text: &str) -> Result<usize, AsmError> {
    let malformed = || AsmError::MalformedOperand {
        line,
        text: text.to_string(),
        expected: "register like r3",
    };
    let digits = text
        .strip_prefix('r')
        .or_else(|| text.strip_prefix('R'))
        .ok_or_else(malformed)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let index: usize = digits.parse().map_err(|_| malformed())?;
    if index == 0 {
        return Err(AsmError::ZeroRegister { line });
    }
    Ok(index)
}

fn parse_target(line: usize, text: &str) -> Result<usize, AsmError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(AsmError::MalformedOperand {
            line,
            text: text.to_string(),
            expected: "line number",
        });
    }
    text.parse().map_err(|_| AsmError::MalformedOperand {
        line,
        text: text.to_string(),
        expected: "line number",
    })
}
