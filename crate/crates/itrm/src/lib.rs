//! Infinite time register machines at desk scale.
//!
//! A register machine that may run for ordinal time: successor steps work
//! as usual, and at limit stages every register takes the liminf of its
//! history (resetting to zero when that is infinite on an ITRM; undefined,
//! hence divergent, on an unresetting wITRM). This crate executes such
//! machines with a symbolic ordinal clock, fast-forwarding through
//! certified loops instead of ever simulating omega literal steps, and
//! certifying divergence where it can. Around the interpreter sit the
//! canonical program enumeration, oracle reals, a halting-set oracle
//! service with a universal evaluator, odd codes for finite membership
//! structures with a formula evaluator, and the explicit construction of
//! a real generic for a finite family of dense sets of binary conditions.
//!
//! Core types are generic over the register scalar [`nat::Nat`]; the
//! aliases at the crate root pick arbitrary precision ([`num_bigint::BigUint`]),
//! which the command-line tools use throughout. Bulk corpus work can
//! instantiate the same machinery at `u64`.

pub mod accel;
pub mod codes;
pub mod forcing;
pub mod harness;
pub mod isa;
pub mod nat;
pub mod oracle;
pub mod ordinal;
pub mod vm;

pub use nat::{BigNat, Nat};

/// Arbitrary-precision ordinal clock values.
pub type Ordinal = ordinal::Ordinal<BigNat>;
/// Arbitrary-precision oracle bit streams.
pub type OracleReal = oracle::OracleReal<BigNat>;
/// Arbitrary-precision machine states.
pub type MachineState = vm::MachineState<BigNat>;
/// Arbitrary-precision configurations.
pub type Configuration = vm::Configuration<BigNat>;
/// Arbitrary-precision run verdicts.
pub type Verdict = vm::Verdict<BigNat>;
/// Arbitrary-precision run results.
pub type RunResult = vm::RunResult<BigNat>;
/// Arbitrary-precision divergence certificates.
pub type Certificate = accel::Certificate<BigNat>;
/// The halting-set oracle service over arbitrary-precision registers.
pub type HaltingService = harness::HaltingService<BigNat>;

/// Machine-word instantiations for bulk corpus and census work.
pub type Ordinal64 = ordinal::Ordinal<u64>;
pub type OracleReal64 = oracle::OracleReal<u64>;
pub type MachineState64 = vm::MachineState<u64>;
pub type Verdict64 = vm::Verdict<u64>;
