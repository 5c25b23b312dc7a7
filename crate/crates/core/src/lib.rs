//! Hyper-objective stationarity for bilevel problems whose lower level has a
//! set of solutions: fixture problems with analytic solution maps, a certified
//! inner solver, the inexact zeroth-order method, stationarity certificates,
//! and empirical checks of the structural moduli.
//!
//! The core is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inner;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod rng;
pub mod scalar;
pub mod stationarity;
pub mod structure;
pub mod zeroth_order;

pub use error::{Error, Result};
pub use inner::{inner_argopt, inner_value, inner_value_with, lower_level_solve, InnerOptions, InnerResult};
pub use oracle::{FnOracle, HyperObjective, ValueOracle};
pub use problem::{
    registry_get, BaseSet, Bounds, ConstantsBundle, Mode, Piece, ProblemSpec, SetMapDescriptor, PROBLEM_NAMES,
};
pub use scalar::Scalar;
pub use stationarity::{
    clarke_certificate, envelope_gradient_norm, goldstein_gap, moreau_prox, Certificate, CertificateKind, ClarkeConfig,
    EnvelopeConfig, EnvelopeGradient,
};
pub use structure::{
    backfill_witness, hausdorff_distance, lipschitz_check, secant_modulus, set_smoothness_check, theory_moduli,
    PropertyReport, Sense, TheoryModuli, Verdict, WitnessMode, WitnessTuple,
};
pub use zeroth_order::{izom_run, IzomConfig, RunTrace, Schedule, ScheduleConstants};

pub type Real = f64;
pub type Problem = ProblemSpec<f64>;
pub type Problem32 = ProblemSpec<f32>;
pub type Constants = ConstantsBundle<f64>;
pub type Descriptor = SetMapDescriptor<f64>;
pub type Trace = RunTrace<f64>;
pub type Config = IzomConfig<f64>;
pub type Moduli = TheoryModuli<f64>;
