//! Closest stabilizer-simulable approximations to one-qubit error channels.
//!
//! Channels are represented by Kraus operators ([`KrausChannel`]) or by their
//! process matrix in the normalized Pauli basis ([`ChiMatrix`]). The
//! approximating families are probabilistic mixtures of Pauli gates, Clifford
//! gates and (optionally) resets to stabilizer states, see [`ModelKind`].
//!
//! Channel algebra is generic over the scalar type; the optimizer works in
//! `f64`, and the aliases below name the `f64` instantiations.

pub mod approx;
pub mod catalog;
pub mod channel;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod qp;
pub mod scalar;
pub mod targets;

pub use approx::{
    extract_support, solve, solve_average_from, solve_batch, solve_batch_with, ApproximationProblem, ApproximationResult,
    BatchItem, SolverDiagnostics, FIDELITY_SLACK, SUPPORT_THRESHOLD,
};
pub use catalog::{
    build_mixture, enumerate_generators, identity_fidelity_coefficients, mixture_chi, sample_error, Axis,
    CliffordLabel, Eigenstate, Generator, MixtureParams, ModelKind, SampledError, Sign, TranslationLabel,
};
pub use channel::{
    apply_channel, apply_kraus, bloch_image, chi_to_kraus, kraus_to_chi, validate_cptp, validate_cptp_with,
    ChiMatrix, Constraint, DensityMatrix, KrausChannel, ValidationReport, Violation,
};
pub use error::{Error, Result};
pub use matrix::{paulis, ComplexMatrix};
pub use metrics::{
    avg_fidelity, hs_distance, identity_fidelity, worst_fidelity, worst_fidelity_in, BallMinimum, ConstraintKind,
    FidelityQuadratic, StateDomain,
};
pub use scalar::Real;
pub use targets::{adc, pol_xy, random_chi, random_chi_batch};

pub type Matrix = ComplexMatrix<f64>;
pub type Kraus = KrausChannel<f64>;
pub type Chi = ChiMatrix<f64>;
pub type Density = DensityMatrix<f64>;
pub type Params = MixtureParams<f64>;
