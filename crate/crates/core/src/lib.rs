//! Exact mutation maps on shear coordinates, bounded-depth coherence tests,
//! quasi-lamination fans and shear coordinates of curves on triangulated
//! surfaces.
//!
//! Indices are 0-based throughout the library; the serialised formats in
//! [`formats`] are 1-based.

pub mod coherence;
pub mod error;
pub mod eta;
pub mod exchange;
pub mod fan;
pub mod formats;
pub mod linalg;
pub mod par;
pub mod rational;
pub mod surface;
pub mod tangle;

pub use coherence::{
    common_cone_up_to_depth, decompose_in_cone, default_depth, find_separating_sequence,
    independent_up_to_depth, is_b_coherent_up_to_depth, b_equivalent_up_to_depth, sign_vector,
    ConeDecomposer, Decomposition, DepthVerdict, RingMode, SeparationCertificate, SequenceTree,
    SignVector, VerdictStatus, WeightedFamily, Witness,
};
pub use error::{Error, Result};
pub use eta::{eta, eta_inverse, eta_step, min_with_zero, MatrixMemo, ShearVector};
pub use exchange::{CoefficientRow, ExchangeMatrix, ExtendedExchangeMatrix, MutationSequence};
pub use rational::Rat;
