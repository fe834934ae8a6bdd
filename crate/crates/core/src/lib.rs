//! Tangent cones to varieties of tensors with bounded tensor-train rank.
//!
//! Dense tensors are row-major, TT cores are `left x mode x right` arrays, and
//! the tangent cone at a left-orthogonal base point is represented by the
//! block parametrization in [`tt_cone`].

pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix_cone;
pub mod random;
pub mod retraction;
pub mod tensor;
pub mod tt;
pub mod tt_cone;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::Tolerance;
pub use matrix_cone::{matrix_cone_membership, s_decompose, MatrixSDecomposition, SplitCertificate};
pub use random::{random_base, random_dense, Gaussian};
pub use tensor::{matricize, tensorize, tt_product, DenseTensor, Matricization};
pub use tt::{
    left_orthogonalize, rank_profile, tt_evaluate, tt_svd, Core, Orthogonality, RankProfile,
    TTTensor,
};
pub use tt_cone::{
    random_cone_vector, tc_evaluate, tc_extract, tc_membership, tc_orthogonal_terms,
    ConeMembership, TangentConeVector,
};
pub use retraction::{gamma, retract, retraction_order, sample_curve, scale, CurveSample, RetractionOrder};
pub use verify::{
    first_derivative_certificate, secant_limit_check, secant_membership_check, SecantReport,
};
