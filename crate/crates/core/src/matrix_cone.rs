//! Tangent cone of the bounded-rank matrix variety at `A1 * A2`.
//!
//! A matrix `X` lies in the cone of `{rank <= k + s}` at a rank-`k` point
//! iff the doubly projected residual `(I - P) X (I - Q)` has rank at most
//! `s`, where `P` projects onto the columns of `A1` and `Q` onto the rows of
//! `A2`. In that case `X = A1 Y + Xhat A2 + U V` with `A1^T Xhat = 0`,
//! `A1^T U = 0` and `V A2^T = 0`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    count_above, fro, numerical_rank, projector_onto_range, projector_onto_row_space,
    pseudoinverse, rank_threshold, Svd, Tolerance,
};

/// Rank verdict for one projected residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCertificate {
    /// 1-based split index (always 1 for matrices).
    pub split: usize,
    pub slack: usize,
    /// Numerical rank of the residual.
    pub rank: usize,
    /// Singular values at or below this are treated as zero. Measured
    /// against the leading singular value of the unprojected matrix.
    pub threshold: f64,
    /// Full singular spectrum of the projected residual, decreasing.
    pub spectrum: Vec<f64>,
}

impl SplitCertificate {
    pub fn member(&self) -> bool {
        self.rank <= self.slack
    }

    fn into_error(self) -> Error {
        Error::NotInCone {
            split: self.split,
            rank: self.rank,
            slack: self.slack,
            threshold: self.threshold,
            spectrum: self.spectrum,
        }
    }
}

/// `X = A1 Y + Xhat A2 + U V`, with `U` carrying orthonormal columns and
/// `V = diag(sigma) W^T` from the thin SVD of the projected residual.
#[derive(Debug, Clone)]
pub struct MatrixSDecomposition {
    pub y: DMatrix<f64>,
    pub xhat: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub certificate: SplitCertificate,
}

impl MatrixSDecomposition {
    pub fn effective_slack(&self) -> usize {
        self.u.ncols()
    }

    pub fn reconstruct(&self, a1: &DMatrix<f64>, a2: &DMatrix<f64>) -> DMatrix<f64> {
        a1 * &self.y + &self.xhat * a2 + &self.u * &self.v
    }

    /// Normalized residuals of `A1^T Xhat = 0`, `A1^T U = 0`, `V A2^T = 0`.
    pub fn orthogonality_residuals(&self, a1: &DMatrix<f64>, a2: &DMatrix<f64>) -> [f64; 3] {
        let norm_a1 = fro(a1);
        let norm_a2 = fro(a2);
        [
            crate::linalg::normalized(fro(&(a1.transpose() * &self.xhat)), norm_a1 * fro(&self.xhat)),
            crate::linalg::normalized(fro(&(a1.transpose() * &self.u)), norm_a1 * fro(&self.u)),
            crate::linalg::normalized(fro(&(&self.v * a2.transpose())), norm_a2 * fro(&self.v)),
        ]
    }
}

struct Projected {
    p: DMatrix<f64>,
    q: DMatrix<f64>,
}

fn check_base(
    x: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    tol: &Tolerance,
) -> Result<Projected> {
    let k = a1.ncols();
    if a2.nrows() != k {
        return Err(Error::BondMismatch {
            left: k,
            right: a2.nrows(),
        });
    }
    if a1.nrows() != x.nrows() || a2.ncols() != x.ncols() {
        return Err(Error::DimsMismatch {
            left: vec![x.nrows(), x.ncols()],
            right: vec![a1.nrows(), a2.ncols()],
        });
    }
    let r1 = numerical_rank(a1, tol.rank);
    let r2 = numerical_rank(a2, tol.rank);
    if r1 != k || r2 != k {
        return Err(Error::RankDeficientBase {
            declared: vec![k],
            found: vec![r1.min(r2)],
        });
    }
    Ok(Projected {
        p: projector_onto_range(a1, tol.rank),
        q: projector_onto_row_space(a2, tol.rank),
    })
}

/// Projected residual `(I - P) X (I - Q)` and its rank certificate.
///
/// The cutoff is relative to the leading singular value of `x` itself: a
/// residual that is pure roundoff must not be measured against its own scale.
pub(crate) fn residual_certificate(
    x: &DMatrix<f64>,
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    split: usize,
    slack: usize,
    tol: f64,
) -> (DMatrix<f64>, Svd, SplitCertificate) {
    let xc = x - p * x;
    let residual = &xc - &xc * q;
    let svd = Svd::new(&residual);
    let reference = Svd::new(x).leading_value();
    let threshold = rank_threshold(reference, x.nrows(), x.ncols(), tol);
    let rank = if reference == 0.0 {
        0
    } else {
        count_above(&svd.singular_values, threshold)
    };
    let cert = SplitCertificate {
        split,
        slack,
        rank,
        threshold,
        spectrum: svd.singular_values.clone(),
    };
    (residual, svd, cert)
}

/// Splits `x` into its s-decomposition relative to `a1 * a2`, or reports
/// `NotInCone` when the projected residual has rank above `slack`.
pub fn s_decompose(
    x: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    slack: usize,
    tol: &Tolerance,
) -> Result<MatrixSDecomposition> {
    let Projected { p, q } = check_base(x, a1, a2, tol)?;
    let (_, svd, cert) = residual_certificate(x, &p, &q, 1, slack, tol.rank);
    if !cert.member() {
        return Err(cert.into_error());
    }
    let r = cert.rank;
    let y = pseudoinverse(a1, tol.rank) * x;
    let xhat = (x - &p * x) * pseudoinverse(a2, tol.rank);
    Ok(MatrixSDecomposition {
        y,
        xhat,
        u: svd.u_cols(r),
        v: svd.sigma_vt_rows(r),
        certificate: cert,
    })
}

pub fn matrix_cone_certificate(
    x: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    slack: usize,
    tol: &Tolerance,
) -> Result<SplitCertificate> {
    let Projected { p, q } = check_base(x, a1, a2, tol)?;
    Ok(residual_certificate(x, &p, &q, 1, slack, tol.rank).2)
}

/// True iff `rank((I - P) X (I - Q)) <= slack`.
pub fn matrix_cone_membership(
    x: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    slack: usize,
    tol: &Tolerance,
) -> Result<bool> {
    Ok(matrix_cone_certificate(x, a1, a2, slack, tol)?.member())
}
