//! Dense matrix helpers: sorted thin SVD, numerical rank, pseudoinverse and
//! range projectors.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. Tensors in this crate are stored
//! row-major (last index fastest), so every conversion between flat tensor
//! data and a matrix goes through [`from_row_major`] / [`to_row_major`].

use nalgebra::DMatrix;

/// Default relative rank cutoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Tolerances shared by every rank-dependent decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values below `rank * sigma_ref * max(rows, cols)` are zero.
    pub rank: f64,
    /// Accepted residual for orthogonality checks on base points.
    pub orthogonality: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank: DEFAULT_RANK_TOL,
            orthogonality: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn with_rank(rank: f64) -> Self {
        Tolerance {
            rank,
            ..Default::default()
        }
    }
}

/// Thin SVD with singular values sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    pub fn new(m: &DMatrix<f64>) -> Svd {
        let (rows, cols) = m.shape();
        let p = rows.min(cols);
        if p == 0 {
            return Svd {
                u: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v_t: DMatrix::zeros(0, cols),
            };
        }
        // nalgebra's bidiagonal SVD mis-converges on some rank-deficient
        // inputs; faer's is reliable there.
        let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
        let svd = fm.thin_svd().expect("SVD converges");
        let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
        let mut su = DMatrix::zeros(rows, p);
        let mut svt = DMatrix::zeros(p, cols);
        let mut values = Vec::with_capacity(p);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..rows {
                su[(i, dst)] = fu[(i, src)];
            }
            for j in 0..cols {
                svt[(dst, j)] = fv[(j, src)];
            }
            values.push(fs[src]);
        }
        Svd {
            u: su,
            singular_values: values,
            v_t: svt,
        }
    }

    pub fn leading_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Left singular vectors belonging to the first `r` values.
    pub fn u_cols(&self, r: usize) -> DMatrix<f64> {
        self.u.columns(0, r).into_owned()
    }

    /// `diag(sigma[..r]) * v_t[..r, :]`.
    pub fn sigma_vt_rows(&self, r: usize) -> DMatrix<f64> {
        let mut out = self.v_t.rows(0, r).into_owned();
        for (i, s) in self.singular_values.iter().take(r).enumerate() {
            out.row_mut(i).scale_mut(*s);
        }
        out
    }
}

/// Absolute cutoff `tol * reference * max(rows, cols)`.
pub fn rank_threshold(reference: f64, rows: usize, cols: usize, tol: f64) -> f64 {
    tol * reference * rows.max(cols) as f64
}

/// Number of singular values strictly above `threshold`.
pub fn count_above(spectrum: &[f64], threshold: f64) -> usize {
    spectrum.iter().filter(|&&s| s > threshold).count()
}

/// Count of singular values above `tol * sigma_1 * max(rows, cols)`; zero matrix gives 0.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let svd = Svd::new(m);
    let s1 = svd.leading_value();
    if s1 == 0.0 {
        return 0;
    }
    count_above(&svd.singular_values, rank_threshold(s1, m.nrows(), m.ncols(), tol))
}

/// Moore-Penrose pseudoinverse via truncated SVD.
pub fn pseudoinverse(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = Svd::new(m);
    let s1 = svd.leading_value();
    let (rows, cols) = m.shape();
    if s1 == 0.0 {
        return DMatrix::zeros(cols, rows);
    }
    let r = count_above(&svd.singular_values, rank_threshold(s1, rows, cols, tol));
    let mut v_scaled = svd.v_t.rows(0, r).transpose();
    for j in 0..r {
        v_scaled.column_mut(j).scale_mut(1.0 / svd.singular_values[j]);
    }
    v_scaled * svd.u.columns(0, r).transpose()
}

/// Orthogonal projector `A A^+` onto the column space of `a`.
pub fn projector_onto_range(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = Svd::new(a);
    let s1 = svd.leading_value();
    let rows = a.nrows();
    if s1 == 0.0 {
        return DMatrix::zeros(rows, rows);
    }
    let r = count_above(&svd.singular_values, rank_threshold(s1, a.nrows(), a.ncols(), tol));
    let u = svd.u_cols(r);
    &u * u.transpose()
}

/// Orthogonal projector `A^+ A` onto the row space of `a`.
pub fn projector_onto_row_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    projector_onto_range(&a.transpose(), tol)
}

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    debug_assert_eq!(rows * cols, data.len());
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, cols);
    }
    DMatrix::from_row_slice(rows, cols, data)
}

pub fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    // nalgebra is column-major; the transpose's storage is our row-major order
    m.transpose().as_slice().to_vec()
}

/// Reinterpret the row-major data of `m` with a new shape.
pub fn reshape(m: &DMatrix<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    assert_eq!(rows * cols, m.len(), "reshape must preserve element count");
    from_row_major(rows, cols, &to_row_major(m))
}

/// `‖a‖_F` with 0 for empty matrices.
pub fn fro(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.norm()
    }
}

/// `‖a‖ / scale`, defined as 0 when both vanish.
pub fn normalized(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        residual / scale
    }
}
