//! Tensor-train format: cores, evaluation, TT-SVD, left-orthogonalization,
//! rank profiles and dense interface matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    count_above, fro, from_row_major, numerical_rank, rank_threshold, reshape, to_row_major, Svd,
};
use crate::tensor::DenseTensor;

/// A three-way core `left x mode x right`, row-major. Bond sizes may be zero.
///
/// The first core of a chain has `left == 1` and the last has `right == 1`;
/// those trivial bonds are dropped when serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    mode: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, mode: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        let expected = left * mode * right;
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: data.len(),
            });
        }
        if mode == 0 {
            return Err(Error::InvalidDims {
                dims: vec![left, mode, right],
                reason: "core mode size must be positive".into(),
            });
        }
        Ok(Core {
            left,
            mode,
            right,
            data,
        })
    }

    pub fn zeros(left: usize, mode: usize, right: usize) -> Self {
        Core {
            left,
            mode,
            right,
            data: vec![0.0; left * mode * right],
        }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.left, self.mode, self.right]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, n: usize, b: usize) -> f64 {
        self.data[(a * self.mode + n) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, n: usize, b: usize, value: f64) {
        self.data[(a * self.mode + n) * self.right + b] = value;
    }

    /// `left x (mode * right)`
    pub fn unfold_leading(&self) -> DMatrix<f64> {
        from_row_major(self.left, self.mode * self.right, &self.data)
    }

    /// `(left * mode) x right`
    pub fn unfold_trailing(&self) -> DMatrix<f64> {
        from_row_major(self.left * self.mode, self.right, &self.data)
    }

    pub fn from_leading(m: &DMatrix<f64>, mode: usize) -> Self {
        assert_eq!(m.ncols() % mode, 0);
        Core {
            left: m.nrows(),
            mode,
            right: m.ncols() / mode,
            data: to_row_major(m),
        }
    }

    pub fn from_trailing(m: &DMatrix<f64>, mode: usize) -> Self {
        assert_eq!(m.nrows() % mode, 0);
        Core {
            left: m.nrows() / mode,
            mode,
            right: m.ncols(),
            data: to_row_major(m),
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Core {
        Core {
            data: self.data.iter().map(|a| alpha * a).collect(),
            ..self.clone()
        }
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|a| *a *= alpha);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// Adds `block` into the sub-core starting at bond offsets `(row, col)`.
    pub fn add_block(&mut self, block: &Core, row: usize, col: usize, alpha: f64) {
        assert_eq!(block.mode, self.mode);
        assert!(row + block.left <= self.left && col + block.right <= self.right);
        for a in 0..block.left {
            for n in 0..block.mode {
                for b in 0..block.right {
                    let idx = ((row + a) * self.mode + n) * self.right + col + b;
                    self.data[idx] += alpha * block.get(a, n, b);
                }
            }
        }
    }

    /// Dims as written in files: `[n]`, `[n, k]`, `[k, n]` or `[k, n, k']`
    /// depending on the core's position in a chain of `order` cores.
    pub fn external_dims(&self, position: usize, order: usize) -> Vec<usize> {
        let first = position == 0;
        let last = position + 1 == order;
        match (first, last) {
            (true, true) => vec![self.mode],
            (true, false) => vec![self.mode, self.right],
            (false, true) => vec![self.left, self.mode],
            (false, false) => vec![self.left, self.mode, self.right],
        }
    }

    /// Inverse of [`Core::external_dims`].
    pub fn from_external(dims: &[usize], data: Vec<f64>, position: usize, order: usize) -> Result<Self> {
        let first = position == 0;
        let last = position + 1 == order;
        let (l, n, r) = match (first, last, dims) {
            (true, true, [n]) => (1, *n, 1),
            (true, false, [n, k]) => (1, *n, *k),
            (false, true, [k, n]) => (*k, *n, 1),
            (false, false, [k, n, k2]) => (*k, *n, *k2),
            _ => {
                return Err(Error::InvalidDims {
                    dims: dims.to_vec(),
                    reason: format!("wrong number of dims for core {position} of {order}"),
                })
            }
        };
        Core::new(l, n, r, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthogonality {
    None,
    Left,
}

/// A chain of cores `A_1 ... A_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTTensor {
    cores: Vec<Core>,
    flag: Orthogonality,
}

impl TTTensor {
    pub fn new(cores: Vec<Core>, flag: Orthogonality) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidArgument("a TT tensor needs at least one core".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::InvalidArgument(
                "boundary bonds of a TT chain must be 1".into(),
            ));
        }
        for pair in cores.windows(2) {
            if pair[0].right != pair[1].left {
                return Err(Error::BondMismatch {
                    left: pair[0].right,
                    right: pair[1].left,
                });
            }
        }
        Ok(TTTensor { cores, flag })
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core(&self, i: usize) -> &Core {
        &self.cores[i]
    }

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    pub fn flag(&self) -> Orthogonality {
        self.flag
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode).collect()
    }

    /// Bond sizes `(k_1, ..., k_{d-1})`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.right)
            .collect()
    }

    /// `‖A_1^T A_1 - I‖` and `‖(A_i^R)^T A_i^R - I‖` for every core but the last.
    pub fn orthogonality_residuals(&self) -> Vec<f64> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| {
                let m = c.unfold_trailing();
                let g = m.transpose() * &m;
                fro(&(g - DMatrix::identity(c.right, c.right)))
            })
            .collect()
    }

    /// Verifies left-orthogonality within `tol`.
    pub fn check_left_orthogonal(&self, tol: f64) -> Result<()> {
        for (core, residual) in self.orthogonality_residuals().into_iter().enumerate() {
            // NaN residuals fail too
            if residual.is_nan() || residual > tol {
                return Err(Error::NotLeftOrthogonal { core, residual });
            }
        }
        Ok(())
    }

    /// Dense left interfaces `L_i = A_1 ... A_i` as `(n_1...n_i) x k_i`
    /// matrices, for `i = 1..d-1` (entry `i-1`).
    pub fn left_interfaces(&self) -> Vec<DMatrix<f64>> {
        let d = self.order();
        let mut out = Vec::with_capacity(d.saturating_sub(1));
        let mut acc = DMatrix::from_element(1, 1, 1.0);
        for core in &self.cores[..d - 1] {
            acc = contract_left(&acc, core);
            out.push(acc.clone());
        }
        out
    }

    /// Dense right interfaces `R_j = A_j ... A_d` as `k_{j-1} x (n_j...n_d)`
    /// matrices, for `j = 2..d` (entry `j-2`).
    pub fn right_interfaces(&self) -> Vec<DMatrix<f64>> {
        let d = self.order();
        let mut out = Vec::with_capacity(d.saturating_sub(1));
        let mut acc = DMatrix::from_element(1, 1, 1.0);
        for core in self.cores[1..].iter().rev() {
            acc = contract_right(core, &acc);
            out.push(acc.clone());
        }
        out.reverse();
        out
    }

    pub fn is_finite(&self) -> bool {
        self.cores.iter().all(Core::is_finite)
    }
}

/// `(N x k) . core(k x n x r)` reshaped to `(N n) x r`.
pub(crate) fn contract_left(acc: &DMatrix<f64>, core: &Core) -> DMatrix<f64> {
    debug_assert_eq!(acc.ncols(), core.left);
    let prod = acc * core.unfold_leading();
    reshape(&prod, acc.nrows() * core.mode, core.right)
}

/// `core(l x n x k) . (k x M)` reshaped to `l x (n M)`.
pub(crate) fn contract_right(core: &Core, acc: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(core.right, acc.nrows());
    let prod = core.unfold_trailing() * acc;
    reshape(&prod, core.left, core.mode * acc.ncols())
}

/// Contracts a chain of cores with `left == 1` on the first and `right == 1`
/// on the last into a dense tensor.
pub fn evaluate_chain(cores: &[Core]) -> Result<DenseTensor> {
    let first = cores
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty core chain".into()))?;
    if first.left != 1 {
        return Err(Error::BondMismatch {
            left: 1,
            right: first.left,
        });
    }
    let mut acc = DMatrix::from_element(1, 1, 1.0);
    for core in cores {
        if acc.ncols() != core.left {
            return Err(Error::BondMismatch {
                left: acc.ncols(),
                right: core.left,
            });
        }
        acc = contract_left(&acc, core);
    }
    if acc.ncols() != 1 {
        return Err(Error::BondMismatch {
            left: acc.ncols(),
            right: 1,
        });
    }
    let dims = cores.iter().map(|c| c.mode).collect();
    Ok(DenseTensor::from_parts_unchecked(dims, to_row_major(&acc)))
}

pub fn tt_evaluate(t: &TTTensor) -> DenseTensor {
    evaluate_chain(&t.cores).expect("TTTensor chains are validated on construction")
}

/// Output of [`tt_svd`].
#[derive(Debug, Clone)]
pub struct TtSvd {
    pub tensor: TTTensor,
    /// Norm of the discarded singular values at each split.
    pub truncation: Vec<f64>,
}

/// Sequential-SVD construction of a left-orthogonal TT tensor with ranks at
/// most `max_ranks`, dropping singular values below the rank tolerance.
pub fn tt_svd(t: &DenseTensor, max_ranks: &[usize], tol: f64) -> Result<TtSvd> {
    let d = t.order();
    if max_ranks.len() + 1 != d {
        return Err(Error::InvalidArgument(format!(
            "expected {} max ranks for an order-{d} tensor, got {}",
            d - 1,
            max_ranks.len()
        )));
    }
    let dims = t.dims();
    let mut cores = Vec::with_capacity(d);
    let mut truncation = Vec::with_capacity(d - 1);
    let mut bond = 1;
    let mut rest = t.data().to_vec();
    for i in 0..d - 1 {
        let rows = bond * dims[i];
        let cols: usize = dims[i + 1..].iter().product();
        let m = from_row_major(rows, cols, &rest);
        let svd = Svd::new(&m);
        let s1 = svd.leading_value();
        let kept = if s1 == 0.0 {
            0
        } else {
            count_above(&svd.singular_values, rank_threshold(s1, rows, cols, tol))
        };
        let r = kept.min(max_ranks[i]);
        truncation.push(
            svd.singular_values[r..]
                .iter()
                .map(|s| s * s)
                .sum::<f64>()
                .sqrt(),
        );
        cores.push(Core::from_trailing(&svd.u_cols(r), dims[i]));
        rest = to_row_major(&svd.sigma_vt_rows(r));
        bond = r;
    }
    cores.push(Core {
        left: bond,
        mode: dims[d - 1],
        right: 1,
        data: rest,
    });
    Ok(TtSvd {
        tensor: TTTensor::new(cores, Orthogonality::Left)?,
        truncation,
    })
}

/// QR sweep producing `A_1^T A_1 = I` and `(A_i^R)^T A_i^R = I` for all but
/// the last core. Bonds only shrink where `left * mode < right`.
pub fn left_orthogonalize(t: &TTTensor) -> TTTensor {
    let d = t.order();
    let mut cores = Vec::with_capacity(d);
    let mut carry: Option<DMatrix<f64>> = None;
    for (i, core) in t.cores.iter().enumerate() {
        let core = match carry.take() {
            Some(r) => Core::from_leading(&(r * core.unfold_leading()), core.mode),
            None => core.clone(),
        };
        if i + 1 == d {
            cores.push(core);
            break;
        }
        let m = core.unfold_trailing();
        let (q, r) = if m.nrows() == 0 || m.ncols() == 0 {
            let p = m.nrows().min(m.ncols());
            (DMatrix::zeros(m.nrows(), p), DMatrix::zeros(p, m.ncols()))
        } else {
            let qr = m.qr();
            (qr.q(), qr.r())
        };
        cores.push(Core::from_trailing(&q, core.mode));
        carry = Some(r);
    }
    TTTensor {
        cores,
        flag: Orthogonality::Left,
    }
}

/// Matricization ranks of a dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub ranks: Vec<usize>,
    pub tol: f64,
}

impl RankProfile {
    /// Componentwise `self <= bound`.
    pub fn bounded_by(&self, bound: &[usize]) -> bool {
        self.ranks.len() == bound.len() && self.ranks.iter().zip(bound).all(|(r, b)| r <= b)
    }
}

pub fn rank_profile(t: &DenseTensor, tol: f64) -> RankProfile {
    let ranks = (1..t.order())
        .map(|i| numerical_rank(&t.unfold(i).expect("split in range"), tol))
        .collect();
    RankProfile { ranks, tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_RANK_TOL;
    use crate::random::{random_tt, Gaussian};

    /// Brute-force index summation over every bond index.
    fn brute_force(t: &TTTensor) -> DenseTensor {
        let dims = t.dims();
        let total: usize = dims.iter().product();
        let mut data = vec![0.0; total];
        let d = dims.len();
        for (flat, slot) in data.iter_mut().enumerate() {
            let mut idx = vec![0; d];
            let mut rem = flat;
            for j in (0..d).rev() {
                idx[j] = rem % dims[j];
                rem /= dims[j];
            }
            // enumerate all bond index tuples recursively
            fn rec(t: &TTTensor, idx: &[usize], pos: usize, bond: usize, acc: f64) -> f64 {
                let core = t.core(pos);
                if pos + 1 == t.order() {
                    return acc * core.get(bond, idx[pos], 0);
                }
                (0..core.right())
                    .map(|b| rec(t, idx, pos + 1, b, acc * core.get(bond, idx[pos], b)))
                    .sum()
            }
            *slot = rec(t, &idx, 0, 0, 1.0);
        }
        DenseTensor::new(dims, data).unwrap()
    }

    #[test]
    fn unit_bonds_give_outer_product() {
        let a = Core::new(1, 2, 1, vec![1.0, 2.0]).unwrap();
        let b = Core::new(1, 2, 1, vec![3.0, -1.0]).unwrap();
        let c = Core::new(1, 3, 1, vec![0.5, 1.0, 2.0]).unwrap();
        let t = TTTensor::new(vec![a, b, c], Orthogonality::None).unwrap();
        let expect =
            DenseTensor::outer(&[vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 1.0, 2.0]]).unwrap();
        assert_eq!(tt_evaluate(&t), expect);
    }

    #[test]
    fn order_two_is_matrix_product() {
        let a = Core::new(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Core::new(2, 3, 1, vec![1.0, 0.0, -1.0, 2.0, 1.0, 0.5]).unwrap();
        let t = TTTensor::new(vec![a.clone(), b.clone()], Orthogonality::None).unwrap();
        let expect = a.unfold_trailing() * b.unfold_leading();
        assert_eq!(tt_evaluate(&t).unfold(1).unwrap(), expect);
    }

    #[test]
    fn evaluation_matches_brute_force() {
        let mut g = Gaussian::new(7);
        let t = random_tt(&[2, 3, 2, 3], &[2, 3, 2], &mut g).unwrap();
        let fast = tt_evaluate(&t);
        let slow = brute_force(&t);
        assert!(fast.distance(&slow).unwrap() <= 1e-13 * slow.norm().max(1.0));
    }

    #[test]
    fn chain_mismatch_rejected() {
        let a = Core::zeros(1, 2, 2);
        let b = Core::zeros(3, 2, 1);
        assert!(matches!(
            TTTensor::new(vec![a, b], Orthogonality::None),
            Err(Error::BondMismatch { .. })
        ));
    }

    #[test]
    fn tt_svd_rank_one() {
        let t = DenseTensor::outer(&[vec![1.0, -2.0], vec![0.5, 1.0, 3.0], vec![2.0, 1.0]])
            .unwrap();
        let out = tt_svd(&t, &[5, 5], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(out.tensor.ranks(), vec![1, 1]);
        assert!(tt_evaluate(&out.tensor).distance(&t).unwrap() <= 1e-13);
        assert!(out
            .tensor
            .orthogonality_residuals()
            .iter()
            .all(|r| *r < 1e-13));
    }

    #[test]
    fn tt_svd_zero_tensor() {
        let z = DenseTensor::zeros(&[2, 3, 2]).unwrap();
        let out = tt_svd(&z, &[2, 2], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(out.tensor.ranks(), vec![0, 0]);
        assert_eq!(tt_evaluate(&out.tensor), z);
    }

    #[test]
    fn tt_svd_recovers_ranks() {
        let mut g = Gaussian::new(11);
        let t = tt_evaluate(&random_tt(&[3, 3, 3], &[2, 2], &mut g).unwrap());
        let out = tt_svd(&t, &[9, 9], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(out.tensor.ranks(), vec![2, 2]);
        assert!(tt_evaluate(&out.tensor).distance(&t).unwrap() <= 1e-12 * t.norm());
    }

    #[test]
    fn tt_svd_truncates_to_max_ranks() {
        let mut g = Gaussian::new(12);
        let t = tt_evaluate(&random_tt(&[3, 3, 3], &[3, 3], &mut g).unwrap());
        let out = tt_svd(&t, &[1, 2], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(out.tensor.ranks(), vec![1, 2]);
        assert!(out.truncation[0] > 0.0);
    }

    #[test]
    fn left_orthogonalize_is_idempotent() {
        let mut g = Gaussian::new(3);
        let t = left_orthogonalize(&random_tt(&[3, 4, 3], &[2, 2], &mut g).unwrap());
        let before = t.orthogonality_residuals();
        let again = left_orthogonalize(&t);
        let after = again.orthogonality_residuals();
        assert!(before.iter().all(|r| *r <= 1e-13));
        assert!(after.iter().all(|r| *r <= 1e-14 + before.iter().cloned().fold(0.0, f64::max)));
        assert_eq!(again.ranks(), t.ranks());
    }

    #[test]
    fn left_orthogonalize_preserves_values() {
        for seed in 0..50 {
            let mut g = Gaussian::new(seed);
            let t = random_tt(&[3, 2, 3], &[2, 2], &mut g).unwrap();
            let o = left_orthogonalize(&t);
            assert_eq!(o.flag(), Orthogonality::Left);
            assert_eq!(o.ranks(), vec![2, 2]);
            assert!(o.orthogonality_residuals().iter().all(|r| *r <= 1e-13));
            let rel = tt_evaluate(&o).relative_error(&tt_evaluate(&t)).unwrap();
            assert!(rel <= 1e-12, "seed {seed}: {rel}");
        }
    }

    #[test]
    fn rank_profile_examples() {
        let r1 = DenseTensor::outer(&[vec![1.0, 2.0], vec![3.0, 1.0], vec![1.0, -1.0, 2.0]])
            .unwrap();
        assert_eq!(rank_profile(&r1, DEFAULT_RANK_TOL).ranks, vec![1, 1]);
        let z = DenseTensor::zeros(&[2, 2, 2, 2]).unwrap();
        assert_eq!(rank_profile(&z, DEFAULT_RANK_TOL).ranks, vec![0, 0, 0]);
        let mut g = Gaussian::new(5);
        let t = tt_evaluate(&random_tt(&[3, 3, 3], &[2, 1], &mut g).unwrap());
        assert_eq!(rank_profile(&t, DEFAULT_RANK_TOL).ranks, vec![2, 1]);
    }

    #[test]
    fn interfaces_multiply_back() {
        let mut g = Gaussian::new(9);
        let t = random_tt(&[2, 3, 2, 2], &[2, 2, 2], &mut g).unwrap();
        let dense = tt_evaluate(&t);
        let ls = t.left_interfaces();
        let rs = t.right_interfaces();
        for i in 1..4 {
            let m = &ls[i - 1] * &rs[i - 1];
            assert!((m - dense.unfold(i).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn external_dims_round_trip() {
        let c = Core::zeros(2, 3, 4);
        let dims = c.external_dims(1, 3);
        assert_eq!(dims, vec![2, 3, 4]);
        let back = Core::from_external(&dims, c.data().to_vec(), 1, 3).unwrap();
        assert_eq!(back, c);
        assert!(Core::from_external(&[2, 3], vec![0.0; 6], 1, 3).is_err());
    }
}
