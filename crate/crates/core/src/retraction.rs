//! The curve `t -> gamma(t)` through the base point whose first derivative is
//! a given cone vector, and the retraction `R(A, v) = gamma(1)`.
//!
//! ```text
//! gamma(t) = (A_1 + t X_1  U_1) [A_i + t X_i  U_i] ... [A_d + t X_d]
//!                               [t V_i        Z_i]     [t V_d      ]
//! ```
//!
//! Bonds are `k_i + s~_i`, so `gamma(t)` has TT ranks at most `k + s~` for
//! every `t`.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::tt::{evaluate_chain, rank_profile, tt_evaluate, Core, Orthogonality, RankProfile, TTTensor};
use crate::tt_cone::{tc_evaluate, TangentConeVector};

/// Cores of `gamma(t)`.
pub fn gamma_cores(v: &TangentConeVector, t: f64) -> Vec<Core> {
    let d = v.order();
    let a = v.base().cores();
    let k = {
        let mut k = vec![1];
        k.extend(v.base().ranks());
        k.push(1);
        k
    };
    let s = v.channel_widths();
    let (xs, us, vs, zs) = (v.x_blocks(), v.u_blocks(), v.v_blocks(), v.z_blocks());
    (0..d)
        .map(|c| {
            let left = if c == 0 { 1 } else { k[c] + s[c] };
            let right = if c + 1 == d { 1 } else { k[c + 1] + s[c + 1] };
            let mut core = Core::zeros(left, a[c].mode(), right);
            core.add_block(&a[c], 0, 0, 1.0);
            core.add_block(&xs[c], 0, 0, t);
            if c + 1 < d {
                core.add_block(&us[c], 0, k[c + 1], 1.0);
            }
            if c > 0 {
                core.add_block(&vs[c - 1], k[c], 0, t);
            }
            if c > 0 && c + 1 < d {
                core.add_block(&zs[c - 1], k[c], k[c + 1], 1.0);
            }
            core
        })
        .collect()
}

pub fn gamma(v: &TangentConeVector, t: f64) -> DenseTensor {
    evaluate_chain(&gamma_cores(v, t)).expect("curve cores chain")
}

/// `gamma(1)` as a TT tensor with bonds `k + s~`; no re-truncation.
pub fn retract(v: &TangentConeVector) -> TTTensor {
    TTTensor::new(gamma_cores(v, 1.0), Orthogonality::None).expect("curve cores chain")
}

/// Represents `lambda * X`; `gamma(scale(v, l), t) = gamma(v, l t)`.
pub fn scale(v: &TangentConeVector, lambda: f64) -> TangentConeVector {
    v.scaled(lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub t: f64,
    pub value: DenseTensor,
    pub ranks: RankProfile,
}

impl CurveSample {
    /// Whether the sampled ranks respect `k + s~` of `v`.
    pub fn contained_in(&self, v: &TangentConeVector) -> bool {
        self.ranks.bounded_by(&rank_bound(v))
    }
}

/// `k_i + s~_i` for each split.
pub fn rank_bound(v: &TangentConeVector) -> Vec<usize> {
    v.base()
        .ranks()
        .iter()
        .zip(v.effective_slack())
        .map(|(k, s)| k + s)
        .collect()
}

pub fn sample_curve(v: &TangentConeVector, ts: &[f64], tol: f64) -> Vec<CurveSample> {
    ts.iter()
        .map(|&t| {
            let value = gamma(v, t);
            let ranks = rank_profile(&value, tol);
            CurveSample { t, value, ranks }
        })
        .collect()
}

/// Fit of `log ‖gamma(t) - A - t X‖` against `log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetractionOrder {
    pub t_grid: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope; `None` when the remainder vanishes.
    pub slope: Option<f64>,
}

impl RetractionOrder {
    pub fn degenerate(&self) -> bool {
        self.slope.is_none()
    }
}

/// Remainder below this (relative to `max(1, ‖A‖)`) at every `t` counts as zero.
pub const DEGENERATE_REMAINDER: f64 = 1e-14;

pub fn retraction_order(v: &TangentConeVector, t_grid: &[f64]) -> Result<RetractionOrder> {
    if t_grid.len() < 4 {
        return Err(Error::InvalidArgument(
            "t grid needs at least 4 points".into(),
        ));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || t_grid.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "t grid must be positive and strictly decreasing".into(),
        ));
    }
    let a = tt_evaluate(v.base());
    let x = tc_evaluate(v);
    let errors: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let linear = a.axpy(t, &x).expect("same dims");
            gamma(v, t).distance(&linear).expect("same dims")
        })
        .collect();
    let floor = DEGENERATE_REMAINDER * a.norm().max(1.0);
    let slope = if errors.iter().all(|e| *e <= floor) {
        None
    } else {
        let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    };
    Ok(RetractionOrder {
        t_grid: t_grid.to_vec(),
        errors,
        slope,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
