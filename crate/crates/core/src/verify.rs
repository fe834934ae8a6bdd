//! Referees that work from the definition of the tangent cone (limits of
//! secants through the base point) and never call [`crate::tc_extract`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Tolerance;
use crate::retraction::{gamma, least_squares_slope, rank_bound, retraction_order, RetractionOrder};
use crate::tensor::DenseTensor;
use crate::tt::{rank_profile, tt_evaluate, tt_svd, TTTensor};
use crate::tt_cone::{
    max_term_coherence, tc_evaluate, tc_orthogonal_terms, InvariantResiduals, TangentConeVector,
};

pub const DEFAULT_M_LIST: [u64; 5] = [8, 16, 32, 64, 128];

/// Secant errors `‖m (x_m - A) - X‖` for a sequence of points `x_m` of the
/// variety approaching `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecantReport {
    pub errors: Vec<(u64, f64)>,
    /// Whether the errors vanish at the `1/m` rate (or are zero outright).
    pub verdict: bool,
    /// `-slope` of `log error` against `log m`; `None` when all errors vanish.
    pub rate: Option<f64>,
}

impl SecantReport {
    /// `error(m_j) / error(m_{j-1})` for consecutive entries.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[1].1 / w[0].1).collect()
    }
}

/// Errors below this, relative to `max(1, ‖X‖)`, count as exact convergence.
pub const SECANT_ZERO: f64 = 1e-12;

/// Accepted band around the ideal ratio `m_{j-1} / m_j`; `[0.4, 0.6]` when
/// `m` doubles.
const RATIO_BAND: (f64, f64) = (0.8, 1.2);

fn check_m_list(m_list: &[u64]) -> Result<()> {
    if m_list.len() < 3 {
        return Err(Error::InvalidArgument("m list needs at least 3 entries".into()));
    }
    if m_list[0] == 0 || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "m list must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Roundoff allowance per unit of `m` relative to `max(1, ‖A‖)`: forming
/// `m (x_m - A)` multiplies the error of `x_m` by `m`.
pub const SECANT_ROUNDOFF: f64 = 256.0 * f64::EPSILON;

/// Errors below this are indistinguishable from an exact secant.
fn secant_floor(m: u64, x_norm: f64, a_norm: f64) -> f64 {
    SECANT_ZERO * x_norm.max(1.0) + SECANT_ROUNDOFF * m as f64 * a_norm.max(1.0)
}

fn judge(errors: Vec<(u64, f64)>, x_norm: f64, a_norm: f64) -> SecantReport {
    let exact = |&(m, e): &(u64, f64)| e <= secant_floor(m, x_norm, a_norm);
    if errors.iter().all(exact) {
        return SecantReport {
            errors,
            verdict: true,
            rate: None,
        };
    }
    let xs: Vec<f64> = errors.iter().map(|(m, _)| (*m as f64).ln()).collect();
    let ys: Vec<f64> = errors
        .iter()
        .map(|(_, e)| e.max(f64::MIN_POSITIVE).ln())
        .collect();
    let rate = -least_squares_slope(&xs, &ys);
    // the two largest pairs decide; a pair that has reached the floor counts
    // as converged
    let verdict = errors.windows(2).rev().take(2).all(|w| {
        let ideal = w[0].0 as f64 / w[1].0 as f64;
        let ratio = w[1].1 / w[0].1;
        exact(&w[1]) || (ratio >= RATIO_BAND.0 * ideal && ratio <= RATIO_BAND.1 * ideal)
    });
    SecantReport {
        errors,
        verdict,
        rate: Some(rate),
    }
}

/// Scaled secants `m (gamma(1/m) - A)` against `X` for each `m`.
pub fn secant_limit_check(v: &TangentConeVector, m_list: &[u64]) -> Result<SecantReport> {
    check_m_list(m_list)?;
    let a = tt_evaluate(v.base());
    let x = tc_evaluate(v);
    let errors = m_list
        .iter()
        .map(|&m| {
            let mf = m as f64;
            let secant = gamma(v, 1.0 / mf).sub(&a).expect("same dims").scaled(mf);
            (m, secant.distance(&x).expect("same dims"))
        })
        .collect();
    Ok(judge(errors, x.norm(), a.norm()))
}

/// Secants for a dense direction without any block structure: `x_m` is the
/// TT-SVD of `A + X/m` truncated to ranks `k + s`.
///
/// Inside the cone the truncation error is `O(1/m^2)`, so the scaled secant
/// error decays like `1/m`. Outside, some split keeps a first-order residual
/// of rank above `s_i` and the error plateaus.
pub fn secant_membership_check(
    base: &TTTensor,
    x: &DenseTensor,
    slack: &[usize],
    m_list: &[u64],
    tol: &Tolerance,
) -> Result<SecantReport> {
    check_m_list(m_list)?;
    if slack.len() + 1 != base.order() {
        return Err(Error::InvalidArgument(format!(
            "expected {} slack bounds, got {}",
            base.order() - 1,
            slack.len()
        )));
    }
    let a = tt_evaluate(base);
    a.check_same_dims(x)?;
    let bound: Vec<usize> = base.ranks().iter().zip(slack).map(|(k, s)| k + s).collect();
    let mut errors = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mf = m as f64;
        let target = a.axpy(1.0 / mf, x)?;
        let point = tt_evaluate(&tt_svd(&target, &bound, tol.rank)?.tensor);
        let secant = point.sub(&a)?.scaled(mf);
        errors.push((m, secant.distance(x)?));
    }
    Ok(judge(errors, x.norm(), a.norm()))
}

/// Curve-based certificate that `tc_evaluate(v)` is the first derivative of
/// an arc inside `{TT rank <= k + s~}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCertificate {
    pub secant: SecantReport,
    pub samples: Vec<(f64, Vec<usize>)>,
    pub bound: Vec<usize>,
    pub contained: bool,
}

impl DerivativeCertificate {
    pub fn holds(&self) -> bool {
        self.secant.verdict && self.contained
    }
}

/// Curve parameters used by [`first_derivative_certificate`].
pub fn default_curve_samples() -> Vec<f64> {
    (0..20).map(|i| -1.0 + 2.0 * i as f64 / 19.0).collect()
}

pub fn derivative_certificate(
    v: &TangentConeVector,
    ts: &[f64],
    tol: &Tolerance,
) -> Result<DerivativeCertificate> {
    let secant = secant_limit_check(v, &DEFAULT_M_LIST)?;
    let bound = rank_bound(v);
    let samples: Vec<(f64, Vec<usize>)> = ts
        .iter()
        .map(|&t| (t, rank_profile(&gamma(v, t), tol.rank).ranks))
        .collect();
    let contained = samples
        .iter()
        .all(|(_, r)| r.iter().zip(&bound).all(|(a, b)| a <= b));
    Ok(DerivativeCertificate {
        secant,
        samples,
        bound,
        contained,
    })
}

/// True for every cone vector, orthogonal blocks or not: the curve argument
/// only uses the block shapes.
pub fn first_derivative_certificate(v: &TangentConeVector) -> bool {
    derivative_certificate(v, &default_curve_samples(), &Tolerance::default())
        .map(|c| c.holds())
        .unwrap_or(false)
}

/// Normal-form checks on the block parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSuite {
    pub constraints: InvariantResiduals,
    /// Largest normalized inner product between distinct expansion terms.
    pub term_coherence: f64,
    /// `‖sum of terms - tc_evaluate(v)‖ / ‖tc_evaluate(v)‖`.
    pub term_sum_gap: f64,
}

pub const INVARIANT_TOL: f64 = 1e-11;

impl InvariantSuite {
    pub fn worst(&self) -> f64 {
        self.constraints.max().max(self.term_coherence)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol && self.term_sum_gap <= 1e-12
    }
}

pub fn invariant_suite(v: &TangentConeVector) -> InvariantSuite {
    let terms = tc_orthogonal_terms(v);
    let total = tc_evaluate(v);
    let mut sum = DenseTensor::zeros(total.dims()).expect("valid dims");
    for t in &terms {
        sum = sum.add(&t.value).expect("same dims");
    }
    let gap = sum.distance(&total).expect("same dims");
    let norm = total.norm();
    InvariantSuite {
        constraints: v.invariant_residuals(),
        term_coherence: max_term_coherence(&terms),
        term_sum_gap: if norm == 0.0 { gap } else { gap / norm },
    }
}

/// Everything the CLI `verify` command reports.
#[derive(Debug, Clone)]
pub struct Verification {
    pub secant: SecantReport,
    pub order: RetractionOrder,
    pub invariants: InvariantSuite,
    pub certificate: DerivativeCertificate,
}

pub const DEFAULT_T_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

impl Verification {
    pub fn passes(&self) -> bool {
        let order_ok = match self.order.slope {
            None => true,
            Some(s) => s >= 1.9,
        };
        self.secant.verdict && order_ok && self.invariants.passes(INVARIANT_TOL) && self.certificate.holds()
    }
}

pub fn verify(v: &TangentConeVector, tol: &Tolerance) -> Result<Verification> {
    Ok(Verification {
        secant: secant_limit_check(v, &DEFAULT_M_LIST)?,
        order: retraction_order(v, &DEFAULT_T_GRID)?,
        invariants: invariant_suite(v),
        certificate: derivative_certificate(v, &default_curve_samples(), tol)?,
    })
}
