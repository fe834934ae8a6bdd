//! Block parametrization of the tangent cone to `{TT rank <= k + s}` at a
//! left-orthogonal point `A = A_1 ... A_d` of exact rank `k`.
//!
//! A cone vector is the block TT chain
//!
//! ```text
//! (A_1 U_1 X_1) [A_2 U_2 X_2] ... [A_{d-1} U_{d-1} X_{d-1}] (X_d)
//!               [0   Z_2 V_2]     [0       Z_{d-1} V_{d-1}] (V_d)
//!               [0   0   A_2]     [0       0       A_{d-1}] (A_d)
//! ```
//!
//! with `(A_i^R)^T U_i^R = 0`, `(A_i^R)^T X_i^R = 0` for `i < d` and
//! `(V_i A_{i+1}...A_d)^L ((A_i...A_d)^L)^T = 0` for `i >= 2`. The channel
//! widths `s~_i` are the effective slacks.
//!
//! Indexing below is 0-based over cores: `x[c]` for every core, `u[c]` for
//! `c < d-1`, `v[c-1]` for `c >= 1`, `z[c-1]` for `1 <= c <= d-2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    fro, normalized, projector_onto_range, projector_onto_row_space, pseudoinverse, reshape, Svd,
    Tolerance,
};
use crate::matrix_cone::{residual_certificate, SplitCertificate};
use crate::random::Gaussian;
use crate::tensor::DenseTensor;
use crate::tt::{
    contract_right, evaluate_chain, rank_profile, tt_evaluate, Core, TTTensor,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentConeVector {
    base: TTTensor,
    slack: Vec<usize>,
    x: Vec<Core>,
    u: Vec<Core>,
    v: Vec<Core>,
    z: Vec<Core>,
}

fn shape_err(what: &str, idx: usize, got: [usize; 3], want: [usize; 3]) -> Error {
    Error::BlockShape(format!("{what}[{idx}] has shape {got:?}, expected {want:?}"))
}

impl TangentConeVector {
    /// Assembles a cone vector, checking that every block chains with the
    /// base cores. Orthogonality constraints are not enforced here; see
    /// [`TangentConeVector::invariant_residuals`].
    pub fn new(
        base: TTTensor,
        slack: Vec<usize>,
        x: Vec<Core>,
        u: Vec<Core>,
        v: Vec<Core>,
        z: Vec<Core>,
    ) -> Result<Self> {
        let d = base.order();
        if d < 2 {
            return Err(Error::InvalidArgument(
                "cone vectors need a base of order at least 2".into(),
            ));
        }
        if slack.len() != d - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} slack bounds, got {}",
                d - 1,
                slack.len()
            )));
        }
        if x.len() != d || u.len() != d - 1 || v.len() != d - 1 || z.len() != d - 2 {
            return Err(Error::BlockShape(format!(
                "block counts X={} U={} V={} Z={} do not fit order {d}",
                x.len(),
                u.len(),
                v.len(),
                z.len()
            )));
        }
        let k = bonds(&base);
        let n = base.dims();
        let s: Vec<usize> = u.iter().map(Core::right).collect();
        for (j, (&eff, &bound)) in s.iter().zip(&slack).enumerate() {
            if eff > bound {
                return Err(Error::BlockShape(format!(
                    "channel width {eff} at split {} exceeds slack {bound}",
                    j + 1
                )));
            }
        }
        let sw = |i: usize| if i == 0 || i == d { 0 } else { s[i - 1] };
        for c in 0..d {
            let want = [k[c], n[c], k[c + 1]];
            if x[c].shape() != want {
                return Err(shape_err("X", c, x[c].shape(), want));
            }
            if c + 1 < d {
                let want = [k[c], n[c], sw(c + 1)];
                if u[c].shape() != want {
                    return Err(shape_err("U", c, u[c].shape(), want));
                }
            }
            if c >= 1 {
                let want = [sw(c), n[c], k[c + 1]];
                if v[c - 1].shape() != want {
                    return Err(shape_err("V", c - 1, v[c - 1].shape(), want));
                }
            }
            if c >= 1 && c + 1 < d {
                let want = [sw(c), n[c], sw(c + 1)];
                if z[c - 1].shape() != want {
                    return Err(shape_err("Z", c - 1, z[c - 1].shape(), want));
                }
            }
        }
        Ok(TangentConeVector {
            base,
            slack,
            x,
            u,
            v,
            z,
        })
    }

    /// The zero direction at `base` with empty channels.
    pub fn zero(base: TTTensor, slack: Vec<usize>) -> Result<Self> {
        let d = base.order();
        let k = bonds(&base);
        let n = base.dims();
        let x = (0..d).map(|c| Core::zeros(k[c], n[c], k[c + 1])).collect();
        let u = (0..d - 1).map(|c| Core::zeros(k[c], n[c], 0)).collect();
        let v = (1..d).map(|c| Core::zeros(0, n[c], k[c + 1])).collect();
        let z = (1..d - 1).map(|c| Core::zeros(0, n[c], 0)).collect();
        TangentConeVector::new(base, slack, x, u, v, z)
    }

    pub fn base(&self) -> &TTTensor {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// Declared slack bounds `s`.
    pub fn slack(&self) -> &[usize] {
        &self.slack
    }

    /// Channel widths `s~`.
    pub fn effective_slack(&self) -> Vec<usize> {
        self.u.iter().map(Core::right).collect()
    }

    pub fn x_blocks(&self) -> &[Core] {
        &self.x
    }

    pub fn u_blocks(&self) -> &[Core] {
        &self.u
    }

    pub fn v_blocks(&self) -> &[Core] {
        &self.v
    }

    pub fn z_blocks(&self) -> &[Core] {
        &self.z
    }

    pub fn x_blocks_mut(&mut self) -> &mut [Core] {
        &mut self.x
    }

    pub fn u_blocks_mut(&mut self) -> &mut [Core] {
        &mut self.u
    }

    pub fn v_blocks_mut(&mut self) -> &mut [Core] {
        &mut self.v
    }

    pub fn z_blocks_mut(&mut self) -> &mut [Core] {
        &mut self.z
    }

    /// Multiplies the X and V blocks by `lambda`; represents `lambda * X`.
    pub fn scaled(&self, lambda: f64) -> TangentConeVector {
        let mut out = self.clone();
        out.x.iter_mut().for_each(|c| c.scale_mut(lambda));
        out.v.iter_mut().for_each(|c| c.scale_mut(lambda));
        out
    }

    pub fn is_finite(&self) -> bool {
        self.base.is_finite()
            && [&self.x, &self.u, &self.v, &self.z]
                .iter()
                .all(|blocks| blocks.iter().all(Core::is_finite))
    }

    /// The `(k + s~ + k)`-bond block chain.
    pub fn block_cores(&self) -> Vec<Core> {
        let d = self.order();
        let k = bonds(&self.base);
        let s = self.channel_widths();
        let a = self.base.cores();
        let width = |i: usize| if i == 0 || i == d { 1 } else { 2 * k[i] + s[i] };
        (0..d)
            .map(|c| {
                let mut core = Core::zeros(width(c), a[c].mode(), width(c + 1));
                match (c == 0, c + 1 == d) {
                    (true, _) => {
                        core.add_block(&a[c], 0, 0, 1.0);
                        core.add_block(&self.u[c], 0, k[1], 1.0);
                        core.add_block(&self.x[c], 0, k[1] + s[1], 1.0);
                    }
                    (false, true) => {
                        core.add_block(&self.x[c], 0, 0, 1.0);
                        core.add_block(&self.v[c - 1], k[c], 0, 1.0);
                        core.add_block(&a[c], k[c] + s[c], 0, 1.0);
                    }
                    (false, false) => {
                        let (r1, r2) = (k[c], k[c] + s[c]);
                        let (c1, c2) = (k[c + 1], k[c + 1] + s[c + 1]);
                        core.add_block(&a[c], 0, 0, 1.0);
                        core.add_block(&self.u[c], 0, c1, 1.0);
                        core.add_block(&self.x[c], 0, c2, 1.0);
                        core.add_block(&self.z[c - 1], r1, c1, 1.0);
                        core.add_block(&self.v[c - 1], r1, c2, 1.0);
                        core.add_block(&a[c], r2, c2, 1.0);
                    }
                }
                core
            })
            .collect()
    }

    /// Channel widths indexed by 1-based split, padded with zeros at 0 and d.
    pub(crate) fn channel_widths(&self) -> Vec<usize> {
        let mut s = vec![0];
        s.extend(self.effective_slack());
        s.push(0);
        s
    }

    /// Residuals of the three constraint families, each divided by the norms
    /// of its two factors. A block that is roundoff next to the rest of the
    /// vector is measured against the largest block instead of itself.
    pub fn invariant_residuals(&self) -> InvariantResiduals {
        let d = self.order();
        let a = self.base.cores();
        let rs = self.base.right_interfaces();
        let scale = self
            .x
            .iter()
            .chain(&self.u)
            .chain(&self.v)
            .fold(0.0_f64, |m, c| m.max(c.norm()));
        let left_orth = |block: &Core, core: &Core| {
            let ar = core.unfold_trailing();
            let br = block.unfold_trailing();
            normalized(fro(&(ar.transpose() * &br)), fro(&ar) * fro(&br).max(scale))
        };
        let u = (0..d - 1).map(|c| left_orth(&self.u[c], &a[c])).collect();
        let x = (0..d - 1).map(|c| left_orth(&self.x[c], &a[c])).collect();
        let v = (1..d)
            .map(|c| {
                let tail = if c + 1 < d {
                    rs[c].clone()
                } else {
                    DMatrix::from_element(1, 1, 1.0)
                };
                let vr = contract_right(&self.v[c - 1], &tail);
                let r = &rs[c - 1];
                let block_scale = fro(&vr).max(scale * fro(&tail));
                normalized(fro(&(&vr * r.transpose())), block_scale * fro(r))
            })
            .collect();
        InvariantResiduals { u, x, v }
    }
}

/// Bond sizes `k_0 = 1, k_1, ..., k_{d-1}, k_d = 1`.
fn bonds(base: &TTTensor) -> Vec<usize> {
    let mut k = vec![1];
    k.extend(base.ranks());
    k.push(1);
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResiduals {
    /// `(A_i^R)^T U_i^R`, `i < d`.
    pub u: Vec<f64>,
    /// `(A_i^R)^T X_i^R`, `i < d`.
    pub x: Vec<f64>,
    /// `(V_i A_{i+1}...A_d)^L ((A_i...A_d)^L)^T`, `i >= 2`.
    pub v: Vec<f64>,
}

impl InvariantResiduals {
    pub fn max(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.x)
            .chain(&self.v)
            .fold(0.0, |m, r| m.max(*r))
    }
}

pub fn tc_evaluate(v: &TangentConeVector) -> DenseTensor {
    evaluate_chain(&v.block_cores()).expect("block chain validated on construction")
}

/// Which summand of the orthogonal expansion a term is.
///
/// Line 1 holds `A...A X_p A...A` with `first == last == p`; line `l >= 2`
/// holds `A...A U_first Z...Z V_last A...A` with `last - first == l - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermLabel {
    pub line: usize,
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone)]
pub struct OrthogonalTerm {
    pub label: TermLabel,
    pub value: DenseTensor,
}

/// Every summand of the expansion, `d (d + 1) / 2` in total, ordered by line
/// and then by the position of the first non-base block.
pub fn tc_orthogonal_terms(v: &TangentConeVector) -> Vec<OrthogonalTerm> {
    let d = v.order();
    let a = v.base.cores();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for p in 0..d {
        let mut chain: Vec<Core> = a.to_vec();
        chain[p] = v.x[p].clone();
        out.push(OrthogonalTerm {
            label: TermLabel {
                line: 1,
                first: p,
                last: p,
            },
            value: evaluate_chain(&chain).expect("valid chain"),
        });
    }
    for gap in 1..d {
        for first in 0..d - gap {
            let last = first + gap;
            let mut chain: Vec<Core> = a.to_vec();
            chain[first] = v.u[first].clone();
            chain[first + 1..last].clone_from_slice(&v.z[first..last - 1]);
            chain[last] = v.v[last - 1].clone();
            out.push(OrthogonalTerm {
                label: TermLabel {
                    line: gap + 1,
                    first,
                    last,
                },
                value: evaluate_chain(&chain).expect("valid chain"),
            });
        }
    }
    out
}

/// Largest `|<T_a, T_b>| / (‖T_a‖ ‖T_b‖)` over distinct term pairs.
///
/// Term norms are floored at [`TERM_FLOOR`] times the largest term, so a
/// term that is pure roundoff (a block forced to zero) does not register as
/// coherent with everything else.
pub fn max_term_coherence(terms: &[OrthogonalTerm]) -> f64 {
    let norms: Vec<f64> = terms.iter().map(|t| t.value.norm()).collect();
    let floor = TERM_FLOOR * norms.iter().fold(0.0_f64, |m, n| m.max(*n));
    let mut worst: f64 = 0.0;
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate().skip(i + 1) {
            let ip = a.value.inner(&b.value).expect("same dims");
            let scale = norms[i].max(floor) * norms[j].max(floor);
            worst = worst.max(normalized(ip.abs(), scale));
        }
    }
    worst
}

pub const TERM_FLOOR: f64 = 1e-3;

fn check_base(base: &TTTensor, tol: &Tolerance) -> Result<DenseTensor> {
    if base.order() < 2 {
        return Err(Error::InvalidArgument(
            "base must have order at least 2".into(),
        ));
    }
    let dense = tt_evaluate(base);
    let found = rank_profile(&dense, tol.rank).ranks;
    let declared = base.ranks();
    if found != declared {
        return Err(Error::RankDeficientBase { declared, found });
    }
    Ok(dense)
}

fn check_slack(base: &TTTensor, slack: &[usize]) -> Result<()> {
    if slack.len() + 1 != base.order() {
        return Err(Error::InvalidArgument(format!(
            "expected {} slack bounds, got {}",
            base.order() - 1,
            slack.len()
        )));
    }
    Ok(())
}

/// Per-split verdicts of the implicit membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeMembership {
    pub splits: Vec<SplitCertificate>,
}

impl ConeMembership {
    pub fn member(&self) -> bool {
        self.splits.iter().all(SplitCertificate::member)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.splits.iter().map(|c| c.rank).collect()
    }
}

/// Implicit test: `X` is in the cone iff at every split the matricization,
/// projected away from the column and row spaces of the base point's
/// matricization, has rank at most `s_i`. Projectors come from dense SVDs of
/// the base, not from its cores.
pub fn tc_membership(
    base: &TTTensor,
    x: &DenseTensor,
    slack: &[usize],
    tol: &Tolerance,
) -> Result<ConeMembership> {
    check_slack(base, slack)?;
    let dense = check_base(base, tol)?;
    dense.check_same_dims(x)?;
    let splits = (1..base.order())
        .map(|i| {
            let am = dense.unfold(i).expect("split in range");
            let p = projector_onto_range(&am, tol.rank);
            let q = projector_onto_row_space(&am, tol.rank);
            let xm = x.unfold(i).expect("split in range");
            residual_certificate(&xm, &p, &q, i, slack[i - 1], tol.rank).2
        })
        .collect();
    Ok(ConeMembership { splits })
}

/// Relative size of the channel mismatch that [`tc_extract`] tolerates
/// before giving up with `DegenerateChannels`.
const CHANNEL_TOL: f64 = 1e-6;

/// Recovers the block parametrization of `x` at `base`.
///
/// At split `i` with left interface `L` (orthonormal) and right interface `R`,
/// `x = L T + B P + C R` where `C = (I - L L^T) x R^+` and `B P` is the thin
/// SVD of the doubly projected residual. The chain prefixes of the block TT
/// are exactly `(L_i | B_i | C_i)`, so each middle core follows from
/// `B_i = L_{i-1} U_i + B_{i-1} Z_i` and `C_i = L_{i-1} X_i + B_{i-1} V_i +
/// C_{i-1} A_i`; the V block is read off the carried rows as `P_{i-1} R_{i+1}^+`.
pub fn tc_extract(
    base: &TTTensor,
    x: &DenseTensor,
    slack: &[usize],
    tol: &Tolerance,
) -> Result<TangentConeVector> {
    check_slack(base, slack)?;
    base.check_left_orthogonal(tol.orthogonality)?;
    let dense = check_base(base, tol)?;
    dense.check_same_dims(x)?;

    let d = base.order();
    let n = base.dims();
    let ls = base.left_interfaces();
    let rs = base.right_interfaces();

    let mut b_pref = Vec::with_capacity(d - 1);
    let mut c_pref = Vec::with_capacity(d - 1);
    let mut rows = Vec::with_capacity(d - 1);
    let mut r_pinv = Vec::with_capacity(d - 1);
    for j in 0..d - 1 {
        let l = &ls[j];
        let r = &rs[j];
        let rp = pseudoinverse(r, tol.rank);
        let xm = x.unfold(j + 1)?;
        let xc = &xm - l * (l.transpose() * &xm);
        let c = &xc * &rp;
        let residual = &xc - &c * r;
        let svd = Svd::new(&residual);
        let reference = Svd::new(&xm).leading_value();
        let threshold =
            crate::linalg::rank_threshold(reference, xm.nrows(), xm.ncols(), tol.rank);
        let rank = if reference == 0.0 {
            0
        } else {
            crate::linalg::count_above(&svd.singular_values, threshold)
        };
        if rank > slack[j] {
            return Err(Error::NotInCone {
                split: j + 1,
                rank,
                slack: slack[j],
                threshold,
                spectrum: svd.singular_values,
            });
        }
        b_pref.push(svd.u_cols(rank));
        rows.push(svd.sigma_vt_rows(rank));
        c_pref.push(c);
        r_pinv.push(rp);
    }

    let mut xs = Vec::with_capacity(d);
    let mut us = Vec::with_capacity(d - 1);
    let mut vs = Vec::with_capacity(d - 1);
    let mut zs = Vec::with_capacity(d.saturating_sub(2));

    xs.push(Core::from_trailing(&c_pref[0], n[0]));
    us.push(Core::from_trailing(&b_pref[0], n[0]));

    for c in 1..d - 1 {
        let l_prev = &ls[c - 1];
        let b_prev = &b_pref[c - 1];
        let outer = l_prev.nrows();
        let s_c = b_pref[c].ncols();
        let k_c = c_pref[c].ncols();

        let b_here = reshape(&b_pref[c], outer, n[c] * s_c);
        let u_lead = l_prev.transpose() * &b_here;
        let z_lead = b_prev.transpose() * &b_here;
        let mismatch = fro(&(&b_here - l_prev * &u_lead - b_prev * &z_lead));
        if mismatch > CHANNEL_TOL * fro(&b_here).max(1.0) {
            return Err(Error::DegenerateChannels {
                core: c,
                residual: mismatch,
            });
        }
        us.push(Core::from_leading(&u_lead, n[c]));
        zs.push(Core::from_leading(&z_lead, n[c]));

        let c_here = reshape(&c_pref[c], outer, n[c] * k_c);
        xs.push(Core::from_leading(&(l_prev.transpose() * &c_here), n[c]));

        let carried = &rows[c - 1];
        let s_prev = carried.nrows();
        let tail = carried.ncols() / n[c];
        let v_trail = reshape(carried, s_prev * n[c], tail) * &r_pinv[c];
        vs.push(Core::from_trailing(&v_trail, n[c]));
    }

    let last = d - 1;
    let xm = x.unfold(last)?;
    xs.push(Core::from_leading(&(ls[last - 1].transpose() * &xm), n[last]));
    vs.push(Core::from_leading(&rows[last - 1], n[last]));

    TangentConeVector::new(base.clone(), slack.to_vec(), xs, us, vs, zs)
}

/// Largest channel widths a generic cone vector can realize, given that
/// `U_i`/`Z_i` live in a `(k_{i-1} + s~_{i-1}) n_i - k_i` dimensional space
/// and `Z_{i+1}`/`V_{i+1}` rows in an `n_{i+1} (k_{i+1} + s~_{i+1}) - k_i`
/// dimensional one.
pub fn attainable_slack(dims: &[usize], ranks: &[usize], slack: &[usize]) -> Vec<usize> {
    let d = dims.len();
    let k = |i: usize| if i == 0 || i == d { 1 } else { ranks[i - 1] };
    let mut cap: Vec<usize> = std::iter::once(0)
        .chain(slack.iter().copied())
        .chain(std::iter::once(0))
        .collect();
    loop {
        let mut changed = false;
        for i in 1..d {
            let from_left = ((k(i - 1) + cap[i - 1]) * dims[i - 1]).saturating_sub(k(i));
            let from_right = (dims[i] * (k(i + 1) + cap[i + 1])).saturating_sub(k(i));
            let c = cap[i].min(from_left).min(from_right);
            if c != cap[i] {
                cap[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    cap[1..d].to_vec()
}

/// Gaussian blocks projected onto the constraint set, then scaled so that the
/// represented tensor has unit norm. Channel widths are
/// [`attainable_slack`] of the requested slack.
pub fn random_cone_vector(base: &TTTensor, slack: &[usize], seed: u64) -> Result<TangentConeVector> {
    let v = random_blocks(base, slack, seed)?;
    let norm = tc_evaluate(&v).norm();
    Ok(if norm > 0.0 { v.scaled(1.0 / norm) } else { v })
}

/// Gaussian blocks with the constraints enforced, without normalization.
pub fn random_blocks(base: &TTTensor, slack: &[usize], seed: u64) -> Result<TangentConeVector> {
    check_slack(base, slack)?;
    if base.order() < 2 {
        return Err(Error::InvalidArgument("base must have order at least 2".into()));
    }
    base.check_left_orthogonal(Tolerance::default().orthogonality)?;
    let d = base.order();
    let n = base.dims();
    let k = bonds(base);
    let mut s = vec![0];
    s.extend(attainable_slack(&n, &base.ranks(), slack));
    s.push(0);

    let mut g = Gaussian::with_stream(seed, crate::random::stream::CONE);
    let a = base.cores();
    let rs = base.right_interfaces();

    let mut xs: Vec<Core> = (0..d).map(|c| g.core(k[c], n[c], k[c + 1])).collect();
    let mut us: Vec<Core> = (0..d - 1).map(|c| g.core(k[c], n[c], s[c + 1])).collect();
    let mut vs: Vec<Core> = (1..d).map(|c| g.core(s[c], n[c], k[c + 1])).collect();
    let zs: Vec<Core> = (1..d - 1).map(|c| g.core(s[c], n[c], s[c + 1])).collect();

    for c in 0..d - 1 {
        let ar = a[c].unfold_trailing();
        for block in [&mut xs[c], &mut us[c]] {
            let m = block.unfold_trailing();
            let projected = &m - &ar * (ar.transpose() * &m);
            *block = Core::from_trailing(&projected, n[c]);
        }
    }

    for c in 1..d {
        // V_c^L (I_n (x) G) (A_c^L)^T = 0 with G = R_{c+1} R_{c+1}^T
        let gram = if c + 1 < d {
            &rs[c] * rs[c].transpose()
        } else {
            DMatrix::from_element(1, 1, 1.0)
        };
        let kc = k[c + 1];
        let a_lead = a[c].unfold_leading();
        let mut m = DMatrix::zeros(n[c] * kc, k[c]);
        for row in 0..k[c] {
            let slab = reshape(&a_lead.rows(row, 1).into_owned(), n[c], kc) * &gram;
            let flat = reshape(&slab, n[c] * kc, 1);
            m.set_column(row, &flat.column(0));
        }
        let pm = projector_onto_range(&m, Tolerance::default().rank);
        let vl = vs[c - 1].unfold_leading();
        let projected = &vl - &vl * pm;
        vs[c - 1] = Core::from_leading(&projected, n[c]);
    }

    TangentConeVector::new(base.clone(), slack.to_vec(), xs, us, vs, zs)
}
