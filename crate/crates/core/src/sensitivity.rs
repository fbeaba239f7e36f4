//! Gramian-based link sensitivities.
//!
//! For the uncertain-link set with output rows `C_kℓ`, the joint Gramian `P`
//! solves `AᵀPA − P = −Σ C_kℓᵀC_kℓ` and each single-link Gramian `P^{kℓ}`
//! solves the same equation with only its own row. From these:
//!
//! * `F_kℓ = (B̄_kᵀ P B̄_k · ‖C_kℓ‖²)^{-1/2}` measures how much variance a link
//!   tolerates when all links are uncertain at once;
//! * `S_kℓ = (B̄_kᵀ P^{kℓ} B̄_k)^{-1/2}` is the same quantity when the link is
//!   uncertain alone;
//! * `I = 1 − FᵀS / (‖F‖ ‖S‖)` measures how much the links interact.
//!
//! Smaller values mean more critical links.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix};
use crate::network::{AssembledNetwork, LinkId};

/// Joint and per-link observability Gramians.
#[derive(Clone, Debug)]
pub struct GramianSet {
    pub joint: DenseMatrix,
    /// In network link order.
    pub per_link: Vec<(LinkId, DenseMatrix)>,
}

impl GramianSet {
    pub fn get(&self, id: &LinkId) -> Option<&DenseMatrix> {
        self.per_link.iter().find(|(l, _)| l == id).map(|(_, p)| p)
    }
}

/// A value per link, in network link order.
pub type LinkValues = Vec<(LinkId, f64)>;

fn values(v: &LinkValues) -> Vec<f64> {
    v.iter().map(|(_, x)| *x).collect()
}

/// Solves `AᵀPA − P = −Σ C_kℓᵀC_kℓ` over every uncertain link.
pub fn joint_gramian(net: &AssembledNetwork) -> Result<DenseMatrix> {
    if net.links().is_empty() {
        return Err(Error::Validation("sensitivity analysis needs at least one uncertain link".into()));
    }
    let mut q = nalgebra::DMatrix::zeros(net.dim(), net.dim());
    for d in net.links() {
        q += &d.c * d.c.transpose();
    }
    matrix::solve_discrete_lyapunov(net.state_map(), &DenseMatrix::new(q)?)
}

/// Solves `AᵀP^{kℓ}A − P^{kℓ} = −C_kℓᵀC_kℓ` for one link.
pub fn single_link_gramian(net: &AssembledNetwork, link: &LinkId) -> Result<DenseMatrix> {
    let d = net.link(link)?;
    let q = DenseMatrix::new(&d.c * d.c.transpose())?;
    matrix::solve_discrete_lyapunov(net.state_map(), &q)
}

/// Joint Gramian plus every single-link Gramian. The per-link solves run in
/// parallel; the result does not depend on the thread count.
pub fn gramians(net: &AssembledNetwork) -> Result<GramianSet> {
    let joint = joint_gramian(net)?;
    let per_link = net
        .links()
        .par_iter()
        .map(|d| single_link_gramian(net, &d.id).map(|p| (d.id.clone(), p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GramianSet { joint, per_link })
}

fn inverse_sqrt(id: &LinkId, value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::DegenerateLink {
            link: id.to_string(),
            reason: format!("Gramian gain {value:e} is not positive; the injection direction is invisible at the outputs"),
        });
    }
    Ok(value.powf(-0.5))
}

fn quadratic_form(p: &DenseMatrix, b: &nalgebra::DVector<f64>) -> f64 {
    (b.transpose() * p.as_matrix() * b)[(0, 0)]
}

/// `F_kℓ = (B̄_kᵀ P B̄_k · ‖C_kℓ‖²)^{-1/2}` with the joint Gramian `P`.
pub fn f_indices(net: &AssembledNetwork, joint: &DenseMatrix) -> Result<LinkValues> {
    if joint.nrows() != net.dim() || !joint.is_square() {
        return Err(Error::Dimension("joint Gramian does not match the network".into()));
    }
    net.links()
        .iter()
        .map(|d| {
            let gain = quadratic_form(joint, &d.b) * d.c.norm_squared();
            Ok((d.id.clone(), inverse_sqrt(&d.id, gain)?))
        })
        .collect()
}

/// `S_kℓ = (B̄_kᵀ P^{kℓ} B̄_k)^{-1/2}` with the single-link Gramians.
pub fn s_indices(net: &AssembledNetwork) -> Result<LinkValues> {
    let set = gramians(net)?;
    s_indices_from(net, &set)
}

pub fn s_indices_from(net: &AssembledNetwork, set: &GramianSet) -> Result<LinkValues> {
    net.links()
        .iter()
        .map(|d| {
            let p = set.get(&d.id).ok_or_else(|| Error::UnknownLink(d.id.to_string()))?;
            Ok((d.id.clone(), inverse_sqrt(&d.id, quadratic_form(p, &d.b))?))
        })
        .collect()
}

/// `I = 1 − FᵀS / (‖F‖ ‖S‖)`, clamped to `[0, 1]` against round-off.
pub fn interaction_index(f: &[f64], s: &[f64]) -> Result<f64> {
    if f.is_empty() || s.is_empty() {
        return Err(Error::Validation("interaction index of empty vectors".into()));
    }
    if f.len() != s.len() {
        return Err(Error::Dimension(format!("F has {} entries, S has {}", f.len(), s.len())));
    }
    if f.iter().chain(s).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Validation("interaction index needs finite nonnegative entries".into()));
    }
    let dot: f64 = f.iter().zip(s).map(|(a, b)| a * b).sum();
    let nf = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ns = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nf == 0.0 || ns == 0.0 {
        return Err(Error::Validation("interaction index of a zero vector".into()));
    }
    Ok((1.0 - dot / (nf * ns)).clamp(0.0, 1.0))
}

/// Links sorted by ascending value (most critical first); ties keep id order.
pub fn rank_contingencies(values: &LinkValues) -> Vec<LinkId> {
    let mut sorted: Vec<&(LinkId, f64)> = values.iter().collect();
    sorted.sort_by(|(ia, a), (ib, b)| a.total_cmp(b).then_with(|| ia.cmp(ib)));
    sorted.into_iter().map(|(id, _)| id.clone()).collect()
}

/// Divides every entry by the maximum so the most tolerant link reads 1.
pub fn normalize_to_max(values: &LinkValues) -> LinkValues {
    let max = values.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    values
        .iter()
        .map(|(id, v)| (id.clone(), if max > 0.0 { v / max } else { *v }))
        .collect()
}

/// Everything the contingency analysis reports for one network.
#[derive(Clone, Debug)]
pub struct SensitivityReport {
    pub f: LinkValues,
    pub s: LinkValues,
    pub interaction: f64,
    /// Ascending `F` (most critical first).
    pub ranking: Vec<LinkId>,
    /// Ascending `S`, for comparison with the single-link view.
    pub s_ranking: Vec<LinkId>,
    pub normalized_f: LinkValues,
    pub normalized_s: LinkValues,
}

impl SensitivityReport {
    /// Whether the joint and single-link views order the links identically.
    pub fn orderings_agree(&self) -> bool {
        self.ranking == self.s_ranking
    }

    /// 1-based position of a link in [`ranking`](Self::ranking).
    pub fn rank_of(&self, id: &LinkId) -> Option<usize> {
        self.ranking.iter().position(|l| l == id).map(|i| i + 1)
    }
}

/// Computes `F`, `S`, `I` and the criticality ranking.
pub fn analyze(net: &AssembledNetwork) -> Result<SensitivityReport> {
    let set = gramians(net)?;
    let f = f_indices(net, &set.joint)?;
    let s = s_indices_from(net, &set)?;
    let interaction = interaction_index(&values(&f), &values(&s))?;
    Ok(SensitivityReport {
        ranking: rank_contingencies(&f),
        s_ranking: rank_contingencies(&s),
        normalized_f: normalize_to_max(&f),
        normalized_s: normalize_to_max(&s),
        f,
        s,
        interaction,
    })
}
