//! Interconnected linear networks with uncertain links.
//!
//! Each node `k` is a single-input single-output subsystem
//! `x_k(t+1) = A_k x_k(t) + B_k u_k(t)`, `y_k = C_k x_k`. A coupling `(k, ℓ)`
//! feeds `μ (a y_k + b y_ℓ)` into `u_k`. Stacking the node states gives the
//! compact model
//!
//! ```text
//! x(t+1) = A x(t) + Σ δ_kℓ(t) B̄_k C_kℓ x(t)
//! ```
//!
//! with `A = blockdiag(A_k) + Σ μ_kℓ B̄_k C_kℓ`. Node indices are 1-based.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix, STABILITY_MARGIN};

/// Name of an uncertain link, e.g. `"37-25"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub String);

impl LinkId {
    pub fn new(id: impl Into<String>) -> Self {
        LinkId(id.into())
    }

    /// `"k-ℓ"` for a node pair.
    pub fn pair(k: usize, l: usize) -> Self {
        LinkId(format!("{k}-{l}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LinkId {
    fn from(s: &str) -> Self {
        LinkId(s.to_string())
    }
}

/// One node of the network.
#[derive(Clone, Debug)]
pub struct Subsystem {
    a: DenseMatrix,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl Subsystem {
    /// `a` is the `n×n` state map, `b` the input column, `c` the output row.
    pub fn new(a: DenseMatrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.len() != n || c.len() != n {
            return Err(Error::Dimension(format!(
                "subsystem with {}x{} state map, input length {}, output length {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        let b = finite_vector(b, "subsystem input")?;
        let c = finite_vector(c, "subsystem output")?;
        if b.iter().all(|v| *v == 0.0) || c.iter().all(|v| *v == 0.0) {
            return Err(Error::Validation("subsystem input and output vectors must be nonzero".into()));
        }
        Ok(Subsystem { a, b, c })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn state_map(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn input(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn output(&self) -> &DVector<f64> {
        &self.c
    }
}

/// Coupling `(from = k, to = ℓ)` contributing `μ (a y_k + b y_ℓ)` to `u_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingLink {
    pub from: usize,
    pub to: usize,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

/// Marks the coupling `(from, to)` as uncertain with standard deviation `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertainLink {
    pub from: usize,
    pub to: usize,
    pub sigma: f64,
}

/// A rank-one uncertainty direction `δ B̄ C` of the compact model.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub id: LinkId,
    /// Injection column `B̄`.
    pub b: DVector<f64>,
    /// Output row `C`, stored as a column vector.
    pub c: DVector<f64>,
    pub sigma: f64,
}

impl Direction {
    pub fn new(id: impl Into<LinkId>, b: Vec<f64>, c: Vec<f64>, sigma: f64) -> Self {
        Direction { id: id.into(), b: DVector::from_vec(b), c: DVector::from_vec(c), sigma }
    }
}

impl From<String> for LinkId {
    fn from(s: String) -> Self {
        LinkId(s)
    }
}

/// The compact model: nominal map `A` plus uncertain directions.
#[derive(Clone, Debug)]
pub struct AssembledNetwork {
    a: DenseMatrix,
    links: Vec<Direction>,
}

impl AssembledNetwork {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn state_map(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn links(&self) -> &[Direction] {
        &self.links
    }

    pub fn link(&self, id: &LinkId) -> Result<&Direction> {
        self.links
            .iter()
            .find(|d| &d.id == id)
            .ok_or_else(|| Error::UnknownLink(id.to_string()))
    }

    pub fn link_ids(&self) -> Vec<LinkId> {
        self.links.iter().map(|d| d.id.clone()).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.links.iter().map(|d| d.sigma).collect()
    }

    /// Same network with every link standard deviation replaced.
    pub fn with_sigmas(&self, sigmas: &[f64]) -> Result<AssembledNetwork> {
        if sigmas.len() != self.links.len() {
            return Err(Error::Dimension(format!(
                "{} sigmas for {} links",
                sigmas.len(),
                self.links.len()
            )));
        }
        let links = self
            .links
            .iter()
            .zip(sigmas)
            .map(|(d, &sigma)| Direction { sigma, ..d.clone() })
            .collect();
        network_from_directions(self.a.clone(), links)
    }
}

fn finite_vector(v: Vec<f64>, what: &str) -> Result<DVector<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("{what} has non-finite entries")));
    }
    Ok(DVector::from_vec(v))
}

fn check_index(k: usize, m: usize) -> Result<usize> {
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange { index: k, max: m });
    }
    Ok(k - 1)
}

fn common_state_dim(subsystems: &[Subsystem]) -> Result<usize> {
    let n = subsystems.first().map_or(0, Subsystem::state_dim);
    if subsystems.iter().any(|s| s.state_dim() != n) {
        return Err(Error::Dimension("subsystems have different state dimensions".into()));
    }
    Ok(n)
}

/// Output row `C_kℓ`: `a·C_k` in block `k`, `b·C_ℓ` in block `ℓ`, zero elsewhere.
pub fn build_link_row(k: usize, l: usize, a: f64, b: f64, subsystems: &[Subsystem]) -> Result<DVector<f64>> {
    let m = subsystems.len();
    let ki = check_index(k, m)?;
    let li = check_index(l, m)?;
    if ki == li {
        return Err(Error::SelfLink(k));
    }
    let n = common_state_dim(subsystems)?;
    let mut row = DVector::zeros(m * n);
    row.rows_mut(ki * n, n).copy_from(&(subsystems[ki].output() * a));
    row.rows_mut(li * n, n).copy_from(&(subsystems[li].output() * b));
    Ok(row)
}

/// Injection column `B̄_k`: `B_k` in block `k`, zero elsewhere.
pub fn build_injection_column(k: usize, subsystems: &[Subsystem]) -> Result<DVector<f64>> {
    let m = subsystems.len();
    let ki = check_index(k, m)?;
    let n = common_state_dim(subsystems)?;
    let mut col = DVector::zeros(m * n);
    col.rows_mut(ki * n, n).copy_from(subsystems[ki].input());
    Ok(col)
}

/// Builds `A = blockdiag(A_k) + Σ μ B̄_k C_kℓ` and one direction per
/// uncertain link (ids `"k-ℓ"`).
pub fn assemble_network(
    subsystems: &[Subsystem],
    couplings: &[CouplingLink],
    uncertain: &[UncertainLink],
) -> Result<AssembledNetwork> {
    if subsystems.is_empty() {
        return Err(Error::Validation("network has no subsystems".into()));
    }
    let n = common_state_dim(subsystems)?;
    let m = subsystems.len();
    let mut a = DMatrix::zeros(m * n, m * n);
    for (k, s) in subsystems.iter().enumerate() {
        a.view_mut((k * n, k * n), (n, n)).copy_from(s.state_map().as_matrix());
    }
    for (i, c) in couplings.iter().enumerate() {
        if couplings[..i].iter().any(|o| o.from == c.from && o.to == c.to) {
            return Err(Error::Validation(format!("duplicate coupling ({}, {})", c.from, c.to)));
        }
        if !(c.mu.is_finite() && c.a.is_finite() && c.b.is_finite()) {
            return Err(Error::Validation(format!("coupling ({}, {}) has non-finite gains", c.from, c.to)));
        }
        let row = build_link_row(c.from, c.to, c.a, c.b, subsystems)?;
        let col = build_injection_column(c.from, subsystems)?;
        a += (&col * row.transpose()) * c.mu;
    }

    let mut links = Vec::with_capacity(uncertain.len());
    for u in uncertain {
        let c = couplings
            .iter()
            .find(|c| c.from == u.from && c.to == u.to)
            .ok_or_else(|| Error::DanglingLink(LinkId::pair(u.from, u.to).to_string()))?;
        links.push(Direction {
            id: LinkId::pair(u.from, u.to),
            b: build_injection_column(u.from, subsystems)?,
            c: build_link_row(u.from, u.to, c.a, c.b, subsystems)?,
            sigma: u.sigma,
        });
    }
    network_from_directions(DenseMatrix::new(a)?, links)
}

/// Wraps a system already in compact form.
pub fn network_from_directions(a: DenseMatrix, directions: Vec<Direction>) -> Result<AssembledNetwork> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("state map is {}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    for (i, d) in directions.iter().enumerate() {
        if d.b.len() != n || d.c.len() != n {
            return Err(Error::Dimension(format!(
                "link {}: injection length {}, output length {}, state dimension {n}",
                d.id,
                d.b.len(),
                d.c.len()
            )));
        }
        if d.b.iter().chain(d.c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("link {} has non-finite entries", d.id)));
        }
        if d.b.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateLink { link: d.id.to_string(), reason: "zero injection column".into() });
        }
        if d.c.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateLink { link: d.id.to_string(), reason: "zero output row".into() });
        }
        if !(d.sigma.is_finite() && d.sigma >= 0.0) {
            return Err(Error::Validation(format!("link {}: sigma must be finite and >= 0", d.id)));
        }
        if directions[..i].iter().any(|o| o.id == d.id) {
            return Err(Error::Validation(format!("duplicate link id {}", d.id)));
        }
    }
    Ok(AssembledNetwork { a, links: directions })
}

/// Per-link observability verdict.
#[derive(Clone, Debug)]
pub struct LinkObservability {
    pub id: LinkId,
    pub observable: bool,
    /// Smallest Gramian eigenvalue divided by its trace (or the smallest
    /// normalized singular value of the observability matrix when `A` is not
    /// stable).
    pub margin: f64,
}

/// Result of checking the nominal-stability, lower-bound and observability
/// assumptions.
#[derive(Clone, Debug)]
pub struct AssumptionReport {
    pub radius: f64,
    pub min_singular: f64,
    pub links: Vec<LinkObservability>,
}

impl AssumptionReport {
    pub fn stable(&self) -> bool {
        self.radius < 1.0 - STABILITY_MARGIN
    }

    pub fn lower_bounded(&self) -> bool {
        self.min_singular > 0.0
    }

    pub fn all_observable(&self) -> bool {
        self.links.iter().all(|l| l.observable)
    }

    pub fn all_pass(&self) -> bool {
        self.stable() && self.lower_bounded() && self.all_observable()
    }
}

/// Relative threshold on `λ_min(P) / trace(P)` for observability.
pub const OBSERVABILITY_THRESHOLD: f64 = 1e-10;

/// Checks nominal stability, `σ_min(A) > 0`, and observability of every
/// `(A, C_kℓ)` pair. Never fails on a violated assumption; callers decide.
pub fn check_assumptions(net: &AssembledNetwork) -> Result<AssumptionReport> {
    let a = net.state_map();
    let radius = matrix::spectral_radius(a)?;
    let min_singular = matrix::smallest_singular_value(a);
    let stable = radius < 1.0 - STABILITY_MARGIN;
    let mut links = Vec::with_capacity(net.links().len());
    for d in net.links() {
        let margin = if stable {
            let q = DenseMatrix::new(&d.c * d.c.transpose())?;
            let p = matrix::solve_discrete_lyapunov(a, &q)?;
            let trace = p.trace();
            if trace > 0.0 {
                matrix::min_symmetric_eigenvalue(p.as_matrix()) / trace
            } else {
                0.0
            }
        } else {
            observability_matrix_margin(a.as_matrix(), &d.c)
        };
        links.push(LinkObservability {
            id: d.id.clone(),
            observable: margin > OBSERVABILITY_THRESHOLD,
            margin,
        });
    }
    Ok(AssumptionReport { radius, min_singular, links })
}

fn observability_matrix_margin(a: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    let n = a.nrows();
    let mut obs = DMatrix::zeros(n, n);
    let mut row = c.transpose();
    for i in 0..n {
        let norm = row.norm();
        if norm > 0.0 {
            obs.row_mut(i).copy_from(&(&row / norm));
        }
        row = &row * a;
    }
    let sv = matrix::singular_values(&DenseMatrix::new(obs).expect("finite"));
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}
