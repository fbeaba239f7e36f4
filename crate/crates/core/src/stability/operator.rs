//! The second-moment operator and exact mean-square-stability tests.
//!
//! For `x(t+1) = (A + Σ δ_i b_i c_iᵀ) x(t)` with independent zero-mean
//! `δ_i` of variance `σ_i²`, the quadratic form `E[x(t+1)ᵀ P x(t+1)]` equals
//! `E[x(t)ᵀ T(P) x(t)]` with
//!
//! ```text
//! T(P) = AᵀPA + Σ σ_i² (b_iᵀ P b_i) c_i c_iᵀ
//! ```
//!
//! The system is mean-square stable iff `ρ(T) < 1`. Because every noise
//! term is rank one, the same verdict follows from the `k×k` loop-gain matrix
//! `G_ij = σ_i² b_iᵀ P^{(j)} b_i` built from the single-link Gramians: for
//! stable `A`, `ρ(T) < 1` iff `ρ(G) < 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix};
use crate::network::{AssembledNetwork, LinkId};
use crate::sensitivity;

/// Largest state dimension for which `ρ(T)` is taken from the dense
/// `n²×n²` matrix; above it power iteration is used.
pub const DENSE_OPERATOR_MAX_DIM: usize = 30;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITERATIONS: usize = 10_000;

/// Standard deviations for each uncertain link, in network link order.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaAssignment {
    values: Vec<f64>,
}

impl SigmaAssignment {
    pub fn new(net: &AssembledNetwork, values: Vec<f64>) -> Result<Self> {
        if values.len() != net.links().len() {
            return Err(Error::Dimension(format!(
                "{} sigma values for {} uncertain links",
                values.len(),
                net.links().len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("sigma {bad} must be finite and >= 0")));
        }
        Ok(SigmaAssignment { values })
    }

    /// The network's own per-link sigmas.
    pub fn from_network(net: &AssembledNetwork) -> Self {
        SigmaAssignment { values: net.sigmas() }
    }

    pub fn zeros(net: &AssembledNetwork) -> Self {
        SigmaAssignment { values: vec![0.0; net.links().len()] }
    }

    /// Keys must be exactly the network's link ids.
    pub fn from_pairs(net: &AssembledNetwork, pairs: &[(LinkId, f64)]) -> Result<Self> {
        if pairs.len() != net.links().len() {
            return Err(Error::Dimension(format!(
                "{} sigma entries for {} links",
                pairs.len(),
                net.links().len()
            )));
        }
        let values = net
            .links()
            .iter()
            .map(|d| {
                pairs
                    .iter()
                    .find(|(id, _)| id == &d.id)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::UnknownLink(d.id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(net, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_sigmas(net: &AssembledNetwork, sigmas: &SigmaAssignment) -> Result<()> {
    if sigmas.values.len() != net.links().len() {
        return Err(Error::Dimension(format!(
            "{} sigma values for {} uncertain links",
            sigmas.values.len(),
            net.links().len()
        )));
    }
    Ok(())
}

/// `T(P) = AᵀPA + Σ σ² (bᵀPb) c cᵀ`.
pub fn apply_operator(net: &AssembledNetwork, sigmas: &SigmaAssignment, p: &DMatrix<f64>) -> DMatrix<f64> {
    let a = net.state_map().as_matrix();
    let mut out = a.transpose() * p * a;
    for (d, s) in net.links().iter().zip(&sigmas.values) {
        if *s == 0.0 {
            continue;
        }
        let gain = (d.b.transpose() * p * &d.b)[(0, 0)];
        out += (&d.c * d.c.transpose()) * (s * s * gain);
    }
    out
}

/// Adjoint of `T`: `Σ ↦ AΣAᵀ + Σ σ² (cᵀΣc) b bᵀ`, the covariance update.
pub fn apply_adjoint(net: &AssembledNetwork, sigmas: &SigmaAssignment, cov: &DMatrix<f64>) -> DMatrix<f64> {
    let a = net.state_map().as_matrix();
    let mut out = a * cov * a.transpose();
    for (d, s) in net.links().iter().zip(&sigmas.values) {
        if *s == 0.0 {
            continue;
        }
        let gain = (d.c.transpose() * cov * &d.c)[(0, 0)];
        out += (&d.b * d.b.transpose()) * (s * s * gain);
    }
    out
}

/// `n²×n²` matrix of `T` acting on column-major `vec(P)`.
pub fn operator_matrix(net: &AssembledNetwork, sigmas: &SigmaAssignment) -> Result<DMatrix<f64>> {
    check_sigmas(net, sigmas)?;
    let at = net.state_map().as_matrix().transpose();
    let mut k = at.kronecker(&at);
    for (d, s) in net.links().iter().zip(&sigmas.values) {
        if *s == 0.0 {
            continue;
        }
        let cc = &d.c * d.c.transpose();
        let bb = &d.b * d.b.transpose();
        let vcc = DVector::from_column_slice(cc.as_slice());
        let vbb = DVector::from_column_slice(bb.as_slice());
        k += (vcc * vbb.transpose()) * (s * s);
    }
    Ok(k)
}

/// Spectral radius of the second-moment operator; mean-square stable iff
/// the result is below 1.
pub fn mss_spectral_radius(net: &AssembledNetwork, sigmas: &SigmaAssignment) -> Result<f64> {
    if net.dim() <= DENSE_OPERATOR_MAX_DIM {
        mss_spectral_radius_dense(net, sigmas)
    } else {
        mss_spectral_radius_power(net, sigmas)
    }
}

/// `ρ(T)` from the eigenvalues of the dense operator matrix.
pub fn mss_spectral_radius_dense(net: &AssembledNetwork, sigmas: &SigmaAssignment) -> Result<f64> {
    let k = operator_matrix(net, sigmas)?;
    Ok(matrix::eigenvalues_of(&k)?.radius)
}

/// `ρ(T)` by power iteration on the cone of PSD matrices, starting from the
/// identity. The iteration runs on `T + cI` with `c = ρ(A)²` so that other
/// eigenvalues on the spectral circle (rotations of `A`) cannot stall it.
pub fn mss_spectral_radius_power(net: &AssembledNetwork, sigmas: &SigmaAssignment) -> Result<f64> {
    check_sigmas(net, sigmas)?;
    let n = net.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let shift = matrix::spectral_radius(net.state_map())?.powi(2);
    let mut p = DMatrix::identity(n, n) / (n as f64).sqrt();
    let mut previous = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        let next = apply_operator(net, sigmas, &p) + &p * shift;
        let norm = next.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let estimate = norm;
        p = next / norm;
        if (estimate - previous).abs() <= POWER_TOLERANCE * estimate {
            return Ok((estimate - shift).max(0.0));
        }
        previous = estimate;
    }
    Err(Error::NotConverged { iterations: POWER_MAX_ITERATIONS })
}

/// `G_ij = b_iᵀ P^{(j)} b_i` from the single-link Gramians, ready to be scaled
/// by `σ_i²`.
#[derive(Clone, Debug)]
pub struct LoopGain {
    gains: DMatrix<f64>,
}

impl LoopGain {
    /// Requires a stable nominal map.
    pub fn new(net: &AssembledNetwork) -> Result<Self> {
        let set = sensitivity::gramians(net)?;
        let k = net.links().len();
        let mut gains = DMatrix::zeros(k, k);
        for (i, di) in net.links().iter().enumerate() {
            for (j, (_, pj)) in set.per_link.iter().enumerate() {
                gains[(i, j)] = (di.b.transpose() * pj.as_matrix() * &di.b)[(0, 0)];
            }
        }
        Ok(LoopGain { gains })
    }

    pub fn gains(&self) -> &DMatrix<f64> {
        &self.gains
    }

    /// Spectral radius of `diag(σ²) G`.
    pub fn radius(&self, sigmas: &[f64]) -> f64 {
        let mut scaled = self.gains.clone();
        for (i, s) in sigmas.iter().enumerate() {
            scaled.row_mut(i).scale_mut(s * s);
        }
        matrix::eigenvalues_of(&scaled).map(|s| s.radius).unwrap_or(f64::INFINITY)
    }

    /// Exact mean-square-stability verdict.
    pub fn is_mss(&self, sigmas: &[f64]) -> bool {
        self.radius(sigmas) < 1.0
    }

    /// Largest `r` with `r·direction` mean-square stable, in closed form
    /// (the loop gain is homogeneous of degree two in `r`).
    pub fn boundary_radius(&self, direction: &[f64]) -> f64 {
        let rho = self.radius(direction);
        if rho > 0.0 {
            rho.powf(-0.5)
        } else {
            f64::INFINITY
        }
    }
}

/// Exact second-moment trajectory `Σ_{t+1} = AΣ_tAᵀ + Σ σ² (cᵀΣ_tc) b bᵀ`.
/// Returns `steps + 1` matrices starting with `Σ₀`.
pub fn propagate_second_moment(
    net: &AssembledNetwork,
    sigmas: &SigmaAssignment,
    initial: &DenseMatrix,
    steps: usize,
) -> Result<Vec<DenseMatrix>> {
    check_sigmas(net, sigmas)?;
    if steps == 0 {
        return Err(Error::Validation("second-moment propagation needs at least one step".into()));
    }
    if initial.shape() != (net.dim(), net.dim()) {
        return Err(Error::Dimension(format!(
            "initial covariance is {}x{}, state dimension {}",
            initial.nrows(),
            initial.ncols(),
            net.dim()
        )));
    }
    let scale = initial.frobenius_norm().max(1.0);
    if initial.asymmetry() > 1e-12 * scale || matrix::min_symmetric_eigenvalue(initial) < -1e-12 * scale {
        return Err(Error::Validation("initial covariance must be symmetric positive semidefinite".into()));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    let mut cov = initial.as_matrix().clone();
    for _ in 0..steps {
        cov = matrix::symmetrized(&apply_adjoint(net, sigmas, &cov));
        out.push(DenseMatrix::new(cov.clone())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{network_from_directions, Direction};
    use approx::assert_abs_diff_eq;

    fn scalar_net(a: f64, b: f64, c: f64, sigma: f64) -> AssembledNetwork {
        network_from_directions(
            DenseMatrix::from_row_slice(1, 1, &[a]).unwrap(),
            vec![Direction::new("L1", vec![b], vec![c], sigma)],
        )
        .unwrap()
    }

    #[test]
    fn zero_sigma_gives_squared_radius() {
        let a = DenseMatrix::from_row_slice(2, 2, &[0.5, 0.3, -0.2, 0.4]).unwrap();
        let net = network_from_directions(a.clone(), vec![Direction::new("L", vec![1.0, 0.0], vec![0.0, 1.0], 0.3)]).unwrap();
        let zero = SigmaAssignment::zeros(&net);
        let expected = matrix::spectral_radius(&a).unwrap().powi(2);
        assert_abs_diff_eq!(mss_spectral_radius(&net, &zero).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(mss_spectral_radius_power(&net, &zero).unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn scalar_closed_form() {
        for &(a, b, c, s) in &[(0.5, 1.0, 1.0, 0.3), (-0.9, 2.0, 0.5, 1.1), (0.0, 1.0, 3.0, 0.2)] {
            let net = scalar_net(a, b, c, s);
            let sig = SigmaAssignment::from_network(&net);
            let expected = a * a + s * s * b * b * c * c;
            assert_abs_diff_eq!(mss_spectral_radius(&net, &sig).unwrap(), expected, epsilon = 1e-14);
            assert_abs_diff_eq!(mss_spectral_radius_power(&net, &sig).unwrap(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn loop_gain_boundary_matches_scalar_formula() {
        let net = scalar_net(0.6, 2.0, 0.5, 1.0);
        let lg = LoopGain::new(&net).unwrap();
        // a^2 + r^2 b^2 c^2 = 1
        assert_abs_diff_eq!(lg.boundary_radius(&[1.0]), (1.0f64 - 0.36).sqrt(), epsilon = 1e-14);
        assert!(lg.is_mss(&[0.79]));
        assert!(!lg.is_mss(&[0.81]));
    }

    #[test]
    fn rotation_does_not_stall_power_iteration() {
        let (c, s) = (0.8 * 0.6f64.cos(), 0.8 * 0.6f64.sin());
        let a = DenseMatrix::from_row_slice(2, 2, &[c, -s, s, c]).unwrap();
        let net = network_from_directions(a, vec![Direction::new("L", vec![1.0, 0.0], vec![1.0, 1.0], 0.0)]).unwrap();
        let sig = SigmaAssignment::from_network(&net);
        assert_abs_diff_eq!(mss_spectral_radius_power(&net, &sig).unwrap(), 0.64, epsilon = 1e-8);
    }

    #[test]
    fn deterministic_decay_of_second_moment() {
        let net = scalar_net(0.5, 1.0, 1.0, 0.0);
        let traj = propagate_second_moment(&net, &SigmaAssignment::zeros(&net), &DenseMatrix::identity(1), 5).unwrap();
        assert_eq!(traj.len(), 6);
        for (t, cov) in traj.iter().enumerate() {
            assert_abs_diff_eq!(cov[(0, 0)], 0.25f64.powi(t as i32), epsilon = 1e-15);
        }
    }

    #[test]
    fn scalar_trace_ratio() {
        let net = scalar_net(0.7, 1.5, -0.4, 0.9);
        let sig = SigmaAssignment::from_network(&net);
        let traj = propagate_second_moment(&net, &sig, &DenseMatrix::identity(1), 4).unwrap();
        let expected = 0.49 + 0.81 * 2.25 * 0.16;
        for w in traj.windows(2) {
            assert_abs_diff_eq!(w[1].trace() / w[0].trace(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn propagation_rejects_bad_covariance() {
        let net = scalar_net(0.5, 1.0, 1.0, 0.1);
        let sig = SigmaAssignment::from_network(&net);
        let neg = DenseMatrix::from_row_slice(1, 1, &[-1.0]).unwrap();
        assert!(propagate_second_moment(&net, &sig, &neg, 3).is_err());
        assert!(propagate_second_moment(&net, &sig, &DenseMatrix::identity(1), 0).is_err());
        assert!(propagate_second_moment(&net, &sig, &DenseMatrix::identity(2), 1).is_err());
    }

    #[test]
    fn sigma_assignment_validation() {
        let net = scalar_net(0.5, 1.0, 1.0, 0.1);
        assert!(SigmaAssignment::new(&net, vec![0.1, 0.2]).is_err());
        assert!(SigmaAssignment::new(&net, vec![-0.1]).is_err());
        assert!(SigmaAssignment::new(&net, vec![f64::NAN]).is_err());
        assert!(SigmaAssignment::from_pairs(&net, &[(LinkId::new("L2"), 0.1)]).is_err());
        let s = SigmaAssignment::from_pairs(&net, &[(LinkId::new("L1"), 0.3)]).unwrap();
        assert_eq!(s.values(), &[0.3]);
    }
}
