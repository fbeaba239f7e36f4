//! Linearized swing dynamics on the Kron-reduced network and the rank-one
//! uncertainty direction of each line.
//!
//! With state `[δ; ω]` over generators,
//!
//! ```text
//! A_c = [[0, I], [−M⁻¹L_red, −M⁻¹D]],   A_d = I + A_c Δt.
//! ```
//!
//! `A_d` always has the eigenvalue 1 for a uniform angle shift, with left
//! eigenvector `w = [D1; M1]`. When `D = κM` the center-of-inertia frequency
//! is a second exact mode, with left eigenvector `[0; M1]`. Line directions
//! never excite or observe either mode, so the network handed to the
//! sensitivity code is the restriction of `A_d` to the common kernel of these
//! vectors: `2g − 2` states for proportional damping, `2g − 1` otherwise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix, STABILITY_MARGIN};
use crate::network::{network_from_directions, AssembledNetwork, Direction, LinkId};

use super::config::DynamicsConfig;
use super::laplacian::{build_laplacian, relabel_reduction_error, LoadElimination, Partition};
use super::matpower::GridCase;

/// Below this norm (relative to `‖e_i − e_j‖`) a line has no effect on the
/// reduced network.
pub const DEGENERATE_DIRECTION: f64 = 1e-10;

/// `[[0, I], [−M⁻¹L_red, −M⁻¹D]]`.
pub fn swing_state_matrix(l_red: &DenseMatrix, inertia: &[f64], damping: &[f64]) -> Result<DenseMatrix> {
    let g = l_red.nrows();
    if !l_red.is_square() || inertia.len() != g || damping.len() != g {
        return Err(Error::Dimension(format!(
            "reduced Laplacian {}x{}, {} inertias, {} dampings",
            l_red.nrows(),
            l_red.ncols(),
            inertia.len(),
            damping.len()
        )));
    }
    if inertia.iter().chain(damping).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Validation("inertia and damping must be positive".into()));
    }
    let mut a = DMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        a[(i, g + i)] = 1.0;
        for j in 0..g {
            a[(g + i, j)] = -l_red[(i, j)] / inertia[i];
        }
        a[(g + i, g + i)] = -damping[i] / inertia[i];
    }
    DenseMatrix::new(a)
}

/// Forward-Euler map `I + A_c Δt`.
pub fn discretize(a_c: &DenseMatrix, delta_t: f64) -> Result<DenseMatrix> {
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::Validation(format!("delta_t must be positive, got {delta_t}")));
    }
    if !a_c.is_square() {
        return Err(Error::Dimension(format!("state matrix is {}x{}", a_c.nrows(), a_c.ncols())));
    }
    DenseMatrix::new(DMatrix::identity(a_c.nrows(), a_c.nrows()) + a_c.as_matrix() * delta_t)
}

/// Laplacian blocks and swing matrices of one case.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub laplacian: DenseMatrix,
    pub partition: Partition,
    pub l_red: DenseMatrix,
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    pub a_c: DenseMatrix,
    /// `2g × 2g`, state `[δ; ω]`.
    pub a_d: DenseMatrix,
    pub delta_t: f64,
    elimination: LoadElimination,
}

impl ReducedModel {
    pub fn new(case: &GridCase, config: &DynamicsConfig) -> Result<Self> {
        let delta_t = config.validated_delta_t()?;
        let partition = Partition::of(case);
        let gen_ids: Vec<usize> = partition.generators.iter().map(|&k| case.buses[k].id).collect();
        let inertia = config.inertia_for(&gen_ids)?;
        let damping = config.damping_for(&gen_ids)?;
        let laplacian = build_laplacian(case)?;
        let l = laplacian.as_matrix();
        let elimination = LoadElimination::new(l, &partition.generators, &partition.loads)
            .map_err(|e| relabel_reduction_error(e, case))?;
        let l_gg = l.select_rows(&partition.generators).select_columns(&partition.generators);
        let l_gl = l.select_rows(&partition.generators).select_columns(&partition.loads);
        let l_red = DenseMatrix::new(matrix::symmetrized(&(l_gg - l_gl * &elimination.gain)))?;
        let a_c = swing_state_matrix(&l_red, &inertia, &damping)?;
        let a_d = discretize(&a_c, delta_t)?;
        Ok(ReducedModel { laplacian, partition, l_red, inertia, damping, a_c, a_d, delta_t, elimination })
    }

    pub fn generator_count(&self) -> usize {
        self.partition.generators.len()
    }

    /// `v = u_g − L_gl L_ll⁻¹ u_l` for `u = e_i − e_j`: the reduced Laplacian
    /// changes by `v vᵀ` per unit of susceptance on line `(i, j)`.
    pub fn line_vector(&self, case: &GridCase, line: (usize, usize)) -> Result<DVector<f64>> {
        let (i, j) = line;
        if case.find_branches(i, j).is_empty() {
            return Err(Error::UnknownLink(format!("{i}-{j} (no such branch in the case)")));
        }
        let n = case.buses.len();
        let mut u = DVector::zeros(n);
        u[case.bus_index(i).expect("branch endpoints exist")] = 1.0;
        u[case.bus_index(j).expect("branch endpoints exist")] = -1.0;
        let u_g = u.select_rows(&self.partition.generators);
        let u_l = u.select_rows(&self.partition.loads);
        let v = if self.partition.loads.is_empty() {
            u_g
        } else {
            u_g - self.elimination.gain.transpose() * u_l
        };
        if v.norm() <= DEGENERATE_DIRECTION * 2f64.sqrt() {
            return Err(Error::DegenerateLink {
                link: LinkId::pair(i, j).0,
                reason: "line does not affect the reduced network".into(),
            });
        }
        Ok(v)
    }

    /// Injection column `Δt [0; −M⁻¹v]` and output row `[vᵀ, 0]` in the full
    /// `2g` state.
    pub fn outage_direction(&self, case: &GridCase, line: (usize, usize)) -> Result<(DVector<f64>, DVector<f64>)> {
        let v = self.line_vector(case, line)?;
        let g = self.generator_count();
        let mut b = DVector::zeros(2 * g);
        let mut c = DVector::zeros(2 * g);
        for k in 0..g {
            b[g + k] = -self.delta_t * v[k] / self.inertia[k];
            c[k] = v[k];
        }
        Ok((b, c))
    }

    /// Left eigenvector `[D1; M1]` of `A_d` for the synchronous mode.
    pub fn synchronous_mode(&self) -> DVector<f64> {
        let g = self.generator_count();
        DVector::from_iterator(2 * g, self.damping.iter().chain(&self.inertia).copied())
    }

    /// Left eigenvectors of `A_d` that no line direction can excite or
    /// observe: the synchronous mode, plus the center-of-inertia frequency
    /// `[0; M1]` when `D = κM` makes it an exact mode.
    pub fn invisible_modes(&self) -> Vec<DVector<f64>> {
        let g = self.generator_count();
        let mut modes = vec![self.synchronous_mode()];
        let kappa = self.damping[0] / self.inertia[0];
        let proportional =
            self.damping.iter().zip(&self.inertia).all(|(d, m)| (d / m - kappa).abs() <= 1e-12 * kappa);
        if proportional {
            modes.push(DVector::from_iterator(2 * g, std::iter::repeat_n(0.0, g).chain(self.inertia.iter().copied())));
        }
        modes
    }

    /// Orthonormal basis of the common kernel of [`Self::invisible_modes`].
    /// The subspace is invariant under `A_d` and contains every line's
    /// injection column, while every output row vanishes on its complement.
    pub fn mode_free_basis(&self) -> DMatrix<f64> {
        orthonormal_complement(&self.invisible_modes())
    }
}

/// Basis of the orthogonal complement of `vectors` (assumed independent),
/// built from successive Householder reflections so that it depends only on
/// the input.
fn orthonormal_complement(vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let n = vectors[0].len();
    let mut basis = DMatrix::identity(n, n);
    for w in vectors {
        // coordinates of w in the current basis
        let local = basis.transpose() * w;
        let m = local.len();
        let unit = local.normalize();
        let mut u = unit.clone();
        u[0] += if unit[0] >= 0.0 { 1.0 } else { -1.0 };
        let h = DMatrix::identity(m, m) - (&u * u.transpose()) * (2.0 / u.norm_squared());
        basis = &basis * h.columns(1, m - 1);
    }
    basis
}

/// The reduced model together with the network it induces.
#[derive(Clone, Debug)]
pub struct GridModel {
    pub reduced: ReducedModel,
    /// Columns span the state space of `network` inside the `2g` state.
    pub basis: DMatrix<f64>,
    pub lines: Vec<(usize, usize)>,
    pub network: AssembledNetwork,
}

impl GridModel {
    /// Builds the network for the configured contingencies (possibly none)
    /// without checking stability, so that callers can report on unstable
    /// settings.
    pub fn build(case: &GridCase, config: &DynamicsConfig) -> Result<Self> {
        let lines = config.lines()?;
        let sigmas = config.sigma_for(&lines)?;
        let reduced = ReducedModel::new(case, config)?;
        let basis = reduced.mode_free_basis();
        let a = DenseMatrix::new(basis.transpose() * reduced.a_d.as_matrix() * &basis)?;
        let mut directions = Vec::with_capacity(lines.len());
        for (&line, sigma) in lines.iter().zip(sigmas) {
            let (b, c) = reduced.outage_direction(case, line)?;
            let b = basis.transpose() * b;
            let c = basis.transpose() * c;
            directions.push(Direction { id: LinkId::pair(line.0, line.1), b, c, sigma });
        }
        let network = network_from_directions(a, directions)?;
        Ok(GridModel { reduced, basis, lines, network })
    }
}

/// Builds the contingency network and requires the discretized model to be
/// stable.
pub fn build_grid_network(case: &GridCase, config: &DynamicsConfig) -> Result<AssembledNetwork> {
    if config.contingencies.is_empty() {
        return Err(Error::Config("no contingency lines given".into()));
    }
    let model = GridModel::build(case, config)?;
    require_stable_swing(&model.network)?;
    Ok(model.network)
}

/// Fails with a tuning hint when the discretized swing map is not stable.
pub fn require_stable_swing(network: &AssembledNetwork) -> Result<()> {
    let radius = matrix::spectral_radius(network.state_map())?;
    if radius >= 1.0 - STABILITY_MARGIN {
        return Err(Error::Config(format!(
            "discretized swing model is not stable (spectral radius {radius}); raise damping or lower delta_t"
        )));
    }
    Ok(())
}
