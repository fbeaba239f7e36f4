//! Susceptance-weighted Laplacian and its Kron reduction onto generators.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

use super::matpower::{BusKind, GridCase};

/// Bus positions (indices into `GridCase::buses`) of each block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub generators: Vec<usize>,
    pub loads: Vec<usize>,
}

impl Partition {
    pub fn of(case: &GridCase) -> Self {
        let (mut generators, mut loads) = (Vec::new(), Vec::new());
        for (k, b) in case.buses.iter().enumerate() {
            match b.kind {
                BusKind::Generator => generators.push(k),
                BusKind::Load => loads.push(k),
            }
        }
        Partition { generators, loads }
    }
}

/// `L = Σ (1/x)(e_i − e_j)(e_i − e_j)ᵀ` over branches, in bus order.
pub fn build_laplacian(case: &GridCase) -> Result<DenseMatrix> {
    let n = case.buses.len();
    let mut l = DMatrix::zeros(n, n);
    for br in &case.branches {
        if !(br.x > 0.0 && br.x.is_finite()) {
            return Err(Error::Validation(format!(
                "branch {}-{} has nonpositive reactance {}",
                br.from, br.to, br.x
            )));
        }
        let i = case.bus_index(br.from).ok_or_else(|| Error::Validation(format!("unknown bus {}", br.from)))?;
        let j = case.bus_index(br.to).ok_or_else(|| Error::Validation(format!("unknown bus {}", br.to)))?;
        let w = 1.0 / br.x;
        l[(i, i)] += w;
        l[(j, j)] += w;
        l[(i, j)] -= w;
        l[(j, i)] -= w;
    }
    DenseMatrix::new(l)
}

/// Elimination of the load block, shared by reduction and outage maps.
#[derive(Clone, Debug)]
pub(crate) struct LoadElimination {
    /// `L_ll⁻¹ L_lg`
    pub(crate) gain: DMatrix<f64>,
}

impl LoadElimination {
    pub(crate) fn new(l: &DMatrix<f64>, gens: &[usize], loads: &[usize]) -> Result<Self> {
        check_partition(l.nrows(), gens, loads)?;
        let l_ll = l.select_rows(loads).select_columns(loads);
        let l_lg = l.select_rows(loads).select_columns(gens);
        if loads.is_empty() {
            return Ok(LoadElimination { gain: l_lg });
        }
        let chol = match Cholesky::new(l_ll.clone()) {
            // pivots below this scale mean the block is singular up to rounding
            Some(c) if c.l().diagonal().iter().all(|d| *d > 1e-7 * l_ll.amax().sqrt()) => c,
            _ => return Err(Error::Reduction(describe_island(&l_ll, &l_lg, loads))),
        };
        let gain = chol.solve(&l_lg);
        Ok(LoadElimination { gain })
    }
}

fn check_partition(n: usize, gens: &[usize], loads: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in gens.iter().chain(loads) {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(Error::Reduction(format!("index {k} repeated or out of range for a {n}-node Laplacian")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Reduction("partition does not cover every node".into()));
    }
    Ok(())
}

/// Finds a connected group of load nodes with no path to a generator.
fn describe_island(l_ll: &DMatrix<f64>, l_lg: &DMatrix<f64>, loads: &[usize]) -> String {
    let m = loads.len();
    let mut component = vec![usize::MAX; m];
    for start in 0..m {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        let mut members = Vec::new();
        component[start] = start;
        while let Some(k) = stack.pop() {
            members.push(k);
            for j in 0..m {
                if j != k && l_ll[(k, j)] != 0.0 && component[j] == usize::MAX {
                    component[j] = start;
                    stack.push(j);
                }
            }
        }
        let anchored = members.iter().any(|&k| l_lg.row(k).iter().any(|v| *v != 0.0));
        if !anchored {
            let mut nodes: Vec<usize> = members.iter().map(|&k| loads[k]).collect();
            nodes.sort_unstable();
            return format!("load nodes {nodes:?} form an island with no generator (singular load block)");
        }
    }
    "load block is numerically singular".into()
}

/// `L_red = L_gg − L_gl L_ll⁻¹ L_lg`, symmetrized.
pub fn kron_reduce(l: &DenseMatrix, gens: &[usize], loads: &[usize]) -> Result<DenseMatrix> {
    if !l.is_square() {
        return Err(Error::Dimension(format!("Laplacian is {}x{}", l.nrows(), l.ncols())));
    }
    let l = l.as_matrix();
    let elim = LoadElimination::new(l, gens, loads)?;
    let l_gg = l.select_rows(gens).select_columns(gens);
    let l_gl = l.select_rows(gens).select_columns(loads);
    let red = l_gg - l_gl * &elim.gain;
    DenseMatrix::new(crate::matrix::symmetrized(&red))
}

/// Names a load island in terms of bus ids.
pub(crate) fn relabel_reduction_error(err: Error, case: &GridCase) -> Error {
    match err {
        Error::Reduction(msg) if msg.starts_with("load nodes") => {
            let ids = msg
                .split(['[', ']'])
                .nth(1)
                .map(|inner| {
                    inner
                        .split(", ")
                        .filter_map(|k| k.parse::<usize>().ok())
                        .map(|k| case.buses[k].id.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .unwrap_or_default();
            Error::Reduction(format!("buses [{ids}] form a load island with no generator"))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::matpower::Branch;
    use approx::assert_abs_diff_eq;

    fn case(ids: &[usize], branches: &[(usize, usize, f64)], gens: &[usize]) -> GridCase {
        let branches = branches.iter().map(|&(from, to, x)| Branch { from, to, x }).collect();
        GridCase::new(ids, branches, gens).unwrap()
    }

    #[test]
    fn two_bus_laplacian() {
        let l = build_laplacian(&case(&[1, 2], &[(1, 2, 0.1)], &[1])).unwrap();
        assert_eq!(l.to_row_major(), vec![10.0, -10.0, -10.0, 10.0]);
    }

    #[test]
    fn parallel_branches_sum_and_components_separate() {
        let c = case(&[1, 2, 3, 4], &[(1, 2, 0.5), (2, 1, 0.5), (3, 4, 1.0)], &[1, 3]);
        let l = build_laplacian(&c).unwrap();
        assert_eq!(l[(0, 1)], -4.0);
        assert_eq!(l[(0, 2)], 0.0);
        assert_eq!(l[(1, 3)], 0.0);
        for i in 0..4 {
            assert_eq!(l.row(i).sum(), 0.0);
        }
    }

    #[test]
    fn path_reduction_is_series_conductance() {
        let c = case(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0)], &[1, 3]);
        let l = build_laplacian(&c).unwrap();
        let p = Partition::of(&c);
        assert_eq!(p.generators, vec![0, 2]);
        let red = kron_reduce(&l, &p.generators, &p.loads).unwrap();
        assert_abs_diff_eq!(red.as_matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]), epsilon = 1e-15);
    }

    #[test]
    fn no_loads_returns_generator_block() {
        let c = case(&[1, 2], &[(1, 2, 0.25)], &[1, 2]);
        let l = build_laplacian(&c).unwrap();
        let red = kron_reduce(&l, &[0, 1], &[]).unwrap();
        assert_eq!(red.as_matrix(), l.as_matrix());
    }

    #[test]
    fn island_is_named() {
        let c = case(&[1, 2, 3, 4], &[(1, 2, 1.0), (3, 4, 1.0)], &[1]);
        let l = build_laplacian(&c).unwrap();
        let p = Partition::of(&c);
        let err = kron_reduce(&l, &p.generators, &p.loads).unwrap_err();
        let err = relabel_reduction_error(err, &c);
        assert!(err.to_string().contains("[3, 4]"), "{err}");
    }

    #[test]
    fn bad_partition_rejected() {
        let l = DenseMatrix::identity(3);
        assert!(kron_reduce(&l, &[0, 1], &[1]).is_err());
        assert!(kron_reduce(&l, &[0], &[1]).is_err());
    }
}
