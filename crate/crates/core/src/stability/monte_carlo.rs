//! Seeded Monte Carlo estimate of the mean-square growth rate.
//!
//! Trajectories of `x(t+1) = (A + Σ δ_i b_i c_iᵀ) x(t)` with Gaussian
//! `δ_i ~ N(0, σ_i²)` are simulated as a population of particles. After each
//! step the particles are renormalized and resampled in proportion to
//! `‖x‖²`; the running product of the mean squared norms is an unbiased
//! estimate of `E‖x(t)‖²` whose variance stays bounded over long horizons,
//! unlike the plain sample mean, which is dominated by rare large
//! trajectories.
//!
//! Every particle slot draws from its own ChaCha stream and resampling uses a
//! separate stream, so results depend only on the seed.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::AssembledNetwork;

use super::operator::SigmaAssignment;

pub const MIN_TRIALS: usize = 100;
pub const MIN_HORIZON: usize = 50;

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Initial state; defaults to the normalized all-ones vector.
    pub initial_state: Option<Vec<f64>>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { trials: 1000, horizon: 100, seed: 0, initial_state: None }
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloResult {
    /// Estimated `E‖x(t)‖²` for `t = 0..=horizon`.
    pub mean_sq_norm: Vec<f64>,
    /// Least-squares slope of `log E‖x(t)‖²` over `t ≥ burn_in`.
    pub rate: f64,
    /// 95% half-width of the rate estimate.
    pub half_width: f64,
    pub burn_in: usize,
}

impl MonteCarloResult {
    pub fn grows(&self) -> bool {
        self.rate > 0.0
    }
}

/// Estimates the growth rate of `E‖x(t)‖²`.
pub fn monte_carlo_growth(
    net: &AssembledNetwork,
    sigmas: &SigmaAssignment,
    config: &MonteCarloConfig,
) -> Result<MonteCarloResult> {
    if config.trials < MIN_TRIALS {
        return Err(Error::Validation(format!("need at least {MIN_TRIALS} trials, got {}", config.trials)));
    }
    if config.horizon < MIN_HORIZON {
        return Err(Error::Validation(format!("need a horizon of at least {MIN_HORIZON}, got {}", config.horizon)));
    }
    let sig = sigmas.values();
    if sig.len() != net.links().len() {
        return Err(Error::Dimension(format!("{} sigmas for {} links", sig.len(), net.links().len())));
    }
    let n = net.dim();
    let x0 = match &config.initial_state {
        Some(v) if v.len() != n => {
            return Err(Error::Dimension(format!("initial state has length {}, expected {n}", v.len())))
        }
        Some(v) => DVector::from_column_slice(v),
        None => DVector::from_element(n, 1.0),
    };
    let x0_norm_sq = x0.norm_squared();
    if !(x0_norm_sq > 0.0 && x0_norm_sq.is_finite()) {
        return Err(Error::Validation("initial state must be nonzero and finite".into()));
    }

    let a = net.state_map().as_matrix();
    let start = &x0 / x0_norm_sq.sqrt();
    let mut particles: Vec<DVector<f64>> = vec![start; config.trials];
    let mut rngs: Vec<ChaCha8Rng> = (0..config.trials)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64 + 1);
            rng
        })
        .collect();
    let mut resample_rng = ChaCha8Rng::seed_from_u64(config.seed);
    resample_rng.set_stream(0);

    let mut log_mean = Vec::with_capacity(config.horizon + 1);
    log_mean.push(x0_norm_sq.ln());
    let mut weights = vec![0.0; config.trials];

    for _ in 0..config.horizon {
        particles
            .par_iter_mut()
            .zip(rngs.par_iter_mut())
            .zip(weights.par_iter_mut())
            .for_each(|((x, rng), w)| {
                let mut next = a * &*x;
                for (d, s) in net.links().iter().zip(sig) {
                    if *s == 0.0 {
                        continue;
                    }
                    let delta: f64 = rng.sample::<f64, _>(StandardNormal) * s;
                    next.axpy(delta * d.c.dot(x), &d.b, 1.0);
                }
                *w = next.norm_squared();
                *x = next;
            });
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            let last = if total == 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
            log_mean.resize(config.horizon + 1, last);
            break;
        }
        let mean = total / config.trials as f64;
        log_mean.push(log_mean.last().copied().unwrap_or(0.0) + mean.ln());
        particles = systematic_resample(&particles, &weights, total, &mut resample_rng);
    }

    let burn_in = config.horizon / 5;
    let (rate, half_width) = fit_rate(&log_mean, burn_in);
    Ok(MonteCarloResult {
        mean_sq_norm: log_mean.iter().map(|l| l.exp()).collect(),
        rate,
        half_width,
        burn_in,
    })
}

fn systematic_resample(
    particles: &[DVector<f64>],
    weights: &[f64],
    total: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<DVector<f64>> {
    let count = particles.len();
    let step = total / count as f64;
    let mut u = rng.random::<f64>() * step;
    let mut cumulative = weights[0];
    let mut j = 0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        while u > cumulative && j + 1 < count {
            j += 1;
            cumulative += weights[j];
        }
        let w = weights[j];
        out.push(if w > 0.0 { &particles[j] / w.sqrt() } else { particles[j].clone() });
        u += step;
    }
    out
}

/// Slope of the least-squares line through `(t, log_mean[t])` for
/// `t ≥ burn_in`, with a 95% half-width from the spread of the one-step
/// increments.
fn fit_rate(log_mean: &[f64], burn_in: usize) -> (f64, f64) {
    if log_mean.iter().any(|v| v.is_infinite()) {
        let sign = log_mean.iter().find(|v| v.is_infinite()).copied().unwrap_or(0.0);
        return (sign, 0.0);
    }
    let points: Vec<(f64, f64)> = log_mean.iter().enumerate().skip(burn_in).map(|(t, v)| (t as f64, *v)).collect();
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_v)).sum();
    let slope = sxy / sxx;

    let increments: Vec<f64> = points.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let k = increments.len() as f64;
    let mean_inc = increments.iter().sum::<f64>() / k;
    let var = increments.iter().map(|g| (g - mean_inc).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (slope, 1.96 * (var / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::network::{network_from_directions, Direction};

    fn scalar_net(a: f64, sigma: f64) -> AssembledNetwork {
        network_from_directions(
            DenseMatrix::from_row_slice(1, 1, &[a]).unwrap(),
            vec![Direction::new("L1", vec![1.0], vec![1.0], sigma)],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_decay_without_noise() {
        let net = scalar_net(0.5, 0.0);
        let cfg = MonteCarloConfig { trials: 100, horizon: 50, seed: 3, initial_state: None };
        let r = monte_carlo_growth(&net, &SigmaAssignment::zeros(&net), &cfg).unwrap();
        assert!((r.rate - 0.25f64.ln()).abs() < 1e-12);
        assert!(r.half_width < 1e-12);
        assert!((r.mean_sq_norm[10] - 0.25f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn scalar_growth_rate_matches_moment_recursion() {
        // a^2 + sigma^2 = 1.2
        let a: f64 = 0.8;
        let sigma = (1.2 - a * a).sqrt();
        let net = scalar_net(a, sigma);
        let cfg = MonteCarloConfig { trials: 2000, horizon: 100, seed: 11, initial_state: None };
        let r = monte_carlo_growth(&net, &SigmaAssignment::from_network(&net), &cfg).unwrap();
        assert!(r.grows());
        assert!((r.rate - 1.2f64.ln()).abs() <= 3.0 * r.half_width, "rate {} hw {}", r.rate, r.half_width);
    }

    #[test]
    fn same_seed_same_result() {
        let net = scalar_net(0.9, 0.3);
        let sig = SigmaAssignment::from_network(&net);
        let cfg = MonteCarloConfig { trials: 200, horizon: 60, seed: 42, initial_state: None };
        let a = monte_carlo_growth(&net, &sig, &cfg).unwrap();
        let b = monte_carlo_growth(&net, &sig, &cfg).unwrap();
        assert_eq!(a.mean_sq_norm, b.mean_sq_norm);
        let c = monte_carlo_growth(&net, &sig, &MonteCarloConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.mean_sq_norm, c.mean_sq_norm);
    }

    #[test]
    fn nilpotent_collapse_reports_negative_infinity() {
        let net = scalar_net(0.0, 0.0);
        let cfg = MonteCarloConfig { trials: 100, horizon: 50, seed: 0, initial_state: None };
        let r = monte_carlo_growth(&net, &SigmaAssignment::zeros(&net), &cfg).unwrap();
        assert_eq!(r.rate, f64::NEG_INFINITY);
        assert_eq!(r.mean_sq_norm.len(), 51);
        assert_eq!(r.mean_sq_norm[1], 0.0);
    }

    #[test]
    fn rejects_small_runs() {
        let net = scalar_net(0.5, 0.1);
        let sig = SigmaAssignment::from_network(&net);
        let small = MonteCarloConfig { trials: 10, horizon: 50, seed: 0, initial_state: None };
        assert!(monte_carlo_growth(&net, &sig, &small).is_err());
        let short = MonteCarloConfig { trials: 100, horizon: 0, seed: 0, initial_state: None };
        assert!(monte_carlo_growth(&net, &sig, &short).is_err());
        let bad_x0 = MonteCarloConfig { trials: 100, horizon: 50, seed: 0, initial_state: Some(vec![1.0, 2.0]) };
        assert!(monte_carlo_growth(&net, &sig, &bad_x0).is_err());
    }
}
