use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream, stream_rng};

/// Log-volatility `K` of `σ_t = exp(K_t)`, with
/// `dK = -k (K - K̄) dt + ς dW2` and `d<W1, W2> = ρ dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpOuParams {
    pub k0: f64,
    pub k: f64,
    pub kbar: f64,
    pub varsigma: f64,
    pub rho: f64,
}

impl Default for ExpOuParams {
    /// σ starting at 0.3 and reverting slowly towards 0.25.
    fn default() -> Self {
        Self {
            k0: 0.3f64.ln(),
            k: 0.09,
            kbar: 0.25f64.ln(),
            varsigma: 0.05,
            rho: -0.7,
        }
    }
}

impl ExpOuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k0.is_finite() && self.kbar.is_finite()) {
            return Err(invalid("K0 and Kbar must be finite"));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(invalid(format!("mean-reversion speed must be positive, got {}", self.k)));
        }
        if !(self.varsigma.is_finite() && self.varsigma >= 0.0) {
            return Err(invalid(format!("vol of log-vol must be nonnegative, got {}", self.varsigma)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid(format!("correlation must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }
}

pub(crate) fn check_grid(n: usize, h: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("number of steps must be at least 1"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("step h must be finite and positive, got {h}")));
    }
    Ok(())
}

/// `n` i.i.d. N(0, σ² h) increments.
pub fn simulate_brownian(n: usize, h: f64, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    check_grid(n, h)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let sd = sigma * h.sqrt();
    let mut rng = stream_rng(seed, stream::DIFFUSION);
    Ok((0..n)
        .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect::<Vec<f64>>())
}

/// Euler scheme for the log-volatility on the observation grid.
///
/// Returns `σ` at the left endpoint of every step and the increments of the
/// price driver `W1`. The pair `(ΔW1, ΔW2)` is built from two independent
/// normals through the 2x2 Cholesky factor of the correlation matrix.
pub fn simulate_exp_ou_vol(
    n: usize,
    h: f64,
    params: &ExpOuParams,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_grid(n, h)?;
    params.validate()?;
    let sqrt_h = h.sqrt();
    let rho_perp = (1.0 - params.rho * params.rho).sqrt();
    let mut rng = stream_rng(seed, stream::VOLATILITY);

    let mut sigmas = Vec::with_capacity(n);
    let mut dw1 = Vec::with_capacity(n);
    let mut log_vol = params.k0;
    for _ in 0..n {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let w1 = sqrt_h * z1;
        let w2 = sqrt_h * (params.rho * z1 + rho_perp * z2);
        sigmas.push(log_vol.exp());
        dw1.push(w1);
        log_vol += -params.k * (log_vol - params.kbar) * h + params.varsigma * w2;
    }
    Ok((sigmas, dw1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::FIVE_MINUTES;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn zero_sigma_gives_zero_increments() {
        assert!(simulate_brownian(1000, 0.01, 0.0, 1).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn brownian_moments() {
        let n = 1_000_000;
        let (sigma, h) = (0.2, FIVE_MINUTES);
        let x = simulate_brownian(n, h, sigma, 17).unwrap();
        let (m, v) = mean_var(&x);
        let target = sigma * sigma * h;
        let se_mean = (target / n as f64).sqrt();
        let se_var = target * (2.0 / (n - 1) as f64).sqrt();
        assert!(m.abs() < 4.0 * se_mean, "mean {m}");
        assert!((v - target).abs() < 4.0 * se_var, "var {v} vs {target}");
    }

    #[test]
    fn frozen_log_vol_follows_closed_form() {
        let params = ExpOuParams { varsigma: 0.0, ..ExpOuParams::default() };
        let h = FIVE_MINUTES;
        let (sig, _) = simulate_exp_ou_vol(5000, h, &params, 4).unwrap();
        for (i, s) in sig.iter().enumerate() {
            // K_i = K̄ + (K_0 - K̄)(1 - k h)^i
            let k = params.kbar + (params.k0 - params.kbar) * (1.0 - params.k * h).powi(i as i32);
            assert!((s.ln() - k).abs() < 1e-12, "step {i}");
        }
        assert_eq!(sig[0], 0.3f64.ln().exp());
    }

    #[test]
    fn uncorrelated_drivers() {
        let n = 1_000_000;
        let params = ExpOuParams { rho: 0.0, ..ExpOuParams::default() };
        let h = 1e-3;
        let (sig, w1) = simulate_exp_ou_vol(n, h, &params, 21).unwrap();
        // Recover ΔW2 from the log-vol recursion.
        let mut w2 = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let (k_now, k_next) = (sig[i].ln(), sig[i + 1].ln());
            w2.push((k_next - k_now + params.k * (k_now - params.kbar) * h) / params.varsigma);
        }
        let m = (n - 1) as f64;
        let cov = w1.iter().zip(&w2).map(|(a, b)| a * b).sum::<f64>() / m;
        let corr = cov / h;
        assert!(corr.abs() < 4.0 / m.sqrt(), "corr {corr}");
    }

    #[test]
    fn correlated_drivers() {
        let n = 200_000;
        let params = ExpOuParams::default();
        let h = 1e-3;
        let (sig, w1) = simulate_exp_ou_vol(n, h, &params, 22).unwrap();
        let mut cov = 0.0;
        for i in 0..n - 1 {
            let (k_now, k_next) = (sig[i].ln(), sig[i + 1].ln());
            let w2 = (k_next - k_now + params.k * (k_now - params.kbar) * h) / params.varsigma;
            cov += w1[i] * w2;
        }
        let corr = cov / (n - 1) as f64 / h;
        // SE of a sample correlation near ρ is (1 - ρ²)/sqrt(n).
        assert!((corr - params.rho).abs() < 4.0 * (1.0 - 0.49) / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn volatility_stays_in_band_over_a_year() {
        let n = 252 * 84;
        let (sig, _) = simulate_exp_ou_vol(n, FIVE_MINUTES, &ExpOuParams::default(), 2009).unwrap();
        let inside = sig.iter().filter(|s| (0.15..=0.45).contains(*s)).count();
        assert!(inside as f64 >= 0.95 * n as f64, "{inside} of {n}");
    }

    #[test]
    fn rejects_bad_params() {
        let p = ExpOuParams { rho: 1.5, ..ExpOuParams::default() };
        assert!(simulate_exp_ou_vol(10, 0.01, &p, 1).is_err());
        let p = ExpOuParams { k: 0.0, ..ExpOuParams::default() };
        assert!(p.validate().is_err());
        assert!(simulate_brownian(0, 0.01, 0.2, 1).is_err());
        assert!(simulate_brownian(10, -0.01, 0.2, 1).is_err());
    }
}
