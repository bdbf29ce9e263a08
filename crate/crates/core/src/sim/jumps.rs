use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, Poisson, StandardNormal};

use super::diffusion::check_grid;
use crate::error::{invalid, Result};
use crate::rng::{stream, stream_rng};

pub(crate) fn check_compound_poisson(lambda: f64, jump_mean: f64, jump_sd: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("jump intensity must be positive, got {lambda}")));
    }
    if !jump_mean.is_finite() || !(jump_sd.is_finite() && jump_sd >= 0.0) {
        return Err(invalid("jump size mean must be finite and sd nonnegative"));
    }
    Ok(())
}

pub(crate) fn check_stable(alpha: f64, scale: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid(format!("stable index must lie in (0, 2], got {alpha}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid(format!("stable scale must be positive, got {scale}")));
    }
    Ok(())
}

pub(crate) fn check_variance_gamma(c: f64, eta: f64, b: f64) -> Result<()> {
    if !c.is_finite() {
        return Err(invalid("variance gamma drift c must be finite"));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid(format!("variance gamma eta must be positive, got {eta}")));
    }
    check_gamma_variance(b)
}

fn check_gamma_variance(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(invalid(format!("gamma subordinator variance b must be positive, got {b}")));
    }
    Ok(())
}

/// Per step: `N ~ Poisson(λh)` jumps with i.i.d. N(mean, sd²) sizes.
pub fn simulate_compound_poisson(
    n: usize,
    h: f64,
    lambda: f64,
    jump_mean: f64,
    jump_sd: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_grid(n, h)?;
    check_compound_poisson(lambda, jump_mean, jump_sd)?;
    let counts = Poisson::new(lambda * h).map_err(|e| invalid(e.to_string()))?;
    let mut rng = stream_rng(seed, stream::JUMPS);
    Ok((0..n)
        .map(|_| {
            let k = counts.sample(&mut rng) as u64;
            (0..k)
                .map(|_| jump_mean + jump_sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .sum::<f64>()
        })
        .collect::<Vec<f64>>())
}

/// Chambers–Mallows–Stuck draw of a standard symmetric α-stable variable,
/// characteristic function `exp(-|u|^α)`.
pub fn sample_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let angle = PI * (u - 0.5);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return angle.tan();
    }
    let a = (alpha * angle).sin() / angle.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * angle).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Increments of a symmetric α-stable Lévy process, `scale · h^{1/α} · S`.
pub fn simulate_stable(n: usize, h: f64, alpha: f64, scale: f64, seed: u64) -> Result<Vec<f64>> {
    check_grid(n, h)?;
    check_stable(alpha, scale)?;
    let step_scale = scale * h.powf(1.0 / alpha);
    let mut rng = stream_rng(seed, stream::JUMPS);
    Ok((0..n)
        .map(|_| step_scale * sample_symmetric_stable(alpha, &mut rng))
        .collect())
}

/// Gamma variate with the given shape and scale.
///
/// Shapes below one use `Γ(a) = Γ(a + 1) · U^{1/a}` on top of the
/// Marsaglia–Tsang sampler. The boost factor is formed in log space and the
/// result floored at the smallest normal double, so draws stay strictly
/// positive even when the true value is below the representable range.
pub struct GammaSampler {
    base: Gamma<f64>,
    inv_shape: Option<f64>,
}

impl GammaSampler {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("gamma needs positive shape and scale, got ({shape}, {scale})")));
        }
        let (base_shape, inv_shape) = if shape < 1.0 { (shape + 1.0, Some(1.0 / shape)) } else { (shape, None) };
        let base = Gamma::new(base_shape, scale).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { base, inv_shape })
    }
}

impl Distribution<f64> for GammaSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.base.sample(rng);
        match self.inv_shape {
            None => g,
            Some(inv) => {
                let u: f64 = Open01.sample(rng);
                (g.ln() + u.ln() * inv).exp().max(f64::MIN_POSITIVE)
            }
        }
    }
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    Ok(GammaSampler::new(shape, scale)?.sample(rng))
}

/// `Γ(h/b, b)` increments: mean `h`, variance `b h`.
pub fn simulate_gamma_subordinator(n: usize, h: f64, b: f64, seed: u64) -> Result<Vec<f64>> {
    check_grid(n, h)?;
    check_gamma_variance(b)?;
    let gamma = GammaSampler::new(h / b, b)?;
    let mut rng = stream_rng(seed, stream::JUMPS);
    Ok((0..n).map(|_| gamma.sample(&mut rng)).collect())
}

/// Variance gamma by Brownian subordination: `c g + η sqrt(g) Z`, `g ~ Γ(h/b, b)`.
pub fn simulate_variance_gamma(n: usize, h: f64, c: f64, eta: f64, b: f64, seed: u64) -> Result<Vec<f64>> {
    check_grid(n, h)?;
    check_variance_gamma(c, eta, b)?;
    let gamma = GammaSampler::new(h / b, b)?;
    let mut rng = stream_rng(seed, stream::JUMPS);
    Ok((0..n)
        .map(|_| {
            let g = gamma.sample(&mut rng);
            let z: f64 = StandardNormal.sample(&mut rng);
            c * g + eta * g.sqrt() * z
        })
        .collect())
}
