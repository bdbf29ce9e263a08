//! Step simulators for the Lévy and diffusion models used in the power
//! studies, and their composition into a full model.

mod diffusion;
mod jumps;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::SamplePath;

pub use diffusion::{simulate_brownian, simulate_exp_ou_vol, ExpOuParams};
pub use jumps::{
    sample_gamma, sample_symmetric_stable, simulate_compound_poisson, simulate_gamma_subordinator,
    simulate_stable, simulate_variance_gamma,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    None,
    Constant { sigma: f64 },
    ExpOu(ExpOuParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Jumps {
    None,
    CompoundPoisson { lambda: f64, jump_mean: f64, jump_sd: f64 },
    /// Symmetric stable with per-step characteristic function `exp(-h scale^α |u|^α)`.
    Stable { alpha: f64, scale: f64 },
    /// `c G + η W(G)` with `G_h ~ Γ(h/b, b)`.
    VarianceGamma { c: f64, eta: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    Zero,
    /// `(μ - σ_t²/2) h` per step.
    MuMinusHalfSigma2 { mu: f64 },
}

/// Declarative model `dX = drift dt + σ_t dW + dL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub diffusion: Diffusion,
    pub jumps: Jumps,
    pub drift: Drift,
}

pub const DEFAULT_STABLE_SCALE: f64 = 1.0;

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self.diffusion {
            Diffusion::None => {}
            Diffusion::Constant { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(invalid(format!("sigma must be nonnegative, got {sigma}")));
                }
            }
            Diffusion::ExpOu(p) => p.validate()?,
        }
        match self.jumps {
            Jumps::None => {}
            Jumps::CompoundPoisson { lambda, jump_mean, jump_sd } => {
                jumps::check_compound_poisson(lambda, jump_mean, jump_sd)?
            }
            Jumps::Stable { alpha, scale } => jumps::check_stable(alpha, scale)?,
            Jumps::VarianceGamma { c, eta, b } => jumps::check_variance_gamma(c, eta, b)?,
        }
        if let Drift::MuMinusHalfSigma2 { mu } = self.drift {
            if !mu.is_finite() {
                return Err(invalid("drift mu must be finite"));
            }
        }
        Ok(())
    }

    /// Named models of the power-study tables.
    pub fn preset(name: &str) -> Option<ModelSpec> {
        let spec = match name {
            "table1-a06" => stable_plus_brownian(0.2, 0.6),
            "table1-a16" => stable_plus_brownian(0.2, 1.6),
            "table2-null" => brownian_plus_compound_poisson(0.0),
            "table2-alt" => brownian_plus_compound_poisson(0.2),
            "table3-null" => stable_plus_brownian(0.0, 0.3),
            "table3-alt" => stable_plus_brownian(0.2, 0.3),
            "table4-null" => stable_plus_brownian(0.0, 1.2),
            "table4-alt" => stable_plus_brownian(0.2, 1.2),
            "table5-null" => stochastic_vol_variance_gamma(false),
            "table5-alt" => stochastic_vol_variance_gamma(true),
            _ => return None,
        };
        Some(spec)
    }

    pub const PRESET_NAMES: [&'static str; 10] = [
        "table1-a06",
        "table1-a16",
        "table2-null",
        "table2-alt",
        "table3-null",
        "table3-alt",
        "table4-null",
        "table4-alt",
        "table5-null",
        "table5-alt",
    ];
}

fn constant_or_none(sigma: f64) -> Diffusion {
    if sigma == 0.0 {
        Diffusion::None
    } else {
        Diffusion::Constant { sigma }
    }
}

/// `σ W` plus compound Poisson jumps with intensity 5 and N(0, 0.6²) sizes.
pub fn brownian_plus_compound_poisson(sigma: f64) -> ModelSpec {
    ModelSpec {
        diffusion: constant_or_none(sigma),
        jumps: Jumps::CompoundPoisson { lambda: 5.0, jump_mean: 0.0, jump_sd: 0.6 },
        drift: Drift::Zero,
    }
}

/// `σ W` plus a symmetric α-stable process of unit scale.
pub fn stable_plus_brownian(sigma: f64, alpha: f64) -> ModelSpec {
    ModelSpec {
        diffusion: constant_or_none(sigma),
        jumps: Jumps::Stable { alpha, scale: DEFAULT_STABLE_SCALE },
        drift: Drift::Zero,
    }
}

/// Exponential-OU stochastic volatility with variance gamma jumps
/// (b = 0.23, η = 0.2, c = -0.2, ρ = -0.7, μ = 0); `with_volatility = false`
/// drops the diffusion.
pub fn stochastic_vol_variance_gamma(with_volatility: bool) -> ModelSpec {
    ModelSpec {
        diffusion: if with_volatility {
            Diffusion::ExpOu(ExpOuParams::default())
        } else {
            Diffusion::None
        },
        jumps: Jumps::VarianceGamma { c: -0.2, eta: 0.2, b: 0.23 },
        drift: Drift::MuMinusHalfSigma2 { mu: 0.0 },
    }
}

/// Simulates `n` increments of `spec` on a grid of step `h`, starting at 0.
///
/// Diffusion, volatility and jump components read disjoint streams of `seed`.
pub fn simulate_model(spec: &ModelSpec, n: usize, h: f64, seed: u64) -> Result<SamplePath> {
    spec.validate()?;
    diffusion::check_grid(n, h)?;

    // Diffusion increments and the left-endpoint volatility used by the drift.
    let (mut increments, sigmas): (Vec<f64>, Option<Vec<f64>>) = match spec.diffusion {
        Diffusion::None => (vec![0.0; n], None),
        Diffusion::Constant { sigma } => (simulate_brownian(n, h, sigma, seed)?, None),
        Diffusion::ExpOu(params) => {
            let (sig, dw) = simulate_exp_ou_vol(n, h, &params, seed)?;
            let inc = sig.iter().zip(&dw).map(|(s, w)| s * w).collect();
            (inc, Some(sig))
        }
    };

    if let Drift::MuMinusHalfSigma2 { mu } = spec.drift {
        for (i, x) in increments.iter_mut().enumerate() {
            let s2 = match (&spec.diffusion, &sigmas) {
                (_, Some(sig)) => sig[i] * sig[i],
                (Diffusion::Constant { sigma }, None) => sigma * sigma,
                _ => 0.0,
            };
            *x += (mu - 0.5 * s2) * h;
        }
    }

    let jumps = match spec.jumps {
        Jumps::None => None,
        Jumps::CompoundPoisson { lambda, jump_mean, jump_sd } => {
            Some(simulate_compound_poisson(n, h, lambda, jump_mean, jump_sd, seed)?)
        }
        Jumps::Stable { alpha, scale } => Some(simulate_stable(n, h, alpha, scale, seed)?),
        Jumps::VarianceGamma { c, eta, b } => Some(simulate_variance_gamma(n, h, c, eta, b, seed)?),
    };
    if let Some(j) = jumps {
        for (x, dj) in increments.iter_mut().zip(j) {
            *x += dj;
        }
    }

    SamplePath::new(0.0, increments, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::FIVE_MINUTES;

    #[test]
    fn empty_model_is_flat() {
        let spec = ModelSpec { diffusion: Diffusion::None, jumps: Jumps::None, drift: Drift::Zero };
        let p = simulate_model(&spec, 100, FIVE_MINUTES, 3).unwrap();
        assert!(p.increments().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jump_free_model_equals_its_diffusion() {
        let spec = ModelSpec {
            diffusion: Diffusion::Constant { sigma: 0.3 },
            jumps: Jumps::None,
            drift: Drift::MuMinusHalfSigma2 { mu: 0.05 },
        };
        let p = simulate_model(&spec, 500, FIVE_MINUTES, 11).unwrap();
        let w = simulate_brownian(500, FIVE_MINUTES, 0.3, 11).unwrap();
        let drift = (0.05 - 0.5 * 0.09) * FIVE_MINUTES;
        let expected: Vec<f64> = w.iter().map(|x| x + drift).collect();
        assert_eq!(p.increments(), expected.as_slice());
    }

    #[test]
    fn components_use_their_own_streams() {
        let spec = brownian_plus_compound_poisson(0.2);
        let p = simulate_model(&spec, 2000, 0.01, 8).unwrap();
        let w = simulate_brownian(2000, 0.01, 0.2, 8).unwrap();
        let j = simulate_compound_poisson(2000, 0.01, 5.0, 0.0, 0.6, 8).unwrap();
        for i in 0..2000 {
            assert_eq!(p.increments()[i], w[i] + j[i]);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        for name in ModelSpec::PRESET_NAMES {
            let spec = ModelSpec::preset(name).unwrap();
            // Long enough for the compound Poisson null to see jumps.
            let a = simulate_model(&spec, 50_000, FIVE_MINUTES, 99).unwrap();
            let b = simulate_model(&spec, 50_000, FIVE_MINUTES, 99).unwrap();
            let c = simulate_model(&spec, 50_000, FIVE_MINUTES, 100).unwrap();
            assert_eq!(a, b, "{name}");
            assert_ne!(a, c, "{name}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = stable_plus_brownian(0.2, 2.5);
        assert!(simulate_model(&bad, 10, 0.01, 1).is_err());
        let bad = ModelSpec { diffusion: Diffusion::Constant { sigma: -0.1 }, ..bad };
        assert!(bad.validate().is_err());
        assert!(simulate_model(&brownian_plus_compound_poisson(0.2), 0, 0.01, 1).is_err());
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = ModelSpec::preset("table5-alt").unwrap();
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("variance_gamma"), "{s}");
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }
}
