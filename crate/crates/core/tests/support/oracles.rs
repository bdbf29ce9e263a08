//! Monte Carlo moment and characteristic-function checks for the samplers.
//! Each oracle compares an estimate with its closed form and passes when the
//! gap is within four standard errors.

use threshtest::mc::ks_two_sample;
use threshtest::rng::stream_rng;
use threshtest::sim::{
    sample_symmetric_stable, simulate_brownian, simulate_compound_poisson, simulate_gamma_subordinator,
    simulate_variance_gamma,
};
use threshtest::time::{FIVE_MINUTES, ONE_DAY};

pub const DRAWS: usize = 1_000_000;
pub const VG_C: f64 = -0.2;
pub const VG_ETA: f64 = 0.2;
pub const VG_B: f64 = 0.23;

#[derive(Debug, Clone)]
pub struct Oracle {
    pub name: String,
    pub estimate: f64,
    pub target: f64,
    pub se: f64,
}

impl Oracle {
    pub fn z(&self) -> f64 {
        (self.estimate - self.target) / self.se
    }

    pub fn pass(&self) -> bool {
        self.z().abs() <= 4.0
    }
}

impl std::fmt::Display for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: estimate {:.6e}, target {:.6e}, z = {:+.2}",
            self.name,
            self.estimate,
            self.target,
            self.z()
        )
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn central_moment(xs: &[f64], m: f64, k: i32) -> f64 {
    xs.iter().map(|x| (x - m).powi(k)).sum::<f64>() / xs.len() as f64
}

/// Mean and variance oracles with standard errors from the sample itself.
fn moment_oracles(label: &str, xs: &[f64], mean_target: f64, var_target: f64) -> [Oracle; 2] {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    let m4 = central_moment(xs, m, 4);
    [
        Oracle { name: format!("{label} mean"), estimate: m, target: mean_target, se: (m2 / n).sqrt() },
        Oracle {
            name: format!("{label} variance"),
            estimate: m2 * n / (n - 1.0),
            target: var_target,
            se: ((m4 - m2 * m2) / n).sqrt(),
        },
    ]
}

/// Real and imaginary parts of the empirical characteristic function at `u`,
/// with the standard error of the modulus.
fn empirical_cf(xs: &[f64], u: f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for &x in xs {
        let (si, co) = (u * x).sin_cos();
        c += co;
        s += si;
        c2 += co * co;
        s2 += si * si;
    }
    let (c, s) = (c / n, s / n);
    let var = (c2 / n - c * c) + (s2 / n - s * s);
    (c, s, (var / n).sqrt())
}

pub fn gamma_subordinator(h: f64, label: &str, seed: u64) -> [Oracle; 2] {
    let g = simulate_gamma_subordinator(DRAWS, h, VG_B, seed).expect("valid gamma parameters");
    assert!(g.iter().all(|&x| x > 0.0), "gamma increments must be strictly positive");
    moment_oracles(&format!("gamma subordinator ({label})"), &g, h, VG_B * h)
}

pub fn variance_gamma(h: f64, label: &str, u: f64, seed: u64) -> [Oracle; 3] {
    let x = simulate_variance_gamma(DRAWS, h, VG_C, VG_ETA, VG_B, seed).expect("valid VG parameters");
    let [mean, var] =
        moment_oracles(&format!("variance gamma ({label})"), &x, VG_C * h, (VG_ETA * VG_ETA + VG_C * VG_C * VG_B) * h);
    let (re, im, se) = empirical_cf(&x, u);
    let base_re = 1.0 + u * u * VG_ETA * VG_ETA * VG_B / 2.0;
    let base_im = -u * VG_C * VG_B;
    let modulus = (base_re * base_re + base_im * base_im).sqrt().powf(-h / VG_B);
    let cf = Oracle {
        name: format!("variance gamma ({label}) |CF({u})|"),
        estimate: re.hypot(im),
        target: modulus,
        se,
    };
    [mean, var, cf]
}

/// Real part of the empirical CF of a standard symmetric stable draw
/// against `exp(-|u|^α)`.
pub fn stable_cf(alpha: f64, u: f64, seed: u64) -> Oracle {
    let mut rng = stream_rng(seed, 0);
    let xs: Vec<f64> = (0..DRAWS).map(|_| sample_symmetric_stable(alpha, &mut rng)).collect();
    let n = xs.len() as f64;
    let (sum, sum2) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let c = (u * x).cos();
        (a + c, b + c * c)
    });
    let re = sum / n;
    Oracle {
        name: format!("stable alpha = {alpha} Re CF({u})"),
        estimate: re,
        target: (-u.abs().powf(alpha)).exp(),
        se: ((sum2 / n - re * re) / n).sqrt(),
    }
}

pub fn compound_poisson_nonzero(seed: u64) -> Oracle {
    let (lambda, h) = (5.0, ONE_DAY);
    let x = simulate_compound_poisson(DRAWS, h, lambda, 0.0, 0.6, seed).expect("valid CP parameters");
    let frac = x.iter().filter(|&&d| d != 0.0).count() as f64 / DRAWS as f64;
    let p = 1.0 - (-lambda * h).exp();
    Oracle {
        name: "compound Poisson nonzero fraction (lambda = 5, 1 day)".into(),
        estimate: frac,
        target: p,
        se: (p * (1.0 - p) / DRAWS as f64).sqrt(),
    }
}

/// Two-sample KS p-value between `α = 2` stable draws and `N(0, 2)` draws.
pub fn stable_two_matches_scaled_normal(seed: u64) -> f64 {
    let n = 200_000;
    let mut rng = stream_rng(seed, 0);
    let stable: Vec<f64> = (0..n).map(|_| sample_symmetric_stable(2.0, &mut rng)).collect();
    let normal = simulate_brownian(n, 1.0, std::f64::consts::SQRT_2, seed ^ 0x5eed).expect("valid grid");
    ks_two_sample(&stable, &normal).1
}

pub fn all(seed: u64) -> Vec<Oracle> {
    let mut out = Vec::new();
    out.extend(gamma_subordinator(FIVE_MINUTES, "5 min", seed));
    out.extend(gamma_subordinator(ONE_DAY, "1 day", seed + 1));
    out.extend(variance_gamma(FIVE_MINUTES, "5 min", 200.0, seed + 2));
    out.extend(variance_gamma(ONE_DAY, "1 day", 50.0, seed + 3));
    for (i, alpha) in [0.6, 1.6, 2.0].into_iter().enumerate() {
        for (k, u) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            out.push(stable_cf(alpha, u, seed + 10 + (3 * i + k) as u64));
        }
    }
    out.push(compound_poisson_nonzero(seed + 20));
    out
}
