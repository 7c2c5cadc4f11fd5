//! Brute-force checkers for the closed-form quantities of [`crate::planar`].
//!
//! Nothing here calls the closed forms it is meant to check: boundary points
//! are parametrised locally, `V` is re-evaluated from its weights and
//! gradients come from central differences.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numfmt::json17;
use crate::planar::{
    enclosing_level_general, enclosing_level_shared, lyapunov_residual, PlanarAffineMode,
    QuadraticLyapunov, SublevelSet, Vec2,
};

pub const MIN_SAMPLES: usize = 16;

/// Seed used by the test suites and by `dwell oracle` unless overridden.
pub const DEFAULT_SEED: u64 = 0x5eed_d3e1;

fn weighted(w1: f64, w2: f64, c: &Vec2, x: &Vec2) -> f64 {
    let (d1, d2) = (x.x - c.x, x.y - c.y);
    w1 * d1 * d1 + w2 * d2 * d2
}

fn ellipse_point(v: &QuadraticLyapunov, k: f64, phi: f64) -> Vec2 {
    Vec2::new(
        v.center.x + (k / v.w1).sqrt() * phi.cos(),
        v.center.y + (k / v.w2).sqrt() * phi.sin(),
    )
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n as f64,
            reason: "at least 16 samples are required",
        });
    }
    Ok(())
}

/// Max of `new` over `n` equiangular points of `{old = k}`.
pub fn boundary_max(old: &QuadraticLyapunov, k: f64, new: &QuadraticLyapunov, n: usize) -> Result<f64> {
    check_samples(n)?;
    Ok((0..n)
        .map(|i| {
            let x = ellipse_point(old, k, TAU * i as f64 / n as f64);
            weighted(new.w1, new.w2, &new.center, &x)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    /// `max (grad V . f) / V + eps` over the random sample; never positive
    /// for a valid decay rate.
    pub worst: f64,
    /// The same quantity on the axis that attains `min(|a|, |d|)`; zero when
    /// `eps` is tight.
    pub witness: f64,
    /// `min (grad V . f) / V + eps` over the sample.
    pub best: f64,
}

fn decay_ratio(m: &PlanarAffineMode, v: &QuadraticLyapunov, x: &Vec2) -> f64 {
    let h = 1e-5 * (1.0 + x.amax());
    let val = |y: &Vec2| weighted(v.w1, v.w2, &v.center, y);
    let g1 = (val(&Vec2::new(x.x + h, x.y)) - val(&Vec2::new(x.x - h, x.y))) / (2.0 * h);
    let g2 = (val(&Vec2::new(x.x, x.y + h)) - val(&Vec2::new(x.x, x.y - h))) / (2.0 * h);
    let (a, b, c, d) = m.entries();
    let off = m.offset();
    let f = Vec2::new(a * x.x + b * x.y + off.x, c * x.x + d * x.y + off.y);
    (g1 * f.x + g2 * f.y) / val(x) + v.eps
}

/// Finite-difference check of `dV/dt <= -eps V` on `n` random states around
/// the equilibrium (radii in `[0.5, 5]`).
pub fn fd_decay_check(m: &PlanarAffineMode, n: usize, seed: u64) -> Result<DecayCheck> {
    if n < 100 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            value: n as f64,
            reason: "at least 100 points are required",
        });
    }
    let v = m.lyapunov();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut best) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..n {
        let phi = rng.gen_range(0.0..TAU);
        let r = rng.gen_range(0.5..5.0);
        let x = v.center + Vec2::new(r * phi.cos(), r * phi.sin());
        let ratio = decay_ratio(m, &v, &x);
        worst = worst.max(ratio);
        best = best.min(ratio);
    }
    let (a, _, _, d) = m.entries();
    let axis = if a.abs() <= d.abs() { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
    let witness = decay_ratio(m, &v, &(v.center + axis));
    Ok(DecayCheck { worst, witness, best })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclusion {
    pub holds: bool,
    /// `max V_outer(x) - k_outer` over the sampled points of `inner`.
    pub worst_violation: f64,
}

/// Samples `n` boundary points and `n` interior points of `inner` and checks
/// membership in `outer` with tolerance `1e-9 * max(1, k_outer)`.
pub fn inclusion_check(inner: &SublevelSet, outer: &SublevelSet, n: usize) -> Result<Inclusion> {
    check_samples(n)?;
    let lv = &outer.lyapunov;
    let golden_angle = TAU * (1.0 - 1.0 / 1.618_033_988_749_895);
    let boundary = (0..n).map(|i| ellipse_point(&inner.lyapunov, inner.k, TAU * i as f64 / n as f64));
    let interior = (0..n).map(|i| {
        let level = inner.k * (i as f64 + 0.5) / n as f64;
        ellipse_point(&inner.lyapunov, level, golden_angle * i as f64)
    });
    let worst_violation = boundary
        .chain(interior)
        .map(|x| weighted(lv.w1, lv.w2, &lv.center, &x) - outer.k)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Inclusion {
        holds: worst_violation <= 1e-9 * outer.k.max(1.0),
        worst_violation,
    })
}

fn entry(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen_range(-5.0..5.0);
        if v.abs() >= 0.05 {
            return v;
        }
    }
}

/// Random admissible mode: entries uniform in `[-5, 5] \ (-0.05, 0.05)`,
/// rejected until `abcd < 0` and Hurwitz; `B` uniform in `[-3, 3]^2`.
pub fn random_mode(rng: &mut ChaCha8Rng, id: &str) -> PlanarAffineMode {
    loop {
        let (a, b, c, d) = (entry(rng), entry(rng), entry(rng), entry(rng));
        let offset = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        if let Ok(m) = PlanarAffineMode::new(id, a, b, c, d, offset) {
            return m;
        }
    }
}

/// Two modes sharing their matrix (hence their Lyapunov weights) with
/// independent offsets.
pub fn random_shared_pair(rng: &mut ChaCha8Rng) -> (PlanarAffineMode, PlanarAffineMode) {
    let first = random_mode(rng, "A");
    let second = first.with_offset("B", [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
    (first, second)
}

/// Admissible mode with a double eigenvalue: `a = -l + s`, `d = -l - s`,
/// `bc = -s^2` so that `(a - d)^2 + 4bc = 0`.
pub fn repeated_eigenvalue_mode(rng: &mut ChaCha8Rng, id: &str) -> PlanarAffineMode {
    loop {
        let s = rng.gen_range(0.1..2.0);
        let l = s + rng.gen_range(0.1..3.0);
        let b = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let c = -s * s / b;
        let offset = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        if let Ok(m) = PlanarAffineMode::new(id, -l + s, b, c, -l - s, offset) {
            return m;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub seed: u64,
    pub instances: usize,
    pub samples: usize,
    pub max_enclosing_rel_err: f64,
    pub max_general_rel_err: f64,
    pub max_residual: f64,
    pub worst_decay_ratio: f64,
    pub worst_witness: f64,
}

impl OracleSummary {
    /// Tolerances of the randomized agreement checks.
    pub fn passes(&self) -> bool {
        self.max_enclosing_rel_err <= 1e-5
            && self.max_general_rel_err <= 1e-9
            && self.max_residual <= 1e-12
            && self.worst_decay_ratio <= 1e-9
            && self.worst_witness <= 1e-6
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "instances": self.instances,
            "samples": self.samples,
            "max_enclosing_rel_err": json17(self.max_enclosing_rel_err),
            "max_general_rel_err": json17(self.max_general_rel_err),
            "max_lyapunov_residual": json17(self.max_residual),
            "worst_decay_ratio": json17(self.worst_decay_ratio),
            "worst_tightness_witness": json17(self.worst_witness),
            "pass": self.passes(),
        })
    }
}

/// Runs every oracle on `instances` random shared-weight pairs with levels
/// drawn from `(0, 10]`.
pub fn run_suite(instances: usize, samples: usize, seed: u64) -> Result<OracleSummary> {
    check_samples(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = OracleSummary {
        seed,
        instances,
        samples,
        max_enclosing_rel_err: 0.0,
        max_general_rel_err: 0.0,
        max_residual: 0.0,
        worst_decay_ratio: f64::NEG_INFINITY,
        worst_witness: 0.0,
    };
    for i in 0..instances {
        let (old, new) = random_shared_pair(&mut rng);
        let k = 10.0 - rng.gen_range(0.0..10.0);
        let (vo, vn) = (old.lyapunov(), new.lyapunov());
        let closed = enclosing_level_shared(&vo, &vn, k)?;
        let sampled = boundary_max(&vo, k, &vn, samples)?;
        let general = enclosing_level_general(&vo, &vn, k)?;
        summary.max_enclosing_rel_err = summary.max_enclosing_rel_err.max((closed - sampled).abs() / closed);
        summary.max_general_rel_err = summary.max_general_rel_err.max((closed - general).abs() / closed);
        summary.max_residual = summary.max_residual.max(lyapunov_residual(&old).amax());
        let decay = fd_decay_check(&old, 100, seed.wrapping_add(i as u64))?;
        summary.worst_decay_ratio = summary.worst_decay_ratio.max(decay.worst);
        summary.worst_witness = summary.worst_witness.max(decay.witness.abs());
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w32(center: [f64; 2]) -> QuadraticLyapunov {
        QuadraticLyapunov::new(3.0, 2.0, center, 2.0).unwrap()
    }

    #[test]
    fn boundary_max_examples() {
        let (old, new) = (w32([0.0, 0.0]), w32([1.0, 1.0]));
        let m = boundary_max(&old, 1.0, &new, 4096).unwrap();
        let ki = (1.0 + 5f64.sqrt()).powi(2);
        assert!((m - ki).abs() / ki < 1e-5);
        assert!((boundary_max(&old, 1.0, &old, 4096).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(boundary_max(&old, 0.0, &new, 64).unwrap(), 5.0);
        assert!(boundary_max(&old, 1.0, &new, 8).is_err());
    }

    #[test]
    fn refinement_is_monotone() {
        let old = QuadraticLyapunov::new(1.3, 0.4, [0.2, -0.1], 1.0).unwrap();
        let new = QuadraticLyapunov::new(0.7, 2.1, [1.1, 0.9], 1.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for p in 4..14 {
            let m = boundary_max(&old, 2.5, &new, 1 << p).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn decay_examples() {
        let on = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap();
        let chk = fd_decay_check(&on, 1000, 1).unwrap();
        assert!(chk.worst <= 1e-9);
        assert!(chk.witness.abs() < 1e-6);
        let iso = PlanarAffineMode::new("I", -2.0, 1.5, -0.5, -2.0, [0.3, 0.1]).unwrap();
        let chk = fd_decay_check(&iso, 500, 2).unwrap();
        assert!(chk.worst.abs() < 1e-8 && chk.best.abs() < 1e-8);
        assert!(fd_decay_check(&on, 10, 1).is_err());
    }

    #[test]
    fn inclusion_examples() {
        let (old, new) = (w32([0.0, 0.0]), w32([1.0, 1.0]));
        let ki = enclosing_level_shared(&old, &new, 1.0).unwrap();
        let r = inclusion_check(&old.sublevel(1.0), &new.sublevel(ki), 1024).unwrap();
        assert!(r.holds);
        let r = inclusion_check(&old.sublevel(1.0), &new.sublevel(0.99 * ki), 1024).unwrap();
        assert!(!r.holds && r.worst_violation > 0.0);
        let r = inclusion_check(&old.sublevel(1.0), &old.sublevel(1.0), 64).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn generators_are_reproducible_and_valid() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(random_mode(&mut a, "x"), random_mode(&mut b, "x"));
        }
        for _ in 0..20 {
            let m = repeated_eigenvalue_mode(&mut a, "r");
            let (p, q, r, s) = m.entries();
            assert!(((p - s).powi(2) + 4.0 * q * r).abs() < 1e-12);
        }
    }

    #[test]
    fn suite_passes() {
        let s = run_suite(50, 4096, DEFAULT_SEED).unwrap();
        assert!(s.passes(), "{s:?}");
    }
}
