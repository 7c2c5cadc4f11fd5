//! Dwell times for nonlinear subsystems in `R^n` with arbitrary Lyapunov
//! functions.
//!
//! A subsystem `x' = f(x)` with equilibrium `x_u` qualifies when its Lyapunov
//! function is sandwiched by comparison functions,
//! `alpha(|x - x_u|) <= V(x) <= beta(|x - x_u|)`, and decays as
//! `grad V(x) . f(x) <= -eps V(x)`. The level set `{V_old <= k}` then sits in
//! the ball of radius `alpha_old^{-1}(k)` around `x_old`, that ball sits in the
//! ball of radius `|x_new - x_old| + alpha_old^{-1}(k)` around `x_new`, and the
//! latter is inside `{V_new <= beta_new(radius)}`. This is coarser than the
//! tangent-ellipse level of [`crate::planar`] but needs no geometry of `V`.
//!
//! Both sandwich and decay conditions can only be sampled, not proven, for
//! user-supplied closures; see [`NonlinearSubsystem::check_sandwich`] and
//! [`NonlinearSubsystem::check_decay`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::bisect;
use crate::planar::PlanarAffineMode;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Slack on sampled sandwich/decay checks.
pub const SAMPLE_TOL: f64 = 1e-9;

/// Strictly increasing comparison functions `alpha <= beta`, both zero at zero.
#[derive(Clone)]
pub struct ComparisonPair {
    alpha: ScalarFn,
    alpha_inv: Option<ScalarFn>,
    beta: ScalarFn,
}

impl fmt::Debug for ComparisonPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComparisonPair")
            .field("alpha_inv", &self.alpha_inv.is_some())
            .finish_non_exhaustive()
    }
}

impl ComparisonPair {
    pub fn new(alpha: ScalarFn, beta: ScalarFn) -> Self {
        ComparisonPair {
            alpha,
            alpha_inv: None,
            beta,
        }
    }

    pub fn with_inverse(mut self, alpha_inv: ScalarFn) -> Self {
        self.alpha_inv = Some(alpha_inv);
        self
    }

    /// `alpha(r) = lo r^2`, `beta(r) = hi r^2` with the exact inverse.
    pub fn quadratic(lo: f64, hi: f64) -> Self {
        ComparisonPair::new(Arc::new(move |r| lo * r * r), Arc::new(move |r| hi * r * r))
            .with_inverse(Arc::new(move |k: f64| (k / lo).sqrt()))
    }

    pub fn alpha(&self, r: f64) -> f64 {
        (self.alpha)(r)
    }

    pub fn beta(&self, r: f64) -> f64 {
        (self.beta)(r)
    }

    /// `alpha^{-1}(k)`, from the supplied inverse if any, otherwise by
    /// bisection on `[0, R]` with `R` doubled until `alpha(R) >= k`.
    pub fn alpha_inv(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidLevels(format!("level k = {k} must be finite and >= 0")));
        }
        if let Some(inv) = &self.alpha_inv {
            return Ok(inv(k));
        }
        if k == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        let mut doublings = 0;
        while self.alpha(hi) < k {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1000 || !hi.is_finite() {
                return Err(Error::InvalidLevels(format!("alpha never reaches level {k}")));
            }
        }
        let tol = 1e-15 * hi.max(1.0);
        Ok(bisect(|r| self.alpha(r) >= k, 0.0, hi, tol))
    }

    /// `alpha <= beta` and `alpha_inv(alpha(r)) = r` on the given radii.
    pub fn check(&self, radii: &[f64]) -> Result<()> {
        for &r in radii {
            let (a, b) = (self.alpha(r), self.beta(r));
            if a > b + SAMPLE_TOL * b.abs().max(1.0) {
                return Err(Error::InvariantViolated {
                    check: "alpha <= beta",
                    point: vec![r],
                    excess: a - b,
                });
            }
            let back = self.alpha_inv(a)?;
            if (back - r).abs() > SAMPLE_TOL * r.max(1.0) {
                return Err(Error::InvariantViolated {
                    check: "alpha_inv(alpha(r)) = r",
                    point: vec![r],
                    excess: (back - r).abs(),
                });
            }
        }
        Ok(())
    }
}

/// Axis-aligned box `[lo_i, hi_i]` on which sampled checks are run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn around(center: &[f64], half_width: f64) -> Self {
        SampleBox {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if h > l { rng.gen_range(l..h) } else { l })
            .collect()
    }
}

#[derive(Clone)]
pub struct NonlinearSubsystem {
    pub field: VectorFn,
    pub equilibrium: Vec<f64>,
    pub lyapunov: StateFn,
    /// Central finite differences are used when absent.
    pub gradient: Option<VectorFn>,
    pub comparison: ComparisonPair,
    pub eps: f64,
}

impl fmt::Debug for NonlinearSubsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearSubsystem")
            .field("equilibrium", &self.equilibrium)
            .field("eps", &self.eps)
            .field("comparison", &self.comparison)
            .finish_non_exhaustive()
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl NonlinearSubsystem {
    pub fn dim(&self) -> usize {
        self.equilibrium.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.lyapunov)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.gradient {
            return g(x);
        }
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = 1e-6 * (1.0 + x[i].abs());
                probe[i] = x[i] + h;
                let up = self.eval(&probe);
                probe[i] = x[i] - h;
                let down = self.eval(&probe);
                probe[i] = x[i];
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    /// Samples `n` states in `region` and checks
    /// `alpha(|x - x_u|) <= V(x) <= beta(|x - x_u|)`; reports the worst point.
    pub fn check_sandwich(&self, region: &SampleBox, n: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<(Vec<f64>, f64)> = None;
        for _ in 0..n {
            let x = region.draw(&mut rng);
            let r = distance(&x, &self.equilibrium);
            let v = self.eval(&x);
            let slack = SAMPLE_TOL * v.abs().max(1.0);
            let excess = (self.comparison.alpha(r) - v).max(v - self.comparison.beta(r));
            if excess > slack && worst.as_ref().is_none_or(|w| excess > w.1) {
                worst = Some((x, excess));
            }
        }
        match worst {
            Some((point, excess)) => Err(Error::InvariantViolated {
                check: "alpha(|x - x_u|) <= V(x) <= beta(|x - x_u|)",
                point,
                excess,
            }),
            None => Ok(()),
        }
    }

    /// Samples `n` states in `region` and checks `grad V . f <= -eps V`.
    pub fn check_decay(&self, region: &SampleBox, n: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<(Vec<f64>, f64)> = None;
        for _ in 0..n {
            let x = region.draw(&mut rng);
            let v = self.eval(&x);
            let rate = dot(&self.grad(&x), &(self.field)(&x));
            let excess = rate + self.eps * v;
            let slack = 1e-6 * v.abs().max(1.0);
            if excess > slack && worst.as_ref().is_none_or(|w| excess > w.1) {
                worst = Some((x, excess));
            }
        }
        match worst {
            Some((point, excess)) => Err(Error::InvariantViolated {
                check: "grad V . f <= -eps V",
                point,
                excess,
            }),
            None => Ok(()),
        }
    }
}

/// `beta_new(|x_new - x_old| + alpha_old^{-1}(k))`.
pub fn nl_enclosing_level(old: &NonlinearSubsystem, new: &NonlinearSubsystem, k: f64) -> Result<f64> {
    let radius = distance(&new.equilibrium, &old.equilibrium) + old.comparison.alpha_inv(k)?;
    Ok(new.comparison.beta(radius))
}

/// `ln(k_i / k) / eps_new`.
pub fn nl_dwell_time(new: &NonlinearSubsystem, k: f64, k_i: f64) -> Result<f64> {
    crate::planar::dwell_time(new.eps, k, k_i)
}

/// Views a planar affine mode as a nonlinear subsystem with quadratic
/// comparison functions `min(w) r^2` and `max(w) r^2`.
pub fn affine_as_nonlinear(m: &PlanarAffineMode) -> NonlinearSubsystem {
    let v = m.lyapunov();
    let a = m.matrix();
    let offset = m.offset();
    let (lo, hi) = (v.w1.min(v.w2), v.w1.max(v.w2));
    NonlinearSubsystem {
        field: Arc::new(move |x: &[f64]| {
            vec![
                a[(0, 0)] * x[0] + a[(0, 1)] * x[1] + offset.x,
                a[(1, 0)] * x[0] + a[(1, 1)] * x[1] + offset.y,
            ]
        }),
        equilibrium: vec![v.center.x, v.center.y],
        lyapunov: Arc::new(move |x: &[f64]| v.eval(&crate::planar::Vec2::new(x[0], x[1]))),
        gradient: Some(Arc::new(move |x: &[f64]| {
            let g = v.gradient(&crate::planar::Vec2::new(x[0], x[1]));
            vec![g.x, g.y]
        })),
        comparison: ComparisonPair::quadratic(lo, hi),
        eps: v.eps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NlTrajectory {
    pub samples: Vec<NlSample>,
}

impl NlTrajectory {
    pub fn last(&self) -> Option<&NlSample> {
        self.samples.last()
    }

    pub fn max_v(&self) -> f64 {
        self.samples.iter().map(|s| s.v).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect()
}

/// Classical RK4 with fixed step `dt`; the final step is shortened to land
/// on `horizon`.
pub fn integrate(s: &NonlinearSubsystem, x0: &[f64], horizon: f64, dt: f64) -> Result<NlTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "step must be positive",
        });
    }
    let steps = (horizon / dt).ceil().max(0.0) as usize;
    let mut x = x0.to_vec();
    let mut out = NlTrajectory {
        samples: Vec::with_capacity(steps + 1),
    };
    out.samples.push(NlSample {
        t: 0.0,
        x: x.clone(),
        v: s.eval(&x),
    });
    let f = &s.field;
    for j in 1..=steps {
        let t_prev = dt * (j - 1) as f64;
        let t = if j == steps { horizon } else { dt * j as f64 };
        let h = t - t_prev;
        let k1 = f(&x);
        let k2 = f(&axpy(&x, h / 2.0, &k1));
        let k3 = f(&axpy(&x, h / 2.0, &k2));
        let k4 = f(&axpy(&x, h, &k3));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|xi| !xi.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        out.samples.push(NlSample {
            t,
            x: x.clone(),
            v: s.eval(&x),
        });
    }
    Ok(out)
}
