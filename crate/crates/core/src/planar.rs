//! Planar affine modes `x' = Ax + B` with `A = [[a, b], [c, d]]`, their
//! diagonal quadratic Lyapunov functions and the tangent-ellipse dwell times.
//!
//! Every admissible mode satisfies `abcd < 0` together with the Hurwitz
//! conditions `ad - bc > 0`, `a + d < 0`. Under those conditions
//!
//! ```text
//! V(x) = |c| (x1 - xu1)^2 + |b| (x2 - xu2)^2,      dV/dt <= -2 min(|a|, |d|) V
//! ```
//!
//! so sublevel sets of `V` are axis-aligned ellipses around the equilibrium,
//! and a level-`k` ellipse of one mode fits inside a level-`k_i` ellipse of
//! another mode that touches it from outside.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_max;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Relative tolerance under which two weight pairs count as identical.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Angles of the coarse scan in [`enclosing_level_general`].
const SCAN_ANGLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeId(pub String);

impl ModeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeId {
    fn from(s: &str) -> Self {
        ModeId(s.to_string())
    }
}

impl From<String> for ModeId {
    fn from(s: String) -> Self {
        ModeId(s)
    }
}

/// One subsystem `x' = Ax + B`. Constructed only through [`PlanarAffineMode::new`],
/// so every value in circulation has passed [`validate_mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarAffineMode {
    id: ModeId,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    offset: Vec2,
}

impl PlanarAffineMode {
    pub fn new(id: impl Into<ModeId>, a: f64, b: f64, c: f64, d: f64, offset: [f64; 2]) -> Result<Self> {
        let m = PlanarAffineMode {
            id: id.into(),
            a,
            b,
            c,
            d,
            offset: Vec2::new(offset[0], offset[1]),
        };
        validate_mode(&m)?;
        Ok(m)
    }

    pub fn id(&self) -> &ModeId {
        &self.id
    }

    /// Matrix entries `(a, b, c, d)`.
    pub fn entries(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.b, self.c, self.d)
    }

    /// The inhomogeneous term `B`.
    pub fn offset(&self) -> Vec2 {
        self.offset
    }

    pub fn field(&self, x: &Vec2) -> Vec2 {
        self.matrix() * x + self.offset
    }

    /// Same matrix, different inhomogeneous term and id.
    pub fn with_offset(&self, id: impl Into<ModeId>, offset: [f64; 2]) -> Self {
        PlanarAffineMode {
            id: id.into(),
            offset: Vec2::new(offset[0], offset[1]),
            ..self.clone()
        }
    }

    pub fn equilibrium(&self) -> Vec2 {
        equilibrium(self)
    }

    pub fn lyapunov(&self) -> QuadraticLyapunov {
        lyapunov(self)
    }

    /// Decay rate `2 min(|a|, |d|)` of the mode's Lyapunov function.
    pub fn decay_rate(&self) -> f64 {
        2.0 * self.a.abs().min(self.d.abs())
    }
}

/// Checks `abcd < 0` (all entries nonzero) and the Hurwitz conditions.
pub fn validate_mode(m: &PlanarAffineMode) -> Result<()> {
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    for v in [a, b, c, d, m.offset.x, m.offset.y] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mode entry",
                value: v,
                reason: "must be finite",
            });
        }
    }
    let product = a * b * c * d;
    if a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0 || product >= 0.0 {
        return Err(Error::SignConditionViolated {
            id: m.id.clone(),
            product,
        });
    }
    let det = a * d - b * c;
    if det <= 0.0 {
        return Err(Error::NotHurwitz {
            id: m.id.clone(),
            inequality: format!("ad - bc = {det} must be > 0"),
        });
    }
    let trace = a + d;
    if trace >= 0.0 {
        return Err(Error::NotHurwitz {
            id: m.id.clone(),
            inequality: format!("a + d = {trace} must be < 0"),
        });
    }
    Ok(())
}

/// Solves `A x + B = 0` by Cramer's rule.
pub fn equilibrium(m: &PlanarAffineMode) -> Vec2 {
    let det = m.a * m.d - m.b * m.c;
    let (b1, b2) = (m.offset.x, m.offset.y);
    Vec2::new(-(m.d * b1 - m.b * b2) / det, -(m.a * b2 - m.c * b1) / det)
}

pub fn lyapunov(m: &PlanarAffineMode) -> QuadraticLyapunov {
    QuadraticLyapunov {
        w1: m.c.abs(),
        w2: m.b.abs(),
        center: equilibrium(m),
        eps: m.decay_rate(),
    }
}

/// `A^T P + P A - 2 sign(ac) diag(-ac, bd)` with `P = sign(ac) diag(-c, b)`.
/// Zero (up to rounding) for every admissible mode.
pub fn lyapunov_residual(m: &PlanarAffineMode) -> Mat2 {
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let s = (a * c).signum();
    let p = Mat2::new(-s * c, 0.0, 0.0, s * b);
    let a_mat = m.matrix();
    let rhs = Mat2::new(-2.0 * s * a * c, 0.0, 0.0, 2.0 * s * b * d);
    a_mat.transpose() * p + p * a_mat - rhs
}

/// `V(x) = w1 (x1 - c1)^2 + w2 (x2 - c2)^2` with decay rate `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLyapunov {
    pub w1: f64,
    pub w2: f64,
    pub center: Vec2,
    pub eps: f64,
}

impl QuadraticLyapunov {
    pub fn new(w1: f64, w2: f64, center: [f64; 2], eps: f64) -> Result<Self> {
        for (name, v) in [("w1", w1), ("w2", w2), ("eps", eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(QuadraticLyapunov {
            w1,
            w2,
            center: Vec2::new(center[0], center[1]),
            eps,
        })
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        let dx = x - self.center;
        self.w1 * dx.x * dx.x + self.w2 * dx.y * dx.y
    }

    pub fn gradient(&self, x: &Vec2) -> Vec2 {
        let dx = x - self.center;
        Vec2::new(2.0 * self.w1 * dx.x, 2.0 * self.w2 * dx.y)
    }

    /// Point of `{V = k}` at ellipse angle `phi`.
    pub fn boundary_point(&self, k: f64, phi: f64) -> Vec2 {
        Vec2::new(
            self.center.x + (k / self.w1).sqrt() * phi.cos(),
            self.center.y + (k / self.w2).sqrt() * phi.sin(),
        )
    }

    pub fn same_weights(&self, other: &QuadraticLyapunov) -> bool {
        let close = |p: f64, q: f64| (p - q).abs() <= WEIGHT_TOL * p.abs().max(q.abs());
        close(self.w1, other.w1) && close(self.w2, other.w2)
    }

    /// `sqrt(V(other_center))` in this function's weights: the weighted
    /// distance between two centers.
    pub fn weighted_distance(&self, other_center: &Vec2) -> f64 {
        self.eval(other_center).sqrt()
    }

    pub fn sublevel(&self, k: f64) -> SublevelSet {
        SublevelSet { lyapunov: *self, k }
    }
}

/// Closed set `{x : V(x) <= k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublevelSet {
    pub lyapunov: QuadraticLyapunov,
    pub k: f64,
}

impl SublevelSet {
    pub fn contains(&self, x: &Vec2) -> bool {
        self.lyapunov.eval(x) <= self.k
    }

    /// `n` equiangular points of the boundary ellipse.
    pub fn boundary(&self, n: usize) -> Vec<Vec2> {
        (0..n)
            .map(|i| self.lyapunov.boundary_point(self.k, TAU * i as f64 / n as f64))
            .collect()
    }
}

fn check_level(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLevels(format!("level k = {k} must be finite and >= 0")))
    }
}

fn shared_shift(old: &QuadraticLyapunov, new: &QuadraticLyapunov) -> Result<f64> {
    if !old.same_weights(new) {
        return Err(Error::WeightMismatch {
            old: (old.w1, old.w2),
            new: (new.w1, new.w2),
        });
    }
    Ok(new.weighted_distance(&old.center))
}

/// Smallest level of `new` whose sublevel set contains `{old <= k}`, for
/// functions sharing their weights: `(sqrt(k) + s)^2` with `s` the weighted
/// distance between the centers.
pub fn enclosing_level_shared(old: &QuadraticLyapunov, new: &QuadraticLyapunov, k: f64) -> Result<f64> {
    check_level(k)?;
    let s = shared_shift(old, new)?;
    Ok((k.sqrt() + s).powi(2))
}

/// The other tangency root `(sqrt(k) - s)^2`: the level at which `{new = .}`
/// first touches `{old = k}` from inside.
pub fn touching_level_inner(old: &QuadraticLyapunov, new: &QuadraticLyapunov, k: f64) -> Result<f64> {
    check_level(k)?;
    let s = shared_shift(old, new)?;
    Ok((k.sqrt() - s).powi(2))
}

/// Enclosing level for arbitrary weights: the maximum of `new` over the
/// boundary of `{old <= k}`, by a 1024-angle scan followed by golden-section
/// refinement of the best bracket.
pub fn enclosing_level_general(old: &QuadraticLyapunov, new: &QuadraticLyapunov, k: f64) -> Result<f64> {
    check_level(k)?;
    if k == 0.0 {
        return Ok(new.eval(&old.center));
    }
    let on_boundary = |phi: f64| new.eval(&old.boundary_point(k, phi));
    let step = TAU / SCAN_ANGLES as f64;
    let (best_i, mut best) = (0..SCAN_ANGLES)
        .map(|i| (i, on_boundary(step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let centre = step * best_i as f64;
    let (_, refined) = golden_max(on_boundary, centre - step, centre + step, 1e-12);
    if refined > best {
        best = refined;
    }
    Ok(best)
}

/// Uses the closed form when weights agree, the boundary search otherwise.
pub fn enclosing_level(old: &QuadraticLyapunov, new: &QuadraticLyapunov, k: f64) -> Result<f64> {
    if old.same_weights(new) {
        enclosing_level_shared(old, new, k)
    } else {
        enclosing_level_general(old, new, k)
    }
}

/// `ln(k_i / k) / eps_new`: the time mode `new` needs to bring level `k_i`
/// back down to `k`.
pub fn dwell_time(eps_new: f64, k: f64, k_i: f64) -> Result<f64> {
    if !(eps_new > 0.0 && eps_new.is_finite()) {
        return Err(Error::InvalidLevels(format!("decay rate {eps_new} must be > 0")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidLevels(format!("level k = {k} must be > 0")));
    }
    if !(k_i >= k && k_i.is_finite()) {
        return Err(Error::InvalidLevels(format!("enclosing level {k_i} below k = {k}")));
    }
    Ok((k_i / k).ln() / eps_new)
}

/// Coarser dwell time that replaces the weighted distance by
/// `max(sqrt|c|, sqrt|b|) * |center_new - center_old|`.
pub fn dwell_time_weak(new: &PlanarAffineMode, center_old: &Vec2, center_new: &Vec2, k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidLevels(format!("level k = {k} must be > 0")));
    }
    let (_, b, c, _) = new.entries();
    let gain = c.abs().sqrt().max(b.abs().sqrt());
    let shift = (center_new - center_old).norm();
    Ok((1.0 + gain * shift / k.sqrt()).ln() / new.decay_rate())
}

/// Modes keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeTable {
    modes: BTreeMap<ModeId, PlanarAffineMode>,
}

impl ModeTable {
    pub fn new(modes: impl IntoIterator<Item = PlanarAffineMode>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for m in modes {
            let id = m.id.clone();
            if table.insert(id.clone(), m).is_some() {
                return Err(Error::DuplicateModeId(id));
            }
        }
        Ok(ModeTable { modes: table })
    }

    pub fn get(&self, id: &ModeId) -> Result<&PlanarAffineMode> {
        self.modes.get(id).ok_or_else(|| Error::UnknownModeId(id.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PlanarAffineMode> {
        self.modes.values()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwellStep {
    pub from: ModeId,
    pub to: ModeId,
    pub k_i: f64,
    pub tau: f64,
}

/// Enclosing level and minimal dwell for each consecutive pair of `order`.
pub fn min_dwell_schedule(modes: &ModeTable, order: &[ModeId], k: f64) -> Result<Vec<DwellStep>> {
    order
        .windows(2)
        .map(|pair| {
            let old = modes.get(&pair[0])?.lyapunov();
            let new = modes.get(&pair[1])?.lyapunov();
            let k_i = enclosing_level(&old, &new, k)?;
            Ok(DwellStep {
                from: pair[0].clone(),
                to: pair[1].clone(),
                k_i,
                tau: dwell_time(new.eps, k, k_i)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set1_on() -> PlanarAffineMode {
        PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap()
    }

    fn w32(center: [f64; 2]) -> QuadraticLyapunov {
        QuadraticLyapunov::new(3.0, 2.0, center, 2.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(set1_on().entries() == (-0.75, 0.15, -1.0, -0.35));
        let err = PlanarAffineMode::new("x", -1.0, 1.0, 1.0, -1.0, [0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::SignConditionViolated { .. }));
        // abcd = 24 > 0 even though the matrix is Hurwitz.
        let err = PlanarAffineMode::new("x", 1.0, 2.0, -3.0, -4.0, [0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::SignConditionViolated { .. }));
        assert!(PlanarAffineMode::new("x", -1.0, 2.0, -3.0, -4.0, [0.0, 0.0]).is_ok());
        // abcd = -3 < 0, ad - bc = 6.5 > 0, a + d = 1.5 >= 0
        let err = PlanarAffineMode::new("x", 1.0, 2.0, -3.0, 0.5, [0.0, 0.0]).unwrap_err();
        match err {
            Error::NotHurwitz { inequality, .. } => assert!(inequality.contains("a + d")),
            e => panic!("{e:?}"),
        }
        let err = PlanarAffineMode::new("x", -1.0, 0.0, -1.0, -1.0, [0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::SignConditionViolated { .. }));
        // abcd < 0 but det < 0
        let err = PlanarAffineMode::new("x", -2.0, 3.0, 1.0, 1.0, [0.0, 0.0]).unwrap_err();
        match err {
            Error::NotHurwitz { inequality, .. } => assert!(inequality.contains("ad - bc")),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn equilibria() {
        let x = set1_on().equilibrium();
        assert!((x - Vec2::new(0.848_484_848_484_848_5, -2.424_242_424_242_424)).norm() < 1e-12);
        let m2 = PlanarAffineMode::new("ON", -0.04, 0.5, -1.0, -0.04, [1.0, 0.0]).unwrap();
        let x2 = m2.equilibrium();
        assert!((x2 - Vec2::new(0.079_744_816_586_921_85, -1.993_620_414_673_046_3)).norm() < 1e-12);
        let off = set1_on().with_offset("OFF", [0.0, 0.0]);
        assert_eq!(off.equilibrium(), Vec2::zeros());
    }

    #[test]
    fn lyapunov_construction() {
        let v = set1_on().lyapunov();
        assert_eq!((v.w1, v.w2), (1.0, 0.15));
        assert!((v.eps - 0.7).abs() < 1e-15);
        let m = PlanarAffineMode::new("m", -1.0, 2.0, -3.0, -4.0, [0.0, 0.0]).unwrap();
        let v = m.lyapunov();
        assert_eq!((v.w1, v.w2, v.eps), (3.0, 2.0, 2.0));
        assert_eq!(v.center, Vec2::zeros());
        assert!(lyapunov_residual(&m).amax() < 1e-12);
        let sym = PlanarAffineMode::new("s", -2.0, 1.0, -1.0, -2.0, [0.0, 0.0]).unwrap();
        assert_eq!(sym.decay_rate(), 4.0);
    }

    #[test]
    fn evaluation() {
        let v = QuadraticLyapunov::new(1.0, 0.15, [0.0, 0.0], 0.7).unwrap();
        assert!((v.eval(&Vec2::new(1.0, 2.0)) - 1.6).abs() < 1e-15);
        assert_eq!(v.eval(&v.center), 0.0);
        assert_eq!(w32([1.0, 1.0]).eval(&Vec2::new(2.0, 2.0)), 5.0);
        assert!(QuadraticLyapunov::new(0.0, 1.0, [0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn shared_levels() {
        // Oracle: max/min of V_new over 2^20 boundary samples.
        let (old, new) = (w32([0.0, 0.0]), w32([1.0, 1.0]));
        let ki = enclosing_level_shared(&old, &new, 1.0).unwrap();
        assert!((ki - 10.472_135_954_998_992).abs() < 1e-9);
        let inner = touching_level_inner(&old, &new, 1.0).unwrap();
        assert!((inner - 1.527_864_045_001_008_8).abs() < 1e-9);
        assert!((enclosing_level_shared(&old, &old, 0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((touching_level_inner(&old, &old, 0.7).unwrap() - 0.7).abs() < 1e-15);
        // s = sqrt(k): the inner root collapses to zero.
        let far = w32([1.0 / 3f64.sqrt(), 0.0]);
        assert!(touching_level_inner(&old, &far, 1.0).unwrap() < 1e-15);
        let other = QuadraticLyapunov::new(3.0, 2.5, [1.0, 1.0], 2.0).unwrap();
        assert!(matches!(
            enclosing_level_shared(&old, &other, 1.0),
            Err(Error::WeightMismatch { .. })
        ));
    }

    #[test]
    fn neuron_enclosing_level() {
        let on = set1_on();
        let off = on.with_offset("OFF", [0.0, 0.0]);
        let kbar = enclosing_level_shared(&off.lyapunov(), &on.lyapunov(), 0.2).unwrap();
        assert!((kbar - 2.933_359_422_553_238).abs() < 1e-12);
    }

    #[test]
    fn general_levels() {
        let (old, new) = (w32([0.0, 0.0]), w32([1.0, 1.0]));
        let g = enclosing_level_general(&old, &new, 1.0).unwrap();
        let s = enclosing_level_shared(&old, &new, 1.0).unwrap();
        assert!((g - s).abs() / s < 1e-9);
        let unit = QuadraticLyapunov::new(1.0, 1.0, [0.0, 0.0], 1.0).unwrap();
        let stretched = QuadraticLyapunov::new(4.0, 1.0, [0.0, 0.0], 1.0).unwrap();
        assert!((enclosing_level_general(&unit, &stretched, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(enclosing_level_general(&old, &new, 0.0).unwrap(), 5.0);
        assert!(enclosing_level_general(&old, &new, -1.0).is_err());
    }

    #[test]
    fn dwell_times() {
        let ki = (1.0 + 5f64.sqrt()).powi(2);
        assert!((dwell_time(2.0, 1.0, ki).unwrap() - 1.174_359_005_619_548_8).abs() < 1e-12);
        assert_eq!(dwell_time(2.0, 1.0, 1.0).unwrap(), 0.0);
        let tau = dwell_time(0.7, 0.2, 2.933_359_422_553_238).unwrap();
        assert!((tau - 3.836).abs() < 1e-3);
        assert!(dwell_time(2.0, 0.0, 1.0).is_err());
        assert!(dwell_time(2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn weak_dwell_time() {
        let m = PlanarAffineMode::new("m", -1.0, 2.0, -3.0, -4.0, [0.0, 0.0]).unwrap();
        let o = Vec2::zeros();
        let t = dwell_time_weak(&m, &o, &Vec2::new(1.0, 1.0), 1.0).unwrap();
        assert!((t - 0.619_113_159_731_166_3).abs() < 1e-12);
        assert_eq!(dwell_time_weak(&m, &o, &o, 1.0).unwrap(), 0.0);
        let on = set1_on();
        let t = dwell_time_weak(&on, &o, &on.equilibrium(), 0.2).unwrap();
        assert!((t - 2.726_478_780_365_550_5).abs() < 1e-12);
        assert!(dwell_time_weak(&m, &o, &o, 0.0).is_err());
    }

    #[test]
    fn schedules() {
        let on = set1_on();
        let off = on.with_offset("OFF", [0.0, 0.0]);
        let table = ModeTable::new([off, on]).unwrap();
        let order: Vec<ModeId> = vec!["OFF".into(), "ON".into(), "OFF".into()];
        let steps = min_dwell_schedule(&table, &order, 0.2).unwrap();
        assert_eq!(steps.len(), 2);
        for s in &steps {
            assert!((s.tau - 3.836).abs() < 1e-3);
        }
        assert!(min_dwell_schedule(&table, &order[..1], 0.2).unwrap().is_empty());
        let bad: Vec<ModeId> = vec!["OFF".into(), "X".into()];
        assert!(matches!(min_dwell_schedule(&table, &bad, 0.2), Err(Error::UnknownModeId(_))));
        let dup = ModeTable::new([set1_on(), set1_on()]);
        assert!(matches!(dup, Err(Error::DuplicateModeId(_))));
    }
}
