use crate::planar::{Mat2, PlanarAffineMode, Vec2};

/// Discriminant magnitude below which the repeated-eigenvalue formula is used.
const REPEATED_TOL: f64 = 1e-12;

/// `e^{At}` for any real 2x2 matrix.
///
/// With `p = tr(A)/2` and `N = A - pI` we have `N^2 = (disc/4) I`, where
/// `disc = (a - d)^2 + 4bc`, so the exponential is
/// `e^{pt} (C(t) I + S(t) N)` with `(C, S)` one of
/// `(cosh mu t, sinh(mu t)/mu)`, `(cos w t, sin(w t)/w)` or `(1, t)`.
pub fn expm(m: &Mat2, t: f64) -> Mat2 {
    let p = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let n = m - Mat2::identity() * p;
    let disc = (m[(0, 0)] - m[(1, 1)]).powi(2) + 4.0 * m[(0, 1)] * m[(1, 0)];
    let (cosine, sine) = if disc.abs() < REPEATED_TOL {
        (1.0, t)
    } else if disc > 0.0 {
        let mu = 0.5 * disc.sqrt();
        ((mu * t).cosh(), (mu * t).sinh() / mu)
    } else {
        let w = 0.5 * (-disc).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    };
    (Mat2::identity() * cosine + n * sine) * (p * t).exp()
}

/// `e^{At}` for a mode's system matrix.
pub fn matrix_exp_2x2(m: &PlanarAffineMode, t: f64) -> Mat2 {
    expm(&m.matrix(), t)
}

/// Exact state after time `t` under mode `m`: `x_u + e^{At} (x0 - x_u)`.
pub fn affine_flow(m: &PlanarAffineMode, x0: &Vec2, t: f64) -> Vec2 {
    let xu = m.equilibrium();
    xu + matrix_exp_2x2(m, t) * (x0 - xu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn rk4_matrix(a: &Mat2, t: f64, dt: f64) -> Mat2 {
        let steps = (t / dt).round() as usize;
        let mut x = Mat2::identity();
        for _ in 0..steps {
            let k1 = a * x;
            let k2 = a * (x + k1 * (dt / 2.0));
            let k3 = a * (x + k2 * (dt / 2.0));
            let k4 = a * (x + k3 * dt);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        x
    }

    #[test]
    fn diagonal() {
        let e = expm(&Mat2::new(-1.0, 0.0, 0.0, -1.0), 1.0);
        let want = (-1f64).exp();
        assert!((e - Mat2::new(want, 0.0, 0.0, want)).amax() < 1e-15);
    }

    #[test]
    fn rotation() {
        let e = expm(&Mat2::new(0.0, 1.0, -1.0, 0.0), FRAC_PI_2);
        assert!((e - Mat2::new(0.0, 1.0, -1.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn neuron_matrix_against_rk4() {
        let m = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap();
        let exact = matrix_exp_2x2(&m, 1.0);
        let num = rk4_matrix(&m.matrix(), 1.0, 1e-5);
        assert!((exact - num).amax() < 1e-9);
    }

    #[test]
    fn flow_trivia() {
        let m = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap();
        let xu = m.equilibrium();
        assert!((affine_flow(&m, &xu, 7.3) - xu).norm() < 1e-15);
        let x0 = Vec2::new(0.3, -0.2);
        assert!((affine_flow(&m, &x0, 0.0) - x0).norm() < 1e-15);
    }

    #[test]
    fn repeated_branch_is_continuous() {
        // (a - d)^2 + 4bc = 4 - 4 = 0
        let base = Mat2::new(-1.0, 1.0, -1.0, -3.0);
        let e0 = expm(&base, 2.0);
        for db in [1e-8, -1e-8] {
            let e1 = expm(&(base + Mat2::new(0.0, db, 0.0, 0.0)), 2.0);
            assert!((e1 - e0).amax() < 1e-7);
        }
        assert!((e0 - rk4_matrix(&base, 2.0, 1e-4)).amax() < 1e-12);
    }
}
