//! Ball-based dwell time for a nonlinear subsystem with a cubic damping term,
//! checked against RK4 integration.
//!
//! ```bash
//! cargo run -p dwell --example nonlinear_ring
//! ```

use std::sync::Arc;

use dwell::nonlinear::{integrate, nl_dwell_time, nl_enclosing_level, ComparisonPair, NonlinearSubsystem, SampleBox};

/// `x' = -(x - c) - |x - c|^2 (x - c)` with `V = |x - c|^2`, so `eps = 2`.
fn cubic(center: [f64; 2]) -> NonlinearSubsystem {
    let c = center;
    NonlinearSubsystem {
        field: Arc::new(move |x: &[f64]| {
            let (e0, e1) = (x[0] - c[0], x[1] - c[1]);
            let r2 = e0 * e0 + e1 * e1;
            vec![-e0 - r2 * e0, -e1 - r2 * e1]
        }),
        equilibrium: center.to_vec(),
        lyapunov: Arc::new(move |x: &[f64]| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)),
        gradient: None,
        comparison: ComparisonPair::quadratic(1.0, 1.0),
        eps: 2.0,
    }
}

fn main() -> dwell::Result<()> {
    let (old, new) = (cubic([0.0, 0.0]), cubic([1.5, 0.5]));
    let region = SampleBox::around(&new.equilibrium, 3.0);
    new.check_sandwich(&region, 1000, 1)?;
    new.check_decay(&region, 1000, 2)?;

    let k = 0.25;
    let k_i = nl_enclosing_level(&old, &new, k)?;
    let tau = nl_dwell_time(&new, k, k_i)?;
    println!("k_i = {k_i:.6}, dwell = {tau:.6}");

    // Worst start on {V_old <= k}: the point farthest from the new equilibrium.
    let d = [1.5f64, 0.5];
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let x0 = [-k.sqrt() * d[0] / n, -k.sqrt() * d[1] / n];
    let traj = integrate(&new, &x0, tau, 1e-4)?;
    let end = traj.last().expect("non-empty");
    println!("V_new(x0) = {:.6} <= k_i", new.eval(&x0));
    println!("V_new after dwell = {:.6} <= k = {k}", end.v);
    Ok(())
}
