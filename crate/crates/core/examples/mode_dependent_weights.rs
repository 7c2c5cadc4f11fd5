//! Three modes with different Lyapunov weights: per-transition dwell
//! schedule, a signal that respects it, and the trapping checks.
//!
//! ```bash
//! cargo run -p dwell --example mode_dependent_weights
//! ```

use dwell::{min_dwell_schedule, simulate, verify_trapping, ModeId, ModeTable, PlanarAffineMode, SwitchingSignal};

fn main() -> dwell::Result<()> {
    let modes = ModeTable::new([
        PlanarAffineMode::new("A", -1.0, 2.0, -3.0, -4.0, [1.0, 0.0])?,
        PlanarAffineMode::new("B", -2.0, 1.0, -1.0, -1.0, [0.0, 2.0])?,
        PlanarAffineMode::new("C", -1.5, -1.0, 2.0, -2.0, [-1.0, -1.0])?,
    ])?;
    let k = 0.5;
    let order: Vec<ModeId> = ["A", "B", "C", "A"].into_iter().map(ModeId::from).collect();
    let schedule = min_dwell_schedule(&modes, &order, k)?;
    for s in &schedule {
        println!("{} -> {}  k_i = {:.6}  tau = {:.6}", s.from, s.to, s.k_i, s.tau);
    }

    // Each entered mode is held 10% longer than its dwell bound.
    let mut t = 1.0;
    let mut switches = vec![(0.0, order[0].clone())];
    for s in &schedule {
        switches.push((t, s.to.clone()));
        t += 1.1 * s.tau;
    }
    let signal = SwitchingSignal::new(switches, t)?;

    let start = modes.get(&order[0])?.equilibrium();
    let traj = simulate(&modes, &signal, &start, 1e-3, None)?;
    let report = verify_trapping(&traj, &modes, k)?;
    for c in &report.switch_checks {
        println!("t = {:>8.4}  leaving {}  V = {:.6} <= {k}: {}", c.t, c.mode, c.value, c.pass);
    }
    println!("trapping holds: {}", report.overall);
    Ok(())
}
