//! Sweep of the square-wave half period for neuron set 2: where the dwell
//! condition holds the switch states stay in the level set, and below it they
//! start to escape.
//!
//! ```bash
//! cargo run -p dwell --release --example parameter_sweep
//! ```

use dwell::{certify, neuron_modes, simulate, square_wave_signal, verify_trapping, ModeTable, NeuronParams, Vec2};
use rayon::prelude::*;

fn main() -> dwell::Result<()> {
    let k = 0.2;
    let grid: Vec<f64> = (0..=16).map(|i| 28.0 + 0.5 * i as f64).collect();
    let rows = grid
        .par_iter()
        .map(|&t| {
            let p = NeuronParams::new(0.04, 0.5, 1.0, 0.04, 1.0).with_periods(t, t);
            let cert = certify(&p, k)?;
            let (off, on) = neuron_modes(&p)?;
            let modes = ModeTable::new([off, on])?;
            let signal = square_wave_signal(&p, 30)?;
            let traj = simulate(&modes, &signal, &Vec2::zeros(), t / 1000.0, None)?;
            let report = verify_trapping(&traj, &modes, k)?;
            Ok((t, cert.dwell_ok, report.overall, report.switch_failures()))
        })
        .collect::<dwell::Result<Vec<_>>>()?;
    println!("{:>6}  {:>8}  {:>8}  {:>8}", "T", "dwell_ok", "trapped", "escapes");
    for (t, dwell_ok, trapped, escapes) in rows {
        println!("{t:>6.1}  {dwell_ok:>8}  {trapped:>8}  {escapes:>8}");
    }
    Ok(())
}
