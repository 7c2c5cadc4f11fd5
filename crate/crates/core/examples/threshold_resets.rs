//! Integrate-and-fire style resets: with a threshold below the certified
//! bound the neuron fires; above it, it never does.
//!
//! ```bash
//! cargo run -p dwell --example threshold_resets
//! ```

use std::collections::BTreeMap;

use dwell::{certify, neuron_modes, simulate, square_wave_signal, ModeId, ModeTable, NeuronParams, ResetRule, Vec2};

fn main() -> dwell::Result<()> {
    let p = NeuronParams::new(0.75, 0.15, 1.0, 0.35, 1.0).with_periods(3.84, 3.84);
    let bound = certify(&p, 0.2)?.v_bound;
    let (off, on) = neuron_modes(&p)?;
    let modes = ModeTable::new([off, on])?;
    let signal = square_wave_signal(&p, 10)?;
    let h_reset: BTreeMap<ModeId, f64> = [("ON".into(), -0.5), ("OFF".into(), -0.5)].into_iter().collect();

    for v_th in [0.5, 0.9, 1.2, bound] {
        let rule = ResetRule::new(v_th, 0.0, h_reset.clone())?;
        let traj = simulate(&modes, &signal, &Vec2::zeros(), 1e-3, Some(&rule))?;
        let first = traj.resets().next().map(|e| format!("{:.4}", e.t)).unwrap_or_else(|| "-".into());
        println!("v_th = {v_th:.4}  resets = {:>3}  first at t = {first}", traj.resets().count());
    }
    Ok(())
}
