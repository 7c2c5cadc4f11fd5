//! Exact simulation of the neuron under a square-wave current, trapping
//! checks, and an SVG phase portrait in the system temp directory.
//!
//! ```bash
//! cargo run -p dwell --example trapping_simulation
//! ```

use dwell::svg::{Ellipse, PhasePortrait};
use dwell::{certify, neuron_modes, simulate, square_wave_signal, verify_trapping, ModeTable, NeuronParams, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = NeuronParams::new(0.75, 0.15, 1.0, 0.35, 1.0).with_periods(3.84, 3.84);
    let k = 0.2;
    let cert = certify(&p, k)?;
    let (off, on) = neuron_modes(&p)?;
    let modes = ModeTable::new([off.clone(), on.clone()])?;
    let signal = square_wave_signal(&p, 20)?;

    let traj = simulate(&modes, &signal, &Vec2::zeros(), signal.default_dt(), None)?;
    let report = verify_trapping(&traj, &modes, k)?;
    println!("samples          {}", traj.samples.len());
    println!("switch checks    {} ({} failed)", report.switch_checks.len(), report.switch_failures());
    println!("tube checks      {} ({} failed)", report.tube_checks.len(), report.tube_failures());
    println!("trapping holds   {}", report.overall);
    println!("max v            {:.6} (certified bound {:.6})", traj.max_first_coordinate(), cert.v_bound);

    let ellipse = |set, label: &str, fill: &str| Ellipse {
        set,
        label: label.into(),
        stroke: "#2c3e50".into(),
        fill: fill.into(),
    };
    let picture = PhasePortrait {
        trajectory: traj.samples.iter().map(|s| s.x).collect(),
        ellipses: vec![
            ellipse(on.lyapunov().sublevel(cert.k_bar), "N_ON^k_bar", "#ecf0f1"),
            ellipse(off.lyapunov().sublevel(k), "N_OFF^k", "#95a5a6"),
            ellipse(on.lyapunov().sublevel(k), "N_ON^k", "#95a5a6"),
        ],
        threshold: Some(cert.v_bound),
        title: "neuron set 1".into(),
    };
    let path = std::env::temp_dir().join("trapping_simulation.svg");
    std::fs::write(&path, picture.render())?;
    println!("portrait         {}", path.display());
    Ok(())
}
