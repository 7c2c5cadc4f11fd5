//! Non-spiking certificates for the two neuron parameter sets.
//!
//! ```bash
//! cargo run -p dwell --example neuron_certificate
//! ```

use dwell::{certify, NeuronParams};

fn main() -> dwell::Result<()> {
    let sets = [
        ("set 1, T = 3.84", NeuronParams::new(0.75, 0.15, 1.0, 0.35, 1.0).with_periods(3.84, 3.84).with_threshold(2.6)),
        ("set 2, T = 32", NeuronParams::new(0.04, 0.5, 1.0, 0.04, 1.0).with_periods(32.0, 32.0)),
        ("set 2, T = 35.7", NeuronParams::new(0.04, 0.5, 1.0, 0.04, 1.0).with_periods(35.7, 35.7)),
    ];
    for (name, p) in sets {
        let c = certify(&p, 0.2)?;
        println!("{name}");
        println!("  ON equilibrium  ({:.6}, {:.6})", c.v_on, c.h_on);
        println!("  k_bar           {:.6}", c.k_bar);
        println!("  tau_d           {:.6}", c.tau_d);
        println!("  v_bound         {:.6}", c.v_bound);
        println!("  dwell_ok        {}", c.dwell_ok);
        if let Some(ok) = c.nonspiking_ok {
            println!("  v_th = {} > v_bound: {ok}", p.v_th.unwrap());
        }
        println!("  verdict         {}", if c.passes() { "certified" } else { "not certified" });
    }
    Ok(())
}
