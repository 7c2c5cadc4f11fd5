//! Brute-force cross-checks of the closed forms on seeded random modes.
//!
//! ```bash
//! cargo run -p dwell --example oracle_check -- 500 4096 7
//! ```

use dwell::oracle::{boundary_max, fd_decay_check, inclusion_check, run_suite, DEFAULT_SEED};
use dwell::{enclosing_level, PlanarAffineMode};

fn main() -> dwell::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let instances = args.first().and_then(|s| s.parse().ok()).unwrap_or(200);
    let samples = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4096);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);

    let old = PlanarAffineMode::new("A", -1.0, 2.0, -3.0, -4.0, [0.0, 0.0])?;
    let new = old.with_offset("B", [2.0, -1.0]);
    let (vo, vn) = (old.lyapunov(), new.lyapunov());
    let k_i = enclosing_level(&vo, &vn, 1.0)?;
    println!("closed form k_i    {k_i:.12}");
    println!("boundary max       {:.12}", boundary_max(&vo, 1.0, &vn, samples)?);
    let inc = inclusion_check(&vo.sublevel(1.0), &vn.sublevel(k_i), samples)?;
    println!("inclusion          {} (worst {:.3e})", inc.holds, inc.worst_violation);
    let decay = fd_decay_check(&old, 1000, seed)?;
    println!("decay ratio        worst {:.3e}, witness {:.3e}", decay.worst, decay.witness);

    let summary = run_suite(instances, samples, seed)?;
    println!("{}", serde_json::to_string_pretty(&summary.to_json()).unwrap());
    Ok(())
}
