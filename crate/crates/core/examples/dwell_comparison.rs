//! Three dwell bounds side by side: tangent ellipses, the coarser
//! weighted-distance bound, and the ball construction for general Lyapunov
//! functions.
//!
//! ```bash
//! cargo run -p dwell --example dwell_comparison
//! ```

use dwell::nonlinear::{affine_as_nonlinear, nl_dwell_time, nl_enclosing_level};
use dwell::{dwell_time, dwell_time_weak, enclosing_level, PlanarAffineMode};

fn compare(old: &PlanarAffineMode, new: &PlanarAffineMode, k: f64) -> dwell::Result<()> {
    let (vo, vn) = (old.lyapunov(), new.lyapunov());
    let k_i = enclosing_level(&vo, &vn, k)?;
    let tangent = dwell_time(vn.eps, k, k_i)?;
    let weak = dwell_time_weak(new, &vo.center, &vn.center, k)?;
    let (bo, bn) = (affine_as_nonlinear(old), affine_as_nonlinear(new));
    let ball = nl_dwell_time(&bn, k, nl_enclosing_level(&bo, &bn, k)?)?;
    println!("{:>4} -> {:<4} k_i {:>10.6}  tangent {:>9.6}  weak {:>9.6}  ball {:>9.6}", old.id(), new.id(), k_i, tangent, weak, ball);
    Ok(())
}

fn main() -> dwell::Result<()> {
    let k = 0.2;
    let on = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0])?;
    let off = on.with_offset("OFF", [0.0, 0.0]);
    compare(&off, &on, k)?;
    compare(&on, &off, k)?;

    // |b| = |c| makes the level sets circles; tangent and ball bounds coincide.
    let a = PlanarAffineMode::new("A", -1.0, 2.0, -2.0, -3.0, [1.0, 1.0])?;
    let b = PlanarAffineMode::new("B", -1.0, 2.0, -2.0, -3.0, [-2.0, 0.5])?;
    compare(&a, &b, k)?;

    // Different weights: the enclosing level comes from a boundary scan.
    let c = PlanarAffineMode::new("C", -2.0, 1.0, -1.0, -1.0, [0.0, 2.0])?;
    let d = PlanarAffineMode::new("D", -1.0, 2.0, -3.0, -4.0, [1.0, 0.0])?;
    compare(&c, &d, k)?;
    compare(&d, &c, k)?;
    Ok(())
}
