//! Small derivative-free 1-D search helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` and returns `(argmax, max)`.
/// The end points are evaluated too, so a monotone `f` returns its larger
/// end point instead of an interior approximation of it.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // A bracket narrower than one ulp stops the loop on its own.
    let mut iters = 0;
    while (b - a) > tol && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for (x, fx) in [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Bisection for the first point where `pred` turns true on `[lo, hi]`,
/// assuming `pred(lo)` is false and `pred(hi)` is true.
pub fn bisect<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
