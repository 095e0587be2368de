//! One-dimensional search: golden-section minimisation and bisection.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimiser of a unimodal `f` on [a, b], bracketed to width `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
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
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // keep the best point actually evaluated
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Shrinks [lo, hi], where `pred(lo) != pred(hi)`, to width `tol` and
/// returns the midpoint of the final bracket.
pub fn bisect<E, P>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, E>
where
    P: FnMut(f64) -> Result<bool, E>,
{
    let left = pred(lo)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
