//! One-dimensional root finding and maximization on an interval.

use crate::error::{invalid, Result};

/// Default resolution of the golden-section search.
pub const SEARCH_TOL: f64 = 1e-8;

/// Interior grid points sampled before golden-section refinement.
pub const PRESCAN_POINTS: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// False when the pre-scan found more than one local maximum; `x` is
    /// then the refinement of the best grid point.
    pub unimodal: bool,
    pub evaluations: usize,
}

/// Maximizes `f` on the open interval `(lo, hi)`.
///
/// `f` is first sampled on an interior grid. The best grid point's
/// neighbours bracket a golden-section search that stops once the bracket is
/// narrower than `tol`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(invalid(format!("bad search interval ({lo}, {hi}) with tol {tol}")));
    }
    let n = PRESCAN_POINTS;
    let step = (hi - lo) / (n + 1) as f64;
    let xs: Vec<f64> = (1..=n).map(|k| lo + k as f64 * step).collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut evaluations = n;

    let best = (0..n)
        .max_by(|&a, &b| ys[a].total_cmp(&ys[b]))
        .expect("grid is non-empty");
    let peaks = (0..n)
        .filter(|&k| {
            let left = k == 0 || ys[k] > ys[k - 1];
            let right = k + 1 == n || ys[k] >= ys[k + 1];
            left && right
        })
        .count();

    let mut a = if best == 0 { lo } else { xs[best - 1] };
    let mut b = if best + 1 == n { hi } else { xs[best + 1] };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    evaluations += 2;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    let (x, value) = if ys[best] > value {
        (xs[best], ys[best])
    } else {
        (x, value)
    };
    Ok(Maximum {
        x,
        value,
        unimodal: peaks <= 1,
        evaluations,
    })
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ
/// in sign (or one of them be zero).
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(invalid(format!("no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
