//! Small numerical kernels shared across the crate: deterministic
//! reductions, scalar minimization, and log-log least squares.

/// Below this length a reduction runs as a plain sequential pairwise tree;
/// above it the two halves are computed on the rayon pool. The split points
/// depend only on slice indices, so the floating-point result is identical
/// for any thread count (including one).
const PAR_CHUNK: usize = 16_384;

/// Deterministic pairwise sum.
///
/// The summation tree is fixed by the slice layout, never by scheduling,
/// so repeated runs and different `--threads` settings produce bit-identical
/// totals. Pairwise summation also keeps rounding error at O(log n).
pub fn det_sum(values: &[f64]) -> f64 {
    fn seq(v: &[f64]) -> f64 {
        if v.len() <= 32 {
            let mut s = 0.0;
            for &x in v {
                s += x;
            }
            s
        } else {
            let mid = v.len() / 2;
            seq(&v[..mid]) + seq(&v[mid..])
        }
    }
    fn par(v: &[f64]) -> f64 {
        if v.len() <= PAR_CHUNK {
            seq(v)
        } else {
            let mid = v.len() / 2;
            let (a, b) = rayon::join(|| par(&v[..mid]), || par(&v[mid..]));
            a + b
        }
    }
    par(values)
}

/// Deterministic sum of `f(i)` for `i` in `0..len` without materializing
/// the intermediate vector for small inputs.
pub fn det_sum_by<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    // Materialize and reduce: keeps the tree identical to det_sum.
    let values: Vec<f64> = (0..len).map(&f).collect();
    det_sum(&values)
}

/// Golden-section search for the minimum of a unimodal scalar function on
/// [a, b]. Returns the argmin. Tolerance is absolute in the argument.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
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
    0.5 * (a + b)
}

/// Ordinary least squares in log-log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit y = slope * x + intercept by least squares and report r^2.
/// Callers pass already-transformed (log r, log v) samples.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = det_sum(xs) / n;
    let my = det_sum(ys) / n;
    let sxx = det_sum_by(xs.len(), |i| (xs[i] - mx) * (xs[i] - mx));
    let sxy = det_sum_by(xs.len(), |i| (xs[i] - mx) * (ys[i] - my));
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res = det_sum_by(xs.len(), |i| {
        let e = ys[i] - (slope * xs[i] + intercept);
        e * e
    });
    let ss_tot = det_sum_by(ys.len(), |i| (ys[i] - my) * (ys[i] - my));
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    LineFit { slope, intercept, r_squared }
}
