//! Dependency-free SVG panels: 1-D solution profiles and log-log fit
//! plots. Output is deterministic text.

use std::fmt::Write as _;

use crate::mesh::DiscreteFunction;

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 50.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{title}</text>",
        MARGIN
    );
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"40\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * MARGIN,
        H - 40.0 - MARGIN
    );
    s
}

fn map(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    if hi > lo {
        out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
    } else {
        0.5 * (out_lo + out_hi)
    }
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let mut s = format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"");
    for (x, y) in points {
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    s.push_str("\"/>\n");
    s
}

fn axis_labels(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{x_lo:.3e}</text>",
        H - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{x_hi:.3e}</text>",
        W - MARGIN,
        H - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{y_lo:.3e}</text>",
        H - MARGIN
    );
    let _ = writeln!(s, "<text x=\"4\" y=\"52\" font-family=\"monospace\" font-size=\"11\">{y_hi:.3e}</text>");
    s
}

/// Profile plot of a 1-D discrete function; `None` in 2-D.
pub fn profile_svg(u: &DiscreteFunction, title: &str) -> Option<String> {
    let grid = u.grid();
    if grid.dim() != 1 {
        return None;
    }
    let n = grid.node_count();
    let xs: Vec<f64> = (0..n).map(|i| grid.node_coord(i)[0]).collect();
    let (x_lo, x_hi) = (xs[0], xs[n - 1]);
    let y_lo = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let y_hi = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (y_hi - y_lo).max(1e-12);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

    let mut s = header(title);
    // zero line
    if y_lo < 0.0 && y_hi > 0.0 {
        let y0 = map(0.0, y_lo, y_hi, H - MARGIN, 40.0);
        let _ = writeln!(
            s,
            "<line x1=\"{MARGIN}\" y1=\"{y0:.2}\" x2=\"{}\" y2=\"{y0:.2}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>",
            W - MARGIN
        );
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(u.values())
        .map(|(&x, &v)| {
            (
                map(x, x_lo, x_hi, MARGIN, W - MARGIN),
                map(v, y_lo, y_hi, H - MARGIN, 40.0),
            )
        })
        .collect();
    s.push_str(&polyline(&pts, "#1a56a0"));
    s.push_str(&axis_labels(x_lo, x_hi, y_lo, y_hi));
    s.push_str("</svg>\n");
    Some(s)
}

/// Log-log scatter of (scale, value) pairs with the fitted power law.
pub fn loglog_svg(pairs: &[(f64, f64)], exponent: f64, constant: f64, title: &str) -> String {
    let usable: Vec<(f64, f64)> =
        pairs.iter().filter(|(r, v)| *r > 0.0 && *v > 0.0).map(|&(r, v)| (r.ln(), v.ln())).collect();
    let mut s = header(title);
    if usable.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let x_lo = usable.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = usable.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = usable.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_hi = usable.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let pad_x = 0.05 * (x_hi - x_lo).max(1e-12);
    let pad_y = 0.05 * (y_hi - y_lo).max(1e-12);
    let (x_lo, x_hi, y_lo, y_hi) = (x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y);

    // fitted line ln v = exponent * ln r + ln constant
    if constant > 0.0 {
        let line: Vec<(f64, f64)> = [x_lo, x_hi]
            .iter()
            .map(|&lx| {
                (
                    map(lx, x_lo, x_hi, MARGIN, W - MARGIN),
                    map(exponent * lx + constant.ln(), y_lo, y_hi, H - MARGIN, 40.0),
                )
            })
            .collect();
        s.push_str(&polyline(&line, "#c0392b"));
    }
    for (lx, ly) in &usable {
        let cx = map(*lx, x_lo, x_hi, MARGIN, W - MARGIN);
        let cy = map(*ly, y_lo, y_hi, H - MARGIN, 40.0);
        let _ = writeln!(s, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"#1a56a0\"/>");
    }
    s.push_str(&axis_labels(x_lo.exp(), x_hi.exp(), y_lo.exp(), y_hi.exp()));
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">slope {exponent:.4}</text>",
        W - MARGIN
    );
    s.push_str("</svg>\n");
    s
}
