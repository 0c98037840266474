//! Measurement instruments for the regularity quantities the theory
//! predicts: free boundary location, growth and nondegeneracy constants,
//! flux balance across the interface, gradient oscillation decay, and
//! moduli of continuity.
//!
//! Scale policy shared by the radius fits: radii below 4h are grid
//! pollution and radii above half the distance to the domain boundary are
//! boundary pollution; both are discarded, and a fit needs at least four
//! surviving dyadic scales.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Grid};
use crate::model::ProblemSpec;
use crate::numerics::{det_sum, linear_fit};

/// Sign class of a node value: the positivity set is {u > 0}, the zero
/// set belongs to the λ₋ phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Positive,
    Zero,
    Negative,
}

impl Phase {
    pub fn of(v: f64) -> Phase {
        if v > 0.0 {
            Phase::Positive
        } else if v < 0.0 {
            Phase::Negative
        } else {
            Phase::Zero
        }
    }
}

/// One interpolated zero crossing on a grid edge.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterfacePoint {
    pub position: [f64; 2],
    /// Node indices of the crossed edge.
    pub edge: (usize, usize),
    /// Phase labels of the two edge endpoints.
    pub side_a: Phase,
    pub side_b: Phase,
}

impl InterfacePoint {
    /// Whether this point lies on the boundary of the positivity set.
    pub fn touches_positive(&self) -> bool {
        self.side_a == Phase::Positive || self.side_b == Phase::Positive
    }
}

/// The free boundary: all sign-change edges with their crossings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FreeBoundary {
    pub points: Vec<InterfacePoint>,
}

impl FreeBoundary {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points on ∂{u > 0}.
    pub fn positive_points(&self) -> Vec<&InterfacePoint> {
        self.points.iter().filter(|pt| pt.touches_positive()).collect()
    }
}

/// Interpolated zero crossings of `u` along the grid edges (including the
/// cell diagonals in 2-D). Empty when `u` has one sign.
pub fn free_boundary(u: &DiscreteFunction) -> FreeBoundary {
    let grid = u.grid();
    let values = u.values();
    let mut points: Vec<InterfacePoint> = Vec::new();
    for (a, b) in grid.edges() {
        let (va, vb) = (values[a], values[b]);
        let crossing = (va > 0.0 && vb < 0.0)
            || (va < 0.0 && vb > 0.0)
            || (va == 0.0) != (vb == 0.0);
        if !crossing {
            continue;
        }
        let t = if va == vb { 0.0 } else { va / (va - vb) };
        let xa = grid.node_coord(a);
        let xb = grid.node_coord(b);
        let position = [xa[0] + t * (xb[0] - xa[0]), xa[1] + t * (xb[1] - xa[1])];
        // node-exact zeros are met by several edges; keep one point each
        if points
            .iter()
            .any(|p| p.position[0] == position[0] && p.position[1] == position[1])
        {
            continue;
        }
        points.push(InterfacePoint {
            position,
            edge: (a, b),
            side_a: Phase::of(va),
            side_b: Phase::of(vb),
        });
    }
    FreeBoundary { points }
}

/// Least-squares fit in log-log coordinates over a set of scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
    /// Scales that actually entered the fit, strictly increasing.
    pub scales: Vec<f64>,
}

fn distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

fn dist_to_boundary(grid: &Grid, x: &[f64; 2]) -> f64 {
    let lo = grid.domain().lower();
    let len = grid.domain().lengths();
    let dx = (x[0] - lo[0]).min(lo[0] + len[0] - x[0]);
    if grid.dim() == 1 {
        dx
    } else {
        let dy = (x[1] - lo[1]).min(lo[1] + len[1] - x[1]);
        dx.min(dy)
    }
}

/// Radii admissible for a fit centered at `center`: within [4h, R/2] for
/// R the distance to the domain boundary.
fn usable_radii(grid: &Grid, center: &[f64; 2], radii: &[f64]) -> Vec<f64> {
    let h = grid.h_max();
    let r_outer = 0.5 * dist_to_boundary(grid, center);
    let mut out: Vec<f64> = radii
        .iter()
        .copied()
        .filter(|&r| r >= 4.0 * h - 1e-12 && r <= r_outer + 1e-12)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Dyadic radii 4h, 8h, 16h, ... up to `r_max`.
pub fn dyadic_radii(grid: &Grid, r_max: f64) -> Vec<f64> {
    let mut r = 4.0 * grid.h_max();
    let mut out = Vec::new();
    while r <= r_max {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Most interior free boundary point (fits want room around the center).
fn most_interior_point<'a>(
    grid: &Grid,
    points: &[&'a InterfacePoint],
) -> Result<&'a InterfacePoint> {
    points
        .iter()
        .max_by(|a, b| {
            dist_to_boundary(grid, &a.position)
                .partial_cmp(&dist_to_boundary(grid, &b.position))
                .unwrap()
        })
        .copied()
        .ok_or(Error::EmptyFreeBoundary)
}

/// Fit `log sup_{B_r} u⁺` against `log r` at a free boundary point (the
/// most interior one). The exponent estimates the one-phase growth rate.
pub fn growth_fit(u: &DiscreteFunction, fb: &FreeBoundary, radii: &[f64]) -> Result<FitResult> {
    let grid = u.grid();
    let positive = fb.positive_points();
    let center = most_interior_point(grid, &positive)?.position;
    let usable = usable_radii(grid, &center, radii);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut scales = Vec::new();
    for &r in &usable {
        let sup = grid
            .ball_nodes(&center, r)
            .into_iter()
            .fold(0.0f64, |m, i| m.max(u.values()[i]));
        if sup > 0.0 {
            xs.push(r.ln());
            ys.push(sup.ln());
            scales.push(r);
        }
    }
    if scales.len() < 4 {
        return Err(Error::InsufficientScales(scales.len()));
    }
    let fit = linear_fit(&xs, &ys);
    Ok(FitResult {
        exponent: fit.slope,
        constant: fit.intercept.exp(),
        r_squared: fit.r_squared,
        scales,
    })
}

/// Linear growth and strong nondegeneracy constants near ∂{u > 0}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Nondegeneracy {
    /// min over positive-phase nodes of u(X) / dist(X, ∂{u>0}).
    pub c_growth: f64,
    /// min over radii of sup_{B_r} u⁺ / r at the free boundary.
    pub c_sup: f64,
    /// (radius, sup_{B_r} u⁺ / r) pairs behind `c_sup`.
    pub per_radius: Vec<(f64, f64)>,
}

pub fn nondegeneracy_check(
    u: &DiscreteFunction,
    fb: &FreeBoundary,
    radii: &[f64],
) -> Result<Nondegeneracy> {
    let grid = u.grid();
    let positive_points = fb.positive_points();
    if positive_points.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let positive_nodes: Vec<usize> =
        (0..grid.node_count()).filter(|&i| u.values()[i] > 0.0).collect();
    if positive_nodes.is_empty() {
        return Err(Error::NoPositivePhase);
    }

    let mut c_growth = f64::INFINITY;
    for &i in &positive_nodes {
        let x = grid.node_coord(i);
        let d = positive_points
            .iter()
            .map(|p| distance(&x, &p.position))
            .fold(f64::INFINITY, f64::min);
        if d > 1e-12 {
            c_growth = c_growth.min(u.values()[i] / d);
        }
    }

    let center = most_interior_point(grid, &positive_points)?.position;
    let usable = usable_radii(grid, &center, radii);
    if usable.is_empty() {
        return Err(Error::InsufficientScales(0));
    }
    let mut per_radius = Vec::new();
    let mut c_sup = f64::INFINITY;
    for &r in &usable {
        let sup = grid
            .ball_nodes(&center, r)
            .into_iter()
            .fold(0.0f64, |m, i| m.max(u.values()[i]));
        per_radius.push((r, sup / r));
        c_sup = c_sup.min(sup / r);
    }
    Ok(Nondegeneracy { c_growth, c_sup, per_radius })
}

/// Flux balance residual at one interface point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxEntry {
    pub position: [f64; 2],
    /// |∇u⁺|^p − |∇u⁻|^p − (λ₊−λ₋)/(p−1); `None` when skipped.
    pub residual: Option<f64>,
    pub skipped: bool,
}

/// Elements adjacent to a 2-D grid edge (one or two).
fn edge_elements(grid: &Grid, a: usize, b: usize) -> Vec<usize> {
    let n = grid.subdivisions();
    let (ia, ja) = grid.node_ij(a);
    let (ib, jb) = grid.node_ij(b);
    let (di, dj) = (ib as i64 - ia as i64, jb as i64 - ja as i64);
    let mut out = Vec::new();
    let cell_elem = |ci: i64, cj: i64, upper: bool| -> Option<usize> {
        if ci < 0 || cj < 0 || ci >= n as i64 || cj >= n as i64 {
            None
        } else {
            Some(2 * (cj as usize * n + ci as usize) + upper as usize)
        }
    };
    match (di, dj) {
        // horizontal edge: lower triangle of the cell above, upper of below
        (1, 0) => {
            out.extend(cell_elem(ia as i64, ja as i64, false));
            out.extend(cell_elem(ia as i64, ja as i64 - 1, true));
        }
        // vertical edge: upper triangle of the right cell, lower of the left
        (0, 1) => {
            out.extend(cell_elem(ia as i64, ja as i64, true));
            out.extend(cell_elem(ia as i64 - 1, ja as i64, false));
        }
        // diagonal: both triangles of its cell
        (1, 1) => {
            out.extend(cell_elem(ia as i64, ja as i64, false));
            out.extend(cell_elem(ia as i64, ja as i64, true));
        }
        _ => {}
    }
    out
}

/// Flux balance residual per interface point:
/// `|∇u⁺|^p − |∇u⁻|^p − (λ₊−λ₋)/(p−1)`. 1-D uses one-sided slopes from
/// the cells flanking the crossing; 2-D one-sided directional derivatives
/// along the interface normal estimated from the adjacent triangle
/// gradients. Points whose stencil leaves the domain are skipped.
pub fn flux_residual(u: &DiscreteFunction, fb: &FreeBoundary, spec: &ProblemSpec) -> Vec<FluxEntry> {
    let grid = u.grid();
    let values = u.values();
    let jump = (spec.lambda_plus - spec.lambda_minus) / (spec.p - 1.0);
    let mut out = Vec::with_capacity(fb.points.len());

    for pt in &fb.points {
        if grid.dim() == 1 {
            let (a, b) = pt.edge;
            let cell = a.min(b);
            let t = (pt.position[0] - grid.node_coord(a)[0]) / grid.spacing()[0];
            // flanking cells: crossing at a node uses its two cells,
            // otherwise the neighbors of the crossing cell
            let (left_cell, right_cell): (Option<usize>, Option<usize>) = if t <= 0.0 {
                (cell.checked_sub(1), Some(cell))
            } else if t >= 1.0 {
                (Some(cell), Some(cell + 1).filter(|&c| c < grid.element_count()))
            } else {
                (cell.checked_sub(1), Some(cell + 1).filter(|&c| c < grid.element_count()))
            };
            let (Some(lc), Some(rc)) = (left_cell, right_cell) else {
                out.push(FluxEntry { position: pt.position, residual: None, skipped: true });
                continue;
            };
            let slope_left = grid.element_gradient(values, lc)[0];
            let slope_right = grid.element_gradient(values, rc)[0];
            // positive side from the endpoint phases
            let right_is_positive = values[b.max(a)] > 0.0
                || (values[b.max(a)] == 0.0 && values[a.min(b)] < 0.0);
            let (plus, minus) = if right_is_positive {
                (slope_right.abs(), slope_left.abs())
            } else {
                (slope_left.abs(), slope_right.abs())
            };
            out.push(FluxEntry {
                position: pt.position,
                residual: Some(plus.powf(spec.p) - minus.powf(spec.p) - jump),
                skipped: false,
            });
        } else {
            let (a, b) = pt.edge;
            let elems = edge_elements(grid, a, b);
            if elems.len() < 2 {
                out.push(FluxEntry { position: pt.position, residual: None, skipped: true });
                continue;
            }
            let g0 = grid.element_gradient(values, elems[0]);
            let g1 = grid.element_gradient(values, elems[1]);
            let avg = [0.5 * (g0[0] + g1[0]), 0.5 * (g0[1] + g1[1])];
            let norm = (avg[0] * avg[0] + avg[1] * avg[1]).sqrt();
            if norm < 1e-14 {
                out.push(FluxEntry { position: pt.position, residual: None, skipped: true });
                continue;
            }
            // normal toward the positive phase is the gradient direction
            let nu = [avg[0] / norm, avg[1] / norm];
            // positive side: the triangle with the larger mean value
            let m0 = grid.element_mean(values, elems[0]);
            let m1 = grid.element_mean(values, elems[1]);
            let (gp, gm) = if m0 >= m1 { (g0, g1) } else { (g1, g0) };
            let plus = (gp[0] * nu[0] + gp[1] * nu[1]).abs();
            let minus = (gm[0] * nu[0] + gm[1] * nu[1]).abs();
            out.push(FluxEntry {
                position: pt.position,
                residual: Some(plus.powf(spec.p) - minus.powf(spec.p) - jump),
                skipped: false,
            });
        }
    }
    out
}

/// Oscillation decay fit with its degeneracy flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted Hölder exponent α̂ (the log-log slope divided by p);
    /// `+inf` sentinel when the oscillation vanishes identically.
    pub fit: FitResult,
    /// Fitted exponent ≈ 0: the borderline BMO-gradient regime.
    pub bmo_regime: bool,
    /// Oscillation was identically zero on every scale.
    pub degenerate: bool,
}

/// Fit of the mean gradient oscillation `⨍_{B_r} |∇u − (∇u)_r|^p`
/// against r in log-log coordinates; the decay exponent divided by p
/// estimates the gradient Hölder exponent.
pub fn oscillation_decay_fit(
    u: &DiscreteFunction,
    center: &[f64; 2],
    radii: &[f64],
    p: f64,
) -> Result<DecayFit> {
    let grid = u.grid();
    let usable = usable_radii(grid, center, radii);
    if usable.len() < 4 {
        return Err(Error::InsufficientScales(usable.len()));
    }
    let grads: Vec<[f64; 2]> = (0..grid.element_count())
        .map(|e| grid.element_gradient(u.values(), e))
        .collect();
    let centers: Vec<[f64; 2]> =
        (0..grid.element_count()).map(|e| grid.element_barycenter(e)).collect();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut scales = Vec::new();
    let mut all_zero = true;
    for &r in &usable {
        let ids: Vec<usize> = (0..grid.element_count())
            .filter(|&e| distance(&centers[e], center) <= r)
            .collect();
        if ids.is_empty() {
            continue;
        }
        let inv = 1.0 / ids.len() as f64;
        let mean = ids.iter().fold([0.0, 0.0], |m, &e| {
            [m[0] + grads[e][0] * inv, m[1] + grads[e][1] * inv]
        });
        let osc_terms: Vec<f64> = ids
            .iter()
            .map(|&e| {
                let d = [grads[e][0] - mean[0], grads[e][1] - mean[1]];
                (d[0] * d[0] + d[1] * d[1]).powf(0.5 * p)
            })
            .collect();
        let osc = det_sum(&osc_terms) * inv;
        if osc > 0.0 {
            all_zero = false;
            xs.push(r.ln());
            ys.push(osc.ln());
            scales.push(r);
        }
    }
    if all_zero {
        return Ok(DecayFit {
            fit: FitResult {
                exponent: f64::INFINITY,
                constant: 0.0,
                r_squared: 1.0,
                scales: usable,
            },
            bmo_regime: false,
            degenerate: true,
        });
    }
    if scales.len() < 4 {
        return Err(Error::InsufficientScales(scales.len()));
    }
    let fit = linear_fit(&xs, &ys);
    let alpha_hat = fit.slope / p;
    Ok(DecayFit {
        fit: FitResult {
            exponent: alpha_hat,
            constant: fit.intercept.exp(),
            r_squared: fit.r_squared,
            scales,
        },
        bmo_regime: alpha_hat.abs() < 0.05,
        degenerate: false,
    })
}

/// Modulus family for [`modulus_of_continuity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModulusForm {
    Holder(f64),
    Lipschitz,
    /// ω(t) = t (1 + |log t|), sign-safe across t = 1.
    LogLipschitz,
}

impl ModulusForm {
    fn omega(&self, t: f64) -> f64 {
        match self {
            ModulusForm::Holder(beta) => t.powf(*beta),
            ModulusForm::Lipschitz => t,
            ModulusForm::LogLipschitz => t * (1.0 + t.ln().abs()),
        }
    }
}

/// Smallest constant K with |u(X) − u(Y)| ≤ K ω(|X − Y|) over sampled
/// node pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub form: ModulusForm,
    pub constant: f64,
    /// Largest one-sided discrete slope (the exact 1-D Lipschitz constant).
    pub max_slope: f64,
    pub pairs_sampled: usize,
}

pub fn modulus_of_continuity(u: &DiscreteFunction, form: ModulusForm) -> ModulusEstimate {
    let grid = u.grid();
    let values = u.values();
    let count = grid.node_count();

    let max_slope = (0..grid.element_count()).fold(0.0f64, |m, e| {
        let g = grid.element_gradient(values, e);
        m.max((g[0] * g[0] + g[1] * g[1]).sqrt())
    });

    let mut constant = 0.0f64;
    let mut pairs = 0usize;
    let consider = |i: usize, j: usize, constant: &mut f64, pairs: &mut usize| {
        if i == j {
            return;
        }
        let d = distance(&grid.node_coord(i), &grid.node_coord(j));
        if d <= 0.0 {
            return;
        }
        let ratio = (values[i] - values[j]).abs() / form.omega(d);
        if ratio > *constant {
            *constant = ratio;
        }
        *pairs += 1;
    };

    if grid.dim() == 1 || count * count <= 20_000_000 {
        for i in 0..count {
            for j in (i + 1)..count {
                consider(i, j, &mut constant, &mut pairs);
            }
        }
    } else {
        // adjacent pairs plus a seeded random sample
        for (a, b) in grid.edges() {
            consider(a, b, &mut constant, &mut pairs);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e37_79b9);
        for _ in 0..2_000_000 {
            let i = rng.gen_range(0..count);
            let j = rng.gen_range(0..count);
            consider(i, j, &mut constant, &mut pairs);
        }
    }
    ModulusEstimate { form, constant, max_slope, pairs_sampled: pairs }
}

/// Minimum over sampled vector pairs of
/// `⟨|ξ₁|^{p−2}ξ₁ − |ξ₂|^{p−2}ξ₂, ξ₁ − ξ₂⟩ / |ξ₁ − ξ₂|^p`,
/// over random pairs plus structured antipodal ones. For p >= 2 the
/// classical monotonicity constant is 2^{2−p}, attained at ξ₂ = −ξ₁.
pub fn vector_monotonicity_probe(p: f64, trials: usize, seed: u64) -> f64 {
    let flow = |x: [f64; 2]| -> [f64; 2] {
        let norm2 = x[0] * x[0] + x[1] * x[1];
        if norm2 == 0.0 {
            [0.0, 0.0]
        } else {
            let w = norm2.powf(0.5 * p - 1.0);
            [w * x[0], w * x[1]]
        }
    };
    let ratio = |a: [f64; 2], b: [f64; 2]| -> Option<f64> {
        let d = [a[0] - b[0], a[1] - b[1]];
        let dn2 = d[0] * d[0] + d[1] * d[1];
        if dn2 < 1e-24 {
            return None;
        }
        let fa = flow(a);
        let fb = flow(b);
        let inner = (fa[0] - fb[0]) * d[0] + (fa[1] - fb[1]) * d[1];
        Some(inner / dn2.powf(0.5 * p))
    };

    let mut min = f64::INFINITY;
    // structured antipodal and near-antipodal pairs at several magnitudes
    for k in 0..32 {
        let theta = k as f64 * std::f64::consts::PI / 16.0;
        let e = [theta.cos(), theta.sin()];
        for mag in [1e-3, 0.1, 1.0, 10.0] {
            let a = [mag * e[0], mag * e[1]];
            if let Some(r) = ratio(a, [-a[0], -a[1]]) {
                min = min.min(r);
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0usize;
    while done < trials {
        let a = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let b = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if let Some(r) = ratio(a, b) {
            min = min.min(r);
            done += 1;
        }
    }
    min
}

/// Aggregate of every diagnostic the run layer can request.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RegularityReport {
    pub growth: Option<FitResult>,
    pub oscillation: Option<DecayFit>,
    pub nondegeneracy: Option<Nondegeneracy>,
    pub flux: Vec<FluxEntry>,
    pub lipschitz: Option<ModulusEstimate>,
    pub log_lipschitz: Option<ModulusEstimate>,
    pub predicted_alpha: Option<crate::model::AlphaPrediction>,
    pub interface_points: usize,
}

impl RegularityReport {
    /// Largest |residual| over the non-skipped flux entries.
    pub fn worst_flux_residual(&self) -> Option<f64> {
        self.flux
            .iter()
            .filter_map(|e| e.residual)
            .map(f64::abs)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |x| x.max(v))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;
    use crate::model::{BoundarySpec, SourceSpec};

    fn interval(n: usize) -> Grid {
        Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, n).unwrap()
    }

    fn spec(p: f64, lp: f64, lm: f64) -> ProblemSpec {
        ProblemSpec {
            p,
            gamma: 0.0,
            lambda_plus: lp,
            lambda_minus: lm,
            source: SourceSpec::zero(),
            boundary: BoundarySpec::Ends { left: -1.0, right: 1.0 },
            domain: Domain::Interval { a: -1.0, b: 1.0 },
        }
    }

    #[test]
    fn free_boundary_of_linear() {
        let u = DiscreteFunction::sample(interval(64), |x| x[0]);
        let fb = free_boundary(&u);
        assert_eq!(fb.points.len(), 1);
        assert!(fb.points[0].position[0].abs() < 1e-12);
    }

    #[test]
    fn free_boundary_of_obstacle_profile() {
        let u = DiscreteFunction::sample(interval(64), |x| {
            let xp = x[0].max(0.0);
            xp * xp / 4.0
        });
        let fb = free_boundary(&u);
        assert_eq!(fb.points.len(), 1);
        assert!(fb.points[0].position[0].abs() < 1e-12);
        assert!(fb.points[0].touches_positive());
    }

    #[test]
    fn free_boundary_empty_for_one_sign() {
        let u = DiscreteFunction::sample(interval(32), |_| 1.0);
        assert!(free_boundary(&u).is_empty());
    }

    #[test]
    fn free_boundary_sign_flip_swaps_labels() {
        let u = DiscreteFunction::sample(interval(50), |x| (3.0 * x[0]).sin());
        let fb = free_boundary(&u);
        let mut flipped = u.clone();
        for v in flipped.values_mut() {
            *v = -*v;
        }
        let fb2 = free_boundary(&flipped);
        assert_eq!(fb.points.len(), fb2.points.len());
        for (a, b) in fb.points.iter().zip(&fb2.points) {
            assert!((a.position[0] - b.position[0]).abs() < 1e-12);
            if a.side_a == Phase::Positive {
                assert_eq!(b.side_a, Phase::Negative);
            }
        }
    }

    #[test]
    fn growth_fit_linear_profile() {
        let grid = interval(512);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0));
        let fb = free_boundary(&u);
        let radii = dyadic_radii(&grid, 0.5);
        let fit = growth_fit(&u, &fb, &radii).unwrap();
        assert!((fit.exponent - 1.0).abs() <= 0.01, "exponent {}", fit.exponent);
        assert!((fit.constant - 1.0).abs() <= 0.05, "constant {}", fit.constant);
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn growth_fit_alt_phillips_rate() {
        let grid = interval(2048);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0).powf(4.0 / 3.0));
        let fb = free_boundary(&u);
        let radii = dyadic_radii(&grid, 0.5);
        let fit = growth_fit(&u, &fb, &radii).unwrap();
        assert!((fit.exponent - 4.0 / 3.0).abs() <= 0.02, "exponent {}", fit.exponent);
    }

    #[test]
    fn growth_fit_scales_with_amplitude() {
        let grid = interval(512);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0).powf(1.5));
        let scaled = DiscreteFunction::sample(grid.clone(), |x| 7.0 * x[0].max(0.0).powf(1.5));
        let radii = dyadic_radii(&grid, 0.5);
        let f1 = growth_fit(&u, &free_boundary(&u), &radii).unwrap();
        let f2 = growth_fit(&scaled, &free_boundary(&scaled), &radii).unwrap();
        assert!((f1.exponent - f2.exponent).abs() < 1e-9);
        assert!((f2.constant / f1.constant - 7.0).abs() < 1e-6);
    }

    #[test]
    fn growth_fit_needs_scales() {
        let grid = interval(16);
        let u = DiscreteFunction::sample(grid, |x| x[0].max(0.0));
        let fb = free_boundary(&u);
        assert!(matches!(
            growth_fit(&u, &fb, &[0.5]),
            Err(Error::InsufficientScales(_))
        ));
    }

    #[test]
    fn nondegeneracy_of_linear() {
        let grid = interval(512);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0));
        let fb = free_boundary(&u);
        let radii = dyadic_radii(&grid, 0.5);
        let nd = nondegeneracy_check(&u, &fb, &radii).unwrap();
        assert!((nd.c_growth - 1.0).abs() < 1e-9, "c_growth {}", nd.c_growth);
        assert!((nd.c_sup - 1.0).abs() <= 0.01, "c_sup {}", nd.c_sup);
    }

    #[test]
    fn nondegeneracy_flags_quadratic() {
        let grid = interval(1024);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0).powi(2));
        let fb = free_boundary(&u);
        let radii = dyadic_radii(&grid, 0.5);
        let nd = nondegeneracy_check(&u, &fb, &radii).unwrap();
        // quadratic growth: u(X)/dist goes to 0 near the interface
        assert!(nd.c_growth < 0.01, "c_growth {}", nd.c_growth);
    }

    #[test]
    fn flux_residual_exact_cases() {
        let n = 64;
        let grid = interval(n);
        // slopes (1, 0): u = x^+, lambda = (1, 0), p = 2
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0].max(0.0));
        let fb = free_boundary(&u);
        let entries = flux_residual(&u, &fb, &spec(2.0, 1.0, 0.0));
        assert_eq!(entries.len(), 1);
        assert!(entries[0].residual.unwrap().abs() < 1e-12);

        // slopes (2, 1): residual 4 - 1 - 3 = 0
        let u = DiscreteFunction::sample(grid.clone(), |x| if x[0] > 0.0 { 2.0 * x[0] } else { x[0] });
        let fb = free_boundary(&u);
        let entries = flux_residual(&u, &fb, &spec(2.0, 4.0, 1.0));
        assert!(entries[0].residual.unwrap().abs() < 1e-12);

        // slopes (1, 1) with jump 1: residual -1
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0]);
        let fb = free_boundary(&u);
        let entries = flux_residual(&u, &fb, &spec(2.0, 2.0, 1.0));
        assert!((entries[0].residual.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn flux_antisymmetric_under_phase_swap() {
        let n = 64;
        let grid = interval(n);
        let u = DiscreteFunction::sample(grid.clone(), |x| if x[0] > 0.0 { 1.5 * x[0] } else { 0.5 * x[0] });
        let s = spec(2.0, 3.0, 1.0);
        let r1 = flux_residual(&u, &free_boundary(&u), &s)[0].residual.unwrap();
        // swap (lambda+, u) with (lambda-, -u)
        let mut flipped = u.clone();
        for v in flipped.values_mut() {
            *v = -*v;
        }
        let s2 = ProblemSpec { lambda_plus: 3.0, lambda_minus: 1.0, ..s.clone() };
        // with phases swapped the plus side now carries slope 0.5
        let r2 = flux_residual(&flipped, &free_boundary(&flipped), &s2)[0].residual.unwrap();
        // r1 = 1.5^2 - 0.5^2 - 2 = 0; r2 = 0.5^2 - 1.5^2 - 2 = -4
        assert!((r1 - 0.0).abs() < 1e-12);
        assert!((r2 + 4.0).abs() < 1e-12);
    }

    #[test]
    fn oscillation_decay_c11_kink() {
        let grid = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, 4096).unwrap();
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0] * x[0].abs() / 2.0);
        let radii = dyadic_radii(&grid, 0.5);
        let decay = oscillation_decay_fit(&u, &[0.0, 0.0], &radii, 2.0).unwrap();
        assert!(
            decay.fit.exponent >= 0.85 && decay.fit.exponent <= 1.02,
            "alpha hat {}",
            decay.fit.exponent
        );
        assert!(!decay.bmo_regime);
    }

    #[test]
    fn oscillation_decay_recovers_gradient_exponent() {
        let grid = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, 4096).unwrap();
        let s = 0.5;
        let u = DiscreteFunction::sample(grid.clone(), |x| {
            x[0].signum() * x[0].abs().powf(s + 1.0) / (s + 1.0)
        });
        let radii = dyadic_radii(&grid, 0.5);
        let decay = oscillation_decay_fit(&u, &[0.0, 0.0], &radii, 2.0).unwrap();
        assert!((decay.fit.exponent - s).abs() <= 0.05, "alpha hat {}", decay.fit.exponent);
    }

    #[test]
    fn oscillation_decay_affine_degenerate() {
        let grid = interval(512);
        let u = DiscreteFunction::sample(grid.clone(), |x| 3.0 * x[0] - 1.0);
        let radii = dyadic_radii(&grid, 0.5);
        let decay = oscillation_decay_fit(&u, &[0.0, 0.0], &radii, 2.0).unwrap();
        assert!(decay.degenerate);
        assert!(decay.fit.exponent.is_infinite());
    }

    #[test]
    fn oscillation_decay_affine_shift_invariant() {
        let grid = interval(2048);
        let u = DiscreteFunction::sample(grid.clone(), |x| x[0] * x[0].abs() / 2.0);
        let shifted = DiscreteFunction::sample(grid.clone(), |x| {
            x[0] * x[0].abs() / 2.0 + 5.0 - 3.0 * x[0]
        });
        let radii = dyadic_radii(&grid, 0.5);
        let d1 = oscillation_decay_fit(&u, &[0.0, 0.0], &radii, 2.0).unwrap();
        let d2 = oscillation_decay_fit(&shifted, &[0.0, 0.0], &radii, 2.0).unwrap();
        assert!((d1.fit.exponent - d2.fit.exponent).abs() < 1e-10);
    }

    #[test]
    fn modulus_lipschitz_of_linear() {
        let u = DiscreteFunction::sample(interval(256), |x| x[0]);
        let m = modulus_of_continuity(&u, ModulusForm::Lipschitz);
        assert!((m.constant - 1.0).abs() < 1e-12);
        assert!((m.max_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_lipschitz_equals_max_slope_1d() {
        let u = DiscreteFunction::sample(interval(300), |x| (2.5 * x[0]).sin() + 0.3 * x[0]);
        let m = modulus_of_continuity(&u, ModulusForm::Lipschitz);
        assert!((m.constant - m.max_slope).abs() < 1e-12);
    }

    #[test]
    fn modulus_obstacle_profile() {
        let u = DiscreteFunction::sample(interval(1024), |x| {
            let xp = x[0].max(0.0);
            xp * xp / 4.0
        });
        let m = modulus_of_continuity(&u, ModulusForm::Lipschitz);
        assert!((m.constant - 0.5).abs() < 2e-3, "K {}", m.constant);
    }

    #[test]
    fn modulus_log_lipschitz_profile() {
        let grid = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, 4096).unwrap();
        let u = DiscreteFunction::sample(grid, |x| {
            if x[0] == 0.0 {
                0.0
            } else {
                x[0] * x[0].abs().ln()
            }
        });
        let m = modulus_of_continuity(&u, ModulusForm::LogLipschitz);
        assert!((m.constant - 1.0).abs() <= 0.1, "K {}", m.constant);
    }

    #[test]
    fn probe_identity_at_p2() {
        let min = vector_monotonicity_probe(2.0, 10_000, 42);
        assert!((min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_antipodal_sharp_at_p4() {
        let min = vector_monotonicity_probe(4.0, 100_000, 7);
        let c = (2.0f64).powf(2.0 - 4.0);
        assert!(min >= c * (1.0 - 1e-9), "min {min} < {c}");
        assert!(min <= c * (1.0 + 1e-6), "antipodal pairs must attain {c}, got {min}");
    }

    #[test]
    fn probe_bound_at_p3() {
        let min = vector_monotonicity_probe(3.0, 100_000, 11);
        let c = (2.0f64).powf(2.0 - 3.0);
        assert!(min >= c * (1.0 - 1e-9));
    }
}
