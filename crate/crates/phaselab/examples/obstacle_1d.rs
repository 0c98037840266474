//! Solve the classical one-phase obstacle instance (p = 2, γ = 1) and
//! compare against the closed form u(x) = ((x)⁺)²/4.
//!
//! ```bash
//! cargo run --release --example obstacle_1d
//! ```

use phaselab::*;

fn main() -> Result<()> {
    let spec = ProblemSpec {
        p: 2.0,
        gamma: 1.0,
        lambda_plus: 1.0,
        lambda_minus: 0.0,
        source: SourceSpec::zero(),
        boundary: BoundarySpec::Ends { left: 0.0, right: 0.25 },
        domain: Domain::Interval { a: -1.0, b: 1.0 },
    };
    let grid = Grid::build(spec.domain, 1024)?;

    let report = minimize(&spec, &grid, &SolverParams::default(), None)?;
    println!(
        "converged: {}   J = {:.10}   sup|u| = {:.6}   accepted steps = {}",
        report.converged,
        report.final_energy.total,
        report.sup_norm,
        report.trace.len()
    );

    // the exact minimizer solves u'' = lambda/2 on {u > 0}
    let oracle = alt_phillips_profile(2.0, 1.0, 1.0, 0.0, &grid)?;
    let err = report
        .u
        .values()
        .iter()
        .zip(oracle.u.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("sup distance to x^2/4 profile: {:.3e} ({:.4}% of scale)", err, 100.0 * err / 0.25);

    // the energy trace is monotone by construction
    let monotone = report.trace.windows(2).all(|w| w[1].energy <= w[0].energy);
    println!("energy trace monotone: {monotone}");

    // free boundary and growth rate at the contact point
    let fb = free_boundary(&report.u);
    println!("free boundary at {:?}", fb.points.iter().map(|p| p.position[0]).collect::<Vec<_>>());
    let radii = dyadic_radii(&grid, 0.5);
    let fit = growth_fit(&report.u, &fb, &radii)?;
    println!(
        "growth exponent {:.4} (exact rate p/(p-gamma) = 2), r^2 = {:.5}",
        fit.exponent, fit.r_squared
    );
    Ok(())
}
