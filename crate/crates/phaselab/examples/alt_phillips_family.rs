//! Sweep the singularity parameter γ through the one-phase family and
//! check the measured growth exponent against the sharp rate p/(p−γ).
//!
//! ```bash
//! cargo run --release --example alt_phillips_family
//! ```

use phaselab::*;

fn main() -> Result<()> {
    let n = 1024;
    println!("{:>5} {:>5} {:>12} {:>12} {:>10} {:>10}", "p", "gamma", "rate p/(p-g)", "measured", "r^2", "sup err %");
    for p in [2.0, 3.0] {
        for gamma in [0.25, 0.5, 0.75, 1.0] {
            let c = profile_constant(p, gamma, 1.0)?;
            let beta = p / (p - gamma);
            let spec = ProblemSpec {
                p,
                gamma,
                lambda_plus: 1.0,
                lambda_minus: 0.0,
                source: SourceSpec::zero(),
                // boundary value picked so the free boundary sits at 0
                boundary: BoundarySpec::Ends { left: 0.0, right: c },
                domain: Domain::Interval { a: -1.0, b: 1.0 },
            };
            let grid = Grid::build(spec.domain, n)?;
            let report = minimize(&spec, &grid, &SolverParams::default(), None)?;

            let oracle = alt_phillips_profile(p, gamma, 1.0, 0.0, &grid)?;
            let err = report
                .u
                .values()
                .iter()
                .zip(oracle.u.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / c;

            let fb = free_boundary(&report.u);
            let radii = dyadic_radii(&grid, 0.5);
            let fit = growth_fit(&report.u, &fb, &radii)?;
            println!(
                "{p:>5} {gamma:>5} {beta:>12.4} {:>12.4} {:>10.5} {:>10.4}",
                fit.exponent,
                fit.r_squared,
                100.0 * err
            );
        }
    }
    Ok(())
}
