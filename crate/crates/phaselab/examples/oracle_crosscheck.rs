//! Cross-check the three independent solution routes on coarse grids:
//! the descent solver, the multi-start brute-force minimizer, and the
//! closed-form oracles.
//!
//! ```bash
//! cargo run --release --example oracle_crosscheck
//! ```

use phaselab::*;

fn main() -> Result<()> {
    // convex instance: descent and brute force must agree tightly
    let obstacle = ProblemSpec {
        p: 2.0,
        gamma: 1.0,
        lambda_plus: 1.0,
        lambda_minus: 0.0,
        source: SourceSpec::zero(),
        boundary: BoundarySpec::Ends { left: 0.0, right: 0.25 },
        domain: Domain::Interval { a: -1.0, b: 1.0 },
    };
    let grid = Grid::build(obstacle.domain, 32)?;
    let descent = minimize(&obstacle, &grid, &SolverParams::default(), None)?;
    let brute = brute_force_minimizer_1d(&obstacle, &grid, 16, 7)?;
    let jb = total_energy(&brute, &obstacle)?.total;
    println!(
        "obstacle N=32: descent J {:.10} | brute J {:.10} | gap {:.2e}",
        descent.final_energy.total,
        jb,
        (descent.final_energy.total - jb).abs()
    );

    // nonconvex two-phase jet: brute force against the kink-scan oracle
    let jet_spec = ProblemSpec {
        p: 2.0,
        gamma: 0.0,
        lambda_plus: 2.0,
        lambda_minus: 1.0,
        source: SourceSpec::zero(),
        boundary: BoundarySpec::Ends { left: -1.0, right: 1.0 },
        domain: Domain::Interval { a: -1.0, b: 1.0 },
    };
    let grid = Grid::build(jet_spec.domain, 32)?;
    let jet = two_phase_jet_1d(-1.0, 1.0, &jet_spec, &grid)?;
    let brute = brute_force_minimizer_1d(&jet_spec, &grid, 64, 2024)?;
    let jb = total_energy(&brute, &jet_spec)?.total;
    println!(
        "jet N=32: oracle J {:.8} | brute J {:.8} | gap {:+.3}%",
        jet.energy,
        jb,
        100.0 * (jb - jet.energy) / jet.energy
    );

    // local minimality and truncation audits on the descent solution
    let audit = local_minimality_check(
        &descent.u,
        &obstacle,
        200,
        grid.h_max() * grid.h_max(),
        1e-8 * descent.final_energy.total.abs(),
        1,
    )?;
    println!(
        "minimality audit: passed {} (worst violation {:+.3e} over {} trials)",
        audit.passed, audit.worst_violation, audit.trials
    );
    let (ju, jt) = truncation_audit(&descent.u, &obstacle, 1.25)?;
    println!("truncation audit: J(u) {:.10} vs J(trunc) {:.10}", ju, jt);
    Ok(())
}
