//! Exercise the measurement instruments on synthetic profiles with known
//! regularity: oscillation decay exponents, the borderline BMO flag, and
//! the Lipschitz / log-Lipschitz moduli.
//!
//! ```bash
//! cargo run --release --example regularity_instruments
//! ```

use phaselab::*;

fn main() -> Result<()> {
    let grid = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, 4096)?;
    let radii = dyadic_radii(&grid, 0.5);

    // C^{1,1} kink in the gradient: u = x|x|/2, so u' = |x| and the decay
    // exponent should sit near 1
    let c11 = DiscreteFunction::sample(grid.clone(), |x| x[0] * x[0].abs() / 2.0);
    let decay = oscillation_decay_fit(&c11, &[0.0, 0.0], &radii, 2.0)?;
    println!(
        "u = x|x|/2:      alpha-hat {:.4} (r^2 {:.4})",
        decay.fit.exponent, decay.fit.r_squared
    );

    // gradient with a prescribed Holder exponent s
    for s in [0.3, 0.5, 0.7] {
        let u = DiscreteFunction::sample(grid.clone(), |x| {
            x[0].signum() * x[0].abs().powf(s + 1.0) / (s + 1.0)
        });
        let decay = oscillation_decay_fit(&u, &[0.0, 0.0], &radii, 2.0)?;
        println!(
            "|u'| = |x|^{s}:   alpha-hat {:.4} (target {s}), r^2 {:.4}",
            decay.fit.exponent, decay.fit.r_squared
        );
    }

    // a Lipschitz-but-not-C1 kink has zero decay: the BMO regime flag
    let kink = DiscreteFunction::sample(grid.clone(), |x| x[0].abs());
    let decay = oscillation_decay_fit(&kink, &[0.0, 0.0], &radii, 2.0)?;
    println!(
        "u = |x|:         alpha-hat {:.4}, BMO regime flagged: {}",
        decay.fit.exponent, decay.bmo_regime
    );

    // the log-Lipschitz modulus: x log|x| has K near 1 under
    // omega(t) = t (1 + |log t|), while its plain Lipschitz constant
    // diverges logarithmically with resolution
    println!();
    for n in [1024usize, 4096] {
        let g = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, n)?;
        let u = DiscreteFunction::sample(g, |x| {
            if x[0] == 0.0 {
                0.0
            } else {
                x[0] * x[0].abs().ln()
            }
        });
        let log_lip = modulus_of_continuity(&u, ModulusForm::LogLipschitz);
        let lip = modulus_of_continuity(&u, ModulusForm::Lipschitz);
        println!(
            "x log|x| at N={n}: log-Lip K {:.4}   plain Lip K {:.4} (diverges like log N)",
            log_lip.constant, lip.constant
        );
    }

    // the vector monotonicity constant 2^{2-p}, attained at antipodal pairs
    println!();
    for p in [2.0, 3.0, 4.0] {
        let min = vector_monotonicity_probe(p, 100_000, 42);
        println!(
            "monotonicity probe p={p}: min ratio {:.9} vs 2^(2-p) = {:.9}",
            min,
            (2.0f64).powf(2.0 - p)
        );
    }
    Ok(())
}
