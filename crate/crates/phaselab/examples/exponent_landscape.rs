//! The closed-form exponent landscape: the predicted gradient Hölder
//! exponent min{α_p, γ/(p−γ), (q−n)/((p−1)q)} with its regime labels,
//! and the integrability threshold q(p,n,γ) = n(p−γ)/(p(1−γ)).
//!
//! ```bash
//! cargo run --example exponent_landscape
//! ```

use phaselab::*;

fn main() {
    println!("predicted alpha over gamma and q (p = 2, n = 2, alpha_p = 1):");
    println!("{:>6} {:>8} {:>10} {:>16}", "gamma", "q", "alpha", "regime");
    for gamma in [0.25, 0.5, 0.75, 1.0] {
        for q in [2.0, 3.0, 6.0, f64::INFINITY] {
            let inputs = ExponentInputs::new(2.0, gamma, q, 2).with_alpha_p(1.0);
            match predicted_alpha(&inputs) {
                Ok(pred) => println!(
                    "{gamma:>6} {:>8} {:>10.4} {:>16}",
                    if q.is_infinite() { "inf".into() } else { q.to_string() },
                    pred.alpha,
                    format!("{:?}", pred.regime)
                ),
                Err(Error::BorderlineRegime { .. }) => println!(
                    "{gamma:>6} {:>8} {:>10} {:>16}",
                    if q.is_infinite() { "inf".into() } else { q.to_string() },
                    "-",
                    "borderline q<=n"
                ),
                Err(e) => println!("{gamma:>6} {q:>8} error: {e}"),
            }
        }
    }

    println!("\nintegrability threshold q(p, n, gamma):");
    println!("{:>4} {:>4} {:>8} {:>12}", "p", "n", "gamma", "q(p,n,gamma)");
    for p in [2.0, 3.0] {
        for gamma in [0.0, 0.25, 0.5, 0.75, 0.99, 1.0] {
            let q = threshold_q(p, 2, gamma);
            println!(
                "{p:>4} {:>4} {gamma:>8} {:>12}",
                2,
                if q.is_infinite() { "inf".into() } else { format!("{q:.4}") }
            );
        }
    }

    println!("\none-phase profile constants c(p, gamma, lambda+):");
    for p in [2.0, 3.0] {
        for gamma in [0.25, 0.5, 1.0] {
            let c = profile_constant(p, gamma, 1.0).unwrap();
            println!("  c({p}, {gamma}, 1) = {c:.6}  (profile c (x+)^(p/(p-gamma)))");
        }
    }

    println!("\njet slopes from the flux balance, m- = 0:");
    for (p, lp, lm) in [(2.0, 1.0, 0.0), (2.0, 5.0, 1.0), (3.0, 9.0, 1.0)] {
        println!(
            "  m+(p={p}, l+={lp}, l-={lm}) = {:.6}",
            jet_slope(p, lp, lm, 0.0)
        );
    }
}
