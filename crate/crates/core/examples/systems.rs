//! Systems of inequalities: enumeration, reduction to a twisted pair, and the gap principle.
//!
//!     cargo run --release --example systems

use num_rational::BigRational;
use twisted_heights::bounds::reduce_system;
use twisted_heights::infima::{gap_experiment, scan_system};
use twisted_heights::linalg::q;
use twisted_heights::suite;

fn main() -> twisted_heights::Result<()> {
    for (name, sys) in suite::scanner_suite() {
        let red = reduce_system(&sys)?;
        let rep = scan_system(&sys, &q(12), 12)?;
        let holds = rep.solutions.iter().all(|s| s.reduction_holds);
        println!(
            "{name}: {} solutions up to height 12, {} inside T', reduction inequality {}",
            rep.solutions.len(),
            rep.solutions.iter().filter(|s| s.in_t_prime).count(),
            if holds { "holds" } else { "FAILS" },
        );
        println!("  delta = {}, Q = H^{}", red.delta, red.q_exponent);
    }

    let mut rng = suite::rng(0);
    for n in 2..=4 {
        let pair = suite::random_pair(&mut rng, n);
        let a = BigRational::from_integer((n * n).into());
        let g = gap_experiment(&pair, &q(1), &a, 10)?;
        println!(
            "gap, n = {n}: {} solutions spanning a {}-dimensional subspace",
            g.solutions.len(),
            g.span.dim()
        );
    }
    Ok(())
}
