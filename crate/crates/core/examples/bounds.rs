//! Explicit constants, interval covers and the merge step.
//!
//!     cargo run --example bounds

use twisted_heights::bounds::{
    bound_constants, diophantine_consistency, interval_cover, merge_intervals, s1, s2,
    t0_consistency, BoundParams, THEOREMS,
};
use twisted_heights::linalg::{q, qr};

fn main() -> twisted_heights::Result<()> {
    for thm in THEOREMS {
        let p = BoundParams::new(3).delta(qr(1, 2)).eps(qr(1, 2)).r(4).s(2);
        let rep = bound_constants(thm, &p)?;
        let parts: Vec<String> = rep
            .constants
            .iter()
            .map(|c| match (&c.exact, &c.loglog10) {
                (Some(x), _) => format!("{} = {x}", c.name),
                (None, Some(ll)) => format!("log10 log10 {} = {}", c.name, ll.to_f64()),
                _ => format!(
                    "log10 {} = {}",
                    c.name,
                    c.log10.as_ref().map_or(f64::NAN, |l| l.to_f64())
                ),
            })
            .collect();
        println!("{thm:>5}: {}", parts.join(", "));
    }

    println!(
        "t0 consistency at n=2, R=2, delta=1: {}",
        t0_consistency(2, 2, &q(1))?
    );
    println!(
        "Diophantine constants consistent at n=3, eps=1/2: {}",
        diophantine_consistency(3, &qr(1, 2))?.holds()
    );
    println!(
        "cover of omega = 100 with delta = 1/2: {} intervals",
        interval_cover(&q(100), &qr(1, 2))?
    );
    let a = s1(3, &qr(1, 2), 4, &q(1000))?;
    let b = s2(3, &qr(1, 2))?;
    println!(
        "s1 = {} (bound {:.3}), s2 = {} (bound {:.3})",
        a.s, a.bound, b.s, b.bound
    );

    let m = merge_intervals(&q(1), &[q(1), q(3), q(20)], &q(2), &q(1), &q(4), 3)?;
    println!(
        "merged left endpoints (log10): {:?}",
        m.b.iter().map(|x| x.to_string()).collect::<Vec<_>>()
    );
    Ok(())
}
