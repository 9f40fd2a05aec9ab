//! Successive infima by exhaustive search, Minkowski's bounds and the slope law.
//!
//!     cargo run --release --example infima

use twisted_heights::infima::{
    default_box, minkowski_from, slope_profile, successive_infima, MAX_CANDIDATES,
};
use twisted_heights::suite;
use twisted_heights::twisted::q_int;

fn main() -> twisted_heights::Result<()> {
    let pair = suite::e2();
    for q in [10, 1000] {
        let qq = q_int(q);
        let b = default_box(&pair, &qq, MAX_CANDIDATES);
        let est = successive_infima(&pair, &qq, b)?;
        println!("Q = {q}, box {b}, {} candidates", est.candidates);
        for (i, (l, x)) in est.lambdas.iter().zip(&est.achievers).enumerate() {
            println!("  lambda_{} = {l} at {x:?}", i + 1);
        }
        let m = minkowski_from(&pair, &est)?;
        println!(
            "  product {} in [{}, {}]: {} {}",
            m.product, m.lower, m.upper, m.lower_ok, m.upper_ok
        );
    }

    // log lambda_i / log Q against the filtration slopes
    for k in suite::slope_suite() {
        let qs = [q_int(100), q_int(10_000)];
        let prof = slope_profile(&k.pair, &qs, &|q| default_box(&k.pair, q, MAX_CANDIDATES))?;
        let dev = prof.max_deviation(1);
        println!(
            "{:<10} expected {:?}  max deviation at 10^4: {dev:.2e}  spans match: {:?}",
            k.name,
            prof.expected
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>(),
            prof.spans_match
        );
    }
    print!(
        "{}",
        slope_profile(&suite::e3(), &[q_int(10), q_int(100)], &|_| 20)?.to_csv()
    );
    Ok(())
}
