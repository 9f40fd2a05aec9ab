//! Weights, the slope filtration and the exceptional subspace of a pair.
//!
//!     cargo run --example filtration [pair.json]

use twisted_heights::filtration::{
    exceptional_subspace, filtration, quotient_pair, restrict_pair, special_case_t, weight,
};
use twisted_heights::{suite, Subspace, TwistedPair};

fn load() -> twisted_heights::Result<TwistedPair> {
    match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v = serde_json::from_str(&text)
                .map_err(|e| twisted_heights::Error::Parse(e.to_string()))?;
            TwistedPair::from_json(&v)
        }
        None => Ok(suite::curated_pairs(0)
            .into_iter()
            .find(|(n, _)| n == "special4")
            .unwrap()
            .1),
    }
}

fn main() -> twisted_heights::Result<()> {
    let pair = load()?;
    let n = pair.n();
    for i in 0..n {
        let u = Subspace::span(n, &[twisted_heights::linalg::unit(n, i)]);
        println!("w(<e{}>) = {}", i + 1, weight(&pair, &u));
    }

    let chain = filtration(&pair)?;
    for w in &chain.chain[1..] {
        println!(
            "dim {}  weight {}  slope {}",
            w.space.dim(),
            w.weight,
            w.slope.as_ref().unwrap()
        );
    }

    let t = exceptional_subspace(&pair)?;
    println!("exceptional subspace: {t}");
    match special_case_t(&pair) {
        Ok(blocks) => println!("as index blocks: {blocks:?}"),
        Err(e) => println!("no block description: {e}"),
    }

    if !t.is_zero() && !t.is_full() {
        let r = restrict_pair(&pair, &t)?;
        let qt = quotient_pair(&pair, &t)?;
        println!("restriction to T: {}", r.to_json());
        println!("normalized quotient by T: {}", qt.to_json());
    }
    Ok(())
}
