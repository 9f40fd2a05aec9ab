//! Wedge products, Grassmann heights and the orthogonal-complement duality.
//!
//!     cargo run --example exterior

use twisted_heights::exterior::{hat_vectors, orth_complement, subspace_height_sq, wedge};
use twisted_heights::filtration::exterior_pair;
use twisted_heights::linalg::qvec;
use twisted_heights::{suite, Subspace};

fn main() -> twisted_heights::Result<()> {
    let a = qvec(&[1, 2, 0, 1]);
    let b = qvec(&[0, 1, 3, -1]);
    println!(
        "a ^ b = {:?}",
        wedge(&[a.clone(), b.clone()])?
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
    );

    let t = Subspace::span(4, &[a, b]);
    let tp = orth_complement(&t);
    println!("T = {t}");
    println!("T-perp = {tp}");
    println!(
        "H_2(T)^2 = {}, H_2(T-perp)^2 = {}",
        subspace_height_sq(&t),
        subspace_height_sq(&tp)
    );

    let rows = vec![qvec(&[1, 0, 0]), qvec(&[1, 1, 0]), qvec(&[1, 1, 1])];
    for v in hat_vectors(&rows, 2)? {
        println!(
            "hat vector {:?}",
            v.iter().map(|c| c.to_string()).collect::<Vec<_>>()
        );
    }

    let ex = exterior_pair(&suite::e3(), 2)?;
    println!(
        "second exterior power of E3:\n{}",
        serde_json::to_string_pretty(&ex.to_json()).unwrap()
    );
    Ok(())
}
