//! Exact absolute values, the product formula and twisted heights of a few points.
//!
//!     cargo run --example heights

use twisted_heights::linalg::{qr, qvec};
use twisted_heights::places::{abs_value, height, product_formula, HeightKind};
use twisted_heights::twisted::{lower_height_bound, pair_invariants, q_int, twisted_height};
use twisted_heights::{suite, FactoredReal, Place};

fn main() -> twisted_heights::Result<()> {
    let x = qr(-360, 7);
    for v in [
        Place::Inf,
        Place::prime(2),
        Place::prime(3),
        Place::prime(5),
        Place::prime(7),
    ] {
        println!("|{x}|_{v} = {}", abs_value(&x, &v).unwrap());
    }
    println!("product over all places = {}", product_formula(&x)?);

    let p = qvec(&[6, -4, 10]);
    println!("H(6, -4, 10) = {}", height(&p, HeightKind::H)?);
    println!(
        "H_2(x)^2 as a factored real = {}",
        height(&p, HeightKind::H2Squared)?
    );

    // sqrt(2)^3 = 2^(3/2), compared exactly against 2.828 and 2.829
    let r = FactoredReal::prime_power(2.into(), qr(3, 2));
    println!(
        "2^(3/2) vs 2828/1000: {:?}",
        r.cmp_rational(&qr(2828, 1000))
    );
    println!(
        "2^(3/2) vs 2829/1000: {:?}",
        r.cmp_rational(&qr(2829, 1000))
    );

    let e1 = suite::e1();
    let inv = pair_invariants(&e1)?;
    println!("E1: Delta = {}, H_L = {}", inv.delta, inv.h_l);
    for q in [10, 100, 1000] {
        let qq = q_int(q);
        let a = twisted_height(&e1, &qq, &qvec(&[1, 0]))?;
        let b = twisted_height(&e1, &qq, &qvec(&[3, 2]))?;
        let lb = lower_height_bound(&e1, &qq)?;
        println!("Q = {q}: H(1,0) = {a}, H(3,2) = {b}, lower bound {lb}");
    }
    Ok(())
}
