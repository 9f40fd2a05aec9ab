//! The deterministic full-suite report; same seed, same bytes.
//!
//!     cargo run --release --example suite_report -- [seed] [out.json]

fn main() -> twisted_heights::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args
        .next()
        .map(|s| s.parse().expect("seed is an integer"))
        .unwrap_or(0);
    let report = twisted_heights::suite::full_suite_report(seed)?;
    match args.next() {
        Some(path) => std::fs::write(path, &report)?,
        None => println!("{report}"),
    }
    Ok(())
}
