//! Write a synthetic firewall log in the public export's column layout.
//!
//!     cargo run --example synthetic_log -- out.csv 20000 7

use std::path::PathBuf;

use fwlog::{synth, Error};

pub fn run_example(n: usize, seed: u64) -> fwlog::Result<Vec<u8>> {
    synth::firewall_log(n, seed).render_csv()
}

fn main() -> fwlog::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_log.csv".into()));
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let bytes = run_example(n, seed)?;
    std::fs::write(&out, bytes).map_err(|e| Error::Data(format!("{}: {e}", out.display())))?;
    println!("wrote {n} rows to {}", out.display());
    Ok(())
}
