//! Parse a labelled firewall log and print the ingest report and class mix.
//!
//!     cargo run --example ingest -- path/to/log2.csv
//!
//! Without an argument a small synthetic log with a few broken rows is used.

use std::path::{Path, PathBuf};

use fwlog::dataset::{parse_csv, parse_csv_path, IngestReport, SchemaPolicy};
use fwlog::synth;

pub fn run_example(path: Option<&Path>) -> fwlog::Result<IngestReport> {
    let (ds, report) = match path {
        Some(p) => parse_csv_path(p, SchemaPolicy::HeaderMapped)?,
        None => {
            let mut bytes = synth::firewall_log(500, 1).render_csv()?;
            bytes.extend_from_slice(b"53,53,0,0,resolve,1,1,1,1,1,1,0\n");
            bytes.extend_from_slice(b"1,2,3,4,allow,10,5,5,2,0,1\n");
            parse_csv(bytes.as_slice(), SchemaPolicy::HeaderMapped)?
        }
    };
    println!(
        "read {} rows: {} accepted, {} rejected",
        report.rows_read, report.rows_accepted, report.rows_rejected
    );
    for r in &report.rejection_reasons {
        println!("  line {}: {}", r.line, r.reason);
    }
    print!("{}", ds.class_distribution());
    Ok(report)
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
