//! Compute, communication and total time of one period over core counts.

use onoc_fcnn::cli::{sweep, RunConfig};

fn main() -> onoc_fcnn::error::Result<()> {
    let prep = RunConfig::example().prepare()?;
    let report = sweep(&prep, Some(2), 1, 200, None)?;
    let best = report
        .rows
        .iter()
        .min_by(|a, b| a.total.cmp(&b.total))
        .expect("non-empty range");
    eprintln!("fastest at {} cores", best.cores);
    print!("{}", report.to_csv()?);
    Ok(())
}
