//! Optimal allocation against FGP and FNP, on optical and electrical rings.

use onoc_fcnn::cli::{compare, RunConfig};

fn main() -> onoc_fcnn::error::Result<()> {
    let mut config = RunConfig::example();
    config.fcnn.layer_sizes = vec![784, 2000, 1500, 1000, 500, 10];
    let prep = config.prepare()?;
    let report = compare(&prep, prep.config.run.strategy, 200, None)?;
    print!("{}", report.to_csv()?);
    Ok(())
}
