//! Closed-form core allocation next to the exhaustive optimum.

use onoc_fcnn::costmodel::CostModel;
use onoc_fcnn::model::{
    build_period_schedule, derive_workload, FcnnSpec, OnocConfig, WorkloadOverrides,
};
use onoc_fcnn::optimizer::{brute_force_allocation, closed_form_allocation, gap_between};
use onoc_fcnn::rational::to_f64;

fn main() -> onoc_fcnn::error::Result<()> {
    let fcnn = FcnnSpec::new(vec![784, 1000, 500, 10], 1, 4)?;
    let onoc = OnocConfig::default();
    let workload = derive_workload(&fcnn, &onoc, &WorkloadOverrides::default())?;
    let schedule = build_period_schedule(&fcnn)?;
    let model = CostModel::new(&schedule, &workload, onoc.lambda_max);

    let closed = closed_form_allocation(&model, &onoc)?;
    let brute = brute_force_allocation(&model, &onoc)?;
    println!("layer  closed  brute");
    for (i, (c, b)) in closed
        .allocation
        .forward()
        .iter()
        .zip(brute.allocation.forward())
        .enumerate()
    {
        println!("{:>5}  {c:>6}  {b:>5}", i + 1);
    }
    for clamp in &closed.clamps {
        println!("layer {} clamped: {:?}", clamp.period, clamp.reason);
    }
    let gap = gap_between(&closed, &brute);
    println!(
        "epoch time {:.1} vs {:.1} cycles ({:+.2}%), mean core error {:.2}%",
        to_f64(&closed.epoch_time),
        to_f64(&brute.epoch_time),
        gap.time_diff_pct,
        gap.core_error_pct
    );
    Ok(())
}
