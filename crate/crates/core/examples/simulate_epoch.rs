//! One training epoch on the optical ring, checked against the cost model.

use onoc_fcnn::costmodel::CostModel;
use onoc_fcnn::mapping::{map, Strategy};
use onoc_fcnn::model::{
    build_period_schedule, derive_workload, EnergyParams, FcnnSpec, OnocConfig, WorkloadOverrides,
};
use onoc_fcnn::netsim::simulate_epoch;
use onoc_fcnn::optimizer::closed_form_allocation;
use onoc_fcnn::rational::to_f64;

fn main() -> onoc_fcnn::error::Result<()> {
    let fcnn = FcnnSpec::new(vec![784, 1000, 500, 10], 1, 4)?;
    let onoc = OnocConfig {
        energy: EnergyParams {
            static_power_watts: 10.0,
            dynamic_joules_per_bit: 0.5e-12,
            joules_per_work_unit: 1e-11,
            joules_per_state_transition: 1e-12,
        },
        ..OnocConfig::default()
    };
    let workload = derive_workload(&fcnn, &onoc, &WorkloadOverrides::default())?;
    let schedule = build_period_schedule(&fcnn)?;
    let model = CostModel::new(&schedule, &workload, onoc.lambda_max);
    let alloc = closed_form_allocation(&model, &onoc)?.allocation;
    let mapping = map(Strategy::Orrm, &alloc, onoc.m, &schedule)?;

    let report = simulate_epoch(&mapping, &model, &fcnn, &onoc.energy, &onoc.clock_hz)?;
    for p in &report.per_period {
        println!(
            "period {} {:?}: compute {:.1}, comm {:.2}, slots {}",
            p.period,
            p.phase,
            to_f64(&p.compute),
            to_f64(&p.comm),
            p.slot_count
        );
    }
    println!(
        "total {:.2} cycles, {} transitions",
        to_f64(&report.total_time),
        report.transitions
    );
    println!(
        "matches cost model: {}",
        report.total_time == model.epoch_time(&alloc)?
    );
    println!("energy {:.3e} J", report.energy.total());
    Ok(())
}
