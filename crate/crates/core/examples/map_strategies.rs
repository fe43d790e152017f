//! The three mapping strategies on one allocation, with their analyses.

use onoc_fcnn::costmodel::CoreAllocation;
use onoc_fcnn::mapping::{analyze, map, Strategy};
use onoc_fcnn::model::{build_period_schedule, FcnnSpec, LossParams};

fn main() -> onoc_fcnn::error::Result<()> {
    let fcnn = FcnnSpec::new(vec![4, 3, 4, 5, 3], 1, 4)?;
    let schedule = build_period_schedule(&fcnn)?;
    let alloc = CoreAllocation::from_forward(&[3, 4, 5, 3]);
    let m = 9;

    for strategy in Strategy::ALL {
        let mapping = map(strategy, &alloc, m, &schedule)?;
        let s = mapping.summary();
        let r = analyze(&mapping, &fcnn, &LossParams::default())?;
        println!(
            "{strategy}: starts {:?}, reuse {:?}",
            s.start_ids, s.reuse_counts
        );
        for (i, cores) in s.period_cores.iter().take(fcnn.depth()).enumerate() {
            println!("  period {}: {cores:?}", i + 1);
        }
        println!(
            "  transitions {} (closed form {}), hot run {}, path {} hops, IL {:.3} dB, memory {} B",
            r.transitions_simulated,
            r.transitions_closed_form,
            r.max_consecutive_periods,
            r.max_path_length,
            r.worst_insertion_loss_db,
            r.max_memory_bytes
        );
        if let Some(note) = &r.memory_note {
            println!("  memory closed form unavailable: {note}");
        }
    }
    Ok(())
}
