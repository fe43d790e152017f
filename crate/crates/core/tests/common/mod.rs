#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use onoc_fcnn::costmodel::CoreAllocation;
use onoc_fcnn::model::{build_period_schedule, FcnnSpec, PeriodSchedule, WorkloadParams};

pub type Q = BigRational;

pub fn q(v: u64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn tenths(k: u64) -> Q {
    Q::new(BigInt::from(k), BigInt::from(10))
}

/// Epoch time written out directly from the model definition, sharing no
/// code with the crate's cost model.
pub fn naive_epoch_time(sizes: &[u64], w: &WorkloadParams, fp: &[u64], lambda: u64) -> Q {
    let l = sizes.len() - 1;
    let mut t = w.d_input.clone();
    for i in 1..=2 * l {
        let (layer, forward) = if i <= l {
            (i, true)
        } else {
            (2 * l - i + 1, false)
        };
        let mi = fp[layer - 1];
        let n = sizes[layer];
        let x = q(n.div_ceil(mi));
        let work = if forward {
            w.alpha[i - 1].clone()
        } else {
            w.beta[i - l - 1].clone() * q(sizes[layer - 1] + 1)
        };
        t += work * x / &w.c;
        let sends = i != l && i != 2 * l;
        if sends {
            t += w.b[i - 1].clone() * q(mi.div_ceil(lambda));
        }
        t += &w.zeta[i - 1];
    }
    t
}

/// Transitions counted per core from raw per-period core lists: one for
/// every idle/active switch, with the core idle before and after the epoch.
pub fn naive_transitions(period_cores: &[Vec<u64>], m: u64) -> u64 {
    let mut total = 0;
    for c in 0..m {
        let mut prev = false;
        for cores in period_cores {
            let now = cores.contains(&c);
            total += u64::from(now != prev);
            prev = now;
        }
        total += u64::from(prev);
    }
    total
}

/// Longest run of consecutive periods any core stays active.
pub fn naive_hot_run(period_cores: &[Vec<u64>], m: u64) -> u64 {
    let mut best = 0;
    for c in 0..m {
        let mut run = 0;
        for cores in period_cores {
            run = if cores.contains(&c) { run + 1 } else { 0 };
            best = best.max(run);
        }
    }
    best
}

pub struct Instance {
    pub fcnn: FcnnSpec,
    pub schedule: PeriodSchedule,
    pub workload: WorkloadParams,
    pub m: u64,
    pub lambda: u64,
}

pub fn random_sizes(rng: &mut ChaCha8Rng, l: usize, lo: u64, hi: u64) -> Vec<u64> {
    (0..=l).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Random workload with positive `alpha`, `beta`, `B` and `C = 1`.
pub fn random_workload(rng: &mut ChaCha8Rng, l: usize) -> WorkloadParams {
    let mut w = WorkloadParams::uniform(l, q(1), q(1), q(1), q(1));
    w.alpha = (0..l).map(|_| tenths(rng.gen_range(1..=200))).collect();
    w.beta = (0..l).map(|_| tenths(rng.gen_range(1..=200))).collect();
    w.b = (0..2 * l).map(|_| q(rng.gen_range(1..=2000))).collect();
    w
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    l_range: (usize, usize),
    n_hi: u64,
    m_hi: u64,
) -> Instance {
    let l = rng.gen_range(l_range.0..=l_range.1);
    let sizes = random_sizes(rng, l, 1, n_hi);
    let fcnn = FcnnSpec::new(sizes, 1, 4).unwrap();
    let schedule = build_period_schedule(&fcnn).unwrap();
    let workload = random_workload(rng, l);
    Instance {
        fcnn,
        schedule,
        workload,
        m: rng.gen_range(1..=m_hi),
        lambda: [1, 2, 8, 64][rng.gen_range(0..4)],
    }
}

/// Random feasible per-layer counts: `1 <= m_i <= min(n_i, m)`.
pub fn random_allocation(rng: &mut ChaCha8Rng, sizes: &[u64], m: u64) -> CoreAllocation {
    let fp: Vec<u64> = sizes[1..]
        .iter()
        .map(|&n| rng.gen_range(1..=n.min(m)))
        .collect();
    CoreAllocation::from_forward(&fp)
}
