//! Neuron-to-core mapping on the ring.
//!
//! Three strategies place the cores of each FP period along the ring:
//! fixed (every period starts at core 0), round-robin (each period starts
//! after the previous one) and overlapped round-robin (each period reuses
//! some of the previous period's cores). BP periods always reuse the cores
//! of the FP period that handled the same layer.
//!
//! Core ids are 0-indexed here; reports add one.

mod analysis;

pub use analysis::*;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::costmodel::CoreAllocation;
use crate::error::{Error, Result};
use crate::model::PeriodSchedule;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Fm,
    Rrm,
    #[default]
    Orrm,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Fm, Strategy::Rrm, Strategy::Orrm];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Fm => "fm",
            Strategy::Rrm => "rrm",
            Strategy::Orrm => "orrm",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fm" => Ok(Strategy::Fm),
            "rrm" => Ok(Strategy::Rrm),
            "orrm" => Ok(Strategy::Orrm),
            other => Err(Error::invalid(
                "strategy",
                format!("unknown strategy {other:?}, expected fm, rrm or orrm"),
            )),
        }
    }
}

/// Transmission direction on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Clockwise,
    Anticlockwise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mapping {
    pub strategy: Strategy,
    /// Cores on the ring.
    pub ring_size: u64,
    /// `period_cores[i-1]`: cores of period `i` in clockwise order.
    pub period_cores: Vec<Vec<u64>>,
    /// `assignment[k-1][j]`: core holding neuron `j` of layer `k`, in both
    /// the FP and the BP period of that layer.
    pub assignment: Vec<Vec<u64>>,
    /// `r_1..r_l`; `r_1 = 0`, and all zero unless the strategy is ORRM.
    pub reuse_counts: Vec<u64>,
    /// First core of each FP period, 0-indexed.
    pub start_ids: Vec<u64>,
    #[serde(skip)]
    allocation: CoreAllocation,
}

impl Mapping {
    pub fn depth(&self) -> usize {
        self.start_ids.len()
    }

    pub fn allocation(&self) -> &CoreAllocation {
        &self.allocation
    }

    /// Cores of period `i` (1-indexed).
    pub fn cores(&self, i: usize) -> &[u64] {
        &self.period_cores[i - 1]
    }

    /// Number of neurons of period `i` held by each core of the period, in
    /// period order.
    pub fn neurons_on_cores(&self, i: usize) -> Vec<u64> {
        let l = self.depth();
        let layer = if i <= l { i } else { 2 * l - i + 1 };
        let cores = self.cores(i);
        let mut counts = vec![0u64; cores.len()];
        let owner = &self.assignment[layer - 1];
        let mut pos = 0;
        for &core in owner {
            while cores[pos] != core {
                pos += 1;
            }
            counts[pos] += 1;
        }
        counts
    }

    /// Writes one `(period, neuron, core)` row per assignment, 1-indexed,
    /// covering all `2l` periods.
    pub fn write_triples_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io {
            path: "mapping csv".into(),
            message: e.to_string(),
        };
        w.write_record(["period", "neuron", "core"]).map_err(io)?;
        let l = self.depth();
        for i in 1..=2 * l {
            let layer = if i <= l { i } else { 2 * l - i + 1 };
            for (j, core) in self.assignment[layer - 1].iter().enumerate() {
                w.serialize((i, j + 1, core + 1)).map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "mapping csv".into(),
            message: e.to_string(),
        })
    }

    /// 1-indexed view for reports.
    pub fn summary(&self) -> MappingSummary {
        MappingSummary {
            strategy: self.strategy,
            ring_size: self.ring_size,
            allocation: self.allocation.as_slice().to_vec(),
            start_ids: self.start_ids.iter().map(|s| s + 1).collect(),
            reuse_counts: self.reuse_counts.clone(),
            period_cores: self
                .period_cores
                .iter()
                .map(|p| p.iter().map(|c| c + 1).collect())
                .collect(),
        }
    }
}

/// Mapping layout with 1-indexed core ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSummary {
    pub strategy: Strategy,
    pub ring_size: u64,
    pub allocation: Vec<u64>,
    pub start_ids: Vec<u64>,
    pub reuse_counts: Vec<u64>,
    pub period_cores: Vec<Vec<u64>>,
}

/// Expected number of cores shared by two adjacent FP periods:
/// zero when the FP periods fit on the ring side by side, otherwise the
/// excess spread over the `l - 1` boundaries.
pub fn expected_reuse(fp: &[u64], m: u64) -> Result<Rational> {
    let total: u64 = fp.iter().sum();
    if total <= m {
        return Ok(Rational::zero());
    }
    let l = fp.len() as u64;
    if l < 2 {
        return Err(Error::invalid(
            "allocation",
            format!("a single period of {total} cores does not fit on {m} cores"),
        ));
    }
    Ok(rational::ratio(total - m, l - 1))
}

/// Reuse counts `r_1..r_l` of overlapped round-robin.
pub fn reuse_counts(fp: &[u64], m: u64) -> Result<Vec<u64>> {
    let target = rational::round_half_up(&expected_reuse(fp, m)?);
    let target = target.to_u64().unwrap_or(u64::MAX);
    let mut r = vec![0u64; fp.len()];
    for i in 1..fp.len() {
        r[i] = target.min(fp[i - 1] - r[i - 1]).min(fp[i]);
    }
    Ok(r)
}

fn check_fits(fp: &[u64], m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("onoc.m", "need at least one core"));
    }
    if let Some((i, &mi)) = fp.iter().enumerate().find(|(_, &mi)| mi > m) {
        return Err(Error::invalid(
            format!("allocation[period {}]", i + 1),
            format!("{mi} cores requested on a ring of {m}"),
        ));
    }
    Ok(())
}

/// Builds the mapping of `alloc` onto a ring of `m` cores.
pub fn map(
    strategy: Strategy,
    alloc: &CoreAllocation,
    m: u64,
    schedule: &PeriodSchedule,
) -> Result<Mapping> {
    alloc.validate(schedule, None)?;
    let fp = alloc.forward();
    check_fits(fp, m)?;
    let l = fp.len();
    let (starts, reuse) = match strategy {
        Strategy::Fm => (vec![0; l], vec![0; l]),
        Strategy::Rrm => {
            let mut starts = vec![0u64; l];
            for i in 1..l {
                starts[i] = (starts[i - 1] + fp[i - 1]) % m;
            }
            (starts, vec![0; l])
        }
        Strategy::Orrm => {
            let reuse = reuse_counts(fp, m)?;
            // Each period starts r_i cores before the end of the previous one.
            let mut starts = vec![0u64; l];
            for i in 1..l {
                starts[i] = (starts[i - 1] + fp[i - 1] - reuse[i]) % m;
            }
            (starts, reuse)
        }
    };

    let fp_cores: Vec<Vec<u64>> = starts
        .iter()
        .zip(fp)
        .map(|(&s, &mi)| (0..mi).map(|k| (s + k) % m).collect())
        .collect();
    let mut period_cores = fp_cores.clone();
    period_cores.extend(fp_cores.iter().rev().cloned());

    let assignment = fp_cores
        .iter()
        .enumerate()
        .map(|(k, cores)| {
            let n = schedule.layer_width(k + 1);
            let per_core = n.div_ceil(cores.len() as u64);
            (0..n).map(|j| cores[(j / per_core) as usize]).collect()
        })
        .collect();

    Ok(Mapping {
        strategy,
        ring_size: m,
        period_cores,
        assignment,
        reuse_counts: reuse,
        start_ids: starts,
        allocation: alloc.clone(),
    })
}

pub fn map_fixed(alloc: &CoreAllocation, m: u64, schedule: &PeriodSchedule) -> Result<Mapping> {
    map(Strategy::Fm, alloc, m, schedule)
}

pub fn map_round_robin(
    alloc: &CoreAllocation,
    m: u64,
    schedule: &PeriodSchedule,
) -> Result<Mapping> {
    map(Strategy::Rrm, alloc, m, schedule)
}

pub fn map_overlapped(
    alloc: &CoreAllocation,
    m: u64,
    schedule: &PeriodSchedule,
) -> Result<Mapping> {
    map(Strategy::Orrm, alloc, m, schedule)
}
