//! Closed-form and mapping-derived analyses: state transitions, hotspot
//! runs, path length, insertion loss and per-core memory.

use num_traits::Zero;
use serde::Serialize;

use super::{expected_reuse, reuse_counts, Direction, Mapping, Strategy};
use crate::costmodel::CoreAllocation;
use crate::error::{Error, Result};
use crate::model::{FcnnSpec, LossParams};
use crate::rational::{self, int, Rational};

/// `active[c][i-1]` is true when core `c` belongs to period `i`.
pub fn activity(mapping: &Mapping) -> Vec<Vec<bool>> {
    let periods = mapping.period_cores.len();
    let mut active = vec![vec![false; periods]; mapping.ring_size as usize];
    for (p, cores) in mapping.period_cores.iter().enumerate() {
        for &c in cores {
            active[c as usize][p] = true;
        }
    }
    active
}

fn runs(row: &[bool]) -> impl Iterator<Item = usize> + '_ {
    row.split(|&a| !a).map(<[bool]>::len).filter(|&n| n > 0)
}

/// Active/idle switches over one epoch: every maximal run of consecutive
/// active periods costs one switch on and one switch off.
pub fn simulate_transitions(mapping: &Mapping) -> u64 {
    activity(mapping)
        .iter()
        .map(|row| 2 * runs(row).count() as u64)
        .sum()
}

/// Longest run of consecutive active periods over all cores.
pub fn max_consecutive_periods(mapping: &Mapping) -> u64 {
    activity(mapping)
        .iter()
        .flat_map(|row| runs(row).collect::<Vec<_>>())
        .max()
        .unwrap_or(0) as u64
}

/// Reuse counts over every adjacent FP boundary and its BP mirror. The
/// boundary between periods `l` and `l+1` is not included.
fn mirrored_reuse_sum(reuse: &[u64]) -> u64 {
    2 * reuse.iter().skip(1).sum::<u64>()
}

/// State transitions predicted from the allocation alone.
///
/// * FM: `2 (m_1 + sum_{i=2..l} |m_i - m_{i-1}|)`
/// * RRM: `2 (sum_{i=1..2l} m_i - m_l)`
/// * ORRM: `2 (sum_{i=1..2l} m_i - m_l - sum r)`, where the reuse sum runs
///   over all adjacent boundaries except `l -> l+1`.
///
/// RRM and ORRM are exact while no two adjacent periods wrap onto each
/// other (`m_{i-1} + m_i - r_i <= m`).
pub fn closed_form_transitions(alloc: &CoreAllocation, strategy: Strategy, m: u64) -> Result<u64> {
    let fp = alloc.forward();
    let l = fp.len();
    let total: u64 = alloc.as_slice().iter().sum();
    Ok(match strategy {
        Strategy::Fm => {
            let steps: u64 = fp.windows(2).map(|w| w[0].abs_diff(w[1])).sum();
            2 * (fp[0] + steps)
        }
        Strategy::Rrm => 2 * (total - fp[l - 1]),
        Strategy::Orrm => {
            let r = reuse_counts(fp, m)?;
            2 * (total - fp[l - 1] - mirrored_reuse_sum(&r))
        }
    })
}

/// Whether every pair of adjacent FP periods fits on the ring without
/// wrapping onto itself. This is the side condition under which the RRM
/// and ORRM closed forms for transitions, hotspots and path length hold.
pub fn adjacent_periods_fit(alloc: &CoreAllocation, strategy: Strategy, m: u64) -> Result<bool> {
    let fp = alloc.forward();
    let r = match strategy {
        Strategy::Orrm => reuse_counts(fp, m)?,
        _ => vec![0; fp.len()],
    };
    Ok((1..fp.len()).all(|i| fp[i - 1] + fp[i] - r[i] <= m))
}

/// One inter-period transfer: period `from` sends to period `from + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transfer {
    pub from: usize,
    pub direction: Direction,
}

/// Transfers of one epoch: `i -> i+1` for `i` in `1..l-1` (clockwise) and
/// `l+1..2l-1` (anticlockwise). Period `l` hands over to `l+1` on the same
/// cores and period `2l` ends the epoch.
pub fn transfers(l: usize) -> Vec<Transfer> {
    let fp = (1..l).map(|from| Transfer {
        from,
        direction: Direction::Clockwise,
    });
    let bp = (l + 1..2 * l).map(|from| Transfer {
        from,
        direction: Direction::Anticlockwise,
    });
    fp.chain(bp).collect()
}

/// Hops of the shortest ring segment covering every core in `cores`: the
/// ring minus the largest gap between participants. The length is the same
/// in either direction of travel.
pub fn span_hops(cores: &[u64], m: u64) -> u64 {
    let mut sorted = cores.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 {
        return 0;
    }
    let wrap_gap = sorted[0] + m - sorted[sorted.len() - 1];
    let max_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(std::iter::once(wrap_gap))
        .max()
        .unwrap_or(0);
    m - max_gap
}

/// Longest optical path of the epoch, in ring hops: for each transfer, the
/// segment from the first sender to the farthest receiver along the
/// transmission direction.
pub fn max_path_length(mapping: &Mapping) -> u64 {
    transfers(mapping.depth())
        .iter()
        .map(|t| {
            let mut cores = mapping.cores(t.from).to_vec();
            cores.extend_from_slice(mapping.cores(t.from + 1));
            span_hops(&cores, mapping.ring_size)
        })
        .max()
        .unwrap_or(0)
}

/// Maximum path length predicted from the allocation alone.
///
/// * FM: `max_{i=1..l} (m_i - 1)`
/// * RRM: `max_{i=2..l} (m_i + m_{i-1} - 1)`
/// * ORRM: `max_{i=2..l} (m_i + m_{i-1} - r_i)`
///
/// The ORRM form counts cores rather than hops and is one above the
/// simulated value; it is kept as published.
pub fn closed_form_max_path(alloc: &CoreAllocation, strategy: Strategy, m: u64) -> Result<u64> {
    let fp = alloc.forward();
    Ok(match strategy {
        Strategy::Fm => fp.iter().map(|&x| x - 1).max().unwrap_or(0),
        Strategy::Rrm => fp.windows(2).map(|w| w[0] + w[1] - 1).max().unwrap_or(0),
        Strategy::Orrm => {
            let r = reuse_counts(fp, m)?;
            (1..fp.len())
                .map(|i| fp[i] + fp[i - 1] - r[i])
                .max()
                .unwrap_or(0)
        }
    })
}

/// Insertion loss in dB of a path through `n_routers` routers:
/// `IL_link * (N_r - 1) + IL_router * N_r + IL_eo + IL_oe`.
pub fn insertion_loss(n_routers: u64, loss: &LossParams) -> Result<f64> {
    if n_routers == 0 {
        return Err(Error::invalid(
            "n_routers",
            "a path has at least one router",
        ));
    }
    let n = n_routers as f64;
    Ok(loss.link_db * (n - 1.0) + loss.router_db * n + loss.eo_db + loss.oe_db)
}

/// Routers on a path of `hops` links.
pub fn routers_on_path(hops: u64) -> u64 {
    hops + 1
}

/// Bytes one neuron of layer `k` (`1..=l`) keeps in SRAM over FP and BP:
/// `(3 n_{k-1} + 4) * batch * param_width`.
pub fn neuron_memory(k: usize, fcnn: &FcnnSpec) -> u64 {
    (3 * fcnn.width(k - 1) + 4) * fcnn.batch_size * fcnn.param_width
}

/// SRAM bytes per core (indexed by core id) implied by the mapping.
pub fn per_core_memory(mapping: &Mapping, fcnn: &FcnnSpec) -> Vec<u64> {
    let mut mem = vec![0u64; mapping.ring_size as usize];
    for (k, owners) in mapping.assignment.iter().enumerate() {
        let s = neuron_memory(k + 1, fcnn);
        for &c in owners {
            mem[c as usize] += s;
        }
    }
    mem
}

/// Whether the FP periods fit in one round of the ring, the condition the
/// memory estimators assume.
pub fn one_round(alloc: &CoreAllocation, strategy: Strategy, m: u64) -> Result<bool> {
    let fp = alloc.forward();
    Ok(match strategy {
        Strategy::Fm => true,
        Strategy::Rrm => fp.iter().sum::<u64>() <= m,
        Strategy::Orrm => {
            let r = reuse_counts(fp, m)?;
            fp.iter().sum::<u64>() - r.iter().sum::<u64>() <= m
        }
    })
}

/// Estimated worst-case SRAM bytes of a core, without ceilings:
///
/// * RRM: `max_i s_i n_i / m_i`
/// * ORRM: `max_i (s_i n_i / m_i + s_{i+1} n_{i+1} / m_{i+1})` over the
///   boundaries that actually share cores (`r_{i+1} > 0`), and the single
///   terms otherwise
/// * FM: `sum_i s_i n_i / m_i`
///
/// Exact when every `m_i` divides `n_i`. Fails with
/// [`Error::Unsupported`] when the periods wrap around the ring more than
/// once, for which no estimate is defined.
pub fn closed_form_max_memory(
    alloc: &CoreAllocation,
    fcnn: &FcnnSpec,
    strategy: Strategy,
    m: u64,
) -> Result<Rational> {
    let fp = alloc.forward();
    if !one_round(alloc, strategy, m)? {
        return Err(Error::Unsupported(format!(
            "{strategy} memory estimate needs the FP periods to fit in one round of the {m}-core ring"
        )));
    }
    let share: Vec<Rational> = fp
        .iter()
        .enumerate()
        .map(|(k, &mk)| int(neuron_memory(k + 1, fcnn) * fcnn.width(k + 1)) / int(mk))
        .collect();
    let max = |it: &mut dyn Iterator<Item = Rational>| it.fold(Rational::zero(), |a, b| a.max(b));
    Ok(match strategy {
        Strategy::Fm => share.iter().fold(Rational::zero(), |a, b| a + b),
        Strategy::Rrm => max(&mut share.iter().cloned()),
        Strategy::Orrm => {
            let r = reuse_counts(fp, m)?;
            let singles = share.iter().cloned();
            let pairs = (1..fp.len())
                .filter(|&i| r[i] > 0)
                .map(|i| &share[i - 1] + &share[i]);
            max(&mut singles.chain(pairs))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingReport {
    pub transitions_simulated: u64,
    pub transitions_closed_form: u64,
    pub max_consecutive_periods: u64,
    pub max_path_length: u64,
    pub max_path_length_closed_form: u64,
    pub worst_insertion_loss_db: f64,
    /// Indexed by 0-based core id.
    pub per_core_memory_bytes: Vec<u64>,
    pub max_memory_bytes: u64,
    /// `None` when the one-round condition fails; see `memory_note`.
    pub max_memory_closed_form_bytes: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_note: Option<String>,
    #[serde(serialize_with = "rational::serde_rational::serialize")]
    pub expected_reuse: Rational,
}

pub fn analyze(mapping: &Mapping, fcnn: &FcnnSpec, loss: &LossParams) -> Result<MappingReport> {
    let alloc = mapping.allocation();
    let m = mapping.ring_size;
    let strategy = mapping.strategy;
    let path = max_path_length(mapping);
    let per_core = per_core_memory(mapping, fcnn);
    let (closed_mem, note) = match closed_form_max_memory(alloc, fcnn, strategy, m) {
        Ok(v) => (Some(rational::to_f64(&v)), None),
        Err(Error::Unsupported(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(MappingReport {
        transitions_simulated: simulate_transitions(mapping),
        transitions_closed_form: closed_form_transitions(alloc, strategy, m)?,
        max_consecutive_periods: max_consecutive_periods(mapping),
        max_path_length: path,
        max_path_length_closed_form: closed_form_max_path(alloc, strategy, m)?,
        worst_insertion_loss_db: insertion_loss(routers_on_path(path), loss)?,
        max_memory_bytes: per_core.iter().copied().max().unwrap_or(0),
        per_core_memory_bytes: per_core,
        max_memory_closed_form_bytes: closed_mem,
        memory_note: note,
        expected_reuse: expected_reuse(alloc.forward(), m)?,
    })
}
