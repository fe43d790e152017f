//! Optimal per-layer core counts: the closed-form stationary point of the
//! relaxed epoch time, and an exhaustive discrete search used as its oracle.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::costmodel::{CoreAllocation, CostModel, PeriodCost};
use crate::error::{Error, Result};
use crate::model::{OnocConfig, PeriodSchedule};
use crate::rational::{self, ceil_sqrt, int, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[default]
    #[serde(alias = "closed")]
    ClosedForm,
    #[serde(alias = "brute")]
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampReason {
    /// Capped at `floor(phi * m)`.
    PhiM,
    /// Capped at the neuron count of the period.
    NeuronCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clamp {
    /// FP period (equivalently, layer) whose count was capped.
    pub period: usize,
    pub reason: ClampReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub allocation: CoreAllocation,
    #[serde(with = "rational::serde_rational")]
    pub epoch_time: Rational,
    pub per_period_costs: Vec<PeriodCost>,
    pub method: Method,
    pub clamps: Vec<Clamp>,
}

/// `theta_i = n_i * lambda_max * (beta_{2l-i+1} * (n_{i-1} + 1) + alpha_i)`
/// for FP period `i` in `1..=l`.
pub fn theta(model: &CostModel, i: usize) -> Result<Rational> {
    let s = model.schedule;
    let l = s.depth();
    if i == 0 || i > l {
        return Err(Error::invalid(
            "period",
            format!("theta needs 1 <= i <= {l}, got {i}"),
        ));
    }
    let w = model.workload;
    let bracket = w.beta(s.mirror(i)) * int(s.layer_width(i - 1) + 1) + w.alpha(i);
    Ok(int(s.layer_width(i)) * int(model.lambda_max) * bracket)
}

/// Transmission time that scales with `m_i` in the relaxed objective. For
/// `l = 1` the first and last branches coincide; `B_1` is used.
pub fn comm_denominator(model: &CostModel, i: usize) -> Rational {
    let l = model.schedule.depth();
    let w = model.workload;
    if i == 1 {
        w.b(1).clone()
    } else if i == l {
        w.b(l + 1).clone()
    } else {
        w.b(i) + w.b(model.schedule.mirror(i))
    }
}

/// The unrounded stationary point `theta_i / (denominator * C)` squared,
/// i.e. the value whose square root is the continuous optimum. `None` when
/// the transmission cost is zero and the relaxed optimum is unbounded.
pub fn squared_candidate(model: &CostModel, i: usize) -> Result<Option<Rational>> {
    let th = theta(model, i)?;
    let denom = comm_denominator(model, i) * &model.workload.c;
    if th.is_zero() {
        return Ok(Some(Rational::zero()));
    }
    if denom.is_zero() {
        return Ok(None);
    }
    Ok(Some(th / denom))
}

fn cap_for(model: &CostModel, i: usize, core_cap: u64) -> (u64, ClampReason) {
    let n = model.schedule.period(i).neuron_count;
    if n < core_cap {
        (n, ClampReason::NeuronCount)
    } else {
        (core_cap, ClampReason::PhiM)
    }
}

fn checked_cap(onoc: &OnocConfig) -> Result<u64> {
    onoc.validate()?;
    let cap = onoc.core_cap();
    if cap < 1 {
        return Err(Error::invalid(
            "onoc.phi",
            "floor(phi * m) must be at least 1",
        ));
    }
    Ok(cap)
}

fn finish(
    model: &CostModel,
    fp: &[u64],
    method: Method,
    clamps: Vec<Clamp>,
) -> Result<OptimizationResult> {
    let allocation = CoreAllocation::from_forward(fp);
    let per_period_costs = model.period_costs(&allocation)?;
    let epoch_time = per_period_costs
        .iter()
        .fold(model.workload.d_input.clone(), |acc, c| acc + c.total());
    Ok(OptimizationResult {
        allocation,
        epoch_time,
        per_period_costs,
        method,
        clamps,
    })
}

/// Closed-form allocation: `ceil(sqrt(theta_i / (denominator_i * C)))`,
/// raised to 1 and capped by `floor(phi * m)` and by the neuron count, then
/// mirrored onto the BP periods.
pub fn closed_form_allocation(model: &CostModel, onoc: &OnocConfig) -> Result<OptimizationResult> {
    model.validate()?;
    let core_cap = checked_cap(onoc)?;
    let l = model.schedule.depth();
    let mut fp = Vec::with_capacity(l);
    let mut clamps = Vec::new();
    for i in 1..=l {
        let (cap, reason) = cap_for(model, i, core_cap);
        let candidate = squared_candidate(model, i)?.map(|q| ceil_sqrt(&q));
        let m = match candidate {
            Some(c) if c <= BigInt::from(cap) => c.to_u64().unwrap_or(cap).max(1),
            _ => {
                clamps.push(Clamp { period: i, reason });
                cap
            }
        };
        fp.push(m);
    }
    finish(model, &fp, Method::ClosedForm, clamps)
}

/// Exhaustive search over every feasible `m_i` of each layer. The objective
/// is separable per layer, so each layer is scanned independently; ties go
/// to the smaller core count.
pub fn brute_force_allocation(model: &CostModel, onoc: &OnocConfig) -> Result<OptimizationResult> {
    model.validate()?;
    let core_cap = checked_cap(onoc)?;
    let l = model.schedule.depth();
    let layers: Vec<usize> = (1..=l).collect();
    let scan = |i: usize| -> Result<u64> {
        let (cap, _) = cap_for(model, i, core_cap);
        let mut best = (1, model.layer_cost(i, 1)?);
        for m in 2..=cap {
            let h = model.layer_cost(i, m)?;
            if h < best.1 {
                best = (m, h);
            }
        }
        Ok(best.0)
    };
    let results: Vec<Result<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = layers
            .iter()
            .map(|&i| scope.spawn(move || scan(i)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("layer scan panicked"))
            .collect()
    });
    let fp = results.into_iter().collect::<Result<Vec<_>>>()?;
    finish(model, &fp, Method::BruteForce, Vec::new())
}

pub fn optimize(
    model: &CostModel,
    onoc: &OnocConfig,
    method: Method,
) -> Result<OptimizationResult> {
    match method {
        Method::ClosedForm => closed_form_allocation(model, onoc),
        Method::BruteForce => brute_force_allocation(model, onoc),
    }
}

/// Finest-grained baseline: as many cores as neurons, up to the cap.
pub fn fgp_allocation(schedule: &PeriodSchedule, onoc: &OnocConfig) -> Result<CoreAllocation> {
    let cap = checked_cap(onoc)?;
    let fp: Vec<u64> = (1..=schedule.depth())
        .map(|i| schedule.layer_width(i).min(cap))
        .collect();
    Ok(CoreAllocation::from_forward(&fp))
}

/// Fixed-number baseline: `fixed` cores per layer, limited by the neuron
/// count and the cap.
pub fn fnp_allocation(
    schedule: &PeriodSchedule,
    onoc: &OnocConfig,
    fixed: u64,
) -> Result<CoreAllocation> {
    if fixed == 0 {
        return Err(Error::invalid("run.fnp_cores", "must be positive"));
    }
    let cap = checked_cap(onoc)?;
    let fp: Vec<u64> = (1..=schedule.depth())
        .map(|i| fixed.min(schedule.layer_width(i)).min(cap))
        .collect();
    Ok(CoreAllocation::from_forward(&fp))
}

/// Distance between the closed form and the exhaustive optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationGap {
    /// Mean over layers of `|m_closed - m_brute| / m_brute`, in percent.
    pub core_error_pct: f64,
    /// `(T_closed - T_brute) / T_brute`, in percent.
    pub time_diff_pct: f64,
}

pub fn allocation_gap(model: &CostModel, onoc: &OnocConfig) -> Result<AllocationGap> {
    let closed = closed_form_allocation(model, onoc)?;
    let brute = brute_force_allocation(model, onoc)?;
    Ok(gap_between(&closed, &brute))
}

pub fn gap_between(closed: &OptimizationResult, brute: &OptimizationResult) -> AllocationGap {
    let fc = closed.allocation.forward();
    let fb = brute.allocation.forward();
    let core_error = fc
        .iter()
        .zip(fb)
        .map(|(&c, &b)| (c as f64 - b as f64).abs() / b as f64)
        .sum::<f64>()
        / fc.len() as f64;
    let time_diff = if brute.epoch_time.is_zero() {
        0.0
    } else {
        rational::to_f64(&((&closed.epoch_time - &brute.epoch_time) / &brute.epoch_time))
    };
    AllocationGap {
        core_error_pct: 100.0 * core_error,
        time_diff_pct: 100.0 * time_diff,
    }
}
