//! Per-period computation and communication time, and the epoch objective.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PeriodSchedule, Phase, WorkloadParams};
use crate::rational::{self, int, Rational};

/// Which periods pay for a transmission.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommConvention {
    /// Periods `1..l-1` and `l+1..2l-1` send. Period `l` hands over to
    /// `l+1` on the same cores and period `2l` ends the epoch. This is the
    /// convention under which the closed-form optimum is a stationary point.
    #[default]
    SendingPeriods,
    /// Additionally zeroes period 1, as the communication formula is
    /// printed. Kept for sensitivity studies.
    StrictPrinted,
}

/// Cores assigned to each period `1..=2l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreAllocation {
    cores: Vec<u64>,
}

impl CoreAllocation {
    /// Builds the full allocation from the FP half, mirroring it onto BP.
    pub fn from_forward(fp: &[u64]) -> Self {
        let mut cores = fp.to_vec();
        cores.extend(fp.iter().rev());
        CoreAllocation { cores }
    }

    /// Takes all `2l` entries as given; call [`CoreAllocation::validate`]
    /// before use.
    pub fn from_periods(cores: Vec<u64>) -> Self {
        CoreAllocation { cores }
    }

    /// `m_i` for period `i` (1-indexed).
    pub fn get(&self, i: usize) -> u64 {
        self.cores[i - 1]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.cores
    }

    /// The FP half, `m_1..m_l`.
    pub fn forward(&self) -> &[u64] {
        &self.cores[..self.cores.len() / 2]
    }

    pub fn max_cores(&self) -> u64 {
        self.cores.iter().copied().max().unwrap_or(0)
    }

    /// Checks length, mirror symmetry, `m_i >= 1`, `m_i <= n_i` and, when
    /// `cap` is given, `m_i <= floor(phi * m)`.
    pub fn validate(&self, schedule: &PeriodSchedule, cap: Option<u64>) -> Result<()> {
        let periods = schedule.period_count();
        if self.cores.len() != periods {
            return Err(Error::invalid(
                "allocation",
                format!("expected {periods} periods, got {}", self.cores.len()),
            ));
        }
        for p in schedule.periods() {
            let m = self.get(p.index);
            if m == 0 {
                return Err(Error::invalid(
                    format!("allocation[period {}]", p.index),
                    "a period needs at least one core",
                ));
            }
            if m > p.neuron_count {
                return Err(Error::invalid(
                    format!("allocation[period {}]", p.index),
                    format!(
                        "{m} cores exceed the {} neurons of the period",
                        p.neuron_count
                    ),
                ));
            }
            if let Some(cap) = cap {
                if m > cap {
                    return Err(Error::invalid(
                        format!("allocation[period {}]", p.index),
                        format!("{m} cores exceed the utilization cap {cap}"),
                    ));
                }
            }
            let mirror = schedule.mirror(p.index);
            if self.get(mirror) != m {
                return Err(Error::invalid(
                    format!("allocation[period {}]", p.index),
                    format!("must equal period {mirror} (same cores in FP and BP)"),
                ));
            }
        }
        Ok(())
    }
}

/// Time spent by period `i`, in cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCost {
    #[serde(with = "rational::serde_rational")]
    pub compute: Rational,
    #[serde(with = "rational::serde_rational")]
    pub comm: Rational,
    #[serde(with = "rational::serde_rational")]
    pub overhead: Rational,
}

impl PeriodCost {
    pub fn total(&self) -> Rational {
        &self.compute + &self.comm + &self.overhead
    }
}

/// The time model bound to one network, workload and wavelength budget.
#[derive(Debug, Clone, Copy)]
pub struct CostModel<'a> {
    pub schedule: &'a PeriodSchedule,
    pub workload: &'a WorkloadParams,
    pub lambda_max: u64,
    pub convention: CommConvention,
}

impl<'a> CostModel<'a> {
    pub fn new(
        schedule: &'a PeriodSchedule,
        workload: &'a WorkloadParams,
        lambda_max: u64,
    ) -> Self {
        CostModel {
            schedule,
            workload,
            lambda_max,
            convention: CommConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: CommConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_max == 0 {
            return Err(Error::invalid(
                "onoc.lambda_max",
                "need at least one wavelength",
            ));
        }
        self.workload.validate(self.schedule)
    }

    /// Neurons per core `X_i = ceil(n / m_i)` for the layer of period `i`.
    pub fn neurons_per_core(&self, i: usize, m_i: u64) -> Result<u64> {
        self.schedule.check_index(i)?;
        if m_i == 0 {
            return Err(Error::invalid("m_i", "a period needs at least one core"));
        }
        Ok(self.schedule.period(i).neuron_count.div_ceil(m_i))
    }

    /// Work units one neuron of period `i` performs.
    pub fn work_per_neuron(&self, i: usize) -> Rational {
        let p = self.schedule.period(i);
        match p.phase {
            Phase::Forward => self.workload.alpha(i).clone(),
            // Weight updates towards layer k-1 plus one bias update.
            Phase::Backward => {
                self.workload.beta(i) * int(self.schedule.layer_width(p.layer - 1) + 1)
            }
        }
    }

    /// Per-core computation time of period `i` with `m_i` cores.
    pub fn compute_time(&self, i: usize, m_i: u64) -> Result<Rational> {
        let x = self.neurons_per_core(i, m_i)?;
        Ok(self.work_per_neuron(i) * int(x) / &self.workload.c)
    }

    pub fn is_sending(&self, i: usize) -> bool {
        let l = self.schedule.depth();
        let sends = (1..l).contains(&i) || (l + 1..2 * l).contains(&i);
        match self.convention {
            CommConvention::SendingPeriods => sends,
            CommConvention::StrictPrinted => sends && i != 1,
        }
    }

    /// TDM slots needed for `m_i` senders.
    pub fn slots(&self, m_i: u64) -> u64 {
        m_i.div_ceil(self.lambda_max)
    }

    /// Communication time of period `i`: `ceil(m_i / lambda_max) * B_i` for a
    /// sending period, zero otherwise.
    pub fn comm_time(&self, i: usize, m_i: u64) -> Rational {
        if self.is_sending(i) {
            self.workload.b(i) * int(self.slots(m_i))
        } else {
            Rational::zero()
        }
    }

    pub fn period_cost(&self, i: usize, m_i: u64) -> Result<PeriodCost> {
        Ok(PeriodCost {
            compute: self.compute_time(i, m_i)?,
            comm: self.comm_time(i, m_i),
            overhead: self.workload.zeta(i).clone(),
        })
    }

    pub fn period_costs(&self, alloc: &CoreAllocation) -> Result<Vec<PeriodCost>> {
        alloc.validate(self.schedule, None)?;
        (1..=self.schedule.period_count())
            .map(|i| self.period_cost(i, alloc.get(i)))
            .collect()
    }

    /// Epoch time `D_input + sum_i (compute_i + comm_i + zeta_i)`.
    pub fn epoch_time(&self, alloc: &CoreAllocation) -> Result<Rational> {
        let costs = self.period_costs(alloc)?;
        Ok(costs
            .iter()
            .fold(self.workload.d_input.clone(), |acc, c| acc + c.total()))
    }

    /// The part of the epoch time that depends on `m_i` for FP period `i`
    /// (`1 <= i <= l`): both passes over the layer, their transmissions and
    /// overheads. The epoch time is `D_input + sum_i layer_cost(i, m_i)`.
    pub fn layer_cost(&self, i: usize, m: u64) -> Result<Rational> {
        let mirror = self.schedule.mirror(i);
        Ok(self.period_cost(i, m)?.total() + self.period_cost(mirror, m)?.total())
    }
}
