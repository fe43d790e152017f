//! Epoch simulation: replays the period schedule on a concrete mapping,
//! generating the wavelength plan of every transfer and accounting time,
//! traffic, state transitions and energy. An electrical ring with
//! repeated unicast serves as the baseline.
//!
//! The optical side executes the analytic time model rather than
//! approximating it, so its total equals [`CostModel::epoch_time`] exactly.
//! Within a period, transmission completes before computation starts.

mod wavelength;

pub use wavelength::*;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::costmodel::CostModel;
use crate::error::{Error, Result};
use crate::mapping::{simulate_transitions, Direction, Mapping};
use crate::model::{EnergyParams, FcnnSpec, Phase};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Onoc,
    Enoc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub period: usize,
    pub phase: Phase,
    #[serde(with = "rational::serde_rational")]
    pub compute: Rational,
    #[serde(with = "rational::serde_rational")]
    pub comm: Rational,
    #[serde(with = "rational::serde_rational")]
    pub overhead: Rational,
    /// TDM slots on the ONoC, unicast messages on the ENoC.
    pub slot_count: u64,
    /// Payload bits sent in each slot (ONoC) or by each sender (ENoC).
    pub slot_bits: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub static_joules: f64,
    pub dynamic_comm_joules: f64,
    pub compute_joules: f64,
    pub transition_joules: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.static_joules + self.dynamic_comm_joules + self.compute_joules + self.transition_joules
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochReport {
    pub backend: Backend,
    #[serde(with = "rational::serde_rational")]
    pub total_time: Rational,
    #[serde(with = "rational::serde_rational")]
    pub d_input: Rational,
    pub per_period: Vec<PeriodRecord>,
    pub transitions: u64,
    pub wavelength_matrices: Vec<WavelengthMatrix>,
    pub total_bits: u64,
    #[serde(with = "rational::serde_rational")]
    pub total_work: Rational,
    pub energy: EnergyBreakdown,
}

impl EpochReport {
    pub fn comm_time(&self) -> Rational {
        self.per_period
            .iter()
            .fold(Rational::zero(), |acc, p| acc + &p.comm)
    }

    pub fn compute_time(&self) -> Rational {
        self.per_period
            .iter()
            .fold(Rational::zero(), |acc, p| acc + &p.compute)
    }
}

/// Electrical ring parameters for the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnocParams {
    /// Router-to-router latency, cycles per hop.
    pub hop_latency: u64,
    pub flit_bytes: u64,
    pub packet_bytes: u64,
}

impl Default for EnocParams {
    fn default() -> Self {
        EnocParams {
            hop_latency: 2,
            flit_bytes: 16,
            packet_bytes: 64,
        }
    }
}

impl EnocParams {
    pub fn validate(&self) -> Result<()> {
        if self.flit_bytes == 0 {
            return Err(Error::invalid("enoc.flit_bytes", "must be positive"));
        }
        if self.packet_bytes < self.flit_bytes {
            return Err(Error::invalid(
                "enoc.packet_bytes",
                "must hold at least one flit",
            ));
        }
        Ok(())
    }

    /// Bits on the wire for `payload_bytes`, padded to whole flits.
    pub fn wire_bits(&self, payload_bytes: u64) -> u64 {
        let packets = payload_bytes.div_ceil(self.packet_bytes);
        let flits_per_packet = self.packet_bytes.div_ceil(self.flit_bytes);
        packets * flits_per_packet * self.flit_bytes * 8
    }
}

/// Shortest-path hop count between two cores of an `m`-core ring.
pub fn ring_hops(from: u64, to: u64, m: u64) -> u64 {
    let cw = (to + m - from) % m;
    cw.min(m - cw)
}

fn direction_of(model: &CostModel, i: usize) -> Direction {
    if i <= model.schedule.depth() {
        Direction::Clockwise
    } else {
        Direction::Anticlockwise
    }
}

fn check_consistent(mapping: &Mapping, model: &CostModel, fcnn: &FcnnSpec) -> Result<()> {
    model.validate()?;
    if fcnn.layer_sizes != model.schedule.layer_sizes() {
        return Err(Error::invalid(
            "fcnn",
            "network differs from the schedule's network",
        ));
    }
    mapping.allocation().validate(model.schedule, None)?;
    if mapping.period_cores.len() != model.schedule.period_count() {
        return Err(Error::invalid(
            "mapping",
            "period count differs from the schedule",
        ));
    }
    Ok(())
}

struct Common {
    records: Vec<PeriodRecord>,
    total_work: Rational,
}

/// Compute side of a period from the mapping: the busiest core's neuron
/// count times the work per neuron.
fn compute_side(mapping: &Mapping, model: &CostModel) -> Common {
    let mut records = Vec::new();
    let mut total_work = Rational::zero();
    for p in model.schedule.periods() {
        let i = p.index;
        let loads = mapping.neurons_on_cores(i);
        let busiest = loads.iter().copied().max().unwrap_or(0);
        let per_neuron = model.work_per_neuron(i);
        total_work += &per_neuron * int(p.neuron_count);
        records.push(PeriodRecord {
            period: i,
            phase: p.phase,
            compute: per_neuron * int(busiest) / &model.workload.c,
            comm: Rational::zero(),
            overhead: model.workload.zeta(i).clone(),
            slot_count: 0,
            slot_bits: Vec::new(),
        });
    }
    Common {
        records,
        total_work,
    }
}

fn payload_bits(neurons: u64, fcnn: &FcnnSpec) -> u64 {
    neurons * fcnn.batch_size * fcnn.param_width * 8
}

fn total_of(d_input: &Rational, records: &[PeriodRecord]) -> Rational {
    records.iter().fold(d_input.clone(), |acc, r| {
        acc + &r.compute + &r.comm + &r.overhead
    })
}

/// Simulates one epoch on the optical ring. Each sending period broadcasts
/// from its cores to the next period's cores (clockwise in FP,
/// anticlockwise in BP), one TDM slot per `lambda_max` senders, each slot
/// lasting `B_i`.
pub fn simulate_epoch(
    mapping: &Mapping,
    model: &CostModel,
    fcnn: &FcnnSpec,
    energy: &EnergyParams,
    clock_hz: &Rational,
) -> Result<EpochReport> {
    check_consistent(mapping, model, fcnn)?;
    let Common {
        mut records,
        total_work,
    } = compute_side(mapping, model);
    let mut matrices = Vec::new();
    let mut total_bits = 0;
    for rec in records.iter_mut() {
        let i = rec.period;
        if !model.is_sending(i) {
            continue;
        }
        let wm = wavelength_matrix(
            i,
            mapping.cores(i),
            mapping.cores(i + 1),
            model.lambda_max,
            direction_of(model, i),
        )?;
        let loads = mapping.neurons_on_cores(i);
        let mut offset = 0;
        for slot in &wm.slots {
            let bits = loads[offset..offset + slot.len()]
                .iter()
                .map(|&n| payload_bits(n, fcnn))
                .sum::<u64>();
            offset += slot.len();
            rec.slot_bits.push(bits);
            total_bits += bits;
        }
        rec.slot_count = wm.slot_count() as u64;
        rec.comm = model.workload.b(i) * int(rec.slot_count);
        matrices.push(wm);
    }
    let mut report = EpochReport {
        backend: Backend::Onoc,
        total_time: total_of(&model.workload.d_input, &records),
        d_input: model.workload.d_input.clone(),
        per_period: records,
        transitions: simulate_transitions(mapping),
        wavelength_matrices: matrices,
        total_bits,
        total_work,
        energy: EnergyBreakdown::default(),
    };
    report.energy = epoch_energy(&report, energy, clock_hz);
    Ok(report)
}

/// Simulates one epoch on an electrical ring. Every sender unicasts its
/// payload to every other core of the next period along the shortest ring
/// path. Senders inject in parallel; each receiver takes in the payloads of
/// all senders, its own local copy included, through one ejection port at
/// `B_i` apiece, the per-sender endpoint time of the optical model. The
/// transfer lasts `|senders| * B_i` plus the pipelined latency of the
/// longest route, `hop_latency` cycles per hop.
pub fn simulate_enoc_epoch(
    mapping: &Mapping,
    model: &CostModel,
    fcnn: &FcnnSpec,
    enoc: &EnocParams,
    energy: &EnergyParams,
    clock_hz: &Rational,
) -> Result<EpochReport> {
    check_consistent(mapping, model, fcnn)?;
    enoc.validate()?;
    let Common {
        mut records,
        total_work,
    } = compute_side(mapping, model);
    let m = mapping.ring_size;
    let mut total_bits = 0;
    for rec in records.iter_mut() {
        let i = rec.period;
        if !model.is_sending(i) {
            continue;
        }
        let senders = mapping.cores(i);
        let receivers = mapping.cores(i + 1);
        let loads = mapping.neurons_on_cores(i);
        let mut longest = 0;
        let mut messages = 0;
        for (&sender, &neurons) in senders.iter().zip(&loads) {
            let bits = enoc.wire_bits(payload_bits(neurons, fcnn) / 8);
            let mut sent = 0;
            for &receiver in receivers.iter().filter(|&&r| r != sender) {
                longest = longest.max(ring_hops(sender, receiver, m));
                sent += 1;
            }
            messages += sent;
            rec.slot_bits.push(bits * sent);
            total_bits += bits * sent;
        }
        rec.slot_count = messages;
        rec.comm =
            model.workload.b(i) * int(senders.len() as u64) + int(longest * enoc.hop_latency);
    }
    let mut report = EpochReport {
        backend: Backend::Enoc,
        total_time: total_of(&model.workload.d_input, &records),
        d_input: model.workload.d_input.clone(),
        per_period: records,
        transitions: simulate_transitions(mapping),
        wavelength_matrices: Vec::new(),
        total_bits,
        total_work,
        energy: EnergyBreakdown::default(),
    };
    report.energy = epoch_energy(&report, energy, clock_hz);
    Ok(report)
}

/// Static energy follows the epoch time, dynamic energy the traffic, the
/// work and the number of state transitions.
pub fn epoch_energy(
    report: &EpochReport,
    coeffs: &EnergyParams,
    clock_hz: &Rational,
) -> EnergyBreakdown {
    let seconds = rational::to_f64(&(&report.total_time / clock_hz));
    EnergyBreakdown {
        static_joules: coeffs.static_power_watts * seconds,
        dynamic_comm_joules: coeffs.dynamic_joules_per_bit * report.total_bits as f64,
        compute_joules: coeffs.joules_per_work_unit * rational::to_f64(&report.total_work),
        transition_joules: coeffs.joules_per_state_transition * report.transitions as f64,
    }
}
