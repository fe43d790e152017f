use serde::Serialize;

use crate::costmodel::CoreAllocation;
use crate::error::{Error, Result};
use crate::mapping::{analyze, map, MappingReport, MappingSummary, Strategy};
use crate::model::Phase;
use crate::netsim::{
    simulate_enoc_epoch, simulate_epoch, write_matrices_csv, Backend, EpochReport,
};
use crate::optimizer::{
    brute_force_allocation, closed_form_allocation, fgp_allocation, fnp_allocation, gap_between,
    optimize, AllocationGap, Method, OptimizationResult,
};
use crate::rational::{self, Rational};

use super::config::{Prepared, RunConfig, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: RunConfig,
}

impl Header {
    pub fn new(command: &'static str, prep: &Prepared, seed: Option<u64>) -> Self {
        Header {
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            config: prep.config.clone(),
        }
    }
}

fn f(q: &Rational) -> String {
    rational::to_f64(q).to_string()
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io {
        path: "csv".into(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: "csv".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The configured fixed allocation, or the optimizer's choice.
pub fn chosen_allocation(prep: &Prepared, method: Method) -> Result<CoreAllocation> {
    match &prep.fixed {
        Some(a) => Ok(a.clone()),
        None => Ok(optimize(&prep.model(), &prep.config.onoc, method)?.allocation),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    #[serde(flatten)]
    pub header: Header,
    pub method: Method,
    pub chosen: OptimizationResult,
    pub closed_form: OptimizationResult,
    pub brute_force: OptimizationResult,
    pub gap: AllocationGap,
    #[serde(with = "rational::serde_rational")]
    pub all_ones_epoch_time: Rational,
}

pub fn plan(prep: &Prepared, method: Method, seed: Option<u64>) -> Result<PlanReport> {
    let model = prep.model();
    let onoc = &prep.config.onoc;
    let closed = closed_form_allocation(&model, onoc)?;
    let brute = brute_force_allocation(&model, onoc)?;
    let ones = CoreAllocation::from_forward(&vec![1; prep.schedule.depth()]);
    Ok(PlanReport {
        header: Header::new("plan", prep, seed),
        method,
        chosen: match method {
            Method::ClosedForm => closed.clone(),
            Method::BruteForce => brute.clone(),
        },
        gap: gap_between(&closed, &brute),
        closed_form: closed,
        brute_force: brute,
        all_ones_epoch_time: model.epoch_time(&ones)?,
    })
}

impl PlanReport {
    /// `period,phase,layer,neurons,closed_form_cores,brute_force_cores,compute,comm,overhead,total`
    /// with costs taken from the chosen method.
    pub fn to_csv(&self, prep: &Prepared) -> Result<String> {
        let rows = prep
            .schedule
            .periods()
            .iter()
            .zip(&self.chosen.per_period_costs)
            .map(|(p, c)| {
                vec![
                    p.index.to_string(),
                    phase_name(p.phase).into(),
                    p.layer.to_string(),
                    p.neuron_count.to_string(),
                    self.closed_form.allocation.get(p.index).to_string(),
                    self.brute_force.allocation.get(p.index).to_string(),
                    f(&c.compute),
                    f(&c.comm),
                    f(&c.overhead),
                    f(&c.total()),
                ]
            })
            .collect();
        csv_string(
            &[
                "period",
                "phase",
                "layer",
                "neurons",
                "closed_form_cores",
                "brute_force_cores",
                "compute",
                "comm",
                "overhead",
                "total",
            ],
            rows,
        )
    }
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Forward => "FP",
        Phase::Backward => "BP",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    #[serde(flatten)]
    pub header: Header,
    pub strategy: Strategy,
    pub allocation: CoreAllocation,
    pub summary: MappingSummary,
    pub analysis: MappingReport,
    #[serde(skip)]
    triples: String,
}

pub fn map_report(
    prep: &Prepared,
    strategy: Strategy,
    method: Method,
    seed: Option<u64>,
) -> Result<MapReport> {
    let alloc = chosen_allocation(prep, method)?;
    let mapping = map(strategy, &alloc, prep.config.onoc.m, &prep.schedule)?;
    let analysis = analyze(&mapping, &prep.config.fcnn, &prep.config.onoc.loss)?;
    let mut buf = Vec::new();
    mapping.write_triples_csv(&mut buf)?;
    Ok(MapReport {
        header: Header::new("map", prep, seed),
        strategy,
        allocation: alloc,
        summary: mapping.summary(),
        analysis,
        triples: String::from_utf8(buf).expect("csv output is utf-8"),
    })
}

impl MapReport {
    /// `period,neuron,core` triples, 1-indexed.
    pub fn to_csv(&self) -> String {
        self.triples.clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub header: Header,
    pub strategy: Strategy,
    pub allocation: CoreAllocation,
    pub report: EpochReport,
}

pub fn run_epoch(
    prep: &Prepared,
    alloc: &CoreAllocation,
    strategy: Strategy,
    backend: Backend,
) -> Result<EpochReport> {
    let cfg = &prep.config;
    let mapping = map(strategy, alloc, cfg.onoc.m, &prep.schedule)?;
    let model = prep.model();
    match backend {
        Backend::Onoc => simulate_epoch(
            &mapping,
            &model,
            &cfg.fcnn,
            &cfg.onoc.energy,
            &cfg.onoc.clock_hz,
        ),
        Backend::Enoc => simulate_enoc_epoch(
            &mapping,
            &model,
            &cfg.fcnn,
            &cfg.run.enoc,
            &cfg.onoc.energy,
            &cfg.onoc.clock_hz,
        ),
    }
}

pub fn simulate(
    prep: &Prepared,
    strategy: Strategy,
    backend: Backend,
    method: Method,
    seed: Option<u64>,
) -> Result<SimulateReport> {
    let alloc = chosen_allocation(prep, method)?;
    let report = run_epoch(prep, &alloc, strategy, backend)?;
    Ok(SimulateReport {
        header: Header::new("simulate", prep, seed),
        strategy,
        allocation: alloc,
        report,
    })
}

impl SimulateReport {
    /// `period,phase,compute,comm,overhead,total,slots,bits`
    pub fn to_csv(&self) -> Result<String> {
        let rows = self
            .report
            .per_period
            .iter()
            .map(|p| {
                vec![
                    p.period.to_string(),
                    phase_name(p.phase).into(),
                    f(&p.compute),
                    f(&p.comm),
                    f(&p.overhead),
                    f(&(&p.compute + &p.comm + &p.overhead)),
                    p.slot_count.to_string(),
                    p.slot_bits.iter().sum::<u64>().to_string(),
                ]
            })
            .collect();
        csv_string(
            &[
                "period", "phase", "compute", "comm", "overhead", "total", "slots", "bits",
            ],
            rows,
        )
    }

    pub fn wavelengths_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_matrices_csv(&self.report.wavelength_matrices, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub policy: &'static str,
    pub backend: Backend,
    pub allocation: Vec<u64>,
    #[serde(with = "rational::serde_rational")]
    pub epoch_time: Rational,
    #[serde(with = "rational::serde_rational")]
    pub compute: Rational,
    #[serde(with = "rational::serde_rational")]
    pub comm: Rational,
    pub seconds: f64,
    pub energy_joules: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    #[serde(flatten)]
    pub header: Header,
    pub strategy: Strategy,
    pub rows: Vec<CompareRow>,
}

/// Closed form, exhaustive optimum, FGP and FNP, each on both networks.
pub fn compare(
    prep: &Prepared,
    strategy: Strategy,
    fnp_cores: u64,
    seed: Option<u64>,
) -> Result<CompareReport> {
    let model = prep.model();
    let onoc = &prep.config.onoc;
    let policies = [
        (
            "closed_form",
            closed_form_allocation(&model, onoc)?.allocation,
        ),
        (
            "brute_force",
            brute_force_allocation(&model, onoc)?.allocation,
        ),
        ("fgp", fgp_allocation(&prep.schedule, onoc)?),
        ("fnp", fnp_allocation(&prep.schedule, onoc, fnp_cores)?),
    ];
    let mut rows = Vec::new();
    for (policy, alloc) in &policies {
        for backend in [Backend::Onoc, Backend::Enoc] {
            let r = run_epoch(prep, alloc, strategy, backend)?;
            rows.push(CompareRow {
                policy,
                backend,
                allocation: alloc.forward().to_vec(),
                seconds: rational::to_f64(&(&r.total_time / &onoc.clock_hz)),
                energy_joules: r.energy.total(),
                compute: r.compute_time(),
                comm: r.comm_time(),
                epoch_time: r.total_time,
            });
        }
    }
    Ok(CompareReport {
        header: Header::new("compare", prep, seed),
        strategy,
        rows,
    })
}

impl CompareReport {
    /// `policy,backend,epoch_time,compute,comm,seconds,energy_joules`
    pub fn to_csv(&self) -> Result<String> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.policy.to_string(),
                    match r.backend {
                        Backend::Onoc => "onoc".into(),
                        Backend::Enoc => "enoc".into(),
                    },
                    f(&r.epoch_time),
                    f(&r.compute),
                    f(&r.comm),
                    r.seconds.to_string(),
                    r.energy_joules.to_string(),
                ]
            })
            .collect();
        csv_string(
            &[
                "policy",
                "backend",
                "epoch_time",
                "compute",
                "comm",
                "seconds",
                "energy_joules",
            ],
            rows,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cores: u64,
    #[serde(with = "rational::serde_rational")]
    pub compute: Rational,
    #[serde(with = "rational::serde_rational")]
    pub comm: Rational,
    #[serde(with = "rational::serde_rational")]
    pub total: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub header: Header,
    /// Swept period, or `None` when every period gets the same count.
    pub period: Option<usize>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates the cost model for every core count in `lo..=hi`, either on
/// one period or on all periods at once. Counts above a period's neuron
/// count are clamped to it.
pub fn sweep(
    prep: &Prepared,
    period: Option<usize>,
    lo: u64,
    hi: u64,
    seed: Option<u64>,
) -> Result<SweepReport> {
    let m = prep.config.onoc.m;
    if lo == 0 || lo > hi || hi > m {
        return Err(Error::invalid(
            "--range",
            format!("need 1 <= from <= to <= {m}, got {lo}:{hi}"),
        ));
    }
    let model = prep.model();
    if let Some(i) = period {
        prep.schedule
            .check_index(i)
            .map_err(|e| Error::invalid("--period", e.to_string()))?;
    }
    let row = |c: u64| -> Result<SweepRow> {
        match period {
            Some(i) => {
                let cost = model.period_cost(i, c.min(prep.schedule.period(i).neuron_count))?;
                Ok(SweepRow {
                    cores: c,
                    total: cost.total(),
                    compute: cost.compute,
                    comm: cost.comm,
                })
            }
            None => {
                let fp: Vec<u64> = (1..=prep.schedule.depth())
                    .map(|k| c.min(prep.schedule.layer_width(k)))
                    .collect();
                let alloc = CoreAllocation::from_forward(&fp);
                let costs = model.period_costs(&alloc)?;
                let compute = costs.iter().map(|p| p.compute.clone()).sum();
                let comm = costs.iter().map(|p| p.comm.clone()).sum();
                Ok(SweepRow {
                    cores: c,
                    compute,
                    comm,
                    total: model.epoch_time(&alloc)?,
                })
            }
        }
    };
    let rows = (lo..=hi).map(row).collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        header: Header::new("sweep", prep, seed),
        period,
        rows,
    })
}

impl SweepReport {
    /// `cores,compute,comm,total`
    pub fn to_csv(&self) -> Result<String> {
        let rows = self
            .rows
            .iter()
            .map(|r| vec![r.cores.to_string(), f(&r.compute), f(&r.comm), f(&r.total)])
            .collect();
        csv_string(&["cores", "compute", "comm", "total"], rows)
    }
}
