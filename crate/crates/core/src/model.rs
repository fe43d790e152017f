//! Network description, the period schedule derived from it, and the
//! exogenous workload and ONoC parameters.
//!
//! Periods and layers are 1-indexed everywhere in the public API: period
//! `i` in `1..=2l`, layer `k` in `0..=l`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// A fully-connected network: `layer_sizes[k]` is the width of layer `k`,
/// layer 0 being the input layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcnnSpec {
    pub layer_sizes: Vec<u64>,
    /// Batch size.
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    /// Bytes per stored parameter.
    #[serde(default = "default_param_width")]
    pub param_width: u64,
    /// Optional per-layer activation names, metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn default_batch() -> u64 {
    1
}

fn default_param_width() -> u64 {
    4
}

impl FcnnSpec {
    pub fn new(layer_sizes: Vec<u64>, batch_size: u64, param_width: u64) -> Result<Self> {
        let spec = FcnnSpec {
            layer_sizes,
            batch_size,
            param_width,
            labels: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::invalid(
                "fcnn.layer_sizes",
                "need at least an input and an output layer",
            ));
        }
        if let Some(k) = self.layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::invalid(
                format!("fcnn.layer_sizes[{k}]"),
                "every layer needs at least one neuron",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("fcnn.batch_size", "must be positive"));
        }
        if self.param_width == 0 {
            return Err(Error::invalid("fcnn.param_width", "must be positive"));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.layer_sizes.len() {
                return Err(Error::invalid(
                    "fcnn.labels",
                    format!("expected {} labels", self.layer_sizes.len()),
                ));
            }
        }
        Ok(())
    }

    /// Number of computing layers `l`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Width of layer `k`, `k` in `0..=l`.
    pub fn width(&self, k: usize) -> u64 {
        self.layer_sizes[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "FP")]
    Forward,
    #[serde(rename = "BP")]
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub index: usize,
    pub phase: Phase,
    pub layer: usize,
    pub neuron_count: u64,
}

/// Periods `1..=2l` of one epoch. Period 0 (the load phase) carries no
/// layer and is accounted for by `D_input`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodSchedule {
    layer_sizes: Vec<u64>,
    periods: Vec<Period>,
}

pub fn build_period_schedule(fcnn: &FcnnSpec) -> Result<PeriodSchedule> {
    fcnn.validate()?;
    let l = fcnn.depth();
    let periods = (1..=2 * l)
        .map(|i| {
            let (phase, layer) = if i <= l {
                (Phase::Forward, i)
            } else {
                (Phase::Backward, 2 * l - i + 1)
            };
            Period {
                index: i,
                phase,
                layer,
                neuron_count: fcnn.width(layer),
            }
        })
        .collect();
    Ok(PeriodSchedule {
        layer_sizes: fcnn.layer_sizes.clone(),
        periods,
    })
}

impl PeriodSchedule {
    /// Number of computing layers `l`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn period_count(&self) -> usize {
        self.periods.len()
    }

    /// Period `i`, `1 <= i <= 2l`.
    pub fn period(&self, i: usize) -> &Period {
        &self.periods[i - 1]
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn layer_width(&self, k: usize) -> u64 {
        self.layer_sizes[k]
    }

    pub fn layer_sizes(&self) -> &[u64] {
        &self.layer_sizes
    }

    /// The BP period that revisits the layer of FP period `i`.
    pub fn mirror(&self, i: usize) -> usize {
        2 * self.depth() - i + 1
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.period_count() {
            return Err(Error::invalid(
                "period",
                format!("index {i} outside 1..={}", self.period_count()),
            ));
        }
        Ok(())
    }
}

/// Calibration constants of the time model. All durations are in cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadParams {
    /// `alpha[i-1]`: work units per neuron in FP period `i`, batch included.
    #[serde(with = "rational::serde_rational_vec")]
    pub alpha: Vec<Rational>,
    /// `beta[j]`: work units per weight update in BP period `l+1+j`.
    #[serde(with = "rational::serde_rational_vec")]
    pub beta: Vec<Rational>,
    /// `b[i-1]`: time for one core of period `i` to finish its transmission.
    #[serde(with = "rational::serde_rational_vec")]
    pub b: Vec<Rational>,
    /// Work units per cycle per core.
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    /// Per-period overhead.
    #[serde(with = "rational::serde_rational_vec")]
    pub zeta: Vec<Rational>,
    /// Period-0 load time.
    #[serde(with = "rational::serde_rational")]
    pub d_input: Rational,
}

impl WorkloadParams {
    pub fn alpha(&self, i: usize) -> &Rational {
        &self.alpha[i - 1]
    }

    /// `beta_i` for a BP period `i` in `l+1..=2l`.
    pub fn beta(&self, i: usize) -> &Rational {
        &self.beta[i - self.alpha.len() - 1]
    }

    pub fn b(&self, i: usize) -> &Rational {
        &self.b[i - 1]
    }

    pub fn zeta(&self, i: usize) -> &Rational {
        &self.zeta[i - 1]
    }

    pub fn validate(&self, schedule: &PeriodSchedule) -> Result<()> {
        let l = schedule.depth();
        let lens = [
            ("workload.alpha", self.alpha.len(), l),
            ("workload.beta", self.beta.len(), l),
            ("workload.b", self.b.len(), 2 * l),
            ("workload.zeta", self.zeta.len(), 2 * l),
        ];
        for (field, got, want) in lens {
            if got != want {
                return Err(Error::invalid(
                    field,
                    format!("expected {want} entries, got {got}"),
                ));
            }
        }
        let lists = [
            ("workload.alpha", &self.alpha),
            ("workload.beta", &self.beta),
            ("workload.b", &self.b),
            ("workload.zeta", &self.zeta),
        ];
        for (field, list) in lists {
            if let Some(k) = list.iter().position(|v| v.is_negative()) {
                return Err(Error::invalid(
                    format!("{field}[{k}]"),
                    "must be nonnegative",
                ));
            }
        }
        if !self.c.is_positive() {
            return Err(Error::invalid("workload.c", "must be positive"));
        }
        if self.d_input.is_negative() {
            return Err(Error::invalid("workload.d_input", "must be nonnegative"));
        }
        Ok(())
    }

    /// Uniform parameters, handy for hand-checked instances.
    pub fn uniform(l: usize, alpha: Rational, beta: Rational, b: Rational, c: Rational) -> Self {
        WorkloadParams {
            alpha: vec![alpha; l],
            beta: vec![beta; l],
            b: vec![b; 2 * l],
            c,
            zeta: vec![Rational::zero(); 2 * l],
            d_input: Rational::zero(),
        }
    }
}

/// Caller-supplied values that take precedence over [`derive_workload`]'s
/// defaults. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct WorkloadOverrides {
    #[serde(
        with = "rational::serde_rational_vec_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub alpha: Option<Vec<Rational>>,
    #[serde(
        with = "rational::serde_rational_vec_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub beta: Option<Vec<Rational>>,
    #[serde(
        with = "rational::serde_rational_vec_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub b: Option<Vec<Rational>>,
    #[serde(
        with = "rational::serde_rational_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub c: Option<Rational>,
    #[serde(
        with = "rational::serde_rational_vec_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub zeta: Option<Vec<Rational>>,
    #[serde(
        with = "rational::serde_rational_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub d_input: Option<Rational>,
    /// Neurons per core assumed when sizing the default `b` payload.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neurons_per_core_ref: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossParams {
    /// Loss of one optical link, dB.
    pub link_db: f64,
    /// Loss of one optical router, dB.
    pub router_db: f64,
    /// E/O converter loss, dB.
    pub eo_db: f64,
    /// O/E converter loss, dB.
    pub oe_db: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        // Illustrative device values; replace with the target process.
        LossParams {
            link_db: 0.15,
            router_db: 0.005,
            eo_db: 1.0,
            oe_db: 1.0,
        }
    }
}

/// Energy coefficients. All default to zero: there are no published
/// values for this model and results are meaningless until supplied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub static_power_watts: f64,
    pub dynamic_joules_per_bit: f64,
    pub joules_per_work_unit: f64,
    pub joules_per_state_transition: f64,
}

/// Ring ONoC parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct OnocConfig {
    /// Total cores on the ring.
    pub m: u64,
    pub lambda_max: u64,
    /// Utilization cap in (0, 1].
    #[serde(with = "rational::serde_rational")]
    pub phi: Rational,
    #[serde(with = "rational::serde_rational")]
    pub clock_hz: Rational,
    /// Bits per second per wavelength.
    #[serde(with = "rational::serde_rational")]
    pub bandwidth_per_wavelength: Rational,
    /// O/E plus E/O conversion, cycles.
    #[serde(with = "rational::serde_rational")]
    pub oe_eo_delay: Rational,
    /// Cycles per flit.
    #[serde(with = "rational::serde_rational")]
    pub serialization_delay: Rational,
    pub flit_bytes: u64,
    pub loss: LossParams,
    pub energy: EnergyParams,
}

impl Default for OnocConfig {
    fn default() -> Self {
        OnocConfig {
            m: 1000,
            lambda_max: 64,
            phi: int(1),
            clock_hz: int(3_400_000_000),
            bandwidth_per_wavelength: int(40_000_000_000),
            oe_eo_delay: int(1),
            serialization_delay: int(2),
            flit_bytes: 16,
            loss: LossParams::default(),
            energy: EnergyParams::default(),
        }
    }
}

impl OnocConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("onoc.m", "need at least one core"));
        }
        if self.lambda_max == 0 {
            return Err(Error::invalid(
                "onoc.lambda_max",
                "need at least one wavelength",
            ));
        }
        if !self.phi.is_positive() || self.phi > int(1) {
            return Err(Error::invalid("onoc.phi", "must lie in (0, 1]"));
        }
        if !self.clock_hz.is_positive() {
            return Err(Error::invalid("onoc.clock_hz", "must be positive"));
        }
        if !self.bandwidth_per_wavelength.is_positive() {
            return Err(Error::invalid(
                "onoc.bandwidth_per_wavelength",
                "must be positive",
            ));
        }
        if self.oe_eo_delay.is_negative() {
            return Err(Error::invalid("onoc.oe_eo_delay", "must be nonnegative"));
        }
        if self.serialization_delay.is_negative() {
            return Err(Error::invalid(
                "onoc.serialization_delay",
                "must be nonnegative",
            ));
        }
        if self.flit_bytes == 0 {
            return Err(Error::invalid("onoc.flit_bytes", "must be positive"));
        }
        let e = &self.energy;
        let coeffs = [
            ("onoc.energy.static_power_watts", e.static_power_watts),
            (
                "onoc.energy.dynamic_joules_per_bit",
                e.dynamic_joules_per_bit,
            ),
            ("onoc.energy.joules_per_work_unit", e.joules_per_work_unit),
            (
                "onoc.energy.joules_per_state_transition",
                e.joules_per_state_transition,
            ),
        ];
        for (field, v) in coeffs {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be a nonnegative number"));
            }
        }
        Ok(())
    }

    /// `floor(phi * m)`, the per-period core cap.
    pub fn core_cap(&self) -> u64 {
        use num_traits::ToPrimitive;
        (&self.phi * int(self.m))
            .floor()
            .to_integer()
            .to_u64()
            .unwrap_or(0)
    }

    pub fn bits_per_cycle(&self) -> Rational {
        &self.bandwidth_per_wavelength / &self.clock_hz
    }
}

/// Fills every workload field missing from `overrides` with an analytic
/// default:
///
/// * `alpha_i = 2 * n_{i-1} * batch + batch` (a multiply-accumulate pair per
///   incoming connection per sample plus the activation),
/// * `beta_i = 2 * batch`,
/// * `b_i = payload_bits / bits_per_cycle + oe_eo_delay + serialization_delay * flits`,
///   where the payload is one output (FP) or gradient (BP) value per sample
///   for each of `neurons_per_core_ref` neurons,
/// * `c = 1`, `zeta_i = 0`, `d_input = 0`.
///
/// These defaults are a convenience for exploring the model and are not
/// calibrated against hardware.
pub fn derive_workload(
    fcnn: &FcnnSpec,
    onoc: &OnocConfig,
    overrides: &WorkloadOverrides,
) -> Result<WorkloadParams> {
    fcnn.validate()?;
    onoc.validate()?;
    check_overrides(overrides)?;
    let l = fcnn.depth();
    let batch = int(fcnn.batch_size);

    let alpha = overrides.alpha.clone().unwrap_or_else(|| {
        (1..=l)
            .map(|i| int(2) * int(fcnn.width(i - 1)) * &batch + &batch)
            .collect()
    });
    let beta = overrides
        .beta
        .clone()
        .unwrap_or_else(|| vec![int(2) * &batch; l]);
    let b = match &overrides.b {
        Some(b) => b.clone(),
        None => {
            let per_core = overrides.neurons_per_core_ref.unwrap_or(1);
            let payload_bytes = per_core * fcnn.batch_size * fcnn.param_width;
            let flits = payload_bytes.div_ceil(onoc.flit_bytes);
            let bi = int(payload_bytes * 8) / onoc.bits_per_cycle()
                + &onoc.oe_eo_delay
                + &onoc.serialization_delay * int(flits);
            vec![bi; 2 * l]
        }
    };
    let params = WorkloadParams {
        alpha,
        beta,
        b,
        c: overrides.c.clone().unwrap_or_else(|| int(1)),
        zeta: overrides
            .zeta
            .clone()
            .unwrap_or_else(|| vec![Rational::zero(); 2 * l]),
        d_input: overrides.d_input.clone().unwrap_or_else(Rational::zero),
    };
    params.validate(&build_period_schedule(fcnn)?)?;
    Ok(params)
}

fn check_overrides(o: &WorkloadOverrides) -> Result<()> {
    let lists = [
        ("workload.alpha", &o.alpha),
        ("workload.beta", &o.beta),
        ("workload.b", &o.b),
        ("workload.zeta", &o.zeta),
    ];
    for (field, list) in lists {
        if let Some(k) = list.iter().flatten().position(|v| v.is_negative()) {
            return Err(Error::invalid(
                format!("{field}[{k}]"),
                "overrides must be nonnegative",
            ));
        }
    }
    if o.c.as_ref().is_some_and(|c| !c.is_positive()) {
        return Err(Error::invalid("workload.c", "must be positive"));
    }
    if o.d_input.as_ref().is_some_and(|d| d.is_negative()) {
        return Err(Error::invalid(
            "workload.d_input",
            "overrides must be nonnegative",
        ));
    }
    if o.neurons_per_core_ref == Some(0) {
        return Err(Error::invalid(
            "workload.neurons_per_core_ref",
            "must be positive",
        ));
    }
    Ok(())
}
