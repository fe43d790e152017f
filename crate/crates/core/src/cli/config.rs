use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::costmodel::{CommConvention, CoreAllocation, CostModel};
use crate::error::{Error, Result};
use crate::mapping::Strategy;
use crate::model::{
    build_period_schedule, derive_workload, FcnnSpec, OnocConfig, PeriodSchedule,
    WorkloadOverrides, WorkloadParams,
};
use crate::netsim::{Backend, EnocParams};
use crate::optimizer::Method;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a run needs, as read from the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fcnn: FcnnSpec,
    #[serde(default)]
    pub onoc: OnocConfig,
    #[serde(default)]
    pub workload: WorkloadOverrides,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub strategy: Strategy,
    pub backend: Backend,
    pub method: Method,
    pub comm_convention: CommConvention,
    /// FNP baseline core count.
    pub fnp_cores: u64,
    /// Per-layer core counts to use instead of optimizing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelengths_out: Option<PathBuf>,
    pub enoc: EnocParams,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            strategy: Strategy::default(),
            backend: Backend::default(),
            method: Method::default(),
            comm_convention: CommConvention::default(),
            fnp_cores: 200,
            allocation: None,
            out: None,
            wavelengths_out: None,
            enoc: EnocParams::default(),
        }
    }
}

impl RunConfig {
    /// Sample config with every default filled in.
    pub fn example() -> Self {
        RunConfig {
            fcnn: FcnnSpec::new(vec![784, 1000, 500, 10], 1, 4).expect("valid sample network"),
            onoc: OnocConfig::default(),
            workload: WorkloadOverrides::default(),
            run: RunSection::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "config".to_string()
            } else {
                path
            };
            Error::invalid(field, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let workload = derive_workload(&self.fcnn, &self.onoc, &self.workload)?;
        let schedule = build_period_schedule(&self.fcnn)?;
        workload.validate(&schedule)?;
        if self.onoc.core_cap() < 1 {
            return Err(Error::invalid(
                "onoc.phi",
                "floor(phi * m) must be at least 1",
            ));
        }
        let fixed = match &self.run.allocation {
            Some(fp) => {
                if fp.len() != schedule.depth() {
                    return Err(Error::invalid(
                        "run.allocation",
                        format!(
                            "expected {} layer counts, got {}",
                            schedule.depth(),
                            fp.len()
                        ),
                    ));
                }
                let alloc = CoreAllocation::from_forward(fp);
                alloc
                    .validate(&schedule, Some(self.onoc.core_cap()))
                    .map_err(|e| Error::invalid("run.allocation", e.to_string()))?;
                Some(alloc)
            }
            None => None,
        };
        Ok(Prepared {
            config: self.clone(),
            schedule,
            workload,
            fixed,
        })
    }
}

/// A validated config with its derived schedule and workload.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub schedule: PeriodSchedule,
    pub workload: WorkloadParams,
    pub fixed: Option<CoreAllocation>,
}

impl Prepared {
    pub fn model(&self) -> CostModel<'_> {
        CostModel::new(&self.schedule, &self.workload, self.config.onoc.lambda_max)
            .with_convention(self.config.run.comm_convention)
    }
}
