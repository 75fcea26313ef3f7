//! Scenario files: a JSON document describing one problem instance.
//!
//! ```json
//! {
//!   "topology": "mac",
//!   "slots": 3,
//!   "energy": { "tx1": [0.5, 1, 2], "tx2": [1, 2, 0.5], "rx": [1.5, 2, 0.5] },
//!   "rate_function": { "log_base": "base2" },
//!   "decoding": { "kind": "inverse_g" }
//! }
//! ```
//!
//! The energy block carries only the profiles the topology uses: `tx`/`rx`
//! for single_user, `tx`/`relay`/`rx` for two_hop (source, relay,
//! destination), `tx1`/`tx2`/`rx` for mac and `tx`/`rx1`/`rx2` for bc.
//! `sigma2` is required for bc and rejected elsewhere; `rx_has_battery`
//! defaults to true and only affects single_user.

use std::fs;
use std::path::Path;

use ehopt_core::model::{
    check_scenario, DecodingFunction, EnergyProfile, LinkModel, LogBase, RateFunction, Scenario,
};
use ehopt_core::Error;
use serde::Deserialize;

use crate::commands::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub topology: TopologyName,
    pub slots: usize,
    pub energy: EnergyBlock,
    pub rate_function: RateBlock,
    pub decoding: DecodingBlock,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default = "default_battery")]
    pub rx_has_battery: bool,
}

fn default_battery() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyName {
    SingleUser,
    TwoHop,
    Mac,
    Bc,
}

impl TopologyName {
    fn label(self) -> &'static str {
        match self {
            TopologyName::SingleUser => "single_user",
            TopologyName::TwoHop => "two_hop",
            TopologyName::Mac => "mac",
            TopologyName::Bc => "bc",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyBlock {
    pub tx: Option<Vec<f64>>,
    pub rx: Option<Vec<f64>>,
    pub relay: Option<Vec<f64>>,
    pub tx1: Option<Vec<f64>>,
    pub tx2: Option<Vec<f64>>,
    pub rx1: Option<Vec<f64>>,
    pub rx2: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBlock {
    pub log_base: LogBaseName,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBaseName {
    Natural,
    Base2,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecodingBlock {
    /// Decoding costs exactly the power that transmitting the same rate
    /// would; the base is taken from `rate_function`.
    InverseG,
    Linear {
        a: f64,
        #[serde(default)]
        b: f64,
    },
    Exponential {
        c: f64,
        d: f64,
        e: f64,
    },
}

/// Reads and validates a scenario file.
///
/// File and JSON shape problems are usage errors; a document that parses
/// but violates the model's invariants is an infeasible-scenario error.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|err| CliError::Usage(format!("cannot read {}: {err}", path.display())))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|err| CliError::Usage(format!("invalid scenario file: {err}")))?;
    file.into_scenario()
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, CliError> {
        let base = match self.rate_function.log_base {
            LogBaseName::Natural => LogBase::Natural,
            LogBaseName::Base2 => LogBase::Base2,
        };
        let decoding = match self.decoding {
            DecodingBlock::InverseG => DecodingFunction::InverseG { base },
            DecodingBlock::Linear { a, b } => DecodingFunction::Linear { a, b },
            DecodingBlock::Exponential { c, d, e } => DecodingFunction::Exponential { c, d, e },
        };
        let link = LinkModel::new(RateFunction::new(base), decoding).map_err(infeasible)?;

        let topology = self.topology;
        let mut profiles = Profiles {
            topology,
            slots: self.slots,
            block: self.energy,
        };
        let sigma2 = match (topology, self.sigma2) {
            (TopologyName::Bc, Some(value)) => value,
            (TopologyName::Bc, None) => {
                return Err(CliError::Usage(
                    "topology 'bc' requires the 'sigma2' field".to_string(),
                ))
            }
            (_, Some(_)) => {
                return Err(CliError::Usage(format!(
                    "field 'sigma2' does not apply to topology '{}'",
                    topology.label()
                )))
            }
            (_, None) => f64::NAN,
        };

        let scenario = match topology {
            TopologyName::SingleUser => Scenario::SingleUser {
                tx: profiles.take("tx")?,
                rx: profiles.take("rx")?,
                rx_has_battery: self.rx_has_battery,
                link,
            },
            TopologyName::TwoHop => Scenario::TwoHop {
                source: profiles.take("tx")?,
                relay: profiles.take("relay")?,
                destination: profiles.take("rx")?,
                link,
            },
            TopologyName::Mac => Scenario::Mac {
                tx1: profiles.take("tx1")?,
                tx2: profiles.take("tx2")?,
                rx: profiles.take("rx")?,
                link,
            },
            TopologyName::Bc => Scenario::Bc {
                tx: profiles.take("tx")?,
                rx1: profiles.take("rx1")?,
                rx2: profiles.take("rx2")?,
                sigma2,
                link,
            },
        };
        profiles.reject_unused()?;

        let violations = check_scenario(&scenario);
        if !violations.is_empty() {
            return Err(infeasible(Error::InvalidScenario { violations }));
        }
        Ok(scenario)
    }
}

fn infeasible(err: Error) -> CliError {
    CliError::Infeasible(err.to_string())
}

struct Profiles {
    topology: TopologyName,
    slots: usize,
    block: EnergyBlock,
}

impl Profiles {
    fn slot_mut(&mut self, key: &str) -> &mut Option<Vec<f64>> {
        match key {
            "tx" => &mut self.block.tx,
            "rx" => &mut self.block.rx,
            "relay" => &mut self.block.relay,
            "tx1" => &mut self.block.tx1,
            "tx2" => &mut self.block.tx2,
            "rx1" => &mut self.block.rx1,
            _ => &mut self.block.rx2,
        }
    }

    fn take(&mut self, key: &str) -> Result<EnergyProfile, CliError> {
        let label = self.topology.label();
        let values = self.slot_mut(key).take().ok_or_else(|| {
            CliError::Usage(format!(
                "topology '{label}' requires energy profile '{key}'"
            ))
        })?;
        if values.len() != self.slots {
            return Err(CliError::Infeasible(format!(
                "energy profile '{key}' has {} slots, the file declares {}",
                values.len(),
                self.slots
            )));
        }
        EnergyProfile::new(values).map_err(infeasible)
    }

    fn reject_unused(&mut self) -> Result<(), CliError> {
        let label = self.topology.label();
        for key in ["tx", "rx", "relay", "tx1", "tx2", "rx1", "rx2"] {
            if self.slot_mut(key).is_some() {
                return Err(CliError::Usage(format!(
                    "energy profile '{key}' does not apply to topology '{label}'"
                )));
            }
        }
        Ok(())
    }
}
