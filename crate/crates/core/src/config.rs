//! TOML scenario files.
//!
//! Every section is optional and falls back to the reference scenario. A
//! minimal file overriding the carrier frequency looks like:
//!
//! ```toml
//! [rf]
//! frequency = 5.0e9
//! ```
//!
//! Sections: `[body]`, `[orbits.sps]`, `[orbits.llo]`, `[[sites]]` (exactly
//! two entries, primary first), `[fso]`, `[pointing]`, `[rf]`,
//! `[rf.transmitter]`, `[rf.receiver]`, `[grid]`, `[monte_carlo]`, `[relay]`.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::chain::{McSettings, Scenario};
use crate::error::{Error, Result};
use crate::fso::FsoLink;
use crate::orbits::{BodyConstants, GroundSite, KeplerianElements};
use crate::pointing::PointingModel;
use crate::rf::RfLink;

/// Orbital elements where any field may be omitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semi_major_axis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eccentricity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inclination: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arg_perigee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raan: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_anomaly: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch: Option<f64>,
}

impl ElementOverrides {
    fn full(el: &KeplerianElements) -> Self {
        ElementOverrides {
            semi_major_axis: Some(el.semi_major_axis),
            eccentricity: Some(el.eccentricity),
            inclination: Some(el.inclination),
            arg_perigee: Some(el.arg_perigee),
            raan: Some(el.raan),
            true_anomaly: Some(el.true_anomaly),
            epoch: Some(el.epoch),
        }
    }

    fn apply(&self, base: KeplerianElements) -> KeplerianElements {
        KeplerianElements {
            semi_major_axis: self.semi_major_axis.unwrap_or(base.semi_major_axis),
            eccentricity: self.eccentricity.unwrap_or(base.eccentricity),
            inclination: self.inclination.unwrap_or(base.inclination),
            arg_perigee: self.arg_perigee.unwrap_or(base.arg_perigee),
            raan: self.raan.unwrap_or(base.raan),
            true_anomaly: self.true_anomaly.unwrap_or(base.true_anomaly),
            epoch: self.epoch.unwrap_or(base.epoch),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitsSection {
    pub sps: ElementOverrides,
    pub llo: ElementOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub elevation_mask_deg: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let s = Scenario::default();
        GridSection {
            t0: s.t0,
            t1: s.t1,
            dt: s.dt,
            elevation_mask_deg: s.elevation_mask,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaySection {
    /// Halve the relay power per RF link.
    pub split_power: bool,
}

/// On-disk form of a [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub body: BodyConstants,
    pub orbits: OrbitsSection,
    pub sites: Vec<GroundSite>,
    pub fso: FsoLink,
    pub pointing: PointingModel,
    pub rf: RfLink,
    pub grid: GridSection,
    pub monte_carlo: McSettings,
    pub relay: RelaySection,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ConfigDocument::from_scenario(&Scenario::default())
    }
}

impl ConfigDocument {
    pub fn from_scenario(s: &Scenario) -> Self {
        ConfigDocument {
            body: s.body,
            orbits: OrbitsSection {
                sps: ElementOverrides::full(&s.sps),
                llo: ElementOverrides::full(&s.llo),
            },
            sites: s.sites.clone(),
            fso: s.fso,
            pointing: s.pointing,
            rf: s.rf,
            grid: GridSection {
                t0: s.t0,
                t1: s.t1,
                dt: s.dt,
                elevation_mask_deg: s.elevation_mask,
            },
            monte_carlo: s.monte_carlo,
            relay: RelaySection {
                split_power: s.split_power,
            },
        }
    }

    /// Builds and validates the scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let s = Scenario {
            body: self.body,
            sps: self.orbits.sps.apply(KeplerianElements::sps()),
            llo: self.orbits.llo.apply(KeplerianElements::llo()),
            sites: self.sites.clone(),
            elevation_mask: self.grid.elevation_mask_deg,
            fso: self.fso,
            pointing: self.pointing,
            rf: self.rf,
            split_power: self.relay.split_power,
            t0: self.grid.t0,
            t1: self.grid.t1,
            dt: self.grid.dt,
            monte_carlo: self.monte_carlo,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Parses and validates a scenario from TOML text.
pub fn from_str(text: &str) -> Result<Scenario> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_scenario()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    from_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Serialises a scenario so that [`from_str`] gives it back unchanged.
pub fn to_toml(s: &Scenario) -> Result<String> {
    ConfigDocument::from_scenario(s).to_toml()
}
