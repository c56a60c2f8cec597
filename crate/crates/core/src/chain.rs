//! The end-to-end chain: laser hop to the relay, optical harvesting, and the
//! RF hop from the relay to the two surface sites, evaluated on a time grid.
//!
//! The first configured site is the primary one. The relay's transmit dish
//! tracks it, so its link runs at boresight on both ends. The second site
//! only has a tracking receive dish and sees the relay transmitter off
//! boresight. The relay stores no energy: whatever the array harvests at an
//! instant is radiated at that instant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fso::FsoLink;
use crate::orbits::{
    common_window, propagate, sat_sat_geometry, sat_site_geometry, site_position, BodyConstants,
    GroundSite, KeplerianElements, LinkGeometry, StateVector, Vec3, VisibilityWindow,
};
use crate::pointing::{sample_offsets, summarize, McConfig, McStats, PointingModel};
use crate::rf::{off_boresight, RfLink, Tracking};
use crate::SPEED_OF_LIGHT;

/// Monte Carlo defaults carried by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub n_samples: usize,
    pub seed: u64,
    pub n_bins: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            n_samples: 1_000_000,
            seed: 1,
            n_bins: 200,
        }
    }
}

impl McSettings {
    pub fn config(&self) -> McConfig {
        McConfig::new(self.n_samples, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub body: BodyConstants,
    pub sps: KeplerianElements,
    pub llo: KeplerianElements,
    /// Exactly two sites: the primary (transmitter-tracked) site, then the
    /// secondary one.
    pub sites: Vec<GroundSite>,
    /// Minimum elevation for a surface link, degrees.
    pub elevation_mask: f64,
    pub fso: FsoLink,
    pub pointing: PointingModel,
    pub rf: RfLink,
    /// Split the relay power evenly between the two RF links instead of
    /// giving each the full harvested power.
    pub split_power: bool,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub monte_carlo: McSettings,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            body: BodyConstants::MOON,
            sps: KeplerianElements::sps(),
            llo: KeplerianElements::llo(),
            sites: vec![GroundSite::lunar_south_pole(), GroundSite::malapert()],
            elevation_mask: 0.0,
            fso: FsoLink::default(),
            pointing: PointingModel::default(),
            rf: RfLink::default(),
            split_power: false,
            t0: 0.0,
            t1: 7200.0,
            dt: 10.0,
            monte_carlo: McSettings::default(),
        }
    }
}

/// Inertial geometry of the whole chain at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub t: f64,
    pub sps: StateVector,
    pub llo: StateVector,
    pub site_positions: [Vec3; 2],
    pub fso: LinkGeometry,
    pub sites: [LinkGeometry; 2],
    /// Off-boresight angle of the relay transmitter toward each site, rad.
    pub phi_t: [f64; 2],
    /// Off-boresight angle of each site's receive dish, rad.
    pub phi_r: [f64; 2],
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        self.sps.validate(&self.body, "orbits.sps")?;
        self.llo.validate(&self.body, "orbits.llo")?;
        if self.sites.len() != 2 {
            return Err(Error::validation(
                "sites",
                format!(
                    "expected exactly 2 sites (primary, secondary), got {}",
                    self.sites.len()
                ),
            ));
        }
        for (k, s) in self.sites.iter().enumerate() {
            s.validate(&format!("sites[{k}]"))?;
        }
        if !(-90.0..90.0).contains(&self.elevation_mask) {
            return Err(Error::validation(
                "grid.elevation_mask",
                format!("{} is outside [-90, 90)", self.elevation_mask),
            ));
        }
        self.fso.validate()?;
        self.pointing.validate()?;
        self.rf.validate()?;
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(Error::validation(
                "grid.t0",
                format!("{} must be finite and >= 0", self.t0),
            ));
        }
        if !(self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::validation(
                "grid.t1",
                format!("{} must be finite and > t0", self.t1),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation(
                "grid.dt",
                format!("{} must be finite and > 0", self.dt),
            ));
        }
        self.monte_carlo.config().validate()?;
        if self.monte_carlo.n_bins == 0 {
            return Err(Error::validation("monte_carlo.n_bins", "must be >= 1"));
        }
        Ok(())
    }

    pub fn primary(&self) -> &GroundSite {
        &self.sites[0]
    }

    pub fn secondary(&self) -> &GroundSite {
        &self.sites[1]
    }

    /// Grid instants `t0 + k dt` up to and including `t1`.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.t1 - self.t0) / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|k| self.t0 + k as f64 * self.dt).collect()
    }

    pub fn geometry(&self, t: f64) -> Result<Geometry> {
        let sps = propagate(&self.sps, &self.body, t)?;
        let llo = propagate(&self.llo, &self.body, t)?;
        let fso = sat_sat_geometry(&llo, &sps, &self.body)?;
        let site_positions = [
            site_position(self.primary(), &self.body, t),
            site_position(self.secondary(), &self.body, t),
        ];
        let sites = [
            sat_site_geometry(&llo, self.primary(), &self.body, self.elevation_mask),
            sat_site_geometry(&llo, self.secondary(), &self.body, self.elevation_mask),
        ];
        let boresight = match self.rf.transmitter.tracking {
            Tracking::Full | Tracking::ReceiveOnly => site_positions[0],
            Tracking::Fixed => Vec3::zeros(),
        };
        let phi_t = [
            off_boresight(&llo.position, &boresight, &site_positions[0])?,
            off_boresight(&llo.position, &boresight, &site_positions[1])?,
        ];
        let phi_r = match self.rf.receiver.tracking {
            Tracking::Full | Tracking::ReceiveOnly => [0.0, 0.0],
            Tracking::Fixed => [
                (90.0 - sites[0].elevation.unwrap_or(90.0)).to_radians(),
                (90.0 - sites[1].elevation.unwrap_or(90.0)).to_radians(),
            ],
        };
        Ok(Geometry {
            t,
            sps,
            llo,
            site_positions,
            fso,
            sites,
            phi_t,
            phi_r,
        })
    }

    /// Visibility windows of each link and their intersection.
    pub fn windows(&self) -> Result<LinkWindows> {
        let scan = |which: usize| -> Result<Vec<VisibilityWindow>> {
            let mut failure = None;
            let windows = crate::orbits::visibility_windows(
                |t| match self.geometry(t) {
                    Ok(g) => match which {
                        0 => g.fso.visible,
                        k => g.sites[k - 1].visible,
                    },
                    Err(e) => {
                        failure.get_or_insert(e);
                        false
                    }
                },
                self.t0,
                self.t1,
                self.dt,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(windows),
            }
        };
        let fso = scan(0)?;
        let primary = scan(1)?;
        let secondary = scan(2)?;
        let common = common_window(&[fso.clone(), primary.clone(), secondary.clone()]);
        Ok(LinkWindows {
            fso,
            primary,
            secondary,
            common,
        })
    }

    /// Relay transmit power for one RF link given the harvested power.
    fn relay_power(&self, harvested: f64) -> f64 {
        if self.split_power {
            0.5 * harvested
        } else {
            harvested
        }
    }

    /// Harvested DC power at `site` (0 or 1) per watt of relay transmit power.
    fn rf_factor(&self, g: &Geometry, site: usize) -> Result<f64> {
        let lambda = self.rf.wavelength();
        let g_t = self.rf.transmitter.gain(lambda, g.phi_t[site]);
        let g_r = self.rf.receiver.gain(lambda, g.phi_r[site]);
        let p_r = self
            .rf
            .friis_received(1.0, g.sites[site].range * 1e3, g_t, g_r)?;
        Ok(self.rf.harvested_rf(p_r))
    }

    fn sample(&self, t: f64, in_window: bool) -> Result<ChainSample> {
        let g = self.geometry(t)?;
        let lambda = self.rf.wavelength();
        let tx = &self.rf.transmitter;
        let rx = &self.rf.receiver;
        let mut s = ChainSample {
            t,
            z: g.fso.range,
            d_p: g.sites[0].range,
            d_m: g.sites[1].range,
            phi_tm: g.phi_t[1],
            g_tp: tx.gain(lambda, g.phi_t[0]),
            g_rp: rx.gain(lambda, g.phi_r[0]),
            g_tm: tx.gain(lambda, g.phi_t[1]),
            g_rm: rx.gain(lambda, g.phi_r[1]),
            p_hl: None,
            p_hp: None,
            p_hm: None,
            vis_fso: g.fso.visible,
            vis_lsp: g.sites[0].visible,
            vis_mal: g.sites[1].visible,
            in_window,
        };
        if in_window {
            let p_hl = self
                .fso
                .harvested_optical(self.fso.captured_power_aligned(s.z * 1e3));
            let p_t = self.relay_power(p_hl);
            s.p_hl = Some(p_hl);
            s.p_hp = Some(self.rf_factor(&g, 0)? * p_t);
            s.p_hm = Some(self.rf_factor(&g, 1)? * p_t);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkWindows {
    pub fso: Vec<VisibilityWindow>,
    pub primary: Vec<VisibilityWindow>,
    pub secondary: Vec<VisibilityWindow>,
    pub common: Vec<VisibilityWindow>,
}

impl LinkWindows {
    pub fn in_common(&self, t: f64) -> bool {
        self.common.iter().any(|w| w.contains(t))
    }

    /// The longest common window, earliest first on ties.
    pub fn longest_common(&self) -> Option<VisibilityWindow> {
        self.common
            .iter()
            .copied()
            .fold(None, |best: Option<VisibilityWindow>, w| match best {
                Some(b) if b.duration() >= w.duration() => Some(b),
                _ => Some(w),
            })
    }
}

/// One grid instant of the chain. Ranges in km, angles in rad, gains
/// linear, powers in W. Powers are only present inside the common window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSample {
    pub t: f64,
    pub z: f64,
    pub d_p: f64,
    pub d_m: f64,
    pub phi_tm: f64,
    pub g_tp: f64,
    pub g_rp: f64,
    pub g_tm: f64,
    pub g_rm: f64,
    pub p_hl: Option<f64>,
    pub p_hp: Option<f64>,
    pub p_hm: Option<f64>,
    pub vis_fso: bool,
    pub vis_lsp: bool,
    pub vis_mal: bool,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries {
    pub windows: LinkWindows,
    pub samples: Vec<ChainSample>,
    /// In-window samples whose RF range is inside the receive dish's
    /// Fraunhofer distance.
    pub near_field_samples: usize,
}

impl Timeseries {
    /// False when the three links never overlap: there is no contact and no
    /// power sample.
    pub fn has_contact(&self) -> bool {
        !self.windows.common.is_empty()
    }

    pub fn in_window(&self) -> impl Iterator<Item = &ChainSample> {
        self.samples.iter().filter(|s| s.in_window)
    }
}

/// Evaluates the chain on the scenario grid.
pub fn run_timeseries(scenario: &Scenario) -> Result<Timeseries> {
    scenario.validate()?;
    let windows = scenario.windows()?;
    let samples = scenario
        .grid()
        .into_par_iter()
        .map(|t| scenario.sample(t, windows.in_common(t)))
        .collect::<Result<Vec<_>>>()?;

    let far_field_km = scenario
        .rf
        .receiver
        .far_field_distance(scenario.rf.wavelength())
        / 1e3;
    let near_field_samples = samples
        .iter()
        .filter(|s| s.in_window && s.d_p.min(s.d_m) < far_field_km)
        .count();
    if near_field_samples > 0 {
        log::warn!(
            "{near_field_samples} samples have an RF range below the {far_field_km:.1} km far-field distance; Friis results there are approximate"
        );
    }
    if windows.common.is_empty() {
        log::info!(
            "no common visibility window between {} s and {} s",
            scenario.t0,
            scenario.t1
        );
    }
    Ok(Timeseries {
        windows,
        samples,
        near_field_samples,
    })
}

/// An extreme value and the chain powers at the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub t: f64,
    pub value: f64,
    pub p_hl: f64,
    pub p_hp: f64,
    pub p_hm: f64,
}

/// Extremes over the in-window samples. Ranges in km, gains linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeReport {
    pub z_min: Extreme,
    pub z_max: Extreme,
    pub d_p_min: Extreme,
    pub d_p_max: Extreme,
    pub d_m_min: Extreme,
    pub d_m_max: Extreme,
    pub g_tm_min: Extreme,
    pub g_tm_max: Extreme,
    pub p_hl_max: Extreme,
    pub p_hl_min: Extreme,
    pub p_hp_max: Extreme,
    pub p_hm_max: Extreme,
}

/// Named instants for Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeCase {
    ZMin,
    ZMax,
    DpMin,
    DpMax,
    GtmMax,
    GtmMin,
}

impl ExtremeCase {
    pub const ALL: [ExtremeCase; 6] = [
        ExtremeCase::ZMin,
        ExtremeCase::ZMax,
        ExtremeCase::DpMin,
        ExtremeCase::DpMax,
        ExtremeCase::GtmMax,
        ExtremeCase::GtmMin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExtremeCase::ZMin => "zmin",
            ExtremeCase::ZMax => "zmax",
            ExtremeCase::DpMin => "dpmin",
            ExtremeCase::DpMax => "dpmax",
            ExtremeCase::GtmMax => "gtmmax",
            ExtremeCase::GtmMin => "gtmmin",
        }
    }
}

impl fmt::Display for ExtremeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtremeCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExtremeCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Contract(format!("unknown extreme case `{s}`")))
    }
}

impl ExtremeReport {
    pub fn get(&self, case: ExtremeCase) -> &Extreme {
        match case {
            ExtremeCase::ZMin => &self.z_min,
            ExtremeCase::ZMax => &self.z_max,
            ExtremeCase::DpMin => &self.d_p_min,
            ExtremeCase::DpMax => &self.d_p_max,
            ExtremeCase::GtmMax => &self.g_tm_max,
            ExtremeCase::GtmMin => &self.g_tm_min,
        }
    }
}

/// Argmin/argmax of the chain quantities over in-window samples, earliest
/// instant on ties. `None` when there is no in-window sample.
pub fn extremes(samples: &[ChainSample]) -> Option<ExtremeReport> {
    let inside: Vec<&ChainSample> = samples.iter().filter(|s| s.in_window).collect();
    if inside.is_empty() {
        return None;
    }
    let pick = |key: &dyn Fn(&ChainSample) -> f64, max: bool| -> Extreme {
        let mut best = inside[0];
        for &s in &inside[1..] {
            let better = if max {
                key(s) > key(best)
            } else {
                key(s) < key(best)
            };
            if better {
                best = s;
            }
        }
        Extreme {
            t: best.t,
            value: key(best),
            p_hl: best.p_hl.unwrap_or(0.0),
            p_hp: best.p_hp.unwrap_or(0.0),
            p_hm: best.p_hm.unwrap_or(0.0),
        }
    };
    Some(ExtremeReport {
        z_min: pick(&|s| s.z, false),
        z_max: pick(&|s| s.z, true),
        d_p_min: pick(&|s| s.d_p, false),
        d_p_max: pick(&|s| s.d_p, true),
        d_m_min: pick(&|s| s.d_m, false),
        d_m_max: pick(&|s| s.d_m, true),
        g_tm_min: pick(&|s| s.g_tm, false),
        g_tm_max: pick(&|s| s.g_tm, true),
        p_hl_max: pick(&|s| s.p_hl.unwrap_or(0.0), true),
        p_hl_min: pick(&|s| s.p_hl.unwrap_or(0.0), false),
        p_hp_max: pick(&|s| s.p_hp.unwrap_or(0.0), true),
        p_hm_max: pick(&|s| s.p_hm.unwrap_or(0.0), true),
    })
}

/// Where a Monte Carlo distribution is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McTarget {
    /// Electrical power harvested on the relay.
    Llo,
    /// DC power at the primary site.
    Lsp,
    /// DC power at the secondary site.
    Malapert,
}

impl McTarget {
    pub fn name(&self) -> &'static str {
        match self {
            McTarget::Llo => "llo",
            McTarget::Lsp => "lsp",
            McTarget::Malapert => "malapert",
        }
    }
}

impl fmt::Display for McTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for McTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "llo" => Ok(McTarget::Llo),
            "lsp" => Ok(McTarget::Lsp),
            "malapert" => Ok(McTarget::Malapert),
            _ => Err(Error::Contract(format!("unknown Monte Carlo target `{s}`"))),
        }
    }
}

/// Power distribution at one instant under random laser pointing error.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub t: f64,
    pub target: McTarget,
    pub config: McConfig,
    /// Power at the target for a perfectly aligned laser at the same instant.
    pub aligned: f64,
    pub samples: Vec<f64>,
    pub stats: McStats,
}

/// Draws pointing offsets, evaluates the misaligned laser hop at the range
/// of instant `t`, and carries the harvested power through the RF geometry of
/// the same instant when the target is a surface site.
pub fn mc_end_to_end(
    scenario: &Scenario,
    t: f64,
    cfg: &McConfig,
    target: McTarget,
) -> Result<McRun> {
    scenario.validate()?;
    let windows = scenario.windows()?;
    mc_in_windows(scenario, &windows, t, cfg, target)
}

/// As [`mc_end_to_end`] with windows already computed.
pub fn mc_in_windows(
    scenario: &Scenario,
    windows: &LinkWindows,
    t: f64,
    cfg: &McConfig,
    target: McTarget,
) -> Result<McRun> {
    if !windows.in_common(t) {
        return Err(Error::Contract(format!(
            "t = {t} s is outside the common visibility window"
        )));
    }
    let g = scenario.geometry(t)?;
    let z_m = g.fso.range * 1e3;
    let fso = &scenario.fso;
    let downstream = match target {
        McTarget::Llo => 1.0,
        McTarget::Lsp => scenario.relay_power(scenario.rf_factor(&g, 0)?),
        McTarget::Malapert => scenario.relay_power(scenario.rf_factor(&g, 1)?),
    };
    let aligned = downstream * fso.harvested_optical(fso.captured_power_aligned(z_m));

    let offsets = sample_offsets(&scenario.pointing, cfg)?;
    let samples = offsets
        .par_iter()
        .map(|&v| Ok(downstream * fso.harvested_optical(fso.captured_power_offset(z_m, v)?)))
        .collect::<Result<Vec<f64>>>()?;
    let stats = summarize(&samples, scenario.monte_carlo.n_bins)?;
    Ok(McRun {
        t,
        target,
        config: *cfg,
        aligned,
        samples,
        stats,
    })
}

/// Simultaneous hop lengths at one in-window instant, km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLengths {
    pub t: f64,
    pub z: f64,
    pub d_p: f64,
    pub d_m: f64,
    pub z_plus_d_p: f64,
    pub z_plus_d_m: f64,
}

pub fn path_lengths(samples: &[ChainSample]) -> Vec<PathLengths> {
    samples
        .iter()
        .filter(|s| s.in_window)
        .map(|s| PathLengths {
            t: s.t,
            z: s.z,
            d_p: s.d_p,
            d_m: s.d_m,
            z_plus_d_p: s.z + s.d_p,
            z_plus_d_m: s.z + s.d_m,
        })
        .collect()
}

/// Longest end-to-end path and its one-way light time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndToEnd {
    pub t: f64,
    pub length_km: f64,
    pub light_delay_s: f64,
}

impl EndToEnd {
    pub fn new(t: f64, length_km: f64) -> Self {
        EndToEnd {
            t,
            length_km,
            light_delay_s: length_km * 1e3 / SPEED_OF_LIGHT,
        }
    }
}

/// Maximum SPS-to-primary and SPS-to-secondary path lengths.
pub fn max_end_to_end(paths: &[PathLengths]) -> Option<(EndToEnd, EndToEnd)> {
    let first = paths.first()?;
    let mut to_p = EndToEnd::new(first.t, first.z_plus_d_p);
    let mut to_m = EndToEnd::new(first.t, first.z_plus_d_m);
    for p in &paths[1..] {
        if p.z_plus_d_p > to_p.length_km {
            to_p = EndToEnd::new(p.t, p.z_plus_d_p);
        }
        if p.z_plus_d_m > to_m.length_km {
            to_m = EndToEnd::new(p.t, p.z_plus_d_m);
        }
    }
    Some((to_p, to_m))
}
