//! Two-body propagation around the Moon, surface sites in the rotating
//! Moon-fixed frame, line-of-sight geometry and visibility windows.
//!
//! Scenario time 0 is the element epoch. The Moon-fixed frame coincides with
//! the Moon-centred inertial frame at t = 0 and then rotates uniformly about
//! +z with the sidereal period.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const KEPLER_TOL: f64 = 1e-12;
const KEPLER_MAX_ITER: usize = 50;

/// Window boundaries are bisected down to this resolution, in seconds.
pub const WINDOW_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyConstants {
    /// Gravitational parameter, km^3/s^2.
    pub mu: f64,
    /// Mean radius, km.
    pub radius: f64,
    /// Sidereal rotation period, s.
    pub rotation_period: f64,
}

impl BodyConstants {
    pub const MOON: BodyConstants = BodyConstants {
        mu: 4902.800066,
        radius: 1737.4,
        rotation_period: 2_360_591.5,
    };

    pub fn validate(&self) -> Result<()> {
        positive("body.mu", self.mu)?;
        positive("body.radius", self.radius)?;
        positive("body.rotation_period", self.rotation_period)
    }

    /// Rotation angle of the body-fixed frame at `t`, radians.
    pub fn rotation_angle(&self, t: f64) -> f64 {
        TAU * t / self.rotation_period
    }
}

impl Default for BodyConstants {
    fn default() -> Self {
        Self::MOON
    }
}

/// Classical orbital elements. Distances in km, angles in degrees, epoch in
/// seconds from scenario start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeplerianElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub arg_perigee: f64,
    pub raan: f64,
    pub true_anomaly: f64,
    #[serde(default)]
    pub epoch: f64,
}

impl KeplerianElements {
    /// Relay satellite in a 100 km polar low lunar orbit.
    pub fn llo() -> Self {
        KeplerianElements {
            semi_major_axis: 1837.4,
            eccentricity: 0.0,
            inclination: 90.0,
            arg_perigee: 0.0,
            raan: 355.0,
            true_anomaly: 180.0,
            epoch: 0.0,
        }
    }

    /// Solar-powered laser satellite in a 300 km polar orbit.
    pub fn sps() -> Self {
        KeplerianElements {
            semi_major_axis: 2037.4,
            eccentricity: 0.0,
            inclination: 90.0,
            arg_perigee: 0.0,
            raan: 90.0,
            true_anomaly: 180.0,
            epoch: 0.0,
        }
    }

    /// Checks the invariants against `body`; `name` prefixes field paths in
    /// error messages.
    pub fn validate(&self, body: &BodyConstants, name: &str) -> Result<()> {
        let field = |f: &str| format!("{name}.{f}");
        finite(&field("semi_major_axis"), self.semi_major_axis)?;
        if self.semi_major_axis <= body.radius {
            return Err(Error::validation(
                field("semi_major_axis"),
                format!(
                    "{} km is not above the body radius {} km",
                    self.semi_major_axis, body.radius
                ),
            ));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::validation(
                field("eccentricity"),
                format!("{} is outside [0, 1)", self.eccentricity),
            ));
        }
        if self.semi_major_axis * (1.0 - self.eccentricity) < body.radius {
            return Err(Error::validation(
                field("eccentricity"),
                "periapsis lies below the body surface",
            ));
        }
        for (f, v) in [
            ("inclination", self.inclination),
            ("arg_perigee", self.arg_perigee),
            ("raan", self.raan),
            ("true_anomaly", self.true_anomaly),
            ("epoch", self.epoch),
        ] {
            finite(&field(f), v)?;
        }
        Ok(())
    }

    /// Copy with every angle wrapped into [0, 360).
    pub fn normalized(mut self) -> Self {
        self.inclination = wrap_deg(self.inclination);
        self.arg_perigee = wrap_deg(self.arg_perigee);
        self.raan = wrap_deg(self.raan);
        self.true_anomaly = wrap_deg(self.true_anomaly);
        self
    }

    pub fn mean_motion(&self, body: &BodyConstants) -> f64 {
        (body.mu / self.semi_major_axis.powi(3)).sqrt()
    }

    pub fn period(&self, body: &BodyConstants) -> f64 {
        TAU / self.mean_motion(body)
    }

    /// Mean anomaly at epoch, radians.
    pub fn mean_anomaly_at_epoch(&self) -> f64 {
        let e = self.eccentricity;
        let nu = self.true_anomaly.to_radians();
        let ecc_anom = ((1.0 - e * e).sqrt() * nu.sin()).atan2(e + nu.cos());
        ecc_anom - e * ecc_anom.sin()
    }
}

fn wrap_deg(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("{v} must be finite and > 0"),
        ))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite"))
    }
}

/// Solves `M = E - e sin E` for the eccentric anomaly by Newton iteration
/// started from `E = M`.
pub fn solve_kepler(mean_anomaly: f64, eccentricity: f64) -> Result<f64> {
    let m = mean_anomaly.rem_euclid(TAU);
    let mut ecc = m;
    for _ in 0..KEPLER_MAX_ITER {
        let f = ecc - eccentricity * ecc.sin() - m;
        let step = f / (1.0 - eccentricity * ecc.cos());
        ecc -= step;
        if step.abs() < KEPLER_TOL {
            return Ok(ecc);
        }
    }
    Err(Error::KeplerNonConvergence {
        mean_anomaly,
        eccentricity,
        iterations: KEPLER_MAX_ITER,
    })
}

/// Moon-centred inertial state. Position in km, velocity in km/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl StateVector {
    pub fn specific_energy(&self, body: &BodyConstants) -> f64 {
        0.5 * self.velocity.norm_squared() - body.mu / self.position.norm()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.position.cross(&self.velocity)
    }
}

/// Two-body state of `elements` at scenario time `t`.
pub fn propagate(
    elements: &KeplerianElements,
    body: &BodyConstants,
    t: f64,
) -> Result<StateVector> {
    let a = elements.semi_major_axis;
    let e = elements.eccentricity;
    let n = elements.mean_motion(body);
    let mean = elements.mean_anomaly_at_epoch() + n * (t - elements.epoch);
    let ecc = solve_kepler(mean, e)?;

    let (sin_e, cos_e) = ecc.sin_cos();
    let r = a * (1.0 - e * cos_e);
    let sqrt_1me2 = (1.0 - e * e).sqrt();
    // Perifocal coordinates
    let x = a * (cos_e - e);
    let y = a * sqrt_1me2 * sin_e;
    let vfac = (body.mu * a).sqrt() / r;
    let vx = -vfac * sin_e;
    let vy = vfac * sqrt_1me2 * cos_e;

    let (p, q) = perifocal_basis(elements);
    Ok(StateVector {
        t,
        position: p * x + q * y,
        velocity: p * vx + q * vy,
    })
}

/// Unit vectors toward periapsis (P) and 90 degrees ahead of it in the
/// orbital plane (Q), in the inertial frame.
fn perifocal_basis(el: &KeplerianElements) -> (Vec3, Vec3) {
    let (so, co) = el.raan.to_radians().sin_cos();
    let (sw, cw) = el.arg_perigee.to_radians().sin_cos();
    let (si, ci) = el.inclination.to_radians().sin_cos();
    let p = Vec3::new(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
    let q = Vec3::new(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);
    (p, q)
}

/// A surface antenna. Latitude/longitude in degrees, altitude in km above the
/// mean radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSite {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude: f64,
}

impl GroundSite {
    pub fn new(name: impl Into<String>, latitude: f64, longitude: f64, altitude: f64) -> Self {
        GroundSite {
            name: name.into(),
            latitude,
            longitude,
            altitude,
        }
    }

    pub fn lunar_south_pole() -> Self {
        GroundSite::new("LSP", -90.0, 0.0, 0.0)
    }

    pub fn malapert() -> Self {
        GroundSite::new("Malapert", -86.0, 0.0, 4.7)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::validation(
                format!("{field}.latitude"),
                format!("{} is outside [-90, 90]", self.latitude),
            ));
        }
        if !(self.longitude > -180.0 && self.longitude <= 180.0) {
            return Err(Error::validation(
                format!("{field}.longitude"),
                format!("{} is outside (-180, 180]", self.longitude),
            ));
        }
        if !(self.altitude >= 0.0 && self.altitude.is_finite()) {
            return Err(Error::validation(
                format!("{field}.altitude"),
                format!("{} must be finite and >= 0", self.altitude),
            ));
        }
        Ok(())
    }
}

/// Inertial position of `site` at time `t`, km.
pub fn site_position(site: &GroundSite, body: &BodyConstants, t: f64) -> Vec3 {
    let r = body.radius + site.altitude;
    let lat = site.latitude.to_radians();
    let lon = site.longitude.to_radians() + body.rotation_angle(t);
    let (sl, cl) = lat.sin_cos();
    // cos(-90 deg) is not exactly zero; pin the poles so they stay put
    let cl = if site.latitude.abs() == 90.0 { 0.0 } else { cl };
    Vec3::new(r * cl * lon.cos(), r * cl * lon.sin(), r * sl)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub t: f64,
    /// Line-of-sight range, km.
    pub range: f64,
    /// Elevation above the site horizon, degrees. `None` for satellite pairs.
    pub elevation: Option<f64>,
    pub visible: bool,
}

/// Range and mutual visibility of two satellites. The link is blocked when the
/// segment between them passes within `body.radius` of the centre.
pub fn sat_sat_geometry(
    p1: &StateVector,
    p2: &StateVector,
    body: &BodyConstants,
) -> Result<LinkGeometry> {
    if p1.t != p2.t {
        return Err(Error::Contract(format!(
            "satellite states at different times ({} s vs {} s)",
            p1.t, p2.t
        )));
    }
    Ok(LinkGeometry {
        t: p1.t,
        range: (p2.position - p1.position).norm(),
        elevation: None,
        visible: segment_clears_sphere(&p1.position, &p2.position, body.radius),
    })
}

/// Closest approach of segment `a`–`b` to the origin exceeds `radius`.
pub fn segment_clears_sphere(a: &Vec3, b: &Vec3, radius: f64) -> bool {
    let d = b - a;
    let len2 = d.norm_squared();
    let s = if len2 > 0.0 {
        (-a.dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * s).norm() > radius
}

/// Range and elevation of a satellite seen from `site`. Visible when the
/// elevation exceeds `mask_deg`.
pub fn sat_site_geometry(
    sat: &StateVector,
    site: &GroundSite,
    body: &BodyConstants,
    mask_deg: f64,
) -> LinkGeometry {
    let site_pos = site_position(site, body, sat.t);
    let los = sat.position - site_pos;
    let range = los.norm();
    let elevation = (site_pos.dot(&los) / (site_pos.norm() * range))
        .clamp(-1.0, 1.0)
        .asin()
        .to_degrees();
    LinkGeometry {
        t: sat.t,
        range,
        elevation: Some(elevation),
        visible: elevation > mask_deg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityWindow {
    pub start: f64,
    pub end: f64,
}

impl VisibilityWindow {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// Scans `visible` on the grid `t0, t0 + dt, ..., t1` and refines every sign
/// change by bisection. Start boundaries are the earliest visible time found,
/// end boundaries the latest.
pub fn visibility_windows<F>(
    mut visible: F,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<VisibilityWindow>>
where
    F: FnMut(f64) -> bool,
{
    if t1 <= t0 || dt <= 0.0 || t1.is_nan() || t0.is_nan() || dt.is_nan() {
        return Err(Error::Contract(format!(
            "visibility scan needs t1 > t0 and dt > 0 (got t0 = {t0}, t1 = {t1}, dt = {dt})"
        )));
    }
    let mut windows = Vec::new();
    let mut prev_t = t0;
    let mut prev_vis = visible(t0);
    let mut open = if prev_vis { Some(t0) } else { None };
    let mut k = 1u64;
    loop {
        let t = (t0 + k as f64 * dt).min(t1);
        let vis = visible(t);
        if vis != prev_vis {
            let (lo, hi) = bisect(&mut visible, prev_t, t, prev_vis);
            if vis {
                open = Some(hi);
            } else if let Some(start) = open.take() {
                if lo > start {
                    windows.push(VisibilityWindow { start, end: lo });
                }
            }
        }
        prev_t = t;
        prev_vis = vis;
        if t >= t1 {
            break;
        }
        k += 1;
    }
    if let Some(start) = open {
        if t1 > start {
            windows.push(VisibilityWindow { start, end: t1 });
        }
    }
    Ok(windows)
}

/// Narrows `[lo, hi]` (state `lo_state` at `lo`, the opposite at `hi`) to
/// `WINDOW_RESOLUTION`.
fn bisect<F: FnMut(f64) -> bool>(
    visible: &mut F,
    mut lo: f64,
    mut hi: f64,
    lo_state: bool,
) -> (f64, f64) {
    while hi - lo > WINDOW_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if visible(mid) == lo_state {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Intersection of several sorted, disjoint window lists. Zero-length
/// overlaps are dropped.
pub fn common_window(lists: &[Vec<VisibilityWindow>]) -> Vec<VisibilityWindow> {
    let Some((first, rest)) = lists.split_first() else {
        return Vec::new();
    };
    rest.iter()
        .fold(first.clone(), |acc, next| intersect(&acc, next))
}

fn intersect(a: &[VisibilityWindow], b: &[VisibilityWindow]) -> Vec<VisibilityWindow> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let start = a[i].start.max(b[j].start);
        let end = a[i].end.min(b[j].end);
        if end > start {
            out.push(VisibilityWindow { start, end });
        }
        if a[i].end < b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Angle between two vectors in [0, pi], robust near 0 and pi.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Wraps an angle in radians to [0, 2 pi).
pub fn wrap_rad(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
