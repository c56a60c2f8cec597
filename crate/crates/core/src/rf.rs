//! Parabolic dish gains, the Friis free-space link and RF-to-DC conversion
//! for the relay-to-surface hop.
//!
//! Gains are linear (dimensionless) everywhere in the API; [`to_db`] is only
//! for presentation.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::orbits::{angle_between, Vec3};
use crate::special::jinc;
use crate::SPEED_OF_LIGHT;

/// How a dish is steered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tracking {
    /// Boresight follows the far end of the link.
    Full,
    /// Only the receiving end tracks; used for surface dishes.
    ReceiveOnly,
    /// Boresight does not move: a relay dish points at nadir, a surface dish
    /// at the local zenith.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DishAntenna {
    /// Aperture diameter, m.
    pub diameter: f64,
    /// Aperture efficiency.
    pub efficiency: f64,
    pub tracking: Tracking,
}

impl DishAntenna {
    pub fn new(diameter: f64, efficiency: f64, tracking: Tracking) -> Self {
        DishAntenna {
            diameter,
            efficiency,
            tracking,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.diameter.is_finite() && self.diameter > 0.0) {
            return Err(Error::validation(
                format!("{field}.diameter"),
                format!("{} must be finite and > 0", self.diameter),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::validation(
                format!("{field}.efficiency"),
                format!("{} is outside (0, 1]", self.efficiency),
            ));
        }
        Ok(())
    }

    /// `efficiency * (pi D / lambda)^2`.
    pub fn boresight_gain(&self, wavelength: f64) -> f64 {
        let k = PI * self.diameter / wavelength;
        self.efficiency * k * k
    }

    /// Gain at `phi` radians off boresight for a uniformly illuminated
    /// circular aperture:
    /// `G = efficiency * (pi D / lambda)^2 * (2 J1(x) / x)^2`, with
    /// `x = (pi D / lambda) sin(phi)`.
    ///
    /// There is no back-lobe model: angles past 90 degrees give zero gain.
    pub fn gain(&self, wavelength: f64, phi: f64) -> f64 {
        let phi = phi.abs();
        if phi > FRAC_PI_2 {
            return 0.0;
        }
        let k = PI * self.diameter / wavelength;
        let pattern = jinc(k * phi.sin());
        self.efficiency * k * k * pattern * pattern
    }

    /// Fraunhofer distance `2 D^2 / lambda`, m.
    pub fn far_field_distance(&self, wavelength: f64) -> f64 {
        2.0 * self.diameter * self.diameter / wavelength
    }
}

/// RF hop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfLink {
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Electrical-to-RF conversion efficiency of the relay transmitter.
    pub er_efficiency: f64,
    /// RF-to-DC conversion efficiency of the surface rectenna.
    pub re_efficiency: f64,
    pub transmitter: DishAntenna,
    pub receiver: DishAntenna,
}

impl Default for RfLink {
    fn default() -> Self {
        RfLink {
            frequency: 2.5e9,
            er_efficiency: 0.8,
            re_efficiency: 0.8,
            transmitter: DishAntenna::new(4.0, 0.9, Tracking::Full),
            receiver: DishAntenna::new(50.0, 0.9, Tracking::ReceiveOnly),
        }
    }
}

impl RfLink {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::validation(
                "rf.frequency",
                format!("{} must be finite and > 0", self.frequency),
            ));
        }
        for (field, v) in [
            ("rf.er_efficiency", self.er_efficiency),
            ("rf.re_efficiency", self.re_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(field, format!("{v} is outside (0, 1]")));
            }
        }
        self.transmitter.validate("rf.transmitter")?;
        self.receiver.validate("rf.receiver")
    }

    /// Carrier wavelength `c / f`, m.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    /// Received RF power for transmitter input power `p_t` over range `d`
    /// metres:
    /// `P_R = (er_efficiency * P_T) * (lambda / (4 pi d))^2 * G_T * G_R`.
    pub fn friis_received(&self, p_t: f64, d: f64, g_t: f64, g_r: f64) -> Result<f64> {
        if d.is_nan() || d <= 0.0 {
            return Err(Error::Contract(format!(
                "Friis range must be > 0 (got {d} m)"
            )));
        }
        let path = self.wavelength() / (4.0 * PI * d);
        Ok(self.er_efficiency * p_t * path * path * g_t * g_r)
    }

    /// DC power out of the rectenna for received RF power `p_r`.
    pub fn harvested_rf(&self, p_r: f64) -> f64 {
        self.re_efficiency * p_r
    }

    /// One evaluation of the hop at range `d` metres with the given
    /// off-boresight angles.
    pub fn sample(&self, t: f64, p_t: f64, d: f64, phi_t: f64, phi_r: f64) -> Result<RfSample> {
        let lambda = self.wavelength();
        let g_t = self.transmitter.gain(lambda, phi_t);
        let g_r = self.receiver.gain(lambda, phi_r);
        let p_r = self.friis_received(p_t, d, g_t, g_r)?;
        Ok(RfSample {
            t,
            d,
            phi_t,
            phi_r,
            g_t,
            g_r,
            p_r,
            p_h: self.harvested_rf(p_r),
            near_field: d < self.receiver.far_field_distance(lambda),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfSample {
    pub t: f64,
    /// Range, m.
    pub d: f64,
    pub phi_t: f64,
    pub phi_r: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub p_r: f64,
    pub p_h: f64,
    /// Range is inside the receiver dish's Fraunhofer distance, where the
    /// Friis model is not valid.
    pub near_field: bool,
}

/// Angle at `origin` between the directions to `boresight_target` and to
/// `actual_target`, in [0, pi].
pub fn off_boresight(origin: &Vec3, boresight_target: &Vec3, actual_target: &Vec3) -> Result<f64> {
    let a = boresight_target - origin;
    let b = actual_target - origin;
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(Error::Contract(
            "off-boresight direction has zero length".into(),
        ));
    }
    Ok(angle_between(&a, &b))
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn link() -> RfLink {
        RfLink::default()
    }

    #[test]
    fn boresight_gains_in_db() {
        let l = link();
        let lambda = l.wavelength();
        let rx = to_db(l.receiver.gain(lambda, 0.0));
        let tx = to_db(l.transmitter.gain(lambda, 0.0));
        assert!((rx - 61.89).abs() < 0.01, "{rx}");
        assert!((tx - 39.95).abs() < 0.01, "{tx}");
        assert!((rx - 61.887_208_749_878_5).abs() < 1e-9);
        assert!((tx - 39.949_008_489_717_38).abs() < 1e-9);
        assert_eq!(
            l.receiver.gain(lambda, 0.0),
            l.receiver.boresight_gain(lambda)
        );
    }

    #[test]
    fn first_null() {
        let l = link();
        let lambda = l.wavelength();
        let k = PI * 4.0 / lambda;
        let phi = (3.831_705_970_207_512_3 / k).asin();
        let g = l.transmitter.gain(lambda, phi);
        assert!(g / l.transmitter.boresight_gain(lambda) < 1e-28);
    }

    #[test]
    fn wavelength_from_frequency() {
        let l = link();
        assert!((l.wavelength() * l.frequency - SPEED_OF_LIGHT).abs() < 1e-6);
    }

    #[test]
    fn closest_approach_hop() {
        let l = link();
        let lambda = l.wavelength();
        let gt = l.transmitter.gain(lambda, 0.0);
        let gr = l.receiver.gain(lambda, 0.0);
        let pr = l.friis_received(331_940.0, 121.34e3, gt, gr).unwrap();
        assert!((pr - 25.067_151_156_636).abs() < 1e-9, "{pr}");
        let ph = l.harvested_rf(pr);
        assert!((ph / 19.80 - 1.0).abs() < 0.025);
    }

    #[test]
    fn isotropic_and_inverse_square() {
        let l = link();
        let d = 1e5;
        let pr = l.friis_received(1.0, d, 1.0, 1.0).unwrap();
        let want = 0.8 * (l.wavelength() / (4.0 * PI * d)).powi(2);
        assert!((pr - want).abs() / want < 1e-15);
        let pr2 = l.friis_received(1.0, 2.0 * d, 1.0, 1.0).unwrap();
        assert!((pr / pr2 - 4.0).abs() < 1e-12);
        assert!(l.friis_received(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rectenna() {
        let l = link();
        assert_eq!(l.harvested_rf(0.0), 0.0);
        assert!((l.harvested_rf(25.05) - 20.04).abs() < 1e-12);
        assert!((l.harvested_rf(0.6613) - 0.529_04).abs() < 1e-12);
    }

    #[test]
    fn off_boresight_examples() {
        let o = Vec3::zeros();
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 5.0, 0.0);
        assert_eq!(off_boresight(&o, &x, &x).unwrap(), 0.0);
        assert!((off_boresight(&o, &x, &y).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(off_boresight(&o, &o, &y).is_err());

        // relay 100 km above the pole, transmit dish locked on LSP
        let sat = Vec3::new(0.0, 0.0, -1837.4);
        let lsp = Vec3::new(0.0, 0.0, -1737.4);
        let lat = (-86f64).to_radians();
        let mal = 1742.1 * Vec3::new(lat.cos(), 0.0, lat.sin());
        let phi = off_boresight(&sat, &lsp, &mal).unwrap();
        assert!((phi - 0.884_495_487_659_144_8).abs() < 1e-9);
    }

    #[test]
    fn far_field_distance() {
        let l = link();
        let d = l.receiver.far_field_distance(l.wavelength());
        assert!((d - 41_695.511_899_769).abs() < 1e-6);
        let s = l.sample(0.0, 1.0, 30e3, 0.0, 0.0).unwrap();
        assert!(s.near_field);
        let s = l.sample(0.0, 1.0, 121e3, 0.0, 0.0).unwrap();
        assert!(!s.near_field);
        assert_eq!(s.p_h, l.harvested_rf(s.p_r));
    }

    #[test]
    fn behind_the_dish_is_dark() {
        let l = link();
        assert_eq!(l.transmitter.gain(l.wavelength(), 2.0), 0.0);
    }

    proptest! {
        #[test]
        fn pattern_is_bounded(zeta in 0.0f64..2000.0) {
            let p = jinc(zeta).powi(2);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn gain_never_exceeds_boresight(phi in 0.0f64..FRAC_PI_2) {
            let l = link();
            let lambda = l.wavelength();
            let g = l.transmitter.gain(lambda, phi);
            prop_assert!(g >= 0.0 && g <= l.transmitter.boresight_gain(lambda));
        }

        #[test]
        fn friis_is_linear(pt in 0.0f64..1e6, gt in 0.0f64..1e4, gr in 0.0f64..1e7, k in 0.1f64..10.0) {
            let l = link();
            let d = 2e5;
            let base = l.friis_received(pt, d, gt, gr).unwrap();
            let scaled = [
                l.friis_received(k * pt, d, gt, gr).unwrap(),
                l.friis_received(pt, d, k * gt, gr).unwrap(),
                l.friis_received(pt, d, gt, k * gr).unwrap(),
            ];
            for s in scaled {
                prop_assert!((s - k * base).abs() <= 1e-12 * (k * base).abs().max(1e-300));
            }
        }

        #[test]
        fn off_boresight_reciprocal(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0, az in -10.0f64..10.0,
            bx in -10.0f64..10.0, by in -10.0f64..10.0, bz in -10.0f64..10.0,
        ) {
            let o = Vec3::new(0.5, -0.25, 20.0);
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            let ab = off_boresight(&o, &a, &b).unwrap();
            let ba = off_boresight(&o, &b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
            prop_assert!((0.0..=PI).contains(&ab));
        }
    }
}
