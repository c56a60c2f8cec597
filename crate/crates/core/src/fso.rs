//! Gaussian laser beam from the SPS and the optical power captured by the
//! relay's circular solar array.
//!
//! All quantities in this module are SI: metres, watts, radians.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::i0e;

/// Laser power-beaming hop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsoLink {
    /// Electrical input power of the laser source, W.
    pub source_power: f64,
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Electrical-to-optical conversion efficiency.
    pub eo_efficiency: f64,
    /// Transmit telescope diameter, m.
    pub aperture_diameter: f64,
    /// Beam divergence half-angle, rad.
    pub divergence: f64,
    /// Optical-to-electrical conversion efficiency of the solar array.
    pub oe_efficiency: f64,
    /// Solar array radius, m.
    pub array_radius: f64,
}

impl Default for FsoLink {
    fn default() -> Self {
        FsoLink {
            source_power: 1e6,
            wavelength: 1064e-9,
            eo_efficiency: 0.51,
            aperture_diameter: 0.3,
            divergence: 3.547e-6,
            oe_efficiency: 0.689,
            array_radius: 2.0,
        }
    }
}

/// Beam state at one range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSample {
    pub z: f64,
    pub w_z: f64,
    /// Optical power landing on the array under perfect alignment, W.
    pub p_r: f64,
}

impl FsoLink {
    /// Same link with the divergence set by the diffraction limit
    /// `wavelength / aperture_diameter`.
    pub fn diffraction_limited(self) -> Self {
        FsoLink {
            divergence: self.wavelength / self.aperture_diameter,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("fso.source_power", self.source_power),
            ("fso.wavelength", self.wavelength),
            ("fso.aperture_diameter", self.aperture_diameter),
            ("fso.divergence", self.divergence),
            ("fso.array_radius", self.array_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(
                    field,
                    format!("{v} must be finite and > 0"),
                ));
            }
        }
        for (field, v) in [
            ("fso.eo_efficiency", self.eo_efficiency),
            ("fso.oe_efficiency", self.oe_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(field, format!("{v} is outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Beam waist `w0 = wavelength / (pi * divergence)`, m.
    pub fn waist(&self) -> f64 {
        self.wavelength / (PI * self.divergence)
    }

    /// Optical power leaving the transmitter, `eo_efficiency * source_power`.
    pub fn optical_power(&self) -> f64 {
        self.eo_efficiency * self.source_power
    }

    /// 1/e^2 beam radius at range `z`.
    pub fn beam_radius(&self, z: f64) -> f64 {
        let w0 = self.waist();
        let zr = self.wavelength * z / (PI * w0 * w0);
        w0 * (1.0 + zr * zr).sqrt()
    }

    /// Irradiance at radial distance `r` from the beam axis at range `z`, W/m^2.
    pub fn irradiance(&self, r: f64, z: f64) -> f64 {
        let w = self.beam_radius(z);
        let w2 = w * w;
        2.0 * self.optical_power() / (PI * w2) * (-2.0 * r * r / w2).exp()
    }

    /// Power on the array with the beam centred on it.
    pub fn captured_power_aligned(&self, z: f64) -> f64 {
        let w = self.beam_radius(z);
        let b = self.array_radius;
        // -expm1 keeps precision when the beam is much wider than the array
        -self.optical_power() * (-2.0 * b * b / (w * w)).exp_m1()
    }

    /// Power on the array when the beam centre is displaced radially by `v`.
    ///
    /// The angular part of the overlap integral is done analytically, leaving
    /// a radial integral with a modified Bessel kernel. The kernel is written
    /// as `exp(-2 (r - v)^2 / w^2) * i0e(4 r v / w^2)` so it stays finite for
    /// offsets many beam radii wide.
    pub fn captured_power_offset(&self, z: f64, v: f64) -> Result<f64> {
        self.captured_power_offset_with(&Quadrature::default(), z, v)
    }

    pub fn captured_power_offset_with(&self, quad: &Quadrature, z: f64, v: f64) -> Result<f64> {
        let w = self.beam_radius(z);
        let w2 = w * w;
        let b = self.array_radius;
        let p0 = self.optical_power();
        let scale = 4.0 * p0 / w2;
        let integrand = |r: f64| {
            let d = r - v;
            scale * r * (-2.0 * d * d / w2).exp() * i0e(4.0 * r * v / w2)
        };
        let value = if v > 0.0 && v < b {
            // the kernel peaks near r = v
            quad.integrate(integrand, 0.0, v)?.value + quad.integrate(integrand, v, b)?.value
        } else {
            quad.integrate(integrand, 0.0, b)?.value
        };
        Ok(value.clamp(0.0, p0))
    }

    pub fn sample(&self, z: f64) -> BeamSample {
        BeamSample {
            z,
            w_z: self.beam_radius(z),
            p_r: self.captured_power_aligned(z),
        }
    }

    /// Electrical power delivered by the solar array for received optical
    /// power `p_r`.
    pub fn harvested_optical(&self, p_r: f64) -> f64 {
        self.oe_efficiency * p_r
    }
}
