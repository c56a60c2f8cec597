//! Brute-force reference integrals shared by the integration tests. They use
//! only the textbook beam formulas, not the library's quadrature or Bessel
//! code.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use lunar_wpt::FsoLink;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre rule over `[a, b]` with `panels` equal panels.
pub fn composite(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for &(x, w) in rule {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

pub fn beam_radius(l: &FsoLink, z: f64) -> f64 {
    let w0 = l.wavelength / (PI * l.divergence);
    let zr = PI * w0 * w0 / l.wavelength;
    w0 * (1.0 + (z / zr).powi(2)).sqrt()
}

/// Optical power on a disc of radius `b` whose centre is `v` from the beam
/// axis, integrated in Cartesian coordinates over the disc:
/// `x = b sin(a)`, `y = h(x) sin(c)` with `h = sqrt(b^2 - x^2)`.
pub fn offset_power_2d(l: &FsoLink, z: f64, v: f64, panels: usize) -> f64 {
    let w = beam_radius(l, z);
    let b = l.array_radius;
    let p0 = l.eo_efficiency * l.source_power;
    let peak = 2.0 * p0 / (PI * w * w);
    let rule = gauss_legendre(12);
    composite(
        |a| {
            let x = b * a.sin();
            let dx = b * a.cos();
            let h = b * a.cos();
            let inner = composite(
                |c| {
                    let y = h * c.sin();
                    let r2 = (x - v).powi(2) + y * y;
                    peak * (-2.0 * r2 / (w * w)).exp() * h * c.cos()
                },
                -FRAC_PI_2,
                FRAC_PI_2,
                panels,
                &rule,
            );
            inner * dx
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        panels,
        &rule,
    )
}

/// Power inside radius `b` of a centred beam by radial quadrature of the
/// irradiance profile.
pub fn aligned_power_radial(l: &FsoLink, z: f64, b: f64) -> f64 {
    let w = beam_radius(l, z);
    let p0 = l.eo_efficiency * l.source_power;
    let peak = 2.0 * p0 / (PI * w * w);
    composite(
        |r| peak * (-2.0 * r * r / (w * w)).exp() * 2.0 * PI * r,
        0.0,
        b,
        400,
        &gauss_legendre(12),
    )
}
