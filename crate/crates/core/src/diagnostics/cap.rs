//! Closed forms for spherical caps: the polar-angle law of a uniform point
//! and cap volume fractions.
//!
//! A uniform point on a cap of Sⁿ has polar angle φ (measured from the axis)
//! with density `∝ sinⁿ⁻¹ φ` on `[0, θ]`.

#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use crate::manifold::ManifoldPoint;

/// Angle between `x` and `axis`, accurate near 0.
pub fn polar_angle(axis: &ManifoldPoint, x: &ManifoldPoint) -> f64 {
    let (mut s, mut d) = (0.0, 0.0);
    for (a, b) in axis.coords.iter().zip(&x.coords) {
        s += (a + b) * (a + b);
        d += (a - b) * (a - b);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

/// `∫₀^φ sinᵏ t dt` by the usual reduction formula.
pub fn sin_power_integral(k: u32, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    // acc[j % 2] holds the integral for the latest power of that parity.
    let mut acc = [phi, 1.0 - c];
    for j in 2..=k {
        let jf = j as f64;
        let slot = (j % 2) as usize;
        acc[slot] = -s.powi(j as i32 - 1) * c / jf + (jf - 1.0) / jf * acc[slot];
    }
    acc[(k % 2) as usize]
}

/// CDF of the polar angle of a uniform point on the cap of half-angle `theta`
/// in Sⁿ.
pub fn cap_polar_cdf(n: usize, theta: f64) -> impl Fn(f64) -> f64 {
    let k = n as u32 - 1;
    let total = sin_power_integral(k, theta);
    move |phi: f64| sin_power_integral(k, phi.clamp(0.0, theta)) / total
}

/// Fraction of Sⁿ covered by a cap of half-angle `theta`.
pub fn cap_volume_fraction(n: usize, theta: f64) -> f64 {
    let k = n as u32 - 1;
    sin_power_integral(k, theta) / sin_power_integral(k, core::f64::consts::PI)
}
