//! Parallelograms inscribed in an ellipse with semi-axes `a ≥ b`.
//!
//! A B-side direction at polar angle `φ` in the optimal plane maps to the
//! ellipse point `(b cos φ, a sin φ)` (minor axis first). The CHSH value
//! already maximized over the A-side directions is half the perimeter of the
//! parallelogram with corners `±s_K`, `±t_K`. Writing `φ_s = γ + δ` and
//! `φ_t = γ − δ`, the best `δ` for every average angle `γ` is
//!
//! ```text
//! δ(γ) = arccot √((b² cos²γ + a² sin²γ) / (b² sin²γ + a² cos²γ))
//! ```
//!
//! and the resulting half-perimeter is `2√(a² + b²)` independent of `γ`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::correlation::SvdDecomposition;
use crate::error::{domain, ChshError, Result};
use crate::linalg::{column, Vec3};

/// Singular values this close count as degenerate when deciding whether an
/// optimal plane may still rotate.
pub const PLANE_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyParams {
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
    pub phi_s: f64,
    pub phi_t: f64,
    pub phi_q: f64,
    pub phi_r: f64,
}

/// The elliptical section of the correlation ellipsoid in which the optimal
/// B-side directions live.
///
/// `plane_basis.0` (ξ) is the pre-image direction of the minor axis and
/// `plane_basis.1` (ζ) that of the major axis, both in qubit B's Bloch frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseSection {
    pub semi_major: f64,
    pub semi_minor: f64,
    pub plane_basis: (Vec3, Vec3),
    /// `b = c`: the plane can rotate about the major axis without changing
    /// the section.
    pub free_rotation: bool,
}

/// Points `s_K`, `t_K` in ellipse-plane coordinates `(ξ, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneVectors {
    pub s_k: [f64; 2],
    pub t_k: [f64; 2],
}

impl PlaneVectors {
    pub fn new(phi_s: f64, phi_t: f64, a: f64, b: f64) -> Self {
        Self { s_k: ellipse_point(phi_s, a, b), t_k: ellipse_point(phi_t, a, b) }
    }

    /// Largest residual of `(ξ/b)² + (ζ/a)² − 1` over both points; only
    /// meaningful for `b > 0`.
    pub fn ellipse_residual(&self, a: f64, b: f64) -> f64 {
        let res = |p: &[f64; 2]| ((p[0] / b).powi(2) + (p[1] / a).powi(2) - 1.0).abs();
        res(&self.s_k).max(res(&self.t_k))
    }
}

#[inline]
pub fn ellipse_point(phi: f64, a: f64, b: f64) -> [f64; 2] {
    [b * phi.cos(), a * phi.sin()]
}

fn check_axes(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || b < 0.0 || a < b {
        return Err(domain(format!("ellipse axes must satisfy a >= b >= 0, got a={a}, b={b}")));
    }
    if a == 0.0 {
        return Err(ChshError::Degenerate("ellipse with a = 0 collapses to a point".into()));
    }
    Ok(())
}

/// Reduce an average angle into `[0, π)`.
///
/// Shifting `γ` by `π` flips every optimal vector, so `S` is unchanged but the
/// polar angles `φ_s`, `φ_t` move by `π`.
pub fn reduce_gamma(gamma: f64) -> f64 {
    let g = gamma.rem_euclid(PI);
    if g >= PI {
        0.0
    } else {
        g
    }
}

/// Half-angle `δ ∈ [0, π/2]` between the optimal `s` and `t` for average
/// angle `γ`.
///
/// `arccot(x)` is taken on the branch `(0, π/2]` with `arccot(0) = π/2`. The
/// only way to reach `δ = 0` is the line-segment ellipse `b = 0` at
/// `cos γ = 0`, where `s` and `t` coincide.
pub fn optimal_delta(gamma: f64, a: f64, b: f64) -> Result<f64> {
    check_axes(a, b)?;
    if !gamma.is_finite() {
        return Err(domain("gamma must be finite"));
    }
    let (sin_g, cos_g) = gamma.sin_cos();
    let num = b * b * cos_g * cos_g + a * a * sin_g * sin_g;
    let den = b * b * sin_g * sin_g + a * a * cos_g * cos_g;
    // arccot(√(num/den)) = atan2(√den, √num)
    Ok(den.sqrt().atan2(num.sqrt()))
}

/// `|s_K − t_K| + |s_K + t_K|`, half the perimeter of the inscribed
/// parallelogram.
pub fn perimeter_half(phi_s: f64, phi_t: f64, a: f64, b: f64) -> f64 {
    let s = ellipse_point(phi_s, a, b);
    let t = ellipse_point(phi_t, a, b);
    (s[0] - t[0]).hypot(s[1] - t[1]) + (s[0] + t[0]).hypot(s[1] + t[1])
}

/// `(γ + δ, γ − δ)` with `δ = optimal_delta(γ, a, b)`.
pub fn optimal_angle_pair(gamma: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let delta = optimal_delta(gamma, a, b)?;
    Ok((gamma + delta, gamma - delta))
}

/// Scalar product of the ellipse tangents `d s_K/dφ_s` and `d t_K/dφ_t`:
/// `b² sin φ_s sin φ_t + a² cos φ_s cos φ_t`.
pub fn tangent_dot(phi_s: f64, phi_t: f64, a: f64, b: f64) -> f64 {
    b * b * phi_s.sin() * phi_t.sin() + a * a * phi_s.cos() * phi_t.cos()
}

/// Polar angle of the optimal A-side direction `q` (the normalized
/// difference direction) in the A-side plane.
///
/// `arctan(−(a/b) cot γ) + π` with `arctan` on `[−π/2, π/2]`.
pub fn phi_q(gamma: f64, a: f64, b: f64) -> f64 {
    let x = -(a * gamma.cos()) / (b * gamma.sin());
    if x.is_nan() {
        // b = 0 and cos γ = 0: q is arbitrary; use the b → 0 limit.
        return PI;
    }
    x.atan() + PI
}

/// Polar angle of the optimal A-side direction `r` (the normalized sum
/// direction): `arctan((a/b) tan γ) + Θ(γ − π/2)·π` with `Θ(0) = 0`.
pub fn phi_r(gamma: f64, a: f64, b: f64) -> f64 {
    let x = (a * gamma.sin()) / (b * gamma.cos());
    let step = if gamma > FRAC_PI_2 { PI } else { 0.0 };
    if x.is_nan() {
        // b = 0 and sin γ = 0: r is arbitrary; use the b → 0 limit.
        return step;
    }
    x.atan() + step
}

/// Plane spanned by the first two right-singular vectors; its image under
/// `K` is the largest elliptical section, with semi-axes `a` and `b`.
pub fn select_optimal_plane(svd: &SvdDecomposition) -> Result<EllipseSection> {
    let [a, b, c] = svd.sigma;
    if a <= 0.0 {
        return Err(ChshError::Degenerate("correlation matrix vanishes".into()));
    }
    Ok(EllipseSection {
        semi_major: a,
        semi_minor: b,
        plane_basis: (column(&svd.v, 1), column(&svd.v, 0)),
        free_rotation: (b - c).abs() <= PLANE_DEGENERACY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub phi_s: f64,
    pub phi_t: f64,
    pub phi_q: f64,
    pub phi_r: f64,
    pub half_perimeter: f64,
}

/// Optimal angles on `steps` evenly spaced values `γ_k = kπ/steps`.
pub fn sweep(a: f64, b: f64, steps: usize) -> Result<Vec<SweepRow>> {
    if steps == 0 {
        return Err(domain("gamma-steps must be at least 1"));
    }
    (0..steps)
        .map(|k| {
            let gamma = k as f64 * PI / steps as f64;
            let (phi_s, phi_t) = optimal_angle_pair(gamma, a, b)?;
            Ok(SweepRow {
                gamma,
                phi_s,
                phi_t,
                phi_q: phi_q(gamma, a, b),
                phi_r: phi_r(gamma, a, b),
                half_perimeter: perimeter_half(phi_s, phi_t, a, b),
            })
        })
        .collect()
}
