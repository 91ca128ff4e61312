//! Optimal measurement strategies and closed-form CHSH maxima.

use std::f64::consts::PI;

use serde::Serialize;

use crate::correlation::{correlation_matrix, CorrelationMatrix, MeasurementVectors, SvdDecomposition};
use crate::error::{check_unit_interval, domain, Result};
use crate::geometry::{
    optimal_delta, phi_q, phi_r, reduce_gamma, select_optimal_plane, EllipseSection, StrategyParams,
};
use crate::linalg::{add, column, combine, dot, norm, scale, sub, Vec3};
use crate::state::DensityMatrix;

/// Which of the two mirror-image strategy families to return.
///
/// `Positive` gives `S = +max|S|`, `Negative` gives `S = −max|S|`. The
/// A-side vectors of the two branches differ only by an overall sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignBranch {
    #[default]
    Positive,
    Negative,
}

impl SignBranch {
    pub fn value(self) -> f64 {
        match self {
            SignBranch::Positive => 1.0,
            SignBranch::Negative => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(SignBranch::Positive),
            -1 => Ok(SignBranch::Negative),
            s => Err(domain(format!("sign branch must be +1 or -1, got {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub max_abs_s: f64,
    pub params: StrategyParams,
    pub vectors: MeasurementVectors,
    pub section: EllipseSection,
    pub sign_branch: SignBranch,
}

/// `2√(1 + C²)`.
pub fn max_s_pure(c: f64) -> Result<f64> {
    check_unit_interval("concurrence", c)?;
    Ok(2.0 * (1.0 + c * c).sqrt())
}

/// `2√(a² + b²)` from the two largest singular values.
pub fn max_s_mixed(svd: &SvdDecomposition) -> f64 {
    2.0 * (svd.a() * svd.a() + svd.b() * svd.b()).sqrt()
}

/// Horodecki criterion: some measurement violates `|S| ≤ 2` iff
/// `a² + b² > 1`.
pub fn violates_chsh(svd: &SvdDecomposition) -> bool {
    svd.a() * svd.a() + svd.b() * svd.b() > 1.0
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && (0.0..PI).contains(&theta) {
        Ok(())
    } else {
        Err(domain(format!("theta = {theta} is outside [0, π)")))
    }
}

/// Number of half-turns separating `gamma` from its reduction into `[0, π)`.
fn half_turns(gamma: f64) -> f64 {
    ((gamma - reduce_gamma(gamma)) / PI).round()
}

/// Optimal strategy for the Schmidt state of concurrence `c`, in the Schmidt
/// frame where `K = −diag(C, C, 1)`.
///
/// `gamma` is reduced into `[0, π)` first; the azimuth `theta ∈ [0, π)`
/// rotates the measurement plane about the z-axis.
pub fn optimal_strategy_pure(c: f64, gamma: f64, theta: f64, sign: SignBranch) -> Result<OptimizationResult> {
    if !gamma.is_finite() {
        return Err(domain("gamma must be finite"));
    }
    pure_strategy(c, reduce_gamma(gamma), theta, sign)
}

/// Like [`optimal_strategy_pure`] but evaluates the closed forms at `gamma`
/// as given, without reducing it into `[0, π)`. All four vectors flip sign
/// relative to the reduced call when `gamma` is shifted by an odd multiple
/// of `π`; `S` is the same.
pub fn optimal_strategy_pure_verbatim(
    c: f64,
    gamma: f64,
    theta: f64,
    sign: SignBranch,
) -> Result<OptimizationResult> {
    if !gamma.is_finite() {
        return Err(domain("gamma must be finite"));
    }
    pure_strategy(c, gamma, theta, sign)
}

fn pure_strategy(c: f64, gamma: f64, theta: f64, sign: SignBranch) -> Result<OptimizationResult> {
    let max_abs_s = max_s_pure(c)?;
    check_theta(theta)?;
    let delta = optimal_delta(gamma, 1.0, c)?;
    let (phi_s, phi_t) = (gamma + delta, gamma - delta);

    let (sin_th, cos_th) = theta.sin_cos();
    let xi = [cos_th, sin_th, 0.0];
    let zeta = [0.0, 0.0, 1.0];
    let s = combine(phi_s.cos(), &xi, phi_s.sin(), &zeta);
    let t = combine(phi_t.cos(), &xi, phi_t.sin(), &zeta);

    let (sin_g, cos_g) = gamma.sin_cos();
    // Closed-form A-side directions of the S = −max family; the b → 0 limit
    // is used where the normalization vanishes.
    let nq = (c * c * sin_g * sin_g + cos_g * cos_g).sqrt();
    let q_minus = if nq > 0.0 {
        combine(-c * sin_g / nq, &xi, cos_g / nq, &zeta)
    } else {
        scale(&xi, -sin_g.signum())
    };
    let nr = (c * c * cos_g * cos_g + sin_g * sin_g).sqrt();
    let r_minus = if nr > 0.0 {
        combine(c * cos_g / nr, &xi, sin_g / nr, &zeta)
    } else {
        scale(&xi, cos_g.signum())
    };
    let flip = -sign.value();
    let vectors = MeasurementVectors::new(scale(&q_minus, flip), scale(&r_minus, flip), s, t)?;

    let g0 = reduce_gamma(gamma);
    let shift = half_turns(gamma) * PI;
    let params = StrategyParams {
        gamma,
        delta,
        theta,
        phi_s,
        phi_t,
        phi_q: phi_q(g0, 1.0, c) + shift,
        phi_r: phi_r(g0, 1.0, c) + shift,
    };
    let section = EllipseSection { semi_major: 1.0, semi_minor: c, plane_basis: (xi, zeta), free_rotation: true };
    Ok(OptimizationResult { max_abs_s, params, vectors, section, sign_branch: sign })
}

/// Optimal strategy for a density matrix, in the lab frames of both qubits.
pub fn optimal_strategy_mixed(rho: &DensityMatrix, gamma: f64, sign: SignBranch) -> Result<OptimizationResult> {
    optimal_strategy_for_correlation(&correlation_matrix(rho)?, gamma, 0.0, sign)
}

/// Optimal strategy for an arbitrary correlation matrix `K = UΣVᵀ`.
///
/// The B-side directions lie in the plane spanned by the major and minor
/// right-singular vectors at polar angles `γ ± δ(γ, a, b)`; the A-side
/// directions are the normalized difference and sum of their images. When
/// `b = c` the plane may rotate about the major axis and `theta` selects the
/// rotation; otherwise `theta` is ignored and `section.free_rotation` is
/// false.
pub fn optimal_strategy_for_correlation(
    k: &CorrelationMatrix,
    gamma: f64,
    theta: f64,
    sign: SignBranch,
) -> Result<OptimizationResult> {
    if !gamma.is_finite() {
        return Err(domain("gamma must be finite"));
    }
    check_theta(theta)?;
    let gamma = reduce_gamma(gamma);
    let svd = k.svd();
    let mut section = select_optimal_plane(&svd)?;
    let (a, b) = (section.semi_major, section.semi_minor);
    let theta = if section.free_rotation { theta } else { 0.0 };
    if section.free_rotation {
        let (sin_th, cos_th) = theta.sin_cos();
        section.plane_basis.0 = combine(cos_th, &column(&svd.v, 1), sin_th, &column(&svd.v, 2));
    }
    let (xi, zeta) = section.plane_basis;

    let delta = optimal_delta(gamma, a, b)?;
    let (phi_s, phi_t) = (gamma + delta, gamma - delta);
    let s = combine(phi_s.cos(), &xi, phi_s.sin(), &zeta);
    let t = combine(phi_t.cos(), &xi, phi_t.sin(), &zeta);

    let s_k = k.apply(&s);
    let t_k = k.apply(&t);
    let fallback = column(&svd.u, 1);
    let q = unit_or(&sub(&s_k, &t_k), &fallback);
    let r = unit_or(&add(&s_k, &t_k), &fallback);
    let sv = sign.value();
    let vectors = MeasurementVectors::new(scale(&q, sv), scale(&r, sv), s, t)?;

    let params = StrategyParams {
        gamma,
        delta,
        theta,
        phi_s,
        phi_t,
        phi_q: phi_q(gamma, a, b),
        phi_r: phi_r(gamma, a, b),
    };
    Ok(OptimizationResult { max_abs_s: max_s_mixed(&svd), params, vectors, section, sign_branch: sign })
}

fn unit_or(v: &Vec3, fallback: &Vec3) -> Vec3 {
    let n = norm(v);
    if n > 0.0 {
        scale(v, 1.0 / n)
    } else {
        *fallback
    }
}

fn included_angle(x: &Vec3, y: &Vec3) -> f64 {
    dot(x, y).clamp(-1.0, 1.0).acos()
}

/// `(arccos(q·r), arccos(s·t))`.
pub fn angle_between_ab_measurements(result: &OptimizationResult) -> (f64, f64) {
    let m = &result.vectors;
    (included_angle(&m.q, &m.r), included_angle(&m.s, &m.t))
}
