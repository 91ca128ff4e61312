//! Correlation matrix `K_ij = ⟨σ_i ⊗ σ_j⟩`, its ordered SVD, and the CHSH
//! expectation `S = qᵀK(s − t) + rᵀK(s + t)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ChshError, Result};
use crate::linalg::{
    self, add, column, cross, det, diag, from_columns, mat_mul, mat_vec, norm, scale, sub, symmetric_eigen,
    transpose, Mat3, Vec3,
};
use crate::state::{DensityMatrix, PAULI};

/// Singular values closer than this are treated as one degenerate group when
/// ordering the columns of `V`.
pub const DEGENERACY_TOL: f64 = 1e-12;

const ENTRY_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationMatrix {
    k: Mat3,
}

impl CorrelationMatrix {
    /// Checks that every entry lies in `[−1, 1]` and every singular value is
    /// at most one, which holds for the correlation matrix of any valid state.
    pub fn new(k: Mat3) -> Result<Self> {
        for row in &k {
            for &x in row {
                if !x.is_finite() || x.abs() > 1.0 + ENTRY_TOL {
                    return Err(ChshError::InvalidState(format!("correlation entry {x} outside [-1, 1]")));
                }
            }
        }
        let a = svd3(&k).sigma[0];
        if a > 1.0 + SINGULAR_TOL {
            return Err(ChshError::InvalidState(format!("correlation singular value {a} exceeds 1")));
        }
        Ok(Self { k })
    }

    pub fn from_diagonal(d: Vec3) -> Result<Self> {
        Self::new(diag(&d))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.k
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        mat_vec(&self.k, v)
    }

    pub fn svd(&self) -> SvdDecomposition {
        svd3(&self.k)
    }
}

/// `K_ij = tr(ρ σ_i⊗σ_j)`.
pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let e = rho.expectation(&linalg::kron2(&PAULI[i], &PAULI[j]));
            if e.im.abs() > 1e-8 {
                return Err(ChshError::Inconsistent(format!(
                    "imaginary part {} in correlation entry ({i}, {j})",
                    e.im
                )));
            }
            k[i][j] = e.re;
        }
    }
    CorrelationMatrix::new(k)
}

/// `K = U·diag(a, b, c)·Vᵀ` with `a ≥ b ≥ c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdDecomposition {
    pub u: Mat3,
    pub sigma: Vec3,
    pub v: Mat3,
}

impl SvdDecomposition {
    pub fn a(&self) -> f64 {
        self.sigma[0]
    }

    pub fn b(&self) -> f64 {
        self.sigma[1]
    }

    pub fn c(&self) -> f64 {
        self.sigma[2]
    }

    pub fn reconstruct(&self) -> Mat3 {
        mat_mul(&mat_mul(&self.u, &diag(&self.sigma)), &transpose(&self.v))
    }
}

/// Flip `v` so that its largest-magnitude component (first one on ties) is
/// positive.
fn fix_sign(v: Vec3) -> Vec3 {
    let mut lead = 0;
    for i in 1..3 {
        if v[i].abs() > v[lead].abs() {
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        scale(&v, -1.0)
    } else {
        v
    }
}

fn abs_lex_desc(x: &Vec3, y: &Vec3) -> std::cmp::Ordering {
    for i in 0..3 {
        match y[i].abs().total_cmp(&x[i].abs()) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// A unit vector orthogonal to the unit vector `u`.
fn any_orthogonal(u: &Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if u[i].abs() < u[k].abs() {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let w = sub(&e, &scale(u, linalg::dot(u, &e)));
    scale(&w, 1.0 / norm(&w))
}

/// Ordered singular value decomposition of a real 3×3 matrix.
///
/// `V` comes from a Jacobi eigen-decomposition of `KᵀK`; the columns of `U`
/// are recovered from `K v_i` by Gram–Schmidt, completed by an orthogonal
/// complement when `K v_i` vanishes. Each column of `V` has its
/// largest-magnitude entry positive, and within a degenerate group of
/// singular values columns are sorted by descending absolute entries
/// (compared lexicographically).
pub fn svd3(k: &Mat3) -> SvdDecomposition {
    let ktk = mat_mul(&transpose(k), k);
    let (_, vecs) = symmetric_eigen(&ktk);

    let mut cols: Vec<(f64, Vec3)> = (0..3)
        .map(|i| {
            let v = fix_sign(column(&vecs, i));
            (norm(&mat_vec(k, &v)), v)
        })
        .collect();
    cols.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && cols[start].0 - cols[end].0 <= DEGENERACY_TOL {
            end += 1;
        }
        cols[start..end].sort_by(|x, y| abs_lex_desc(&x.1, &y.1));
        start = end;
    }

    let v_cols = [cols[0].1, cols[1].1, cols[2].1];
    let scale_ref = cols[0].0.max(f64::MIN_POSITIVE);
    let mut u_cols: [Vec3; 3] = [[0.0; 3]; 3];
    let mut sigma = [0.0; 3];
    for i in 0..3 {
        let kv = mat_vec(k, &v_cols[i]);
        let mut w = kv;
        for u in u_cols.iter().take(i) {
            w = sub(&w, &scale(u, linalg::dot(u, &w)));
        }
        let wn = norm(&w);
        let u = if wn > 1e-14 * scale_ref && wn > 0.0 {
            scale(&w, 1.0 / wn)
        } else {
            match i {
                0 => [1.0, 0.0, 0.0],
                1 => any_orthogonal(&u_cols[0]),
                _ => cross(&u_cols[0], &u_cols[1]),
            }
        };
        let s = linalg::dot(&u, &kv);
        if s < 0.0 {
            u_cols[i] = scale(&u, -1.0);
            sigma[i] = -s;
        } else {
            u_cols[i] = u;
            sigma[i] = s;
        }
    }
    for i in 1..3 {
        if sigma[i] > sigma[i - 1] {
            sigma[i] = sigma[i - 1];
        }
    }

    SvdDecomposition { u: from_columns(&u_cols), sigma, v: from_columns(&v_cols) }
}

/// Four unit Bloch directions: `q`, `r` on qubit A and `s`, `t` on qubit B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementVectors {
    pub q: Vec3,
    pub r: Vec3,
    pub s: Vec3,
    pub t: Vec3,
}

impl MeasurementVectors {
    /// Rejects any vector whose norm differs from one by more than `1e-12`.
    pub fn new(q: Vec3, r: Vec3, s: Vec3, t: Vec3) -> Result<Self> {
        for (name, v) in [("q", &q), ("r", &r), ("s", &s), ("t", &t)] {
            let n = norm(v);
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                return Err(domain(format!("measurement vector {name} has norm {n}, expected 1")));
            }
        }
        Ok(Self { q, r, s, t })
    }

    /// `[q, r, s, t]`.
    pub fn as_array(&self) -> [Vec3; 4] {
        [self.q, self.r, self.s, self.t]
    }
}

/// `S = qᵀK(s − t) + rᵀK(s + t)`.
pub fn chsh_expectation(k: &CorrelationMatrix, m: &MeasurementVectors) -> f64 {
    let diff = k.apply(&sub(&m.s, &m.t));
    let sum = k.apply(&add(&m.s, &m.t));
    linalg::dot(&m.q, &diff) + linalg::dot(&m.r, &sum)
}

/// `|det U|` and `|det V|`, for sanity checks.
pub fn factor_determinants(svd: &SvdDecomposition) -> (f64, f64) {
    (det(&svd.u).abs(), det(&svd.v).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, IDENTITY3};
    use crate::state::{make_two_state_mixture, make_werner, pure_to_density, schmidt_to_pure, SchmidtState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn schmidt_k(c: f64) -> CorrelationMatrix {
        correlation_matrix(&pure_to_density(&schmidt_to_pure(SchmidtState::new(c).unwrap()))).unwrap()
    }

    fn rotation(axis: Vec3, angle: f64) -> Mat3 {
        let n = norm(&axis);
        let [x, y, z] = axis.map(|c| c / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ]
    }

    fn check_svd(m: &Mat3, svd: &SvdDecomposition) {
        assert!(max_abs_diff(&svd.reconstruct(), m) < 1e-9, "{svd:?}");
        let (du, dv) = factor_determinants(svd);
        assert!((du - 1.0).abs() < 1e-9 && (dv - 1.0).abs() < 1e-9);
        assert!(max_abs_diff(&mat_mul(&transpose(&svd.u), &svd.u), &IDENTITY3) < 1e-9);
        assert!(max_abs_diff(&mat_mul(&transpose(&svd.v), &svd.v), &IDENTITY3) < 1e-9);
        let [a, b, c] = svd.sigma;
        assert!(a >= b && b >= c && c >= 0.0, "{:?}", svd.sigma);
    }

    #[test]
    fn schmidt_correlation_is_minus_diag() {
        for c in [0.0, 0.3, 0.6, 1.0] {
            let k = schmidt_k(c);
            let expect = diag(&[-c, -c, -1.0]);
            assert!(max_abs_diff(k.matrix(), &expect) < 1e-12, "C={c}: {:?}", k.matrix());
        }
    }

    #[test]
    fn mixture_correlation() {
        let k = correlation_matrix(&make_two_state_mixture(1.0 / 3.0, 0.6, 0.9).unwrap()).unwrap();
        assert!(max_abs_diff(k.matrix(), &diag(&[0.4, -0.8, 1.0 / 3.0])) < 1e-12, "{:?}", k.matrix());
        let k = correlation_matrix(&make_two_state_mixture(0.5, 1.0, 1.0).unwrap()).unwrap();
        assert!(max_abs_diff(k.matrix(), &diag(&[0.0, -1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn werner_correlation() {
        for p in [0.0, 0.25, 0.7, 1.0] {
            let k = correlation_matrix(&make_werner(p).unwrap()).unwrap();
            assert!(max_abs_diff(k.matrix(), &diag(&[-p, -p, -p])) < 1e-12);
        }
    }

    #[test]
    fn svd_of_schmidt_k() {
        let svd = svd3(&diag(&[-0.4, -0.4, -1.0]));
        assert_eq!(svd.sigma, [1.0, 0.4, 0.4]);
        assert_eq!(column(&svd.v, 0), [0.0, 0.0, 1.0]);
        assert_eq!(column(&svd.v, 1), [1.0, 0.0, 0.0]);
        check_svd(&diag(&[-0.4, -0.4, -1.0]), &svd);
    }

    #[test]
    fn svd_of_mixture_k() {
        let m = diag(&[0.4, -0.8, 1.0 / 3.0]);
        let svd = svd3(&m);
        assert_abs_diff_eq!(svd.a(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(svd.b(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(svd.c(), 1.0 / 3.0, epsilon = 1e-15);
        check_svd(&m, &svd);
    }

    #[test]
    fn svd_recovers_constructed_spectrum() {
        let q1 = rotation([1.0, 2.0, -0.5], 0.9);
        let q2 = rotation([-0.3, 0.4, 1.0], 2.1);
        let m = mat_mul(&mat_mul(&q1, &diag(&[0.7, 0.5, 0.1])), &transpose(&q2));
        let svd = svd3(&m);
        for (s, e) in svd.sigma.iter().zip([0.7, 0.5, 0.1]) {
            assert_abs_diff_eq!(*s, e, epsilon = 1e-12);
        }
        check_svd(&m, &svd);
    }

    #[test]
    fn svd_rank_deficient_and_zero() {
        let q1 = rotation([0.2, -1.0, 0.5], 1.3);
        let q2 = rotation([1.0, 1.0, 1.0], -0.4);
        for spectrum in [[0.9, 0.3, 0.0], [0.6, 0.0, 0.0], [0.0, 0.0, 0.0], [0.5, 0.5, 0.5]] {
            let m = mat_mul(&mat_mul(&q1, &diag(&spectrum)), &transpose(&q2));
            let svd = svd3(&m);
            check_svd(&m, &svd);
            for (s, e) in svd.sigma.iter().zip(spectrum) {
                assert_abs_diff_eq!(*s, e, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn svd_is_deterministic() {
        let m = [[0.1, -0.3, 0.2], [0.05, 0.4, -0.1], [0.3, 0.0, 0.25]];
        assert_eq!(svd3(&m), svd3(&m));
    }

    #[test]
    fn chsh_examples() {
        let k = schmidt_k(1.0);
        let q = [1.0, 0.0, 0.0];
        let r = [0.0, 1.0, 0.0];
        let s = scale(&add(&q, &r), -1.0 / SQRT_2);
        let t = scale(&sub(&q, &r), 1.0 / SQRT_2);
        let m = MeasurementVectors::new(q, r, s, t).unwrap();
        assert_abs_diff_eq!(chsh_expectation(&k, &m), 2.0 * SQRT_2, epsilon = 1e-12);

        let z = [0.0, 0.0, 1.0];
        let m = MeasurementVectors::new(z, z, z, z).unwrap();
        for c in [0.0, 0.5, 1.0] {
            assert_abs_diff_eq!(chsh_expectation(&schmidt_k(c), &m), -2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_unit_vectors_rejected() {
        let z = [0.0, 0.0, 1.0];
        assert!(matches!(
            MeasurementVectors::new(z, z, z, [0.0, 0.0, 1.001]),
            Err(ChshError::Domain(_))
        ));
    }

    #[test]
    fn correlation_rejects_oversized_entries() {
        assert!(CorrelationMatrix::new(diag(&[1.2, 0.0, 0.0])).is_err());
        // entries fine, but singular value √2
        assert!(CorrelationMatrix::new([[0.9, 0.9, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).is_err());
    }

    fn unit(v: [f64; 3]) -> Vec3 {
        let n = norm(&v);
        v.map(|x| x / n)
    }

    proptest! {
        #[test]
        fn svd_reconstructs_random(entries in proptest::array::uniform9(-1.0f64..1.0), rank in 0usize..4) {
            let mut m = [[entries[0], entries[1], entries[2]], [entries[3], entries[4], entries[5]], [entries[6], entries[7], entries[8]]];
            // force rank deficiency by copying rows
            if rank < 3 { m[2] = scale(&m[1], 0.5); }
            if rank < 2 { m[1] = scale(&m[0], -2.0); m[2] = m[0]; }
            if rank < 1 { m = [[0.0; 3]; 3]; }
            let svd = svd3(&m);
            check_svd(&m, &svd);
        }

        #[test]
        fn flipping_s_and_t_negates_s(
            q in proptest::array::uniform3(-1.0f64..1.0),
            r in proptest::array::uniform3(-1.0f64..1.0),
            s in proptest::array::uniform3(-1.0f64..1.0),
            t in proptest::array::uniform3(-1.0f64..1.0),
            c in 0.0f64..1.0,
        ) {
            prop_assume!([q, r, s, t].iter().all(|v| norm(v) > 1e-3));
            let k = CorrelationMatrix::from_diagonal([-c, -c, -1.0]).unwrap();
            let m = MeasurementVectors::new(unit(q), unit(r), unit(s), unit(t)).unwrap();
            let flipped = MeasurementVectors::new(m.q, m.r, scale(&m.s, -1.0), scale(&m.t, -1.0)).unwrap();
            prop_assert_eq!(chsh_expectation(&k, &flipped), -chsh_expectation(&k, &m));
        }
    }
}
