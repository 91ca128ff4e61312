//! Small fixed-size linear algebra: 3-vectors, 3×3 matrices, and a cyclic
//! Jacobi eigensolver for real symmetric and 4×4 Hermitian matrices.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type CMat4 = [[Complex64; 4]; 4];

pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn neg(a: &Vec3) -> Vec3 {
    scale(a, -1.0)
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `x·e1 + y·e2`.
#[inline]
pub fn combine(x: f64, e1: &Vec3, y: f64, e2: &Vec3) -> Vec3 {
    add(&scale(e1, x), &scale(e2, y))
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn det(m: &Mat3) -> f64 {
    dot(&m[0], &cross(&m[1], &m[2]))
}

pub fn column(m: &Mat3, j: usize) -> Vec3 {
    [m[0][j], m[1][j], m[2][j]]
}

pub fn from_columns(c: &[Vec3; 3]) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = c[j][i];
        }
    }
    m
}

pub fn diag(d: &Vec3) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

/// Largest elementwise absolute difference.
pub fn max_abs_diff(a: &Mat3, b: &Mat3) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Eigen-decomposition of a real symmetric `N×N` matrix by cyclic Jacobi
/// rotations.
///
/// Returns eigenvalues (unsorted, in the order the rotations leave them) and
/// a matrix whose columns are the corresponding orthonormal eigenvectors.
/// Only the upper triangle is trusted to be symmetric; the input is
/// symmetrized first.
pub fn symmetric_eigen<const N: usize>(input: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *input;
    for i in 0..N {
        for j in (i + 1)..N {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = f64::EPSILON * f64::EPSILON * 1e-4 * frob * frob;

    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|i| ((i + 1)..N).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..N {
                    if k != p && k != q {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                }
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;

                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut values = [0.0; N];
    for (i, val) in values.iter_mut().enumerate() {
        *val = a[i][i];
    }
    (values, v)
}

/// Eigenvalues of a 4×4 Hermitian matrix, ascending.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, −B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues4(h: &CMat4) -> [f64; 4] {
    let mut m = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let z = h[i][j];
            m[i][j] = z.re;
            m[i + 4][j + 4] = z.re;
            m[i][j + 4] = -z.im;
            m[i + 4][j] = z.im;
        }
    }
    let (mut values, _) = symmetric_eigen(&m);
    values.sort_by(f64::total_cmp);
    [values[0], values[2], values[4], values[6]]
}

pub fn cmat4_zero() -> CMat4 {
    [[Complex64::new(0.0, 0.0); 4]; 4]
}

pub fn cmat4_mul(a: &CMat4, b: &CMat4) -> CMat4 {
    let mut c = cmat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn cmat4_trace(a: &CMat4) -> Complex64 {
    (0..4).map(|i| a[i][i]).sum()
}

/// Kronecker product of two 2×2 complex matrices, basis order `|00⟩,|01⟩,|10⟩,|11⟩`.
pub fn kron2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> CMat4 {
    let mut k = cmat4_zero();
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    k[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    k
}
