//! Brute-force maximizer of `|S|` used to certify the closed forms.
//!
//! For fixed `s`, `t` the best A-side directions are known exactly, leaving
//! `|K s − K t| + |K s + K t|` to maximize over two spheres. The oracle scans
//! a lattice of spherical angles, then polishes the best cell by coordinate
//! ascent with golden-section line searches. It never uses the ellipse
//! parameterization.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::CorrelationMatrix;
use crate::error::{domain, Result};
use crate::linalg::{add, norm, sub, Vec3};

pub const DEFAULT_GRID: usize = 24;
pub const DEFAULT_REFINE_ITERS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-5;

const GOLDEN_STEPS: usize = 80;

/// Polar (`theta`) and azimuthal (`phi`) angles of `s` and `t`, with
/// `v = (sin θ cos φ, sin θ sin φ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalAngles {
    pub phi_s: f64,
    pub theta_s: f64,
    pub phi_t: f64,
    pub theta_t: f64,
}

impl SphericalAngles {
    fn to_array(self) -> [f64; 4] {
        [self.phi_s, self.theta_s, self.phi_t, self.theta_t]
    }

    fn from_array(x: [f64; 4]) -> Self {
        Self { phi_s: x[0], theta_s: x[1], phi_t: x[2], theta_t: x[3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_s: f64,
    pub best_angles: SphericalAngles,
    /// Refinement cycles run.
    pub iterations: usize,
    /// Objective evaluations, grid included.
    pub evaluations: usize,
    /// Best value after the grid scan followed by the value after each cycle.
    pub cycle_values: Vec<f64>,
}

/// How the grid scan is split across workers. All schedules return the same
/// result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridSchedule {
    Sequential,
    #[default]
    Parallel,
    /// Split the lattice into this many contiguous chunks, each scanned on
    /// its own rayon task.
    Chunked(usize),
}

pub fn unit_from_angles(phi: f64, theta: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// `max_{q,r} S = |K s − K t| + |K s + K t|`.
///
/// A vanishing difference or sum contributes zero; the matching A-side
/// direction is then arbitrary.
pub fn inner_qr_maximize(k: &CorrelationMatrix, s: &Vec3, t: &Vec3) -> f64 {
    half_perimeter_images(&k.apply(s), &k.apply(t))
}

#[inline]
fn half_perimeter_images(s_k: &Vec3, t_k: &Vec3) -> f64 {
    norm(&sub(s_k, t_k)) + norm(&add(s_k, t_k))
}

fn objective(k: &CorrelationMatrix, x: &[f64; 4]) -> f64 {
    inner_qr_maximize(k, &unit_from_angles(x[0], x[1]), &unit_from_angles(x[2], x[3]))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    index: usize,
}

/// Larger value wins; equal values go to the smaller lattice index, which is
/// the lexicographically smallest angle tuple. Associative and commutative,
/// so any partition of the grid reduces to the same winner.
fn better(a: Candidate, b: Candidate) -> Candidate {
    if a.value > b.value || (a.value == b.value && a.index < b.index) {
        a
    } else {
        b
    }
}

struct Lattice {
    n: usize,
    images: Vec<Vec3>,
}

impl Lattice {
    fn new(k: &CorrelationMatrix, n: usize) -> Self {
        let mut images = Vec::with_capacity(n * n);
        for ip in 0..n {
            for it in 0..n {
                let (phi, theta) = Self::angles(n, ip, it);
                images.push(k.apply(&unit_from_angles(phi, theta)));
            }
        }
        Self { n, images }
    }

    fn angles(n: usize, ip: usize, it: usize) -> (f64, f64) {
        (2.0 * PI * ip as f64 / n as f64, PI * (it as f64 + 0.5) / n as f64)
    }

    fn len(&self) -> usize {
        self.images.len() * self.images.len()
    }

    fn eval(&self, index: usize) -> Candidate {
        let m = self.images.len();
        let value = half_perimeter_images(&self.images[index / m], &self.images[index % m]);
        Candidate { value, index }
    }

    fn scan(&self, range: std::ops::Range<usize>) -> Candidate {
        range.map(|i| self.eval(i)).reduce(better).expect("non-empty range")
    }

    fn decode(&self, index: usize) -> [f64; 4] {
        let m = self.images.len();
        let (s, t) = (index / m, index % m);
        let (phi_s, theta_s) = Self::angles(self.n, s / self.n, s % self.n);
        let (phi_t, theta_t) = Self::angles(self.n, t / self.n, t % self.n);
        [phi_s, theta_s, phi_t, theta_t]
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        evals += 1;
        if hi - lo < 1e-14 {
            break;
        }
    }
    if f1 >= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

/// Grid search on a `grid_n⁴` lattice followed by `refine_iters` cycles of
/// coordinate ascent, using the default parallel schedule.
pub fn brute_force_max_s(k: &CorrelationMatrix, grid_n: usize, refine_iters: usize) -> Result<OracleResult> {
    brute_force_max_s_with(k, grid_n, refine_iters, GridSchedule::Parallel)
}

pub fn brute_force_max_s_with(
    k: &CorrelationMatrix,
    grid_n: usize,
    refine_iters: usize,
    schedule: GridSchedule,
) -> Result<OracleResult> {
    if grid_n < 8 {
        return Err(domain(format!("grid_n must be at least 8, got {grid_n}")));
    }
    let lattice = Lattice::new(k, grid_n);
    let total = lattice.len();
    let best = match schedule {
        GridSchedule::Sequential => lattice.scan(0..total),
        GridSchedule::Parallel => (0..total)
            .into_par_iter()
            .map(|i| lattice.eval(i))
            .reduce(|| Candidate { value: f64::NEG_INFINITY, index: usize::MAX }, better),
        GridSchedule::Chunked(chunks) => {
            let chunks = chunks.clamp(1, total);
            let size = total.div_ceil(chunks);
            (0..chunks)
                .into_par_iter()
                .filter_map(|c| {
                    let start = c * size;
                    (start < total).then(|| lattice.scan(start..(start + size).min(total)))
                })
                .reduce(|| Candidate { value: f64::NEG_INFINITY, index: usize::MAX }, better)
        }
    };

    let mut x = lattice.decode(best.index);
    let mut fx = objective(k, &x);
    let mut evaluations = total + 1;
    let mut cycle_values = vec![fx];
    let widths = [2.0 * PI / grid_n as f64, PI / grid_n as f64, 2.0 * PI / grid_n as f64, PI / grid_n as f64];

    for _ in 0..refine_iters {
        for (i, w) in widths.iter().enumerate() {
            let line = |v: f64| {
                let mut y = x;
                y[i] = v;
                objective(k, &y)
            };
            let (xi, fi, used) = golden_section_max(line, x[i] - w, x[i] + w);
            evaluations += used;
            if fi > fx {
                x[i] = xi;
                fx = fi;
            }
        }
        cycle_values.push(fx);
    }

    Ok(OracleResult {
        best_s: fx,
        best_angles: SphericalAngles::from_array(x),
        iterations: refine_iters,
        evaluations,
        cycle_values,
    })
}

impl OracleResult {
    pub fn angles_array(&self) -> [f64; 4] {
        self.best_angles.to_array()
    }
}
