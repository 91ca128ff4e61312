//! Born-rule simulation of a CHSH experiment.
//!
//! Each of the four setting pairs draws its own shot stream from a ChaCha8
//! generator seeded with the user seed and using the pair index as stream
//! id, so transcripts are reproducible and independent of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{correlation_matrix, CorrelationMatrix, MeasurementVectors};
use crate::error::{domain, ChshError, Result};
use crate::linalg::{dot, mat_vec, Vec3};
use crate::state::{local_bloch_vectors, BlochVectorPair, DensityMatrix};

/// Negative probabilities above this magnitude indicate an invalid state.
pub const NEGATIVE_PROBABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SettingPair {
    QS,
    QT,
    RS,
    RT,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [SettingPair::QS, SettingPair::QT, SettingPair::RS, SettingPair::RT];

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn label(self) -> &'static str {
        match self {
            SettingPair::QS => "QS",
            SettingPair::QT => "QT",
            SettingPair::RS => "RS",
            SettingPair::RT => "RT",
        }
    }

    /// Coefficient of `⟨A⊗B⟩` in `S`.
    pub fn weight(self) -> f64 {
        match self {
            SettingPair::QT => -1.0,
            _ => 1.0,
        }
    }

    fn directions(self, m: &MeasurementVectors) -> (Vec3, Vec3) {
        match self {
            SettingPair::QS => (m.q, m.s),
            SettingPair::QT => (m.q, m.t),
            SettingPair::RS => (m.r, m.s),
            SettingPair::RT => (m.r, m.t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub pair: SettingPair,
    pub outcome_a: i8,
    pub outcome_b: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub s_hat: f64,
    pub stderr: f64,
    pub shots_per_pair: u64,
    pub seed: u64,
    /// Per-pair sample means `Ê[QS], Ê[QT], Ê[RS], Ê[RT]`.
    pub correlators: [f64; 4],
    /// Probability mass removed by clamping tiny negative values.
    pub clamped_mass: f64,
}

/// Outcome order `(+,+), (+,−), (−,+), (−,−)`.
const OUTCOMES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Joint outcome distribution for measuring `a·σ` on A and `b·σ` on B, in
/// the order `(+,+), (+,−), (−,+), (−,−)`.
pub fn joint_probabilities(k: &CorrelationMatrix, bloch: &BlochVectorPair, a: &Vec3, b: &Vec3) -> Result<[f64; 4]> {
    Ok(joint_probabilities_clamped(k, bloch, a, b)?.0)
}

fn joint_probabilities_clamped(
    k: &CorrelationMatrix,
    bloch: &BlochVectorPair,
    a: &Vec3,
    b: &Vec3,
) -> Result<([f64; 4], f64)> {
    let ma = dot(a, &bloch.r_a);
    let mb = dot(b, &bloch.r_b);
    let e = dot(a, &mat_vec(k.matrix(), b));
    let mut p = OUTCOMES.map(|(i, j)| (1.0 + f64::from(i) * ma + f64::from(j) * mb + f64::from(i * j) * e) / 4.0);
    let mut clamped = 0.0;
    for x in p.iter_mut() {
        if *x < -NEGATIVE_PROBABILITY_TOL {
            return Err(ChshError::Inconsistent(format!("negative outcome probability {x}")));
        }
        if *x < 0.0 {
            clamped -= *x;
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok((p, clamped))
}

fn pair_rng(seed: u64, pair: SettingPair) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair.index());
    rng
}

fn draw(rng: &mut ChaCha8Rng, cdf: &[f64; 4]) -> usize {
    let u: f64 = rng.random();
    cdf.iter().position(|&c| u < c).unwrap_or(3)
}

fn cumulative(p: &[f64; 4]) -> [f64; 4] {
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (c, x) in cdf.iter_mut().zip(p) {
        acc += x;
        *c = acc;
    }
    cdf[3] = 1.0;
    cdf
}

struct PairRun {
    mean: f64,
    var: f64,
    clamped: f64,
    records: Vec<ShotRecord>,
}

fn run_pair(
    k: &CorrelationMatrix,
    bloch: &BlochVectorPair,
    m: &MeasurementVectors,
    pair: SettingPair,
    shots: u64,
    seed: u64,
    record: bool,
) -> Result<PairRun> {
    let (a, b) = pair.directions(m);
    let (p, clamped) = joint_probabilities_clamped(k, bloch, &a, &b)?;
    let cdf = cumulative(&p);
    let mut rng = pair_rng(seed, pair);
    let mut sum: i64 = 0;
    let mut records = Vec::new();
    for _ in 0..shots {
        let (oa, ob) = OUTCOMES[draw(&mut rng, &cdf)];
        sum += i64::from(oa * ob);
        if record {
            records.push(ShotRecord { pair, outcome_a: oa, outcome_b: ob });
        }
    }
    let mean = sum as f64 / shots as f64;
    Ok(PairRun { mean, var: 1.0 - mean * mean, clamped, records })
}

/// Estimate `S` from `shots_per_pair` simulated shots of each setting pair.
pub fn estimate_s(rho: &DensityMatrix, m: &MeasurementVectors, shots_per_pair: u64, seed: u64) -> Result<EstimateResult> {
    Ok(simulate(rho, m, shots_per_pair, seed, false)?.0)
}

/// As [`estimate_s`], additionally returning every shot when `record` is set,
/// ordered by setting pair (QS, QT, RS, RT) and then by shot.
pub fn simulate(
    rho: &DensityMatrix,
    m: &MeasurementVectors,
    shots_per_pair: u64,
    seed: u64,
    record: bool,
) -> Result<(EstimateResult, Vec<ShotRecord>)> {
    if shots_per_pair == 0 {
        return Err(domain("shots per pair must be at least 1"));
    }
    let k = correlation_matrix(rho)?;
    let bloch = local_bloch_vectors(rho);
    let runs: Vec<PairRun> = SettingPair::ALL
        .par_iter()
        .map(|&pair| run_pair(&k, &bloch, m, pair, shots_per_pair, seed, record))
        .collect::<Result<_>>()?;

    let n = shots_per_pair as f64;
    let mut correlators = [0.0; 4];
    let mut s_hat = 0.0;
    let mut var_sum = 0.0;
    let mut clamped_mass = 0.0;
    let mut records = Vec::new();
    for (i, (pair, run)) in SettingPair::ALL.iter().zip(runs).enumerate() {
        correlators[i] = run.mean;
        s_hat += pair.weight() * run.mean;
        var_sum += run.var;
        clamped_mass += run.clamped;
        records.extend(run.records);
    }
    let result = EstimateResult {
        s_hat,
        stderr: (var_sum / n).sqrt(),
        shots_per_pair,
        seed,
        correlators,
        clamped_mass,
    };
    Ok((result, records))
}
