use std::f64::consts::{FRAC_PI_4, PI};
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use chsh_core::geometry::{self, select_optimal_plane, SweepRow};
use chsh_core::oracle::{brute_force_max_s, OracleResult};
use chsh_core::sampler::{simulate, EstimateResult};
use chsh_core::state::{make_two_state_mixture, make_werner, ppt_entangled, StateSpec};
use chsh_core::strategy::{
    angle_between_ab_measurements, max_s_mixed, optimal_strategy_for_correlation, optimal_strategy_pure,
    optimal_strategy_pure_verbatim, violates_chsh,
};
use chsh_core::{
    chsh_expectation, correlation_matrix, CorrelationMatrix, MeasurementVectors, OptimizationResult, SignBranch,
    StrategyParams, TwoQubitState,
};
use serde::Serialize;

use crate::args::{Format, OptimizeArgs, PaperExamplesArgs, SimulateArgs, SweepArgs, VerifyArgs};
use crate::output::{angle, open, sig, sig_vec, Table};
use crate::Outcome;

pub struct LoadedState {
    pub spec: StateSpec,
    pub state: TwoQubitState,
    pub k: CorrelationMatrix,
}

pub fn load_state(path: &Path) -> Result<LoadedState> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read state file {}", path.display()))?;
    let spec = StateSpec::from_json(&text).with_context(|| path.display().to_string())?;
    let state = spec.to_state().with_context(|| path.display().to_string())?;
    let k = correlation_matrix(&state.density()?)?;
    Ok(LoadedState { spec, state, k })
}

fn describe(spec: &StateSpec) -> String {
    match spec {
        StateSpec::Pure { .. } => "pure".into(),
        StateSpec::Schmidt { concurrence } => format!("schmidt C={}", sig(*concurrence)),
        StateSpec::Mixed { .. } => "mixed".into(),
        StateSpec::Werner { p } => format!("werner p={}", sig(*p)),
        StateSpec::Mixture { p, concurrence_psi, concurrence_phi } => format!(
            "mixture p={} C={} D={}",
            sig(*p),
            sig(*concurrence_psi),
            sig(*concurrence_phi)
        ),
    }
}

/// Schmidt states use the closed-form pure solution in their own frame;
/// everything else goes through the singular-value decomposition of `K`.
pub fn strategy_for(loaded: &LoadedState, gamma: f64, theta: f64, sign: SignBranch) -> Result<OptimizationResult> {
    Ok(match loaded.state {
        TwoQubitState::Schmidt(s) => optimal_strategy_pure(s.concurrence(), gamma, theta, sign)?,
        _ => optimal_strategy_for_correlation(&loaded.k, gamma, theta, sign)?,
    })
}

#[derive(Serialize)]
struct Params {
    gamma: f64,
    delta: f64,
    theta: f64,
    phi_s: f64,
    phi_t: f64,
    phi_q: f64,
    phi_r: f64,
}

impl Params {
    fn new(p: &StrategyParams, degrees: bool) -> Self {
        let f = |x| angle(x, degrees);
        Self {
            gamma: f(p.gamma),
            delta: f(p.delta),
            theta: f(p.theta),
            phi_s: f(p.phi_s),
            phi_t: f(p.phi_t),
            phi_q: f(p.phi_q),
            phi_r: f(p.phi_r),
        }
    }
}

#[derive(Serialize)]
struct Section {
    semi_major: f64,
    semi_minor: f64,
    xi: [f64; 3],
    zeta: [f64; 3],
    free_rotation: bool,
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    state: &'a StateSpec,
    correlation_matrix: &'a CorrelationMatrix,
    singular_values: [f64; 3],
    max_abs_s: f64,
    s_value: f64,
    violates_chsh: bool,
    sign_branch: SignBranch,
    angle_unit: &'static str,
    params: Params,
    section: Section,
    included_angles: [f64; 2],
    vectors: MeasurementVectors,
}

fn unit_name(degrees: bool) -> &'static str {
    if degrees {
        "degrees"
    } else {
        "radians"
    }
}

fn write_vectors(t: &mut Table, m: &MeasurementVectors) {
    t.row("q", sig_vec(&m.q)).row("r", sig_vec(&m.r)).row("s", sig_vec(&m.s)).row("t", sig_vec(&m.t));
}

fn write_params(t: &mut Table, p: &Params) {
    t.num("gamma", p.gamma)
        .num("delta", p.delta)
        .num("theta", p.theta)
        .num("phi_s", p.phi_s)
        .num("phi_t", p.phi_t)
        .num("phi_q", p.phi_q)
        .num("phi_r", p.phi_r);
}

pub fn optimize(args: &OptimizeArgs) -> Result<Outcome> {
    let degrees = args.output.degrees;
    let loaded = load_state(&args.strategy.state)?;
    let (gamma, theta) = args.strategy.angles(degrees);
    let res = strategy_for(&loaded, gamma, theta, args.strategy.sign.into())?;
    let svd = loaded.k.svd();
    let (qr, st) = angle_between_ab_measurements(&res);
    let report = OptimizeReport {
        state: &loaded.spec,
        correlation_matrix: &loaded.k,
        singular_values: svd.sigma,
        max_abs_s: res.max_abs_s,
        s_value: chsh_expectation(&loaded.k, &res.vectors),
        violates_chsh: violates_chsh(&svd),
        sign_branch: res.sign_branch,
        angle_unit: unit_name(degrees),
        params: Params::new(&res.params, degrees),
        section: Section {
            semi_major: res.section.semi_major,
            semi_minor: res.section.semi_minor,
            xi: res.section.plane_basis.0,
            zeta: res.section.plane_basis.1,
            free_rotation: res.section.free_rotation,
        },
        included_angles: [angle(qr, degrees), angle(st, degrees)],
        vectors: res.vectors,
    };

    let mut out = open(args.output.output.as_deref())?;
    if args.output.format == Format::Json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        let mut t = Table::new();
        t.row("state", describe(&loaded.spec));
        if args.dump_k {
            for (i, row) in loaded.k.matrix().iter().enumerate() {
                t.row(format!("K[{i}]"), sig_vec(row));
            }
            t.row("singular_values", sig_vec(&svd.sigma));
        }
        t.num("max_abs_s", report.max_abs_s)
            .num("S", report.s_value)
            .row("violates_chsh", report.violates_chsh.to_string())
            .row("sign_branch", format!("{:?}", report.sign_branch).to_lowercase())
            .num("semi_major", report.section.semi_major)
            .num("semi_minor", report.section.semi_minor)
            .row("free_rotation", report.section.free_rotation.to_string())
            .row("angle_unit", report.angle_unit);
        write_params(&mut t, &report.params);
        t.num("angle(q,r)", report.included_angles[0]).num("angle(s,t)", report.included_angles[1]);
        write_vectors(&mut t, &report.vectors);
        t.write(&mut out)?;
    }
    out.flush()?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct VerifyReport {
    closed_form: f64,
    oracle: f64,
    gap: f64,
    tol: f64,
    pass: bool,
    grid: usize,
    refine_iters: usize,
    evaluations: usize,
    best_angles: [f64; 4],
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let loaded = load_state(&args.state)?;
    let closed = max_s_mixed(&loaded.k.svd());
    let found: OracleResult = brute_force_max_s(&loaded.k, args.grid, args.refine_iters)?;
    let gap = (closed - found.best_s).abs();
    let pass = gap <= args.tol;
    let degrees = args.output.degrees;
    let a = found.best_angles;
    let report = VerifyReport {
        closed_form: closed,
        oracle: found.best_s,
        gap,
        tol: args.tol,
        pass,
        grid: args.grid,
        refine_iters: args.refine_iters,
        evaluations: found.evaluations,
        best_angles: [a.phi_s, a.theta_s, a.phi_t, a.theta_t].map(|x| angle(x, degrees)),
    };
    let mut out = open(args.output.output.as_deref())?;
    if args.output.format == Format::Json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        Table::new()
            .row("state", describe(&loaded.spec))
            .num("closed_form", closed)
            .num("oracle", found.best_s)
            .num("gap", gap)
            .num("tol", args.tol)
            .row("evaluations", found.evaluations.to_string())
            .row("best_angles", sig_vec(&report.best_angles))
            .row("result", if pass { "pass" } else { "fail" })
            .write(&mut out)?;
    }
    out.flush()?;
    Ok(if pass { Outcome::Success } else { Outcome::CheckFailed })
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome> {
    let loaded = load_state(&args.state)?;
    let section = select_optimal_plane(&loaded.k.svd())?;
    let rows: Vec<SweepRow> = geometry::sweep(section.semi_major, section.semi_minor, args.gamma_steps)?
        .into_iter()
        .map(|r| SweepRow {
            gamma: angle(r.gamma, args.degrees),
            phi_s: angle(r.phi_s, args.degrees),
            phi_t: angle(r.phi_t, args.degrees),
            phi_q: angle(r.phi_q, args.degrees),
            phi_r: angle(r.phi_r, args.degrees),
            half_perimeter: r.half_perimeter,
        })
        .collect();
    let mut out = open(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(out, "{:>16} {:>16} {:>16} {:>16} {:>16} {:>16}", "gamma", "phi_s", "phi_t", "phi_q", "phi_r", "half_perimeter")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>16} {:>16} {:>16} {:>16} {:>16} {:>16}",
                    sig(r.gamma),
                    sig(r.phi_s),
                    sig(r.phi_t),
                    sig(r.phi_q),
                    sig(r.phi_r),
                    sig(r.half_perimeter)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SimulateReport {
    s_hat: f64,
    stderr: f64,
    exact_s: f64,
    z_score: f64,
    shots_per_pair: u64,
    seed: u64,
    correlators: [f64; 4],
    vectors: MeasurementVectors,
}

fn z_score(est: &EstimateResult, exact: f64) -> f64 {
    let d = est.s_hat - exact;
    if est.stderr > 0.0 {
        d / est.stderr
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

#[derive(Serialize)]
struct TranscriptRow {
    pair: &'static str,
    a: i8,
    b: i8,
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Outcome> {
    let loaded = load_state(&args.strategy.state)?;
    let (gamma, theta) = args.strategy.angles(args.output.degrees);
    let res = strategy_for(&loaded, gamma, theta, args.strategy.sign.into())?;
    let rho = loaded.state.density()?;
    let (est, shots) = simulate(&rho, &res.vectors, args.shots, args.seed, args.transcript.is_some())?;
    let exact = chsh_expectation(&loaded.k, &res.vectors);

    if let Some(path) = &args.transcript {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        for s in &shots {
            w.serialize(TranscriptRow { pair: s.pair.label(), a: s.outcome_a, b: s.outcome_b })?;
        }
        w.flush()?;
    }

    let report = SimulateReport {
        s_hat: est.s_hat,
        stderr: est.stderr,
        exact_s: exact,
        z_score: z_score(&est, exact),
        shots_per_pair: est.shots_per_pair,
        seed: est.seed,
        correlators: est.correlators,
        vectors: res.vectors,
    };
    let mut out = open(args.output.output.as_deref())?;
    if args.output.format == Format::Json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        Table::new()
            .row("state", describe(&loaded.spec))
            .row("shots_per_pair", est.shots_per_pair.to_string())
            .row("seed", est.seed.to_string())
            .num("s_hat", est.s_hat)
            .num("stderr", est.stderr)
            .num("exact_s", exact)
            .num("z_score", report.z_score)
            .row("correlators", sig_vec(&est.correlators))
            .write(&mut out)?;
    }
    out.flush()?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct PureExample {
    concurrence: f64,
    gamma: f64,
    sign_branch: SignBranch,
    s_value: f64,
    max_abs_s: f64,
    params: Params,
    included_angles: [f64; 2],
    vectors: MeasurementVectors,
}

#[derive(Serialize)]
struct MixtureExample {
    p: f64,
    concurrence_psi: f64,
    concurrence_phi: f64,
    correlation_matrix: CorrelationMatrix,
    semi_major: f64,
    semi_minor: f64,
    max_abs_s: f64,
    violates_chsh: bool,
    entangled: bool,
}

#[derive(Serialize)]
struct WernerRow {
    p: f64,
    max_abs_s: f64,
    violates_chsh: bool,
    entangled: bool,
}

#[derive(Serialize)]
struct Thresholds {
    werner_chsh: f64,
    werner_entangled: f64,
}

#[derive(Serialize)]
struct PaperExamples {
    pure: Vec<PureExample>,
    mixture: MixtureExample,
    werner: Vec<WernerRow>,
    thresholds: Thresholds,
}

/// Smallest `p` in `[0, 1]` where `pred` turns true, assuming it is monotone.
fn bisect(pred: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn werner_row(p: f64) -> Result<WernerRow> {
    let rho = make_werner(p)?;
    let svd = correlation_matrix(&rho)?.svd();
    Ok(WernerRow { p, max_abs_s: max_s_mixed(&svd), violates_chsh: violates_chsh(&svd), entangled: ppt_entangled(&rho) })
}

fn paper_examples_data(degrees: bool) -> Result<PaperExamples> {
    let c = 0.5;
    let k_pure = CorrelationMatrix::from_diagonal([-c, -c, -1.0])?;
    let mut pure = Vec::new();
    for gamma in [0.0, FRAC_PI_4, 4.0 * PI / 3.0] {
        // the vectors printed for these cases belong to the S = −max family
        let res = optimal_strategy_pure_verbatim(c, gamma, 0.0, SignBranch::Negative)?;
        let (qr, st) = angle_between_ab_measurements(&res);
        pure.push(PureExample {
            concurrence: c,
            gamma: angle(gamma, degrees),
            sign_branch: res.sign_branch,
            s_value: chsh_expectation(&k_pure, &res.vectors),
            max_abs_s: res.max_abs_s,
            params: Params::new(&res.params, degrees),
            included_angles: [angle(qr, degrees), angle(st, degrees)],
            vectors: res.vectors,
        });
    }

    let (p, cp, cf) = (1.0 / 3.0, 0.6, 0.9);
    let rho = make_two_state_mixture(p, cp, cf)?;
    let k = correlation_matrix(&rho)?;
    let svd = k.svd();
    let mixture = MixtureExample {
        p,
        concurrence_psi: cp,
        concurrence_phi: cf,
        correlation_matrix: k,
        semi_major: svd.a(),
        semi_minor: svd.b(),
        max_abs_s: max_s_mixed(&svd),
        violates_chsh: violates_chsh(&svd),
        entangled: ppt_entangled(&rho),
    };

    let werner = (2..=10).map(|i| werner_row(f64::from(i) / 10.0)).collect::<Result<Vec<_>>>()?;
    let thresholds = Thresholds {
        werner_chsh: bisect(|p| Ok(werner_row(p)?.violates_chsh))?,
        werner_entangled: bisect(|p| Ok(ppt_entangled(&make_werner(p)?)))?,
    };
    Ok(PaperExamples { pure, mixture, werner, thresholds })
}

pub fn paper_examples(args: &PaperExamplesArgs) -> Result<Outcome> {
    let degrees = args.output.degrees;
    let data = paper_examples_data(degrees)?;
    let mut out = open(args.output.output.as_deref())?;
    if args.output.format == Format::Json {
        serde_json::to_writer_pretty(&mut out, &data)?;
        writeln!(out)?;
        out.flush()?;
        return Ok(Outcome::Success);
    }

    writeln!(out, "# pure Schmidt state, C = 0.5 (angles in {})", unit_name(degrees))?;
    for ex in &data.pure {
        writeln!(out)?;
        let mut t = Table::new();
        t.num("S", ex.s_value).num("max_abs_s", ex.max_abs_s);
        write_params(&mut t, &ex.params);
        t.num("angle(q,r)", ex.included_angles[0]).num("angle(s,t)", ex.included_angles[1]);
        write_vectors(&mut t, &ex.vectors);
        t.write(&mut out)?;
    }

    let m = &data.mixture;
    writeln!(out, "\n# mixture p = 1/3, C = 0.6, D = 0.9")?;
    let mut t = Table::new();
    for (i, row) in m.correlation_matrix.matrix().iter().enumerate() {
        t.row(format!("K[{i}]"), sig_vec(row));
    }
    t.num("semi_major", m.semi_major)
        .num("semi_minor", m.semi_minor)
        .num("max_abs_s", m.max_abs_s)
        .row("violates_chsh", m.violates_chsh.to_string())
        .row("entangled", m.entangled.to_string())
        .write(&mut out)?;

    writeln!(out, "\n# Werner states")?;
    writeln!(out, "{:>12} {:>12} {:>14} {:>10}", "p", "max_abs_s", "violates_chsh", "entangled")?;
    for w in &data.werner {
        writeln!(out, "{:>12} {:>12} {:>14} {:>10}", sig(w.p), sig(w.max_abs_s), w.violates_chsh, w.entangled)?;
    }
    writeln!(out)?;
    Table::new()
        .num("werner_chsh_threshold", data.thresholds.werner_chsh)
        .num("werner_entangled_threshold", data.thresholds.werner_entangled)
        .write(&mut out)?;
    out.flush()?;
    Ok(Outcome::Success)
}
