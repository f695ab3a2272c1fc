use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use quasilocal::clifford::{a_of_null, build_clifford, dirac_identity_check, killing_spinor, verify_norm_identity, zeta_of_a};
use quasilocal::config::{RunConfig, SurfaceConfig};
use quasilocal::flow::{run_observed, FlowTrace};
use quasilocal::hyperbolic::MinkowskiVector;
use quasilocal::mass::{classify_causal, compute_context, limit_mass_formula, tail_mass_value, CausalClass, MassContext};
use quasilocal::monitor::{GeodesicSlack, Monitor, MonitorOptions, MonitorSummary};
use quasilocal::sampling::{
    null_directions, random_ball_point, random_null, random_rotation, random_spinor, random_unit_vector, seeded_rng,
};
use quasilocal::surface::{build_leaf, verify_position_laplacian, verify_w_laplacian, Mode, SurfaceLeaf};
use rand::Rng;

use crate::{Context, Failure, Outcome};

const SCHEMA_PREFIX: &str = "quasilocal";

fn schema(name: &str) -> String {
    format!("{SCHEMA_PREFIX}/{name}/v1")
}

fn parse<C: DeserializeOwned + Default>(ctx: &Context) -> Result<C, Failure> {
    match &ctx.config {
        None => Ok(C::default()),
        Some(text) => parse_text(text),
    }
}

fn parse_text<C: DeserializeOwned>(text: &str) -> Result<C, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("config: {e}")))
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn finish<S: Serialize>(name: &str, report: &S, pass: bool, mut extra: Vec<(String, String)>) -> Outcome {
    let summary = to_json(report);
    extra.push((format!("{name}.json"), summary.clone()));
    Outcome { files: extra, summary, pass }
}

fn check_dimension_range(lo: usize, hi: usize, min: usize, max: usize) -> Result<(), Failure> {
    if lo < min || hi < lo || hi > max {
        return Err(Failure::Invalid(format!("dimension range {lo}..={hi} must lie within {min}..={max}")));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CliffordConfig {
    n_min: usize,
    n_max: usize,
    tolerance: f64,
}

impl Default for CliffordConfig {
    fn default() -> Self {
        Self { n_min: 2, n_max: 9, tolerance: 1e-13 }
    }
}

#[derive(Serialize)]
struct CliffordRow {
    n: usize,
    spinor_dim: usize,
    anticommutation: f64,
    self_adjoint: f64,
}

#[derive(Serialize)]
struct CliffordReport {
    schema: String,
    tolerance: f64,
    rows: Vec<CliffordRow>,
    pass: bool,
}

pub fn clifford_verify(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg: CliffordConfig = parse(ctx)?;
    check_dimension_range(cfg.n_min, cfg.n_max, 2, 16)?;
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let rep = build_clifford::<f64>(n)?;
        rows.push(CliffordRow {
            n,
            spinor_dim: rep.spinor_dim(),
            anticommutation: rep.anticommutation_residual(),
            self_adjoint: rep.self_adjoint_residual(),
        });
    }
    let pass = rows.iter().all(|r| r.anticommutation < cfg.tolerance && r.self_adjoint < cfg.tolerance);
    let report = CliffordReport { schema: schema("clifford-verify"), tolerance: cfg.tolerance, rows, pass };
    Ok(finish("clifford", &report, pass, Vec::new()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NullConfig {
    /// Future null vector, time component last.
    zeta: Vec<f64>,
}

#[derive(Serialize)]
struct NullReport {
    schema: String,
    n: usize,
    zeta: Vec<f64>,
    /// Entries of `a` as `[re, im]` pairs.
    a: Vec<[f64; 2]>,
    zeta_a: Vec<f64>,
    residual: f64,
    pass: bool,
}

pub fn null_decompose(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg: NullConfig = parse_text(ctx.require_config()?)?;
    if cfg.zeta.len() < 3 {
        return Err(Failure::Invalid("zeta needs n + 1 >= 3 components".into()));
    }
    let n = cfg.zeta.len() - 1;
    let zeta = MinkowskiVector::new(cfg.zeta.clone())?;
    let rep = build_clifford::<f64>(n)?;
    let a = a_of_null(&rep, &zeta)?;
    let back = zeta_of_a(&rep, &a)?;
    let target = zeta.scale(1.0 / zeta.time());
    let residual = back.combine(1.0, &target, -1.0).euclidean_norm();
    let pass = residual < 1e-10;
    let report = NullReport {
        schema: schema("null-decompose"),
        n,
        zeta: cfg.zeta,
        a: a.entries().iter().map(|z| [z.re, z.im]).collect(),
        zeta_a: back.components().to_vec(),
        residual,
        pass,
    };
    Ok(finish("null", &report, pass, Vec::new()))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DiracConfig {
    n_min: usize,
    n_max: usize,
    radii: Vec<f64>,
    k_values: Vec<f64>,
    samples: usize,
    tolerance: f64,
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self { n_min: 3, n_max: 5, radii: vec![0.5, 1.0, 2.0], k_values: vec![0.5, 1.0], samples: 50, tolerance: 1e-12 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpinorConfig {
    n_min: usize,
    n_max: usize,
    samples: usize,
    k_values: Vec<f64>,
    /// Ball points are drawn uniformly from `|x| < max_norm`.
    max_norm: f64,
    round_trip_tolerance: f64,
    norm_tolerance: f64,
    dirac: DiracConfig,
}

impl Default for SpinorConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 8,
            samples: 1000,
            k_values: vec![0.5, 1.0, 2.0],
            max_norm: 0.99,
            round_trip_tolerance: 1e-10,
            norm_tolerance: 1e-11,
            dirac: DiracConfig::default(),
        }
    }
}

#[derive(Serialize)]
struct SpinorRow {
    n: usize,
    round_trip: f64,
    norm_identity: f64,
}

#[derive(Serialize)]
struct DiracRow {
    n: usize,
    radius: f64,
    k: f64,
    residual: f64,
    frame_change: f64,
}

#[derive(Serialize)]
struct SpinorReport {
    schema: String,
    seed: u64,
    samples: usize,
    rows: Vec<SpinorRow>,
    dirac: Vec<DiracRow>,
    pass: bool,
}

pub fn spinor_verify(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg: SpinorConfig = parse(ctx)?;
    check_dimension_range(cfg.n_min, cfg.n_max, 2, 16)?;
    check_dimension_range(cfg.dirac.n_min, cfg.dirac.n_max, 2, 16)?;
    if cfg.k_values.is_empty() || cfg.k_values.iter().any(|&k| !(k > 0.0)) {
        return Err(Failure::Invalid("k_values must be positive and nonempty".into()));
    }
    if !(cfg.max_norm > 0.0 && cfg.max_norm < 1.0) {
        return Err(Failure::Invalid("max_norm must lie in (0, 1)".into()));
    }
    let mut rng = seeded_rng(ctx.seed);
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let rep = build_clifford::<f64>(n)?;
        let mut round_trip = 0.0f64;
        let mut norm_identity = 0.0f64;
        for _ in 0..cfg.samples {
            let zeta = random_null::<f64>(&mut rng, n);
            let a = a_of_null(&rep, &zeta)?;
            round_trip = round_trip.max(zeta_of_a(&rep, &a)?.combine(1.0, &zeta, -1.0).euclidean_norm());
            let a = random_spinor::<f64>(&mut rng, rep.spinor_dim());
            let x = random_ball_point::<f64>(&mut rng, n, cfg.max_norm)?;
            let k = cfg.k_values[rng.gen_range(0..cfg.k_values.len())];
            let phi = killing_spinor(&rep, &a, &x)?;
            norm_identity = norm_identity.max(verify_norm_identity(&rep, &a, &x, k)? / phi.norm_sq());
        }
        rows.push(SpinorRow { n, round_trip, norm_identity });
    }
    let d = &cfg.dirac;
    let mut dirac = Vec::new();
    for n in d.n_min.max(2)..=d.n_max {
        let rep = build_clifford::<f64>(n)?;
        for &radius in &d.radii {
            for &k in &d.k_values {
                let mut row = DiracRow { n, radius, k, residual: 0.0, frame_change: 0.0 };
                for _ in 0..d.samples {
                    let a = random_spinor::<f64>(&mut rng, rep.spinor_dim());
                    let dir = random_unit_vector(&mut rng, n);
                    let (res, norm) = dirac_identity_check(&rep, radius, k, &a, &dir, None)?;
                    let rot = random_rotation(&mut rng, n - 1);
                    let (res_rot, _) = dirac_identity_check(&rep, radius, k, &a, &dir, Some(&rot))?;
                    row.residual = row.residual.max(res / norm).max(res_rot / norm);
                    row.frame_change = row.frame_change.max((res - res_rot).abs() / norm);
                }
                dirac.push(row);
            }
        }
    }
    let pass = rows.iter().all(|r| r.round_trip < cfg.round_trip_tolerance && r.norm_identity < cfg.norm_tolerance)
        && dirac.iter().all(|r| r.residual < d.tolerance && r.frame_change < d.tolerance);
    let report = SpinorReport { schema: schema("spinor-verify"), seed: ctx.seed, samples: cfg.samples, rows, dirac, pass };
    Ok(finish("spinor", &report, pass, Vec::new()))
}

fn run_config(ctx: &Context) -> Result<RunConfig, Failure> {
    Ok(RunConfig::from_json(ctx.require_config()?)?)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Axisymmetric => "axisymmetric",
        Mode::Full => "full2sphere",
    }
}

type MonitoredRun = (FlowTrace<f64>, MassContext<f64>, Monitor<f64>);

/// Flow plus the monitor over the configured directions.
fn monitored_run(cfg: &RunConfig, options: MonitorOptions) -> Result<MonitoredRun, Failure> {
    let state = cfg.initial_state()?;
    let n = cfg.surface.n;
    let ctx = compute_context(state.leaf())?;
    let zeta = cfg.directions.trace_direction(n)?;
    let mut monitor = Monitor::new(ctx, cfg.directions.sampled(n)?, options);
    let trace = run_observed(state, &cfg.flow, &ctx, &zeta, |s| monitor.observe(s))?;
    Ok((trace, ctx, monitor))
}

#[derive(Serialize)]
struct Decay {
    from: f64,
    exponent: f64,
    nk: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct Monotonicity {
    /// Smallest `dmass_analytic` over the rows.
    min_derivative: f64,
    /// Most negative change of `m . zeta` between rows.
    min_increment: f64,
    derivative_scale: f64,
    mass_scale: f64,
    /// `max |dmass_fd - dmass_analytic|` over interior rows, relative to the
    /// derivative scale.
    fd_mismatch: f64,
}

#[derive(Serialize)]
struct LimitReport {
    spread: f64,
    converged: bool,
    v_min: f64,
    v_max: f64,
}

#[derive(Serialize)]
struct FlowChecks {
    decay: bool,
    monotone: bool,
}

#[derive(Serialize)]
struct FlowReport {
    schema: String,
    n: usize,
    k: f64,
    mode: &'static str,
    nodes: usize,
    steps: usize,
    rows: usize,
    rho_final: f64,
    zeta: Vec<f64>,
    initial_sup_u_minus_1: f64,
    final_sup_u_minus_1: f64,
    decay: Option<Decay>,
    monotonicity: Monotonicity,
    limit: Option<LimitReport>,
    checks: FlowChecks,
    pass: bool,
}

fn monotonicity_of(trace: &FlowTrace<f64>) -> Monotonicity {
    let rows = trace.rows();
    let pairing: Vec<f64> = rows.iter().map(|r| r.mass.lorentz_dot(trace.zeta().vector()).unwrap_or(f64::NAN)).collect();
    let derivative_scale = rows.iter().fold(0.0f64, |m, r| m.max(r.dmass_analytic.abs()));
    let mass_scale = rows.iter().fold(0.0f64, |m, r| m.max(r.mass.euclidean_norm()));
    let min_derivative = rows.iter().map(|r| r.dmass_analytic).fold(f64::INFINITY, f64::min);
    let min_increment = pairing.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let fd_mismatch = if derivative_scale > 0.0 && rows.len() > 2 {
        rows[1..rows.len() - 1]
            .iter()
            .map(|r| (r.dmass_fd - r.dmass_analytic).abs() / derivative_scale)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Monotonicity {
        min_derivative,
        min_increment: if min_increment.is_finite() { min_increment } else { 0.0 },
        derivative_scale,
        mass_scale,
        fd_mismatch,
    }
}

pub fn flow(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg = run_config(ctx)?;
    let state = cfg.initial_state()?;
    let mctx = compute_context(state.leaf())?;
    let zeta = cfg.directions.trace_direction(cfg.surface.n)?;
    let trace = run_observed(state, &cfg.flow, &mctx, &zeta, |_| Ok(()))?;
    let n = cfg.surface.n;
    let k = cfg.surface.k;
    let rows = trace.rows();
    let initial_sup = rows[0].sup_u_minus_1;
    let rho_final = trace.final_state().rho();
    let from = 2.0 / k;
    let decay = if initial_sup > 0.0 && rho_final >= 3.0 / k {
        trace.decay_exponent(from).map(|e| Decay { from, exponent: e, nk: n as f64 * k, ratio: e / (n as f64 * k) })
    } else {
        None
    };
    let mono = monotonicity_of(&trace);
    let limit = trace.limit().filter(|_| rho_final >= 4.0 / k).map(|l| LimitReport {
        spread: l.spread,
        converged: l.converged,
        v_min: l.v.iter().copied().fold(f64::INFINITY, f64::min),
        v_max: l.v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    let checks = FlowChecks {
        decay: decay.as_ref().is_none_or(|d| (d.ratio - 1.0).abs() < 0.1),
        monotone: mono.min_derivative >= -1e-8 * mono.derivative_scale
            && mono.min_increment >= -1e-8 * mono.mass_scale,
    };
    let pass = checks.decay && checks.monotone;
    let report = FlowReport {
        schema: schema("flow"),
        n,
        k,
        mode: mode_name(cfg.surface.mode),
        nodes: trace.final_state().leaf().len(),
        steps: trace.steps(),
        rows: rows.len(),
        rho_final,
        zeta: trace.zeta().vector().components().to_vec(),
        initial_sup_u_minus_1: initial_sup,
        final_sup_u_minus_1: trace.final_state().sup_u_minus_1(),
        decay,
        monotonicity: mono,
        limit,
        checks,
        pass,
    };
    Ok(finish("flow", &report, pass, vec![("trace.csv".into(), trace.to_csv())]))
}

#[derive(Serialize)]
struct ContextReport {
    #[serde(rename = "R1")]
    r1: f64,
    #[serde(rename = "R2")]
    r2: f64,
    alpha: f64,
    mu: f64,
}

#[derive(Serialize)]
struct MassRow {
    rho: f64,
    mass: MinkowskiVector<f64>,
    cosh_mass: f64,
    min_pairing: f64,
    max_pairing: f64,
    min_derivative: f64,
    max_b: f64,
    geodesic: Option<GeodesicSlack<f64>>,
}

#[derive(Serialize)]
struct FormulaRow {
    zeta: Vec<f64>,
    tail: f64,
    formula: f64,
    relative_gap: f64,
}

#[derive(Serialize)]
struct MassLimit {
    vector: MinkowskiVector<f64>,
    classification: CausalClass,
    cosh_mass: f64,
    formula: Vec<FormulaRow>,
}

#[derive(Serialize)]
struct MassChecks {
    monotone: bool,
    fd_agreement: bool,
    integrand_sign: bool,
    geodesic: bool,
    /// `None` when some limit pairing is positive, so the sign statement
    /// does not apply.
    initial_sign: Option<bool>,
    limit_causal: Option<bool>,
    limit_formula: Option<bool>,
}

#[derive(Serialize)]
struct MassReport {
    schema: String,
    context: ContextReport,
    directions: usize,
    summary: MonitorSummary<f64>,
    rows: Vec<MassRow>,
    limit: MassLimit,
    checks: MassChecks,
    pass: bool,
}

pub fn mass(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg = run_config(ctx)?;
    let n = cfg.surface.n;
    let k = cfg.surface.k;
    let (trace, mctx, monitor) = monitored_run(&cfg, MonitorOptions::default())?;
    let s = monitor.summary();
    let tol = 1e-8 * s.mass_scale;
    let last = monitor.rows().last().expect("runs record at least one row");
    let class = classify_causal(&last.mass);
    let cosh = trace.rows().last().map_or(f64::NAN, |r| r.cosh_mass);
    let applies = s.max_final_pairing <= tol;

    let mut formula = Vec::new();
    if trace.final_state().rho() >= 4.0 / k {
        for d in null_directions::<f64>(n, 2 * n)? {
            let tail = tail_mass_value(trace.final_state(), d.vector())?;
            let value = limit_mass_formula(&trace, d.vector())?;
            let gap = (tail - value).abs();
            let relative_gap = if gap == 0.0 { 0.0 } else { gap / tail.abs() };
            formula.push(FormulaRow { zeta: d.vector().components().to_vec(), tail, formula: value, relative_gap });
        }
    }
    let geodesic = s.min_geodesic.is_none_or(|g| g.angle >= -1e-6 && g.radial >= -1e-6 && g.combined >= -1e-6);
    let checks = MassChecks {
        monotone: s.min_derivative >= -1e-8 * s.derivative_scale && s.min_increment >= -1e-8 * s.mass_scale,
        fd_agreement: s.fd_mismatch < 0.01,
        integrand_sign: s.max_b <= 1e-10 * s.b_scale,
        geodesic,
        initial_sign: applies.then_some(s.max_initial_pairing <= tol && cosh >= -tol),
        limit_causal: applies.then_some(class == CausalClass::FutureNonspacelike),
        limit_formula: (!formula.is_empty()).then(|| formula.iter().all(|f| f.relative_gap < 0.02)),
    };
    let pass = checks.monotone
        && checks.fd_agreement
        && checks.integrand_sign
        && checks.geodesic
        && checks.initial_sign.unwrap_or(true)
        && checks.limit_causal.unwrap_or(true)
        && checks.limit_formula.unwrap_or(true);
    let rows = monitor
        .rows()
        .iter()
        .zip(trace.rows())
        .map(|(m, t)| MassRow {
            rho: m.rho,
            mass: m.mass.clone(),
            cosh_mass: t.cosh_mass,
            min_pairing: m.pairings.iter().copied().fold(f64::INFINITY, f64::min),
            max_pairing: m.pairings.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_derivative: m.derivatives.iter().copied().fold(f64::INFINITY, f64::min),
            max_b: m.max_b,
            geodesic: m.geodesic,
        })
        .collect();
    let report = MassReport {
        schema: schema("mass"),
        context: ContextReport { r1: mctx.r1, r2: mctx.r2, alpha: mctx.alpha, mu: mctx.mu },
        directions: monitor.directions().len(),
        summary: s,
        rows,
        limit: MassLimit { vector: last.mass.clone(), classification: class, cosh_mass: cosh, formula },
        checks,
        pass,
    };
    Ok(finish("mass", &report, pass, vec![("trace.csv".into(), trace.to_csv())]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Norm {
    #[default]
    L2,
    Linf,
}

fn default_levels() -> usize {
    3
}

fn default_order() -> f64 {
    1.8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryConfig {
    surface: SurfaceConfig,
    /// Number of resolutions, each doubling the grid of the previous one.
    #[serde(default = "default_levels")]
    levels: usize,
    /// `alpha` in `W`; the surface's own value when absent.
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    norm: Norm,
    #[serde(default = "default_order")]
    min_order: f64,
}

#[derive(Serialize)]
struct GeometryLevel {
    n_theta: usize,
    n_phi: usize,
    area: f64,
    min_mean_curvature: f64,
    nonconvex_nodes: usize,
    position_residual: f64,
    w_residual: f64,
}

#[derive(Serialize)]
struct GeometryReport {
    schema: String,
    norm: &'static str,
    alpha: f64,
    levels: Vec<GeometryLevel>,
    position_orders: Vec<f64>,
    w_orders: Vec<f64>,
    pass: bool,
}

fn residual_norm(leaf: &SurfaceLeaf<f64>, r: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::Linf => r.iter().fold(0.0, |m, &x| m.max(x.abs())),
        Norm::L2 => {
            let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
            (leaf.integrate(&sq) / leaf.area()).sqrt()
        }
    }
}

/// Orders `log2(e_i / e_{i+1})`; residuals at rounding level count as exact.
fn orders(e: &[f64]) -> Vec<f64> {
    e.windows(2)
        .map(|w| if w[1] < 1e-13 { f64::INFINITY } else { (w[0] / w[1]).log2() })
        .collect()
}

pub fn geometry_verify(ctx: &Context) -> Result<Outcome, Failure> {
    let cfg: GeometryConfig = parse_text(ctx.require_config()?)?;
    if cfg.levels == 0 || cfg.levels > 6 {
        return Err(Failure::Invalid("levels must lie in 1..=6".into()));
    }
    let base = cfg.surface.to_spec()?;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => compute_context(&build_leaf(&base)?)?.alpha,
    };
    let mut levels = Vec::new();
    for l in 0..cfg.levels {
        let mut surface = cfg.surface.clone();
        surface.grid.n_theta <<= l;
        if surface.mode == Mode::Full {
            surface.grid.n_phi <<= l;
        }
        let spec = surface.to_spec()?;
        let leaf = build_leaf(&spec)?;
        levels.push(GeometryLevel {
            n_theta: spec.grid.n_theta,
            n_phi: spec.grid.n_phi,
            area: leaf.area(),
            min_mean_curvature: leaf.mean_curvature().iter().copied().fold(f64::INFINITY, f64::min),
            nonconvex_nodes: leaf.diagnostics().nonconvex_nodes.len(),
            position_residual: residual_norm(&leaf, &verify_position_laplacian(&leaf), cfg.norm),
            w_residual: residual_norm(&leaf, &verify_w_laplacian(&leaf, alpha), cfg.norm),
        });
    }
    let position_orders = orders(&levels.iter().map(|l| l.position_residual).collect::<Vec<_>>());
    let w_orders = orders(&levels.iter().map(|l| l.w_residual).collect::<Vec<_>>());
    let pass = position_orders.iter().chain(&w_orders).all(|&o| o >= cfg.min_order);
    let report = GeometryReport {
        schema: schema("geometry-verify"),
        norm: match cfg.norm {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        },
        alpha,
        levels,
        position_orders,
        w_orders,
        pass,
    };
    Ok(finish("geometry", &report, pass, Vec::new()))
}
