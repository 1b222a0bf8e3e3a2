//! Command dispatch behind the `isospec` binary. Each command runs one module
//! workflow from a [`RunConfig`] and yields a table plus a JSON report.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::billiard::{flowout_integral, orbit, PhasePoint};
use crate::error::{invalid, Error, Result};
use crate::geometry::{liouville_validate, BoundaryCurve, Domain, DomainSpec, LiouvilleTable};
use crate::output::{Cell, Table};
use crate::quasi::{evaluate_mu, find_indices, p00_from_radon, solve_recursion, BirkhoffData};
use crate::radon::{liouville_radon_with, torus_invariant_with, BoundaryFunction, DEFAULT_TOL};
use crate::rigidity::{invert_radon, radon_matrix, rotation_profile, rotational_h_grid, two_bounce_h_grid};
use crate::spectra::{build_clusters, trap_constancy, verify_h1, verify_h2, weyl_fit, QuasiPath, Spectrum, TrapOptions};
use crate::tori::{
    action_data_with, circle_conjugacy_with, diophantine_kappa, disk_circle, ActionOptions, ConjugacyOptions,
    InvariantCircle,
};
use crate::wiener::{apply_lomega, random_trig_polynomial, solve_homological, derivative_sup_bound_check, TorusFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Map,
    Circle,
    Radon,
    Potential,
    Homological,
    Quasimode,
    Cluster,
    Rigidity,
    ValidateLiouville,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Map => "map",
            Command::Circle => "circle",
            Command::Radon => "radon",
            Command::Potential => "potential",
            Command::Homological => "homological",
            Command::Quasimode => "quasimode",
            Command::Cluster => "cluster",
            Command::Rigidity => "rigidity",
            Command::ValidateLiouville => "validate-liouville",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Command-specific parameters; parsed strictly by the command.
    #[serde(default)]
    pub params: Value,
    /// Directory that relative paths in `params` are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("tol must be positive"));
            }
        }
        if self.nodes == Some(0) {
            return Err(invalid("nodes must be positive"));
        }
        Ok(())
    }

    fn params<T: DeserializeOwned>(&self) -> Result<T> {
        let v = if self.params.is_null() { json!({}) } else { self.params.clone() };
        serde_json::from_value(v).map_err(|e| Error::Parse(format!("params: {e}")))
    }

    fn domain(&self) -> Result<Domain> {
        self.domain.as_ref().ok_or_else(|| invalid("this command needs a domain"))?.build()
    }

    fn liouville(&self) -> Result<(Domain, LiouvilleTable)> {
        let d = self.domain()?;
        let t = d.liouville.clone().ok_or_else(|| invalid("this command needs a liouville domain"))?;
        Ok((d, t))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub table: Table,
    pub report: Value,
}

impl Artifacts {
    pub fn to_json(&self, command: Command) -> Result<String> {
        let v = json!({
            "command": command.name(),
            "columns": self.table.columns,
            "rows": self.table.rows,
            "report": self.report,
        });
        serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    match command {
        Command::Map => run_map(cfg),
        Command::Circle => run_circle(cfg),
        Command::Radon => run_radon(cfg),
        Command::Potential => run_potential(cfg),
        Command::Homological => run_homological(cfg),
        Command::Quasimode => run_quasimode(cfg),
        Command::Cluster => run_cluster(cfg),
        Command::Rigidity => run_rigidity(cfg),
        Command::ValidateLiouville => run_validate(cfg),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// a_n cos(nt) + b_n sin(nt) in the curve parameter t.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub n: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

fn unit_k() -> Vec<TrigTerm> {
    vec![TrigTerm { n: 0, cos: 1.0, sin: 0.0 }]
}

fn boundary_function(curve: &BoundaryCurve, terms: &[TrigTerm]) -> BoundaryFunction {
    let terms = terms.to_vec();
    BoundaryFunction::in_param(curve, move |t| {
        terms.iter().map(|c| {
            let (s, co) = (c.n as f64 * t).sin_cos();
            c.cos * co + c.sin * s
        }).sum()
    })
}

/// coef · x^px · y^py
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    #[serde(default)]
    pub px: u32,
    #[serde(default)]
    pub py: u32,
    pub coef: f64,
}

fn unit_v() -> Vec<Monomial> {
    vec![Monomial { px: 0, py: 0, coef: 1.0 }]
}

fn default_modes() -> usize {
    64
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

/// Circle through (s, ξ) of B^period: closed form on disks, Fourier fit otherwise.
fn make_circle(curve: &BoundaryCurve, s: f64, xi: f64, n_modes: usize, period: usize, tol: Option<f64>) -> Result<InvariantCircle> {
    if curve.is_circle() && period == 1 {
        return disk_circle(curve, xi);
    }
    let opts = ConjugacyOptions { n_modes, period, tol: tol.unwrap_or(1e-8), ..Default::default() };
    circle_conjugacy_with(curve, PhasePoint::new(s, xi), &opts)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapParams {
    #[serde(default)]
    s: f64,
    xi: f64,
    m: usize,
}

fn run_map(cfg: &RunConfig) -> Result<Artifacts> {
    let p: MapParams = cfg.params()?;
    let curve = cfg.domain()?.curve;
    let chords = orbit(&curve, PhasePoint::new(p.s, p.xi), p.m)?;
    let mut table = Table::new(["bounce_index", "s", "xi", "chord_length", "x", "y"]);
    for (j, c) in chords.iter().enumerate() {
        let q = curve.position(c.source.s);
        table.push(vec![j.into(), c.source.s.into(), c.source.xi.into(), c.length.into(), q.x.into(), q.y.into()]);
    }
    let last = chords.last().map(|c| c.target);
    Ok(Artifacts { table, report: json!({ "bounces": p.m, "total_length": curve.total_length(), "final": last }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleParams {
    #[serde(default)]
    s: f64,
    xi: f64,
    #[serde(default = "default_modes")]
    n_modes: usize,
    #[serde(default = "one")]
    period: usize,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "one_f")]
    tau: f64,
    #[serde(default = "default_kmax")]
    k_max: u32,
    #[serde(default = "yes")]
    hessian: bool,
}

fn default_samples() -> usize {
    256
}

fn default_kmax() -> u32 {
    50
}

fn yes() -> bool {
    true
}

fn run_circle(cfg: &RunConfig) -> Result<Artifacts> {
    let p: CircleParams = cfg.params()?;
    let curve = cfg.domain()?.curve;
    let circle = make_circle(&curve, p.s, p.xi, p.n_modes, p.period, cfg.tol)?;
    let action = action_data_with(&curve, &circle, &ActionOptions { nodes: cfg.nodes.unwrap_or(1024), hessian: p.hessian })?;
    let witness = diophantine_kappa(&[circle.omega], p.tau, p.k_max)?;
    let mut table = Table::new(["phi", "s", "xi", "chord_length"]);
    for row in circle.dump(&curve, p.samples)? {
        table.push(row.iter().map(|&v| v.into()).collect());
    }
    Ok(Artifacts { table, report: json!({ "circle": circle, "action": action, "witness": witness }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadonParams {
    #[serde(default)]
    xi: Option<Vec<f64>>,
    #[serde(default)]
    h: Option<Vec<f64>>,
    #[serde(default)]
    s: f64,
    #[serde(default = "unit_k")]
    k: Vec<TrigTerm>,
    #[serde(default = "default_modes")]
    n_modes: usize,
    #[serde(default = "one")]
    period: usize,
}

fn run_radon(cfg: &RunConfig) -> Result<Artifacts> {
    let p: RadonParams = cfg.params()?;
    let domain = cfg.domain()?;
    let k = boundary_function(&domain.curve, &p.k);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let mut table = Table::new(["h_or_omega", "invariant_value", "quadrature_nodes", "est_error"]);
    let mut details = Vec::new();
    match (&p.xi, &p.h) {
        (Some(xis), None) => {
            for &xi in xis {
                let c = make_circle(&domain.curve, p.s, xi, p.n_modes, p.period, cfg.tol)?;
                let v = torus_invariant_with(std::slice::from_ref(&c), &k, cfg.nodes.unwrap_or(64), tol)?;
                table.push(vec![c.omega.into(), v.value.into(), v.nodes.into(), v.est_error.into()]);
                details.push(json!({ "xi": xi, "rho": c.rho(), "residual": c.residual }));
            }
        }
        (None, Some(hs)) => {
            let table_l = domain.liouville.as_ref().ok_or_else(|| invalid("h levels need a liouville domain"))?;
            for &h in hs {
                let r = liouville_radon_with(table_l, &k, h, tol)?;
                table.push(vec![h.into(), r.plus.into(), r.nodes.into(), r.est_error.into()]);
                details.push(to_value(&r));
            }
        }
        _ => return Err(invalid("give exactly one of params.xi or params.h")),
    }
    Ok(Artifacts { table, report: json!({ "entries": details }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialParams {
    #[serde(default)]
    s: f64,
    xi: f64,
    #[serde(default = "default_modes")]
    n_modes: usize,
    #[serde(default = "one")]
    period: usize,
    #[serde(default = "unit_v")]
    v: Vec<Monomial>,
}

fn run_potential(cfg: &RunConfig) -> Result<Artifacts> {
    let p: PotentialParams = cfg.params()?;
    let curve = cfg.domain()?.curve;
    let circle = make_circle(&curve, p.s, p.xi, p.n_modes, p.period, cfg.tol)?;
    let v = p.v.clone();
    let f = move |x: f64, y: f64| v.iter().map(|m| m.coef * x.powi(m.px as i32) * y.powi(m.py as i32)).sum::<f64>();
    let r = flowout_integral(&curve, &circle, f, cfg.nodes.unwrap_or(256))?;
    let mut table = Table::new(["omega", "value", "volume", "coefficient", "quadrature_nodes", "est_error"]);
    table.push(vec![circle.omega.into(), r.value.into(), r.volume.into(), r.coefficient.into(), r.nodes.into(), r.est_error.into()]);
    Ok(Artifacts { table, report: json!({ "flowout": r, "rho": circle.rho() }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomSpec {
    degree: i64,
    terms: usize,
    #[serde(default = "yes")]
    real: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HomologicalParams {
    omega: Vec<f64>,
    #[serde(default = "one_f")]
    tau: f64,
    #[serde(default = "two_f")]
    s: f64,
    #[serde(default)]
    k_max: Option<u32>,
    #[serde(default)]
    coefficients: Option<PathBuf>,
    #[serde(default)]
    random: Option<RandomSpec>,
    #[serde(default)]
    sup_check: Option<u32>,
}

fn two_f() -> f64 {
    2.0
}

fn run_homological(cfg: &RunConfig) -> Result<Artifacts> {
    let p: HomologicalParams = cfg.params()?;
    let dim = p.omega.len();
    let f = match (&p.coefficients, &p.random) {
        (Some(path), None) => {
            let path = cfg.resolve(path);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            TorusFunction::parse_coefficient_lines(&text)?
        }
        (None, Some(r)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_trig_polynomial(&mut rng, dim, r.degree, r.terms, r.real)
        }
        _ => return Err(invalid("give exactly one of params.coefficients or params.random")),
    };
    let k_max = p.k_max.unwrap_or(f.max_degree().max(1) as u32);
    let witness = diophantine_kappa(&p.omega, p.tau, k_max)?;
    let sol = solve_homological(&f, &p.omega, witness.kappa_hat, p.tau)?;
    let back = apply_lomega(&sol.u, &p.omega);
    let roundtrip = f.terms().map(|(k, c)| (back.coeff(k) - c).norm()).fold(0.0, f64::max);
    let bound = sol.bound(&f, p.s);
    let sup = p.sup_check.map(|s| derivative_sup_bound_check(&sol.u, s));
    let mut table = Table::new((1..=dim).map(|i| format!("k_{i}")).chain(["re".into(), "im".into()]));
    for (k, c) in sol.u.terms() {
        let mut row: Vec<Cell> = k.iter().map(|&v| v.into()).collect();
        row.push(c.re.into());
        row.push(c.im.into());
        table.push(row);
    }
    Ok(Artifacts {
        table,
        report: json!({ "witness": witness, "bound": bound, "roundtrip_error": roundtrip, "sup_check": sup, "terms": f.len() }),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuasimodeParams {
    #[serde(default)]
    birkhoff: Option<BirkhoffData>,
    #[serde(default)]
    theta: Option<f64>,
    #[serde(default)]
    xi: Option<f64>,
    #[serde(default)]
    s: f64,
    #[serde(default = "default_modes")]
    n_modes: usize,
    d_n: f64,
    k_min: i64,
    k_max: i64,
    #[serde(default = "two")]
    order: usize,
    #[serde(default)]
    radon: Option<f64>,
    #[serde(default)]
    radon_c: f64,
    #[serde(default)]
    maslov: Option<(i64, i64)>,
}

fn two() -> usize {
    2
}

fn run_quasimode(cfg: &RunConfig) -> Result<Artifacts> {
    let p: QuasimodeParams = cfg.params()?;
    let mut data = match (p.birkhoff.clone(), p.theta, p.xi) {
        (Some(b), None, None) => b,
        (None, Some(theta), None) => BirkhoffData::disk(theta)?,
        (None, None, Some(xi)) => {
            let curve = cfg.domain()?.curve;
            let circle = make_circle(&curve, p.s, xi, p.n_modes, 1, cfg.tol)?;
            let action = action_data_with(&curve, &circle, &ActionOptions { nodes: cfg.nodes.unwrap_or(1024), hessian: true })?;
            BirkhoffData::from_action(&action)?
        }
        _ => return Err(invalid("give exactly one of params.birkhoff, params.theta or params.xi")),
    };
    if let Some((t0, t)) = p.maslov {
        data = data.with_maslov(t0, t);
    }
    if let Some(r) = p.radon {
        data = data.with_p(0, 0, p00_from_radon(r, p.radon_c));
    }
    let idx = find_indices(&data, p.d_n, p.k_min..=p.k_max)?;
    let mut table = Table::new(["k", "k_n", "mu0", "c0", "c1", "c2", "mu", "mu_squared"]);
    let mut rows = Vec::new();
    for e in &idx.entries {
        let qe = solve_recursion(&data, (e.k, e.k_n), e.mu0, p.order)?;
        let (mu, mu2) = evaluate_mu(&qe, &[]);
        let c = |j: usize| Cell::from(qe.c.get(j).copied());
        table.push(vec![qe.k.into(), qe.k_n.into(), qe.mu0.into(), c(0), c(1), c(2), mu.into(), mu2.into()]);
        rows.push(qe);
    }
    Ok(Artifacts { table, report: json!({ "data": data, "indices": idx, "quasi_eigenvalues": rows }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrapParams {
    s: u32,
    order: usize,
    #[serde(default)]
    lipschitz: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterParams {
    #[serde(default)]
    spectrum: Option<PathBuf>,
    #[serde(default)]
    eigenvalues: Option<Vec<f64>>,
    #[serde(default = "two")]
    dim: usize,
    #[serde(default = "one_f")]
    c: f64,
    d: f64,
    alpha: f64,
    #[serde(default = "two_u32")]
    s: u32,
    /// Further spectra of the family, checked against the clusters.
    #[serde(default)]
    family: Vec<PathBuf>,
    #[serde(default)]
    h2_a: Option<f64>,
    #[serde(default)]
    paths: Vec<QuasiPath>,
    #[serde(default)]
    trap: Option<TrapParams>,
    #[serde(default = "yes")]
    weyl: bool,
}

fn two_u32() -> u32 {
    2
}

fn run_cluster(cfg: &RunConfig) -> Result<Artifacts> {
    let p: ClusterParams = cfg.params()?;
    let spec = match (&p.spectrum, &p.eigenvalues) {
        (Some(path), None) => Spectrum::from_file(&cfg.resolve(path), p.dim)?,
        (None, Some(v)) => Spectrum::new(v.clone(), p.dim)?,
        _ => return Err(invalid("give exactly one of params.spectrum or params.eigenvalues")),
    };
    let set = build_clusters(&spec, p.c, p.d, p.alpha)?;
    let h1 = verify_h1(&set, p.s);
    let family = p.family.iter().map(|f| Spectrum::from_file(&cfg.resolve(f), p.dim)).collect::<Result<Vec<_>>>()?;
    let h2 = (!family.is_empty()).then(|| verify_h2(&family, &set, p.h2_a.unwrap_or(p.alpha)));
    let weyl = if p.weyl && spec.len() >= 50 { Some(weyl_fit(&spec)?) } else { None };
    let trap = match (&p.trap, p.paths.is_empty()) {
        (Some(t), false) => Some(trap_constancy(&p.paths, &set, &TrapOptions { s: t.s, order: t.order, lipschitz: t.lipschitz })?),
        (None, true) => None,
        _ => return Err(invalid("params.paths and params.trap go together")),
    };
    let mut table = Table::new(["k", "a_k", "b_k", "gap_margin", "length"]);
    for (k, iv) in set.intervals.iter().enumerate() {
        let margin = set.intervals.get(k + 1).map(|next| next.a - iv.b - set.c * iv.b.powf(-set.d));
        table.push(vec![k.into(), iv.a.into(), iv.b.into(), margin.into(), iv.length().into()]);
    }
    Ok(Artifacts { table, report: json!({ "h1": h1, "h2": h2, "weyl": weyl, "trap": trap }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RigidityParams {
    #[serde(default = "twenty")]
    j: usize,
    /// Matrix levels; defaults to n_h two-bounce levels over (lo, hi)·max f.
    #[serde(default)]
    h: Option<Vec<f64>>,
    #[serde(default = "twenty")]
    n_h: usize,
    #[serde(default = "default_lo")]
    lo: f64,
    #[serde(default = "default_hi")]
    hi: f64,
    /// Coefficients of Σ a_j cos(2jx); the data are their forward image.
    #[serde(default)]
    coefficients: Option<Vec<f64>>,
    #[serde(default)]
    data: Option<Vec<f64>>,
    #[serde(default = "default_reg")]
    reg: f64,
    #[serde(default = "yes")]
    profile: bool,
    /// Rotational levels of the profile; defaults to profile_n levels over
    /// q(N) + (profile_lo, profile_hi)·|q(N)|.
    #[serde(default)]
    profile_h: Option<Vec<f64>>,
    #[serde(default = "twenty")]
    profile_n: usize,
    #[serde(default = "default_profile_lo")]
    profile_lo: f64,
    #[serde(default = "default_profile_hi")]
    profile_hi: f64,
    #[serde(default = "default_orbit")]
    orbit_len: usize,
}

fn twenty() -> usize {
    20
}

fn default_lo() -> f64 {
    0.02
}

fn default_hi() -> f64 {
    0.98
}

fn default_profile_lo() -> f64 {
    0.01
}

fn default_profile_hi() -> f64 {
    0.2
}

fn default_reg() -> f64 {
    1e-10
}

fn default_orbit() -> usize {
    2000
}

fn run_rigidity(cfg: &RunConfig) -> Result<Artifacts> {
    let p: RigidityParams = cfg.params()?;
    let (_, table_l) = cfg.liouville()?;
    let grid = p.h.clone().unwrap_or_else(|| two_bounce_h_grid(&table_l, p.n_h, p.lo, p.hi));
    let m = radon_matrix(&table_l, &grid, p.j)?;
    let data = match (&p.coefficients, &p.data) {
        (Some(c), None) => Some(m.apply(c)?),
        (None, Some(d)) => Some(d.clone()),
        (None, None) => None,
        _ => return Err(invalid("give at most one of params.coefficients or params.data")),
    };
    let reconstruction = data.as_ref().map(|d| invert_radon(&m, d, p.reg)).transpose()?;
    let relative_error = match (&p.coefficients, &reconstruction) {
        (Some(c), Some(r)) => {
            let num: f64 = c.iter().zip(&r.coefficients).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = c.iter().map(|a| a * a).sum::<f64>().sqrt();
            Some(if den > 0.0 { num / den } else { num })
        }
        _ => None,
    };
    let profile = if p.profile {
        let ph = p.profile_h.clone().unwrap_or_else(|| rotational_h_grid(&table_l, p.profile_n, p.profile_lo, p.profile_hi));
        Some(rotation_profile(&table_l, &ph, p.orbit_len)?)
    } else {
        None
    };
    let mut table = Table::new(std::iter::once("h".to_string()).chain(m.basis.iter().map(|f| format!("cos{f}x"))));
    for (i, h) in grid.iter().enumerate() {
        table.push(std::iter::once(Cell::from(*h)).chain(m.entries.row(i).iter().map(|&v| v.into())).collect());
    }
    Ok(Artifacts {
        table,
        report: json!({
            "singular_values": m.singular_values,
            "sigma_min": m.sigma_min(),
            "reconstruction": reconstruction,
            "relative_error": relative_error,
            "rotation_profile": profile,
            "surrogate": "finite h-grid and finite cosine basis",
        }),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateParams {
    #[serde(default = "four")]
    k_check: usize,
}

fn four() -> usize {
    4
}

fn run_validate(cfg: &RunConfig) -> Result<Artifacts> {
    let p: ValidateParams = cfg.params()?;
    let (_, table_l) = cfg.liouville()?;
    let report = liouville_validate(&table_l, p.k_check);
    let mut table = Table::new(["condition", "passed", "first_violated_order", "detail"]);
    for c in &report.conditions {
        let order = c.first_violated_order.map_or(Cell::Empty, Cell::from);
        table.push(vec![c.name.as_str().into(), c.passed.into(), order, c.detail.as_str().into()]);
    }
    Ok(Artifacts { table, report: to_value(&report) })
}
