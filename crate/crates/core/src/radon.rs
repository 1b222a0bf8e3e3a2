//! Radon-type invariants: averages of K/sinθ over invariant circles,
//! boundary symmetry averaging and the closed form on Liouville tables.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::billiard::{billiard_map, PhasePoint, GLANCING_EPS};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, LiouvilleTable};
use crate::numeric::{adaptive_periodic_mean, brent, wrap, wrap_centered, Quadrature, TAU};
use crate::tori::{circle_conjugacy_with, ConjugacyOptions, InvariantCircle};

pub const DEFAULT_NODES: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const NODE_CAP: usize = 1 << 17;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on the boundary, given in arclength and optionally in
/// the Liouville coordinate x (equivalently the curve parameter t).
#[derive(Clone)]
pub struct BoundaryFunction {
    by_s: Option<Eval>,
    by_x: Option<Eval>,
    period: f64,
    smoothness: Option<u32>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("period", &self.period)
            .field("has_s", &self.by_s.is_some())
            .field("has_x", &self.by_x.is_some())
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl BoundaryFunction {
    /// K(s) with K(s + period) = K(s).
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(period: f64, k: F) -> Self {
        BoundaryFunction { by_s: Some(Arc::new(k)), by_x: None, period, smoothness: None }
    }

    /// K known only through the Liouville coordinate x (2π-periodic).
    pub fn in_x<G: Fn(f64) -> f64 + Send + Sync + 'static>(g: G) -> Self {
        BoundaryFunction { by_s: None, by_x: Some(Arc::new(g)), period: TAU, smoothness: None }
    }

    pub fn constant(c: f64) -> Self {
        BoundaryFunction { by_s: Some(Arc::new(move |_| c)), by_x: Some(Arc::new(move |_| c)), period: TAU, smoothness: None }
    }

    /// K given as a 2π-periodic function of the curve parameter.
    pub fn in_param<G: Fn(f64) -> f64 + Send + Sync + 'static>(curve: &BoundaryCurve, g: G) -> Self {
        let g: Eval = Arc::new(g);
        let c = curve.clone();
        let gs = g.clone();
        BoundaryFunction {
            by_s: Some(Arc::new(move |s| gs(c.param_of_arclength(s)))),
            by_x: Some(g),
            period: curve.total_length(),
            smoothness: None,
        }
    }

    pub fn with_smoothness(mut self, l: u32) -> Self {
        self.smoothness = Some(l);
        self
    }

    pub fn smoothness(&self) -> Option<u32> {
        self.smoothness
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// K(s); panics for functions given only in x (see [`has_s`](Self::has_s)).
    pub fn eval(&self, s: f64) -> f64 {
        (self.by_s.as_ref().expect("boundary function has no arclength evaluator"))(s)
    }

    pub fn has_s(&self) -> bool {
        self.by_s.is_some()
    }

    pub fn eval_x(&self, x: f64) -> Option<f64> {
        self.by_x.as_ref().map(|g| g(x))
    }

    pub fn has_x(&self) -> bool {
        self.by_x.is_some()
    }

    pub fn scaled(&self, a: f64) -> BoundaryFunction {
        let by_s = self.by_s.clone().map(|k| Arc::new(move |s| a * k(s)) as Eval);
        let by_x = self.by_x.clone().map(|g| Arc::new(move |x| a * g(x)) as Eval);
        BoundaryFunction { by_s, by_x, period: self.period, smoothness: self.smoothness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Identity,
    /// s ↦ −s
    Flip,
    /// s ↦ L/2 − s
    HalfFlip,
    /// s ↦ s + L/2
    HalfTurn,
}

impl Symmetry {
    pub const ALL: [Symmetry; 4] = [Symmetry::Identity, Symmetry::Flip, Symmetry::HalfFlip, Symmetry::HalfTurn];

    pub fn apply(self, s: f64, period: f64) -> f64 {
        match self {
            Symmetry::Identity => s,
            Symmetry::Flip => -s,
            Symmetry::HalfFlip => 0.5 * period - s,
            Symmetry::HalfTurn => s + 0.5 * period,
        }
    }

    /// Lift to the phase cylinder: reflections reverse ξ.
    pub fn lift(self, p: PhasePoint, period: f64) -> PhasePoint {
        let xi = match self {
            Symmetry::Flip | Symmetry::HalfFlip => -p.xi,
            _ => p.xi,
        };
        PhasePoint { s: wrap(self.apply(p.s, period), period), xi }
    }

    pub fn compose(self, other: Symmetry) -> Symmetry {
        use Symmetry::*;
        match (self, other) {
            (Identity, g) | (g, Identity) => g,
            (a, b) if a == b => Identity,
            (Flip, HalfFlip) | (HalfFlip, Flip) => HalfTurn,
            (Flip, HalfTurn) | (HalfTurn, Flip) => HalfFlip,
            _ => Flip,
        }
    }
}

/// The Klein four-group of a doubly symmetric table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SymmetryGroup;

impl SymmetryGroup {
    pub fn elements(&self) -> [Symmetry; 4] {
        Symmetry::ALL
    }

    pub fn generators(&self) -> [Symmetry; 2] {
        [Symmetry::Flip, Symmetry::HalfFlip]
    }
}

/// K#(s) = ¼ Σ_g K(g s); the x-evaluator is averaged over x ↦ −x, π − x, x + π.
pub fn symmetry_average(k: &BoundaryFunction, group: &SymmetryGroup) -> BoundaryFunction {
    let els = group.elements();
    let period = k.period;
    let by_s = k.by_s.clone().map(|ks| {
        Arc::new(move |s: f64| 0.25 * els.iter().map(|g| ks(g.apply(s, period))).sum::<f64>()) as Eval
    });
    let by_x = k.by_x.clone().map(|g| {
        Arc::new(move |x: f64| 0.25 * els.iter().map(|e| g(e.apply(x, TAU))).sum::<f64>()) as Eval
    });
    BoundaryFunction { by_s, by_x, period, smoothness: k.smoothness }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantValue {
    pub value: f64,
    pub nodes: usize,
    pub est_error: f64,
}

impl From<Quadrature> for InvariantValue {
    fn from(q: Quadrature) -> Self {
        InvariantValue { value: q.value, nodes: q.nodes, est_error: q.change }
    }
}

fn sin_theta_checked(xi: f64) -> Result<f64> {
    let st = (1.0 - xi * xi).max(0.0).sqrt();
    if st < GLANCING_EPS {
        return Err(Error::GlancingCircle { min_sin: st });
    }
    Ok(st)
}

fn circle_average(circle: &InvariantCircle, k: &BoundaryFunction, start: usize, tol: f64, cap: usize) -> Result<InvariantValue> {
    require_s(k)?;
    let min_sin = (0..512)
        .map(|j| (1.0 - circle.xi(TAU * j as f64 / 512.0).powi(2)).max(0.0).sqrt())
        .fold(f64::INFINITY, f64::min);
    if min_sin < GLANCING_EPS {
        return Err(Error::GlancingCircle { min_sin });
    }
    let q = adaptive_periodic_mean(
        |phi| {
            let p = circle.point(phi);
            k.eval(p.s) / (1.0 - p.xi * p.xi).max(0.0).sqrt()
        },
        start,
        tol,
        cap,
    )?;
    Ok(q.into())
}

/// Σ_j ∫_{Λ_j} K(s)/sinθ dμ_j with the probability measures dφ/2π.
pub fn torus_invariant(circles: &[InvariantCircle], k: &BoundaryFunction) -> Result<InvariantValue> {
    torus_invariant_with(circles, k, DEFAULT_NODES, DEFAULT_TOL)
}

pub fn torus_invariant_with(circles: &[InvariantCircle], k: &BoundaryFunction, start: usize, tol: f64) -> Result<InvariantValue> {
    if circles.is_empty() {
        return Err(invalid("at least one circle is required"));
    }
    let mut out = InvariantValue { value: 0.0, nodes: 0, est_error: 0.0 };
    for c in circles {
        let v = circle_average(c, k, start, tol, NODE_CAP)?;
        out.value += v.value;
        out.nodes = out.nodes.max(v.nodes);
        out.est_error += v.est_error;
    }
    Ok(out)
}

/// The same average with dμ replaced by its image under B.
pub fn pushed_torus_invariant(curve: &BoundaryCurve, circle: &InvariantCircle, k: &BoundaryFunction, nodes: usize) -> Result<f64> {
    require_s(k)?;
    let mut total = 0.0;
    for j in 0..nodes {
        let (p, _) = billiard_map(curve, circle.point(TAU * j as f64 / nodes as f64))?;
        total += k.eval(p.s) / sin_theta_checked(p.xi)?;
    }
    Ok(total / nodes as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelBranch {
    /// h ∈ (q(N), 0): a pair of rotational circles ξ ≷ 0.
    Rotational,
    /// h ∈ (0, f(π/2)): two librational circles around the bouncing-ball orbit.
    TwoBounce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvilleRadon {
    pub plus: f64,
    pub minus: f64,
    pub branch: LevelBranch,
    pub nodes: usize,
    pub est_error: f64,
}

pub(crate) fn classify(table: &LiouvilleTable, h: f64) -> Result<LevelBranch> {
    let qn = table.q_boundary();
    let top = table.f(0.5 * std::f64::consts::PI);
    if h > qn && h < 0.0 {
        Ok(LevelBranch::Rotational)
    } else if h > 0.0 && h < top {
        Ok(LevelBranch::TwoBounce)
    } else {
        Err(Error::HOutOfRange { h, lo: qn, hi: top })
    }
}

/// Turning point x1 ∈ (0, π/2) with f(x1) = h.
fn turning_point(table: &LiouvilleTable, h: f64) -> Result<f64> {
    brent(|x| table.f(x) - h, 0.0, 0.5 * std::f64::consts::PI, 1e-15)
}

/// ∫ g(x)/√(f(x) − h) dx over [x1, x2] via x = mid − half·cos u; the
/// result is an even periodic integrand in u, so the midpoint rule converges
/// spectrally.
fn endpoint_integral<G: Fn(f64) -> f64>(table: &LiouvilleTable, g: G, x1: f64, x2: f64, h: f64, tol: f64) -> Result<Quadrature> {
    let mid = 0.5 * (x1 + x2);
    let half = 0.5 * (x2 - x1);
    let rule = |n: usize| {
        let du = std::f64::consts::PI / n as f64;
        (0..n)
            .map(|j| {
                let u = (j as f64 + 0.5) * du;
                let x = mid - half * u.cos();
                let gap = (table.f(x) - h).max(f64::MIN_POSITIVE);
                g(x) * half * u.sin() / gap.sqrt()
            })
            .sum::<f64>()
            * du
    };
    let mut n = DEFAULT_NODES / 2;
    let mut prev = rule(n);
    loop {
        n *= 2;
        if n > NODE_CAP {
            return Err(Error::QuadratureNonConvergence { nodes: n / 2, change: f64::NAN });
        }
        let next = rule(n);
        let change = (next - prev).abs();
        if change <= tol * next.abs().max(1.0) {
            return Ok(Quadrature { value: next, nodes: n, change });
        }
        prev = next;
    }
}

fn require_s(k: &BoundaryFunction) -> Result<()> {
    if k.by_s.is_none() {
        return Err(invalid("boundary function has no arclength evaluator"));
    }
    Ok(())
}

fn require_x(k: &BoundaryFunction) -> Result<&Eval> {
    k.by_x.as_ref().ok_or_else(|| invalid("boundary function has no evaluator in the x-coordinate"))
}

/// Signed Radon values R_K(Λ±(h)) on a Liouville table, with the Leray form
/// dx/√(f − h) and sinθ = √((h − q(N))/(f − q(N))).
pub fn liouville_radon(table: &LiouvilleTable, k: &BoundaryFunction, h: f64) -> Result<LiouvilleRadon> {
    liouville_radon_with(table, k, h, DEFAULT_TOL)
}

pub fn liouville_radon_with(table: &LiouvilleTable, k: &BoundaryFunction, h: f64, tol: f64) -> Result<LiouvilleRadon> {
    let kx = require_x(k)?;
    let branch = classify(table, h)?;
    let qn = table.q_boundary();
    let pref = 1.0 / (h - qn).sqrt();
    match branch {
        LevelBranch::Rotational => {
            let q = adaptive_periodic_mean(
                |x| kx(x) * ((table.f(x) - qn) / (table.f(x) - h)).sqrt(),
                DEFAULT_NODES,
                tol,
                NODE_CAP,
            )?;
            let v = pref * TAU * q.value;
            Ok(LiouvilleRadon { plus: v, minus: -v, branch, nodes: q.nodes, est_error: pref * TAU * q.change })
        }
        LevelBranch::TwoBounce => {
            let x1 = turning_point(table, h)?;
            let x2 = std::f64::consts::PI - x1;
            let g = |x: f64| kx(x) * (table.f(x) - qn).sqrt();
            let j1 = endpoint_integral(table, g, x1, x2, h, tol)?;
            let pi = std::f64::consts::PI;
            let j2 = endpoint_integral(table, g, pi + x1, pi + x2, h, tol)?;
            Ok(LiouvilleRadon {
                plus: 2.0 * pref * j1.value,
                minus: -2.0 * pref * j2.value,
                branch,
                nodes: j1.nodes.max(j2.nodes),
                est_error: 2.0 * pref * (j1.change + j2.change),
            })
        }
    }
}

/// Total Leray mass ∫ dx/√(f − h) of one circle of the level set I = h.
pub fn leray_mass(table: &LiouvilleTable, h: f64) -> Result<f64> {
    match classify(table, h)? {
        LevelBranch::Rotational => {
            let q = adaptive_periodic_mean(|x| 1.0 / (table.f(x) - h).sqrt(), DEFAULT_NODES, DEFAULT_TOL, NODE_CAP)?;
            Ok(TAU * q.value)
        }
        LevelBranch::TwoBounce => {
            let x1 = turning_point(table, h)?;
            let q = endpoint_integral(table, |_| 1.0, x1, std::f64::consts::PI - x1, h, DEFAULT_TOL)?;
            Ok(2.0 * q.value)
        }
    }
}

/// Seed on the rotational circle I = h, ξ > 0, at the major-axis vertex.
pub fn rotational_seed(table: &LiouvilleTable, h: f64) -> Result<PhasePoint> {
    match classify(table, h)? {
        LevelBranch::Rotational => {
            let f0 = table.f(0.0);
            let qn = table.q_boundary();
            Ok(PhasePoint::new(0.0, ((f0 - h) / (f0 - qn)).sqrt()))
        }
        LevelBranch::TwoBounce => Err(Error::HOutOfRange { h, lo: table.q_boundary(), hi: 0.0 }),
    }
}

/// Seed on the librational circle I = h around the minor-axis vertex x = π/2.
pub fn two_bounce_seed(table: &LiouvilleTable, curve: &BoundaryCurve, h: f64) -> Result<PhasePoint> {
    match classify(table, h)? {
        LevelBranch::TwoBounce => {
            let x = 0.5 * std::f64::consts::PI;
            let (fx, qn) = (table.f(x), table.q_boundary());
            Ok(PhasePoint::new(curve.arclength_of_param(x), ((fx - h) / (fx - qn)).sqrt()))
        }
        LevelBranch::Rotational => Err(Error::HOutOfRange { h, lo: 0.0, hi: table.f(0.5 * std::f64::consts::PI) }),
    }
}

fn point_dist(a: PhasePoint, b: PhasePoint, period: f64) -> f64 {
    wrap_centered(a.s - b.s, period).hypot(a.xi - b.xi)
}

/// Distance from p to the closed curve φ ↦ c(φ): dense scan then golden section.
fn dist_to_circle<C: Fn(f64) -> PhasePoint>(p: PhasePoint, c: &C, period: f64) -> f64 {
    const SCAN: usize = 512;
    let d = |phi: f64| point_dist(p, c(phi), period);
    let step = TAU / SCAN as f64;
    let (mut best, mut best_phi) = (f64::INFINITY, 0.0);
    for j in 0..SCAN {
        let phi = step * j as f64;
        let v = d(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (d(x1), d(x2));
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = d(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = d(x2);
        }
    }
    best.min(f1).min(f2)
}

/// Hausdorff distance between two sampled closed curves in the phase cylinder.
pub fn hausdorff_distance<A, B>(a: &A, b: &B, period: f64, samples: usize) -> f64
where
    A: Fn(f64) -> PhasePoint,
    B: Fn(f64) -> PhasePoint,
{
    let one = |x: &dyn Fn(f64) -> PhasePoint, y: &dyn Fn(f64) -> PhasePoint| {
        (0..samples)
            .map(|j| dist_to_circle(x(TAU * j as f64 / samples as f64), &y, period))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BouncingBallReport {
    pub residual: f64,
    pub symmetric_side: f64,
    pub half_sum: f64,
    pub exchange: Symmetry,
    pub hausdorff: f64,
}

/// Compare ∫_{Λ¹} K#/sinθ dμ₁ with ½(∫_{Λ¹} K/sinθ dμ₁ + ∫_{Λ²} K/sinθ dμ₂).
pub fn bouncing_ball_identity_check(
    curve: &BoundaryCurve,
    lambda1: &InvariantCircle,
    lambda2: &InvariantCircle,
    k: &BoundaryFunction,
    group: &SymmetryGroup,
    tol: f64,
) -> Result<BouncingBallReport> {
    let period = curve.total_length();
    let mut best: Option<(Symmetry, f64)> = None;
    for g in group.elements().into_iter().filter(|g| *g != Symmetry::Identity) {
        let image = |phi: f64| g.lift(lambda1.point(phi), period);
        let d = hausdorff_distance(&image, &|phi| lambda2.point(phi), period, 128);
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((g, d));
        }
    }
    let (exchange, hausdorff) = best.expect("group has non-identity elements");
    if hausdorff > tol {
        return Err(Error::NotExchanged { hausdorff });
    }
    let ksharp = symmetry_average(k, group);
    let lhs = circle_average(lambda1, &ksharp, DEFAULT_NODES, DEFAULT_TOL, NODE_CAP)?.value;
    let r1 = circle_average(lambda1, k, DEFAULT_NODES, DEFAULT_TOL, NODE_CAP)?.value;
    let r2 = circle_average(lambda2, k, DEFAULT_NODES, DEFAULT_TOL, NODE_CAP)?.value;
    let half_sum = 0.5 * (r1 + r2);
    Ok(BouncingBallReport { residual: (lhs - half_sum).abs(), symmetric_side: lhs, half_sum, exchange, hausdorff })
}

/// The pair of B²-invariant circles through `seed` and B(seed).
pub fn two_bounce_pair(curve: &BoundaryCurve, seed: PhasePoint, n_modes: usize) -> Result<(InvariantCircle, InvariantCircle)> {
    let opts = ConjugacyOptions { n_modes, period: 2, ..Default::default() };
    let l1 = circle_conjugacy_with(curve, seed, &opts)?;
    let (image, _) = billiard_map(curve, seed)?;
    let l2 = circle_conjugacy_with(curve, image, &opts)?;
    Ok((l1, l2))
}
