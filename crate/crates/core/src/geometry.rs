//! Billiard-table boundaries: circles, ellipses, radial Fourier curves and
//! two-dimensional Liouville tables.
//!
//! Every curve is parametrized internally by a polar-type angle `t`; the public
//! interface is in arclength `s ∈ [0, L)`. Arclength is obtained from the
//! Fourier series of the speed `|γ'(t)|`, and `t(s)` from a monotone cubic guess
//! polished by Newton's method.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{wrap, MonotoneCubic, TAU};

pub type Point = Vector2<f64>;

const SPEED_SAMPLES: usize = 4096;
const INVERSE_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    /// r(t) = c[0] + Σ c[2k-1] cos kt + c[2k] sin kt
    Fourier { coeffs: Vec<f64> },
}

/// Position with its first two derivatives in the curve parameter.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamJet {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
}

/// Local geometry at an arclength position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub position: Point,
    pub tangent: Point,
    pub inward_normal: Point,
    pub curvature: f64,
}

/// Closed, convex, arclength-parametrized planar curve.
#[derive(Clone)]
pub struct BoundaryCurve {
    shape: Shape,
    total_length: f64,
    /// L / 2π, the mean of the speed.
    speed_mean: f64,
    /// Fourier coefficients of the speed, k = 1..=K.
    speed_cos: Vec<f64>,
    speed_sin: Vec<f64>,
    inverse: Option<MonotoneCubic>,
}

impl fmt::Debug for BoundaryCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryCurve")
            .field("shape", &self.shape)
            .field("total_length", &self.total_length)
            .field("speed_modes", &self.speed_cos.len())
            .finish()
    }
}

pub fn make_circle(r: f64) -> Result<BoundaryCurve> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("circle radius must be positive, got {r}")));
    }
    Ok(BoundaryCurve {
        shape: Shape::Circle { r },
        total_length: TAU * r,
        speed_mean: r,
        speed_cos: Vec::new(),
        speed_sin: Vec::new(),
        inverse: None,
    })
}

/// Ellipse x²/a² + y²/b² = 1 starting at (a, 0), counterclockwise.
pub fn make_ellipse(a: f64, b: f64) -> Result<BoundaryCurve> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("ellipse axes must be positive, got a={a}, b={b}")));
    }
    if a < b {
        return Err(invalid(format!("ellipse requires a >= b, got a={a}, b={b}")));
    }
    if a == b {
        return make_circle(a);
    }
    BoundaryCurve::from_shape(Shape::Ellipse { a, b })
}

/// Star-shaped convex curve with radial function
/// r(t) = c0 + Σ_k (a_k cos kt + b_k sin kt), `coeffs = [c0, a1, b1, a2, b2, ...]`.
pub fn make_fourier(coeffs: &[f64]) -> Result<BoundaryCurve> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("fourier curve needs finite coefficients"));
    }
    if coeffs.len() == 1 || coeffs[1..].iter().all(|c| *c == 0.0) {
        return make_circle(coeffs[0]);
    }
    let mut coeffs = coeffs.to_vec();
    if coeffs.len() % 2 == 0 {
        coeffs.push(0.0);
    }
    let shape = Shape::Fourier { coeffs };
    for j in 0..2048 {
        let t = TAU * j as f64 / 2048.0;
        let jet = shape.jet(t);
        if jet.p.norm() <= 0.0 || shape.radius(t) <= 0.0 {
            return Err(invalid("fourier curve radius must stay positive"));
        }
        if cross(jet.d1, jet.d2) <= 0.0 {
            return Err(invalid(format!("fourier curve is not strictly convex near t = {t:.4}")));
        }
    }
    BoundaryCurve::from_shape(shape)
}

fn cross(u: Point, v: Point) -> f64 {
    u.x * v.y - u.y * v.x
}

impl Shape {
    fn radius(&self, t: f64) -> f64 {
        match self {
            Shape::Circle { r } => *r,
            Shape::Ellipse { a, b } => (a * a * t.cos().powi(2) + b * b * t.sin().powi(2)).sqrt(),
            Shape::Fourier { coeffs } => fourier_radius(coeffs, t, 0),
        }
    }

    fn jet(&self, t: f64) -> ParamJet {
        let (s, c) = t.sin_cos();
        match self {
            Shape::Circle { r } => ParamJet {
                p: Point::new(r * c, r * s),
                d1: Point::new(-r * s, r * c),
                d2: Point::new(-r * c, -r * s),
            },
            Shape::Ellipse { a, b } => ParamJet {
                p: Point::new(a * c, b * s),
                d1: Point::new(-a * s, b * c),
                d2: Point::new(-a * c, -b * s),
            },
            Shape::Fourier { coeffs } => {
                let r0 = fourier_radius(coeffs, t, 0);
                let r1 = fourier_radius(coeffs, t, 1);
                let r2 = fourier_radius(coeffs, t, 2);
                let e = Point::new(c, s);
                let en = Point::new(-s, c);
                ParamJet { p: e * r0, d1: e * r1 + en * r0, d2: e * (r2 - r0) + en * (2.0 * r1) }
            }
        }
    }
}

fn fourier_radius(coeffs: &[f64], t: f64, order: u32) -> f64 {
    let mut v = if order == 0 { coeffs[0] } else { 0.0 };
    for (k, pair) in coeffs[1..].chunks(2).enumerate() {
        let k = (k + 1) as f64;
        let phase = k * t + order as f64 * PI / 2.0;
        let w = k.powi(order as i32);
        v += w * (pair[0] * phase.cos() + pair.get(1).copied().unwrap_or(0.0) * phase.sin());
    }
    v
}

impl BoundaryCurve {
    fn from_shape(shape: Shape) -> Result<Self> {
        let mut n = SPEED_SAMPLES;
        loop {
            let speed: Vec<f64> = (0..n).map(|j| shape.jet(TAU * j as f64 / n as f64).d1.norm()).collect();
            let mean = speed.iter().sum::<f64>() / n as f64;
            let (cos_table, sin_table): (Vec<f64>, Vec<f64>) =
                (0..n).map(|j| (TAU * j as f64 / n as f64).sin_cos()).map(|(s, c)| (c, s)).unzip();
            let kmax = n / 2 - 1;
            let mut ac = Vec::with_capacity(kmax);
            let mut bs = Vec::with_capacity(kmax);
            let mut last = 0;
            for k in 1..=kmax {
                let (mut sa, mut sb) = (0.0, 0.0);
                for (j, v) in speed.iter().enumerate() {
                    let idx = (k * j) % n;
                    sa += v * cos_table[idx];
                    sb += v * sin_table[idx];
                }
                let (a, b) = (2.0 * sa / n as f64, 2.0 * sb / n as f64);
                if a.abs().max(b.abs()) > 1e-16 * mean {
                    last = k;
                }
                ac.push(a);
                bs.push(b);
                // geometric decay: stop once a long run of negligible modes is seen
                if k > last + 64 {
                    break;
                }
            }
            if last + 64 >= kmax {
                if n >= 1 << 16 {
                    return Err(Error::Unsupported("curve not resolved by its Fourier samples".into()));
                }
                n *= 4;
                continue;
            }
            ac.truncate(last);
            bs.truncate(last);
            let mut curve = BoundaryCurve {
                shape,
                total_length: TAU * mean,
                speed_mean: mean,
                speed_cos: ac,
                speed_sin: bs,
                inverse: None,
            };
            let m = INVERSE_GRID;
            let ts: Vec<f64> = (0..=m).map(|j| TAU * j as f64 / m as f64).collect();
            let ss: Vec<f64> = ts.iter().map(|&t| curve.arclength_unwrapped(t)).collect();
            curve.inverse = Some(MonotoneCubic::new(ss, ts));
            return Ok(curve);
        }
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Semi-axes when the curve is an ellipse (a circle reports a = b = r).
    pub fn ellipse_axes(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Circle { r } => Some((r, r)),
            Shape::Ellipse { a, b } => Some((a, b)),
            Shape::Fourier { .. } => None,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.shape, Shape::Circle { .. })
    }

    pub(crate) fn jet(&self, t: f64) -> ParamJet {
        self.shape.jet(t)
    }

    /// Speed |γ'(t)| of the angle parametrization.
    pub fn speed(&self, t: f64) -> f64 {
        self.shape.jet(t).d1.norm()
    }

    /// Arclength from t = 0 to t, continuous in t (S(t + 2π) = S(t) + L).
    pub fn arclength_unwrapped(&self, t: f64) -> f64 {
        if let Shape::Circle { r } = self.shape {
            return r * t;
        }
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0, 1.0);
        let mut v = self.speed_mean * t;
        for (k, (a, b)) in self.speed_cos.iter().zip(&self.speed_sin).enumerate() {
            let next_s = sk * c1 + ck * s1;
            let next_c = ck * c1 - sk * s1;
            sk = next_s;
            ck = next_c;
            let kf = (k + 1) as f64;
            v += (a * sk + b * (1.0 - ck)) / kf;
        }
        v
    }

    /// Arclength coordinate in [0, L) of parameter t.
    pub fn arclength_of_param(&self, t: f64) -> f64 {
        wrap(self.arclength_unwrapped(t), self.total_length)
    }

    /// Parameter t ∈ [0, 2π) of arclength s (reduced mod L).
    pub fn param_of_arclength(&self, s: f64) -> f64 {
        let s = wrap(s, self.total_length);
        if let Shape::Circle { r } = self.shape {
            return s / r;
        }
        let inverse = self.inverse.as_ref().expect("non-circle curves carry an inverse table");
        let mut t = inverse.eval(s);
        for _ in 0..30 {
            let dt = (self.arclength_unwrapped(t) - s) / self.speed(t);
            t -= dt;
            if dt.abs() <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    pub(crate) fn frame_at_param(&self, t: f64) -> Frame {
        let jet = self.shape.jet(t);
        let speed = jet.d1.norm();
        let tangent = jet.d1 / speed;
        Frame {
            position: jet.p,
            tangent,
            inward_normal: Point::new(-tangent.y, tangent.x),
            curvature: cross(jet.d1, jet.d2) / speed.powi(3),
        }
    }

    pub fn frame(&self, s: f64) -> Frame {
        if let Shape::Circle { r } = self.shape {
            let t = wrap(s, self.total_length) / r;
            let (sn, cs) = t.sin_cos();
            return Frame {
                position: Point::new(r * cs, r * sn),
                tangent: Point::new(-sn, cs),
                inward_normal: Point::new(-cs, -sn),
                curvature: 1.0 / r,
            };
        }
        self.frame_at_param(self.param_of_arclength(s))
    }

    pub fn position(&self, s: f64) -> Point {
        self.frame(s).position
    }

    pub fn tangent(&self, s: f64) -> Point {
        self.frame(s).tangent
    }

    pub fn inward_normal(&self, s: f64) -> Point {
        self.frame(s).inward_normal
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.frame(s).curvature
    }

    /// A conserved quantity of the billiard map when one is known in closed
    /// form: ξ on the disk and the confocal integral on the ellipse.
    pub fn first_integral(&self, s: f64, xi: f64) -> Option<f64> {
        match self.shape {
            Shape::Circle { .. } => Some(xi),
            Shape::Ellipse { a, b } => {
                let x = self.param_of_arclength(s);
                let c2 = a * a - b * b;
                let f = c2 * x.sin().powi(2);
                Some(f - xi * xi * (f + b * b))
            }
            Shape::Fourier { .. } => None,
        }
    }
}

/// Derivative jet of a scalar function: `(x, k) ↦ d^k/dx^k g(x)`.
pub type Jet = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// k-th derivative of cos(w x).
pub fn cos_derivative(w: f64, x: f64, k: usize) -> f64 {
    w.powi(k as i32) * (w * x + k as f64 * PI / 2.0).cos()
}

/// k-th derivative of cosh(w y).
pub fn cosh_derivative(w: f64, y: f64, k: usize) -> f64 {
    let v = if k % 2 == 0 { (w * y).cosh() } else { (w * y).sinh() };
    w.powi(k as i32) * v
}

/// Two-dimensional Liouville table on the cylinder with metric
/// (f(x) − q(y))(dx² + dy²), |y| ≤ N.
#[derive(Clone)]
pub struct LiouvilleTable {
    f: Jet,
    q: Jet,
    n: f64,
    /// Focal parameter c when the table is the interior of an ellipse.
    ellipse_c: Option<f64>,
}

impl fmt::Debug for LiouvilleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiouvilleTable").field("N", &self.n).field("ellipse_c", &self.ellipse_c).finish()
    }
}

impl LiouvilleTable {
    pub fn new(f: Jet, q: Jet, n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid(format!("N must be positive, got {n}")));
        }
        Ok(LiouvilleTable { f, q, n, ellipse_c: None })
    }

    /// Elliptic coordinates: f = c² sin²x, q = −c² sinh²y; the boundary y = N is
    /// the ellipse with a = c cosh N, b = c sinh N.
    pub fn ellipse_family(c: f64, n: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("focal parameter c must be positive, got {c}")));
        }
        let c2 = c * c;
        let f: Jet = Arc::new(move |x, k| {
            if k == 0 {
                c2 * x.sin().powi(2)
            } else {
                -0.5 * c2 * cos_derivative(2.0, x, k)
            }
        });
        let q: Jet = Arc::new(move |y, k| {
            if k == 0 {
                -c2 * y.sinh().powi(2)
            } else {
                -0.5 * c2 * cosh_derivative(2.0, y, k)
            }
        });
        let mut table = LiouvilleTable::new(f, q, n)?;
        table.ellipse_c = Some(c);
        Ok(table)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x, 0)
    }

    pub fn f_deriv(&self, x: f64, k: usize) -> f64 {
        (self.f)(x, k)
    }

    pub fn q(&self, y: f64) -> f64 {
        (self.q)(y, 0)
    }

    pub fn q_deriv(&self, y: f64, k: usize) -> f64 {
        (self.q)(y, k)
    }

    /// q(N), the lower end of the rotational range of the first integral.
    pub fn q_boundary(&self) -> f64 {
        self.q(self.n)
    }

    /// Planar boundary when the table is an ellipse.
    pub fn boundary_curve(&self) -> Result<BoundaryCurve> {
        match self.ellipse_c {
            Some(c) => make_ellipse(c * self.n.cosh(), c * self.n.sinh()),
            None => Err(Error::Unsupported("only the ellipse family has a planar boundary".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// First derivative order at which the condition fails, when applicable.
    pub first_violated_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub conditions: Vec<ConditionCheck>,
    pub classical_type: bool,
}

/// Check conditions (i)-(v) of a classical-type Liouville table; the
/// compatibility condition on even derivatives is tested for k ≤ k_check.
pub fn liouville_validate(table: &LiouvilleTable, k_check: usize) -> LiouvilleReport {
    const GRID: usize = 2000;
    let tol = 1e-12;
    let mut conditions = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String, order: Option<usize>| {
        conditions.push(ConditionCheck { name: name.into(), passed, detail, first_violated_order: order });
    };

    let f0 = table.f(0.0);
    let fpi = table.f(PI);
    let f2 = table.f_deriv(0.0, 2);
    let min_f = (1..GRID)
        .filter(|j| j % (GRID / 2) != 0)
        .map(|j| table.f(TAU * j as f64 / GRID as f64))
        .fold(f64::INFINITY, f64::min);
    let ok = f0.abs() < tol && fpi.abs() < tol && f2 > 0.0 && min_f > 0.0;
    push("(i) f > 0 off piZ, f(0) = f(pi) = 0, f''(0) > 0", ok,
        format!("f(0)={f0:e}, f(pi)={fpi:e}, f''(0)={f2}, min f off zeros={min_f:e}"), None);

    let n = table.n;
    let q0 = table.q(0.0);
    let q2 = table.q_deriv(0.0, 2);
    let max_q = (1..=GRID)
        .flat_map(|j| {
            let y = n * j as f64 / GRID as f64;
            [table.q(y), table.q(-y)]
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = q0.abs() < tol && q2 < 0.0 && max_q < 0.0;
    push("(ii) q < 0 off 0, q(0) = 0, q''(0) < 0", ok,
        format!("q(0)={q0:e}, q''(0)={q2}, max q off 0={max_q:e}"), None);

    let mut first = None;
    let mut detail = String::from("ok");
    'orders: for k in 1..=k_check {
        let rhs = if k % 2 == 0 { 1.0 } else { -1.0 } * table.q_deriv(0.0, 2 * k);
        for l in [0.0, PI] {
            let lhs = table.f_deriv(l, 2 * k);
            if (lhs - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
                first = Some(k);
                detail = format!("k={k}, x={l}: f^(2k)={lhs} but (-1)^k q^(2k)(0)={rhs}");
                break 'orders;
            }
        }
    }
    push("(iii) f^(2k)(pi l) = (-1)^k q^(2k)(0)", first.is_none(), detail, first);

    let qn = table.q_deriv(n, 1);
    push("(iv) q'(N) < 0", qn < 0.0, format!("q'(N)={qn}"), None);

    let sym = (0..GRID)
        .map(|j| {
            let x = TAU * j as f64 / GRID as f64;
            (table.f(x) - table.f(PI - x)).abs()
        })
        .fold(0.0, f64::max);
    let increasing = (1..GRID / 4).all(|j| {
        let x0 = PI / 2.0 * (j - 1) as f64 / (GRID / 4) as f64;
        let x1 = PI / 2.0 * j as f64 / (GRID / 4) as f64;
        table.f(x1) > table.f(x0)
    }) && table.f(PI / 2.0) > table.f(PI / 2.0 * (1.0 - 4.0 / GRID as f64));
    push("(v) f(x) = f(pi - x), f increasing on [0, pi/2]", sym < 1e-12 && increasing,
        format!("symmetry defect={sym:e}, increasing={increasing}"), None);

    let classical_type = conditions.iter().all(|c| c.passed);
    LiouvilleReport { conditions, classical_type }
}

/// Domain specification as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Ellipse { a: f64, b: f64 },
    Circle { r: f64 },
    Liouville {
        family: String,
        c: f64,
        #[serde(rename = "N")]
        n: f64,
    },
    Fourier { coeffs: Vec<f64> },
}

/// A built domain: a planar curve, possibly with its Liouville table.
#[derive(Debug, Clone)]
pub struct Domain {
    pub curve: BoundaryCurve,
    pub liouville: Option<LiouvilleTable>,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::Ellipse { a, b } => Ok(Domain { curve: make_ellipse(*a, *b)?, liouville: None }),
            DomainSpec::Circle { r } => Ok(Domain { curve: make_circle(*r)?, liouville: None }),
            DomainSpec::Fourier { coeffs } => Ok(Domain { curve: make_fourier(coeffs)?, liouville: None }),
            DomainSpec::Liouville { family, c, n } => {
                if family != "ellipse" {
                    return Err(Error::Unsupported(format!("liouville family '{family}'")));
                }
                let table = LiouvilleTable::ellipse_family(*c, *n)?;
                Ok(Domain { curve: table.boundary_curve()?, liouville: Some(table) })
            }
        }
    }
}
