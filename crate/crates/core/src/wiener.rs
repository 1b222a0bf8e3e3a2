//! Weighted Wiener spaces on the torus and the small-denominator homological
//! equation u(φ − 2πω) − u(φ) = f(φ).
//!
//! Functions are finite Fourier sums u(φ) = Σ u_k e^{i⟨k,φ⟩}; |k| is the
//! ℓ¹ norm Σ|k_j|.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::{dist_to_int, TAU};
use crate::tori::diophantine_kappa;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusFunction {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

fn l1(k: &[i64]) -> i64 {
    k.iter().map(|v| v.abs()).sum()
}

impl TorusFunction {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        TorusFunction { dim, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<i64>, Complex64)>>(dim: usize, terms: I) -> Result<Self> {
        let mut u = TorusFunction::zero(dim);
        for (k, c) in terms {
            if k.len() != dim {
                return Err(invalid(format!("lattice vector {k:?} has wrong dimension (expected {dim})")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(invalid("coefficients must be finite"));
            }
            *u.coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        u.coeffs.retain(|_, c| c.norm() != 0.0);
        Ok(u)
    }

    /// amp · e^{i⟨k,φ⟩}
    pub fn monomial(k: Vec<i64>, amp: Complex64) -> Self {
        let dim = k.len();
        TorusFunction::from_terms(dim, [(k, amp)]).expect("finite monomial")
    }

    /// cos(k φ) in one variable.
    pub fn cosine(k: i64) -> Self {
        let h = Complex64::new(0.5, 0.0);
        TorusFunction::from_terms(1, [(vec![k], h), (vec![-k], h)]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest |k| in the support (0 for the zero function).
    pub fn max_degree(&self) -> i64 {
        self.coeffs.keys().map(|k| l1(k)).max().unwrap_or(0)
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff(&vec![0; self.dim])
    }

    /// u_{−k} = conj(u_k) for all k, to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.coeff(&neg) - c.conj()).norm() <= tol
        })
    }

    pub fn eval(&self, phi: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let arg: f64 = k.iter().zip(phi).map(|(a, p)| *a as f64 * p).sum();
                c * Complex64::from_polar(1.0, arg)
            })
            .sum()
    }

    /// ∂^α u.
    pub fn derivative(&self, alpha: &[u32]) -> TorusFunction {
        let terms = self.coeffs.iter().map(|(k, c)| {
            let mut f = *c;
            for (kj, aj) in k.iter().zip(alpha) {
                f *= Complex64::new(0.0, *kj as f64).powu(*aj);
            }
            (k.clone(), f)
        });
        TorusFunction::from_terms(self.dim, terms.collect::<Vec<_>>()).unwrap()
    }

    pub fn add(&self, other: &TorusFunction) -> TorusFunction {
        assert_eq!(self.dim, other.dim);
        let terms = self.coeffs.iter().chain(other.coeffs.iter()).map(|(k, c)| (k.clone(), *c));
        TorusFunction::from_terms(self.dim, terms.collect::<Vec<_>>()).unwrap()
    }

    pub fn scale(&self, a: Complex64) -> TorusFunction {
        let terms = self.coeffs.iter().map(|(k, c)| (k.clone(), c * a));
        TorusFunction::from_terms(self.dim, terms.collect::<Vec<_>>()).unwrap()
    }

    /// Pointwise product (convolution of coefficients).
    pub fn mul(&self, other: &TorusFunction) -> TorusFunction {
        assert_eq!(self.dim, other.dim);
        let mut out: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                *out.entry(k).or_default() += c1 * c2;
            }
        }
        TorusFunction::from_terms(self.dim, out).unwrap()
    }

    /// Serialize as lines "k_1 … k_d re im".
    pub fn to_coefficient_lines(&self) -> String {
        let mut s = String::new();
        for (k, c) in &self.coeffs {
            for kj in k {
                let _ = write!(s, "{kj} ");
            }
            let _ = writeln!(s, "{:.16e} {:.16e}", c.re, c.im);
        }
        s
    }

    /// Parse coefficient lines; blank lines and `#` comments are skipped.
    pub fn parse_coefficient_lines(text: &str) -> Result<TorusFunction> {
        let mut dim = None;
        let mut terms = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(Error::Parse(format!("line {}: expected 'k_1 .. k_d re im'", no + 1)));
            }
            let d = fields.len() - 2;
            if *dim.get_or_insert(d) != d {
                return Err(Error::Parse(format!("line {}: inconsistent dimension", no + 1)));
            }
            let k = fields[..d]
                .iter()
                .map(|f| f.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            let re: f64 = fields[d].parse().map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            let im: f64 = fields[d + 1].parse().map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            terms.push((k, Complex64::new(re, im)));
        }
        TorusFunction::from_terms(dim.unwrap_or(1), terms)
    }
}

/// ‖u‖_s = Σ (1 + |k|)^s |u_k|.
pub fn wiener_norm(u: &TorusFunction, s: f64) -> f64 {
    u.coeffs.iter().map(|(k, c)| (1.0 + l1(k) as f64).powf(s) * c.norm()).sum()
}

fn phase(k: &[i64], omega: &[f64]) -> f64 {
    k.iter().zip(omega).map(|(a, w)| *a as f64 * w).sum()
}

/// L_ω u(φ) = u(φ − 2πω) − u(φ): u_k ↦ u_k (e^{−2πi⟨k,ω⟩} − 1).
pub fn apply_lomega(u: &TorusFunction, omega: &[f64]) -> TorusFunction {
    let terms = u.coeffs.iter().map(|(k, c)| {
        let m = Complex64::from_polar(1.0, -TAU * phase(k, omega)) - 1.0;
        (k.clone(), c * m)
    });
    TorusFunction::from_terms(u.dim, terms.collect::<Vec<_>>()).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalSolution {
    pub u: TorusFunction,
    pub kappa: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub s: f64,
    /// ‖u‖_{s−τ}
    pub lhs: f64,
    /// ‖f‖_s / (4κ)
    pub rhs: f64,
    pub holds: bool,
}

impl HomologicalSolution {
    pub fn bound(&self, f: &TorusFunction, s: f64) -> BoundReport {
        let lhs = wiener_norm(&self.u, s - self.tau);
        let rhs = wiener_norm(f, s) / (4.0 * self.kappa);
        BoundReport { s, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) }
    }
}

/// Unique zero-mean solution of L_ω u = f.
///
/// `kappa` must not exceed the witnessed constant κ̂(ω, τ, max|k|); it is
/// carried along for the a-priori bound ‖u‖_{s−τ} ≤ ‖f‖_s/(4κ).
pub fn solve_homological(f: &TorusFunction, omega: &[f64], kappa: f64, tau: f64) -> Result<HomologicalSolution> {
    if omega.len() != f.dim {
        return Err(invalid(format!("omega has dimension {} but f has {}", omega.len(), f.dim)));
    }
    let scale = wiener_norm(f, 0.0).max(1.0);
    let mean = f.mean().norm();
    if mean > 1e-14 * scale {
        return Err(Error::NonZeroMean { mean_abs: mean });
    }
    for k in f.coeffs.keys() {
        if l1(k) > 0 && dist_to_int(phase(k, omega)) <= 4.0 * f64::EPSILON * (1.0 + phase(k, omega).abs()) {
            return Err(Error::ResonantMode { k: k.clone() });
        }
    }
    if !(kappa > 0.0) {
        return Err(invalid("kappa must be positive"));
    }
    let k_max = f.max_degree().max(1) as u32;
    let witness = diophantine_kappa(omega, tau, k_max)?;
    if kappa > witness.kappa_hat * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "kappa = {kappa} exceeds the witnessed constant {} for tau = {tau}",
            witness.kappa_hat
        )));
    }
    let terms = f.coeffs.iter().filter(|(k, _)| l1(k) > 0).map(|(k, c)| {
        let d = Complex64::from_polar(1.0, -TAU * phase(k, omega)) - 1.0;
        (k.clone(), c / d)
    });
    let u = TorusFunction::from_terms(f.dim, terms.collect::<Vec<_>>())?;
    Ok(HomologicalSolution { u, kappa, tau })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEntry {
    pub alpha: Vec<u32>,
    pub sup: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupBoundReport {
    pub s: u32,
    pub grid: usize,
    pub entries: Vec<SupEntry>,
    pub holds: bool,
}

fn multi_indices(dim: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for v in &out {
            let used: u32 = v.iter().sum();
            for a in 0..=(max - used) {
                let mut w = v.clone();
                w.push(a);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Grid check of sup|∂^α u| ≤ ‖u‖_s for all |α| ≤ s.
pub fn derivative_sup_bound_check(u: &TorusFunction, s: u32) -> SupBoundReport {
    let per_axis: usize = if u.dim == 1 { 4096 } else { 64 };
    let total = per_axis.pow(u.dim as u32);
    let norm = wiener_norm(u, s as f64);
    let mut entries = Vec::new();
    for alpha in multi_indices(u.dim, s) {
        let d = u.derivative(&alpha);
        let mut sup: f64 = 0.0;
        let mut phi = vec![0.0; u.dim];
        for idx in 0..total {
            let mut rest = idx;
            for p in phi.iter_mut() {
                *p = TAU * (rest % per_axis) as f64 / per_axis as f64;
                rest /= per_axis;
            }
            sup = sup.max(d.eval(&phi).norm());
        }
        entries.push(SupEntry { alpha, sup, norm });
    }
    let holds = entries.iter().all(|e| e.sup <= e.norm * (1.0 + 1e-12));
    SupBoundReport { s, grid: total, entries, holds }
}

/// Random trigonometric polynomial with support in 0 < |k| ≤ max_degree,
/// coefficients uniform in the unit square; `real` enforces u_{−k} = conj(u_k).
pub fn random_trig_polynomial<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_degree: i64, terms: usize, real: bool) -> TorusFunction {
    let mut out = Vec::new();
    for _ in 0..terms {
        let k: Vec<i64> = loop {
            let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-max_degree..=max_degree)).collect();
            if l1(&k) > 0 && l1(&k) <= max_degree {
                break k;
            }
        };
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if real {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            out.push((neg, c.conj()));
        }
        out.push((k, c));
    }
    TorusFunction::from_terms(dim, out).unwrap()
}
