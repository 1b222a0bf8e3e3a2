//! Quantization conditions and the order-by-order quasi-eigenvalue
//! recursion μ_q = μ⁰ + c₀ + c₁ε + … + c_M ε^M, ε = 1/μ⁰.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::brent;
use crate::tori::ActionData;

/// Maslov data (ϑ₀, ϑ) for disk whispering-gallery modes, calibrated
/// against Dirichlet Bessel zeros.
pub const DISK_MASLOV: (i64, i64) = (0, 1);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirkhoffCoefficient {
    pub j: usize,
    pub alpha: usize,
    pub re: f64,
    pub im: f64,
}

/// Normal-form data of one invariant circle (two-dimensional tables, so
/// actions and frequencies are scalars).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirkhoffData {
    pub i0: f64,
    /// ∇L(I⁰)/2π
    pub omega: f64,
    pub l0: f64,
    pub hess_l: f64,
    /// L‴(I⁰), L⁗(I⁰), …
    #[serde(default)]
    pub higher_jets: Vec<f64>,
    #[serde(default)]
    pub maslov_theta0: i64,
    #[serde(default)]
    pub maslov_theta: i64,
    #[serde(default)]
    pub birkhoff_p: Vec<BirkhoffCoefficient>,
}

impl BirkhoffData {
    /// Closed forms for the unit disk on the circle of incidence angle θ:
    /// I = cos θ, L(I) = 2(√(1−I²) − I arccos I).
    pub fn disk(theta: f64) -> Result<BirkhoffData> {
        if !(theta > 0.0 && theta < PI) {
            return Err(invalid(format!("theta must lie in (0, π), got {theta}")));
        }
        let i = theta.cos();
        let w = 1.0 - i * i;
        Ok(BirkhoffData {
            i0: i,
            omega: -theta / PI,
            l0: 2.0 * (theta.sin() - theta * i),
            hess_l: 2.0 / w.sqrt(),
            higher_jets: vec![
                2.0 * i * w.powf(-1.5),
                2.0 * w.powf(-1.5) + 6.0 * i * i * w.powf(-2.5),
                18.0 * i * w.powf(-2.5) + 30.0 * i.powi(3) * w.powf(-3.5),
            ],
            maslov_theta0: 0,
            maslov_theta: 0,
            birkhoff_p: Vec::new(),
        })
    }

    /// Data of a fitted circle; needs the Hessian of L.
    pub fn from_action(action: &ActionData) -> Result<BirkhoffData> {
        let hess_l = action.hess_l.ok_or(Error::MissingJet { order: 2 })?;
        Ok(BirkhoffData {
            i0: action.i0,
            omega: action.grad_l / (2.0 * PI),
            l0: action.l0,
            hess_l,
            higher_jets: Vec::new(),
            maslov_theta0: 0,
            maslov_theta: 0,
            birkhoff_p: Vec::new(),
        })
    }

    pub fn with_maslov(mut self, theta0: i64, theta: i64) -> Self {
        self.maslov_theta0 = theta0;
        self.maslov_theta = theta;
        self
    }

    pub fn with_p(mut self, j: usize, alpha: usize, value: Complex64) -> Self {
        self.birkhoff_p.retain(|c| (c.j, c.alpha) != (j, alpha));
        self.birkhoff_p.push(BirkhoffCoefficient { j, alpha, re: value.re, im: value.im });
        self
    }

    /// D(I⁰) = L(I⁰) − 2π⟨I⁰, ω⟩.
    pub fn determinant(&self) -> f64 {
        self.l0 - 2.0 * PI * self.i0 * self.omega
    }

    /// r-th derivative of L at I⁰.
    pub fn jet(&self, r: usize) -> Result<f64> {
        match r {
            0 => Ok(self.l0),
            1 => Ok(2.0 * PI * self.omega),
            2 => Ok(self.hess_l),
            _ => self.higher_jets.get(r - 3).copied().ok_or(Error::MissingJet { order: r }),
        }
    }

    fn p_map(&self) -> BTreeMap<(usize, usize), Complex64> {
        let mut out = BTreeMap::new();
        for c in &self.birkhoff_p {
            *out.entry((c.j, c.alpha)).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(c.re, c.im);
        }
        out
    }
}

/// p⁰₀,₀ = ic − 2iR from a Radon invariant R.
pub fn p00_from_radon(radon: f64, c: f64) -> Complex64 {
    Complex64::new(0.0, c - 2.0 * radon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexEntry {
    pub k: i64,
    pub k_n: i64,
    pub mu0: f64,
    /// Euclidean distance in the quantization condition.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSet {
    pub entries: Vec<IndexEntry>,
    /// min μ⁰/|q| over the accepted indices.
    pub growth_constant: f64,
}

/// Indices q = (k, k_n) with |λ(I⁰, L(I⁰)) − (k + ϑ₀/4, 2πk_n − πϑ/2)| ≤ d_n.
pub fn find_indices(data: &BirkhoffData, d_n: f64, k_range: RangeInclusive<i64>) -> Result<IndexSet> {
    if data.i0 == 0.0 {
        return Err(Error::DegenerateAction);
    }
    if !(d_n >= 0.0) {
        return Err(invalid("d_n must be non-negative"));
    }
    let shift = 0.5 * PI * data.maslov_theta as f64;
    let mut entries = Vec::new();
    for k in k_range {
        let lam = (k as f64 + 0.25 * data.maslov_theta0 as f64) / data.i0;
        if !(lam >= 1.0) {
            continue;
        }
        let second = lam * data.l0;
        let k_n = ((second + shift) / (2.0 * PI)).round() as i64;
        let defect = (2.0 * PI * k_n as f64 - shift - second).abs();
        if defect <= d_n {
            entries.push(IndexEntry { k, k_n, mu0: lam, defect });
        }
    }
    let growth_constant = entries
        .iter()
        .map(|e| e.mu0 / (e.k as f64).hypot(e.k_n as f64))
        .fold(f64::INFINITY, f64::min);
    Ok(IndexSet { entries, growth_constant })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiEigenvalue {
    pub k: i64,
    pub k_n: i64,
    pub mu0: f64,
    /// c_{q,0..M}
    pub c: Vec<f64>,
    /// b_{q,0..M+1}
    pub b: Vec<f64>,
    /// Largest imaginary part met in the complex recursion.
    pub imag_defect: f64,
}

type Series = Vec<Complex64>;

fn zero(n: usize) -> Series {
    vec![Complex64::new(0.0, 0.0); n]
}

fn mul(a: &[Complex64], b: &[Complex64], n: usize) -> Series {
    let mut out = zero(n);
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// 1/a for a[0] ≠ 0.
fn recip(a: &[Complex64], n: usize) -> Series {
    let mut out = zero(n);
    out[0] = a[0].inv();
    for k in 1..n {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=k.min(a.len() - 1) {
            s += a[j] * out[k - j];
        }
        out[k] = -s * out[0];
    }
    out
}

/// log(1 + z) for z[0] = 0.
fn log1p(z: &[Complex64], n: usize) -> Series {
    let mut out = zero(n);
    let mut pow = z.to_vec();
    pow.resize(n, Complex64::new(0.0, 0.0));
    for k in 1..n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        for i in 0..n {
            out[i] += pow[i] * (sign / k as f64);
        }
        pow = mul(&pow, z, n);
    }
    out
}

/// Multiply by ε^s.
fn shift(a: &[Complex64], s: usize, n: usize) -> Series {
    let mut out = zero(n);
    for (i, x) in a.iter().enumerate() {
        if i + s < n {
            out[i + s] = *x;
        }
    }
    out
}

struct Residuals {
    e1: Series,
    e2: Series,
}

/// Both equations of the system, expanded in ε to order n − 1.
fn residuals(
    data: &BirkhoffData,
    p: &BTreeMap<(usize, usize), Complex64>,
    c: &[Complex64],
    b: &[Complex64],
    w0: f64,
    v0: f64,
    n: usize,
) -> Result<Residuals> {
    let mut mt = zero(n);
    mt[0] = Complex64::new(1.0, 0.0);
    for (r, cr) in c.iter().enumerate() {
        if r + 1 < n {
            mt[r + 1] = *cr;
        }
    }
    let mut cs = c.to_vec();
    cs.resize(n, Complex64::new(0.0, 0.0));
    let mut beta = b.to_vec();
    beta.resize(n, Complex64::new(0.0, 0.0));

    let mut e1 = mul(&mt, &beta, n);
    for i in 0..n {
        e1[i] += cs[i] * data.i0;
    }
    e1[0] -= w0;

    // μ̃ Σ_{r≥1} L^{(r)}/r! ε^{r−1} β^r
    let mut taylor = zero(n);
    let mut beta_pow = beta.clone();
    let mut fact = 1.0;
    for r in 1..=n {
        fact *= r as f64;
        let lr = data.jet(r)?;
        let term = shift(&beta_pow, r - 1, n);
        for i in 0..n {
            taylor[i] += term[i] * (lr / fact);
        }
        beta_pow = mul(&beta_pow, &beta, n);
    }
    let mut e2 = mul(&mt, &taylor, n);
    for i in 0..n {
        e2[i] += cs[i] * data.l0;
    }
    e2[0] -= v0;

    // (1/i) Log(1 + (ε/μ̃) p⁰), p⁰ = Σ p_{m,α} (εβ)^α (ε/μ̃)^m
    if !p.is_empty() {
        let inv_mt = recip(&mt, n);
        let eps_over = shift(&inv_mt, 1, n);
        let mut p0 = zero(n);
        for (&(m, alpha), val) in p {
            let mut term = zero(n);
            term[0] = *val;
            for _ in 0..alpha {
                term = mul(&term, &shift(&beta, 1, n), n);
            }
            for _ in 0..m {
                term = mul(&term, &eps_over, n);
            }
            for i in 0..n {
                p0[i] += term[i];
            }
        }
        let z = mul(&eps_over, &p0, n);
        let lg = log1p(&z, n);
        let minus_i = Complex64::new(0.0, -1.0);
        for i in 0..n {
            e2[i] += lg[i] * minus_i;
        }
    }
    Ok(Residuals { e1, e2 })
}

/// Solve the order-0..M linear systems from the seed (W₀, V₀).
pub fn solve_recursion_seeded(data: &BirkhoffData, w0: f64, v0: f64, mu0: f64, m: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let d = data.determinant();
    if !(d > 0.0) {
        return Err(Error::NonPositiveD { d });
    }
    if !(mu0 > 0.0) {
        return Err(invalid("mu0 must be positive"));
    }
    // every jet up to order M + 1 enters the order-M system
    for r in 0..=m + 1 {
        data.jet(r)?;
    }
    let p = data.p_map();
    let two_pi_w = 2.0 * PI * data.omega;
    let mut c: Vec<Complex64> = Vec::with_capacity(m + 1);
    let mut b: Vec<Complex64> = Vec::with_capacity(m + 2);
    for j in 0..=m {
        let mut cz = c.clone();
        cz.push(Complex64::new(0.0, 0.0));
        let mut bz = b.clone();
        bz.push(Complex64::new(0.0, 0.0));
        let res = residuals(data, &p, &cz, &bz, w0, v0, j + 1)?;
        let wj = -res.e1[j];
        let vj = -res.e2[j];
        let cj = (vj - wj * two_pi_w) / d;
        c.push(cj);
        b.push(wj - cj * data.i0);
    }
    // b_{M+1} closes the first equation exactly at ε = 1/μ⁰
    let eps = 1.0 / mu0;
    let mut w_last = Complex64::new(0.0, 0.0);
    for (r, cr) in c.iter().enumerate() {
        for (s, bs) in b.iter().enumerate() {
            if r + s >= m {
                w_last -= cr * bs * eps.powi((r + s - m) as i32);
            }
        }
    }
    let mu_tilde: Complex64 = Complex64::new(1.0, 0.0)
        + c.iter().enumerate().map(|(r, cr)| cr * eps.powi(r as i32 + 1)).sum::<Complex64>();
    b.push(w_last / mu_tilde);
    Ok((c, b))
}

/// Quasi-eigenvalue coefficients for q = (k, k_n) at μ⁰.
pub fn solve_recursion(data: &BirkhoffData, q: (i64, i64), mu0: f64, m: usize) -> Result<QuasiEigenvalue> {
    let w0 = q.0 as f64 + 0.25 * data.maslov_theta0 as f64 - mu0 * data.i0;
    let v0 = 2.0 * PI * q.1 as f64 - 0.5 * PI * data.maslov_theta as f64 - mu0 * data.l0;
    let (c, b) = solve_recursion_seeded(data, w0, v0, mu0, m)?;
    let imag_defect = c.iter().chain(&b).map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(QuasiEigenvalue {
        k: q.0,
        k_n: q.1,
        mu0,
        c: c.iter().map(|z| z.re).collect(),
        b: b.iter().map(|z| z.re).collect(),
        imag_defect,
    })
}

/// Truncated series μ and μ²; `overrides` replaces selected c_j.
pub fn evaluate_mu(qe: &QuasiEigenvalue, overrides: &[(usize, f64)]) -> (f64, f64) {
    let eps = 1.0 / qe.mu0;
    let mut c = qe.c.clone();
    for &(j, v) in overrides {
        if j >= c.len() {
            c.resize(j + 1, 0.0);
        }
        c[j] = v;
    }
    let mut mu = qe.mu0;
    let mut pow = 1.0;
    for cj in &c {
        mu += cj * pow;
        pow *= eps;
    }
    (mu, mu * mu)
}

/// ζ_q = I⁰ + b₀ε + … + b_{M+1}ε^{M+2}.
pub fn evaluate_zeta(qe: &QuasiEigenvalue, i0: f64) -> f64 {
    let eps = 1.0 / qe.mu0;
    i0 + qe.b.iter().enumerate().map(|(j, bj)| bj * eps.powi(j as i32 + 1)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBounds {
    pub count: usize,
    pub max_abs_c: Vec<f64>,
    pub max_abs_b: Vec<f64>,
}

/// sup_q |c_{q,j}|, |b_{q,j}| over the accepted indices in `k_range`.
pub fn coefficient_bounds(data: &BirkhoffData, d_n: f64, k_range: RangeInclusive<i64>, m: usize) -> Result<CoefficientBounds> {
    let idx = find_indices(data, d_n, k_range)?;
    let mut out = CoefficientBounds { count: 0, max_abs_c: vec![0.0; m + 1], max_abs_b: vec![0.0; m + 2] };
    for e in &idx.entries {
        let qe = solve_recursion(data, (e.k, e.k_n), e.mu0, m)?;
        for (slot, v) in out.max_abs_c.iter_mut().zip(&qe.c) {
            *slot = slot.max(v.abs());
        }
        for (slot, v) in out.max_abs_b.iter_mut().zip(&qe.b) {
            *slot = slot.max(v.abs());
        }
        out.count += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbkRow {
    pub m: u32,
    pub p: usize,
    pub theta: f64,
    pub mu0: f64,
    pub mu: f64,
    pub bessel_zero: f64,
    pub rel_error: f64,
    /// |μ − j_{m,p}|·μ
    pub scaled_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbkReport {
    pub maslov: (i64, i64),
    pub order: usize,
    pub rows: Vec<EbkRow>,
    pub max_rel_error: f64,
}

/// Disk quasi-eigenvalues for whispering-gallery indices (m, p) compared
/// with Dirichlet Bessel zeros `zeros[i] = (m, p, j_{m,p})`.
///
/// For each index the circle is the grid angle θ with μ⁰ = (m + ϑ₀/4)/cos θ
/// whose radial defect V₀ is smallest; the recursion then corrects μ⁰.
pub fn disk_ebk_compare(theta_grid: &[f64], maslov: (i64, i64), zeros: &[(u32, usize, f64)], order: usize) -> Result<EbkReport> {
    if theta_grid.is_empty() {
        return Err(invalid("theta grid is empty"));
    }
    let mut rows = Vec::with_capacity(zeros.len());
    for &(m, p, z) in zeros {
        if !(z > m as f64) {
            return Err(Error::OracleFailure(format!("j_{{{m},{p}}} = {z} is not a valid Bessel zero")));
        }
        let nu = m as f64 + 0.25 * maslov.0 as f64;
        let target = 2.0 * PI * p as f64 - 0.5 * PI * maslov.1 as f64;
        let mut best: Option<(f64, f64)> = None;
        for &theta in theta_grid {
            let data = BirkhoffData::disk(theta)?;
            if data.i0 <= 0.0 {
                continue;
            }
            let mu0 = nu / data.i0;
            let v0 = (target - mu0 * data.l0).abs();
            if mu0 >= 1.0 && best.map_or(true, |(_, v)| v0 < v) {
                best = Some((theta, v0));
            }
        }
        let (theta, _) = best.ok_or_else(|| invalid("no admissible grid angle"))?;
        let data = BirkhoffData::disk(theta)?.with_maslov(maslov.0, maslov.1);
        let mu0 = nu / data.i0;
        let qe = solve_recursion(&data, (m as i64, p as i64), mu0, order)?;
        let (mu, _) = evaluate_mu(&qe, &[]);
        rows.push(EbkRow {
            m,
            p,
            theta,
            mu0,
            mu,
            bessel_zero: z,
            rel_error: (mu - z).abs() / z,
            scaled_error: (mu - z).abs() * mu,
        });
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(EbkReport { maslov, order, rows, max_rel_error })
}

/// Exact root of the disk quantization pair μ cos θ = m + ϑ₀/4,
/// 2μ(sin θ − θ cos θ) = 2πp − πϑ/2 (Bessel-free reference).
pub fn disk_ebk_root(m: u32, p: usize, maslov: (i64, i64)) -> Result<f64> {
    let nu = m as f64 + 0.25 * maslov.0 as f64;
    let target = PI * p as f64 - 0.25 * PI * maslov.1 as f64;
    if !(target > 0.0) {
        return Err(invalid("radial phase must be positive"));
    }
    let g = |mu: f64| (mu * mu - nu * nu).max(0.0).sqrt() - nu * (nu / mu).min(1.0).acos() - target;
    let mut hi = nu + 1.0;
    while g(hi) < 0.0 {
        hi = nu + 2.0 * (hi - nu);
    }
    brent(g, nu.max(1e-12), hi, 1e-14)
}

/// Maslov pair in [0, 3]² minimizing the worst relative EBK error.
pub fn calibrate_disk_maslov(theta_grid: &[f64], zeros: &[(u32, usize, f64)], order: usize) -> Result<(i64, i64)> {
    let mut best = (f64::INFINITY, (0, 0));
    for t0 in 0..4 {
        for t in 0..4 {
            let r = disk_ebk_compare(theta_grid, (t0, t), zeros, order)?;
            if r.max_rel_error < best.0 {
                best = (r.max_rel_error, (t0, t));
            }
        }
    }
    Ok(best.1)
}

/// Uniform grid of `n` angles in (0, π/2).
pub fn theta_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 0.5 * PI * i as f64 / (n + 1) as f64).collect()
}
