//! Rotation numbers, Diophantine witnesses, Kronecker invariant circles and
//! their action data.
//!
//! Conventions: orbit rotation numbers `rho ∈ [0, 1)` are s-advance fractions.
//! A circle is parametrized by `F(φ) = (s(φ), ξ(φ))` with
//! `B^m ∘ F = F ∘ R`, `R(φ) = φ + 2πρ = φ − 2πω`, so the normal-form frequency
//! is `ω = −ρ` and `∇L(I⁰) = 2πω`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::billiard::{billiard_map, iterate, map_jacobian, PhasePoint};
use crate::error::{invalid, Error, Result};
use crate::geometry::BoundaryCurve;
use crate::numeric::{dist_to_int, gauss_integrate, gauss_legendre, wrap, wrap_centered, TAU};

/// Minimum orbit length accepted by [`rotation_number`].
pub const MIN_ORBIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationMethod {
    WeightedAverage,
    OrderBased,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationData {
    pub omega: f64,
    pub error_estimate: f64,
    pub method: RotationMethod,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

fn weighted_mean(x: &[f64]) -> f64 {
    let n = x.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, v) in x.iter().enumerate() {
        let w = bump((j as f64 + 0.5) / n as f64);
        num += w * v;
        den += w;
    }
    num / den
}

/// Rotation number from per-step increments measured in turns.
///
/// Uses the bump-weighted Birkhoff average; when it disagrees with its
/// half-sample estimates by more than 1e-6 the plain average is returned
/// with the order-based bound 1/N.
pub fn rotation_from_increments(increments: &[f64]) -> RotationData {
    let n = increments.len();
    let full = weighted_mean(increments);
    let half = n / 2;
    let first = weighted_mean(&increments[..half]);
    let second = weighted_mean(&increments[half..]);
    let spread = (full - first).abs().max((full - second).abs());
    if spread <= 1e-6 {
        RotationData { omega: full, error_estimate: spread, method: RotationMethod::WeightedAverage }
    } else {
        let mean = increments.iter().sum::<f64>() / n as f64;
        RotationData { omega: mean, error_estimate: 1.0 / n as f64, method: RotationMethod::OrderBased }
    }
}

/// Rotation number of an orbit on a rotational circle: lifted s-increments
/// (each reduced to [0, L)) divided by the boundary length `lift`.
pub fn rotation_number(orbit: &[PhasePoint], lift: f64) -> Result<RotationData> {
    if orbit.len() < MIN_ORBIT {
        return Err(Error::OrbitTooShort { len: orbit.len(), min: MIN_ORBIT });
    }
    if !(lift > 0.0) {
        return Err(invalid("lift length must be positive"));
    }
    let inc: Vec<f64> = orbit.windows(2).map(|w| wrap(w[1].s - w[0].s, lift) / lift).collect();
    Ok(rotation_from_increments(&inc))
}

/// [`rotation_number`] preceded by a drift check of the curve's closed-form
/// first integral, when it has one.
pub fn rotation_number_on(curve: &BoundaryCurve, orbit: &[PhasePoint], drift_tol: f64) -> Result<RotationData> {
    check_confinement(curve, orbit, drift_tol)?;
    rotation_number(orbit, curve.total_length())
}

/// Largest deviation of the first integral along the orbit from its initial value.
pub fn check_confinement(curve: &BoundaryCurve, orbit: &[PhasePoint], drift_tol: f64) -> Result<f64> {
    let Some(first) = orbit.first() else {
        return Err(Error::OrbitTooShort { len: 0, min: MIN_ORBIT });
    };
    let Some(i0) = curve.first_integral(first.s, first.xi) else {
        return Ok(0.0);
    };
    let drift = orbit
        .iter()
        .map(|p| (curve.first_integral(p.s, p.xi).unwrap_or(i0) - i0).abs())
        .fold(0.0, f64::max);
    if drift > drift_tol {
        return Err(Error::NonCircleOrbit { drift });
    }
    Ok(drift)
}

/// n + 1 successive states of P = B^m starting at `seed`.
pub fn return_orbit(curve: &BoundaryCurve, seed: PhasePoint, n: usize, m: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = seed;
    out.push(p);
    for _ in 0..n {
        p = iterate(curve, p, m)?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineWitness {
    pub kappa_hat: f64,
    pub tau: f64,
    pub k_max: u32,
    pub argmin_k: Vec<i64>,
    pub argmin_kn: i64,
}

fn lattice_shell(dim: usize, norm: u32, out: &mut Vec<Vec<i64>>) {
    fn rec(dim: usize, left: u32, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == dim - 1 {
            for v in if left == 0 { vec![0] } else { vec![left as i64, -(left as i64)] } {
                cur.push(v);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for a in 0..=left {
            for v in if a == 0 { vec![0] } else { vec![a as i64, -(a as i64)] } {
                cur.push(v);
                rec(dim, left - a, cur, out);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::with_capacity(dim);
    rec(dim, norm, &mut cur, out);
}

/// Exhaustive minimum of |⟨ω,k⟩ + k_n|·(Σ|k_j|)^τ over 0 < Σ|k_j| ≤ k_max.
///
/// Sign-equivalent vectors give the same value; the representative with a
/// positive leading nonzero entry and the smallest norm is reported.
pub fn diophantine_kappa(omega: &[f64], tau: f64, k_max: u32) -> Result<DiophantineWitness> {
    if omega.is_empty() || omega.iter().any(|w| !w.is_finite()) {
        return Err(invalid("omega must be a non-empty finite vector"));
    }
    if k_max < 1 {
        return Err(invalid("k_max must be at least 1"));
    }
    let dim = omega.len();
    let mut best = (f64::INFINITY, vec![0i64; dim], 0i64);
    let mut shell = Vec::new();
    for norm in 1..=k_max {
        shell.clear();
        lattice_shell(dim, norm, &mut shell);
        for k in &shell {
            let lead = k.iter().find(|v| **v != 0).copied().unwrap_or(0);
            if lead < 0 {
                continue;
            }
            let dot: f64 = k.iter().zip(omega).map(|(a, w)| *a as f64 * w).sum();
            let kn = -dot.round();
            let mut d = (dot + kn).abs();
            if d <= 4.0 * f64::EPSILON * dot.abs() {
                d = 0.0;
            }
            let val = d * (norm as f64).powf(tau);
            if val < best.0 {
                best = (val, k.clone(), kn as i64);
            }
        }
    }
    Ok(DiophantineWitness { kappa_hat: best.0, tau, k_max, argmin_k: best.1, argmin_kn: best.2 })
}

/// Smallest order k ≤ max_order (and its lattice vector) with ⟨α,k⟩ within
/// `tol` of an integer.
pub fn low_order_resonance(alpha: &[f64], max_order: u32, tol: f64) -> Option<Vec<i64>> {
    let mut shell = Vec::new();
    for norm in 1..=max_order {
        shell.clear();
        lattice_shell(alpha.len(), norm, &mut shell);
        for k in &shell {
            let dot: f64 = k.iter().zip(alpha).map(|(a, w)| *a as f64 * w).sum();
            if dist_to_int(dot) < tol {
                return Some(k.clone());
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleKind {
    /// Winds once around the boundary: s(φ) = (L/2π)φ + periodic.
    Rotational,
    /// Contractible loop in the phase cylinder (e.g. around a bouncing-ball orbit).
    Librational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugacyOptions {
    pub n_modes: usize,
    /// P = B^period.
    pub period: usize,
    pub tol: f64,
    /// Orbit length used for the fit; defaults to max(4096, 16·n_modes).
    pub orbit_len: Option<usize>,
    pub refine: bool,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions { n_modes: 64, period: 1, tol: 1e-8, orbit_len: None, refine: true }
    }
}

/// A Kronecker circle with its Fourier conjugacy to a rigid rotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCircle {
    /// Orbit rotation number ρ ∈ [0, 1) of P.
    pub rotation: RotationData,
    /// Normal-form frequency ω = −ρ (un-reduced).
    pub omega: f64,
    pub period: usize,
    pub kind: CircleKind,
    pub total_length: f64,
    /// Offset of s; s(φ) = winding·φ + s_center + periodic part.
    pub s_center: f64,
    pub winding: f64,
    /// [c0, a1, b1, ..., an, bn] of the periodic part of s.
    pub s_coeffs: Vec<f64>,
    /// [c0, a1, b1, ..., an, bn] of ξ.
    pub xi_coeffs: Vec<f64>,
    /// sup over a 512-grid of |B^m(F(φ)) − F(φ + 2πρ)|.
    pub residual: f64,
    pub seed: PhasePoint,
    pub witness: DiophantineWitness,
}

fn basis_row(phi: f64, n_modes: usize, row: &mut [f64]) {
    row[0] = 1.0;
    let (s1, c1) = phi.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    for k in 1..=n_modes {
        let ns = s * c1 + c * s1;
        let nc = c * c1 - s * s1;
        s = ns;
        c = nc;
        row[2 * k - 1] = c;
        row[2 * k] = s;
    }
}

fn eval_series(coeffs: &[f64], phi: f64) -> f64 {
    let n = (coeffs.len() - 1) / 2;
    let (s1, c1) = phi.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    let mut v = coeffs[0];
    for k in 1..=n {
        let ns = s * c1 + c * s1;
        let nc = c * c1 - s * s1;
        s = ns;
        c = nc;
        v += coeffs[2 * k - 1] * c + coeffs[2 * k] * s;
    }
    v
}

fn eval_series_derivative(coeffs: &[f64], phi: f64) -> f64 {
    let n = (coeffs.len() - 1) / 2;
    let mut v = 0.0;
    for k in 1..=n {
        let (s, c) = (k as f64 * phi).sin_cos();
        v += k as f64 * (coeffs[2 * k] * c - coeffs[2 * k - 1] * s);
    }
    v
}

impl InvariantCircle {
    pub fn period(&self) -> usize {
        self.period
    }

    /// ρ as used by the parametrization, R(φ) = φ + 2πρ.
    pub fn rho(&self) -> f64 {
        self.rotation.omega
    }

    pub fn n_modes(&self) -> usize {
        (self.s_coeffs.len() - 1) / 2
    }

    /// Unreduced s(φ) (continuous in φ).
    pub fn s_lifted(&self, phi: f64) -> f64 {
        self.winding * phi + self.s_center + eval_series(&self.s_coeffs, phi)
    }

    pub fn s_derivative(&self, phi: f64) -> f64 {
        self.winding + eval_series_derivative(&self.s_coeffs, phi)
    }

    pub fn xi(&self, phi: f64) -> f64 {
        eval_series(&self.xi_coeffs, phi)
    }

    pub fn point(&self, phi: f64) -> PhasePoint {
        PhasePoint { s: wrap(self.s_lifted(phi), self.total_length), xi: self.xi(phi) }
    }

    /// Trapezoid nodes of the invariant probability measure dφ/2π.
    pub fn measure_nodes(&self, n: usize) -> Vec<(PhasePoint, f64)> {
        (0..n).map(|j| (self.point(TAU * j as f64 / n as f64), 1.0 / n as f64)).collect()
    }

    /// Conjugacy defect sup_φ |B^m(F(φ)) − F(φ + 2πρ)| on an n-grid.
    pub fn conjugacy_defect(&self, curve: &BoundaryCurve, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let phi = TAU * j as f64 / n as f64;
            let image = iterate(curve, self.point(phi), self.period)?;
            let expected = self.point(phi + TAU * self.rho());
            let ds = wrap_centered(image.s - expected.s, self.total_length);
            worst = worst.max(ds.hypot(image.xi - expected.xi));
        }
        Ok(worst)
    }

    /// (phi, s, xi, chord_length) rows on an n-grid.
    pub fn dump(&self, curve: &BoundaryCurve, n: usize) -> Result<Vec<[f64; 4]>> {
        (0..n)
            .map(|j| {
                let phi = TAU * j as f64 / n as f64;
                let p = self.point(phi);
                let (_, chord) = billiard_map(curve, p)?;
                Ok([phi, p.s, p.xi, chord.length])
            })
            .collect()
    }
}

/// Closed-form caustic circle ξ ≡ xi of a disk. Every such circle is
/// invariant, resonant or not, so no Diophantine screening is applied.
pub fn disk_circle(curve: &BoundaryCurve, xi: f64) -> Result<InvariantCircle> {
    if !curve.is_circle() {
        return Err(invalid("closed-form circles exist only for disks"));
    }
    if !(xi.abs() < 1.0) {
        return Err(Error::GlancingRay { xi });
    }
    let l = curve.total_length();
    let rho = wrap(xi.acos() / std::f64::consts::PI, 1.0);
    let seed = PhasePoint::new(0.0, xi);
    Ok(InvariantCircle {
        rotation: RotationData { omega: rho, error_estimate: 0.0, method: RotationMethod::ClosedForm },
        omega: -rho,
        period: 1,
        kind: CircleKind::Rotational,
        total_length: l,
        s_center: 0.0,
        winding: l / TAU,
        s_coeffs: vec![0.0],
        xi_coeffs: vec![xi],
        residual: 0.0,
        seed,
        witness: diophantine_kappa(&[rho], 1.0, 50)?,
    })
}

/// Fit a Kronecker circle of B through `seed` with `n_modes` Fourier modes.
pub fn circle_conjugacy(curve: &BoundaryCurve, seed: PhasePoint, n_modes: usize) -> Result<InvariantCircle> {
    circle_conjugacy_with(curve, seed, &ConjugacyOptions { n_modes, ..Default::default() })
}

pub fn circle_conjugacy_with(curve: &BoundaryCurve, seed: PhasePoint, opts: &ConjugacyOptions) -> Result<InvariantCircle> {
    if opts.n_modes == 0 || opts.period == 0 {
        return Err(invalid("n_modes and period must be positive"));
    }
    let l = curve.total_length();
    let n_modes = opts.n_modes;
    let n_orbit = opts.orbit_len.unwrap_or((16 * n_modes).max(4096)).max(8 * (2 * n_modes + 1));
    let orbit = return_orbit(curve, seed, n_orbit, opts.period)?;

    let first_sign = orbit[0].xi.signum();
    let kind = if orbit.iter().all(|p| p.xi.signum() == first_sign && p.xi != 0.0) {
        CircleKind::Rotational
    } else {
        CircleKind::Librational
    };

    let (increments, s_targets, s_center, winding) = match kind {
        CircleKind::Rotational => {
            let inc: Vec<f64> = orbit.windows(2).map(|w| wrap(w[1].s - w[0].s, l) / l).collect();
            let mut lifted = Vec::with_capacity(orbit.len());
            let mut acc = orbit[0].s;
            lifted.push(acc);
            for d in &inc {
                acc += d * l;
                lifted.push(acc);
            }
            (inc, lifted, 0.0, l / TAU)
        }
        CircleKind::Librational => {
            let s0 = orbit[0].s;
            let rel: Vec<f64> = orbit.iter().map(|p| wrap_centered(p.s - s0, l)).collect();
            let n = rel.len() as f64;
            let sc = rel.iter().sum::<f64>() / n;
            let xc = orbit.iter().map(|p| p.xi).sum::<f64>() / n;
            let span = |v: &mut dyn Iterator<Item = f64>| {
                let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                hi - lo
            };
            let scale = span(&mut rel.iter().copied()) / span(&mut orbit.iter().map(|p| p.xi));
            let angle: Vec<f64> = rel.iter().zip(&orbit).map(|(r, p)| (p.xi - xc).atan2((r - sc) / scale)).collect();
            let inc: Vec<f64> = angle.windows(2).map(|w| wrap_centered(w[1] - w[0], TAU) / TAU).collect();
            (inc, rel, s0, 0.0)
        }
    };
    let mut rotation = rotation_from_increments(&increments);
    rotation.omega = wrap(rotation.omega, 1.0);
    let rho = rotation.omega;

    let witness = diophantine_kappa(&[rho], 1.0, 50)?;
    let resonance_tol = 1e-9_f64.max(10.0 * rotation.error_estimate);
    if let Some(k) = low_order_resonance(&[rho], 50, resonance_tol) {
        return Err(Error::ResonantRotation { rho, order: k[0] });
    }

    // least-squares fit of the periodic parts on φ_j = 2πρ j
    let cols = 2 * n_modes + 1;
    let rows = orbit.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut bs = DVector::<f64>::zeros(rows);
    let mut bx = DVector::<f64>::zeros(rows);
    let mut row = vec![0.0; cols];
    for j in 0..rows {
        let phi_lift = TAU * rho * j as f64;
        basis_row(wrap(phi_lift, TAU), n_modes, &mut row);
        for (c, v) in row.iter().enumerate() {
            a[(j, c)] = *v;
        }
        bs[j] = s_targets[j] - winding * phi_lift;
        bx[j] = orbit[j].xi;
    }
    let qr = a.qr();
    let q = qr.q();
    let r = qr.r();
    let solve = |b: &DVector<f64>| -> Result<Vec<f64>> {
        r.solve_upper_triangular(&(q.transpose() * b))
            .map(|v| v.iter().copied().collect())
            .ok_or(Error::FitDiverged { residual: f64::INFINITY })
    };
    let mut circle = InvariantCircle {
        rotation,
        omega: -rho,
        period: opts.period,
        kind,
        total_length: l,
        s_center,
        winding,
        s_coeffs: solve(&bs)?,
        xi_coeffs: solve(&bx)?,
        residual: f64::INFINITY,
        seed,
        witness,
    };
    circle.residual = circle.conjugacy_defect(curve, 512)?;
    if circle.residual > opts.tol && opts.refine {
        refine(curve, &mut circle, opts.tol)?;
    }
    if !(circle.residual <= opts.tol) {
        return Err(Error::FitDiverged { residual: circle.residual });
    }
    Ok(circle)
}

/// Gauss-Newton on the conjugacy defect with a minimum-norm SVD step
/// (the phase shift φ ↦ φ + c is a zero mode).
fn refine(curve: &BoundaryCurve, circle: &mut InvariantCircle, tol: f64) -> Result<()> {
    let n = circle.n_modes();
    let cols = 2 * n + 1;
    let grid = 512.max(2 * cols);
    let l = circle.total_length;
    let shift = TAU * circle.rho();
    for _ in 0..6 {
        let mut jac = DMatrix::<f64>::zeros(2 * grid, 2 * cols);
        let mut res = DVector::<f64>::zeros(2 * grid);
        let mut b0 = vec![0.0; cols];
        let mut b1 = vec![0.0; cols];
        for i in 0..grid {
            let phi = TAU * i as f64 / grid as f64;
            let p = circle.point(phi);
            let image = iterate(curve, p, circle.period)?;
            let expected = circle.point(phi + shift);
            res[2 * i] = wrap_centered(image.s - expected.s, l);
            res[2 * i + 1] = image.xi - expected.xi;
            let d = map_jacobian(curve, p, circle.period, 1e-7)?;
            basis_row(phi, n, &mut b0);
            basis_row(wrap(phi + shift, TAU), n, &mut b1);
            for c in 0..cols {
                // s-coefficients
                jac[(2 * i, c)] = d[0][0] * b0[c] - b1[c];
                jac[(2 * i + 1, c)] = d[1][0] * b0[c];
                // ξ-coefficients
                jac[(2 * i, cols + c)] = d[0][1] * b0[c];
                jac[(2 * i + 1, cols + c)] = d[1][1] * b0[c] - b1[c];
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&res, 1e-10 * smax).map_err(|_| Error::FitDiverged { residual: circle.residual })?;
        let mut trial = circle.clone();
        for c in 0..cols {
            trial.s_coeffs[c] -= step[c];
            trial.xi_coeffs[c] -= step[cols + c];
        }
        trial.residual = trial.conjugacy_defect(curve, 512)?;
        if !(trial.residual < circle.residual) {
            break;
        }
        *circle = trial;
        if circle.residual <= tol {
            break;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionData {
    pub i0: f64,
    pub l0: f64,
    pub grad_l: f64,
    /// Central difference of ∇L across neighbouring circles; absent when the
    /// neighbours could not be constructed.
    pub hess_l: Option<f64>,
    pub a_avg: f64,
    /// L0 − I0·gradL − A_avg.
    pub identity_gap: f64,
    /// Spread of the loop integral over base points (closedness diagnostic).
    pub loop_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionOptions {
    pub nodes: usize,
    pub hessian: bool,
}

impl Default for ActionOptions {
    fn default() -> Self {
        ActionOptions { nodes: 1024, hessian: true }
    }
}

/// I⁰ = (2π)⁻¹∮ξ ds by trapezoid over φ.
pub fn action_variable(circle: &InvariantCircle, nodes: usize) -> f64 {
    (0..nodes)
        .map(|j| {
            let phi = TAU * j as f64 / nodes as f64;
            circle.xi(phi) * circle.s_derivative(phi)
        })
        .sum::<f64>()
        / nodes as f64
}

/// L(I⁰) as the loop integral over γ_n: the action of the broken geodesic from
/// F(φ₀) to P(F(φ₀)) followed by ∫ξ ds along Λ back to F(φ₀).
fn loop_integral(curve: &BoundaryCurve, circle: &InvariantCircle, phi0: f64) -> Result<f64> {
    let mut state = circle.point(phi0);
    let mut action = 0.0;
    for index in 0..circle.period {
        let (next, chord) = billiard_map(curve, state).map_err(|e| e.at_bounce(index))?;
        action += chord.action;
        state = next;
    }
    let span = TAU * circle.rho();
    let rule = gauss_legendre(20);
    let panels = (circle.n_modes() as f64 * circle.rho()).ceil().max(1.0) as usize + 1;
    let arc = gauss_integrate(|phi| circle.xi(phi) * circle.s_derivative(phi), phi0, phi0 + span, &rule, panels);
    Ok(action - arc)
}

pub fn action_data(curve: &BoundaryCurve, circle: &InvariantCircle) -> Result<ActionData> {
    action_data_with(curve, circle, &ActionOptions::default())
}

pub fn action_data_with(curve: &BoundaryCurve, circle: &InvariantCircle, opts: &ActionOptions) -> Result<ActionData> {
    let n = opts.nodes.max(8);
    let i0 = action_variable(circle, n);
    let mut a_sum = 0.0;
    for j in 0..n {
        let mut state = circle.point(TAU * j as f64 / n as f64);
        for index in 0..circle.period {
            let (next, chord) = billiard_map(curve, state).map_err(|e| e.at_bounce(index))?;
            a_sum += chord.action;
            state = next;
        }
    }
    let a_avg = a_sum / n as f64;
    let grad_l = TAU * circle.omega;
    let loops: Vec<f64> =
        (0..4).map(|k| loop_integral(curve, circle, TAU * k as f64 / 4.0)).collect::<Result<_>>()?;
    let l0 = loops[0];
    let loop_spread = loops.iter().map(|v| (v - l0).abs()).fold(0.0, f64::max);
    let hess_l = if opts.hessian { hessian_l(curve, circle, i0, n).ok() } else { None };
    Ok(ActionData { i0, l0, grad_l, hess_l, a_avg, identity_gap: l0 - i0 * grad_l - a_avg, loop_spread })
}

/// ∇²L(I⁰) by central differences of ∇L = −2πρ over circles at I⁰ ± δ,
/// δ = 1e-3(1 − |I⁰|); neighbours are seeded at the same s by secant search in ξ.
pub fn hessian_l(curve: &BoundaryCurve, circle: &InvariantCircle, i0: f64, nodes: usize) -> Result<f64> {
    let delta = 1e-3 * (1.0 - i0.abs().min(0.999));
    let opts = ConjugacyOptions { n_modes: circle.n_modes(), period: circle.period, ..Default::default() };
    let measure = |xi: f64| -> Result<(f64, f64)> {
        let c = circle_conjugacy_with(curve, PhasePoint::new(circle.seed.s, xi), &opts)?;
        let mut rho = c.rho();
        // keep the lift continuous with the base circle
        rho += (circle.rho() - rho).round();
        Ok((action_variable(&c, nodes), -TAU * rho))
    };
    let mut grads = [0.0; 2];
    for (slot, sign) in [(0usize, 1.0), (1, -1.0)] {
        let target = i0 + sign * delta;
        let (mut x0, mut f0) = (circle.seed.xi, i0 - target);
        let mut x1 = circle.seed.xi + 0.5 * sign * delta;
        let (mut f1, mut g1) = {
            let (i, g) = measure(x1)?;
            (i - target, g)
        };
        for _ in 0..30 {
            if f1.abs() < 1e-13 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            let (i, g) = measure(x1)?;
            f1 = i - target;
            g1 = g;
        }
        if f1.abs() > 1e-10 {
            return Err(Error::NewtonDivergence { iterations: 30, residual: f1.abs() });
        }
        grads[slot] = g1;
    }
    Ok((grads[0] - grads[1]) / (2.0 * delta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointData {
    pub period: usize,
    pub trace: f64,
    pub determinant: f64,
    /// Eigenvalues as (re, im).
    pub eigenvalues: Vec<(f64, f64)>,
    /// Phases α with eigenvalues e^{±2πiα}; empty unless elliptic.
    pub alphas: Vec<f64>,
    pub elliptic: bool,
    /// Lattice vector of a resonance ⟨α,k⟩ ∈ ℤ with |k| ≤ 4.
    pub resonance: Option<Vec<i64>>,
}

/// Linear stability of a periodic orbit of B from a finite-difference DB^m.
pub fn elliptic_fixed_point_data(curve: &BoundaryCurve, periodic_orbit: &[PhasePoint]) -> Result<FixedPointData> {
    let m = periodic_orbit.len();
    if m == 0 {
        return Err(invalid("periodic orbit is empty"));
    }
    let p0 = periodic_orbit[0];
    let back = iterate(curve, p0, m)?;
    let defect = wrap_centered(back.s - p0.s, curve.total_length()).hypot(back.xi - p0.xi);
    if defect > 1e-10 {
        return Err(Error::NonPeriodicOrbit { defect });
    }
    let j = map_jacobian(curve, p0, m, 1e-6)?;
    let trace = j[0][0] + j[1][1];
    let determinant = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let tol = 1e-6;
    let half = 0.5 * trace;
    if trace.abs() > 2.0 + tol {
        return Err(Error::HyperbolicPoint { trace });
    }
    if trace.abs() >= 2.0 - tol {
        return Ok(FixedPointData {
            period: m,
            trace,
            determinant,
            eigenvalues: vec![(half, 0.0), (half, 0.0)],
            alphas: vec![],
            elliptic: false,
            resonance: None,
        });
    }
    let im = (1.0 - half * half).sqrt();
    let alpha = half.acos() / TAU;
    Ok(FixedPointData {
        period: m,
        trace,
        determinant,
        eigenvalues: vec![(half, im), (half, -im)],
        alphas: vec![alpha],
        elliptic: true,
        resonance: low_order_resonance(&[alpha], 4, 1e-6),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle, make_ellipse};
    use std::f64::consts::PI;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn kappa_examples() {
        let w = diophantine_kappa(&[golden()], 1.0, 100).unwrap();
        assert!((w.kappa_hat - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(w.argmin_k, vec![1]);
        let w = diophantine_kappa(&[1.0 / 3.0], 2.0, 10).unwrap();
        assert_eq!(w.kappa_hat, 0.0);
        assert_eq!((w.argmin_k.clone(), w.argmin_kn), (vec![3], -1));
        let w = diophantine_kappa(&[2f64.sqrt() - 1.0], 1.0, 100).unwrap();
        assert!((w.kappa_hat - 0.343146).abs() < 1e-6);
        assert_eq!(w.argmin_k, vec![2]);
    }

    #[test]
    fn kappa_in_two_dimensions() {
        let w = diophantine_kappa(&[0.5, 0.25], 2.0, 6).unwrap();
        assert_eq!(w.kappa_hat, 0.0);
        assert!(w.argmin_k.iter().map(|k| k.abs()).sum::<i64>() <= 4);
    }

    #[test]
    fn disk_rotation_numbers() {
        let c = make_circle(1.0).unwrap();
        let orbit = return_orbit(&c, PhasePoint::new(0.0, 0.5), 2000, 1).unwrap();
        let r = rotation_number_on(&c, &orbit, 1e-12).unwrap();
        assert!((r.omega - 1.0 / 3.0).abs() < 1e-12);
        let g = golden();
        let orbit = return_orbit(&c, PhasePoint::new(0.0, (PI * g).cos()), 2000, 1).unwrap();
        let r = rotation_number(&orbit, TAU).unwrap();
        assert!((r.omega - g).abs() < 1e-10, "{}", r.omega - g);
        assert!(r.error_estimate >= (r.omega - g).abs());
        assert!(matches!(rotation_number(&orbit[..10], TAU), Err(Error::OrbitTooShort { .. })));
    }

    #[test]
    fn drift_is_detected() {
        let c = make_circle(1.0).unwrap();
        let mut orbit = return_orbit(&c, PhasePoint::new(0.0, 0.3), 1200, 1).unwrap();
        orbit[700].xi = 0.31;
        assert!(matches!(rotation_number_on(&c, &orbit, 1e-9), Err(Error::NonCircleOrbit { .. })));
    }

    #[test]
    fn disk_conjugacy_and_actions() {
        let c = make_circle(1.0).unwrap();
        let theta = PI / 3.0 + 0.01;
        let circle = circle_conjugacy(&c, PhasePoint::new(0.2, theta.cos()), 16).unwrap();
        assert!(circle.residual < 1e-10);
        assert!((circle.rho() - theta / PI).abs() < 1e-12);
        let a = action_data(&c, &circle).unwrap();
        let i = theta.cos();
        assert!((a.i0 - i).abs() < 1e-12);
        assert!((a.a_avg - 2.0 * theta.sin()).abs() < 1e-12);
        assert!((a.l0 - 2.0 * (theta.sin() - theta * i)).abs() < 1e-12);
        assert!(a.identity_gap.abs() < 1e-12);
        let h = a.hess_l.unwrap();
        assert!((h - 2.0 / theta.sin()).abs() < 1e-5, "{h}");
    }

    #[test]
    fn resonant_seed_is_rejected() {
        let c = make_circle(1.0).unwrap();
        let e = circle_conjugacy(&c, PhasePoint::new(0.0, 0.5), 8).unwrap_err();
        assert!(matches!(e, Error::ResonantRotation { order: 3, .. }));
    }

    #[test]
    fn fixed_points() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let l = e.total_length();
        let d = elliptic_fixed_point_data(&e, &[PhasePoint::new(l / 4.0, 0.0), PhasePoint::new(3.0 * l / 4.0, 0.0)]).unwrap();
        assert!(d.elliptic && d.trace.abs() < 2.0);
        assert!((d.trace + 1.0).abs() < 1e-6, "{}", d.trace);
        let c = make_circle(1.0).unwrap();
        let d = elliptic_fixed_point_data(&c, &[PhasePoint::new(0.0, 0.0), PhasePoint::new(PI, 0.0)]).unwrap();
        assert!(!d.elliptic && (d.trace - 2.0).abs() < 1e-6);
        assert_eq!(low_order_resonance(&[0.25], 4, 1e-12), Some(vec![4]));
        // major axis bouncing ball is hyperbolic
        let err = elliptic_fixed_point_data(&e, &[PhasePoint::new(0.0, 0.0), PhasePoint::new(l / 2.0, 0.0)]);
        assert!(matches!(err, Err(Error::HyperbolicPoint { .. })));
    }
}
