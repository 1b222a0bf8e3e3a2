//! Weak-isospectrality clusters: interval sets built around a spectrum,
//! checks of the cluster hypotheses, Weyl fits and the trap-and-constancy
//! test for continuous quasi-eigenvalue paths.

use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::brent;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    dim: usize,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>, dim: usize) -> Result<Spectrum> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(invalid("eigenvalues must be finite"));
        }
        if let Some(i) = eigenvalues.windows(2).position(|w| w[1] < w[0]) {
            return Err(invalid(format!("eigenvalues must be non-decreasing (index {})", i + 1)));
        }
        Ok(Spectrum { eigenvalues, dim })
    }

    /// One eigenvalue per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, dim: usize) -> Result<Spectrum> {
        let mut values = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            values.push(line.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?);
        }
        Spectrum::new(values, dim)
    }

    pub fn from_file(path: &Path, dim: usize) -> Result<Spectrum> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Spectrum::parse(&text, dim)
    }

    pub fn to_lines(&self) -> String {
        self.eigenvalues.iter().map(|v| format!("{v:.16e}\n")).collect()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalClusterSet {
    pub intervals: Vec<Interval>,
    /// Components [ā_k, b̄_k] before shrinking (equal to `intervals` when
    /// the set is supplied directly).
    pub components: Vec<Interval>,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub dim: usize,
}

impl IntervalClusterSet {
    pub fn from_intervals(intervals: Vec<Interval>, c: f64, d: f64, alpha: f64, dim: usize) -> Result<Self> {
        if !(c > 0.0) {
            return Err(invalid("c must be positive"));
        }
        if intervals.iter().any(|i| !(i.a <= i.b)) {
            return Err(invalid("every interval needs a <= b"));
        }
        Ok(IntervalClusterSet { components: intervals.clone(), intervals, c, d, alpha, dim })
    }

    /// Index of the interval containing x.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let i = self.intervals.partition_point(|iv| iv.b < x);
        (i < self.intervals.len() && self.intervals[i].contains(x)).then_some(i)
    }

    pub fn min_gap(&self) -> f64 {
        self.intervals.windows(2).map(|w| w[1].a - w[0].b).fold(f64::INFINITY, f64::min)
    }
}

/// Solve x + sign·2c·x^{−d} = λ on the branch next to λ.
fn component_end(lambda: f64, c: f64, d: f64, sign: f64) -> Result<f64> {
    let g = |x: f64| x + sign * 2.0 * c * x.powf(-d) - lambda;
    let (lo, hi) = if sign > 0.0 {
        (lambda - 2.0 * c * (0.5 * lambda).powf(-d), lambda)
    } else {
        (lambda, lambda + 2.0 * c * lambda.powf(-d))
    };
    if !(lo > 0.0) || g(lo) * g(hi) > 0.0 {
        return Err(invalid(format!("cluster endpoints near λ = {lambda} are not bracketed; raise alpha")));
    }
    brent(g, lo, hi, 1e-15 * lambda.max(1.0))
}

/// Components of {λ ≥ α : |Spec − λ| ≤ 2cλ^{−d}} shrunk by (3/2)c·(·)^{−d}.
pub fn build_clusters(spec: &Spectrum, c: f64, d: f64, alpha: f64) -> Result<IntervalClusterSet> {
    let n = spec.dim as f64;
    if !(d > 0.5 * n) {
        return Err(Error::DTooSmall { d, n: spec.dim });
    }
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    let mut pieces: Vec<Interval> = Vec::new();
    let mut last = f64::NAN;
    for &lam in spec.eigenvalues() {
        if lam == last {
            continue;
        }
        last = lam;
        if lam + 2.0 * c * lam.abs().max(1.0).powf(-d) < alpha {
            continue;
        }
        let r = component_end(lam, c, d, -1.0)?;
        if r < alpha {
            continue;
        }
        let l = component_end(lam, c, d, 1.0)?.max(alpha);
        pieces.push(Interval { a: l, b: r });
    }
    if pieces.is_empty() {
        return Err(Error::EmptySpectrumAboveAlpha { alpha });
    }
    let mut components: Vec<Interval> = Vec::new();
    for p in pieces {
        match components.last_mut() {
            Some(top) if p.a <= top.b => top.b = top.b.max(p.b),
            _ => components.push(p),
        }
    }
    let intervals = components
        .iter()
        .map(|iv| Interval { a: iv.a + 1.5 * c * iv.a.powf(-d), b: iv.b - 1.5 * c * iv.b.powf(-d) })
        .collect();
    Ok(IntervalClusterSet { intervals, components, c, d, alpha, dim: spec.dim })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Report {
    pub intervals: usize,
    pub disjoint_increasing: bool,
    /// min_k a_{k+1} − b_k − c·b_k^{−d}
    pub min_gap_margin: f64,
    pub first_gap_violation: Option<usize>,
    pub max_length: f64,
    /// a_k^{s/2}(b_k − a_k)
    pub weighted_lengths: Vec<f64>,
    pub tail_medians: Vec<f64>,
    pub tail_decreasing: bool,
    /// s < 2d − n, the range in which shrinking lengths are guaranteed.
    pub s_in_range: bool,
    pub passed: bool,
}

fn median(v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    w.sort_by(f64::total_cmp);
    let m = w.len() / 2;
    if w.len() % 2 == 1 {
        w[m]
    } else {
        0.5 * (w[m - 1] + w[m])
    }
}

/// Medians of four consecutive blocks covering the upper half of `v`.
fn tail_block_medians(v: &[f64]) -> Vec<f64> {
    let tail = &v[v.len() / 2..];
    let blocks = 4.min(tail.len());
    if blocks == 0 {
        return Vec::new();
    }
    let size = tail.len() / blocks;
    (0..blocks)
        .map(|b| {
            let end = if b + 1 == blocks { tail.len() } else { (b + 1) * size };
            median(&tail[b * size..end])
        })
        .collect()
}

pub fn verify_h1(set: &IntervalClusterSet, s: u32) -> H1Report {
    let iv = &set.intervals;
    let disjoint_increasing = iv.iter().all(|i| i.a <= i.b) && iv.windows(2).all(|w| w[0].b < w[1].a);
    let mut min_gap_margin = f64::INFINITY;
    let mut first_gap_violation = None;
    for (k, w) in iv.windows(2).enumerate() {
        let margin = w[1].a - w[0].b - set.c * w[0].b.powf(-set.d);
        if margin < 0.0 && first_gap_violation.is_none() {
            first_gap_violation = Some(k);
        }
        min_gap_margin = min_gap_margin.min(margin);
    }
    let weighted_lengths: Vec<f64> = iv.iter().map(|i| i.a.powf(0.5 * s as f64) * i.length()).collect();
    let tail_medians = tail_block_medians(&weighted_lengths);
    let tail_decreasing = tail_medians.len() >= 2 && tail_medians.windows(2).all(|w| w[1] < w[0]);
    let s_in_range = (s as f64) < 2.0 * set.d - set.dim as f64;
    let passed = iv.len() >= 10 && disjoint_increasing && first_gap_violation.is_none() && tail_decreasing;
    H1Report {
        intervals: iv.len(),
        disjoint_increasing,
        min_gap_margin,
        first_gap_violation,
        max_length: iv.iter().map(Interval::length).fold(0.0, f64::max),
        weighted_lengths,
        tail_medians,
        tail_decreasing,
        s_in_range,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub checked: usize,
    /// Eigenvalues above the last interval, where the set says nothing.
    pub beyond_range: usize,
    /// (spectrum index t, eigenvalue) of the first uncovered eigenvalue.
    pub first_violation: Option<(usize, f64)>,
    pub passed: bool,
}

/// Every eigenvalue in [a, last b_k] of every spectrum lies in the set.
pub fn verify_h2(spectra: &[Spectrum], set: &IntervalClusterSet, a: f64) -> H2Report {
    let top = set.intervals.last().map_or(f64::NEG_INFINITY, |i| i.b);
    let (mut checked, mut beyond_range, mut first_violation) = (0, 0, None);
    for (t, spec) in spectra.iter().enumerate() {
        for &lam in spec.eigenvalues().iter().filter(|&&l| l >= a) {
            if lam > top {
                beyond_range += 1;
                continue;
            }
            checked += 1;
            if set.locate(lam).is_none() && first_violation.is_none() {
                first_violation = Some((t, lam));
            }
        }
    }
    H2Report { checked, beyond_range, first_violation, passed: first_violation.is_none() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    pub v: f64,
    pub two_v: f64,
    /// Mean relative residual on the lower and upper quarter of the fitted tail.
    pub residual_trend: (f64, f64),
    /// v j^{2/n} ≤ λ_j ≤ 4v j^{2/n} on the fitted tail.
    pub bounds_hold: bool,
    pub degenerate: bool,
}

/// Least-squares fit λ_j ≈ 2v j^{2/n} over the upper half of the spectrum.
pub fn weyl_fit(spec: &Spectrum) -> Result<WeylReport> {
    let ev = spec.eigenvalues();
    if ev.len() < 50 {
        return Err(invalid(format!("weyl_fit needs at least 50 eigenvalues, got {}", ev.len())));
    }
    let expo = 2.0 / spec.dim as f64;
    let start = ev.len() / 2;
    let xs: Vec<f64> = (start..ev.len()).map(|i| ((i + 1) as f64).powf(expo)).collect();
    let ys = &ev[start..];
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let two_v = sxy / sxx;
    let v = 0.5 * two_v;
    let rel: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (y - two_v * x) / (two_v * x)).collect();
    let q = rel.len() / 4;
    let mean = |s: &[f64]| s.iter().map(|r| r.abs()).sum::<f64>() / s.len().max(1) as f64;
    let residual_trend = (mean(&rel[..q.max(1)]), mean(&rel[rel.len() - q.max(1)..]));
    let bounds_hold = xs.iter().zip(ys).all(|(x, y)| v * x <= *y && *y <= 4.0 * v * x);
    let spread = ev[ev.len() - 1] - ev[0];
    let degenerate = !(spread > 1e-12 * ev[ev.len() - 1].abs().max(1.0));
    Ok(WeylReport { v, two_v, residual_trend, bounds_hold, degenerate })
}

/// A sampled path t ↦ μ_q(t) of one quasi-eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct QuasiPath {
    pub q: (i64, i64),
    pub mu0: f64,
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapOptions {
    pub s: u32,
    /// Order M of the quasi-eigenvalue series; must exceed max(2d, s).
    pub order: usize,
    /// Optional bound on |dμ²/dt| used to certify continuity between grid points.
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapEntry {
    pub q: (i64, i64),
    pub mu0: f64,
    pub interval: usize,
    /// sup_t (μ⁰)^{s+1}|μ(t) − μ(0)|
    pub drift: f64,
    pub eps: f64,
    pub constant: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapReport {
    pub beta: f64,
    pub entries: Vec<TrapEntry>,
    pub eps_decreasing: bool,
    pub consistent: bool,
}

/// Check that each path stays in one fattened interval and that its drift
/// obeys the ε_q bound of the constancy argument.
pub fn trap_constancy(paths: &[QuasiPath], set: &IntervalClusterSet, opts: &TrapOptions) -> Result<TrapReport> {
    let lower = (2.0 * set.d).max(opts.s as f64);
    if !(opts.order as f64 > lower) {
        return Err(invalid(format!("order M = {} must exceed max(2d, s) = {lower}", opts.order)));
    }
    let beta = 0.5 * (lower + opts.order as f64);
    let s = opts.s as f64;
    let fat = |k: usize| {
        let iv = set.intervals[k];
        let pad = 0.5 * set.c * iv.a.powf(-0.5 * beta);
        Interval { a: iv.a - pad, b: iv.b + pad }
    };
    let step_limit = 0.5 * set.min_gap();
    let mut entries = Vec::with_capacity(paths.len());
    for path in paths {
        if path.t.len() != path.mu.len() || path.t.is_empty() {
            return Err(invalid("path needs matching, non-empty t and mu samples"));
        }
        for (i, w) in path.mu.windows(2).enumerate() {
            let step = (w[1] * w[1] - w[0] * w[0]).abs();
            let mut limit = step_limit;
            if let Some(lip) = opts.lipschitz {
                limit = limit.min(lip * (path.t[i + 1] - path.t[i]).abs());
            }
            if step > limit {
                return Err(Error::GridTooCoarse { q: path.q, step, limit });
            }
        }
        let m0 = path.mu[0];
        let k = (0..set.intervals.len())
            .find(|&k| fat(k).contains(m0 * m0))
            .ok_or(Error::PathJumpsGap { q: path.q, t: path.t[0] })?;
        let iv = fat(k);
        let mut drift: f64 = 0.0;
        let mut constant: f64 = 0.0;
        let a_k = set.intervals[k].a;
        for (t, mu) in path.t.iter().zip(&path.mu) {
            if !iv.contains(mu * mu) {
                return Err(Error::PathJumpsGap { q: path.q, t: *t });
            }
            drift = drift.max(path.mu0.powf(s + 1.0) * (mu - m0).abs());
            constant = constant.max(path.mu0.powf(s + 1.0) / (a_k.powf(0.5 * s) * (mu + m0)));
        }
        let len = set.intervals[k].length();
        let eps = constant * (a_k.powf(0.5 * s) * len + set.c * a_k.powf(0.5 * (s - beta)));
        entries.push(TrapEntry { q: path.q, mu0: path.mu0, interval: k, drift, eps, constant, bound_holds: drift <= eps });
    }
    let mut order: Vec<&TrapEntry> = entries.iter().collect();
    order.sort_by(|x, y| x.mu0.total_cmp(&y.mu0));
    let eps_decreasing = order.windows(2).all(|w| w[1].eps <= w[0].eps);
    let consistent = eps_decreasing && entries.iter().all(|e| e.bound_holds);
    Ok(TrapReport { beta, entries, eps_decreasing, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares(n: usize) -> Spectrum {
        Spectrum::new((1..=n).map(|j| (j * j) as f64).collect(), 1).unwrap()
    }

    #[test]
    fn square_spectrum_component_matches_hand_values() {
        let set = build_clusters(&squares(200), 1.0, 1.0, 50.0).unwrap();
        let k = set.locate(100.0).unwrap();
        // ā + 2/ā = 100 and b̄ − 2/b̄ = 100, roots next to 100
        let abar = 50.0 + 2498f64.sqrt();
        let bbar = 50.0 + 2502f64.sqrt();
        let (ca, cb) = (set.components[k].a, set.components[k].b);
        assert!((ca - abar).abs() < 1e-10, "{ca} vs {abar}");
        assert!((cb - bbar).abs() < 1e-10, "{cb} vs {bbar}");
        assert!((set.intervals[k].a - (abar + 1.5 / abar)).abs() < 1e-10);
        assert!((set.intervals[k].b - (bbar - 1.5 / bbar)).abs() < 1e-10);
        assert!((set.intervals[k].a - 99.995).abs() < 1e-3 && (set.intervals[k].b - 100.005).abs() < 1e-3);
    }

    #[test]
    fn h1_passes_on_squares_and_flags_widened_interval() {
        let mut set = build_clusters(&squares(200), 1.0, 1.0, 50.0).unwrap();
        let r = verify_h1(&set, 0);
        assert!(r.passed, "{r:?}");
        let gap = set.intervals[6].a - set.intervals[5].b;
        set.intervals[5].b += gap;
        let r = verify_h1(&set, 0);
        assert!(!r.passed);
        assert_eq!(r.first_gap_violation, Some(5));
        let set = build_clusters(&Spectrum::new((1..=200).map(|j| (j * j) as f64).collect(), 2).unwrap(), 1.0, 1.5, 50.0).unwrap();
        assert!(!verify_h1(&set, 1).s_in_range);
        assert!(verify_h1(&set, 0).s_in_range);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(build_clusters(&squares(5), 1.0, 1.0, 1000.0), Err(Error::EmptySpectrumAboveAlpha { .. })));
        let s2 = Spectrum::new(vec![1.0, 2.0], 2).unwrap();
        assert!(matches!(build_clusters(&s2, 1.0, 1.0, 0.5), Err(Error::DTooSmall { .. })));
        assert!(Spectrum::new(vec![2.0, 1.0], 1).is_err());
    }

    #[test]
    fn h2_examples() {
        let spec = squares(200);
        let set = build_clusters(&spec, 1.0, 1.0, 50.0).unwrap();
        assert!(verify_h2(&[spec.clone(), spec.clone()], &set, 51.0).passed);
        let mut shifted: Vec<f64> = spec.eigenvalues().to_vec();
        shifted[20] += 20.0;
        shifted.sort_by(f64::total_cmp);
        let bad = Spectrum::new(shifted, 1).unwrap();
        let r = verify_h2(&[spec.clone(), bad], &set, 51.0);
        assert_eq!(r.first_violation.map(|v| v.0), Some(1));
        assert!((r.first_violation.unwrap().1 - 461.0).abs() < 1e-12);
        let near: Vec<f64> = spec
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(j, l)| l + if j % 2 == 0 { 0.45 } else { -0.45 } * l.powi(-1))
            .collect();
        assert!(verify_h2(&[Spectrum::new(near, 1).unwrap()], &set, 51.0).passed);
        let far: Vec<f64> = spec.eigenvalues().iter().map(|l| l + 1.8 * l.powi(-1)).collect();
        assert!(!verify_h2(&[Spectrum::new(far, 1).unwrap()], &set, 51.0).passed);
    }

    #[test]
    fn weyl_examples() {
        let r = weyl_fit(&squares(400)).unwrap();
        assert!((r.v - 0.5).abs() < 1e-6);
        assert!(r.bounds_hold && !r.degenerate);
        let flat = Spectrum::new(vec![3.0; 60], 2).unwrap();
        assert!(weyl_fit(&flat).unwrap().degenerate);
        assert!(weyl_fit(&squares(10)).is_err());
    }

    fn unit_intervals(centers: &[f64], half: f64) -> IntervalClusterSet {
        let iv = centers.iter().map(|c| Interval { a: c - half, b: c + half }).collect();
        IntervalClusterSet::from_intervals(iv, 1.0, 1.0, 0.0, 2).unwrap()
    }

    #[test]
    fn constant_paths_pass() {
        let centers = [100.0, 400.0, 900.0];
        let set = unit_intervals(&centers, 1.0);
        let paths: Vec<QuasiPath> = centers
            .iter()
            .enumerate()
            .map(|(i, c)| QuasiPath { q: (i as i64, 0), mu0: c.sqrt(), t: vec![0.0, 0.5, 1.0], mu: vec![c.sqrt(); 3] })
            .collect();
        let r = trap_constancy(&paths, &set, &TrapOptions { s: 0, order: 3, lipschitz: None }).unwrap();
        assert!(r.consistent, "{r:?}");
        assert_eq!(r.entries[2].interval, 2);
        let err = trap_constancy(&paths, &set, &TrapOptions { s: 0, order: 2, lipschitz: None });
        assert!(err.is_err());
    }

    #[test]
    fn jumping_and_coarse_paths_are_rejected() {
        let set = unit_intervals(&[100.0, 110.0], 1.0);
        let mu: Vec<f64> = (0..=40).map(|i| (100.0 + 0.1 * i as f64).sqrt()).collect();
        let t: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let path = QuasiPath { q: (1, 1), mu0: 10.0, t, mu };
        let opts = TrapOptions { s: 0, order: 3, lipschitz: None };
        assert!(matches!(trap_constancy(&[path.clone()], &set, &opts), Err(Error::PathJumpsGap { q: (1, 1), .. })));
        let coarse = QuasiPath { t: vec![0.0, 1.0], mu: vec![10.0, 110f64.sqrt()], ..path };
        assert!(matches!(trap_constancy(&[coarse], &set, &opts), Err(Error::GridTooCoarse { .. })));
    }
}
