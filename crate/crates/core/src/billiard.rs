//! The billiard ball map on the coball bundle of the boundary, its
//! generating function, and flow-out integrals along chords.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, Point};
use crate::numeric::{brent, gauss_integrate, gauss_legendre, wrap, wrap_centered, TAU};
use crate::tori::InvariantCircle;

/// Default distance from |ξ| = 1 below which rays are rejected as glancing.
pub const GLANCING_EPS: f64 = 1e-6;

/// A point (s, ξ) of the open coball bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(s: f64, xi: f64) -> Self {
        PhasePoint { s, xi }
    }

    /// sin θ of the reflection angle.
    pub fn sin_theta(&self) -> f64 {
        (1.0 - self.xi * self.xi).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChordData {
    pub source: PhasePoint,
    pub target: PhasePoint,
    pub length: f64,
    /// Generating action of the chord; equal to its length.
    pub action: f64,
}

/// One reflection: B(s, ξ) with the chord joining the two boundary points.
pub fn billiard_map(curve: &BoundaryCurve, p: PhasePoint) -> Result<(PhasePoint, ChordData)> {
    billiard_map_with(curve, p, GLANCING_EPS)
}

pub fn billiard_map_with(curve: &BoundaryCurve, p: PhasePoint, glancing: f64) -> Result<(PhasePoint, ChordData)> {
    if !(p.s.is_finite() && p.xi.is_finite()) {
        return Err(invalid("phase point must be finite"));
    }
    if p.xi.abs() > 1.0 - glancing {
        return Err(Error::GlancingRay { xi: p.xi });
    }
    let l = curve.total_length();
    let s0 = wrap(p.s, l);
    let t0 = curve.param_of_arclength(s0);
    let frame = curve.frame_at_param(t0);
    let u = frame.tangent * p.xi + frame.inward_normal * p.sin_theta();
    let t1 = landing_param(curve, t0, frame.position, u, p)?;
    let hit = curve.frame_at_param(t1);
    let length = (hit.position - frame.position).norm();
    if !(length > 0.0) {
        return Err(Error::NoTransversalHit { s: p.s, xi: p.xi });
    }
    let target = PhasePoint { s: curve.arclength_of_param(t1), xi: u.dot(&hit.tangent) };
    let source = PhasePoint { s: s0, xi: p.xi };
    Ok((target, ChordData { source, target, length, action: length }))
}

fn cross(u: Point, v: Point) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Parameter of the second intersection of the ray p0 + λu (λ > 0) with the curve.
fn landing_param(curve: &BoundaryCurve, t0: f64, p0: Point, u: Point, p: PhasePoint) -> Result<f64> {
    // h(t) = (γ(t) − p0) × u vanishes at t0 and at the landing point.
    let h = |t: f64| cross(curve.jet(t).p - p0, u);
    let guess = match curve.ellipse_axes() {
        Some((a, b)) => {
            let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
            let qa = u.x * u.x * ia + u.y * u.y * ib;
            let qb = p0.x * u.x * ia + p0.y * u.y * ib;
            let qc = p0.x * p0.x * ia + p0.y * p0.y * ib - 1.0;
            let disc = (qb * qb - qa * qc).max(0.0);
            let lambda = (-qb + disc.sqrt()) / qa;
            if !(lambda > 0.0) {
                return Err(Error::NoTransversalHit { s: p.s, xi: p.xi });
            }
            let q = p0 + u * lambda;
            (q.y / b).atan2(q.x / a)
        }
        None => sweep_bracket(t0, &h, p)?,
    };
    let mut t = guess;
    // landing parameter lies in (t0, t0 + 2π)
    t = t0 + wrap(t - t0, TAU);
    for it in 0..60 {
        let jet = curve.jet(t);
        let slope = cross(jet.d1, u);
        if slope == 0.0 {
            return Err(Error::NewtonDivergence { iterations: it, residual: h(t).abs() });
        }
        let dt = cross(jet.p - p0, u) / slope;
        t -= dt;
        if dt.abs() <= 1e-15 * (1.0 + t.abs()) {
            if (curve.jet(t).p - p0).dot(&u) <= 0.0 {
                return Err(Error::NoTransversalHit { s: p.s, xi: p.xi });
            }
            return Ok(t);
        }
    }
    let res = h(t).abs();
    if res < 1e-13 {
        return Ok(t);
    }
    Err(Error::NewtonDivergence { iterations: 60, residual: res })
}

/// Angular sweep for curves without an implicit equation: bracket the sign
/// change of h away from t0, then refine with Brent.
fn sweep_bracket(t0: f64, h: &dyn Fn(f64) -> f64, p: PhasePoint) -> Result<f64> {
    let mut offsets = Vec::new();
    let mut d = TAU * 1e-7;
    while d < TAU / 256.0 {
        offsets.push(d);
        offsets.push(TAU - d);
        d *= 2.0;
    }
    offsets.extend((1..256).map(|j| TAU * j as f64 / 256.0));
    offsets.sort_by(|a, b| a.total_cmp(b));
    let mut prev = (offsets[0], h(t0 + offsets[0]));
    for &off in &offsets[1..] {
        let v = h(t0 + off);
        if v.signum() != prev.1.signum() && v != 0.0 {
            return brent(h, t0 + prev.0, t0 + off, 1e-15);
        }
        prev = (off, v);
    }
    Err(Error::NoTransversalHit { s: p.s, xi: p.xi })
}

/// m successive reflections starting at p; entry j is the chord from state j
/// to state j + 1.
pub fn orbit(curve: &BoundaryCurve, p: PhasePoint, m: usize) -> Result<Vec<ChordData>> {
    let mut out = Vec::with_capacity(m);
    let mut state = p;
    for index in 0..m {
        let (next, chord) = billiard_map(curve, state).map_err(|e| e.at_bounce(index))?;
        out.push(chord);
        state = next;
    }
    Ok(out)
}

/// B^m(p).
pub fn iterate(curve: &BoundaryCurve, p: PhasePoint, m: usize) -> Result<PhasePoint> {
    let mut state = p;
    for index in 0..m {
        state = billiard_map(curve, state).map_err(|e| e.at_bounce(index))?.0;
    }
    Ok(state)
}

/// Finite-difference Jacobian of B^m at p, rows (s', ξ'), columns (s, ξ).
pub fn map_jacobian(curve: &BoundaryCurve, p: PhasePoint, m: usize, h: f64) -> Result<[[f64; 2]; 2]> {
    let l = curve.total_length();
    let eval = |q: PhasePoint| iterate(curve, q, m);
    let sp = eval(PhasePoint::new(p.s + h, p.xi))?;
    let sm = eval(PhasePoint::new(p.s - h, p.xi))?;
    let xp = eval(PhasePoint::new(p.s, p.xi + h))?;
    let xm = eval(PhasePoint::new(p.s, p.xi - h))?;
    let ds = |a: PhasePoint, b: PhasePoint| wrap_centered(a.s - b.s, l);
    Ok([
        [ds(sp, sm) / (2.0 * h), ds(xp, xm) / (2.0 * h)],
        [(sp.xi - sm.xi) / (2.0 * h), (xp.xi - xm.xi) / (2.0 * h)],
    ])
}

/// Chord length ℓ(s, s') between two boundary points.
pub fn chord_length(curve: &BoundaryCurve, s: f64, s_prime: f64) -> f64 {
    (curve.position(s_prime) - curve.position(s)).norm()
}

/// Residuals (∂ℓ/∂s + ξ, ∂ℓ/∂s' − ξ') of the generating relations, with the
/// derivatives taken by central differences and the momenta from the map.
pub fn generating_residual(curve: &BoundaryCurve, s: f64, s_prime: f64) -> Result<(f64, f64)> {
    let l = curve.total_length();
    if wrap_centered(s_prime - s, l).abs() < 1e-9 {
        return Err(Error::DegenerateChord);
    }
    let h = 1e-5;
    let d_s = (chord_length(curve, s + h, s_prime) - chord_length(curve, s - h, s_prime)) / (2.0 * h);
    let d_sp = (chord_length(curve, s, s_prime + h) - chord_length(curve, s, s_prime - h)) / (2.0 * h);
    let from = curve.frame(s);
    let dir = curve.position(s_prime) - from.position;
    let xi = dir.dot(&from.tangent) / dir.norm();
    let (target, _) = billiard_map(curve, PhasePoint::new(s, xi))?;
    if wrap_centered(target.s - s_prime, l).abs() > 1e-8 {
        return Err(Error::NoTransversalHit { s, xi });
    }
    Ok((d_s + xi, d_sp - target.xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowoutResult {
    /// ∫_Λ ∫_0^ℓ V(chord(u)) du dμ
    pub value: f64,
    /// vol(T) = ∫_Λ ℓ dμ, summed over the bounces of the return map.
    pub volume: f64,
    /// 2 / vol(T): the potential coefficient under the A = ℓ convention.
    pub coefficient: f64,
    pub nodes: usize,
    pub est_error: f64,
}

/// Flow-out integral of a plane function over the chords issued from an
/// invariant circle of B^m.
pub fn flowout_integral<V>(curve: &BoundaryCurve, circle: &InvariantCircle, v: V, nodes: usize) -> Result<FlowoutResult>
where
    V: Fn(f64, f64) -> f64,
{
    if nodes < 4 {
        return Err(invalid("flow-out quadrature needs at least 4 nodes"));
    }
    let rule = gauss_legendre(16);
    let m = circle.period();
    let sample = |phi: f64| -> Result<(f64, f64)> {
        let mut state = circle.point(phi);
        let (mut val, mut len) = (0.0, 0.0);
        for index in 0..m {
            let (next, chord) = billiard_map(curve, state).map_err(|e| e.at_bounce(index))?;
            let a = curve.position(chord.source.s);
            let b = curve.position(chord.target.s);
            let dir = (b - a) / chord.length;
            val += gauss_integrate(|u| v(a.x + u * dir.x, a.y + u * dir.y), 0.0, chord.length, &rule, 4);
            len += chord.length;
            state = next;
        }
        Ok((val, len))
    };
    let mut sums = (0.0, 0.0, 0.0);
    for j in 0..nodes {
        let (val, len) = sample(TAU * j as f64 / nodes as f64)?;
        sums.0 += val;
        sums.1 += len;
        if j % 2 == 0 {
            sums.2 += val;
        }
    }
    let value = sums.0 / nodes as f64;
    let volume = sums.1 / nodes as f64;
    let coarse = sums.2 / nodes.div_ceil(2) as f64;
    Ok(FlowoutResult { value, volume, coefficient: 2.0 / volume, nodes, est_error: (value - coarse).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle, make_ellipse, make_fourier};
    use std::f64::consts::PI;

    #[test]
    fn circle_diameter_and_triangle() {
        let c = make_circle(1.0).unwrap();
        let (q, ch) = billiard_map(&c, PhasePoint::new(0.0, 0.0)).unwrap();
        assert!((q.s - PI).abs() < 1e-14 && q.xi.abs() < 1e-14 && (ch.length - 2.0).abs() < 1e-14);
        let (q, ch) = billiard_map(&c, PhasePoint::new(0.0, 0.5)).unwrap();
        assert!((q.s - 2.0 * PI / 3.0).abs() < 1e-13);
        assert!((q.xi - 0.5).abs() < 1e-13);
        assert!((ch.length - 3f64.sqrt()).abs() < 1e-13);
        assert_eq!(ch.action, ch.length);
    }

    #[test]
    fn ellipse_major_axis() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let (q, ch) = billiard_map(&e, PhasePoint::new(0.0, 0.0)).unwrap();
        assert!((q.s - e.total_length() / 2.0).abs() < 1e-12);
        assert!((q.s - 4.844224).abs() < 1e-6);
        assert!(q.xi.abs() < 1e-13 && (ch.length - 4.0).abs() < 1e-13);
    }

    #[test]
    fn glancing_is_rejected() {
        let c = make_circle(1.0).unwrap();
        assert!(matches!(billiard_map(&c, PhasePoint::new(0.0, 1.0 - 1e-7)), Err(Error::GlancingRay { .. })));
        assert!(billiard_map(&c, PhasePoint::new(0.0, 1.0 - 2e-6)).is_ok());
    }

    #[test]
    fn orbit_returns_and_reports_bounce() {
        let c = make_circle(1.0).unwrap();
        let o = orbit(&c, PhasePoint::new(0.0, 0.5), 3).unwrap();
        assert!(wrap_centered(o[2].target.s, TAU).abs() < 1e-12);
        let total: f64 = o.iter().map(|c| c.length).sum();
        assert!((total - 3.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fourier_sweep_agrees_with_ellipse_like_geometry() {
        let f = make_fourier(&[1.0, 0.0, 0.0, 0.05, 0.0]).unwrap();
        for &xi in &[-0.999, -0.6, 0.0, 0.3, 0.9999] {
            let p = PhasePoint::new(0.7, xi);
            let (q, ch) = billiard_map(&f, p).unwrap();
            assert!((chord_length(&f, p.s, q.s) - ch.length).abs() < 1e-12);
            // reversibility
            let (back, _) = billiard_map(&f, PhasePoint::new(q.s, -q.xi)).unwrap();
            assert!(wrap_centered(back.s - p.s, f.total_length()).abs() < 1e-10);
            assert!((back.xi + xi).abs() < 1e-10);
        }
    }

    #[test]
    fn generating_relations_on_circle() {
        let c = make_circle(1.0).unwrap();
        let (r1, r2) = generating_residual(&c, 0.0, 2.0 * PI / 3.0).unwrap();
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8);
        assert!(matches!(generating_residual(&c, 1.0, 1.0), Err(Error::DegenerateChord)));
    }

    #[test]
    fn area_preservation_on_ellipse() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        for &(s, xi) in &[(0.3, 0.2), (2.0, -0.7), (5.0, 0.95)] {
            let j = map_jacobian(&e, PhasePoint::new(s, xi), 1, 1e-6).unwrap();
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert!((det - 1.0).abs() < 1e-6, "det {det}");
        }
    }
}
