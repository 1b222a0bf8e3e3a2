//! Integer-order Bessel functions and their zeros, used as the exact
//! Dirichlet spectrum of the unit disk.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::brent;

/// J_m(x) = (1/π) ∫₀^π cos(mτ − x sin τ) dτ by the trapezoid rule, which is
/// spectrally accurate once the node count exceeds x + m.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    let n = (x.abs() + m as f64) as usize + 64;
    let h = PI / n as f64;
    let mut sum = 0.5 * (1.0 + (m as f64 * PI - x * PI.sin()).cos());
    for i in 1..n {
        let t = h * i as f64;
        sum += (m as f64 * t - x * t.sin()).cos();
    }
    sum * h / PI
}

/// All positive zeros of J_m below `x_max`, in increasing order.
pub fn bessel_zeros(m: u32, x_max: f64) -> Result<Vec<f64>> {
    const STEP: f64 = 0.1;
    let mut out = Vec::new();
    // J_m has no zeros in (0, m]
    let mut a = (m as f64).max(STEP);
    let mut fa = bessel_j(m, a);
    while a < x_max {
        let b = (a + STEP).min(x_max);
        let fb = bessel_j(m, b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            let z = brent(|x| bessel_j(m, x), a, b, 1e-15)
                .map_err(|e| Error::OracleFailure(format!("bessel zero of order {m} near {a}: {e}")))?;
            out.push(z);
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

/// j_{m,p}, p ≥ 1.
pub fn bessel_zero(m: u32, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::OracleFailure("zero index p starts at 1".into()));
    }
    // McMahon-type upper bound on j_{m,p}
    let bound = m as f64 + PI * (p as f64 + 0.5 * m as f64 + 1.0) + 10.0;
    bessel_zeros(m, bound)?
        .get(p - 1)
        .copied()
        .ok_or_else(|| Error::OracleFailure(format!("j_{{{m},{p}}} not bracketed below {bound}")))
}

/// Dirichlet eigenvalues j_{m,p}² ≤ lambda_max of the unit disk, with
/// multiplicity 2 for m ≥ 1, sorted.
pub fn disk_dirichlet_spectrum(lambda_max: f64) -> Result<Vec<f64>> {
    let x_max = lambda_max.sqrt();
    let mut out = Vec::new();
    let mut m = 0u32;
    while (m as f64) < x_max {
        let zeros = bessel_zeros(m, x_max)?;
        for z in zeros {
            let lam = z * z;
            out.push(lam);
            if m > 0 {
                out.push(lam);
            }
        }
        m += 1;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_4).abs() < 1e-15);
        assert!((bessel_zero(0, 1).unwrap() - 2.404_825_557_695_773).abs() < 1e-13);
        assert!((bessel_zero(1, 1).unwrap() - 3.831_705_970_207_512).abs() < 1e-13);
        assert!((bessel_zero(0, 2).unwrap() - 5.520_078_110_286_311).abs() < 1e-13);
    }

    #[test]
    fn high_order_zero() {
        let z = bessel_zero(50, 1).unwrap();
        assert!((z - 57.116_899_160_119_18).abs() < 1e-10, "{z}");
        assert!((z - 57.1173).abs() < 5e-4);
    }

    #[test]
    fn recurrence_holds() {
        // J_{m-1} + J_{m+1} = (2m/x) J_m
        for m in 1..30 {
            let x = 7.3 + m as f64 * 0.9;
            let lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x);
            let rhs = 2.0 * m as f64 / x * bessel_j(m, x);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_counts() {
        let spec = disk_dirichlet_spectrum(100.0).unwrap();
        assert!((spec[0] - 2.404_825_557_695_773f64.powi(2)).abs() < 1e-11);
        assert_eq!(spec[1], spec[2]);
        assert!(spec.windows(2).all(|w| w[0] <= w[1]));
    }
}
