//! Discretized Radon operator of a Liouville table on symmetric boundary
//! functions, its singular values, a truncated-SVD inversion and the
//! rotation profile of the rotational circles.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::billiard::PhasePoint;
use crate::error::{invalid, Error, Result};
use crate::geometry::LiouvilleTable;
use crate::radon::{classify, liouville_radon, rotational_seed, BoundaryFunction};
use crate::tori::{return_orbit, rotation_number_on, RotationData};

/// cos(2jx), invariant under x ↦ −x and x ↦ π − x.
pub fn symmetric_basis(j: usize) -> BoundaryFunction {
    let w = 2.0 * j as f64;
    BoundaryFunction::in_x(move |x| (w * x).cos())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadonMatrix {
    pub h_grid: Vec<f64>,
    /// Frequencies 2j of the basis columns.
    pub basis: Vec<usize>,
    #[serde(serialize_with = "ser_matrix")]
    pub entries: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

impl RadonMatrix {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Forward image of Σ_j coeffs[j] cos(2jx).
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.basis.len() {
            return Err(invalid(format!("expected {} coefficients, got {}", self.basis.len(), coeffs.len())));
        }
        Ok((&self.entries * DVector::from_column_slice(coeffs)).iter().copied().collect())
    }
}

fn check_levels(table: &LiouvilleTable, h_grid: &[f64]) -> Result<()> {
    h_grid.iter().try_for_each(|&h| classify(table, h).map(|_| ()))
}

fn check_rotational(table: &LiouvilleTable, h_grid: &[f64]) -> Result<()> {
    let qn = table.q_boundary();
    if let Some(&h) = h_grid.iter().find(|&&h| !(h > qn && h < 0.0)) {
        return Err(Error::HOutOfRange { h, lo: qn, hi: 0.0 });
    }
    Ok(())
}

/// R[i][j] = R_{cos 2jx}(Λ⁺(h_i)), j < J. Levels may mix the rotational
/// branch (q(N), 0) and the two-bounce branch (0, max f).
pub fn radon_matrix(table: &LiouvilleTable, h_grid: &[f64], j_count: usize) -> Result<RadonMatrix> {
    check_levels(table, h_grid)?;
    if j_count == 0 || j_count > h_grid.len() {
        return Err(invalid(format!("need 1 <= J <= {} basis functions, got {j_count}", h_grid.len())));
    }
    if !h_grid.windows(2).all(|w| w[1] > w[0]) && !h_grid.windows(2).all(|w| w[1] < w[0]) {
        return Err(invalid("h grid must be strictly monotone"));
    }
    let cells: Vec<(usize, usize)> = (0..h_grid.len()).flat_map(|i| (0..j_count).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| liouville_radon(table, &symmetric_basis(j), h_grid[i]).map(|r| r.plus))
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_row_slice(h_grid.len(), j_count, &values);
    let singular_values = entries.clone().svd(false, false).singular_values.iter().copied().collect();
    Ok(RadonMatrix { h_grid: h_grid.to_vec(), basis: (0..j_count).map(|j| 2 * j).collect(), entries, singular_values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub effective_rank: usize,
    pub threshold: f64,
    pub singular_values: Vec<f64>,
}

/// Minimum-norm solution keeping singular values above reg·σ_max.
pub fn invert_radon(matrix: &RadonMatrix, data: &[f64], reg: f64) -> Result<Reconstruction> {
    if data.len() != matrix.h_grid.len() {
        return Err(invalid(format!("data has {} values for {} grid points", data.len(), matrix.h_grid.len())));
    }
    if !(reg >= 0.0) {
        return Err(invalid("regularization must be non-negative"));
    }
    let svd = matrix.entries.clone().svd(true, true);
    let threshold = reg * svd.singular_values.max();
    let effective_rank = svd.singular_values.iter().filter(|&&s| s > threshold).count();
    if effective_rank == 0 {
        return Err(Error::RankDeficient { threshold });
    }
    let rhs = DVector::from_column_slice(data);
    let x = svd.solve(&rhs, threshold).map_err(|e| invalid(e.to_string()))?;
    let residual = (&matrix.entries * &x - &rhs).norm();
    Ok(Reconstruction {
        coefficients: x.iter().copied().collect(),
        residual,
        effective_rank,
        threshold,
        singular_values: matrix.singular_values.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationProfile {
    pub h: Vec<f64>,
    pub rotation: Vec<RotationData>,
    pub strictly_increasing: bool,
    pub strictly_decreasing: bool,
}

impl RotationProfile {
    pub fn monotone(&self) -> bool {
        self.strictly_increasing || self.strictly_decreasing
    }
}

/// Rotation numbers of the rotational circles I = h (ξ > 0) from orbits of
/// `orbit_len` bounces.
pub fn rotation_profile(table: &LiouvilleTable, h_grid: &[f64], orbit_len: usize) -> Result<RotationProfile> {
    check_rotational(table, h_grid)?;
    let curve = table.boundary_curve()?;
    let rotation: Vec<RotationData> = h_grid
        .par_iter()
        .map(|&h| {
            let seed: PhasePoint = rotational_seed(table, h)?;
            let orbit = return_orbit(&curve, seed, orbit_len, 1)?;
            rotation_number_on(&curve, &orbit, 1e-8)
        })
        .collect::<Result<_>>()?;
    let rho: Vec<f64> = rotation.iter().map(|r| r.omega).collect();
    Ok(RotationProfile {
        h: h_grid.to_vec(),
        strictly_increasing: rho.windows(2).all(|w| w[1] > w[0]),
        strictly_decreasing: rho.windows(2).all(|w| w[1] < w[0]),
        rotation,
    })
}

/// n rotational levels spread uniformly over (q(N) + lo·|q(N)|, q(N) + hi·|q(N)|).
pub fn rotational_h_grid(table: &LiouvilleTable, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let qn = table.q_boundary();
    spread(qn + lo * qn.abs(), qn + hi * qn.abs(), n)
}

/// n two-bounce levels spread uniformly over (lo·max f, hi·max f).
///
/// Rotational rows are close to geometric sequences in j and make the matrix
/// numerically singular beyond a handful of columns; two-bounce rows
/// integrate over level-dependent sub-intervals and stay well conditioned.
pub fn two_bounce_h_grid(table: &LiouvilleTable, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let top = table.f(0.5 * std::f64::consts::PI);
    spread(lo * top, hi * top, n)
}

fn spread(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n.max(2) - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> LiouvilleTable {
        LiouvilleTable::ellipse_family(1.0, 1.0).unwrap()
    }

    #[test]
    fn basis_is_symmetric() {
        for j in 0..6 {
            let k = symmetric_basis(j);
            for i in 0..50 {
                let x = 0.13 * i as f64;
                let v = k.eval_x(x).unwrap();
                assert!((k.eval_x(-x).unwrap() - v).abs() < 1e-12);
                assert!((k.eval_x(std::f64::consts::PI - x).unwrap() - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_column_is_the_constant_profile() {
        let t = table();
        let grid = rotational_h_grid(&t, 5, 0.1, 0.9);
        let m = radon_matrix(&t, &grid, 1).unwrap();
        for (i, h) in grid.iter().enumerate() {
            let direct = liouville_radon(&t, &BoundaryFunction::constant(1.0), *h).unwrap().plus;
            assert!(m.entries[(i, 0)] > 0.0);
            assert!((m.entries[(i, 0)] - direct).abs() < 1e-12 * direct);
        }
        assert!(radon_matrix(&t, &grid, 6).is_err());
        assert!(matches!(radon_matrix(&t, &[0.0], 1), Err(Error::HOutOfRange { .. })));
        assert!(matches!(radon_matrix(&t, &[1.5], 1), Err(Error::HOutOfRange { .. })));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let t = table();
        let grid = two_bounce_h_grid(&t, 6, 0.1, 0.9);
        let m = radon_matrix(&t, &grid, 4).unwrap();
        let r = invert_radon(&m, &[0.0; 6], 1e-10).unwrap();
        assert!(r.coefficients.iter().all(|c| *c == 0.0));
        assert!(matches!(invert_radon(&m, &[0.0; 6], 2.0), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn two_bounce_levels_are_well_conditioned() {
        let t = table();
        let m = radon_matrix(&t, &two_bounce_h_grid(&t, 12, 0.02, 0.98), 12).unwrap();
        let rot = radon_matrix(&t, &rotational_h_grid(&t, 12, 0.05, 0.95), 12).unwrap();
        assert!(m.sigma_min() / m.sigma_max() > 1e-8);
        assert!(rot.sigma_min() / rot.sigma_max() < 1e-12);
    }

    #[test]
    fn profile_detects_duplicates_and_range() {
        let t = table();
        let h = 0.5 * t.q_boundary();
        let p = rotation_profile(&t, &[h, h], 2000).unwrap();
        assert_eq!(p.rotation[0].omega, p.rotation[1].omega);
        assert!(!p.monotone());
        assert!(rotation_profile(&t, &[0.2], 2000).is_err());
    }
}
