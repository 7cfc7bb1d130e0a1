//! Small dense linear-algebra helpers over complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Singular values below `RANK_THRESHOLD · σ_max` are dropped.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Required ratio between the smallest kept and the largest dropped
/// singular value.
pub const GAP_RATIO: f64 = 1e6;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Smallest kept over largest dropped singular value. When nothing is
    /// dropped this is `σ_min / (σ_max · ε_machine · max(m, n))`.
    pub gap: f64,
}

/// Divides every column by its largest modulus; returns the scales.
pub fn scale_columns(m: &CMatrix) -> (CMatrix, Vec<f64>) {
    let mut out = m.clone();
    let mut scales = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let s = m.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = if s > 0.0 { s } else { 1.0 };
        out.column_mut(j).unscale_mut(s);
        scales.push(s);
    }
    (out, scales)
}

/// Singular values with zero rows appended so that there are at least as
/// many rows as columns.
fn padded(m: &CMatrix) -> CMatrix {
    if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = CMatrix::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    }
}

/// Numerical rank with the gap test; fails with `RankAmbiguous`.
pub fn rank(m: &CMatrix) -> Result<RankInfo> {
    let info = rank_unchecked(m);
    if info.gap < GAP_RATIO {
        return Err(Error::RankAmbiguous { gap: info.gap });
    }
    Ok(info)
}

/// Numerical rank and gap without the gap test.
pub fn rank_unchecked(m: &CMatrix) -> RankInfo {
    if m.ncols() == 0 || m.nrows() == 0 {
        return RankInfo {
            rank: 0,
            singular_values: Vec::new(),
            gap: f64::INFINITY,
        };
    }
    let sv: Vec<f64> = padded(m)
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    let sv: Vec<f64> = sv.into_iter().take(m.nrows().min(m.ncols())).collect();
    let max = sv[0];
    if max == 0.0 {
        return RankInfo {
            rank: 0,
            singular_values: sv,
            gap: f64::INFINITY,
        };
    }
    let rank = sv.iter().take_while(|&&s| s > RANK_THRESHOLD * max).count();
    let gap = if rank == sv.len() {
        let floor = max * f64::EPSILON * m.nrows().max(m.ncols()) as f64;
        sv[rank - 1] / floor
    } else if rank == 0 {
        f64::INFINITY
    } else if sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    RankInfo {
        rank,
        singular_values: sv,
        gap,
    }
}

/// Least-squares solution of `m x = b` (minimum norm).
pub fn lstsq(m: &CMatrix, b: &CVector) -> CVector {
    if m.ncols() == 0 {
        return CVector::zeros(0);
    }
    let svd = padded(m).svd(true, true);
    let mut rhs = CVector::zeros(svd.u.as_ref().unwrap().nrows());
    rhs.rows_mut(0, b.len()).copy_from(b);
    let max = svd.singular_values[0];
    svd.solve(&rhs, RANK_THRESHOLD * max)
        .expect("svd with u and v")
}

/// Least squares after scaling columns; returns the solution in the
/// original column units.
pub fn lstsq_scaled(m: &CMatrix, b: &CVector) -> CVector {
    let (s, scales) = scale_columns(m);
    let mut x = lstsq(&s, b);
    for (xi, sc) in x.iter_mut().zip(scales) {
        *xi /= sc;
    }
    x
}

/// Orthonormal basis of the numerical null space (columns).
pub fn nullspace(m: &CMatrix, rank: usize) -> CMatrix {
    let n = m.ncols();
    let p = padded(m);
    let svd = p.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let mut out = CMatrix::zeros(n, n - rank);
    for (k, row) in (rank..n).enumerate() {
        for j in 0..n {
            out[(j, k)] = v_t[(row, j)].conj();
        }
    }
    out
}

/// Orthonormal basis of the column space of `m` with the given rank.
pub fn column_space(m: &CMatrix, rank: usize) -> CMatrix {
    let svd = padded(m).svd(true, false);
    let u = svd.u.unwrap();
    u.view((0, 0), (m.nrows(), rank)).into_owned()
}

pub fn sup_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_of_dependent_columns() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 0.),
                c(2., 0.),
                c(3., 1.),
                c(0., 1.),
                c(0., 2.),
                c(1., 0.),
                c(1., 1.),
                c(2., 2.),
                c(0., 0.),
            ],
        );
        let info = rank(&m).unwrap();
        assert_eq!(info.rank, 2);
        let ns = nullspace(&m, 2);
        assert!((&m * ns.column(0)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn wide_matrix_nullspace() {
        let m = CMatrix::from_row_slice(1, 3, &[c(1., 0.), c(1., 0.), c(0., 1.)]);
        assert_eq!(rank(&m).unwrap().rank, 1);
        let ns = nullspace(&m, 1);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn least_squares_recovers_solution() {
        let m = CMatrix::from_row_slice(
            3,
            2,
            &[
                c(1., 0.),
                c(0., 0.),
                c(0., 0.),
                c(1e6, 0.),
                c(1., 1.),
                c(0., 0.),
            ],
        );
        let x = CVector::from_vec(vec![c(2., -1.), c(0., 3e-6)]);
        let b = &m * &x;
        let got = lstsq_scaled(&m, &b);
        assert!((got - x).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn ambiguous_gap_is_reported() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(1., 0.),
            c(1e-7, 0.),
            c(1e-12, 0.),
        ]));
        assert!(matches!(rank(&m), Err(Error::RankAmbiguous { .. })));
    }
}
