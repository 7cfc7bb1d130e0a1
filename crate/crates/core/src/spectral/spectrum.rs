use num_complex::Complex64;

use super::to_column;
use crate::calculus::{epsilon, integrate_function, scaled_monomials, VertexFunction};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::map::CriticalMap;

/// Roots closer than this (in units of `δ`) are merged into one eigenvalue.
const CLUSTER_RADIUS: f64 = 5e-2;

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Degree of the minimal relation `Σ_{k=1..n} a_k Z^{:k:} = 0`.
    pub n: usize,
    /// `a_1..a_n`, normalised to `a_1 = 1`.
    pub a: Vec<Complex64>,
    /// Companion matrix of `Q(λ)/λ = Σ k! a_k λ^{k-1}` (monic form).
    pub companion: CMatrix,
    /// Distinct roots of `Q`, including 0, sorted by real then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    /// Coefficients of each eigenvector in the basis `Z^{:k:}/k!`, `k < n`.
    pub eigenvector_coeffs: Vec<Vec<Complex64>>,
    /// Eigenvectors normalised to unit sup-norm.
    pub eigenvectors: Vec<VertexFunction>,
    /// `‖Int v - λ v‖∞` per eigenpair.
    pub residuals: Vec<f64>,
    /// `‖Σ a_k Z^{:k:}‖∞`.
    pub relation_residual: f64,
}

/// Single-linkage clustering of `roots` with the given radius; returns the
/// cluster means and sizes.
fn cluster(roots: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..n {
            if (roots[i] - roots[j]).norm() < radius && label[j] != label[i] {
                let (keep, drop) = (label[i].min(label[j]), label[i].max(label[j]));
                for l in label.iter_mut() {
                    if *l == drop {
                        *l = keep;
                    }
                }
            }
        }
    }
    let mut ids: Vec<usize> = label.clone();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let members: Vec<Complex64> = (0..n)
                .filter(|&i| label[i] == id)
                .map(|i| roots[i])
                .collect();
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            (mean, members.len())
        })
        .collect()
}

pub fn integration_spectrum(map: &CriticalMap) -> Result<SpectrumReport> {
    let max_degree = map.expected_dimension() + 1;
    let u = scaled_monomials(map, max_degree);
    // smallest n with u_1..u_n dependent
    let mut found = None;
    for n in 1..=max_degree {
        let m = CMatrix::from_fn(map.num_vertices(), n, |v, j| u[j + 1][v]);
        let (scaled, scales) = linalg::scale_columns(&m);
        let info = linalg::rank_unchecked(&scaled);
        if info.gap < linalg::GAP_RATIO {
            return Err(Error::IllConditionedMinimalPolynomial { gap: info.gap });
        }
        if info.rank < n {
            let null = linalg::nullspace(&scaled, n - 1);
            let b: Vec<Complex64> = (0..n).map(|j| null[(j, 0)] / scales[j]).collect();
            found = Some(b);
            break;
        }
    }
    let b = found.ok_or_else(|| Error::NoSolution("no monomial relation found".into()))?;
    let n = b.len();
    if b[0].norm() == 0.0 {
        return Err(Error::IllConditionedMinimalPolynomial { gap: 0.0 });
    }
    // b_k = k! a_k with b_1 = a_1 = 1
    let b: Vec<Complex64> = b.iter().map(|x| x / b[0]).collect();
    let mut fact = 1.0;
    let a: Vec<Complex64> = b
        .iter()
        .enumerate()
        .map(|(k, x)| {
            fact *= (k + 1) as f64;
            x / fact
        })
        .collect();
    let relation = (0..n).fold(
        VertexFunction(vec![Complex64::new(0.0, 0.0); map.num_vertices()]),
        |acc, k| acc.add(&u[k + 1].scale(b[k])),
    );
    let relation_residual = relation.sup_norm();

    // Q(λ)/λ = Σ_{k=1..n} b_k λ^{k-1}, degree n-1
    let deg = n - 1;
    let mut companion = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -b[i] / b[deg];
    }
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    if deg > 0 {
        let eig = companion
            .clone()
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::NoSolution("eigenvalue iteration failed".into()))?;
        roots.extend(eig.iter().copied());
    }
    let mut clusters = cluster(&roots, CLUSTER_RADIUS * map.delta());
    clusters.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    let mut eigenvector_coeffs = Vec::new();
    let mut eigenvectors = Vec::new();
    let mut residuals = Vec::new();
    for (lambda, mult) in clusters {
        let (coeffs, v) = if lambda.norm() < CLUSTER_RADIUS * map.delta() {
            let eps = epsilon(map);
            let coeffs = linalg::lstsq(
                &CMatrix::from_fn(map.num_vertices(), n, |v, j| u[j][v]),
                &to_column(&eps),
            );
            (coeffs.iter().copied().collect::<Vec<_>>(), eps)
        } else {
            // Σ_k (Σ_{l>k} l! a_l λ^{l-k-1}) Z^{:k:}/k!
            let coeffs: Vec<Complex64> = (0..n)
                .map(|k| {
                    (k + 1..=n)
                        .map(|l| b[l - 1] * lambda.powi((l - k - 1) as i32))
                        .sum()
                })
                .collect();
            let v = (0..n).fold(
                VertexFunction(vec![Complex64::new(0.0, 0.0); map.num_vertices()]),
                |acc, k| acc.add(&u[k].scale(coeffs[k])),
            );
            (coeffs, v)
        };
        let norm = v.sup_norm();
        let v = v.scale(Complex64::new(1.0 / norm, 0.0));
        let lambda = if lambda.norm() < CLUSTER_RADIUS * map.delta() {
            Complex64::new(0.0, 0.0)
        } else {
            lambda
        };
        let iv = integrate_function(map, &v, f64::INFINITY)?;
        residuals.push(iv.distance(&v.scale(lambda)));
        eigenvalues.push(lambda);
        multiplicities.push(mult);
        eigenvector_coeffs.push(coeffs);
        eigenvectors.push(v);
    }
    Ok(SpectrumReport {
        n,
        a,
        companion,
        eigenvalues,
        multiplicities,
        eigenvector_coeffs,
        eigenvectors,
        residuals,
        relation_residual,
    })
}
