//! Dimension counts, exponential bases, special exponentials, the
//! κ-expansion and the spectrum of the integration operator.

mod special;
mod spectrum;

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

pub use special::{
    kappa_expansion, level_combination, positive_specials, special_basis_rank, special_exponential,
    KappaExpansion, LevelCombination, SpecialExponential,
};
pub use spectrum::{integration_spectrum, SpectrumReport};

use crate::calculus::{derivative, epsilon, DerivativeGauge, VertexFunction};
use crate::error::{Error, Result};
use crate::exponentials::ExpField;
use crate::linalg::{self, CMatrix, CVector, RankInfo};
use crate::map::CriticalMap;

/// A basis parameter: a finite `λ` or the point at infinity (`Exp(∞) = ε`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExpParam {
    Finite(Complex64),
    Infinity,
}

impl fmt::Display for ExpParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpParam::Finite(z) => write!(f, "{},{}", z.re, z.im),
            ExpParam::Infinity => write!(f, "inf"),
        }
    }
}

impl ExpParam {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExpParam::Finite(z) => Some(z),
            ExpParam::Infinity => None,
        }
    }
}

/// `Exp(λ, ·)`, or `ε` for `λ = ∞`.
pub fn exp_param_function(
    map: &CriticalMap,
    field: &ExpField,
    param: ExpParam,
) -> Result<VertexFunction> {
    match param {
        ExpParam::Finite(lambda) => field.function(lambda),
        ExpParam::Infinity => Ok(epsilon(map)),
    }
}

fn to_column(f: &VertexFunction) -> CVector {
    CVector::from_column_slice(f.values())
}

/// One row per face: the coefficients of the CR residual in the vertex values.
pub fn cr_matrix(map: &CriticalMap) -> CMatrix {
    let mut m = CMatrix::zeros(map.num_faces(), map.num_vertices());
    for (k, &[x, y, xp, yp]) in map.faces().iter().enumerate() {
        let a = (map.pos(yp) - map.pos(y)).inv();
        let b = (map.pos(xp) - map.pos(x)).inv();
        m[(k, yp)] += a;
        m[(k, y)] -= a;
        m[(k, xp)] -= b;
        m[(k, x)] += b;
    }
    m
}

/// Kernel dimension of the Cauchy–Riemann system.
pub fn holomorphic_dimension(map: &CriticalMap) -> Result<usize> {
    let info = linalg::rank(&cr_matrix(map))?;
    Ok(map.num_vertices() - info.rank)
}

/// `λ_ℓ = r (2/δ) e^{2πiℓ/n}` for `ℓ = 1..=n` with `r = 0.8`, or `0.79`
/// when a parameter lands on a pole.
pub fn default_params(map: &CriticalMap, n: usize) -> Vec<ExpParam> {
    let field = ExpField::new(map);
    let poles: Vec<Complex64> = field.tracks().tracks().iter().map(|t| t.pole).collect();
    let make = |r: f64| -> Vec<Complex64> {
        (1..=n)
            .map(|l| Complex64::from_polar(r * 2.0 / map.delta(), TAU * l as f64 / n as f64))
            .collect()
    };
    let hits = |ls: &[Complex64]| {
        ls.iter().any(|l| {
            poles
                .iter()
                .any(|p| (l - p).norm() < 1e-9 * 2.0 / map.delta())
        })
    };
    let mut lambdas = make(0.8);
    if hits(&lambdas) {
        lambdas = make(0.79);
    }
    lambdas.into_iter().map(ExpParam::Finite).collect()
}

/// Random parameters near the default ring: turned by a random angle, each
/// point moved by up to a quarter of the ring spacing in angle and to a
/// radius in `[0.7, 0.9] · 2/δ`, so the points stay well separated.
pub fn jittered_params<R: Rng + ?Sized>(map: &CriticalMap, n: usize, rng: &mut R) -> Vec<ExpParam> {
    let turn = rng.gen_range(0.0..TAU);
    let step = TAU / n as f64;
    (1..=n)
        .map(|l| {
            let r = rng.gen_range(0.7..0.9) * 2.0 / map.delta();
            let angle = turn + step * l as f64 + rng.gen_range(-0.25..0.25) * step;
            ExpParam::Finite(Complex64::from_polar(r, angle))
        })
        .collect()
}

/// Evaluation matrix of a family of exponentials with its numerical rank.
#[derive(Clone, Debug)]
pub struct BasisReport {
    pub params: Vec<ExpParam>,
    /// Vertices × parameters, unscaled.
    pub matrix: CMatrix,
    /// Rank of the column-scaled matrix.
    pub rank: RankInfo,
}

impl BasisReport {
    pub fn is_full_rank(&self) -> bool {
        self.rank.rank == self.params.len()
    }
}

pub fn exp_basis(map: &CriticalMap, params: &[ExpParam]) -> Result<BasisReport> {
    let field = ExpField::new(map);
    let mut matrix = CMatrix::zeros(map.num_vertices(), params.len());
    for (j, &p) in params.iter().enumerate() {
        let f = exp_param_function(map, &field, p)?;
        matrix.set_column(j, &to_column(&f));
    }
    let rank = linalg::rank_unchecked(&linalg::scale_columns(&matrix).0);
    Ok(BasisReport {
        params: params.to_vec(),
        matrix,
        rank,
    })
}

/// Coordinates of one exponential on a basis.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub coeffs: Vec<Complex64>,
    /// `‖Σ μ_ℓ Exp(λ_ℓ) - Exp(λ0)‖∞`.
    pub residual: f64,
    /// `‖Exp(λ0)‖∞`.
    pub target_norm: f64,
}

/// Least-squares coordinates of `target` on the basis columns.
pub fn expand_function(basis: &BasisReport, target: &VertexFunction) -> Result<Expansion> {
    if !basis.is_full_rank() {
        return Err(Error::RankDeficientBasis {
            rank: basis.rank.rank,
            size: basis.params.len(),
        });
    }
    let b = to_column(target);
    let x = linalg::lstsq_scaled(&basis.matrix, &b);
    let residual = linalg::sup_norm(&(&basis.matrix * &x - &b));
    Ok(Expansion {
        coeffs: x.iter().copied().collect(),
        residual,
        target_norm: target.sup_norm(),
    })
}

pub fn expand_exp(map: &CriticalMap, lambda0: ExpParam, basis: &BasisReport) -> Result<Expansion> {
    let field = ExpField::new(map);
    expand_function(basis, &exp_param_function(map, &field, lambda0)?)
}

/// Coordinates of `ε` from those of `Exp(λ0)`:
/// proportional to `(λ0 - λ_ℓ) μ_ℓ(λ0)`, normalised to sum 1.
pub fn epsilon_coeffs(
    lambda0: Complex64,
    mu0: &[Complex64],
    lambdas: &[Complex64],
) -> Result<Vec<Complex64>> {
    let w: Vec<Complex64> = mu0
        .iter()
        .zip(lambdas)
        .map(|(m, l)| (lambda0 - l) * m)
        .collect();
    normalise(w)
}

fn normalise(w: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let s: Complex64 = w.iter().sum();
    if s.norm() < 1e-12 {
        return Err(Error::DegeneratePrefactor(s.norm()));
    }
    Ok(w.into_iter().map(|x| x / s).collect())
}

/// Coordinates of `Exp(λ)` from those of `Exp(λ0)`: proportional to
/// `(λ0 - λ_ℓ)/(λ - λ_ℓ) μ_ℓ(λ0)`, normalised to sum 1.
pub fn closed_form_coeffs(
    lambda: Complex64,
    lambda0: Complex64,
    mu0: &[Complex64],
    lambdas: &[Complex64],
) -> Result<Vec<Complex64>> {
    if let Some(m) = lambdas.iter().position(|&l| l == lambda) {
        let mut unit = vec![Complex64::new(0.0, 0.0); lambdas.len()];
        unit[m] = Complex64::new(1.0, 0.0);
        return Ok(unit);
    }
    let w = mu0
        .iter()
        .zip(lambdas)
        .map(|(m, l)| (lambda0 - l) / (lambda - l) * m)
        .collect();
    normalise(w)
}

/// The rational function `f_Z` with `Exp(λ)' = λ Exp(λ) - f_Z(λ) ε` for a
/// given derivative gauge, interpolated from its values on a basis.
#[derive(Clone, Debug)]
pub struct DerivationNormalization {
    map: CriticalMap,
    basis: BasisReport,
    lambdas: Vec<Complex64>,
    /// `f_Z(λ_ℓ)`.
    pub values: Vec<Complex64>,
    pub gauge: DerivativeGauge,
}

/// Best constant `c` with `f ≈ c g` in the least-squares sense.
fn proportionality(f: &VertexFunction, g: &VertexFunction) -> Complex64 {
    let num: Complex64 = g
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let den: f64 = g.values().iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// `f_Z(λ)` fixed by the gauge: `(λ Exp(λ) - Exp(λ)') / ε`.
pub fn derivative_defect(
    map: &CriticalMap,
    lambda: Complex64,
    gauge: DerivativeGauge,
) -> Result<Complex64> {
    let field = ExpField::new(map);
    let e = field.function(lambda)?;
    let d = derivative(map, &e, gauge, 1e-9)?;
    Ok(proportionality(&e.scale(lambda).sub(&d), &epsilon(map)))
}

pub fn derivation_normalization(
    map: &CriticalMap,
    params: &[ExpParam],
    gauge: DerivativeGauge,
) -> Result<DerivationNormalization> {
    let lambdas: Vec<Complex64> = params
        .iter()
        .map(|p| {
            p.finite()
                .ok_or_else(|| Error::InvalidArgument("infinite basis parameter".into()))
        })
        .collect::<Result<_>>()?;
    let basis = exp_basis(map, params)?;
    if !basis.is_full_rank() {
        return Err(Error::RankDeficientBasis {
            rank: basis.rank.rank,
            size: params.len(),
        });
    }
    let values = lambdas
        .iter()
        .map(|&l| derivative_defect(map, l, gauge))
        .collect::<Result<_>>()?;
    Ok(DerivationNormalization {
        map: map.clone(),
        basis,
        lambdas,
        values,
        gauge,
    })
}

impl DerivationNormalization {
    /// `Σ μ_ℓ(λ) (λ - λ_ℓ + f_Z(λ_ℓ))`.
    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        let mu = expand_exp(&self.map, ExpParam::Finite(lambda), &self.basis)?.coeffs;
        Ok(mu
            .iter()
            .zip(&self.lambdas)
            .zip(&self.values)
            .map(|((m, l), f)| m * (lambda - l + f))
            .sum())
    }
}
