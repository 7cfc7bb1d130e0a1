use std::collections::VecDeque;

use num_complex::Complex64;

use super::{default_params, exp_basis, to_column};
use crate::calculus::{cr_residual, VertexFunction};
use crate::error::{Error, Result};
use crate::exponentials::ExpField;
use crate::linalg::{self, CMatrix, CVector};
use crate::map::CriticalMap;
use crate::tracks::SlopeDecomposition;

/// Relative tolerance on the Cauchy–Riemann residual of glued functions.
const GLUE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpecialExponential {
    pub track: usize,
    pub lambda0: Complex64,
    pub values: VertexFunction,
    pub decomposition: SlopeDecomposition,
    /// Component on the terminal side of the track.
    pub home: usize,
    /// Base point of each component (its smallest vertex id).
    pub base_points: Vec<usize>,
    /// Components reachable from `home` without dropping below its level.
    pub reachable: Vec<bool>,
    /// Coefficient of the top λ-derivative `d^{d_m - d_ℓ} Exp_m` on each
    /// component (0 when unreachable). Lower derivatives also appear on
    /// components above the home level.
    pub mu: Vec<Complex64>,
    /// `max |CR residual| · δ / max(1, ‖values‖∞)`.
    pub residual: f64,
}

impl SpecialExponential {
    /// Level of the home component for the track's own slope.
    pub fn level(&self) -> i32 {
        self.decomposition.levels[self.home]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn reachable_components(dec: &SlopeDecomposition, home: usize) -> Vec<bool> {
    let floor = dec.levels[home];
    let mut seen = vec![false; dec.components.len()];
    seen[home] = true;
    let mut queue = VecDeque::from([home]);
    while let Some(m) = queue.pop_front() {
        for &(a, b) in &dec.adjacency {
            let next = if a == m {
                b
            } else if b == m {
                a
            } else {
                continue;
            };
            if !seen[next] && dec.levels[next] >= floor {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    seen
}

/// The special exponential of track `track` at `λ0 = λ(track)`.
pub fn special_exponential(
    map: &CriticalMap,
    field: &ExpField,
    track: usize,
) -> Result<SpecialExponential> {
    let tracks = field.tracks();
    let t = tracks.track(track).ok_or(Error::UnknownTrack(track))?;
    let lambda0 = t.pole;
    let dec = tracks.slope_decomposition(map, t.class);
    let home = dec.component_of[t.edges[0].1];
    let floor = dec.levels[home];
    let reachable = reachable_components(&dec, home);
    let base_points: Vec<usize> = dec.components.iter().map(|c| c[0]).collect();

    // On a component m at level d_m, (λ-λ0)^{d_m} Exp(λ, x) is regular and
    // nonzero at λ0. The h^0 coefficient of (λ-λ0)^{d_ℓ} Exp(λ, x) is
    // holomorphic in x, vanishes below level d_ℓ and restricts to a
    // multiple of Exp_ℓ(λ0) on the home component.
    let mut raw = vec![Complex64::new(0.0, 0.0); map.num_vertices()];
    let mut mu = vec![Complex64::new(0.0, 0.0); dec.components.len()];
    for (m, members) in dec.components.iter().enumerate() {
        if !reachable[m] {
            continue;
        }
        let k = (dec.levels[m] - floor) as usize;
        for &x in members {
            let jet = field.jet(lambda0, x, k + 1);
            raw[x] = jet
                .coefficient(-floor)
                .expect("jet order covers the level gap");
        }
        // coefficient of the top derivative d^k/dλ^k Exp_m
        let at_base = field.jet(lambda0, base_points[m], 1);
        mu[m] = at_base.coefficient(-dec.levels[m]).expect("order 1 jet") / factorial(k);
    }
    let scale = raw[base_points[home]];
    if scale.norm() == 0.0 {
        return Err(Error::UnderdeterminedGlue { track });
    }
    for m in mu.iter_mut() {
        *m /= scale;
    }
    let g: Vec<Complex64> = raw.iter().map(|z| z / scale).collect();
    let values = VertexFunction(g);
    let max_res = (0..map.num_faces())
        .map(|f| cr_residual(map, &values, f).norm())
        .fold(0.0, f64::max);
    let residual = max_res * map.delta() / values.sup_norm().max(1.0);
    if residual > GLUE_TOLERANCE {
        return Err(Error::InconsistentGlue { track, residual });
    }
    Ok(SpecialExponential {
        track,
        lambda0,
        values,
        decomposition: dec,
        home,
        base_points,
        reachable,
        mu,
        residual,
    })
}

/// Special exponentials of all positively oriented tracks, by track id.
pub fn positive_specials(map: &CriticalMap, field: &ExpField) -> Result<Vec<SpecialExponential>> {
    field
        .tracks()
        .tracks()
        .iter()
        .filter(|t| t.positively_oriented)
        .map(|t| special_exponential(map, field, t.id))
        .collect()
}

/// Rank of `{1} ∪ {Exp_t : t positively oriented}`.
pub fn special_basis_rank(map: &CriticalMap, field: &ExpField) -> Result<linalg::RankInfo> {
    let specials = positive_specials(map, field)?;
    let mut m = CMatrix::from_element(
        map.num_vertices(),
        specials.len() + 1,
        Complex64::new(1.0, 0.0),
    );
    for (j, s) in specials.iter().enumerate() {
        m.set_column(j + 1, &to_column(&s.values));
    }
    linalg::rank(&linalg::scale_columns(&m).0)
}

#[derive(Clone, Debug)]
pub struct LevelCombination {
    pub tracks: Vec<usize>,
    /// Coefficients, scaled so that the largest has modulus 1 and is real.
    pub pi: Vec<Complex64>,
    /// Distance of the combination to the span of plain exponentials,
    /// relative to its sup-norm.
    pub residual: f64,
}

/// Orthonormal basis of the span of plain exponentials, from `2n`
/// parameters on two circles.
fn exponential_span(map: &CriticalMap) -> Result<CMatrix> {
    let n = map.expected_dimension();
    let mut params = default_params(map, n);
    let inner = default_params(map, n)
        .into_iter()
        .map(|p| {
            let z = p.finite().unwrap();
            super::ExpParam::Finite(z * Complex64::from_polar(0.6, std::f64::consts::PI / n as f64))
        })
        .collect::<Vec<_>>();
    params.extend(inner);
    let basis = exp_basis(map, &params)?;
    let scaled = linalg::scale_columns(&basis.matrix).0;
    Ok(linalg::column_space(&scaled, basis.rank.rank))
}

/// Threshold below which a projected unit column counts as zero.
const SPAN_TOLERANCE: f64 = 1e-8;

/// Combination of the special exponentials of slope class `class` at level
/// `level` that lies in the span of plain exponentials.
pub fn level_combination(
    map: &CriticalMap,
    field: &ExpField,
    class: usize,
    level: i32,
) -> Result<LevelCombination> {
    let tracks = field.tracks();
    let dec = tracks.slope_decomposition(map, class);
    let members: Vec<usize> = tracks
        .tracks()
        .iter()
        .filter(|t| t.class == class && dec.levels[dec.component_of[t.edges[0].1]] == level)
        .map(|t| t.id)
        .collect();
    if members.is_empty() {
        return Err(Error::NoSolution(format!(
            "no track of this slope at level {level}"
        )));
    }
    let specials: Vec<VertexFunction> = members
        .iter()
        .map(|&t| special_exponential(map, field, t).map(|s| s.values))
        .collect::<Result<_>>()?;
    let q = exponential_span(map)?;
    let mut cols = CMatrix::zeros(map.num_vertices(), members.len());
    for (j, s) in specials.iter().enumerate() {
        let v = to_column(s);
        let v = &v / Complex64::new(linalg::sup_norm(&v).max(f64::MIN_POSITIVE), 0.0);
        let projected = &v - &q * (q.adjoint() * &v);
        cols.set_column(j, &projected);
    }
    let info = linalg::rank_unchecked(&cols);
    let numeric_rank = info
        .singular_values
        .iter()
        .filter(|&&s| s > SPAN_TOLERANCE)
        .count();
    let null = members.len() - numeric_rank;
    if null != 1 {
        return Err(Error::NoSolution(format!(
            "{null}-dimensional solution space"
        )));
    }
    let v = linalg::nullspace(&cols, numeric_rank);
    // undo the unit scaling of the columns
    let mut pi: Vec<Complex64> = (0..members.len())
        .map(|j| v[(j, 0)] / specials[j].sup_norm().max(f64::MIN_POSITIVE))
        .collect();
    let big = *pi
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    for p in pi.iter_mut() {
        *p /= big;
    }
    let combo = specials.iter().zip(&pi).fold(
        VertexFunction(vec![Complex64::new(0.0, 0.0); map.num_vertices()]),
        |acc, (s, p)| acc.add(&s.scale(*p)),
    );
    let v = to_column(&combo);
    let residual =
        linalg::sup_norm(&(&v - &q * (q.adjoint() * &v))) / combo.sup_norm().max(f64::MIN_POSITIVE);
    Ok(LevelCombination {
        tracks: members,
        pi,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct KappaExpansion {
    pub mu: Complex64,
    /// Positively oriented tracks in peeling order.
    pub tracks: Vec<usize>,
    /// `κ_t` in the order of `tracks`, from the triangular peeling.
    pub kappa: Vec<Complex64>,
    /// `κ_t` from one global least-squares solve.
    pub kappa_global: Vec<Complex64>,
    /// `‖1 + Σ κ_t (μ-λ(t))^{-d_t} Exp_t - Exp(μ)‖∞ / max(1, ‖Exp(μ)‖∞)`.
    pub residual: f64,
    pub global_residual: f64,
}

/// `Exp(μ) = 1 + Σ_t κ_t (μ - λ(t))^{-d_t} Exp_t(λ(t))` over positively
/// oriented tracks.
pub fn kappa_expansion(
    map: &CriticalMap,
    field: &ExpField,
    mu: Complex64,
) -> Result<KappaExpansion> {
    let target = field.function(mu)?;
    let specials = positive_specials(map, field)?;
    let dist = map.distances();
    // peel tracks by the distance at which they are first crossed
    let mut order: Vec<(usize, usize, usize)> = specials
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = field.tracks().track(s.track).unwrap();
            let (d, x) = t
                .edges
                .iter()
                .filter_map(|&(a, b)| match (dist[a], dist[b]) {
                    (Some(da), Some(db)) if db == da + 1 => Some((db, b)),
                    _ => None,
                })
                .min()
                .expect("positively oriented track is crossed by a shortest path");
            (d, x, i)
        })
        .collect();
    order.sort_unstable();
    let columns: Vec<VertexFunction> = order
        .iter()
        .map(|&(_, _, i)| {
            let s = &specials[i];
            let scale = (mu - s.lambda0).powi(-s.level());
            s.values.scale(scale)
        })
        .collect();
    let mut kappa = Vec::with_capacity(order.len());
    for (j, &(_, x, i)) in order.iter().enumerate() {
        let known: Complex64 = (0..j).map(|u| kappa[u] * columns[u][x]).sum();
        let pivot = columns[j][x];
        if pivot.norm() == 0.0 {
            return Err(Error::RankDeficientSpecials(format!(
                "track {} vanishes at its own vertex",
                specials[i].track
            )));
        }
        kappa.push((target[x] - 1.0 - known) / pivot);
    }
    let rebuild = |k: &[Complex64]| {
        let mut f = VertexFunction(vec![Complex64::new(1.0, 0.0); map.num_vertices()]);
        for (c, col) in k.iter().zip(&columns) {
            f = f.add(&col.scale(*c));
        }
        f.distance(&target) / target.sup_norm().max(1.0)
    };
    let residual = rebuild(&kappa);

    let a = CMatrix::from_fn(map.num_vertices(), columns.len(), |v, j| columns[j][v]);
    let info = linalg::rank_unchecked(&linalg::scale_columns(&a).0);
    if info.rank < columns.len() {
        return Err(Error::RankDeficientSpecials(format!(
            "rank {} of {}",
            info.rank,
            columns.len()
        )));
    }
    let b = CVector::from_fn(map.num_vertices(), |v, _| target[v] - 1.0);
    let kappa_global: Vec<Complex64> = linalg::lstsq_scaled(&a, &b).iter().copied().collect();
    let global_residual = rebuild(&kappa_global);
    Ok(KappaExpansion {
        mu,
        tracks: order.iter().map(|&(_, _, i)| specials[i].track).collect(),
        kappa,
        kappa_global,
        residual,
        global_residual,
    })
}
