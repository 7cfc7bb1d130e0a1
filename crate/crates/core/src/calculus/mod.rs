//! Discrete Cauchy–Riemann equation, integration, monomials, duality,
//! derivative and the rhombic Laplacian.

mod function;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use function::{EdgeOneForm, VertexFunction};

use crate::error::{Error, Result};
use crate::map::{Color, CriticalMap};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default relative holomorphy tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Scale used for relative tolerances: `max(1, ‖f‖∞)`.
pub fn magnitude(f: &VertexFunction) -> f64 {
    f.sup_norm().max(1.0)
}

/// `(f(y')-f(y))/(Z(y')-Z(y)) - (f(x')-f(x))/(Z(x')-Z(x))` on one face.
pub fn cr_residual(map: &CriticalMap, f: &VertexFunction, face: usize) -> Complex64 {
    let [x, y, xp, yp] = map.faces()[face];
    (f[yp] - f[y]) / (map.pos(yp) - map.pos(y)) - (f[xp] - f[x]) / (map.pos(xp) - map.pos(x))
}

pub fn max_cr_residual(map: &CriticalMap, f: &VertexFunction) -> f64 {
    (0..map.num_faces())
        .map(|k| cr_residual(map, f, k).norm())
        .fold(0.0, f64::max)
}

/// Whether every face residual is at most `tol`; also returns the maximum.
pub fn is_holomorphic(map: &CriticalMap, f: &VertexFunction, tol: f64) -> (bool, f64) {
    let max = max_cr_residual(map, f);
    (max <= tol, max)
}

/// The biconstant: `+1` on `Gamma`, `-1` on `GammaStar`.
pub fn epsilon(map: &CriticalMap) -> VertexFunction {
    VertexFunction::from_fn(map, |v| Complex64::new(map.color(v).sign(), 0.0))
}

/// `∫_(x,y) f dZ = (f(x)+f(y))/2 (Z(y)-Z(x))` on every edge.
pub fn integrate_form(map: &CriticalMap, f: &VertexFunction) -> EdgeOneForm {
    EdgeOneForm::from_fn(map, |a, b| (f[a] + f[b]) * 0.5 * (map.pos(b) - map.pos(a)))
}

/// `Int(f)(z) = ∫_O^z f dZ`, integrated along a breadth-first tree from the
/// origin. Every face cycle is checked: a defect above
/// `tol · max(1, ‖f‖∞) · 4δ` is [`Error::PathDependent`].
pub fn integrate_function(
    map: &CriticalMap,
    f: &VertexFunction,
    tol: f64,
) -> Result<VertexFunction> {
    let form = integrate_form(map, f);
    let (order, parent) = map.bfs_tree();
    let mut out = VertexFunction::constant(map, Complex64::new(0.0, 0.0));
    for &v in order.iter().skip(1) {
        let p = parent[v].unwrap();
        out[v] = out[p] + form.get(map, p, v).unwrap();
    }
    let tolerance = tol * magnitude(f) * 4.0 * map.delta();
    for (face, quad) in map.faces().iter().enumerate() {
        let defect: Complex64 = (0..4)
            .map(|k| form.get(map, quad[k], quad[(k + 1) % 4]).unwrap())
            .sum();
        if defect.norm() > tolerance {
            return Err(Error::PathDependent {
                face,
                defect: defect.norm(),
                tolerance,
            });
        }
    }
    Ok(out)
}

/// Integration without the holomorphy check (the result depends on the
/// spanning tree when `f` is not holomorphic).
fn integrate_unchecked(map: &CriticalMap, f: &VertexFunction) -> VertexFunction {
    integrate_function(map, f, f64::INFINITY).expect("unchecked integration cannot fail")
}

/// `Z^{:k:}` for `k = 0..=max_degree`: `Z^{:0:} = 1`, `Z^{:k:} = k Int(Z^{:k-1:})`.
pub fn monomials(map: &CriticalMap, max_degree: usize) -> Vec<VertexFunction> {
    let mut out = vec![VertexFunction::constant(map, Complex64::new(1.0, 0.0))];
    for k in 1..=max_degree {
        let next = integrate_unchecked(map, &out[k - 1]).scale(Complex64::new(k as f64, 0.0));
        out.push(next);
    }
    out
}

pub fn monomial(map: &CriticalMap, k: usize) -> VertexFunction {
    monomials(map, k).pop().unwrap()
}

/// `Z^{:k:}/k!` for `k = 0..=max_degree`, computed as iterated integrals
/// so that no factorials are formed.
pub fn scaled_monomials(map: &CriticalMap, max_degree: usize) -> Vec<VertexFunction> {
    let mut out = vec![VertexFunction::constant(map, Complex64::new(1.0, 0.0))];
    for k in 1..=max_degree {
        let next = integrate_unchecked(map, &out[k - 1]);
        out.push(next);
    }
    out
}

/// `f†(z) = ε(z) conj(f(z))`.
pub fn dual(map: &CriticalMap, f: &VertexFunction) -> VertexFunction {
    VertexFunction::from_fn(map, |v| f[v].conj() * map.color(v).sign())
}

/// How the `c ε` ambiguity of the derivative is fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativeGauge {
    /// The derivative at the origin is the ρ-weighted mean of the face
    /// derivatives of the faces around the origin.
    #[default]
    OriginFan,
    /// One constant chosen so that the fan-mean condition holds at every
    /// vertex in the least-squares sense.
    AllFans,
    /// No correction (`c = 0`).
    Raw,
}

/// A face rotated so that `v` comes first: `(v, y_k, x_k, y_{k+1})`.
fn rotate_to(face: &[usize; 4], v: usize) -> [usize; 4] {
    let k = face.iter().position(|&w| w == v).expect("vertex on face");
    [
        face[k],
        face[(k + 1) % 4],
        face[(k + 2) % 4],
        face[(k + 3) % 4],
    ]
}

/// Aspect-ratio weight `ρ(v, x_k) = -i (Z(y_{k+1}) - Z(y_k)) / (Z(x_k) - Z(v))`.
fn fan_weight(map: &CriticalMap, q: &[usize; 4]) -> f64 {
    let [v, y0, x, y1] = *q;
    (-I * (map.pos(y1) - map.pos(y0)) / (map.pos(x) - map.pos(v))).re
}

/// ρ-weighted mean, over the faces around `v`, of the face derivative taken
/// along the diagonal that avoids `v`.
fn fan_mean_derivative(map: &CriticalMap, f: &VertexFunction, v: usize) -> Option<Complex64> {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for &face in map.vertex_faces(v) {
        let q = rotate_to(&map.faces()[face], v);
        let rho = fan_weight(map, &q);
        let (y0, y1) = (q[1], q[3]);
        num += (f[y1] - f[y0]) / (map.pos(y1) - map.pos(y0)) * rho;
        den += rho;
    }
    (den > 0.0).then(|| num / den)
}

/// `f' = (4/δ²) (∫_O f† dZ)† + c ε`, with `c` fixed by `gauge`.
pub fn derivative(
    map: &CriticalMap,
    f: &VertexFunction,
    gauge: DerivativeGauge,
    tol: f64,
) -> Result<VertexFunction> {
    let raw = dual(map, &integrate_function(map, &dual(map, f), tol)?)
        .scale(Complex64::new(4.0 / (map.delta() * map.delta()), 0.0));
    let eps = epsilon(map);
    let c = match gauge {
        DerivativeGauge::Raw => Complex64::new(0.0, 0.0),
        DerivativeGauge::OriginFan => {
            let o = map.origin();
            match fan_mean_derivative(map, f, o) {
                Some(target) => (target - raw[o]) * eps[o].re,
                None => Complex64::new(0.0, 0.0),
            }
        }
        DerivativeGauge::AllFans => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut count = 0usize;
            for v in 0..map.num_vertices() {
                if let Some(target) = fan_mean_derivative(map, f, v) {
                    sum += (target - raw[v]) * eps[v].re;
                    count += 1;
                }
            }
            if count == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                sum / count as f64
            }
        }
    };
    Ok(raw.add(&eps.scale(c)))
}

/// Largest edge defect of `f(y) - f(x) = (g(x)+g(y))/2 (Z(y)-Z(x))`,
/// i.e. of the identity `df = g dZ`.
pub fn edge_identity_defect(map: &CriticalMap, f: &VertexFunction, g: &VertexFunction) -> f64 {
    map.edges()
        .iter()
        .map(|&[a, b]| ((f[b] - f[a]) - (g[a] + g[b]) * 0.5 * (map.pos(b) - map.pos(a))).norm())
        .fold(0.0, f64::max)
}

/// `Σ_k ρ(v, x_k) (f(x_k) - f(v))` over the closed fan of faces around `v`.
pub fn laplacian(map: &CriticalMap, f: &VertexFunction, v: usize) -> Result<Complex64> {
    if v >= map.num_vertices() {
        return Err(Error::UnknownVertex(v));
    }
    if map.is_boundary_vertex(v) {
        return Err(Error::BoundaryVertex(v));
    }
    Ok(map
        .vertex_faces(v)
        .iter()
        .map(|&face| {
            let q = rotate_to(&map.faces()[face], v);
            (f[q[2]] - f[v]) * fan_weight(map, &q)
        })
        .sum())
}

/// The ρ-weights of the faces around `v`, paired with the opposite vertex.
pub fn fan_weights(map: &CriticalMap, v: usize) -> Vec<(usize, f64)> {
    map.vertex_faces(v)
        .iter()
        .map(|&face| {
            let q = rotate_to(&map.faces()[face], v);
            (q[2], fan_weight(map, &q))
        })
        .collect()
}

/// Harmonic extension on `Gamma` of real boundary data given on the
/// `Gamma` vertices of the boundary. Returns one value per `Gamma` vertex
/// (`None` on `GammaStar`).
pub fn dirichlet_solve(
    map: &CriticalMap,
    boundary: &HashMap<usize, f64>,
) -> Result<Vec<Option<f64>>> {
    let gamma: Vec<usize> = (0..map.num_vertices())
        .filter(|&v| map.color(v) == Color::Gamma)
        .collect();
    let mut values: Vec<Option<f64>> = vec![None; map.num_vertices()];
    let mut interior = Vec::new();
    for &v in &gamma {
        if map.is_boundary_vertex(v) {
            let value = boundary.get(&v).ok_or_else(|| {
                Error::InvalidArgument(format!("missing boundary value at vertex {v}"))
            })?;
            values[v] = Some(*value);
        } else {
            interior.push(v);
        }
    }
    let slot: HashMap<usize, usize> = interior.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = interior.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, &v) in interior.iter().enumerate() {
        for (x, rho) in fan_weights(map, v) {
            a[(i, i)] -= rho;
            match slot.get(&x) {
                Some(&j) => a[(i, j)] += rho,
                None => rhs[i] -= rho * values[x].expect("boundary value"),
            }
        }
    }
    if n > 0 {
        let solution = a.clone().lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        let scale = rhs.amax().max(1.0);
        if (&a * &solution - &rhs).amax() > 1e-8 * scale {
            return Err(Error::SingularSystem);
        }
        for (i, &v) in interior.iter().enumerate() {
            values[v] = Some(solution[i]);
        }
    }
    Ok(values)
}
