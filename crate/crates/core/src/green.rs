//! Green's function of the critical Laplacian as a contour integral over
//! discrete exponentials:
//!
//! `G(O, x) = -(log(δ/2) / (8π² i)) ∮_C Exp(λ, x) log(λ) / λ dλ`
//!
//! `C` is a keyhole contour: an outer circle enclosing every pole, an inner
//! circle around 0, joined along both sides of the branch cut of `log`.
//! Every arc is integrated with Gauss–Legendre quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{laplacian, VertexFunction};
use crate::error::{Error, Result};
use crate::exponentials::ExpField;
use crate::map::{Color, CriticalMap};

/// Minimum distance between a quadrature node and a pole.
pub const MIN_POLE_DISTANCE: f64 = 1e-6;

/// Angular half-width of the keyhole around the cut.
pub const KEYHOLE_HALF_WIDTH: f64 = PI / 64.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ContourSpec {
    pub outer: f64,
    pub inner: f64,
    /// Direction of the branch cut of `log λ`. `None` picks, for each
    /// vertex `x`, the middle of the widest angular gap between the poles
    /// of `Exp(·, x)`.
    pub cut: Option<f64>,
    pub half_width: f64,
    /// Gauss–Legendre nodes on each of the four pieces.
    pub nodes: usize,
}

impl ContourSpec {
    /// Outer radius `1.25 · max |P|`, inner radius `0.5 · min |P|`,
    /// per-vertex cut.
    pub fn default_for(field: &ExpField, nodes: usize) -> Self {
        let poles = pole_candidates(field);
        let max = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let min = poles.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        let (outer, inner) = if poles.is_empty() {
            (1.0, 0.5)
        } else {
            (1.25 * max, 0.5 * min)
        };
        ContourSpec {
            outer,
            inner,
            cut: None,
            half_width: KEYHOLE_HALF_WIDTH,
            nodes,
        }
    }

    pub fn with_outer(mut self, outer: f64) -> Self {
        self.outer = outer;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }
}

/// Angle difference folded into `(-π, π]`.
fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn widest_gap(poles: &[Complex64]) -> f64 {
    if poles.is_empty() {
        return PI;
    }
    let mut angles: Vec<f64> = poles.iter().map(|p| p.arg()).collect();
    angles.sort_by(f64::total_cmp);
    let mut best = (0.0, PI);
    for (i, &a) in angles.iter().enumerate() {
        let next = if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + 2.0 * PI
        };
        if next - a > best.0 + 1e-12 {
            best = (next - a, a + (next - a) / 2.0);
        }
    }
    wrap(best.1)
}

/// The poles of every train-track, in both orientations.
fn pole_candidates(field: &ExpField) -> Vec<Complex64> {
    field.tracks().tracks().iter().map(|t| t.pole).collect()
}

/// Poles of `λ ↦ Exp(λ, x)`.
fn vertex_poles(field: &ExpField, x: usize) -> Vec<Complex64> {
    let radius = 2.0 / field.delta();
    field
        .levels(x)
        .iter()
        .map(|&(line, d)| {
            let p = Complex64::from_polar(radius, -field.lines()[line].theta);
            if d > 0 {
                p
            } else {
                -p
            }
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

type Node = (Complex64, Complex64, Complex64);

/// Quadrature nodes `(λ, log λ, weight)` with the weight absorbing `dλ / λ`.
fn contour_nodes(spec: &ContourSpec, gl: &[(f64, f64)], cut: f64) -> Vec<Node> {
    let lo = cut - 2.0 * PI + spec.half_width;
    let hi = cut - spec.half_width;
    let i = Complex64::i();
    let mut out = Vec::with_capacity(4 * gl.len());
    let mut arc = |radius: f64, from: f64, to: f64| {
        let (mid, half) = ((from + to) / 2.0, (to - from) / 2.0);
        for &(t, w) in gl {
            let theta = mid + half * t;
            let lambda = Complex64::from_polar(radius, theta);
            out.push((lambda, Complex64::new(radius.ln(), theta), i * w * half));
        }
    };
    arc(spec.outer, lo, hi);
    arc(spec.inner, hi, lo);
    // radial pieces in log-radius: dλ/λ = d(ln ρ)
    let (a, b) = (spec.inner.ln(), spec.outer.ln());
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    for &(t, w) in gl {
        let s = mid + half * t;
        // inward along the upper side of the keyhole, outward along the lower
        out.push((
            Complex64::from_polar(s.exp(), hi),
            Complex64::new(s, hi),
            Complex64::new(-w * half, 0.0),
        ));
        out.push((
            Complex64::from_polar(s.exp(), lo),
            Complex64::new(s, lo),
            Complex64::new(w * half, 0.0),
        ));
    }
    out
}

/// Contour for vertex `x`, validated against the poles of `Exp(·, x)`.
fn vertex_contour(
    field: &ExpField,
    spec: &ContourSpec,
    gl: &[(f64, f64)],
    x: usize,
) -> Result<Vec<Node>> {
    let poles = vertex_poles(field, x);
    let cut = spec.cut.unwrap_or_else(|| widest_gap(&poles));
    for &p in &poles {
        if wrap(p.arg() - cut).abs() <= spec.half_width {
            return Err(Error::PoleInSlit(p));
        }
        if p.norm() >= spec.outer || p.norm() <= spec.inner {
            return Err(Error::InvalidArgument(format!(
                "contour does not enclose pole {p}"
            )));
        }
    }
    let nodes = contour_nodes(spec, gl, cut);
    for &(lambda, _, _) in &nodes {
        for &p in &poles {
            let distance = (lambda - p).norm();
            if distance < MIN_POLE_DISTANCE {
                return Err(Error::ContourTooClose { pole: p, distance });
            }
        }
    }
    Ok(nodes)
}

fn prefactor(delta: f64) -> Complex64 {
    -(delta / 2.0).ln() / (8.0 * PI * PI * Complex64::i())
}

/// `G(O, x)` for a `Gamma` vertex `x`.
pub fn green_eval(
    map: &CriticalMap,
    field: &ExpField,
    x: usize,
    spec: &ContourSpec,
) -> Result<f64> {
    if x >= map.num_vertices() {
        return Err(Error::UnknownVertex(x));
    }
    if map.color(x) != Color::Gamma {
        return Err(Error::InvalidArgument(format!(
            "vertex {x} is not in Gamma"
        )));
    }
    let gl = gauss_legendre(spec.nodes);
    let nodes = vertex_contour(field, spec, &gl, x)?;
    let sum = integrate(field, x, &nodes)?;
    Ok((prefactor(map.delta()) * sum).re)
}

fn integrate(field: &ExpField, x: usize, nodes: &[Node]) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for &(lambda, log, w) in nodes {
        sum += field.eval(lambda, x)? * log * w;
    }
    Ok(sum)
}

/// `G(O, ·)` on every `Gamma` vertex (0 on `GammaStar`).
pub fn green_function(
    map: &CriticalMap,
    field: &ExpField,
    spec: &ContourSpec,
) -> Result<VertexFunction> {
    let gl = gauss_legendre(spec.nodes);
    let pre = prefactor(map.delta());
    let mut values = vec![Complex64::new(0.0, 0.0); map.num_vertices()];
    for (x, value) in values.iter_mut().enumerate() {
        if map.color(x) == Color::Gamma {
            let nodes = vertex_contour(field, spec, &gl, x)?;
            *value = Complex64::new((pre * integrate(field, x, &nodes)?).re, 0.0);
        }
    }
    Ok(VertexFunction(values))
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenReport {
    /// Largest `|ΔG|` over interior `Gamma` vertices other than the origin.
    pub max_residual: f64,
    pub worst_vertex: Option<usize>,
    /// `ΔG` at the origin, when the origin is interior.
    pub origin_laplacian: Option<f64>,
    pub checked: usize,
}

/// Harmonicity check of the quadrature Green's function.
pub fn green_check(map: &CriticalMap, field: &ExpField, spec: &ContourSpec) -> Result<GreenReport> {
    let g = green_function(map, field, spec)?;
    let mut report = GreenReport {
        max_residual: 0.0,
        worst_vertex: None,
        origin_laplacian: None,
        checked: 0,
    };
    for v in 0..map.num_vertices() {
        if map.color(v) != Color::Gamma || map.is_boundary_vertex(v) {
            continue;
        }
        let lap = laplacian(map, &g, v)?.re;
        if v == map.origin() {
            report.origin_laplacian = Some(lap);
            continue;
        }
        report.checked += 1;
        if lap.abs() > report.max_residual || report.worst_vertex.is_none() {
            report.max_residual = report.max_residual.max(lap.abs());
            report.worst_vertex = Some(v);
        }
    }
    Ok(report)
}
