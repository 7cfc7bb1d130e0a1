//! Discrete exponentials as rational functions of λ, their series, jets,
//! λ-derivatives, changes of base point and immersion checks.

mod jet;

use num_complex::Complex64;

pub use jet::{LaurentJet, DEFAULT_ORDER};

use crate::calculus::{scaled_monomials, VertexFunction};
use crate::error::{Error, Result};
use crate::map::CriticalMap;
use crate::tracks::Tracks;

/// A factor `1 ∓ λδ/2 e^{iθ}` smaller than this in modulus is a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// `λ0` this close (relative to `2/δ`) to a pole or zero of a factor is
/// expanded as an exact pole or zero.
pub const JET_SNAP: f64 = 1e-9;

/// One slope of the map with the tracks carrying its pole and zero.
#[derive(Clone, Debug)]
pub struct Line {
    pub class: usize,
    pub theta: f64,
    /// Smallest track id with angle `theta`; its pole `(2/δ)e^{-iθ}` is a
    /// pole of the factor.
    pub pole_track: usize,
    /// Smallest track id with the opposite angle; its pole is a zero.
    pub zero_track: usize,
}

/// Exponentials expressed through per-vertex slope levels:
/// `Exp(λ, x) = Π_φ ((1 + λδ/2 e^{iφ}) / (1 - λδ/2 e^{iφ}))^{d_φ(x)}`.
#[derive(Clone, Debug)]
pub struct ExpField {
    delta: f64,
    tracks: Tracks,
    lines: Vec<Line>,
    levels: Vec<Vec<(usize, i32)>>,
}

impl ExpField {
    pub fn new(map: &CriticalMap) -> Self {
        Self::from_tracks(map, Tracks::extract(map))
    }

    pub fn from_tracks(map: &CriticalMap, tracks: Tracks) -> Self {
        let smallest = |class: usize| {
            tracks
                .tracks()
                .iter()
                .find(|t| t.class == class)
                .map(|t| t.id)
                .expect("class has a track")
        };
        let lines: Vec<Line> = tracks
            .lines()
            .into_iter()
            .map(|class| Line {
                class,
                theta: tracks.angle_classes()[class],
                pole_track: smallest(class),
                zero_track: smallest(tracks.opposite_class(class)),
            })
            .collect();
        let levels = (0..map.num_vertices())
            .map(|x| {
                lines
                    .iter()
                    .enumerate()
                    .filter_map(|(i, line)| {
                        let d = tracks.level(x, line.class);
                        (d != 0).then_some((i, d))
                    })
                    .collect()
            })
            .collect();
        Self {
            delta: map.delta(),
            tracks,
            lines,
            levels,
        }
    }

    pub fn tracks(&self) -> &Tracks {
        &self.tracks
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn num_vertices(&self) -> usize {
        self.levels.len()
    }

    /// Nonzero slope levels of `x` as `(line index, level)`.
    pub fn levels(&self, x: usize) -> &[(usize, i32)] {
        &self.levels[x]
    }

    fn coefficient(&self, line: usize) -> Complex64 {
        Complex64::from_polar(self.delta / 2.0, self.lines[line].theta)
    }

    pub fn eval(&self, lambda: Complex64, x: usize) -> Result<Complex64> {
        let mut value = Complex64::new(1.0, 0.0);
        for &(line, d) in &self.levels[x] {
            let c = self.coefficient(line) * lambda;
            let (num, den) = (1.0 + c, 1.0 - c);
            if d > 0 && den.norm() < POLE_THRESHOLD {
                return Err(Error::AtPole {
                    lambda,
                    track: self.lines[line].pole_track,
                });
            }
            if d < 0 && num.norm() < POLE_THRESHOLD {
                return Err(Error::AtPole {
                    lambda,
                    track: self.lines[line].zero_track,
                });
            }
            value *= (num / den).powi(d);
        }
        Ok(value)
    }

    pub fn function(&self, lambda: Complex64) -> Result<VertexFunction> {
        (0..self.num_vertices())
            .map(|x| self.eval(lambda, x))
            .collect::<Result<Vec<_>>>()
            .map(VertexFunction)
    }

    /// `Exp(λ, x) / Exp(λ, x0)`.
    pub fn relative(&self, lambda: Complex64, x: usize, x0: usize) -> Result<Complex64> {
        Ok(self.eval(lambda, x)? / self.eval(lambda, x0)?)
    }

    /// Laurent jet of `μ ↦ Exp(μ, x)` at `λ0`, built factor by factor.
    pub fn jet(&self, lambda0: Complex64, x: usize, order: usize) -> LaurentJet {
        let snap = JET_SNAP;
        let mut out = LaurentJet::constant(lambda0, Complex64::new(1.0, 0.0), order);
        for &(line, d) in &self.levels[x] {
            let factor = LaurentJet::mobius_factor(lambda0, self.coefficient(line), order, snap);
            out = out.mul(&factor.powi(d).expect("normalized factor jet is invertible"));
        }
        out
    }

    /// Index of the line carrying the given slope class (either orientation).
    pub fn line_of_class(&self, class: usize) -> Option<usize> {
        let opp = self.tracks.opposite_class(class);
        self.lines
            .iter()
            .position(|l| l.class == class || l.class == opp)
    }

    /// Jet at `λ0` of `Exp(λ, x) / Exp(λ, base)` with the factors of line
    /// `skip` left out.
    pub fn relative_jet(
        &self,
        lambda0: Complex64,
        x: usize,
        base: usize,
        skip: Option<usize>,
        order: usize,
    ) -> LaurentJet {
        let mut exponents = vec![0i32; self.lines.len()];
        for &(line, d) in &self.levels[x] {
            exponents[line] += d;
        }
        for &(line, d) in &self.levels[base] {
            exponents[line] -= d;
        }
        let mut out = LaurentJet::constant(lambda0, Complex64::new(1.0, 0.0), order);
        for (line, &d) in exponents.iter().enumerate() {
            if d == 0 || Some(line) == skip {
                continue;
            }
            let factor =
                LaurentJet::mobius_factor(lambda0, self.coefficient(line), order, JET_SNAP);
            out = out.mul(&factor.powi(d).expect("normalized factor jet is invertible"));
        }
        out
    }

    /// Leading exponent of the jet at `λ0` predicted from the levels of `x`.
    pub fn predicted_lead(&self, lambda0: Complex64, x: usize) -> i32 {
        self.levels[x]
            .iter()
            .map(|&(line, d)| {
                let c = self.coefficient(line) * lambda0;
                if (1.0 - c).norm() < JET_SNAP {
                    -d
                } else if (1.0 + c).norm() < JET_SNAP {
                    d
                } else {
                    0
                }
            })
            .sum()
    }

    /// `∂^k/∂λ^k Exp(λ, ·)` from the jet coefficients.
    pub fn lambda_derivative(&self, lambda: Complex64, k: usize) -> Result<VertexFunction> {
        let mut fact = 1.0;
        for j in 1..=k {
            fact *= j as f64;
        }
        (0..self.num_vertices())
            .map(|x| {
                self.eval(lambda, x)?;
                let jet = self.jet(lambda, x, k.max(1));
                Ok(jet.coefficient(k as i32).expect("order covers k") * fact)
            })
            .collect::<Result<Vec<_>>>()
            .map(VertexFunction)
    }

    /// `dExp/dλ = Exp · Σ d_φ δe^{iφ} / (1 - (λδ/2 e^{iφ})²)`.
    pub fn lambda_derivative_closed(&self, lambda: Complex64, x: usize) -> Result<Complex64> {
        let value = self.eval(lambda, x)?;
        let sum: Complex64 = self.levels[x]
            .iter()
            .map(|&(line, d)| {
                let c = self.coefficient(line);
                c * 2.0 * d as f64 / (1.0 - (lambda * c).powi(2))
            })
            .sum();
        Ok(value * sum)
    }
}

/// Partial sums `Σ_{k≤K} λ^k Z^{:k:}/k!` at every vertex.
pub fn series_function(map: &CriticalMap, lambda: Complex64, max_degree: usize) -> VertexFunction {
    let terms = scaled_monomials(map, max_degree);
    let mut out = VertexFunction::constant(map, Complex64::new(0.0, 0.0));
    let mut power = Complex64::new(1.0, 0.0);
    for term in &terms {
        out = out.add(&term.scale(power));
        power *= lambda;
    }
    out
}

pub fn exp_series(map: &CriticalMap, lambda: Complex64, x: usize, max_degree: usize) -> Complex64 {
    series_function(map, lambda, max_degree)[x]
}

/// `((α+1)/(α-1))^d (αδ/2)^k`, the bound on `|Z^{:k:}(x)/k!|` at
/// combinatorial distance `d`.
pub fn growth_bound(alpha: f64, distance: usize, k: usize, delta: f64) -> f64 {
    ((alpha + 1.0) / (alpha - 1.0)).powi(distance as i32) * (alpha * delta / 2.0).powi(k as i32)
}

/// Both sides of the change-of-base-point identity for `ζ = a(Z - Z(b))`.
#[derive(Clone, Debug)]
pub struct RebaseCheck {
    /// `Exp_ζ(λ, x)` on the transformed map.
    pub lhs: Complex64,
    /// `Exp_Z(λ, b) · Exp_Z(aλ, x)`.
    pub stated_rhs: Complex64,
    /// `Exp_Z(aλ, x) / Exp_Z(aλ, b)`.
    pub derived_rhs: Complex64,
    pub stated_error: f64,
    pub derived_error: f64,
}

pub fn rebase_check(
    map: &CriticalMap,
    a: Complex64,
    b: usize,
    lambda: Complex64,
    x: usize,
) -> Result<RebaseCheck> {
    let moved = map.transformed(a, b)?;
    let lhs = ExpField::new(&moved).eval(lambda, x)?;
    let here = ExpField::new(map);
    let stated_rhs = here.eval(lambda, b)? * here.eval(a * lambda, x)?;
    let derived_rhs = here.relative(a * lambda, x, b)?;
    Ok(RebaseCheck {
        lhs,
        stated_rhs,
        derived_rhs,
        stated_error: (lhs - stated_rhs).norm(),
        derived_error: (lhs - derived_rhs).norm(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Immersion {
    /// `λ = 0`: every vertex maps to 1.
    Constant,
    Checked {
        immersed: bool,
        nonconvex_faces: Vec<usize>,
    },
}

/// Whether `x ↦ Exp(λ, x)` maps every rhombus to a strictly convex
/// quadrilateral.
pub fn immersion_check(map: &CriticalMap, lambda: Complex64) -> Result<Immersion> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(Immersion::Constant);
    }
    let values = ExpField::new(map).function(lambda)?;
    let mut bad = Vec::new();
    for (k, face) in map.faces().iter().enumerate() {
        let w = face.map(|v| values[v]);
        let scale = (0..4)
            .map(|i| (w[(i + 1) % 4] - w[i]).norm())
            .fold(0.0, f64::max);
        let crosses: Vec<f64> = (0..4)
            .map(|i| {
                let (p, q) = (w[(i + 1) % 4] - w[i], w[(i + 2) % 4] - w[(i + 1) % 4]);
                p.re * q.im - p.im * q.re
            })
            .collect();
        let eps = 1e-14 * scale * scale;
        let positive = crosses.iter().all(|&c| c > eps);
        let negative = crosses.iter().all(|&c| c < -eps);
        if !(positive || negative) {
            bad.push(k);
        }
    }
    Ok(Immersion::Checked {
        immersed: bad.is_empty(),
        nonconvex_faces: bad,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementPoint {
    pub delta: f64,
    pub value: Complex64,
    /// `|Exp_δ(λ, x) - e^{λ x}|`.
    pub error: f64,
}

/// Evaluates `Exp(λ, ·)` at the vertex of position `z` on `levels`
/// successive refinements of `map` (the first entry is `map` itself).
pub fn refinement_sweep(
    map: &CriticalMap,
    lambda: Complex64,
    z: Complex64,
    levels: usize,
) -> Result<Vec<RefinementPoint>> {
    let origin = map.pos(map.origin());
    let exact = (lambda * (z - origin)).exp();
    let mut current = map.clone();
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        if level > 0 {
            current = current.refine();
        }
        let x = current
            .find_vertex(z, 1e-9 * current.delta())
            .ok_or_else(|| Error::InvalidArgument(format!("no vertex at {z}")))?;
        let value = ExpField::new(&current).eval(lambda, x)?;
        out.push(RefinementPoint {
            delta: current.delta(),
            value,
            error: (value - exact).norm(),
        });
    }
    Ok(out)
}

/// Least-squares slope of `log(error)` against `log(delta)`.
pub fn fit_order(points: &[RefinementPoint]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.delta.ln(), p.error.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
