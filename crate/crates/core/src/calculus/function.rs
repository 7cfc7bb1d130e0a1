use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::map::CriticalMap;

/// Complex values on the vertices of a map, indexed by vertex id.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction(pub Vec<Complex64>);

impl VertexFunction {
    pub fn from_fn(map: &CriticalMap, f: impl FnMut(usize) -> Complex64) -> Self {
        Self((0..map.num_vertices()).map(f).collect())
    }

    pub fn constant(map: &CriticalMap, c: Complex64) -> Self {
        Self(vec![c; map.num_vertices()])
    }

    /// The embedding `Z` itself.
    pub fn position(map: &CriticalMap) -> Self {
        Self::from_fn(map, |v| map.pos(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_v |self(v) - other(v)|`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// CSV with header `vertex_id,re,im`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex_id,re,im\n");
        for (v, z) in self.0.iter().enumerate() {
            writeln!(out, "{v},{:.16e},{:.16e}", z.re, z.im).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str, num_vertices: usize) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "vertex_id,re,im" => {}
            other => return Err(Error::Parse(format!("bad CSV header {other:?}"))),
        }
        let mut values = vec![None; num_vertices];
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("bad CSV row {}: {line:?}", row + 2));
            if cols.len() != 3 {
                return Err(bad());
            }
            let id: usize = cols[0].parse().map_err(|_| bad())?;
            let re: f64 = cols[1].parse().map_err(|_| bad())?;
            let im: f64 = cols[2].parse().map_err(|_| bad())?;
            *values.get_mut(id).ok_or_else(bad)? = Some(Complex64::new(re, im));
        }
        values
            .into_iter()
            .enumerate()
            .map(|(v, z)| z.ok_or_else(|| Error::Parse(format!("missing value for vertex {v}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Index<usize> for VertexFunction {
    type Output = Complex64;
    fn index(&self, v: usize) -> &Complex64 {
        &self.0[v]
    }
}

impl IndexMut<usize> for VertexFunction {
    fn index_mut(&mut self, v: usize) -> &mut Complex64 {
        &mut self.0[v]
    }
}

/// A 1-form: one value per unoriented edge, stored for the orientation
/// `lo → hi`. Reading the reversed edge negates the stored value.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeOneForm {
    values: Vec<Complex64>,
}

impl EdgeOneForm {
    pub fn from_fn(map: &CriticalMap, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            values: map.edges().iter().map(|&[a, b]| f(a, b)).collect(),
        }
    }

    /// Value on the oriented edge `a → b`.
    pub fn get(&self, map: &CriticalMap, a: usize, b: usize) -> Option<Complex64> {
        let e = map.edge_id(a, b)?;
        Some(if a < b {
            self.values[e]
        } else {
            -self.values[e]
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}
