//! Critical rhombic maps.
//!
//! A [`CriticalMap`] is a finite, simply connected cell decomposition whose
//! faces are rhombi of a common side length `delta`, embedded in the plane by
//! the vertex positions. The vertex graph is bipartite; the two classes are
//! [`Color::Gamma`] (holding the origin) and [`Color::GammaStar`].
//!
//! Faces are stored as `[x, y, x', y']`, counter-clockwise, with `x` and `x'`
//! in `Gamma`. Positions live only in the vertex table.

mod build;
mod io;
mod validate;

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

pub use build::{
    build_multigrid, build_square, build_trihex, build_u_shape, default_offsets, submap,
    symmetric_angles,
};
pub use io::{from_json, load, save, to_json, MapJson, VertexJson};
pub use validate::{validate_critical, ValidationReport, Violation};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Gamma,
    GammaStar,
}

impl Color {
    pub fn sign(self) -> f64 {
        match self {
            Color::Gamma => 1.0,
            Color::GammaStar => -1.0,
        }
    }

    pub fn flip(self) -> Color {
        match self {
            Color::Gamma => Color::GammaStar,
            Color::GammaStar => Color::Gamma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub pos: Complex64,
    pub color: Color,
}

/// Index of an unoriented edge of the map.
pub type EdgeId = usize;

#[derive(Clone, Debug)]
pub struct CriticalMap {
    delta: f64,
    origin: usize,
    vertices: Vec<Vertex>,
    faces: Vec<[usize; 4]>,
    // derived topology
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), EdgeId>,
    edge_faces: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    boundary_edges: Vec<(usize, usize)>,
}

impl PartialEq for CriticalMap {
    fn eq(&self, other: &Self) -> bool {
        self.delta == other.delta
            && self.origin == other.origin
            && self.vertices == other.vertices
            && self.faces == other.faces
    }
}

impl CriticalMap {
    /// Assembles a map from raw parts and derives its topology.
    ///
    /// Only structural impossibilities (out-of-range ids, degenerate faces)
    /// are errors here; geometric and combinatorial defects are left to
    /// [`validate_critical`].
    pub fn from_parts(
        delta: f64,
        origin: usize,
        vertices: Vec<Vertex>,
        faces: Vec<[usize; 4]>,
    ) -> Result<Self> {
        let n = vertices.len();
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if origin >= n {
            return Err(Error::UnknownVertex(origin));
        }
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        let mut edge_faces: Vec<Vec<usize>> = Vec::new();
        let mut vertex_faces = vec![Vec::new(); n];
        for (fi, face) in faces.iter().enumerate() {
            for (k, &v) in face.iter().enumerate() {
                if v >= n {
                    return Err(Error::UnknownVertex(v));
                }
                if face[..k].contains(&v) {
                    return Err(Error::Parse(format!("face {fi} repeats vertex {v}")));
                }
                vertex_faces[v].push(fi);
            }
            for k in 0..4 {
                let (a, b) = (face[k], face[(k + 1) % 4]);
                let key = (a.min(b), a.max(b));
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_faces.push(Vec::new());
                    edges.len() - 1
                });
                edge_faces[id].push(fi);
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for &[a, b] in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for (v, nb) in neighbors.iter_mut().enumerate() {
            let p = vertices[v].pos;
            nb.sort_by(|&a, &b| {
                let (ta, tb) = ((vertices[a].pos - p).arg(), (vertices[b].pos - p).arg());
                ta.total_cmp(&tb)
            });
        }
        let mut boundary_edges = Vec::new();
        for (id, fs) in edge_faces.iter().enumerate() {
            if fs.len() == 1 {
                let face = &faces[fs[0]];
                let [a, b] = edges[id];
                let k = face.iter().position(|&v| v == a).unwrap();
                if face[(k + 1) % 4] == b {
                    boundary_edges.push((a, b));
                } else {
                    boundary_edges.push((b, a));
                }
            }
        }
        boundary_edges.sort_unstable();
        Ok(Self {
            delta,
            origin,
            vertices,
            faces,
            edges,
            edge_index,
            edge_faces,
            neighbors,
            vertex_faces,
            boundary_edges,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn pos(&self, v: usize) -> Complex64 {
        self.vertices[v].pos
    }

    pub fn color(&self, v: usize) -> Color {
        self.vertices[v].color
    }

    pub fn faces(&self) -> &[[usize; 4]] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Unoriented edges, each stored as `[lo, hi]`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<EdgeId> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edge_faces(&self, e: EdgeId) -> &[usize] {
        &self.edge_faces[e]
    }

    /// Neighbours of `v`, sorted counter-clockwise by direction.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Boundary edges oriented counter-clockwise around the domain, in
    /// lexicographic order (not cyclic order; see [`Self::boundary_cycle`]).
    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    /// The boundary as a cyclic vertex sequence starting at its smallest
    /// vertex id. `None` when the boundary is not a single simple cycle.
    pub fn boundary_cycle(&self) -> Option<Vec<usize>> {
        if self.boundary_edges.is_empty() {
            return None;
        }
        let mut next = HashMap::new();
        for &(a, b) in &self.boundary_edges {
            if next.insert(a, b).is_some() {
                return None;
            }
        }
        let start = self.boundary_edges[0].0;
        let mut cycle = vec![start];
        let mut cur = start;
        loop {
            cur = *next.get(&cur)?;
            if cur == start {
                break;
            }
            if cycle.len() > self.boundary_edges.len() {
                return None;
            }
            cycle.push(cur);
        }
        (cycle.len() == self.boundary_edges.len()).then_some(cycle)
    }

    /// Number of boundary vertices (equivalently boundary edges).
    pub fn boundary_len(&self) -> usize {
        self.boundary_edges.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.neighbors[v]
            .iter()
            .any(|&w| self.edge_faces[self.edge_id(v, w).unwrap()].len() < 2)
    }

    /// `|boundary| / 2 + 1`, the dimension of the holomorphic function space.
    pub fn expected_dimension(&self) -> usize {
        self.boundary_len() / 2 + 1
    }

    /// Breadth-first distances from the origin along edges.
    pub fn distances(&self) -> Vec<Option<usize>> {
        self.distances_from(self.origin)
    }

    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Breadth-first spanning tree from the origin: `(order, parent)`.
    /// `parent[origin]` is `None`; unreachable vertices are absent from `order`.
    pub fn bfs_tree(&self) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.vertices.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[self.origin] = true;
        let mut queue = VecDeque::from([self.origin]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        (order, parent)
    }

    /// Graph distance from the origin to `x`.
    pub fn combinatorial_distance(&self, x: usize) -> Result<usize> {
        if x >= self.vertices.len() {
            return Err(Error::UnknownVertex(x));
        }
        self.distances()[x].ok_or(Error::UnknownVertex(x))
    }

    /// Vertex whose position is within `tol` of `z`.
    pub fn find_vertex(&self, z: Complex64, tol: f64) -> Option<usize> {
        self.vertices.iter().position(|v| (v.pos - z).norm() <= tol)
    }

    /// Same map with a different origin. The colouring is flipped when the
    /// new origin was in `GammaStar`, so that the origin is always in `Gamma`.
    pub fn with_origin(&self, origin: usize) -> Result<Self> {
        if origin >= self.vertices.len() {
            return Err(Error::UnknownVertex(origin));
        }
        let flip = self.vertices[origin].color == Color::GammaStar;
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                pos: v.pos,
                color: if flip { v.color.flip() } else { v.color },
            })
            .collect();
        let faces = if flip {
            self.faces
                .iter()
                .map(|f| [f[1], f[2], f[3], f[0]])
                .collect()
        } else {
            self.faces.clone()
        };
        Self::from_parts(self.delta, origin, vertices, faces)
    }

    /// Image of the map under `z ↦ a (z - Z(b))`, with the origin moved to `b`.
    /// The side length becomes `|a| delta`.
    pub fn transformed(&self, a: Complex64, b: usize) -> Result<Self> {
        if b >= self.vertices.len() {
            return Err(Error::UnknownVertex(b));
        }
        let zb = self.vertices[b].pos;
        let moved = self.with_origin(b)?;
        let vertices = moved
            .vertices
            .iter()
            .map(|v| Vertex {
                pos: a * (v.pos - zb),
                color: v.color,
            })
            .collect();
        Self::from_parts(self.delta * a.norm(), b, vertices, moved.faces)
    }

    /// Splits every rhombus into four rhombi of half the side length.
    ///
    /// New vertex ids: old vertices keep theirs, then one midpoint per edge
    /// (in edge order), then one centre per face (in face order).
    pub fn refine(&self) -> Self {
        let nv = self.vertices.len();
        let ne = self.edges.len();
        let mut vertices = self.vertices.clone();
        for &[a, b] in &self.edges {
            let pos = (self.pos(a) + self.pos(b)) * 0.5;
            vertices.push(Vertex {
                pos,
                color: Color::GammaStar,
            });
        }
        for f in &self.faces {
            let pos = (self.pos(f[0]) + self.pos(f[2])) * 0.5;
            vertices.push(Vertex {
                pos,
                color: Color::Gamma,
            });
        }
        // old vertices all become Gamma: distances between old vertices double.
        for v in vertices.iter_mut().take(nv) {
            v.color = Color::Gamma;
        }
        let mid = |a: usize, b: usize| nv + self.edge_id(a, b).unwrap();
        let mut faces = Vec::with_capacity(4 * self.faces.len());
        for (fi, &[x, y, xp, yp]) in self.faces.iter().enumerate() {
            let c = nv + ne + fi;
            let (mxy, myxp, mxpyp, mypx) = (mid(x, y), mid(y, xp), mid(xp, yp), mid(yp, x));
            faces.push([x, mxy, c, mypx]);
            faces.push([c, mxy, y, myxp]);
            faces.push([c, myxp, xp, mxpyp]);
            faces.push([c, mxpyp, yp, mypx]);
        }
        Self::from_parts(self.delta / 2.0, self.origin, vertices, faces)
            .expect("refinement of a well-formed map is well-formed")
    }
}
