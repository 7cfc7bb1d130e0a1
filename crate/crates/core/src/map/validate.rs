use std::collections::HashMap;
use std::fmt;

use super::{Color, CriticalMap};

/// Relative tolerance on side lengths, in units of `delta`.
pub const SIDE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    SideLength {
        face: usize,
        side: usize,
        length: f64,
        delta: f64,
    },
    Orientation {
        face: usize,
        area: f64,
    },
    Coloring {
        face: usize,
    },
    OriginColor,
    EdgeOverused {
        edge: (usize, usize),
        faces: usize,
    },
    SharedEdges {
        faces: (usize, usize),
        count: usize,
    },
    Euler {
        v: usize,
        e: usize,
        f: usize,
    },
    Boundary(String),
    Disconnected {
        vertex: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SideLength {
                face,
                side,
                length,
                delta,
            } => {
                write!(
                    f,
                    "face {face} side {side} has length {length} (delta {delta})"
                )
            }
            Violation::Orientation { face, area } => {
                write!(
                    f,
                    "face {face} is not positively oriented (signed area {area})"
                )
            }
            Violation::Coloring { face } => write!(f, "face {face} does not alternate colours"),
            Violation::OriginColor => write!(f, "origin is not in Gamma"),
            Violation::EdgeOverused { edge, faces } => {
                write!(f, "edge {}-{} is shared by {faces} faces", edge.0, edge.1)
            }
            Violation::SharedEdges { faces, count } => {
                write!(f, "faces {} and {} share {count} edges", faces.0, faces.1)
            }
            Violation::Euler { v, e, f: nf } => {
                write!(f, "V - E + F = {v} - {e} + {nf} != 1")
            }
            Violation::Boundary(msg) => write!(f, "boundary: {msg}"),
            Violation::Disconnected { vertex } => {
                write!(f, "vertex {vertex} is not connected to the origin")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn signed_area(map: &CriticalMap, face: &[usize; 4]) -> f64 {
    let mut area = 0.0;
    for k in 0..4 {
        let (p, q) = (map.pos(face[k]), map.pos(face[(k + 1) % 4]));
        area += p.re * q.im - q.re * p.im;
    }
    area / 2.0
}

/// Checks every structural and geometric requirement of a critical map.
pub fn validate_critical(map: &CriticalMap) -> ValidationReport {
    let mut violations = Vec::new();
    let delta = map.delta();
    for (fi, face) in map.faces().iter().enumerate() {
        for k in 0..4 {
            let length = (map.pos(face[(k + 1) % 4]) - map.pos(face[k])).norm();
            if (length - delta).abs() > SIDE_TOLERANCE * delta {
                violations.push(Violation::SideLength {
                    face: fi,
                    side: k,
                    length,
                    delta,
                });
            }
        }
        let area = signed_area(map, face);
        if area <= SIDE_TOLERANCE * delta * delta {
            violations.push(Violation::Orientation { face: fi, area });
        }
        let colors = face.map(|v| map.color(v));
        if colors
            != [
                Color::Gamma,
                Color::GammaStar,
                Color::Gamma,
                Color::GammaStar,
            ]
        {
            violations.push(Violation::Coloring { face: fi });
        }
    }
    if map.color(map.origin()) != Color::Gamma {
        violations.push(Violation::OriginColor);
    }
    let mut pair_count: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, &[a, b]) in map.edges().iter().enumerate() {
        let fs = map.edge_faces(e);
        if fs.len() > 2 {
            violations.push(Violation::EdgeOverused {
                edge: (a, b),
                faces: fs.len(),
            });
        }
        if fs.len() == 2 {
            let key = (fs[0].min(fs[1]), fs[0].max(fs[1]));
            *pair_count.entry(key).or_default() += 1;
        }
    }
    let mut pairs: Vec<_> = pair_count.into_iter().filter(|&(_, c)| c > 1).collect();
    pairs.sort_unstable();
    for (faces, count) in pairs {
        violations.push(Violation::SharedEdges { faces, count });
    }
    let (v, e, f) = (map.num_vertices(), map.num_edges(), map.num_faces());
    if v + f != e + 1 {
        violations.push(Violation::Euler { v, e, f });
    }
    for (vertex, d) in map.distances().iter().enumerate() {
        if d.is_none() {
            violations.push(Violation::Disconnected { vertex });
        }
    }
    if map.num_faces() > 0 {
        let mut out_degree: HashMap<usize, usize> = HashMap::new();
        for &(a, _) in map.boundary_edges() {
            *out_degree.entry(a).or_default() += 1;
        }
        let mut pinches: Vec<_> = out_degree
            .iter()
            .filter(|&(_, &d)| d > 1)
            .map(|(&v, _)| v)
            .collect();
        pinches.sort_unstable();
        for p in pinches {
            violations.push(Violation::Boundary(format!("vertex {p} is a pinch point")));
        }
        if map.boundary_cycle().is_none() {
            violations.push(Violation::Boundary("not a single closed cycle".into()));
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::map::{build_square, Vertex};

    #[test]
    fn square_is_valid() {
        let map = build_square(2, 2, 1.0);
        assert!(validate_critical(&map).is_valid());
    }

    #[test]
    fn perturbed_vertex_flags_incident_faces() {
        let map = build_square(2, 2, 1.0);
        let centre = map.find_vertex(Complex64::new(1.0, 1.0), 1e-12).unwrap();
        let mut vertices = map.vertices().to_vec();
        vertices[centre].pos += Complex64::new(1e-3, 0.0);
        let bad =
            CriticalMap::from_parts(1.0, map.origin(), vertices, map.faces().to_vec()).unwrap();
        let report = validate_critical(&bad);
        let mut faces: Vec<usize> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::SideLength { face, .. } => Some(*face),
                _ => None,
            })
            .collect();
        faces.dedup();
        assert_eq!(faces, vec![0, 1, 2, 3]);
    }

    #[test]
    fn clockwise_face_is_flagged() {
        let map = build_square(2, 1, 1.0);
        let mut faces = map.faces().to_vec();
        let [x, y, xp, yp] = faces[1];
        faces[1] = [x, yp, xp, y];
        let bad =
            CriticalMap::from_parts(1.0, map.origin(), map.vertices().to_vec(), faces).unwrap();
        let report = validate_critical(&bad);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Orientation { face: 1, .. })));
    }

    #[test]
    fn pinch_point_is_rejected() {
        // two unit squares touching at a single corner
        let pts = [
            (0., 0.),
            (1., 0.),
            (1., 1.),
            (0., 1.),
            (2., 1.),
            (2., 2.),
            (1., 2.),
        ];
        let colors = [0, 1, 0, 1, 1, 0, 1];
        let vertices = pts
            .iter()
            .zip(colors)
            .map(|(&(x, y), c)| Vertex {
                pos: Complex64::new(x, y),
                color: if c == 0 {
                    Color::Gamma
                } else {
                    Color::GammaStar
                },
            })
            .collect();
        let faces = vec![[0, 1, 2, 3], [2, 4, 5, 6]];
        let map = CriticalMap::from_parts(1.0, 0, vertices, faces).unwrap();
        let report = validate_critical(&map);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Boundary(_))));
    }
}
