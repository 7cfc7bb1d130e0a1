//! Generators for the standard lattices and multigrid patches.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{validate_critical, Color, CriticalMap, Vertex};
use crate::error::{Error, Result};

/// Orients faces counter-clockwise, colours vertices by graph parity from
/// `origin` and rotates each face so that it starts in `Gamma`.
fn assemble(
    delta: f64,
    positions: Vec<Complex64>,
    faces: Vec<[usize; 4]>,
    origin: usize,
) -> Result<CriticalMap> {
    let n = positions.len();
    let mut adj = vec![Vec::new(); n];
    for f in &faces {
        for k in 0..4 {
            adj[f[k]].push(f[(k + 1) % 4]);
            adj[f[(k + 1) % 4]].push(f[k]);
        }
    }
    let mut color = vec![None; n];
    color[origin] = Some(Color::Gamma);
    let mut stack = vec![origin];
    while let Some(v) = stack.pop() {
        let c = color[v].unwrap();
        for &w in &adj[v] {
            if color[w].is_none() {
                color[w] = Some(c.flip());
                stack.push(w);
            }
        }
    }
    let vertices = positions
        .iter()
        .zip(&color)
        .map(|(&pos, c)| Vertex {
            pos,
            color: c.unwrap_or(Color::Gamma),
        })
        .collect::<Vec<_>>();
    let faces = faces
        .into_iter()
        .map(|f| {
            let mut area = 0.0;
            for k in 0..4 {
                let (p, q) = (positions[f[k]], positions[f[(k + 1) % 4]]);
                area += p.re * q.im - q.re * p.im;
            }
            let f = if area < 0.0 {
                [f[0], f[3], f[2], f[1]]
            } else {
                f
            };
            if vertices[f[0]].color == Color::Gamma {
                f
            } else {
                [f[1], f[2], f[3], f[0]]
            }
        })
        .collect();
    CriticalMap::from_parts(delta, origin, vertices, faces)
}

/// Axis-aligned `width × height` grid of squares with side `delta`. The
/// origin is the corner at position 0; vertex `(i, j)` has id `j (width+1) + i`.
pub fn build_square(width: usize, height: usize, delta: f64) -> CriticalMap {
    assert!(
        width >= 1 && height >= 1,
        "grid dimensions must be positive"
    );
    let id = |i: usize, j: usize| j * (width + 1) + i;
    let mut positions = Vec::with_capacity((width + 1) * (height + 1));
    for j in 0..=height {
        for i in 0..=width {
            positions.push(Complex64::new(i as f64, j as f64) * delta);
        }
    }
    let mut faces = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    assemble(delta, positions, faces, 0).expect("square grid is well-formed")
}

/// Hexagonal patch of the triangular/hexagonal rhombic lattice: a hexagon of
/// side `radius` tiled by three blocks of rhombi spanned by pairs of the
/// directions `1, e^{2πi/3}, e^{4πi/3}`, meeting at the origin.
pub fn build_trihex(radius: usize, delta: f64) -> CriticalMap {
    assert!(radius >= 1, "radius must be positive");
    let dirs = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].map(|t| Complex64::from_polar(delta, t));
    // lattice coordinates in the basis (dirs[0], dirs[1]); dirs[2] = -(d0 + d1)
    let lattice = [(1i64, 0i64), (0, 1), (-1, -1)];
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut vid = |p: (i64, i64)| {
        *index.entry(p).or_insert_with(|| {
            positions.push(dirs[0] * p.0 as f64 + dirs[1] * p.1 as f64);
            positions.len() - 1
        })
    };
    let origin = vid((0, 0));
    let mut faces = Vec::new();
    for k in 0..3 {
        let (a, b) = (lattice[k], lattice[(k + 1) % 3]);
        for i in 0..radius as i64 {
            for j in 0..radius as i64 {
                let p = (i * a.0 + j * b.0, i * a.1 + j * b.1);
                let q = [
                    p,
                    (p.0 + a.0, p.1 + a.1),
                    (p.0 + a.0 + b.0, p.1 + a.1 + b.1),
                    (p.0 + b.0, p.1 + b.1),
                ];
                faces.push(q.map(&mut vid));
            }
        }
    }
    assemble(delta, positions, faces, origin).expect("trihex patch is well-formed")
}

/// Default multigrid offsets: generic values whose sum is not an integer.
pub fn default_offsets(families: usize) -> Vec<f64> {
    (0..families)
        .map(|j| 0.1 + 0.1374 * j as f64 + 0.0113 * (j * j) as f64)
        .collect()
}

/// De Bruijn dual of a multigrid restricted to a disc.
///
/// Family `j` consists of the lines `Re(z e^{-i angles[j]}) + offsets[j] ∈ Z`.
/// Every intersection of two lines inside the disc of the given radius
/// becomes a rhombus with sides `delta e^{i angles[j]}`, `delta e^{i angles[k]}`.
/// The origin is the `Gamma` vertex closest to the centre, placed at 0.
pub fn build_multigrid(
    angles: &[f64],
    offsets: &[f64],
    radius: f64,
    delta: f64,
) -> Result<CriticalMap> {
    if angles.len() < 2 || angles.len() != offsets.len() {
        return Err(Error::InvalidArgument(
            "need at least two families with one offset each".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let m = angles.len();
    for j in 0..m {
        for k in 0..j {
            let s = (angles[j] - angles[k]).sin();
            if s.abs() < 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "angles {j} and {k} are parallel"
                )));
            }
        }
    }
    let units: Vec<Complex64> = angles
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let coord = |z: Complex64, j: usize| (z * units[j].conj()).re + offsets[j];
    let reach = radius.ceil() as i64 + 2;
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut keys: Vec<Vec<i64>> = Vec::new();
    let mut faces = Vec::new();
    let mut seen_faces = BTreeSet::new();
    for j in 0..m {
        for k in (j + 1)..m {
            let lo_j = (offsets[j] - radius).floor() as i64 - 1;
            let lo_k = (offsets[k] - radius).floor() as i64 - 1;
            for nj in lo_j..=lo_j + 2 * reach {
                for nk in lo_k..=lo_k + 2 * reach {
                    // solve Re(z conj(u_j)) = nj - offset_j, Re(z conj(u_k)) = nk - offset_k
                    let (a, b) = (nj as f64 - offsets[j], nk as f64 - offsets[k]);
                    let (uj, uk) = (units[j], units[k]);
                    let det = uj.re * uk.im - uj.im * uk.re;
                    let x = (a * uk.im - b * uj.im) / det;
                    let y = (uj.re * b - uk.re * a) / det;
                    let z = Complex64::new(x, y);
                    if z.norm() > radius {
                        continue;
                    }
                    let mut base = vec![0i64; m];
                    for l in 0..m {
                        let c = coord(z, l);
                        if l != j && l != k {
                            if (c - c.round()).abs() < 1e-9 {
                                return Err(Error::DegenerateMultigrid(z));
                            }
                            base[l] = c.ceil() as i64;
                        }
                    }
                    if !seen_faces.insert((j, k, nj, nk)) {
                        continue;
                    }
                    let mut quad = [0usize; 4];
                    for (q, (dj, dk)) in [(0, 0), (1, 0), (1, 1), (0, 1)].into_iter().enumerate() {
                        let mut key = base.clone();
                        key[j] = nj + dj;
                        key[k] = nk + dk;
                        let next = keys.len();
                        quad[q] = *index.entry(key.clone()).or_insert_with(|| {
                            keys.push(key);
                            next
                        });
                    }
                    faces.push(quad);
                }
            }
        }
    }
    if faces.is_empty() {
        return Err(Error::BadMultigrid(
            "no grid intersections inside the disc".into(),
        ));
    }
    let raw: Vec<Complex64> = keys
        .iter()
        .map(|key| {
            key.iter()
                .zip(&units)
                .map(|(&n, &u)| u * (n as f64 * delta))
                .sum()
        })
        .collect();
    let centroid = raw.iter().sum::<Complex64>() / raw.len() as f64;
    let parity = |key: &Vec<i64>| key.iter().sum::<i64>().rem_euclid(2);
    // candidate origin: nearest vertex to the centroid, then a Gamma choice by parity
    let nearest = (0..raw.len())
        .min_by(|&a, &b| {
            (raw[a] - centroid)
                .norm()
                .total_cmp(&(raw[b] - centroid).norm())
        })
        .unwrap();
    let target = parity(&keys[nearest]);
    let origin = (0..raw.len())
        .filter(|&v| parity(&keys[v]) == target)
        .min_by(|&a, &b| {
            (raw[a] - centroid)
                .norm()
                .total_cmp(&(raw[b] - centroid).norm())
        })
        .unwrap();
    let shift = raw[origin];
    let positions = raw.into_iter().map(|p| p - shift).collect();
    let map = assemble(delta, positions, faces, origin)?;
    let report = validate_critical(&map);
    if !report.is_valid() {
        return Err(Error::BadMultigrid(report.violations[0].to_string()));
    }
    Ok(map)
}

/// Angles of `n` line families with `n`-fold symmetry (`n = 5` gives
/// Penrose-like patches).
pub fn symmetric_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| PI * j as f64 / n as f64).collect()
}

/// Sub-map spanned by a subset of faces of `map`, vertices renumbered
/// densely in increasing old id. The origin is the image of `origin` if it
/// survives, otherwise the smallest surviving vertex. Fails unless the
/// result is a valid simply connected map.
pub fn submap(map: &CriticalMap, faces: &[usize]) -> Result<CriticalMap> {
    let mut used: Vec<usize> = faces.iter().flat_map(|&f| map.faces()[f]).collect();
    used.sort_unstable();
    used.dedup();
    let renum: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let positions = used.iter().map(|&v| map.pos(v)).collect();
    let new_faces = faces
        .iter()
        .map(|&f| map.faces()[f].map(|v| renum[&v]))
        .collect();
    let origin = renum.get(&map.origin()).copied().unwrap_or(0);
    let sub = assemble(map.delta(), positions, new_faces, origin)?;
    let report = validate_critical(&sub);
    if !report.is_valid() {
        return Err(Error::InvalidMap(report.violations));
    }
    Ok(sub)
}

/// Square-lattice U shape: a `3 × 2` grid of unit squares (times `delta`)
/// with the top middle square removed. Not combinatorially convex.
pub fn build_u_shape(delta: f64) -> CriticalMap {
    let full = build_square(3, 2, delta);
    submap(&full, &[0, 1, 2, 3, 5]).expect("U shape is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_square() {
        let map = build_square(1, 1, 1.0);
        assert_eq!(map.num_vertices(), 4);
        assert_eq!(map.num_faces(), 1);
        assert_eq!(map.boundary_len(), 4);
        for z in [c(0., 0.), c(1., 0.), c(1., 1.), c(0., 1.)] {
            assert!(map.find_vertex(z, 1e-12).is_some());
        }
        assert_eq!(map.pos(map.origin()), c(0., 0.));
    }

    #[test]
    fn two_by_two_counts() {
        let map = build_square(2, 2, 1.0);
        assert_eq!(
            (map.num_vertices(), map.num_faces(), map.boundary_len()),
            (9, 4, 8)
        );
    }

    #[test]
    fn half_integer_grid() {
        let map = build_square(3, 2, 0.5);
        assert_eq!((map.num_vertices(), map.num_faces()), (12, 6));
        for v in map.vertices() {
            let (x, y) = (v.pos.re * 2.0, v.pos.im * 2.0);
            assert_eq!((x.fract(), y.fract()), (0.0, 0.0));
        }
        assert!(validate_critical(&map).is_valid());
    }

    #[test]
    fn trihex_radius_one() {
        for delta in [1.0, 2.0] {
            let map = build_trihex(1, delta);
            assert_eq!(map.num_faces(), 3);
            assert_eq!(map.num_vertices(), 7);
            assert!(map.faces().iter().all(|f| f.contains(&map.origin())));
            assert!(validate_critical(&map).is_valid());
        }
    }

    #[test]
    fn trihex_larger_are_valid() {
        for r in 2..=3 {
            let map = build_trihex(r, 2.0);
            assert_eq!(map.num_faces(), 3 * r * r);
            assert!(
                validate_critical(&map).is_valid(),
                "{:?}",
                validate_critical(&map)
            );
        }
    }

    #[test]
    fn penrose_patch_is_valid() {
        let angles = symmetric_angles(5);
        let map = build_multigrid(&angles, &default_offsets(5), 2.5, 1.0).unwrap();
        assert!(map.num_faces() > 10);
        assert!(validate_critical(&map).is_valid());
    }

    #[test]
    fn orthogonal_multigrid_is_square_lattice() {
        let map = build_multigrid(&[0.0, PI / 2.0], &[0.3, 0.6], 2.0, 1.0).unwrap();
        for f in map.faces() {
            let side = map.pos(f[1]) - map.pos(f[0]);
            assert!((side.re.abs() - 1.0).abs() < 1e-12 || (side.im.abs() - 1.0).abs() < 1e-12);
        }
        assert!(map
            .vertices()
            .iter()
            .all(|v| (v.pos.re - v.pos.re.round()).abs() < 1e-12));
    }

    #[test]
    fn concurrent_lines_are_rejected() {
        let err = build_multigrid(&[0.0, PI / 3.0, 2.0 * PI / 3.0], &[0.0, 0.0, 0.0], 1.5, 1.0);
        assert!(matches!(err, Err(Error::DegenerateMultigrid(_))));
    }

    #[test]
    fn u_shape_counts() {
        let map = build_u_shape(1.0);
        assert_eq!(
            (map.num_vertices(), map.num_faces(), map.boundary_len()),
            (12, 5, 12)
        );
        assert!(validate_critical(&map).is_valid());
    }
}
