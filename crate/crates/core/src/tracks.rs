//! Train-tracks, crossing vectors, slope components and convexity.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::map::CriticalMap;

/// Two track angles closer than this (in radians) belong to the same slope.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

/// An oriented train-track. Ids come in pairs: `2u` is the orientation
/// whose initial side contains the origin, `2u + 1` its reversal.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrack {
    pub id: usize,
    /// Index of the underlying unoriented track.
    pub unoriented: usize,
    /// Angle of the track edges in `[0, 2π)`.
    pub theta: f64,
    /// Index into [`Tracks::angle_classes`].
    pub class: usize,
    /// Faces in the order the track runs from `e_plus` to `e_minus`.
    pub faces: Vec<usize>,
    /// Track edges oriented along the track direction.
    pub edges: Vec<(usize, usize)>,
    /// Counter-clockwise boundary edge pointing along the track direction.
    pub e_plus: (usize, usize),
    /// Counter-clockwise boundary edge pointing against it.
    pub e_minus: (usize, usize),
    pub pole: Complex64,
    pub positively_oriented: bool,
}

impl TrainTrack {
    pub fn is_outward(&self) -> bool {
        self.id % 2 == 0
    }

    pub fn reverse_id(&self) -> usize {
        self.id ^ 1
    }
}

/// All train-tracks of a map with per-vertex crossing vectors.
#[derive(Clone, Debug)]
pub struct Tracks {
    delta: f64,
    tracks: Vec<TrainTrack>,
    edge_track: Vec<usize>,
    /// `crossing[x][u]`: signed number of times the outward orientation of
    /// track `u` is crossed going from the origin to `x` (0 or 1).
    crossing: Vec<Vec<i32>>,
    classes: Vec<f64>,
    opposite_class: Vec<usize>,
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `(2/δ) e^{-iθ}`.
pub fn pole_of(theta: f64, delta: f64) -> Complex64 {
    Complex64::from_polar(2.0 / delta, -theta)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Edge index `k` of a face is the side `face[k] → face[k+1]`.
fn face_side(face: &[usize; 4], k: usize) -> (usize, usize) {
    (face[k % 4], face[(k + 1) % 4])
}

impl Tracks {
    pub fn extract(map: &CriticalMap) -> Self {
        let ne = map.num_edges();
        let mut parent: Vec<usize> = (0..ne).collect();
        for face in map.faces() {
            for k in 0..2 {
                let (a, b) = face_side(face, k);
                let (c, d) = face_side(face, k + 2);
                let (e, f) = (map.edge_id(a, b).unwrap(), map.edge_id(c, d).unwrap());
                let (re, rf) = (find(&mut parent, e), find(&mut parent, f));
                parent[re.max(rf)] = re.min(rf);
            }
        }
        // unoriented ids ordered by smallest member edge
        let mut root_id = vec![usize::MAX; ne];
        let mut edge_track = vec![0; ne];
        let mut count = 0;
        for e in 0..ne {
            let r = find(&mut parent, e);
            if root_id[r] == usize::MAX {
                root_id[r] = count;
                count += 1;
            }
            edge_track[e] = root_id[r];
        }

        // reference direction of each track: vector of its smallest edge lo -> hi
        let mut reference = vec![None; count];
        for (e, &[a, b]) in map.edges().iter().enumerate() {
            reference[edge_track[e]].get_or_insert(map.pos(b) - map.pos(a));
        }
        let reference: Vec<Complex64> = reference.into_iter().map(Option::unwrap).collect();
        let sign_along = |a: usize, b: usize, u: usize| -> i32 {
            if (map.pos(b) - map.pos(a) - reference[u]).norm() < 1e-6 * map.delta() {
                1
            } else {
                -1
            }
        };

        // crossing numbers with respect to the reference directions
        let (order, tree) = map.bfs_tree();
        let mut crossing = vec![vec![0i32; count]; map.num_vertices()];
        for &v in order.iter().skip(1) {
            let p = tree[v].unwrap();
            let u = edge_track[map.edge_id(p, v).unwrap()];
            let mut row = crossing[p].clone();
            row[u] += sign_along(p, v, u);
            crossing[v] = row;
        }
        for (e, &[a, b]) in map.edges().iter().enumerate() {
            let u = edge_track[e];
            for w in 0..count {
                let expected = if w == u { sign_along(a, b, u) } else { 0 };
                assert_eq!(
                    crossing[b][w] - crossing[a][w],
                    expected,
                    "crossing numbers are path dependent"
                );
            }
        }
        // flip so that every entry is 0 or 1 (origin on the initial side)
        let mut outward = reference.clone();
        for u in 0..count {
            if crossing.iter().any(|row| row[u] < 0) {
                outward[u] = -outward[u];
                for row in crossing.iter_mut() {
                    row[u] = -row[u];
                }
            }
            debug_assert!(crossing.iter().all(|row| row[u] == 0 || row[u] == 1));
        }

        let mut edges_of: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (e, &u) in edge_track.iter().enumerate() {
            edges_of[u].push(e);
        }
        let delta = map.delta();
        let dist = map.distances();
        let boundary = map.boundary_edges();
        let mut tracks = Vec::with_capacity(2 * count);
        for u in 0..count {
            let d = outward[u];
            let oriented = |e: usize| {
                let [a, b] = map.edges()[e];
                if (map.pos(b) - map.pos(a) - d).norm() < 1e-6 * delta {
                    (a, b)
                } else {
                    (b, a)
                }
            };
            let edges: Vec<(usize, usize)> = edges_of[u].iter().map(|&e| oriented(e)).collect();
            let ends: Vec<(usize, usize)> = boundary
                .iter()
                .copied()
                .filter(|&(a, b)| edge_track[map.edge_id(a, b).unwrap()] == u)
                .collect();
            assert_eq!(ends.len(), 2, "track {u} does not have two boundary ends");
            let along =
                |&(a, b): &(usize, usize)| (map.pos(b) - map.pos(a) - d).norm() < 1e-6 * delta;
            let e_plus = *ends
                .iter()
                .find(|e| along(e))
                .expect("boundary end along track");
            let e_minus = *ends
                .iter()
                .find(|e| !along(e))
                .expect("boundary end against track");
            let faces = walk_faces(map, e_plus);
            let positive = |es: &[(usize, usize)], forward: bool| {
                es.iter().any(|&(a, b)| {
                    let (a, b) = if forward { (a, b) } else { (b, a) };
                    matches!((dist[a], dist[b]), (Some(da), Some(db)) if db == da + 1)
                })
            };
            let theta = normalize_angle(d.arg());
            tracks.push(TrainTrack {
                id: 2 * u,
                unoriented: u,
                theta,
                class: 0,
                faces: faces.clone(),
                edges: edges.clone(),
                e_plus,
                e_minus,
                pole: pole_of(theta, delta),
                positively_oriented: positive(&edges, true),
            });
            let theta_r = normalize_angle(theta + PI);
            tracks.push(TrainTrack {
                id: 2 * u + 1,
                unoriented: u,
                theta: theta_r,
                class: 0,
                faces: faces.into_iter().rev().collect(),
                edges: edges.iter().map(|&(a, b)| (b, a)).collect(),
                e_plus: e_minus,
                e_minus: e_plus,
                pole: pole_of(theta_r, delta),
                positively_oriented: positive(&edges, false),
            });
        }

        let (classes, class_of) =
            bucket_angles(&tracks.iter().map(|t| t.theta).collect::<Vec<_>>());
        for (t, c) in tracks.iter_mut().zip(&class_of) {
            t.class = *c;
        }
        let opposite_class = classes
            .iter()
            .map(|&a| {
                let target = a + PI;
                (0..classes.len())
                    .min_by(|&i, &j| {
                        angle_distance(classes[i], target)
                            .total_cmp(&angle_distance(classes[j], target))
                    })
                    .unwrap()
            })
            .collect();
        Self {
            delta,
            tracks,
            edge_track,
            crossing,
            classes,
            opposite_class,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Oriented tracks, indexed by id.
    pub fn tracks(&self) -> &[TrainTrack] {
        &self.tracks
    }

    pub fn track(&self, id: usize) -> Option<&TrainTrack> {
        self.tracks.get(id)
    }

    pub fn num_unoriented(&self) -> usize {
        self.tracks.len() / 2
    }

    /// The outward-oriented track `2u` of unoriented track `u`.
    pub fn outward(&self, u: usize) -> &TrainTrack {
        &self.tracks[2 * u]
    }

    /// Unoriented track containing edge `e`.
    pub fn edge_track(&self, e: usize) -> usize {
        self.edge_track[e]
    }

    /// Crossing vector of `x`, one entry per unoriented track.
    pub fn crossing(&self, x: usize) -> &[i32] {
        &self.crossing[x]
    }

    /// Representative angle of each slope class.
    pub fn angle_classes(&self) -> &[f64] {
        &self.classes
    }

    pub fn opposite_class(&self, class: usize) -> usize {
        self.opposite_class[class]
    }

    /// Slope class whose angle is within the bucketing tolerance of `phi`.
    pub fn class_of_angle(&self, phi: f64) -> Option<usize> {
        self.classes
            .iter()
            .position(|&a| angle_distance(a, phi) <= ANGLE_TOLERANCE)
    }

    /// The angles of the outward tracks crossed on the way from the origin
    /// to `x`, with multiplicity.
    pub fn theta_set(&self, x: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (u, &k) in self.crossing[x].iter().enumerate() {
            let theta = self.outward(u).theta;
            let theta = if k < 0 {
                normalize_angle(theta + PI)
            } else {
                theta
            };
            out.extend(std::iter::repeat(theta).take(k.unsigned_abs() as usize));
        }
        out
    }

    /// Signed net crossings of `x` per slope class: the value for class `c`
    /// counts outward tracks of angle `c` minus those of the opposite angle.
    /// Only classes in `lines()` (one per pair of opposite slopes) are
    /// meaningful keys; the opposite key has the negated value.
    pub fn level(&self, x: usize, class: usize) -> i32 {
        let opp = self.opposite_class[class];
        let mut level = 0;
        for (u, &k) in self.crossing[x].iter().enumerate() {
            let c = self.outward(u).class;
            if c == class {
                level += k;
            } else if c == opp {
                level -= k;
            }
        }
        level
    }

    /// One representative class per pair of opposite slopes: the class
    /// whose angle lies in `[0, π)`, or the smaller-index class if both
    /// are in that range up to tolerance.
    pub fn lines(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in 0..self.classes.len() {
            let o = self.opposite_class[c];
            if c <= o && !out.contains(&o) {
                out.push(c);
            }
        }
        out
    }

    /// Vertices on the terminal side of an oriented track.
    pub fn terminal_side(&self, id: usize) -> Vec<usize> {
        let u = id / 2;
        let want = if id % 2 == 0 { 1 } else { 0 };
        (0..self.crossing.len())
            .filter(|&x| self.crossing[x][u] == want)
            .collect()
    }

    pub fn slope_decomposition(&self, map: &CriticalMap, class: usize) -> SlopeDecomposition {
        let phi = self.classes[class];
        let opp = self.opposite_class[class];
        let separating = |e: usize| {
            let c = self.outward(self.edge_track[e]).class;
            c == class || c == opp
        };
        let n = map.num_vertices();
        let mut component_of = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if component_of[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            component_of[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in map.neighbors(v) {
                    if component_of[w] == usize::MAX && !separating(map.edge_id(v, w).unwrap()) {
                        component_of[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        let levels: Vec<i32> = components
            .iter()
            .map(|members| {
                let l = self.level(members[0], class);
                assert!(
                    members.iter().all(|&x| self.level(x, class) == l),
                    "level not constant on a component"
                );
                l
            })
            .collect();
        let dir = Complex64::from_polar(1.0, phi);
        let mut adjacency = Vec::new();
        for (e, &[a, b]) in map.edges().iter().enumerate() {
            if !separating(e) {
                continue;
            }
            let (from, to) =
                if (map.pos(b) - map.pos(a) - dir * self.delta).norm() < 1e-6 * self.delta {
                    (a, b)
                } else {
                    (b, a)
                };
            let pair = (component_of[from], component_of[to]);
            if !adjacency.contains(&pair) {
                adjacency.push(pair);
            }
        }
        adjacency.sort_unstable();
        let origin_component = component_of[map.origin()];
        SlopeDecomposition {
            phi,
            class,
            components,
            component_of,
            levels,
            adjacency,
            origin_component,
        }
    }

    /// Convexity by the boundary order of parallel track ends. Also returns
    /// the first offending pair of outward track ids.
    pub fn convexity(&self, map: &CriticalMap) -> Convexity {
        let cycle = map
            .boundary_cycle()
            .expect("valid map has a boundary cycle");
        let position = |(a, b): (usize, usize)| {
            (0..cycle.len())
                .find(|&i| cycle[i] == a && cycle[(i + 1) % cycle.len()] == b)
                .expect("boundary edge on cycle")
        };
        for line in self.lines() {
            let opp = self.opposite_class[line];
            let members: Vec<usize> = (0..self.num_unoriented())
                .filter(|&u| {
                    let c = self.outward(u).class;
                    c == line || c == opp
                })
                .collect();
            // ends oriented with the common slope `line`
            let ends: Vec<(usize, usize)> = members
                .iter()
                .map(|&u| {
                    let t = self.outward(u);
                    let (p, m) = if t.class == line {
                        (t.e_plus, t.e_minus)
                    } else {
                        (t.e_minus, t.e_plus)
                    };
                    (position(p), position(m))
                })
                .collect();
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    if !is_convex_pair(ends[i], ends[j]) {
                        return Convexity {
                            convex: false,
                            witness: Some((2 * members[i], 2 * members[j])),
                        };
                    }
                }
            }
        }
        Convexity {
            convex: true,
            witness: None,
        }
    }

    /// Convexity by the component criterion: no slope has two components
    /// at the same level.
    pub fn convex_by_components(&self, map: &CriticalMap) -> bool {
        self.lines().into_iter().all(|c| {
            let mut levels = self.slope_decomposition(map, c).levels;
            let len = levels.len();
            levels.sort_unstable();
            levels.dedup();
            levels.len() == len
        })
    }
}

/// Whether two parallel tracks with boundary positions `(plus, minus)` are
/// stacked: in cyclic order the ends read `X+ X- Y- Y+` for some labelling.
fn is_convex_pair(x: (usize, usize), y: (usize, usize)) -> bool {
    let mut labelled = [(x.0, 0u8), (x.1, 1), (y.0, 2), (y.1, 3)];
    labelled.sort_unstable();
    let seq: Vec<u8> = labelled.iter().map(|&(_, l)| l).collect();
    let patterns = [[0u8, 1, 3, 2], [2, 3, 1, 0]];
    (0..4).any(|r| {
        patterns
            .iter()
            .any(|p| (0..4).all(|k| seq[(r + k) % 4] == p[k]))
    })
}

fn walk_faces(map: &CriticalMap, start: (usize, usize)) -> Vec<usize> {
    let mut faces = Vec::new();
    let mut edge = map.edge_id(start.0, start.1).unwrap();
    let mut prev: Option<usize> = None;
    loop {
        let Some(&face) = map.edge_faces(edge).iter().find(|&&f| Some(f) != prev) else {
            break;
        };
        assert!(!faces.contains(&face), "train-track self-intersects");
        faces.push(face);
        let quad = &map.faces()[face];
        let k = (0..4)
            .find(|&k| {
                let (a, b) = face_side(quad, k);
                map.edge_id(a, b) == Some(edge)
            })
            .unwrap();
        let (a, b) = face_side(quad, k + 2);
        edge = map.edge_id(a, b).unwrap();
        prev = Some(face);
    }
    faces
}

/// Groups angles into classes of circular width `ANGLE_TOLERANCE`.
fn bucket_angles(angles: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut classes: Vec<f64> = Vec::new();
    let mut class_of = Vec::with_capacity(angles.len());
    for &a in angles {
        match classes
            .iter()
            .position(|&c| angle_distance(c, a) <= ANGLE_TOLERANCE)
        {
            Some(c) => class_of.push(c),
            None => {
                class_of.push(classes.len());
                classes.push(a);
            }
        }
    }
    (classes, class_of)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convexity {
    pub convex: bool,
    pub witness: Option<(usize, usize)>,
}

/// Connected components of the map minus the rhombi of one slope.
#[derive(Clone, Debug)]
pub struct SlopeDecomposition {
    pub phi: f64,
    pub class: usize,
    /// Vertex sets, ordered by smallest member; each sorted.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Level of each component; the origin component has level 0.
    pub levels: Vec<i32>,
    /// `(m, m')` when an edge of angle `phi` leads from `m` to `m'`.
    pub adjacency: Vec<(usize, usize)>,
    pub origin_component: usize,
}

impl SlopeDecomposition {
    /// Components at the given level.
    pub fn at_level(&self, level: i32) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&m| self.levels[m] == level)
            .collect()
    }
}
