#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rhombex::map::{
    build_multigrid, build_square, build_trihex, default_offsets, symmetric_angles, CriticalMap,
};
use rhombex::Complex64;

pub struct Named {
    pub name: String,
    pub map: CriticalMap,
}

fn named(name: &str, map: CriticalMap) -> Named {
    Named {
        name: name.to_string(),
        map,
    }
}

/// Small maps used throughout: squares up to 6×6, trihex patches up to
/// radius 3 and one Penrose-type multigrid patch.
pub fn desk_maps() -> Vec<Named> {
    let mut out = Vec::new();
    for (w, h) in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 4), (6, 6)] {
        out.push(named(&format!("square {w}x{h}"), build_square(w, h, 1.0)));
    }
    for r in 1..=3 {
        out.push(named(&format!("trihex r={r}"), build_trihex(r, 1.0)));
    }
    let mg = build_multigrid(&symmetric_angles(5), &default_offsets(5), 2.5, 1.0)
        .expect("multigrid patch");
    out.push(named("multigrid 5", mg));
    out
}

/// Uniform point of the disc of radius `r`.
pub fn random_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())
}

/// Random `λ` with modulus in `[lo, hi]`, staying at relative distance at
/// least `gap` from every pole of `map`.
pub fn random_off_pole(
    rng: &mut ChaCha8Rng,
    map: &CriticalMap,
    lo: f64,
    hi: f64,
    gap: f64,
) -> Complex64 {
    let poles: Vec<Complex64> = rhombex::tracks::Tracks::extract(map)
        .tracks()
        .iter()
        .map(|t| t.pole)
        .collect();
    let scale = 2.0 / map.delta();
    loop {
        let z = Complex64::from_polar(rng.gen_range(lo..hi), TAU * rng.gen::<f64>());
        if poles.iter().all(|p| (z - p).norm() > gap * scale) {
            return z;
        }
    }
}
