//! Acceptance suite: one line per criterion, non-zero exit status if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{desk_maps, random_disc, random_off_pole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhombex::calculus::{
    dual, epsilon, max_cr_residual, monomials, scaled_monomials, VertexFunction,
};
use rhombex::exponentials::{fit_order, growth_bound, refinement_sweep, series_function, ExpField};
use rhombex::map::{build_square, build_u_shape, submap, CriticalMap};
use rhombex::spectral::{
    closed_form_coeffs, default_params, exp_basis, expand_exp, integration_spectrum,
    jittered_params, kappa_expansion, positive_specials, special_basis_rank, ExpParam,
};
use rhombex::tracks::Tracks;
use rhombex::Complex64;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn is_convex(map: &CriticalMap) -> bool {
    Tracks::extract(map).convexity(map).convex
}

/// 1. Monomial exactness.
fn monomial_exactness() -> Check {
    let mut worst_cr: f64 = 0.0;
    for m in desk_maps() {
        let map = &m.map;
        let z = VertexFunction::position(map);
        let o = map.pos(map.origin());
        let mono = monomials(map, 30);
        for v in 0..map.num_vertices() {
            let dz = z[v] - o;
            ensure((mono[1][v] - dz).norm() <= 1e-12, || {
                format!("{}: Z^1 off at {v}", m.name)
            })?;
            ensure((mono[2][v] - dz * dz).norm() <= 1e-12, || {
                format!("{}: Z^2 off at {v}", m.name)
            })?;
        }
        for (k, f) in mono.iter().enumerate() {
            // difference quotients measured against the size of f
            let r = max_cr_residual(map, f) * map.delta() / f.sup_norm().max(1.0);
            worst_cr = worst_cr.max(r);
            ensure(r <= 1e-10, || {
                format!("{}: Z^{k} relative CR residual {r:e}", m.name)
            })?;
        }
    }
    Ok(format!("worst relative CR residual {worst_cr:.1e}"))
}

/// 2. Exponential identities, series and growth bound.
fn exponential_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let maps = desk_maps();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let m = &maps[i % maps.len()];
        let map = &m.map;
        let field = ExpField::new(map);
        let delta = map.delta();
        let lambda = random_off_pole(&mut rng, map, 0.05 * 2.0 / delta, 3.0 * 2.0 / delta, 0.05);
        let e = field.function(lambda).map_err(|e| e.to_string())?;
        let e_neg = field.function(-lambda).map_err(|e| e.to_string())?;
        let product = e.mul(&e_neg);
        let one = VertexFunction::constant(map, c(1.0, 0.0));
        let d1 = product.distance(&one);
        let mirrored = field
            .function(4.0 / (delta * delta * lambda.conj()))
            .map_err(|e| e.to_string())?;
        let scale = e.sup_norm().max(1.0);
        let d2 = dual(map, &e).distance(&mirrored) / scale;
        worst = worst.max(d1).max(d2);
        ensure(d1 <= 1e-11 && d2 <= 1e-11, || {
            format!("{}: λ={lambda}: product {d1:e}, duality {d2:e}", m.name)
        })?;
    }
    // series equals product inside |λ| ≤ 0.9·2/δ
    let mut worst_series: f64 = 0.0;
    for (i, m) in maps
        .iter()
        .enumerate()
        .filter(|(_, m)| m.map.num_vertices() <= 40)
    {
        let map = &m.map;
        let field = ExpField::new(map);
        for j in 0..5 {
            let r = 0.9 * 2.0 / map.delta();
            let lambda = if j == 0 {
                Complex64::from_polar(r, 0.3 + i as f64)
            } else {
                random_disc(&mut rng, r)
            };
            let product = field.function(lambda).map_err(|e| e.to_string())?;
            let series = series_function(map, lambda, 700);
            let d = series.distance(&product) / product.sup_norm().max(1.0);
            worst_series = worst_series.max(d);
            ensure(d <= 1e-8, || {
                format!("{}: series vs product {d:e} at λ={lambda}", m.name)
            })?;
        }
    }
    // growth bound
    for m in &maps {
        let map = &m.map;
        let dist = map.distances();
        let scaled = scaled_monomials(map, 30);
        for alpha in [1.5, 2.0] {
            for (k, f) in scaled.iter().enumerate() {
                for v in 0..map.num_vertices() {
                    let d = dist[v].expect("connected");
                    let bound = growth_bound(alpha, d, k, map.delta());
                    ensure(f[v].norm() <= bound * (1.0 + 1e-12), || {
                        format!(
                            "{}: |Z^{k}/k!| at {v} = {:e} > {bound:e}",
                            m.name,
                            f[v].norm()
                        )
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "identities {worst:.1e}, series {worst_series:.1e}, growth bound holds"
    ))
}

/// 3. Convex maps: `n` exponentials form a basis.
fn convex_basis() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_gap = f64::INFINITY;
    let mut checked = 0;
    for m in desk_maps().into_iter().filter(|m| is_convex(&m.map)) {
        let map = &m.map;
        let n = map.boundary_len() / 2 + 1;
        let mut sets = vec![default_params(map, n)];
        for _ in 0..20 {
            sets.push(jittered_params(map, n, &mut rng));
        }
        for params in sets {
            let b = exp_basis(map, &params).map_err(|e| e.to_string())?;
            min_gap = min_gap.min(b.rank.gap);
            ensure(b.rank.rank == n && b.rank.gap > 1e6, || {
                format!(
                    "{}: rank {} of {n}, gap {:.1e}",
                    m.name, b.rank.rank, b.rank.gap
                )
            })?;
        }
        checked += 1;
    }
    Ok(format!("{checked} convex maps, smallest gap {min_gap:.1e}"))
}

/// 4. Closed-form coefficients against direct expansion.
fn closed_form() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for m in desk_maps()
        .into_iter()
        .filter(|m| is_convex(&m.map) && m.map.num_vertices() <= 40)
    {
        let map = &m.map;
        let n = map.expected_dimension();
        let params = default_params(map, n);
        let lambdas: Vec<Complex64> = params
            .iter()
            .map(|p| p.finite().expect("finite defaults"))
            .collect();
        let basis = exp_basis(map, &params).map_err(|e| e.to_string())?;
        let lambda0 = random_off_pole(&mut rng, map, 0.1, 0.7 * 2.0 / map.delta(), 0.05);
        let mu0 = expand_exp(map, ExpParam::Finite(lambda0), &basis)
            .map_err(|e| e.to_string())?
            .coeffs;
        for _ in 0..20 {
            let lambda = random_off_pole(&mut rng, map, 0.1, 1.5 * 2.0 / map.delta(), 0.05);
            let closed =
                closed_form_coeffs(lambda, lambda0, &mu0, &lambdas).map_err(|e| e.to_string())?;
            let direct = expand_exp(map, ExpParam::Finite(lambda), &basis)
                .map_err(|e| e.to_string())?
                .coeffs;
            let d = closed
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(d);
            ensure(d <= 1e-8, || {
                format!("{}: λ={lambda}: deviation {d:e}", m.name)
            })?;
        }
        for (k, &lm) in lambdas.iter().enumerate() {
            let near = closed_form_coeffs(lm + c(1e-13, 1e-13), lambda0, &mu0, &lambdas)
                .map_err(|e| e.to_string())?;
            let d = near
                .iter()
                .enumerate()
                .map(|(j, z)| (z - if j == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm())
                .fold(0.0, f64::max);
            ensure(d <= 1e-8, || {
                format!("{}: limit at λ_{k} off by {d:e}", m.name)
            })?;
        }
    }
    Ok(format!("worst coefficient deviation {worst:.1e}"))
}

/// 5. Non-convex completion on the U-shaped map.
fn nonconvex_completion() -> Check {
    let map = build_u_shape(1.0);
    let field = ExpField::new(&map);
    let n = map.boundary_len() / 2 + 1;
    let plain = exp_basis(&map, &default_params(&map, n)).map_err(|e| e.to_string())?;
    ensure(plain.rank.rank < n, || {
        format!("plain exponentials have full rank {n}")
    })?;
    let rank = special_basis_rank(&map, &field).map_err(|e| e.to_string())?;
    ensure(rank.rank == n, || {
        format!("special rank {} != {n}", rank.rank)
    })?;
    let specials = positive_specials(&map, &field).map_err(|e| e.to_string())?;
    for s in &specials {
        let cr = max_cr_residual(&map, &s.values);
        ensure(cr <= 1e-9, || {
            format!("track {}: CR residual {cr:e}", s.track)
        })?;
        // reachability oracle: flood fill over slope-φ adjacency above the home level
        let dec = &s.decomposition;
        let floor = dec.levels[s.home];
        let mut reach: HashSet<usize> = HashSet::from([s.home]);
        loop {
            let before = reach.len();
            for &(a, b) in &dec.adjacency {
                for (p, q) in [(a, b), (b, a)] {
                    if reach.contains(&p) && dec.levels[q] >= floor {
                        reach.insert(q);
                    }
                }
            }
            if reach.len() == before {
                break;
            }
        }
        for (k, comp) in dec.components.iter().enumerate() {
            if !reach.contains(&k) {
                for &v in comp {
                    ensure(s.values[v].norm() <= 1e-12, || {
                        format!("track {}: nonzero at unreachable {v}", s.track)
                    })?;
                }
            }
        }
        for &v in &dec.components[s.home] {
            ensure(s.values[v].norm() > 1e-9, || {
                format!("track {}: vanishes on its home component", s.track)
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mu = random_off_pole(&mut rng, &map, 0.1, 4.0, 0.05);
        let k = kappa_expansion(&map, &field, mu).map_err(|e| e.to_string())?;
        worst = worst.max(k.residual);
        ensure(k.residual <= 1e-8, || {
            format!("κ reconstruction at μ={mu}: {:e}", k.residual)
        })?;
    }
    Ok(format!(
        "plain rank {} < {n}, special rank {n}, {} specials, κ residual {worst:.1e}",
        plain.rank.rank,
        specials.len()
    ))
}

/// 6. Spectrum of the integration operator.
fn spectrum() -> Check {
    let rhombus = build_square(1, 1, 1.0);
    let s = integration_spectrum(&rhombus).map_err(|e| e.to_string())?;
    let expected = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.5)];
    ensure(s.eigenvalues.len() == 3, || {
        format!("eigenvalues {:?}", s.eigenvalues)
    })?;
    for w in expected {
        ensure(
            s.eigenvalues.iter().any(|e| (e - w).norm() <= 1e-10),
            || format!("missing eigenvalue {w}"),
        )?;
    }
    let zero = s
        .eigenvalues
        .iter()
        .position(|e| e.norm() <= 1e-10)
        .expect("zero found above");
    let eps = epsilon(&rhombus);
    let v = &s.eigenvectors[zero];
    let ratio = v[0] / eps[0];
    ensure(v.distance(&eps.scale(ratio)) <= 1e-10, || {
        "eigenvector of 0 is not ε".into()
    })?;
    let mut worst: f64 = 0.0;
    let mut radius: f64 = 0.0;
    for m in desk_maps() {
        let s = integration_spectrum(&m.map).map_err(|e| format!("{}: {e}", m.name))?;
        for (e, r) in s.eigenvalues.iter().zip(&s.residuals) {
            worst = worst.max(*r);
            radius = radius.max(e.norm() / m.map.delta());
            ensure(*r <= 1e-9, || {
                format!("{}: residual {r:e} at λ={e}", m.name)
            })?;
            ensure(e.norm() <= m.map.delta() / 2.0 + 1e-9, || {
                format!("{}: |λ|={} > δ/2", m.name, e.norm())
            })?;
        }
    }
    Ok(format!(
        "worst eigenpair residual {worst:.1e}, max |λ|/δ {radius:.4}"
    ))
}

/// 7. Refinement order of `Exp_δ(1, 1) → e`.
fn refinement_order() -> Check {
    let map = build_square(1, 1, 1.0);
    let points = refinement_sweep(&map, c(1.0, 0.0), c(1.0, 0.0), 4).map_err(|e| e.to_string())?;
    let exact = [3.0, 25.0 / 9.0, (9.0f64 / 7.0).powi(4)];
    for (p, e) in points.iter().zip(exact) {
        ensure((p.value - e).norm() <= 1e-12, || {
            format!("δ={}: {} != {e}", p.delta, p.value)
        })?;
    }
    let slope = fit_order(&points);
    ensure((slope - 2.0).abs() <= 0.2, || {
        format!("fitted order {slope}")
    })?;
    Ok(format!("fitted order {slope:.3}"))
}

/// Random face set of `map` grown from a random face.
fn random_face_set(rng: &mut ChaCha8Rng, map: &CriticalMap, size: usize) -> Vec<usize> {
    let mut chosen = vec![rng.gen_range(0..map.num_faces())];
    let mut set: HashSet<usize> = chosen.iter().copied().collect();
    while chosen.len() < size {
        let mut frontier: Vec<usize> = Vec::new();
        for &f in &chosen {
            for &v in &map.faces()[f] {
                for &g in map.vertex_faces(v) {
                    let shared = map.faces()[g]
                        .iter()
                        .filter(|w| map.faces()[f].contains(w))
                        .count();
                    if shared == 2 && !set.contains(&g) && !frontier.contains(&g) {
                        frontier.push(g);
                    }
                }
            }
        }
        if frontier.is_empty() {
            break;
        }
        let g = frontier[rng.gen_range(0..frontier.len())];
        set.insert(g);
        chosen.push(g);
    }
    chosen.sort_unstable();
    chosen
}

/// 8. Convexity certifier.
fn convexity() -> Check {
    let rect = build_square(4, 3, 1.0);
    ensure(is_convex(&rect), || "rectangle reported NONCONVEX".into())?;
    let u = build_u_shape(1.0);
    let tracks = Tracks::extract(&u);
    let conv = tracks.convexity(&u);
    let (a, b) = conv.witness.ok_or("U-shape reported CONVEX")?;
    let (ta, tb) = (tracks.track(a).unwrap(), tracks.track(b).unwrap());
    ensure(
        ta.class == tb.class || tracks.opposite_class(ta.class) == tb.class,
        || "witness slopes differ".into(),
    )?;
    let dec = tracks.slope_decomposition(&u, ta.class);
    let (ha, hb) = (
        dec.component_of[ta.edges[0].1],
        dec.component_of[tb.edges[0].1],
    );
    ensure(ha != hb && dec.levels[ha] == dec.levels[hb], || {
        "witness tracks do not share a level".into()
    })?;

    let patch = build_square(6, 6, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut tested, mut nonconvex) = (0, 0);
    while tested < 100 {
        let size = rng.gen_range(3..=24);
        let faces = random_face_set(&mut rng, &patch, size);
        let Ok(sub) = submap(&patch, &faces) else {
            continue;
        };
        let t = Tracks::extract(&sub);
        let by_order = t.convexity(&sub).convex;
        let by_components = t.convex_by_components(&sub);
        ensure(by_order == by_components, || {
            format!("criteria disagree on faces {faces:?}")
        })?;
        tested += 1;
        nonconvex += usize::from(!by_order);
    }
    Ok(format!(
        "U-shape witness ({a}, {b}); {tested} sub-maps agree, {nonconvex} non-convex"
    ))
}

/// 9. Green's function harmonicity and contour independence.
#[cfg(feature = "green")]
fn green() -> Check {
    use rhombex::green::{green_check, green_function, ContourSpec};
    let full = build_square(11, 11, 1.0);
    let centre = full.find_vertex(c(5.0, 5.0), 1e-9).expect("centre vertex");
    let map = full.with_origin(centre).map_err(|e| e.to_string())?;
    let field = ExpField::new(&map);
    let spec = ContourSpec::default_for(&field, 512);
    let report = green_check(&map, &field, &spec).map_err(|e| e.to_string())?;
    ensure(report.max_residual <= 1e-6, || {
        format!("harmonicity residual {:e}", report.max_residual)
    })?;
    let a = green_function(&map, &field, &spec).map_err(|e| e.to_string())?;
    let wide = spec.clone().with_outer(1.5 * spec.outer);
    let b = green_function(&map, &field, &wide).map_err(|e| e.to_string())?;
    let d = a.distance(&b);
    ensure(d <= 1e-8, || format!("contour dependence {d:e}"))?;
    Ok(format!(
        "harmonic residual {:.1e} over {} vertices, contour change {d:.1e}, ΔG(O) = {:.6}",
        report.max_residual,
        report.checked,
        report.origin_laplacian.unwrap_or(f64::NAN)
    ))
}

#[cfg(not(feature = "green"))]
fn green() -> Check {
    Ok("skipped: built without the `green` feature".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, u64); 9] = [
        ("monomial exactness", monomial_exactness, 5),
        ("exponential identities", exponential_identities, 10),
        ("convex basis", convex_basis, 10),
        ("closed-form coefficients", closed_form, 10),
        ("non-convex completion", nonconvex_completion, 30),
        ("integration spectrum", spectrum, 10),
        ("refinement order", refinement_order, 10),
        ("convexity certifier", convexity, 10),
        ("green's function", green, 60),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let status = match (&result, over) {
            (Ok(_), false) => "PASS",
            _ => "FAIL",
        };
        let detail = match &result {
            Ok(s) => s.clone(),
            Err(e) => e.clone(),
        };
        let timing = format!("{:.2}s of {budget}s", elapsed.as_secs_f64());
        println!("criterion {} [{status}] {name}: {detail} ({timing})", i + 1);
        if status == "FAIL" {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
