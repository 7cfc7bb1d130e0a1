//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 when a computation or validation fails, 2 on usage errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::calculus::{
    is_holomorphic, monomial, scaled_monomials, VertexFunction, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::exponentials::{fit_order, refinement_sweep, ExpField};
use crate::map::{
    build_multigrid, build_square, build_trihex, build_u_shape, default_offsets, load,
    symmetric_angles, to_json, validate_critical, CriticalMap,
};
use crate::render::render_svg;
use crate::spectral::{
    default_params, exp_basis, integration_spectrum, jittered_params, kappa_expansion,
    special_exponential,
};
use crate::tracks::Tracks;

/// Environment variable overriding the default tolerance.
pub const TOLERANCE_ENV: &str = "RHOMBEX_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "rhombex",
    version,
    about = "Discrete complex analysis on critical rhombic maps"
)]
pub struct Cli {
    /// Tolerance for holomorphy checks (overrides RHOMBEX_TOL).
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Square,
    Trihex,
    Ushape,
    Multigrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a map and write it as JSON.
    Gen {
        #[arg(long, value_enum)]
        kind: MapKind,
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        height: usize,
        /// Hexagon side (trihex) or patch radius (multigrid).
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0, value_parser = positive)]
        delta: f64,
        /// Number of line families of a multigrid.
        #[arg(long, default_value_t = 5)]
        families: usize,
        /// Draw random multigrid offsets from this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a map and certify convexity.
    Check {
        map: PathBuf,
        /// Print the convexity verdict (the default behaviour).
        #[arg(long)]
        convex: bool,
        /// Exit with status 1 when the map is not convex.
        #[arg(long)]
        require_convex: bool,
    },
    /// List oriented train-tracks as CSV.
    Tracks { map: PathBuf },
    /// Discrete monomial Z^{:k:} as CSV.
    Poly {
        map: PathBuf,
        #[arg(long)]
        k: usize,
        /// Divide by k!.
        #[arg(long)]
        scaled: bool,
    },
    /// Discrete exponential as CSV, or its Laurent jets with --jet.
    Exp {
        map: PathBuf,
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        lambda: Option<Complex64>,
        /// Expansion point of the Laurent jets.
        #[arg(long, value_parser = complex, allow_hyphen_values = true, conflicts_with = "lambda")]
        jet: Option<Complex64>,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Rank report of an exponential evaluation matrix (JSON).
    Basis {
        map: PathBuf,
        /// Also test this many randomly jittered parameter rings.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Special exponential of a train-track.
    Special {
        map: PathBuf,
        #[arg(long)]
        track: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Expansion of Exp(μ) on special exponentials (JSON).
    Kappa {
        map: PathBuf,
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        mu: Complex64,
    },
    /// Spectrum of the integration operator (JSON).
    Spectrum { map: PathBuf },
    /// Refine a map by splitting every rhombus into four.
    Refine {
        map: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Refinement sweep of Exp(λ, x) against e^{λx} with the fitted order.
    Converge {
        /// Map to refine (default: a single square of side 1).
        map: Option<PathBuf>,
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        x: Complex64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Contour-integral Green's function (experimental), CSV per Gamma vertex.
    #[cfg(feature = "green")]
    Green {
        map: PathBuf,
        /// Outer radius of the keyhole contour (default 1.25·max|P|).
        #[arg(long)]
        outer: Option<f64>,
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        /// Also write the harmonicity report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write an SVG picture of the map.
    Render {
        map: PathBuf,
        /// VertexFunction CSV used to colour the vertices.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

/// Parses `re,im` (or a bare real number).
pub fn complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|e| format!("bad number {p:?}: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im, got {s:?}")),
    }
}

/// Outcome of a subcommand: text for standard output and the exit code.
struct Outcome {
    stdout: String,
    code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn tolerance(cli: &Cli) -> Result<f64> {
    if let Some(t) = cli.tol {
        return Ok(t);
    }
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => positive(&s).map_err(|e| Error::InvalidArgument(format!("{TOLERANCE_ENV}: {e}"))),
        Err(_) => Ok(DEFAULT_TOLERANCE),
    }
}

fn write_or_return(output: &Option<PathBuf>, text: String) -> Result<Outcome> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(text)),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = tolerance(cli)?;
    match &cli.command {
        Command::Gen {
            kind,
            width,
            height,
            radius,
            delta,
            families,
            seed,
            output,
        } => {
            let map = match kind {
                MapKind::Square => build_square(*width, *height, *delta),
                MapKind::Trihex => build_trihex(radius.round().max(1.0) as usize, *delta),
                MapKind::Ushape => build_u_shape(*delta),
                MapKind::Multigrid => {
                    let offsets = match seed {
                        Some(s) => {
                            let mut rng = ChaCha8Rng::seed_from_u64(*s);
                            (0..*families).map(|_| rng.gen_range(0.05..0.95)).collect()
                        }
                        None => default_offsets(*families),
                    };
                    build_multigrid(&symmetric_angles(*families), &offsets, *radius, *delta)?
                }
            };
            write_or_return(output, to_json(&map))
        }
        Command::Check {
            map,
            convex: _,
            require_convex,
        } => {
            let map = load(map)?;
            let report = validate_critical(&map);
            if !report.is_valid() {
                let mut out = String::from("INVALID\n");
                for v in &report.violations {
                    out.push_str(&format!("{v}\n"));
                }
                return Ok(Outcome {
                    stdout: out,
                    code: 1,
                });
            }
            let tracks = Tracks::extract(&map);
            let c = tracks.convexity(&map);
            match c.witness {
                None => Ok(Outcome::ok("CONVEX\n".into())),
                Some((a, b)) => Ok(Outcome {
                    stdout: format!("NONCONVEX {a} {b}\n"),
                    code: if *require_convex { 1 } else { 0 },
                }),
            }
        }
        Command::Tracks { map } => {
            let map = load(map)?;
            let tracks = Tracks::extract(&map);
            let mut out =
                String::from("track_id,theta,pole_re,pole_im,positively_oriented,n_faces\n");
            for t in tracks.tracks() {
                out.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e},{},{}\n",
                    t.id,
                    t.theta,
                    t.pole.re,
                    t.pole.im,
                    t.positively_oriented,
                    t.faces.len()
                ));
            }
            Ok(Outcome::ok(out))
        }
        Command::Poly { map, k, scaled } => {
            let map = load(map)?;
            let f = if *scaled {
                scaled_monomials(&map, *k).pop().expect("degree k present")
            } else {
                monomial(&map, *k)
            };
            let (ok, residual) = is_holomorphic(&map, &f, tol);
            if !ok {
                eprintln!("warning: CR residual {residual:e} exceeds tolerance {tol:e}");
            }
            Ok(Outcome::ok(f.to_csv()))
        }
        Command::Exp {
            map,
            lambda,
            jet,
            order,
        } => {
            let map = load(map)?;
            let field = ExpField::new(&map);
            match (lambda, jet) {
                (Some(l), _) => Ok(Outcome::ok(field.function(*l)?.to_csv())),
                (None, Some(l0)) => {
                    let mut out = String::from("vertex_id,lead_exp");
                    for j in 0..=*order {
                        out.push_str(&format!(",c{j}_re,c{j}_im"));
                    }
                    out.push('\n');
                    for x in 0..map.num_vertices() {
                        let jet = field.jet(*l0, x, *order);
                        out.push_str(&format!("{x},{}", jet.lead));
                        for j in 0..=*order {
                            let c = jet.coeffs.get(j).copied().unwrap_or_default();
                            out.push_str(&format!(",{:.16e},{:.16e}", c.re, c.im));
                        }
                        out.push('\n');
                    }
                    Ok(Outcome::ok(out))
                }
                (None, None) => Err(Error::InvalidArgument(
                    "one of --lambda or --jet is required".into(),
                )),
            }
        }
        Command::Basis { map, random, seed } => {
            let map = load(map)?;
            let n = map.expected_dimension();
            let mut sets = vec![default_params(&map, n)];
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*random {
                sets.push(jittered_params(&map, n, &mut rng));
            }
            let mut reports = Vec::new();
            let mut all_full = true;
            for params in &sets {
                let b = exp_basis(&map, params)?;
                all_full &= b.is_full_rank();
                reports.push(json!({
                    "params": params.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "rank": b.rank.rank,
                    "gap": b.rank.gap,
                    "singular_values": b.rank.singular_values,
                }));
            }
            let v = json!({ "n": n, "full_rank": all_full, "draws": reports });
            Ok(Outcome::ok(pretty(&v)))
        }
        Command::Special { map, track, format } => {
            let map = load(map)?;
            let field = ExpField::new(&map);
            let s = special_exponential(&map, &field, *track)?;
            match format {
                Format::Csv => Ok(Outcome::ok(s.values.to_csv())),
                Format::Json => {
                    let v = json!({
                        "track": s.track,
                        "lambda0": cjson(s.lambda0),
                        "level": s.level(),
                        "residual": s.residual,
                        "home_component": s.home,
                        "reachable": s.reachable,
                        "mu": s.mu.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                        "values": s.values.values().iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                    });
                    Ok(Outcome::ok(pretty(&v)))
                }
            }
        }
        Command::Kappa { map, mu } => {
            let map = load(map)?;
            let field = ExpField::new(&map);
            let k = kappa_expansion(&map, &field, *mu)?;
            let v = json!({
                "mu": cjson(k.mu),
                "tracks": k.tracks,
                "kappa": k.kappa.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "kappa_global": k.kappa_global.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "residual": k.residual,
                "global_residual": k.global_residual,
            });
            Ok(Outcome::ok(pretty(&v)))
        }
        Command::Spectrum { map } => {
            let map = load(map)?;
            let s = integration_spectrum(&map)?;
            let v = json!({
                "n": s.n,
                "a": s.a.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "eigenvalues": s.eigenvalues.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "multiplicities": s.multiplicities,
                "residuals": s.residuals,
            });
            Ok(Outcome::ok(pretty(&v)))
        }
        Command::Refine { map, output } => {
            let map = load(map)?;
            write_or_return(output, to_json(&map.refine()))
        }
        Command::Converge {
            map,
            lambda,
            x,
            levels,
        } => {
            let map: CriticalMap = match map {
                Some(p) => load(p)?,
                None => build_square(1, 1, 1.0),
            };
            let points = refinement_sweep(&map, *lambda, *x, *levels)?;
            let mut out = String::from("delta,value_re,value_im,error\n");
            for p in &points {
                out.push_str(&format!(
                    "{},{:.10},{:.10},{:.6e}\n",
                    p.delta, p.value.re, p.value.im, p.error
                ));
            }
            if points.len() >= 2 {
                out.push_str(&format!("order,{:.4}\n", fit_order(&points)));
            }
            Ok(Outcome::ok(out))
        }
        #[cfg(feature = "green")]
        Command::Green {
            map,
            outer,
            nodes,
            report,
        } => {
            use crate::green::{green_check, green_function, ContourSpec};
            let map = load(map)?;
            let field = ExpField::new(&map);
            let mut spec = ContourSpec::default_for(&field, *nodes);
            if let Some(r) = outer {
                spec = spec.with_outer(*r);
            }
            let g = green_function(&map, &field, &spec)?;
            if let Some(path) = report {
                let r = green_check(&map, &field, &spec)?;
                let text = pretty(&serde_json::to_value(&r).expect("report serializes"));
                fs::write(path, text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            let mut out = String::from("vertex_id,g_value\n");
            for x in 0..map.num_vertices() {
                if map.color(x) == crate::map::Color::Gamma {
                    out.push_str(&format!("{x},{:.16e}\n", g[x].re));
                }
            }
            Ok(Outcome::ok(out))
        }
        Command::Render {
            map,
            function,
            output,
        } => {
            let map = load(map)?;
            let f = match function {
                Some(path) => Some(VertexFunction::from_csv(
                    &read_text(path)?,
                    map.num_vertices(),
                )?),
                None => None,
            };
            write_or_return(output, render_svg(&map, f.as_ref()))
        }
    }
}
