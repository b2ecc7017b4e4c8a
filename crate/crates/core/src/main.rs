//! `hillmap` command-line front end.
//!
//! Settings resolve per key: an explicit flag wins, then a `key = value`
//! line in the `--config` file, then the built-in default. Every resolved
//! key is echoed into the output header.

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use hillmap::ensemble::{convergence_experiment, InitialDistribution};
use hillmap::hill::{band_diagram_csv, spectrum_bands, Potential};
use hillmap::lyapunov::{average_lyapunov_orbit, average_lyapunov_quadrature, i_integral, lyapunov_tent};
use hillmap::maps::{gen_logistic_coeffs, gen_logistic_coeffs_int, iterate, MapDescriptor, MathieuFormula};
use hillmap::numerics::ToleranceSpec;
use hillmap::transfer::{evolve_genlogistic, mixing_correlation, KappaDensity, SmoothDensity, StepDensity};
use hillmap::Error;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{Display, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Mutex;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "HILLMAP_OUT_DIR";

#[derive(Parser)]
#[command(name = "hillmap", version, about = "Hill operators, chaotic maps and their invariant measures")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output file; relative paths are placed under $HILLMAP_OUT_DIR when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Plain-text `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit the generation time so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Debug)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral bands of a periodic Hill operator.
    Bands(BandsArgs),
    /// Orbit of a one-dimensional map.
    Orbit(OrbitArgs),
    /// Exact density evolution under f_m on the κ-grid.
    DensityEvolve(DensityArgs),
    /// Monte Carlo convergence experiment with Wasserstein-1 distances.
    Ensemble(EnsembleArgs),
    /// Lyapunov exponent of f_m.
    Lyapunov(LyapunovArgs),
    /// Sweep of the integral I(a).
    IntegralSweep(SweepArgs),
    /// Orbit formula from the Mathieu discriminant against direct iteration.
    Mathieu(MathieuArgs),
    /// Exact mixing correlation of the tent map.
    MixingCheck(MixingArgs),
    /// Integer coefficients of f_m, highest degree first.
    Coeffs(CoeffsArgs),
}

#[derive(Args)]
struct BandsArgs {
    /// free, constant, cosine or mathieu.
    #[arg(long)]
    potential: Option<String>,
    /// Height of a constant potential or amplitude of a cosine one.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Angular frequency of a cosine potential.
    #[arg(long)]
    frequency: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Emit the band diagram with this many k points per band instead of edges.
    #[arg(long)]
    diagram_points: Option<usize>,
    /// Step budget of each ODE integration.
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args)]
struct OrbitArgs {
    /// logistic, gen-logistic, tent, fold or chebyshev.
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    /// uniform, gamma or invariant.
    #[arg(long)]
    initial: Option<String>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// gamma (Γ(1,1) - 2) or uniform (on [-2, 2]).
    #[arg(long)]
    dist: Option<String>,
    /// reject, clamp or none.
    #[arg(long)]
    truncation: Option<String>,
}

#[derive(Args)]
struct LyapunovArgs {
    #[arg(long)]
    m: Option<u32>,
    /// quadrature, orbit or tent.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    a_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct MathieuArgs {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Args)]
struct MixingArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Endpoints as `p/q` or decimals.
    #[arg(long)]
    a_lo: Option<String>,
    #[arg(long)]
    a_hi: Option<String>,
    #[arg(long)]
    b_lo: Option<String>,
    #[arg(long)]
    b_hi: Option<String>,
}

#[derive(Args)]
struct CoeffsArgs {
    #[arg(long)]
    m: Option<u32>,
}

/// Flag, then config file, then default; records what was used.
struct Resolver {
    file: BTreeMap<String, String>,
    used: Mutex<BTreeSet<String>>,
    resolved: Mutex<Vec<(String, String)>>,
}

impl Resolver {
    fn new(path: Option<&PathBuf>) -> Result<Self, Error> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
            for (no, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("{}:{}: expected `key = value`", path.display(), no + 1)))?;
                let key = k.trim().replace('_', "-");
                if file.insert(key.clone(), v.trim().to_string()).is_some() {
                    return Err(Error::Config(format!("{}: duplicate key `{key}`", path.display())));
                }
            }
        }
        Ok(Self { file, used: Mutex::default(), resolved: Mutex::default() })
    }

    fn get<T: FromStr + Display>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, Error>
    where
        T::Err: Display,
    {
        self.used.lock().unwrap().insert(key.to_string());
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(text)) => {
                text.parse().map_err(|e| Error::Config(format!("config key `{key}` = `{text}`: {e}")))?
            }
            (None, None) => default,
        };
        self.resolved.lock().unwrap().push((key.to_string(), value.to_string()));
        Ok(value)
    }

    fn finish(&self) -> Result<Vec<(String, String)>, Error> {
        let used = self.used.lock().unwrap();
        if let Some(k) = self.file.keys().find(|k| !used.contains(*k)) {
            return Err(Error::Config(format!("unknown config key `{k}`")));
        }
        Ok(self.resolved.lock().unwrap().clone())
    }
}

/// A resolved format that is independent of `Format`'s `Display`.
struct FormatName(Format);

impl Display for FormatName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for FormatName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Format::from_str(s, true).map(FormatName)
    }
}

enum Payload {
    /// CSV body plus extra `#` comment lines.
    Csv(String, Vec<String>),
    Json(Value),
    /// Printed verbatim when writing to standard output.
    Raw(String, Box<Payload>),
}

struct Output {
    command: &'static str,
    path: Option<PathBuf>,
    format: Format,
    timestamp: bool,
}

impl Output {
    fn destination(&self) -> Option<PathBuf> {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        match (&self.path, dir) {
            (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(d)) => Some(d.join(format!("{}.{ext}", self.command))),
            (None, None) => None,
        }
    }

    fn render(&self, payload: Payload, config: &[(String, String)]) -> String {
        let now =
            || std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        match payload {
            Payload::Csv(body, comments) => {
                let mut out = format!("# hillmap {}\n", self.command);
                for (k, v) in config {
                    writeln!(out, "# {k} = {v}").unwrap();
                }
                if self.timestamp {
                    writeln!(out, "# generated_unix = {}", now()).unwrap();
                }
                for c in comments {
                    writeln!(out, "# {c}").unwrap();
                }
                out + &body
            }
            Payload::Json(data) => {
                let cfg: serde_json::Map<String, Value> =
                    config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                let mut doc = json!({ "command": self.command, "config": cfg, "data": data });
                if self.timestamp {
                    doc["generated_unix"] = json!(now());
                }
                serde_json::to_string_pretty(&doc).expect("json output") + "\n"
            }
            Payload::Raw(_, inner) => self.render(*inner, config),
        }
    }

    fn write(&self, payload: Payload, config: &[(String, String)]) -> Result<(), Error> {
        match self.destination() {
            None => {
                let text = match payload {
                    Payload::Raw(raw, _) => raw,
                    other => self.render(other, config),
                };
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| Error::Config(format!("cannot create {}: {e}", parent.display())))?;
                }
                std::fs::write(&path, self.render(payload, config))
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
            }
        }
    }
}

fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let bad = || Error::Config(format!("cannot read `{text}` as a rational number"));
    if let Some((p, q)) = text.split_once('/') {
        let p: num_bigint::BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: num_bigint::BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == num_bigint::BigInt::from(0) {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        let x: f64 = text.trim().parse().map_err(|_| bad())?;
        BigRational::from_float(x).ok_or_else(bad)
    }
}

fn tabulate<I: IntoIterator<Item = Vec<String>>>(header: &str, rows: I) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_command(command: &Command, r: &Resolver, format: Format) -> Result<(&'static str, Payload), Error> {
    match command {
        Command::Bands(a) => {
            let tol = ToleranceSpec {
                max_steps: r.get("max-steps", a.max_steps, ToleranceSpec::ivp().max_steps)?,
                ..ToleranceSpec::ivp()
            };
            let kind = r.get("potential", a.potential.clone(), "free".to_string())?;
            let amplitude = r.get("amplitude", a.amplitude, 1.0)?;
            let frequency = r.get("frequency", a.frequency, 2.0 * std::f64::consts::PI)?;
            let l = r.get("l", a.l, 1.0)?;
            let lambda_max = r.get("lambda-max", a.lambda_max, 40.0)?;
            let points = r.get("diagram-points", a.diagram_points, 0)?;
            let v = match kind.as_str() {
                "free" => Potential::free(),
                "constant" => Potential::constant(amplitude),
                "cosine" => Potential::cosine(amplitude, frequency)?,
                "mathieu" => Potential::mathieu(),
                other => return Err(Error::Config(format!("unknown potential `{other}`"))),
            };
            let bands = spectrum_bands(&v, l, lambda_max, &tol)?;
            let payload = match format {
                Format::Json if points > 0 => {
                    let csv = band_diagram_csv(&v, l, &bands, points, &tol)?;
                    json!({ "bands": bands, "diagram_csv": csv })
                }
                Format::Json => serde_json::to_value(&bands).expect("bands"),
                Format::Csv => {
                    let comments = bands.warnings.iter().map(|w| format!("warning: {w}")).collect();
                    let body = if points > 0 {
                        band_diagram_csv(&v, l, &bands, points, &tol)?
                    } else {
                        tabulate(
                            "band_index,lower,upper",
                            bands
                                .bands
                                .iter()
                                .enumerate()
                                .map(|(i, b)| vec![i.to_string(), num(b.lower), num(b.upper)]),
                        )
                    };
                    return Ok(("bands", Payload::Csv(body, comments)));
                }
            };
            Ok(("bands", Payload::Json(payload)))
        }
        Command::Orbit(a) => {
            let family = r.get("map", a.map.clone(), "gen-logistic".to_string())?;
            let m = r.get("m", a.m, 2)?;
            let rate = r.get("r", a.r, 4.0)?;
            let x0 = r.get("x0", a.x0, 0.3)?;
            let steps = r.get("steps", a.steps, 100)?;
            let map = match family.as_str() {
                "logistic" => MapDescriptor::logistic(rate)?,
                "gen-logistic" => MapDescriptor::gen_logistic(m)?,
                "tent" => MapDescriptor::tent(m)?,
                "fold" => MapDescriptor::fold(m)?,
                "chebyshev" => MapDescriptor::chebyshev(m)?,
                other => return Err(Error::Config(format!("unknown map `{other}`"))),
            };
            let orbit = iterate(&map, x0, steps)?;
            Ok(match format {
                Format::Csv => ("orbit", Payload::Csv(orbit.to_csv(), vec![])),
                Format::Json => ("orbit", Payload::Json(serde_json::to_value(&orbit).expect("orbit"))),
            })
        }
        Command::DensityEvolve(a) => {
            let m = r.get("m", a.m, 2)?;
            let steps = r.get("steps", a.steps, 8)?;
            let resolution = r.get("resolution", a.resolution, hillmap::transfer::DEFAULT_KAPPA_RESOLUTION)?;
            let initial = r.get("initial", a.initial.clone(), "uniform".to_string())?;
            let start = match initial.as_str() {
                "uniform" => KappaDensity::from_delta_step(&StepDensity::constant(-2.0, 2.0, 0.25)?, resolution)?,
                "gamma" => {
                    let norm = 1.0 - (-4f64).exp();
                    let g = SmoothDensity::new(move |d| (-(d + 2.0)).exp() / norm, (-2.0, 2.0), vec![])?;
                    KappaDensity::from_delta_smooth(&g, resolution, &ToleranceSpec::quad())?
                }
                "invariant" => KappaDensity::invariant(resolution)?,
                other => return Err(Error::Config(format!("unknown initial density `{other}`"))),
            };
            let (_, report) = evolve_genlogistic(&start, m, steps)?;
            Ok(match format {
                Format::Json => ("density-evolve", Payload::Json(serde_json::to_value(&report).expect("report"))),
                Format::Csv => {
                    let body = tabulate(
                        "step,l1_to_invariant,mass,resolution",
                        report.iter().map(|s| {
                            vec![s.step.to_string(), num(s.l1_to_invariant), num(s.mass), s.resolution.to_string()]
                        }),
                    );
                    ("density-evolve", Payload::Csv(body, vec![]))
                }
            })
        }
        Command::Ensemble(a) => {
            let m = r.get("m", a.m, 2)?;
            let samples = r.get("samples", a.samples, 1_000_000)?;
            let iters = r.get("iters", a.iters, 8)?;
            let seed = r.get("seed", a.seed, 42)?;
            let dist_name = r.get("dist", a.dist.clone(), "gamma".to_string())?;
            let truncation = r.get("truncation", a.truncation.clone(), "reject".to_string())?;
            let dist = match dist_name.as_str() {
                "gamma" => InitialDistribution::shifted_gamma(1.0, 1.0, -2.0),
                "uniform" => InitialDistribution::uniform(-2.0, 2.0),
                other => return Err(Error::Config(format!("unknown distribution `{other}`"))),
            };
            let dist = match truncation.as_str() {
                "reject" => dist,
                "clamp" => dist.clamped(),
                "none" => dist.untruncated(),
                other => return Err(Error::Config(format!("unknown truncation policy `{other}`"))),
            };
            let report = convergence_experiment(m, &dist, samples, iters, seed)?;
            Ok(match format {
                Format::Json => ("ensemble", Payload::Json(serde_json::to_value(&report).expect("report"))),
                Format::Csv => {
                    let slope = report.fitted_slope.map_or("none".to_string(), num);
                    let comments = vec![
                        format!("fitted_slope = {slope}"),
                        format!("fit_range = {:?}", report.fit_range),
                        format!("noise_floor = {}", num(report.noise_floor)),
                        format!("out_of_domain = {}", report.out_of_domain),
                    ];
                    ("ensemble", Payload::Csv(report.distances_csv(), comments))
                }
            })
        }
        Command::Lyapunov(a) => {
            let m = r.get("m", a.m, 2)?;
            let method = r.get("method", a.method.clone(), "quadrature".to_string())?;
            let x0 = r.get("x0", a.x0, 0.123456)?;
            let n = r.get("n", a.n, 1_000_000)?;
            let result = match method.as_str() {
                "quadrature" => average_lyapunov_quadrature(m, &ToleranceSpec::quad())?,
                "orbit" => average_lyapunov_orbit(m, x0, n)?,
                "tent" => lyapunov_tent(m)?,
                other => return Err(Error::Config(format!("unknown method `{other}`"))),
            };
            Ok(match format {
                Format::Json => ("lyapunov", Payload::Json(serde_json::to_value(&result).expect("result"))),
                Format::Csv => {
                    let body = tabulate(
                        "m,method,value,error_estimate",
                        [vec![m.to_string(), method, num(result.value), num(result.error_estimate)]],
                    );
                    ("lyapunov", Payload::Csv(body, vec![]))
                }
            })
        }
        Command::IntegralSweep(a) => {
            let lo = r.get("a-min", a.a_min, -4.0)?;
            let hi = r.get("a-max", a.a_max, 4.0)?;
            let points = r.get("points", a.points, 161)?;
            if points < 2 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(Error::Config("integral sweep needs a-min < a-max and at least 2 points".into()));
            }
            let qtol = ToleranceSpec::quad();
            let mut rows = Vec::with_capacity(points);
            for k in 0..points {
                let a = lo + (hi - lo) * k as f64 / (points - 1) as f64;
                rows.push((a, i_integral(a, &qtol)?));
            }
            Ok(match format {
                Format::Json => (
                    "integral-sweep",
                    Payload::Json(Value::Array(rows.iter().map(|(a, i)| json!({ "a": a, "I": i })).collect())),
                ),
                Format::Csv => (
                    "integral-sweep",
                    Payload::Csv(tabulate("a,I", rows.iter().map(|(a, i)| vec![num(*a), num(*i)])), vec![]),
                ),
            })
        }
        Command::Mathieu(a) => {
            let x0 = r.get("x0", a.x0, 0.3)?;
            let n_max = r.get("n-max", a.n_max, 4)?;
            let formula = MathieuFormula::new(&ToleranceSpec::ivp().with_abs(1e-12).with_rel(1e-12))?;
            let direct = iterate(&MapDescriptor::logistic(4.0)?, x0, n_max as usize)?;
            let mut rows = Vec::new();
            for n in 0..=n_max {
                let f = formula.eval(x0, n)?;
                let d = direct.values[n as usize];
                rows.push((n, f, d, (f - d).abs()));
            }
            Ok(match format {
                Format::Json => {
                    let table: Vec<Value> = rows
                        .iter()
                        .map(|(n, f, d, e)| json!({ "n": n, "formula": f, "direct": d, "abs_diff": e }))
                        .collect();
                    let data = json!({ "lambda0": formula.lambda0, "lambda_top": formula.lambda_top, "rows": table });
                    ("mathieu", Payload::Json(data))
                }
                Format::Csv => {
                    let comments = vec![
                        format!("lambda0 = {}", num(formula.lambda0)),
                        format!("lambda_top = {}", num(formula.lambda_top)),
                    ];
                    let body = tabulate(
                        "n,formula,direct,abs_diff",
                        rows.iter().map(|(n, f, d, e)| vec![n.to_string(), num(*f), num(*d), num(*e)]),
                    );
                    ("mathieu", Payload::Csv(body, comments))
                }
            })
        }
        Command::MixingCheck(a) => {
            let m = r.get("m", a.m, 2)?;
            let n = r.get("n", a.n, 3)?;
            let a_lo = parse_rational(&r.get("a-lo", a.a_lo.clone(), "0".to_string())?)?;
            let a_hi = parse_rational(&r.get("a-hi", a.a_hi.clone(), "1/4".to_string())?)?;
            let b_lo = parse_rational(&r.get("b-lo", a.b_lo.clone(), "0".to_string())?)?;
            let b_hi = parse_rational(&r.get("b-hi", a.b_hi.clone(), "1/2".to_string())?)?;
            let c = mixing_correlation(m, n, &(a_lo, a_hi), &(b_lo, b_hi))?;
            let approx = c.to_f64().unwrap_or(f64::NAN);
            Ok(match format {
                Format::Json => (
                    "mixing-check",
                    Payload::Json(json!({ "m": m, "n": n, "correlation_exact": c.to_string(), "correlation": approx })),
                ),
                Format::Csv => {
                    let body = tabulate(
                        "m,n,correlation_exact,correlation",
                        [vec![m.to_string(), n.to_string(), c.to_string(), num(approx)]],
                    );
                    ("mixing-check", Payload::Csv(body, vec![]))
                }
            })
        }
        Command::Coeffs(a) => {
            let m = r.get("m", a.m, 2)?;
            let coeffs: Vec<String> = match gen_logistic_coeffs_int(m) {
                Some(ints) => ints.iter().map(|c| c.to_string()).collect(),
                None => gen_logistic_coeffs(m).coefficients.iter().map(|c| c.to_string()).collect(),
            };
            let line = coeffs.join(" ") + "\n";
            let inner = match format {
                Format::Json => Payload::Json(json!({ "m": m, "coefficients": coeffs })),
                Format::Csv => Payload::Csv(
                    tabulate(
                        "degree,coefficient",
                        coeffs.iter().enumerate().map(|(i, c)| vec![(m as usize - i).to_string(), c.clone()]),
                    ),
                    vec![],
                ),
            };
            Ok(("coeffs", Payload::Raw(line, Box::new(inner))))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bands(_) => "bands",
        Command::Orbit(_) => "orbit",
        Command::DensityEvolve(_) => "density-evolve",
        Command::Ensemble(_) => "ensemble",
        Command::Lyapunov(_) => "lyapunov",
        Command::IntegralSweep(_) => "integral-sweep",
        Command::Mathieu(_) => "mathieu",
        Command::MixingCheck(_) => "mixing-check",
        Command::Coeffs(_) => "coeffs",
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let r = Resolver::new(cli.common.config.as_ref())?;
    let format = r.get("format", cli.common.format.map(FormatName), FormatName(Format::Csv))?.0;
    let threads = r.get("threads", cli.common.threads, 0usize)?;
    let out = r.get("out", cli.common.out.as_ref().map(|p| p.display().to_string()), String::new())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    let (name, payload) = pool.install(|| run_command(&cli.command, &r, format))?;
    debug_assert_eq!(name, command_name(&cli.command));
    let config = r.finish()?;
    let output = Output {
        command: name,
        path: if out.is_empty() { None } else { Some(PathBuf::from(out)) },
        format,
        timestamp: !cli.common.no_timestamp,
    };
    output.write(payload, &config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hillmap: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
