mod record;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpp_core::analysis::{
    default_skeleton_window, dutta_c, dutta_c_or_zero, estimate_c_skeleton, radius_lower_bound, zubkov_rp,
};
use lpp_core::lpp::estimate_c_dp;
use lpp_core::measure::make_measure;
use lpp_core::mgs::{default_confirm_window, regenerative_estimate};
use lpp_core::numeric::{rational_from_f64, to_f64};
use lpp_core::selftest::{run_criterion, Level, CRITERIA};
use lpp_core::twoatom::{eval_two_atom_exact, exact_c_inverse_k, exact_c_inverse_k_at, fg_pair, MAX_K};
use lpp_core::words::{series_c_detailed, IntegrationMode};
use lpp_core::{Error, Measure, RatFun, Rational, TopSplit, XReal};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::Value;

use record::{cache_dir, cache_key, cache_load, cache_store, RunRecord, VERSION};

#[derive(Parser, Debug)]
#[command(name = "lpp", version, about = "Time constants of last-passage percolation on the complete DAG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate of C for a measure.
    Estimate(EstimateArgs),
    /// Exact rational function or value for two-atom measures.
    Exact(ExactArgs),
    /// Truncated series over minimal triangular words.
    Series(SeriesArgs),
    /// Closed form for measures on {0, M}.
    Dutta(DuttaArgs),
    /// Root r_p of the coalescence-tail equation.
    Zubkov(ZubkovArgs),
    /// Lower bound on the radius of analyticity.
    Radius(RadiusArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Dp,
    Regen,
    Skeleton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args, Debug, Clone)]
struct EstimateArgs {
    /// Measure as `value:prob,...`, e.g. `-inf:1/2,1:1/2`.
    #[arg(short, long, allow_hyphen_values = true)]
    measure: String,
    #[arg(long, value_enum, default_value = "dp")]
    route: Route,
    /// Number of steps for the dp route.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Replicas for the dp and skeleton routes.
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    /// Renovation blocks for the regen route.
    #[arg(long, default_value_t = 100_000)]
    blocks: usize,
    /// Confirmation window for the regen route.
    #[arg(long)]
    confirm: Option<usize>,
    /// Window size for the skeleton route.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `p=a:b:step` (top atom probability) or `m=a:b:step` (lower atom of a two-atom measure).
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct ExactArgs {
    /// `C((1 - p) delta_{1/k} + p delta_1)`.
    #[arg(long, conflicts_with = "m")]
    k: Option<usize>,
    /// Lower atom, exact decimal or fraction.
    #[arg(long)]
    m: Option<String>,
    /// Top atom.
    #[arg(long = "M", default_value = "1")]
    top: String,
    /// Evaluate at this p instead of printing the rational function.
    #[arg(long)]
    eval: Option<String>,
    /// `p=a:b:step` or `m=a:b:step`.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct SeriesArgs {
    /// Law of the weights below the top atom.
    #[arg(short, long, allow_hyphen_values = true)]
    measure: String,
    #[arg(long = "M", default_value_t = 1.0)]
    top: f64,
    /// Probability of the top atom.
    #[arg(long)]
    p: f64,
    /// Maximum word length.
    #[arg(long = "L", default_value_t = 8)]
    max_len: usize,
    /// Maximum word height.
    #[arg(long = "H")]
    max_height: Option<u64>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Monte Carlo samples per word in sampled mode.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct DuttaArgs {
    #[arg(long)]
    p: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    top: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Return C = 0 at p = 0 instead of failing.
    #[arg(long)]
    allow_zero: bool,
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct ZubkovArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct RadiusArgs {
    #[arg(long, default_value_t = 0.0)]
    q0: f64,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value = "fast")]
    level: LevelArg,
    /// Comma-separated criterion ids, e.g. `1,2,7a`.
    #[arg(long)]
    only: Option<String>,
}

enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Compute(Error::CapExceeded { what, cap, requested }) => write!(
                f,
                "{what}: {requested} exceeds the cap {cap}; use `lpp estimate` for a Monte Carlo value"
            ),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

struct Outcome {
    result: Value,
    error_bar: Option<f64>,
}

fn number(v: f64, err: Option<f64>) -> Outcome {
    Outcome {
        result: serde_json::json!(v),
        error_bar: err,
    }
}

/// A command that can be run once or swept over one parameter.
trait Job {
    fn name(&self) -> &'static str;
    fn params(&self) -> BTreeMap<String, String>;
    fn seed(&self) -> u64 {
        0
    }
    fn sweep(&self) -> Option<&str>;
    fn set(&mut self, param: &str, value: f64) -> CliResult<()>;
    fn run(&self) -> CliResult<Outcome>;
}

/// Exact decimal or fraction.
fn parse_rational(s: &str) -> CliResult<Rational> {
    let t = s.trim();
    let bad = || CliError::Usage(format!("bad number {t:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(digits, scale);
    Ok(if neg { -r } else { r })
}

fn parse_measure(s: &str) -> CliResult<Measure> {
    Measure::from_str(s).map_err(CliError::Compute)
}

/// `(m, M, p)` of a two-atom measure with finite lower atom.
fn two_atoms(nu: &Measure) -> CliResult<(f64, f64, f64)> {
    let a = nu.atoms();
    if a.len() != 2 || !a[0].value.is_finite() {
        return usage("this needs a measure with exactly two finite atoms");
    }
    Ok((a[0].value.value(), a[1].value.value(), to_f64(&a[1].prob)))
}

impl Job for EstimateArgs {
    fn name(&self) -> &'static str {
        "estimate"
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::from([
            ("measure".into(), self.measure.clone()),
            ("route".into(), format!("{:?}", self.route).to_lowercase()),
        ]);
        match self.route {
            Route::Dp => {
                m.insert("n".into(), self.n.to_string());
                m.insert("replicas".into(), self.replicas.to_string());
            }
            Route::Regen => {
                m.insert("blocks".into(), self.blocks.to_string());
                m.insert("confirm".into(), opt_text(&self.confirm));
            }
            Route::Skeleton => {
                m.insert("replicas".into(), self.replicas.to_string());
                m.insert("window".into(), opt_text(&self.window));
            }
        }
        m
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        let nu = parse_measure(&self.measure)?;
        let atoms = nu.atoms();
        let new: Vec<(XReal, Rational)> = match param {
            "p" => {
                let p = rational_from_f64(value).filter(|p| *p > Rational::zero() && *p <= Rational::one());
                let Some(p) = p else { return usage("p must lie in (0, 1]") };
                let top = atoms.last().expect("nonempty");
                let rest = Rational::one() - &top.prob;
                let mut v: Vec<(XReal, Rational)> = if rest.is_zero() {
                    Vec::new()
                } else {
                    atoms[..atoms.len() - 1]
                        .iter()
                        .map(|a| (a.value, &a.prob / &rest * (Rational::one() - &p)))
                        .collect()
                };
                if v.is_empty() && !p.is_one() {
                    return usage("sweeping p needs a measure with more than one atom");
                }
                v.push((top.value, p));
                v
            }
            "m" => {
                two_atoms(&nu)?;
                vec![
                    (XReal::new(value)?, atoms[0].prob.clone()),
                    (atoms[1].value, atoms[1].prob.clone()),
                ]
            }
            _ => return usage(format!("estimate cannot sweep {param:?}; use p or m")),
        };
        let m = make_measure(new.into_iter().filter(|a| !a.1.is_zero()).collect())?;
        self.measure = m.to_string();
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let nu = parse_measure(&self.measure)?;
        let e = match self.route {
            Route::Dp => estimate_c_dp(&nu, self.n, self.replicas, self.seed)?,
            Route::Regen => {
                let split = nu.split_top()?;
                let b = self.confirm.unwrap_or_else(|| default_confirm_window(split.p_f64(), 1e-10));
                regenerative_estimate(&split, self.blocks, b, self.seed)?
            }
            Route::Skeleton => {
                let (m, top, p) = two_atoms(&nu)?;
                if !(m > 0.0 && top > 0.0) {
                    return usage("the skeleton route needs 0 < m < M");
                }
                let window = self.window.unwrap_or_else(|| default_skeleton_window(p));
                let mut e = estimate_c_skeleton(m / top, p, window, self.replicas, self.seed)?;
                e.mean *= top;
                e.std_err *= top;
                e
            }
        };
        eprintln!("estimate ({:?}): {} ± {} over {} replicas", self.route, e.mean, e.std_err, e.replicas);
        Ok(number(e.mean, Some(e.std_err)))
    }
}

impl Job for ExactArgs {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        if let Some(k) = self.k {
            m.insert("k".into(), k.to_string());
        }
        if let Some(v) = &self.m {
            m.insert("m".into(), v.clone());
            m.insert("M".into(), self.top.clone());
        }
        if let Some(p) = &self.eval {
            m.insert("eval".into(), p.clone());
        }
        m
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        let exact = || {
            rational_from_f64(value).map(|r| r.to_string()).ok_or(CliError::Usage(format!("{value} is not finite")))
        };
        match param {
            "p" => self.eval = Some(exact()?),
            "m" if self.k.is_none() => self.m = Some(exact()?),
            _ => return usage(format!("exact cannot sweep {param:?}")),
        }
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let eval = self.eval.as_deref().map(parse_rational).transpose()?;
        if let Some(p) = &eval {
            if *p < Rational::zero() || *p > Rational::one() {
                return usage("p must lie in [0, 1]");
            }
        }
        let out = match (self.k, &self.m) {
            (Some(k), _) => {
                if k == 0 || k > MAX_K {
                    return Err(Error::CapExceeded { what: "k", cap: MAX_K as u64, requested: k as u64 }.into());
                }
                match eval {
                    Some(p) => exact_value(exact_c_inverse_k_at(k, &p)?),
                    None => exact_text(exact_c_inverse_k(k)?),
                }
            }
            (None, Some(m)) => {
                let m = parse_rational(m)?;
                let top = parse_rational(&self.top)?;
                match eval {
                    Some(p) => exact_value(eval_two_atom_exact(&m, &top, &p)?),
                    None => exact_text(two_atom_ratfun(&m, &top)?),
                }
            }
            (None, None) => return usage("give --k or --m"),
        };
        Ok(out)
    }
}

fn exact_value(v: Rational) -> Outcome {
    eprintln!("exact value {v}");
    number(to_f64(&v), Some(0.0))
}

fn exact_text(c: RatFun) -> Outcome {
    let text = c.to_string_in("p");
    eprintln!("C(p) = {text}");
    Outcome {
        result: Value::String(text),
        error_bar: None,
    }
}

/// `C((1 - p) delta_m + p delta_M)` as a rational function of `p`.
fn two_atom_ratfun(m: &Rational, top: &Rational) -> CliResult<RatFun> {
    if !(*m > Rational::zero() && m <= top) {
        return usage("need 0 < m <= M");
    }
    let r = m / top;
    let scale = RatFun::constant(top.clone());
    if r.is_one() {
        return Ok(scale);
    }
    let inv = r.recip();
    let k_big = inv.floor().to_integer();
    let k = usize::try_from(k_big.clone()).ok().filter(|&k| k < MAX_K).ok_or(Error::CapExceeded {
        what: "knot index 1/(m/M)",
        cap: (MAX_K - 1) as u64,
        requested: u64::try_from(k_big).unwrap_or(u64::MAX),
    })?;
    if inv == Rational::from_integer(k.into()) {
        return Ok(&scale * &exact_c_inverse_k(k)?);
    }
    let fg = fg_pair(k)?;
    Ok(&scale * &(&fg.f + &(&RatFun::constant(r) * &fg.g)))
}

impl Job for SeriesArgs {
    fn name(&self) -> &'static str {
        "series"
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("measure".into(), self.measure.clone()),
            ("M".into(), self.top.to_string()),
            ("p".into(), self.p.to_string()),
            ("L".into(), self.max_len.to_string()),
            ("H".into(), opt_text(&self.max_height)),
            ("mode".into(), format!("{:?}", self.mode).to_lowercase()),
            ("samples".into(), self.samples.to_string()),
        ])
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        match param {
            "p" => self.p = value,
            _ => return usage(format!("series cannot sweep {param:?}")),
        }
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let mu = parse_measure(&self.measure)?;
        let p = rational_from_f64(self.p).ok_or(CliError::Usage("p must be finite".into()))?;
        let split = TopSplit {
            below: (!p.is_one()).then_some(mu),
            p,
            top: self.top,
        };
        let mode = match self.mode {
            Mode::Exact => IntegrationMode::Exact,
            Mode::Sampled => IntegrationMode::Sampled,
        };
        let d = series_c_detailed(
            &split,
            self.p,
            self.max_len,
            self.max_height.unwrap_or(u64::MAX),
            mode,
            self.samples,
            self.seed,
        )?;
        eprintln!(
            "series: {} (tail bound {}, {} words, mass {})",
            d.result.value, d.result.tail_bound, d.result.terms_used, d.enumerated_mass
        );
        Ok(number(d.result.value, Some(d.result.tail_bound)))
    }
}

impl Job for DuttaArgs {
    fn name(&self) -> &'static str {
        "dutta"
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("p".into(), self.p.to_string()),
            ("M".into(), self.top.to_string()),
            ("tol".into(), self.tol.to_string()),
            ("allow_zero".into(), self.allow_zero.to_string()),
        ])
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        match param {
            "p" => self.p = value,
            "M" => self.top = value,
            _ => return usage(format!("dutta cannot sweep {param:?}")),
        }
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let r = if self.allow_zero {
            dutta_c_or_zero(self.p, self.top, self.tol)?
        } else {
            dutta_c(self.p, self.top, self.tol)?
        };
        eprintln!("dutta: {} (tail bound {})", r.value, r.tail_bound);
        Ok(number(r.value, Some(r.tail_bound)))
    }
}

impl Job for ZubkovArgs {
    fn name(&self) -> &'static str {
        "zubkov"
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([("p".into(), self.p.to_string()), ("tol".into(), self.tol.to_string())])
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        match param {
            "p" => self.p = value,
            _ => return usage(format!("zubkov cannot sweep {param:?}")),
        }
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let r = zubkov_rp(self.p, self.tol)?;
        eprintln!("zubkov: r_p = {r} (|F(r)| <= {})", self.tol);
        // The bar is the residual tolerance of the defining equation.
        Ok(number(r, Some(self.tol)))
    }
}

impl Job for RadiusArgs {
    fn name(&self) -> &'static str {
        "radius"
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([("q0".into(), self.q0.to_string()), ("grid".into(), self.grid.to_string())])
    }

    fn sweep(&self) -> Option<&str> {
        self.sweep.as_deref()
    }

    fn set(&mut self, param: &str, value: f64) -> CliResult<()> {
        match param {
            "q0" => self.q0 = value,
            _ => return usage(format!("radius cannot sweep {param:?}")),
        }
        Ok(())
    }

    fn run(&self) -> CliResult<Outcome> {
        let r = radius_lower_bound(self.q0, self.grid)?;
        eprintln!("radius: bound {} at epsilon* {}", r.bound, r.epsilon_star);
        // The objective has slope at most 1 - q0 in epsilon, and the grid is
        // refined to 1e-7, so the maximum is missed by at most this much.
        Ok(number(r.bound, Some((1.0 - self.q0) * 1e-7)))
    }
}

fn run_once(job: &dyn Job) -> CliResult<RunRecord> {
    let params = job.params();
    let seed = job.seed();
    let cache = cache_dir().map(|d| (cache_key(job.name(), &params, seed), d));
    if let Some((key, dir)) = &cache {
        if let Some(rec) = cache_load(dir, key) {
            log::info!("cache hit {key}");
            return Ok(rec);
        }
    }
    let t = Instant::now();
    let out = job.run()?;
    let rec = RunRecord {
        command: job.name().into(),
        params,
        result: out.result,
        error_bar: out.error_bar,
        seed,
        elapsed_ms: t.elapsed().as_millis() as u64,
        version: VERSION.into(),
    };
    if let Some((key, dir)) = &cache {
        cache_store(dir, key, &rec);
    }
    Ok(rec)
}

/// `name=a:b:step`, inclusive of `b` up to rounding.
fn parse_sweep(s: &str) -> CliResult<(String, Vec<f64>)> {
    let bad = || CliError::Usage(format!("bad sweep {s:?}; expected name=start:stop:step"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> = range.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(bad());
    }
    let values = (0..count).map(|i| {
        let v = a + i as f64 * step;
        // Print-and-parse keeps grid points like 0.3 exact decimal strings.
        format!("{v:.12}").parse().expect("formatted float")
    });
    Ok((name.trim().to_string(), values.collect()))
}

fn run_job(mut job: Box<dyn Job>) -> CliResult<()> {
    let Some(grid) = job.sweep().map(str::to_string) else {
        let rec = run_once(job.as_ref())?;
        println!("{}", rec.to_line());
        eprintln!("{} done in {} ms", rec.command, rec.elapsed_ms);
        return Ok(());
    };
    let (name, values) = parse_sweep(&grid)?;
    println!("param,value,err");
    for v in values {
        job.set(&name, v)?;
        let rec = run_once(job.as_ref())?;
        let value = rec.result.as_f64().ok_or_else(|| {
            CliError::Usage("sweeps need numeric results; add --eval for exact".into())
        })?;
        let err = rec.error_bar.map(|e| e.to_string()).unwrap_or_default();
        println!("{v},{value},{err}");
    }
    Ok(())
}

fn selftest(args: &SelftestArgs) -> CliResult<bool> {
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let ids: Vec<&str> = match &args.only {
        Some(list) => {
            let ids: Vec<&str> = list.split(',').map(str::trim).collect();
            if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
                return usage(format!("unknown criterion {bad:?}"));
            }
            ids
        }
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut all = true;
    for id in ids {
        let r = run_criterion(id, level);
        eprintln!("{r}");
        all &= r.passed;
        let rec = RunRecord {
            command: "selftest".into(),
            params: BTreeMap::from([
                ("criterion".into(), r.id.to_string()),
                ("level".into(), format!("{level:?}").to_lowercase()),
            ]),
            result: Value::String(if r.passed { "pass" } else { "fail" }.into()),
            error_bar: None,
            seed: 0,
            elapsed_ms: (r.seconds * 1000.0) as u64,
            version: VERSION.into(),
        };
        println!("{}", rec.to_line());
    }
    eprintln!("{}", if all { "all criteria pass" } else { "some criteria fail" });
    Ok(all)
}

fn init_threads() {
    let Some(n) = std::env::var("LPP_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) else {
        return;
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("could not set thread count: {e}");
    }
}

/// Parameter text for an optional flag; unset flags use the default rule.
fn opt_text<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Selftest(a) => selftest(&a).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(1) }),
        Command::Estimate(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
        Command::Exact(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
        Command::Series(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
        Command::Dutta(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
        Command::Zubkov(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
        Command::Radius(a) => run_job(Box::new(a)).map(|_| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
