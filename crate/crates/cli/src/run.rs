use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use ruelle_core::concentration::{
    concentration_constant, covariance_bound_check, gcb_check, moment_check, tail_check, write_reports_csv,
    CheckReport, LocalFunction, Measure,
};
use ruelle_core::decoupling::{
    c1, continuity_constants, density_estimate, density_trend, DensityOptions,
};
use ruelle_core::gibbs::{
    default_burn_in, run_chains, shift_convergence_experiment, whole_line_single_site_kernel, window_gibbs,
};
use ruelle_core::model::{beta_du, PotentialKind, PotentialSpec};
use ruelle_core::stats::{batch_means, rhat, DEFAULT_BATCHES};
use ruelle_core::transfer::{MarkovEquilibrium, TransferModel, TransferOptions};
use ruelle_core::{Boundary, Error, Result, Side, Tail, Window};

use crate::region::classify_region;

pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Chains used by the sampling commands.
const CHAINS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "ruelle", version, about = "Transfer operators, Gibbs kernels and decoupling densities for long-range spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dyson,
    ProductType,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "dyson")]
    pub kind: Kind,
    /// Coupling range T.
    #[arg(long)]
    pub trunc: Option<u64>,
}

impl ModelArgs {
    fn spec(&self) -> Result<PotentialSpec> {
        let kind = match self.kind {
            Kind::Dyson => PotentialKind::Dyson,
            Kind::ProductType => PotentialKind::ProductType,
        };
        let spec = PotentialSpec::new(kind, self.alpha, self.beta)?;
        match self.trunc {
            Some(t) => spec.with_truncation(t),
            None => Ok(spec),
        }
    }
}

fn parse_tail(s: &str) -> std::result::Result<Tail, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dobrushin constant, threshold and continuity constants.
    Dobrushin {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Leading eigenpair of the depth-m transfer operator.
    #[command(after_help = "CSV columns: key,value")]
    Eigen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
    },
    /// Whole-line single-site kernel at the origin, enumerated and in closed form.
    #[command(after_help = "CSV columns: key,value")]
    Kernel {
        #[command(flatten)]
        model: ModelArgs,
        /// Right tail.
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
        /// Left tail; defaults to the right one.
        #[arg(long, value_parser = parse_tail)]
        left_tail: Option<Tail>,
    },
    /// Half-line density on depth-d cylinders at truncation N.
    #[command(after_help = "CSV columns: word,value,std_err")]
    Density {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
        /// Monte Carlo draws per chain; exact enumeration when absent.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Densities against the transfer eigenfunction along a grid of N.
    #[command(after_help = "CSV columns: N,sup_dist,l1_dist")]
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long = "N", value_delimiter = ',', default_value = "4,8,16")]
        n: Vec<usize>,
        /// Depth of the transfer model.
        #[arg(long, default_value_t = 10)]
        model_depth: usize,
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
    },
    /// Heat-bath sampling on a centred window.
    #[command(after_help = "CSV columns: site,mean,std_err")]
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
    },
    /// Concentration and covariance checks on a centred window.
    #[command(after_help = "CSV columns: check,function,param,lhs,rhs,margin,pass")]
    Concentration {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, default_value = "plus", value_parser = parse_tail)]
        tail: Tail,
        /// Sample with this many draws per chain instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distance between shifted half-line kernels and the whole-line kernel.
    #[command(after_help = "CSV columns: n,distance,std_err")]
    Shift {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "N", value_delimiter = ',', default_value = "0,5,10,20")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 40)]
        window: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Phase-diagram region of the Dyson potential.
    #[command(after_help = "CSV columns: key,value")]
    Region {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_budget() {
        EXIT_BUDGET
    } else if e.is_domain() {
        EXIT_DOMAIN
    } else {
        1
    }
}

/// A command's result before formatting.
struct Output {
    meta: Value,
    body: Value,
    /// CSV text, header included, for grid-shaped results.
    table: Option<String>,
    default: Format,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn meta(command: &str, alpha: f64, beta: f64, seed: Option<u64>) -> Value {
    json!({
        "command": command,
        "alpha": alpha,
        "beta": beta,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn scalar(x: &Value) -> Option<String> {
    match x {
        Value::Number(n) if n.is_f64() => n.as_f64().map(num),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

/// `key,value` rows for the scalar leaves of a JSON object, nested keys joined by `.`.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, rows);
            }
        }
        x => rows.push(vec![prefix.to_string(), scalar(x).unwrap_or_default()]),
    }
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| if f.contains([',', '"', '\n']) { format!("\"{}\"", f.replace('"', "\"\"")) } else { f.clone() })
        .collect();
    quoted.join(",")
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = csv_line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    s.push('\n');
    for r in rows {
        s.push_str(&csv_line(r));
        s.push('\n');
    }
    s
}

fn utf8(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("csv output is utf-8")
}

impl Output {
    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut m = Map::new();
                m.insert("meta".into(), self.meta.clone());
                m.insert("result".into(), self.body.clone());
                Ok(serde_json::to_string_pretty(&Value::Object(m))? + "\n")
            }
            Format::Csv => {
                let mut s = String::new();
                let meta = self.meta.as_object().expect("meta is an object");
                let pairs: Vec<String> =
                    meta.iter().map(|(k, v)| format!("{k}={}", scalar(v).unwrap_or_default())).collect();
                s.push_str(&format!("# {}\n", pairs.join(" ")));
                match &self.table {
                    Some(t) => s.push_str(t),
                    None => {
                        let mut rows = Vec::new();
                        flatten("", &self.body, &mut rows);
                        s.push_str(&table(&["key", "value"], &rows));
                    }
                }
                Ok(s)
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let output = match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            pool.install(|| execute(&cli.command))?
        }
        None => execute(&cli.command)?,
    };
    let text = output.render(cli.format.unwrap_or(output.default))?;
    match &cli.out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Dobrushin { model } => dobrushin(model),
        Command::Eigen { model, depth, tail } => eigen(model, *depth, tail),
        Command::Kernel { model, tail, left_tail } => kernel(model, tail, left_tail.as_ref().unwrap_or(tail)),
        Command::Density { model, depth, n, tail, samples, seed } => density(model, *depth, *n, tail, *samples, *seed),
        Command::Compare { model, depth, n, model_depth, tail } => compare(model, *depth, n, *model_depth, tail),
        Command::Sample { model, window, samples, seed, tail } => sample(model, *window, *samples, *seed, tail),
        Command::Concentration { model, window, tail, samples, seed } => {
            concentration(model, *window, tail, *samples, *seed)
        }
        Command::Shift { model, n, window, samples, seed } => shift(model, n, *window, *samples, *seed),
        Command::Region { alpha, beta } => {
            let r = classify_region(*alpha, *beta)?;
            Ok(Output { meta: meta("region", *alpha, *beta, None), body: to_value(&r)?, table: None, default: Format::Json })
        }
    }
}

fn dobrushin(m: &ModelArgs) -> Result<Output> {
    let spec = m.spec()?;
    let inter = spec.interaction()?;
    let bar_c = inter.dobrushin_bar_c()?;
    let threshold = beta_du(m.alpha)?;
    let mut body = json!({
        "bar_c": bar_c.value,
        "bar_c_error": bar_c.error,
        "beta_du": threshold,
        "in_regime": bar_c.upper() < 1.0,
    });
    if bar_c.upper() < 1.0 {
        body["d"] = json!(concentration_constant(&inter)?);
    }
    if m.alpha > 1.5 {
        let c = c1(m.alpha)?;
        body["c1"] = json!(c.value);
        body["c1_error"] = json!(c.error);
        if m.beta < threshold {
            let k = continuity_constants(m.alpha, m.beta, 0)?;
            body["density_lower_bound"] = json!(k.lower_bound);
            body["density_upper_bound"] = json!(k.upper_bound);
        }
    }
    Ok(Output { meta: meta("dobrushin", m.alpha, m.beta, None), body, table: None, default: Format::Json })
}

fn require_uniqueness(spec: &PotentialSpec) -> Result<()> {
    if spec.kind() != PotentialKind::ProductType {
        spec.interaction()?.require_uniqueness()?;
    }
    Ok(())
}

fn eigen(m: &ModelArgs, depth: usize, tail: &Tail) -> Result<Output> {
    let spec = m.spec()?;
    require_uniqueness(&spec)?;
    let model = TransferModel::build(&spec, depth, tail, &TransferOptions::default())?;
    let eq = MarkovEquilibrium::new(&model)?;
    let mut body = to_value(&model.summary())?;
    body["p_plus"] = json!(eq.marginal(0, 1)?);
    body["entropy"] = json!(eq.entropy);
    body["energy"] = json!(eq.energy);
    body["variational_defect"] = json!(eq.variational_defect);
    Ok(Output { meta: meta("eigen", m.alpha, m.beta, None), body, table: None, default: Format::Json })
}

fn kernel(m: &ModelArgs, right: &Tail, left: &Tail) -> Result<Output> {
    let spec = m.spec()?;
    let inter = spec.interaction()?;
    let mu = window_gibbs(&inter, &Window::site(0), &Boundary::tails(left.clone(), right.clone()))?;
    let enumerated = mu.site_marginal(0, 1)?;
    let closed = whole_line_single_site_kernel(&spec, 1, &Side::frozen(left.clone()), &Side::frozen(right.clone()))?;
    let body = json!({
        "left_tail": left.to_string(),
        "right_tail": right.to_string(),
        "p_plus": enumerated,
        "p_plus_error": mu.probability_error(),
        "p_plus_closed_form": closed.value,
        "closed_form_error": closed.error,
        "difference": (enumerated - closed.value).abs(),
    });
    Ok(Output { meta: meta("kernel", m.alpha, m.beta, None), body, table: None, default: Format::Json })
}

fn density(m: &ModelArgs, depth: usize, n: usize, tail: &Tail, samples: Option<usize>, seed: u64) -> Result<Output> {
    let spec = m.spec()?;
    let base = match samples {
        Some(s) => DensityOptions::monte_carlo(depth, n, s, seed),
        None => DensityOptions::exact(depth, n),
    };
    let est = density_estimate(&spec, &DensityOptions { tail: tail.clone(), ..base })?;
    let mut buf = Vec::new();
    est.write_csv(&mut buf)?;
    Ok(Output {
        meta: meta("density", m.alpha, m.beta, samples.map(|_| seed)),
        body: to_value(&est)?,
        table: Some(utf8(buf)),
        default: Format::Csv,
    })
}

fn compare(m: &ModelArgs, depth: usize, grid: &[usize], model_depth: usize, tail: &Tail) -> Result<Output> {
    let spec = m.spec()?;
    require_uniqueness(&spec)?;
    let model = TransferModel::build(&spec, model_depth, tail, &TransferOptions::default())?;
    let base = DensityOptions { tail: tail.clone(), ..DensityOptions::exact(depth, 1) };
    let trend = density_trend(&spec, &base, grid, &model)?;
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|k| vec![grid[k].to_string(), num(trend.sup_dist[k]), num(trend.l1_dist[k])])
        .collect();
    Ok(Output {
        meta: meta("compare", m.alpha, m.beta, None),
        body: to_value(&trend)?,
        table: Some(table(&["N", "sup_dist", "l1_dist"], &rows)),
        default: Format::Csv,
    })
}

fn sample(m: &ModelArgs, len: usize, samples: usize, seed: u64, tail: &Tail) -> Result<Output> {
    let spec = m.spec()?;
    let inter = spec.interaction()?;
    let window = Window::centered(len)?;
    let sets = run_chains(&inter, &window, &Boundary::uniform(tail.clone()), seed, CHAINS, default_burn_in(&window), samples, 1)?;
    let mags: Vec<Vec<f64>> = sets.iter().map(|s| s.magnetization()).collect();
    let r = rhat(&mags)?;
    let total = batch_means(&mags.concat(), DEFAULT_BATCHES);
    let mut rows = Vec::with_capacity(len);
    let mut sites = Vec::with_capacity(len);
    for pos in 0..len {
        let col: Vec<f64> = sets.iter().flat_map(|s| s.column(pos)).collect();
        let e = batch_means(&col, DEFAULT_BATCHES);
        let site = window.lo + pos as i64;
        rows.push(vec![site.to_string(), num(e.mean), num(e.std_err)]);
        sites.push(json!({"site": site, "mean": e.mean, "std_err": e.std_err}));
    }
    let body = json!({
        "window": [window.lo, window.hi],
        "chains": CHAINS,
        "samples_per_chain": samples,
        "burn_in": default_burn_in(&window),
        "rhat": r,
        "magnetization": total.mean,
        "magnetization_std_err": total.std_err,
        "sites": sites,
    });
    Ok(Output {
        meta: meta("sample", m.alpha, m.beta, Some(seed)),
        body,
        table: Some(table(&["site", "mean", "std_err"], &rows)),
        default: Format::Json,
    })
}

fn concentration(m: &ModelArgs, len: usize, tail: &Tail, samples: Option<usize>, seed: u64) -> Result<Output> {
    let spec = m.spec()?;
    let inter = spec.interaction()?;
    let d = concentration_constant(&inter)?;
    let window = Window::centered(len)?;
    let boundary = Boundary::uniform(tail.clone());
    let functions = [LocalFunction::magnetization(&window), LocalFunction::spin(0), LocalFunction::product(0, 1)?];
    let exact;
    let sets;
    let measure = match samples {
        None => {
            exact = window_gibbs(&inter, &window, &boundary)?;
            Measure::Exact(&exact)
        }
        Some(s) => {
            sets = run_chains(&inter, &window, &boundary, seed, CHAINS, default_burn_in(&window), s, 1)?;
            Measure::Sampled(&sets)
        }
    };
    let mut reports: Vec<CheckReport> = Vec::new();
    for f in &functions {
        reports.push(gcb_check(measure, f, d)?);
        reports.extend(tail_check(measure, f, d, &[2.0, 4.0, 8.0])?);
        reports.extend(moment_check(measure, f, d, &[2, 3, 4, 6])?);
    }
    let lags: Vec<i64> = (1..=4).filter(|&i| window.contains(i)).collect();
    reports.extend(covariance_bound_check(&inter, &window, &boundary, &lags)?);
    let mut buf = Vec::new();
    write_reports_csv(&reports, &mut buf)?;
    let body = json!({
        "d": d,
        "all_pass": reports.iter().all(|r| r.pass),
        "reports": to_value(&reports)?,
    });
    Ok(Output {
        meta: meta("concentration", m.alpha, m.beta, samples.map(|_| seed)),
        body,
        table: Some(utf8(buf)),
        default: Format::Csv,
    })
}

fn shift(m: &ModelArgs, depths: &[usize], window: usize, samples: usize, seed: u64) -> Result<Output> {
    let spec = m.spec()?;
    let report = shift_convergence_experiment(&spec, depths, window, samples, seed)?;
    let rows: Vec<Vec<String>> =
        report.rows.iter().map(|r| vec![r.n.to_string(), num(r.distance), num(r.std_err)]).collect();
    Ok(Output {
        meta: meta("shift", m.alpha, m.beta, Some(seed)),
        body: to_value(&report)?,
        table: Some(table(&["n", "distance", "std_err"], &rows)),
        default: Format::Csv,
    })
}
