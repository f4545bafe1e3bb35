mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvwit::combin::PartitionFamily;
use cvwit::ghzcert::{
    certify_point_with, eta_boundary, kappa_bisep, kappa_layout, optimal_table, optimal_witness,
    region_sweep, threshold_for, witness_for_m, xi_bisep_exact, xi_layout_exact,
    SeparabilityClass, WitnessChoice,
};
use cvwit::model::{noise_from_v, parse_cm_document, v_from_noise, GhzParams};
use cvwit::signcrit::{certify_with, generate_for_family, OptConfig, SamplingConfig, MODE_CAP};
use cvwit::{oracle, reference, Error};
use serde::Serialize;

use output::{g12, Csv};

const EXIT_CERTIFIED: u8 = 10;
const EXIT_NOT_CERTIFIED: u8 = 11;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_NONCONVERGED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "cvwit", version, about = "Genuine multipartite entanglement tests for lossy, noisy CV GHZ states")]
struct Cli {
    /// Seed for every stochastic path.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CVW_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Test one GHZ state against a separability class.
    Certify(CertifyArgs),
    /// Sweep (eta, v) and write threshold data as CSV.
    Region(RegionArgs),
    /// Regenerate the optimal-witness table for a class.
    Tables(TablesArgs),
    /// Run the generic sign-matrix test on a covariance-matrix file.
    CheckCm(CheckCmArgs),
    /// Thresholds for a list of producibility sizes J.
    Producibility(ProducibilityArgs),
    /// Run an oracle suite (signset3, kappa-small, reduce4, all).
    Oracle(OracleArgs),
    /// kappa for a witness size and block layout.
    Kappa(KappaArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct Noise {
    /// Thermal noise as v = N/(N+1).
    #[arg(long, default_value_t = 0.0, conflicts_with = "noise_n")]
    v: f64,
    /// Thermal photon number N instead of v.
    #[arg(long)]
    noise_n: Option<f64>,
}

impl Noise {
    fn photons(&self) -> cvwit::Result<f64> {
        match self.noise_n {
            Some(n) => Ok(n),
            None => noise_from_v(self.v),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "genuine")]
    class: String,
    /// Transmissivity.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[command(flatten)]
    noise: Noise,
    /// Squeezing parameter.
    #[arg(long)]
    r: f64,
    /// Force the witness size instead of the optimal one.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "genuine")]
    class: String,
    /// start:stop:step or a single value.
    #[arg(long)]
    eta: String,
    /// start:stop:step or a single value.
    #[arg(long)]
    v: String,
    #[arg(long)]
    m: Option<usize>,
    /// CSV output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Boundary polyline output (defaults to <out>.boundary.csv).
    #[arg(long)]
    boundary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TablesArgs {
    #[arg(long, default_value = "genuine")]
    class: String,
    #[arg(long)]
    from: Option<u64>,
    #[arg(long)]
    to: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CheckCmArgs {
    file: PathBuf,
    #[arg(long, default_value = "genuine")]
    class: String,
    /// Restrict biseparable tests to n0 | n - n0 splits.
    #[arg(long)]
    n0: Option<usize>,
    /// Random sign-pattern draws.
    #[arg(long, default_value_t = SamplingConfig::default().random_draws)]
    draws: usize,
    #[arg(long, default_value_t = OptConfig::default().multistart)]
    multistart: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct ProducibilityArgs {
    #[arg(long)]
    n: usize,
    /// Comma list and/or inclusive ranges, e.g. 19:10 or 12,10.
    #[arg(long)]
    j: String,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[command(flatten)]
    noise: Noise,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    suite: String,
    /// One JSON record per line.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct KappaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, conflicts_with = "sizes")]
    n0: Option<usize>,
    /// Block sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value = "genuine")]
    class: String,
    /// Also print the exact rational value.
    #[arg(long)]
    exact: bool,
}

#[derive(Serialize)]
struct RunConfig<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    seed: u64,
    threads: usize,
    tol: f64,
    enum_cap: u64,
}

enum Failure {
    Usage(String),
    Capacity(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            Error::Domain(_) | Error::Validation(_) | Error::Parse { .. } | Error::Dimension(_) | Error::ZeroDenominator(_) => {
                Failure::Usage(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let threads = rayon::current_num_threads();
    let res = match &cli.cmd {
        Cmd::Certify(a) => certify(a),
        Cmd::Region(a) => region(a, &config("region", a, cli.seed, threads)),
        Cmd::Tables(a) => tables(a, &config("tables", a, cli.seed, threads)),
        Cmd::CheckCm(a) => check_cm(a, cli.seed),
        Cmd::Producibility(a) => producibility(a, &config("producibility", a, cli.seed, threads)),
        Cmd::Oracle(a) => run_oracle(a),
        Cmd::Kappa(a) => kappa(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Capacity(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CAPACITY)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}

fn config<A: Serialize>(command: &str, args: &A, seed: u64, threads: usize) -> String {
    let cfg = RunConfig {
        command,
        args,
        seed,
        threads,
        tol: cvwit::signcrit::DEFAULT_TOL,
        enum_cap: cvwit::combin::ENUM_CAP,
    };
    serde_json::to_string(&cfg).expect("config serializes")
}

fn parse_class(s: &str) -> Result<SeparabilityClass, Failure> {
    s.parse::<SeparabilityClass>().map_err(Failure::from)
}

fn witness(n: usize, class: SeparabilityClass, m: Option<usize>) -> Result<WitnessChoice, Failure> {
    Ok(match m {
        Some(m) => witness_for_m(n, m, class)?,
        None => optimal_witness(n, class)?,
    })
}

/// start:stop:step (inclusive) or a single number.
fn parse_range(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("bad {what} range {s:?}: expected start:stop:step or a number"));
    let nums: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match nums.as_slice() {
        [x] => Ok(vec![*x]),
        [a, b, st] => {
            if !(*st > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / st + 1e-9).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(Failure::Capacity(format!("{what} range has {count} points")));
            }
            Ok((0..count).map(|i| a + i as f64 * st).collect())
        }
        _ => Err(bad()),
    }
}

fn parse_j_list(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("bad J list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',') {
        let ends: Vec<usize> = part.split(':').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        match ends.as_slice() {
            [x] => out.push(*x),
            [a, b] if a >= b => out.extend((*b..=*a).rev()),
            [a, b] => out.extend(*a..=*b),
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

fn fmt_interval(lo: f64, hi: f64) -> String {
    format!("({}, {})", g12(lo), g12(hi))
}

#[derive(Serialize)]
struct CertifyReport {
    class: String,
    n: usize,
    r: f64,
    eta: f64,
    noise_n: f64,
    v: f64,
    m: usize,
    layout: String,
    sizes: Vec<usize>,
    kappa: f64,
    threshold: Option<(f64, f64)>,
    additional_cap: f64,
    certified_range: Option<(f64, f64)>,
    det: f64,
    lambda_min: f64,
    additional_ratio: f64,
    additional_holds: bool,
    routes_agree: bool,
    eigen_consistent: bool,
    certified: bool,
}

fn certify(a: &CertifyArgs) -> Outcome {
    let class = parse_class(&a.class)?;
    let nn = a.noise.photons()?;
    let params = GhzParams::new(a.n, a.r, a.eta, nn)?;
    let w = witness(a.n, class, a.m)?;
    let t = threshold_for(&w, a.eta, nn)?;
    let p = certify_point_with(&params, &w)?;
    let rep = CertifyReport {
        class: class.to_string(),
        n: a.n,
        r: a.r,
        eta: a.eta,
        noise_n: nn,
        v: v_from_noise(nn),
        m: w.m,
        layout: w.kind.to_string(),
        sizes: w.sizes.clone(),
        kappa: w.kappa.value(),
        threshold: t.violation.map(|iv| (iv.lo, iv.hi)),
        additional_cap: t.r_additional_cap,
        certified_range: t.certified().map(|iv| (iv.lo, iv.hi)),
        det: p.y,
        lambda_min: p.lambda_min,
        additional_ratio: p.additional.ratio,
        additional_holds: p.additional.holds,
        routes_agree: p.routes_agree,
        eigen_consistent: t.eigen_consistent,
        certified: p.certified,
    };
    if a.json {
        println!("{}", serde_json::to_string(&rep).expect("report serializes"));
    } else {
        let sizes: Vec<String> = rep.sizes.iter().map(|s| s.to_string()).collect();
        println!("class: {}", rep.class);
        println!("n: {}", rep.n);
        println!("r: {}  eta: {}  N: {}  v: {}", g12(rep.r), g12(rep.eta), g12(rep.noise_n), g12(rep.v));
        println!("witness: m = {}, {} layout ({})", rep.m, rep.layout, sizes.join(" | "));
        println!("kappa: {}", g12(rep.kappa));
        match rep.threshold {
            Some((lo, hi)) => println!("violation range in r: {}", fmt_interval(lo, hi)),
            None => println!("violation range in r: none"),
        }
        println!("additional condition holds for r < {}", g12(rep.additional_cap));
        match rep.certified_range {
            Some((lo, hi)) => println!("certified range in r: {}", fmt_interval(lo, hi)),
            None => println!("certified range in r: none"),
        }
        println!("det: {}  lambda_min: {}", g12(rep.det), g12(rep.lambda_min));
        println!(
            "additional condition at r: ratio {} ({})",
            g12(rep.additional_ratio),
            if rep.additional_holds { "holds" } else { "fails" }
        );
        if !rep.routes_agree || !rep.eigen_consistent {
            println!("warning: determinant and eigenvalue routes disagree");
        }
        println!("verdict: {}", if rep.certified { "certified" } else { "not certified" });
    }
    Ok(if rep.certified { EXIT_CERTIFIED } else { EXIT_NOT_CERTIFIED })
}

fn boundary_path(a: &RegionArgs) -> Option<PathBuf> {
    a.boundary.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".boundary.csv");
            PathBuf::from(s)
        })
    })
}

fn region(a: &RegionArgs, cfg: &str) -> Outcome {
    let class = parse_class(&a.class)?;
    let etas = parse_range(&a.eta, "eta")?;
    let vs = parse_range(&a.v, "v")?;
    if etas.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Failure::Usage("eta values must lie in (0, 1]".into()));
    }
    if vs.iter().any(|&v| !(0.0..1.0).contains(&v)) {
        return Err(Failure::Usage("v values must lie in [0, 1)".into()));
    }
    let w = witness(a.n, class, a.m)?;
    let rows = region_sweep(&w, &etas, &vs)?;
    let mut csv = Csv::new(&["eta", "v", "r_threshold_low", "r_threshold_high", "additional_condition"]);
    for r in &rows {
        csv.push(vec![g12(r.eta), g12(r.v), g12(r.r_lo), g12(r.r_hi), g12(r.r_additional_cap)]);
    }
    csv.write_to(a.out.as_deref(), cfg)?;
    if let Some(bp) = boundary_path(a) {
        write_boundary(&bp, &w, &vs, cfg)?;
    }
    Ok(0)
}

/// Per noise level: smallest eta with a nonempty certified range, and the
/// squeezing range certified at eta = 1.
fn write_boundary(path: &Path, w: &WitnessChoice, vs: &[f64], cfg: &str) -> Result<(), Failure> {
    let mut csv = Csv::new(&["v", "eta_min", "r_low_at_eta_1", "r_high_at_eta_1"]);
    for &v in vs {
        let eta_min = eta_boundary(w, v, 1e-12)?;
        let t = threshold_for(w, 1.0, noise_from_v(v)?)?;
        let (lo, hi) = t.certified().map_or((f64::NAN, f64::NAN), |iv| (iv.lo, iv.hi));
        csv.push(vec![g12(v), eta_min.map_or("nan".into(), g12), g12(lo), g12(hi)]);
    }
    csv.write_to(Some(path), cfg)?;
    Ok(())
}

fn tables(a: &TablesArgs, cfg: &str) -> Outcome {
    let class = parse_class(&a.class)?;
    let min_n = match class {
        SeparabilityClass::KSeparable(k) => k.max(3) as u64,
        SeparabilityClass::Producible(_) => {
            return Err(Failure::Usage("tables are defined for k-separability classes".into()))
        }
    };
    let from = a.from.unwrap_or(min_n).max(min_n);
    if a.to < from {
        return Err(Failure::Usage(format!("--to {} is below the first valid n = {from}", a.to)));
    }
    let rows = optimal_table(class, from, a.to)?;
    let printed = reference::rows_for(class).unwrap_or(&[]);
    let mut csv = Csv::new(&["m", "layout", "n_start", "n_end", "printed_n_start", "printed_n_end", "diff"]);
    println!("{:>4}  {:<10}  {:>12}  {:>12}  {:>12}  {:>12}  diff", "m", "layout", "n_start", "n_end", "printed", "printed_end");
    for r in &rows {
        let p = printed.iter().find(|p| p.m == r.m && p.kind == r.kind);
        let (ps, pe, diff) = match p {
            Some(p) => {
                let pe = p.n_end.map_or("open".to_string(), |e| e.to_string());
                let ds = r.n_start as i64 - p.n_start as i64;
                let de = p.n_end.map(|e| r.n_end as i64 - e as i64);
                let mut d = Vec::new();
                if ds != 0 {
                    d.push(format!("start {ds:+}"));
                }
                if let Some(de) = de {
                    // a computed row cut short by --to is not a difference
                    if de != 0 && !(r.n_end == a.to && de < 0) {
                        d.push(format!("end {de:+}"));
                    }
                }
                (p.n_start.to_string(), pe, if d.is_empty() { "=".to_string() } else { d.join(" ") })
            }
            None => (String::new(), String::new(), "not printed".to_string()),
        };
        let kind = r.kind.to_string();
        println!("{:>4}  {:<10}  {:>12}  {:>12}  {:>12}  {:>12}  {}", r.m, kind, r.n_start, r.n_end, ps, pe, diff);
        csv.push(vec![r.m.to_string(), kind, r.n_start.to_string(), r.n_end.to_string(), ps, pe, diff]);
    }
    if let Some(out) = &a.out {
        csv.write_to(Some(out), cfg)?;
    }
    Ok(0)
}

fn family_for(class: SeparabilityClass, n0: Option<usize>) -> Result<PartitionFamily, Failure> {
    Ok(match (class, n0) {
        (SeparabilityClass::KSeparable(2), Some(n0)) => PartitionFamily::FixedSizeBipartitions { n0 },
        (_, Some(_)) => return Err(Failure::Usage("--n0 applies to the biseparable class only".into())),
        (SeparabilityClass::KSeparable(2), None) => PartitionFamily::AllBipartitions,
        (SeparabilityClass::KSeparable(k), None) => PartitionFamily::KSeparable { k },
        (SeparabilityClass::Producible(j), None) => PartitionFamily::JProducible { j },
    })
}

#[derive(Serialize)]
struct CheckReport<'a> {
    n: usize,
    class: String,
    certified: bool,
    decided: bool,
    best_value: f64,
    upper_bound: f64,
    sign_matrices: usize,
    q: &'a [f64],
    sign_matrix: Vec<Vec<i8>>,
    partitions: Vec<Vec<Vec<usize>>>,
}

fn check_cm(a: &CheckCmArgs, seed: u64) -> Outcome {
    let class = parse_class(&a.class)?;
    let text = std::fs::read_to_string(&a.file).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    let doc = parse_cm_document(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    let n = doc.n();
    if n > MODE_CAP {
        return Err(Failure::Capacity(format!("{n} modes exceed the generic-test limit of {MODE_CAP}")));
    }
    let cm = doc.to_full()?;
    let family = family_for(class, a.n0)?;
    let cfg = OptConfig {
        multistart: a.multistart,
        seed,
        sampling: SamplingConfig { random_draws: a.draws, seed },
        ..OptConfig::default()
    };
    let set = generate_for_family(n, &family, &cfg.sampling)?;
    let v = certify_with(&cm, &set, &cfg)?;
    let decided = v.certified || v.best_value >= -cfg.tol;
    let rep = CheckReport {
        n,
        class: class.to_string(),
        certified: v.certified,
        decided,
        best_value: v.best_value,
        upper_bound: v.upper_bound,
        sign_matrices: v.sign_matrices,
        q: &v.q,
        sign_matrix: v.sign_matrix.rows().map(|r| r.to_vec()).collect(),
        partitions: set.partitions.iter().map(|p| p.blocks.clone()).collect(),
    };
    if a.json {
        println!("{}", serde_json::to_string(&rep).expect("report serializes"));
    } else {
        println!("modes: {n}  class: {}  sign matrices: {}", rep.class, rep.sign_matrices);
        println!("max F(q) in [{}, {}]", g12(rep.best_value), g12(rep.upper_bound));
        println!("best witness (q, row of T, partition):");
        for ((q, row), part) in rep.q.iter().zip(&rep.sign_matrix).zip(&rep.partitions) {
            let row: Vec<String> = row.iter().map(|s| if *s > 0 { "+".into() } else { "-".into() }).collect();
            let blocks: Vec<String> = part
                .iter()
                .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(""))
                .collect();
            println!("  {:<16} {}  {}", g12(*q), row.join(""), blocks.join("|"));
        }
        let verdict = if v.certified {
            format!("certified: not {}", rep.class)
        } else if decided {
            "not certified".to_string()
        } else {
            "undecided: optimizer did not settle the sign".to_string()
        };
        println!("verdict: {verdict}");
    }
    Ok(if v.certified {
        EXIT_CERTIFIED
    } else if decided {
        EXIT_NOT_CERTIFIED
    } else {
        EXIT_NONCONVERGED
    })
}

fn producibility(a: &ProducibilityArgs, cfg: &str) -> Outcome {
    let js = parse_j_list(&a.j)?;
    let nn = a.noise.photons()?;
    GhzParams::new(a.n, 0.0, a.eta, nn)?;
    let mut csv = Csv::new(&["class", "j", "m", "layout", "kappa", "r_threshold_low", "r_threshold_high", "additional_condition"]);
    let mut row = |label: String, j: String, w: Option<&WitnessChoice>| -> Result<f64, Failure> {
        let Some(w) = w else {
            let nan = g12(f64::NAN);
            csv.push(vec![label, j, String::new(), String::new(), nan.clone(), nan.clone(), nan.clone(), nan]);
            return Ok(f64::INFINITY);
        };
        let t = threshold_for(w, a.eta, nn)?;
        let (lo, hi) = t.violation.map_or((f64::NAN, f64::NAN), |iv| (iv.lo, iv.hi));
        let sizes: Vec<String> = w.sizes.iter().map(|s| s.to_string()).collect();
        csv.push(vec![label, j, w.m.to_string(), sizes.join("|"), g12(w.kappa.value()), g12(lo), g12(hi), g12(t.r_additional_cap)]);
        Ok(if lo.is_nan() { f64::INFINITY } else { lo })
    };
    let b = optimal_witness(a.n, SeparabilityClass::BISEPARABLE)?;
    row("biseparable".into(), String::new(), Some(&b))?;
    let mut nested = true;
    let mut prev: Option<(usize, f64)> = None;
    for &j in &js {
        let w = if j >= a.n {
            // every state is n-producible
            None
        } else {
            Some(optimal_witness(a.n, SeparabilityClass::Producible(j))?)
        };
        let lo = row(format!("{j}-producible"), j.to_string(), w.as_ref())?;
        if let Some((pj, plo)) = prev {
            // fewer allowed modes per block, smaller satisfied range
            if (j < pj && lo > plo) || (j > pj && lo < plo) {
                nested = false;
            }
        }
        prev = Some((j, lo));
    }
    let cfg = format!("{cfg}\n# nested_by_j: {nested}");
    csv.write_to(a.out.as_deref(), &cfg)?;
    if !nested {
        eprintln!("warning: thresholds are not nested by J");
    }
    Ok(0)
}

fn run_oracle(a: &OracleArgs) -> Outcome {
    let reports = oracle::run_suite(&a.suite)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    for r in &reports {
        if a.json {
            println!("{}", serde_json::to_string(r).expect("report serializes"));
        } else {
            println!("{r}");
        }
    }
    if !a.json {
        println!("{}: {} passed, {failed} failed", a.suite, reports.len() - failed);
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn kappa(a: &KappaArgs) -> Outcome {
    let class = parse_class(&a.class)?;
    let sizes = match (&a.sizes, a.n0) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(n0)) => Some(vec![a.n - n0, n0]),
        (None, None) => None,
    };
    let (m, sizes) = match (a.m, sizes) {
        (Some(m), Some(s)) => (m, s),
        (m, None) => {
            let w = witness(a.n, class, m)?;
            println!("witness: m = {}, {} layout", w.m, w.kind);
            (w.m, w.sizes)
        }
        (None, Some(_)) => return Err(Failure::Usage("--m is required with --n0 or --sizes".into())),
    };
    let k = if sizes.len() == 2 { kappa_bisep(a.n, m, sizes[1])? } else { kappa_layout(a.n, m, &sizes)? };
    let s: Vec<String> = sizes.iter().map(|x| x.to_string()).collect();
    println!("n: {}  m: {m}  sizes: {}", a.n, s.join("|"));
    println!("kappa: {}", g12(k.value()));
    println!("xi: {}", g12(k.xi));
    if a.exact {
        if a.n > 100_000 {
            return Err(Failure::Capacity(format!("exact kappa limited to n <= 100000, got {}", a.n)));
        }
        let xi = if sizes.len() == 2 { xi_bisep_exact(a.n, m, sizes[1])? } else { xi_layout_exact(a.n, m, &sizes)? };
        let one = num_rational::BigRational::from_integer(1.into());
        let two = num_rational::BigRational::from_integer(2.into());
        println!("kappa (exact): {}", one - xi * two);
    }
    Ok(0)
}
