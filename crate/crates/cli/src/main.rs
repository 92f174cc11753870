//! `hbcount` — exact lattice counts, error terms, Riesz means and oscillation
//! scans for the Cygan-Koranyi ball on the first Heisenberg group.
//!
//! Exit codes: 0 success, 1 failed verification or runtime error, 2 bad
//! flags, 3 resource budget exceeded.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hbcount::arith::{isqrt_floor, r2_sieve, rho_value, ArithError, R2Table};
use hbcount::counting::{ball_count, jump_sample, smoothed_sum_f};
use hbcount::fmt::sig10;
use hbcount::gauge::{brute_count, brute_count_exact, mc_volume, GaugeError, GaugeParams};
use hbcount::riesz::{coefficient_table, decomposed_sum, decomposition_tail, riesz_error};
use hbcount::scanner::{
    decade_summary, decade_summary_csv, records_json, scan, CsvSink, ScanConfig, ScanError,
};
use hbcount::verify::{all_passed, run as run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "hbcount",
    version,
    about = "Lattice-point counting on the first Heisenberg group under the Cygan-Koranyi gauge"
)]
struct Cli {
    /// Worker threads; falls back to HB_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact S(x) with both one-sided error values at x.
    Count {
        #[arg(long)]
        x: u64,
    },
    /// Sweep all jumps below x-max: CSV samples, JSON records, decade summary.
    Scan {
        #[arg(long)]
        x_max: u64,
        /// Window length for the segmented sieve.
        #[arg(long, default_value_t = 1 << 20)]
        segment_len: u64,
        /// Emit every k-th jump (records are always emitted).
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Records JSON output path.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// One Riesz mean of order rho at y, as JSON.
    Riesz {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        y: f64,
    },
    /// Series coefficients c_n with partial sums and distance to pi^2/4.
    Coeffs {
        #[arg(long)]
        n_max: u32,
    },
    /// Decomposed sums S(sqrt x; n) against the smoothed sum M(x).
    Series {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 40)]
        n_max: u32,
    },
    /// Monte-Carlo volume of the unit gauge ball.
    Volume {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "A")]
        coef_a: f64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: i64,
    },
    /// Exact lattice count in the gauge ball of radius t4^(1/4).
    Brute {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "A")]
        coef_a: f64,
        #[arg(long)]
        t4: u64,
    },
    /// Run the release checks.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Arith,
    Gauge,
    Identities,
    Scan,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Arith => Suite::Arith,
            SuiteArg::Gauge => Suite::Gauge,
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Scan => Suite::Scan,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn flags(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    fn other(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::SegmentBudget { .. } | ArithError::RangeOverflow(_) => {
                CliError::budget(e.to_string())
            }
            ArithError::TableTooShort { .. } => CliError::other(e.to_string()),
        }
    }
}

impl From<GaugeError> for CliError {
    fn from(e: GaugeError) -> Self {
        CliError::budget(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Config(_) => CliError::flags(e.to_string()),
            ScanError::CountOverflow => CliError::budget(e.to_string()),
            ScanError::Arith(inner) => inner.into(),
            other => CliError::other(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = resolve_threads(cli.threads);
    // Shared pool for volume/brute/verify; the scanner builds its own.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    match dispatch(cli.command, threads) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("HB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|&n| n > 0)
    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn dispatch(command: Command, threads: usize) -> Result<ExitCode, CliError> {
    match command {
        Command::Count { x } => cmd_count(x),
        Command::Scan {
            x_max,
            segment_len,
            stride,
            out,
            records,
        } => cmd_scan(x_max, segment_len, stride, out, records, threads),
        Command::Riesz { rho, y } => cmd_riesz(rho, y),
        Command::Coeffs { n_max } => cmd_coeffs(n_max),
        Command::Series { x, n_max } => cmd_series(x, n_max),
        Command::Volume {
            q,
            alpha,
            coef_a,
            samples,
            seed,
        } => cmd_volume(q, alpha, coef_a, samples, seed),
        Command::Brute {
            q,
            alpha,
            coef_a,
            t4,
        } => cmd_brute(q, alpha, coef_a, t4),
        Command::Verify { suite } => cmd_verify(suite.into()),
    }
}

fn table_to(limit: u64) -> Result<R2Table, CliError> {
    Ok(r2_sieve(0, isqrt_floor(limit as u128) + 1)?)
}

fn cmd_count(x: u64) -> Result<ExitCode, CliError> {
    let r2 = table_to(x)?;
    let s_left = ball_count(x, &r2);
    let rho = rho_value(x, &r2)?;
    let s = jump_sample(x, s_left, rho);
    println!("x            = {}", s.x);
    println!("s_left       = {}", s.s_left);
    println!("s_right      = {}", s.s_right);
    println!("rho          = {rho}");
    println!("main         = {}", sig10(s.main));
    println!("e_left       = {}", sig10(s.e_left));
    println!("e_right      = {}", sig10(s.e_right));
    println!("e_norm_left  = {}", sig10(s.e_norm_left));
    println!("e_norm_right = {}", sig10(s.e_norm_right));
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(
    x_max: u64,
    segment_len: u64,
    stride: u64,
    out: Option<PathBuf>,
    records: Option<PathBuf>,
    threads: usize,
) -> Result<ExitCode, CliError> {
    let cfg = ScanConfig {
        x_max,
        segment_len,
        sample_stride: stride,
        threads,
    };
    let report = match &out {
        Some(path) => {
            let mut sink = CsvSink::new(BufWriter::new(File::create(path)?))?;
            let report = scan(&cfg, &mut sink)?;
            sink.into_inner().flush()?;
            report
        }
        None => {
            let stdout = io::stdout();
            let mut sink = CsvSink::new(BufWriter::new(stdout.lock()))?;
            let report = scan(&cfg, &mut sink)?;
            sink.into_inner().flush()?;
            report
        }
    };

    if let Some(path) = &records {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "{}", records_json(&report.records))?;
        f.flush()?;
    }

    let r2 = r2_sieve(0, isqrt_floor((x_max - 1) as u128) + 1)?;
    let stats = decade_summary(&report.records, &r2)?;
    print!("{}", decade_summary_csv(&stats));

    eprintln!(
        "S({x_max}) = {}; {} jumps; {} max records, {} min records",
        report.final_count,
        report.jump_count,
        report.records.max_records.len(),
        report.records.min_records.len()
    );
    if let Some(c) = report.corollary_max {
        eprintln!("max |E|/(sqrt(x) ln x) = {} at x = {}", sig10(c.value), c.x);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_riesz(rho: f64, y: f64) -> Result<ExitCode, CliError> {
    if !rho.is_finite() || rho <= 0.0 || !y.is_finite() || y < 0.0 {
        return Err(CliError::flags("riesz requires rho > 0 and finite y >= 0"));
    }
    let r2 = r2_sieve(0, y.floor() as u64 + 1)?;
    let sample = riesz_error(y, rho, &r2);
    println!("{}", serde_json::to_string(&sample).expect("serializable"));
    Ok(ExitCode::SUCCESS)
}

fn cmd_coeffs(n_max: u32) -> Result<ExitCode, CliError> {
    let table = coefficient_table(n_max);
    println!("{:>4}  {:>24}  {:>24}", "n", "c_n", "partial_sum");
    for n in 0..=n_max as usize {
        println!(
            "{:>4}  {:>24.16e}  {:>24.16e}",
            n, table.c[n], table.partials[n]
        );
    }
    let pi2_quarter = std::f64::consts::PI * std::f64::consts::PI / 4.0;
    let diff = (table.partials[n_max as usize] - pi2_quarter).abs();
    println!("|partial({n_max}) - pi^2/4| = {diff:.3e}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_series(x: f64, n_max: u32) -> Result<ExitCode, CliError> {
    if !x.is_finite() || x < 1.0 {
        return Err(CliError::flags("series requires finite x >= 1"));
    }
    let r2 = table_to(x as u64)?;
    println!("{:>4}  {:>24}  {:>24}", "n", "s_n", "running_sum");
    let mut total = 0.0;
    for n in 0..=n_max {
        let s = decomposed_sum(x, n, &r2);
        total += s;
        println!("{:>4}  {:>24.16e}  {:>24.16e}", n, s, total);
    }
    let smoothed = smoothed_sum_f(x, &r2);
    let tail = decomposition_tail(x, n_max, &r2);
    println!("smoothed sum M(x)    = {smoothed:.16e}");
    println!("|sum - M(x)|         = {:.3e}", (total - smoothed).abs());
    println!("truncation majorant  = {tail:.3e}");
    Ok(ExitCode::SUCCESS)
}

fn valid_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn cmd_volume(
    q: u32,
    alpha: f64,
    coef_a: f64,
    samples: u64,
    seed: i64,
) -> Result<ExitCode, CliError> {
    if q < 1 || !valid_positive(alpha) || !valid_positive(coef_a) || samples < 1 {
        return Err(CliError::flags(
            "volume requires q >= 1, alpha > 0, A > 0, samples >= 1",
        ));
    }
    let p = GaugeParams::new(alpha, coef_a, q);
    let v = mc_volume(&p, samples, seed as u64);
    println!("estimate   = {:.8}", v.estimate);
    println!("std_err    = {:.3e}", v.std_err);
    println!("hits       = {}/{}", v.hits, v.samples);
    println!("box_volume = {:.8}", v.box_volume);
    Ok(ExitCode::SUCCESS)
}

fn cmd_brute(q: u32, alpha: f64, coef_a: f64, t4: u64) -> Result<ExitCode, CliError> {
    if q < 1 || !valid_positive(alpha) || !valid_positive(coef_a) || t4 < 1 {
        return Err(CliError::flags(
            "brute requires q >= 1, alpha > 0, A > 0, t4 >= 1",
        ));
    }
    let count = if alpha == 4.0 && coef_a == 1.0 {
        brute_count_exact(q, t4)?
    } else {
        let p = GaugeParams::new(alpha, coef_a, q);
        brute_count(&p, (t4 as f64).powf(0.25))?
    };
    println!("{count}");
    let scaled = count as f64 / (t4 as f64).powf((q as f64 + 1.0) / 2.0);
    eprintln!("count / t^(2q+2) = {scaled:.8}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: Suite) -> Result<ExitCode, CliError> {
    let reports = run_suite(suite);
    for r in &reports {
        println!("{r}");
    }
    if all_passed(&reports) {
        println!("all {} criteria passed", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = reports.iter().filter(|r| !r.pass).count();
        eprintln!("error: {failed} criteria failed");
        Ok(ExitCode::from(1))
    }
}
