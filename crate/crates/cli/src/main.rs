//! Batch front-end for the exact Walsh-series laboratory.
//!
//! Modes: `verify` runs the named identity suites and prints a pass/fail
//! matrix; `coeffs` tabulates closed-form against brute-force series
//! coefficients; `sums` emits partial-sum records along rectangular, cubic,
//! ratio-bounded and iterated order paths; `sets` enumerates the surviving
//! cubes of the staged construction with their masses; `uset` runs the
//! symmetric-versus-staged integral contrast.
//!
//! All numeric output is exact: machine-readable columns carry
//! (mantissa, exponent) integer pairs with an advisory decimal column.
//! Identical configuration and seed produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use num_bigint::BigUint;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use dyadic_walsh::convergence::{
    block_partial_sum, iterated_partial_sum, lambda_admissible, ConvergenceMode,
    ConvergenceRecord, RatioBound,
};
use dyadic_walsh::mset::{MSetConfig, NullSeriesCoefficients, PermutationFamily, StageSequence};
use dyadic_walsh::quasimeasure::fourier_coefficient;
use dyadic_walsh::rational::DyadicRational;
use dyadic_walsh::uset::{uniqueness_contrast_demo, SymmetricSequence};
use dyadic_walsh::verify::{run_all, run_kernel_only, SuiteOutcome, VerifySettings};
use dyadic_walsh::{DyadicCube, DyadicPoint, WalshIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Verify,
    Coeffs,
    Sums,
    Sets,
    Uset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Exact-arithmetic experiments with multiple Walsh series on the dyadic
/// group.
#[derive(Parser, Debug)]
#[command(name = "walsh-lab", version, about)]
struct Cli {
    /// What to run.
    #[arg(long, value_enum, default_value_t = Mode::Verify)]
    mode: Mode,

    /// Dimension of the group power (the constructions assume >= 2).
    #[arg(long, short = 'd', default_value_t = 2)]
    dimension: usize,

    /// Truncation depth K of group points; defaults to the stage horizon.
    #[arg(long)]
    depth: Option<u32>,

    /// Number of construction stages S.
    #[arg(long, short = 'S', default_value_t = 2)]
    stages: u32,

    /// JSON file with per-stage coordinate permutations.
    #[arg(long)]
    perm_file: Option<PathBuf>,

    /// Output format for record-producing modes.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for all random sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Allow dimension 1 (kernel-level checks only).
    #[arg(long, default_value_t = false)]
    allow_d1: bool,
}

#[derive(Serialize)]
struct ConfigEcho {
    mode: String,
    dimension: usize,
    depth: u32,
    stages: u32,
    perm_file: Option<String>,
    format: String,
    seed: u64,
    allow_d1: bool,
}

/// Rows of one output table, with both renderings.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    json_records: Vec<serde_json::Value>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let plan = match Plan::from_cli(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("invalid configuration: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &plan) {
        Ok(success) => {
            if success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Validated run plan derived from the flags.
struct Plan {
    depth: u32,
    perms: PermutationFamily,
    config: ConfigEcho,
}

impl Plan {
    fn from_cli(cli: &Cli) -> anyhow::Result<Self> {
        if cli.dimension == 0 {
            bail!("dimension must be positive");
        }
        if cli.dimension == 1 && !cli.allow_d1 {
            bail!("dimension 1 only runs kernel-level checks; pass --allow-d1 to accept that");
        }
        if cli.dimension == 1 && cli.mode != Mode::Verify {
            bail!("dimension 1 supports only --mode verify");
        }
        if cli.stages == 0 {
            bail!("need at least one stage");
        }
        let seq = StageSequence::new(cli.stages).context("stage sequence")?;
        let horizon_u64 = 2 * seq.rank(cli.stages).map_err(anyhow::Error::msg)? + 1;
        let horizon = u32::try_from(horizon_u64).context("stage horizon too deep")?;
        let depth = cli.depth.unwrap_or(horizon.max(8));
        if depth < horizon {
            bail!("depth {depth} is below the stage horizon {horizon} (= 2 m_S + 1)");
        }
        let perms = match &cli.perm_file {
            None => PermutationFamily::identity(),
            Some(path) => {
                let file = File::open(path)
                    .with_context(|| format!("opening permutation file {}", path.display()))?;
                PermutationFamily::from_spec_reader(file, cli.dimension, &seq)
                    .map_err(|e| anyhow::anyhow!("permutation file: {e}"))?
            }
        };
        let config = ConfigEcho {
            mode: format!("{:?}", cli.mode).to_lowercase(),
            dimension: cli.dimension,
            depth,
            stages: cli.stages,
            perm_file: cli.perm_file.as_ref().map(|p| p.display().to_string()),
            format: format!("{:?}", cli.format).to_lowercase(),
            seed: cli.seed,
            allow_d1: cli.allow_d1,
        };
        Ok(Plan { depth, perms, config })
    }
}

fn run(cli: &Cli, plan: &Plan) -> anyhow::Result<bool> {
    match cli.mode {
        Mode::Verify => run_verify(cli, plan),
        Mode::Coeffs => emit(cli, plan, coeffs_table(cli, plan)?).map(|()| true),
        Mode::Sums => emit(cli, plan, sums_table(cli, plan)?).map(|()| true),
        Mode::Sets => emit(cli, plan, sets_table(cli, plan)?).map(|()| true),
        Mode::Uset => {
            let (table, ok) = uset_table(cli, plan)?;
            emit(cli, plan, table)?;
            Ok(ok)
        }
    }
}

fn run_verify(cli: &Cli, plan: &Plan) -> anyhow::Result<bool> {
    let outcomes: Vec<SuiteOutcome> = if cli.dimension == 1 {
        run_kernel_only()
    } else {
        let mut settings = VerifySettings::new(cli.dimension, cli.stages, plan.depth, cli.seed);
        settings.perms = plan.perms.clone();
        run_all(&settings)
    };
    let mut all_passed = true;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:<34} {}", o.name, o.detail);
        all_passed &= o.passed;
    }
    println!(
        "{} of {} suites passed",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    );
    if cli.out.is_some() {
        let mut table = Table {
            header: vec!["suite".into(), "passed".into(), "detail".into()],
            rows: Vec::new(),
            json_records: Vec::new(),
        };
        for o in &outcomes {
            table
                .rows
                .push(vec![o.name.clone(), o.passed.to_string(), o.detail.clone()]);
            table.json_records.push(serde_json::json!({
                "suite": o.name,
                "passed": o.passed,
                "detail": o.detail,
            }));
        }
        emit(cli, plan, table)?;
    }
    Ok(all_passed)
}

/// Largest stage whose brute-force comparison grid stays affordable.
fn brute_stage(dimension: usize, stages: u32, seq: &StageSequence, bit_cap: u64) -> u32 {
    let mut best = 1;
    for s in 1..=stages {
        if let Ok(m) = seq.rank(s) {
            if (2 * m + 1) * dimension as u64 <= bit_cap {
                best = s;
            }
        }
    }
    best
}

fn dr_columns(v: &DyadicRational) -> [String; 3] {
    [v.mantissa().to_string(), v.exponent().to_string(), v.to_decimal_string()]
}

fn coeffs_table(cli: &Cli, plan: &Plan) -> anyhow::Result<Table> {
    let cfg = MSetConfig::new(cli.dimension, cli.stages)
        .map_err(anyhow::Error::msg)?
        .with_perms(plan.perms.clone());
    let tau = cfg.tau().map_err(anyhow::Error::msg)?;
    // brute force costs 2^((2m+1)d) per index over 2^((2m+1)d) indices
    let s = brute_stage(cli.dimension, cli.stages, cfg.sequence(), 13);
    let rank = (2 * cfg.sequence().rank(s).map_err(anyhow::Error::msg)? + 1) as u32;
    let mut header: Vec<String> =
        (1..=cli.dimension).map(|j| format!("n{j}")).collect();
    header.extend(
        ["closed_mantissa", "closed_exponent", "brute_mantissa", "brute_exponent", "equal"]
            .map(String::from),
    );
    let mut rows = Vec::new();
    let mut json_records = Vec::new();
    let side = 1u64 << rank;
    let mut counter = vec![0u64; cli.dimension];
    loop {
        let n = WalshIndex::from_u64s(&counter);
        let closed = cfg.coefficient(&n).map_err(anyhow::Error::msg)?;
        let brute = fourier_coefficient(&tau, &n, rank).map_err(anyhow::Error::msg)?;
        let equal = closed == brute;
        let mut row: Vec<String> = counter.iter().map(|v| v.to_string()).collect();
        row.extend([
            closed.mantissa().to_string(),
            closed.exponent().to_string(),
            brute.mantissa().to_string(),
            brute.exponent().to_string(),
            equal.to_string(),
        ]);
        rows.push(row);
        json_records.push(serde_json::json!({
            "n": counter,
            "closed_mantissa": closed.mantissa().to_string(),
            "closed_exponent": closed.exponent(),
            "brute_mantissa": brute.mantissa().to_string(),
            "brute_exponent": brute.exponent(),
            "equal": equal,
        }));
        let mut j = cli.dimension;
        loop {
            if j == 0 {
                return Ok(Table { header, rows, json_records });
            }
            j -= 1;
            counter[j] += 1;
            if counter[j] < side {
                break;
            }
            counter[j] = 0;
        }
    }
}

fn sets_table(cli: &Cli, plan: &Plan) -> anyhow::Result<Table> {
    let cfg = MSetConfig::new(cli.dimension, cli.stages)
        .map_err(anyhow::Error::msg)?
        .with_perms(plan.perms.clone());
    let s_max = brute_stage(cli.dimension, cli.stages, cfg.sequence(), 26);
    let mut header: Vec<String> = vec!["kind".into(), "stage".into(), "rank".into()];
    header.extend((1..=cli.dimension).map(|j| format!("m{j}")));
    header.extend(["mantissa", "exponent", "decimal"].map(String::from));
    let mut rows = Vec::new();
    let mut json_records = Vec::new();
    for s in 1..=s_max {
        let rank = (2 * cfg.sequence().rank(s).map_err(anyhow::Error::msg)? + 1) as u32;
        let cubes = cfg.partial_intersection_cubes(s).map_err(anyhow::Error::msg)?;
        let mut total = DyadicRational::zero();
        for cube in &cubes {
            let value = cfg.stage_cube_value(cube).map_err(anyhow::Error::msg)?;
            total = &total + &cube.measure();
            let mut row = vec!["cube".to_string(), s.to_string(), rank.to_string()];
            row.extend(cube.index().iter().map(|m| m.to_string()));
            row.extend(dr_columns(&value));
            rows.push(row);
            json_records.push(serde_json::json!({
                "kind": "cube",
                "stage": s,
                "rank": rank,
                "index": cube.index().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "mantissa": value.mantissa().to_string(),
                "exponent": value.exponent(),
            }));
        }
        let mut row = vec!["total_measure".to_string(), s.to_string(), rank.to_string()];
        row.extend(std::iter::repeat(String::new()).take(cli.dimension));
        row.extend(dr_columns(&total));
        rows.push(row);
        json_records.push(serde_json::json!({
            "kind": "total_measure",
            "stage": s,
            "rank": rank,
            "mantissa": total.mantissa().to_string(),
            "exponent": total.exponent(),
        }));
    }
    Ok(Table { header, rows, json_records })
}

fn sums_table(cli: &Cli, plan: &Plan) -> anyhow::Result<Table> {
    let d = cli.dimension;
    let cfg = MSetConfig::new(d, cli.stages)
        .map_err(anyhow::Error::msg)?
        .with_perms(plan.perms.clone());
    let coeffs = NullSeriesCoefficients::new(cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut points = vec![DyadicPoint::zero(d, plan.depth)];
    for _ in 0..3 {
        points.push(DyadicPoint::random(&mut rng, d, plan.depth));
    }
    // stages whose blocks can be enumerated for the naive sums
    let s_max = {
        let mut best = 1;
        for s in 1..=cli.stages {
            if let Ok(m) = cfg.sequence().rank(s) {
                if 2 * m * d as u64 <= 24 {
                    best = s;
                }
            }
        }
        best
    };
    let grid = 4u64;
    let two = RatioBound::new(2, 1).map_err(anyhow::Error::msg)?;

    let mut header: Vec<String> = vec!["mode".into(), "stage".into(), "point".into()];
    header.extend((1..=d).map(|j| format!("n{j}")));
    header.extend(["mantissa", "exponent", "decimal"].map(String::from));
    let mut rows = Vec::new();
    let mut json_records = Vec::new();

    let seq = cfg.sequence().clone();
    let push = |record: ConvergenceRecord,
                point_id: usize,
                point: &DyadicPoint,
                rows: &mut Vec<Vec<String>>,
                json_records: &mut Vec<serde_json::Value>| {
        let stage = record.stage.map_or_else(|| "-".to_string(), |s| s.to_string());
        let mut row = vec![record.mode.label(), stage.clone(), format!("g{point_id}")];
        row.extend(record.n.components().iter().map(|c| c.to_string()));
        row.extend(dr_columns(&record.value));
        rows.push(row);
        json_records.push(serde_json::json!({
            "mode": record.mode.label(),
            "stage": stage,
            "point": format!("g{point_id}"),
            "point_bits": point.to_string(),
            "n": record.n.components().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "mantissa": record.value.mantissa().to_string(),
            "exponent": record.value.exponent(),
        }));
    };

    for s in 1..=s_max {
        let ms = cfg.sequence().rank(s).map_err(anyhow::Error::msg)?;
        let lo = 1u64 << (2 * ms);
        let hi = 1u64 << (2 * ms + 1);
        let step = ((hi - lo) / grid).max(1);
        let axis: Vec<u64> = (1..=grid).map(|i| lo + i * step).collect();
        for (pid, g) in points.iter().enumerate() {
            // rectangular sweep over the axis grid
            let mut counter = vec![0usize; d];
            'rect: loop {
                let n = WalshIndex::from_u64s(
                    &counter.iter().map(|&i| axis[i]).collect::<Vec<_>>(),
                );
                let v = block_partial_sum(&coeffs, &n, g).map_err(anyhow::Error::msg)?;
                let rec = ConvergenceRecord::new(n, ConvergenceMode::Rectangular, v, &seq)
                    .map_err(anyhow::Error::msg)?;
                push(rec, pid, g, &mut rows, &mut json_records);
                let mut j = d;
                loop {
                    if j == 0 {
                        break 'rect;
                    }
                    j -= 1;
                    counter[j] += 1;
                    if counter[j] < axis.len() {
                        break;
                    }
                    counter[j] = 0;
                }
            }
            // cubic diagonal
            for &a in &axis {
                let n = WalshIndex::diagonal(d, &BigUint::from(a));
                let v = block_partial_sum(&coeffs, &n, g).map_err(anyhow::Error::msg)?;
                let rec = ConvergenceRecord::new(n, ConvergenceMode::Cubic, v, &seq)
                    .map_err(anyhow::Error::msg)?;
                push(rec, pid, g, &mut rows, &mut json_records);
            }
            // ratio-bounded fan at lambda = 2
            for &a in &axis {
                let partner = (2 * a).min(hi);
                let comps: Vec<u64> =
                    (0..d).map(|j| if j % 2 == 0 { a } else { partner }).collect();
                let n = WalshIndex::from_u64s(&comps);
                if !lambda_admissible(&n, two).map_err(anyhow::Error::msg)? {
                    continue;
                }
                let v = block_partial_sum(&coeffs, &n, g).map_err(anyhow::Error::msg)?;
                let rec = ConvergenceRecord::new(n, ConvergenceMode::Lambda(two), v, &seq)
                    .map_err(anyhow::Error::msg)?;
                push(rec, pid, g, &mut rows, &mut json_records);
            }
        }
    }
    // iterated orders, truncated at the outer axis over the largest block
    let ms = cfg.sequence().rank(s_max).map_err(anyhow::Error::msg)?;
    let hi = 1u64 << (2 * ms + 1);
    let orders = permutations(d);
    for (pid, g) in points.iter().enumerate() {
        for order in &orders {
            for outer_limit in [hi / 2, hi] {
                let v = iterated_partial_sum(&coeffs, order, &BigUint::from(outer_limit), g)
                    .map_err(anyhow::Error::msg)?;
                let n = WalshIndex::from_u64s(
                    &(0..d)
                        .map(|j| if j == order[0] { outer_limit } else { hi })
                        .collect::<Vec<_>>(),
                );
                let rec = ConvergenceRecord::new(
                    n,
                    ConvergenceMode::Iterated { order: order.clone(), outer_limit },
                    v,
                    &seq,
                )
                .map_err(anyhow::Error::msg)?;
                push(rec, pid, g, &mut rows, &mut json_records);
            }
        }
    }
    Ok(Table { header, rows, json_records })
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: Vec<usize>, rest: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix);
            return;
        }
        for (i, &x) in rest.iter().enumerate() {
            let mut p = prefix.clone();
            p.push(x);
            let mut r = rest.clone();
            r.remove(i);
            rec(p, r, out);
        }
    }
    let mut out = Vec::new();
    rec(Vec::new(), (0..d).collect(), &mut out);
    out
}

fn uset_table(cli: &Cli, plan: &Plan) -> anyhow::Result<(Table, bool)> {
    let cfg = MSetConfig::new(cli.dimension, cli.stages)
        .map_err(anyhow::Error::msg)?
        .with_perms(plan.perms.clone());
    let demo_stages = cli.stages.min(2);
    let bases =
        SymmetricSequence::default_bases(&cfg, demo_stages).map_err(anyhow::Error::msg)?;
    let seq = SymmetricSequence::new(&cfg, &bases).map_err(anyhow::Error::msg)?;
    let mut windows = vec![DyadicCube::root(cli.dimension)];
    for rank in 1..=2u32 {
        windows.extend(
            DyadicCube::all_at_rank(cli.dimension, rank).map_err(anyhow::Error::msg)?,
        );
    }
    let report = uniqueness_contrast_demo(&cfg, &seq, demo_stages, &windows)
        .map_err(anyhow::Error::msg)?;
    let header: Vec<String> = [
        "construction",
        "stage",
        "cube",
        "integral_value_mantissa",
        "integral_value_exponent",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    let mut json_records = Vec::new();
    for rec in &report.records {
        rows.push(vec![
            rec.construction.clone(),
            rec.stage.to_string(),
            rec.cube.clone(),
            rec.integral_value_mantissa.clone(),
            rec.integral_value_exponent.to_string(),
        ]);
        json_records.push(serde_json::to_value(rec)?);
    }
    eprintln!(
        "symmetric integrals reproduce the window mass: {}",
        report.symmetric_identity_holds
    );
    eprintln!("staged integrals stay within the block magnitude: {}", report.staged_bounded);
    let ok = report.symmetric_identity_holds && report.staged_bounded;
    Ok((Table { header, rows, json_records }, ok))
}

fn emit(cli: &Cli, plan: &Plan, table: Table) -> anyhow::Result<()> {
    let mut writer: BufWriter<Box<dyn Write>> = BufWriter::new(match &cli.out {
        None => Box::new(std::io::stdout()),
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
    });
    match cli.format {
        Format::Csv => {
            writeln!(writer, "{}", table.header.join(","))?;
            for row in &table.rows {
                writeln!(writer, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "config": plan.config,
                "records": table.json_records,
            });
            serde_json::to_writer_pretty(&mut writer, &doc)?;
            writeln!(writer)?;
        }
    }
    writer.flush()?;
    Ok(())
}
