//! Command-line surface for the order-k mosaic library: closed-form
//! evaluation, seeded Monte Carlo runs with PASS/FAIL comparison, mosaic
//! construction from CSV point files, and C-table estimation.
//!
//! Exit codes: 0 ok, 1 comparison failure under --strict, 2 usage or
//! domain error, 3 missing constant, 4 bias flag.

use clap::{Args, Parser, Subcommand};
use orderk::closed_form::{expected_area, expected_cell_count, CTable, ModelParams, Radius};
use orderk::error::Error;
use orderk::geom::{Boundary, PointSet};
use orderk::grid::auto_r_max;
use orderk::mosaic::{build_mosaic, Region};
use orderk::stochastic::{estimate_ctable, run_experiment, ExperimentConfig, RmaxPolicy, VERSION};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orderk", version = VERSION, about = "Order-k Delaunay mosaics and Poisson expectation checks")]
struct Cli {
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form expectation per unit volume.
    Expect(ExpectArgs),
    /// Run a replicated Monte Carlo experiment and write the report.
    Simulate(SimulateArgs),
    /// Simulate, compare against closed forms, and print PASS/FAIL lines.
    Compare(CompareArgs),
    /// Build the order-k mosaic of a CSV point file and export JSON.
    Mosaic(MosaicArgs),
    /// Estimate the constants C_v^{u,n} by simulation at k = 1.
    Constants(ConstantsArgs),
}

fn parse_radius(text: &str) -> Result<Radius, String> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinite") {
        return Ok(Radius::Infinite);
    }
    text.parse::<f64>()
        .map_err(|e| format!("expected a radius or 'inf': {e}"))
        .and_then(|r| {
            if r >= 0.0 {
                Ok(Radius::Finite(r))
            } else {
                Err("radius must be nonnegative".into())
            }
        })
}

#[derive(Args)]
struct ExpectArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Skeleton dimension for the expected-area formula.
    #[arg(long, conflicts_with = "j")]
    ell: Option<usize>,
    /// Cell dimension for the expected-count formula (needs --ctable
    /// except for k = 1, j = 0).
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    rho: f64,
    /// Radius threshold r0; "inf" for no threshold.
    #[arg(long, default_value = "inf", value_parser = parse_radius)]
    r0: Radius,
    #[arg(long)]
    ctable: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Torus side length L.
    #[arg(long = "box-l", default_value_t = 30.0)]
    box_l: f64,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "inf", value_parser = parse_radius)]
    r0: Radius,
    /// Enumeration radius; defaults to the audited adaptive bound.
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    /// Attach theory columns for cell and interval-type intensities.
    #[arg(long)]
    ctable: Option<PathBuf>,
    /// Report JSON path (a .csv sibling is written next to it).
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sim: SimulateArgs,
    /// Exit nonzero when any compared quantity misses its 3-sigma band.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct MosaicArgs {
    /// CSV point file: x,y or x,y,z per line, '#' comments ignored.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Interpret the input on a periodic box of this side length.
    #[arg(long)]
    periodic: Option<f64>,
    /// Enumeration radius; defaults to the adaptive bound on a torus and
    /// to a full enumeration otherwise.
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    /// Standard deviation of seeded Gaussian jitter applied to the input.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "mosaic.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long = "box-l", default_value_t = 30.0)]
    box_l: f64,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ctable.json")]
    out: PathBuf,
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::MissingConstant { .. } => 3,
        Error::BiasFlag { .. } => 4,
        _ => 2,
    }
}

fn load_ctable(path: &Path) -> Result<CTable, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::DomainError(format!("cannot read {}: {e}", path.display())))?;
    let table = CTable::from_json(&text)?;
    table.validate()?;
    Ok(table)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::DomainError(format!("cannot write {}: {e}", path.display())))
}

/// 12 significant digits.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn cmd_expect(args: &ExpectArgs) -> Result<(), Error> {
    let params = ModelParams::new(args.n, args.k, args.rho)?.with_r0(args.r0);
    match (args.ell, args.j) {
        (Some(ell), None) => {
            let value = expected_area(ell, &params)?;
            println!(
                "expected_area(ell={ell}, k={}, n={}, rho={}) = {}",
                args.k,
                args.n,
                args.rho,
                sig12(value)
            );
        }
        (None, Some(j)) => {
            let table = match &args.ctable {
                Some(path) => Some(load_ctable(path)?),
                None => None,
            };
            let value = match table {
                Some(t) => expected_cell_count(j, &params, &t)?,
                None if args.k == 1 && j == 0 => args.rho,
                None => {
                    return Err(Error::MissingConstant {
                        v: 1,
                        u: j.max(1),
                        n: args.n,
                    });
                }
            };
            println!(
                "expected_cells(j={j}, k={}, n={}, rho={}, r0={:?}) = {}",
                args.k,
                args.n,
                args.rho,
                args.r0,
                sig12(value)
            );
        }
        _ => {
            return Err(Error::DomainError(
                "exactly one of --ell or --j is required".into(),
            ));
        }
    }
    Ok(())
}

fn build_config(args: &SimulateArgs) -> ExperimentConfig {
    let mut config =
        ExperimentConfig::new(args.n, args.k, args.rho, args.box_l, args.reps, args.seed);
    config.r0 = args.r0;
    if let Some(r) = args.r_max {
        config.r_max = RmaxPolicy::Fixed(r);
    }
    config
}

fn run_simulation(args: &SimulateArgs) -> Result<orderk::stochastic::EstimateReport, Error> {
    let table = match &args.ctable {
        Some(path) => Some(load_ctable(path)?),
        None => None,
    };
    let config = build_config(args);
    let report = run_experiment(&config, table.as_ref())?;
    write_file(&args.out, &report.to_json())?;
    let csv_path = args.out.with_extension("csv");
    write_file(&csv_path, &report.to_csv())?;
    eprintln!(
        "wrote {} and {} ({} replications in {:.2}s)",
        args.out.display(),
        csv_path.display(),
        report.config.replications,
        report.runtime_secs
    );
    Ok(report)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let report = run_simulation(args)?;
    for q in &report.quantities {
        println!(
            "{}: mean={} stderr={}",
            q.name,
            sig12(q.mean),
            sig12(q.stderr)
        );
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<bool, Error> {
    let report = run_simulation(&args.sim)?;
    let mut all_pass = true;
    let mut rows: Vec<(String, f64, f64, f64, f64)> = Vec::new();
    for q in &report.quantities {
        if let (Some(theory), Some(z)) = (q.theory, q.z) {
            rows.push((q.name.clone(), q.mean, q.stderr, theory, z));
        }
    }
    for t in &report.per_type {
        if let (Some(theory), Some(z)) = (t.theory, t.z) {
            let name = format!("interval_type_v{}_u{}_g{}", t.ty.v, t.ty.u, t.ty.g);
            rows.push((name, t.mean, t.stderr, theory, z));
        }
    }
    for (name, mean, stderr, theory, z) in rows {
        let pass = z.abs() < 3.0;
        all_pass &= pass;
        println!(
            "{}: mean={} theory={} stderr={} z={:+.3} {}",
            name,
            sig12(mean),
            sig12(theory),
            sig12(stderr),
            z,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if report.violations.total() > 0 {
        all_pass = false;
        println!("structural_invariants: {:?} FAIL", report.violations);
    } else {
        println!("structural_invariants: euler=0 monotonicity=0 duality=0 expansion=0 PASS");
    }
    Ok(all_pass)
}

fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::DomainError(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut saw_data = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(coords) if (2..=3).contains(&coords.len()) => {
                rows.push(coords);
                saw_data = true;
            }
            Ok(coords) => {
                return Err(Error::DomainError(format!(
                    "line {}: expected 2 or 3 coordinates, got {}",
                    lineno + 1,
                    coords.len()
                )));
            }
            Err(_) if !saw_data => {} // header line
            Err(e) => {
                return Err(Error::DomainError(format!("line {}: {e}", lineno + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::DomainError("no points in input".into()));
    }
    Ok(rows)
}

fn apply_jitter(rows: &mut [Vec<f64>], sigma: f64, seed: u64, side: Option<f64>) {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for row in rows.iter_mut() {
        for c in row.iter_mut() {
            *c += normal.sample(&mut rng);
            if let Some(side) = side {
                *c = c.rem_euclid(side);
            }
        }
    }
}

fn cmd_mosaic(args: &MosaicArgs) -> Result<(), Error> {
    let mut rows = read_points_csv(&args.input)?;
    if let Some(sigma) = args.jitter {
        if !(sigma > 0.0) {
            return Err(Error::DomainError("jitter sigma must be positive".into()));
        }
        apply_jitter(&mut rows, sigma, args.seed, args.periodic);
    }
    let boundary = match args.periodic {
        Some(side) => Boundary::PeriodicBox { side },
        None => Boundary::Unbounded,
    };
    let set = PointSet::from_rows(&rows, boundary)?;
    let r_max = match (args.r_max, args.periodic) {
        (Some(r), _) => r,
        (None, Some(_)) => auto_r_max(&set, args.k)?,
        (None, None) => f64::INFINITY,
    };
    let mosaic = build_mosaic(&set, args.k, r_max, &Region::All)?;
    if r_max.is_finite() {
        mosaic.audit_cutoff(r_max)?;
    }
    // embed the resolved configuration and version beside the mosaic
    let mut doc: serde_json::Value =
        serde_json::from_str(&mosaic.to_json()).expect("mosaic JSON parses");
    doc["version"] = serde_json::json!(VERSION);
    doc["config"] = serde_json::json!({
        "input": args.input.display().to_string(),
        "k": args.k,
        "periodic": args.periodic,
        "r_max": if r_max.is_finite() { Some(r_max) } else { None },
        "jitter": args.jitter,
        "seed": args.seed,
    });
    write_file(
        &args.out,
        &serde_json::to_string_pretty(&doc).expect("serializes"),
    )?;
    let n = set.dim();
    let counts = mosaic.cell_counts_by_dim(n);
    println!(
        "points={} intervals={} cells={} by_dim={:?}",
        set.len(),
        mosaic.intervals.len(),
        mosaic.cells.len(),
        counts
    );
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_constants(args: &ConstantsArgs) -> Result<(), Error> {
    let config = ExperimentConfig::new(args.n, 1, args.rho, args.box_l, args.reps, args.seed);
    let (table, report) = estimate_ctable(&config)?;
    let mut doc: serde_json::Value =
        serde_json::from_str(&table.to_json()).expect("ctable JSON parses");
    doc["version"] = serde_json::json!(VERSION);
    doc["config"] = serde_json::to_value(&report.config).expect("config serializes");
    write_file(
        &args.out,
        &serde_json::to_string_pretty(&doc).expect("serializes"),
    )?;
    for e in &table.entries {
        println!(
            "C_{}^({},{}) = {} (stderr {})",
            e.v,
            e.u,
            args.n,
            sig12(e.c),
            e.stderr.map_or_else(|| "-".into(), sig12)
        );
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Expect(args) => cmd_expect(args).map(|()| true),
        Command::Simulate(args) => cmd_simulate(args).map(|()| true),
        Command::Compare(args) => cmd_compare(args),
        Command::Mosaic(args) => cmd_mosaic(args).map(|()| true),
        Command::Constants(args) => cmd_constants(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            let strict = matches!(&cli.command, Command::Compare(c) if c.strict);
            if strict {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
