use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use jumpga::experiment::{
    preset, verify, ComparisonSpec, Preset, SweepOutput, SweepSpec, SummaryRow, VerifyOptions, PRESETS,
    SUITES,
};
use jumpga::{run, Trajectory, DEFAULT_MAX_EVALUATIONS};

#[derive(Parser)]
#[command(name = "jumpga", version, about = "(mu+1) GA experiments on Jump_k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration.
    Run(RunArgs),
    /// Run a parameter sweep or a preset and write raw.csv / summary.csv.
    Sweep(SweepArgs),
    /// Compare tie-breaking mechanisms at one (n, k).
    Compare(CompareArgs),
    /// Run a verification suite: oracles, transitions or equivalence.
    Verify(VerifyArgs),
    /// List the built-in presets.
    Presets,
}

/// Flags mirroring the run configuration; applied after any config file.
#[derive(Args, Default)]
struct ConfigFlags {
    /// Key-value experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` assignments, applied in order after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Population size or `derived`.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long = "p-c")]
    p_c: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "max-evaluations")]
    max_evaluations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl ConfigFlags {
    fn text(&self) -> Result<Option<String>> {
        self.config
            .as_ref()
            .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
            .transpose()
    }

    /// Assignments in application order: `--set` entries, then typed flags.
    fn assignments(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for s in &self.set {
            let Some((k, v)) = s.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {s:?}");
            };
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let typed = [
            ("n", &self.n),
            ("k", &self.k),
            ("mu", &self.mu),
            ("p_c", &self.p_c),
            ("chi", &self.chi),
            ("mechanism", &self.mechanism),
            ("sigma", &self.sigma),
            ("alpha", &self.alpha),
            ("max_evaluations", &self.max_evaluations),
            ("seed", &self.seed),
        ];
        out.extend(typed.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))));
        Ok(out)
    }

    fn apply_sweep(&self, spec: &mut SweepSpec) -> Result<()> {
        if let Some(text) = self.text()? {
            spec.apply_text(&text)?;
        }
        for (k, v) in self.assignments()? {
            spec.apply(&k, &v)?;
        }
        Ok(())
    }

    fn apply_comparison(&self, spec: &mut ComparisonSpec) -> Result<()> {
        if let Some(text) = self.text()? {
            spec.apply_text(&text)?;
        }
        for (k, v) in self.assignments()? {
            if k == "p_c" && v.parse::<f64>().ok() != Some(1.0) {
                bail!("mechanism comparisons always use p_c = 1");
            }
            if k != "p_c" {
                spec.apply(&k, &v)?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Disable mutation of the island model's receiver offspring.
    #[arg(long)]
    no_receiver_mutation: bool,
    /// Trajectory sampling: `off`, `mu` (every mu evaluations) or a stride.
    #[arg(long, default_value = "off")]
    trajectory: String,
    /// Write the trajectory as CSV here.
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Run a built-in preset instead of a config (flags still override the
    /// master seed and replication count).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    replications: Option<u64>,
    /// Output directory for raw.csv and summary.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Comma-separated mechanism ids (default: all rules plus island).
    #[arg(long)]
    mechanisms: Option<String>,
    #[arg(long)]
    island_mu: Option<usize>,
    /// Chi of the uniform high-mutation baseline, or `none`.
    #[arg(long)]
    baseline_chi: Option<String>,
    #[arg(long)]
    replications: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name.
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Samples per y in the transition suite.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Random pools in the equivalence suite.
    #[arg(long, default_value_t = 10_000)]
    pools: u64,
}

fn trajectory(spec: &str) -> Result<Trajectory> {
    Ok(match spec {
        "off" => Trajectory::Off,
        "mu" => Trajectory::EveryMu,
        s => Trajectory::Every(s.parse().with_context(|| format!("bad trajectory stride {s:?}"))?),
    })
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let mut spec = SweepSpec {
        max_evaluations: DEFAULT_MAX_EVALUATIONS,
        replications: 1,
        receiver_mutation: !args.no_receiver_mutation,
        ..SweepSpec::default()
    };
    args.flags.apply_sweep(&mut spec)?;
    if !spec.axes.is_empty() {
        bail!("`run` takes a single configuration; use `sweep` for sweep.* keys");
    }
    let mut config = spec.grid()?.remove(0);
    config.seed = spec.master_seed;
    config.trajectory = trajectory(&args.trajectory)?;
    let rec = run(&config)?;

    let mut out = io::stdout().lock();
    writeln!(out, "n={} k={} mu={} p_c={} chi={} mechanism={} seed={}", config.n, config.k, config.mu, config.p_c, config.chi, config.mechanism.id(), config.seed)?;
    writeln!(out, "evaluations={}", rec.evaluations)?;
    writeln!(out, "success={}", rec.success())?;
    if let Some(p) = rec.plateau_arrival {
        writeln!(out, "plateau_arrival={p}")?;
    }
    if let Some(r) = rec.receiver_success {
        writeln!(out, "receiver_success={r}")?;
    }
    writeln!(out, "population_digest={}", rec.final_population_digest)?;
    if let Some(path) = args.trajectory_out {
        let mut s = String::from("evaluations,largest_species,species\n");
        for t in &rec.trajectory {
            s.push_str(&format!("{},{},{}\n", t.evaluations, t.largest_species, t.species));
        }
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rec.success())
}

fn print_summary(rows: &[SummaryRow]) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{:>5} {:>5} {:>3} {:>4} {:>5} {:>6} {:<16} {:>5} {:>12} {:>12}", "grid", "n", "k", "mu", "p_c", "chi", "mechanism", "done", "mean", "median")?;
    for r in rows {
        let (mean, median) = r.stats.as_ref().map_or((f64::NAN, f64::NAN), |s| (s.mean, s.median));
        writeln!(
            out,
            "{:>5} {:>5} {:>3} {:>4} {:>5} {:>6} {:<16} {:>5} {:>12.1} {:>12.1}",
            r.grid_index, r.n, r.k, r.mu, r.p_c, r.chi, r.mechanism, r.completed, mean, median
        )?;
    }
    Ok(())
}

fn finish(output: &SweepOutput, out: &std::path::Path) -> Result<()> {
    print_summary(&output.summary)?;
    let timeouts: u64 = output.summary.iter().map(|r| r.timeout_count).sum();
    info!("wrote {} and {}", out.join("raw.csv").display(), out.join("summary.csv").display());
    if timeouts > 0 {
        eprintln!("{timeouts} runs hit the evaluation budget");
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<bool> {
    let output = match &args.preset {
        Some(name) => {
            let mut p = preset(name)?;
            // Config flags on a preset: seed and replications only.
            if let Some(seed) = &args.flags.seed {
                p.set_master_seed(seed.parse().context("bad --seed")?);
            }
            if let Some(r) = args.replications {
                match &mut p {
                    Preset::Sweep(s) => s.replications = r,
                    Preset::Comparison(c) => c.replications = r,
                }
            }
            p.run(Some(&args.out))?
        }
        None => {
            let mut spec = SweepSpec::default();
            args.flags.apply_sweep(&mut spec)?;
            if let Some(r) = args.replications {
                spec.replications = r;
            }
            jumpga::experiment::run_sweep(&spec, Some(&args.out))?
        }
    };
    finish(&output, &args.out)?;
    Ok(true)
}

fn cmd_compare(args: CompareArgs) -> Result<bool> {
    let Preset::Comparison(mut spec) = preset("fig4-desk")? else {
        unreachable!("fig4-desk is a comparison preset");
    };
    args.flags.apply_comparison(&mut spec)?;
    if let Some(m) = &args.mechanisms {
        spec.apply("mechanisms", m)?;
    }
    if let Some(mu) = args.island_mu {
        spec.island_mu = mu;
    }
    if let Some(b) = &args.baseline_chi {
        spec.apply("baseline_chi", b)?;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    let output = jumpga::experiment::run_mechanism_comparison(&spec, Some(&args.out))?;
    finish(&output, &args.out)?;
    if let Some(reference) = output.summary.iter().position(|r| r.mechanism == "uniform" && r.chi == spec.chi) {
        println!("one-sided rank-sum p-values against uniform:");
        for (i, r) in output.summary.iter().enumerate().filter(|&(i, _)| i != reference) {
            if let Some(t) = output.rank_sum_less(i, reference) {
                println!("  {:<16} chi={:<5} p={:.4}", r.mechanism, r.chi, t.p_value);
            }
        }
    }
    Ok(true)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let opts = VerifyOptions {
        seed: args.seed,
        transition_samples: args.samples,
        equivalence_pools: args.pools,
    };
    let report = verify(&args.suite, &opts).with_context(|| format!("suites: {}", SUITES.join(", ")))?;
    print!("{report}");
    Ok(report.passed())
}

fn cmd_presets() -> Result<bool> {
    for (name, description) in PRESETS {
        println!("{name:<10} {description}");
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
