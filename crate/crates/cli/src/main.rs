use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retrodp::harness::config::{parse_gamma_prior, parse_index_list, RunConfig, SamplerKind};
use retrodp::harness::data::{generate_data, DatasetName};
use retrodp::harness::geweke::{run_geweke, GewekeOptions};
use retrodp::harness::observed::{run_observed_partition, ObservedPartitionConfig};
use retrodp::harness::run::{run, write_outputs};
use retrodp::harness::compare;
use retrodp::retro_conditional::KernelMutation;
use retrodp::{Error, Result};

#[derive(Parser)]
#[command(name = "retrodp", version, about = "Retrospective MCMC for Dirichlet process mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a benchmark dataset, one value per line.
    GenerateData {
        #[arg(long, default_value = "bimod")]
        dataset: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one chain and write trace.csv, summary.txt and summary.kv.
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample sticks and component indices given an observed partition.
    ObservedPartition {
        /// Comma-separated cluster sizes.
        #[arg(long, default_value = "5,4,1")]
        sizes: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        no_label_swap: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several configurations and tabulate their autocorrelation times.
    Compare {
        /// Configuration files, one row each (may be repeated).
        #[arg(long = "configs", num_args = 1..)]
        configs: Vec<PathBuf>,
        /// Samplers to cross with every configuration, e.g. `retro-mh,neal8`.
        #[arg(long)]
        samplers: Option<String>,
        /// Seeds to cross with every configuration, e.g. `1,2,3`.
        #[arg(long)]
        seeds: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Joint-distribution test of a sampler's transition kernel.
    Geweke {
        #[arg(long, default_value = "retro-mh")]
        sampler: String,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Sample alpha under a gamma prior, `shape,rate`.
        #[arg(long, num_args = 0..=1, default_missing_value = "1,1")]
        update_alpha: Option<String>,
        #[arg(long)]
        no_label_swap: bool,
        /// Corrupt the acceptance ratio to check that the test has power.
        #[arg(long)]
        mutate: bool,
    },
}

/// Flags mirroring the configuration keys; each overrides the config file.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// A positive real, or `gamma:shape,rate` to sample it.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    burnin: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Seed for a generated dataset when it should differ from `--seed`.
    #[arg(long)]
    data_seed: Option<String>,
    /// One-based indices of data whose component means are traced.
    #[arg(long)]
    monitor: Option<String>,
    #[arg(long)]
    no_label_swap: bool,
    #[arg(long)]
    no_accelerations: bool,
    #[arg(long)]
    update_alpha: bool,
    /// `midrange` or `half-range`.
    #[arg(long)]
    hyper_mu: Option<String>,
    #[arg(long)]
    fixed_variance: Option<String>,
    #[arg(long)]
    full_scale: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        self.apply(base)
    }

    fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        let values = [
            ("sampler", &self.sampler),
            ("dataset", &self.dataset),
            ("n", &self.n),
            ("alpha", &self.alpha),
            ("iters", &self.iters),
            ("burnin", &self.burnin),
            ("seed", &self.seed),
            ("data-seed", &self.data_seed),
            ("monitor", &self.monitor),
            ("hyper-mu", &self.hyper_mu),
            ("fixed-variance", &self.fixed_variance),
        ];
        for (key, v) in values {
            if let Some(v) = v {
                cfg.set(key, v)?;
            }
        }
        if self.no_label_swap {
            cfg.label_swap = false;
        }
        if self.no_accelerations {
            cfg.accelerations = false;
        }
        if self.update_alpha {
            cfg.enable_alpha_update(None);
        }
        if self.full_scale {
            cfg.full_scale = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::from_kv_str(&text)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::GenerateData { dataset, n, seed, out } => {
            let name: DatasetName = dataset.parse()?;
            let mut text = String::new();
            for v in generate_data(name, n, seed) {
                text.push_str(&format!("{v}\n"));
            }
            match out {
                Some(p) => fs::write(p, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::Run { run: args, out } => {
            let cfg = args.resolve()?;
            let output = run(&cfg)?;
            write_outputs(&out, &output)?;
            print!("{}", output.summary.to_table());
        }
        Command::ObservedPartition {
            sizes,
            alpha,
            iters,
            burnin,
            seed,
            no_label_swap,
            out,
        } => {
            let sizes = parse_index_list(&sizes)?;
            if !(alpha > 0.0) {
                return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
            }
            let mut cfg = ObservedPartitionConfig::new(sizes, alpha, iters, seed);
            if let Some(b) = burnin {
                cfg.burn_in = b;
            }
            cfg.label_swap = !no_label_swap;
            let res = run_observed_partition(&cfg)?;
            let stem = format!(
                "observed_{}",
                res.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("_")
            );
            res.write_figure(&out, &stem)?;
            let mut kv = String::new();
            for j in 0..res.weights.len() {
                let w = &res.weights[j];
                kv.push_str(&format!("p_{}.mean={}\n", j + 1, w.iter().sum::<f64>() / w.len() as f64));
            }
            if res.weights.len() >= 2 {
                kv.push_str(&format!("pr_p2_gt_p1={}\n", res.prob_greater(2, 1)));
            }
            let m = &res.max_weight;
            kv.push_str(&format!("max_p.mean={}\n", m.iter().sum::<f64>() / m.len() as f64));
            kv.push_str(&format!("crossings={}\n", res.crossings));
            kv.push_str(&format!("weight_crossings={}\n", res.weight_crossings));
            fs::create_dir_all(&out)?;
            fs::write(out.join("summary.kv"), &kv)?;
            print!("{kv}");
        }
        Command::Compare {
            configs,
            samplers,
            seeds,
            run: args,
            out,
        } => {
            let mut bases = Vec::new();
            if configs.is_empty() {
                bases.push(args.resolve()?);
            } else {
                for p in &configs {
                    bases.push(args.apply(read_config(p)?)?);
                }
            }
            let samplers: Option<Vec<SamplerKind>> = samplers
                .map(|s| s.split(',').map(str::parse).collect::<Result<Vec<_>>>())
                .transpose()?;
            let seeds: Option<Vec<u64>> = seeds
                .map(|s| {
                    s.split(',')
                        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("bad seed {t:?}"))))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let mut all = Vec::new();
            for b in &bases {
                for s in samplers.clone().unwrap_or_else(|| vec![b.sampler]) {
                    for seed in seeds.clone().unwrap_or_else(|| vec![b.seed]) {
                        let mut c = b.clone();
                        c.sampler = s;
                        // replicate chains share the base configuration's data
                        c.data_seed = Some(b.data_seed.unwrap_or(b.seed));
                        c.seed = seed;
                        all.push(c);
                    }
                }
            }
            let (table, outputs) = compare(&all)?;
            fs::create_dir_all(&out)?;
            for (i, o) in outputs.iter().enumerate() {
                write_outputs(&out.join(format!("run{i}")), o)?;
            }
            fs::write(out.join("summary.txt"), table.to_table())?;
            fs::write(out.join("summary.kv"), table.to_kv())?;
            print!("{}", table.to_table());
        }
        Command::Geweke {
            sampler,
            iters,
            seed,
            alpha,
            update_alpha,
            no_label_swap,
            mutate,
        } => {
            let mut opts = GewekeOptions::new(sampler.parse()?, iters, seed);
            if !(alpha > 0.0) {
                return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
            }
            opts.alpha = alpha;
            if let Some(p) = update_alpha {
                let prior = parse_gamma_prior(&p)?;
                opts.alpha_prior = Some(prior);
            }
            opts.label_swap = !no_label_swap;
            if mutate {
                opts.mutation = KernelMutation::InvertedRatio;
            }
            let report = run_geweke(&opts)?;
            println!("{:<10} {:>10} {:>12} {:>14} {:>14}", "statistic", "p-value", "ks", "prior mean", "chain mean");
            for s in &report.stats {
                println!(
                    "{:<10} {:>10.4} {:>12.5} {:>14.5} {:>14.5}",
                    s.name, s.p_value, s.ks, s.marginal_mean, s.successive_mean
                );
            }
            println!("min p-value {:.4}", report.min_p());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
