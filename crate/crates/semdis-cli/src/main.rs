//! `semdis` command line: ingest norms, build transition and similarity
//! networks, compute descriptors and score synthetic networks against a
//! reference.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse/format error, 3 domain
//! error, 4 i/o error.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use semdis::compare::compare_networks;
use semdis::descriptors::{descriptor_report, distribution_points, DistributionMode};
use semdis::error::Error;
use semdis::featuresim::fp_cosine_network;
use semdis::ingest::{intersect_vocabulary, parse_fa, parse_fp};
use semdis::network::{DupPolicy, SymmetrizeRule, WeightedNetwork};
use semdis::rim::{
    convergence_profile, cosine_project, mc_inheritance, power_sum, row_normalize, CosineOptions,
    DanglingPolicy, RimConfig,
};

#[derive(Parser)]
#[command(name = "semdis", version, about = "Semantic network toolkit: disentangle feature similarity from free-association norms")]
struct Cli {
    /// Cap the worker thread count (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DupPolicyArg {
    /// Reject duplicate edges
    Error,
    /// Sum duplicate edge weights
    Sum,
}

impl From<DupPolicyArg> for DupPolicy {
    fn from(v: DupPolicyArg) -> Self {
        match v {
            DupPolicyArg::Error => DupPolicy::Error,
            DupPolicyArg::Sum => DupPolicy::Sum,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetrizeArg {
    Max,
    Sum,
    Mean,
}

impl From<SymmetrizeArg> for SymmetrizeRule {
    fn from(v: SymmetrizeArg) -> Self {
        match v {
            SymmetrizeArg::Max => SymmetrizeRule::Max,
            SymmetrizeArg::Sum => SymmetrizeRule::Sum,
            SymmetrizeArg::Mean => SymmetrizeRule::Mean,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DanglingArg {
    /// Reject networks with cue-less nodes
    Error,
    /// Remove cue-less nodes and renormalize
    Drop,
    /// Keep all-zero transition rows
    KeepZero,
}

impl From<DanglingArg> for DanglingPolicy {
    fn from(v: DanglingArg) -> Self {
        match v {
            DanglingArg::Error => DanglingPolicy::Error,
            DanglingArg::Drop => DanglingPolicy::Drop,
            DanglingArg::KeepZero => DanglingPolicy::KeepZero,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Strength,
    Degree,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Fraction of values at or above x
    Survival,
    /// Fraction of values strictly below x
    Below,
}

#[derive(Subcommand)]
enum Command {
    /// Parse association norms (cue<TAB>target<TAB>frequency) into the
    /// canonical network format
    IngestFa {
        /// Association norms TSV
        path: PathBuf,
        /// Duplicate cue/target rows add up by default
        #[arg(long, value_enum, default_value_t = DupPolicyArg::Sum)]
        dup_policy: DupPolicyArg,
        /// Output network TSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse feature norms (concept<TAB>feature<TAB>frequency) and echo the
    /// validated canonical form
    IngestFp {
        /// Feature production norms TSV
        path: PathBuf,
        /// Output feature TSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Tokens common to the association and feature vocabularies, one per
    /// line, sorted
    Intersect {
        /// Association norms TSV
        fa: PathBuf,
        /// Feature production norms TSV
        fp: PathBuf,
        /// Output token list
        #[arg(long)]
        out: PathBuf,
    },
    /// Descriptor report (N, mean strength, path length, diameter,
    /// clustering, assortativity) of a network
    Stats {
        /// Network TSV (directed input is symmetrized first)
        net: PathBuf,
        /// Output JSON report
        #[arg(long)]
        out: PathBuf,
        /// Also write a one-row CSV in table column order
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Rule for collapsing directed input
        #[arg(long, value_enum, default_value_t = SymmetrizeArg::Max)]
        symmetrize: SymmetrizeArg,
    },
    /// Random-inheritance pipeline: normalize, accumulate S transition
    /// powers, project row cosines into a similarity network
    Rim {
        /// Directed association network TSV
        net: PathBuf,
        /// Number of walk steps to accumulate
        #[arg(long, default_value_t = 4)]
        steps: usize,
        /// Treatment of cue-less nodes
        #[arg(long, value_enum, default_value_t = DanglingArg::KeepZero)]
        dangling: DanglingArg,
        /// Add each word's own canonical basis vector before projecting
        #[arg(long)]
        include_identity: bool,
        /// Keep only similarities strictly above this as edges
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Restrict to the tokens listed in this file first
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Output similarity network TSV
        #[arg(long)]
        out: PathBuf,
        /// Also export the dense similarity matrix
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Also export the dense accumulated transition matrix
        #[arg(long)]
        t_matrix: Option<PathBuf>,
        /// Also export a step-by-step convergence profile CSV
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Largest step count for the convergence profile
        #[arg(long, default_value_t = 10)]
        profile_max_steps: usize,
    },
    /// Monte Carlo walker estimate of the accumulated transition matrix
    McRim {
        /// Directed association network TSV
        net: PathBuf,
        /// Number of walk steps
        #[arg(long, default_value_t = 4)]
        steps: usize,
        /// Independent walks per start node
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Random stream seed; same seed, same output
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to the tokens listed in this file first
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Output dense matrix TSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Cosine similarity network of feature-production norms
    Fpnet {
        /// Feature production norms TSV
        fp: PathBuf,
        /// Keep only cosines strictly above this as edges
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Restrict to the tokens listed in this file first
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Output similarity network TSV
        #[arg(long)]
        out: PathBuf,
        /// Also export the dense cosine matrix
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Score a candidate network's neighbor lists against a reference
    Compare {
        /// Reference network TSV
        reference: PathBuf,
        /// Candidate network TSV
        candidate: PathBuf,
        /// Evaluate list lengths 1..=lmax
        #[arg(long, default_value_t = 15)]
        lmax: usize,
        /// Output CSV (l, mean_match_pct, mean_error)
        #[arg(long)]
        out: PathBuf,
        /// Also export full per-word detail as JSON
        #[arg(long)]
        detail: Option<PathBuf>,
    },
    /// Cumulative strength or degree distribution of a network
    Dist {
        /// Network TSV (directed input is symmetrized first)
        net: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Strength)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Survival)]
        mode: ModeArg,
        /// Output CSV (value, fraction)
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own message; all argument problems are usage
            // errors regardless of clap's default exit code
            let _ = err.print();
            std::process::exit(if err.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 4,
        Error::MalformedLine { .. }
        | Error::DuplicateFeature { .. }
        | Error::DuplicateToken(_)
        | Error::EmptyInput(_) => 2,
        _ => 3,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::IngestFa { path, dup_policy, out } => {
            let net = parse_fa(&path, dup_policy.into())?;
            net.save(&out)?;
            println!(
                "ingest-fa: {} nodes, {} arcs -> {}",
                net.node_count(),
                net.edge_count(),
                out.display()
            );
        }
        Command::IngestFp { path, out } => {
            let fm = parse_fp(&path)?;
            fm.save(&out)?;
            let entries: usize = (0..fm.concept_count() as u32).map(|i| fm.row(i).len()).sum();
            println!(
                "ingest-fp: {} concepts, {} features, {} entries -> {}",
                fm.concept_count(),
                fm.feature_count(),
                entries,
                out.display()
            );
        }
        Command::Intersect { fa, fp, out } => {
            let fa_net = parse_fa(&fa, DupPolicy::Sum)?;
            let fm = parse_fp(&fp)?;
            let common = intersect_vocabulary(fa_net.vocab(), fm.vocab())?;
            let mut text = String::new();
            for token in &common {
                text.push_str(token);
                text.push('\n');
            }
            write_text(&out, &text)?;
            println!(
                "intersect: {} of {} association and {} feature tokens -> {}",
                common.len(),
                fa_net.node_count(),
                fm.concept_count(),
                out.display()
            );
        }
        Command::Stats { net, out, csv, symmetrize } => {
            let mut network = WeightedNetwork::load(&net)?;
            if network.is_directed() {
                network = network.symmetrize(symmetrize.into());
            }
            let report = descriptor_report(&network)?;
            write_text(&out, &report.to_json_string())?;
            if let Some(csv_path) = csv {
                write_text(&csv_path, &report.to_csv())?;
            }
            println!(
                "stats: N={} <s>={:.4} L={:.4} D={} C={:.4} r={} -> {}",
                report.n,
                report.mean_strength,
                report.avg_path_length,
                report.diameter,
                report.avg_clustering,
                report
                    .assortativity
                    .map_or_else(|| "undefined".to_string(), |r| format!("{r:.4}")),
                out.display()
            );
        }
        Command::Rim {
            net,
            steps,
            dangling,
            include_identity,
            threshold,
            restrict,
            out,
            matrix,
            t_matrix,
            profile,
            profile_max_steps,
        } => {
            let network = load_restricted(&net, restrict.as_deref())?;
            let p = row_normalize(&network, dangling.into())?;
            let t = power_sum(&p, steps);
            let sim = cosine_project(
                &t,
                CosineOptions {
                    include_identity,
                    threshold,
                },
            );
            sim.network().save(&out)?;
            if let Some(path) = matrix {
                sim.matrix().save_tsv(sim.vocab(), &path)?;
            }
            if let Some(path) = t_matrix {
                t.entries().save_tsv(t.vocab(), &path)?;
            }
            if let Some(path) = profile {
                let mut text = String::from("steps,fs_delta,t_delta,fs_hamming\n");
                for point in convergence_profile(&p, profile_max_steps.max(2)) {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        point.steps, point.fs_delta, point.t_delta, point.fs_hamming
                    ));
                }
                write_text(&path, &text)?;
            }
            println!(
                "rim: N={} steps={} edges={} -> {}",
                sim.vocab().len(),
                steps,
                sim.network().edge_count(),
                out.display()
            );
        }
        Command::McRim {
            net,
            steps,
            runs,
            seed,
            restrict,
            out,
        } => {
            let network = load_restricted(&net, restrict.as_deref())?;
            let estimate = mc_inheritance(&network, steps, runs, seed)?;
            estimate.entries().save_tsv(estimate.vocab(), &out)?;
            println!(
                "mc-rim: N={} steps={} runs={} seed={} -> {}",
                estimate.vocab().len(),
                steps,
                runs,
                seed,
                out.display()
            );
        }
        Command::Fpnet {
            fp,
            threshold,
            restrict,
            out,
            matrix,
        } => {
            let mut fm = parse_fp(&fp)?;
            if let Some(list) = restrict.as_deref() {
                fm = fm.restrict(read_token_list(list)?)?;
            }
            let sim = fp_cosine_network(&fm, threshold);
            sim.network().save(&out)?;
            if let Some(path) = matrix {
                sim.matrix().save_tsv(sim.vocab(), &path)?;
            }
            println!(
                "fpnet: N={} edges={} -> {}",
                sim.vocab().len(),
                sim.network().edge_count(),
                out.display()
            );
        }
        Command::Compare {
            reference,
            candidate,
            lmax,
            out,
            detail,
        } => {
            let reference_net = WeightedNetwork::load(&reference)?;
            let candidate_net = WeightedNetwork::load(&candidate)?;
            let report = compare_networks(&reference_net, &candidate_net, lmax)?;
            write_text(&out, &report.to_csv())?;
            if let Some(path) = detail {
                write_text(&path, &report.to_json_string())?;
            }
            println!(
                "compare: {} words, lmax={}, mean match {:.1}%, mean error {:.3} -> {}",
                report.per_word.len(),
                lmax,
                report.grand_mean_match_pct,
                report.grand_mean_error,
                out.display()
            );
        }
        Command::Dist { net, metric, mode, out } => {
            let mut network = WeightedNetwork::load(&net)?;
            if network.is_directed() {
                network = network.symmetrize(SymmetrizeRule::Max);
            }
            let values: Vec<f64> = (0..network.node_count() as u32)
                .map(|i| match metric {
                    MetricArg::Strength => network.strength(i),
                    MetricArg::Degree => network.degree(i) as f64,
                })
                .collect();
            let mode = match mode {
                ModeArg::Survival => DistributionMode::Survival,
                ModeArg::Below => DistributionMode::Below,
            };
            let points = distribution_points(&values, mode)?;
            let mut text = String::from("value,fraction\n");
            for (x, fraction) in &points {
                text.push_str(&format!("{x},{fraction}\n"));
            }
            write_text(&out, &text)?;
            println!("dist: {} points -> {}", points.len(), out.display());
        }
    }
    Ok(())
}

fn load_restricted(path: &Path, restrict: Option<&Path>) -> Result<WeightedNetwork, Error> {
    let network = WeightedNetwork::load(path)?;
    match restrict {
        Some(list) => network.induced_subnetwork(read_token_list(list)?),
        None => Ok(network),
    }
}

fn read_token_list(path: &Path) -> Result<Vec<String>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut tokens = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let token = line.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        tokens.push(token.to_string());
    }
    if tokens.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no tokens in {}",
            path.display()
        )));
    }
    Ok(tokens)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
