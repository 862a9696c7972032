use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egret_core::harness::{compare_routes, load_network, run_experiment, Config, ExperimentConfig, NetworkSource};
use egret_core::{write_network, Error, Result};

/// Entanglement-gradient routing simulator.
///
/// Settings come from built-in defaults, then the `--config` file, then
/// command-line flags, each layer overriding the previous one.
#[derive(Parser)]
#[command(name = "egret", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected network.
    Gen {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        links: Option<usize>,
    },
    /// Route between two nodes and print every completed path.
    Route(Endpoints),
    /// Run the experiment named by the config's `experiment` key.
    Experiment,
    /// Compare the gradient route with a shortest-path baseline.
    Compare {
        #[command(flatten)]
        endpoints: Endpoints,
        /// `hop` or `inverse-throughput`.
        #[arg(long)]
        baseline: Option<String>,
    },
}

#[derive(Args)]
struct Endpoints {
    /// Network file; a random network is generated when omitted.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    thread_limit: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    chi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    partial: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta_threshold: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    signal_threshold: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pi: Option<f64>,
    /// `inverse` (alias `eq36`) or `direct` (alias `eq44`).
    #[arg(long, global = true)]
    psi_form: Option<String>,
    /// Any other setting, as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

impl Common {
    fn apply(&self, c: &mut Config) -> Result<()> {
        let flags: [(&str, Option<String>); 12] = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
            ("thread_limit", self.thread_limit.map(|v| v.to_string())),
            ("tau", self.tau.map(|v| v.to_string())),
            ("chi", self.chi.map(|v| v.to_string())),
            ("partial", self.partial.map(|v| v.to_string())),
            ("xi", self.xi.map(|v| v.to_string())),
            ("theta_threshold", self.theta_threshold.map(|v| v.to_string())),
            ("signal_threshold", self.signal_threshold.map(|v| v.to_string())),
            ("pi", self.pi.map(|v| v.to_string())),
            ("psi_form", self.psi_form.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v);
            }
        }
        for s in &self.settings {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{s}`")))?;
            c.set(k.trim(), v.trim());
        }
        Ok(())
    }
}

fn endpoint_keys(c: &mut Config, e: &Endpoints) {
    if let Some(p) = &e.network {
        c.set("network", p.display());
    }
    if let Some(s) = &e.source {
        c.set("source", s);
    }
    if let Some(t) = &e.target {
        c.set("target", t);
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("egret: cannot read {}", path.display());
        e.into()
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn run(cli: Cli) -> Result<()> {
    let mut c = match &cli.common.config {
        Some(path) => Config::parse(&read(path)?)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Gen { nodes, links } => {
            if let Some(n) = nodes {
                c.set("nodes", n);
            }
            if let Some(l) = links {
                c.set("links", l);
            }
        }
        Command::Route(e) => endpoint_keys(&mut c, e),
        Command::Compare { endpoints, baseline } => {
            endpoint_keys(&mut c, endpoints);
            if let Some(b) = baseline {
                c.set("baseline", b);
            }
        }
        Command::Experiment => {}
    }
    if !matches!(cli.command, Command::Experiment) {
        c.set("experiment", "route");
    }
    cli.common.apply(&mut c)?;
    let cfg = ExperimentConfig::from_config(c)?;
    let out = cfg.output.as_deref();

    match cli.command {
        Command::Gen { .. } => {
            if matches!(cfg.network, NetworkSource::File(_)) {
                return Err(Error::Config("`gen` does not take a network file".into()));
            }
            emit(out, &write_network(&load_network(&cfg.network, cfg.seed)?))
        }
        Command::Route(_) | Command::Experiment => emit(out, &run_experiment(&cfg)?.to_csv()),
        Command::Compare { .. } => {
            let net = load_network(&cfg.network, cfg.seed)?;
            let first = || net.nodes().first().map(|n| n.id.clone()).expect("networks have nodes");
            let last = || net.nodes().last().map(|n| n.id.clone()).expect("networks have nodes");
            let s = cfg.source.clone().unwrap_or_else(first);
            let t = cfg.target.clone().unwrap_or_else(last);
            let r = compare_routes(&net, &s, &t, &cfg.routing, cfg.seed, cfg.baseline)?;
            let show = |p: &Option<egret_core::EntangledPath>| {
                p.as_ref().map_or_else(
                    || "-".to_string(),
                    |p| p.node_ids(&net).iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
                )
            };
            let text = format!(
                "gradient_path = {}\nbaseline_path = {}\noverlap = {}\ngradient_score = {}\nbaseline_score = {}\nvisits = {} / {}\n",
                show(&r.gradient_path),
                show(&r.baseline_path),
                fmt_opt(r.overlap),
                fmt_opt(r.gradient_score),
                fmt_opt(r.baseline_score),
                r.total_visits,
                r.visit_budget,
            );
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("egret: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
