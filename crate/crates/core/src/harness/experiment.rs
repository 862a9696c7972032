use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use super::baseline::{baseline_shortest_path, compare_routes, BaselineWeight};
use super::config::{Config, Interval, LevelWeights, Sweep};
use super::table::CsvTable;
use crate::error::{Error, Result};
use crate::fidelity::correlation_measurement;
use crate::gradient::SelectionParams;
use crate::network::{generate_network, parse_network, GenerationSpec, NodeId, QuantumNetwork};
use crate::path::{decay_rate_from_threshold, mean_path_gradient, ArrivalRates, Endpoint};
use crate::rate::{cutoff_rate, peak_mean_gradient, response};
use crate::router::{
    run_routing, thread_step_distribution, ExpectedThroughput, MeanEstimator, RoutingParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Route,
    Sweep,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig3a" => Self::Fig3a,
            "fig3b" => Self::Fig3b,
            "fig4" => Self::Fig4,
            "fig5" => Self::Fig5,
            "fig6" => Self::Fig6,
            "fig7" => Self::Fig7,
            "route" => Self::Route,
            "sweep" => Self::Sweep,
            other => return Err(Error::config(format!("unknown experiment `{other}`"))),
        })
    }
}

/// Where a routing experiment gets its network.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    File(PathBuf),
    Generated(GenerationSpec),
}

/// Figure-curve parameters. Unused fields are ignored by other experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams {
    /// Throughput deviations for the decay-rate curve.
    pub phi: Sweep,
    pub threshold: f64,
    pub expected: f64,
    pub kappa_total: f64,
    pub kappa_other: f64,
    pub mean: f64,
    /// Endpoint decay rates for the mean-gradient curve.
    pub tau_endpoint: Sweep,
    pub gammas: Sweep,
    pub nu: Sweep,
    pub mu: Sweep,
    pub kappas: Sweep,
    pub tau_node: Sweep,
    pub peak_fraction: f64,
    pub thetas: Sweep,
    pub psi: f64,
    pub competitors: usize,
    pub weight_step: f64,
    pub p_err: Sweep,
    pub levels: (u32, u32),
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams {
            phi: Sweep::logarithmic(1.0, 1e8, 9),
            threshold: 1.0,
            expected: 2.0,
            kappa_total: 4.0,
            kappa_other: 2.0,
            mean: 1.0,
            tau_endpoint: Sweep::linear(0.1, 10.0, 100),
            gammas: Sweep(vec![0.1, 0.5, 0.8, 0.9]),
            nu: Sweep::linear(-PI, PI, 201),
            mu: Sweep::linear(0.0, 10.0, 11),
            kappas: Sweep(vec![1e4, 1e5, 1e6, 1e7, 1e8]),
            tau_node: Sweep::logarithmic(1.0, 1e4, 41),
            peak_fraction: 0.5,
            thetas: Sweep(vec![0.5, 0.2]),
            psi: 5.0,
            competitors: 4,
            weight_step: 0.1,
            p_err: Sweep::linear(0.0, 0.025, 26),
            levels: (1, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub routing: RoutingParams,
    pub curves: CurveParams,
    pub network: NetworkSource,
    pub source: Option<NodeId>,
    pub target: Option<NodeId>,
    pub baseline: BaselineWeight,
    /// Number of generated networks in a sweep.
    pub runs: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: 0,
            output: None,
            routing: RoutingParams::default(),
            curves: CurveParams::default(),
            network: NetworkSource::Generated(GenerationSpec::default()),
            source: None,
            target: None,
            baseline: BaselineWeight::Hop,
            runs: 20,
        }
    }

    /// Builds a configuration from `key = value` settings; unknown keys are errors.
    pub fn from_config(mut c: Config) -> Result<Self> {
        let kind: ExperimentKind = c
            .take("experiment")?
            .ok_or_else(|| Error::config("missing `experiment` key"))?;
        let mut cfg = ExperimentConfig::new(kind);
        cfg.seed = c.take_or("seed", cfg.seed)?;
        cfg.output = c.take::<String>("out")?.map(PathBuf::from);
        cfg.routing = routing_from(&mut c, cfg.routing)?;

        let g = GenerationSpec::default();
        let spec = GenerationSpec {
            nodes: c.take_or("nodes", g.nodes)?,
            links: c.take_or("links", g.links)?,
            observation_rate: interval(&mut c, "kappa_range", g.observation_rate)?,
            decay_rate: interval(&mut c, "tau_range", g.decay_rate)?,
            throughput: interval(&mut c, "throughput_range", g.throughput)?,
            fidelity: interval(&mut c, "fidelity_range", g.fidelity)?,
            levels: c.take::<LevelWeights>("link_levels")?.map_or(g.levels, |l| l.0),
            initial_utility: c.take_or("initial_utility", g.initial_utility)?,
        };
        cfg.network = match c.take::<String>("network")? {
            Some(path) => NetworkSource::File(path.into()),
            None => NetworkSource::Generated(spec),
        };
        cfg.source = c.take::<String>("source")?.map(NodeId::new);
        cfg.target = c.take::<String>("target")?.map(NodeId::new);
        cfg.baseline = c.take_or("baseline", cfg.baseline)?;
        cfg.runs = c.take_or("runs", cfg.runs)?;

        let d = CurveParams::default();
        let k = &mut cfg.curves;
        k.phi = c.take_or("phi", d.phi)?;
        k.threshold = c.take_or("threshold", d.threshold)?;
        k.expected = c.take_or("expected", d.expected)?;
        k.kappa_total = c.take_or("kappa_total", d.kappa_total)?;
        k.kappa_other = c.take_or("kappa_other", d.kappa_other)?;
        k.mean = c.take_or("mean", d.mean)?;
        k.tau_endpoint = c.take_or("tau_endpoint", d.tau_endpoint)?;
        k.gammas = c.take_or("gammas", d.gammas)?;
        k.nu = c.take_or("nu", d.nu)?;
        k.mu = c.take_or("mu", d.mu)?;
        k.kappas = c.take_or("kappas", d.kappas)?;
        k.tau_node = c.take_or("tau_node", d.tau_node)?;
        k.peak_fraction = c.take_or("pi", d.peak_fraction)?;
        k.thetas = c.take_or("thetas", d.thetas)?;
        k.psi = c.take_or("psi", d.psi)?;
        k.competitors = c.take_or("competitors", d.competitors)?;
        k.weight_step = c.take_or("weight_step", d.weight_step)?;
        k.p_err = c.take_or("p_err", d.p_err)?;
        if let Some(Interval(lo, hi)) = c.take("levels")? {
            if lo.fract() != 0.0 || hi.fract() != 0.0 || lo < 1.0 {
                return Err(Error::config("levels must be integers >= 1"));
            }
            k.levels = (lo as u32, hi as u32);
        }
        c.finish()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_config(Config::parse(text)?)
    }
}

fn interval(c: &mut Config, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
    Ok(c.take::<Interval>(key)?.map_or(default, |Interval(a, b)| (a, b)))
}

fn routing_from(c: &mut Config, d: RoutingParams) -> Result<RoutingParams> {
    let s = d.selection;
    Ok(RoutingParams {
        threads: c.take_or("threads", d.threads)?,
        thread_limit: c.take_or("thread_limit", d.thread_limit)?,
        tau: c.take_or("tau", d.tau)?,
        selection: SelectionParams {
            threshold: c.take_or("partial", s.threshold)?,
            exponent: c.take_or("chi", s.exponent)?,
            source_weight: c.take_or("xi", s.source_weight)?,
        },
        c1: c.take_or("c1", d.c1)?,
        c2: c.take_or("c2", d.c2)?,
        adaptive_weights: c.take_or("adaptive_weights", d.adaptive_weights)?,
        theta_threshold: c.take_or("theta_threshold", d.theta_threshold)?,
        signal_threshold: c.take_or("signal_threshold", d.signal_threshold)?,
        psi_form: c.take_or("psi_form", d.psi_form)?,
        psi_min: c.take_or("psi_min", d.psi_min)?,
        initial_gradient: c.take_or("initial_gradient", d.initial_gradient)?,
        halt_on_target: c.take_or("halt_on_target", d.halt_on_target)?,
        workers: c.take_or("workers", d.workers)?,
        score_iterations: c.take_or("score_iterations", d.score_iterations)?,
        mean_estimator: match c.take::<String>("mean_estimator")?.as_deref() {
            None => d.mean_estimator,
            Some("replay") => MeanEstimator::Replay,
            Some("delivered") => MeanEstimator::Delivered,
            Some(other) => return Err(Error::config(format!("unknown mean estimator `{other}`"))),
        },
        expected_throughput: match c.take::<String>("expected_throughput")?.as_deref() {
            None => d.expected_throughput,
            Some("running-mean") => ExpectedThroughput::RunningMean,
            Some(v) => ExpectedThroughput::Constant(
                v.parse()
                    .map_err(|_| Error::config(format!("bad expected throughput `{v}`")))?,
            ),
        },
    })
}

/// Loads or generates the network of a routing experiment.
pub fn load_network(source: &NetworkSource, seed: u64) -> Result<QuantumNetwork> {
    match source {
        NetworkSource::File(path) => parse_network(&std::fs::read_to_string(path)?),
        NetworkSource::Generated(spec) => generate_network(spec, seed),
    }
}

/// First and last node by id unless configured.
fn endpoints(cfg: &ExperimentConfig, net: &QuantumNetwork) -> (NodeId, NodeId) {
    let first = net.nodes().first().map(|n| n.id.clone());
    let last = net.nodes().last().map(|n| n.id.clone());
    (
        cfg.source.clone().or(first).expect("networks have nodes"),
        cfg.target.clone().or(last).expect("networks have nodes"),
    )
}

/// Runs one experiment. Row-level domain errors are recorded in the table
/// and the row is left out.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let k = &cfg.curves;
    match cfg.kind {
        ExperimentKind::Fig3a => fig3a(k),
        ExperimentKind::Fig3b => fig3b(k),
        ExperimentKind::Fig4 => fig4(k),
        ExperimentKind::Fig5 => fig5(k),
        ExperimentKind::Fig6 => fig6(k),
        ExperimentKind::Fig7 => fig7(k),
        ExperimentKind::Route => route(cfg),
        ExperimentKind::Sweep => sweep(cfg),
    }
}

/// Pushes a computed row, or records why it could not be computed.
fn record(t: &mut CsvTable, label: String, row: Result<Vec<f64>>) -> Result<()> {
    match row {
        Ok(r) => t.push(r),
        Err(e @ (Error::Io(_) | Error::Config(_) | Error::Parse { .. })) => Err(e),
        Err(e) => {
            t.skip(format!("{label}: {e}"));
            Ok(())
        }
    }
}

fn fig3a(k: &CurveParams) -> Result<CsvTable> {
    let mut t = CsvTable::new(["phi", "tau"]);
    t.comment(format!("decay rate from threshold; threshold={}, expected={}", k.threshold, k.expected));
    for &phi in k.phi.values() {
        let row = decay_rate_from_threshold(k.threshold, k.expected, phi).map(|tau| vec![phi, tau]);
        record(&mut t, format!("phi={phi}"), row)?;
    }
    Ok(t)
}

fn fig3b(k: &CurveParams) -> Result<CsvTable> {
    let rates = ArrivalRates::new(k.kappa_total - k.kappa_other, k.kappa_other)
        .map_err(|e| Error::config(e.to_string()))?;
    let mut t = CsvTable::new(["tau", "mean_gradient"]);
    t.comment(format!(
        "mean path gradient at the source; kappa_total={}, kappa_other={}, mean={}",
        k.kappa_total, k.kappa_other, k.mean
    ));
    for &tau in k.tau_endpoint.values() {
        let row = mean_path_gradient(&rates, tau, k.mean, Endpoint::Source).map(|e| vec![tau, e]);
        record(&mut t, format!("tau={tau}"), row)?;
    }
    Ok(t)
}

fn fig4(k: &CurveParams) -> Result<CsvTable> {
    let mut t = CsvTable::new(["series", "gamma", "x", "y"]);
    t.comment("series 0: response rho(nu), x=nu; series 1: peak mean gradient, x=mu");
    for &g in k.gammas.values() {
        for &nu in k.nu.values() {
            record(&mut t, format!("gamma={g} nu={nu}"), response(g, nu).map(|r| vec![0.0, g, nu, r]))?;
        }
    }
    for &g in k.gammas.values() {
        for &mu in k.mu.values() {
            let row = peak_mean_gradient(mu, g).map(|e| vec![1.0, g, mu, e]);
            record(&mut t, format!("gamma={g} mu={mu}"), row)?;
        }
    }
    Ok(t)
}

fn fig5(k: &CurveParams) -> Result<CsvTable> {
    let mut t = CsvTable::new(["kappa", "tau", "cutoff"]);
    t.comment(format!("cutoff observation rate at peak fraction {}", k.peak_fraction));
    for &kappa in k.kappas.values() {
        for &tau in k.tau_node.values() {
            let row = cutoff_rate(kappa, tau, k.peak_fraction).map(|c| vec![kappa, tau, c]);
            record(&mut t, format!("kappa={kappa} tau={tau}"), row)?;
        }
    }
    Ok(t)
}

fn fig6(k: &CurveParams) -> Result<CsvTable> {
    if !(k.weight_step > 0.0 && k.weight_step <= 1.0) {
        return Err(Error::config("weight step must lie in (0, 1]"));
    }
    let mut t = CsvTable::new(["theta", "c1", "c2", "probability"]);
    t.comment(format!(
        "probed candidate (theta, psi={}) against {} competitors at theta=1, psi=1",
        k.psi, k.competitors
    ));
    let steps = (1.0 / k.weight_step).round() as usize;
    for &theta in k.thetas.values() {
        for i in 0..=steps {
            for j in 0..=steps {
                let (c1, c2) = (i as f64 * k.weight_step, j as f64 * k.weight_step);
                let mut candidates = vec![(0usize, theta, k.psi)];
                candidates.extend((1..=k.competitors).map(|c| (c, 1.0, 1.0)));
                let row = thread_step_distribution(candidates, |_| false, c1, c2)
                    .map(|d| vec![theta, c1, c2, d.probabilities()[0]]);
                record(&mut t, format!("theta={theta} c1={c1} c2={c2}"), row)?;
            }
        }
    }
    Ok(t)
}

fn fig7(k: &CurveParams) -> Result<CsvTable> {
    let (lo, hi) = k.levels;
    if lo < 1 || lo > hi {
        return Err(Error::config(format!("invalid level range {lo}..{hi}")));
    }
    let mut t = CsvTable::new(["p_err", "level", "measurement"]);
    t.comment("correlation measurement between the final stations");
    for &p in k.p_err.values() {
        for level in lo..=hi {
            let row = correlation_measurement(p, level).map(|m| vec![p, level as f64, m]);
            record(&mut t, format!("p_err={p} level={level}"), row)?;
        }
    }
    Ok(t)
}

fn route(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let net = load_network(&cfg.network, cfg.seed)?;
    let (s, d) = endpoints(cfg, &net);
    let r = run_routing(&net, &s, &d, &cfg.routing, cfg.seed)?;
    let mut t = CsvTable::new([
        "path",
        "hops",
        "completions",
        "signal",
        "mean_source",
        "mean_destination",
        "gradient_source",
        "gradient_destination",
        "throughput",
        "winner",
    ]);
    t.comment(format!(
        "route {s} -> {d}; seed={}; visits={} of budget {}; rounds={}",
        cfg.seed, r.total_visits, r.visit_budget, r.rounds
    ));
    for (i, p) in r.paths.iter().enumerate() {
        let nodes: Vec<String> = p.path.node_ids(&net).iter().map(|n| n.to_string()).collect();
        t.comment(format!("path {i}: {}", nodes.join(" ")));
    }
    for (i, p) in r.paths.iter().enumerate() {
        t.push(vec![
            i as f64,
            p.path.hops() as f64,
            p.completions as f64,
            p.signal,
            p.mean_source,
            p.mean_destination,
            p.gradient_source,
            p.gradient_destination,
            p.throughput,
            if r.winner == Some(i) { 1.0 } else { 0.0 },
        ])?;
    }
    Ok(t)
}

fn sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let mut t = CsvTable::new([
        "seed",
        "nodes",
        "links",
        "paths",
        "winner_hops",
        "baseline_hops",
        "overlap",
        "gradient_score",
        "baseline_score",
        "visits",
        "budget",
    ]);
    t.comment("winner_hops, baseline_hops, overlap and scores are -1 when undefined");
    for run in 0..cfg.runs {
        let seed = cfg.seed.wrapping_add(run as u64);
        let net = load_network(&cfg.network, seed)?;
        let (s, d) = endpoints(cfg, &net);
        let c = compare_routes(&net, &s, &d, &cfg.routing, seed, cfg.baseline)?;
        let found = run_routing(&net, &s, &d, &cfg.routing, seed)?.paths.len();
        let hops = |p: &Option<crate::network::EntangledPath>| p.as_ref().map_or(-1.0, |p| p.hops() as f64);
        t.push(vec![
            seed as f64,
            net.node_count() as f64,
            net.link_count() as f64,
            found as f64,
            hops(&c.gradient_path),
            hops(&baseline_shortest_path(&net, &s, &d, cfg.baseline)?),
            c.overlap.unwrap_or(-1.0),
            c.gradient_score.unwrap_or(-1.0),
            c.baseline_score.unwrap_or(-1.0),
            c.total_visits as f64,
            c.visit_budget as f64,
        ])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> CsvTable {
        run_experiment(&ExperimentConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn fig3a_closed_form() {
        let t = run("experiment = fig3a\nphi = 1, 10, 100\n");
        let tau = t.column("tau").unwrap();
        for (got, want) in tau.iter().zip([2f64.ln(), 20f64.ln(), 200f64.ln()]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fig7_error_free_row() {
        let t = run("experiment = fig7\np_err = 0\nlevels = 5 5\n");
        assert_eq!(t.rows(), &[vec![0.0, 5.0, 1.0]]);
    }

    #[test]
    fn fig4_peak_row() {
        let t = run("experiment = fig4\ngammas = 0.5\nnu = 0\nmu = 1\n");
        assert_eq!(t.rows()[0], vec![0.0, 0.5, 0.0, 2.0]);
    }

    #[test]
    fn fig5_records_invalid_rows() {
        let t = run("experiment = fig5\nkappas = 1\ntau_node = 0.5, 100\n");
        assert_eq!(t.rows().len(), 1);
        assert_eq!(t.skipped().len(), 1);
        assert!(t.to_csv().contains("# skipped: kappa=1 tau=100"));
    }

    #[test]
    fn fig6_surface_varies() {
        let t = run("experiment = fig6\nthetas = 0.5\n");
        assert_eq!(t.rows().len(), 121);
        let p = t.column("probability").unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12);
        let max = p.iter().cloned().fold(0.0, f64::max);
        let min = p.iter().cloned().fold(1.0, f64::min);
        assert!(max > min + 0.1);
    }

    #[test]
    fn route_and_sweep_are_reproducible() {
        let text = "experiment = route\nnodes = 6\nlinks = 8\nseed = 3\nthreads = 16\nthread_limit = 6\n";
        assert_eq!(run(text), run(text));
        let sweep = "experiment = sweep\nnodes = 5\nlinks = 6\nruns = 3\nthreads = 8\n";
        let t = run(sweep);
        assert_eq!(t.rows().len(), 3);
        assert_eq!(t, run(sweep));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(ExperimentConfig::parse("seed = 1\n"), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse("experiment = fig9\n").is_err());
        assert!(matches!(
            ExperimentConfig::parse("experiment = fig3a\nbogus = 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let cfg = ExperimentConfig::parse("experiment = fig6\nweight_step = 0\n").unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn routing_keys_map_to_params() {
        let cfg = ExperimentConfig::parse(
            "experiment = route\nthreads = 9\nchi = 2\npartial = 0.5\nxi = 1\npsi_form = direct\n\
             expected_throughput = 12\nmean_estimator = delivered\n",
        )
        .unwrap();
        assert_eq!(cfg.routing.threads, 9);
        assert_eq!(cfg.routing.selection.exponent, 2.0);
        assert_eq!(cfg.routing.selection.threshold, 0.5);
        assert_eq!(cfg.routing.selection.source_weight, 1.0);
        assert_eq!(cfg.routing.psi_form, crate::router::PsiForm::Direct);
        assert_eq!(cfg.routing.expected_throughput, ExpectedThroughput::Constant(12.0));
        assert_eq!(cfg.routing.mean_estimator, MeanEstimator::Delivered);
    }
}
