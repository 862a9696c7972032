//! Decentralized multi-thread routing over link entanglement gradients.
//!
//! `t` search threads start at the source and walk the network in
//! barrier-synchronized rounds. In each round every active thread reads the
//! shared gradient state, builds its next-hop distribution from inverse
//! gradients `θ` and distances `ψ`, and samples a move from its own RNG
//! stream. At the barrier the moves are applied in thread-id order: the
//! traversed link's utility shrinks and the receiving node reinforces its
//! toward-source gradient. A thread that reaches the destination sweeps
//! back along its trace, reinforcing toward-destination gradients.
//!
//! When every thread has halted, the distinct completed source→destination
//! paths are scored by the endpoint path-gradient recursion and the
//! maximal-gradient path wins.

mod signals;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gradient::{
    self, link_selection_probability, node_deviations, normalized_selection_distribution,
    source_selection_probability, Direction, GradientTable, SelectionParams,
};
use crate::network::{EntangledPath, LinkId, NodeId, NodeIdx, QuantumNetwork};
use crate::path::{
    self, iterate_endpoint_gradients, mean_path_gradient, replay_path, ArrivalRates, Endpoint,
    PathGradientState,
};

pub use signals::{
    distance, distance_with, inverse_gradient, mean_path_signal, path_signal, select_weights,
    thread_step_distribution, PsiForm,
};

/// How the received-gradient means `μ` of a completed path are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanEstimator {
    /// Replay one traversal of the path from a fresh state, so the means are
    /// a function of the network and the path alone.
    #[default]
    Replay,
    /// Average the gradients actually deposited by the threads that
    /// completed the path during the run.
    Delivered,
}

/// Expected path throughput `B̃_F` against which path deviation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ExpectedThroughput {
    Constant(f64),
    /// Mean bottleneck throughput over the scored paths.
    #[default]
    RunningMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingParams {
    /// Number of search threads `t`.
    pub threads: usize,
    /// Maximal number of nodes a thread may visit, `ℓ_T`.
    pub thread_limit: usize,
    /// Link-gradient decay rate.
    pub tau: f64,
    pub selection: SelectionParams,
    /// Fixed `(C1, C2)`, used only when `adaptive_weights` is off.
    pub c1: f64,
    pub c2: f64,
    /// Re-pick `(C1, C2)` every step from the thread's path signal.
    pub adaptive_weights: bool,
    /// Log-ratio gate `ϑ` of the path signal.
    pub theta_threshold: f64,
    /// Explore/exploit switch point `o` on the mean path signal.
    pub signal_threshold: f64,
    pub psi_form: PsiForm,
    /// Floor applied to `ψ` so that equal means keep a candidate admissible.
    pub psi_min: f64,
    pub initial_gradient: f64,
    pub halt_on_target: bool,
    /// Physical worker threads; never changes the result.
    pub workers: usize,
    /// Rounds of the endpoint recursion used to score completed paths.
    pub score_iterations: usize,
    pub mean_estimator: MeanEstimator,
    pub expected_throughput: ExpectedThroughput,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            threads: 64,
            thread_limit: 16,
            tau: 1.0,
            selection: SelectionParams::default(),
            c1: 1.0,
            c2: 0.0,
            adaptive_weights: true,
            theta_threshold: 0.0,
            signal_threshold: 0.0,
            psi_form: PsiForm::Inverse,
            psi_min: 1e-9,
            initial_gradient: 0.0,
            halt_on_target: true,
            workers: 1,
            score_iterations: 8,
            mean_estimator: MeanEstimator::Replay,
            expected_throughput: ExpectedThroughput::RunningMean,
        }
    }
}

impl RoutingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(msg));
        if self.threads < 1 {
            return bad("at least one thread is required".into());
        }
        if self.thread_limit < 1 {
            return bad("thread limit must be >= 1".into());
        }
        if self.workers < 1 {
            return bad("at least one worker is required".into());
        }
        for (name, v) in [
            ("tau", self.tau),
            ("c1", self.c1),
            ("c2", self.c2),
            ("theta threshold", self.theta_threshold),
            ("initial gradient", self.initial_gradient),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.signal_threshold.is_finite() {
            return bad("signal threshold must be finite".into());
        }
        if !(self.psi_min > 0.0) || !self.psi_min.is_finite() {
            return bad(format!("psi floor must be finite and > 0, got {}", self.psi_min));
        }
        if let ExpectedThroughput::Constant(c) = self.expected_throughput {
            if !(c >= 0.0) || !c.is_finite() {
                return bad(format!("expected throughput must be finite and >= 0, got {c}"));
            }
        }
        self.selection
            .validate()
            .map_err(|e| Error::config(e.to_string()))
    }

    /// Upper bound on node visits of a run: `|N|·t·ℓ_T`.
    pub fn visit_budget(&self, node_count: usize) -> usize {
        node_count
            .saturating_mul(self.threads)
            .saturating_mul(self.thread_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreadStatus {
    Active,
    ReachedTarget,
    /// Visited `ℓ_T` nodes without reaching the destination.
    Exhausted,
    /// No admissible next hop.
    Stuck,
}

#[derive(Debug, Clone)]
struct ThreadState {
    id: usize,
    visited: Vec<bool>,
    visit_count: usize,
    nodes: Vec<NodeIdx>,
    links: Vec<LinkId>,
    deposits: Vec<f64>,
    status: ThreadStatus,
    rng: ChaCha8Rng,
}

impl ThreadState {
    fn new(id: usize, source: NodeIdx, node_count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id as u64);
        let mut visited = vec![false; node_count];
        visited[source.0] = true;
        ThreadState {
            id,
            visited,
            visit_count: 1,
            nodes: vec![source],
            links: Vec::new(),
            deposits: Vec::new(),
            status: ThreadStatus::Active,
            rng,
        }
    }

    fn current(&self) -> NodeIdx {
        *self.nodes.last().expect("a trace starts at the source")
    }

    /// Path signal over this thread's own deposits; zero until two positive
    /// deposits exist.
    fn signal(&self, threshold: f64) -> f64 {
        if self.deposits.len() < 2 || self.deposits.iter().any(|&g| !(g > 0.0)) {
            return 0.0;
        }
        path_signal(&self.deposits, threshold).unwrap_or(0.0)
    }
}

/// One thread's trace after the run.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreadTrace {
    pub thread: usize,
    pub status: ThreadStatus,
    pub nodes: Vec<NodeIdx>,
    pub links: Vec<LinkId>,
    /// Final path signal of the thread.
    pub signal: f64,
}

/// Score and statistics of one distinct completed path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub path: EntangledPath,
    /// Threads that completed this path.
    pub completions: usize,
    /// Mean final path signal of those threads.
    pub signal: f64,
    pub mean_source: f64,
    pub mean_destination: f64,
    pub gradient_source: f64,
    pub gradient_destination: f64,
    /// Bottleneck throughput.
    pub throughput: f64,
    pub expected_throughput: f64,
    /// Decay rate implied by the selection threshold, when defined.
    pub decay_rate: Option<f64>,
}

impl PathSummary {
    pub fn throughput_deviation(&self) -> f64 {
        (self.expected_throughput - self.throughput).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteResult {
    /// Index into `paths` of the maximal-gradient path.
    pub winner: Option<usize>,
    /// Distinct completed paths, ordered by node then link sequence.
    pub paths: Vec<PathSummary>,
    pub threads: Vec<ThreadTrace>,
    pub total_visits: usize,
    pub visit_budget: usize,
    pub rounds: usize,
}

impl RouteResult {
    pub fn winning_path(&self) -> Option<&EntangledPath> {
        self.winner.map(|w| &self.paths[w].path)
    }

    pub fn winning_ids<'a>(&self, net: &'a QuantumNetwork) -> Option<Vec<&'a NodeId>> {
        self.winning_path().map(|p| p.node_ids(net))
    }
}

/// Shared per-run state: link utilities and node gradient tables.
struct Shared {
    utilities: Vec<f64>,
    tables: Vec<GradientTable>,
}

struct Engine<'a> {
    net: &'a QuantumNetwork,
    params: &'a RoutingParams,
    source: NodeIdx,
    target: NodeIdx,
    deviations: Vec<BTreeMap<LinkId, f64>>,
}

fn check_routable(net: &QuantumNetwork) -> Result<()> {
    for node in net.nodes() {
        if !(node.observation_rate > 0.0) || !(node.decay_rate > 0.0) {
            return Err(Error::config(format!(
                "node `{}` needs positive observation and decay rates for routing",
                node.id
            )));
        }
    }
    Ok(())
}

fn resolve(net: &QuantumNetwork, id: &NodeId) -> Result<NodeIdx> {
    net.index_of(id)
        .ok_or_else(|| Error::config(format!("unknown node `{id}`")))
}

impl<'a> Engine<'a> {
    fn new(
        net: &'a QuantumNetwork,
        source: &NodeId,
        target: &NodeId,
        params: &'a RoutingParams,
    ) -> Result<Self> {
        params.validate()?;
        check_routable(net)?;
        let (source, target) = (resolve(net, source)?, resolve(net, target)?);
        if source == target {
            return Err(Error::config("source and destination must differ"));
        }
        let deviations = (0..net.node_count())
            .map(|i| node_deviations(net, NodeIdx(i)))
            .collect::<Result<_>>()?;
        Ok(Engine {
            net,
            params,
            source,
            target,
            deviations,
        })
    }

    fn fresh_state(&self) -> Result<Shared> {
        Ok(Shared {
            utilities: self.net.links().iter().map(|l| l.utility).collect(),
            tables: (0..self.net.node_count())
                .map(|i| GradientTable::for_node(self.net, NodeIdx(i), self.params.initial_gradient))
                .collect::<Result<_>>()?,
        })
    }

    fn decay(&self, node: NodeIdx, link: LinkId) -> f64 {
        (-self.params.tau * self.deviations[node.0][&link]).exp()
    }

    /// Mean toward-source gradient held at `node`.
    fn received_mean(&self, shared: &Shared, node: NodeIdx) -> f64 {
        let values = shared.tables[node.0].values(self.source, Direction::TowardSource);
        if values.is_empty() {
            return 0.0;
        }
        values.iter().map(|(_, g)| g).sum::<f64>() / values.len() as f64
    }

    /// Forwarding probability of each incident link of `node`. At the source,
    /// or with zero source weight, this is the power rule over
    /// toward-destination gradients; elsewhere the forward probabilities
    /// (over links other than the arrival link) are paired with the
    /// source-side probability of the arrival link.
    fn link_probabilities(
        &self,
        shared: &Shared,
        node: NodeIdx,
        arrival: Option<LinkId>,
    ) -> Result<BTreeMap<LinkId, f64>> {
        let table = &shared.tables[node.0];
        let sel = &self.params.selection;
        let forward = table.values(self.target, Direction::TowardDestination);
        let arrival = match arrival {
            Some(x) if sel.source_weight > 0.0 => x,
            _ => {
                return Ok(link_selection_probability(forward, sel)?
                    .iter()
                    .map(|(l, p)| (*l, p))
                    .collect());
            }
        };
        let onward: Vec<(LinkId, f64)> = forward.into_iter().filter(|(l, _)| *l != arrival).collect();
        if onward.is_empty() {
            return Ok(BTreeMap::new());
        }
        let forward_dist = link_selection_probability(onward, sel)?;
        let backward = table.values(self.source, Direction::TowardSource);
        let mut paired = Vec::with_capacity(forward_dist.len());
        for (&z, pf) in forward_dist.iter() {
            let others: Vec<(LinkId, f64)> = backward.iter().copied().filter(|(l, _)| *l != z).collect();
            let pb = source_selection_probability(others, sel)?
                .probability(&arrival)
                .expect("arrival link is among the source-side candidates");
            paired.push((z, pf, pb));
        }
        Ok(normalized_selection_distribution(paired, sel.source_weight)?
            .iter()
            .map(|(l, p)| (*l, p))
            .collect())
    }

    /// Picks the next link for one thread from a read-only view of the
    /// shared state. `None` means the thread is stuck.
    fn propose(&self, shared: &Shared, th: &mut ThreadState) -> Result<Option<LinkId>> {
        let u: f64 = th.rng.gen();
        let p = self.params;
        let n = th.current();
        let (c1, c2) = if p.adaptive_weights {
            select_weights(mean_path_signal(&[th.signal(p.theta_threshold)])?, p.signal_threshold)
        } else {
            (p.c1, p.c2)
        };
        let arrival = th.links.last().copied();
        let probabilities = if c2 != 0.0 {
            match self.link_probabilities(shared, n, arrival) {
                Ok(m) => Some(m),
                Err(Error::Degenerate(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let mean_here = self.received_mean(shared, n);
        let kappa_n = self.net.node(n).observation_rate;

        let mut candidates = Vec::new();
        for &e in self.net.incident(n) {
            let z = self.net.neighbor(n, e);
            if th.visited[z.0] {
                candidates.push(((e, z), 0.0, 0.0));
                continue;
            }
            let link = self.net.link(e);
            let stored = shared.tables[z.0]
                .get(self.source, e, Direction::TowardSource)
                .expect("link is incident to its endpoint");
            let lambda = gradient::update_utility(shared.utilities[e.0], link.throughput)?;
            let Ok(theta) = inverse_gradient(stored * self.decay(z, e) + lambda) else {
                continue;
            };
            let psi = match &probabilities {
                None => 1.0,
                Some(prs) => {
                    let Some(&pr) = prs.get(&e) else { continue };
                    let rates = ArrivalRates::new(kappa_n, self.net.node(z).observation_rate)?;
                    let e_here =
                        mean_path_gradient(&rates, self.net.node(n).decay_rate, mean_here, Endpoint::Source)?;
                    let e_there = mean_path_gradient(
                        &rates,
                        self.net.node(z).decay_rate,
                        self.received_mean(shared, z),
                        Endpoint::Destination,
                    )?;
                    match distance_with(p.psi_form, pr, e_here, e_there) {
                        Ok(psi) => psi.max(p.psi_min),
                        Err(Error::Singularity(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
            };
            candidates.push(((e, z), theta, psi));
        }
        if candidates.iter().all(|((_, z), _, _)| th.visited[z.0]) {
            return Ok(None);
        }
        match thread_step_distribution(candidates, |(_, z)| th.visited[z.0], c1, c2) {
            Ok(dist) => Ok(Some(dist.sample(u).0)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Applies one move at the barrier. Returns the completed trace, with the
    /// gradients deposited on the way back, if the move reached the target.
    fn apply(&self, shared: &mut Shared, th: &mut ThreadState, link: LinkId) -> Result<Option<Completion>> {
        let p = self.params;
        let n = th.current();
        let z = self.net.neighbor(n, link);
        let lambda = gradient::update_utility(shared.utilities[link.0], self.net.link(link).throughput)?;
        shared.utilities[link.0] = lambda;
        let reinforced = shared.tables[z.0].update_gradients(
            self.source,
            Direction::TowardSource,
            link,
            p.tau,
            &self.deviations[z.0],
            lambda,
        )?;
        th.deposits.push(reinforced);
        th.nodes.push(z);
        th.links.push(link);
        th.visited[z.0] = true;
        th.visit_count += 1;

        let mut completion = None;
        if z == self.target {
            let mut backward = Vec::with_capacity(th.links.len());
            for h in (0..th.links.len()).rev() {
                let (node, l) = (th.nodes[h], th.links[h]);
                backward.push(shared.tables[node.0].update_gradients(
                    self.target,
                    Direction::TowardDestination,
                    l,
                    p.tau,
                    &self.deviations[node.0],
                    shared.utilities[l.0],
                )?);
            }
            backward.reverse();
            completion = Some(Completion {
                path: EntangledPath {
                    nodes: th.nodes.clone(),
                    links: th.links.clone(),
                },
                forward: th.deposits.clone(),
                backward,
                thread: th.id,
            });
            if p.halt_on_target {
                th.status = ThreadStatus::ReachedTarget;
            }
        }
        if th.status == ThreadStatus::Active && th.visit_count >= p.thread_limit {
            th.status = ThreadStatus::Exhausted;
        }
        Ok(completion)
    }

    fn run(&self, seed: u64) -> Result<RouteResult> {
        let p = self.params;
        let mut shared = self.fresh_state()?;
        let mut threads: Vec<ThreadState> = (0..p.threads)
            .map(|i| ThreadState::new(i, self.source, self.net.node_count(), seed))
            .collect();
        if p.thread_limit == 1 {
            for th in &mut threads {
                th.status = ThreadStatus::Exhausted;
            }
        }
        let pool = if p.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(p.workers)
                    .build()
                    .map_err(|e| Error::config(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };

        let mut completions = Vec::new();
        let mut rounds = 0;
        while threads.iter().any(|t| t.status == ThreadStatus::Active) {
            rounds += 1;
            let view = &shared;
            let step = |th: &mut ThreadState| -> Result<Option<Option<LinkId>>> {
                if th.status != ThreadStatus::Active {
                    return Ok(None);
                }
                self.propose(view, th).map(Some)
            };
            let moves: Vec<Option<Option<LinkId>>> = match &pool {
                Some(pool) => pool.install(|| threads.par_iter_mut().map(step).collect::<Result<_>>())?,
                None => threads.iter_mut().map(step).collect::<Result<_>>()?,
            };
            for (th, mv) in threads.iter_mut().zip(moves) {
                match mv {
                    None => {}
                    Some(None) => th.status = ThreadStatus::Stuck,
                    Some(Some(link)) => {
                        if let Some(c) = self.apply(&mut shared, th, link)? {
                            completions.push(c);
                        }
                    }
                }
            }
        }

        let traces: Vec<ThreadTrace> = threads
            .iter()
            .map(|t| ThreadTrace {
                thread: t.id,
                status: t.status,
                nodes: t.nodes.clone(),
                links: t.links.clone(),
                signal: t.signal(p.theta_threshold),
            })
            .collect();
        let total_visits = threads.iter().map(|t| t.visit_count).sum();
        let visit_budget = p.visit_budget(self.net.node_count());
        debug_assert!(total_visits <= visit_budget);

        let (paths, winner) = self.summarize(&completions, &traces)?;
        Ok(RouteResult {
            winner,
            paths,
            threads: traces,
            total_visits,
            visit_budget,
            rounds,
        })
    }

    fn summarize(
        &self,
        completions: &[Completion],
        traces: &[ThreadTrace],
    ) -> Result<(Vec<PathSummary>, Option<usize>)> {
        let mut grouped: BTreeMap<&EntangledPath, Vec<&Completion>> = BTreeMap::new();
        for c in completions {
            grouped.entry(&c.path).or_default().push(c);
        }
        if grouped.is_empty() {
            return Ok((Vec::new(), None));
        }
        let paths: Vec<EntangledPath> = grouped.keys().map(|p| (*p).clone()).collect();
        let delivered: Option<Vec<(f64, f64)>> = match self.params.mean_estimator {
            MeanEstimator::Replay => None,
            MeanEstimator::Delivered => Some(
                grouped
                    .values()
                    .map(|cs| {
                        let back: Vec<f64> = cs.iter().flat_map(|c| c.backward.iter().copied()).collect();
                        let fwd: Vec<f64> = cs.iter().flat_map(|c| c.forward.iter().copied()).collect();
                        (mean(&back), mean(&fwd))
                    })
                    .collect(),
            ),
        };
        let states = self.score(&paths, delivered.as_deref())?;
        let winner = path::select_optimal_path(
            &states.iter().map(|s| s.gradient_source).collect::<Vec<_>>(),
        )?;
        let summaries = paths
            .into_iter()
            .zip(states)
            .zip(grouped.values())
            .map(|((path, s), cs)| {
                let signals: Vec<f64> = cs.iter().map(|c| traces[c.thread].signal).collect();
                let deviation = s.throughput_deviation();
                PathSummary {
                    decay_rate: path::decay_rate_from_threshold(
                        self.params.selection.threshold,
                        s.gradient_source,
                        deviation,
                    )
                    .ok(),
                    path,
                    completions: cs.len(),
                    signal: mean(&signals),
                    mean_source: s.mean_source,
                    mean_destination: s.mean_destination,
                    gradient_source: s.gradient_source,
                    gradient_destination: s.gradient_destination,
                    throughput: s.throughput,
                    expected_throughput: s.expected_throughput,
                }
            })
            .collect();
        Ok((summaries, Some(winner)))
    }

    /// Endpoint path gradients of `paths` after the configured number of
    /// recursion rounds. `delivered` overrides the replayed means.
    fn score(&self, paths: &[EntangledPath], delivered: Option<&[(f64, f64)]>) -> Result<Vec<PathGradientState>> {
        let p = self.params;
        let (a, b) = (self.net.node(self.source), self.net.node(self.target));
        let rates = ArrivalRates::new(a.observation_rate, b.observation_rate)?;
        let mut states = Vec::with_capacity(paths.len());
        for (i, path) in paths.iter().enumerate() {
            let (mean_source, mean_destination) = match delivered {
                Some(d) => d[i],
                None => {
                    let r = replay_path(self.net, path, p.tau, p.initial_gradient)?;
                    (r.mean_source(), r.mean_destination())
                }
            };
            let mut s = PathGradientState::new(i, p.initial_gradient, mean_source, mean_destination);
            s.throughput = path.bottleneck_throughput(self.net);
            states.push(s);
        }
        let expected = match p.expected_throughput {
            ExpectedThroughput::Constant(c) => c,
            ExpectedThroughput::RunningMean => mean(&states.iter().map(|s| s.throughput).collect::<Vec<_>>()),
        };
        for s in &mut states {
            s.expected_throughput = expected;
        }
        iterate_endpoint_gradients(
            &states,
            &rates,
            a.decay_rate,
            b.decay_rate,
            &p.selection,
            p.score_iterations,
        )
    }
}

#[derive(Debug, Clone)]
struct Completion {
    path: EntangledPath,
    forward: Vec<f64>,
    backward: Vec<f64>,
    thread: usize,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Runs the multi-thread search from `source` to `target`. Deterministic in
/// `(net, params, seed)` for any worker count.
pub fn run_routing(
    net: &QuantumNetwork,
    source: &NodeId,
    target: &NodeId,
    params: &RoutingParams,
    seed: u64,
) -> Result<RouteResult> {
    Engine::new(net, source, target, params)?.run(seed)
}

/// Endpoint path gradients of an arbitrary set of simple source→target
/// paths, scored exactly as the router scores its completed paths.
pub fn score_paths(
    net: &QuantumNetwork,
    source: &NodeId,
    target: &NodeId,
    paths: &[EntangledPath],
    params: &RoutingParams,
) -> Result<Vec<PathGradientState>> {
    let params = RoutingParams {
        mean_estimator: MeanEstimator::Replay,
        ..params.clone()
    };
    let engine = Engine::new(net, source, target, &params)?;
    if paths.is_empty() {
        return Err(Error::domain("no paths to score"));
    }
    for p in paths {
        if p.nodes.first() != Some(&engine.source) || p.nodes.last() != Some(&engine.target) {
            return Err(Error::domain("scored paths must run from source to destination"));
        }
    }
    engine.score(paths, None)
}
