// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Experiment configs and the sweep runner.
//!
//! A config names one benchmark family, the sizes to run it at, the routers
//! to compare, and optionally a two-chip distribution sweep. The runner
//! produces one metric row per (size, router or link strategy, seed) and
//! re-validates coupling conformance before recording anything. Infeasible
//! combinations become error records; the sweep continues.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::{qaoa, qft, GraphFamily, ProblemGraph};
use crate::circuit::{Circuit, GateAccounting};
use crate::dqc::{distribute, TeleportMode};
use crate::error::{Error, Result};
use crate::metrics::{MetricsRow, RowError};
use crate::route::{
    check_conformance, fits_exact, place, route_exact, route_greedy, route_sabre,
    route_swap_network, CompiledCircuit, RouteStrategy, RouterConfig,
};
use crate::topology::{heavy_hex, link_chips, to_lnn, LinkKind};

/// Which benchmark family a sweep compiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    Qft,
    Qaoa {
        family: GraphFamily,
        #[serde(default = "one")]
        layers: usize,
        #[serde(default)]
        graph_seed: u64,
    },
}

fn one() -> usize {
    1
}

impl BenchmarkSpec {
    /// Stable row label.
    pub fn name(&self) -> String {
        match self {
            BenchmarkSpec::Qft => "qft".into(),
            BenchmarkSpec::Qaoa { family, .. } => format!("qaoa_{}", family.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouterChoice {
    Linear,
    Sabre,
}

/// Two-chip sweep settings. Explicit `seeds` win; otherwise seeds
/// 0..repetitions are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    #[serde(default = "default_mode")]
    pub mode: TeleportMode,
    #[serde(default = "both_kinds")]
    pub strategies: Vec<LinkKind>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
}

fn default_mode() -> TeleportMode {
    TeleportMode::Auto
}

fn both_kinds() -> Vec<LinkKind> {
    vec![LinkKind::DanglingLink, LinkKind::RandomLink]
}

impl DistributionConfig {
    pub fn effective_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.repetitions as u64).collect()
        } else {
            self.seeds.clone()
        }
    }
}

/// One sweep, parsed from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    pub qubit_sizes: Vec<usize>,
    #[serde(default = "both_routers")]
    pub routers: Vec<RouterChoice>,
    #[serde(default)]
    pub distribution: Option<DistributionConfig>,
    #[serde(default = "default_accounting")]
    pub accounting: GateAccounting,
    /// Lattice distance per size; sizes absent here get the smallest odd d
    /// whose backbone holds them.
    #[serde(default)]
    pub heavy_hex_d: BTreeMap<usize, usize>,
    /// Base seed for benchmark generation and the sabre baseline.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sabre: Option<RouterConfig>,
    /// Report directory; the CLI writes files here, the library ignores it.
    #[serde(default)]
    pub output: Option<String>,
}

fn both_routers() -> Vec<RouterChoice> {
    vec![RouterChoice::Linear, RouterChoice::Sabre]
}

fn default_accounting() -> GateAccounting {
    GateAccounting::SwapAsOne
}

/// Backbone length of the line reduction of a distance-d lattice.
pub fn backbone_len(d: usize) -> usize {
    d * (2 * d - 1) + d - 1
}

/// Smallest odd lattice distance whose reduced backbone holds n qubits.
pub fn choose_d(n: usize) -> usize {
    let mut d = 3;
    while backbone_len(d) < n {
        d += 2;
    }
    d
}

/// Parse and validate a config.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubit_sizes.is_empty() {
            return Err(Error::Config("qubit_sizes is empty".into()));
        }
        if self.qubit_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Config("qubit sizes must be positive".into()));
        }
        if self.routers.is_empty() && self.distribution.is_none() {
            return Err(Error::Config("nothing to run: no routers, no distribution".into()));
        }
        for (&n, &d) in &self.heavy_hex_d {
            if d < 3 || d % 2 == 0 {
                return Err(Error::Config(format!(
                    "heavy_hex_d[{n}] = {d}: distance must be odd and at least 3"
                )));
            }
        }
        if let BenchmarkSpec::Qaoa { family, layers, .. } = &self.benchmark {
            if *layers == 0 {
                return Err(Error::Config("qaoa layers must be positive".into()));
            }
            match family {
                GraphFamily::ErdosRenyi(p) if !(0.0..=1.0).contains(p) => {
                    return Err(Error::Config(format!(
                        "edge probability {p} outside [0, 1]"
                    )));
                }
                GraphFamily::Custom => {
                    return Err(Error::Config(
                        "custom graphs need an explicit edge list; use the compile path".into(),
                    ));
                }
                _ => {}
            }
        }
        if let Some(dist) = &self.distribution {
            if dist.strategies.is_empty() {
                return Err(Error::Config("distribution.strategies is empty".into()));
            }
            if dist.seeds.is_empty() && dist.repetitions == 0 {
                return Err(Error::Config(
                    "distribution needs explicit seeds or repetitions >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    fn lattice_distance(&self, n: usize) -> usize {
        self.heavy_hex_d.get(&n).copied().unwrap_or_else(|| choose_d(n))
    }

    fn build_benchmark(&self, n: usize) -> Result<Circuit> {
        match &self.benchmark {
            BenchmarkSpec::Qft => qft(n),
            BenchmarkSpec::Qaoa { family, layers, graph_seed } => {
                let graph = match family {
                    GraphFamily::Ring => ProblemGraph::ring(n)?,
                    GraphFamily::ThreeRegular => ProblemGraph::three_regular(n, *graph_seed)?,
                    GraphFamily::ErdosRenyi(p) => ProblemGraph::erdos_renyi(n, *p, *graph_seed)?,
                    GraphFamily::Custom => {
                        return Err(Error::Config("custom graphs cannot be generated".into()))
                    }
                };
                qaoa(&graph, *layers, self.seed)
            }
        }
    }

    /// Line strategy used when the config says `linear`. Toy instances get
    /// the certified minimum-swap search. Above that, the comparator
    /// network serves all-pairs work in one fixed sweep, so it wins on qft
    /// and on dense interaction graphs; sparse graphs route cheaper by
    /// walking operands only where gates actually are.
    pub fn linear_strategy(&self, circuit: &Circuit) -> RouteStrategy {
        if fits_exact(circuit) {
            return RouteStrategy::Exact;
        }
        match self.benchmark {
            BenchmarkSpec::Qft => RouteStrategy::SwapNetwork,
            BenchmarkSpec::Qaoa { .. } => {
                let mut pairs: Vec<(usize, usize)> = circuit
                    .gates
                    .iter()
                    .filter(|g| g.is_two_qubit())
                    .map(|g| (g.q0().min(g.q1()), g.q0().max(g.q1())))
                    .collect();
                pairs.sort_unstable();
                pairs.dedup();
                if pairs.len() >= 2 * circuit.num_qubits {
                    RouteStrategy::SwapNetwork
                } else {
                    RouteStrategy::Greedy
                }
            }
        }
    }

    fn sabre_config(&self) -> RouterConfig {
        self.sabre.clone().unwrap_or(RouterConfig { seed: self.seed, ..RouterConfig::default() })
    }
}

/// Everything a sweep produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub rows: Vec<MetricsRow>,
    pub errors: Vec<RowError>,
}

struct Recorder {
    rows: Vec<MetricsRow>,
    errors: Vec<RowError>,
    accounting: GateAccounting,
}

impl Recorder {
    fn record(
        &mut self,
        benchmark: &str,
        n: usize,
        router: &str,
        strategy: &str,
        seed: u64,
        outcome: Result<(Circuit, usize, usize, usize)>,
        started: Instant,
    ) {
        match outcome {
            Ok((circuit, swaps, cross, ebits)) => self.rows.push(MetricsRow {
                benchmark: benchmark.to_string(),
                n,
                router: router.to_string(),
                strategy: strategy.to_string(),
                seed,
                gate_count: circuit.gate_count(self.accounting),
                depth: circuit.depth(),
                swap_count: swaps,
                cross_group_swaps: cross,
                ebits,
                accounting: self.accounting,
                wall_time_ms: started.elapsed().as_millis() as u64,
            }),
            Err(e) => self.errors.push(RowError {
                benchmark: benchmark.to_string(),
                n,
                router: router.to_string(),
                strategy: strategy.to_string(),
                seed,
                message: e.to_string(),
            }),
        }
    }
}

/// Run every combination the config names, in config order. Rows are
/// deterministic for a fixed config; only wall_time_ms varies.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let bench_name = cfg.benchmark.name();
    let mut rec =
        Recorder { rows: Vec::new(), errors: Vec::new(), accounting: cfg.accounting };

    for &n in &cfg.qubit_sizes {
        let circuit = match cfg.build_benchmark(n) {
            Ok(c) => c,
            Err(e) => {
                // The benchmark itself is infeasible at this size; one error
                // record covers every router.
                rec.errors.push(RowError {
                    benchmark: bench_name.clone(),
                    n,
                    router: String::new(),
                    strategy: String::new(),
                    seed: cfg.seed,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let d = cfg.lattice_distance(n);
        let lattice = heavy_hex(d)?;
        let chip = to_lnn(&lattice)?;

        for router in &cfg.routers {
            match router {
                RouterChoice::Linear => {
                    let strategy = cfg.linear_strategy(&circuit);
                    let started = Instant::now();
                    let outcome = place(&circuit, &chip)
                        .and_then(|layout| match strategy {
                            RouteStrategy::SwapNetwork => {
                                route_swap_network(&circuit, &chip, &layout)
                            }
                            RouteStrategy::Exact => route_exact(&circuit, &chip, &layout),
                            _ => route_greedy(&circuit, &chip, &layout),
                        })
                        .and_then(|compiled| {
                            let graph = chip.derived_graph();
                            conformant(compiled, |u, v| graph.has_edge(u, v))
                        })
                        .map(|c| (c.circuit, c.swap_count, 0, 0));
                    rec.record(
                        &bench_name,
                        n,
                        "linear",
                        strategy.as_str(),
                        cfg.seed,
                        outcome,
                        started,
                    );
                }
                RouterChoice::Sabre => {
                    let sabre_cfg = cfg.sabre_config();
                    let started = Instant::now();
                    let outcome = route_sabre(&circuit, &lattice, &sabre_cfg)
                        .and_then(|compiled| {
                            conformant(compiled, |u, v| lattice.has_edge(u, v))
                        })
                        .map(|c| (c.circuit, c.swap_count, 0, 0));
                    rec.record(
                        &bench_name,
                        n,
                        "sabre",
                        "sabre",
                        sabre_cfg.seed,
                        outcome,
                        started,
                    );
                }
            }
        }

        if let Some(dist) = &cfg.distribution {
            let seeds = dist.effective_seeds();
            match link_chips(&chip, &chip, dist.strategies[0], seeds[0]) {
                Ok(device) => {
                    for &kind in &dist.strategies {
                        for &seed in &seeds {
                            let started = Instant::now();
                            let outcome = distribute(&circuit, &device, dist.mode, kind, seed)
                                .and_then(|d| {
                                    check_conformance(&d.circuit, |u, v| d.topo.is_coupled(u, v))?;
                                    Ok((
                                        d.circuit,
                                        d.swap_count,
                                        d.cross_group_swaps,
                                        d.ebits_consumed,
                                    ))
                                });
                            rec.record(
                                &bench_name,
                                n,
                                "linear",
                                kind.as_str(),
                                seed,
                                outcome,
                                started,
                            );
                        }
                    }
                }
                Err(e) => {
                    for &kind in &dist.strategies {
                        rec.errors.push(RowError {
                            benchmark: bench_name.clone(),
                            n,
                            router: "linear".into(),
                            strategy: kind.as_str().into(),
                            seed: seeds[0],
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(ExperimentOutcome { rows: rec.rows, errors: rec.errors })
}

fn conformant(
    compiled: CompiledCircuit,
    coupled: impl Fn(usize, usize) -> bool,
) -> Result<CompiledCircuit> {
    check_conformance(&compiled.circuit, coupled)?;
    Ok(compiled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::render_csv;

    fn qft_config(sizes: &[usize]) -> ExperimentConfig {
        ExperimentConfig {
            benchmark: BenchmarkSpec::Qft,
            qubit_sizes: sizes.to_vec(),
            routers: both_routers(),
            distribution: None,
            accounting: GateAccounting::SwapAsOne,
            heavy_hex_d: BTreeMap::new(),
            seed: 0,
            sabre: None,
            output: None,
        }
    }

    #[test]
    fn config_defaults_fill_in() {
        let cfg = parse_experiment_config(
            r#"{"benchmark": {"kind": "qft"}, "qubit_sizes": [4]}"#,
        )
        .unwrap();
        assert_eq!(cfg.routers, both_routers());
        assert_eq!(cfg.accounting, GateAccounting::SwapAsOne);
        assert!(cfg.distribution.is_none());
    }

    #[test]
    fn qaoa_config_round_trips() {
        let cfg = ExperimentConfig {
            benchmark: BenchmarkSpec::Qaoa {
                family: GraphFamily::ErdosRenyi(0.5),
                layers: 2,
                graph_seed: 7,
            },
            qubit_sizes: vec![10, 20],
            distribution: Some(DistributionConfig {
                mode: TeleportMode::StateTeleport,
                strategies: both_kinds(),
                seeds: vec![],
                repetitions: 10,
            }),
            ..qft_config(&[10])
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_experiment_config(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_even_lattice_distance() {
        let err = parse_experiment_config(
            r#"{"benchmark": {"kind": "qft"}, "qubit_sizes": [4], "heavy_hex_d": {"4": 4}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("odd"));
    }

    #[test]
    fn chooses_smallest_sufficient_lattice() {
        assert_eq!(choose_d(10), 3);
        assert_eq!(choose_d(17), 3);
        assert_eq!(choose_d(18), 5);
        assert_eq!(choose_d(50), 7);
        assert_eq!(choose_d(100), 9);
    }

    #[test]
    fn one_row_per_router_and_size() {
        let outcome = run_experiment(&qft_config(&[4, 6])).unwrap();
        assert!(outcome.errors.is_empty());
        assert_eq!(outcome.rows.len(), 4);
        let keys: std::collections::BTreeSet<_> =
            outcome.rows.iter().map(|r| r.key()).collect();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn oversized_run_is_an_error_record_not_a_failure() {
        let mut cfg = qft_config(&[4, 30]);
        cfg.heavy_hex_d.insert(30, 3);
        cfg.routers = vec![RouterChoice::Linear];
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        assert_eq!(outcome.errors.len(), 1);
        assert_eq!(outcome.errors[0].n, 30);
    }

    #[test]
    fn rerun_reproduces_rows_byte_for_byte() {
        let mut cfg = qft_config(&[6]);
        cfg.distribution = Some(DistributionConfig {
            mode: TeleportMode::Auto,
            strategies: both_kinds(),
            seeds: vec![],
            repetitions: 2,
        });
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(
            render_csv(&a.rows, false).unwrap(),
            render_csv(&b.rows, false).unwrap()
        );
    }

    #[test]
    fn distribution_rows_carry_link_metrics() {
        let mut cfg = qft_config(&[6]);
        cfg.routers = vec![];
        cfg.distribution = Some(DistributionConfig {
            mode: TeleportMode::StateTeleport,
            strategies: vec![LinkKind::DanglingLink],
            seeds: vec![0],
            repetitions: 1,
        });
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        let row = &outcome.rows[0];
        assert_eq!(row.strategy, "dangling");
        assert!(row.ebits > 0);
        assert!(row.cross_group_swaps > 0);
    }
}
