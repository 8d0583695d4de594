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

//! Search-based router for arbitrary coupling graphs.
//!
//! Each trial draws a random initial placement, then refines it with a
//! forward, reverse, forward sweep over the circuit's dependency DAG. Swaps
//! are chosen by a lookahead cost over front-layer and upcoming gates, with
//! a per-qubit decay factor discouraging ping-pong moves. The best trial by
//! (gate count, depth) wins.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateAccounting};
use crate::error::{Error, Result};
use crate::route::{map_gate, CompiledCircuit, Layout, RouteStrategy};
use crate::topology::CouplingGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouterConfig {
    /// Number of upcoming two-qubit gates scored beyond the front layer.
    pub lookahead_size: usize,
    /// Additive penalty applied to a qubit's decay factor per swap.
    pub decay_delta: f64,
    /// Decay factors reset to 1 after this many swaps.
    pub decay_reset: usize,
    /// Weight of the lookahead term relative to the front layer.
    pub extended_weight: f64,
    pub seed: u64,
    /// Independent random restarts; the best result is kept.
    pub trials: usize,
}

impl Default for RouterConfig {
    fn default() -> Self {
        RouterConfig {
            lookahead_size: 20,
            decay_delta: 0.001,
            decay_reset: 5,
            extended_weight: 0.5,
            seed: 0,
            trials: 3,
        }
    }
}

pub fn route_sabre(
    circuit: &Circuit,
    graph: &CouplingGraph,
    config: &RouterConfig,
) -> Result<CompiledCircuit> {
    circuit.validate()?;
    let width = graph.num_nodes();
    if circuit.num_qubits > width {
        return Err(Error::Routing(format!(
            "{} logical qubits exceed {} device nodes",
            circuit.num_qubits, width
        )));
    }
    if !graph.is_connected() {
        return Err(Error::Routing("coupling graph is not connected".into()));
    }
    if config.trials == 0 {
        return Err(Error::Config("router needs at least one trial".into()));
    }

    let dist = all_pairs(graph);
    let reversed = Circuit {
        name: circuit.name.clone(),
        num_qubits: circuit.num_qubits,
        num_cbits: circuit.num_cbits,
        gates: circuit.gates.iter().rev().cloned().collect(),
    };

    let mut best: Option<((usize, usize), CompiledCircuit)> = None;
    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(trial as u64));
        let mut nodes: Vec<usize> = (0..width).collect();
        nodes.shuffle(&mut rng);
        let l0 = Layout::new(nodes[..circuit.num_qubits].to_vec(), width)?;

        // Forward and reverse dry runs refine the initial placement: the
        // final layout of each pass seeds the next.
        let (l1, _) = sabre_pass(circuit, graph, &dist, l0, config, None)?;
        let (l2, _) = sabre_pass(&reversed, graph, &dist, l1, config, None)?;
        let mut out = Circuit::new(circuit.name.clone(), width, circuit.num_cbits);
        let (lf, swaps) = sabre_pass(circuit, graph, &dist, l2.clone(), config, Some(&mut out))?;

        let cc = CompiledCircuit {
            circuit: out,
            initial_layout: l2,
            final_layout: lf,
            swap_count: swaps,
            strategy: RouteStrategy::Sabre,
            fallback: false,
        };
        let key = (cc.circuit.gate_count(GateAccounting::SwapAsOne), cc.circuit.depth());
        if best.as_ref().map_or(true, |(k, _)| key < *k) {
            best = Some((key, cc));
        }
    }
    Ok(best.expect("at least one trial ran").1)
}

fn all_pairs(graph: &CouplingGraph) -> Vec<Vec<usize>> {
    (0..graph.num_nodes()).map(|s| graph.bfs_distances(s)).collect()
}

/// Dependency DAG edges: each gate depends on the previous gate touching any
/// of its qubit wires or its classical bit. No commutation.
fn build_dag(circuit: &Circuit) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut succ = vec![Vec::new(); circuit.len()];
    let mut indeg = vec![0usize; circuit.len()];
    let mut last_q: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut last_c: Vec<Option<usize>> = vec![None; circuit.num_cbits];
    for (idx, gate) in circuit.gates.iter().enumerate() {
        let mut preds = BTreeSet::new();
        for &q in gate.qubits() {
            if let Some(p) = last_q[q] {
                preds.insert(p);
            }
            last_q[q] = Some(idx);
        }
        if let Some(c) = gate.cbit {
            if let Some(p) = last_c[c] {
                preds.insert(p);
            }
            last_c[c] = Some(idx);
        }
        for p in preds {
            succ[p].push(idx);
            indeg[idx] += 1;
        }
    }
    (succ, indeg)
}

fn sabre_pass(
    circuit: &Circuit,
    graph: &CouplingGraph,
    dist: &[Vec<usize>],
    mut layout: Layout,
    config: &RouterConfig,
    mut out: Option<&mut Circuit>,
) -> Result<(Layout, usize)> {
    let (succ, mut indeg) = build_dag(circuit);
    let mut front: BTreeSet<usize> = (0..circuit.len()).filter(|&i| indeg[i] == 0).collect();
    let mut decay = vec![1.0f64; graph.num_nodes()];
    let mut swap_count = 0usize;
    let mut swaps_since_reset = 0usize;
    let mut swaps_since_emit = 0usize;
    // Forced-march threshold; ordinary scoring should emit long before this.
    let valve = 2 * graph.num_nodes() + 10;

    while !front.is_empty() {
        // Emit everything currently executable.
        let mut progressed = true;
        while progressed {
            progressed = false;
            let executable: Vec<usize> = front
                .iter()
                .copied()
                .filter(|&i| {
                    let g = &circuit.gates[i];
                    !g.is_two_qubit() || graph.has_edge(layout.phys_of(g.q0()), layout.phys_of(g.q1()))
                })
                .collect();
            for idx in executable {
                front.remove(&idx);
                if let Some(out) = out.as_deref_mut() {
                    out.push(map_gate(&circuit.gates[idx], &layout))?;
                }
                for &s in &succ[idx] {
                    indeg[s] -= 1;
                    if indeg[s] == 0 {
                        front.insert(s);
                    }
                }
                swaps_since_emit = 0;
                progressed = true;
            }
        }
        if front.is_empty() {
            break;
        }

        let blocked: Vec<(usize, usize)> = front
            .iter()
            .map(|&i| {
                let g = &circuit.gates[i];
                (layout.phys_of(g.q0()), layout.phys_of(g.q1()))
            })
            .collect();

        let (u, v) = if swaps_since_emit > valve {
            // Release valve: march the first blocked gate together along a
            // shortest path, one step per iteration.
            let &(pa, pb) = blocked.first().expect("front has a blocked gate");
            let next = graph
                .neighbors(pa)
                .into_iter()
                .min_by_key(|&nb| (dist[nb][pb], nb))
                .expect("connected graph");
            (pa.min(next), pa.max(next))
        } else {
            let extended = extended_set(circuit, &front, &succ, &indeg, config.lookahead_size);
            let mut cands: BTreeSet<(usize, usize)> = BTreeSet::new();
            for &(pa, pb) in &blocked {
                for node in [pa, pb] {
                    for nb in graph.neighbors(node) {
                        cands.insert((node.min(nb), node.max(nb)));
                    }
                }
            }
            let mut best: Option<(f64, (usize, usize))> = None;
            for &(u, v) in &cands {
                layout.apply_swap(u, v);
                let front_term = mean_distance(&blocked_after(circuit, &front, &layout), dist);
                let ext_term = mean_distance(
                    &extended
                        .iter()
                        .map(|&i| {
                            let g = &circuit.gates[i];
                            (layout.phys_of(g.q0()), layout.phys_of(g.q1()))
                        })
                        .collect::<Vec<_>>(),
                    dist,
                );
                layout.apply_swap(u, v);
                let score = decay[u] * decay[v] * (front_term + config.extended_weight * ext_term);
                if best.as_ref().map_or(true, |&(s, e)| {
                    score < s - 1e-12 || (score < s + 1e-12 && (u, v) < e)
                }) {
                    best = Some((score, (u, v)));
                }
            }
            best.expect("blocked gates always have candidate swaps").1
        };

        if let Some(out) = out.as_deref_mut() {
            out.push(Gate::swap(u, v))?;
        }
        layout.apply_swap(u, v);
        swap_count += 1;
        swaps_since_emit += 1;
        decay[u] += config.decay_delta;
        decay[v] += config.decay_delta;
        swaps_since_reset += 1;
        if swaps_since_reset >= config.decay_reset {
            decay.fill(1.0);
            swaps_since_reset = 0;
        }
    }
    Ok((layout, swap_count))
}

fn blocked_after(circuit: &Circuit, front: &BTreeSet<usize>, layout: &Layout) -> Vec<(usize, usize)> {
    front
        .iter()
        .map(|&i| {
            let g = &circuit.gates[i];
            (layout.phys_of(g.q0()), layout.phys_of(g.q1()))
        })
        .collect()
}

fn mean_distance(pairs: &[(usize, usize)], dist: &[Vec<usize>]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sum: usize = pairs.iter().map(|&(a, b)| dist[a][b]).sum();
    sum as f64 / pairs.len() as f64
}

/// Up to `limit` two-qubit gates reachable behind the front layer, in DAG
/// order. Readiness is approximated: successors are explored breadth-first
/// without waiting for all predecessors.
fn extended_set(
    circuit: &Circuit,
    front: &BTreeSet<usize>,
    succ: &[Vec<usize>],
    _indeg: &[usize],
    limit: usize,
) -> Vec<usize> {
    let mut seen: BTreeSet<usize> = front.iter().copied().collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &f in front {
        for &s in &succ[f] {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    let mut picked = Vec::new();
    while let Some(idx) = queue.pop_front() {
        if circuit.gates[idx].is_two_qubit() {
            picked.push(idx);
            if picked.len() == limit {
                break;
            }
        }
        for &s in &succ[idx] {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    picked
}
