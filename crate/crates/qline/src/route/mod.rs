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

//! Routing: rewrite a logical circuit so every two-qubit gate lands on a
//! coupled pair of the target topology, inserting SWAPs as needed.
//!
//! The routers share the [`CompiledCircuit`] output shape: a greedy line
//! router and an odd-even transposition network for line topologies, a
//! lookahead-with-decay baseline for arbitrary coupling graphs, and an
//! exhaustive searcher that certifies small instances.

mod exact;
mod greedy;
mod sabre;
mod swap_network;

pub use exact::{fits_exact, route_exact};
pub use greedy::route_greedy;
pub use sabre::{route_sabre, RouterConfig};
pub use swap_network::route_swap_network;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::topology::LnnTopology;

/// Logical-to-physical qubit assignment, kept bijective under SWAP updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    log2phys: Vec<usize>,
    phys2log: Vec<Option<usize>>,
}

impl Layout {
    /// Build from a logical -> physical table over `width` physical nodes.
    pub fn new(log2phys: Vec<usize>, width: usize) -> Result<Self> {
        let mut phys2log = vec![None; width];
        for (l, &p) in log2phys.iter().enumerate() {
            if p >= width {
                return Err(Error::Routing(format!("physical node {p} out of range")));
            }
            if phys2log[p].replace(l).is_some() {
                return Err(Error::Routing(format!("two logical qubits on node {p}")));
            }
        }
        Ok(Layout { log2phys, phys2log })
    }

    pub fn num_logical(&self) -> usize {
        self.log2phys.len()
    }

    pub fn width(&self) -> usize {
        self.phys2log.len()
    }

    pub fn phys_of(&self, logical: usize) -> usize {
        self.log2phys[logical]
    }

    pub fn log_at(&self, phys: usize) -> Option<usize> {
        self.phys2log[phys]
    }

    /// Exchange whatever sits on the two physical nodes (either may be
    /// unoccupied).
    pub fn apply_swap(&mut self, u: usize, v: usize) {
        let lu = self.phys2log[u];
        let lv = self.phys2log[v];
        self.phys2log[u] = lv;
        self.phys2log[v] = lu;
        if let Some(l) = lu {
            self.log2phys[l] = v;
        }
        if let Some(l) = lv {
            self.log2phys[l] = u;
        }
    }

    /// The logical -> physical table.
    pub fn as_table(&self) -> &[usize] {
        &self.log2phys
    }
}

/// Which algorithm produced a compiled circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteStrategy {
    Greedy,
    SwapNetwork,
    Sabre,
    Exact,
}

impl RouteStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteStrategy::Greedy => "greedy",
            RouteStrategy::SwapNetwork => "swap_network",
            RouteStrategy::Sabre => "sabre",
            RouteStrategy::Exact => "exact",
        }
    }
}

/// A routed circuit over physical nodes, together with where each logical
/// qubit started and ended.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swap_count: usize,
    pub strategy: RouteStrategy,
    /// Set when a swap-network run stalled and the result came from the
    /// greedy fallback instead.
    pub fallback: bool,
}

impl CompiledCircuit {
    /// Re-derive the final layout from the initial one by replaying the
    /// output's SWAPs, and compare. Cheap self-check used by tests and the
    /// metrics pipeline.
    ///
    /// Only meaningful when the source circuit contained no SWAP gates: a
    /// served source SWAP exchanges values, not wire labels, so the replay
    /// cannot tell it apart from a transport swap.
    pub fn layouts_consistent(&self) -> bool {
        let mut layout = self.initial_layout.clone();
        for g in &self.circuit.gates {
            if g.kind == crate::circuit::GateKind::Swap {
                layout.apply_swap(g.q0(), g.q1());
            }
        }
        layout.as_table() == self.final_layout.as_table()
            && self.swap_count == self.circuit.swap_count()
    }
}

/// Identity placement: logical qubit i on the i-th backbone node. Pendant
/// nodes are never assigned; they stay reserved for inter-chip traffic.
pub fn place(circuit: &Circuit, topo: &LnnTopology) -> Result<Layout> {
    if circuit.num_qubits > topo.line.len() {
        return Err(Error::Routing(format!(
            "{} logical qubits exceed the {}-node backbone",
            circuit.num_qubits,
            topo.line.len()
        )));
    }
    let log2phys: Vec<usize> = topo.line[..circuit.num_qubits].to_vec();
    Layout::new(log2phys, line_width(topo))
}

/// Physical register width covering every node id of the topology.
pub(crate) fn line_width(topo: &LnnTopology) -> usize {
    topo.line
        .iter()
        .chain(topo.dangling.values())
        .chain(topo.dangling.keys())
        .copied()
        .max()
        .map_or(0, |m| m + 1)
}

/// Verify that every two-qubit gate acts on a coupled pair. Returns the
/// first violation.
pub fn check_conformance(
    circuit: &Circuit,
    coupled: impl Fn(usize, usize) -> bool,
) -> Result<()> {
    for (idx, g) in circuit.gates.iter().enumerate() {
        if g.is_two_qubit() && !coupled(g.q0(), g.q1()) {
            return Err(Error::Routing(format!(
                "gate {idx} ({:?}) acts on uncoupled nodes {} and {}",
                g.kind,
                g.q0(),
                g.q1()
            )));
        }
    }
    Ok(())
}

/// Map a logical gate through a layout.
pub(crate) fn map_gate(gate: &Gate, layout: &Layout) -> Gate {
    gate.mapped(|q| layout.phys_of(q))
}
