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

//! Depth-oriented line router built on odd-even transposition phases.
//!
//! The backbone runs alternating layers of disjoint comparators. Whenever a
//! comparator's occupants owe each other a gate that is safe to reorder to
//! the front, the gate fires there; otherwise the comparator swaps (or holds,
//! if the owed gate is still blocked). Dense interaction patterns pay one
//! swap per meeting pair instead of a walk per gate.

use std::collections::{BTreeMap, VecDeque};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::route::greedy::route_greedy;
use crate::route::{line_width, map_gate, CompiledCircuit, Layout, RouteStrategy};
use crate::topology::LnnTopology;

pub fn route_swap_network(
    circuit: &Circuit,
    topo: &LnnTopology,
    layout: &Layout,
) -> Result<CompiledCircuit> {
    circuit.validate()?;
    let width = line_width(topo);
    if layout.width() != width {
        return Err(Error::Routing(format!(
            "layout width {} does not match topology width {width}",
            layout.width()
        )));
    }
    let mut node_pos = vec![None; width];
    for (pos, &node) in topo.line.iter().enumerate() {
        node_pos[node] = Some(pos);
    }
    for l in 0..layout.num_logical() {
        if node_pos[layout.phys_of(l)].is_none() {
            return Err(Error::Routing(format!(
                "logical qubit {l} is placed off the backbone"
            )));
        }
    }

    // Unemitted gate indices between each unordered logical pair, in order.
    let mut pair_queue: BTreeMap<(usize, usize), VecDeque<usize>> = BTreeMap::new();
    for (idx, gate) in circuit.gates.iter().enumerate() {
        if gate.is_two_qubit() {
            let key = pair_key(gate.q0(), gate.q1());
            pair_queue.entry(key).or_default().push_back(idx);
        }
    }

    let mut layout = layout.clone();
    let initial_layout = layout.clone();
    let mut out = Circuit::new(circuit.name.clone(), width, circuit.num_cbits);
    let mut emitted = vec![false; circuit.len()];
    let mut remaining = circuit.len();
    let mut remaining_two = circuit.gates.iter().filter(|g| g.is_two_qubit()).count();
    let mut swap_count = 0usize;

    // Comparators only sweep the occupied prefix of the backbone; nodes past
    // the last logical qubit have nothing to transport.
    let active_len = (0..layout.num_logical())
        .map(|l| node_pos[layout.phys_of(l)].expect("backbone") + 1)
        .max()
        .unwrap_or(0);

    let mut parity = 0usize;
    let mut cycle_emissions = 0usize;
    let mut gave_up = false;

    // Phases run until every two-qubit gate has fired; trailing single-qubit
    // gates need no transport and are flushed afterwards.
    'phases: while remaining_two > 0 {
        flush_single_qubit(circuit, &mut emitted, &mut remaining, &layout, &mut out)?;
        let mut p = parity;
        while p + 1 < active_len {
            if remaining_two == 0 {
                break 'phases;
            }
            let (u, v) = (topo.line[p], topo.line[p + 1]);
            if let (Some(la), Some(lb)) = (layout.log_at(u), layout.log_at(v)) {
                let key = pair_key(la, lb);
                if let Some(queue) = pair_queue.get_mut(&key) {
                    while let Some(&idx) = queue.front() {
                        if !ready(circuit, idx, &emitted) {
                            break;
                        }
                        queue.pop_front();
                        out.push(map_gate(&circuit.gates[idx], &layout))?;
                        emitted[idx] = true;
                        remaining -= 1;
                        remaining_two -= 1;
                        cycle_emissions += 1;
                    }
                    if queue.is_empty() {
                        pair_queue.remove(&key);
                    } else {
                        // Hold: an owed gate cannot fire yet, keep the pair
                        // adjacent rather than tearing it apart.
                        p += 2;
                        continue;
                    }
                }
            }
            out.push(Gate::swap(u, v))?;
            layout.apply_swap(u, v);
            swap_count += 1;
            p += 2;
        }
        parity ^= 1;
        if parity == 0 {
            // A full even+odd sweep that fired nothing cannot make progress.
            if cycle_emissions == 0 {
                gave_up = true;
                break;
            }
            cycle_emissions = 0;
        }
    }

    if gave_up {
        let mut cc = route_greedy(circuit, topo, &initial_layout)?;
        cc.strategy = RouteStrategy::SwapNetwork;
        cc.fallback = true;
        return Ok(cc);
    }
    if remaining > 0 {
        flush_single_qubit(circuit, &mut emitted, &mut remaining, &layout, &mut out)?;
    }
    debug_assert_eq!(remaining, 0);

    Ok(CompiledCircuit {
        circuit: out,
        initial_layout,
        final_layout: layout,
        swap_count,
        strategy: RouteStrategy::SwapNetwork,
        fallback: false,
    })
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Emit every single-qubit gate whose earlier same-wire gates are all done or
/// safely reorderable past it. One in-order pass suffices: emission only ever
/// unblocks later gates.
fn flush_single_qubit(
    circuit: &Circuit,
    emitted: &mut [bool],
    remaining: &mut usize,
    layout: &Layout,
    out: &mut Circuit,
) -> Result<()> {
    for idx in 0..circuit.len() {
        if emitted[idx] || circuit.gates[idx].is_two_qubit() {
            continue;
        }
        if ready(circuit, idx, emitted) {
            out.push(map_gate(&circuit.gates[idx], layout))?;
            emitted[idx] = true;
            *remaining -= 1;
        }
    }
    Ok(())
}

/// A gate may jump the queue iff it commutes with every earlier unemitted
/// gate: disjoint wires, or diagonal action on every shared wire. Shared
/// classical bits never commute (measurements write, corrections read).
fn ready(circuit: &Circuit, idx: usize, emitted: &[bool]) -> bool {
    let g = &circuit.gates[idx];
    for (f_idx, f) in circuit.gates[..idx].iter().enumerate() {
        if emitted[f_idx] {
            continue;
        }
        if let (Some(a), Some(b)) = (f.cbit, g.cbit) {
            if a == b {
                return false;
            }
        }
        for (sf, &wf) in f.qubits().iter().enumerate() {
            for (sg, &wg) in g.qubits().iter().enumerate() {
                if wf == wg && !(f.diagonal_on(sf) && g.diagonal_on(sg)) {
                    return false;
                }
            }
        }
    }
    true
}
