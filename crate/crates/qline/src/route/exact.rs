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

//! Exhaustive line router for small circuits.
//!
//! Breadth-first search over (served-gate set, qubit order) states, one
//! adjacent transposition per step, so the returned circuit uses the fewest
//! SWAPs any line route can achieve. Gates may be served out of source
//! order only when every unserved earlier gate sharing a wire commutes
//! diagonally, the same reordering freedom the heuristic routers have.
//!
//! Cost is exponential in circuit size; inputs are capped at
//! [`MAX_QUBITS`] qubits and [`MAX_GATES`] gates.

use std::collections::{HashMap, VecDeque};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::route::{line_width, CompiledCircuit, Layout, RouteStrategy};
use crate::topology::LnnTopology;

/// Largest logical register the search accepts.
pub const MAX_QUBITS: usize = 6;
/// Longest gate list the search accepts.
pub const MAX_GATES: usize = 16;

/// Whether [`route_exact`] accepts the circuit.
pub fn fits_exact(circuit: &Circuit) -> bool {
    circuit.num_qubits <= MAX_QUBITS
        && circuit.gates.len() <= MAX_GATES
        && circuit.gates.iter().all(|g| {
            !matches!(
                g.kind,
                GateKind::Swap
                    | GateKind::Measure
                    | GateKind::CorrX
                    | GateKind::CorrZ
                    | GateKind::EprPrep
            )
        })
}

/// Qubit order along the block, indexed by logical qubit.
type Order = Vec<u8>;

pub fn route_exact(
    circuit: &Circuit,
    topo: &LnnTopology,
    layout: &Layout,
) -> Result<CompiledCircuit> {
    circuit.validate()?;
    let n = circuit.num_qubits;
    if n > MAX_QUBITS || circuit.gates.len() > MAX_GATES {
        return Err(Error::Routing(format!(
            "exhaustive routing is capped at {MAX_QUBITS} qubits and {MAX_GATES} gates \
             ({n} qubits, {} gates given)",
            circuit.gates.len()
        )));
    }
    for g in &circuit.gates {
        if matches!(
            g.kind,
            GateKind::Swap
                | GateKind::Measure
                | GateKind::CorrX
                | GateKind::CorrZ
                | GateKind::EprPrep
        ) {
            return Err(Error::Routing(format!(
                "exhaustive routing serves plain unitary gates only, not {:?}",
                g.kind
            )));
        }
    }
    let width = line_width(topo);
    if layout.width() != width {
        return Err(Error::Routing(format!(
            "layout width {} does not match topology width {width}",
            layout.width()
        )));
    }
    // Any minimal route keeps the block contiguous: compacting a layout
    // never breaks an adjacency, so empty slots cannot lower the optimum.
    // The search therefore runs on the first n line slots, and the initial
    // layout must occupy exactly those.
    let mut slot_of = vec![None; width];
    for (slot, &node) in topo.line.iter().take(n).enumerate() {
        slot_of[node] = Some(slot as u8);
    }
    let mut start: Order = vec![0; n];
    for l in 0..n {
        match slot_of[layout.phys_of(l)] {
            Some(s) => start[l] = s,
            None => {
                return Err(Error::Routing(format!(
                    "logical qubit {l} is placed outside the first {n} line slots"
                )));
            }
        }
    }

    let full: u32 = (1u32 << circuit.gates.len()) - 1;
    let start_mask = close(circuit, 0, &start, &mut |_| {});

    // Parent chain: state -> (previous state, slot of the swap taken).
    let mut seen: HashMap<(u32, Order), Option<((u32, Order), usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert((start_mask, start.clone()), None);
    queue.push_back((start_mask, start.clone()));
    let mut goal = None;
    if start_mask == full {
        goal = Some((start_mask, start.clone()));
    }
    while let Some((mask, order)) = queue.pop_front() {
        if goal.is_some() {
            break;
        }
        for slot in 0..n.saturating_sub(1) {
            let mut next = order.clone();
            for s in next.iter_mut() {
                if *s == slot as u8 {
                    *s = slot as u8 + 1;
                } else if *s == slot as u8 + 1 {
                    *s = slot as u8;
                }
            }
            let nmask = close(circuit, mask, &next, &mut |_| {});
            let key = (nmask, next);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), Some(((mask, order.clone()), slot)));
                if nmask == full {
                    goal = Some(key);
                    break;
                }
                queue.push_back(key);
            }
        }
    }
    let goal = goal.expect("adjacent transpositions reach every qubit order");

    // Walk the parent chain back to the start, then replay forward,
    // emitting each served gate where the closure fired it.
    let mut slots_taken = Vec::new();
    let mut cursor = goal;
    while let Some((prev, slot)) = seen[&cursor].clone() {
        slots_taken.push(slot);
        cursor = prev;
    }
    slots_taken.reverse();

    let mut out = Circuit::new(circuit.name.clone(), width, circuit.num_cbits);
    let mut order = start;
    let mut mask = 0u32;
    fn emit(out: &mut Circuit, topo: &LnnTopology, g: &Gate, order: &Order) {
        out.push_unchecked(g.mapped(|q| topo.line[order[q] as usize]));
    }
    mask = close(circuit, mask, &order, &mut |i| {
        emit(&mut out, topo, &circuit.gates[i], &order)
    });
    for &slot in &slots_taken {
        let (u, v) = (topo.line[slot], topo.line[slot + 1]);
        out.push_unchecked(Gate::swap(u, v));
        for s in order.iter_mut() {
            if *s == slot as u8 {
                *s = slot as u8 + 1;
            } else if *s == slot as u8 + 1 {
                *s = slot as u8;
            }
        }
        mask = close(circuit, mask, &order, &mut |i| {
            emit(&mut out, topo, &circuit.gates[i], &order)
        });
    }
    debug_assert_eq!(mask, full);

    let final_layout =
        Layout::new((0..n).map(|l| topo.line[order[l] as usize]).collect(), width)?;
    Ok(CompiledCircuit {
        circuit: out,
        initial_layout: layout.clone(),
        final_layout,
        swap_count: slots_taken.len(),
        strategy: RouteStrategy::Exact,
        fallback: false,
    })
}

/// Serve every gate that is adjacent and legally next, to a fixpoint.
/// `emit` sees each newly served gate index, in serving order.
fn close(c: &Circuit, mut mask: u32, order: &Order, emit: &mut impl FnMut(usize)) -> u32 {
    loop {
        let mut progressed = false;
        for (i, g) in c.gates.iter().enumerate() {
            if mask & (1 << i) != 0 || !servable(c, mask, i) {
                continue;
            }
            let adjacent =
                !g.is_two_qubit() || order[g.q0()].abs_diff(order[g.q1()]) == 1;
            if adjacent {
                mask |= 1 << i;
                emit(i);
                progressed = true;
            }
        }
        if !progressed {
            return mask;
        }
    }
}

/// A gate may run when every unserved earlier gate commutes with it.
fn servable(c: &Circuit, mask: u32, idx: usize) -> bool {
    (0..idx).all(|h| mask & (1 << h) != 0 || commutes(&c.gates[idx], &c.gates[h]))
}

fn commutes(a: &Gate, b: &Gate) -> bool {
    a.qubits().iter().enumerate().all(|(i, qa)| {
        b.qubits()
            .iter()
            .enumerate()
            .all(|(j, qb)| qa != qb || (a.diagonal_on(i) && b.diagonal_on(j)))
    })
}
