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

//! Two-chip circuit distribution.
//!
//! Logical qubits get a contiguous half-split over the two chips. Gates whose
//! operands sit on the same chip are served by walking along that chip's
//! backbone; gates that straddle the chips are lowered to teleportation
//! sub-circuits over the link pair. Counters track entanglement consumption
//! and every swap spent servicing a straddling gate.
//!
//! Helper qubits (the link endpoints and any vacated node) are measured and
//! conditionally flipped back to |0> after each lowering, so they can be
//! reused and so the final state of every non-data wire is exactly |0>.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::sim::{all_branches, simulate, StateVec, MAX_QUBITS};
use crate::topology::{LinkKind, MultiChipTopology};

/// How a straddling gate is executed across the link.
///
/// `Auto` applies the default policy: controlled gates (CX/CZ/CP) go through
/// batched gate teleportation, everything else through state teleportation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeleportMode {
    Auto,
    StateTeleport,
    GateTeleport,
    GateTeleportBatched,
}

impl TeleportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TeleportMode::Auto => "auto",
            TeleportMode::StateTeleport => "state_teleport",
            TeleportMode::GateTeleport => "gate_teleport",
            TeleportMode::GateTeleportBatched => "gate_teleport_batched",
        }
    }
}

impl FromStr for TeleportMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(TeleportMode::Auto),
            "state_teleport" => Ok(TeleportMode::StateTeleport),
            "gate_teleport" => Ok(TeleportMode::GateTeleport),
            "gate_teleport_batched" => Ok(TeleportMode::GateTeleportBatched),
            other => Err(Error::Config(format!("unknown teleport mode '{other}'"))),
        }
    }
}

/// Static assignment of logical qubits to chips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    /// Chip id (0 or 1) per logical qubit.
    pub qubit_chip: Vec<usize>,
    /// Indices of gates whose operands land on different chips.
    pub cut_gates: Vec<usize>,
}

/// Contiguous half-split: qubits 0..ceil(n/2) on chip 0, the rest on chip 1.
pub fn partition(circuit: &Circuit, topo: &MultiChipTopology) -> Result<PartitionAssignment> {
    let n = circuit.num_qubits;
    let k = n.div_ceil(2);
    let caps = [topo.chips[0].line.len(), topo.chips[1].line.len()];
    if k > caps[0] || n - k > caps[1] {
        return Err(Error::Distribution(format!(
            "{n} logical qubits exceed backbone capacities {} + {}",
            caps[0], caps[1]
        )));
    }
    let qubit_chip: Vec<usize> = (0..n).map(|q| usize::from(q >= k)).collect();
    let cut_gates = circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_two_qubit() && qubit_chip[g.q0()] != qubit_chip[g.q1()])
        .map(|(i, _)| i)
        .collect();
    Ok(PartitionAssignment { qubit_chip, cut_gates })
}

/// A circuit lowered onto the two-chip device.
#[derive(Debug, Clone)]
pub struct DistributedCircuit {
    /// Gates over global node ids; every two-qubit gate acts on an intra-chip
    /// edge or on the link pair.
    pub circuit: Circuit,
    /// The device, with the link the lowering actually used.
    pub topo: MultiChipTopology,
    pub partition: PartitionAssignment,
    /// (source gate index, lowering used) per straddling gate served.
    pub nonlocal_sites: Vec<(usize, TeleportMode)>,
    /// Number of EPR preparations emitted.
    pub ebits_consumed: usize,
    /// Swaps emitted while servicing straddling gates (transport walks,
    /// evictions, and arrival pulls included).
    pub cross_group_swaps: usize,
    /// All swaps in the output.
    pub swap_count: usize,
    /// Logical qubit -> global node, before the first gate.
    pub initial_layout: Vec<usize>,
    /// Logical qubit -> global node, after the last gate.
    pub final_layout: Vec<usize>,
}

/// Companion metadata serialized next to the lowered circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionSidecar {
    pub qubit_chip: Vec<usize>,
    pub nonlocal_sites: Vec<(usize, TeleportMode)>,
    pub ebits_consumed: usize,
    pub cross_group_swaps: usize,
    pub swap_count: usize,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
}

impl DistributedCircuit {
    pub fn sidecar(&self) -> DistributionSidecar {
        DistributionSidecar {
            qubit_chip: self.partition.qubit_chip.clone(),
            nonlocal_sites: self.nonlocal_sites.clone(),
            ebits_consumed: self.ebits_consumed,
            cross_group_swaps: self.cross_group_swaps,
            swap_count: self.swap_count,
            initial_layout: self.initial_layout.clone(),
            final_layout: self.final_layout.clone(),
        }
    }
}

/// Recompute the link over `topo`'s chips for the requested strategy. The
/// endpoint draw matches `link_chips` exactly: same RNG, same order.
fn relink(topo: &MultiChipTopology, kind: LinkKind, seed: u64) -> Result<MultiChipTopology> {
    use rand::{Rng, SeedableRng};
    let link = match kind {
        LinkKind::DanglingLink => {
            let (pa, _) = topo.chips[0].first_dangling_in_line_order().ok_or_else(|| {
                Error::InvalidTopology("chip 0 has no dangling qubit to link".into())
            })?;
            let (pb, _) = topo.chips[1].first_dangling_in_line_order().ok_or_else(|| {
                Error::InvalidTopology("chip 1 has no dangling qubit to link".into())
            })?;
            (pa, pb)
        }
        LinkKind::RandomLink => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let na = topo.chips[0].line[rng.random_range(0..topo.chips[0].line.len())];
            let nb = topo.chips[1].line[rng.random_range(0..topo.chips[1].line.len())];
            (na, nb)
        }
    };
    Ok(MultiChipTopology { chips: topo.chips.clone(), link, link_kind: kind })
}

/// Lower `circuit` onto the two-chip device.
///
/// The link is re-derived from `strategy` and `seed` over `topo`'s chips, so
/// the same chips can be compared under both strategies. Gates are processed
/// in program order; chip assignment is dynamic (state teleports migrate
/// qubits), so a gate straddles chips based on where its operands actually
/// are when it is served.
pub fn distribute(
    circuit: &Circuit,
    topo: &MultiChipTopology,
    mode: TeleportMode,
    strategy: LinkKind,
    seed: u64,
) -> Result<DistributedCircuit> {
    circuit.validate()?;
    let assignment = partition(circuit, topo)?;
    let topo = relink(topo, strategy, seed)?;
    let (out, nonlocal, ebits, cross, swaps, initial_layout, final_layout) = {
        let mut planner = Planner::new(circuit, &topo, mode, &assignment);
        planner.run()?;
        let final_layout: Vec<usize> =
            (0..circuit.num_qubits).map(|l| planner.node_of(l)).collect();
        (
            planner.out,
            planner.nonlocal,
            planner.ebits,
            planner.cross_group_swaps,
            planner.swap_count,
            planner.initial_layout,
            final_layout,
        )
    };
    Ok(DistributedCircuit {
        circuit: out,
        topo,
        partition: assignment,
        nonlocal_sites: nonlocal,
        ebits_consumed: ebits,
        cross_group_swaps: cross,
        swap_count: swaps,
        initial_layout,
        final_layout,
    })
}

/// Window inspected when choosing teleport senders and walk directions.
const LOOKAHEAD_GATES: usize = 20;

/// Line-position sentinel for a qubit living on its chip's link pendant
/// rather than on the backbone.
const PARKED: usize = usize::MAX;

/// One open batched gate-teleport run.
struct Batch {
    /// Source gate indices in the run, in program order.
    members: Vec<usize>,
    next: usize,
    control: usize,
    e_ctl: usize,
    e_tgt: usize,
    tgt_chip: usize,
    m1: usize,
    m2: usize,
}

struct Planner<'a> {
    src: &'a Circuit,
    topo: &'a MultiChipTopology,
    mode: TeleportMode,
    out: Circuit,
    /// Line position -> logical qubit, per chip.
    occ: [Vec<Option<usize>>; 2],
    /// Logical qubit -> (chip, line position). Position [`PARKED`] means
    /// the qubit sits on the chip's link pendant, off the backbone.
    loc: Vec<(usize, usize)>,
    /// Qubit currently parked on each chip's link pendant, if any.
    parked: [Option<usize>; 2],
    /// Index of each qubit's last two-qubit gate in `src`, or `usize::MAX`
    /// when it has none.
    last_active: Vec<usize>,
    initial_layout: Vec<usize>,
    nonlocal: Vec<(usize, TeleportMode)>,
    ebits: usize,
    cross_group_swaps: usize,
    swap_count: usize,
    next_cbit: usize,
    in_service: bool,
    batch: Option<Batch>,
}

impl<'a> Planner<'a> {
    fn new(
        src: &'a Circuit,
        topo: &'a MultiChipTopology,
        mode: TeleportMode,
        assignment: &PartitionAssignment,
    ) -> Self {
        let n = src.num_qubits;
        let mut occ = [
            vec![None; topo.chips[0].line.len()],
            vec![None; topo.chips[1].line.len()],
        ];
        let mut loc = vec![(0usize, 0usize); n];
        // Qubits assigned to a chip occupy a contiguous block at the head
        // of its line, in logical order.
        let mut counts = [0usize; 2];
        for l in 0..n {
            let chip = assignment.qubit_chip[l];
            let pos = counts[chip];
            counts[chip] += 1;
            occ[chip][pos] = Some(l);
            loc[l] = (chip, pos);
        }
        let initial_layout = (0..n).map(|l| topo.chips[loc[l].0].line[loc[l].1]).collect();
        let mut last_active = vec![usize::MAX; n];
        for (i, g) in src.gates.iter().enumerate() {
            if g.is_two_qubit() {
                last_active[g.q0()] = i;
                last_active[g.q1()] = i;
            }
        }
        let out = Circuit::new(src.name.clone(), topo.num_nodes(), src.num_cbits);
        Planner {
            src,
            topo,
            mode,
            out,
            occ,
            loc,
            initial_layout,
            nonlocal: Vec::new(),
            ebits: 0,
            cross_group_swaps: 0,
            swap_count: 0,
            next_cbit: src.num_cbits,
            in_service: false,
            batch: None,
            parked: [None, None],
            last_active,
        }
    }

    fn node_of(&self, logical: usize) -> usize {
        let (chip, pos) = self.loc[logical];
        if pos == PARKED {
            return self.topo.link_endpoint(chip);
        }
        self.topo.chips[chip].line[pos]
    }

    /// Line position used for distance estimates; a parked qubit counts as
    /// standing on its anchor.
    fn effective_pos(&self, logical: usize) -> usize {
        let (chip, pos) = self.loc[logical];
        if pos == PARKED {
            self.endpoint(chip).1
        } else {
            pos
        }
    }

    fn alloc_cbit(&mut self) -> usize {
        let c = self.next_cbit;
        self.next_cbit += 1;
        self.out.num_cbits = self.next_cbit;
        c
    }

    /// Emit a swap between adjacent line positions, updating occupancy.
    fn line_swap(&mut self, chip: usize, a: usize, b: usize) -> Result<()> {
        debug_assert_eq!(a.abs_diff(b), 1);
        let line = &self.topo.chips[chip].line;
        self.out.push(Gate::swap(line[a], line[b]))?;
        self.swap_count += 1;
        if self.in_service {
            self.cross_group_swaps += 1;
        }
        let (la, lb) = (self.occ[chip][a], self.occ[chip][b]);
        self.occ[chip][a] = lb;
        self.occ[chip][b] = la;
        if let Some(l) = la {
            self.loc[l] = (chip, b);
        }
        if let Some(l) = lb {
            self.loc[l] = (chip, a);
        }
        Ok(())
    }

    /// Walk `logical` to exactly `target` on its chip.
    fn walk_to(&mut self, logical: usize, target: usize) -> Result<()> {
        let (chip, mut pos) = self.loc[logical];
        debug_assert_ne!(pos, PARKED, "parked qubits must be unparked before walking");
        while pos != target {
            let next = if pos < target { pos + 1 } else { pos - 1 };
            self.line_swap(chip, pos, next)?;
            pos = next;
        }
        Ok(())
    }

    /// Shift occupants so that `pos` on `chip` holds no logical qubit.
    fn vacate(&mut self, chip: usize, pos: usize) -> Result<()> {
        if self.occ[chip][pos].is_none() {
            return Ok(());
        }
        let hole = (0..self.occ[chip].len())
            .filter(|&h| self.occ[chip][h].is_none())
            .min_by_key(|&h| (h.abs_diff(pos), h))
            .ok_or_else(|| {
                Error::Distribution(format!("chip {chip} has no free backbone node left"))
            })?;
        if hole > pos {
            for h in (pos..hole).rev() {
                self.line_swap(chip, h, h + 1)?;
            }
        } else {
            for h in hole..pos {
                self.line_swap(chip, h + 1, h)?;
            }
        }
        Ok(())
    }

    /// Move a qubit parked on `chip`'s link pendant onto the backbone,
    /// freeing the pendant for the next entanglement round. No-op when
    /// nothing is parked.
    fn unpark(&mut self, chip: usize) -> Result<()> {
        let Some(q) = self.parked[chip] else {
            return Ok(());
        };
        let (pendant, apos, _) = self.endpoint(chip);
        self.vacate(chip, apos)?;
        let anchor_node = self.topo.chips[chip].line[apos];
        self.out.push(Gate::swap(pendant, anchor_node))?;
        self.swap_count += 1;
        if self.in_service {
            self.cross_group_swaps += 1;
        }
        self.parked[chip] = None;
        self.occ[chip][apos] = Some(q);
        self.loc[q] = (chip, apos);
        Ok(())
    }

    /// The link endpoint of `chip` as (global node, anchor/stand position,
    /// endpoint-is-a-pendant flag). For a pendant endpoint the data qubit
    /// stands on the anchor; for a backbone endpoint it stands next to it.
    fn endpoint(&self, chip: usize) -> (usize, usize, bool) {
        let node = self.topo.link_endpoint(chip);
        let t = &self.topo.chips[chip];
        if let Some(p) = t.line.iter().position(|&n| n == node) {
            (node, p, false)
        } else {
            let anchor = *t
                .dangling
                .iter()
                .find(|&(_, &pendant)| pendant == node)
                .expect("link pendant has an anchor")
                .0;
            let apos = t.line.iter().position(|&n| n == anchor).expect("anchor on line");
            (node, apos, true)
        }
    }

    /// Free the endpoint's node (backbone endpoints only) and return the
    /// position where `walker` must stand to touch it. The walker's position
    /// is read after the eviction, which may itself have displaced it.
    fn prepare_endpoint(&mut self, chip: usize, walker: usize) -> Result<usize> {
        let (_, pos, is_pendant) = self.endpoint(chip);
        if is_pendant {
            return Ok(pos);
        }
        self.vacate(chip, pos)?;
        let from = self.loc[walker].1;
        debug_assert_ne!(from, PARKED, "walker must be on the backbone");
        let len = self.topo.chips[chip].line.len();
        debug_assert_ne!(from, pos);
        let stand = if from < pos {
            pos - 1
        } else if pos + 1 < len {
            pos + 1
        } else {
            pos - 1
        };
        Ok(stand)
    }

    fn run(&mut self) -> Result<()> {
        for idx in 0..self.src.len() {
            let gate = self.src.gates[idx].clone();
            if let Some(batch) = self.batch.as_ref() {
                if batch.members.get(batch.next) == Some(&idx) {
                    self.serve_batch_member(idx, &gate)?;
                    continue;
                }
                if gate.is_two_qubit() || gate.qubits().contains(&batch.control) {
                    return Err(Error::Distribution(
                        "internal: gate interrupts an open teleport batch".into(),
                    ));
                }
            }
            if !gate.is_two_qubit() {
                let node = self.node_of(gate.q0());
                self.out.push(gate.mapped(|_| node))?;
                continue;
            }
            let (a, b) = (gate.q0(), gate.q1());
            if self.loc[a].0 == self.loc[b].0 {
                self.serve_intra(idx, &gate)?;
            } else {
                self.serve_cut(idx, &gate)?;
            }
        }
        if self.batch.is_some() {
            return Err(Error::Distribution("internal: teleport batch left open".into()));
        }
        Ok(())
    }

    /// Mean current position of `q`'s upcoming same-chip partners.
    fn centroid(&self, after: usize, q: usize) -> Option<f64> {
        let chip = self.loc[q].0;
        let mut sum = 0.0;
        let mut count = 0usize;
        for g in self.src.gates[after + 1..].iter().take(LOOKAHEAD_GATES) {
            if !g.is_two_qubit() {
                continue;
            }
            let partner = if g.q0() == q {
                g.q1()
            } else if g.q1() == q {
                g.q0()
            } else {
                continue;
            };
            if self.loc[partner].0 == chip {
                sum += self.effective_pos(partner) as f64;
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    /// Same-chip two-qubit gate: walk one operand adjacent, emit.
    fn serve_intra(&mut self, idx: usize, gate: &Gate) -> Result<()> {
        let (a, b) = (gate.q0(), gate.q1());
        // An operand parked on the link pendant is reachable only through
        // its anchor, so the other operand walks onto the anchor slot.
        if self.loc[a].1 == PARKED || self.loc[b].1 == PARKED {
            let (settled, walker) = if self.loc[a].1 == PARKED { (a, b) } else { (b, a) };
            let (_, apos, _) = self.endpoint(self.loc[settled].0);
            self.walk_to(walker, apos)?;
            let (na, nb) = (self.node_of(a), self.node_of(b));
            self.out.push(remap_two(gate, na, nb))?;
            return Ok(());
        }
        let (chip, pa) = self.loc[a];
        let pb = self.loc[b].1;
        if pa.abs_diff(pb) > 1 {
            let score = |c: Option<f64>, partner: usize| {
                c.map_or(f64::INFINITY, |c| (c - partner as f64).abs())
            };
            let (sa, sb) = (
                score(self.centroid(idx, a), pb),
                score(self.centroid(idx, b), pa),
            );
            let mover = if sa < sb {
                a
            } else if sb < sa {
                b
            } else if pa < pb {
                a
            } else {
                b
            };
            let target_pos = self.loc[if mover == a { b } else { a }].1;
            let (_, mut mp) = self.loc[mover];
            while mp.abs_diff(target_pos) > 1 {
                let next = if mp < target_pos { mp + 1 } else { mp - 1 };
                self.line_swap(chip, mp, next)?;
                mp = next;
            }
        }
        let (na, nb) = (self.node_of(a), self.node_of(b));
        self.out.push(remap_two(gate, na, nb))?;
        Ok(())
    }

    fn serve_cut(&mut self, idx: usize, gate: &Gate) -> Result<()> {
        match self.mode {
            TeleportMode::StateTeleport => self.state_teleport(idx, gate),
            TeleportMode::GateTeleport => {
                if !gate.kind.is_controlled() {
                    return Err(Error::UnsupportedLowering(format!(
                        "gate teleport cannot lower {:?}",
                        gate.kind
                    )));
                }
                self.open_gate_teleport(idx, gate, false)
            }
            TeleportMode::GateTeleportBatched => {
                if !gate.kind.is_controlled() {
                    return Err(Error::UnsupportedLowering(format!(
                        "gate teleport cannot lower {:?}",
                        gate.kind
                    )));
                }
                self.open_gate_teleport(idx, gate, true)
            }
            TeleportMode::Auto => {
                if gate.kind.is_controlled() {
                    self.open_gate_teleport(idx, gate, true)
                } else {
                    self.state_teleport(idx, gate)
                }
            }
        }
    }

    /// Move one operand's state across the link, then serve the gate locally.
    fn state_teleport(&mut self, idx: usize, gate: &Gate) -> Result<()> {
        self.in_service = true;
        let (a, b) = (gate.q0(), gate.q1());
        // The operand with more upcoming work on the far chip goes.
        let sender = {
            let score = |q: usize| -> i64 {
                let own = self.loc[q].0;
                let mut s = 0i64;
                for g in self.src.gates[idx + 1..].iter().take(LOOKAHEAD_GATES) {
                    if !g.is_two_qubit() {
                        continue;
                    }
                    let partner = if g.q0() == q {
                        g.q1()
                    } else if g.q1() == q {
                        g.q0()
                    } else {
                        continue;
                    };
                    s += if self.loc[partner].0 == own { -1 } else { 1 };
                }
                s
            };
            if score(b) > score(a) {
                b
            } else {
                a
            }
        };
        let chip_a = self.loc[sender].0;
        let chip_b = 1 - chip_a;
        // Both pendants must be in |0> for the EPR preparation, and a parked
        // sender has to stand on the backbone for the protocol.
        self.unpark(chip_a)?;
        self.unpark(chip_b)?;
        let (e_a, _, _) = self.endpoint(chip_a);
        let (e_b, bpos, b_pendant) = self.endpoint(chip_b);

        // Receiver side first: a backbone endpoint must be empty before the
        // EPR preparation.
        if !b_pendant {
            self.vacate(chip_b, bpos)?;
        }
        let stand_a = self.prepare_endpoint(chip_a, sender)?;
        self.walk_to(sender, stand_a)?;
        let sender_node = self.node_of(sender);

        let c_z = self.alloc_cbit();
        let c_x = self.alloc_cbit();
        self.out.push(Gate::epr_prep(e_a, e_b))?;
        self.out.push(Gate::cx(sender_node, e_a))?;
        self.out.push(Gate::h(sender_node))?;
        self.out.push(Gate::measure(sender_node, c_z))?;
        self.out.push(Gate::measure(e_a, c_x))?;
        self.out.push(Gate::corr_x(e_b, c_x))?;
        self.out.push(Gate::corr_z(e_b, c_z))?;
        // Helper resets: measured wires go back to |0>.
        self.out.push(Gate::corr_x(e_a, c_x))?;
        self.out.push(Gate::corr_x(sender_node, c_z))?;
        self.ebits += 1;

        // Bookkeeping: sender's old node is free, its state sits on e_b.
        let (chip, old_pos) = self.loc[sender];
        self.occ[chip][old_pos] = None;
        // An arrival whose two-qubit work ends with this gate stays parked
        // on the pendant instead of displacing the data block; it is
        // unparked lazily if the pendant is needed again. Arrivals with
        // remaining work join the block, where serving is a cheap sweep.
        let idle = idx >= self.last_active[sender];
        if b_pendant && idle {
            self.parked[chip_b] = Some(sender);
            self.loc[sender] = (chip_b, PARKED);
        } else {
            if b_pendant {
                // Pull the arrival onto the backbone before anything else
                // walks.
                self.vacate(chip_b, bpos)?;
                let anchor_node = self.topo.chips[chip_b].line[bpos];
                self.out.push(Gate::swap(e_b, anchor_node))?;
                self.swap_count += 1;
                self.cross_group_swaps += 1;
            }
            self.occ[chip_b][bpos] = Some(sender);
            self.loc[sender] = (chip_b, bpos);
        }

        self.nonlocal.push((idx, TeleportMode::StateTeleport));
        // Operands now share a chip; the gate itself is ordinary transport.
        self.serve_intra(idx, gate)?;
        self.in_service = false;
        Ok(())
    }

    /// Start a gate-teleport run: entangle the control with the far link
    /// endpoint, then serve the first member.
    fn open_gate_teleport(&mut self, idx: usize, gate: &Gate, batched: bool) -> Result<()> {
        self.in_service = true;
        let (control, _target) = control_split(gate, None)
            .expect("cut controlled gate has a control operand");
        let ctl_chip = self.loc[control].0;
        let tgt_chip = 1 - ctl_chip;

        let members = if batched {
            self.scan_run(idx, control, tgt_chip)
        } else {
            vec![idx]
        };

        // Pendants must be in |0> before the EPR preparation; this also puts
        // a parked control back on the backbone.
        self.unpark(ctl_chip)?;
        self.unpark(tgt_chip)?;
        let (e_ctl, _, _) = self.endpoint(ctl_chip);
        let (e_tgt, tpos, tgt_pendant) = self.endpoint(tgt_chip);
        if !tgt_pendant {
            self.vacate(tgt_chip, tpos)?;
        }
        let stand_ctl = self.prepare_endpoint(ctl_chip, control)?;
        self.walk_to(control, stand_ctl)?;
        let control_node = self.node_of(control);

        let m1 = self.alloc_cbit();
        let m2 = self.alloc_cbit();
        self.out.push(Gate::epr_prep(e_ctl, e_tgt))?;
        self.out.push(Gate::cx(control_node, e_ctl))?;
        self.out.push(Gate::measure(e_ctl, m1))?;
        self.out.push(Gate::corr_x(e_tgt, m1))?;
        self.ebits += 1;

        self.batch = Some(Batch {
            members,
            next: 0,
            control,
            e_ctl,
            e_tgt,
            tgt_chip,
            m1,
            m2,
        });
        let first = gate.clone();
        self.serve_batch_member(idx, &first)
    }

    fn serve_batch_member(&mut self, idx: usize, gate: &Gate) -> Result<()> {
        let (control, e_tgt, tgt_chip) = {
            let b = self.batch.as_ref().expect("batch open");
            (b.control, b.e_tgt, b.tgt_chip)
        };
        let (_, target) = control_split(gate, Some(control))
            .expect("member has the batch control");
        // Stand the target next to the endpoint on its own side.
        let (_, tpos, tgt_pendant) = self.endpoint(tgt_chip);
        let stand = if tgt_pendant {
            tpos
        } else {
            let from = self.loc[target].1;
            let len = self.topo.chips[tgt_chip].line.len();
            if from < tpos {
                tpos - 1
            } else if tpos + 1 < len {
                tpos + 1
            } else {
                tpos - 1
            }
        };
        self.walk_to(target, stand)?;
        let target_node = self.node_of(target);
        self.out.push(remap_two(gate, e_tgt, target_node))?;

        let batched_label = {
            let b = self.batch.as_mut().expect("batch open");
            b.next += 1;
            b.members.len() > 1
        };
        self.nonlocal.push((
            idx,
            if batched_label {
                TeleportMode::GateTeleportBatched
            } else {
                TeleportMode::GateTeleport
            },
        ));

        let done = {
            let b = self.batch.as_ref().expect("batch open");
            b.next == b.members.len()
        };
        if done {
            let b = self.batch.take().expect("batch open");
            let control_node = self.node_of(b.control);
            self.out.push(Gate::h(b.e_tgt))?;
            self.out.push(Gate::measure(b.e_tgt, b.m2))?;
            self.out.push(Gate::corr_z(control_node, b.m2))?;
            // Helper resets.
            self.out.push(Gate::corr_x(b.e_ctl, b.m1))?;
            self.out.push(Gate::corr_x(b.e_tgt, b.m2))?;
            self.in_service = false;
        }
        Ok(())
    }

    /// Maximal run of upcoming gates sharing this control and target chip.
    /// The scan stops at any gate touching the control and at any two-qubit
    /// gate that is not itself a member; single-qubit gates on other wires
    /// may sit in the gaps (they cannot disturb the pinned endpoints).
    fn scan_run(&self, start: usize, control: usize, tgt_chip: usize) -> Vec<usize> {
        let mut members = vec![start];
        for (off, g) in self.src.gates[start + 1..].iter().enumerate() {
            let j = start + 1 + off;
            if g.is_two_qubit() {
                if g.kind.is_controlled() {
                    if let Some((c, t)) = control_split(g, Some(control)) {
                        if c == control && self.loc[t].0 == tgt_chip {
                            members.push(j);
                            continue;
                        }
                    }
                }
                break;
            }
            if g.qubits().contains(&control) {
                break;
            }
        }
        members
    }
}

/// Split a controlled gate into (control, target) logical qubits. CX fixes
/// the control in slot 0; CZ/CP are symmetric, so when `want_control` is
/// given either slot may take the control role.
fn control_split(gate: &Gate, want_control: Option<usize>) -> Option<(usize, usize)> {
    let (a, b) = (gate.q0(), gate.q1());
    match gate.kind {
        GateKind::Cx => match want_control {
            None => Some((a, b)),
            Some(c) if c == a => Some((a, b)),
            Some(_) => None,
        },
        GateKind::Cz | GateKind::Cp => match want_control {
            None => Some((a, b)),
            Some(c) if c == a => Some((a, b)),
            Some(c) if c == b => Some((b, a)),
            Some(_) => None,
        },
        _ => None,
    }
}

/// The same gate kind and parameter over new operand nodes.
fn remap_two(gate: &Gate, a: usize, b: usize) -> Gate {
    let mut g = gate.mapped(|q| if q == gate.q0() { a } else { b });
    debug_assert_eq!(g.q0(), a);
    debug_assert_eq!(g.q1(), b);
    g.cbit = gate.cbit;
    g
}

/// Check that the lowered circuit acts like the original.
///
/// Requires a measurement-free source circuit. Every measurement branch of
/// the lowered circuit (with corrections applied) must reproduce the source
/// output on the data qubits' final nodes, with all helper wires back in
/// |0>, up to global phase.
pub fn verify_distribution(
    original: &Circuit,
    dist: &DistributedCircuit,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    verify_lowered(
        original,
        &dist.circuit,
        &dist.initial_layout,
        &dist.final_layout,
        trials,
        seed,
        tol,
    )
}

/// [`verify_distribution`] over bare parts, for callers that load the
/// lowered circuit and its layouts from files.
pub fn verify_lowered(
    original: &Circuit,
    lowered: &Circuit,
    initial_layout: &[usize],
    final_layout: &[usize],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    use rand::SeedableRng;
    if crate::sim::measure_count(original) != 0 {
        return Err(Error::Simulation(
            "distribution verification requires a measurement-free source circuit".into(),
        ));
    }
    // Dense renumbering of every node the lowered circuit can involve.
    let mut active: Vec<usize> = lowered
        .gates
        .iter()
        .flat_map(|g| g.qubits().iter().copied())
        .chain(initial_layout.iter().copied())
        .chain(final_layout.iter().copied())
        .collect();
    active.sort_unstable();
    active.dedup();
    if active.len() > MAX_QUBITS {
        return Err(Error::Simulation(format!(
            "{} active nodes exceed the simulable limit {MAX_QUBITS}",
            active.len()
        )));
    }
    let mut dense = vec![usize::MAX; lowered.num_qubits];
    for (i, &n) in active.iter().enumerate() {
        dense[n] = i;
    }
    let lowered = lowered.remap_qubits(&dense, active.len())?;
    let init: Vec<usize> = initial_layout.iter().map(|&n| dense[n]).collect();
    let fin: Vec<usize> = final_layout.iter().map(|&n| dense[n]).collect();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let input = StateVec::random(original.num_qubits, &mut rng)?;
        let (expected, _) = simulate(original, &input, &[])?;
        let expected = expected.embedded(active.len(), &fin)?;
        let lowered_input = input.embedded(active.len(), &init)?;
        let mut total_prob = 0.0;
        for (_, state, prob) in all_branches(&lowered, &lowered_input)? {
            if prob < 1e-12 {
                continue;
            }
            total_prob += prob;
            if (1.0 - state.fidelity(&expected)).abs() > tol {
                return Ok(false);
            }
        }
        if (total_prob - 1.0).abs() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{qaoa, qft, ProblemGraph};
    use crate::topology::{heavy_hex, link_chips, to_lnn};

    fn two_chips(kind: LinkKind, seed: u64) -> MultiChipTopology {
        let chip = to_lnn(&heavy_hex(3).unwrap()).unwrap();
        link_chips(&chip, &chip, kind, seed).unwrap()
    }

    // Two 5-node chips: a 4-node backbone with one pendant anchored at the
    // line's head. Small enough that every node fits in the simulator even
    // when a random link forces long walks.
    fn tiny_chips(kind: LinkKind, seed: u64) -> MultiChipTopology {
        let chip = crate::topology::LnnTopology {
            line: vec![0, 1, 2, 3],
            dangling: [(0, 4)].into_iter().collect(),
            removed_edges: Default::default(),
        };
        link_chips(&chip, &chip, kind, seed).unwrap()
    }

    #[test]
    fn partition_splits_qft_in_half() {
        let c = qft(10).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let p = partition(&c, &topo).unwrap();
        assert_eq!(&p.qubit_chip[..5], &[0, 0, 0, 0, 0]);
        assert_eq!(&p.qubit_chip[5..], &[1, 1, 1, 1, 1]);
        assert_eq!(p.cut_gates.len(), 25);
    }

    #[test]
    fn partition_single_qubit_circuit() {
        let mut c = Circuit::new("t", 1, 0);
        c.push(Gate::h(0)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let p = partition(&c, &topo).unwrap();
        assert_eq!(p.qubit_chip, vec![0]);
        assert!(p.cut_gates.is_empty());
    }

    #[test]
    fn partition_ring_qaoa_has_two_cut_edges() {
        let g = ProblemGraph::ring(10).unwrap();
        let c = qaoa(&g, 1, 1).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let p = partition(&c, &topo).unwrap();
        assert_eq!(p.cut_gates.len(), 2);
    }

    #[test]
    fn partition_rejects_oversized_circuits() {
        let c = qft(40).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        assert!(partition(&c, &topo).is_err());
    }

    #[test]
    fn zero_cut_gates_consume_nothing() {
        let mut c = Circuit::new("t", 4, 0);
        c.push(Gate::cx(0, 1)).unwrap();
        c.push(Gate::cx(2, 3)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(&c, &topo, TeleportMode::Auto, LinkKind::DanglingLink, 0).unwrap();
        assert_eq!(d.ebits_consumed, 0);
        assert_eq!(d.cross_group_swaps, 0);
        assert!(d.nonlocal_sites.is_empty());
        assert!(!d.circuit.gates.iter().any(|g| g.kind == GateKind::EprPrep));
    }

    #[test]
    fn gate_teleport_on_rzz_is_unsupported() {
        let mut c = Circuit::new("t", 2, 0);
        c.push(Gate::rzz(0.3, 0, 1)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let err =
            distribute(&c, &topo, TeleportMode::GateTeleport, LinkKind::DanglingLink, 0)
                .unwrap_err();
        assert!(matches!(err, Error::UnsupportedLowering(_)));
    }

    #[test]
    fn single_cut_cx_gate_teleport_shape() {
        let mut c = Circuit::new("t", 2, 0);
        c.push(Gate::cx(0, 1)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(&c, &topo, TeleportMode::GateTeleport, LinkKind::DanglingLink, 0)
            .unwrap();
        assert_eq!(d.ebits_consumed, 1);
        let kinds: Vec<GateKind> = d.circuit.gates.iter().map(|g| g.kind).collect();
        assert_eq!(kinds.iter().filter(|&&k| k == GateKind::EprPrep).count(), 1);
        assert_eq!(kinds.iter().filter(|&&k| k == GateKind::Measure).count(), 2);
        assert!(kinds.contains(&GateKind::CorrX));
        assert!(kinds.contains(&GateKind::CorrZ));
        assert_eq!(d.nonlocal_sites, vec![(0, TeleportMode::GateTeleport)]);
        // Both data qubits stay on their home chips.
        assert_eq!(d.topo.chip_of(d.final_layout[0]), 0);
        assert_eq!(d.topo.chip_of(d.final_layout[1]), 1);
    }

    #[test]
    fn batching_shares_one_ebit_across_a_run() {
        let mut c = Circuit::new("t", 4, 0);
        c.push(Gate::cx(0, 2)).unwrap();
        c.push(Gate::cx(0, 3)).unwrap();
        c.push(Gate::cx(0, 2)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let batched = distribute(
            &c,
            &topo,
            TeleportMode::GateTeleportBatched,
            LinkKind::DanglingLink,
            0,
        )
        .unwrap();
        assert_eq!(batched.ebits_consumed, 1);
        assert!(batched
            .nonlocal_sites
            .iter()
            .all(|&(_, m)| m == TeleportMode::GateTeleportBatched));
        let unbatched =
            distribute(&c, &topo, TeleportMode::GateTeleport, LinkKind::DanglingLink, 0).unwrap();
        assert_eq!(unbatched.ebits_consumed, 3);
    }

    #[test]
    fn run_scan_stops_at_control_touches_and_foreign_two_qubit_gates() {
        let mut c = Circuit::new("t", 4, 0);
        c.push(Gate::cx(0, 2)).unwrap();
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::cx(0, 3)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(
            &c,
            &topo,
            TeleportMode::GateTeleportBatched,
            LinkKind::DanglingLink,
            0,
        )
        .unwrap();
        // H on the control splits the run: two separate e-bits.
        assert_eq!(d.ebits_consumed, 2);
    }

    #[test]
    fn distributed_gates_respect_the_coupling() {
        let c = qft(6).unwrap();
        for kind in [LinkKind::DanglingLink, LinkKind::RandomLink] {
            for mode in [
                TeleportMode::Auto,
                TeleportMode::StateTeleport,
                TeleportMode::GateTeleport,
                TeleportMode::GateTeleportBatched,
            ] {
                let topo = two_chips(kind, 9);
                let d = distribute(&c, &topo, mode, kind, 9).unwrap();
                for g in &d.circuit.gates {
                    if g.is_two_qubit() {
                        assert!(
                            d.topo.is_coupled(g.q0(), g.q1()),
                            "{:?} on ({}, {}) off-coupling under {kind:?}/{mode:?}",
                            g.kind,
                            g.q0(),
                            g.q1()
                        );
                    }
                }
                assert_eq!(
                    d.ebits_consumed,
                    d.circuit.gates.iter().filter(|g| g.kind == GateKind::EprPrep).count()
                );
            }
        }
    }

    #[test]
    fn state_teleport_preserves_semantics() {
        let c = qft(4).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d =
            distribute(&c, &topo, TeleportMode::StateTeleport, LinkKind::DanglingLink, 0).unwrap();
        assert!(verify_distribution(&c, &d, 5, 17, 1e-9).unwrap());
    }

    #[test]
    fn gate_teleport_preserves_semantics() {
        let c = qft(4).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(&c, &topo, TeleportMode::GateTeleportBatched, LinkKind::DanglingLink, 0)
            .unwrap();
        assert!(verify_distribution(&c, &d, 5, 18, 1e-9).unwrap());
    }

    #[test]
    fn random_link_preserves_semantics() {
        let c = qft(4).unwrap();
        for seed in [0u64, 1, 2] {
            let topo = tiny_chips(LinkKind::RandomLink, seed);
            let d = distribute(&c, &topo, TeleportMode::Auto, LinkKind::RandomLink, seed).unwrap();
            assert!(verify_distribution(&c, &d, 3, seed, 1e-9).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn mixed_kind_cut_gates_preserve_semantics() {
        let mut c = Circuit::new("t", 4, 0);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::h(2)).unwrap();
        c.push(Gate::rzz(0.7, 0, 2)).unwrap();
        c.push(Gate::cx(1, 3)).unwrap();
        c.push(Gate::cp(0.4, 0, 3)).unwrap();
        c.push(Gate::rx(0.2, 2)).unwrap();
        c.push(Gate::cz(2, 1)).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(&c, &topo, TeleportMode::Auto, LinkKind::DanglingLink, 0).unwrap();
        assert!(verify_distribution(&c, &d, 5, 23, 1e-9).unwrap());
    }

    #[test]
    fn dangling_beats_random_on_mean_qft_cross_group_swaps() {
        // Individual random draws can land the link right beside the data
        // cluster, so the comparison is on the seed mean.
        let c = qft(8).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let dangling =
            distribute(&c, &topo, TeleportMode::StateTeleport, LinkKind::DanglingLink, 0).unwrap();
        let seeds: Vec<u64> = (0..8).collect();
        let mut total = 0usize;
        for &seed in &seeds {
            let r = distribute(&c, &topo, TeleportMode::StateTeleport, LinkKind::RandomLink, seed)
                .unwrap();
            total += r.cross_group_swaps;
        }
        let mean = total as f64 / seeds.len() as f64;
        assert!(
            (dangling.cross_group_swaps as f64) < mean,
            "dangling {} not below random mean {mean}",
            dangling.cross_group_swaps
        );
    }

    #[test]
    fn sidecar_round_trips_through_json() {
        let c = qft(4).unwrap();
        let topo = two_chips(LinkKind::DanglingLink, 0);
        let d = distribute(&c, &topo, TeleportMode::Auto, LinkKind::DanglingLink, 0).unwrap();
        let text = serde_json::to_string(&d.sidecar()).unwrap();
        let back: DistributionSidecar = serde_json::from_str(&text).unwrap();
        assert_eq!(back.ebits_consumed, d.ebits_consumed);
        assert_eq!(back.nonlocal_sites, d.nonlocal_sites);
    }
}
