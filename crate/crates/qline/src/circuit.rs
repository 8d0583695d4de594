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

//! Gate-list circuit representation.
//!
//! A [`Circuit`] is a flat, ordered list of [`Gate`]s over `num_qubits` wires
//! and `num_cbits` classical bits. There is no register structure beyond the
//! two sizes; routers and the distribution pass reinterpret qubit indices as
//! physical node ids without changing the type.

use crate::error::{Error, Result};

/// The closed gate set understood by every pass in this crate.
///
/// `CorrX`/`CorrZ` are classically conditioned X/Z corrections (applied when
/// the referenced classical bit reads 1). `EprPrep` re-initialises a qubit
/// pair to the Bell state (|00> + |11>)/sqrt(2); both qubits must be in |0>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
    Cx,
    Cz,
    Cp,
    Rzz,
    Swap,
    Measure,
    CorrX,
    CorrZ,
    EprPrep,
}

impl GateKind {
    /// Number of qubit operands.
    pub fn arity(self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::Measure
            | GateKind::CorrX
            | GateKind::CorrZ => 1,
            GateKind::Cx
            | GateKind::Cz
            | GateKind::Cp
            | GateKind::Rzz
            | GateKind::Swap
            | GateKind::EprPrep => 2,
        }
    }

    /// Whether the kind carries an angle parameter (radians).
    pub fn has_param(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cp | GateKind::Rzz
        )
    }

    /// Whether the kind reads or writes a classical bit.
    pub fn has_cbit(self) -> bool {
        matches!(self, GateKind::Measure | GateKind::CorrX | GateKind::CorrZ)
    }

    /// Measurement, correction and entanglement-preparation bookkeeping, as
    /// opposed to computational gates.
    pub fn is_bookkeeping(self) -> bool {
        matches!(
            self,
            GateKind::Measure | GateKind::CorrX | GateKind::CorrZ | GateKind::EprPrep
        )
    }

    /// Controlled two-qubit kinds (the ones a remote gate lowering accepts).
    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::Cx | GateKind::Cz | GateKind::Cp)
    }
}

/// How SWAP gates are charged when counting gates.
///
/// `SwapAsOne` treats a SWAP as a single native instruction; `SwapAsThreeCx`
/// charges the standard three-CX decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateAccounting {
    SwapAsOne,
    SwapAsThreeCx,
}

impl GateAccounting {
    pub fn as_str(self) -> &'static str {
        match self {
            GateAccounting::SwapAsOne => "swap_as_one",
            GateAccounting::SwapAsThreeCx => "swap_as_three_cx",
        }
    }
}

/// One gate instance. `qubits[1]` is meaningful only for two-qubit kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub param: Option<f64>,
    pub cbit: Option<usize>,
}

impl Gate {
    fn one(kind: GateKind, q: usize) -> Self {
        Gate { kind, qubits: [q, usize::MAX], param: None, cbit: None }
    }

    fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Gate { kind, qubits: [a, b], param: None, cbit: None }
    }

    pub fn h(q: usize) -> Self {
        Gate::one(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Gate::one(GateKind::X, q)
    }
    pub fn y(q: usize) -> Self {
        Gate::one(GateKind::Y, q)
    }
    pub fn z(q: usize) -> Self {
        Gate::one(GateKind::Z, q)
    }
    pub fn rx(theta: f64, q: usize) -> Self {
        Gate { param: Some(theta), ..Gate::one(GateKind::Rx, q) }
    }
    pub fn ry(theta: f64, q: usize) -> Self {
        Gate { param: Some(theta), ..Gate::one(GateKind::Ry, q) }
    }
    pub fn rz(theta: f64, q: usize) -> Self {
        Gate { param: Some(theta), ..Gate::one(GateKind::Rz, q) }
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Gate::two(GateKind::Cx, c, t)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::two(GateKind::Cz, a, b)
    }
    pub fn cp(theta: f64, a: usize, b: usize) -> Self {
        Gate { param: Some(theta), ..Gate::two(GateKind::Cp, a, b) }
    }
    pub fn rzz(theta: f64, a: usize, b: usize) -> Self {
        Gate { param: Some(theta), ..Gate::two(GateKind::Rzz, a, b) }
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate::two(GateKind::Swap, a, b)
    }
    pub fn measure(q: usize, c: usize) -> Self {
        Gate { cbit: Some(c), ..Gate::one(GateKind::Measure, q) }
    }
    pub fn corr_x(q: usize, c: usize) -> Self {
        Gate { cbit: Some(c), ..Gate::one(GateKind::CorrX, q) }
    }
    pub fn corr_z(q: usize, c: usize) -> Self {
        Gate { cbit: Some(c), ..Gate::one(GateKind::CorrZ, q) }
    }
    pub fn epr_prep(a: usize, b: usize) -> Self {
        Gate::two(GateKind::EprPrep, a, b)
    }

    /// Qubit operands, length 1 or 2 depending on the kind.
    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn q0(&self) -> usize {
        self.qubits[0]
    }

    /// Second operand; panics for single-qubit kinds.
    pub fn q1(&self) -> usize {
        debug_assert_eq!(self.kind.arity(), 2);
        self.qubits[1]
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Same gate with qubit indices pushed through `map`.
    pub fn mapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut g = self.clone();
        g.qubits[0] = map(g.qubits[0]);
        if g.kind.arity() == 2 {
            g.qubits[1] = map(g.qubits[1]);
        }
        g
    }

    /// Whether the gate is diagonal in the computational basis as seen from
    /// operand `slot` (0 or 1). Diagonal-on-shared-wire gates commute with
    /// each other, which is what lets a swap network reorder phase cascades.
    pub fn diagonal_on(&self, slot: usize) -> bool {
        match self.kind {
            GateKind::Z | GateKind::Rz | GateKind::Cz | GateKind::Cp | GateKind::Rzz
            | GateKind::CorrZ => true,
            // CX acts diagonally on its control wire only.
            GateKind::Cx => slot == 0,
            _ => false,
        }
    }

    fn check(&self, num_qubits: usize, num_cbits: usize) -> Result<()> {
        for &q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::IndexOutOfRange(format!(
                    "qubit {q} (register holds {num_qubits})"
                )));
            }
        }
        if self.kind.arity() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidCircuit(format!(
                "two-qubit gate with repeated operand q[{}]",
                self.qubits[0]
            )));
        }
        if self.kind.has_param() && self.param.is_none() {
            return Err(Error::InvalidCircuit("missing angle parameter".into()));
        }
        if self.kind.has_cbit() {
            match self.cbit {
                None => return Err(Error::InvalidCircuit("missing classical bit".into())),
                Some(c) if c >= num_cbits => {
                    return Err(Error::IndexOutOfRange(format!(
                        "cbit {c} (register holds {num_cbits})"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// An ordered gate list over fixed-size quantum and classical registers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize, num_cbits: usize) -> Self {
        Circuit { name: name.into(), num_qubits, num_cbits, gates: Vec::new() }
    }

    /// Append a gate after validating it against the registers.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.num_qubits, self.num_cbits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append a gate that is known to be in range (generator-internal use).
    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.check(self.num_qubits, self.num_cbits).is_ok());
        self.gates.push(gate);
    }

    /// Validate every gate against the registers.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.check(self.num_qubits, self.num_cbits)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gate count under the given accounting, bookkeeping included.
    pub fn gate_count(&self, accounting: GateAccounting) -> usize {
        self.gate_count_with(accounting, true)
    }

    /// Gate count under the given accounting. With
    /// `include_bookkeeping = false`, MEASURE/CORR_X/CORR_Z/EPR_PREP do not
    /// contribute.
    pub fn gate_count_with(&self, accounting: GateAccounting, include_bookkeeping: bool) -> usize {
        self.gates
            .iter()
            .map(|g| {
                if g.kind.is_bookkeeping() {
                    usize::from(include_bookkeeping)
                } else if g.kind == GateKind::Swap {
                    match accounting {
                        GateAccounting::SwapAsOne => 1,
                        GateAccounting::SwapAsThreeCx => 3,
                    }
                } else {
                    1
                }
            })
            .sum()
    }

    /// Number of SWAP gates.
    pub fn swap_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Swap).count()
    }

    /// Greedy as-soon-as-possible layer count.
    ///
    /// Each wire (qubit or classical bit) remembers the layer of the last
    /// gate touching it; a gate lands one past the max over its wires.
    /// Treating classical bits as wires serialises a correction behind the
    /// measurement that feeds it.
    pub fn depth(&self) -> usize {
        let mut q_time = vec![0usize; self.num_qubits];
        let mut c_time = vec![0usize; self.num_cbits];
        let mut depth = 0;
        for g in &self.gates {
            let mut t = 0;
            for &q in g.qubits() {
                t = t.max(q_time[q]);
            }
            if let Some(c) = g.cbit {
                t = t.max(c_time[c]);
            }
            let t = t + 1;
            for &q in g.qubits() {
                q_time[q] = t;
            }
            if let Some(c) = g.cbit {
                c_time[c] = t;
            }
            depth = depth.max(t);
        }
        depth
    }

    /// Per-gate entangling cost at the CX basis, with same-pair fusion.
    ///
    /// Standalone costs: CX 1, CZ/CP/RZZ 2, SWAP 3, EPR_PREP 1; one-qubit
    /// gates, measurements and corrections cost 0. A SWAP immediately
    /// following a two-qubit gate on the same pair (no intervening gate on
    /// either wire) merges with it into one block, and the merged block
    /// costs exactly one CX more than the gate alone, so a riding SWAP is
    /// charged 1 instead of 3.
    fn cx_costs(&self) -> Vec<usize> {
        let mut last_on_wire: Vec<Option<usize>> = vec![None; self.num_qubits];
        let mut costs = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            let cost = match g.kind {
                GateKind::Cx => 1,
                GateKind::Cz | GateKind::Cp | GateKind::Rzz => 2,
                GateKind::EprPrep => 1,
                GateKind::Swap => {
                    let (a, b) = (g.q0(), g.q1());
                    let rides = match (last_on_wire[a], last_on_wire[b]) {
                        (Some(j), Some(k)) if j == k => {
                            let p = &self.gates[j];
                            p.is_two_qubit() && p.kind != GateKind::Swap
                        }
                        _ => false,
                    };
                    if rides { 1 } else { 3 }
                }
                _ => 0,
            };
            costs.push(cost);
            for &q in g.qubits() {
                last_on_wire[q] = Some(i);
            }
        }
        costs
    }

    /// Total entangling-gate cost at the CX basis (see [`Self::cx_depth`]
    /// for the fusion rule shared by both metrics).
    pub fn cx_count(&self) -> usize {
        self.cx_costs().iter().sum()
    }

    /// As-soon-as-possible depth counted in CX layers.
    ///
    /// Each gate advances its wires by its CX-basis cost: CX by 1, CZ/CP/RZZ
    /// by 2, SWAP by 3. One-qubit gates, measurements and corrections are
    /// free but still order their wires. A SWAP directly after a two-qubit
    /// gate on the same pair advances by 1, so a fused phase-and-swap block
    /// occupies three CX layers total rather than five.
    pub fn cx_depth(&self) -> usize {
        let costs = self.cx_costs();
        let mut q_time = vec![0usize; self.num_qubits];
        let mut c_time = vec![0usize; self.num_cbits];
        let mut depth = 0;
        for (g, &cost) in self.gates.iter().zip(&costs) {
            let mut t = 0;
            for &q in g.qubits() {
                t = t.max(q_time[q]);
            }
            if let Some(c) = g.cbit {
                t = t.max(c_time[c]);
            }
            let t = t + cost;
            for &q in g.qubits() {
                q_time[q] = t;
            }
            if let Some(c) = g.cbit {
                c_time[c] = t;
            }
            depth = depth.max(t);
        }
        depth
    }

    /// Copy with qubit `i` renamed to `map[i]`. `new_num_qubits` must cover
    /// the image of `map`.
    pub fn remap_qubits(&self, map: &[usize], new_num_qubits: usize) -> Result<Circuit> {
        let mut out = Circuit::new(self.name.clone(), new_num_qubits, self.num_cbits);
        for g in &self.gates {
            out.push(g.mapped(|q| map[q]))?;
        }
        Ok(out)
    }

    /// Restrict the register to the qubits actually touched by gates.
    ///
    /// Returns the compacted circuit and the dense-index -> original-index
    /// table. Useful for simulating routed circuits whose register spans a
    /// whole chip.
    pub fn compacted(&self) -> (Circuit, Vec<usize>) {
        let mut used: Vec<usize> = self
            .gates
            .iter()
            .flat_map(|g| g.qubits().iter().copied())
            .collect();
        used.sort_unstable();
        used.dedup();
        let mut to_dense = vec![usize::MAX; self.num_qubits];
        for (dense, &orig) in used.iter().enumerate() {
            to_dense[orig] = dense;
        }
        let mut out = Circuit::new(self.name.clone(), used.len(), self.num_cbits);
        for g in &self.gates {
            out.gates.push(g.mapped(|q| to_dense[q]));
        }
        (out, used)
    }
}
