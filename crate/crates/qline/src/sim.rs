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

//! Dense statevector simulator used as the correctness oracle.
//!
//! Measurements are never sampled: [`simulate`] takes an explicit outcome
//! assignment (one bool per MEASURE in program order) and returns that
//! branch's post-measurement state together with its probability, so
//! teleportation identities can be checked exactly, branch by branch.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Hard cap on simulated register width (2^14 amplitudes).
pub const MAX_QUBITS: usize = 14;

const SUPPORT_TOL: f64 = 1e-9;

/// Dense state over `2^num_qubits` amplitudes. Qubit `q` is bit `q` of the
/// amplitude index (little-endian).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec {
    num_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl StateVec {
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Simulation(format!(
                "register of {num_qubits} qubits exceeds the {MAX_QUBITS}-qubit simulator cap"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange(format!("basis index {index} (dim {dim})")));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Ok(StateVec { num_qubits, amps })
    }

    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Simulation(format!(
                "register of {num_qubits} qubits exceeds the {MAX_QUBITS}-qubit simulator cap"
            )));
        }
        if amps.len() != 1 << num_qubits {
            return Err(Error::Simulation(format!(
                "amplitude vector of length {} does not match {num_qubits} qubits",
                amps.len()
            )));
        }
        Ok(StateVec { num_qubits, amps })
    }

    /// Normalized state with uniformly random amplitude components. Adequate
    /// for equivalence spot checks; makes no claim of Haar uniformity.
    pub fn random(num_qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        let dim = 1usize << num_qubits;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            amps.push(Complex64::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
        }
        let mut s = Self::from_amplitudes(num_qubits, amps)?;
        s.normalize();
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &StateVec) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &StateVec) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Place this state's qubits at `positions` inside a fresh
    /// `total_qubits`-wide register, all other qubits |0>.
    pub fn embedded(&self, total_qubits: usize, positions: &[usize]) -> Result<StateVec> {
        if positions.len() != self.num_qubits {
            return Err(Error::Simulation(format!(
                "{} positions given for a {}-qubit state",
                positions.len(),
                self.num_qubits
            )));
        }
        let mut seen = vec![false; total_qubits];
        for &p in positions {
            if p >= total_qubits || seen[p] {
                return Err(Error::Simulation(format!("bad embedding position {p}")));
            }
            seen[p] = true;
        }
        let mut out = StateVec::zero_state(total_qubits)?;
        out.amps[0] = Complex64::ZERO;
        for (x, &amp) in self.amps.iter().enumerate() {
            let mut y = 0usize;
            for (i, &p) in positions.iter().enumerate() {
                if x >> i & 1 == 1 {
                    y |= 1 << p;
                }
            }
            out.amps[y] = amp;
        }
        Ok(out)
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_unconditional(&mut self, kind: GateKind, qs: &[usize], param: Option<f64>) {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match kind {
            GateKind::H => self.apply_single(
                qs[0],
                [[c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)], [c(inv_sqrt2, 0.0), c(-inv_sqrt2, 0.0)]],
            ),
            GateKind::X | GateKind::CorrX => self.apply_single(
                qs[0],
                [[Complex64::ZERO, Complex64::ONE], [Complex64::ONE, Complex64::ZERO]],
            ),
            GateKind::Y => self.apply_single(
                qs[0],
                [[Complex64::ZERO, c(0.0, -1.0)], [c(0.0, 1.0), Complex64::ZERO]],
            ),
            GateKind::Z | GateKind::CorrZ => self.apply_single(
                qs[0],
                [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, -Complex64::ONE]],
            ),
            GateKind::Rx => {
                let h = param.unwrap() / 2.0;
                self.apply_single(
                    qs[0],
                    [[c(h.cos(), 0.0), c(0.0, -h.sin())], [c(0.0, -h.sin()), c(h.cos(), 0.0)]],
                );
            }
            GateKind::Ry => {
                let h = param.unwrap() / 2.0;
                self.apply_single(
                    qs[0],
                    [[c(h.cos(), 0.0), c(-h.sin(), 0.0)], [c(h.sin(), 0.0), c(h.cos(), 0.0)]],
                );
            }
            GateKind::Rz => {
                let h = param.unwrap() / 2.0;
                self.apply_single(
                    qs[0],
                    [
                        [Complex64::from_polar(1.0, -h), Complex64::ZERO],
                        [Complex64::ZERO, Complex64::from_polar(1.0, h)],
                    ],
                );
            }
            GateKind::Cx => {
                let (cb, tb) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            GateKind::Cz => {
                let mask = (1usize << qs[0]) | (1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & mask == mask {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            GateKind::Cp => {
                let mask = (1usize << qs[0]) | (1usize << qs[1]);
                let ph = Complex64::from_polar(1.0, param.unwrap());
                for i in 0..self.amps.len() {
                    if i & mask == mask {
                        self.amps[i] *= ph;
                    }
                }
            }
            GateKind::Rzz => {
                // exp(-i theta/2 Z(x)Z): equal bits pick up -theta/2,
                // unequal bits +theta/2.
                let h = param.unwrap() / 2.0;
                let same = Complex64::from_polar(1.0, -h);
                let diff = Complex64::from_polar(1.0, h);
                let (ab, bb) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    let equal = (i & ab != 0) == (i & bb != 0);
                    self.amps[i] *= if equal { same } else { diff };
                }
            }
            GateKind::Swap => {
                let (ab, bb) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & ab != 0 && i & bb == 0 {
                        self.amps.swap(i, i ^ (ab | bb));
                    }
                }
            }
            GateKind::Measure | GateKind::EprPrep => {
                unreachable!("handled by the caller")
            }
        }
    }

    /// Project qubit `q` onto `outcome` and renormalize. Returns the branch
    /// probability; a zero-probability branch leaves the all-zero state.
    pub fn measure(&mut self, q: usize, outcome: bool) -> f64 {
        let bit = 1usize << q;
        let mut prob = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::ZERO;
            }
        }
        if prob > 0.0 {
            let scale = 1.0 / prob.sqrt();
            for a in &mut self.amps {
                *a *= scale;
            }
        }
        prob
    }

    /// Overwrite the qubit pair with the Bell state (|00> + |11>)/sqrt(2).
    /// Both qubits must currently be |0> (within tolerance); this models
    /// entanglement distribution onto fresh communication qubits.
    pub fn prepare_bell(&mut self, a: usize, b: usize) -> Result<()> {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter().enumerate() {
            if i & mask != 0 && amp.norm() > SUPPORT_TOL {
                return Err(Error::Simulation(format!(
                    "entanglement preparation on qubits {a},{b} which are not in |0>"
                )));
            }
        }
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let s = self.amps[i] * inv_sqrt2;
                self.amps[i] = s;
                self.amps[i | mask] = s;
            }
        }
        Ok(())
    }
}

/// Number of MEASURE gates, i.e. the branch-vector length [`simulate`] wants.
pub fn measure_count(circuit: &Circuit) -> usize {
    circuit.gates.iter().filter(|g| g.kind == GateKind::Measure).count()
}

/// Run `circuit` on `input` under a fixed measurement-outcome assignment.
///
/// `branch[k]` is the outcome of the k-th MEASURE in program order. Returns
/// the final state and the probability of that branch (product of the
/// projection probabilities). A zero-probability branch returns probability
/// 0 with an all-zero state.
pub fn simulate(circuit: &Circuit, input: &StateVec, branch: &[bool]) -> Result<(StateVec, f64)> {
    if input.num_qubits != circuit.num_qubits {
        return Err(Error::Simulation(format!(
            "{}-qubit input for a {}-qubit circuit",
            input.num_qubits, circuit.num_qubits
        )));
    }
    if branch.len() != measure_count(circuit) {
        return Err(Error::Simulation(format!(
            "branch assigns {} outcomes, circuit has {} measurements",
            branch.len(),
            measure_count(circuit)
        )));
    }
    circuit.validate()?;
    let mut state = input.clone();
    let mut cbits = vec![false; circuit.num_cbits];
    let mut prob = 1.0;
    let mut next_outcome = 0;
    for gate in &circuit.gates {
        match gate.kind {
            GateKind::Measure => {
                let outcome = branch[next_outcome];
                next_outcome += 1;
                prob *= state.measure(gate.q0(), outcome);
                cbits[gate.cbit.unwrap()] = outcome;
            }
            GateKind::EprPrep => {
                if prob > 0.0 {
                    state.prepare_bell(gate.q0(), gate.q1())?;
                }
            }
            GateKind::CorrX | GateKind::CorrZ => {
                if cbits[gate.cbit.unwrap()] {
                    state.apply_unconditional(gate.kind, gate.qubits(), None);
                }
            }
            _ => state.apply_unconditional(gate.kind, gate.qubits(), gate.param),
        }
    }
    Ok((state, prob))
}

/// Enumerate every measurement branch of `circuit` on `input`.
///
/// Returns one `(outcomes, state, probability)` entry per assignment;
/// probabilities sum to 1 for norm-1 inputs. Exponential in the measurement
/// count, intended for small verification circuits.
pub fn all_branches(
    circuit: &Circuit,
    input: &StateVec,
) -> Result<Vec<(Vec<bool>, StateVec, f64)>> {
    let m = measure_count(circuit);
    if m > 20 {
        return Err(Error::Simulation(format!(
            "branch enumeration over {m} measurements is infeasible"
        )));
    }
    let mut out = Vec::with_capacity(1 << m);
    for bits in 0..1usize << m {
        let branch: Vec<bool> = (0..m).map(|k| bits >> k & 1 == 1).collect();
        let (state, prob) = simulate(circuit, input, &branch)?;
        out.push((branch, state, prob));
    }
    Ok(out)
}

/// Full unitary of a measurement-free circuit, as `matrix[row][col]`,
/// assembled column-by-column from basis-state runs.
pub fn unitary_of(circuit: &Circuit) -> Result<Vec<Vec<Complex64>>> {
    if circuit.num_qubits > 10 {
        return Err(Error::Simulation(
            "unitary extraction capped at 10 qubits".into(),
        ));
    }
    if measure_count(circuit) > 0 {
        return Err(Error::Simulation(
            "unitary extraction requires a measurement-free circuit".into(),
        ));
    }
    let dim = 1usize << circuit.num_qubits;
    let mut matrix = vec![vec![Complex64::ZERO; dim]; dim];
    for col in 0..dim {
        let (state, _) = simulate(circuit, &StateVec::basis_state(circuit.num_qubits, col)?, &[])?;
        for row in 0..dim {
            matrix[row][col] = state.amps[row];
        }
    }
    Ok(matrix)
}

/// Check that two measurement-free circuits agree as channels, up to a wire
/// permutation and global phase, on `trials` seeded random states.
///
/// `perm[i]` gives the wire of `b` carrying what wire `i` of `a` carries; the
/// registers must have equal width. Tolerance applies to 1 - fidelity.
pub fn equivalent_up_to(
    a: &Circuit,
    b: &Circuit,
    perm: &[usize],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    use rand::SeedableRng;
    if a.num_qubits != b.num_qubits {
        return Err(Error::Simulation(
            "circuits of different width cannot be compared directly".into(),
        ));
    }
    if a.num_qubits > 10 {
        return Err(Error::Simulation("equivalence check capped at 10 qubits".into()));
    }
    if measure_count(a) > 0 || measure_count(b) > 0 {
        return Err(Error::Simulation(
            "equivalence check requires measurement-free circuits".into(),
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = a.num_qubits;
    let identity: Vec<usize> = (0..n).collect();
    for _ in 0..trials {
        let input = StateVec::random(n, &mut rng)?;
        let (out_a, _) = simulate(a, &input, &[])?;
        let (out_b, _) = simulate(b, &input, &[])?;
        let expected = if perm == identity.as_slice() {
            out_a
        } else {
            out_a.embedded(n, perm)?
        };
        if (1.0 - expected.fidelity(&out_b)).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Check a routed circuit against its logical source.
///
/// `routed` acts on a physical register at least as wide as `logical`;
/// `initial[i]` / `final_[i]` give logical qubit i's physical node before and
/// after. Every untouched physical node must hold |0> throughout, so the
/// comparison runs on the subregister of touched nodes plus the named
/// positions. Both circuits must be measurement-free.
pub fn routed_equivalent(
    logical: &Circuit,
    routed: &Circuit,
    initial: &[usize],
    final_: &[usize],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    use rand::SeedableRng;
    let n = logical.num_qubits;
    if initial.len() != n || final_.len() != n {
        return Err(Error::Simulation("layout tables must cover every logical qubit".into()));
    }
    if measure_count(logical) > 0 || measure_count(routed) > 0 {
        return Err(Error::Simulation(
            "routed equivalence requires measurement-free circuits".into(),
        ));
    }
    // Active physical nodes: everything touched, plus idle qubits' berths.
    let mut active: Vec<usize> = routed
        .gates
        .iter()
        .flat_map(|g| g.qubits().iter().copied())
        .chain(initial.iter().copied())
        .chain(final_.iter().copied())
        .collect();
    active.sort_unstable();
    active.dedup();
    if active.len() > MAX_QUBITS {
        return Err(Error::Simulation(format!(
            "routed circuit touches {} nodes, exceeding the {MAX_QUBITS}-qubit cap",
            active.len()
        )));
    }
    let mut to_dense = vec![usize::MAX; routed.num_qubits];
    for (dense, &node) in active.iter().enumerate() {
        to_dense[node] = dense;
    }
    let compact = routed.remap_qubits(&to_dense, active.len())?;
    let initial_d: Vec<usize> = initial.iter().map(|&p| to_dense[p]).collect();
    let final_d: Vec<usize> = final_.iter().map(|&p| to_dense[p]).collect();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let input = StateVec::random(n, &mut rng)?;
        let (logical_out, _) = simulate(logical, &input, &[])?;
        let expected = logical_out.embedded(active.len(), &final_d)?;
        let physical_in = input.embedded(active.len(), &initial_d)?;
        let (physical_out, _) = simulate(&compact, &physical_in, &[])?;
        if (1.0 - expected.fidelity(&physical_out)).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
