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

//! Release gate: nine checks, one test and one printed pass line each.
//! Run with `--nocapture` to see the measured numbers behind each verdict.
//!
//! Cross-router comparisons count entangling work in a CX basis (CX 1;
//! CZ/CP/RZZ 2; SWAP 3, or 1 when it rides the preceding gate on the same
//! pair), the accounting under which both routers' outputs cost what a
//! CX-native device would pay. Line routes fuse almost every SWAP; the
//! baseline's transport SWAPs stand alone.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;
use std::time::Instant;

use qline::bench::{qaoa, qft, random_circuit, ProblemGraph};
use qline::circuit::{Circuit, Gate, GateAccounting};
use qline::dqc::{distribute, verify_distribution, TeleportMode};
use qline::experiment::{run_experiment, BenchmarkSpec, DistributionConfig, ExperimentConfig};
use qline::metrics::render_csv;
use qline::route::{
    place, route_exact, route_greedy, route_sabre, route_swap_network, CompiledCircuit,
    RouterConfig,
};
use qline::sim::routed_equivalent;
use qline::topology::{
    heavy_hex, link_chips, to_lnn, CouplingGraph, LinkKind, LnnTopology, MultiChipTopology,
};

fn path_chip(n: usize) -> LnnTopology {
    LnnTopology {
        line: (0..n).collect(),
        dangling: Default::default(),
        removed_edges: Default::default(),
    }
}

fn path_graph(n: usize) -> CouplingGraph {
    let mut g = CouplingGraph::new(n);
    for i in 0..n - 1 {
        g.add_edge(i, i + 1).unwrap();
    }
    g
}

fn tiny_chips() -> MultiChipTopology {
    let chip = LnnTopology {
        line: vec![0, 1, 2, 3],
        dangling: [(0, 4)].into_iter().collect(),
        removed_edges: Default::default(),
    };
    link_chips(&chip, &chip, LinkKind::DanglingLink, 0).unwrap()
}

fn route_linear(c: &Circuit, chip: &LnnTopology, network: bool) -> CompiledCircuit {
    let layout = place(c, chip).unwrap();
    if network {
        route_swap_network(c, chip, &layout).unwrap()
    } else {
        route_greedy(c, chip, &layout).unwrap()
    }
}

fn assert_equivalent(label: &str, source: &Circuit, compiled: &CompiledCircuit) {
    let ok = routed_equivalent(
        source,
        &compiled.circuit,
        compiled.initial_layout.as_table(),
        compiled.final_layout.as_table(),
        20,
        11,
        1e-9,
    )
    .unwrap_or_else(|e| panic!("criterion 1: {label}: oracle error: {e}"));
    assert!(ok, "criterion 1: {label}: output is not equivalent to its source");
}

#[test]
fn criterion_1_semantic_preservation() {
    let started = Instant::now();
    let mut circuits: Vec<Circuit> = (3..=6).map(|n| qft(n).unwrap()).collect();
    for seed in 0..10 {
        let n = 2 + (seed as usize % 5);
        circuits.push(random_circuit(n, 30, seed).unwrap());
    }
    let mut checked = 0;
    for c in &circuits {
        let chip = path_chip(c.num_qubits);
        assert_equivalent(&c.name, c, &route_linear(c, &chip, false));
        assert_equivalent(&c.name, c, &route_linear(c, &chip, true));
        let cfg = RouterConfig { trials: 2, ..RouterConfig::default() };
        let sabre = route_sabre(c, &path_graph(c.num_qubits + 2), &cfg).unwrap();
        assert_equivalent(&c.name, c, &sabre);
        checked += 3;
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 1 overran its 60 s budget: {secs:.1} s");
    println!(
        "criterion 1 (semantic preservation): PASS [{} circuits x 3 routers = {checked} outputs, 20 trials each, tol 1e-9, {secs:.1} s]",
        circuits.len()
    );
}

#[test]
fn criterion_2_teleportation_branch_algebra() {
    let started = Instant::now();
    // One straddling gate; each lowering measures two helper wires, so the
    // all-branch check walks exactly the 4 measurement branches.
    let device = tiny_chips();
    let mut cases = Vec::new();
    for (label, gate) in [
        ("cx", Gate::cx(0, 1)),
        ("cz", Gate::cz(0, 1)),
        ("cp", Gate::cp(0.7, 0, 1)),
    ] {
        for mode in [
            TeleportMode::StateTeleport,
            TeleportMode::GateTeleport,
            TeleportMode::GateTeleportBatched,
        ] {
            cases.push((label, gate.clone(), mode));
        }
    }
    // State teleportation must also carry non-controlled interactions.
    cases.push(("rzz", Gate::rzz(1.1, 0, 1), TeleportMode::StateTeleport));

    for (label, gate, mode) in cases {
        let mut c = Circuit::new("cut", 2, 0);
        c.push(gate).unwrap();
        let d = distribute(&c, &device, mode, LinkKind::DanglingLink, 0).unwrap();
        assert_eq!(
            qline::sim::measure_count(&d.circuit),
            2,
            "criterion 2: {label}/{mode:?}: lowering should measure twice"
        );
        let ok = verify_distribution(&c, &d, 50, 5, 1e-9).unwrap();
        assert!(ok, "criterion 2: {label} under {mode:?} broke a branch");
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 30.0, "criterion 2 overran its 30 s budget: {secs:.1} s");
    println!(
        "criterion 2 (teleportation branch algebra): PASS [4 branches x 50 random states per lowering, tol 1e-9, {secs:.1} s]"
    );
}

#[test]
fn criterion_3_coupling_conformance() {
    let mut scanned = 0usize;
    let mut scan = |circuit: &Circuit, coupled: &dyn Fn(usize, usize) -> bool, label: &str| {
        for (i, g) in circuit.gates.iter().enumerate() {
            if g.is_two_qubit() {
                scanned += 1;
                assert!(
                    coupled(g.q0(), g.q1()),
                    "criterion 3: {label}: gate {i} acts on uncoupled {} and {}",
                    g.q0(),
                    g.q1()
                );
            }
        }
    };

    let chip = to_lnn(&heavy_hex(3).unwrap()).unwrap();
    let lattice = heavy_hex(3).unwrap();
    let graph = chip.derived_graph();
    let sources = [
        qft(6).unwrap(),
        qft(10).unwrap(),
        qaoa(&ProblemGraph::ring(10).unwrap(), 1, 0).unwrap(),
        qaoa(&ProblemGraph::three_regular(10, 0).unwrap(), 2, 1).unwrap(),
        random_circuit(5, 30, 1).unwrap(),
    ];
    for c in &sources {
        for network in [false, true] {
            let compiled = route_linear(c, &chip, network);
            scan(&compiled.circuit, &|u, v| graph.has_edge(u, v), &c.name);
        }
        let compiled = route_sabre(c, &lattice, &RouterConfig::default()).unwrap();
        scan(&compiled.circuit, &|u, v| lattice.has_edge(u, v), &c.name);
    }

    let device = link_chips(&chip, &chip, LinkKind::DanglingLink, 0).unwrap();
    for kind in [LinkKind::DanglingLink, LinkKind::RandomLink] {
        for mode in [TeleportMode::Auto, TeleportMode::StateTeleport] {
            for (i, c) in sources.iter().take(4).enumerate() {
                let d = distribute(c, &device, mode, kind, i as u64).unwrap();
                scan(&d.circuit, &|u, v| d.topo.is_coupled(u, v), &c.name);
            }
        }
    }
    println!(
        "criterion 3 (coupling conformance): PASS [{scanned} two-qubit gates scanned, 0 violations]"
    );
}

/// Size -> lattice distance used by the comparison criteria.
fn lattice_for(n: usize) -> usize {
    qline::experiment::choose_d(n)
}

#[test]
fn criterion_4_qaoa_beats_the_baseline() {
    // Dense instance: every vertex pair carries an interaction, so the
    // comparator network's all-pairs sweep is fully used.
    let mut detail = String::new();
    for n in [10usize, 20, 50] {
        let c = qaoa(&ProblemGraph::erdos_renyi(n, 1.0, 0).unwrap(), 1, 0).unwrap();
        let d = lattice_for(n);
        let chip = to_lnn(&heavy_hex(d).unwrap()).unwrap();
        let linear = route_linear(&c, &chip, true);
        let baseline = route_sabre(&c, &heavy_hex(d).unwrap(), &RouterConfig::default()).unwrap();
        let (lg, bg) = (linear.circuit.cx_count(), baseline.circuit.cx_count());
        let (ld, bd) = (linear.circuit.cx_depth(), baseline.circuit.cx_depth());
        assert!(
            lg < bg && ld < bd,
            "criterion 4: n={n}: linear {lg} gates/{ld} depth not strictly below baseline {bg}/{bd}"
        );
        let ratio = lg as f64 / bg as f64;
        if n >= 20 {
            assert!(
                (0.3..=0.8).contains(&ratio),
                "criterion 4: n={n}: gate ratio {ratio:.3} outside [0.3, 0.8]"
            );
        }
        detail.push_str(&format!(" n={n}: {lg}/{bg} gates (ratio {ratio:.2}), {ld}/{bd} depth;"));
    }
    println!("criterion 4 (qaoa vs baseline direction): PASS [{}]", detail.trim());
}

#[test]
fn criterion_5_qft_depth_and_count_bands() {
    let mut detail = String::new();
    for n in [10usize, 20, 50] {
        let c = qft(n).unwrap();
        let d = lattice_for(n);
        let chip = to_lnn(&heavy_hex(d).unwrap()).unwrap();
        let linear = route_linear(&c, &chip, true);
        let baseline = route_sabre(&c, &heavy_hex(d).unwrap(), &RouterConfig::default()).unwrap();
        let (ld, bd) = (linear.circuit.cx_depth(), baseline.circuit.cx_depth());
        if n >= 20 {
            let ratio = ld as f64 / bd as f64;
            assert!(
                ratio <= 0.5,
                "criterion 5: n={n}: depth ratio {ratio:.3} exceeds 0.5 ({ld} vs {bd})"
            );
        }
        if n == 10 {
            let total = linear.circuit.gate_count(GateAccounting::SwapAsOne);
            assert!(
                (80..=140).contains(&total),
                "criterion 5: qft(10) gate count {total} outside [80, 140]"
            );
            detail.push_str(&format!(" n=10: {total} gates in [80,140];"));
        }
        detail.push_str(&format!(" n={n}: depth {ld} vs {bd};"));
    }
    println!("criterion 5 (qft vs baseline direction): PASS [{}]", detail.trim());
}

// Criteria 6 and 7 share one seeded sweep; it runs once.
//
// The quick-link rows are seed-invariant (the link always lands on the
// head pendants), so their mean is taken over 10 seeds and asserted flat;
// the random-link mean needs the wider sample to settle.
const DANGLING_SEEDS: u64 = 10;
const RANDOM_SEEDS: u64 = 40;

struct SweepCell {
    family: &'static str,
    n: usize,
    cross: [f64; 2],
    // Total emitted operations, teleport bookkeeping included; SWAP = 1.
    gates: [f64; 2],
}

struct LinkSweep {
    cells: Vec<SweepCell>,
    secs: f64,
}

fn link_sweep() -> &'static LinkSweep {
    static SWEEP: OnceLock<LinkSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let started = Instant::now();
        let mut cells = Vec::new();
        for (family, make) in [
            ("qft", (|n| qft(n).unwrap()) as fn(usize) -> Circuit),
            ("qaoa", |n| qaoa(&ProblemGraph::three_regular(n, 0).unwrap(), 1, 0).unwrap()),
        ] {
            for n in [10usize, 20, 50] {
                let c = make(n);
                let chip = to_lnn(&heavy_hex(lattice_for(n)).unwrap()).unwrap();
                let device = link_chips(&chip, &chip, LinkKind::DanglingLink, 0).unwrap();
                let mut cross = [0.0f64; 2];
                let mut gates = [0.0f64; 2];
                for (k, (kind, seeds)) in [
                    (LinkKind::DanglingLink, DANGLING_SEEDS),
                    (LinkKind::RandomLink, RANDOM_SEEDS),
                ]
                .into_iter()
                .enumerate()
                {
                    let mut per_seed = Vec::new();
                    for s in 0..seeds {
                        let d =
                            distribute(&c, &device, TeleportMode::StateTeleport, kind, s).unwrap();
                        per_seed.push((
                            d.cross_group_swaps,
                            d.circuit.gate_count_with(GateAccounting::SwapAsOne, true),
                        ));
                    }
                    if kind == LinkKind::DanglingLink {
                        assert!(
                            per_seed.iter().all(|&v| v == per_seed[0]),
                            "criterion 6: {family} n={n}: quick-link rows vary across seeds"
                        );
                    }
                    let k_seeds = per_seed.len() as f64;
                    cross[k] = per_seed.iter().map(|v| v.0 as f64).sum::<f64>() / k_seeds;
                    gates[k] = per_seed.iter().map(|v| v.1 as f64).sum::<f64>() / k_seeds;
                }
                cells.push(SweepCell { family, n, cross, gates });
            }
        }
        LinkSweep { cells, secs: started.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_6_dangling_dominates_on_cross_group_swaps() {
    let sweep = link_sweep();
    let mut detail = String::new();
    for cell in &sweep.cells {
        let (dangling, random) = (cell.cross[0], cell.cross[1]);
        assert!(
            dangling <= random,
            "criterion 6: {} n={}: dangling mean {dangling:.1} above random mean {random:.1}",
            cell.family,
            cell.n
        );
        if cell.n == 50 {
            let ratio = random / dangling;
            assert!(
                ratio >= 1.3,
                "criterion 6: {} n=50: reduction ratio {ratio:.2} below 1.3",
                cell.family
            );
            detail.push_str(&format!(
                " {} n=50: {dangling:.0} vs {random:.0} (x{ratio:.2});",
                cell.family
            ));
        }
    }
    assert!(
        sweep.secs < 300.0,
        "criterion 6 sweep overran its 5 min budget: {:.0} s",
        sweep.secs
    );
    println!(
        "criterion 6 (dangling-link dominance): PASS [{} vs {} seeds per cell, {:.0} s;{}]",
        DANGLING_SEEDS,
        RANDOM_SEEDS,
        sweep.secs,
        detail.trim_end_matches(';')
    );
}

#[test]
fn criterion_7_scaling_trend() {
    let sweep = link_sweep();
    let cell = |n: usize| {
        sweep
            .cells
            .iter()
            .find(|c| c.family == "qft" && c.n == n)
            .map(|c| (c.gates[0], c.gates[1]))
            .expect("sweep covers the cell")
    };
    let (d20, r20) = cell(20);
    let (d50, r50) = cell(50);
    let growth_dangling = d50 / d20;
    let growth_random = r50 / r20;
    let quadratic = (50.0f64 / 20.0).powi(2);
    // Sub-quadratic in absolute terms, and within 10% of the random link's
    // growth: the quick link must not buy its constant-factor win with a
    // worse curve.
    assert!(
        growth_dangling < quadratic,
        "criterion 7: dangling growth x{growth_dangling:.2} is not sub-quadratic (n ratio squared = x{quadratic:.2})"
    );
    assert!(
        growth_dangling <= growth_random * 1.10,
        "criterion 7: dangling growth x{growth_dangling:.2} exceeds random growth x{growth_random:.2} by more than 10%"
    );
    println!(
        "criterion 7 (scaling trend): PASS [qft 20->50 total-op growth: dangling x{growth_dangling:.2} vs random x{growth_random:.2}, quadratic would be x{quadratic:.2}]"
    );
}

#[test]
fn criterion_8_determinism() {
    let cfg = ExperimentConfig {
        benchmark: BenchmarkSpec::Qft,
        qubit_sizes: vec![4, 6],
        routers: vec![
            qline::experiment::RouterChoice::Linear,
            qline::experiment::RouterChoice::Sabre,
        ],
        distribution: Some(DistributionConfig {
            mode: TeleportMode::Auto,
            strategies: vec![LinkKind::DanglingLink, LinkKind::RandomLink],
            seeds: vec![],
            repetitions: 3,
        }),
        accounting: GateAccounting::SwapAsOne,
        heavy_hex_d: Default::default(),
        seed: 0,
        sabre: None,
        output: None,
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert!(a.errors.is_empty(), "criterion 8: sweep reported row errors");
    let csv_a = render_csv(&a.rows, false).unwrap();
    let csv_b = render_csv(&b.rows, false).unwrap();
    assert_eq!(csv_a, csv_b, "criterion 8: reruns of one config differ outside wall time");
    println!(
        "criterion 8 (determinism): PASS [{} rows byte-identical across reruns, wall time excluded]",
        a.rows.len()
    );
}

// Exhaustive minimum swap count for a small circuit on the 4-node path,
// by shortest path over (served-gate mask, layout) states. Gates may be
// served out of order only when every unserved earlier gate sharing a wire
// commutes diagonally, which covers every reordering the routers use.
//
// Unlike the shipped exhaustive router this searcher lets qubits roam over
// all 4 slots; agreement between the two certifies that confining the
// block loses nothing.
fn optimal_swaps(c: &Circuit, free_placement: bool) -> usize {
    const WIDTH: usize = 4;
    let n = c.num_qubits;
    assert!(n <= WIDTH && c.gates.len() <= 16);
    let commutes = |a: &Gate, b: &Gate| -> bool {
        a.qubits().iter().enumerate().all(|(i, qa)| {
            b.qubits()
                .iter()
                .enumerate()
                .all(|(j, qb)| qa != qb || (a.diagonal_on(i) && b.diagonal_on(j)))
        })
    };
    let servable = |mask: u32, idx: usize| -> bool {
        (0..idx).all(|h| mask & (1 << h) != 0 || commutes(&c.gates[idx], &c.gates[h]))
    };
    // Serve everything free (1q anywhere, 2q when adjacent) to a fixpoint.
    let close = |mut mask: u32, pos: &[u8]| -> u32 {
        loop {
            let mut progressed = false;
            for (i, g) in c.gates.iter().enumerate() {
                if mask & (1 << i) != 0 || !servable(mask, i) {
                    continue;
                }
                let adjacent = !g.is_two_qubit()
                    || pos[g.q0()].abs_diff(pos[g.q1()]) == 1;
                if adjacent {
                    mask |= 1 << i;
                    progressed = true;
                }
            }
            if !progressed {
                return mask;
            }
        }
    };

    let full: u32 = (1u32 << c.gates.len()) - 1;
    let mut starts: Vec<Vec<u8>> = Vec::new();
    if free_placement {
        let mut perm = [0u8, 1, 2, 3];
        permutations(&mut perm, 0, &mut |p| starts.push(p[..n].to_vec()));
        starts.sort();
        starts.dedup();
    } else {
        starts.push((0..n as u8).collect());
    }

    let mut dist: HashMap<(u32, Vec<u8>), usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for pos in starts {
        let mask = close(0, &pos);
        dist.insert((mask, pos.clone()), 0);
        heap.push(Reverse((0usize, mask, pos)));
    }
    while let Some(Reverse((cost, mask, pos))) = heap.pop() {
        if mask == full {
            return cost;
        }
        if dist.get(&(mask, pos.clone())).is_some_and(|&d| d < cost) {
            continue;
        }
        for p in 0..WIDTH - 1 {
            let mut next = pos.clone();
            for slot in next.iter_mut() {
                if *slot == p as u8 {
                    *slot = p as u8 + 1;
                } else if *slot == p as u8 + 1 {
                    *slot = p as u8;
                }
            }
            let nmask = close(mask, &next);
            let key = (nmask, next.clone());
            if dist.get(&key).is_none_or(|&d| d > cost + 1) {
                dist.insert(key, cost + 1);
                heap.push(Reverse((cost + 1, nmask, next)));
            }
        }
    }
    unreachable!("the swap graph is connected, so every gate order completes")
}

fn permutations(p: &mut [u8; 4], k: usize, visit: &mut impl FnMut(&[u8; 4])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn tiny_instance(seed: u64) -> Circuit {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("tiny_{seed}"), 4, 0);
    for _ in 0..12 {
        let a = rng.random_range(0..4);
        let gate = match rng.random_range(0..5) {
            0 => Gate::h(a),
            1 => Gate::rz(rng.random_range(0.0..1.0f64), a),
            _ => {
                let mut b = rng.random_range(0..3);
                if b >= a {
                    b += 1;
                }
                match rng.random_range(0..3) {
                    0 => Gate::cx(a, b),
                    1 => Gate::cz(a, b),
                    _ => Gate::cp(0.5, a, b),
                }
            }
        };
        c.push(gate).unwrap();
    }
    c
}

#[test]
fn criterion_9_small_instance_optimality() {
    let mut instances = vec![qft(3).unwrap(), qft(4).unwrap()];
    for seed in 0..6 {
        instances.push(tiny_instance(seed));
    }
    let mut detail = String::new();
    for c in &instances {
        assert!(c.gates.len() <= 12 && c.num_qubits <= 4);
        assert_eq!(c.swap_count(), 0, "instances must be swap-free for the bound");
        let opt = optimal_swaps(c, false);
        let opt_free = optimal_swaps(c, true);
        let chip = path_chip(c.num_qubits);
        let layout = place(c, &chip).unwrap();
        // At these sizes the toolchain's linear path routes exhaustively
        // (see ExperimentConfig::linear_strategy), so the shipped route is
        // held to the optimum itself, not just the +2 band.
        assert!(qline::route::fits_exact(c), "criterion 9: {} outgrew the searcher", c.name);
        let linear = route_exact(c, &chip, &layout).unwrap().swap_count;
        assert_eq!(
            linear, opt,
            "criterion 9: {}: exhaustive route found {linear} swaps, oracle says {opt}",
            c.name
        );
        let greedy = route_linear(c, &chip, false).swap_count;
        let network = route_linear(c, &chip, true).swap_count;
        let sabre = route_sabre(c, &path_graph(4), &RouterConfig::default())
            .unwrap()
            .swap_count;
        assert!(
            greedy >= opt && network >= opt,
            "criterion 9: {}: a heuristic beat the exhaustive optimum {opt} \
             (greedy {greedy}, network {network}); the oracle is wrong",
            c.name
        );
        assert!(
            sabre >= opt_free,
            "criterion 9: {}: sabre {sabre} beat the free-placement optimum {opt_free}",
            c.name
        );
        detail.push_str(&format!(" {}: opt {opt}, routed {linear};", c.name));
    }
    println!("criterion 9 (small-instance optimality): PASS [{}]", detail.trim_end_matches(';'));
}
