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

//! Scratch measurement harness (not part of the deliverable).

use qline::bench::{qaoa, qft, ProblemGraph};
use qline::circuit::{Circuit, GateAccounting};
use qline::dqc::{distribute, TeleportMode};
use qline::experiment::choose_d;
use qline::topology::{heavy_hex, link_chips, to_lnn, LinkKind};

fn bench(name: &str, n: usize) -> Circuit {
    match name {
        "qft" => qft(n).unwrap(),
        "ring" => qaoa(&ProblemGraph::ring(n).unwrap(), 1, 0).unwrap(),
        "3reg" => qaoa(&ProblemGraph::three_regular(n, 0).unwrap(), 1, 0).unwrap(),
        _ => unreachable!(),
    }
}

fn main() {
    const SEEDS: u64 = 40;
    for name in ["qft", "ring", "3reg"] {
        for n in [10usize, 20, 50] {
            let d = choose_d(n);
            let chip = to_lnn(&heavy_hex(d).unwrap()).unwrap();
            let c = bench(name, n);
            let mut cross_m = [0.0f64; 2];
            let mut gates_m = [0.0f64; 2];
            for (k, kind) in [LinkKind::DanglingLink, LinkKind::RandomLink].iter().enumerate() {
                let (mut cross, mut count) = (0usize, 0usize);
                for seed in 0..SEEDS {
                    let dist = distribute(
                        &c,
                        &link_chips(&chip, &chip, *kind, seed).unwrap(),
                        TeleportMode::StateTeleport,
                        *kind,
                        seed,
                    )
                    .unwrap();
                    cross += dist.cross_group_swaps;
                    count += dist.circuit.gate_count_with(GateAccounting::SwapAsOne, true);
                }
                cross_m[k] = cross as f64 / SEEDS as f64;
                gates_m[k] = count as f64 / SEEDS as f64;
            }
            println!(
                "{name:>4} n={n:>2}: cross d {:>7.1} r {:>7.1} ratio {:.3} | gates d {:>8.1} r {:>8.1}",
                cross_m[0], cross_m[1], cross_m[1] / cross_m[0], gates_m[0], gates_m[1]
            );
        }
    }
}
