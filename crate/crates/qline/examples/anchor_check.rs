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

//! Scratch: single-chip comparison anchors.

use qline::bench::{qaoa, qft, ProblemGraph};
use qline::circuit::GateAccounting;
use qline::experiment::choose_d;
use qline::route::{place, route_sabre, route_swap_network, RouterConfig};
use qline::topology::{heavy_hex, to_lnn};

fn main() {
    for (name, make) in [
        ("qaoa_er1", (|n: usize| {
            qaoa(&ProblemGraph::erdos_renyi(n, 1.0, 0).unwrap(), 1, 0).unwrap()
        }) as fn(usize) -> qline::circuit::Circuit),
        ("qft", |n| qft(n).unwrap()),
    ] {
        for n in [10usize, 20, 50] {
            let c = make(n);
            let d = choose_d(n);
            let lattice = heavy_hex(d).unwrap();
            let chip = to_lnn(&lattice).unwrap();
            let layout = place(&c, &chip).unwrap();
            let lin = route_swap_network(&c, &chip, &layout).unwrap();
            let sab = route_sabre(&c, &lattice, &RouterConfig::default()).unwrap();
            let (lc, sc) = (lin.circuit.cx_count(), sab.circuit.cx_count());
            let (lcd, scd) = (lin.circuit.cx_depth(), sab.circuit.cx_depth());
            let (ld, sd) = (lin.circuit.depth(), sab.circuit.depth());
            let l1 = lin.circuit.gate_count(GateAccounting::SwapAsOne);
            println!(
                "{name} n={n}: cx {lc} vs {sc} (r {:.3}) | cxd {lcd} vs {scd} (r {:.3}) | \
                 depth {ld} vs {sd} | lin swap1 {l1}",
                lc as f64 / sc as f64,
                lcd as f64 / scd as f64,
            );
        }
    }
}
