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

//! Emit/parse round-trip over the full gate set.

use proptest::prelude::*;
use qline::circuit::{Circuit, Gate};
use qline::qasm::{emit_qasm, parse_qasm};

fn arb_gate(n: usize, c: usize) -> BoxedStrategy<Gate> {
    let q = 0..n;
    let pair = (0..n, 0..n - 1).prop_map(move |(a, mut b)| {
        if b >= a {
            b += 1;
        }
        (a, b)
    });
    let theta = -10.0..10.0f64;
    prop_oneof![
        q.clone().prop_map(Gate::h),
        q.clone().prop_map(Gate::x),
        q.clone().prop_map(Gate::y),
        q.clone().prop_map(Gate::z),
        (theta.clone(), q.clone()).prop_map(|(t, q)| Gate::rx(t, q)),
        (theta.clone(), q.clone()).prop_map(|(t, q)| Gate::ry(t, q)),
        (theta.clone(), q.clone()).prop_map(|(t, q)| Gate::rz(t, q)),
        pair.clone().prop_map(|(a, b)| Gate::cx(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::cz(a, b)),
        (theta.clone(), pair.clone()).prop_map(|(t, (a, b))| Gate::cp(t, a, b)),
        (theta, pair.clone()).prop_map(|(t, (a, b))| Gate::rzz(t, a, b)),
        pair.clone().prop_map(|(a, b)| Gate::swap(a, b)),
        pair.prop_map(|(a, b)| Gate::epr_prep(a, b)),
        (q.clone(), 0..c).prop_map(|(q, k)| Gate::measure(q, k)),
        (q.clone(), 0..c).prop_map(|(q, k)| Gate::corr_x(q, k)),
        (q, 0..c).prop_map(|(q, k)| Gate::corr_z(q, k)),
    ]
    .boxed()
}

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    (2usize..7, 1usize..5).prop_flat_map(|(n, c)| {
        proptest::collection::vec(arb_gate(n, c), 0..40).prop_map(move |gates| {
            let mut circuit = Circuit::new("prop", n, c);
            for g in gates {
                circuit.push(g).expect("generated gates are in range");
            }
            circuit
        })
    })
}

proptest! {
    #[test]
    fn round_trip_preserves_everything(c in arb_circuit()) {
        let parsed = parse_qasm(&emit_qasm(&c)).expect("emitted text parses");
        prop_assert_eq!(parsed, c);
    }

    // The parser must reject or accept, never panic, whatever the input.
    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_qasm(&text);
    }

    #[test]
    fn mangled_programs_never_panic(
        c in arb_circuit(),
        cut in 0usize..400,
        insert in "[a-z\\[\\]();,>\\- ]{0,12}",
    ) {
        let mut text = emit_qasm(&c);
        let at = cut.min(text.len());
        while !text.is_char_boundary(at.min(text.len())) {
            text.pop();
        }
        text.insert_str(at.min(text.len()), &insert);
        let _ = parse_qasm(&text);
    }
}

#[test]
fn cbit_register_survives_when_unused() {
    let c = Circuit::new("idle_cbits", 2, 3);
    let parsed = parse_qasm(&emit_qasm(&c)).unwrap();
    assert_eq!(parsed.num_cbits, 3);
}

#[test]
fn single_wire_program_round_trips() {
    let mut c = Circuit::new("one_wire", 1, 1);
    c.push(Gate::h(0)).unwrap();
    c.push(Gate::rz(0.25, 0)).unwrap();
    c.push(Gate::measure(0, 0)).unwrap();
    c.push(Gate::corr_x(0, 0)).unwrap();
    assert_eq!(parse_qasm(&emit_qasm(&c)).unwrap(), c);
}
