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

//! `qline` compiles quantum circuits onto linear-nearest-neighbour layouts
//! carved out of heavy-hex chips, and distributes them across two chips that
//! share a single entanglement link.
//!
//! The pipeline is: generate or parse a circuit ([`circuit`], [`bench`]),
//! build a coupling graph and its linear transform ([`topology`]), route
//! ([`route`]) or distribute ([`dqc`]), then check the result against a
//! statevector oracle ([`sim`]) and collect numbers ([`metrics`],
//! [`experiment`]).

pub mod bench;
pub mod circuit;
pub mod dqc;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod qasm;
pub mod route;
pub mod sim;
pub mod topology;

pub use circuit::{Circuit, Gate, GateAccounting, GateKind};
pub use error::Error;
