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

use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Source text could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A gate or operation referenced a qubit/cbit outside the declared registers.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Malformed or unsupported circuit construction.
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    /// Malformed or unsupported topology construction.
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    /// Benchmark generator was asked for something it cannot produce.
    #[error("invalid benchmark request: {0}")]
    InvalidBenchmark(String),

    /// Routing could not proceed (capacity, disconnected graph, ...).
    #[error("routing error: {0}")]
    Routing(String),

    /// Distribution across chips could not proceed.
    #[error("distribution error: {0}")]
    Distribution(String),

    /// A lowering was requested that the target gate kind does not support.
    #[error("unsupported lowering: {0}")]
    UnsupportedLowering(String),

    /// Simulator rejected the circuit (size, precondition violation, ...).
    #[error("simulation error: {0}")]
    Simulation(String),

    /// Experiment configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
