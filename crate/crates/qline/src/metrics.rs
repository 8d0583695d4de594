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

//! Metric rows and report rendering.
//!
//! One row per compiled artifact, keyed by (benchmark, n, router, strategy,
//! seed). Rendering is deterministic: CSV column order is fixed and the
//! wall-time column can be dropped so repeated runs byte-compare equal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::GateAccounting;
use crate::error::{Error, Result};

/// Counters for one compiled or distributed circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub benchmark: String,
    pub n: usize,
    pub router: String,
    pub strategy: String,
    pub seed: u64,
    pub gate_count: usize,
    pub depth: usize,
    pub swap_count: usize,
    pub cross_group_swaps: usize,
    pub ebits: usize,
    pub accounting: GateAccounting,
    pub wall_time_ms: u64,
}

impl MetricsRow {
    /// The unique row key.
    pub fn key(&self) -> (String, usize, String, String, u64) {
        (
            self.benchmark.clone(),
            self.n,
            self.router.clone(),
            self.strategy.clone(),
            self.seed,
        )
    }
}

/// A combination the runner could not compile; recorded, never silent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub benchmark: String,
    pub n: usize,
    pub router: String,
    pub strategy: String,
    pub seed: u64,
    pub message: String,
}

const CSV_HEADER: &str = "benchmark,n,router,strategy,seed,gate_count,depth,\
                          swap_count,cross_group_swaps,ebits,accounting,wall_time_ms";

fn csv_field_ok(s: &str) -> bool {
    !s.contains(',') && !s.contains('\n') && !s.contains('\r')
}

/// Render rows as CSV. `include_wall_time` selects whether the timing column
/// is emitted; determinism checks compare output with it dropped.
pub fn render_csv(rows: &[MetricsRow], include_wall_time: bool) -> Result<String> {
    let header = if include_wall_time {
        CSV_HEADER.to_string()
    } else {
        CSV_HEADER.rsplit_once(',').expect("header has columns").0.to_string()
    };
    let mut out = header;
    out.push('\n');
    for row in rows {
        for field in [&row.benchmark, &row.router, &row.strategy] {
            if !csv_field_ok(field) {
                return Err(Error::Config(format!("field {field:?} is not CSV-safe")));
            }
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.benchmark,
            row.n,
            row.router,
            row.strategy,
            row.seed,
            row.gate_count,
            row.depth,
            row.swap_count,
            row.cross_group_swaps,
            row.ebits,
            row.accounting.as_str(),
        ));
        if include_wall_time {
            out.push_str(&format!(",{}", row.wall_time_ms));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse CSV produced by [`render_csv`] with the wall-time column present.
pub fn parse_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::Config("unrecognized CSV header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Config(format!("row {}: expected 12 fields", i + 2)));
        }
        let num = |f: &str| -> Result<usize> {
            f.parse().map_err(|_| Error::Config(format!("row {}: bad count {f:?}", i + 2)))
        };
        let accounting = match fields[10] {
            "swap_as_one" => GateAccounting::SwapAsOne,
            "swap_as_three_cx" => GateAccounting::SwapAsThreeCx,
            other => {
                return Err(Error::Config(format!("row {}: bad accounting {other:?}", i + 2)))
            }
        };
        rows.push(MetricsRow {
            benchmark: fields[0].to_string(),
            n: num(fields[1])?,
            router: fields[2].to_string(),
            strategy: fields[3].to_string(),
            seed: fields[4]
                .parse()
                .map_err(|_| Error::Config(format!("row {}: bad seed", i + 2)))?,
            gate_count: num(fields[5])?,
            depth: num(fields[6])?,
            swap_count: num(fields[7])?,
            cross_group_swaps: num(fields[8])?,
            ebits: num(fields[9])?,
            accounting,
            wall_time_ms: fields[11]
                .parse()
                .map_err(|_| Error::Config(format!("row {}: bad wall time", i + 2)))?,
        });
    }
    Ok(rows)
}

pub fn render_json(rows: &[MetricsRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

pub fn parse_json(text: &str) -> Result<Vec<MetricsRow>> {
    Ok(serde_json::from_str(text)?)
}

/// Seed-aggregated statistics for one (benchmark, n, router, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub benchmark: String,
    pub n: usize,
    pub router: String,
    pub strategy: String,
    pub seeds: usize,
    pub mean_gate_count: f64,
    pub min_gate_count: usize,
    pub max_gate_count: usize,
    pub mean_depth: f64,
    pub mean_swap_count: f64,
    pub mean_cross_group_swaps: f64,
    pub min_cross_group_swaps: usize,
    pub max_cross_group_swaps: usize,
    pub mean_ebits: f64,
}

/// Collapse rows over seeds. Output order follows first appearance, so a
/// deterministic row list yields a deterministic report.
pub fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    let mut order: Vec<(String, usize, String, String)> = Vec::new();
    let mut buckets: BTreeMap<(String, usize, String, String), Vec<&MetricsRow>> = BTreeMap::new();
    for row in rows {
        let key = (row.benchmark.clone(), row.n, row.router.clone(), row.strategy.clone());
        if !buckets.contains_key(&key) {
            order.push(key.clone());
        }
        buckets.entry(key).or_default().push(row);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &buckets[&key];
            let k = group.len() as f64;
            let mean = |f: fn(&MetricsRow) -> usize| {
                group.iter().map(|r| f(r) as f64).sum::<f64>() / k
            };
            Aggregate {
                benchmark: key.0,
                n: key.1,
                router: key.2,
                strategy: key.3,
                seeds: group.len(),
                mean_gate_count: mean(|r| r.gate_count),
                min_gate_count: group.iter().map(|r| r.gate_count).min().unwrap_or(0),
                max_gate_count: group.iter().map(|r| r.gate_count).max().unwrap_or(0),
                mean_depth: mean(|r| r.depth),
                mean_swap_count: mean(|r| r.swap_count),
                mean_cross_group_swaps: mean(|r| r.cross_group_swaps),
                min_cross_group_swaps: group
                    .iter()
                    .map(|r| r.cross_group_swaps)
                    .min()
                    .unwrap_or(0),
                max_cross_group_swaps: group
                    .iter()
                    .map(|r| r.cross_group_swaps)
                    .max()
                    .unwrap_or(0),
                mean_ebits: mean(|r| r.ebits),
            }
        })
        .collect()
}

fn fmt_mean(mean: f64, min: usize, max: usize, seeds: usize) -> String {
    if seeds <= 1 || min == max {
        format!("{mean:.0}")
    } else {
        format!("{mean:.1} ({min}\u{2013}{max})")
    }
}

/// Markdown report: a router-comparison table per benchmark with gate count
/// and depth side by side, then a link-strategy table when distribution rows
/// are present.
pub fn render_markdown(rows: &[MetricsRow]) -> String {
    let aggregates = aggregate(rows);
    let (dist, routed): (Vec<&Aggregate>, Vec<&Aggregate>) = aggregates
        .iter()
        .partition(|a| a.strategy == "dangling" || a.strategy == "random");

    let mut out = String::from("# Compilation metrics\n");
    let mut benchmarks: Vec<&str> = Vec::new();
    for a in &routed {
        if !benchmarks.contains(&a.benchmark.as_str()) {
            benchmarks.push(&a.benchmark);
        }
    }
    for bench in &benchmarks {
        let mut routers: Vec<(&str, &str)> = Vec::new();
        for a in &routed {
            let id = (a.router.as_str(), a.strategy.as_str());
            if a.benchmark == *bench && !routers.contains(&id) {
                routers.push(id);
            }
        }
        let mut sizes: Vec<usize> = routed
            .iter()
            .filter(|a| a.benchmark == *bench)
            .map(|a| a.n)
            .collect();
        sizes.sort_unstable();
        sizes.dedup();

        out.push_str(&format!("\n## {bench}\n\n| n |"));
        for (router, strategy) in &routers {
            out.push_str(&format!(" {router}/{strategy} gates | {router}/{strategy} depth |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---|---|".repeat(routers.len()));
        out.push('\n');
        for n in sizes {
            out.push_str(&format!("| {n} |"));
            for (router, strategy) in &routers {
                match routed.iter().find(|a| {
                    a.benchmark == *bench
                        && a.n == n
                        && a.router == *router
                        && a.strategy == *strategy
                }) {
                    Some(a) => out.push_str(&format!(
                        " {} | {:.0} |",
                        fmt_mean(a.mean_gate_count, a.min_gate_count, a.max_gate_count, a.seeds),
                        a.mean_depth,
                    )),
                    None => out.push_str(" - | - |"),
                }
            }
            out.push('\n');
        }
    }

    if !dist.is_empty() {
        out.push_str(
            "\n## Distribution\n\n\
             | benchmark | n | link | cross-group swaps | e-bits | gates |\n\
             |---|---|---|---|---|---|\n",
        );
        for a in &dist {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {:.1} | {:.1} |\n",
                a.benchmark,
                a.n,
                a.strategy,
                fmt_mean(
                    a.mean_cross_group_swaps,
                    a.min_cross_group_swaps,
                    a.max_cross_group_swaps,
                    a.seeds,
                ),
                a.mean_ebits,
                a.mean_gate_count,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(router: &str, strategy: &str, seed: u64, swaps: usize) -> MetricsRow {
        MetricsRow {
            benchmark: "qft".into(),
            n: 10,
            router: router.into(),
            strategy: strategy.into(),
            seed,
            gate_count: 100 + swaps,
            depth: 50,
            swap_count: swaps,
            cross_group_swaps: 0,
            ebits: 0,
            accounting: GateAccounting::SwapAsOne,
            wall_time_ms: 7,
        }
    }

    #[test]
    fn csv_round_trips() {
        let rows = vec![row("linear", "swap_network", 0, 57), row("sabre", "sabre", 0, 80)];
        let text = render_csv(&rows, true).unwrap();
        assert_eq!(parse_csv(&text).unwrap(), rows);
    }

    #[test]
    fn csv_without_wall_time_is_stable_across_timings() {
        let mut a = vec![row("linear", "swap_network", 0, 57)];
        let mut b = a.clone();
        a[0].wall_time_ms = 3;
        b[0].wall_time_ms = 9000;
        assert_eq!(render_csv(&a, false).unwrap(), render_csv(&b, false).unwrap());
        assert_ne!(render_csv(&a, true).unwrap(), render_csv(&b, true).unwrap());
    }

    #[test]
    fn json_round_trips() {
        let rows = vec![row("linear", "greedy", 3, 12)];
        assert_eq!(parse_json(&render_json(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn rejects_comma_in_name() {
        let mut bad = row("linear", "greedy", 0, 1);
        bad.benchmark = "a,b".into();
        assert!(render_csv(&[bad], true).is_err());
    }

    #[test]
    fn aggregate_means_over_seeds() {
        let rows =
            vec![row("linear", "greedy", 0, 10), row("linear", "greedy", 1, 20)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].seeds, 2);
        assert!((agg[0].mean_swap_count - 15.0).abs() < 1e-12);
        assert_eq!(agg[0].min_gate_count, 110);
        assert_eq!(agg[0].max_gate_count, 120);
    }

    #[test]
    fn markdown_has_one_column_pair_per_router() {
        let rows = vec![row("linear", "swap_network", 0, 57), row("sabre", "sabre", 0, 80)];
        let text = render_markdown(&rows);
        assert!(text.contains("linear/swap_network gates"));
        assert!(text.contains("sabre/sabre depth"));
        assert!(text.contains("| 10 |"));
    }
}
