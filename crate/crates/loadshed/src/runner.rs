//! Manifest-driven runs: load a case, sweep K, write traces and reports.
//!
//! Three artifacts are produced per K:
//!
//! * `<case>_k<K>.txt` - whitespace-separated convergence trace with the
//!   header `IterNo ObjVal theta_res z_res gam_res prim_res`, one row per
//!   recorded iteration, floats printed in shortest round-trip form;
//! * `<case>_k<K>.json` - the full [`SolveReport`] as JSON;
//! * one combined `<case>_table.txt` summarizing the sweep (K, shed MW,
//!   percentage, removed lines).

use crate::caseio::{self, CaseSummary, RawCase, Rebalance};
use crate::error::{CaseError, SolverError};
use crate::netmodel::PowerNetwork;
use crate::palm::{self, IterationRecord, SolverConfig};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Exact header of a trace file.
pub const TRACE_HEADER: &str = "IterNo ObjVal theta_res z_res gam_res prim_res";

/// Bundled cases, resolvable by name.
pub const BUNDLED_CASES: &[(&str, &str)] = &[
    ("ieee14", include_str!("../cases/ieee14.json")),
    ("ieee118", include_str!("../cases/ieee118.json")),
    ("toy2bus", include_str!("../cases/toy2bus.json")),
    ("synth4", include_str!("../cases/synth4.json")),
];

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("case `{0}`: not a bundled name and not a readable file")]
    CaseNotFound(String),
    #[error("case `{reference}`: {source}")]
    Case {
        reference: String,
        source: CaseError,
    },
    #[error("K range {0}..{1} is empty or exceeds the {2} lines of the case")]
    BadKRange(usize, usize, usize),
    #[error("solve failed for K={k}: {source}")]
    Solve { k: usize, source: SolverError },
    #[error("trace line {line}: {msg}")]
    Trace { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What to run: a case, an inclusive K range, solver settings, and where to
/// put the artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Bundled case name or filesystem path.
    pub case: String,
    pub k_min: usize,
    pub k_max: usize,
    /// Per-solve settings; the `k` field is overridden by the sweep.
    pub config: SolverConfig,
    pub out_dir: PathBuf,
}

/// One sweep row of the summary table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub shed_mw: f64,
    pub shed_pct: Option<f64>,
    pub removed_lines: Vec<usize>,
    pub primal_residual: f64,
    pub iterations: usize,
}

/// Outcome of [`run`]: the sweep rows plus the files written.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub case_name: String,
    pub rows: Vec<SweepRow>,
    pub trace_paths: Vec<PathBuf>,
    pub report_paths: Vec<PathBuf>,
    pub table_path: PathBuf,
}

/// Resolves a case reference: bundled name first, then filesystem path.
pub fn load_case(reference: &str) -> Result<(RawCase, String), RunnerError> {
    for (name, text) in BUNDLED_CASES {
        if *name == reference {
            let raw = caseio::parse_case(text).map_err(|source| RunnerError::Case {
                reference: reference.to_string(),
                source,
            })?;
            return Ok((raw, name.to_string()));
        }
    }
    let path = Path::new(reference);
    if !path.is_file() {
        return Err(RunnerError::CaseNotFound(reference.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let raw = caseio::parse_case(&text).map_err(|source| RunnerError::Case {
        reference: reference.to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".to_string());
    Ok((raw, name))
}

/// Runs the sweep described by the manifest and writes all artifacts.
pub fn run(manifest: &RunManifest) -> Result<RunSummary, RunnerError> {
    let (raw, case_name) = load_case(&manifest.case)?;
    let net = caseio::build_network(&raw, manifest.config.rebalance).map_err(|source| {
        RunnerError::Case {
            reference: manifest.case.clone(),
            source,
        }
    })?;
    if manifest.k_min > manifest.k_max || manifest.k_max > net.n_lines() {
        return Err(RunnerError::BadKRange(
            manifest.k_min,
            manifest.k_max,
            net.n_lines(),
        ));
    }
    std::fs::create_dir_all(&manifest.out_dir)?;

    let mut rows = Vec::new();
    let mut trace_paths = Vec::new();
    let mut report_paths = Vec::new();

    for k in manifest.k_min..=manifest.k_max {
        let config = SolverConfig {
            k,
            ..manifest.config.clone()
        };
        let report =
            palm::solve(&net, &config).map_err(|source| RunnerError::Solve { k, source })?;

        let trace_path = manifest.out_dir.join(format!("{case_name}_k{k}.txt"));
        std::fs::write(&trace_path, format_trace(&report.trace))?;
        trace_paths.push(trace_path);

        let report_path = manifest.out_dir.join(format!("{case_name}_k{k}.json"));
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(&report_path, json)?;
        report_paths.push(report_path);

        rows.push(SweepRow {
            k,
            shed_mw: report.shed_mw,
            shed_pct: report.shed_pct,
            removed_lines: report.removed_lines.clone(),
            primal_residual: report.primal_residual,
            iterations: report.iterations,
        });
    }

    let table_path = manifest.out_dir.join(format!("{case_name}_table.txt"));
    std::fs::write(&table_path, format_table(&case_name, &rows))?;

    Ok(RunSummary {
        case_name,
        rows,
        trace_paths,
        report_paths,
        table_path,
    })
}

/// Renders trace rows in the plot-ready column schema.
pub fn format_trace(trace: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            r.iter, r.obj, r.theta_res, r.z_res, r.gam_res, r.prim_res
        ));
    }
    out
}

/// Parses a trace file back into records. Exact inverse of [`format_trace`].
pub fn parse_trace(text: &str) -> Result<Vec<IterationRecord>, RunnerError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        Some((_, other)) => {
            return Err(RunnerError::Trace {
                line: 1,
                msg: format!("unexpected header `{other}`"),
            })
        }
        None => {
            return Err(RunnerError::Trace {
                line: 1,
                msg: "empty trace".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(RunnerError::Trace {
                line: idx + 1,
                msg: format!("expected 6 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64, RunnerError> {
            s.parse().map_err(|_| RunnerError::Trace {
                line: idx + 1,
                msg: format!("bad number `{s}`"),
            })
        };
        records.push(IterationRecord {
            iter: fields[0].parse().map_err(|_| RunnerError::Trace {
                line: idx + 1,
                msg: format!("bad iteration index `{}`", fields[0]),
            })?,
            obj: parse(fields[1])?,
            theta_res: parse(fields[2])?,
            z_res: parse(fields[3])?,
            gam_res: parse(fields[4])?,
            prim_res: parse(fields[5])?,
        });
    }
    Ok(records)
}

/// Renders the sweep summary in the table layout of the experiment reports.
pub fn format_table(case_name: &str, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("Worst-case load shedding, case {case_name}\n"));
    out.push_str("K | Load Shed (MW) | Percentage | Lines Removed\n");
    for row in rows {
        let pct = row
            .shed_pct
            .map(|p| format!("{p:.1}%"))
            .unwrap_or_else(|| "n/a".to_string());
        let lines = row
            .removed_lines
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "{} | {:.1} | {} | {}\n",
            row.k, row.shed_mw, pct, lines
        ));
    }
    out
}

/// Diagnostics from parsing and building a case without solving.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub case_name: String,
    pub summary: CaseSummary,
    /// Net imbalance of the raw injections before rebalancing, in MW.
    pub raw_imbalance_mw: f64,
    /// Injection balance residual of the built network (per-unit).
    pub balance_residual: f64,
    pub rebalance: Rebalance,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} buses, {} lines",
            self.case_name, self.summary.buses, self.summary.branches_in_service
        )?;
        writeln!(f, "  {}", self.summary)?;
        writeln!(
            f,
            "  raw imbalance {:.3} MW, rebalanced ({}) to residual {:.3e} pu",
            self.raw_imbalance_mw, self.rebalance, self.balance_residual
        )
    }
}

/// Parses the case, builds the network, and checks every model invariant.
pub fn validate(reference: &str, rebalance: Rebalance) -> Result<ValidationReport, RunnerError> {
    let (raw, case_name) = load_case(reference)?;
    let summary = raw.summary();
    let raw_imbalance_mw = summary.total_gen_mw - summary.total_load_mw;
    let net = caseio::build_network(&raw, rebalance).map_err(|source| RunnerError::Case {
        reference: reference.to_string(),
        source,
    })?;
    let balance_residual = net.injection().iter().sum::<f64>().abs();
    Ok(ValidationReport {
        case_name,
        summary,
        raw_imbalance_mw,
        balance_residual,
        rebalance,
    })
}

/// Convenience: builds the network for a case reference with a policy.
pub fn load_network(reference: &str, rebalance: Rebalance) -> Result<PowerNetwork, RunnerError> {
    let (raw, _) = load_case(reference)?;
    caseio::build_network(&raw, rebalance).map_err(|source| RunnerError::Case {
        reference: reference.to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palm::SolveReport;

    #[test]
    fn bundled_cases_parse_and_validate() {
        for (name, expected_buses, expected_lines) in [
            ("ieee14", 14, 20),
            ("ieee118", 118, 186),
            ("toy2bus", 2, 1),
            ("synth4", 4, 5),
        ] {
            let rep = validate(name, Rebalance::Proportional).unwrap();
            assert_eq!(rep.summary.buses, expected_buses, "{name}");
            assert_eq!(rep.summary.branches_in_service, expected_lines, "{name}");
            assert!(rep.balance_residual <= 1e-9, "{name}");
        }
    }

    #[test]
    fn ieee_cases_match_reference_counts() {
        let rep = validate("ieee14", Rebalance::Proportional).unwrap();
        assert_eq!(rep.summary.gen_buses, 5);
        assert_eq!(rep.summary.load_buses, 9);

        let rep = validate("ieee118", Rebalance::Proportional).unwrap();
        assert_eq!(rep.summary.gen_buses, 54);
        assert_eq!(rep.summary.load_buses, 64);
        assert!((rep.summary.total_load_mw - 4242.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_case_is_reported() {
        assert!(matches!(
            load_case("no_such_case"),
            Err(RunnerError::CaseNotFound(_))
        ));
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let trace = vec![
            IterationRecord {
                iter: 1,
                obj: 4401.194829382923,
                theta_res: 0.0312,
                z_res: 1e-11,
                gam_res: 2.23606797749979,
                prim_res: 3.0000000000000004,
            },
            IterationRecord {
                iter: 2,
                obj: -0.4999999999999999,
                theta_res: 0.0,
                z_res: 0.0,
                gam_res: 0.0,
                prim_res: 5.551115123125783e-17,
            },
        ];
        let text = format_trace(&trace);
        assert!(text.starts_with(TRACE_HEADER));
        let parsed = parse_trace(&text).unwrap();
        assert_eq!(parsed, trace);
    }

    #[test]
    fn trace_parser_rejects_malformed_input() {
        assert!(parse_trace("wrong header\n1 2 3 4 5 6\n").is_err());
        let bad_cols = format!("{TRACE_HEADER}\n1 2 3\n");
        assert!(parse_trace(&bad_cols).is_err());
        let bad_num = format!("{TRACE_HEADER}\n1 x 3 4 5 6\n");
        assert!(parse_trace(&bad_num).is_err());
    }

    #[test]
    fn run_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            case: "toy2bus".into(),
            k_min: 0,
            k_max: 1,
            config: SolverConfig {
                max_iters: 50,
                ..SolverConfig::default()
            },
            out_dir: dir.path().to_path_buf(),
        };
        let summary = run(&manifest).unwrap();
        assert_eq!(summary.rows.len(), 2);
        for p in summary
            .trace_paths
            .iter()
            .chain(&summary.report_paths)
            .chain(std::iter::once(&summary.table_path))
        {
            assert!(p.is_file(), "{p:?} missing");
        }
        // Written trace parses back to the in-memory records.
        let text = std::fs::read_to_string(&summary.trace_paths[1]).unwrap();
        let parsed = parse_trace(&text).unwrap();
        assert_eq!(parsed.len(), 50);
        // Report JSON deserializes.
        let json = std::fs::read_to_string(&summary.report_paths[1]).unwrap();
        let report: SolveReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report.removed_lines, vec![1]);
    }

    #[test]
    fn bad_k_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            case: "toy2bus".into(),
            k_min: 0,
            k_max: 5,
            config: SolverConfig::default(),
            out_dir: dir.path().to_path_buf(),
        };
        assert!(matches!(run(&manifest), Err(RunnerError::BadKRange(..))));
    }
}
