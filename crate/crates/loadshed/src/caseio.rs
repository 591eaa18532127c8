//! Case-file ingestion: a MATPOWER `.m` subset and a JSON mirror.
//!
//! `parse_case` accepts either format and produces a [`RawCase`] holding the
//! numeric tables verbatim. [`build_network`] then derives the lossless
//! model: per-line susceptance `1/x`, net injections `(sum Pg - Pd) / base`,
//! and a rebalancing step that forces `1'P = 0` (the source data usually
//! carries losses, which this model does not).

use crate::error::CaseError;
use crate::netmodel::{Line, PowerNetwork};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

// Minimum column counts per MATPOWER table.
const BUS_MIN_COLS: usize = 13;
const GEN_MIN_COLS: usize = 10; // legacy width; modern files carry >= 21
const BRANCH_MIN_COLS: usize = 13;

// Column indices used by the model.
const BUS_ID: usize = 0;
const BUS_PD: usize = 2;
const GEN_BUS: usize = 0;
const GEN_PG: usize = 1;
const GEN_STATUS: usize = 7;
const BR_FROM: usize = 0;
const BR_TO: usize = 1;
const BR_X: usize = 3;
const BR_STATUS: usize = 10;

/// A case file as parsed: base MVA plus the raw numeric rows of the three
/// tables. Out-of-service rows are retained; construction filters them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCase {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub notes: Option<String>,
    pub base_mva: f64,
    pub bus: Vec<Vec<f64>>,
    pub gen: Vec<Vec<f64>>,
    pub branch: Vec<Vec<f64>>,
}

/// Headline counts for diagnostics. Generator buses are buses that host at
/// least one in-service machine; this is the data-file classification, not
/// the injection-sign partition used by the optimization model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseSummary {
    pub buses: usize,
    pub branches_total: usize,
    pub branches_in_service: usize,
    pub gen_buses: usize,
    pub load_buses: usize,
    pub total_load_mw: f64,
    pub total_gen_mw: f64,
}

impl fmt::Display for CaseSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} buses, {} lines ({} in service), {} generator buses, {} load buses, \
             load {:.1} MW, generation {:.1} MW",
            self.buses,
            self.branches_total,
            self.branches_in_service,
            self.gen_buses,
            self.load_buses,
            self.total_load_mw,
            self.total_gen_mw
        )
    }
}

impl RawCase {
    pub fn summary(&self) -> CaseSummary {
        let mut gen_bus_ids: Vec<i64> = self
            .gen
            .iter()
            .filter(|row| row[GEN_STATUS] > 0.0)
            .map(|row| row[GEN_BUS] as i64)
            .collect();
        gen_bus_ids.sort_unstable();
        gen_bus_ids.dedup();
        let in_service = self
            .branch
            .iter()
            .filter(|row| row[BR_STATUS] > 0.0)
            .count();
        CaseSummary {
            buses: self.bus.len(),
            branches_total: self.branch.len(),
            branches_in_service: in_service,
            gen_buses: gen_bus_ids.len(),
            load_buses: self.bus.len() - gen_bus_ids.len(),
            total_load_mw: self.bus.iter().map(|row| row[BUS_PD]).sum(),
            total_gen_mw: self
                .gen
                .iter()
                .filter(|row| row[GEN_STATUS] > 0.0)
                .map(|row| row[GEN_PG])
                .sum(),
        }
    }

    fn validate_widths(&self) -> Result<(), CaseError> {
        for (table, rows, min) in [
            ("bus", &self.bus, BUS_MIN_COLS),
            ("gen", &self.gen, GEN_MIN_COLS),
            ("branch", &self.branch, BRANCH_MIN_COLS),
        ] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() < min {
                    return Err(CaseError::RowTooShort {
                        table,
                        row: i + 1,
                        min,
                        found: row.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses case text, auto-detecting the JSON mirror (leading `{`) versus the
/// MATPOWER `.m` format.
pub fn parse_case(text: &str) -> Result<RawCase, CaseError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        parse_case_json(text)
    } else {
        parse_case_matpower(text)
    }
}

/// Parses the JSON mirror `{base_mva, bus: [...], gen: [...], branch: [...]}`.
pub fn parse_case_json(text: &str) -> Result<RawCase, CaseError> {
    let case: RawCase = serde_json::from_str(text).map_err(|e| CaseError::Json(e.to_string()))?;
    case.validate_widths()?;
    Ok(case)
}

/// Parses the MATPOWER `.m` subset: `mpc.baseMVA = <num>;` plus bracketed
/// numeric matrices for `mpc.bus`, `mpc.gen`, and `mpc.branch`. `%` starts a
/// comment, rows end at `;` or a newline, and every failure is reported with
/// its source line number.
pub fn parse_case_matpower(text: &str) -> Result<RawCase, CaseError> {
    let mut base_mva: Option<f64> = None;
    let mut tables: HashMap<&'static str, Vec<Vec<f64>>> = HashMap::new();
    let mut current: Option<(&'static str, Vec<Vec<f64>>)> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('%') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if current.is_none() {
            if let Some(rest) = line.strip_prefix("mpc.baseMVA") {
                let rest = rest.trim_start();
                let value = rest
                    .strip_prefix('=')
                    .ok_or_else(|| CaseError::Parse {
                        line: lineno,
                        msg: "expected `=` after mpc.baseMVA".into(),
                    })?
                    .trim()
                    .trim_end_matches(';')
                    .trim();
                base_mva = Some(value.parse().map_err(|_| CaseError::NonNumeric {
                    line: lineno,
                    token: value.to_string(),
                })?);
                continue;
            }
            let section = [
                ("mpc.bus", "bus"),
                ("mpc.gencost", ""), // skipped, but must not match mpc.gen
                ("mpc.gen", "gen"),
                ("mpc.branch", "branch"),
            ]
            .iter()
            .find_map(|(prefix, name)| {
                line.strip_prefix(prefix).and_then(|rest| {
                    // Reject longer identifiers such as mpc.bus_name.
                    let next = rest.chars().next();
                    if matches!(next, Some(c) if c == '_' || c.is_alphanumeric()) {
                        None
                    } else {
                        Some((*name, rest))
                    }
                })
            });
            if let Some((name, rest)) = section {
                let rest = rest.trim_start();
                let Some(body) = rest.strip_prefix('=') else {
                    continue;
                };
                let body = body.trim_start();
                if !body.starts_with('[') {
                    // Non-matrix assignment (e.g. a scalar); ignore.
                    continue;
                }
                if name.is_empty() {
                    // mpc.gencost and friends: skip to the closing bracket.
                    current = Some(("", Vec::new()));
                } else {
                    current = Some((name, Vec::new()));
                }
                let after = &body[1..];
                consume_matrix_text(after, lineno, &mut current, &mut tables)?;
                continue;
            }
            // Any other assignment (mpc.version, function header, ...) is ignored.
            continue;
        }

        consume_matrix_text(line, lineno, &mut current, &mut tables)?;
    }

    if let Some((name, _)) = current {
        let name = if name.is_empty() { "matrix" } else { name };
        return Err(CaseError::Parse {
            line: text.lines().count(),
            msg: format!("unterminated `{name}` matrix (missing `];`)"),
        });
    }

    let base_mva = base_mva.ok_or(CaseError::MissingSection("mpc.baseMVA"))?;
    let bus = tables
        .remove("bus")
        .ok_or(CaseError::MissingSection("mpc.bus"))?;
    let gen = tables
        .remove("gen")
        .ok_or(CaseError::MissingSection("mpc.gen"))?;
    let branch = tables
        .remove("branch")
        .ok_or(CaseError::MissingSection("mpc.branch"))?;

    let case = RawCase {
        name: None,
        notes: None,
        base_mva,
        bus,
        gen,
        branch,
    };
    case.validate_widths()?;
    check_rectangular(&case)?;
    Ok(case)
}

/// Feeds one line of matrix body text into the active table, closing it when
/// `]` appears. Rows end at `;` or at the end of the line.
fn consume_matrix_text(
    text: &str,
    lineno: usize,
    current: &mut Option<(&'static str, Vec<Vec<f64>>)>,
    tables: &mut HashMap<&'static str, Vec<Vec<f64>>>,
) -> Result<(), CaseError> {
    let (closed, body) = match text.find(']') {
        Some(p) => (true, &text[..p]),
        None => (false, text),
    };

    let (_, rows) = current.as_mut().expect("active matrix");
    for piece in body.split(';') {
        let mut row = Vec::new();
        for token in piece.split([' ', '\t', ',']).filter(|t| !t.is_empty()) {
            let v: f64 = token.parse().map_err(|_| CaseError::NonNumeric {
                line: lineno,
                token: token.to_string(),
            })?;
            row.push(v);
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }

    if closed {
        let (name, rows) = current.take().expect("active matrix");
        if !name.is_empty() {
            tables.insert(name, rows);
        }
    }
    Ok(())
}

fn check_rectangular(case: &RawCase) -> Result<(), CaseError> {
    for (_, rows) in [
        ("bus", &case.bus),
        ("gen", &case.gen),
        ("branch", &case.branch),
    ] {
        if let Some(first) = rows.first() {
            let expected = first.len();
            for row in rows.iter() {
                if row.len() != expected {
                    return Err(CaseError::RaggedRow {
                        line: 0,
                        expected,
                        found: row.len(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Serializes a case back to MATPOWER text. Together with
/// [`parse_case_matpower`] this round-trips the numeric content exactly.
pub fn to_matpower(case: &RawCase) -> String {
    let mut out = String::new();
    out.push_str("function mpc = case\n");
    out.push_str(&format!("mpc.baseMVA = {};\n", case.base_mva));
    for (name, rows) in [
        ("bus", &case.bus),
        ("gen", &case.gen),
        ("branch", &case.branch),
    ] {
        out.push_str(&format!("mpc.{name} = [\n"));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push('\t');
            out.push_str(&cells.join(" "));
            out.push_str(";\n");
        }
        out.push_str("];\n");
    }
    out
}

/// How to restore `1'P = 0` when the source injections carry losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rebalance {
    /// Scale every positive injection by `total_load / total_gen`.
    #[default]
    Proportional,
    /// Assign the whole mismatch to the largest generator injection.
    Slack,
}

impl fmt::Display for Rebalance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rebalance::Proportional => f.write_str("proportional"),
            Rebalance::Slack => f.write_str("slack"),
        }
    }
}

impl std::str::FromStr for Rebalance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proportional" => Ok(Rebalance::Proportional),
            "slack" => Ok(Rebalance::Slack),
            other => Err(format!(
                "unknown rebalance policy `{other}` (expected `proportional` or `slack`)"
            )),
        }
    }
}

/// Builds the lossless network from a raw case.
///
/// In-service branches keep their file order, which defines the 1-based line
/// indices used in every report. Out-of-service branches are dropped
/// entirely; parallel branches stay distinct.
pub fn build_network(raw: &RawCase, rebalance: Rebalance) -> Result<PowerNetwork, CaseError> {
    raw.validate_widths()?;

    let mut index_of: HashMap<i64, usize> = HashMap::with_capacity(raw.bus.len());
    for (i, row) in raw.bus.iter().enumerate() {
        let id = row[BUS_ID] as i64;
        if index_of.insert(id, i).is_some() {
            return Err(CaseError::DuplicateBus(id));
        }
    }
    let n = raw.bus.len();

    let mut lines = Vec::new();
    let mut admittance = Vec::new();
    for (rowno, row) in raw.branch.iter().enumerate() {
        if row[BR_STATUS] <= 0.0 {
            continue; // out-of-service branches are not outage candidates
        }
        let from_id = row[BR_FROM] as i64;
        let to_id = row[BR_TO] as i64;
        let x = row[BR_X];
        if x <= 0.0 {
            return Err(CaseError::NonPositiveReactance {
                row: rowno + 1,
                from: from_id,
                to: to_id,
                x,
            });
        }
        let from = *index_of.get(&from_id).ok_or(CaseError::UnknownBus {
            table: "branch",
            row: rowno + 1,
            bus: from_id,
        })?;
        let to = *index_of.get(&to_id).ok_or(CaseError::UnknownBus {
            table: "branch",
            row: rowno + 1,
            bus: to_id,
        })?;
        lines.push(Line { from, to });
        admittance.push(1.0 / x);
    }

    let mut injection = vec![0.0_f64; n];
    for (i, row) in raw.bus.iter().enumerate() {
        injection[i] -= row[BUS_PD] / raw.base_mva;
    }
    for (rowno, row) in raw.gen.iter().enumerate() {
        if row[GEN_STATUS] <= 0.0 {
            continue;
        }
        let bus_id = row[GEN_BUS] as i64;
        let bus = *index_of.get(&bus_id).ok_or(CaseError::UnknownBus {
            table: "gen",
            row: rowno + 1,
            bus: bus_id,
        })?;
        injection[bus] += row[GEN_PG] / raw.base_mva;
    }

    rebalance_injections(&mut injection, rebalance)?;

    Ok(PowerNetwork::new(
        lines,
        admittance,
        injection,
        raw.base_mva,
    )?)
}

/// Scales or shifts injections in place until they sum to zero.
fn rebalance_injections(injection: &mut [f64], policy: Rebalance) -> Result<(), CaseError> {
    let total_gen: f64 = injection.iter().filter(|&&p| p > 0.0).sum();
    let total_load: f64 = -injection.iter().filter(|&&p| p < 0.0).sum::<f64>();
    if total_load <= 0.0 {
        return Err(CaseError::ZeroLoad);
    }
    if total_gen <= 0.0 {
        return Err(CaseError::RebalanceInfeasible(
            "no positive injections to scale".into(),
        ));
    }
    match policy {
        Rebalance::Proportional => {
            let factor = total_load / total_gen;
            for p in injection.iter_mut() {
                if *p > 0.0 {
                    *p *= factor;
                }
            }
        }
        Rebalance::Slack => {
            let mismatch = total_gen - total_load;
            let (slack, &largest) = injection
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| {
                    a.partial_cmp(b).unwrap().then(ib.cmp(ia)) // ties: lowest index wins
                })
                .expect("nonempty injections");
            if largest - mismatch < 0.0 {
                return Err(CaseError::RebalanceInfeasible(format!(
                    "largest generator ({largest:.4} pu) cannot absorb mismatch {mismatch:.4} pu"
                )));
            }
            injection[slack] -= mismatch;
        }
    }
    // Absorb the rounding dust so the network invariant holds exactly.
    let residue: f64 = injection.iter().sum();
    if residue != 0.0 {
        let (imax, _) = injection
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .expect("nonempty injections");
        injection[imax] -= residue;
    }
    Ok(())
}
