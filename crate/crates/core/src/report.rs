//! Tabular and JSON reports backing the command-line tool.
//!
//! Everything here is a pure function of its inputs. Grid work runs on the rayon pool but
//! rows always come back in grid order.

use std::collections::HashSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angles_of, error_threshold, failure_probabilities, ProblemInstance};
use crate::rule::{
    certify, check_applicability, closed_form_bounds, construct_rule, Applicability, CertificateReport,
    RuleMode, StoppingRule,
};
use crate::search::{default_horizon, minimal_odd_l, relaxed_score, strict_distance, torus_point, SearchMode, SearchReport};
use crate::transforms::reduce_common_divisor;

/// Default tolerance `ε`; its error threshold is `sin²(π/6) = 1/4`.
pub const DEFAULT_EPSILON: f64 = 1.0 / 12.0;

pub const TABLE_HEADER: [&str; 14] = [
    "N",
    "M",
    "K",
    "theta_M",
    "theta_K",
    "gamma",
    "applicable",
    "p",
    "s",
    "l_constructive",
    "l_minimal",
    "l_bound",
    "fail_K",
    "fail_M",
];

/// One line of the iteration table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "theta_M")]
    pub theta_m: f64,
    #[serde(rename = "theta_K")]
    pub theta_k: f64,
    pub gamma: Option<f64>,
    /// Every applicability flag holds.
    pub applicable: bool,
    pub p: Option<u64>,
    pub s: Option<u64>,
    /// `p·s`, present when it meets the error threshold.
    pub l_constructive: Option<u64>,
    pub l_minimal: Option<u64>,
    pub l_bound: f64,
    /// Failure probabilities at `l_minimal`, falling back to `p·s`.
    #[serde(rename = "fail_K")]
    pub fail_k: Option<f64>,
    #[serde(rename = "fail_M")]
    pub fail_m: Option<f64>,
}

pub fn table_row(instance: &ProblemInstance, epsilon: f64) -> TableRow {
    let angles = angles_of::<f64>(instance);
    let threshold = error_threshold(epsilon);
    let applicable = check_applicability::<f64>(instance).all_ok();
    let rule = construct_rule::<f64>(instance, RuleMode::BestEffort).ok();
    let l_constructive = rule
        .as_ref()
        .map(|r| r.l)
        .filter(|&l| relaxed_score(l, &angles) <= threshold);
    let search = minimal_odd_l(&angles, threshold, default_horizon(instance), SearchMode::Relaxed);
    let (_, l_bound) = closed_form_bounds::<f64>(instance);
    let eval_at = search.l.or(rule.as_ref().map(|r| r.l));
    let failures = eval_at.map(|l| failure_probabilities(l, &angles));
    TableRow {
        n: instance.n(),
        m: instance.m(),
        k: instance.k(),
        theta_m: angles.theta_m,
        theta_k: angles.theta_k,
        gamma: angles.gamma,
        applicable,
        p: rule.as_ref().map(|r| r.p),
        s: rule.as_ref().map(|r| r.s),
        l_constructive,
        l_minimal: search.l,
        l_bound,
        fail_k: failures.map(|f| f.fail_k),
        fail_m: failures.map(|f| f.fail_m),
    }
}

pub fn build_table(instances: &[ProblemInstance], epsilon: f64) -> Vec<TableRow> {
    instances.par_iter().map(|inst| table_row(inst, epsilon)).collect()
}

/// Parses `7`, `1,2,5`, `1..10` (inclusive), `1..10:3` or any comma-separated mix.
pub fn parse_values(list: &str) -> Result<Vec<u64>> {
    let bad = || Error::Report(format!("cannot parse value list {list:?}"));
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step.parse::<u64>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let lo = lo.parse::<u64>().map_err(|_| bad())?;
            let hi = hi.parse::<u64>().map_err(|_| bad())?;
            if step == 0 || lo > hi {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.push(part.parse::<u64>().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Cartesian product of the value lists, keeping only valid triples, in `N`-major order.
pub fn grid(ns: &[u64], ms: &[u64], ks: &[u64]) -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for &n in ns {
        for &m in ms {
            for &k in ks {
                if let Ok(inst) = ProblemInstance::new(n, m, k) {
                    out.push(inst);
                }
            }
        }
    }
    out
}

/// Reads `N,M,K` lines; blank lines and `#` comments are skipped.
pub fn parse_triples(text: &str) -> Result<Vec<ProblemInstance>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<u64>, _> = fields.iter().map(|f| f.parse::<u64>()).collect();
        match parsed.as_deref() {
            Ok(&[n, m, k]) => out.push(ProblemInstance::new(n, m, k)?),
            _ => return Err(Error::Report(format!("line {}: expected N,M,K", lineno + 1))),
        }
    }
    Ok(out)
}

/// Replaces each triple by its common-divisor reduction and drops repeats.
pub fn dedup_reduced(instances: &[ProblemInstance]) -> Vec<ProblemInstance> {
    let mut seen = HashSet::new();
    instances
        .iter()
        .map(reduce_common_divisor)
        .filter(|inst| seen.insert(*inst))
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Report(e.to_string())
}

/// Header row plus one record per item, LF terminated.
pub fn write_csv<W: Write, R: Serialize>(rows: &[R], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn read_csv<R: Read, T: for<'de> Deserialize<'de>>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Writes the table with its header even when there are no rows.
pub fn write_table_csv<W: Write>(rows: &[TableRow], writer: W) -> Result<()> {
    if rows.is_empty() {
        let mut w = writer;
        writeln!(w, "{}", TABLE_HEADER.join(",")).map_err(csv_err)?;
        return Ok(());
    }
    write_csv(rows, writer)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub l: u64,
    #[serde(rename = "x_K")]
    pub x_k: f64,
    #[serde(rename = "x_M")]
    pub x_m: f64,
    pub strict_distance: f64,
    pub relaxed_score: f64,
}

/// Torus orbit for `l = 1, 3, …, l_max`.
pub fn orbit_trace(instance: &ProblemInstance, l_max: u64) -> Result<Vec<OrbitRow>> {
    if l_max.is_multiple_of(2) {
        return Err(Error::EvenL(l_max));
    }
    let angles = angles_of::<f64>(instance);
    (1..=l_max)
        .step_by(2)
        .map(|l| {
            let pt = torus_point(l, &angles)?;
            Ok(OrbitRow {
                l,
                x_k: pt.x_k,
                x_m: pt.x_m,
                strict_distance: strict_distance(&pt),
                relaxed_score: relaxed_score(l, &angles),
            })
        })
        .collect()
}

/// An instance whose minimal `l` is large relative to the closed-form bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseEntry {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "K")]
    pub k: u64,
    pub l_minimal: Option<u64>,
    pub l_bound: f64,
    pub horizon: u64,
    /// No odd `l ≤ horizon` met the threshold.
    pub exhausted: bool,
    /// `l_minimal / l_bound`, or `horizon / l_bound` (a lower bound) when exhausted.
    pub ratio: f64,
}

/// Lists every valid `(N, M, K)` with `M ∈ ms`, `K ∈ ks` whose minimal `l` exhausts the
/// default horizon or exceeds `ratio_threshold · l_bound`, worst first.
pub fn diagnose(n: u64, ms: &[u64], ks: &[u64], ratio_threshold: f64, epsilon: f64) -> Vec<DiagnoseEntry> {
    let threshold = error_threshold(epsilon);
    let instances = grid(&[n], ms, ks);
    let mut entries: Vec<DiagnoseEntry> = instances
        .par_iter()
        .filter_map(|inst| {
            let angles = angles_of::<f64>(inst);
            let horizon = default_horizon(inst);
            let search = minimal_odd_l(&angles, threshold, horizon, SearchMode::Relaxed);
            let (_, l_bound) = closed_form_bounds::<f64>(inst);
            let ratio = search.l.unwrap_or(horizon) as f64 / l_bound;
            let listed = !search.found || ratio > ratio_threshold;
            listed.then(|| DiagnoseEntry {
                n: inst.n(),
                m: inst.m(),
                k: inst.k(),
                l_minimal: search.l,
                l_bound,
                horizon,
                exhausted: !search.found,
                ratio,
            })
        })
        .collect();
    entries.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    entries
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RulePath {
    /// `M > 0`: the constructive rule.
    Constructive,
    /// `M = 0`: ordinary Grover search, `l` from the exhaustive scan.
    PlainGrover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleStatus {
    Certified,
    /// Best-effort output whose certificate has failing checks.
    Uncertified,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub instance: ProblemInstance,
    pub path: RulePath,
    pub mode: RuleMode,
    pub status: RuleStatus,
    pub epsilon: f64,
    pub applicability: Applicability<f64>,
    pub reasons: Vec<String>,
    pub rule: Option<StoppingRule<f64>>,
    pub certificate: Option<CertificateReport<f64>>,
    pub search: Option<SearchReport<f64>>,
    pub l: Option<u64>,
    pub m: Option<u64>,
}

pub fn rule_report(instance: &ProblemInstance, epsilon: f64, mode: RuleMode) -> RuleReport {
    let applicability = check_applicability::<f64>(instance);
    let mut report = RuleReport {
        instance: *instance,
        path: RulePath::Constructive,
        mode,
        status: RuleStatus::NotApplicable,
        epsilon,
        applicability,
        reasons: Vec::new(),
        rule: None,
        certificate: None,
        search: None,
        l: None,
        m: None,
    };
    if instance.is_degenerate() {
        report.path = RulePath::PlainGrover;
        let angles = angles_of::<f64>(instance);
        let search = minimal_odd_l(
            &angles,
            error_threshold(epsilon),
            default_horizon(instance),
            SearchMode::Relaxed,
        );
        if let Some(l) = search.l {
            report.status = RuleStatus::Certified;
            report.l = Some(l);
            report.m = Some((l - 1) / 2);
        } else {
            report.reasons.push("horizon_exhausted".into());
        }
        report.search = Some(search);
        return report;
    }
    match construct_rule::<f64>(instance, mode) {
        Ok(rule) => {
            let cert = certify(&rule, instance, epsilon);
            report.status = if cert.all_passed {
                RuleStatus::Certified
            } else {
                RuleStatus::Uncertified
            };
            report.reasons = cert.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
            report.l = Some(rule.l);
            report.m = Some(rule.m);
            report.rule = Some(rule);
            report.certificate = Some(cert);
        }
        Err(Error::NotApplicable { reasons }) => report.reasons = reasons,
        Err(Error::GammaTooLarge(_)) => report.reasons = vec!["gamma_small".into()],
        Err(e) => report.reasons = vec![e.to_string()],
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u64, m: u64, k: u64) -> ProblemInstance {
        ProblemInstance::new(n, m, k).unwrap()
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("7").unwrap(), vec![7]);
        assert_eq!(parse_values("1,2, 5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_values("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_values("0..10:5,99").unwrap(), vec![0, 5, 10, 99]);
        assert!(parse_values("").is_err());
        assert!(parse_values("5..1").is_err());
        assert!(parse_values("1..3:0").is_err());
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn triples_file() {
        let text = "# N,M,K\n4,0,1\n\n1024, 3, 4\n";
        assert_eq!(parse_triples(text).unwrap(), vec![inst(4, 0, 1), inst(1024, 3, 4)]);
        assert!(parse_triples("4,0").is_err());
        assert!(parse_triples("4,2,1").is_err());
    }

    #[test]
    fn single_plain_grover_row() {
        let row = table_row(&inst(4, 0, 1), DEFAULT_EPSILON);
        assert_eq!(row.l_minimal, Some(3));
        assert_eq!(row.gamma, None);
        assert_eq!(row.p, None);
        assert_eq!(row.l_constructive, None);
        assert!(row.fail_k.unwrap() < 1e-30);
    }

    #[test]
    fn csv_header_and_empty_fields() {
        let rows = build_table(&[inst(4, 0, 1)], DEFAULT_EPSILON);
        let mut buf = Vec::new();
        write_table_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TABLE_HEADER.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 14);
        assert_eq!(fields[5], "");
        assert_eq!(fields[10], "3");
        assert!(!text.contains('\r'));

        let mut buf = Vec::new();
        write_table_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", TABLE_HEADER.join(",")));
    }

    #[test]
    fn json_uses_null_for_absent() {
        let rows = build_table(&[inst(4, 0, 1)], DEFAULT_EPSILON);
        let v: serde_json::Value = serde_json::to_value(&rows).unwrap();
        assert!(v[0]["gamma"].is_null());
        assert_eq!(v[0]["l_minimal"], 3);
        assert!(v[0].get("theta_M").is_some());
    }

    #[test]
    fn reduced_grid_has_no_proportional_triples() {
        let g = grid(&[8, 16, 32], &[0, 1, 2, 4], &[1, 2, 4, 8]);
        let red = dedup_reduced(&g);
        for (i, a) in red.iter().enumerate() {
            for b in &red[i + 1..] {
                assert_ne!(reduce_common_divisor(a), reduce_common_divisor(b));
            }
        }
        assert!(red.len() < g.len());
    }

    #[test]
    fn orbit_examples() {
        let rows = orbit_trace(&inst(4, 0, 1), 5).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].l, 3);
        assert!(rows[1].strict_distance < 1e-15);
        assert!(orbit_trace(&inst(4, 0, 1), 4).is_err());
    }

    #[test]
    fn diagnose_threshold_zero_lists_everything_sorted() {
        let ms: Vec<u64> = (1..6).collect();
        let ks: Vec<u64> = (2..9).collect();
        let n = 1 << 12;
        let entries = diagnose(n, &ms, &ks, 0.0, DEFAULT_EPSILON);
        assert_eq!(entries.len(), grid(&[n], &ms, &ks).len());
        assert!(entries.windows(2).all(|w| w[0].ratio >= w[1].ratio));
    }

    #[test]
    fn rule_report_paths() {
        let r = rule_report(&inst(100, 1, 60), DEFAULT_EPSILON, RuleMode::Strict);
        assert_eq!(r.status, RuleStatus::NotApplicable);
        assert!(r.reasons.contains(&"ordering".to_string()));

        let r = rule_report(&inst(4, 0, 1), DEFAULT_EPSILON, RuleMode::Strict);
        assert_eq!(r.path, RulePath::PlainGrover);
        assert_eq!(r.l, Some(3));
        assert_eq!(r.status, RuleStatus::Certified);

        let r = rule_report(&inst(1_000_000, 1, 2), DEFAULT_EPSILON, RuleMode::BestEffort);
        let rule = r.rule.unwrap();
        assert_eq!((rule.p, rule.s, rule.l), (1, 6283, 6283));
        assert_eq!(r.status, RuleStatus::Uncertified);
    }
}
