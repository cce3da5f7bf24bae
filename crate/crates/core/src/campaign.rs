//! Randomized verification campaigns and their reports.
//!
//! Every instance draws from its own RNG stream derived from `(seed, index)`,
//! so any record can be replayed on its own and the report does not depend on
//! evaluation order.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{t_min_bounded, INDISTINGUISHABLE_THETA};
use crate::builder::{build_parallel, optimize_protocol, SearchConfig};
use crate::error::{Error, Result};
use crate::matrix::{haar_unitary_with, UnitaryMatrix};
use crate::measurement::{evaluate_povm, helstrom_povm, unambiguous_povm, UNIT_OVERLAP_TOL};
use crate::protocol::{audit_lemma2, run_protocol, Protocol, SimulationTrace};
use crate::spectral::relative_arc;

/// Slack below which a query bound counts as violated.
pub const THEOREM_TOL: f64 = 1e-6;
/// Slack below which a per-step distance bound counts as violated.
pub const STEP_TOL: f64 = 1e-9;
/// Largest admissible starting distance `D_0`.
pub const D0_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolSource {
    Random,
    Parallel,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFamily {
    /// Two independent Haar unitaries.
    #[default]
    Haar,
    /// Diagonal unitaries with uniform random phases (always commuting).
    CommutingDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub instances: usize,
    pub dim: usize,
    /// Inclusive `[min, max]` query counts.
    pub t_range: [usize; 2],
    pub seed: u64,
    pub protocol_source: ProtocolSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub pair_family: PairFamily,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::Validation("instances must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::Validation("dim must be at least 1".into()));
        }
        if self.t_range[0] > self.t_range[1] {
            return Err(Error::Validation(format!(
                "empty t_range [{}, {}]",
                self.t_range[0], self.t_range[1]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub theta: f64,
    pub queries: usize,
    pub overlap: f64,
    pub helstrom_error: f64,
    /// Worst inconclusive probability of the unambiguous measurement; 1 when
    /// the final states coincide.
    pub unambiguous_inconclusive: f64,
    pub bound_raw: f64,
    pub bound_t: u64,
    /// `None` for zero-query instances, which have no steps.
    pub lemma2_min_slack: Option<f64>,
    pub d0: f64,
    /// `T theta / 2 - sqrt(1 - 4 eps (1 - eps))` with `eps` the Helstrom error.
    pub theorem1_slack_bounded: f64,
    /// `T theta / 2 - sqrt(1 - eps0^2)` with `eps0` the inconclusive probability.
    pub theorem1_slack_onesided: f64,
}

impl InstanceRecord {
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.theorem1_slack_bounded < -THEOREM_TOL || (self.queries as u64) < self.bound_t {
            v.push("theorem1_bounded");
        }
        if self.theorem1_slack_onesided < -THEOREM_TOL {
            v.push("theorem1_onesided");
        }
        if self.lemma2_min_slack.is_some_and(|s| s < -STEP_TOL) {
            v.push("lemma2");
        }
        if self.d0 > D0_TOL {
            v.push("d0");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub instances: usize,
    pub violations_theorem1_bounded: usize,
    pub violations_theorem1_onesided: usize,
    pub violations_lemma2: usize,
    pub violations_d0: usize,
    pub min_theorem1_slack_bounded: Option<f64>,
    pub min_theorem1_slack_onesided: Option<f64>,
    pub min_lemma2_slack: Option<f64>,
    pub max_d0: Option<f64>,
    pub runtime_seconds: f64,
}

impl CampaignSummary {
    pub fn total_violations(&self) -> usize {
        self.violations_theorem1_bounded
            + self.violations_theorem1_onesided
            + self.violations_lemma2
            + self.violations_d0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: Option<CampaignConfig>,
    pub records: Vec<InstanceRecord>,
    pub summary: CampaignSummary,
}

fn min_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, x| Some(acc.map_or(x, |m: f64| m.min(x))))
}

impl CampaignReport {
    /// Aggregates records into a report; `runtime_seconds` is left for the caller.
    pub fn from_records(config: Option<CampaignConfig>, records: Vec<InstanceRecord>) -> Self {
        let count = |name: &str| records.iter().filter(|r| r.violations().contains(&name)).count();
        let summary = CampaignSummary {
            instances: records.len(),
            violations_theorem1_bounded: count("theorem1_bounded"),
            violations_theorem1_onesided: count("theorem1_onesided"),
            violations_lemma2: count("lemma2"),
            violations_d0: count("d0"),
            min_theorem1_slack_bounded: min_of(records.iter().map(|r| r.theorem1_slack_bounded)),
            min_theorem1_slack_onesided: min_of(records.iter().map(|r| r.theorem1_slack_onesided)),
            min_lemma2_slack: min_of(records.iter().filter_map(|r| r.lemma2_min_slack)),
            max_d0: records.iter().map(|r| r.d0).reduce(f64::max),
            runtime_seconds: 0.0,
        };
        Self {
            config,
            records,
            summary,
        }
    }

    /// One line per violating record with what is needed to replay it.
    pub fn violation_lines(&self) -> Vec<String> {
        let seed = self.config.as_ref().map(|c| c.seed);
        self.records
            .iter()
            .filter_map(|r| {
                let v = r.violations();
                (!v.is_empty()).then(|| {
                    format!(
                        "violation [{}] campaign seed {:?} index {} instance seed {} theta {} T {} \
                         bounded slack {} one-sided slack {} lemma2 slack {:?} d0 {}",
                        v.join(","),
                        seed,
                        r.index,
                        r.seed,
                        r.theta,
                        r.queries,
                        r.theorem1_slack_bounded,
                        r.theorem1_slack_onesided,
                        r.lemma2_min_slack,
                        r.d0
                    )
                })
            })
            .collect()
    }
}

/// RNG for instance `index` of a campaign seeded with `seed`.
pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sample_pair(cfg: &CampaignConfig, rng: &mut ChaCha8Rng) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    match cfg.pair_family {
        PairFamily::Haar => Ok((haar_unitary_with(cfg.dim, rng)?, haar_unitary_with(cfg.dim, rng)?)),
        PairFamily::CommutingDiagonal => {
            let mut phases = || -> Vec<f64> {
                (0..cfg.dim)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect()
            };
            let a = phases();
            let b = phases();
            Ok((UnitaryMatrix::diag_phases(&a), UnitaryMatrix::diag_phases(&b)))
        }
    }
}

fn build_trace(
    cfg: &CampaignConfig,
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    queries: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SimulationTrace> {
    if queries == 0 {
        let p = Protocol::random(cfg.dim, cfg.dim, 0, rng)?;
        return run_protocol(u1, u2, &p);
    }
    match cfg.protocol_source {
        ProtocolSource::Random => {
            let p = Protocol::random(cfg.dim, cfg.dim, queries, rng)?;
            run_protocol(u1, u2, &p)
        }
        ProtocolSource::Parallel => build_parallel(u1, u2, queries)?.trace(u1, u2),
        ProtocolSource::Optimized => {
            let search = SearchConfig {
                queries,
                restarts: 2,
                max_iterations: 60,
                step_tolerance: 1e-6,
                seed: rng.random(),
                ancilla_dim: None,
            };
            let out = optimize_protocol(u1, u2, &search)?;
            run_protocol(u1, u2, &out.protocol)
        }
    }
}

/// Evaluates one campaign instance.
pub fn run_instance(cfg: &CampaignConfig, index: usize) -> Result<InstanceRecord> {
    let mut rng = instance_rng(cfg.seed, index);
    let queries = rng.random_range(cfg.t_range[0]..=cfg.t_range[1]);
    let (u1, u2) = sample_pair(cfg, &mut rng)?;
    let (arc, _) = relative_arc(&u1, &u2)?;
    let theta = arc.theta;
    if theta < INDISTINGUISHABLE_THETA {
        return Err(Error::Indistinguishable { theta });
    }
    let trace = build_trace(cfg, &u1, &u2, queries, &mut rng)?;
    let (phi1, phi2) = trace.final_states();
    let overlap = trace.final_overlap;

    let helstrom = evaluate_povm(&helstrom_povm(phi1, phi2)?, phi1, phi2)?;
    let helstrom_error = helstrom.worst_error().min(0.5);
    let unambiguous_inconclusive = if overlap < 1.0 - UNIT_OVERLAP_TOL {
        evaluate_povm(&unambiguous_povm(phi1, phi2)?, phi1, phi2)?.worst_inconclusive()
    } else {
        1.0
    };

    let bound = t_min_bounded(theta, helstrom_error)?;
    let slacks = audit_lemma2(&trace, theta)?;
    let half_reach = queries as f64 * theta / 2.0;
    let bounded_need = (1.0 - 4.0 * helstrom_error * (1.0 - helstrom_error)).max(0.0).sqrt();
    let onesided_need = (1.0 - unambiguous_inconclusive.powi(2)).max(0.0).sqrt();

    Ok(InstanceRecord {
        index,
        seed: cfg.seed,
        theta,
        queries,
        overlap,
        helstrom_error,
        unambiguous_inconclusive,
        bound_raw: bound.raw_value,
        bound_t: bound.t_lower,
        lemma2_min_slack: min_of(slacks.into_iter()),
        d0: trace.distances[0],
        theorem1_slack_bounded: half_reach - bounded_need,
        theorem1_slack_onesided: half_reach - onesided_need,
    })
}

/// Runs every instance of the campaign in index order.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let records = (0..cfg.instances)
        .map(|i| run_instance(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = CampaignReport::from_records(Some(cfg.clone()), records);
    report.summary.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Usage(format!("unknown format {other:?}; expected json or csv"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 13] = [
    "index",
    "seed",
    "theta",
    "queries",
    "overlap",
    "helstrom_error",
    "unambiguous_inconclusive",
    "bound_raw",
    "bound_t",
    "lemma2_min_slack",
    "d0",
    "theorem1_slack_bounded",
    "theorem1_slack_onesided",
];

/// 17 significant digits: enough to read every value back bit for bit.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the report. JSON carries everything; CSV carries one row per record
/// in [`CSV_COLUMNS`] order, with an empty cell for a missing slack.
pub fn emit_report<W: Write>(report: &CampaignReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for r in &report.records {
                w.write_record([
                    r.index.to_string(),
                    r.seed.to_string(),
                    fmt_float(r.theta),
                    r.queries.to_string(),
                    fmt_float(r.overlap),
                    fmt_float(r.helstrom_error),
                    fmt_float(r.unambiguous_inconclusive),
                    fmt_float(r.bound_raw),
                    r.bound_t.to_string(),
                    r.lemma2_min_slack.map(fmt_float).unwrap_or_default(),
                    fmt_float(r.d0),
                    fmt_float(r.theorem1_slack_bounded),
                    fmt_float(r.theorem1_slack_onesided),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Reads records back from the CSV form written by [`emit_report`].
pub fn read_csv_records<R: Read>(input: R) -> Result<Vec<InstanceRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Validation(format!("unexpected CSV header {header:?}")));
    }
    let parse_f = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|e| Error::Validation(format!("bad number {s:?}: {e}")))
    };
    let parse_u = |s: &str| -> Result<u64> {
        s.parse::<u64>().map_err(|e| Error::Validation(format!("bad integer {s:?}: {e}")))
    };
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(InstanceRecord {
                index: parse_u(&row[0])? as usize,
                seed: parse_u(&row[1])?,
                theta: parse_f(&row[2])?,
                queries: parse_u(&row[3])? as usize,
                overlap: parse_f(&row[4])?,
                helstrom_error: parse_f(&row[5])?,
                unambiguous_inconclusive: parse_f(&row[6])?,
                bound_raw: parse_f(&row[7])?,
                bound_t: parse_u(&row[8])?,
                lemma2_min_slack: if row[9].is_empty() { None } else { Some(parse_f(&row[9])?) },
                d0: parse_f(&row[10])?,
                theorem1_slack_bounded: parse_f(&row[11])?,
                theorem1_slack_onesided: parse_f(&row[12])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(instances: usize, source: ProtocolSource) -> CampaignConfig {
        CampaignConfig {
            instances,
            dim: 2,
            t_range: [1, 3],
            seed: 7,
            protocol_source: source,
            output_path: None,
            pair_family: PairFamily::Haar,
        }
    }

    #[test]
    fn zero_query_baseline() {
        let mut c = cfg(1, ProtocolSource::Random);
        c.t_range = [0, 0];
        let r = run_campaign(&c).unwrap();
        let rec = &r.records[0];
        assert_eq!(rec.queries, 0);
        assert!((rec.helstrom_error - 0.5).abs() < 1e-12);
        assert!(rec.theorem1_slack_bounded.abs() < 1e-6);
        assert_eq!(rec.lemma2_min_slack, None);
        assert_eq!(r.summary.total_violations(), 0);
    }

    #[test]
    fn small_campaigns_pass_for_every_source() {
        for source in [ProtocolSource::Random, ProtocolSource::Parallel, ProtocolSource::Optimized] {
            let r = run_campaign(&cfg(6, source)).unwrap();
            assert_eq!(r.summary.total_violations(), 0, "{source:?}: {:?}", r.violation_lines());
        }
    }

    #[test]
    fn instances_are_replayable() {
        let c = cfg(5, ProtocolSource::Random);
        let r = run_campaign(&c).unwrap();
        assert_eq!(run_instance(&c, 3).unwrap(), r.records[3]);
    }

    #[test]
    fn empty_report_has_header_only() {
        let r = CampaignReport::from_records(None, vec![]);
        let mut buf = Vec::new();
        emit_report(&r, ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn three_records_four_lines() {
        let r = run_campaign(&cfg(3, ProtocolSource::Random)).unwrap();
        let mut buf = Vec::new();
        emit_report(&r, ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 4);
        assert_eq!(read_csv_records(&buf[..]).unwrap(), r.records);
    }

    #[test]
    fn summary_minima_match_records() {
        let r = run_campaign(&cfg(10, ProtocolSource::Random)).unwrap();
        let m = r.records.iter().map(|x| x.theorem1_slack_bounded).fold(f64::INFINITY, f64::min);
        assert_eq!(r.summary.min_theorem1_slack_bounded, Some(m));
        let m = r.records.iter().filter_map(|x| x.lemma2_min_slack).fold(f64::INFINITY, f64::min);
        assert_eq!(r.summary.min_lemma2_slack, Some(m));
    }

    #[test]
    fn invalid_configs() {
        let mut c = cfg(0, ProtocolSource::Random);
        assert!(matches!(run_campaign(&c), Err(Error::Validation(_))));
        c.instances = 1;
        c.t_range = [3, 1];
        assert!(matches!(run_campaign(&c), Err(Error::Validation(_))));
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::Usage(_))));
    }

    #[test]
    fn violations_are_reported_with_provenance() {
        let mut rec = run_instance(&cfg(1, ProtocolSource::Random), 0).unwrap();
        rec.theorem1_slack_bounded = -1.0;
        let r = CampaignReport::from_records(Some(cfg(1, ProtocolSource::Random)), vec![rec]);
        assert_eq!(r.summary.violations_theorem1_bounded, 1);
        let lines = r.violation_lines();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].contains("index 0") && lines[0].contains("seed Some(7)"));
    }
}
