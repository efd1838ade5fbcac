//! Reading and writing data sets, fit reports and study tables.
//!
//! Every CSV file starts with a `# frailtykit <version> seed=<seed>` comment
//! line; JSON reports carry the same information as fields and are written
//! with sorted keys. Data set values use 17 significant digits so a written
//! file reads back bit for bit.

use crate::data::{Dataset, ObservationRecord};
use crate::error::{Error, Result};
use crate::inference::{FitConfig, PosteriorDraws, PriorSpec};
use crate::model::ModelSpec;
use crate::selection::{ComparisonRow, WaicResult};
use crate::simulation::{McStudy, ReplicaStatus};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Read;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const REQUIRED: [&str; 3] = ["cluster", "time", "status"];

/// `# frailtykit <version> seed=<seed>`.
pub fn header_comment(seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# frailtykit {VERSION} seed={s}"),
        None => format!("# frailtykit {VERSION} seed=NA"),
    }
}

/// Shortest decimal form that reads back to the same `f64`.
fn real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), real)
}

/// Scientific notation with 17 significant digits.
fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_error(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads a data set from CSV.
///
/// The header must contain `cluster`, `time` and `status`; every other
/// column is a numeric covariate, in header order. Lines starting with `#`
/// are ignored. Errors name the 1-based data row and the column.
pub fn read_dataset_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 3];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = position(name).ok_or_else(|| parse_error(0, name, "required column is missing"))?;
    }
    let covariates: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !REQUIRED.contains(h))
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    if let Some((_, dup)) = covariates
        .iter()
        .enumerate()
        .find(|(k, (_, h))| covariates[..*k].iter().any(|(_, g)| g == h))
    {
        return Err(parse_error(0, &dup.1, "duplicate column name"));
    }

    let mut records = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row_no = k + 1;
        let row = row.map_err(|e| parse_error(row_no, "", e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let number = |i: usize, name: &str| -> Result<f64> {
            let s = field(i);
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_error(row_no, name, format!("`{s}` is not a finite number")))
        };
        let cluster = field(idx[0]).parse::<i64>().map_err(|_| {
            parse_error(row_no, "cluster", format!("`{}` is not an integer", field(idx[0])))
        })?;
        let time = number(idx[1], "time")?;
        if time <= 0.0 {
            return Err(parse_error(row_no, "time", format!("time must be positive, got {time}")));
        }
        let event = match field(idx[2]) {
            "0" => false,
            "1" => true,
            s => return Err(parse_error(row_no, "status", format!("status must be 0 or 1, got `{s}`"))),
        };
        let x = covariates
            .iter()
            .map(|(i, name)| number(*i, name))
            .collect::<Result<Vec<_>>>()?;
        records.push(ObservationRecord::new(cluster, time, event, x));
    }
    Dataset::new(records, covariates.into_iter().map(|(_, h)| h).collect())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset_from(fs::File::open(path)?)
}

fn csv_text(comments: &[String], header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    for c in comments {
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
    Ok(out)
}

pub fn dataset_csv(data: &Dataset, seed: Option<u64>) -> Result<String> {
    let mut header: Vec<String> = REQUIRED.iter().map(|s| s.to_string()).collect();
    header.extend(data.covariate_names().iter().cloned());
    let rows: Vec<Vec<String>> = data
        .records()
        .iter()
        .map(|r| {
            let mut row = vec![r.cluster_id.to_string(), exact(r.time), r.status().to_string()];
            row.extend(r.covariates.iter().map(|&x| exact(x)));
            row
        })
        .collect();
    csv_text(&[header_comment(seed)], &header, &rows)
}

pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset, seed: Option<u64>) -> Result<()> {
    fs::write(path, dataset_csv(data, seed)?)?;
    Ok(())
}

/// One row of the posterior summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataInfo {
    pub n_records: usize,
    pub n_clusters: usize,
    pub n_events: usize,
    pub covariates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerInfo {
    pub chains: usize,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub draws_per_chain: usize,
    pub level: f64,
    pub interval: String,
    pub priors: PriorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsInfo {
    pub max_rhat: f64,
    pub min_ess: f64,
}

/// Everything `fit` records about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub software_version: String,
    pub seed: u64,
    pub label: String,
    pub model: ModelSpec,
    pub data: DataInfo,
    pub sampler: SamplerInfo,
    pub summary: Vec<SummaryRow>,
    pub diagnostics: Option<DiagnosticsInfo>,
    /// `chains × parameters` post-burn-in acceptance rates.
    pub acceptance: Vec<Vec<f64>>,
    pub waic: Option<WaicResult>,
    pub wall_clock_seconds: f64,
}

fn interval_label(level: f64) -> String {
    format!("{}% equal-tailed", real(100.0 * level))
}

impl FitReport {
    pub fn new(
        data: &Dataset,
        spec: &ModelSpec,
        config: &FitConfig,
        draws: &PosteriorDraws,
        waic: Option<WaicResult>,
        wall_clock_seconds: f64,
    ) -> Result<Self> {
        let summaries = draws.summarize(config.level)?;
        let diag = draws.diagnostics();
        let summary = draws
            .param_names
            .iter()
            .zip(&summaries)
            .enumerate()
            .map(|(d, (name, s))| SummaryRow {
                parameter: name.clone(),
                mean: s.mean,
                sd: s.sd,
                median: s.median,
                lower: s.lower,
                upper: s.upper,
                rhat: diag.as_ref().map(|g| g.split_rhat[d]),
                ess: diag.as_ref().map(|g| g.ess[d]),
            })
            .collect();
        Ok(Self {
            software_version: VERSION.to_string(),
            seed: config.seed,
            label: spec.label(),
            model: spec.clone(),
            data: DataInfo {
                n_records: data.len(),
                n_clusters: data.n_clusters(),
                n_events: data.n_events(),
                covariates: data.covariate_names().to_vec(),
            },
            sampler: SamplerInfo {
                chains: config.chains,
                iterations: config.iterations,
                burnin: config.burnin,
                thin: config.thin,
                draws_per_chain: draws.draws_per_chain,
                level: config.level,
                interval: interval_label(config.level),
                priors: config.priors,
            },
            summary,
            diagnostics: diag.map(|g| DiagnosticsInfo {
                max_rhat: g.max_rhat(),
                min_ess: g.min_ess(),
            }),
            acceptance: draws.acceptance.clone(),
            waic,
            wall_clock_seconds,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn summary_csv(&self) -> Result<String> {
        let header: Vec<String> = ["parameter", "mean", "sd", "median", "lower", "upper", "rhat", "ess"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<String>> = self
            .summary
            .iter()
            .map(|r| {
                vec![
                    r.parameter.clone(),
                    real(r.mean),
                    real(r.sd),
                    real(r.median),
                    real(r.lower),
                    real(r.upper),
                    opt_real(r.rhat),
                    opt_real(r.ess),
                ]
            })
            .collect();
        let comments = [
            header_comment(Some(self.seed)),
            format!("# model {}; {} credible intervals", self.label, self.sampler.interval),
        ];
        csv_text(&comments, &header, &rows)
    }
}

/// Pretty JSON with object keys in lexicographic order and a final newline.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = sort_keys(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Retained draws as a CSV matrix whose header is the parameter names.
pub fn draws_csv(draws: &PosteriorDraws) -> Result<String> {
    let rows: Vec<Vec<String>> = draws
        .draws
        .iter()
        .map(|row| row.iter().map(|&x| exact(x)).collect())
        .collect();
    let comments = [
        header_comment(Some(draws.seed)),
        format!(
            "# {} chains x {} draws, stacked in chain order",
            draws.n_chains, draws.draws_per_chain
        ),
    ];
    csv_text(&comments, &draws.param_names, &rows)
}

/// `parameter, truth, est, rb_percent, ase, sde, cp, m_c`; warnings go into
/// comment lines.
pub fn mc_metrics_csv(study: &McStudy) -> Result<String> {
    let header: Vec<String> = ["parameter", "truth", "est", "rb_percent", "ase", "sde", "cp", "m_c"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = study
        .rows
        .iter()
        .map(|r| {
            vec![
                r.parameter.clone(),
                real(r.truth),
                real(r.est),
                opt_real(r.rb_percent),
                real(r.ase),
                real(r.sde),
                real(r.cp),
                r.m_c.to_string(),
            ]
        })
        .collect();
    let mut comments = vec![
        header_comment(Some(study.seed)),
        format!(
            "# {} credible intervals; {} replicas, {} flagged",
            interval_label(study.level),
            study.replicas.len(),
            study.failed
        ),
    ];
    comments.extend(study.warnings.iter().map(|w| format!("# WARN {w}")));
    if study.study_failed {
        comments.push("# STUDY FAILED: too many replicas failed or did not converge".into());
    }
    csv_text(&comments, &header, &rows)
}

/// One row per replica and parameter.
pub fn replicas_csv(study: &McStudy) -> Result<String> {
    let header: Vec<String> = [
        "replica", "status", "parameter", "truth", "mean", "sd", "lower", "upper", "covered",
        "max_rhat", "min_ess", "message",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for rec in &study.replicas {
        let status = match rec.status {
            ReplicaStatus::Ok => "ok",
            ReplicaStatus::NotConverged => "not_converged",
            ReplicaStatus::FitFailed => "fit_failed",
        };
        for (d, name) in study.parameter_names.iter().enumerate() {
            let s = rec.summaries.get(d);
            rows.push(vec![
                rec.replica.to_string(),
                status.to_string(),
                name.clone(),
                real(study.truth[d]),
                opt_real(s.map(|s| s.mean)),
                opt_real(s.map(|s| s.sd)),
                opt_real(s.map(|s| s.lower)),
                opt_real(s.map(|s| s.upper)),
                rec.covered.get(d).map_or("NA".into(), |&c| u8::from(c).to_string()),
                opt_real(rec.max_rhat),
                opt_real(rec.min_ess),
                rec.message.clone().unwrap_or_default(),
            ]);
        }
    }
    let comments = [
        header_comment(Some(study.seed)),
        format!("# {} credible intervals", interval_label(study.level)),
    ];
    csv_text(&comments, &header, &rows)
}

/// A fit run entering a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub source: String,
    pub model: String,
    pub seed: u64,
}

/// `waic_compare.json`: models ranked best first (smallest WAIC).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub software_version: String,
    pub criterion: String,
    pub runs: Vec<RunInfo>,
    pub rows: Vec<ComparisonRow>,
}

impl CompareReport {
    pub fn new(runs: Vec<RunInfo>, rows: Vec<ComparisonRow>) -> Self {
        Self {
            software_version: VERSION.to_string(),
            criterion: "lower WAIC indicates better predictive fit; rows sorted ascending".into(),
            runs,
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_str(s: &str) -> Result<Dataset> {
        read_dataset_from(s.as_bytes())
    }

    #[test]
    fn reads_covariates_in_header_order() {
        let d = read_str("time,cluster,age,status,sex\n1.5,1,40,1,0\n2.0,1,50,0,1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.covariate_names(), ["age", "sex"]);
        assert_eq!(d.records()[1].covariates, vec![50.0, 1.0]);
        assert!(!d.records()[1].event);
    }

    #[test]
    fn required_columns_only() {
        let d = read_str("# comment\ncluster,time,status\n3,0.5,1\n").unwrap();
        assert_eq!(d.n_covariates(), 0);
    }

    #[test]
    fn errors_name_row_and_column() {
        let body = "cluster,time,status\n1,1,1\n1,2,0\n2,1,1\n2,3,0\n3,-1,1\n";
        match read_str(body) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 5);
                assert_eq!(column, "time");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let e = read_str("cluster,time,status\n1,1,2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { row: 1, ref column, .. } if column == "status"));
        let e = read_str("cluster,time,status,z\n1,1,1,abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { row: 1, ref column, .. } if column == "z"));
        let e = read_str("cluster,status\n1,1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { ref column, .. } if column == "time"));
        assert!(read_str("cluster,time,status\n1,0,1\n").is_err());
    }

    #[test]
    fn dataset_round_trip_is_exact() {
        let recs = vec![
            ObservationRecord::new(1, 0.1 + 0.2, true, vec![1.0 / 3.0, -2.5e-300]),
            ObservationRecord::new(-4, 1e10 / 7.0, false, vec![std::f64::consts::PI, 0.0]),
        ];
        let d = Dataset::new(recs, vec!["a".into(), "b".into()]).unwrap();
        let text = dataset_csv(&d, Some(9)).unwrap();
        assert!(text.starts_with(&format!("# frailtykit {VERSION} seed=9\n")));
        assert_eq!(read_str(&text).unwrap(), d);
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct T {
            zeta: u8,
            alpha: Inner,
        }
        #[derive(Serialize)]
        struct Inner {
            y: u8,
            b: u8,
        }
        let s = to_sorted_json(&T { zeta: 1, alpha: Inner { y: 2, b: 3 } }).unwrap();
        let a = s.find("alpha").unwrap();
        assert!(a < s.find("zeta").unwrap());
        assert!(s.find("\"b\"").unwrap() < s.find("\"y\"").unwrap());
    }
}
