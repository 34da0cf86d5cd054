//! Named, reproducible experiments with JSON, CSV and text reports.

mod branching;
mod germ;
mod grid;
mod seq;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scale::{WeightSchedule, DEFAULT_SPACING};

/// Effective configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    /// `delta_i` per level.
    pub deltas: Vec<f64>,
    pub spacing: f64,
    /// Coarser spacing for the germ sweeps.
    pub germ_spacing: f64,
    pub truncation: usize,
    /// Overrides the experiment's own t-grid.
    pub t_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub samples: usize,
    pub germ_level: u32,
    pub exact_tol: f64,
    pub fd_tol: f64,
    pub orth_tol: f64,
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            deltas: WeightSchedule::default().deltas().to_vec(),
            spacing: DEFAULT_SPACING,
            germ_spacing: 1.0 / 256.0,
            truncation: crate::gallery::DEFAULT_TRUNCATION,
            t_grid: None,
            seed: 7,
            samples: 64,
            germ_level: 0,
            exact_tol: 1e-12,
            fd_tol: 1e-6,
            orth_tol: 1e-10,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spacing", self.spacing),
            ("germ_spacing", self.germ_spacing),
            ("exact_tol", self.exact_tol),
            ("fd_tol", self.fd_tol),
            ("orth_tol", self.orth_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LabError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.truncation < 2 || self.samples == 0 {
            return Err(LabError::Config(
                "truncation must be at least 2 and samples positive".into(),
            ));
        }
        self.weights()?;
        Ok(())
    }

    pub fn weights(&self) -> Result<WeightSchedule> {
        WeightSchedule::new(self.deltas.clone()).map_err(|e| LabError::Config(e.to_string()))
    }

    fn t_grid_or(&self, default: &[f64]) -> Vec<f64> {
        self.t_grid.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// How a claimed value is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// An exact statement of the construction.
    Stated,
    /// Computed from the construction, frozen by an independent oracle.
    Derived,
    /// Follows from the definitions directly.
    Elementary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub claimed: String,
    /// `None` when non-finite or when the measurement itself failed.
    pub measured: Option<f64>,
    pub pass: bool,
    pub provenance: Provenance,
    pub anchor: String,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl EnvStamp {
    pub fn current() -> Self {
        EnvStamp {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub anchor: String,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub series: Vec<Series>,
    pub config: ExperimentConfig,
    pub environment: EnvStamp,
}

impl ExperimentReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Collects check records; measurement errors become failing checks.
pub(crate) struct Checks {
    anchor: &'static str,
    records: Vec<CheckRecord>,
    series: Vec<Series>,
}

impl Checks {
    fn new(anchor: &'static str) -> Self {
        Checks {
            anchor,
            records: Vec::new(),
            series: Vec::new(),
        }
    }

    fn record(
        &mut self,
        name: impl Into<String>,
        claimed: impl Into<String>,
        provenance: Provenance,
        measured: Result<(f64, bool)>,
    ) -> &mut CheckRecord {
        let (measured, pass, note) = match measured {
            Ok((m, p)) => (m.is_finite().then_some(m), p, None),
            Err(e) => (None, false, Some(e.to_string())),
        };
        self.records.push(CheckRecord {
            name: name.into(),
            claimed: claimed.into(),
            measured,
            pass,
            provenance,
            anchor: self.anchor.to_string(),
            note,
        });
        self.records.last_mut().unwrap()
    }

    fn noted(
        &mut self,
        name: impl Into<String>,
        claimed: impl Into<String>,
        provenance: Provenance,
        measured: Result<(f64, bool)>,
        note: impl Into<String>,
    ) {
        let r = self.record(name, claimed, provenance, measured);
        let extra = note.into();
        r.note = Some(match r.note.take() {
            Some(e) => format!("{extra}; {e}"),
            None => extra,
        });
    }

    fn series(&mut self, name: &str, x: &str, y: &str, points: Vec<(f64, f64)>) {
        self.series.push(Series {
            name: name.into(),
            x: x.into(),
            y: y.into(),
            points,
        });
    }

    fn finish(self, id: &str, config: &ExperimentConfig) -> ExperimentReport {
        let mut config = config.clone();
        config.experiment = Some(id.to_string());
        ExperimentReport {
            experiment: id.to_string(),
            anchor: self.anchor.to_string(),
            pass: self.records.iter().all(|c| c.pass) && !self.records.is_empty(),
            checks: self.records,
            series: self.series,
            config,
            environment: EnvStamp::current(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentInfo {
    pub id: &'static str,
    pub anchor: &'static str,
    pub summary: &'static str,
}

const CATALOGUE: [ExperimentInfo; 13] = [
    ExperimentInfo {
        id: "retract-image-gap",
        anchor: "<pr_2 s(t,f), beta_t> = 0; ds(t,0)(0, beta_t) = 0",
        summary: "projection orthogonality, retract witness, kernel of ds(t,0), rank of drho",
    },
    ExperimentInfo {
        id: "identity-differential",
        anchor: "ds(0,0) = id",
        summary: "difference quotients of s and h at the origin",
    },
    ExperimentInfo {
        id: "inverse-blowup",
        anchor: "log pr_y s~^{-1}(t,0,f) >= e^{1/t^2} - 2 delta e^{1/t} - 2/t - log 4",
        summary: "log-domain blow-up of the inverse on the analytic tail",
    },
    ExperimentInfo {
        id: "g0-smoothness",
        anchor: "t^{-l} e^{delta e^{1/t}/2 + m/t^2 + n/t} e^{-e^{1/t^2}} -> 0",
        summary: "limit family controlling the derivatives of g_0",
    },
    ExperimentInfo {
        id: "noncompact-zeroset",
        anchor: "||beta_{1/n} - beta_{1/m}||_{L2} = sqrt(2)",
        summary: "zero set of h is not locally compact",
    },
    ExperimentInfo {
        id: "branching-zeroset",
        anchor: "x = phi_t(x) at x = 0 and x = e^{-e^{1/t^2}}",
        summary: "two branches of zeros meeting at t = 0",
    },
    ExperimentInfo {
        id: "transversality-witness",
        anchor: "(d/dt phi_t)(x_t) = (1/t^3) e^{1/t^2 - 2 e^{1/t^2}}",
        summary: "failure locus and the two routes to the witness value",
    },
    ExperimentInfo {
        id: "opnorm-dichotomy",
        anchor: "||dh(t,0) - dh(0,0)|| >= |phi_t'(0)| on L2 vs <= e^{-delta(e^{1/t}-1)} |phi_t'(0)| on H^{1,delta}",
        summary: "operator norm of the differential jump on two levels",
    },
    ExperimentInfo {
        id: "germ-continuity",
        anchor: "||B(c,w1) - B(c,w2)|| <= eps ||w1 - w2|| on |c|, |w| < delta",
        summary: "contraction certificates and d_W B probes for basic germs",
    },
    ExperimentInfo {
        id: "germ-openness",
        anchor: "Df(c,w) invertible near 0 for basic germs",
        summary: "condition numbers of truncated germ differentials",
    },
    ExperimentInfo {
        id: "seq-discontinuity",
        anchor: "||(s_{1/n} - s_0) e_n||_i = 1/2 ||e_n||_i",
        summary: "differential of the sequence diffeomorphism jumps at t = 0",
    },
    ExperimentInfo {
        id: "seq-tail-bounds",
        anchor: "||p_n x||_i = n^{-3k} ||p_n x||_{i+k}; ||(1-P_N) x||_i <= N^{-3k} ||x||_{i+k}",
        summary: "projection and tail estimates of the sequence scale",
    },
    ExperimentInfo {
        id: "seq-tangent-check",
        anchor: "D rho_k(t,x)(T,X) = rho_k(t,X) + T rho_{k+1}(t,x)",
        summary: "tangent map of rho_k against difference quotients",
    },
];

pub fn catalogue() -> &'static [ExperimentInfo] {
    &CATALOGUE
}

fn info(id: &str) -> Result<&'static ExperimentInfo> {
    CATALOGUE
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| LabError::UnknownExperiment(id.to_string()))
}

/// Runs one experiment. Failing checks are reported, not raised.
pub fn run(id: &str, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let info = info(id)?;
    config.validate()?;
    let mut c = Checks::new(info.anchor);
    match id {
        "retract-image-gap" => grid::retract_image_gap(&mut c, config)?,
        "identity-differential" => grid::identity_differential(&mut c, config)?,
        "inverse-blowup" => grid::inverse_blowup(&mut c, config)?,
        "g0-smoothness" => grid::g0_smoothness(&mut c, config)?,
        "noncompact-zeroset" => grid::noncompact_zeroset(&mut c, config)?,
        "branching-zeroset" => branching::branching_zeroset(&mut c, config)?,
        "transversality-witness" => branching::transversality_witness(&mut c, config)?,
        "opnorm-dichotomy" => branching::opnorm_dichotomy(&mut c, config)?,
        "germ-continuity" => germ::germ_continuity(&mut c, config)?,
        "germ-openness" => germ::germ_openness(&mut c, config)?,
        "seq-discontinuity" => seq::seq_discontinuity(&mut c, config)?,
        "seq-tail-bounds" => seq::seq_tail_bounds(&mut c, config)?,
        "seq-tangent-check" => seq::seq_tangent_check(&mut c, config)?,
        _ => unreachable!("catalogue and dispatch disagree on {id}"),
    }
    Ok(c.finish(id, config))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(LabError::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

fn fmt_measured(m: Option<f64>) -> String {
    m.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Check table with columns `experiment,check,claimed,measured,pass`.
pub fn render_csv(reports: &[&ExperimentReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "check", "claimed", "measured", "pass"])
        .map_err(csv_err)?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.experiment.as_str(),
                c.name.as_str(),
                c.claimed.as_str(),
                &fmt_measured(c.measured),
                if c.pass { "true" } else { "false" },
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(std::io::Error::other(e))
}

pub fn render_series_csv(s: &Series) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([s.x.as_str(), s.y.as_str()]).map_err(csv_err)?;
    for (x, y) in &s.points {
        w.write_record([format!("{x:e}"), format!("{y:e}")])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_text(r: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}  [{}]", r.experiment, if r.pass { "PASS" } else { "FAIL" });
    let _ = writeln!(out, "  {}", r.anchor);
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  {} {:<44} claimed {:<28} measured {}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.claimed,
            c.measured.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into()),
        );
        if let Some(n) = &c.note {
            let _ = writeln!(out, "       note: {n}");
        }
    }
    out
}

pub fn render(r: &ExperimentReport, format: Format) -> Result<String> {
    match format {
        Format::Json => r.to_json(),
        Format::Csv => render_csv(&[r]),
        Format::Text => Ok(render_text(r)),
    }
}

/// Writes `<id>.<ext>` plus one `<id>-<series>.csv` per series into `dir`.
pub fn emit(r: &ExperimentReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let main = dir.join(format!("{}.{}", r.experiment, format.extension()));
    fs::write(&main, render(r, format)?)?;
    written.push(main);
    for s in &r.series {
        let p = dir.join(format!("{}-{}.csv", r.experiment, s.name));
        fs::write(&p, render_series_csv(s)?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_has_thirteen_unique_ids() {
        let mut ids: Vec<_> = catalogue().iter().map(|e| e.id).collect();
        assert_eq!(ids.len(), 13);
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 13);
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        let e = run("no-such-thing", &ExperimentConfig::default()).unwrap_err();
        assert!(matches!(e, LabError::UnknownExperiment(_)));
    }

    #[test]
    fn config_rejects_unknown_and_bad_fields() {
        assert!(ExperimentConfig::from_json(r#"{"seed": 3}"#).unwrap().seed == 3);
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"sede": 3}"#),
            Err(LabError::Config(_))
        ));
        assert!(ExperimentConfig::from_json(r#"{"fd_tol": -1.0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"deltas": [0.2, 0.1]}"#).is_err());
    }

    #[test]
    fn failed_measurement_becomes_failing_check() {
        let mut c = Checks::new("x");
        c.record("boom", "ok", Provenance::Elementary, Err(LabError::ZeroVector));
        c.record("fine", "ok", Provenance::Elementary, Ok((1.0, true)));
        let r = c.finish("seq-discontinuity", &ExperimentConfig::default());
        assert!(!r.pass);
        assert_eq!(r.failed_checks().count(), 1);
        assert!(r.check("boom").unwrap().note.is_some());
    }

    #[test]
    fn csv_schema_is_fixed() {
        let r = run("seq-discontinuity", &ExperimentConfig::default()).unwrap();
        let text = render_csv(&[&r]).unwrap();
        assert_eq!(text.lines().next().unwrap(), "experiment,check,claimed,measured,pass");
        assert_eq!(text.lines().count(), r.checks.len() + 1);
    }
}
