use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use leviflat::output::to_json_string;
use leviflat::Error;

use crate::config::RunConfig;

pub const REPORT_FILE: &str = "report.json";
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A diagnostic failed: the computation ran but a property did not hold.
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Error => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// `"<="`, `">"` or `"=="` between value and threshold.
    pub relation: &'static str,
    pub threshold: f64,
}

impl CheckOutcome {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        CheckOutcome { name: name.into(), pass: value <= threshold, value, relation: "<=", threshold }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        CheckOutcome { name: name.into(), pass: value > threshold, value, relation: ">", threshold }
    }

    pub fn equal(name: &str, value: f64, threshold: f64) -> Self {
        CheckOutcome { name: name.into(), pass: value == threshold, value, relation: "==", threshold }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Everything that varies between otherwise identical runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct WallClock {
    pub stages: Vec<StageTime>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Option<RunConfig>,
    pub status: Status,
    pub exit_code: i32,
    pub stages: Vec<StageReport>,
    pub checks: Vec<CheckOutcome>,
    /// Per-disc diagnostics table.
    pub diagnostics: Vec<Value>,
    pub files: Vec<ManifestEntry>,
    pub wall_clock: WallClock,
}

impl RunReport {
    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Failure of a stage, split by exit-code class.
#[derive(Debug)]
pub enum StageError {
    Diagnostic(String),
    Error(String),
}

impl From<Error> for StageError {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { .. }
            | Error::NoMatch { .. }
            | Error::StepUnderflow { .. }
            | Error::WindingChanged { .. }
            | Error::ClosedLeafDetected { .. }
            | Error::AdaptationFailure(_) => StageError::Diagnostic(e.to_string()),
            other => StageError::Error(other.to_string()),
        }
    }
}

impl From<io::Error> for StageError {
    fn from(e: io::Error) -> Self {
        StageError::Error(e.to_string())
    }
}

impl From<serde_json::Error> for StageError {
    fn from(e: serde_json::Error) -> Self {
        StageError::Error(e.to_string())
    }
}

/// Accumulates stages, checks and files of one command and writes the report.
pub struct Recorder {
    out: PathBuf,
    quiet: bool,
    start: Instant,
    report: RunReport,
}

impl Recorder {
    pub fn new(command: &str, config: Option<RunConfig>, out: &Path, quiet: bool) -> Self {
        Recorder {
            out: out.to_path_buf(),
            quiet,
            start: Instant::now(),
            report: RunReport {
                command: command.into(),
                config,
                status: Status::Pass,
                exit_code: 0,
                stages: Vec::new(),
                checks: Vec::new(),
                diagnostics: Vec::new(),
                files: Vec::new(),
                wall_clock: WallClock::default(),
            },
        }
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    /// Runs a stage returning a value and its JSON details. `None` on failure.
    pub fn stage<T, D: Serialize>(&mut self, name: &str, f: impl FnOnce() -> Result<(T, D), StageError>) -> Option<T> {
        let t0 = Instant::now();
        let outcome = f();
        let seconds = t0.elapsed().as_secs_f64();
        self.report.wall_clock.stages.push(StageTime { stage: name.into(), seconds });
        let (status, message, details, value) = match outcome {
            Ok((v, d)) => match serde_json::to_value(d) {
                Ok(d) => (Status::Pass, None, d, Some(v)),
                Err(e) => (Status::Error, Some(e.to_string()), Value::Null, None),
            },
            Err(StageError::Diagnostic(m)) => (Status::Fail, Some(m), Value::Null, None),
            Err(StageError::Error(m)) => (Status::Error, Some(m), Value::Null, None),
        };
        self.note(match &message {
            None => format!("[{name}] ok ({seconds:.2} s)"),
            Some(m) => format!("[{name}] {status:?}: {m}"),
        });
        self.report.stages.push(StageReport { name: name.into(), status, message, details });
        value
    }

    /// Marks the most recent stage as a diagnostic failure while keeping its value.
    pub fn fail_last(&mut self, message: String) {
        let quiet = self.quiet;
        if let Some(s) = self.report.stages.last_mut() {
            if !quiet {
                eprintln!("[{}] Fail: {message}", s.name);
            }
            s.status = s.status.max(Status::Fail);
            s.message = Some(message);
        }
    }

    pub fn check(&mut self, c: CheckOutcome) {
        if !c.pass {
            self.note(format!("check {} failed: {} {} {}", c.name, c.value, c.relation, c.threshold));
        }
        self.report.checks.push(c);
    }

    pub fn diagnostics(&mut self, rows: Vec<Value>) {
        self.report.diagnostics = rows;
    }

    /// Writes a data file and lists it in the manifest. Empty files are refused.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), StageError> {
        if contents.is_empty() {
            return Err(StageError::Error(format!("refusing to write empty {name}")));
        }
        std::fs::write(self.out.join(name), contents)?;
        self.report.files.push(ManifestEntry { file: name.into(), bytes: contents.len() as u64 });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), StageError> {
        let s = to_json_string(value)?;
        self.write(name, &s)
    }

    pub fn status(&self) -> Status {
        let stages = self.report.stages.iter().map(|s| s.status).max().unwrap_or(Status::Pass);
        let checks = if self.report.checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
        stages.max(checks)
    }

    /// Writes `report.json` and the failure marker; returns the report.
    pub fn finish(mut self) -> RunReport {
        let status = self.status();
        self.report.status = status;
        self.report.exit_code = status.exit_code();
        self.report.wall_clock.total_seconds = self.start.elapsed().as_secs_f64();
        let marker = self.out.join(FAILED_MARKER);
        let written = to_json_string(&self.report)
            .map_err(|e| e.to_string())
            .and_then(|s| std::fs::write(self.out.join(REPORT_FILE), s).map_err(|e| e.to_string()));
        if let Err(e) = &written {
            eprintln!("cannot write {}: {e}", REPORT_FILE);
            self.report.status = Status::Error;
            self.report.exit_code = 1;
        }
        if self.report.status == Status::Pass {
            let _ = std::fs::remove_file(&marker);
        } else {
            let failed: Vec<String> = self
                .report
                .stages
                .iter()
                .filter(|s| s.status != Status::Pass)
                .map(|s| format!("stage {}: {}", s.name, s.message.as_deref().unwrap_or("failed")))
                .chain(self.report.checks.iter().filter(|c| !c.pass).map(|c| format!("check {}", c.name)))
                .collect();
            let _ = std::fs::write(&marker, format!("{:?}\n{}\n", self.report.status, failed.join("\n")));
        }
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        assert!(matches!(StageError::from(Error::BlowUp { max_grad: 2.0, t: 0.1 }), StageError::Diagnostic(_)));
        assert!(matches!(StageError::from(Error::NoMatch { distance: 1.0, tolerance: 0.1 }), StageError::Diagnostic(_)));
        assert!(matches!(StageError::from(Error::SingularMatrix), StageError::Error(_)));
        assert_eq!([Status::Pass, Status::Fail, Status::Error].map(Status::exit_code), [0, 2, 1]);
    }

    #[test]
    fn recorder_status_and_marker() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Recorder::new("run", None, dir.path(), true);
        assert_eq!(r.stage("a", || Ok((1, "fine"))), Some(1));
        r.write("x.csv", "a,b\n").unwrap();
        assert!(r.write("empty.csv", "").is_err());
        r.check(CheckOutcome::at_most("small", 1.0, 2.0));
        let rep = r.finish();
        assert_eq!(rep.exit_code, 0);
        assert!(!dir.path().join(FAILED_MARKER).exists());
        assert_eq!(rep.files.len(), 1);

        let mut r = Recorder::new("run", None, dir.path(), true);
        let v: Option<()> = r.stage("b", || Err::<((), ()), _>(Error::BlowUp { max_grad: 9.0, t: 0.5 }.into()));
        assert!(v.is_none());
        let rep = r.finish();
        assert_eq!((rep.status, rep.exit_code), (Status::Fail, 2));
        let marker = std::fs::read_to_string(dir.path().join(FAILED_MARKER)).unwrap();
        assert!(marker.contains("stage b"));

        let mut r = Recorder::new("run", None, dir.path(), true);
        r.check(CheckOutcome::above("positive", 0.0, 0.0));
        assert_eq!(r.status(), Status::Fail);
        let _: Option<()> = r.stage("c", || Err::<((), ()), _>(Error::SingularMatrix.into()));
        assert_eq!(r.finish().exit_code, 1);
    }
}
