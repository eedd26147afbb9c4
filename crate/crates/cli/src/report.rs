use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::args::Common;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(common: &Common) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            seed: common.seed,
            timestamp: (!common.reproducible).then(|| chrono::Utc::now().to_rfc3339()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<I: Serialize, R: Serialize> {
    pub schema: u32,
    pub command: &'static str,
    pub input: I,
    pub result: R,
    pub provenance: Provenance,
}

/// Output of a subcommand: the JSON body and the plot series.
pub struct Output {
    pub json: String,
    pub series: Vec<(f64, f64)>,
}

impl Output {
    pub fn new<I: Serialize, R: Serialize>(
        command: &'static str,
        input: &I,
        result: &R,
        common: &Common,
        series: Vec<(f64, f64)>,
    ) -> Result<Self, CliError> {
        let report = Report {
            schema: SCHEMA,
            command,
            input,
            result,
            provenance: Provenance::new(common),
        };
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        Ok(Self {
            json,
            series,
        })
    }

    pub fn emit(&self, common: &Common) -> Result<(), CliError> {
        if let Some(path) = &common.csv {
            write_atomic(path, &csv_text(&self.series))?;
        }
        match &common.out {
            Some(path) => write_atomic(path, &self.json)?,
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(self.json.as_bytes())?;
                lock.flush()?;
            }
        }
        Ok(())
    }
}

pub fn csv_text(series: &[(f64, f64)]) -> String {
    series.iter().map(|(x, y)| format!("{x},{y:e}\n")).collect()
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
