//! CSV ingestion of observed series and emission of trajectories.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use gapdyn::{EstimationError, ObservedSeries, Trajectory};
use thiserror::Error;

/// Relative tolerance on each time step against the first one.
pub const SPACING_TOL: f64 = 1e-9;

pub const TRAJECTORY_HEADER: &str = "t,y,ydot,eps";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("missing header with columns 't' and 'y'")]
    MissingHeader,
    #[error("row {row}: {detail}")]
    Malformed { row: u64, detail: String },
    #[error("row {row}: cannot parse '{text}' in column {column}")]
    BadNumber {
        row: u64,
        column: &'static str,
        text: String,
    },
    #[error("row {row}: step {step} differs from inferred dt {dt}")]
    NonUniformSpacing { row: u64, step: f64, dt: f64 },
    #[error("need at least two rows to infer dt, found {0}")]
    TooFewRows(usize),
}

impl CsvError {
    pub fn name(&self) -> &'static str {
        match self {
            CsvError::Io { .. } => "Io",
            CsvError::MissingHeader => "MissingHeader",
            CsvError::Malformed { .. } => "Malformed",
            CsvError::BadNumber { .. } => "BadNumber",
            CsvError::NonUniformSpacing { .. } => "NonUniformSpacing",
            CsvError::TooFewRows(_) => "TooFewRows",
        }
    }
}

/// A uniformly sampled `t,y` column pair as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hands the values to the estimators, which need at least three.
    pub fn to_observed(&self) -> Result<ObservedSeries, EstimationError> {
        ObservedSeries::new(self.dt, self.values.clone())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CsvError + '_ {
    move |source| CsvError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a `t,y` series; extra columns are ignored. Row numbers in errors
/// are file line numbers, the header being line 1.
pub fn read_series<R: Read>(input: R) -> Result<SampledSeries, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|_| CsvError::MissingHeader)?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(t_col), Some(y_col)) = (col("t"), col("y")) else {
        return Err(CsvError::MissingHeader);
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CsvError::Malformed {
            row: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |idx: usize, column: &'static str| -> Result<f64, CsvError> {
            let text = record.get(idx).unwrap_or("");
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CsvError::BadNumber {
                    row,
                    column,
                    text: text.to_string(),
                })
        };
        times.push(field(t_col, "t")?);
        values.push(field(y_col, "y")?);
        rows.push(row);
    }

    if times.len() < 2 {
        return Err(CsvError::TooFewRows(times.len()));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(CsvError::NonUniformSpacing {
            row: rows[1],
            step: dt,
            dt,
        });
    }
    for i in 2..times.len() {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > SPACING_TOL * dt {
            return Err(CsvError::NonUniformSpacing {
                row: rows[i],
                step,
                dt,
            });
        }
    }
    Ok(SampledSeries { dt, times, values })
}

pub fn read_series_csv(path: &Path) -> Result<SampledSeries, CsvError> {
    read_series(File::open(path).map_err(io_err(path))?)
}

/// Formats a trajectory as `t,y,ydot,eps` with 17 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(80 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for ((t, s), eps) in traj.grid().times().zip(traj.states()).zip(traj.forcing()) {
        out.push_str(&format!(
            "{t:.16e},{:.16e},{:.16e},{eps:.16e}\n",
            s.y, s.ydot
        ));
    }
    out
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    out.write_all(trajectory_csv(traj).as_bytes())?;
    out.flush()
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<(), CsvError> {
    std::fs::write(path, trajectory_csv(traj)).map_err(io_err(path))
}
