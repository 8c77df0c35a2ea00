//! CSV formats for trajectories and offline prediction grids.
//!
//! Trajectory files have the header `t,x0,...,x{n-1}` with one row per time
//! step; `t` may be negative for initial history. Offline prediction files have
//! the header `expert,t,x0,...,x{n-1}` with experts numbered from 1 and one row
//! per cell of the grid `[1, N] × [0, T]`. Floats are written with 17
//! significant digits so files round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord};

use crate::error::{OrlError, Result};
use crate::residual::{OfflinePredictionSet, TargetState, Trajectory};

/// 17 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> OrlError {
    OrlError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| OrlError::io(path, e))?;
    Ok(ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn check_header(path: &Path, header: &StringRecord, leading: &[&str]) -> Result<usize> {
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() <= leading.len() || fields[..leading.len()] != *leading {
        return Err(parse_err(
            path,
            1,
            format!("expected header starting with `{},x0`", leading.join(",")),
        ));
    }
    let dim = fields.len() - leading.len();
    for (j, name) in fields[leading.len()..].iter().enumerate() {
        if *name != format!("x{j}") {
            return Err(parse_err(path, 1, format!("expected column `x{j}`, found `{name}`")));
        }
    }
    Ok(dim)
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: u64, column: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("column `{column}`: cannot parse `{raw}`")))
}

fn parse_state(path: &Path, line: u64, fields: &[&str]) -> Result<TargetState> {
    let values = fields
        .iter()
        .enumerate()
        .map(|(j, raw)| {
            let v: f64 = parse_field(path, line, &format!("x{j}"), raw)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(path, line, format!("column `x{j}`: non-finite value")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetState::from(values))
}

// (line number, cells) per data row
type Rows = Vec<(u64, Vec<String>)>;

fn read_rows(path: &Path, leading: &[&str]) -> Result<(usize, Rows)> {
    let mut reader = open_reader(path)?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let dim = check_header(path, &header, leading)?;
    let width = leading.len() + dim;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            return Err(parse_err(
                path,
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok((dim, rows))
}

/// Reads a trajectory; rows must have strictly increasing, contiguous `t`.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let (_, rows) = read_rows(path, &["t"])?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut start = None;
    let mut states = Vec::with_capacity(rows.len());
    let mut prev: Option<i64> = None;
    for (line, fields) in &rows {
        let t: i64 = parse_field(path, *line, "t", &fields[0])?;
        if let Some(p) = prev {
            if t == p {
                return Err(parse_err(path, *line, format!("duplicate time t={t}")));
            }
            if t != p + 1 {
                return Err(parse_err(
                    path,
                    *line,
                    format!("time index jumps from t={p} to t={t}"),
                ));
            }
        }
        start.get_or_insert(t);
        prev = Some(t);
        let refs: Vec<&str> = fields[1..].iter().map(String::as_str).collect();
        states.push(parse_state(path, *line, &refs)?);
    }
    Trajectory::new(start.expect("nonempty"), states)
}

/// Expected grid shape for [`load_offline_predictions`]; `None` fields are
/// inferred from the file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OfflineShape {
    pub experts: Option<usize>,
    pub horizon: Option<usize>,
    pub dim: Option<usize>,
}

/// Reads an offline prediction grid, requiring every `(expert, t)` cell.
pub fn load_offline_predictions(path: impl AsRef<Path>, shape: OfflineShape) -> Result<OfflinePredictionSet> {
    let path = path.as_ref();
    let (dim, rows) = read_rows(path, &["expert", "t"])?;
    if let Some(expected) = shape.dim {
        if expected != dim {
            return Err(parse_err(
                path,
                1,
                format!("file has state dimension {dim}, expected {expected}"),
            ));
        }
    }
    let mut parsed = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let expert: usize = parse_field(path, *line, "expert", &fields[0])?;
        let t: i64 = parse_field(path, *line, "t", &fields[1])?;
        if expert == 0 {
            return Err(parse_err(path, *line, "expert ids start at 1"));
        }
        if let Some(n_exp) = shape.experts {
            if expert > n_exp {
                return Err(parse_err(
                    path,
                    *line,
                    format!("unknown expert {expert} (expected 1..={n_exp})"),
                ));
            }
        }
        if t < 0 {
            return Err(parse_err(path, *line, format!("offline prediction at negative time t={t}")));
        }
        if let Some(h) = shape.horizon {
            if t as usize > h {
                return Err(parse_err(
                    path,
                    *line,
                    format!("time t={t} beyond horizon T={h}"),
                ));
            }
        }
        let refs: Vec<&str> = fields[2..].iter().map(String::as_str).collect();
        parsed.push((*line, expert, t as usize, parse_state(path, *line, &refs)?));
    }
    let experts = shape
        .experts
        .or_else(|| parsed.iter().map(|r| r.1).max())
        .ok_or_else(|| parse_err(path, 1, "no data rows"))?;
    let horizon = shape
        .horizon
        .or_else(|| parsed.iter().map(|r| r.2).max())
        .ok_or_else(|| parse_err(path, 1, "no data rows"))?;

    let mut grid: Vec<Vec<Option<TargetState>>> = vec![vec![None; horizon + 1]; experts];
    for (line, expert, t, state) in parsed {
        let cell = &mut grid[expert - 1][t];
        if cell.is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate row for expert {expert}, t={t}"),
            ));
        }
        *cell = Some(state);
    }
    let mut columns = Vec::with_capacity(experts);
    for (i, column) in grid.into_iter().enumerate() {
        let mut states = Vec::with_capacity(horizon + 1);
        for (t, cell) in column.into_iter().enumerate() {
            match cell {
                Some(s) => states.push(s),
                None => {
                    return Err(OrlError::input(format!(
                        "{}: missing offline prediction for (expert={}, t={t})",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        columns.push(states);
    }
    OfflinePredictionSet::new(columns)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| OrlError::io(path, e))
}

pub(crate) struct CsvOut {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvOut {
    pub(crate) fn create(path: &Path) -> Result<Self> {
        Ok(CsvOut {
            path: path.to_path_buf(),
            out: create(path)?,
        })
    }

    pub(crate) fn line(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.out, "{}", fields.join(",")).map_err(|e| OrlError::io(&self.path, e))
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| OrlError::io(&self.path, e))
    }
}

fn state_header(leading: &[&str], dim: usize) -> Vec<String> {
    leading
        .iter()
        .map(|s| s.to_string())
        .chain((0..dim).map(|j| format!("x{j}")))
        .collect()
}

pub fn write_trajectory(path: impl AsRef<Path>, trajectory: &Trajectory) -> Result<()> {
    let mut out = CsvOut::create(path.as_ref())?;
    out.line(&state_header(&["t"], trajectory.dim()))?;
    for (t, s) in trajectory.iter() {
        let mut row = vec![t.to_string()];
        row.extend(s.iter().map(|v| fmt_f64(*v)));
        out.line(&row)?;
    }
    out.finish()
}

pub fn write_offline_predictions(path: impl AsRef<Path>, set: &OfflinePredictionSet) -> Result<()> {
    let mut out = CsvOut::create(path.as_ref())?;
    out.line(&state_header(&["expert", "t"], set.dim()))?;
    for i in 0..set.experts() {
        for (t, s) in set.column(i).iter().enumerate() {
            let mut row = vec![(i + 1).to_string(), t.to_string()];
            row.extend(s.iter().map(|v| fmt_f64(*v)));
            out.line(&row)?;
        }
    }
    out.finish()
}
