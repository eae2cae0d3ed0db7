//! Tabular output: header row, LF endings, numbers in `{:.16e}` (17
//! significant digits, which round-trips every `f64`).

use std::fs;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::propagation::{Carpet, CarpetAxis, ObservableSeries};
use crate::spectral::SpectrumSweep;
use crate::talbot::RevivalReport;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(Cell::Num).collect());
    }

    /// Column of numbers by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r.get(idx).and_then(Cell::as_f64)).collect()
    }

    fn check_rectangular(&self) -> Result<()> {
        let w = self.header.len();
        if w == 0 {
            return Err(Error::Config("table has no columns".into()));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != w) {
            return Err(Error::Config(format!(
                "row {i} has {} cells, header has {w}",
                self.rows[i].len()
            )));
        }
        Ok(())
    }

    /// Serialized CSV bytes.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check_rectangular()?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |source| Error::Csv {
            path: "<memory>".into(),
            source,
        };
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner()
            .map_err(|e| Error::Config(format!("csv buffer: {e}")))
    }
}

/// Writes `bytes` next to `path` and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    // temp files are created private; outputs are ordinary readable files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644)).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    write_atomic(path, &table.to_bytes()?)
}

/// Reads a CSV written by [`write_csv`]. Cells that parse as numbers become
/// [`Cell::Num`].
pub fn read_csv(path: &Path) -> Result<Table> {
    let wrap = |source| Error::Csv {
        path: path.into(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        rows.push(
            rec.iter()
                .map(|s| s.parse::<f64>().map_or_else(|_| Cell::Text(s.to_string()), Cell::Num))
                .collect(),
        );
    }
    Ok(Table { header, rows })
}

/// `lambda,E0,E1,…,n_max`.
pub fn spectrum_table(sweep: &SpectrumSweep) -> Table {
    let mut header = vec!["lambda".to_string()];
    header.extend((0..sweep.levels).map(|k| format!("E{k}")));
    header.push("n_max".into());
    let mut t = Table::new(header);
    for ((lambda, energies), n) in sweep.lambda_grid.iter().zip(&sweep.table).zip(&sweep.n_max) {
        let mut row = vec![*lambda];
        row.extend(energies);
        row.push(*n as f64);
        t.push_numbers(row);
    }
    t
}

/// Two-column series table, e.g. `t,x_expect`.
pub fn series_table(series: &ObservableSeries, value_name: &str) -> Table {
    let mut t = Table::new(["t", value_name]);
    for (a, b) in series.t_grid.iter().zip(&series.values) {
        t.push_numbers([*a, *b]);
    }
    t
}

/// `event,t,value` rows of a revival report.
pub fn revival_table(report: &RevivalReport) -> Table {
    let mut t = Table::new(["event", "t", "value"]);
    for (event, time, value) in report.csv_rows() {
        t.push(vec![event.into(), time.into(), value.into()]);
    }
    t
}

/// Wide carpet table: one row per time, header `t,x0,x1,…` or `t,theta0,…`.
pub fn carpet_table(carpet: &Carpet) -> Table {
    let name = carpet.axis.name();
    let mut header = vec!["t".to_string()];
    header.extend((0..carpet.values.ncols()).map(|i| format!("{name}{i}")));
    let mut t = Table::new(header);
    for (j, time) in carpet.t_grid.iter().enumerate() {
        let mut row = vec![*time];
        row.extend(carpet.values.row(j).iter());
        t.push_numbers(row);
    }
    t
}

/// Axis coordinates of a carpet: `index,x` or `index,theta`.
pub fn carpet_axis_table(axis: &CarpetAxis) -> Table {
    let mut t = Table::new(["index", axis.name()]);
    for (i, p) in axis.points().iter().enumerate() {
        t.push_numbers([i as f64, *p]);
    }
    t
}

/// Per-row integrals and scale factors: `t,row_integral,row_scale`.
pub fn carpet_rows_table(carpet: &Carpet) -> Table {
    let mut t = Table::new(["t", "row_integral", "row_scale"]);
    for ((time, integral), scale) in carpet.t_grid.iter().zip(&carpet.row_integrals).zip(&carpet.row_scales) {
        t.push_numbers([*time, *integral, *scale]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn layout() {
        let mut t = Table::new(["t", "x_expect"]);
        t.push_numbers([0.0, 1.5]);
        t.push_numbers([0.05, -2.0]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(
            s,
            "t,x_expect\n0.0000000000000000e0,1.5000000000000000e0\n5.0000000000000003e-2,-2.0000000000000000e0\n"
        );
        assert!(!s.contains('\r'));
    }

    #[test]
    fn ragged_rejected() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers([1.0]);
        assert!(matches!(t.to_bytes(), Err(Error::Config(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        let mut t = Table::new(["event", "t", "value"]);
        t.push(vec!["revival".into(), 412.35.into(), 0.7.into()]);
        t.push(vec!["has,comma".into(), 0.0.into(), (-1e-17).into()]);
        write_csv(&t, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, t);
        let first = fs::read(&path).unwrap();
        write_csv(&back, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
        assert_eq!(back.column("t").unwrap(), vec![412.35, 0.0]);
        assert!(back.column("event").is_none());
    }

    #[test]
    fn io_errors_name_path() {
        let e = read_csv(Path::new("/nonexistent/dir/x.csv")).unwrap_err().to_string();
        assert!(e.contains("/nonexistent/dir/x.csv"), "{e}");
    }
}
