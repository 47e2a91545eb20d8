//! Text formats for fitted models and snapshot matrices.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite binary64 value exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::dmd::{CompartmentLayout, DmdModel, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Matrix};

const MODEL_HEADER: &str = "DMDMODEL v1";
const SNAPSHOT_HEADER: &str = "SNAPSHOTS v1";

/// A snapshot matrix plus the optional metadata stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub snapshots: SnapshotMatrix,
    /// Time of column 0.
    pub t0: f64,
    /// Per-column flag marking columns past the training window.
    pub extrapolated: Option<Vec<bool>>,
}

impl SnapshotFile {
    pub fn new(snapshots: SnapshotMatrix) -> Self {
        Self {
            snapshots,
            t0: 0.0,
            extrapolated: None,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn model_to_string(model: &DmdModel) -> Result<String> {
    model.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(out, "rank={}", model.rank);
    let _ = writeln!(out, "dt={}", num(model.dt));
    let _ = writeln!(out, "layout={}", model.layout);
    let _ = writeln!(out, "cell_weight={}", num(model.cell_weight));
    if let Some(n) = model.train_columns {
        let _ = writeln!(out, "train_columns={n}");
    }
    for (name, values) in [("LAMBDA", &model.lambda), ("OMEGA", &model.omega), ("B", &model.b)] {
        let _ = writeln!(out, "{name}");
        for z in values {
            let _ = writeln!(out, "{},{}", num(z.re), num(z.im));
        }
    }
    let _ = writeln!(out, "PSI");
    for i in 0..model.psi.rows() {
        let line: Vec<String> = model
            .psi
            .row(i)
            .iter()
            .map(|z| format!("{},{}", num(z.re), num(z.im)))
            .collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    Ok(out)
}

/// Line cursor that reports 1-based line numbers in errors.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end_matches('\r')))
            }
            None => Err(Error::parse(self.last + 1, "unexpected end of file")),
        }
    }

    fn peek_key(&self, key: &str) -> bool {
        self.inner
            .clone()
            .next()
            .is_some_and(|(_, l)| l.starts_with(&format!("{key}=")))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let (n, line) = self.next_line()?;
        if line.trim() != want {
            return Err(Error::parse(n, format!("expected `{want}`, found `{line}`")));
        }
        Ok(())
    }

    fn key(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line()?;
        match line.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((n, v.trim())),
            _ => Err(Error::parse(n, format!("expected `{key}=...`, found `{line}`"))),
        }
    }

    fn finish(mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(Error::parse(i + 1, format!("unexpected trailing content `{l}`")));
            }
        }
        Ok(())
    }
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a number")))
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a non-negative integer")))
}

fn parse_reals(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|f| parse_f64(line, f)).collect()
}

fn parse_pairs(line: usize, s: &str, expected: usize) -> Result<Vec<Complex64>> {
    let vals = parse_reals(line, s)?;
    if vals.len() != 2 * expected {
        return Err(Error::parse(
            line,
            format!("expected {expected} re,im pairs, found {} numbers", vals.len()),
        ));
    }
    Ok(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn with_line(line: usize, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::parse(line, msg),
        other => other,
    }
}

pub fn model_from_str(text: &str) -> Result<DmdModel> {
    let mut lines = Lines::new(text);
    lines.expect(MODEL_HEADER)?;
    let (n, v) = lines.key("rank")?;
    let rank = parse_usize(n, v)?;
    if rank == 0 {
        return Err(Error::parse(n, "rank must be positive"));
    }
    let (n, v) = lines.key("dt")?;
    let dt = parse_f64(n, v)?;
    let (n, v) = lines.key("layout")?;
    let layout = CompartmentLayout::parse(v).map_err(|e| with_line(n, e))?;
    let mut cell_weight = 1.0;
    if lines.peek_key("cell_weight") {
        let (n, v) = lines.key("cell_weight")?;
        cell_weight = parse_f64(n, v)?;
    }
    let mut train_columns = None;
    if lines.peek_key("train_columns") {
        let (n, v) = lines.key("train_columns")?;
        train_columns = Some(parse_usize(n, v)?);
    }

    let mut read_section = |name: &str| -> Result<Vec<Complex64>> {
        lines.expect(name)?;
        (0..rank)
            .map(|_| {
                let (n, l) = lines.next_line()?;
                Ok(parse_pairs(n, l, 1)?[0])
            })
            .collect()
    };
    let lambda = read_section("LAMBDA")?;
    let omega = read_section("OMEGA")?;
    let b = read_section("B")?;

    lines.expect("PSI")?;
    let dim = layout.state_dim();
    let mut entries = Vec::with_capacity(dim * rank);
    for _ in 0..dim {
        let (n, l) = lines.next_line()?;
        entries.extend(parse_pairs(n, l, rank)?);
    }
    lines.finish()?;
    let model = DmdModel {
        psi: ComplexMatrix::new(dim, rank, entries)?,
        lambda,
        omega,
        b,
        rank,
        dt,
        layout,
        cell_weight,
        train_columns,
        fit_details: None,
    };
    model.validate()?;
    Ok(model)
}

pub fn write_model(path: &Path, model: &DmdModel) -> Result<()> {
    fs::write(path, model_to_string(model)?)?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<DmdModel> {
    model_from_str(&fs::read_to_string(path)?)
}

pub fn snapshots_to_string(file: &SnapshotFile) -> String {
    let y = &file.snapshots;
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_HEADER}");
    let _ = writeln!(out, "dt={}", num(y.dt()));
    let _ = writeln!(out, "cell_weight={}", num(y.cell_weight()));
    let _ = writeln!(out, "layout={}", y.layout());
    if file.t0 != 0.0 {
        let _ = writeln!(out, "t0={}", num(file.t0));
    }
    if let Some(flags) = &file.extrapolated {
        let f: Vec<&str> = flags.iter().map(|&b| if b { "true" } else { "false" }).collect();
        let _ = writeln!(out, "extrapolated={}", f.join(","));
    }
    for i in 0..y.data().rows() {
        let row: Vec<String> = y.data().row(i).iter().map(|&x| num(x)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn snapshots_from_str(text: &str) -> Result<SnapshotFile> {
    let mut lines = Lines::new(text);
    lines.expect(SNAPSHOT_HEADER)?;
    let (n, v) = lines.key("dt")?;
    let dt = parse_f64(n, v)?;
    let (n, v) = lines.key("cell_weight")?;
    let cell_weight = parse_f64(n, v)?;
    let (n, v) = lines.key("layout")?;
    let layout = CompartmentLayout::parse(v).map_err(|e| with_line(n, e))?;
    let mut t0 = 0.0;
    if lines.peek_key("t0") {
        let (n, v) = lines.key("t0")?;
        t0 = parse_f64(n, v)?;
    }
    let mut extrapolated = None;
    let mut flag_line = 0;
    if lines.peek_key("extrapolated") {
        let (n, v) = lines.key("extrapolated")?;
        flag_line = n;
        let flags = v
            .split(',')
            .map(|f| match f.trim() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::parse(n, format!("`{other}` is not true/false"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        extrapolated = Some(flags);
    }

    let dim = layout.state_dim();
    let mut data = Vec::new();
    let mut cols = 0;
    for r in 0..dim {
        let (n, l) = lines.next_line()?;
        let row = parse_reals(n, l)?;
        if r == 0 {
            cols = row.len();
        } else if row.len() != cols {
            return Err(Error::parse(
                n,
                format!("row has {} values, expected {cols}", row.len()),
            ));
        }
        if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::parse(n, format!("non-finite value {bad}")));
        }
        data.extend(row);
    }
    let last = lines.last;
    lines.finish()?;
    if let Some(flags) = &extrapolated {
        if flags.len() != cols {
            return Err(Error::parse(
                flag_line,
                format!("{} extrapolation flags for {cols} columns", flags.len()),
            ));
        }
    }
    let matrix = Matrix::new(dim, cols, data).map_err(|e| with_line(last, e))?;
    let snapshots = SnapshotMatrix::new(matrix, dt, layout, cell_weight).map_err(|e| with_line(last, e))?;
    Ok(SnapshotFile {
        snapshots,
        t0,
        extrapolated,
    })
}

pub fn write_snapshots(path: &Path, file: &SnapshotFile) -> Result<()> {
    fs::write(path, snapshots_to_string(file))?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotFile> {
    snapshots_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::{fit, Backend};

    fn sample_snapshots() -> SnapshotMatrix {
        let layout = CompartmentLayout::parse("a:2,b:2").unwrap();
        let data = Matrix::from_fn(4, 6, |i, j| {
            ((i + 1) as f64 * 0.37).sin() * 0.93f64.powi(j as i32) + 1.0 / 3.0
        });
        SnapshotMatrix::new(data, 0.1, layout, 0.25).unwrap()
    }

    #[test]
    fn model_round_trip_is_exact() {
        let model = fit(&sample_snapshots(), 4, Backend::Exact).unwrap();
        let text = model_to_string(&model).unwrap();
        let back = model_from_str(&text).unwrap();
        assert_eq!(back.psi, model.psi);
        assert_eq!(back.lambda, model.lambda);
        assert_eq!(back.omega, model.omega);
        assert_eq!(back.b, model.b);
        assert_eq!(back.dt, model.dt);
        assert_eq!(back.layout, model.layout);
        assert_eq!(back.train_columns, Some(6));
        assert_eq!(model_to_string(&back).unwrap(), text);
    }

    #[test]
    fn decayed_omega_survives_round_trip() {
        let mut model = fit(&sample_snapshots(), 2, Backend::Exact).unwrap();
        model.omega[1] = Complex64::new(f64::NEG_INFINITY, 0.0);
        let back = model_from_str(&model_to_string(&model).unwrap()).unwrap();
        assert_eq!(back.omega[1].re, f64::NEG_INFINITY);
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let mut file = SnapshotFile::new(sample_snapshots());
        file.extrapolated = Some(vec![false, false, false, true, true, true]);
        file.t0 = 0.5;
        let back = snapshots_from_str(&snapshots_to_string(&file)).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "SNAPSHOTS v1\ndt=1\ncell_weight=1\nlayout=a:2\n1,2\n3,x\n";
        match snapshots_from_str(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            e => panic!("unexpected {e:?}"),
        }
        let text = "SNAPSHOTS v1\ndt=1\ncell_weight=1\nlayout=a:2\n1,2\n3\n";
        assert!(matches!(snapshots_from_str(text), Err(Error::Parse { line: 6, .. })));
        assert!(matches!(
            model_from_str("DMDMODEL v2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            model_from_str("DMDMODEL v1\nrank=1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
