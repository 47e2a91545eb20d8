use std::fmt;
use std::path::{Path, PathBuf};

use cdmd_core::diagnostics::{diagnose as run_diagnose, mass_series, resolve_subset, DiagnoseOptions};
use cdmd_core::io::{read_model, read_snapshots, write_model, write_snapshots, SnapshotFile};
use cdmd_core::simulate::{read_config, SimConfig};
use cdmd_core::{
    fit as fit_model, fit_uncoupled, Backend, CompartmentLayout, DmdModel, Error, ErrorKind, Matrix, SnapshotMatrix,
};

use crate::{Mode, RankArg};

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    /// An error while handling the named file.
    At(PathBuf, Error),
    Usage(String),
    Verdicts(Vec<&'static str>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) | Failure::At(_, e) => match e.kind() {
                ErrorKind::Input | ErrorKind::Io => 2,
                ErrorKind::Numeric => 3,
            },
            Failure::Usage(_) => 2,
            Failure::Verdicts(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::At(path, e) => write!(f, "{}: {e}", path.display()),
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Verdicts(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn with_path(path: &Path, e: Error) -> Failure {
    Failure::At(path.to_path_buf(), e)
}

pub fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    let mut cfg = read_config(config).map_err(|e| with_path(config, e))?;
    if let Some(seed) = seed {
        match &mut cfg {
            SimConfig::Sird(c) => c.initial.seed = seed,
            SimConfig::Am(c) => c.seed = seed,
        }
    }
    let y = cfg.run()?;
    let all: Vec<usize> = (0..y.layout().compartments()).collect();
    let mass0 = mass_series(&y.column_range(0, 1)?, &all)?[0];
    write_snapshots(out, &SnapshotFile::new(y.clone())).map_err(|e| with_path(out, e))?;
    println!("nodes={}", y.layout().node_count());
    println!("columns={}", y.columns());
    println!("layout={}", y.layout());
    println!("mass_column_0={mass0:.16e}");
    Ok(())
}

fn resolve_rank(rank: RankArg, y: &SnapshotMatrix) -> usize {
    match rank {
        RankArg::Fixed(r) => r,
        RankArg::Full => y.layout().state_dim().min(y.columns().saturating_sub(1)).max(1),
    }
}

fn sibling_path(out: &Path, name: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = match out.extension() {
        Some(ext) => format!("{stem}.{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{name}"),
    };
    out.with_file_name(file)
}

fn report_fit(path: &Path, requested: usize, model: &DmdModel) {
    let residual = model.fit_details.as_ref().map_or(f64::NAN, |d| d.training_residual);
    println!(
        "{}: rank {} (requested {requested}), training residual {residual:.6e}",
        path.display(),
        model.rank
    );
    if let Some(d) = &model.fit_details {
        if d.amplitude_rank_deficient {
            eprintln!("warning: {}: amplitude solve was rank deficient", path.display());
        }
    }
}

pub fn fit(snapshots: &Path, rank: RankArg, mode: Mode, backend: Backend, train_fraction: f64, out: &Path) -> Outcome {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Failure::Usage(format!(
            "train fraction must lie in (0, 1], got {train_fraction}"
        )));
    }
    let file = read_snapshots(snapshots).map_err(|e| with_path(snapshots, e))?;
    let y = file.snapshots;
    let ntr = ((train_fraction * y.columns() as f64).ceil() as usize).clamp(1, y.columns());
    let train = y.column_range(0, ntr)?;
    println!("training columns={ntr} of {}", y.columns());
    match mode {
        Mode::Coupled => {
            let r = resolve_rank(rank, &train);
            let model = fit_model(&train, r, backend)?;
            write_model(out, &model).map_err(|e| with_path(out, e))?;
            report_fit(out, r, &model);
        }
        Mode::Uncoupled => {
            let parts = train.split_compartments();
            let r = resolve_rank(rank, &parts[0]);
            let models = fit_uncoupled(&parts, r, backend)?;
            for model in &models {
                let path = sibling_path(out, &model.layout.names()[0]);
                write_model(&path, model).map_err(|e| with_path(&path, e))?;
                report_fit(&path, r, model);
            }
        }
    }
    Ok(())
}

fn time_grid(t_start: f64, t_end: f64, t_step: f64) -> Result<Vec<f64>, Failure> {
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Failure::Usage(format!("time step must be positive, got {t_step}")));
    }
    if !(t_start >= 0.0 && t_end >= t_start && t_end.is_finite()) {
        return Err(Failure::Usage(format!(
            "need 0 <= t_start <= t_end, got {t_start} and {t_end}"
        )));
    }
    let count = ((t_end - t_start) / t_step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| t_start + k as f64 * t_step).collect())
}

fn combined_layout(models: &[DmdModel]) -> Result<CompartmentLayout, Failure> {
    let first = &models[0];
    let mut names = Vec::new();
    for m in models {
        if m.layout.node_count() != first.layout.node_count() {
            return Err(Failure::Usage(format!(
                "incompatible model layouts `{}` and `{}`: node counts differ",
                first.layout, m.layout
            )));
        }
        if m.dt != first.dt || m.cell_weight != first.cell_weight || m.train_columns != first.train_columns {
            return Err(Failure::Usage(format!(
                "models `{}` and `{}` come from different snapshot sets (dt, cell weight or training window differ)",
                first.layout, m.layout
            )));
        }
        names.extend(m.layout.names().iter().cloned());
    }
    CompartmentLayout::new(names, first.layout.node_count())
        .map_err(|e| Failure::Usage(format!("incompatible model layouts: {e}")))
}

pub fn reconstruct(paths: &[PathBuf], t_start: f64, t_end: Option<f64>, t_step: Option<f64>, out: &Path) -> Outcome {
    let mut models = Vec::with_capacity(paths.len());
    for p in paths {
        models.push(read_model(p).map_err(|e| with_path(p, e))?);
    }
    let layout = combined_layout(&models)?;
    let dt = models[0].dt;
    let train_end = models[0].train_columns.map(|m| (m.saturating_sub(1)) as f64 * dt);
    let t_end = t_end.or(train_end).unwrap_or(t_start);
    let t_step = t_step.unwrap_or(dt);
    let times = time_grid(t_start, t_end, t_step)?;

    let mut columns = Vec::with_capacity(times.len());
    let mut imag_max = 0.0f64;
    let mut branch = false;
    for &t in &times {
        let mut col = Vec::with_capacity(layout.state_dim());
        for m in &models {
            let rec = m.reconstruct_at(t)?;
            imag_max = imag_max.max(rec.imag_max);
            branch |= rec.branch_warning;
            col.extend(rec.state);
        }
        columns.push(col);
    }
    let y = SnapshotMatrix::new(Matrix::from_columns(&columns)?, t_step, layout, models[0].cell_weight)?;
    let mut file = SnapshotFile::new(y);
    file.t0 = t_start;
    if let Some(end) = train_end {
        let slack = 1e-9 * dt.max(end);
        file.extrapolated = Some(times.iter().map(|&t| t > end + slack).collect());
    }
    write_snapshots(out, &file).map_err(|e| with_path(out, e))?;
    let extrapolated = file
        .extrapolated
        .as_ref()
        .map_or(0, |f| f.iter().filter(|&&x| x).count());
    println!("columns={} extrapolated={extrapolated}", times.len());
    println!("max_imag={imag_max:.3e}");
    if branch {
        eprintln!("warning: eigenvalue on the negative real axis; off-grid times use the principal branch");
    }
    Ok(())
}

pub fn diagnose(
    reference: &Path,
    reconstruction: &Path,
    subset: Option<&str>,
    rel_tol: f64,
    max_l2: Option<f64>,
    out: &Path,
) -> Outcome {
    let y_ref = read_snapshots(reference)
        .map_err(|e| with_path(reference, e))?
        .snapshots;
    let rec_file = read_snapshots(reconstruction).map_err(|e| with_path(reconstruction, e))?;
    // Verdicts cover the leading non-extrapolated columns.
    let window = rec_file
        .extrapolated
        .as_ref()
        .map(|flags| flags.iter().take_while(|&&x| !x).count());
    let y_rec = rec_file.snapshots;
    let subset = subset.map(|s| resolve_subset(&y_ref, s)).transpose()?;
    let options = DiagnoseOptions {
        subset,
        rel_tol,
        max_l2,
        window,
    };
    let report = run_diagnose(&y_ref, &y_rec, &options)?;
    std::fs::write(out, report.to_text()).map_err(|e| with_path(out, Error::Io(e)))?;
    println!("window={} of {}", report.window, y_ref.columns());
    println!("conservation_drift={:.3e}", report.conservation_drift());
    if let Some(d) = report.full_drift {
        println!("full_drift={d:.3e}");
    }
    for (name, verdict) in &report.verdicts {
        println!("{name}={verdict}");
    }
    let failures = report.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verdicts(failures))
    }
}
