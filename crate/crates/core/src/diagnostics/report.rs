use std::fmt::{self, Write as _};

use super::{
    check_same_shape, check_subset, drift_of, l1_bound_check, mass_series, nonnegativity_horizon, relative_l2_series,
    ConservationCheck, L1Check, L2Series,
};
use crate::dmd::SnapshotMatrix;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        })
    }
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseOptions {
    /// Compartment indices for mass and L¹ checks; `None` means all.
    pub subset: Option<Vec<usize>>,
    /// Relative drift allowed by the conservation verdict.
    pub rel_tol: f64,
    /// Ceiling on every non-vacuous relative L² error; `None` skips the verdict.
    pub max_l2: Option<f64>,
    /// Verdicts look only at the first `window` columns (typically the
    /// training window); the full series are still reported.
    pub window: Option<usize>,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            subset: None,
            rel_tol: 1e-8,
            max_l2: None,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub subset: Vec<usize>,
    pub subset_names: Vec<String>,
    pub mass_series_ref: Vec<f64>,
    pub mass_series_rec: Vec<f64>,
    pub reference_conservation: ConservationCheck,
    pub conservation: ConservationCheck,
    /// Columns the verdicts were evaluated over.
    pub window: usize,
    /// Reconstruction drift over every column, when that exceeds the window.
    pub full_drift: Option<f64>,
    /// `(compartment name, series)` for every compartment in layout order.
    pub l2_error_curves: Vec<(String, L2Series)>,
    pub l1: L1Check,
    pub nonneg_horizon_ref: Option<usize>,
    pub nonneg_horizon_rec: Option<usize>,
    pub verdicts: Vec<(&'static str, Verdict)>,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    /// Max relative deviation of the reconstruction mass from its first entry.
    pub fn conservation_drift(&self) -> f64 {
        self.conservation.drift
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| *v == Verdict::Fail)
            .map(|(n, _)| *n)
            .collect()
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.verdicts.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let horizon = |h: Option<usize>| h.map_or_else(|| "none".to_string(), |c| c.to_string());
        let _ = writeln!(out, "DIAGNOSTICS v1");
        let _ = writeln!(out, "columns={}", self.mass_series_ref.len());
        let _ = writeln!(out, "subset={}", self.subset_names.join(","));
        let _ = writeln!(out, "conservation_drift={:.16e}", self.conservation.drift);
        let _ = writeln!(out, "reference_drift={:.16e}", self.reference_conservation.drift);
        let _ = writeln!(out, "window={}", self.window);
        match self.full_drift {
            Some(d) => writeln!(out, "full_drift={d:.16e}"),
            None => writeln!(out, "full_drift=none"),
        }
        .ok();
        let _ = writeln!(out, "l1_max={:.16e}", self.l1.max_lhs());
        let _ = writeln!(out, "l1_bound={:.16e}", self.l1.bound);
        let _ = writeln!(out, "nonneg_horizon_ref={}", horizon(self.nonneg_horizon_ref));
        let _ = writeln!(out, "nonneg_horizon_rec={}", horizon(self.nonneg_horizon_rec));

        let mut block = |metric: &str, values: &[f64]| {
            let _ = writeln!(out);
            let _ = writeln!(out, "metric,column,value");
            for (j, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{metric},{j},{v:.16e}");
            }
        };
        block("mass_ref", &self.mass_series_ref);
        block("mass_rec", &self.mass_series_rec);
        for (name, series) in &self.l2_error_curves {
            block(&format!("l2_error_{name}"), &series.values);
        }
        block("l1_error", &self.l1.lhs);

        let _ = writeln!(out);
        let _ = writeln!(out, "VERDICTS");
        for (name, v) in &self.verdicts {
            let _ = writeln!(out, "{name}={v}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "NOTES");
        for note in &self.notes {
            let _ = writeln!(out, "{note}");
        }
        out
    }
}

/// Runs every metric on a reference/reconstruction pair.
pub fn diagnose(
    reference: &SnapshotMatrix,
    rec: &SnapshotMatrix,
    options: &DiagnoseOptions,
) -> Result<DiagnosticsReport> {
    check_same_shape(reference, rec)?;
    let layout = reference.layout();
    let subset = options
        .subset
        .clone()
        .unwrap_or_else(|| (0..layout.compartments()).collect());
    check_subset(reference, &subset)?;
    let mut notes = Vec::new();
    let columns = reference.columns();
    let window = options.window.unwrap_or(columns).clamp(1, columns);

    let mass_ref = mass_series(reference, &subset)?;
    let mass_rec = mass_series(rec, &subset)?;
    let reference_conservation = drift_of(&mass_ref[..window], options.rel_tol);
    let conservation = drift_of(&mass_rec[..window], options.rel_tol);
    let full_drift = (window < columns).then(|| drift_of(&mass_rec, options.rel_tol).drift);
    if conservation.absolute {
        notes.push("initial subset mass is zero; drift is absolute".to_string());
    }
    let conservation_verdict = if reference_conservation.passed {
        Verdict::from_bool(conservation.passed)
    } else {
        notes.push(format!(
            "reference subset mass drifts by {:.3e}; conservation not asserted",
            reference_conservation.drift
        ));
        Verdict::NotApplicable
    };

    let l1 = l1_bound_check(reference, rec, &subset)?;
    let l1_verdict = if l1.applicable {
        Verdict::from_bool(l1.satisfied)
    } else {
        notes.push("negative entries in the subset; L1 bound hypothesis does not hold".to_string());
        Verdict::NotApplicable
    };

    let mut curves = Vec::new();
    for (c, name) in layout.names().iter().enumerate() {
        let series = relative_l2_series(reference, rec, c)?;
        let vacuous = series.vacuous.iter().filter(|&&v| v).count();
        if vacuous > 0 {
            notes.push(format!(
                "l2_error_{name}: {vacuous} column(s) with a near-zero reference; ratio is vacuous there"
            ));
        }
        curves.push((name.clone(), series));
    }
    let l2_verdict = match options.max_l2 {
        None => Verdict::NotApplicable,
        Some(limit) => {
            let worst = curves
                .iter()
                .flat_map(|(_, s)| s.values[..window].iter().zip(&s.vacuous[..window]))
                .filter(|(_, &vac)| !vac)
                .fold(0.0f64, |acc, (&v, _)| acc.max(v));
            if worst > limit {
                notes.push(format!("worst relative l2 error {worst:.3e} exceeds {limit:.3e}"));
            }
            Verdict::from_bool(worst <= limit)
        }
    };

    let nonneg_horizon_ref = nonnegativity_horizon(reference);
    let nonneg_horizon_rec = nonnegativity_horizon(rec);
    if let Some(j) = nonneg_horizon_rec {
        notes.push(format!("reconstruction first goes negative at column {j}"));
    }

    Ok(DiagnosticsReport {
        subset_names: subset.iter().map(|&c| layout.names()[c].clone()).collect(),
        subset,
        mass_series_ref: mass_ref,
        mass_series_rec: mass_rec,
        reference_conservation,
        conservation,
        window,
        full_drift,
        l2_error_curves: curves,
        l1,
        nonneg_horizon_ref,
        nonneg_horizon_rec,
        verdicts: vec![
            ("conservation", conservation_verdict),
            ("l1_bound", l1_verdict),
            ("l2_error", l2_verdict),
        ],
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::CompartmentLayout;
    use crate::linalg::Matrix;

    fn sample() -> SnapshotMatrix {
        let layout = CompartmentLayout::parse("a:2,b:2").unwrap();
        let data = Matrix::from_fn(4, 5, |i, j| if i < 2 { 1.0 + j as f64 } else { 10.0 - j as f64 });
        SnapshotMatrix::new(data, 1.0, layout, 0.5).unwrap()
    }

    #[test]
    fn self_comparison_passes() {
        let y = sample();
        let r = diagnose(
            &y,
            &y,
            &DiagnoseOptions {
                max_l2: Some(1e-12),
                ..DiagnoseOptions::default()
            },
        )
        .unwrap();
        assert!(r.failures().is_empty());
        assert_eq!(r.verdict("conservation"), Some(Verdict::Pass));
        assert_eq!(r.verdict("l1_bound"), Some(Verdict::Pass));
        assert_eq!(r.verdict("l2_error"), Some(Verdict::Pass));
    }

    #[test]
    fn nonconservative_subset_is_not_applicable() {
        let y = sample();
        let r = diagnose(
            &y,
            &y,
            &DiagnoseOptions {
                subset: Some(vec![0]),
                ..DiagnoseOptions::default()
            },
        )
        .unwrap();
        assert_eq!(r.verdict("conservation"), Some(Verdict::NotApplicable));
        assert_eq!(r.verdict("l2_error"), Some(Verdict::NotApplicable));
    }

    #[test]
    fn window_limits_verdicts() {
        let y = sample();
        let mut data = y.data().clone();
        data.row_mut(0)[4] += 1.0;
        let rec = SnapshotMatrix::new(data, 1.0, y.layout().clone(), 0.5).unwrap();
        let opts = DiagnoseOptions {
            window: Some(4),
            max_l2: Some(1e-12),
            ..DiagnoseOptions::default()
        };
        let r = diagnose(&y, &rec, &opts).unwrap();
        assert!(r.failures().is_empty());
        assert!(r.full_drift.unwrap() > 0.0);
        let r = diagnose(&y, &rec, &DiagnoseOptions::default()).unwrap();
        assert_eq!(r.verdict("conservation"), Some(Verdict::Fail));
    }

    #[test]
    fn text_layout() {
        let y = sample();
        let text = diagnose(&y, &y, &DiagnoseOptions::default()).unwrap().to_text();
        assert!(text.starts_with("DIAGNOSTICS v1\n"));
        assert!(text.contains("metric,column,value\nmass_ref,0,"));
        assert!(text.contains("l2_error_b,4,0.0000000000000000e0"));
        assert!(text.contains("window=5\nfull_drift=none\n"));
        assert!(text.contains("VERDICTS\nconservation=pass\nl1_bound=pass\nl2_error=n/a\n"));
    }
}
