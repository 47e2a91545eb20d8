//! `key = value` run configuration for the two simulators.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::am::{run_am, AmParams};
use super::grid::{EdgeCondition, Grid};
use super::sird::{run_sird, SirdInitial, SirdParams};
use crate::dmd::SnapshotMatrix;
use crate::error::{Error, Result};

const COMMON_KEYS: &[&str] = &["model", "steps", "output_stride", "seed", "nx", "ny", "lx", "ly", "dt"];
const SIRD_KEYS: &[&str] = &[
    "beta_i",
    "beta_e",
    "gamma",
    "delta",
    "nu_s",
    "nu_i",
    "nu_r",
    "sigma",
    "s0",
    "s_amplitude",
    "i_peak",
    "i_center",
    "i_center_y",
    "i_width",
    "i_base",
    "init_noise",
];
const AM_KEYS: &[&str] = &[
    "rho",
    "c_p",
    "kappa",
    "t_s",
    "t_f",
    "laser_amp",
    "laser_x",
    "laser_y",
    "laser_off_time",
    "sigmoid_sharpness",
    "rate_sharpness",
    "boundary_temperature",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SirdConfig {
    pub grid: Grid,
    pub params: SirdParams,
    pub initial: SirdInitial,
    pub steps: usize,
    pub output_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmConfig {
    pub grid: Grid,
    pub params: AmParams,
    pub steps: usize,
    pub output_stride: usize,
    pub seed: u64,
}

/// A parsed configuration for either simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum SimConfig {
    Sird(SirdConfig),
    Am(AmConfig),
}

impl SimConfig {
    pub fn run(&self) -> Result<SnapshotMatrix> {
        match self {
            SimConfig::Sird(c) => {
                let init = c.initial.build(&c.grid)?;
                run_sird(&c.grid, &c.params, &init, c.steps, c.output_stride)
            }
            SimConfig::Am(c) => run_am(&c.grid, &c.params, c.steps, c.output_stride),
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            SimConfig::Sird(c) => &c.grid,
            SimConfig::Am(c) => &c.grid,
        }
    }
}

struct Entries {
    values: HashMap<String, (usize, String)>,
}

impl Entries {
    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(*line, format!("`{key}` expects a number, got `{v}`"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<usize>()
                .map_err(|_| Error::parse(*line, format!("`{key}` expects a non-negative integer, got `{v}`"))),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.values.get(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<u64>()
                .map_err(|_| Error::parse(*line, format!("`{key}` expects an unsigned integer, got `{v}`"))),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.values.get(key).map(|(l, _)| *l).unwrap_or(0)
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut values = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected `key = value`, found `{content}`")))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(Error::parse(line, "empty key"));
        }
        if let Some((first, _)) = values.get(&k) {
            return Err(Error::parse(
                line,
                format!("duplicate key `{k}` (first set on line {first})"),
            ));
        }
        values.insert(k, (line, v));
    }
    let entries = Entries { values };

    let model = entries
        .values
        .get("model")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::parse(1, "missing required key `model`"))?;
    let specific = match model {
        "sird" => SIRD_KEYS,
        "am" => AM_KEYS,
        other => {
            return Err(Error::parse(
                entries.line_of("model"),
                format!("unknown model `{other}` (expected sird or am)"),
            ))
        }
    };
    let mut unknown: Vec<(&usize, &String)> = entries
        .values
        .iter()
        .filter(|(k, _)| !COMMON_KEYS.contains(&k.as_str()) && !specific.contains(&k.as_str()))
        .map(|(k, (l, _))| (l, k))
        .collect();
    unknown.sort();
    if let Some((line, key)) = unknown.first() {
        return Err(Error::parse(**line, format!("unknown key `{key}` for model {model}")));
    }

    let at = |key: &str, e: Error| match e {
        Error::Input(msg) => Error::parse(entries.line_of(key), msg),
        other => other,
    };

    if model == "sird" {
        let d = SirdParams::default();
        let params = SirdParams {
            beta_i: entries.f64("beta_i", d.beta_i)?,
            beta_e: entries.f64("beta_e", d.beta_e)?,
            gamma: entries.f64("gamma", d.gamma)?,
            delta: entries.f64("delta", d.delta)?,
            nu_s: entries.f64("nu_s", d.nu_s)?,
            nu_i: entries.f64("nu_i", d.nu_i)?,
            nu_r: entries.f64("nu_r", d.nu_r)?,
            sigma: entries.f64("sigma", d.sigma)?,
            dt: entries.f64("dt", d.dt)?,
        };
        params.validate().map_err(|e| at("sigma", e))?;
        let nx = entries.usize("nx", 32)?;
        let ny = entries.usize("ny", 1)?;
        let lx = entries.f64("lx", 1.0)?;
        let grid = if ny <= 1 {
            Grid::line(nx, lx)
        } else {
            Grid::rectangle(nx, ny, lx, entries.f64("ly", 1.0)?)
        }
        .map_err(|e| at("nx", e))?;
        let di = SirdInitial::default();
        let initial = SirdInitial {
            s0: entries.f64("s0", di.s0)?,
            s_amplitude: entries.f64("s_amplitude", di.s_amplitude)?,
            i_peak: entries.f64("i_peak", di.i_peak)?,
            i_center: (
                entries.f64("i_center", di.i_center.0)?,
                entries.f64("i_center_y", di.i_center.1)?,
            ),
            i_width: entries.f64("i_width", di.i_width)?,
            i_base: entries.f64("i_base", di.i_base)?,
            noise: entries.f64("init_noise", di.noise)?,
            seed: entries.u64("seed", 0)?,
        };
        let output_stride = entries.usize("output_stride", 1)?;
        if output_stride == 0 {
            return Err(Error::parse(
                entries.line_of("output_stride"),
                "output_stride must be >= 1",
            ));
        }
        Ok(SimConfig::Sird(SirdConfig {
            grid,
            params,
            initial,
            steps: entries.usize("steps", 599)?,
            output_stride,
        }))
    } else {
        let d = AmParams::default();
        let params = AmParams {
            rho: entries.f64("rho", d.rho)?,
            c_p: entries.f64("c_p", d.c_p)?,
            kappa: entries.f64("kappa", d.kappa)?,
            t_s: entries.f64("t_s", d.t_s)?,
            t_f: entries.f64("t_f", d.t_f)?,
            laser_amp: entries.f64("laser_amp", d.laser_amp)?,
            laser_center: (
                entries.f64("laser_x", d.laser_center.0)?,
                entries.f64("laser_y", d.laser_center.1)?,
            ),
            laser_off_time: entries.f64("laser_off_time", d.laser_off_time)?,
            sigmoid_sharpness: entries.f64("sigmoid_sharpness", d.sigmoid_sharpness)?,
            rate_sharpness: entries.f64("rate_sharpness", d.rate_sharpness)?,
            dt: entries.f64("dt", d.dt)?,
        };
        params.validate().map_err(|e| at("t_f", e))?;
        let grid = Grid::rectangle(
            entries.usize("nx", 50)?,
            entries.usize("ny", 50)?,
            entries.f64("lx", 0.04)?,
            entries.f64("ly", 0.04)?,
        )
        .map_err(|e| at("nx", e))?
        .with_bottom(EdgeCondition::Fixed(entries.f64("boundary_temperature", 293.15)?));
        let output_stride = entries.usize("output_stride", 1)?;
        if output_stride == 0 {
            return Err(Error::parse(
                entries.line_of("output_stride"),
                "output_stride must be >= 1",
            ));
        }
        Ok(SimConfig::Am(AmConfig {
            grid,
            params,
            steps: entries.usize("steps", 600)?,
            output_stride,
            seed: entries.u64("seed", 0)?,
        }))
    }
}

pub fn read_config(path: &Path) -> Result<SimConfig> {
    parse_config(&fs::read_to_string(path)?)
}
