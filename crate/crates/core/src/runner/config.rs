//! Experiment configuration: TOML `key = value` text (JSON accepted), all keys optional.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::GridParams;
use crate::{Error, Result};

/// Named experiments understood by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Localize,
    Lightcone,
    Hegerfeldt,
    EvenfieldTail,
    Beamsplit,
    Fringes,
    EntangleCollapse,
    FockVerify,
    CoherentLimit,
    SourceEmission,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Localize,
        Experiment::Lightcone,
        Experiment::Hegerfeldt,
        Experiment::EvenfieldTail,
        Experiment::Beamsplit,
        Experiment::Fringes,
        Experiment::EntangleCollapse,
        Experiment::FockVerify,
        Experiment::CoherentLimit,
        Experiment::SourceEmission,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Localize => "localize",
            Experiment::Lightcone => "lightcone",
            Experiment::Hegerfeldt => "hegerfeldt",
            Experiment::EvenfieldTail => "evenfield-tail",
            Experiment::Beamsplit => "beamsplit",
            Experiment::Fringes => "fringes",
            Experiment::EntangleCollapse => "entangle-collapse",
            Experiment::FockVerify => "fock-verify",
            Experiment::CoherentLimit => "coherent-limit",
            Experiment::SourceEmission => "source-emission",
        }
    }

    pub fn parse(s: &str) -> Result<Experiment> {
        if s == "entangle" {
            return Ok(Experiment::EntangleCollapse);
        }
        Self::ALL.iter().copied().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|e| e.name()).collect();
            Error::Config(format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw file contents. Every key is optional; `[grid]`, when present, must be complete.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<String>,
    grid: Option<GridParams>,
    k0: Option<f64>,
    sigma_k: Option<f64>,
    sigma: Option<f64>,
    t_final: Option<f64>,
    r_max: Option<f64>,
    n_samples: Option<usize>,
    shell_halfwidth: Option<f64>,
    trials: Option<usize>,
    pulse_width: Option<f64>,
    x_half: Option<f64>,
    n_x: Option<usize>,
    intensity_ratio: Option<f64>,
    n_modes: Option<usize>,
    n_max: Option<usize>,
    alpha_max: Option<f64>,
    n_pairs: Option<usize>,
    source_width: Option<f64>,
    source_duration: Option<f64>,
    residual_width: Option<f64>,
    n_max_algebra: Option<usize>,
    lattice_h: Option<f64>,
    n_refinements: Option<usize>,
    observer_r: Option<f64>,
}

/// Validated configuration with defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Worker threads for the numeric kernels, 0 = all cores.
    pub threads: usize,
    pub out: Option<String>,
    pub grid: GridParams,
    /// Shell centre `k₀`.
    pub k0: f64,
    /// Density width `σ_k` of the shell; `σ_x = 1/(2σ_k)`.
    pub sigma_k: f64,
    /// Regularization width of light-cone kernels.
    pub sigma: f64,
    /// Propagation time in units of `σ_x/c` (localize, lightcone) or `σ/c` (hegerfeldt, evenfield-tail).
    pub t_final: f64,
    /// Radial extent beyond `ct` of x-space quadratures, in `σ_x`.
    pub r_max: f64,
    pub n_samples: usize,
    pub shell_halfwidth: f64,
    pub trials: usize,
    pub pulse_width: f64,
    pub x_half: f64,
    pub n_x: usize,
    pub intensity_ratio: f64,
    pub n_modes: usize,
    pub n_max: usize,
    pub alpha_max: f64,
    pub n_pairs: usize,
    /// Flash source: spatial and temporal Gaussian widths.
    pub source_width: f64,
    pub source_duration: f64,
    /// Width (space and time) of the smooth source used for the residual convergence study.
    pub residual_width: f64,
    /// Fock truncation for the operator-algebra checks.
    pub n_max_algebra: usize,
    pub lattice_h: f64,
    pub n_refinements: usize,
    pub observer_r: f64,
}

/// Defaults, shown by `--help`.
pub const DEFAULTS_HELP: &str = "\
Config keys (TOML `key = value`; JSON also accepted; all optional):
  seed = 20261014        threads = 0 (all cores)      out = \"<dir>\"
  [grid] n_radial = 256, n_costheta = 48, n_phi = 48, k_min = 1e-3, k_max = 10
  k0 = 5.0               sigma_k = 0.5 (sigma_x = 1/(2 sigma_k))
  sigma = 0.1            regularization width of light-cone kernels
  t_final = 20           in sigma_x (localize, lightcone); ct in L (hegerfeldt: 1, evenfield-tail: 100)
  r_max = 15             radial quadrature reach beyond ct, in sigma_x
  n_samples = 800        shell_halfwidth = 5 (sigma_x)
  trials = 1000000       pulse_width = 2.0   x_half = 60   n_x = 6001
  intensity_ratio = 1.0  (fringes: I_left / I_right)
  n_modes = 3            n_max_algebra = 4   (fock-verify operator algebra)
  n_max = 40             alpha_max = 2.0     n_pairs = 100
  source_width = 0.3     source_duration = 0.3   (flash source)
  residual_width = 0.5   lattice_h = 0.25    n_refinements = 3   observer_r = 10
  fock-verify uses [grid] 24 x 12 x 12 on (0.05, 6) unless given";

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let t_final = match experiment {
            Experiment::Hegerfeldt => 1.0,
            Experiment::EvenfieldTail => 100.0,
            _ => 20.0,
        };
        let grid = match experiment {
            Experiment::FockVerify => GridParams {
                n_radial: 24,
                n_costheta: 12,
                n_phi: 12,
                k_min: 0.05,
                k_max: 6.0,
            },
            _ => GridParams {
                n_radial: 256,
                n_costheta: 48,
                n_phi: 48,
                k_min: 1e-3,
                k_max: 10.0,
            },
        };
        ExperimentConfig {
            experiment,
            seed: 20261014,
            threads: 0,
            out: None,
            grid,
            k0: 5.0,
            sigma_k: 0.5,
            sigma: 0.1,
            t_final,
            r_max: 15.0,
            n_samples: 800,
            shell_halfwidth: 5.0,
            trials: 1_000_000,
            pulse_width: 2.0,
            x_half: 60.0,
            n_x: 6001,
            intensity_ratio: 1.0,
            n_modes: 3,
            n_max: 40,
            alpha_max: 2.0,
            n_pairs: 100,
            source_width: 0.3,
            source_duration: 0.3,
            residual_width: 0.5,
            n_max_algebra: 4,
            lattice_h: 0.25,
            n_refinements: 3,
            observer_r: 10.0,
        }
    }

    pub fn sigma_x(&self) -> f64 {
        1.0 / (2.0 * self.sigma_k)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("field `{name}` must be a positive number, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::Config(format!("field `{name}` must be ≥ {min}, got {v}")))
    }
}

/// Parses, defaults and range-checks a config for `experiment`.
///
/// An `experiment` key in the file, if present, must agree with the requested one.
pub fn validate_config(raw: &str, experiment: Experiment) -> Result<ExperimentConfig> {
    let trimmed = raw.trim_start();
    let r: RawConfig = if trimmed.is_empty() {
        RawConfig::default()
    } else if trimmed.starts_with('{') {
        serde_json::from_str(raw).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?
    } else {
        toml::from_str(raw).map_err(|e| Error::Config(e.to_string()))?
    };
    if let Some(name) = &r.experiment {
        let named = Experiment::parse(name)?;
        if named != experiment {
            return Err(Error::Config(format!(
                "field `experiment`: file is for `{named}`, but `{experiment}` was requested"
            )));
        }
    }
    let mut c = ExperimentConfig::defaults(experiment);
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = r.$f { c.$f = v; } )* };
    }
    take!(seed, threads, grid, residual_width, n_max_algebra, k0, sigma_k, sigma, t_final, r_max, n_samples, shell_halfwidth, trials, pulse_width, x_half, n_x, intensity_ratio, n_modes, n_max, alpha_max, n_pairs, source_width, source_duration, lattice_h, n_refinements, observer_r);
    c.out = r.out.or(c.out);

    c.grid.validate()?;
    for (name, v) in [
        ("k0", c.k0),
        ("sigma_k", c.sigma_k),
        ("sigma", c.sigma),
        ("t_final", c.t_final),
        ("r_max", c.r_max),
        ("shell_halfwidth", c.shell_halfwidth),
        ("pulse_width", c.pulse_width),
        ("x_half", c.x_half),
        ("intensity_ratio", c.intensity_ratio),
        ("alpha_max", c.alpha_max),
        ("source_width", c.source_width),
        ("source_duration", c.source_duration),
        ("residual_width", c.residual_width),
        ("lattice_h", c.lattice_h),
        ("observer_r", c.observer_r),
    ] {
        positive(name, v)?;
    }
    at_least("n_samples", c.n_samples, 16)?;
    at_least("trials", c.trials, 1)?;
    at_least("n_x", c.n_x, 16)?;
    at_least("n_modes", c.n_modes, 1)?;
    at_least("n_max", c.n_max, 1)?;
    at_least("n_max_algebra", c.n_max_algebra, 1)?;
    at_least("n_pairs", c.n_pairs, 1)?;
    at_least("n_refinements", c.n_refinements, 2)?;
    if matches!(experiment, Experiment::Localize | Experiment::Lightcone) && c.k0 >= c.grid.k_max {
        return Err(Error::Config(format!("field `k0` = {} must lie below grid.k_max = {}", c.k0, c.grid.k_max)));
    }
    // the regularized kernels must be narrow compared with the sampled domain
    let domain = match experiment {
        Experiment::Hegerfeldt | Experiment::EvenfieldTail => c.t_final,
        Experiment::Beamsplit | Experiment::Fringes | Experiment::EntangleCollapse => c.x_half,
        _ => c.r_max * c.sigma_x(),
    };
    if matches!(experiment, Experiment::Beamsplit | Experiment::Fringes | Experiment::EntangleCollapse) {
        if c.pulse_width > c.x_half / 8.0 {
            return Err(Error::Config(format!(
                "field `pulse_width` = {} is too wide for the waveguide domain x_half = {}; use pulse_width ≤ {}",
                c.pulse_width,
                c.x_half,
                c.x_half / 8.0
            )));
        }
    } else if c.sigma > domain / 10.0 {
        return Err(Error::Config(format!(
            "field `sigma` = {} is larger than the domain allows; use sigma ≤ {:.6}",
            c.sigma,
            domain / 10.0
        )));
    }
    Ok(c)
}
