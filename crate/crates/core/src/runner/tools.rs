//! `density` and `propagate`: plain data dumps for the Gaussian shell state
//! configured by the `localize` keys (`[grid]`, `k0`, `sigma_k`, `t_final`,
//! `r_max`, `n_samples`).

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use super::config::ExperimentConfig;
use super::experiments::Table;
use crate::grid::RadialGrid;
use crate::kspace::{Helicity, Parity, RadialState};
use crate::propagator;
use crate::scalar::{born_density_x_radial, SpatialGrid};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tool {
    Density,
    Propagate,
}

impl Tool {
    pub fn parse(s: &str) -> Option<Tool> {
        match s {
            "density" => Some(Tool::Density),
            "propagate" => Some(Tool::Propagate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tool::Density => "density",
            Tool::Propagate => "propagate",
        }
    }
}

fn shell(cfg: &ExperimentConfig) -> Result<RadialState> {
    let g = &cfg.grid;
    let radial = Arc::new(RadialGrid::new(g.n_radial, g.k_min, g.k_max)?);
    RadialState::gaussian_shell(cfg.k0, cfg.sigma_k, Helicity::Plus, Parity::Odd, radial)
}

/// Born densities in k (per radial node) and x (radial samples at `t_final·σ_x`),
/// plus a JSON header with the grid, `t` and captured probability.
pub fn density(cfg: &ExperimentConfig) -> Result<(Vec<Table>, serde_json::Value)> {
    let s = shell(cfg)?;
    let sx = cfg.sigma_x();
    let t = cfg.t_final * sx;
    let grid = SpatialGrid::Radial {
        r_max: t + cfg.r_max * sx,
        n: cfg.n_samples,
    };
    let mut k = Table::new("density_k", &["k [L^-1]", "lambda [1]", "density [L^3]"]);
    let mut x = Table::new("density_x", &["r [L]", "lambda [1]", "density [L^-3]"]);
    let mut captured = Vec::new();
    for h in Helicity::ALL {
        let amps = s.amplitudes(Parity::Odd, h);
        for (kn, a) in s.radial().nodes.iter().zip(amps) {
            k.rows.push(vec![*kn, h.value(), a.norm_sqr()]);
        }
        if amps.iter().all(|a| a.norm_sqr() == 0.0) {
            continue;
        }
        let d = born_density_x_radial(&s, h, &grid, t)?;
        for (p, v) in d.points.iter().zip(&d.values) {
            x.rows.push(vec![p.z, h.value(), *v]);
        }
        captured.push(json!({ "lambda": h.value(), "total": d.total, "captured": d.captured }));
    }
    let header = json!({ "grid": cfg.grid, "t": t, "r_max": t + cfg.r_max * sx, "captured": captured });
    Ok((vec![k, x], header))
}

/// Born amplitude along +z at five times between 0 and `t_final·σ_x`.
pub fn propagate(cfg: &ExperimentConfig) -> Result<(Vec<Table>, serde_json::Value)> {
    let s = shell(cfg)?;
    let sx = cfg.sigma_x();
    let t1 = cfg.t_final * sx;
    let r_max = t1 + cfg.r_max * sx;
    let mut tab = Table::new(
        "propagate",
        &["t [L/c]", "x [L]", "y [L]", "z [L]", "lambda [1]", "re_psi [L^-3/2]", "im_psi [L^-3/2]", "abs2_psi [L^-3]"],
    );
    let times: Vec<f64> = (0..5).map(|i| t1 * i as f64 / 4.0).collect();
    for &t in &times {
        for i in 0..cfg.n_samples {
            let r = r_max * (i as f64 + 0.5) / cfg.n_samples as f64;
            let psi = propagator::radial_amplitude(&s, Parity::Odd, Helicity::Plus, r, t);
            tab.rows.push(vec![t, 0.0, 0.0, r, 1.0, psi.re, psi.im, psi.norm_sqr()]);
        }
    }
    let header = json!({ "grid": cfg.grid, "times": times, "k0": cfg.k0, "sigma_k": cfg.sigma_k });
    Ok((vec![tab], header))
}

pub fn run_tool(tool: Tool, cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let (tables, header) = match tool {
        Tool::Density => density(cfg)?,
        Tool::Propagate => propagate(cfg)?,
    };
    let dir = out_dir.join(tool.name());
    fs::create_dir_all(&dir)?;
    for t in &tables {
        super::write_table(&dir, t)?;
    }
    fs::write(dir.join(format!("{}.json", tool.name())), serde_json::to_string_pretty(&header).unwrap())?;
    Ok(())
}
