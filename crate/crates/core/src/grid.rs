//! k-space quadrature grids.
//!
//! A [`QuadratureGrid`] is a tensor product of Gauss–Legendre radial nodes on
//! `(k_min, k_max)`, Gauss–Legendre nodes in `cos θ` and a uniform `φ` ring.
//! Every node carries three weights:
//!
//! * `volume`      `v_i ≈ d³k`
//! * `flat`        `f_i = v_i / (2π)³` (probability measure)
//! * `covariant`   `w_i = v_i / ((2π)³ ω_i)` (field expansions, scalar product)

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::special::gauss_legendre;
use crate::{Error, Result, Vec3};

pub const TWO_PI_CUBED: f64 = 8.0 * PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n_radial: usize,
    pub n_costheta: usize,
    pub n_phi: usize,
    pub k_min: f64,
    pub k_max: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            n_radial: 256,
            n_costheta: 48,
            n_phi: 48,
            k_min: 1e-3,
            k_max: 12.0,
        }
    }
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0) {
            return Err(Error::Config(format!(
                "k_min must be > 0 (k=0 excluded), got {}",
                self.k_min
            )));
        }
        if !(self.k_max > self.k_min) || !self.k_max.is_finite() {
            return Err(Error::Config(format!(
                "k_max must exceed k_min ({}), got {}",
                self.k_min, self.k_max
            )));
        }
        if self.n_radial == 0 || self.n_costheta == 0 || self.n_phi == 0 {
            return Err(Error::Config(
                "n_radial, n_costheta and n_phi must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Radial Gauss–Legendre rule on `(k_min, k_max)`, shared by the 3D grid and by
/// spherically symmetric fast paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, k_min: f64, k_max: f64) -> Result<Self> {
        GridParams {
            n_radial: n,
            n_costheta: 1,
            n_phi: 1,
            k_min,
            k_max,
        }
        .validate()?;
        let (nodes, weights) = gauss_legendre(n, k_min, k_max);
        Ok(RadialGrid {
            k_min,
            k_max,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    params: GridParams,
    pub radial: RadialGrid,
    /// `cos θ` nodes and weights.
    pub costheta_nodes: Vec<f64>,
    pub costheta_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    pub phi_weight: f64,
    pub nodes: Vec<Vec3>,
    pub kmag: Vec<f64>,
    pub omega: Vec<f64>,
    pub volume: Vec<f64>,
    pub flat: Vec<f64>,
    pub covariant: Vec<f64>,
}

impl PartialEq for QuadratureGrid {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl QuadratureGrid {
    /// Builds the grid with `ω = c|k|`, `c = 1`.
    pub fn new(params: GridParams) -> Result<Self> {
        params.validate()?;
        let radial = RadialGrid::new(params.n_radial, params.k_min, params.k_max)?;
        let (costheta_nodes, costheta_weights) = gauss_legendre(params.n_costheta, -1.0, 1.0);
        let phi_weight = 2.0 * PI / params.n_phi as f64;
        let phi_nodes: Vec<f64> = (0..params.n_phi)
            .map(|j| (j as f64 + 0.5) * phi_weight)
            .collect();

        let n = params.n_radial * params.n_costheta * params.n_phi;
        let mut nodes = Vec::with_capacity(n);
        let mut kmag = Vec::with_capacity(n);
        let mut volume = Vec::with_capacity(n);
        for (&k, &wr) in radial.nodes.iter().zip(&radial.weights) {
            for (&ct, &wc) in costheta_nodes.iter().zip(&costheta_weights) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for &phi in &phi_nodes {
                    nodes.push(Vec3::new(k * st * phi.cos(), k * st * phi.sin(), k * ct));
                    kmag.push(k);
                    volume.push(wr * wc * phi_weight * k * k);
                }
            }
        }
        let omega = kmag.clone();
        let flat: Vec<f64> = volume.iter().map(|v| v / TWO_PI_CUBED).collect();
        let covariant = flat.iter().zip(&omega).map(|(f, w)| f / w).collect();
        Ok(QuadratureGrid {
            params,
            radial,
            costheta_nodes,
            costheta_weights,
            phi_nodes,
            phi_weight,
            nodes,
            kmag,
            omega,
            volume,
            flat,
            covariant,
        })
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn k_min(&self) -> f64 {
        self.params.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.params.k_max
    }

    /// Exact volume of the spherical shell covered by the grid.
    pub fn shell_volume(&self) -> f64 {
        4.0 * PI / 3.0 * (self.params.k_max.powi(3) - self.params.k_min.powi(3))
    }

    pub fn index(&self, ir: usize, ic: usize, ip: usize) -> usize {
        (ir * self.params.n_costheta + ic) * self.params.n_phi + ip
    }

    /// Index of the node closest to `k` (Euclidean).
    pub fn nearest_node(&self, k: &Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, node) in self.nodes.iter().enumerate() {
            let d = (node - k).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Largest `|Δx|` before the outermost phase `k_max·|Δx|` advances by more
    /// than half an angular cell, beyond which angular sums alias.
    pub fn resolvable_extent(&self) -> f64 {
        let n_ang = self.params.n_costheta.min(self.params.n_phi / 2).max(1) as f64;
        n_ang / self.params.k_max
    }
}
