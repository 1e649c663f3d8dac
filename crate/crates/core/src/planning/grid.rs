//! The product sampling grid on `C × W` shared by validation and instability.

use super::plan::PlanPiece;
use super::PlanError;
use crate::grid::{product_values, GridShape};
use crate::kinematics::{Config, ConfigChart, GridAxis, KinematicMap, WorkChart, WorkPoint};
use crate::mechanism::ChartFactor;
use rayon::prelude::*;
use std::f64::consts::{FRAC_2_PI, PI, TAU};

fn work_axis_steps(w: &WorkChart, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let closed = |lo: f64, hi: f64| (hi - lo) / (nf - 1.0);
    // chord ≥ (2/π)·arc for arcs up to π
    let angular = |r_min: f64| r_min * (TAU / nf) * FRAC_2_PI;
    match w {
        WorkChart::Annulus { r_min, r_max } => vec![angular(*r_min), closed(*r_min, *r_max)],
        WorkChart::Sphere => vec![PI / (nf - 1.0), 0.0],
        WorkChart::Cylinder { r_min, r_max, h_lo, h_hi } => {
            vec![angular(*r_min), closed(*r_min, *r_max), closed(*h_lo, *h_hi)]
        }
        WorkChart::Chart(c) => c
            .factors
            .iter()
            .map(|f| match *f {
                ChartFactor::Circle => TAU / nf,
                ChartFactor::Interval { lo, hi } => closed(lo, hi),
            })
            .collect(),
        WorkChart::Product(parts) => parts.iter().flat_map(|p| work_axis_steps(p, n)).collect(),
        _ => Vec::new(),
    }
}

pub struct PlanGrid {
    pub n: usize,
    pub c_chart: ConfigChart,
    pub w_chart: WorkChart,
    pub c_axes: Vec<GridAxis>,
    pub w_axes: Vec<GridAxis>,
    pub configs: Vec<Config>,
    pub works: Vec<WorkPoint>,
    pub shape: GridShape,
}

impl PlanGrid {
    /// `n` samples per axis of both charts.
    pub fn new(k: &KinematicMap, n: usize) -> Result<Self, PlanError> {
        if n < 2 {
            return Err(PlanError::InvalidGrid(format!("need at least 2 samples per axis, got {n}")));
        }
        let c_chart = k.config_chart().clone();
        let w_chart = k.work_chart().clone();
        let w_axes = w_chart
            .grid_axes(n)
            .ok_or_else(|| PlanError::InvalidGrid(format!("work space {} has no sampling grid", w_chart.describe())))?;
        let c_axes = c_chart.grid_axes(n);
        let mut all = c_axes.clone();
        all.extend(w_axes.iter().cloned());
        let shape = GridShape::from_axes(&all);
        let configs = product_values(&c_axes);
        let works = product_values(&w_axes).iter().map(|v| w_chart.grid_point(v)).collect();
        Ok(Self { n, c_chart, w_chart, c_axes, w_axes, configs, works, shape })
    }

    pub fn len(&self) -> usize {
        self.configs.len() * self.works.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample(&self, lin: usize) -> (Config, WorkPoint) {
        let nw = self.works.len();
        (self.configs[lin / nw].clone(), self.works[lin % nw].clone())
    }

    /// `sqrt(d_C² + d_W²)` between two grid samples.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let nw = self.works.len();
        let dc = self.c_chart.distance(&self.configs[a / nw], &self.configs[b / nw]);
        let dw = self.w_chart.distance(&self.works[a % nw], &self.works[b % nw]);
        dc.hypot(dw)
    }

    /// Largest distance between grid neighbours.
    pub fn spacing(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|lin| self.shape.forward_neighbors(lin).into_iter().map(|m| self.distance(lin, m)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Per axis, a lower bound on the sample distance per index step, so a
    /// ball of radius `r` lies in the index box of half-widths `r / step`.
    /// Zero where no bound holds (longitude near the poles).
    pub fn axis_steps(&self) -> Vec<f64> {
        let n = self.n as f64;
        let circle = std::f64::consts::TAU / n;
        let closed = |lo: f64, hi: f64| (hi - lo) / (n - 1.0);
        let mut out: Vec<f64> = (0..self.c_chart.dim())
            .map(|i| match self.c_chart.factors[i] {
                ChartFactor::Circle => circle,
                ChartFactor::Interval { lo, hi } => closed(lo, hi),
            })
            .collect();
        out.extend(work_axis_steps(&self.w_chart, self.n));
        out
    }

    /// Indices of the pieces containing each sample.
    pub fn membership(&self, pieces: &[PlanPiece]) -> Result<Vec<Vec<usize>>, PlanError> {
        (0..self.len())
            .into_par_iter()
            .map(|lin| {
                let (c, w) = self.sample(lin);
                let mut hit = Vec::new();
                for (i, p) in pieces.iter().enumerate() {
                    if p.domain.contains(&c, &w)? {
                        hit.push(i);
                    }
                }
                Ok(hit)
            })
            .collect()
    }
}
