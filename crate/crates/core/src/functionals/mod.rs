//! Hitting probabilities, exit times, recurrence and phase tendencies.

mod bvp;
mod recurrence;
mod tendency;

pub use bvp::{
    all_ones, richardson_ratio, solve_exit_time, solve_hitting, solve_hitting_lower, MIN_GRID,
};
pub use recurrence::{classify_recurrence, RecurrenceReport, SideTrend, DEFAULT_EPSILONS};
pub use tendency::{tendency_analysis, PhaseThreshold, Regime, Tendency, TendencyReport};

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PhaseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BvpKind {
    Hitting,
    ExitTime,
}

/// Grid values of `U` or `V` on `[c, d]`.
#[derive(Debug, Clone, Serialize)]
pub struct BvpSolution {
    kind: BvpKind,
    grid: Vec<f64>,
    values: Vec<PhaseMatrix>,
}

impl BvpSolution {
    pub(crate) fn new(kind: BvpKind, grid: Vec<f64>, values: Vec<PhaseMatrix>) -> Self {
        Self { kind, grid, values }
    }

    pub fn kind(&self) -> BvpKind {
        self.kind
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[PhaseMatrix] {
        &self.values
    }

    pub fn c(&self) -> f64 {
        self.grid[0]
    }

    pub fn d(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Linear interpolation between grid points.
    pub fn value_at(&self, x: f64) -> Result<PhaseMatrix> {
        let (c, d) = (self.c(), self.d());
        if !(x >= c && x <= d) {
            return Err(Error::OutOfDomain { x, lo: c, hi: d });
        }
        let i = self.grid.partition_point(|&g| g <= x).clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        Ok(&self.values[i - 1].scale(1.0 - w) + &self.values[i].scale(w))
    }

    /// Smallest entry over all grid points.
    pub fn min_entry(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter().copied()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `x, y11, y12, ...` rows; `y` is `u` for hitting and `v` for
    /// exit-time solutions.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.values[0].dim();
        let tag = match self.kind {
            BvpKind::Hitting => "u",
            BvpKind::ExitTime => "v",
        };
        let mut header = vec!["x".to_string()];
        for i in 1..=n {
            for j in 1..=n {
                header.push(format!("{tag}{i}{j}"));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            let mut row = vec![format!("{x:.16e}")];
            for i in 0..n {
                for j in 0..n {
                    row.push(format!("{:.16e}", v[(i, j)]));
                }
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{wright_fisher_model, WrightFisherParams};

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let m = wright_fisher_model(WrightFisherParams::new(0.0, 0.0, 0.5, 2).unwrap()).unwrap();
        let s = solve_hitting(&m, 0.2, 0.8, 16).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,u11,u12,u21,u22");
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1].split(',').count(), 5);
    }

    #[test]
    fn interpolation_hits_nodes_and_rejects_outside() {
        let m = wright_fisher_model(WrightFisherParams::new(1.0, 1.0, 0.5, 2).unwrap()).unwrap();
        let s = solve_hitting(&m, 0.2, 0.8, 31).unwrap();
        let x = s.grid()[7];
        assert!(s.value_at(x).unwrap().max_abs_diff(&s.values()[7]) < 1e-15);
        assert!(s.value_at(0.1).is_err());
    }
}
