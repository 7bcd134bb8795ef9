use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::write_csv;
use crate::error::{Error, Result};
use crate::planners::{PlannerKind, PlannerTree};
use crate::systems::SystemModel;

/// Minimum cost-from-root per pixel of a 2D projection of the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub dims: [usize; 2],
    pub resolution: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// Row-major, row index along `dims[1]`. `None` means no node.
    pub cells: Vec<Option<f64>>,
    /// Cost mapped to full intensity when rendering.
    pub normalization: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub cost: f64,
}

/// A tree edge projected onto the grid dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub child: usize,
    pub parent: usize,
    pub x_from: f64,
    pub y_from: f64,
    pub x_to: f64,
    pub y_to: f64,
}

impl PhaseGrid {
    pub fn from_tree(
        tree: &PlannerTree,
        system: &SystemModel,
        dims: [usize; 2],
        resolution: usize,
        normalization: f64,
    ) -> Result<Self> {
        let d = system.state_dim();
        if dims.iter().any(|&i| i >= d) || dims[0] == dims[1] {
            return Err(Error::InvalidConfig(format!(
                "grid dimensions {dims:?} invalid for a {d}-dimensional state"
            )));
        }
        if resolution == 0 {
            return Err(Error::InvalidConfig("grid resolution must be positive".into()));
        }
        let b = system.state_bounds();
        let mut grid = Self {
            dims,
            resolution,
            lo: [b[dims[0]].lo, b[dims[1]].lo],
            hi: [b[dims[0]].hi, b[dims[1]].hi],
            cells: vec![None; resolution * resolution],
            normalization,
        };
        for node in tree.nodes() {
            let idx = grid.index(&node.state);
            let cell = &mut grid.cells[idx];
            if cell.map_or(true, |c| node.cost_from_root < c) {
                *cell = Some(node.cost_from_root);
            }
        }
        Ok(grid)
    }

    fn axis(&self, axis: usize, v: f64) -> usize {
        let t = (v - self.lo[axis]) / (self.hi[axis] - self.lo[axis]);
        ((t * self.resolution as f64).floor().max(0.0) as usize).min(self.resolution - 1)
    }

    fn index(&self, x: &[f64]) -> usize {
        self.axis(1, x[self.dims[1]]) * self.resolution + self.axis(0, x[self.dims[0]])
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.resolution + col]
    }

    pub fn populated(&self) -> usize {
        self.cells.iter().flatten().count()
    }

    pub fn populated_cells(&self) -> Vec<GridCell> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                c.map(|cost| GridCell {
                    row: i / self.resolution,
                    col: i % self.resolution,
                    cost,
                })
            })
            .collect()
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("dim_x".into(), self.dims[0].to_string()),
            ("dim_y".into(), self.dims[1].to_string()),
            ("resolution".into(), self.resolution.to_string()),
            ("x_lo".into(), self.lo[0].to_string()),
            ("x_hi".into(), self.hi[0].to_string()),
            ("y_lo".into(), self.lo[1].to_string()),
            ("y_hi".into(), self.hi[1].to_string()),
            ("normalization".into(), self.normalization.to_string()),
        ]
    }
}

/// Cost at which the rendered color saturates for trees of `planner`.
pub fn default_normalization(planner: PlannerKind) -> f64 {
    match planner {
        PlannerKind::Rrt => 20.0,
        _ => 10.0,
    }
}

#[derive(Serialize)]
struct MetaRow<'a> {
    key: &'a str,
    value: &'a str,
}

/// Writes `grid.csv`, `grid_meta.csv` and `edges.csv` into `out_dir`.
pub fn emit_phase_grid(
    tree: &PlannerTree,
    system: &SystemModel,
    planner: PlannerKind,
    dims: [usize; 2],
    resolution: usize,
    out_dir: &Path,
) -> Result<PhaseGrid> {
    let grid = PhaseGrid::from_tree(tree, system, dims, resolution, default_normalization(planner))?;
    write_csv(&out_dir.join("grid.csv"), &grid.populated_cells())?;
    let meta = grid.metadata();
    let meta: Vec<MetaRow> = meta
        .iter()
        .map(|(k, v)| MetaRow { key: k, value: v })
        .collect();
    write_csv(&out_dir.join("grid_meta.csv"), &meta)?;
    let edges: Vec<EdgeRow> = tree
        .nodes()
        .filter_map(|n| {
            let p = tree.node(n.parent?)?;
            Some(EdgeRow {
                child: n.id,
                parent: p.id,
                x_from: p.state[dims[0]],
                y_from: p.state[dims[1]],
                x_to: n.state[dims[0]],
                y_to: n.state[dims[1]],
            })
        })
        .collect();
    write_csv(&out_dir.join("edges.csv"), &edges)?;
    Ok(grid)
}
