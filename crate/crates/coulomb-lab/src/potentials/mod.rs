//! Exterior potentials `phi`, test functions `u`, growth classification,
//! quasi-hole charges and the `beta`-dependent rescaling `phi_N`.

mod convention;
mod potential;
mod test_function;

pub use convention::Convention;
pub use potential::{
    classify_growth, outer_radius_bound, p_of_beta, quasi_hole, rescale_phi_n, Charge, GrowthClass, GrowthConstants,
    Potential,
};
pub use test_function::{h1_norm_sq, TestFunction};

use crate::geometry::Point;
use crate::{Error, Result};
use std::path::Path;

/// Loads a potential sampled on a rectangular lattice from a CSV with header
/// `x,y,value`; bilinear in between, `+inf` outside the lattice.
pub fn load_grid_potential(path: &Path) -> Result<Potential> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format("expected x,y,value".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(e.to_string()))
        };
        rows.push((get(0)?, get(1)?, get(2)?));
    }
    grid_potential(&rows)
}

/// Bilinear potential from `(x, y, value)` samples on a rectangular lattice.
pub fn grid_potential(rows: &[(f64, f64, f64)]) -> Result<Potential> {
    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 || nx * ny != rows.len() {
        return Err(Error::Format(format!(
            "samples do not form a lattice: {nx} x {ny} vs {} rows",
            rows.len()
        )));
    }
    let mut vals = vec![f64::NAN; nx * ny];
    for &(x, y, v) in rows {
        let i = xs.binary_search_by(|a| a.total_cmp(&x)).unwrap();
        let j = ys.binary_search_by(|a| a.total_cmp(&y)).unwrap();
        vals[j * nx + i] = v;
    }
    let f = move |z: Point| {
        let (x, y) = (z.re, z.im);
        if x < xs[0] || x > xs[nx - 1] || y < ys[0] || y > ys[ny - 1] {
            return f64::INFINITY;
        }
        let i = xs.partition_point(|&a| a <= x).clamp(1, nx - 1) - 1;
        let j = ys.partition_point(|&a| a <= y).clamp(1, ny - 1) - 1;
        let tx = (x - xs[i]) / (xs[i + 1] - xs[i]);
        let ty = (y - ys[j]) / (ys[j + 1] - ys[j]);
        let v = |a: usize, b: usize| vals[b * nx + a];
        (1.0 - ty) * ((1.0 - tx) * v(i, j) + tx * v(i + 1, j)) + ty * ((1.0 - tx) * v(i, j + 1) + tx * v(i + 1, j + 1))
    };
    Ok(Potential::from_fn("grid", f))
}

/// Loads charges from a JSON array `[{"x":..,"y":..,"a":..}]`.
pub fn load_charges(path: &Path) -> Result<Vec<Charge>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
