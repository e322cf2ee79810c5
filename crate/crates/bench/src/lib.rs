//! Shared fixtures for the benchmark targets.

use loglap_core::{constants_for, Constants, GridFunction, UniformGrid};

pub fn centered_grid(half_width: f64, h: f64) -> UniformGrid {
    let m = (half_width / h).round() as usize;
    UniformGrid::new(
        vec![-half_width, -half_width],
        h,
        vec![2 * m + 1, 2 * m + 1],
    )
    .unwrap()
}

pub fn gaussian(grid: &UniformGrid, sigma: f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| {
        (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma)).exp()
    })
    .unwrap()
}

pub fn plane_constants() -> Constants {
    constants_for(2).unwrap()
}
