//! Coercive epigraph domains, reflections across the moving plane, and the
//! region decomposition the plane sweep works with.
//!
//! Points are slices `[x_1, ..., x_n]`; the last coordinate is the direction
//! the plane moves in. The plane at height λ is T_λ = {x_n = λ}, and the
//! reflection of x across it is x^λ = (x', 2λ - x_n).

use crate::error::{Error, Result};
use serde::Serialize;

/// Parametric boundary-profile families. All have infimum 0 attained at
/// x' = 0 and grow to +∞ with |x'|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EpigraphFamily {
    /// φ(x') = α |x'|²
    Paraboloid { alpha: f64 },
    /// φ(x') = α |x'|
    Cone { alpha: f64 },
    /// φ(x') = α max(|x'| - r0, 0)
    FlatBottom { alpha: f64, r0: f64 },
}

/// The domain Ω = {x : x_n > φ(x')} above a coercive Lipschitz profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epigraph {
    family: EpigraphFamily,
}

impl Epigraph {
    pub fn paraboloid(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("paraboloid needs alpha > 0, got {alpha}")));
        }
        Ok(Self { family: EpigraphFamily::Paraboloid { alpha } })
    }

    pub fn cone(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("cone needs alpha > 0, got {alpha}")));
        }
        Ok(Self { family: EpigraphFamily::Cone { alpha } })
    }

    pub fn flat_bottom(alpha: f64, r0: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(r0 >= 0.0) {
            return Err(Error::Domain(format!(
                "flat-bottom needs alpha > 0 and r0 >= 0, got alpha={alpha}, r0={r0}"
            )));
        }
        Ok(Self { family: EpigraphFamily::FlatBottom { alpha, r0 } })
    }

    pub fn family(&self) -> EpigraphFamily {
        self.family
    }

    /// Evaluate φ at x' (the first n-1 coordinates of a point).
    pub fn phi(&self, xp: &[f64]) -> f64 {
        let r = xp.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self.family {
            EpigraphFamily::Paraboloid { alpha } => alpha * r * r,
            EpigraphFamily::Cone { alpha } => alpha * r,
            EpigraphFamily::FlatBottom { alpha, r0 } => alpha * (r - r0).max(0.0),
        }
    }

    /// l = inf φ. Zero for every built-in family.
    pub fn infimum(&self) -> f64 {
        0.0
    }

    /// A Lipschitz constant of φ valid on {|x'| <= radius}.
    pub fn lipschitz_on(&self, radius: f64) -> f64 {
        match self.family {
            EpigraphFamily::Paraboloid { alpha } => 2.0 * alpha * radius.abs(),
            EpigraphFamily::Cone { alpha } => alpha,
            EpigraphFamily::FlatBottom { alpha, .. } => alpha,
        }
    }

    /// Strict membership x ∈ Ω, with the boundary x_n = φ(x') counted outside
    /// (consistent with u = 0 on ∂Ω).
    pub fn contains(&self, x: &[f64]) -> bool {
        let (xp, xn) = split(x);
        xn > self.phi(xp)
    }
}

fn split(x: &[f64]) -> (&[f64], f64) {
    let n = x.len();
    (&x[..n - 1], x[n - 1])
}

/// Reflection x^λ = (x', 2λ - x_n) across T_λ.
pub fn reflect(x: &[f64], lambda: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    let n = y.len();
    y[n - 1] = 2.0 * lambda - x[n - 1];
    y
}

/// Region labels of the decomposition below the plane, plus ABOVE for the
/// rest. Tie rules: x_n = λ is ABOVE, x_n = φ(x') is not in Ω, and
/// x_n = 2λ - φ(x') is D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    /// x ∈ Ω with l < x_n < λ.
    H,
    /// Reflected-domain collar: x ∈ Ω̃ \ Ω.
    A,
    /// Remainder below the plane: Σ_λ \ Ω̃.
    D,
    /// x_n >= λ.
    Above,
}

/// Classify a point for the plane at height λ.
pub fn classify(e: &Epigraph, lambda: f64, x: &[f64]) -> Result<RegionLabel> {
    if !(lambda > e.infimum()) {
        return Err(Error::Precondition(format!(
            "classify needs lambda > l = {}, got {lambda}",
            e.infimum()
        )));
    }
    let (xp, xn) = split(x);
    if xn >= lambda {
        return Ok(RegionLabel::Above);
    }
    let phi = e.phi(xp);
    if xn > phi {
        Ok(RegionLabel::H)
    } else if xn < 2.0 * lambda - phi {
        // x ∈ Ω̃ = {x_n < 2λ - φ(x')} but not in Ω
        Ok(RegionLabel::A)
    } else {
        Ok(RegionLabel::D)
    }
}

/// (|x - y|, |x - y^λ|). For x, y strictly below T_λ the second entry is
/// strictly larger; that inequality drives every maximum-principle estimate.
pub fn kernel_distance_pair(x: &[f64], y: &[f64], lambda: f64) -> (f64, f64) {
    let d = dist(x, y);
    let yr = reflect(y, lambda);
    (d, dist(x, &yr))
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Box-truncated uniform lattice. Node i = (i_1, ..., i_n) sits at
/// origin + h·i; flat indices are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformGrid {
    origin: Vec<f64>,
    h: f64,
    dims: Vec<usize>,
}

impl UniformGrid {
    pub fn new(origin: Vec<f64>, h: f64, dims: Vec<usize>) -> Result<Self> {
        if origin.is_empty() || origin.len() != dims.len() {
            return Err(Error::Contract(format!(
                "origin ({}) and dims ({}) must agree and be nonempty",
                origin.len(),
                dims.len()
            )));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!("grid spacing must be positive, got {h}")));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Domain("grid dims must all be >= 1".into()));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid origin must be finite".into()));
        }
        Ok(Self { origin, h, dims })
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Upper corner coordinate per axis.
    pub fn top(&self, axis: usize) -> f64 {
        self.origin[axis] + self.h * (self.dims[axis] - 1) as f64
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.n());
        let mut idx = 0;
        for (d, &m) in multi.iter().enumerate() {
            debug_assert!(m < self.dims[d]);
            idx = idx * self.dims[d] + m;
        }
        idx
    }

    pub fn multi(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let mut out = vec![0; self.n()];
        for d in (0..self.n()).rev() {
            out[d] = rem % self.dims[d];
            rem /= self.dims[d];
        }
        out
    }

    pub fn coord(&self, flat: usize) -> Vec<f64> {
        self.multi(flat)
            .iter()
            .enumerate()
            .map(|(d, &m)| self.origin[d] + self.h * m as f64)
            .collect()
    }

    pub fn coord_axis(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + self.h * i as f64
    }

    /// Exact lattice position of a point, if it lies on a node (within
    /// 1e-9·h per axis).
    pub fn position_of(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.n() {
            return None;
        }
        let mut multi = Vec::with_capacity(self.n());
        for d in 0..self.n() {
            let t = (x[d] - self.origin[d]) / self.h;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.dims[d] {
                return None;
            }
            multi.push(r as usize);
        }
        Some(multi)
    }

    /// True when the ball of radius r about `center` lies strictly inside
    /// the grid box.
    pub fn contains_ball(&self, center: &[f64], r: f64) -> bool {
        center.len() == self.n()
            && (0..self.n()).all(|d| {
                center[d] - r > self.origin[d] - 1e-12 && center[d] + r < self.top(d) + 1e-12
            })
    }

    /// λ is reflection-compatible when 2(λ - origin_n)/h is an integer, i.e.
    /// λ sits on a grid plane or midway between two planes. Reflection then
    /// maps lattice points to lattice points.
    pub fn reflection_compatible(&self, lambda: f64) -> bool {
        let t = 2.0 * (lambda - self.origin[self.n() - 1]) / self.h;
        (t - t.round()).abs() < 1e-9
    }

    /// Index of the reflected node along the last axis, possibly outside
    /// [0, dims_n). Caller must have checked `reflection_compatible`.
    pub fn reflect_axis_index(&self, lambda: f64, j: usize) -> i64 {
        let t = 2.0 * (lambda - self.origin[self.n() - 1]) / self.h;
        t.round() as i64 - j as i64
    }
}
