//! Damped-iteration Dirichlet solver on box-truncated epigraph domains and
//! the first eigenpair on a unit ball with zero exterior condition.
//!
//! The solver runs the explicit residual iteration
//! u <- u - τ (L_h u - a(x_n) f(u)) on the interior nodes with u frozen at
//! zero outside, optionally projected onto the positive cone. The operator
//! is dense, so Newton steps would need dense inner solves; the explicit
//! iteration with the stability bound τ · diag < 2 is enough at desk scale.
//!
//! The eigenproblem assembles the dense symmetric matrix of the operator
//! restricted to ball nodes (zero exterior) and runs shifted inverse power
//! iteration; the shift is zero since the restricted matrix is positive
//! definite whenever ρ_n > 0 holds. Factorization is an in-place packed
//! Cholesky; the Rayleigh quotient and residual reuse the factor, so only
//! one N×N buffer is ever held.

use crate::error::{Error, Result};
use crate::geometry::UniformGrid;
use crate::operator::{apply_log_laplacian_on_support, GridFunction, KernelPlan};
use crate::problems::{check_assumptions, ProblemSpec};
use crate::special::Constants;
use serde::Serialize;

/// Damped-iteration configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Damping factor; `None` picks 0.8 / (diagonal weight of the operator).
    pub tau: Option<f64>,
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Clamp iterates at zero. The problem's objects are positive solutions,
    /// so projection onto the cone is the default.
    pub positivity_projection: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tau: None,
            tol_residual: 1e-8,
            max_iter: 2000,
            positivity_projection: true,
        }
    }
}

/// Outcome of a solve: final residual in the sup norm over interior nodes,
/// iteration count, convergence flag, and the sup-norm history of the
/// iterates so callers can judge decay against divergence themselves.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sup_history: Vec<f64>,
}

fn resolve_tau(cfg: &SolveConfig, plan: &KernelPlan) -> Result<f64> {
    let diag = plan.diagonal_weight();
    let tau = cfg.tau.unwrap_or(0.8 / diag);
    if !(tau > 0.0) {
        return Err(Error::Config(format!("damping must be positive, got {tau}")));
    }
    if tau * diag >= 2.0 {
        return Err(Error::Config(format!(
            "explicit iteration unstable: tau * diag = {} >= 2",
            tau * diag
        )));
    }
    Ok(tau)
}

fn check_initial_iterate(u0: &GridFunction, spec: &ProblemSpec, interior: &[usize]) -> Result<()> {
    if u0.grid() != &spec.grid {
        return Err(Error::Contract("initial iterate lives on a different grid".into()));
    }
    if u0.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("initial iterate must be nonnegative".into()));
    }
    let mut inside = vec![false; spec.grid.len()];
    for &i in interior {
        inside[i] = true;
    }
    for (i, &v) in u0.values().iter().enumerate() {
        if !inside[i] && v != 0.0 {
            return Err(Error::Precondition(format!(
                "initial iterate must vanish outside the domain (node {i} has {v})"
            )));
        }
    }
    Ok(())
}

enum RightHandSide<'a> {
    Nonlinear,
    Fixed(&'a [f64]),
}

fn run_damped_iteration(
    spec: &ProblemSpec,
    cfg: &SolveConfig,
    u0: &GridFunction,
    rhs: RightHandSide<'_>,
) -> Result<(GridFunction, SolveReport)> {
    let interior = spec.interior_nodes();
    check_initial_iterate(u0, spec, &interior)?;
    let plan = KernelPlan::new(&spec.grid, &spec.constants)?;
    let tau = resolve_tau(cfg, &plan)?;
    let coeff: Vec<f64> = interior.iter().map(|&i| spec.coefficient_at(i)).collect();

    let mut u = u0.clone();
    // freeze exterior nodes at zero
    let mut inside = vec![false; spec.grid.len()];
    for &i in &interior {
        inside[i] = true;
    }
    for (i, v) in u.values_mut().iter_mut().enumerate() {
        if !inside[i] {
            *v = 0.0;
        }
    }

    let mut sup_history = Vec::with_capacity(cfg.max_iter.min(4096));
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..cfg.max_iter {
        let lu = apply_log_laplacian_on_support(&u, &plan, &interior, &interior);
        let mut res = 0.0f64;
        let mut delta = Vec::with_capacity(interior.len());
        for (idx, &i) in interior.iter().enumerate() {
            let r = match rhs {
                RightHandSide::Nonlinear => lu[idx] - coeff[idx] * spec.f.eval(u.value(i)),
                RightHandSide::Fixed(g) => lu[idx] - g[i],
            };
            if !r.is_finite() {
                return Err(Error::Divergence {
                    iteration: k,
                    what: format!("residual not finite at node {i}"),
                });
            }
            res = res.max(r.abs());
            delta.push(r);
        }
        residual = res;
        iterations = k;
        if res <= cfg.tol_residual {
            converged = true;
            sup_history.push(u.sup_norm());
            break;
        }
        for (idx, &i) in interior.iter().enumerate() {
            let mut v = u.value(i) - tau * delta[idx];
            if cfg.positivity_projection {
                v = v.max(0.0);
            }
            if !v.is_finite() {
                return Err(Error::Divergence {
                    iteration: k,
                    what: format!("iterate not finite at node {i}"),
                });
            }
            u.values_mut()[i] = v;
        }
        sup_history.push(u.sup_norm());
    }
    if converged {
        iterations += 1;
    } else {
        iterations = cfg.max_iter;
    }

    Ok((
        u,
        SolveReport {
            residual,
            iterations,
            converged,
            sup_history,
        },
    ))
}

/// Solve the zero-exterior Dirichlet problem L_h u = a(x_n) f(u) on the
/// interior nodes by damped residual iteration.
pub fn solve_dirichlet(
    spec: &ProblemSpec,
    cfg: &SolveConfig,
    u0: &GridFunction,
) -> Result<(GridFunction, SolveReport)> {
    let report = check_assumptions(&spec.a, &spec.f, spec.epigraph.infimum());
    if !report.solver_ok() {
        return Err(Error::Precondition(format!(
            "coefficient/nonlinearity assumptions fail: {report:?}"
        )));
    }
    run_damped_iteration(spec, cfg, u0, RightHandSide::Nonlinear)
}

/// Same iteration with the nonlinear term replaced by a fixed right-hand
/// side (manufactured-solution recovery).
pub fn solve_fixed_rhs(
    spec: &ProblemSpec,
    cfg: &SolveConfig,
    rhs: &GridFunction,
    u0: &GridFunction,
) -> Result<(GridFunction, SolveReport)> {
    if rhs.grid() != &spec.grid {
        return Err(Error::Contract("right-hand side lives on a different grid".into()));
    }
    run_damped_iteration(spec, cfg, u0, RightHandSide::Fixed(rhs.values()))
}

/// Sup-norm residual ‖L_h u - a(x_n) f(u)‖ over interior nodes; u must
/// vanish outside them.
pub fn residual(u: &GridFunction, spec: &ProblemSpec) -> Result<f64> {
    let interior = spec.interior_nodes();
    check_initial_iterate(u, spec, &interior)?;
    let plan = KernelPlan::new(&spec.grid, &spec.constants)?;
    let lu = apply_log_laplacian_on_support(u, &plan, &interior, &interior);
    Ok(interior
        .iter()
        .enumerate()
        .map(|(idx, &i)| (lu[idx] - spec.coefficient_at(i) * spec.f.eval(u.value(i))).abs())
        .fold(0.0, f64::max))
}

/// First eigenpair of the restricted operator on the unit ball about R e_n.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda_1: f64,
    /// Eigenfunction on the full grid, zero outside the ball nodes,
    /// normalized to max value 1 with positive interior sign.
    pub phi: GridFunction,
    /// ‖A φ - λ_1 φ‖∞ over ball nodes.
    pub residual: f64,
    pub iterations: usize,
}

/// Dense symmetric matrix of the discrete operator restricted to the nodes
/// of a unit ball, column-major.
pub(crate) struct BallMatrix {
    pub nodes: Vec<usize>,
    pub data: Vec<f64>,
    pub n: usize,
}

pub(crate) fn assemble_ball_matrix(
    grid: &UniformGrid,
    constants: &Constants,
    center: &[f64],
    plan: &KernelPlan,
) -> BallMatrix {
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.coord(i);
            x.iter()
                .zip(center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                < 1.0
        })
        .collect();
    let n = nodes.len();
    let dim = grid.n();
    let h = grid.h();
    let c_n = constants.c_n;
    let neighbor_coupling = -(c_n / 2.0) * plan.self_cell_moment() / (h * h);
    let diag = plan.diagonal_weight();
    let multis: Vec<Vec<usize>> = nodes.iter().map(|&i| grid.multi(i)).collect();
    let mut data = vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            if row == col {
                data[row + col * n] = diag;
                continue;
            }
            let mut manhattan = 0i64;
            let mut r2 = 0.0;
            for d in 0..dim {
                let s = multis[row][d] as i64 - multis[col][d] as i64;
                manhattan += s.abs();
                let z = s as f64 * h;
                r2 += z * z;
            }
            let mut v = -c_n * h.powi(dim as i32) / r2.powf(dim as f64 / 2.0);
            if manhattan == 1 {
                v += neighbor_coupling;
            }
            data[row + col * n] = v;
        }
    }
    #[cfg(debug_assertions)]
    for col in 0..n {
        for row in 0..col {
            debug_assert_eq!(
                data[row + col * n].to_bits(),
                data[col + row * n].to_bits(),
                "restricted operator matrix must be symmetric"
            );
        }
    }
    BallMatrix { nodes, data, n }
}

/// In-place packed Cholesky A = L Lᵀ (lower triangle, column-major).
/// Fails when the matrix is not positive definite.
fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for k in 0..n {
        let akk = a[k + k * n];
        if !(akk > 0.0) {
            return Err(Error::Convergence(format!(
                "matrix not positive definite at pivot {k} ({akk})"
            )));
        }
        let lkk = akk.sqrt();
        a[k + k * n] = lkk;
        let inv = 1.0 / lkk;
        for r in (k + 1)..n {
            a[r + k * n] *= inv;
        }
        for j in (k + 1)..n {
            let ljk = a[j + k * n];
            if ljk != 0.0 {
                let (head, tail) = a.split_at_mut(j * n);
                let colk = &head[k * n + j..k * n + n];
                let colj = &mut tail[j..n];
                for (cj, ck) in colj.iter_mut().zip(colk) {
                    *cj -= ljk * ck;
                }
            }
        }
    }
    Ok(())
}

/// y = L Lᵀ x using the packed factor.
fn multiply_via_factor(l: &[f64], n: usize, x: &[f64], tmp: &mut [f64], y: &mut [f64]) {
    // tmp = Lᵀ x
    for i in 0..n {
        let col = &l[i * n + i..i * n + n];
        tmp[i] = col.iter().zip(&x[i..n]).map(|(a, b)| a * b).sum();
    }
    // y = L tmp
    y.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        let t = tmp[j];
        if t != 0.0 {
            let col = &l[j * n + j..j * n + n];
            for (yy, &lv) in y[j..n].iter_mut().zip(col) {
                *yy += lv * t;
            }
        }
    }
}

/// Solve L Lᵀ x = b in place.
fn solve_via_factor(l: &[f64], n: usize, b: &mut [f64]) {
    // forward: L y = b
    for j in 0..n {
        let yj = b[j] / l[j + j * n];
        b[j] = yj;
        let col = &l[j * n + j + 1..j * n + n];
        for (bi, &lv) in b[j + 1..n].iter_mut().zip(col) {
            *bi -= lv * yj;
        }
    }
    // backward: Lᵀ x = y
    for j in (0..n).rev() {
        let col = &l[j * n + j + 1..j * n + n];
        let dot: f64 = col.iter().zip(&b[j + 1..n]).map(|(a, c)| a * c).sum();
        b[j] = (b[j] - dot) / l[j + j * n];
    }
}

/// Compute the smallest eigenpair of the ball-restricted operator by
/// shifted inverse power iteration (shift 0: the matrix is positive
/// definite when ρ_n > 0, and the gap makes plain inverse iteration fast).
pub fn eigen_smallest(
    r_height: f64,
    grid: &UniformGrid,
    constants: &Constants,
    tol: f64,
) -> Result<EigenPair> {
    if !(constants.rho_n > 0.0) {
        return Err(Error::Precondition(format!(
            "ball eigenproblem needs rho_n > 0, got rho_{} = {}",
            constants.n, constants.rho_n
        )));
    }
    let mut center = vec![0.0; grid.n()];
    center[grid.n() - 1] = r_height;
    if !grid.contains_ball(&center, 1.0) {
        return Err(Error::Precondition(
            "unit ball about R e_n must lie strictly inside the grid box".into(),
        ));
    }
    let plan = KernelPlan::new(grid, constants)?;
    let ball = assemble_ball_matrix(grid, constants, &center, &plan);
    let n = ball.n;
    if n == 0 {
        return Err(Error::Precondition("no grid nodes inside the ball".into()));
    }
    let mut factor = ball.data;
    cholesky_in_place(&mut factor, n)?;

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut tmp = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut lambda = 0.0;
    let mut resid = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..500 {
        let mut b = x.clone();
        solve_via_factor(&factor, n, &mut b);
        let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Convergence("inverse iteration collapsed".into()));
        }
        b.iter_mut().for_each(|v| *v /= norm);
        x = b;
        // Rayleigh quotient through the factor: xᵀAx = ‖Lᵀx‖²
        multiply_via_factor(&factor, n, &x, &mut tmp, &mut ax);
        lambda = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        resid = x
            .iter()
            .zip(&ax)
            .map(|(xi, axi)| (axi - lambda * xi).abs())
            .fold(0.0, f64::max);
        iterations = k + 1;
        // the eigenfunction is later rescaled to max 1; measure the residual
        // at that normalization
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if resid / xmax <= tol {
            break;
        }
    }
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    resid /= xmax;
    if resid > tol {
        return Err(Error::Convergence(format!(
            "inverse iteration stalled at residual {resid} after {iterations} sweeps"
        )));
    }
    // sign convention: interior values positive
    let sum: f64 = x.iter().sum();
    let flip = if sum < 0.0 { -1.0 } else { 1.0 };
    let scale = flip / xmax;
    let mut phi = GridFunction::zeros(grid.clone());
    for (idx, &node) in ball.nodes.iter().enumerate() {
        phi.values_mut()[node] = x[idx] * scale;
    }
    Ok(EigenPair {
        lambda_1: lambda,
        phi,
        residual: resid,
        iterations,
    })
}
