//! Executable moving-plane machinery: antisymmetric differences, the plane
//! sweep, the antisymmetric and ball maximum-principle checks, the boundary
//! quotient diagnostic, and the comparison construction.
//!
//! Plane heights are restricted to half-integer multiples of h above the
//! grid origin so reflection maps nodes to nodes exactly; the diagnostics
//! are sign-based and interpolation noise would corrupt verdicts.

use crate::error::{Error, Result};
use crate::geometry::{classify, Epigraph, RegionLabel, UniformGrid};
use crate::operator::{
    apply_log_laplacian_at, apply_log_laplacian_on_support, GridFunction, KernelPlan,
};
use crate::problems::{default_quotient_eps, lipschitz_quotient, ProblemSpec};
use crate::solver::EigenPair;
use crate::special::Constants;
use rayon::prelude::*;
use serde::Serialize;

/// Absolute sign tolerance is this factor times ‖u‖∞.
pub const DEFAULT_SIGN_TOL: f64 = 1e-8;

/// Per-plane record of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub n_h: usize,
    pub n_a: usize,
    pub n_d: usize,
}

/// Outcome of a monotonicity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// Planes skipped because no grid node was classified H.
    pub skipped: Vec<f64>,
    /// True when every recorded minimum is at least -tol · ‖u‖∞.
    pub verdict: bool,
    pub sup_u: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Consistent,
    Violated,
    PreconditionUnmet,
}

/// Kind-specific payloads of the diagnostics.
#[derive(Debug, Clone, Serialize)]
pub enum DiagnosticsData {
    Antisym {
        lambda: f64,
        min_h: f64,
        argmin: Vec<f64>,
        /// Discrete operator value at the near-zero interior minimum, when
        /// one exists.
        operator_value: Option<f64>,
        /// a(x_n) M(λ, x) w at the same node (the inequality's right side).
        rhs_value: Option<f64>,
        gate_failure: Option<String>,
    },
    Boundary {
        lambda0: f64,
        steps: Vec<QuotientStep>,
        gate_failure: Option<String>,
    },
    Ball {
        min_inside: f64,
        argmin: Vec<f64>,
        /// |B_1(x_0) \ A| and |B_1(c) \ A| by the shared-sample quadrature.
        volume_near: f64,
        volume_far: f64,
        gate_failure: Option<String>,
    },
    Comparison {
        m: f64,
        witness: Vec<f64>,
        v_at_witness: f64,
        phi_at_witness: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientStep {
    pub lambda: f64,
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub delta: f64,
    pub quotient: f64,
}

/// A diagnostic verdict together with the data it was derived from.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub kind: &'static str,
    pub verdict: Verdict,
    pub data: DiagnosticsData,
}

fn require_compatible(grid: &UniformGrid, lambda: f64) -> Result<()> {
    if !grid.reflection_compatible(lambda) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} is not reflection-compatible with the grid \
             (need a half-integer multiple of h above the origin)"
        )));
    }
    Ok(())
}

/// Antisymmetric difference w_λ(x) = u(x^λ) - u(x) at every node, reflected
/// samples taken with zero extension. Above the plane this equals the
/// antisymmetric value -w(x^λ) identically.
pub fn w_lambda(u: &GridFunction, lambda: f64, epigraph: &Epigraph) -> Result<GridFunction> {
    let _ = epigraph; // part of the call contract; the values need only u
    let grid = u.grid();
    require_compatible(grid, lambda)?;
    let axis = grid.n() - 1;
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let mut m: Vec<i64> = grid.multi(i).iter().map(|&v| v as i64).collect();
            m[axis] = grid.reflect_axis_index(lambda, m[axis] as usize);
            u.sample(&m) - u.value(i)
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// w_λ on a grid that contains the reflected support of u, extending the
/// box upward/downward when needed so the zero extension of the result is
/// exact for operator evaluation.
fn w_lambda_on_adequate_grid(
    u: &GridFunction,
    lambda: f64,
    epigraph: &Epigraph,
) -> Result<(GridFunction, UniformGrid)> {
    let grid = u.grid();
    require_compatible(grid, lambda)?;
    let axis = grid.n() - 1;
    // bounding index range of the support along the last axis
    let mut jmin = None;
    let mut jmax = None;
    for i in 0..grid.len() {
        if u.value(i) != 0.0 {
            let j = grid.multi(i)[axis];
            jmin = Some(jmin.map_or(j, |v: usize| v.min(j)));
            jmax = Some(jmax.map_or(j, |v: usize| v.max(j)));
        }
    }
    let (jmin, jmax) = match (jmin, jmax) {
        (Some(a), Some(b)) => (a as i64, b as i64),
        _ => (0, 0), // u ≡ 0: any grid works
    };
    let t = grid.reflect_axis_index(lambda, 0); // refl(j) = t - j
    let (rmin, rmax) = (t - jmax, t - jmin);
    let lo = rmin.min(0);
    let hi = rmax.max(grid.dims()[axis] as i64 - 1);
    if lo == 0 && hi == grid.dims()[axis] as i64 - 1 {
        let w = w_lambda(u, lambda, epigraph)?;
        return Ok((w, grid.clone()));
    }
    // extend the grid along the last axis
    let mut origin = grid.origin().to_vec();
    origin[axis] += lo as f64 * grid.h();
    let mut dims = grid.dims().to_vec();
    dims[axis] = (hi - lo + 1) as usize;
    let wide = UniformGrid::new(origin, grid.h(), dims)?;
    let mut u_wide = GridFunction::zeros(wide.clone());
    for i in 0..grid.len() {
        let mut m = grid.multi(i);
        m[axis] = (m[axis] as i64 - lo) as usize;
        let flat = wide.flat(&m);
        u_wide.values_mut()[flat] = u.value(i);
    }
    let w = w_lambda(&u_wide, lambda, epigraph)?;
    Ok((w, wide))
}

struct Classified {
    labels: Vec<RegionLabel>,
}

fn classify_nodes(grid: &UniformGrid, epigraph: &Epigraph, lambda: f64) -> Result<Classified> {
    let labels = (0..grid.len())
        .map(|i| classify(epigraph, lambda, &grid.coord(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Classified { labels })
}

fn sweep_single(
    u: &GridFunction,
    epigraph: &Epigraph,
    lambda: f64,
) -> Result<Option<SweepEntry>> {
    let w = w_lambda(u, lambda, epigraph)?;
    let grid = u.grid();
    let cls = classify_nodes(grid, epigraph, lambda)?;
    let mut min_w = f64::INFINITY;
    let mut arg = None;
    let (mut n_h, mut n_a, mut n_d) = (0usize, 0usize, 0usize);
    for i in 0..grid.len() {
        match cls.labels[i] {
            RegionLabel::H => {
                n_h += 1;
                if w.value(i) < min_w {
                    min_w = w.value(i);
                    arg = Some(i);
                }
            }
            RegionLabel::A => n_a += 1,
            RegionLabel::D => n_d += 1,
            RegionLabel::Above => {}
        }
    }
    Ok(arg.map(|i| SweepEntry {
        lambda,
        min_w,
        argmin: grid.coord(i),
        n_h,
        n_a,
        n_d,
    }))
}

/// Minimum of w_λ over H-classified nodes for each plane height; verdict is
/// true when every recorded minimum clears -tol · ‖u‖∞. Planes with an
/// empty H set are skipped and flagged.
pub fn sweep_monotonicity(
    u: &GridFunction,
    epigraph: &Epigraph,
    lambdas: &[f64],
    tol: f64,
) -> Result<SweepReport> {
    for &l in lambdas {
        require_compatible(u.grid(), l)?;
        if !(l > epigraph.infimum()) {
            return Err(Error::Precondition(format!(
                "sweep plane {l} is not above the domain infimum"
            )));
        }
    }
    let results: Vec<(f64, Option<SweepEntry>)> = lambdas
        .par_iter()
        .map(|&l| sweep_single(u, epigraph, l).map(|e| (l, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (l, entry) in results {
        match entry {
            Some(e) => entries.push(e),
            None => skipped.push(l),
        }
    }
    let sup_u = u.sup_norm();
    let verdict = entries.iter().all(|e| e.min_w >= -tol * sup_u);
    Ok(SweepReport {
        entries,
        skipped,
        verdict,
        sup_u,
        tol,
    })
}

/// Strong-maximum-principle check for the antisymmetric difference: with
/// w_λ >= -tol on H, > 0 on A and = 0 on D, a near-zero interior minimum of
/// w_λ on H must see a strictly negative discrete operator value.
pub fn antisym_mp_check(
    u: &GridFunction,
    lambda: f64,
    spec: &ProblemSpec,
    plan: &KernelPlan,
) -> Result<DiagnosticsReport> {
    if u.grid() != plan.grid() {
        return Err(Error::Contract("plan and grid function disagree".into()));
    }
    let tol = DEFAULT_SIGN_TOL * u.sup_norm();
    let epigraph = &spec.epigraph;
    let w = w_lambda(u, lambda, epigraph)?;
    let grid = u.grid();
    let cls = classify_nodes(grid, epigraph, lambda)?;

    let mut gate_failure = None;
    let mut min_h = f64::INFINITY;
    let mut argmin = None;
    for i in 0..grid.len() {
        let wv = w.value(i);
        match cls.labels[i] {
            RegionLabel::H => {
                if wv < min_h {
                    min_h = wv;
                    argmin = Some(i);
                }
                if wv < -tol && gate_failure.is_none() {
                    gate_failure = Some(format!("w_lambda < -tol on H at node {i} ({wv})"));
                }
            }
            RegionLabel::A => {
                if !(wv > 0.0) && gate_failure.is_none() {
                    gate_failure = Some(format!("w_lambda not positive on A at node {i} ({wv})"));
                }
            }
            RegionLabel::D => {
                if wv.abs() > tol && gate_failure.is_none() {
                    gate_failure = Some(format!("w_lambda nonzero on D at node {i} ({wv})"));
                }
            }
            RegionLabel::Above => {}
        }
    }
    let argmin_i = argmin.ok_or_else(|| Error::Precondition("no H nodes below the plane".into()))?;
    let argmin_x = grid.coord(argmin_i);

    if let Some(reason) = gate_failure {
        return Ok(DiagnosticsReport {
            kind: "antisym_mp",
            verdict: Verdict::PreconditionUnmet,
            data: DiagnosticsData::Antisym {
                lambda,
                min_h,
                argmin: argmin_x,
                operator_value: None,
                rhs_value: None,
                gate_failure: Some(reason),
            },
        });
    }

    if min_h > tol {
        // strictly positive minimum: the principle holds vacuously
        return Ok(DiagnosticsReport {
            kind: "antisym_mp",
            verdict: Verdict::Consistent,
            data: DiagnosticsData::Antisym {
                lambda,
                min_h,
                argmin: argmin_x,
                operator_value: None,
                rhs_value: None,
                gate_failure: None,
            },
        });
    }

    // near-zero interior minimum: evaluate the operator on a grid whose box
    // contains the reflected support, then compare signs
    let (w_wide, wide) = w_lambda_on_adequate_grid(u, lambda, epigraph)?;
    let wide_plan;
    let eval_plan = if &wide == plan.grid() {
        plan
    } else {
        wide_plan = KernelPlan::new(&wide, &spec.constants)?;
        &wide_plan
    };
    let node = wide
        .position_of(&argmin_x)
        .ok_or_else(|| Error::Contract("argmin fell off the extended grid".into()))?;
    let lw = apply_log_laplacian_at(&w_wide, eval_plan, wide.flat(&node))?;

    // right side of the differential inequality at the minimizer
    let axis = grid.n() - 1;
    let refl = {
        let mut m: Vec<i64> = grid.multi(argmin_i).iter().map(|&v| v as i64).collect();
        m[axis] = grid.reflect_axis_index(lambda, m[axis] as usize);
        u.sample(&m)
    };
    let uval = u.value(argmin_i);
    let rhs_value = if uval > 0.0 && refl > 0.0 {
        let m = lipschitz_quotient(&spec.f, uval, refl, default_quotient_eps(uval))?;
        Some(spec.coefficient_at(argmin_i) * m * w.value(argmin_i))
    } else {
        None
    };

    let verdict = if lw < 0.0 {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    Ok(DiagnosticsReport {
        kind: "antisym_mp",
        verdict,
        data: DiagnosticsData::Antisym {
            lambda,
            min_h,
            argmin: argmin_x,
            operator_value: Some(lw),
            rhs_value,
            gate_failure: None,
        },
    })
}

/// Boundary-quotient diagnostic: walk plane heights λ_k down toward λ_0; at
/// each height whose H-minimum is negative, form the quotient of the
/// discrete operator at the minimizer by its distance to the plane. The
/// verdict is consistent when every computed quotient is negative, and
/// precondition_unmet when none arise (the usual case for monotone data).
pub fn boundary_quotient(
    u: &GridFunction,
    epigraph: &Epigraph,
    lambda0: f64,
    k_max: usize,
    plan: &KernelPlan,
) -> Result<DiagnosticsReport> {
    if u.grid() != plan.grid() {
        return Err(Error::Contract("plan and grid function disagree".into()));
    }
    require_compatible(u.grid(), lambda0)?;
    let grid = u.grid();
    let half_h = 0.5 * grid.h();

    // gate: w at the base plane is strictly positive on H
    let w0 = w_lambda(u, lambda0, epigraph)?;
    let cls0 = classify_nodes(grid, epigraph, lambda0)?;
    for i in 0..grid.len() {
        if cls0.labels[i] == RegionLabel::H && !(w0.value(i) > 0.0) {
            return Ok(DiagnosticsReport {
                kind: "boundary_quotient",
                verdict: Verdict::PreconditionUnmet,
                data: DiagnosticsData::Boundary {
                    lambda0,
                    steps: Vec::new(),
                    gate_failure: Some(format!(
                        "w_lambda0 not strictly positive on H at node {i} ({})",
                        w0.value(i)
                    )),
                },
            });
        }
    }

    let mut steps = Vec::new();
    let axis = grid.n() - 1;
    for k in (1..=k_max).rev() {
        let lambda = lambda0 + k as f64 * half_h;
        let w = w_lambda(u, lambda, epigraph)?;
        let cls = classify_nodes(grid, epigraph, lambda)?;
        let mut min_w = f64::INFINITY;
        let mut arg = None;
        for i in 0..grid.len() {
            if cls.labels[i] == RegionLabel::H && w.value(i) < min_w {
                min_w = w.value(i);
                arg = Some(i);
            }
        }
        let Some(arg) = arg else { continue };
        if min_w >= 0.0 {
            continue;
        }
        let x = grid.coord(arg);
        let delta = lambda - x[axis];
        let (w_wide, wide) = w_lambda_on_adequate_grid(u, lambda, epigraph)?;
        let wide_plan;
        let eval_plan = if &wide == plan.grid() {
            plan
        } else {
            wide_plan = KernelPlan::new(&wide, plan.constants())?;
            &wide_plan
        };
        let node = wide
            .position_of(&x)
            .ok_or_else(|| Error::Contract("argmin fell off the extended grid".into()))?;
        let lw = apply_log_laplacian_at(&w_wide, eval_plan, wide.flat(&node))?;
        steps.push(QuotientStep {
            lambda,
            min_w,
            argmin: x,
            delta,
            quotient: lw / delta,
        });
    }

    let verdict = if steps.is_empty() {
        Verdict::PreconditionUnmet
    } else if steps.iter().all(|s| s.quotient < 0.0) {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    Ok(DiagnosticsReport {
        kind: "boundary_quotient",
        verdict,
        data: DiagnosticsData::Boundary {
            lambda0,
            steps,
            gate_failure: None,
        },
    })
}

/// Shared-sample quadrature of |B_1(a) \ B_1(b)| on a fixed lattice of
/// midpoints covering B_1(a). With a = b the predicate is pointwise false
/// and the estimate is exactly zero.
pub fn ball_difference_volume(a: &[f64], b: &[f64], samples_per_axis: usize) -> f64 {
    let n = a.len();
    let d = 2.0 / samples_per_axis as f64;
    let mut idx = vec![0usize; n];
    let mut count = 0usize;
    'outer: loop {
        let mut in_a = 0.0;
        let mut in_b = 0.0;
        for dim in 0..n {
            let y = a[dim] - 1.0 + (idx[dim] as f64 + 0.5) * d;
            in_a += (y - a[dim]) * (y - a[dim]);
            in_b += (y - b[dim]) * (y - b[dim]);
        }
        if in_a < 1.0 && in_b >= 1.0 {
            count += 1;
        }
        for dim in (0..n).rev() {
            idx[dim] += 1;
            if idx[dim] < samples_per_axis {
                continue 'outer;
            }
            idx[dim] = 0;
        }
        break;
    }
    count as f64 * d.powi(n as i32)
}

/// Ball strong-maximum-principle check: with u strictly positive at every
/// box node outside the ball and the discrete operator nonnegative (up to
/// tol) at inside nodes, the minimum of u inside must be positive. Also
/// reports the equal-volume identity at the inside minimizer.
pub fn ball_mp_check(
    u: &GridFunction,
    r_height: f64,
    plan: &KernelPlan,
    constants: &Constants,
) -> Result<DiagnosticsReport> {
    if u.grid() != plan.grid() {
        return Err(Error::Contract("plan and grid function disagree".into()));
    }
    let grid = u.grid();
    let n = grid.n();
    let mut center = vec![0.0; n];
    center[n - 1] = r_height;
    if !grid.contains_ball(&center, 1.0) {
        return Err(Error::Precondition(
            "unit ball about R e_n must lie inside the grid box".into(),
        ));
    }
    if !(constants.rho_n > 0.0) {
        return Err(Error::Precondition(format!(
            "ball maximum principle requires rho_n > 0, got {}",
            constants.rho_n
        )));
    }
    let tol = DEFAULT_SIGN_TOL * u.sup_norm();
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.coord(i);
            x.iter()
                .zip(&center)
                .map(|(p, c)| (p - c) * (p - c))
                .sum::<f64>()
                < 1.0
        })
        .collect();
    let inside_set: std::collections::HashSet<usize> = inside.iter().copied().collect();

    let mut gate_failure = None;
    for i in 0..grid.len() {
        if !inside_set.contains(&i) && !(u.value(i) > 0.0) {
            gate_failure = Some(format!(
                "u not strictly positive outside the ball at node {i} ({})",
                u.value(i)
            ));
            break;
        }
    }
    if gate_failure.is_none() {
        let all: Vec<usize> = (0..grid.len()).collect();
        let lu = apply_log_laplacian_on_support(u, plan, &all, &inside);
        for (idx, &i) in inside.iter().enumerate() {
            if lu[idx] < -tol {
                gate_failure = Some(format!(
                    "discrete operator below -tol inside the ball at node {i} ({})",
                    lu[idx]
                ));
                break;
            }
        }
    }

    let (mut min_inside, mut arg) = (f64::INFINITY, None);
    for &i in &inside {
        if u.value(i) < min_inside {
            min_inside = u.value(i);
            arg = Some(i);
        }
    }
    let arg = arg.ok_or_else(|| Error::Precondition("no nodes inside the ball".into()))?;
    let x0 = grid.coord(arg);
    let samples = if n == 2 { 1000 } else { 160 };
    let volume_near = ball_difference_volume(&x0, &center, samples);
    let volume_far = ball_difference_volume(&center, &x0, samples);

    let data = |gate: Option<String>| DiagnosticsData::Ball {
        min_inside,
        argmin: x0.clone(),
        volume_near,
        volume_far,
        gate_failure: gate,
    };
    if let Some(reason) = gate_failure {
        return Ok(DiagnosticsReport {
            kind: "ball_mp",
            verdict: Verdict::PreconditionUnmet,
            data: data(Some(reason)),
        });
    }
    let verdict = if min_inside > 0.0 {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    Ok(DiagnosticsReport {
        kind: "ball_mp",
        verdict,
        data: data(None),
    })
}

/// Comparison construction: the largest multiple of u dominated by the
/// eigenfunction, M = max over ball nodes of φ/u, together with the
/// maximizer. v = M·u touches φ exactly at the witness.
pub fn comparison_construct(
    u: &GridFunction,
    eig: &EigenPair,
) -> Result<(GridFunction, f64, Vec<f64>)> {
    if u.grid() != eig.phi.grid() {
        return Err(Error::Contract(
            "candidate and eigenfunction live on different grids".into(),
        ));
    }
    let grid = u.grid();
    let mut m = f64::NEG_INFINITY;
    let mut witness = None;
    for i in 0..grid.len() {
        let phi = eig.phi.value(i);
        if phi == 0.0 {
            continue; // outside the ball support
        }
        if !(u.value(i) > 0.0) {
            return Err(Error::Precondition(format!(
                "candidate must be positive at ball node {i}, got {}",
                u.value(i)
            )));
        }
        let ratio = phi / u.value(i);
        if ratio > m {
            m = ratio;
            witness = Some(i);
        }
    }
    let witness =
        witness.ok_or_else(|| Error::Precondition("eigenfunction has empty support".into()))?;
    let v = GridFunction::new(grid.clone(), u.values().iter().map(|&x| m * x).collect())?;
    let vw = v.value(witness);
    let pw = eig.phi.value(witness);
    if (vw - pw).abs() > 1e-10 * pw.abs() {
        return Err(Error::Contract(format!(
            "comparison postcondition failed: v({witness}) = {vw} vs phi = {pw}"
        )));
    }
    Ok((v, m, grid.coord(witness)))
}

/// Convenience wrapper reporting the comparison construction as a
/// diagnostic record.
pub fn comparison_report(u: &GridFunction, eig: &EigenPair) -> Result<DiagnosticsReport> {
    let (v, m, witness) = comparison_construct(u, eig)?;
    let grid = u.grid();
    let wflat = grid
        .position_of(&witness)
        .map(|mi| grid.flat(&mi))
        .ok_or_else(|| Error::Contract("witness is not a grid node".into()))?;
    Ok(DiagnosticsReport {
        kind: "comparison",
        verdict: Verdict::Consistent,
        data: DiagnosticsData::Comparison {
            m,
            witness,
            v_at_witness: v.value(wflat),
            phi_at_witness: eig.phi.value(wflat),
        },
    })
}
