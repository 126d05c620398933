//! Minimizer location and Gibbs/non-Gibbs classification.
//!
//! The non-Gibbs mechanism is a first-order transition of the constrained
//! rate function: along the two-atom conditioning family `λ_ε` the reduced
//! functional `G(·; ε)` develops two local minima whose depths cross at a
//! critical tilt `ε*`. Crossing `ε*` the global argmin jumps, so the limiting
//! kernel is discontinuous there. This module locates minima (coarse scan +
//! golden-section or compass refinement), bisects the depth difference to
//! find `ε*`, and aggregates scans into evidence verdicts.
//!
//! Scanning only the `λ_ε` family is a one-sided test: it can certify
//! non-Gibbsianness but only collect evidence for Gibbsianness, which is why
//! the verdict names say "evidence". A separate large-time check (uniform
//! closeness of `F` to `F0` plus strong convexity of `F0`) upgrades the
//! annotation on the Gibbs side.

use crate::error::{CoreError, Result};
use crate::kernel::{HeatKernelSpec, KernelConvention, QuadratureGrid};
use crate::meanfield::{
    rate_function_f, rate_function_f0, Magnetization, MeanFieldModel, ReducedRateEvaluator,
};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Depth tolerance deciding when two basins count as equally deep.
pub const EQUAL_DEPTH_TOL: f64 = 1e-10;

/// Bisection terminates once the `ε`-bracket is narrower than this (one
/// decade below the reproduction target's interval width).
pub const EPSILON_WIDTH_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// A refined one-dimensional local minimum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Minimum1d {
    pub location: f64,
    pub depth: f64,
    /// Minimum sits on the domain boundary (no interior bracket).
    pub boundary: bool,
    /// Centered second difference at the minimum; positive for a verified
    /// interior minimum.
    pub second_difference: f64,
}

/// Set of local minima of a one-dimensional function with global-set
/// classification.
#[derive(Debug, Clone, Serialize)]
pub struct LineReport {
    pub local_minima: Vec<Minimum1d>,
    /// Indices into `local_minima` within depth tolerance of the best.
    pub global_set: Vec<usize>,
    pub unique: bool,
    /// Depth difference between best and second-best basin; `None` when only
    /// one basin exists.
    pub gap: Option<f64>,
    pub coarse_n: usize,
    pub depth_tol: f64,
}

impl LineReport {
    pub fn global_minimum(&self) -> &Minimum1d {
        &self.local_minima[self.global_set[0]]
    }

    fn classify(mut minima: Vec<Minimum1d>, coarse_n: usize, depth_tol: f64) -> LineReport {
        minima.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
        let best = minima
            .iter()
            .map(|m| m.depth)
            .fold(f64::INFINITY, f64::min);
        let global_set: Vec<usize> = minima
            .iter()
            .enumerate()
            .filter(|(_, m)| m.depth <= best + depth_tol)
            .map(|(i, _)| i)
            .collect();
        let mut depths: Vec<f64> = minima.iter().map(|m| m.depth).collect();
        depths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let gap = if depths.len() > 1 {
            Some(depths[1] - depths[0])
        } else {
            None
        };
        LineReport {
            unique: global_set.len() == 1,
            global_set,
            local_minima: minima,
            gap,
            coarse_n,
            depth_tol,
        }
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > x_tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Locates every local minimum of `f` on `domain` by a coarse grid scan
/// followed by golden-section refinement of each bracketed basin. Boundary
/// minima are admitted and flagged.
pub fn minimize_1d(
    f: impl Fn(f64) -> f64,
    domain: (f64, f64),
    coarse_n: usize,
    depth_tol: f64,
) -> Result<LineReport> {
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(CoreError::invalid("domain", format!("invalid interval [{lo}, {hi}]")));
    }
    if coarse_n < 64 {
        return Err(CoreError::invalid("coarse_n", format!("need at least 64 scan points, got {coarse_n}")));
    }
    if !(depth_tol > 0.0) {
        return Err(CoreError::invalid("tol", "depth tolerance must be positive"));
    }
    let span = hi - lo;
    let step = span / coarse_n as f64;
    let values: Vec<f64> = (0..=coarse_n).map(|i| f(lo + i as f64 * step)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::invalid("f", "objective is not finite on the scan grid"));
    }

    let x_tol = (span * 1e-11).max(1e-13);
    let sd_step = (span * 1e-5).max(1e-7);
    let mut minima: Vec<Minimum1d> = Vec::new();

    for i in 1..coarse_n {
        let strictly_better = values[i] < values[i - 1] || values[i] < values[i + 1];
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] && strictly_better {
            let a = lo + (i - 1) as f64 * step;
            let b = lo + (i + 1) as f64 * step;
            let (x, fx) = golden_section(&f, a, b, x_tol);
            let sd = f(x - sd_step) - 2.0 * fx + f(x + sd_step);
            minima.push(Minimum1d {
                location: x,
                depth: fx,
                boundary: false,
                second_difference: sd,
            });
        }
    }
    if values[0] < values[1] {
        minima.push(Minimum1d {
            location: lo,
            depth: values[0],
            boundary: true,
            second_difference: f64::NAN,
        });
    }
    if values[coarse_n] < values[coarse_n - 1] {
        minima.push(Minimum1d {
            location: hi,
            depth: values[coarse_n],
            boundary: true,
            second_difference: f64::NAN,
        });
    }

    // merge duplicates refined from adjacent cells
    minima.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
    let dedupe = (10.0 * x_tol).max(step * 1e-6);
    let mut merged: Vec<Minimum1d> = Vec::new();
    for m in minima {
        match merged.last_mut() {
            Some(last) if (m.location - last.location).abs() < dedupe => {
                if m.depth < last.depth {
                    *last = m;
                }
            }
            _ => merged.push(m),
        }
    }
    if merged.is_empty() {
        return Err(CoreError::invalid("f", "no local minimum found on the domain"));
    }
    Ok(LineReport::classify(merged, coarse_n, depth_tol))
}

/// A refined local minimum on the closed unit disk.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Minimum2d {
    pub location: [f64; 2],
    pub depth: f64,
    pub boundary: bool,
    /// Finite-difference Hessian `(f_xx, f_xy, f_yy)` at the minimum.
    pub hessian: [f64; 3],
    pub positive_definite: bool,
}

/// Set of local minima of a function on the closed unit disk.
#[derive(Debug, Clone, Serialize)]
pub struct DiskReport {
    pub local_minima: Vec<Minimum2d>,
    pub global_set: Vec<usize>,
    pub unique: bool,
    pub gap: Option<f64>,
    pub coarse_n: usize,
    pub depth_tol: f64,
}

impl DiskReport {
    pub fn global_minimum(&self) -> &Minimum2d {
        &self.local_minima[self.global_set[0]]
    }
}

fn clamp_to_disk(m: [f64; 2]) -> [f64; 2] {
    let r = m[0].hypot(m[1]);
    if r > 1.0 {
        [m[0] / r, m[1] / r]
    } else {
        m
    }
}

fn compass_descent(f: &impl Fn([f64; 2]) -> f64, start: [f64; 2], mut step: f64, step_tol: f64) -> ([f64; 2], f64) {
    let dirs: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [0.70710678118654752, 0.70710678118654752],
        [0.70710678118654752, -0.70710678118654752],
        [-0.70710678118654752, 0.70710678118654752],
        [-0.70710678118654752, -0.70710678118654752],
    ];
    let mut x = clamp_to_disk(start);
    let mut fx = f(x);
    while step > step_tol {
        let mut improved = false;
        let mut best = (fx, x);
        for d in dirs {
            let y = clamp_to_disk([x[0] + step * d[0], x[1] + step * d[1]]);
            let fy = f(y);
            if fy < best.0 {
                best = (fy, y);
                improved = true;
            }
        }
        if improved {
            fx = best.0;
            x = best.1;
        } else {
            step *= 0.5;
        }
    }
    (x, fx)
}

fn hessian_2d(f: &impl Fn([f64; 2]) -> f64, x: [f64; 2], h: f64) -> [f64; 3] {
    let fc = f(x);
    let fxx = (f([x[0] + h, x[1]]) - 2.0 * fc + f([x[0] - h, x[1]])) / (h * h);
    let fyy = (f([x[0], x[1] + h]) - 2.0 * fc + f([x[0], x[1] - h])) / (h * h);
    let fxy = (f([x[0] + h, x[1] + h]) - f([x[0] + h, x[1] - h]) - f([x[0] - h, x[1] + h])
        + f([x[0] - h, x[1] - h]))
        / (4.0 * h * h);
    [fxx, fxy, fyy]
}

/// Locates local minima of `f` on the closed unit disk: polar-grid coarse
/// scan, compass-search refinement with projection onto the disk, Hessian
/// verification for interior minima.
pub fn minimize_2d(f: impl Fn([f64; 2]) -> f64, coarse_n: usize, depth_tol: f64) -> Result<DiskReport> {
    if coarse_n < 64 {
        return Err(CoreError::invalid("coarse_n", format!("need at least 64 angular points, got {coarse_n}")));
    }
    if !(depth_tol > 0.0) {
        return Err(CoreError::invalid("tol", "depth tolerance must be positive"));
    }
    let na = coarse_n;
    let nr = (coarse_n / 8).max(12);
    let point = |k: usize, j: usize| -> [f64; 2] {
        let r = k as f64 / nr as f64;
        let phi = TAU * j as f64 / na as f64;
        [r * phi.cos(), r * phi.sin()]
    };
    // ring values; k = 0 is the center, stored once
    let center_val = f([0.0, 0.0]);
    let rings: Vec<Vec<f64>> = (1..=nr)
        .map(|k| (0..na).map(|j| f(point(k, j))).collect())
        .collect();
    if !center_val.is_finite() || rings.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CoreError::invalid("f", "objective is not finite on the scan grid"));
    }

    let mut seeds: Vec<[f64; 2]> = Vec::new();
    if rings[0].iter().all(|&v| center_val <= v) {
        seeds.push([0.0, 0.0]);
    }
    for k in 1..=nr {
        for j in 0..na {
            let v = rings[k - 1][j];
            let left = rings[k - 1][(j + na - 1) % na];
            let right = rings[k - 1][(j + 1) % na];
            let inner = if k == 1 { center_val } else { rings[k - 2][j] };
            let outer = if k == nr { f64::INFINITY } else { rings[k][j] };
            if v <= left && v <= right && v <= inner && v <= outer {
                seeds.push(point(k, j));
            }
        }
    }
    if seeds.is_empty() {
        return Err(CoreError::invalid("f", "no local minimum candidate on the scan grid"));
    }

    let step0 = 1.0 / nr as f64;
    let mut minima: Vec<Minimum2d> = Vec::new();
    for s in seeds {
        let (x, fx) = compass_descent(&f, s, step0, 1e-9);
        if minima
            .iter()
            .any(|m| (m.location[0] - x[0]).hypot(m.location[1] - x[1]) < 1e-6)
        {
            continue;
        }
        let boundary = x[0].hypot(x[1]) > 1.0 - 1e-9;
        let hess = hessian_2d(&f, x, 1e-5);
        let positive_definite = hess[0] > 0.0 && hess[0] * hess[2] - hess[1] * hess[1] > 0.0;
        minima.push(Minimum2d {
            location: x,
            depth: fx,
            boundary,
            hessian: hess,
            positive_definite,
        });
    }

    minima.sort_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap());
    let best = minima[0].depth;
    let global_set: Vec<usize> = minima
        .iter()
        .enumerate()
        .filter(|(_, m)| m.depth <= best + depth_tol)
        .map(|(i, _)| i)
        .collect();
    let gap = if minima.len() > 1 {
        Some(minima[1].depth - minima[0].depth)
    } else {
        None
    };
    Ok(DiskReport {
        unique: global_set.len() == 1,
        global_set,
        local_minima: minima,
        gap,
        coarse_n,
        depth_tol,
    })
}

/// Outcome of the equal-depth bisection along the `λ_ε` family.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonStar {
    pub epsilon: f64,
    pub bracket_width: f64,
    /// The two tracked basins at `ε*`, ordered by location.
    pub lower_basin: Minimum1d,
    pub upper_basin: Minimum1d,
    pub depth_difference: f64,
    pub iterations: usize,
}

fn reduced_report(
    beta: f64,
    h_bar: f64,
    epsilon: f64,
    spec: &HeatKernelSpec,
    grid: &QuadratureGrid,
    coarse_n: usize,
) -> Result<LineReport> {
    let g = ReducedRateEvaluator::new(beta, h_bar, epsilon, spec, grid)?;
    let domain = g.u_domain();
    minimize_1d(|u| g.eval(u), domain, coarse_n, EQUAL_DEPTH_TOL)
}

fn two_interior_basins(report: &LineReport, epsilon: f64) -> Result<(Minimum1d, Minimum1d)> {
    let interior: Vec<&Minimum1d> = report.local_minima.iter().filter(|m| !m.boundary).collect();
    match interior.len() {
        2 => Ok((*interior[0], *interior[1])),
        n if n < 2 => Err(CoreError::DegenerateBifurcation(format!(
            "{n} interior basin(s) at epsilon = {epsilon}; two persistent basins required"
        ))),
        n => Err(CoreError::DegenerateBifurcation(format!(
            "{n} interior basins at epsilon = {epsilon}"
        ))),
    }
}

/// Solves the equal-depth condition for the conditioning tilt: bisects the
/// depth difference between the two tracked basins of `G(·; ε)` over the
/// bracket until the bracket is narrower than [`EPSILON_WIDTH_TOL`].
///
/// At `h̄ = 0` the depth difference vanishes by symmetry and bisection is
/// meaningless; this is detected and reported as [`CoreError::SymmetricCase`].
pub fn epsilon_star(
    beta: f64,
    h_bar: f64,
    spec: &HeatKernelSpec,
    bracket: (f64, f64),
    depth_tol: f64,
    grid: &QuadratureGrid,
) -> Result<EpsilonStar> {
    if h_bar == 0.0 {
        return Err(CoreError::SymmetricCase(
            "h̄ = 0: the two basins are exchanged by the U ↦ -U symmetry combined with \
             reflection of the conditioning, so the depth difference vanishes identically"
                .into(),
        ));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(CoreError::Bracket(format!("invalid bracket [{lo}, {hi}]")));
    }
    let coarse_n = 512;
    let diff_at = |eps: f64| -> Result<(f64, Minimum1d, Minimum1d)> {
        let report = reduced_report(beta, h_bar, eps, spec, grid, coarse_n)?;
        let (a, b) = two_interior_basins(&report, eps)?;
        Ok((a.depth - b.depth, a, b))
    };

    let (mut d_lo, _, _) = diff_at(lo).map_err(|e| match e {
        CoreError::DegenerateBifurcation(m) => CoreError::Bracket(format!("left endpoint: {m}")),
        other => other,
    })?;
    let (d_hi, _, _) = diff_at(hi).map_err(|e| match e {
        CoreError::DegenerateBifurcation(m) => CoreError::Bracket(format!("right endpoint: {m}")),
        other => other,
    })?;
    if d_lo.abs() <= depth_tol && d_hi.abs() <= depth_tol {
        return Err(CoreError::SymmetricCase(
            "depth difference vanishes at both bracket endpoints".into(),
        ));
    }
    if d_lo.signum() == d_hi.signum() {
        return Err(CoreError::Bracket(format!(
            "depth difference has the same sign at both endpoints ({d_lo:.3e} and {d_hi:.3e})"
        )));
    }

    let mut iterations = 0usize;
    while hi - lo > EPSILON_WIDTH_TOL {
        let mid = 0.5 * (lo + hi);
        let (d_mid, _, _) = diff_at(mid)?;
        if d_mid.signum() == d_lo.signum() {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let eps = 0.5 * (lo + hi);
    let (d, a, b) = diff_at(eps)?;
    Ok(EpsilonStar {
        epsilon: eps,
        bracket_width: hi - lo,
        lower_basin: a,
        upper_basin: b,
        depth_difference: d,
        iterations,
    })
}

/// Which of the two basins carries the global minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasinSide {
    Lower,
    Upper,
}

/// Identifies the global basin of `G(·; ε)`; used to verify the argmin jump
/// across `ε*`.
pub fn global_basin_side(
    beta: f64,
    h_bar: f64,
    epsilon: f64,
    spec: &HeatKernelSpec,
    grid: &QuadratureGrid,
) -> Result<BasinSide> {
    let report = reduced_report(beta, h_bar, epsilon, spec, grid, 512)?;
    let (a, b) = two_interior_basins(&report, epsilon)?;
    Ok(if a.depth < b.depth {
        BasinSide::Lower
    } else {
        BasinSide::Upper
    })
}

/// Classification outcome over a conditioning-family scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GibbsEvidence,
    NonGibbsEvidence,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GibbsEvidence => "GIBBS_EVIDENCE",
            Verdict::NonGibbsEvidence => "NONGIBBS_EVIDENCE",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

/// Witness backing a non-Gibbs verdict: the critical tilt with its two
/// equal-depth minimizers and a verified argmin jump.
#[derive(Debug, Clone, Serialize)]
pub struct NonGibbsWitness {
    pub epsilon_star: EpsilonStar,
    pub jump_verified: bool,
    pub jump_delta: f64,
    pub side_below: BasinSide,
    pub side_above: BasinSide,
}

/// Per-`ε` scan row (exported as CSV by the CLI).
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonScanRow {
    pub epsilon: f64,
    pub num_local: usize,
    pub num_global: usize,
    pub u_star_primary: f64,
    pub u_star_secondary: Option<f64>,
    pub depth_gap: Option<f64>,
}

/// Evidence verdict for one `(β, h, t)` parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct GibbsVerdictReport {
    pub verdict: Verdict,
    pub witness: Option<NonGibbsWitness>,
    pub scan: Vec<EpsilonScanRow>,
    pub annotations: Vec<String>,
}

/// Scans the `λ_ε` family at fixed `(β, h, t)` and classifies the point.
///
/// `GibbsEvidence` requires a unique global minimizer with margin `gap >
/// margin_tol` at every scanned `ε`; `NonGibbsEvidence` requires a successful
/// equal-depth bisection with a verified argmin jump. Everything else is
/// `Undetermined`. The verdict is invariant under global rotation of `h`
/// (only `|h|` enters).
pub fn classify_gibbs(
    model: &MeanFieldModel,
    t: f64,
    epsilon_grid: &[f64],
    margin_tol: f64,
    grid: &QuadratureGrid,
) -> Result<GibbsVerdictReport> {
    if epsilon_grid.is_empty() {
        return Err(CoreError::invalid("epsilon_grid", "at least one epsilon required"));
    }
    let spec = HeatKernelSpec::new(t, KernelConvention::FourierQt)?;
    let h_bar = model.h_bar();
    let beta = model.beta;

    let reports: Vec<(f64, LineReport)> = epsilon_grid
        .par_iter()
        .map(|&eps| reduced_report(beta, h_bar, eps, &spec, grid, 512).map(|r| (eps, r)))
        .collect::<Result<Vec<_>>>()?;

    let scan: Vec<EpsilonScanRow> = reports
        .iter()
        .map(|(eps, r)| {
            let primary = r.global_minimum();
            let secondary = r
                .local_minima
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != r.global_set[0])
                .map(|(_, m)| m)
                .min_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap());
            EpsilonScanRow {
                epsilon: *eps,
                num_local: r.local_minima.len(),
                num_global: r.global_set.len(),
                u_star_primary: primary.location,
                u_star_secondary: secondary.map(|m| m.location),
                depth_gap: r.gap,
            }
        })
        .collect();

    let all_unique_with_margin = reports
        .iter()
        .all(|(_, r)| r.unique && r.gap.map_or(true, |g| g > margin_tol));

    if all_unique_with_margin {
        let mut annotations = Vec::new();
        if let Some(cert) = large_time_certificate(model, &spec, grid)? {
            if cert.holds {
                annotations.push(format!(
                    "large-t certificate: sup|F - F0| = {:.3e} < strong-convexity margin {:.3e}",
                    cert.sup_deviation, cert.convexity_margin
                ));
            }
        }
        return Ok(GibbsVerdictReport {
            verdict: Verdict::GibbsEvidence,
            witness: None,
            scan,
            annotations,
        });
    }

    // look for a depth-difference sign change between adjacent epsilons where
    // both scans exhibit two basins
    let two_basin_diff = |r: &LineReport| -> Option<f64> {
        let interior: Vec<&Minimum1d> = r.local_minima.iter().filter(|m| !m.boundary).collect();
        if interior.len() == 2 {
            Some(interior[0].depth - interior[1].depth)
        } else {
            None
        }
    };
    for w in reports.windows(2) {
        let (e0, r0) = &w[0];
        let (e1, r1) = &w[1];
        let (Some(d0), Some(d1)) = (two_basin_diff(r0), two_basin_diff(r1)) else {
            continue;
        };
        if d0.signum() != d1.signum() && d0 != 0.0 && d1 != 0.0 {
            let star = epsilon_star(beta, h_bar, &spec, (*e0, *e1), EQUAL_DEPTH_TOL, grid)?;
            let delta = 1e-4;
            let below = global_basin_side(beta, h_bar, star.epsilon - delta, &spec, grid)?;
            let above = global_basin_side(beta, h_bar, star.epsilon + delta, &spec, grid)?;
            let witness = NonGibbsWitness {
                epsilon_star: star,
                jump_verified: below != above,
                jump_delta: delta,
                side_below: below,
                side_above: above,
            };
            let verdict = if witness.jump_verified {
                Verdict::NonGibbsEvidence
            } else {
                Verdict::Undetermined
            };
            return Ok(GibbsVerdictReport {
                verdict,
                witness: Some(witness),
                scan,
                annotations: Vec::new(),
            });
        }
    }

    Ok(GibbsVerdictReport {
        verdict: Verdict::Undetermined,
        witness: None,
        scan,
        annotations: Vec::new(),
    })
}

/// Large-time sufficient check upgrading a Gibbs-evidence verdict.
///
/// Since `F(m; λ)` is affine in `λ`, suprema over all conditionings reduce to
/// suprema over single atoms. The check verifies that (a) `F0` has a unique
/// minimizer with a positive-definite Hessian on a ball around it, (b) on
/// that ball every single-atom `F(·; δ_η)` Hessian stays positive definite,
/// and (c) outside the ball `F0` exceeds its minimum by more than twice the
/// sup-deviation `D = sup |F - F0|`, which traps every global minimizer of
/// every `F(·; λ)` inside the ball where strict convexity makes it unique.
#[derive(Debug, Clone, Serialize)]
pub struct LargeTimeCertificate {
    pub holds: bool,
    pub sup_deviation: f64,
    /// `κ r²/2` for the smallest Hessian eigenvalue `κ` of `F0` on the ball.
    pub convexity_margin: f64,
    pub hessian_min_eig_f0: f64,
    pub hessian_min_eig_f: f64,
    pub outside_margin: f64,
    pub ball_radius: f64,
}

pub fn large_time_certificate(
    model: &MeanFieldModel,
    spec: &HeatKernelSpec,
    grid: &QuadratureGrid,
) -> Result<Option<LargeTimeCertificate>> {
    let f0 = |m: [f64; 2]| rate_function_f0(&Magnetization::new(m).unwrap(), model, grid);
    let f0_report = minimize_2d(f0, 96, EQUAL_DEPTH_TOL)?;
    if !f0_report.unique || f0_report.global_minimum().boundary {
        return Ok(None);
    }
    let m0 = f0_report.global_minimum().location;
    let f0_min = f0_report.global_minimum().depth;
    let radius = 0.2f64;

    let atom_count = 32usize;
    let atoms: Vec<f64> = (0..atom_count).map(|i| TAU * i as f64 / atom_count as f64).collect();

    let f_atom = |eta: f64, m: [f64; 2]| {
        let lambda = crate::kernel::ConditioningMeasure::dirac(crate::kernel::Angle::new(eta));
        rate_function_f(&Magnetization::new(m).unwrap(), model, spec, &lambda, grid)
    };

    // disk sample: polar grid
    let nr = 12usize;
    let na = 48usize;
    let mut disk_points = vec![[0.0f64, 0.0]];
    for k in 1..=nr {
        for j in 0..na {
            let r = k as f64 / nr as f64;
            let phi = TAU * j as f64 / na as f64;
            disk_points.push([r * phi.cos(), r * phi.sin()]);
        }
    }

    let sup_deviation = atoms
        .par_iter()
        .map(|&eta| {
            disk_points
                .iter()
                .map(|&m| (f_atom(eta, m) - f0(m)).abs())
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0f64, f64::max);

    // ball grid for Hessian checks
    let mut ball_points = Vec::new();
    let nb = 5i32;
    for i in -nb..=nb {
        for j in -nb..=nb {
            let p = [
                m0[0] + radius * i as f64 / nb as f64,
                m0[1] + radius * j as f64 / nb as f64,
            ];
            if (p[0] - m0[0]).hypot(p[1] - m0[1]) <= radius + 1e-12 && p[0].hypot(p[1]) <= 1.0 {
                ball_points.push(p);
            }
        }
    }
    let min_eig = |hess: [f64; 3]| -> f64 {
        let tr = hess[0] + hess[2];
        let det = hess[0] * hess[2] - hess[1] * hess[1];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        tr / 2.0 - disc
    };
    let h_step = 1e-4;
    let hessian_min_eig_f0 = ball_points
        .iter()
        .map(|&p| min_eig(hessian_2d(&f0, p, h_step)))
        .fold(f64::INFINITY, f64::min);
    let hessian_min_eig_f = atoms
        .par_iter()
        .map(|&eta| {
            let fe = |m: [f64; 2]| f_atom(eta, m);
            ball_points
                .iter()
                .map(|&p| min_eig(hessian_2d(&fe, p, h_step)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);

    let outside_min = disk_points
        .iter()
        .filter(|p| (p[0] - m0[0]).hypot(p[1] - m0[1]) > radius)
        .map(|&p| f0(p))
        .fold(f64::INFINITY, f64::min);
    let outside_margin = outside_min - f0_min - 2.0 * sup_deviation;
    let convexity_margin = hessian_min_eig_f0.max(0.0) * radius * radius / 2.0;

    let holds = hessian_min_eig_f0 > 0.0
        && hessian_min_eig_f > 0.0
        && outside_margin > 0.0
        && sup_deviation < convexity_margin;
    Ok(Some(LargeTimeCertificate {
        holds,
        sup_deviation,
        convexity_margin,
        hessian_min_eig_f0,
        hessian_min_eig_f,
        outside_margin,
        ball_radius: radius,
    }))
}

/// One entry of a time scan.
#[derive(Debug, Clone, Serialize)]
pub struct TimeScanEntry {
    pub t: f64,
    pub report: GibbsVerdictReport,
}

/// Verdicts along a time grid with the detected non-Gibbs window.
#[derive(Debug, Clone, Serialize)]
pub struct TimeScan {
    pub entries: Vec<TimeScanEntry>,
    /// First contiguous sub-grid of `NonGibbsEvidence` entries, if any.
    pub non_gibbs_window: Option<(f64, f64)>,
}

/// Classifies every `t` in the sorted grid. `Undetermined` entries are
/// upgraded to annotated `GibbsEvidence` when the short-time certificate
/// (Curie-Weiss rotator specialization of the time-evolution threshold)
/// holds at that `t`; entries already Gibbs also receive the annotation.
pub fn time_interval_scan(
    model: &MeanFieldModel,
    t_grid: &[f64],
    epsilon_grid: &[f64],
    margin_tol: f64,
    grid: &QuadratureGrid,
) -> Result<TimeScan> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::invalid("t_grid", "must be sorted strictly ascending"));
    }
    let threshold = crate::certificates::meanfield::rotator_time_threshold(model.beta, 1);
    let mut entries = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut report = classify_gibbs(model, t, epsilon_grid, margin_tol, grid)?;
        if threshold.holds_at(t) {
            report
                .annotations
                .push("short-time certificate (rotator time-evolution threshold)".into());
            if report.verdict == Verdict::Undetermined {
                report.verdict = Verdict::GibbsEvidence;
            }
        }
        entries.push(TimeScanEntry { t, report });
    }
    let mut window = None;
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for e in &entries {
        if e.report.verdict == Verdict::NonGibbsEvidence {
            if start.is_none() {
                start = Some(e.t);
            }
            last = e.t;
        } else if let Some(s) = start.take() {
            window = Some((s, last));
            break;
        }
    }
    if let Some(s) = start {
        window = Some((s, last));
    }
    Ok(TimeScan {
        entries,
        non_gibbs_window: window,
    })
}
