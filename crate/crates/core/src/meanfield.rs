//! Mean-field rotator rate functions and the transformed single-site kernel.
//!
//! For the quadratic rotator in external field `h` the rate function of the
//! initial model is
//!
//! ```text
//! F0(m) = β|m|²/2 - log ∫ e^{β σ·(m+h)} α(dσ)
//! ```
//!
//! and the constrained rate function of the time-evolved model under the
//! conditioning `λ` is
//!
//! ```text
//! F(m) = β|m|²/2 - ∫ λ(dη) log ∫ e^{β σ·(m+h)} p_t(η, dσ)
//! ```
//!
//! On the field axis (`h = h̄ e(0)`, `m = u e(0)`, conditioning `λ_ε`), the
//! change of variable `U = β(u + h̄)` reduces `F` to the one-dimensional
//! functional
//!
//! ```text
//! G(U) = U²/(2β) - U h̄ - L(U; ε, t),
//! L(U; ε, t) = ½ log ∫ e^{U cos(θ+π+ε)} q_t(θ) dθ
//!            + ½ log ∫ e^{U cos(θ+π-ε)} q_t(θ) dθ,
//! ```
//!
//! dropping the argmin-irrelevant constant `β h̄²/2`. Global minimizers of
//! these functionals determine the limiting single-site kernel of the
//! time-evolved model; non-uniqueness at some conditioning is precisely the
//! non-Gibbs signature.

use crate::bifurcation::DiskReport;
use crate::error::{CoreError, Result};
use crate::kernel::{Angle, ConditioningMeasure, HeatKernelSpec, QuadratureGrid};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Interaction selector for the mean-field model. Rate-function operations
/// require the quadratic rotator; generic `(F, g)` interactions enter only
/// through the certificate module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Interaction {
    QuadraticRotator,
}

/// Inverse temperature and external field of a mean-field rotator model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldModel {
    pub beta: f64,
    pub h: [f64; 2],
    pub interaction: Interaction,
}

impl MeanFieldModel {
    pub fn new(beta: f64, h: [f64; 2]) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(CoreError::invalid("beta", format!("must be >= 0 and finite, got {beta}")));
        }
        if !h[0].is_finite() || !h[1].is_finite() {
            return Err(CoreError::invalid("h", "field components must be finite"));
        }
        Ok(MeanFieldModel {
            beta,
            h,
            interaction: Interaction::QuadraticRotator,
        })
    }

    /// Field strength `h̄ = |h|`; all axis computations are done in the frame
    /// rotated so that `h = h̄ e(0)`.
    pub fn h_bar(&self) -> f64 {
        self.h[0].hypot(self.h[1])
    }

    /// Rotation angle taking `h̄ e(0)` to `h` (recorded so outputs can be
    /// mapped back to the original frame).
    pub fn h_angle(&self) -> f64 {
        if self.h_bar() == 0.0 {
            0.0
        } else {
            self.h[1].atan2(self.h[0])
        }
    }
}

/// A magnetization vector constrained to the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Magnetization([f64; 2]);

impl Magnetization {
    const NORM_TOL: f64 = 1e-9;

    pub fn new(m: [f64; 2]) -> Result<Self> {
        let norm = m[0].hypot(m[1]);
        if !norm.is_finite() || norm > 1.0 + Self::NORM_TOL {
            return Err(CoreError::invalid("m", format!("|m| must be <= 1, got {norm}")));
        }
        Ok(Magnetization(m))
    }

    pub fn components(&self) -> [f64; 2] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }
}

/// `log ∫ e^{β σ·v} q(σ - η) dσ` with max-subtraction for stability.
fn log_tilted_mass(beta_v: [f64; 2], eta: f64, kernel: impl Fn(f64) -> f64, grid: &QuadratureGrid) -> f64 {
    let scale = beta_v[0].hypot(beta_v[1]);
    let sum = grid.integrate(|s| {
        let g = beta_v[0] * s.cos() + beta_v[1] * s.sin() - scale;
        g.exp() * kernel(s - eta)
    });
    scale + sum.ln()
}

/// Rate function `F0(m; β, h)` of the initial model, uniform a priori
/// measure, via periodic quadrature.
pub fn rate_function_f0(m: &Magnetization, model: &MeanFieldModel, grid: &QuadratureGrid) -> f64 {
    let mv = m.components();
    let v = [
        model.beta * (mv[0] + model.h[0]),
        model.beta * (mv[1] + model.h[1]),
    ];
    let half_sq = model.beta * (mv[0] * mv[0] + mv[1] * mv[1]) / 2.0;
    // α is the equidistribution: divide the Lebesgue-angle integral by 2π.
    half_sq - (log_tilted_mass(v, 0.0, |_| 1.0 / TAU, grid))
}

/// Constrained rate function `F(m; β, h, t, λ)` of the time-evolved model.
pub fn rate_function_f(
    m: &Magnetization,
    model: &MeanFieldModel,
    spec: &HeatKernelSpec,
    lambda: &ConditioningMeasure,
    grid: &QuadratureGrid,
) -> f64 {
    let mv = m.components();
    let v = [
        model.beta * (mv[0] + model.h[0]),
        model.beta * (mv[1] + model.h[1]),
    ];
    let half_sq = model.beta * (mv[0] * mv[0] + mv[1] * mv[1]) / 2.0;
    let mut conditioning = 0.0;
    for &(eta, w) in lambda.atoms() {
        conditioning += w * log_tilted_mass(v, eta.radians(), |x| spec.density(Angle::new(x)), grid);
    }
    half_sq - conditioning
}

/// Quadrature-convergence check for a rate-function value: recomputes on a
/// doubled grid and compares.
pub fn rate_function_f_checked(
    m: &Magnetization,
    model: &MeanFieldModel,
    spec: &HeatKernelSpec,
    lambda: &ConditioningMeasure,
    grid: &QuadratureGrid,
    tolerance: f64,
) -> Result<f64> {
    let coarse = rate_function_f(m, model, spec, lambda, grid);
    let doubled = QuadratureGrid::new(grid.num_points() * 2)?;
    let fine = rate_function_f(m, model, spec, lambda, &doubled);
    if (fine - coarse).abs() > tolerance {
        return Err(CoreError::NonConvergent {
            what: "rate_function_F",
            change: (fine - coarse).abs(),
            tolerance,
        });
    }
    Ok(fine)
}

/// Precomputed evaluator of the log-moment term `L(U; ε, t)`.
///
/// The kernel weights and shifted cosines are tabulated once per `(ε, t,
/// grid)`; each evaluation is then a pair of stabilized log-sums, which makes
/// dense `U`-scans and bisection loops cheap.
#[derive(Debug, Clone)]
pub struct LogMomentEvaluator {
    cos_plus: Vec<f64>,
    cos_minus: Vec<f64>,
    kernel_weights: Vec<f64>,
    epsilon: f64,
}

impl LogMomentEvaluator {
    pub fn new(epsilon: f64, spec: &HeatKernelSpec, grid: &QuadratureGrid) -> Self {
        let n = grid.num_points();
        let mut cos_plus = Vec::with_capacity(n);
        let mut cos_minus = Vec::with_capacity(n);
        let mut kernel_weights = Vec::with_capacity(n);
        for &theta in grid.nodes() {
            cos_plus.push((theta + PI + epsilon).cos());
            cos_minus.push((theta + PI - epsilon).cos());
            kernel_weights.push(spec.density(Angle::new(theta)) * grid.weight());
        }
        LogMomentEvaluator {
            cos_plus,
            cos_minus,
            kernel_weights,
            epsilon,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, u: f64) -> f64 {
        let scale = u.abs();
        let mut sum_plus = 0.0;
        let mut sum_minus = 0.0;
        for j in 0..self.kernel_weights.len() {
            let w = self.kernel_weights[j];
            sum_plus += w * (u * self.cos_plus[j] - scale).exp();
            sum_minus += w * (u * self.cos_minus[j] - scale).exp();
        }
        scale + 0.5 * sum_plus.ln() + 0.5 * sum_minus.ln()
    }
}

/// `L(U; ε, t)` evaluated directly (convenience wrapper; scans should reuse a
/// [`LogMomentEvaluator`]).
pub fn log_moment_l(u: f64, epsilon: f64, spec: &HeatKernelSpec, grid: &QuadratureGrid) -> f64 {
    LogMomentEvaluator::new(epsilon, spec, grid).eval(u)
}

/// Evaluator of the reduced rate function `G(U) = U²/(2β) - U h̄ - L(U;ε,t)`.
#[derive(Debug, Clone)]
pub struct ReducedRateEvaluator {
    pub beta: f64,
    pub h_bar: f64,
    log_moment: LogMomentEvaluator,
}

impl ReducedRateEvaluator {
    pub fn new(beta: f64, h_bar: f64, epsilon: f64, spec: &HeatKernelSpec, grid: &QuadratureGrid) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(CoreError::invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(h_bar >= 0.0) {
            return Err(CoreError::invalid("h_bar", format!("must be nonnegative, got {h_bar}")));
        }
        Ok(ReducedRateEvaluator {
            beta,
            h_bar,
            log_moment: LogMomentEvaluator::new(epsilon, spec, grid),
        })
    }

    pub fn eval(&self, u: f64) -> f64 {
        u * u / (2.0 * self.beta) - u * self.h_bar - self.log_moment.eval(u)
    }

    /// Range of `U = β(u + h̄)` induced by the disk constraint `|u| <= 1`.
    pub fn u_domain(&self) -> (f64, f64) {
        (
            self.beta * (-1.0 + self.h_bar),
            self.beta * (1.0 + self.h_bar),
        )
    }

    /// Magnetization coordinate `u` recovered from `U`.
    pub fn u_from_reduced(&self, big_u: f64) -> f64 {
        big_u / self.beta - self.h_bar
    }
}

/// `G(U; β, h̄, ε, t)` evaluated directly.
pub fn reduced_g(
    u: f64,
    beta: f64,
    h_bar: f64,
    epsilon: f64,
    spec: &HeatKernelSpec,
    grid: &QuadratureGrid,
) -> Result<f64> {
    Ok(ReducedRateEvaluator::new(beta, h_bar, epsilon, spec, grid)?.eval(u))
}

/// Two-atom conditioning `λ_ε = ½ δ_{e(π+ε)} + ½ δ_{e(π-ε)}`; the atoms merge
/// into a single unit mass at `ε = 0`.
pub fn make_lambda_epsilon(epsilon: f64) -> Result<ConditioningMeasure> {
    if !(0.0..PI).contains(&epsilon) {
        return Err(CoreError::invalid("epsilon", format!("must lie in [0, π), got {epsilon}")));
    }
    if epsilon == 0.0 {
        return ConditioningMeasure::new(vec![(Angle::new(PI), 1.0)]);
    }
    ConditioningMeasure::new(vec![
        (Angle::new(PI + epsilon), 0.5),
        (Angle::new(PI - epsilon), 0.5),
    ])
}

/// Density at `η` of the transformed single-site kernel
/// `γ'(dη|λ) = ∫ e^{β σ·(m*+h)} p_t(σ,dη) α(dσ) / ∫ e^{β σ·(m*+h)} α(dσ)`.
///
/// The caller supplies the disk minimization report that produced `m*`;
/// if the report carries several global minimizers the kernel is undefined at
/// this conditioning (the non-Gibbs signature) and the call is refused.
pub fn transformed_kernel_gamma(
    eta: Angle,
    model: &MeanFieldModel,
    spec: &HeatKernelSpec,
    minimizers: &DiskReport,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if !minimizers.unique {
        return Err(CoreError::KernelUndefined(format!(
            "{} global minimizers of equal depth",
            minimizers.global_set.len()
        )));
    }
    let m_star = minimizers.global_minimum().location;
    let v = [
        model.beta * (m_star[0] + model.h[0]),
        model.beta * (m_star[1] + model.h[1]),
    ];
    let scale = v[0].hypot(v[1]);
    let tilt = |s: f64| (v[0] * s.cos() + v[1] * s.sin() - scale).exp();
    let numerator = grid.integrate(|s| tilt(s) * spec.density(eta.separation(Angle::new(s))));
    let denominator = grid.integrate(tilt);
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelConvention;

    fn qt(t: f64) -> HeatKernelSpec {
        HeatKernelSpec::new(t, KernelConvention::FourierQt).unwrap()
    }

    fn bessel_i0(x: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut term = 1.0f64;
        for k in 0..60 {
            if k > 0 {
                term *= (x / (2.0 * k as f64)) * (x / (2.0 * k as f64));
            }
            sum += term;
        }
        sum
    }

    #[test]
    fn f0_vanishes_at_origin_zero_field() {
        let grid = QuadratureGrid::default_grid();
        let model = MeanFieldModel::new(2.3, [0.0, 0.0]).unwrap();
        let m = Magnetization::new([0.0, 0.0]).unwrap();
        assert!(rate_function_f0(&m, &model, &grid).abs() < 1e-14);
    }

    #[test]
    fn f0_bessel_value() {
        let grid = QuadratureGrid::default_grid();
        let model = MeanFieldModel::new(1.0, [0.0, 0.0]).unwrap();
        let m = Magnetization::new([0.3, 0.0]).unwrap();
        let expected = 0.045 - bessel_i0(0.3).ln();
        assert!((rate_function_f0(&m, &model, &grid) - expected).abs() < 1e-12);
    }

    #[test]
    fn f0_rotation_covariant() {
        let grid = QuadratureGrid::default_grid();
        let phi = 0.83f64;
        let rot = move |v: [f64; 2]| {
            [
                v[0] * phi.cos() - v[1] * phi.sin(),
                v[0] * phi.sin() + v[1] * phi.cos(),
            ]
        };
        let model = MeanFieldModel::new(2.0, [0.4, 0.1]).unwrap();
        let rotated = MeanFieldModel::new(2.0, rot([0.4, 0.1])).unwrap();
        for &mv in &[[0.2, -0.3], [0.0, 0.7], [-0.5, -0.5]] {
            let a = rate_function_f0(&Magnetization::new(mv).unwrap(), &model, &grid);
            let b = rate_function_f0(&Magnetization::new(rot(mv)).unwrap(), &rotated, &grid);
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn f0_minimizer_collinear_with_field() {
        // coarse 2-D grid search over the disk
        let grid = QuadratureGrid::new(256).unwrap();
        let model = MeanFieldModel::new(5.0, [0.16, 0.0]).unwrap();
        let mut best = (f64::INFINITY, [0.0f64, 0.0]);
        let n = 61;
        for i in 0..n {
            for j in 0..n {
                let mv = [
                    -1.0 + 2.0 * i as f64 / (n - 1) as f64,
                    -1.0 + 2.0 * j as f64 / (n - 1) as f64,
                ];
                if mv[0].hypot(mv[1]) > 1.0 {
                    continue;
                }
                let v = rate_function_f0(&Magnetization::new(mv).unwrap(), &model, &grid);
                if v < best.0 {
                    best = (v, mv);
                }
            }
        }
        assert!(best.1[1].abs() < 1e-9, "minimizer off axis: {:?}", best.1);
        assert!(best.1[0] > 0.0, "minimizer should point along h");
    }

    #[test]
    fn f_tends_to_f0_for_large_time() {
        let grid = QuadratureGrid::default_grid();
        let model = MeanFieldModel::new(5.0, [0.16, 0.0]).unwrap();
        let spec = qt(20.0);
        let lambda = ConditioningMeasure::uniform(64).unwrap();
        for i in 0..11 {
            for j in 0..11 {
                let mv = [
                    -0.98 + 1.96 * i as f64 / 10.0,
                    -0.98 + 1.96 * j as f64 / 10.0,
                ];
                if mv[0].hypot(mv[1]) > 1.0 {
                    continue;
                }
                let m = Magnetization::new(mv).unwrap();
                let f = rate_function_f(&m, &model, &spec, &lambda, &grid);
                let f0 = rate_function_f0(&m, &model, &grid);
                assert!((f - f0).abs() < 1e-4, "at {mv:?}: {f} vs {f0}");
            }
        }
    }

    #[test]
    fn f_vanishes_at_zero_beta() {
        let grid = QuadratureGrid::default_grid();
        let model = MeanFieldModel::new(0.0, [0.3, 0.2]).unwrap();
        let spec = qt(1.0);
        let lambda = make_lambda_epsilon(0.4).unwrap();
        for &mv in &[[0.1, 0.5], [-0.7, 0.2], [0.0, 0.0]] {
            let f = rate_function_f(&Magnetization::new(mv).unwrap(), &model, &spec, &lambda, &grid);
            assert!(f.abs() < 1e-13, "F({mv:?}) = {f}");
        }
    }

    #[test]
    fn reduced_identity_with_full_rate_function() {
        // F(u e(0)) - β h̄²/2 = G(β(u+h̄)) on the axis, conditioning λ_ε
        let grid = QuadratureGrid::default_grid();
        let (beta, h_bar, eps, t) = (5.0, 0.16, 0.4, 1.0);
        let spec = qt(t);
        let model = MeanFieldModel::new(beta, [h_bar, 0.0]).unwrap();
        let lambda = make_lambda_epsilon(eps).unwrap();
        let g = ReducedRateEvaluator::new(beta, h_bar, eps, &spec, &grid).unwrap();
        let mut u = -0.9;
        while u <= 0.9 + 1e-12 {
            let m = Magnetization::new([u, 0.0]).unwrap();
            let lhs = rate_function_f(&m, &model, &spec, &lambda, &grid) - beta * h_bar * h_bar / 2.0;
            let rhs = g.eval(beta * (u + h_bar));
            assert!((lhs - rhs).abs() < 1e-10, "u={u}: {lhs} vs {rhs}");
            u += 0.2;
        }
    }

    #[test]
    fn log_moment_zero_at_origin_and_even_in_epsilon() {
        let grid = QuadratureGrid::default_grid();
        let spec = qt(1.0);
        assert!(log_moment_l(0.0, 0.37, &spec, &grid).abs() < 1e-13);
        let a = log_moment_l(2.4, 0.4, &spec, &grid);
        let b = log_moment_l(2.4, -0.4, &spec, &grid);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn log_moment_refinement_oracle() {
        let coarse = QuadratureGrid::default_grid();
        let fine = QuadratureGrid::new(8192).unwrap();
        let spec = qt(1.0);
        let a = log_moment_l(2.0, 0.4, &spec, &coarse);
        let b = log_moment_l(2.0, 0.4, &spec, &fine);
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn reduced_rate_zero_at_origin_and_grid_stable() {
        let grid = QuadratureGrid::default_grid();
        let spec = qt(1.0);
        assert!(reduced_g(0.0, 5.0, 0.16, 0.4, &spec, &grid).unwrap().abs() < 1e-13);
        let doubled = QuadratureGrid::new(2048).unwrap();
        for &u in &[-6.0, -2.0, 1.5, 4.0, 7.5] {
            let a = reduced_g(u, 5.0, 0.16, 0.4, &spec, &grid).unwrap();
            let b = reduced_g(u, 5.0, 0.16, 0.4, &spec, &doubled).unwrap();
            assert!((a - b).abs() < 1e-9, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn lambda_epsilon_construction() {
        let single = make_lambda_epsilon(0.0).unwrap();
        assert_eq!(single.atoms().len(), 1);
        assert!((single.atoms()[0].0.radians() - PI).abs() < 1e-15);
        assert_eq!(single.atoms()[0].1, 1.0);

        let pair = make_lambda_epsilon(0.4).unwrap();
        assert_eq!(pair.atoms().len(), 2);
        let total: f64 = pair.atoms().iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((pair.atoms()[0].0.radians() - (PI + 0.4)).abs() < 1e-15);
        assert!((pair.atoms()[1].0.radians() - (PI - 0.4)).abs() < 1e-15);

        assert!(make_lambda_epsilon(PI).is_err());
        assert!(make_lambda_epsilon(-0.1).is_err());
    }

    #[test]
    fn beta_zero_rejected_for_reduced_rate() {
        let grid = QuadratureGrid::default_grid();
        let spec = qt(1.0);
        assert!(ReducedRateEvaluator::new(0.0, 0.1, 0.3, &spec, &grid).is_err());
    }
}
