//! Mean-field Gibbsianness certificates built on the interaction constant
//!
//! ```text
//! C(F,g) = 2 ‖∂²F‖_{max,∞} δ(g) ‖g‖_{d,2} exp(δ_{F,g}/2)
//! ```
//!
//! where `δ(g)` is the sum of component oscillations, `‖g‖_{d,2}` the
//! Lipschitz norm w.r.t. the chord metric, `‖∂²F‖_{max,∞}` the sup over the
//! moment hull of the Hessian max-norm, and `δ_{F,g}` the sup of the gradient
//! pairing against component increments. For the quadratic rotator on the
//! n-sphere these evaluate in closed form to `C = 4β(n+1)e^β`; the grid
//! evaluation must reproduce that to high accuracy.

use crate::error::{CoreError, Result};
use crate::kernel::{std_alpha_uniform, QuadratureGrid};
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2, TAU};

/// One sampled single-site point: its embedding coordinates (used for the
/// chord metric) and the observable vector `g` evaluated there.
#[derive(Debug, Clone)]
pub struct SiteSample {
    pub coords: Vec<f64>,
    pub g: Vec<f64>,
}

/// How the inner supremum over the moment hull in `δ_{F,g}` is evaluated.
pub enum GradientPairing {
    /// `sup_m |⟨∇F(m), Δ⟩|` available in closed form per increment `Δ`
    /// (quadratic rotator: `β‖Δ‖₂`, attained on the hull boundary).
    Closed(Box<dyn Fn(&[f64]) -> f64 + Sync + Send>),
    /// Scan the supplied hull samples.
    Sampled,
}

/// A mean-field interaction `Φ(ν) = F(ν[g_1], …, ν[g_l])` prepared for
/// grid-supremum evaluation of its certificate constants.
pub struct MeanFieldInteractionSpec {
    pub l: usize,
    hessian: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>,
    gradient: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>,
    base_sites: Vec<SiteSample>,
    refined_sites: Vec<SiteSample>,
    hull_samples: Vec<Vec<f64>>,
    pairing: GradientPairing,
}

fn circle_sites(n_points: usize, g: &dyn Fn(f64) -> Vec<f64>) -> Vec<SiteSample> {
    (0..n_points)
        .map(|j| {
            let a = TAU * j as f64 / n_points as f64;
            SiteSample {
                coords: vec![a.cos(), a.sin()],
                g: g(a),
            }
        })
        .collect()
}

fn sphere_sites(n_theta: usize, n_phi: usize) -> Vec<SiteSample> {
    // polar grid including both poles; coordinates double as the observable
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..=n_theta {
        let theta = PI * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            let p = vec![
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            out.push(SiteSample {
                coords: p.clone(),
                g: p,
            });
            if i == 0 || i == n_theta {
                break; // poles once
            }
        }
    }
    out
}

impl MeanFieldInteractionSpec {
    /// Quadratic rotator `F(m) = -β Σ_j m_j²/2`, `g` the coordinate
    /// observables on the n-sphere (`n` = 1 or 2), moment hull the closed
    /// unit ball.
    pub fn quadratic_rotator(beta: f64, n: u32) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(CoreError::invalid("beta", format!("must be >= 0, got {beta}")));
        }
        let l = match n {
            1 => 2,
            2 => 3,
            _ => {
                return Err(CoreError::invalid(
                    "n",
                    format!("sphere dimension must be 1 or 2 for grid evaluation, got {n}"),
                ))
            }
        };
        let (base_sites, refined_sites) = match n {
            1 => {
                let g = |a: f64| vec![a.cos(), a.sin()];
                (circle_sites(64, &g), circle_sites(128, &g))
            }
            _ => (sphere_sites(32, 32), sphere_sites(64, 64)),
        };
        // Hessian is constant, so a tiny hull sample suffices for its sup.
        let hull_samples = vec![vec![0.0; l], {
            let mut v = vec![0.0; l];
            v[0] = 1.0;
            v
        }];
        let b = beta;
        Ok(MeanFieldInteractionSpec {
            l,
            hessian: Box::new(move |m: &[f64]| {
                let mut h = vec![0.0; m.len() * m.len()];
                for i in 0..m.len() {
                    h[i * m.len() + i] = -b;
                }
                h
            }),
            gradient: Box::new(move |m: &[f64]| m.iter().map(|x| -b * x).collect()),
            base_sites,
            refined_sites,
            hull_samples,
            // |⟨∇F(m), Δ⟩| = β|m·Δ| over the unit ball: attained at m = Δ/‖Δ‖
            pairing: GradientPairing::Closed(Box::new(move |delta: &[f64]| {
                b * delta.iter().map(|d| d * d).sum::<f64>().sqrt()
            })),
        })
    }

    /// Generic interaction on the circle with explicit derivative evaluators
    /// and a caller-supplied sample of the moment hull.
    pub fn generic_circle(
        l: usize,
        gradient: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>,
        hessian: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>,
        g: Box<dyn Fn(f64) -> Vec<f64> + Sync + Send>,
        hull_samples: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if l == 0 {
            return Err(CoreError::invalid("l", "at least one observable required"));
        }
        if hull_samples.is_empty() {
            return Err(CoreError::invalid("hull_samples", "at least one hull point required"));
        }
        Ok(MeanFieldInteractionSpec {
            l,
            hessian,
            gradient,
            base_sites: circle_sites(64, g.as_ref()),
            refined_sites: circle_sites(128, g.as_ref()),
            hull_samples,
            pairing: GradientPairing::Sampled,
        })
    }

    fn delta_g_on(&self, sites: &[SiteSample]) -> f64 {
        (0..self.l)
            .map(|j| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for s in sites {
                    lo = lo.min(s.g[j]);
                    hi = hi.max(s.g[j]);
                }
                hi - lo
            })
            .sum()
    }

    fn lip_norm_on(&self, sites: &[SiteSample]) -> f64 {
        let mut sup: f64 = 0.0;
        for (i, a) in sites.iter().enumerate() {
            for b in sites.iter().skip(i + 1) {
                let d2: f64 = a
                    .coords
                    .iter()
                    .zip(&b.coords)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if d2 < 1e-24 {
                    continue;
                }
                let num2: f64 = a.g.iter().zip(&b.g).map(|(x, y)| (x - y) * (x - y)).sum();
                sup = sup.max((num2 / d2).sqrt());
            }
        }
        sup
    }

    fn delta_fg_on(&self, sites: &[SiteSample]) -> f64 {
        let mut sup: f64 = 0.0;
        let mut delta = vec![0.0; self.l];
        for (i, a) in sites.iter().enumerate() {
            for b in sites.iter().skip(i + 1) {
                for j in 0..self.l {
                    delta[j] = a.g[j] - b.g[j];
                }
                let v = match &self.pairing {
                    GradientPairing::Closed(f) => f(&delta),
                    GradientPairing::Sampled => self
                        .hull_samples
                        .iter()
                        .map(|m| {
                            let grad = (self.gradient)(m);
                            grad.iter().zip(&delta).map(|(g, d)| g * d).sum::<f64>().abs()
                        })
                        .fold(0.0, f64::max),
                };
                sup = sup.max(v);
            }
        }
        sup
    }

    fn hess_max(&self) -> f64 {
        self.hull_samples
            .iter()
            .map(|m| {
                (self.hessian)(m)
                    .iter()
                    .map(|x| x.abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// A supremum computed on a base grid and once more on a refined grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComputedConstant {
    pub value: f64,
    pub refinement_change: f64,
    pub converged: bool,
}

fn refined_constant(base: f64, refined: f64, tol: f64) -> ComputedConstant {
    ComputedConstant {
        value: refined,
        refinement_change: (refined - base).abs(),
        converged: (refined - base).abs() <= tol * refined.abs().max(1.0),
    }
}

/// The certificate constant `C(F,g)` with its grid-evaluated components.
#[derive(Debug, Clone, Serialize)]
pub struct CfgReport {
    pub value: f64,
    pub hess_max: f64,
    pub delta_g: ComputedConstant,
    pub lip_norm: ComputedConstant,
    pub delta_fg: ComputedConstant,
    pub converged: bool,
}

/// Evaluates `C(F,g)` by grid suprema with one refinement doubling.
pub fn mf_cfg_constant(spec: &MeanFieldInteractionSpec) -> Result<CfgReport> {
    let tol = 1e-6;
    let delta_g = refined_constant(
        spec.delta_g_on(&spec.base_sites),
        spec.delta_g_on(&spec.refined_sites),
        tol,
    );
    let lip_norm = refined_constant(
        spec.lip_norm_on(&spec.base_sites),
        spec.lip_norm_on(&spec.refined_sites),
        tol,
    );
    let delta_fg = refined_constant(
        spec.delta_fg_on(&spec.base_sites),
        spec.delta_fg_on(&spec.refined_sites),
        tol,
    );
    let hess_max = spec.hess_max();
    let converged = delta_g.converged && lip_norm.converged && delta_fg.converged;
    let report = CfgReport {
        value: 2.0 * hess_max * delta_g.value * lip_norm.value * (delta_fg.value / 2.0).exp(),
        hess_max,
        delta_g,
        lip_norm,
        delta_fg,
        converged,
    };
    if !converged {
        return Err(CoreError::NonConvergent {
            what: "C(F,g) grid suprema",
            change: delta_g
                .refinement_change
                .max(lip_norm.refinement_change)
                .max(delta_fg.refinement_change),
            tolerance: tol,
        });
    }
    Ok(report)
}

/// Closed form of `C(F,g)` for the quadratic rotator on the n-sphere.
pub fn rotator_c_closed_form(beta: f64, n: u32) -> f64 {
    4.0 * beta * (n as f64 + 1.0) * beta.exp()
}

/// Outcome of the product criterion `C(F,g)·std_α(k) < 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MfCertificate {
    pub holds: bool,
    pub product: f64,
    pub margin: f64,
    /// Continuity coefficient `C(F,g)² std_α(k) std_α` of the transformed
    /// kernel estimate (meaningful when the certificate holds).
    pub continuity_coefficient: f64,
}

/// Certificate for a transformed mean-field system with kernel concentration
/// `std_alpha_k`.
pub fn mf_gibbs_certificate(c_value: f64, std_alpha_k: f64, grid: &QuadratureGrid) -> Result<MfCertificate> {
    if !(std_alpha_k >= 0.0) {
        return Err(CoreError::invalid("std_alpha_k", "must be nonnegative"));
    }
    let product = c_value * std_alpha_k;
    let std_alpha = std_alpha_uniform(grid);
    Ok(MfCertificate {
        holds: product < 1.0,
        product,
        margin: 1.0 - product,
        continuity_coefficient: c_value * c_value * std_alpha_k * std_alpha,
    })
}

/// Threshold in time for the heat-kernel criterion
/// `√2 C(F,g) (1-e^{-nt})^{1/2} < 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeThreshold {
    pub c_value: f64,
    pub n: u32,
    /// Largest admissible time; `None` means the criterion holds for all `t`.
    pub t_max: Option<f64>,
}

impl TimeThreshold {
    pub fn holds_at(&self, t: f64) -> bool {
        SQRT_2 * self.c_value * (1.0 - (-(self.n as f64) * t).exp()).sqrt() < 1.0
    }

    pub fn condition_value(&self, t: f64) -> f64 {
        SQRT_2 * self.c_value * (1.0 - (-(self.n as f64) * t).exp()).sqrt()
    }
}

/// Inverts the time-evolution criterion: `t_max = -(1/n) log(1 - 1/(2C²))`
/// when `2C² > 1`, otherwise the criterion holds forever.
pub fn thm2_threshold(n: u32, c_value: f64) -> Result<TimeThreshold> {
    if !(c_value >= 0.0) {
        return Err(CoreError::invalid("C_value", "must be nonnegative"));
    }
    let two_c2 = 2.0 * c_value * c_value;
    let t_max = if two_c2 > 1.0 {
        Some(-(1.0 / n as f64) * (1.0 - 1.0 / two_c2).ln())
    } else {
        None
    };
    Ok(TimeThreshold { c_value, n, t_max })
}

/// Specialization to the quadratic rotator (`C = 4β(n+1)e^β`).
pub fn rotator_time_threshold(beta: f64, n: u32) -> TimeThreshold {
    thm2_threshold(n, rotator_c_closed_form(beta, n)).expect("closed form is nonnegative")
}

/// Outcome of the fineness criterion `ρ C(F,g) < 1` for discretisations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FinenessCertificate {
    pub holds: bool,
    pub product: f64,
    pub rho_max: f64,
}

pub fn fineness_certificate_mf(c_value: f64, rho: f64) -> Result<FinenessCertificate> {
    if !(rho >= 0.0) {
        return Err(CoreError::invalid("rho", "must be nonnegative"));
    }
    let rho_max = if c_value > 0.0 { 1.0 / c_value } else { f64::INFINITY };
    Ok(FinenessCertificate {
        holds: rho * c_value < 1.0,
        product: rho * c_value,
        rho_max,
    })
}

/// Fineness of the decomposition of the circle into `m` equal arcs
/// (`ρ = 2 sin(π/m)`, the chord diameter of one arc; `m >= 2`).
pub fn equal_arc_fineness(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(CoreError::invalid("m", "at least two arcs required"));
    }
    Ok(2.0 * (PI / m as f64).sin())
}

/// Smallest equal-arc count `M` whose fineness beats `rho_max`.
pub fn minimal_arc_count(rho_max: f64) -> Result<u32> {
    if !(rho_max > 0.0) {
        return Err(CoreError::CertificateInapplicable(
            "rho_max must be positive for a finite arc count".into(),
        ));
    }
    let mut m = 2u32;
    while equal_arc_fineness(m)? >= rho_max {
        m += 1;
        if m > 10_000_000 {
            return Err(CoreError::CertificateInapplicable(
                "no equal-arc decomposition below 1e7 arcs satisfies the fineness bound".into(),
            ));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_interaction_gives_zero_constant() {
        let spec = MeanFieldInteractionSpec::generic_circle(
            1,
            Box::new(|_m| vec![0.0]),
            Box::new(|_m| vec![0.0]),
            Box::new(|a: f64| vec![a.cos()]),
            vec![vec![0.0]],
        )
        .unwrap();
        let report = mf_cfg_constant(&spec).unwrap();
        assert_eq!(report.value, 0.0);
        assert!((report.delta_g.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotator_matches_closed_form_circle() {
        for beta in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let spec = MeanFieldInteractionSpec::quadratic_rotator(beta, 1).unwrap();
            let report = mf_cfg_constant(&spec).unwrap();
            let closed = rotator_c_closed_form(beta, 1);
            assert!(
                (report.value - closed).abs() <= 1e-8 * closed,
                "beta={beta}: {} vs {closed}",
                report.value
            );
        }
    }

    #[test]
    fn rotator_beta_one_reference_value() {
        let report =
            mf_cfg_constant(&MeanFieldInteractionSpec::quadratic_rotator(1.0, 1).unwrap()).unwrap();
        // 8e
        assert!((report.value - 8.0 * std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn oscillation_scales_with_observable() {
        // doubling g doubles δ(g); with a linear F the full constant stays 0
        let make = |scale: f64| {
            MeanFieldInteractionSpec::generic_circle(
                1,
                Box::new(|_m| vec![1.0]),
                Box::new(|_m| vec![0.0]),
                Box::new(move |a: f64| vec![scale * a.cos()]),
                vec![vec![0.0]],
            )
            .unwrap()
        };
        let single = mf_cfg_constant(&make(1.0)).unwrap();
        let double = mf_cfg_constant(&make(2.0)).unwrap();
        assert!((double.delta_g.value - 2.0 * single.delta_g.value).abs() < 1e-12);
        assert_eq!(single.value, 0.0);
        assert_eq!(double.value, 0.0);
    }

    #[test]
    fn product_certificate_edges() {
        let grid = QuadratureGrid::default_grid();
        // delta-like kernel: std = 0 makes the product vanish for any C
        let cert = mf_gibbs_certificate(1e6, 0.0, &grid).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.product, 0.0);

        // weak coupling, short time: holds
        let c = rotator_c_closed_form(0.1, 1);
        let std_k = crate::kernel::std_alpha_heat_sphere(1, 0.05);
        assert!(mf_gibbs_certificate(c, std_k, &grid).unwrap().holds);

        // strong coupling, order-one time: silent
        let c = rotator_c_closed_form(5.0, 1);
        let std_k = crate::kernel::std_alpha_heat_sphere(1, 1.0);
        assert!(!mf_gibbs_certificate(c, std_k, &grid).unwrap().holds);
    }

    #[test]
    fn time_threshold_inversion() {
        // weak coupling: holds forever (2C² ≈ 0.354 < 1)
        let th = rotator_time_threshold(0.05, 1);
        assert!(th.t_max.is_none());
        assert!(th.holds_at(1e9));
        let two_c2 = 2.0 * th.c_value * th.c_value;
        assert!((two_c2 - 32.0 * 0.05f64.powi(2) * 4.0 * (2.0 * 0.05f64).exp()).abs() < 1e-12);

        // strong coupling: minuscule window, t_max ≈ 1/(3200 e^10)
        let th = rotator_time_threshold(5.0, 1);
        let t_max = th.t_max.unwrap();
        assert!((t_max - 1.0 / (3200.0 * (10.0f64).exp())).abs() < 1e-15);
        // at t = 0 the condition value is 0 < 1
        assert!(th.holds_at(0.0));
        assert_eq!(th.condition_value(0.0), 0.0);
    }

    #[test]
    fn fineness_certificate_and_arc_count() {
        // C = 0 admits any fineness
        let cert = fineness_certificate_mf(0.0, 123.0).unwrap();
        assert!(cert.holds);
        assert!(cert.rho_max.is_infinite());

        // quadratic rotator at β = 1: minimal arc count 137
        let c = rotator_c_closed_form(1.0, 1);
        let cert = fineness_certificate_mf(c, 0.01).unwrap();
        assert!(cert.holds);
        let m = minimal_arc_count(cert.rho_max).unwrap();
        assert_eq!(m, 137);
        assert!(equal_arc_fineness(m).unwrap() < cert.rho_max);
        assert!(equal_arc_fineness(m - 1).unwrap() >= cert.rho_max);
    }
}
