//! Coefficient and convergence-radius bounds.
//!
//! The classical bound uses the stability constant twice,
//! `rho_PR = 1 / (e^(2 beta B + 1) C(beta))`; once the cut-off potential is
//! known to share the stability constant of full Lennard-Jones, the split
//! bound needs it only once, `rho_new = 1 / (e^(beta B + 1) C~(beta))`.

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exact::{self, decimal, exp_bounds};
use crate::lsbound::{verify_lemma1, LSCertificate};
use crate::quad::{tilde_c_beta, QuadratureSpec};

/// Published upper bound on the Lennard-Jones stability constant.
pub const STABILITY_B: f64 = 41.66;
/// Conservative lower bound on `C(1)` (attractive tail alone).
pub const C_LOWER: f64 = 7.89;
/// Conservative upper bound on `C~(1)` at `a = 0.3637`.
pub const C_TILDE_UPPER: f64 = 50000.0;
/// Headline constants: ratio `>= e^B / 6338` and `>= e^32.9` at `B = 41.66`.
pub const RATIO_DIVISOR: f64 = 6338.0;
pub const RATIO_EXPONENT: f64 = 32.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub beta: f64,
    pub stability_b: f64,
    /// `C(beta)`
    pub c: f64,
    /// `C~(beta)`
    pub c_tilde: f64,
    /// Cut-off radius used for `c_tilde`.
    pub a: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let BoundInputs {
            beta,
            stability_b,
            c,
            c_tilde,
            ..
        } = *self;
        if !(beta.is_finite() && beta > 0.0) {
            return domain(format!("beta must be positive, got {beta}"));
        }
        if !(stability_b.is_finite() && stability_b >= 0.0) {
            return domain(format!("stability constant must be >= 0, got {stability_b}"));
        }
        if !(c.is_finite() && c > 0.0 && c_tilde.is_finite() && c_tilde > 0.0) {
            return domain(format!("C and C~ must be positive, got {c} and {c_tilde}"));
        }
        Ok(())
    }

    /// The bound-level constants: `C = 7.89`, `C~ = 50000`.
    pub fn conservative(beta: f64, stability_b: f64, a: f64) -> Self {
        Self {
            beta,
            stability_b,
            c: C_LOWER,
            c_tilde: C_TILDE_UPPER,
            a,
        }
    }
}

pub fn ln_pr_radius(inputs: &BoundInputs) -> f64 {
    -(2.0 * inputs.beta * inputs.stability_b + 1.0) - inputs.c.ln()
}

pub fn ln_mps_radius(inputs: &BoundInputs) -> f64 {
    -(inputs.beta * inputs.stability_b + 1.0) - inputs.c_tilde.ln()
}

/// `1 / (e^(2 beta B + 1) C(beta))`
pub fn pr_radius(inputs: &BoundInputs) -> f64 {
    1.0 / ((2.0 * inputs.beta * inputs.stability_b + 1.0).exp() * inputs.c)
}

/// `1 / (e^(beta B + 1) C~(beta))`
pub fn mps_radius(inputs: &BoundInputs) -> f64 {
    1.0 / ((inputs.beta * inputs.stability_b + 1.0).exp() * inputs.c_tilde)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `e^(2 beta B (n-1)) n^(n-2) C^(n-1) / n!`
    PenroseRuelle,
    /// `e^(beta B n) n^(n-2) C~^(n-1) / n!`
    New,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Natural log of the bound on `|C_n|`. `n^(n-2)` is taken as 1 at `n = 1`.
pub fn ln_coefficient_bound(n: u32, variant: Variant, inputs: &BoundInputs) -> Result<f64> {
    if n == 0 {
        return domain("coefficient order must be >= 1");
    }
    let nf = n as f64;
    let (exponent, c) = match variant {
        Variant::PenroseRuelle => (2.0 * inputs.beta * inputs.stability_b * (nf - 1.0), inputs.c),
        Variant::New => (inputs.beta * inputs.stability_b * nf, inputs.c_tilde),
    };
    Ok(exponent + (nf - 2.0) * nf.ln() + (nf - 1.0) * c.ln() - ln_factorial(n))
}

pub fn coefficient_bound(n: u32, variant: Variant, inputs: &BoundInputs) -> Result<f64> {
    if n == 1 && variant == Variant::PenroseRuelle {
        return Ok(1.0);
    }
    ln_coefficient_bound(n, variant, inputs).map(f64::exp)
}

/// `rho_new / rho_PR` for two input sets at the same temperature.
pub fn improvement_ratio(pr: &BoundInputs, new: &BoundInputs) -> Result<f64> {
    pr.validate()?;
    new.validate()?;
    if pr.beta != new.beta {
        return domain(format!(
            "ratio needs equal beta, got {} and {}",
            pr.beta, new.beta
        ));
    }
    Ok((ln_mps_radius(new) - ln_pr_radius(pr)).exp())
}

/// Exact check of the headline ratio with the conservative constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub beta: f64,
    pub stability_b: f64,
    /// `e^(beta B) * 7.89 / 50000`
    pub ratio_lower: f64,
    pub ln_ratio_lower: f64,
    /// `7.89 * 6338 >= 50000`, so the ratio is at least `e^(beta B) / 6338`.
    pub divisor_holds: bool,
    /// `e^(beta B) * 7.89 / 50000 >= e^32.9`, decided with a rigorous
    /// enclosure of the exponential.
    pub exponent_holds: bool,
}

pub fn certify_conservative_ratio(beta: f64, stability_b: f64) -> Result<RatioCertificate> {
    let inputs = BoundInputs::conservative(beta, stability_b, crate::lsbound::DEFAULT_A);
    inputs.validate()?;
    let ln_ratio_lower = beta * stability_b + (C_LOWER / C_TILDE_UPPER).ln();

    let c_lower = decimal("7.89")?;
    let c_upper = decimal("50000")?;
    let divisor = decimal("6338")?;
    let divisor_holds = &c_lower * &divisor >= c_upper;

    // e^(beta B - 32.9) >= 50000 / 7.89
    let x = exact::from_f64(beta)? * exact::from_f64(stability_b)? - decimal("32.9")?;
    let (exp_lo, _) = exp_bounds(&x, 60);
    let needed = &c_upper / &c_lower;
    let exponent_holds = !needed.is_negative() && exp_lo >= needed;

    Ok(RatioCertificate {
        beta,
        stability_b,
        ratio_lower: ln_ratio_lower.exp(),
        ln_ratio_lower,
        divisor_holds,
        exponent_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub n: u32,
    pub pr: f64,
    pub new: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub inputs: BoundInputs,
    pub rho_pr: f64,
    pub rho_new: f64,
    pub ln_rho_pr: f64,
    pub ln_rho_new: f64,
    /// `rho_new / rho_PR` from the computed integrals.
    pub ratio: f64,
    /// Lower bound from the conservative constants `7.89` and `50000`.
    pub ratio_lower_bound: f64,
    pub coefficient_bounds: Vec<CoefficientRow>,
    pub certificate: Option<LSCertificate>,
}

/// Radii, ratios and the coefficient table for orders `2..=max_order`.
pub fn radius_report(
    inputs: BoundInputs,
    certificate: Option<LSCertificate>,
    max_order: u32,
) -> Result<RadiusReport> {
    inputs.validate()?;
    let coefficient_bounds = (2..=max_order.max(2))
        .map(|n| {
            Ok(CoefficientRow {
                n,
                pr: coefficient_bound(n, Variant::PenroseRuelle, &inputs)?,
                new: coefficient_bound(n, Variant::New, &inputs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let conservative = BoundInputs::conservative(inputs.beta, inputs.stability_b, inputs.a);
    Ok(RadiusReport {
        rho_pr: pr_radius(&inputs),
        rho_new: mps_radius(&inputs),
        ln_rho_pr: ln_pr_radius(&inputs),
        ln_rho_new: ln_mps_radius(&inputs),
        ratio: improvement_ratio(&inputs, &inputs)?,
        ratio_lower_bound: improvement_ratio(&conservative, &conservative)?,
        coefficient_bounds,
        certificate,
        inputs,
    })
}

/// How to pick the cube side for a candidate cut-off radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EllPolicy {
    /// `ell = 2a / sqrt(3)`, so that `a = (sqrt(3)/2) ell`. The value is
    /// rounded up by a few ulps so that `4 a^2 <= 3 ell^2` holds exactly.
    Tight,
    Fixed(f64),
}

impl EllPolicy {
    pub fn ell_for(&self, a: f64) -> f64 {
        match self {
            EllPolicy::Tight => 2.0 * a / 3f64.sqrt() * (1.0 + 4.0 * f64::EPSILON),
            EllPolicy::Fixed(ell) => *ell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub ell: f64,
    pub c_tilde: f64,
    pub rho_new: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub rows: Vec<SweepRow>,
    /// Largest `rho_new` among the rows whose certificate is valid.
    pub best: Option<(SweepRow, LSCertificate)>,
}

/// Inclusive grid `lo, lo + step, ...`, ending exactly at `hi`.
pub fn a_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && step > 0.0) {
        return domain(format!("bad grid [{lo}, {hi}] step {step}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if hi - grid[n] > 1e-12 {
        grid.push(hi);
    } else {
        grid[n] = hi;
    }
    Ok(grid)
}

/// Scans candidate cut-off radii, certifying each and keeping the one with
/// the largest `rho_new`. Rows come back in grid order.
pub fn optimize_radius(
    beta: f64,
    stability_b: f64,
    grid: &[f64],
    policy: EllPolicy,
    spec: &QuadratureSpec,
) -> Result<OptimizeOutcome> {
    let rows: Vec<(SweepRow, LSCertificate)> = grid
        .par_iter()
        .map(|&a| {
            let ell = policy.ell_for(a);
            let record = verify_lemma1(a, ell);
            let c_tilde = tilde_c_beta(beta, a, spec)
                .and_then(|r| r.require_converged())
                .map(|r| r.value);
            let (c_tilde, quad_err) = match c_tilde {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            let inputs = BoundInputs {
                beta,
                stability_b,
                c: 1.0,
                c_tilde,
                a,
            };
            let reason = quad_err.or_else(|| record.certificate.failure_reason.clone()).or_else(|| {
                (!record.certified).then(|| "minimiser equivalence not established".to_string())
            });
            let row = SweepRow {
                a,
                ell,
                c_tilde,
                rho_new: mps_radius(&inputs),
                valid: reason.is_none(),
                reason,
            };
            (row, record.certificate)
        })
        .collect();
    let best = rows
        .iter()
        .filter(|(r, _)| r.valid)
        .fold(None::<&(SweepRow, LSCertificate)>, |acc, cand| match acc {
            Some(b) if b.0.rho_new >= cand.0.rho_new => Some(b),
            _ => Some(cand),
        })
        .cloned();
    Ok(OptimizeOutcome {
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit() -> BoundInputs {
        BoundInputs {
            beta: 1.0,
            stability_b: 0.0,
            c: 1.0,
            c_tilde: 1.0,
            a: 0.3637,
        }
    }

    #[test]
    fn radii_at_unit_inputs() {
        assert!((pr_radius(&unit()) - 1.0 / E).abs() < 1e-15);
        assert!((mps_radius(&unit()) - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn headline_constants() {
        let inputs = BoundInputs::conservative(1.0, STABILITY_B, 0.3637);
        let expected = (-2.0 * STABILITY_B).exp() / (E * 7.89);
        assert!((pr_radius(&inputs) - expected).abs() < 1e-12 * expected);
        assert!(pr_radius(&inputs) < (-2.0 * STABILITY_B).exp() / 7.89);
        let new = mps_radius(&inputs);
        let expected = 1.0 / ((STABILITY_B + 1.0).exp() * 50000.0);
        assert!((new - expected).abs() < 1e-12 * expected);
        // one power of e^B, not two
        let ratio = new / pr_radius(&inputs);
        assert!((ratio.ln() - (STABILITY_B + (7.89f64 / 50000.0).ln())).abs() < 1e-9);
    }

    #[test]
    fn doubling_c_halves_radius() {
        let mut i = unit();
        i.stability_b = 3.0;
        let r = pr_radius(&i);
        i.c *= 2.0;
        assert!((pr_radius(&i) - r / 2.0).abs() < 1e-15 * r);
    }

    #[test]
    fn coefficient_rows() {
        let i = BoundInputs {
            beta: 0.7,
            stability_b: 2.0,
            c: 3.0,
            c_tilde: 5.0,
            a: 0.3,
        };
        assert_eq!(coefficient_bound(1, Variant::PenroseRuelle, &i).unwrap(), 1.0);
        let pr2 = coefficient_bound(2, Variant::PenroseRuelle, &i).unwrap();
        assert!((pr2 - (2.8f64).exp() * 3.0 / 2.0).abs() < 1e-12 * pr2);
        let new2 = coefficient_bound(2, Variant::New, &i).unwrap();
        assert!((new2 - (2.8f64).exp() * 5.0 / 2.0).abs() < 1e-12 * new2);
        assert!(coefficient_bound(0, Variant::New, &i).is_err());
        for n in 2..=6u32 {
            let pr = coefficient_bound(n, Variant::PenroseRuelle, &i).unwrap();
            let new = coefficient_bound(n, Variant::New, &i).unwrap();
            let nf = n as f64;
            let predicted = (0.7 * 2.0 * (2.0 - nf)).exp() * (5.0f64 / 3.0).powf(nf - 1.0);
            assert!((new / pr - predicted).abs() < 1e-12 * predicted);
        }
    }

    #[test]
    fn monotone_in_inputs() {
        let base = BoundInputs {
            beta: 1.0,
            stability_b: 2.0,
            c: 3.0,
            c_tilde: 4.0,
            a: 0.3,
        };
        for k in 1..20 {
            let d = 0.1 * k as f64;
            let mut more_b = base;
            more_b.stability_b += d;
            let mut more_c = base;
            more_c.c += d;
            more_c.c_tilde += d;
            let mut more_beta = base;
            more_beta.beta += d;
            for other in [more_b, more_c, more_beta] {
                assert!(pr_radius(&other) < pr_radius(&base));
                assert!(mps_radius(&other) < mps_radius(&base));
            }
        }
    }

    #[test]
    fn conservative_ratio_certificate() {
        let cert = certify_conservative_ratio(1.0, STABILITY_B).unwrap();
        assert!(cert.divisor_holds && cert.exponent_holds);
        assert!(cert.ratio_lower >= STABILITY_B.exp() / RATIO_DIVISOR);
        assert!(cert.ln_ratio_lower >= RATIO_EXPONENT);
        // B = 0: the ratio degenerates to 7.89 / 50000
        let flat = certify_conservative_ratio(1.0, 0.0).unwrap();
        assert!((flat.ratio_lower - 7.89 / 50000.0).abs() < 1e-15);
        assert!(!flat.exponent_holds);
        // just below the needed stability constant the claim must fail
        let weak = certify_conservative_ratio(1.0, 41.6).unwrap();
        assert!(!weak.exponent_holds);
    }

    #[test]
    fn ratio_requires_equal_beta() {
        let mut other = unit();
        other.beta = 2.0;
        assert!(improvement_ratio(&unit(), &other).is_err());
    }

    #[test]
    fn grid_includes_endpoint() {
        let g = a_grid(0.30, 0.3637, 1e-3).unwrap();
        assert_eq!(g[0], 0.30);
        assert_eq!(*g.last().unwrap(), 0.3637);
        assert_eq!(g.len(), 65);
        let g = a_grid(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn report_table() {
        let i = BoundInputs {
            beta: 1.0,
            stability_b: STABILITY_B,
            c: 12.98,
            c_tilde: 49825.0,
            a: 0.3637,
        };
        let rep = radius_report(i, None, 6).unwrap();
        assert_eq!(rep.coefficient_bounds.len(), 5);
        assert_eq!(rep.coefficient_bounds[0].n, 2);
        assert!(rep.ratio > rep.ratio_lower_bound);
        let back: RadiusReport =
            serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn tight_sweep_is_valid_and_monotone() {
        let grid = a_grid(0.30, 0.3637, 0.0025).unwrap();
        let out = optimize_radius(1.0, STABILITY_B, &grid, EllPolicy::Tight, &QuadratureSpec::default())
            .unwrap();
        assert_eq!(out.rows.len(), grid.len());
        assert!(out.rows.iter().all(|r| r.valid), "{:?}", out.rows.iter().find(|r| !r.valid));
        assert!(out.rows.windows(2).all(|w| w[1].rho_new > w[0].rho_new));
        let (best, cert) = out.best.unwrap();
        assert_eq!(best.a, 0.3637);
        assert!(cert.valid && cert.rmin_lower > best.a);
    }

    #[test]
    fn sweep_flags_inadmissible_points() {
        let out = optimize_radius(1.0, STABILITY_B, &[0.36, 0.5], EllPolicy::Fixed(0.42), &QuadratureSpec::default())
            .unwrap();
        assert!(out.rows[0].valid);
        assert!(!out.rows[1].valid);
        assert!(out.rows[1].reason.as_deref().unwrap().contains("a <= (sqrt(3)/2)*ell"));
        assert_eq!(out.best.unwrap().0.a, 0.36);
    }
}
