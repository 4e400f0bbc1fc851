//! Radial quadrature for `C(beta)` and `C~(beta)`.
//!
//! Integrals are computed with a globally adaptive Gauss-Kronrod 7/15 pair;
//! the error estimate of a panel is the difference between the two rules.
//! Mandatory split points keep every panel smooth. A semi-infinite tail
//! `[r1, inf)` is mapped to `(0, 1/r1]` by `u = 1/r`.
//!
//! Error estimates are heuristic. Certified statements use the closed-form
//! overestimates at the bottom of this module instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::potentials::{lj_eval, mayer_from_energy, PotentialSpec, LJ_ZERO};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Mandatory breakpoints, strictly increasing and positive.
    pub split_points: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_subdivisions: 5000,
            split_points: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_splits(mut self, splits: Vec<f64>) -> Self {
        self.split_points = splits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        let increasing = self.split_points.windows(2).all(|w| w[0] < w[1]);
        let positive = self.split_points.iter().all(|&s| s > 0.0 && s.is_finite());
        if !(increasing && positive) {
            return domain(format!(
                "split points must be strictly increasing and positive: {:?}",
                self.split_points
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature(format!(
                "value {} with error estimate {:e} after {} subdivisions",
                self.value, self.error_estimate, self.subdivisions_used
            )))
        }
    }

    /// Multiplies value and error estimate by a constant factor.
    pub fn scaled(mut self, k: f64) -> Self {
        self.value *= k;
        self.error_estimate *= k.abs();
        self
    }
}

#[derive(Clone, Copy)]
enum Map {
    Identity,
    /// `r = 1/u`, `dr = du / u^2`
    Reciprocal,
}

#[derive(Clone, Copy)]
struct Panel {
    map: Map,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn eval_mapped(g: &impl Fn(f64) -> f64, map: Map, t: f64) -> f64 {
    match map {
        Map::Identity => g(t),
        Map::Reciprocal => g(1.0 / t) / (t * t),
    }
}

/// One Kronrod-15 / Gauss-7 evaluation on `[a, b]`.
fn kronrod15(g: &impl Fn(f64) -> f64, map: Map, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval_mapped(g, map, center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval_mapped(g, map, center - dx);
        let f2 = eval_mapped(g, map, center + dx);
        finite &= f1.is_finite() && f2.is_finite();
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !finite {
        return Err(Error::Quadrature(format!(
            "integrand not finite on panel [{a}, {b}]"
        )));
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Adaptive integral of `g` over `[lo, hi]`; `hi` may be `f64::INFINITY`.
///
/// The range is cut at every split point inside it. An infinite upper limit
/// needs a positive finite cut below it: the largest of `lo`, the last split
/// point, or `1`.
pub fn integrate_radial(
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    if !(lo.is_finite() && lo >= 0.0 && hi > lo) {
        return domain(format!("bad integration range [{lo}, {hi}]"));
    }
    let mut cuts: Vec<f64> = vec![lo];
    cuts.extend(spec.split_points.iter().copied().filter(|&s| s > lo && s < hi));
    if hi.is_infinite() && *cuts.last().unwrap() <= 0.0 {
        cuts.push(1.0);
    }
    let mut panels = Vec::new();
    let mut bounds: Vec<(Map, f64, f64)> = cuts
        .windows(2)
        .map(|w| (Map::Identity, w[0], w[1]))
        .collect();
    let last = *cuts.last().unwrap();
    if hi.is_infinite() {
        bounds.push((Map::Reciprocal, 0.0, 1.0 / last));
    } else {
        bounds.push((Map::Identity, last, hi));
    }
    for (map, a, b) in bounds {
        let (value, error) = kronrod15(&g, map, a, b)?;
        panels.push(Panel {
            map,
            a,
            b,
            value,
            error,
        });
    }
    let initial = panels.len();

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        let used = panels.len() - initial;
        if error <= target || used >= spec.max_subdivisions {
            return Ok(IntegralResult {
                value,
                error_estimate: error,
                subdivisions_used: used,
                converged: error <= target,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (k, p)| if p.error > acc.1 { (k, p.error) } else { acc });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // panel cannot be split further in floating point
            return Ok(IntegralResult {
                value,
                error_estimate: error,
                subdivisions_used: used,
                converged: false,
            });
        }
        let (lv, le) = kronrod15(&g, p.map, p.a, mid)?;
        let (rv, re) = kronrod15(&g, p.map, mid, p.b)?;
        panels[worst] = Panel {
            b: mid,
            value: lv,
            error: le,
            ..p
        };
        panels.push(Panel {
            a: mid,
            value: rv,
            error: re,
            ..p
        });
    }
}

/// Composite midpoint rule with `points` nodes in total, spread evenly over
/// the same panels `integrate_radial` would use. Independent of the adaptive
/// path and used to cross-check it.
pub fn midpoint_radial(
    g: impl Fn(f64) -> f64 + Sync,
    lo: f64,
    hi: f64,
    splits: &[f64],
    points: usize,
) -> Result<f64> {
    use rayon::prelude::*;
    if !(lo.is_finite() && lo >= 0.0 && hi > lo) {
        return domain(format!("bad integration range [{lo}, {hi}]"));
    }
    let mut cuts: Vec<f64> = vec![lo];
    cuts.extend(splits.iter().copied().filter(|&s| s > lo && s < hi));
    if hi.is_infinite() && *cuts.last().unwrap() <= 0.0 {
        cuts.push(1.0);
    }
    let mut panels: Vec<(Map, f64, f64)> = cuts
        .windows(2)
        .map(|w| (Map::Identity, w[0], w[1]))
        .collect();
    let last = *cuts.last().unwrap();
    if hi.is_infinite() {
        panels.push((Map::Reciprocal, 0.0, 1.0 / last));
    } else {
        panels.push((Map::Identity, last, hi));
    }
    let per_panel = (points / panels.len()).max(1);
    let sums: Vec<f64> = panels
        .iter()
        .map(|&(map, a, b)| {
            let h = (b - a) / per_panel as f64;
            // fixed chunking keeps the summation order independent of threads
            const CHUNK: usize = 1 << 16;
            let chunks = per_panel.div_ceil(CHUNK);
            let partial: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    (c * CHUNK..((c + 1) * CHUNK).min(per_panel))
                        .map(|k| eval_mapped(&g, map, a + (k as f64 + 0.5) * h))
                        .sum::<f64>()
                })
                .collect();
            partial.into_iter().sum::<f64>()
                * h
        })
        .collect();
    Ok(sums.into_iter().sum())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        domain(format!("beta must be positive and finite, got {beta}"))
    }
}

/// `4 pi r^2 |exp(-beta V(r)) - 1|`, the radial integrand of `C(beta)`.
///
/// `exp_m1` keeps the deep core exact: for large positive `beta V` the
/// value is `1 - exp(-beta V)` without overflow.
pub fn c_beta_integrand(beta: f64, potential: PotentialSpec) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| {
        let v = potential.eval(r).unwrap_or(f64::NAN);
        4.0 * PI * r * r * mayer_from_energy(beta, v).abs()
    }
}

/// `C(beta) = int_{R^3} |exp(-beta V(|x|)) - 1| dx`.
pub fn c_beta(beta: f64, potential: &PotentialSpec, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_beta(beta)?;
    potential.validate()?;
    let spec = spec.clone().with_splits(potential.breakpoints());
    integrate_radial(c_beta_integrand(beta, *potential), 0.0, f64::INFINITY, &spec)
}

/// Radial integrand of `C~(beta)` for the split `V = (V - V_a) + V_a`:
/// `|exp(-beta (V - V_a)) - 1| + beta |V_a|`, times `4 pi r^2`.
pub fn tilde_c_integrand(beta: f64, a: f64) -> impl Fn(f64) -> f64 + Sync {
    let plateau = lj_eval(a).unwrap_or(f64::NAN);
    move |r: f64| {
        let v = lj_eval(r).unwrap_or(f64::NAN);
        let core = if r < a {
            mayer_from_energy(beta, v - plateau).abs() + beta * plateau.abs()
        } else {
            beta * v.abs()
        };
        4.0 * PI * r * r * core
    }
}

/// `C~(beta)` for the cut-off split at radius `a`.
pub fn tilde_c_beta(beta: f64, a: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_beta(beta)?;
    PotentialSpec::CutoffLj { a }.validate()?;
    let spec = spec.clone().with_splits(vec![a, LJ_ZERO, 1.0]);
    integrate_radial(tilde_c_integrand(beta, a), 0.0, f64::INFINITY, &spec)
}

/// `int_lo^inf |r^-12 - 2 r^-6| r^2 dr` in closed form.
pub fn lj_abs_moment(lo: f64) -> Result<f64> {
    if !(lo.is_finite() && lo > 0.0) {
        return domain(format!("lower limit must be positive, got {lo}"));
    }
    // antiderivative of (r^-12 - 2 r^-6) r^2
    let anti = |r: f64| -r.powi(-9) / 9.0 + 2.0 / 3.0 * r.powi(-3);
    Ok(if lo < LJ_ZERO {
        2.0 * anti(LJ_ZERO) - anti(lo)
    } else {
        anti(lo)
    })
}

/// `4 pi int_{2^(-1/6)}^inf |V(r)| r^2 dr = 16 sqrt(2) pi / 9`, a lower bound
/// for `C(1)`.
pub fn attractive_tail_closed_form() -> f64 {
    16.0 * 2f64.sqrt() * PI / 9.0
}

/// Closed-form upper bound on `C~(beta)`:
/// `(4/3) pi a^3 (1 + beta a^-12) + 4 pi beta int_a^inf |V| r^2 dr`.
pub fn tilde_c_overestimate(beta: f64, a: f64) -> Result<f64> {
    check_beta(beta)?;
    PotentialSpec::CutoffLj { a }.validate()?;
    Ok(4.0 / 3.0 * PI * a.powi(3) * (1.0 + beta * a.powi(-12))
        + 4.0 * PI * beta * lj_abs_moment(a)?)
}

/// Radial integrand of the overestimate, for checking the closed form.
pub fn tilde_c_overestimate_integrand(beta: f64, a: f64) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| {
        let core = if r < a {
            1.0 + beta * a.powi(-12)
        } else {
            beta * lj_eval(r).unwrap_or(f64::NAN).abs()
        };
        4.0 * PI * r * r * core
    }
}
