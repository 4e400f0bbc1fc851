//! Low-order Mayer coefficients `C_n = (1/n!) int sum_{g connected} prod f`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graphs::enumerate_connected_graphs;
use super::worker_rng;
use crate::error::{domain, Result};
use crate::potentials::{distance, mayer_from_energy, MayerInput, Point, PotentialSpec};
use crate::quad::{c_beta, integrate_radial, QuadratureSpec};

/// Samples per Monte-Carlo batch; batch `k` uses random stream `k`.
const BATCH: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_CUTOFF_RADIUS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    ExactQuadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MayerCoefficientEstimate {
    pub order: u32,
    pub value: f64,
    /// One standard error; zero for quadrature.
    pub statistical_error: f64,
    /// Bound on what the method leaves out: the quadrature error estimate,
    /// or the contribution of points outside the sampling ball.
    pub truncation_error: f64,
    pub method: EstimateMethod,
    pub samples: usize,
}

impl MayerCoefficientEstimate {
    pub fn total_error(&self) -> f64 {
        self.statistical_error + self.truncation_error
    }
}

/// `C_2 = (1/2) 4 pi int_0^inf (exp(-beta V(r)) - 1) r^2 dr`.
pub fn c2_exact(
    beta: f64,
    potential: &PotentialSpec,
    spec: &QuadratureSpec,
) -> Result<MayerCoefficientEstimate> {
    if !(beta.is_finite() && beta > 0.0) {
        return domain(format!("beta must be positive and finite, got {beta}"));
    }
    potential.validate()?;
    let spec = spec.clone().with_splits(potential.breakpoints());
    let res = integrate_radial(c2_integrand(beta, *potential), 0.0, f64::INFINITY, &spec)?
        .require_converged()?
        .scaled(0.5);
    Ok(MayerCoefficientEstimate {
        order: 2,
        value: res.value,
        statistical_error: 0.0,
        truncation_error: res.error_estimate,
        method: EstimateMethod::ExactQuadrature,
        samples: 0,
    })
}

/// Signed radial integrand `4 pi r^2 f(r)` of `2 C_2`.
pub fn c2_integrand(beta: f64, potential: PotentialSpec) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| 4.0 * PI * r * r * pair_f(beta, &potential, r)
}

fn pair_f(beta: f64, potential: &PotentialSpec, r: f64) -> f64 {
    // a zero distance only happens on a measure-zero set; treat it as the
    // innermost representable radius
    let v = potential.eval(r.max(f64::MIN_POSITIVE)).unwrap_or(f64::NAN);
    mayer_from_energy(beta, v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub input: MayerInput,
    pub samples: usize,
    pub seed: u64,
    pub cutoff_radius: f64,
}

impl McParams {
    pub fn new(beta: f64, potential: PotentialSpec, samples: usize, seed: u64) -> Self {
        Self {
            input: MayerInput { beta, potential },
            samples,
            seed,
            cutoff_radius: DEFAULT_CUTOFF_RADIUS,
        }
    }
}

fn ball_point(rng: &mut impl Rng, radius: f64) -> Point {
    loop {
        let p = [
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            return [radius * p[0], radius * p[1], radius * p[2]];
        }
    }
}

/// `T(rho) = 4 pi int_rho^inf |f(r)| r^2 dr`.
fn tail_mass(input: &MayerInput, rho: f64) -> Result<f64> {
    let splits: Vec<f64> = input
        .potential
        .breakpoints()
        .into_iter()
        .filter(|&s| s > rho)
        .collect();
    let spec = QuadratureSpec::default().with_splits(splits);
    let beta = input.beta;
    let pot = input.potential;
    let res = integrate_radial(
        move |r| 4.0 * PI * r * r * pair_f(beta, &pot, r).abs(),
        rho,
        f64::INFINITY,
        &spec,
    )?
    .require_converged()?;
    Ok(res.value + res.error_estimate)
}

/// Bound on the part of `C_3` with `x_2` or `x_3` outside the ball of radius
/// `R` around `x_1 = 0`.
///
/// With `|f| <= M`, `C = int |f|` and `T` the tail mass, the region
/// `|x_2| > R` contributes at most `(2 + M) C T(R) + 2 C T(R/2)` to the
/// double integral: the last term covers `f_13 f_23`, where one of
/// `|x_3|`, `|x_2 - x_3|` exceeds `R/2`. The region `|x_3| > R` is the same
/// by symmetry, and the result carries the `1/3!`.
pub fn c3_truncation_bound(input: &MayerInput, radius: f64) -> Result<f64> {
    input.validate()?;
    if input.beta == 0.0 {
        return Ok(0.0);
    }
    let c = c_beta(input.beta, &input.potential, &QuadratureSpec::default())?.require_converged()?;
    let c = c.value + c.error_estimate;
    let m = (input.beta * input.potential.well_depth()).exp_m1().max(1.0);
    let one_side = (2.0 + m) * c * tail_mass(input, radius)? + 2.0 * c * tail_mass(input, radius / 2.0)?;
    Ok(2.0 * one_side / 6.0)
}

/// Monte-Carlo estimate of `C_3` with `x_1` pinned at the origin and
/// `x_2, x_3` uniform in the ball of radius `cutoff_radius`.
pub fn c3_monte_carlo(params: &McParams) -> Result<MayerCoefficientEstimate> {
    params.input.validate()?;
    if params.samples < MIN_SAMPLES {
        return domain(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            params.samples
        ));
    }
    let radius = params.cutoff_radius;
    if !(radius.is_finite() && radius > 0.0) {
        return domain(format!("cutoff radius must be positive, got {radius}"));
    }
    let graphs = enumerate_connected_graphs(3)?;
    let masks: Vec<Vec<usize>> = graphs
        .graphs
        .iter()
        .map(|&m| {
            graphs
                .edges(m)
                .map(|e| graphs.pairs.iter().position(|&p| p == e).expect("edge"))
                .collect()
        })
        .collect();
    let beta = params.input.beta;
    let pot = params.input.potential;

    let batches = params.samples.div_ceil(BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = worker_rng(params.seed, b as u64);
            let count = BATCH.min(params.samples - b * BATCH);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x2 = ball_point(&mut rng, radius);
                let x3 = ball_point(&mut rng, radius);
                let origin = [0.0; 3];
                // pair order matches `graphs.pairs`: (0,1), (0,2), (1,2)
                let f = [
                    pair_f(beta, &pot, distance(&origin, &x2)),
                    pair_f(beta, &pot, distance(&origin, &x3)),
                    pair_f(beta, &pot, distance(&x2, &x3)),
                ];
                let h: f64 = masks
                    .iter()
                    .map(|edges| edges.iter().map(|&k| f[k]).product::<f64>())
                    .sum();
                s += h;
                s2 += h * h;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .into_iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = params.samples as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let vol = 4.0 / 3.0 * PI * radius.powi(3);
    let scale = vol * vol / 6.0;
    Ok(MayerCoefficientEstimate {
        order: 3,
        value: scale * mean,
        statistical_error: scale * (var / n).sqrt(),
        truncation_error: c3_truncation_bound(&params.input, radius)?,
        method: EstimateMethod::MonteCarlo,
        samples: params.samples,
    })
}
