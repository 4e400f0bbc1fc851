//! Small-cluster energy minimisation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::worker_rng;
use crate::error::{domain, Error, Result};
use crate::potentials::{
    distance, energy_and_gradient, interaction_sums, total_energy, Point, PotentialSpec, LJ_ZERO,
};

/// Largest cluster the oracle will minimise.
pub const MAX_PARTICLES: usize = 13;

/// Minimum pair distance accepted when sampling starting points.
const START_SEPARATION: f64 = 0.5;
/// Largest single-particle displacement in one descent step.
const MAX_DISPLACEMENT: f64 = 0.1;

/// Particle positions with derived energy data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<Point>,
    pub energy: f64,
    /// `W(i) = sum_{j != i} V(|x_i - x_j|)`
    pub per_particle_w: Vec<f64>,
    pub rmin_emp: f64,
}

impl Configuration {
    pub fn evaluate(positions: Vec<Point>, potential: &PotentialSpec) -> Result<Self> {
        if positions.len() < 2 {
            return domain("a configuration needs at least two particles");
        }
        let energy = total_energy(&positions, potential)?;
        let per_particle_w = interaction_sums(&positions, potential)?;
        let mut rmin_emp = f64::INFINITY;
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                rmin_emp = rmin_emp.min(distance(&positions[i], &positions[j]));
            }
        }
        Ok(Self {
            positions,
            energy,
            per_particle_w,
            rmin_emp,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `(W+(i), W-(i))`: contributions from partners closer than `2^(-1/6)`
    /// and from the rest.
    pub fn split_w(&self, potential: &PotentialSpec) -> Result<Vec<(f64, f64)>> {
        let n = self.len();
        let mut out = vec![(0.0, 0.0); n];
        for i in 0..n {
            for j in i + 1..n {
                let r = distance(&self.positions[i], &self.positions[j]);
                let v = if r > 0.0 {
                    potential.eval(r)?
                } else {
                    total_energy(&[self.positions[i], self.positions[j]], potential)?
                };
                for k in [i, j] {
                    if r < LJ_ZERO {
                        out[k].0 += v;
                    } else {
                        out[k].1 += v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `max_i W+(i)`
    pub fn wplus_max(&self, potential: &PotentialSpec) -> Result<f64> {
        Ok(self
            .split_w(potential)?
            .iter()
            .map(|w| w.0)
            .fold(0.0, f64::max))
    }

    /// One `x y z` line per particle.
    pub fn to_xyz(&self) -> String {
        self.positions
            .iter()
            .map(|p| format!("{:.10} {:.10} {:.10}\n", p[0], p[1], p[2]))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeParams {
    pub n: usize,
    pub potential: PotentialSpec,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl MinimizeParams {
    pub fn new(n: usize, potential: PotentialSpec, starts: usize, seed: u64) -> Self {
        Self {
            n,
            potential,
            starts,
            seed,
            max_iters: 200_000,
            grad_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub best: Configuration,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Index of the start that produced `best`.
    pub best_start: usize,
    /// Final energy of every start, in start order.
    pub start_energies: Vec<f64>,
}

/// Result of one local descent.
#[derive(Clone, Debug, PartialEq)]
pub struct Descent {
    pub positions: Vec<Point>,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(g: &[Point]) -> f64 {
    g.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_row_norm(g: &[Point]) -> f64 {
    g.iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0, f64::max)
}

/// Gradient descent with backtracking.
///
/// A trial step `x - t g` is accepted when it satisfies the Armijo
/// condition. Once the energy decrease of a step drops below the rounding
/// level of the energy itself, a step is accepted instead when the energy
/// does not rise beyond that level and the gradient norm shrinks. Steps are
/// capped so no particle moves more than `0.1` at once.
pub fn local_descent(
    start: Vec<Point>,
    potential: &PotentialSpec,
    max_iters: usize,
    grad_tol: f64,
) -> Result<Descent> {
    let mut x = start;
    let (mut e, mut g) = energy_and_gradient(&x, potential)?;
    let mut t: f64 = 1e-3;
    let mut iterations = 0;
    let mut gn = norm(&g);
    while iterations < max_iters && gn >= grad_tol {
        iterations += 1;
        let cap = MAX_DISPLACEMENT / max_row_norm(&g).max(1e-300);
        let mut step = t.min(cap);
        let noise = 1e-12 * e.abs().max(1.0);
        let accepted = loop {
            let trial: Vec<Point> = x
                .iter()
                .zip(&g)
                .map(|(p, d)| [p[0] - step * d[0], p[1] - step * d[1], p[2] - step * d[2]])
                .collect();
            if let Ok((e_new, g_new)) = energy_and_gradient(&trial, potential) {
                let armijo = e_new <= e - 1e-4 * step * gn * gn;
                let flat = e_new <= e + noise && norm(&g_new) < gn;
                if armijo || flat {
                    break Some((trial, e_new, g_new));
                }
            }
            step *= 0.5;
            if step < 1e-30 {
                break None;
            }
        };
        let Some((trial, e_new, g_new)) = accepted else {
            break;
        };
        x = trial;
        e = e_new;
        g = g_new;
        gn = norm(&g);
        t = step * 1.5;
    }
    Ok(Descent {
        positions: x,
        energy: e,
        gradient_norm: gn,
        iterations,
        converged: gn < grad_tol,
    })
}

/// Uniform points in a cube of side `2 N^(1/3)`, rejecting any point closer
/// than `0.5` to an earlier one.
pub fn random_start(n: usize, rng: &mut impl Rng) -> Vec<Point> {
    let side = 2.0 * (n as f64).cbrt();
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [
            side * rng.random::<f64>(),
            side * rng.random::<f64>(),
            side * rng.random::<f64>(),
        ];
        if pts.iter().all(|q| distance(&p, q) >= START_SEPARATION) {
            pts.push(p);
        }
    }
    pts
}

fn check_particle_count(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("need at least 2 particles, got {n}"));
    }
    if n > MAX_PARTICLES {
        return Err(Error::Cap {
            what: "particle count",
            value: n,
            cap: MAX_PARTICLES,
        });
    }
    Ok(())
}

/// Multistart descent. Start `k` draws from stream `k` of the seed, so the
/// result does not depend on how starts are scheduled across threads.
pub fn minimize_energy(params: &MinimizeParams) -> Result<MinimizeOutcome> {
    check_particle_count(params.n)?;
    params.potential.validate()?;
    if params.starts == 0 {
        return domain("need at least one start");
    }
    let runs: Vec<Descent> = (0..params.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = worker_rng(params.seed, k as u64);
            let start = random_start(params.n, &mut rng);
            local_descent(start, &params.potential, params.max_iters, params.grad_tol)
        })
        .collect::<Result<_>>()?;
    let (best_start, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Descent)>, |acc, (k, d)| match acc {
            Some((_, b)) if b.energy <= d.energy => acc,
            _ => Some((k, d)),
        })
        .expect("at least one start");
    Ok(MinimizeOutcome {
        best: Configuration::evaluate(best.positions.clone(), &params.potential)?,
        gradient_norm: best.gradient_norm,
        converged: best.converged,
        best_start,
        start_energies: runs.iter().map(|d| d.energy).collect(),
    })
}

/// Perturbs the configuration by `step` along `trials` random directions and
/// reports whether none of them lowers the energy by more than `slack`.
pub fn probe_local_minimum(
    config: &Configuration,
    potential: &PotentialSpec,
    trials: usize,
    step: f64,
    slack: f64,
    seed: u64,
) -> Result<bool> {
    let mut rng = worker_rng(seed, u64::MAX);
    for _ in 0..trials {
        let dir: Vec<Point> = (0..config.len())
            .map(|_| {
                [
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                ]
            })
            .collect();
        let scale = step / norm(&dir);
        let moved: Vec<Point> = config
            .positions
            .iter()
            .zip(&dir)
            .map(|(p, d)| [p[0] + scale * d[0], p[1] + scale * d[1], p[2] + scale * d[2]])
            .collect();
        if total_energy(&moved, potential)? < config.energy - slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimisers have `W(i) < 0` for every particle: a particle with a
/// non-negative sum could be moved far away to lower the energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Check {
    pub per_particle: Vec<bool>,
    pub passed: bool,
}

pub fn check_prop1(config: &Configuration) -> Prop1Check {
    let per_particle: Vec<bool> = config.per_particle_w.iter().map(|&w| w < 0.0).collect();
    Prop1Check {
        passed: per_particle.iter().all(|&b| b),
        per_particle,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub n: usize,
    pub energy: f64,
    /// `-U_min / N`
    pub quotient: f64,
    pub rmin_emp: f64,
    pub gradient_norm: f64,
    pub prop1_passed: bool,
    /// `max_i W+(i) >= V(rmin_emp)`
    pub wplus_witness: bool,
    pub below_stability: bool,
    pub above_rmin_lower: bool,
}

/// Best-found minima for `N = 2..=n_max` with the stability quotient and
/// minimal distance compared against `stability_b` and `rmin_lower`.
pub fn empirical_stability(
    n_max: usize,
    potential: &PotentialSpec,
    starts: usize,
    seed: u64,
    stability_b: f64,
    rmin_lower: f64,
) -> Result<Vec<StabilityRow>> {
    check_particle_count(n_max)?;
    (2..=n_max)
        .map(|n| {
            let out = minimize_energy(&MinimizeParams::new(n, *potential, starts, seed))?;
            let c = &out.best;
            let quotient = -c.energy / n as f64;
            Ok(StabilityRow {
                n,
                energy: c.energy,
                quotient,
                rmin_emp: c.rmin_emp,
                gradient_norm: out.gradient_norm,
                prop1_passed: check_prop1(c).passed,
                wplus_witness: c.wplus_max(potential)? >= potential.eval(c.rmin_emp)?,
                below_stability: quotient <= stability_b,
                above_rmin_lower: c.rmin_emp >= rmin_lower,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimum(n: usize, starts: usize) -> MinimizeOutcome {
        minimize_energy(&MinimizeParams::new(n, PotentialSpec::Lj, starts, 0)).unwrap()
    }

    #[test]
    fn dimer_trimer_tetramer() {
        for (n, e) in [(2, -1.0), (3, -3.0), (4, -6.0)] {
            let out = minimum(n, 10);
            assert!(out.converged, "N = {n}: |g| = {:e}", out.gradient_norm);
            assert!((out.best.energy - e).abs() < 1e-6, "N = {n}: {}", out.best.energy);
            assert!((out.best.rmin_emp - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn prop1_on_small_minima() {
        let dimer = Configuration::evaluate(vec![[0.0; 3], [1.0, 0.0, 0.0]], &PotentialSpec::Lj)
            .unwrap();
        assert_eq!(dimer.per_particle_w, vec![-1.0, -1.0]);
        assert!(check_prop1(&dimer).passed);

        let tetra = minimum(4, 10).best;
        for w in &tetra.per_particle_w {
            assert!((w + 3.0).abs() < 1e-6);
        }
        assert!(check_prop1(&tetra).passed);
    }

    #[test]
    fn prop1_detects_non_minimum() {
        let squeezed = Configuration::evaluate(
            vec![[0.0; 3], [0.8, 0.0, 0.0], [5.0, 0.0, 0.0]],
            &PotentialSpec::Lj,
        )
        .unwrap();
        let check = check_prop1(&squeezed);
        assert!(!check.passed);
        assert!(!check.per_particle[0] && !check.per_particle[1]);
    }

    #[test]
    fn seven_particles_pass_prop1() {
        let out = minimum(7, 200);
        assert!(check_prop1(&out.best).passed);
        assert!(out.converged);
        // pentagonal bipyramid
        assert!((out.best.energy + 16.505384).abs() < 1e-5, "{}", out.best.energy);
    }

    #[test]
    fn found_minima_are_local_minima() {
        let pot = PotentialSpec::Lj;
        for n in [5, 6, 8] {
            let out = minimize_energy(&MinimizeParams::new(n, pot, 10, 3)).unwrap();
            assert!(out.gradient_norm < 1e-8);
            assert!(probe_local_minimum(&out.best, &pot, 50, 1e-4, 1e-8, 7).unwrap());
        }
    }

    #[test]
    fn w_decomposition() {
        let out = minimum(6, 10);
        let pot = PotentialSpec::Lj;
        let split = out.best.split_w(&pot).unwrap();
        for (i, (plus, minus)) in split.iter().enumerate() {
            assert!(*plus >= 0.0 && *minus <= 0.0);
            assert!((plus + minus - out.best.per_particle_w[i]).abs() < 1e-12);
        }
        let vr = pot.eval(out.best.rmin_emp).unwrap();
        assert!(out.best.wplus_max(&pot).unwrap() >= vr);
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = MinimizeParams::new(6, PotentialSpec::Lj, 8, 42);
        let a = minimize_energy(&p).unwrap();
        let b = minimize_energy(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn caps() {
        let err = minimize_energy(&MinimizeParams::new(14, PotentialSpec::Lj, 1, 0)).unwrap_err();
        assert!(matches!(err, Error::Cap { cap: 13, .. }));
        assert!(minimize_energy(&MinimizeParams::new(1, PotentialSpec::Lj, 1, 0)).is_err());
        assert!(minimize_energy(&MinimizeParams::new(3, PotentialSpec::Lj, 0, 0)).is_err());
    }

    #[test]
    fn starts_are_separated() {
        let mut rng = worker_rng(0, 0);
        let pts = random_start(13, &mut rng);
        let side = 2.0 * 13f64.cbrt();
        for (i, p) in pts.iter().enumerate() {
            assert!(p.iter().all(|&c| (0.0..side).contains(&c)));
            for q in &pts[i + 1..] {
                assert!(distance(p, q) >= 0.5);
            }
        }
    }

    #[test]
    fn xyz_lines() {
        let c = Configuration::evaluate(vec![[0.0; 3], [1.0, 0.0, 0.0]], &PotentialSpec::Lj)
            .unwrap();
        let text = c.to_xyz();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 3);
    }
}
