//! Pair potentials, the Mayer f-function and configuration energies.
//!
//! Reduced units throughout: the Lennard-Jones potential is
//! `V(r) = r^-12 - 2 r^-6`, with its minimum `-1` at `r = 1` and its zero at
//! `r = 2^(-1/6)`. Every evaluator rejects `r <= 0` and non-finite input
//! instead of returning infinities.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// `2^(-1/6)`, the zero of the Lennard-Jones potential.
pub const LJ_ZERO: f64 = 0.890_898_718_140_339_3;

/// A point in 3-space.
pub type Point = [f64; 3];

fn check_distance(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        domain(format!("distance must be finite and positive, got {r}"))
    }
}

/// Lennard-Jones energy `r^-12 - 2 r^-6`.
pub fn lj_eval(r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(lj_raw(r))
}

#[inline]
fn lj_raw(r: f64) -> f64 {
    let inv3 = 1.0 / (r * r * r);
    let s6 = inv3 * inv3;
    s6 * s6 - 2.0 * s6
}

#[inline]
fn lj_derivative_raw(r: f64) -> f64 {
    let inv3 = 1.0 / (r * r * r);
    let s6 = inv3 * inv3;
    (-12.0 * s6 * s6 + 12.0 * s6) / r
}

/// `dV/dr` for the Lennard-Jones potential.
pub fn lj_derivative(r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(lj_derivative_raw(r))
}

fn check_cutoff(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 && a < LJ_ZERO {
        Ok(())
    } else {
        domain(format!("cut-off radius must lie in (0, 2^(-1/6)), got {a}"))
    }
}

/// Lennard-Jones flattened to the constant `V(a)` on `(0, a]`.
pub fn cutoff_eval(r: f64, a: f64) -> Result<f64> {
    check_cutoff(a)?;
    check_distance(r)?;
    Ok(lj_raw(r.max(a)))
}

/// Constants of a Lennard-Jones-type potential.
///
/// The class is defined by `V(r) >= C1 / r^(3+eps)` for `r <= r0` and
/// `|V(r)| <= C2 / r^(3+eps)` for `r > r0`. The evaluator uses the two-branch
/// power law that saturates both inequalities; it is one admissible member of
/// the class, not the class itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LjTypeParams {
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub r0: f64,
}

impl LjTypeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.c1) && ok(self.c2) && ok(self.epsilon) && ok(self.r0) {
            Ok(())
        } else {
            domain(format!(
                "LJ-type constants must all be positive and finite: {self:?}"
            ))
        }
    }

    /// The density bound behind `c0` needs the tail to decay faster than
    /// `r^-4`, i.e. `epsilon > 1`.
    pub fn density_bound_applicable(&self) -> bool {
        self.epsilon > 1.0
    }

    /// Human-readable caveats for this parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.density_bound_applicable() {
            out.push(format!(
                "Prop. 3 inapplicable: epsilon = {} <= 1, the density constant c0 is not available",
                self.epsilon
            ));
        }
        out
    }

    fn exponent(&self) -> f64 {
        3.0 + self.epsilon
    }
}

/// Representative LJ-type energy: `C1 / r^(3+eps)` for `r <= r0`,
/// `-C2 / r^(3+eps)` beyond.
pub fn ljtype_eval(r: f64, params: &LjTypeParams) -> Result<f64> {
    params.validate()?;
    check_distance(r)?;
    Ok(ljtype_raw(r, params))
}

fn ljtype_raw(r: f64, p: &LjTypeParams) -> f64 {
    let tail = r.powf(-p.exponent());
    if r <= p.r0 {
        p.c1 * tail
    } else {
        -p.c2 * tail
    }
}

fn ljtype_derivative_raw(r: f64, p: &LjTypeParams) -> f64 {
    let k = p.exponent();
    let d = -k * r.powf(-k - 1.0);
    if r <= p.r0 {
        p.c1 * d
    } else {
        -p.c2 * d
    }
}

/// Which pair potential to use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Standard Lennard-Jones.
    Lj,
    /// Lennard-Jones with a plateau `V(a)` for `r <= a`.
    CutoffLj { a: f64 },
    /// Representative of the Lennard-Jones-type class.
    LjType(LjTypeParams),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Lj => Ok(()),
            PotentialSpec::CutoffLj { a } => check_cutoff(*a),
            PotentialSpec::LjType(p) => p.validate(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.validate()?;
        check_distance(r)?;
        Ok(self.eval_raw(r))
    }

    /// `dV/dr`. On the cut-off plateau this is zero; exactly at `r = a` the
    /// Lennard-Jones (right-hand) derivative is used.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.validate()?;
        check_distance(r)?;
        Ok(self.derivative_raw(r))
    }

    fn eval_raw(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Lj => lj_raw(r),
            PotentialSpec::CutoffLj { a } => lj_raw(r.max(*a)),
            PotentialSpec::LjType(p) => ljtype_raw(r, p),
        }
    }

    fn derivative_raw(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Lj => lj_derivative_raw(r),
            PotentialSpec::CutoffLj { a } => {
                if r < *a {
                    0.0
                } else {
                    lj_derivative_raw(r)
                }
            }
            PotentialSpec::LjType(p) => ljtype_derivative_raw(r, p),
        }
    }

    /// `-inf_r V(r)`, the depth of the attractive well.
    pub fn well_depth(&self) -> f64 {
        match self {
            PotentialSpec::Lj | PotentialSpec::CutoffLj { .. } => 1.0,
            PotentialSpec::LjType(p) => p.c2 * p.r0.powf(-p.exponent()),
        }
    }

    /// Radii where the potential (or its absolute value) has a kink or a
    /// sign change; quadratures split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::Lj => vec![LJ_ZERO, 1.0],
            PotentialSpec::CutoffLj { a } => vec![*a, LJ_ZERO, 1.0],
            PotentialSpec::LjType(p) => vec![p.r0],
        }
    }

    /// Energy and derivative of a pair at distance `r`, used on
    /// configurations. Coincident particles are allowed on the cut-off
    /// plateau (zero force) and rejected for singular potentials.
    fn pair_terms(&self, r: f64, i: usize, j: usize) -> Result<(f64, f64)> {
        if let PotentialSpec::CutoffLj { a } = self {
            if r < *a {
                return Ok((lj_raw(*a), 0.0));
            }
        }
        if r <= 0.0 {
            return Err(Error::Singularity(i, j));
        }
        if !r.is_finite() {
            return domain(format!("non-finite distance between {i} and {j}"));
        }
        Ok((self.eval_raw(r), self.derivative_raw(r)))
    }
}

/// Inverse temperature together with the potential entering the Mayer
/// f-function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MayerInput {
    pub beta: f64,
    pub potential: PotentialSpec,
}

impl MayerInput {
    pub fn new(beta: f64, potential: PotentialSpec) -> Result<Self> {
        let input = Self { beta, potential };
        input.validate()?;
        Ok(input)
    }

    /// `beta = 0` is accepted here (the f-function is then identically
    /// zero); integrals that need `beta > 0` check it themselves.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return domain(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        self.potential.validate()
    }
}

/// Mayer f-function `exp(-beta V(r)) - 1`.
pub fn mayer_f(r: f64, input: &MayerInput) -> Result<f64> {
    input.validate()?;
    let v = input.potential.eval(r)?;
    Ok(mayer_from_energy(input.beta, v))
}

#[inline]
pub(crate) fn mayer_from_energy(beta: f64, v: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    (-beta * v).exp_m1()
}

#[inline]
pub fn distance(x: &Point, y: &Point) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Total energy `sum_{i<j} V(|x_i - x_j|)`.
pub fn total_energy(positions: &[Point], potential: &PotentialSpec) -> Result<f64> {
    potential.validate()?;
    let mut u = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let r = distance(&positions[i], &positions[j]);
            u += potential.pair_terms(r, i, j)?.0;
        }
    }
    Ok(u)
}

/// Per-particle interaction sums `W(i) = sum_{j != i} V(|x_i - x_j|)`.
pub fn interaction_sums(positions: &[Point], potential: &PotentialSpec) -> Result<Vec<f64>> {
    potential.validate()?;
    let mut w = vec![0.0; positions.len()];
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let r = distance(&positions[i], &positions[j]);
            let v = potential.pair_terms(r, i, j)?.0;
            w[i] += v;
            w[j] += v;
        }
    }
    Ok(w)
}

/// Energy and its gradient with respect to every particle position.
pub fn energy_and_gradient(
    positions: &[Point],
    potential: &PotentialSpec,
) -> Result<(f64, Vec<Point>)> {
    potential.validate()?;
    let n = positions.len();
    let mut u = 0.0;
    let mut grad = vec![[0.0; 3]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = [
                positions[i][0] - positions[j][0],
                positions[i][1] - positions[j][1],
                positions[i][2] - positions[j][2],
            ];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let (v, dv) = potential.pair_terms(r, i, j)?;
            u += v;
            if dv != 0.0 {
                let s = dv / r;
                for k in 0..3 {
                    grad[i][k] += s * d[k];
                    grad[j][k] -= s * d[k];
                }
            }
        }
    }
    Ok((u, grad))
}

/// Analytic gradient of the total energy.
pub fn gradient(positions: &[Point], potential: &PotentialSpec) -> Result<Vec<Point>> {
    energy_and_gradient(positions, potential).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lj_reference_values() {
        assert_eq!(lj_eval(1.0).unwrap(), -1.0);
        assert!(lj_eval(LJ_ZERO).unwrap().abs() < 1e-14);
        assert_eq!(lj_eval(0.5).unwrap(), 3968.0);
        assert!(lj_eval(0.0).is_err());
        assert!(lj_eval(-1.0).is_err());
        assert!(lj_eval(f64::NAN).is_err());
        assert!(lj_eval(f64::INFINITY).is_err());
    }

    #[test]
    fn zero_constant_matches_power() {
        assert!((LJ_ZERO - 2f64.powf(-1.0 / 6.0)).abs() < 1e-16);
    }

    #[test]
    fn cutoff_plateau() {
        let a = 0.3637;
        let plateau = cutoff_eval(a, a).unwrap();
        assert_eq!(cutoff_eval(0.1, a).unwrap(), plateau);
        assert_eq!(cutoff_eval(1.0, a).unwrap(), -1.0);
        let closed = a.powi(-12) - 2.0 * a.powi(-6);
        assert!((plateau - closed).abs() / closed < 1e-14);
        // 185808.406421555215... from a 30-digit evaluation
        assert!((plateau - 185_808.406_421_555_2).abs() < 1e-8);
        assert!(cutoff_eval(0.5, 0.0).is_err());
        assert!(cutoff_eval(0.5, 0.9).is_err());
    }

    #[test]
    fn ljtype_branches() {
        let p = LjTypeParams {
            c1: 1.0,
            c2: 1.0,
            epsilon: 9.0,
            r0: 1.0,
        };
        assert_eq!(ljtype_eval(1.0, &p).unwrap(), 1.0);
        assert_eq!(ljtype_eval(2.0, &p).unwrap(), -(2f64.powi(-12)));
        assert!(p.warnings().is_empty());
        let soft = LjTypeParams { epsilon: 1.0, ..p };
        assert!(!soft.density_bound_applicable());
        assert!(soft.warnings()[0].contains("Prop. 3 inapplicable"));
        let bad = LjTypeParams { c1: -1.0, ..p };
        assert!(ljtype_eval(1.0, &bad).is_err());
    }

    #[test]
    fn mayer_reference_values() {
        let lj = MayerInput::new(1.0, PotentialSpec::Lj).unwrap();
        assert!((mayer_f(1.0, &lj).unwrap() - 1.718281828459045).abs() < 1e-12);
        let cold = MayerInput::new(0.0, PotentialSpec::Lj).unwrap();
        for r in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(mayer_f(r, &cold).unwrap(), 0.0);
        }
        // tail decays monotonically towards zero
        let mut prev = mayer_f(1.5, &lj).unwrap();
        for k in 1..50 {
            let cur = mayer_f(1.5 + k as f64, &lj).unwrap();
            assert!(cur > 0.0 && cur < prev);
            prev = cur;
        }
        assert!(prev < 1e-8);
        assert!(MayerInput::new(-1.0, PotentialSpec::Lj).is_err());
    }

    #[test]
    fn mayer_vanishes_at_potential_zero() {
        let lj = MayerInput::new(2.0, PotentialSpec::Lj).unwrap();
        assert!(mayer_f(LJ_ZERO, &lj).unwrap().abs() < 1e-13);
    }

    #[test]
    fn pair_gradient_signs() {
        let at_min = [[0.0; 3], [1.0, 0.0, 0.0]];
        let g = gradient(&at_min, &PotentialSpec::Lj).unwrap();
        assert!(g.iter().flatten().all(|x| x.abs() < 1e-12));

        let close = [[0.0; 3], [0.9, 0.0, 0.0]];
        let g = gradient(&close, &PotentialSpec::Lj).unwrap();
        // energy decreases when the pair separates: dU/dx1 > 0 at x1 = 0.9
        assert!(g[1][0] < 0.0 && g[0][0] > 0.0);
    }

    #[test]
    fn coincident_particles() {
        let p = [[0.0; 3], [0.0; 3]];
        assert_eq!(
            gradient(&p, &PotentialSpec::Lj),
            Err(Error::Singularity(0, 1))
        );
        let cut = PotentialSpec::CutoffLj { a: 0.3637 };
        let g = gradient(&p, &cut).unwrap();
        assert!(g.iter().flatten().all(|&x| x == 0.0));
        let u = total_energy(&p, &cut).unwrap();
        assert_eq!(u, cutoff_eval(0.3637, 0.3637).unwrap());
    }

    #[test]
    fn cutoff_kink_uses_lj_derivative() {
        let a = 0.4;
        let cut = PotentialSpec::CutoffLj { a };
        assert_eq!(cut.derivative(a).unwrap(), lj_derivative(a).unwrap());
        assert_eq!(cut.derivative(0.39).unwrap(), 0.0);
    }

    fn central_difference(positions: &[Point], pot: &PotentialSpec, h: f64) -> Vec<Point> {
        let mut out = vec![[0.0; 3]; positions.len()];
        for i in 0..positions.len() {
            for k in 0..3 {
                let mut plus = positions.to_vec();
                let mut minus = positions.to_vec();
                plus[i][k] += h;
                minus[i][k] -= h;
                out[i][k] = (total_energy(&plus, pot).unwrap()
                    - total_energy(&minus, pot).unwrap())
                    / (2.0 * h);
            }
        }
        out
    }

    fn relative_gap(a: &[Point], b: &[Point]) -> f64 {
        let diff: f64 = a
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = b.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        diff / norm.max(1e-300)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // five particles, all pairs in [0.8, 2.5]
        let pts = [
            [0.0, 0.0, 0.0],
            [1.05, 0.1, -0.2],
            [0.3, 0.95, 0.15],
            [0.55, 0.4, 0.9],
            [-0.7, 0.6, 0.5],
        ];
        for pot in [
            PotentialSpec::Lj,
            PotentialSpec::CutoffLj { a: 0.3637 },
            PotentialSpec::LjType(LjTypeParams {
                c1: 1.0,
                c2: 2.0,
                epsilon: 3.0,
                r0: 0.5,
            }),
        ] {
            let g = gradient(&pts, &pot).unwrap();
            let fd = central_difference(&pts, &pot, 1e-5);
            let gap = relative_gap(&g, &fd);
            assert!(gap < 1e-6, "{pot:?}: relative gap {gap:e}");
        }
    }

    proptest! {
        #[test]
        fn cutoff_never_exceeds_lj(r in 1e-3f64..5.0, a in 0.05f64..0.89) {
            let v = lj_eval(r).unwrap();
            let va = cutoff_eval(r, a).unwrap();
            prop_assert!(va <= v);
            if r >= a {
                prop_assert_eq!(va, v);
            } else {
                prop_assert!(va < v);
            }
        }

        #[test]
        fn lj_sign_and_floor(r in 1e-2f64..20.0) {
            let v = lj_eval(r).unwrap();
            prop_assert_eq!(v > 0.0, r < LJ_ZERO);
            prop_assert!(v >= -1.0);
        }

        #[test]
        fn mayer_bounded_below(r in 1e-2f64..20.0, beta in 0.0f64..5.0) {
            let input = MayerInput::new(beta, PotentialSpec::Lj).unwrap();
            prop_assert!(mayer_f(r, &input).unwrap() >= -1.0);
        }

        #[test]
        fn interaction_sums_double_energy(
            coords in proptest::collection::vec(-2.0f64..2.0, 18)
        ) {
            let pts: Vec<Point> = coords.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let pot = PotentialSpec::CutoffLj { a: 0.3637 };
            let u = total_energy(&pts, &pot).unwrap();
            let w: f64 = interaction_sums(&pts, &pot).unwrap().iter().sum();
            prop_assert!((w - 2.0 * u).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }
}
