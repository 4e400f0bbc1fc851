//! Minimum-distance certificate for the cut-off Lennard-Jones potential.
//!
//! In a minimum-energy configuration every particle has a negative
//! interaction sum. Combined with the decay of the attractive tail this
//! forces a density `c0 * W+ / Vol(S_1)` around the particle carrying the
//! largest repulsive sum `W+`, with `c0 = 23/32`. Covering the ball of radius
//! 2 with `(4/ell)^3` cubes of side `ell` puts `ceil(c0 W+ / (4/ell)^3)`
//! particles into a single cube, and splitting that cube into eight
//! sub-cubes gives two geometric cases, each yielding `W+ <= bound(ell)`.
//! `F(ell)` is the larger of the two bounds. Since the shortest pair
//! distance `r_min` satisfies `V_a(r_min) <= W+ <= F(ell)`, solving
//! `V(r) = F(ell)` gives a certified lower bound on `r_min`; whenever that
//! bound exceeds `a` the cut-off is never felt by minimisers.
//!
//! Floating-point evaluations are backed by exact rational checks: all the
//! margins and bounds are rational functions of `ell`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::{self, int, powi, ratio};
use crate::potentials::{lj_eval, PotentialSpec, LJ_ZERO};

/// Density constant `c0 = 23/32`.
pub const DENSITY_CONSTANT: f64 = 23.0 / 32.0;

/// Largest cube side for which the first case margin is known positive.
pub const ELL_CAP: f64 = 0.4275;

pub const DEFAULT_A: f64 = 0.3637;
pub const DEFAULT_ELL: f64 = 0.42;

/// Published lower bound on the minimal pair distance of full
/// Lennard-Jones minimisers.
pub const FULL_LJ_RMIN: f64 = 0.67985;

/// `r_min` bound as stated in the theorem, and as obtained in its proof.
pub const RMIN_STATED: f64 = 0.44;
pub const RMIN_FROM_PROOF: f64 = 0.446;

/// Relative safety margin applied to strict inequalities in floating point.
pub const SAFETY: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT6: f64 = 2.449_489_742_783_178;

/// Number of cubes of side `ell` covering the ball of radius 2, `(4/ell)^3`.
pub fn covering_count(ell: f64) -> f64 {
    (4.0 / ell).powi(3)
}

/// Constants entering the cube-occupancy bound for a given cube side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSConstants {
    pub c0: f64,
    pub omega1: f64,
    pub tail_sum: TailSum,
}

impl LSConstants {
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return domain(format!("cube side must be positive, got {ell}"));
        }
        Ok(Self {
            c0: DENSITY_CONSTANT,
            omega1: covering_count(ell),
            tail_sum: lattice_tail_sum(4)?,
        })
    }
}

/// Enclosure of `sum_{n>=2} n^3 / (n-1)^6`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub terms: usize,
    pub partial: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `int_m^inf (u+1)^3 / u^6 du` with `m = x - 1`, in closed form.
fn tail_integral(m: f64) -> f64 {
    1.0 / (2.0 * m * m) + 1.0 / m.powi(3) + 3.0 / (4.0 * m.powi(4)) + 1.0 / (5.0 * m.powi(5))
}

/// Sums `n = 2..=terms` explicitly and encloses the rest between
/// `int_{terms+1}^inf` and `int_terms^inf` (the summand is decreasing).
pub fn lattice_tail_sum(terms: usize) -> Result<TailSum> {
    if terms < 4 {
        return domain(format!("need at least 4 explicit terms, got {terms}"));
    }
    let partial: f64 = (2..=terms)
        .map(|n| {
            let n = n as f64;
            n.powi(3) / (n - 1.0).powi(6)
        })
        .sum();
    let k = terms as f64;
    Ok(TailSum {
        terms,
        partial,
        lower: partial + tail_integral(k),
        upper: partial + tail_integral(k - 1.0),
    })
}

/// Exact rational upper bound of the lattice tail sum.
pub fn lattice_tail_sum_upper_exact(terms: usize) -> Result<BigRational> {
    if terms < 4 {
        return domain(format!("need at least 4 explicit terms, got {terms}"));
    }
    let mut sum = BigRational::zero();
    for n in 2..=terms as i64 {
        sum += ratio(n.pow(3), 1) / powi(&int(n - 1), 6);
    }
    let m = int(terms as i64 - 1);
    let tail = ratio(1, 2) * powi(&m, -2)
        + powi(&m, -3)
        + ratio(3, 4) * powi(&m, -4)
        + ratio(1, 5) * powi(&m, -5);
    Ok(sum + tail)
}

/// The two geometric cases for the densest cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Two opposite sub-cubes are occupied.
    One,
    /// All particles sit in at most four sub-cubes.
    Two,
}

impl Case {
    /// Coefficients `(p, q, s, t)` with margin `p ell^-9 - q ell^-3 - 1` and
    /// numerator `s ell^-12 - t ell^-6`.
    fn coefficients(self) -> [(i64, i64); 4] {
        match self {
            // 23/2^12 * (2^6+1)/3^6, 23/2^12 * 2/3, 2^6/3^6, 2^4/3^3
            Case::One => [
                (23 * 65, 4096 * 729),
                (23 * 2, 4096 * 3),
                (64, 729),
                (16, 27),
            ],
            // 23/2^6 * (6^5+2^5)/3^11, 23/2^6 * (3^2+1)/3^5, 2^12/3^6, 2^7/3^3
            Case::Two => [
                (23 * 7808, 64 * 177_147),
                (23 * 10, 64 * 243),
                (4096, 729),
                (128, 27),
            ],
        }
    }

    fn f64_coefficients(self) -> [f64; 4] {
        self.coefficients().map(|(n, d)| n as f64 / d as f64)
    }
}

/// Left-hand side of the positivity condition for `case`.
pub fn case_margin(case: Case, ell: f64) -> f64 {
    let [p, q, _, _] = case.f64_coefficients();
    let inv3 = ell.powi(-3);
    p * inv3 * inv3 * inv3 - q * inv3 - 1.0
}

pub fn case1_margin(ell: f64) -> f64 {
    case_margin(Case::One, ell)
}

pub fn case2_margin(ell: f64) -> f64 {
    case_margin(Case::Two, ell)
}

/// Exact value of the case margin at a rational cube side.
pub fn case_margin_exact(case: Case, ell: &BigRational) -> BigRational {
    let [(pn, pd), (qn, qd), _, _] = case.coefficients();
    let inv3 = powi(ell, -3);
    ratio(pn, pd) * powi(&inv3, 3) - ratio(qn, qd) * inv3 - int(1)
}

/// Exact value of the case bound at a rational cube side, `None` when the
/// margin is not positive.
pub fn case_bound_exact(case: Case, ell: &BigRational) -> Option<BigRational> {
    let margin = case_margin_exact(case, ell);
    if !margin.is_positive() {
        return None;
    }
    let [_, _, (sn, sd), (tn, td)] = case.coefficients();
    let inv6 = powi(ell, -6);
    let numer = ratio(sn, sd) * &inv6 * &inv6 - ratio(tn, td) * inv6;
    Some(numer / margin)
}

/// Upper bound on `W+` in the given case, valid while the margin is positive.
pub fn case_bound(case: Case, ell: f64) -> Result<f64> {
    if !(ell.is_finite() && ell > 0.0) {
        return domain(format!("cube side must be positive, got {ell}"));
    }
    let margin = case_margin(case, ell);
    if margin <= 0.0 {
        return domain(format!(
            "case {case:?} margin is non-positive at ell = {ell} ({margin:e}); ell is past the threshold"
        ));
    }
    let [_, _, s, t] = case.f64_coefficients();
    let inv6 = ell.powi(-6);
    Ok((s * inv6 * inv6 - t * inv6) / margin)
}

pub fn case1_bound(ell: f64) -> Result<f64> {
    case_bound(Case::One, ell)
}

pub fn case2_bound(ell: f64) -> Result<f64> {
    case_bound(Case::Two, ell)
}

/// `F(ell) = max(case1_bound, case2_bound)` on its admissible domain.
pub fn f_bound(ell: f64) -> Result<f64> {
    if !(ell.is_finite() && ell > 0.0) {
        return domain(format!("cube side must be positive, got {ell}"));
    }
    if SQRT3 * ell >= LJ_ZERO * (1.0 - SAFETY) {
        return domain(format!(
            "sqrt(3) * ell < 2^(-1/6) violated at ell = {ell}"
        ));
    }
    if case1_margin(ell) <= SAFETY {
        return domain(format!(
            "ell < ell_1 violated at ell = {ell} (case-1 margin {:e})",
            case1_margin(ell)
        ));
    }
    Ok(case1_bound(ell)?.max(case2_bound(ell)?))
}

/// Exact `F(ell)` at a rational cube side.
pub fn f_bound_exact(ell: &BigRational) -> Option<BigRational> {
    let one = case_bound_exact(Case::One, ell)?;
    let two = case_bound_exact(Case::Two, ell)?;
    Some(if one >= two { one } else { two })
}

/// The same two bounds written directly in terms of a pair potential, as in
/// the covering argument: case 1 uses `V(sqrt6 l/2)` and `V(sqrt3 l)`, case 2
/// uses `V(sqrt3 l/2)` and `3 V(3l/2)`. For Lennard-Jones (or its cut-off
/// with `a <= sqrt3 l/2`) this reproduces [`case_bound`]; for other
/// potentials it is the generalised pipeline with a caller-supplied `c0`.
pub fn covering_bounds(potential: &PotentialSpec, ell: f64, c0: f64) -> Result<[f64; 2]> {
    if let PotentialSpec::LjType(p) = potential {
        if !p.density_bound_applicable() {
            return domain(p.warnings().join("; "));
        }
    }
    let omega = covering_count(ell);
    let v = |r: f64| potential.eval(r);
    let near1 = v(SQRT6 * ell / 2.0)?;
    let far1 = v(SQRT3 * ell)?;
    let near2 = v(SQRT3 * ell / 2.0)?;
    let far2 = v(1.5 * ell)?;
    let m1 = c0 / (2.0 * omega) * (near1 + far1) - 1.0;
    let m2 = c0 / (4.0 * omega) * (near2 + 3.0 * far2) - 1.0;
    if m1 <= 0.0 || m2 <= 0.0 {
        return domain(format!(
            "covering margins not positive at ell = {ell}: ({m1:e}, {m2:e})"
        ));
    }
    Ok([near1 / m1, near2 / m2])
}

/// A bisection root of a case margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub case: Case,
    pub root: f64,
    /// Final bracket: margin positive at `lo`, non-positive at `hi`.
    pub lo: f64,
    pub hi: f64,
}

/// Bisection for the zero of the case margin on `[lo, hi]`.
pub fn find_threshold(case: Case, lo: f64, hi: f64, tol: f64) -> Result<Threshold> {
    let f = |x| case_margin(case, x);
    let (lo, hi) = bisect(f, lo, hi, tol)?;
    Ok(Threshold {
        case,
        root: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

/// Coarse scan (step `1e-3`) for a sign change of the case margin.
pub fn bracket_threshold(case: Case) -> Result<(f64, f64)> {
    let step = 1e-3;
    let mut x = 0.1;
    while x < 2.0 {
        if case_margin(case, x + step) <= 0.0 && case_margin(case, x) > 0.0 {
            return Ok((x, x + step));
        }
        x += step;
    }
    domain(format!("no sign change of the {case:?} margin on [0.1, 2]"))
}

/// Threshold `ell_1` or `ell_2` to absolute tolerance `1e-12`.
pub fn threshold(case: Case) -> Result<Threshold> {
    let (lo, hi) = bracket_threshold(case)?;
    find_threshold(case, lo, hi, 1e-12)
}

/// Bisection on a function positive at one end and non-positive at the
/// other. Returns the final bracket ordered as `(positive side, other side)`.
fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo > 0.0 && f_hi <= 0.0) {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    let (mut pos, mut neg) = (lo, hi);
    while (neg - pos).abs() > tol {
        let mid = 0.5 * (pos + neg);
        if mid == pos || mid == neg {
            break;
        }
        if f(mid) > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    Ok((pos, neg))
}

/// Which bound to minimise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundFn {
    Case1,
    Case2,
    F,
}

impl BoundFn {
    pub fn eval(self, ell: f64) -> Result<f64> {
        match self {
            BoundFn::Case1 => case1_bound(ell),
            BoundFn::Case2 => case2_bound(ell),
            BoundFn::F => f_bound(ell),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub ell: f64,
    pub value: f64,
}

/// Grid scan over `[lo, hi]` followed by golden-section refinement inside
/// the best cell. Points outside the function's domain count as `+inf`.
pub fn minimize_bound(
    target: BoundFn,
    lo: f64,
    hi: f64,
    grid_step: f64,
    tol: f64,
) -> Result<Minimum> {
    if !(lo < hi && grid_step > 0.0 && tol > 0.0) {
        return domain(format!(
            "bad minimisation interval [{lo}, {hi}] / step {grid_step} / tol {tol}"
        ));
    }
    let f = |x: f64| target.eval(x).unwrap_or(f64::INFINITY);
    let cells = ((hi - lo) / grid_step).ceil() as usize;
    let grid: Vec<f64> = (0..=cells)
        .map(|k| (lo + k as f64 * grid_step).min(hi))
        .collect();
    let (best, best_val) = grid
        .iter()
        .enumerate()
        .map(|(k, &x)| (k, f(x)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    if !best_val.is_finite() {
        return domain(format!(
            "{target:?} has no admissible point in [{lo}, {hi}]"
        ));
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (x, v) = golden_section(f, a, b, tol);
    Ok(if v <= best_val {
        Minimum { ell: x, value: v }
    } else {
        Minimum {
            ell: grid[best],
            value: best_val,
        }
    })
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Cube side and cut-off radius for one certificate run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub a: f64,
    pub ell: f64,
}

impl GridParams {
    /// Every violated hypothesis, described. Empty means admissible.
    pub fn violations(&self) -> Vec<String> {
        let GridParams { a, ell } = *self;
        let mut out = Vec::new();
        if !(a.is_finite() && a > 0.0 && a < LJ_ZERO) {
            out.push(format!("0 < a < 2^(-1/6) violated: a = {a}"));
        }
        if !(ell.is_finite() && ell > 0.0) {
            out.push(format!("ell > 0 violated: ell = {ell}"));
            return out;
        }
        if SQRT3 * ell >= LJ_ZERO * (1.0 - SAFETY) {
            out.push(format!(
                "sqrt(3)*ell < 2^(-1/6) violated: {:.4} >= {:.4}",
                SQRT3 * ell,
                LJ_ZERO
            ));
        }
        if a > SQRT3 / 2.0 * ell {
            out.push(format!(
                "a <= (sqrt(3)/2)*ell violated: {a} > {:.6}",
                SQRT3 / 2.0 * ell
            ));
        }
        if ell > ELL_CAP {
            out.push(format!("ell <= {ELL_CAP} violated: ell = {ell}"));
        }
        out
    }

    /// The same hypotheses decided exactly at the rational values of
    /// `a` and `ell`.
    pub fn violations_exact(a: &BigRational, ell: &BigRational) -> Vec<String> {
        let mut out = Vec::new();
        let half = ratio(1, 2);
        if !(a.is_positive() && int(2) * powi(a, 6) < int(1)) {
            out.push("0 < a < 2^(-1/6) fails exactly".to_string());
        }
        if !ell.is_positive() {
            out.push("ell > 0 fails exactly".to_string());
            return out;
        }
        // sqrt3 ell < 2^(-1/6)  <=>  27 ell^6 < 1/2
        if int(27) * powi(ell, 6) >= half {
            out.push("sqrt(3)*ell < 2^(-1/6) fails exactly".to_string());
        }
        // a <= sqrt3/2 ell  <=>  4 a^2 <= 3 ell^2
        if int(4) * powi(a, 2) > int(3) * powi(ell, 2) {
            out.push("a <= (sqrt(3)/2)*ell fails exactly".to_string());
        }
        if *ell > ratio(4275, 10000) {
            out.push("ell <= 0.4275 fails exactly".to_string());
        }
        for case in [Case::One, Case::Two] {
            if !case_margin_exact(case, ell).is_positive() {
                out.push(format!("{case:?} margin > 0 fails exactly"));
            }
        }
        out
    }
}

/// Outcome of one certificate run for `(a, ell)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSCertificate {
    pub a: f64,
    pub ell: f64,
    pub margin_case1: f64,
    pub margin_case2: f64,
    /// `F(ell)`, an upper bound on `W+` at any minimiser.
    pub wplus_bound: f64,
    /// Plateau height `V(a)`.
    pub plateau: f64,
    /// Certified lower bound on the minimal pair distance.
    pub rmin_lower: f64,
    /// The hypotheses, the plateau comparison and `V(rmin_lower) >= F(ell)`
    /// re-checked in exact rational arithmetic.
    pub exact_checks_passed: bool,
    pub valid: bool,
    pub failure_reason: Option<String>,
}

impl LSCertificate {
    fn invalid(a: f64, ell: f64, reason: String) -> Self {
        LSCertificate {
            a,
            ell,
            margin_case1: case1_margin(ell),
            margin_case2: case2_margin(ell),
            wplus_bound: f64::NAN,
            plateau: lj_eval(a).unwrap_or(f64::NAN),
            rmin_lower: f64::NAN,
            exact_checks_passed: false,
            valid: false,
            failure_reason: Some(reason),
        }
    }
}

/// Runs the minimum-distance certificate.
///
/// With `W = F(ell)`, any minimiser has `V_a(r_min) <= W`. If `W` lies below
/// the plateau `V(a)`, then `r_min > a` and `V(r_min) <= W`, so `r_min` is at
/// least the root of `V(r) = W` on `(a, 2^(-1/6))`, where `V` is strictly
/// decreasing. The root is bracketed by bisection to `1e-10` and the lower
/// end of the bracket is reported.
pub fn rmin_certificate(a: f64, ell: f64) -> LSCertificate {
    let violations = GridParams { a, ell }.violations();
    if !violations.is_empty() {
        return LSCertificate::invalid(a, ell, violations.join("; "));
    }
    let wplus = match f_bound(ell) {
        Ok(w) => w,
        Err(e) => return LSCertificate::invalid(a, ell, e.to_string()),
    };
    let plateau = lj_eval(a).expect("a validated");
    if wplus >= plateau {
        let mut cert = LSCertificate::invalid(
            a,
            ell,
            format!("F(ell) = {wplus:.6e} is not below the plateau V(a) = {plateau:.6e}"),
        );
        cert.wplus_bound = wplus;
        return cert;
    }
    let level = |r: f64| lj_eval(r).expect("r > 0") - wplus;
    let (lo, _) = bisect(level, a, LJ_ZERO, 1e-10).expect("V(a) > W > 0 = V(2^(-1/6))");
    let exact_ok = exact_rmin_checks(a, ell, lo);
    let mut reasons = Vec::new();
    if lo <= a * (1.0 + SAFETY) {
        reasons.push(format!("rmin_lower = {lo} does not exceed a = {a}"));
    }
    if !exact_ok {
        reasons.push("exact rational re-check failed".to_string());
    }
    LSCertificate {
        a,
        ell,
        margin_case1: case1_margin(ell),
        margin_case2: case2_margin(ell),
        wplus_bound: wplus,
        plateau,
        rmin_lower: lo,
        exact_checks_passed: exact_ok,
        valid: reasons.is_empty(),
        failure_reason: if reasons.is_empty() {
            None
        } else {
            Some(reasons.join("; "))
        },
    }
}

fn lj_exact(r: &BigRational) -> BigRational {
    let inv6 = powi(r, -6);
    &inv6 * &inv6 - int(2) * inv6
}

/// Exact re-check at the binary values of `a`, `ell` and `r_lower`.
fn exact_rmin_checks(a: f64, ell: f64, r_lower: f64) -> bool {
    let (Ok(a), Ok(ell), Ok(r)) = (
        exact::from_f64(a),
        exact::from_f64(ell),
        exact::from_f64(r_lower),
    ) else {
        return false;
    };
    if !GridParams::violations_exact(&a, &ell).is_empty() {
        return false;
    }
    let Some(w) = f_bound_exact(&ell) else {
        return false;
    };
    w < lj_exact(&a) && r > a && lj_exact(&r) >= w
}

/// One direction of the argument that the cut-off does not change the set of
/// minimisers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Record {
    pub certificate: LSCertificate,
    /// Lower bound on `r_min` for the full potential that is taken as input.
    pub full_lj_rmin: f64,
    pub checks: Vec<LemmaCheck>,
    /// True when both directions hold, so the cut-off potential has the same
    /// stability constant as full Lennard-Jones.
    pub certified: bool,
}

/// Certificate plus both directions of the minimiser-equivalence argument,
/// using the published full-potential bound `0.67985`.
pub fn verify_lemma1(a: f64, ell: f64) -> Lemma1Record {
    verify_lemma1_with(a, ell, FULL_LJ_RMIN)
}

pub fn verify_lemma1_with(a: f64, ell: f64, full_lj_rmin: f64) -> Lemma1Record {
    let certificate = rmin_certificate(a, ell);
    let forward = certificate.valid && certificate.rmin_lower > a;
    let backward = full_lj_rmin > a;
    let checks = vec![
        LemmaCheck {
            statement: format!(
                "cut-off minimisers keep r_min >= {:.6} > a = {a}, where V_a = V; they minimise V as well",
                certificate.rmin_lower
            ),
            holds: forward,
        },
        LemmaCheck {
            statement: format!(
                "full-potential minimisers keep r_min >= {full_lj_rmin} > a = {a}; they minimise V_a as well"
            ),
            holds: backward,
        },
    ];
    Lemma1Record {
        certified: forward && backward,
        certificate,
        full_lj_rmin,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::decimal;
    use proptest::prelude::*;

    #[test]
    fn tail_sum_bounds() {
        let coarse = lattice_tail_sum(4).unwrap();
        assert!(coarse.upper < 9.0);
        let fine = lattice_tail_sum(1_000_000).unwrap();
        assert!(fine.lower <= fine.upper);
        assert!((fine.upper - 8.5771529).abs() < 1e-6);
        assert!(coarse.lower <= fine.lower && fine.upper <= coarse.upper);
        assert!(lattice_tail_sum(3).is_err());
        let exact = lattice_tail_sum_upper_exact(4).unwrap();
        assert!(exact < int(9));
        assert!((exact::to_f64(&exact) - coarse.upper).abs() < 1e-12);
    }

    #[test]
    fn first_term_of_tail_sum_is_eight() {
        let s = lattice_tail_sum(4).unwrap();
        let rest = 27.0 / 64.0 + 64.0 / 729.0;
        assert!((s.partial - 8.0 - rest).abs() < 1e-14);
    }

    #[test]
    fn margins_reduce_from_covering_form() {
        // closed-form margins agree with the potential-level expressions
        for ell in [0.2, 0.3, 0.36, 0.42] {
            let [b1, b2] = covering_bounds(&PotentialSpec::Lj, ell, DENSITY_CONSTANT).unwrap();
            let c1 = case1_bound(ell).unwrap();
            let c2 = case2_bound(ell).unwrap();
            assert!((b1 - c1).abs() < 1e-10 * c1, "{ell}: {b1} vs {c1}");
            assert!((b2 - c2).abs() < 1e-10 * c2, "{ell}: {b2} vs {c2}");
            let cut = PotentialSpec::CutoffLj {
                a: SQRT3 / 2.0 * ell,
            };
            let [k1, _] = covering_bounds(&cut, ell, DENSITY_CONSTANT).unwrap();
            assert!((k1 - c1).abs() < 1e-10 * c1);
        }
    }

    #[test]
    fn ljtype_generalisation_gatekeeps_epsilon() {
        use crate::potentials::LjTypeParams;
        let soft = PotentialSpec::LjType(LjTypeParams {
            c1: 1.0,
            c2: 1.0,
            epsilon: 0.5,
            r0: 1.0,
        });
        let err = covering_bounds(&soft, 0.3, DENSITY_CONSTANT).unwrap_err();
        assert!(err.to_string().contains("Prop. 3 inapplicable"));
        let hard = PotentialSpec::LjType(LjTypeParams {
            c1: 1.0,
            c2: 1.0,
            epsilon: 9.0,
            r0: 1.0,
        });
        let [b1, b2] = covering_bounds(&hard, 0.3, DENSITY_CONSTANT).unwrap();
        assert!(b1 > 0.0 && b2 > 0.0);
    }

    #[test]
    fn case1_threshold() {
        assert!(case1_margin(0.4275) > 0.0);
        assert!(case1_margin(1e-3) > 1e20);
        let exact = case_margin_exact(Case::One, &decimal("0.4275").unwrap());
        assert!(exact.is_positive());
        let t = threshold(Case::One).unwrap();
        assert!(t.root > 0.4275 && t.root < 0.45);
        assert!(t.hi - t.lo <= 1e-12);
        assert!(case1_margin(t.lo) > 0.0 && case1_margin(t.hi) <= 0.0);
    }

    #[test]
    fn case2_threshold() {
        assert!(case2_margin(0.6268) >= 0.0);
        assert!(case2_margin(1e-3) > 1e20);
        let t = threshold(Case::Two).unwrap();
        assert!(t.root > 0.6268 && t.root < 0.66);
        assert!(case2_margin(t.root).abs() < 1e-9);
    }

    #[test]
    fn threshold_without_sign_change() {
        let err = find_threshold(Case::One, 0.1, 0.2, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Bracketing { .. }));
    }

    #[test]
    fn threshold_roots_agree_with_exact_signs() {
        for case in [Case::One, Case::Two] {
            let t = threshold(case).unwrap();
            let lo = exact::from_f64(t.lo).unwrap();
            let hi = exact::from_f64(t.hi).unwrap();
            assert!(case_margin_exact(case, &lo).is_positive());
            assert!(!case_margin_exact(case, &hi).is_positive());
        }
    }

    #[test]
    fn case_bounds_blow_up_at_domain_ends() {
        let l1 = threshold(Case::One).unwrap().lo;
        let l2 = threshold(Case::Two).unwrap().lo;
        assert!(case1_bound(l1 - 1e-9).unwrap() > 1e8);
        assert!(case2_bound(l2 - 1e-9).unwrap() > 1e8);
        assert!(case1_bound(0.01).unwrap() > 1e8);
        assert!(case2_bound(0.01).unwrap() > 1e8);
        assert!(case1_bound(0.43).is_err());
        assert!(case2_bound(0.63).is_err());
    }

    #[test]
    fn case_minima() {
        let m1 = minimize_bound(BoundFn::Case1, 0.2, 0.4275, 1e-4, 1e-10).unwrap();
        assert!((m1.ell - 0.3672).abs() < 1e-3 && m1.ell > 0.3672);
        assert!(m1.value <= 4712.0 && m1.value > 4712.0 * 0.99);
        let m2 = minimize_bound(BoundFn::Case2, 0.3, 0.6268, 1e-4, 1e-10).unwrap();
        assert!((m2.ell - 0.5385).abs() < 1e-3 && m2.ell > 0.5385);
        assert!(m2.value <= 3020.0 && m2.value > 3020.0 * 0.99);
        for m in [m1] {
            assert!(m.value <= case1_bound(0.2).unwrap());
            assert!(m.value <= case1_bound(0.4275).unwrap());
        }
    }

    #[test]
    fn f_at_default_ell() {
        let f = f_bound(0.42).unwrap();
        assert!(f < 15545.0 && f > 14000.0);
        assert!(f >= case1_bound(0.42).unwrap());
        assert!(f >= case2_bound(0.42).unwrap());
        assert!(case2_bound(0.42).unwrap().is_finite());
        let exact = f_bound_exact(&decimal("0.42").unwrap()).unwrap();
        assert!(exact < int(15545));
        assert!((exact::to_f64(&exact) - f).abs() < 1e-9 * f);
    }

    #[test]
    fn f_domain_errors_name_the_condition() {
        let e = f_bound(0.43).unwrap_err().to_string();
        assert!(e.contains("ell_1"), "{e}");
        let e = f_bound(0.6).unwrap_err().to_string();
        assert!(e.contains("sqrt(3)"), "{e}");
        assert!(f_bound(0.0).is_err());
    }

    #[test]
    fn f_has_interior_minimum() {
        let l1 = threshold(Case::One).unwrap().lo;
        let m = minimize_bound(BoundFn::F, 0.2, l1, 1e-4, 1e-10).unwrap();
        assert!(m.ell > 0.2 + 1e-3 && m.ell < l1 - 1e-3);
        assert!(m.value < f_bound(0.2).unwrap());
        assert!(m.value < f_bound(l1 - 1e-6).unwrap());
    }

    #[test]
    fn default_certificate() {
        let cert = rmin_certificate(DEFAULT_A, DEFAULT_ELL);
        assert!(cert.valid, "{:?}", cert.failure_reason);
        assert!(cert.exact_checks_passed);
        assert!(cert.rmin_lower >= RMIN_FROM_PROOF);
        assert!(cert.rmin_lower > cert.a);
        assert!(cert.rmin_lower < LJ_ZERO);
        assert!(lj_eval(cert.rmin_lower).unwrap() >= cert.wplus_bound);
        assert!(DEFAULT_A <= SQRT3 / 2.0 * DEFAULT_ELL);
        assert!((SQRT3 / 2.0 * DEFAULT_ELL - DEFAULT_A).abs() < 5e-5);
    }

    #[test]
    fn level_crossing_near_pure_repulsion() {
        // V(r) = 15545 sits where the r^-12 term dominates
        let (lo, hi) = bisect(|r| lj_eval(r).unwrap() - 15545.0, 0.3, LJ_ZERO, 1e-12).unwrap();
        let approx = 15545f64.powf(-1.0 / 12.0);
        assert!((lo - 0.4474).abs() < 1e-3);
        assert!((lo - approx).abs() < 2e-3);
        assert!(hi - lo <= 1e-12);
    }

    #[test]
    fn lemma_records() {
        let ok = verify_lemma1(0.3637, 0.42);
        assert!(ok.certified);
        assert_eq!(ok.checks.len(), 2);
        assert!(ok.checks.iter().all(|c| c.holds));

        let big_a = verify_lemma1(0.5, 0.42);
        assert!(!big_a.certified);
        assert!(big_a
            .certificate
            .failure_reason
            .as_deref()
            .unwrap()
            .contains("a <= (sqrt(3)/2)*ell"));

        let big_ell = verify_lemma1(0.3637, 0.52);
        assert!(!big_ell.certified);
        assert!(big_ell
            .certificate
            .failure_reason
            .as_deref()
            .unwrap()
            .contains("sqrt(3)*ell < 2^(-1/6)"));

        let weak_full = verify_lemma1_with(0.3637, 0.42, 0.3);
        assert!(!weak_full.certified && weak_full.certificate.valid);
    }

    #[test]
    fn exact_grid_checks() {
        let a = decimal("0.3637").unwrap();
        let ell = decimal("0.42").unwrap();
        assert!(GridParams::violations_exact(&a, &ell).is_empty());
        let v = GridParams::violations_exact(&decimal("0.5").unwrap(), &ell);
        assert_eq!(v.len(), 1);
        let v = GridParams::violations_exact(&a, &decimal("0.52").unwrap());
        assert!(v.iter().any(|s| s.contains("sqrt(3)")));
    }

    #[test]
    fn certificate_with_tiny_a() {
        let cert = rmin_certificate(0.05, 0.42);
        assert!(cert.valid);
        let reference = rmin_certificate(0.3637, 0.42);
        assert!((cert.rmin_lower - reference.rmin_lower).abs() < 2e-10);
    }

    #[test]
    fn constants() {
        let c = LSConstants::new(0.42).unwrap();
        assert_eq!(c.c0, 23.0 / 32.0);
        assert!(c.c0 > 0.0 && c.c0 < 1.0);
        assert!((c.omega1 - (4.0f64 / 0.42).powi(3)).abs() < 1e-9);
        assert!(c.tail_sum.upper < 9.0);
    }

    proptest! {
        #[test]
        // the margins turn around near ell = 0.859 (case 1) and 1.215 (case 2)
        fn margins_strictly_decreasing(x in 0.05f64..0.6, dx in 1e-4f64..0.25) {
            prop_assert!(case1_margin(x + dx) < case1_margin(x));
            prop_assert!(case2_margin(x + dx) < case2_margin(x));
        }

        #[test]
        fn f_positive_on_domain(ell in 0.05f64..0.4275) {
            prop_assert!(f_bound(ell).unwrap() > 0.0);
        }

        #[test]
        fn certificates_stay_in_range(ell in 0.3f64..0.4275, frac in 0.05f64..1.0) {
            let a = frac * SQRT3 / 2.0 * ell;
            let cert = rmin_certificate(a, ell);
            if cert.valid {
                prop_assert!(cert.rmin_lower > a);
                prop_assert!(cert.rmin_lower < LJ_ZERO);
            }
        }

        #[test]
        fn smaller_a_keeps_validity(ell in 0.3f64..0.4275, frac in 0.05f64..1.0, shrink in 0.0f64..1.0) {
            let a = frac * SQRT3 / 2.0 * ell;
            if rmin_certificate(a, ell).valid {
                prop_assert!(rmin_certificate(a * shrink.max(1e-3), ell).valid);
            }
        }
    }
}
