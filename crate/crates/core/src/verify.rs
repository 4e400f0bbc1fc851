//! Run configuration, the full check suite and its report.

use std::f64::consts::PI;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::{self, decimal};
use crate::lsbound::{
    self, case_margin_exact, f_bound, minimize_bound, threshold, verify_lemma1_with, BoundFn, Case,
    Lemma1Record, DEFAULT_A, DEFAULT_ELL, FULL_LJ_RMIN, RMIN_FROM_PROOF,
};
use crate::oracle::{
    c2_exact, c3_monte_carlo, empirical_stability, enumerate_connected_graphs,
    MayerCoefficientEstimate, McParams, StabilityRow,
};
use crate::potentials::{cutoff_eval, energy_and_gradient, lj_eval, Point, PotentialSpec, LJ_ZERO};
use crate::quad::{
    attractive_tail_closed_form, c_beta, c_beta_integrand, integrate_radial, lj_abs_moment,
    midpoint_radial, tilde_c_beta, tilde_c_overestimate, tilde_c_overestimate_integrand,
    IntegralResult, QuadratureSpec,
};
use crate::radius::{
    a_grid, certify_conservative_ratio, coefficient_bound, optimize_radius, radius_report,
    BoundInputs, EllPolicy, RadiusReport, RatioCertificate, SweepRow, Variant, C_LOWER,
    C_TILDE_UPPER, RATIO_DIVISOR, RATIO_EXPONENT, STABILITY_B,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub beta: f64,
    pub a: f64,
    pub ell: f64,
    pub stability_b: f64,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Monte-Carlo samples for `C_3`.
    pub mc_samples: usize,
    /// Multistart count per cluster size.
    pub starts: usize,
    /// Largest cluster size for the minimisation oracle.
    pub n_max: usize,
    pub json: Option<String>,
    pub csv: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            a: DEFAULT_A,
            ell: DEFAULT_ELL,
            stability_b: STABILITY_B,
            seed: 0,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_subdivisions: 5000,
            mc_samples: 10_000_000,
            starts: 30,
            n_max: 13,
            json: None,
            csv: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .or_else(|_| domain(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    /// Sets one field from its textual form. Accepts the flag spelling
    /// (`stability`) as well as the field name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "beta" => self.beta = parse_num(key, value)?,
            "a" => self.a = parse_num(key, value)?,
            "ell" => self.ell = parse_num(key, value)?,
            "stability" | "stability_b" => self.stability_b = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "abs_tol" => self.abs_tol = parse_num(key, value)?,
            "rel_tol" => self.rel_tol = parse_num(key, value)?,
            "max_subdivisions" => self.max_subdivisions = parse_num(key, value)?,
            "mc_samples" | "samples" => self.mc_samples = parse_num(key, value)?,
            "starts" => self.starts = parse_num(key, value)?,
            "n_max" => self.n_max = parse_num(key, value)?,
            "json" => self.json = Some(value.to_string()),
            "csv" => self.csv = Some(value.to_string()),
            other => return domain(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return domain(format!("line {}: expected `key = value`, got {line:?}", k + 1));
            };
            let value = value.trim().trim_matches('"');
            self.set(key, value)
                .map_err(|e| Error::Domain(format!("line {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    /// Rejects values no computation could use. A cut-off radius that is
    /// admissible but fails the certificate is left to the checks.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return domain(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.a.is_finite() && self.a > 0.0 && self.a < LJ_ZERO) {
            return domain(format!("a must lie in (0, 2^(-1/6)), got {}", self.a));
        }
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return domain(format!("ell must be positive, got {}", self.ell));
        }
        if !(self.stability_b.is_finite() && self.stability_b >= 0.0) {
            return domain(format!("stability constant must be >= 0, got {}", self.stability_b));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions > 0) {
            return domain("quadrature tolerances and subdivision cap must be positive");
        }
        if self.mc_samples < crate::oracle::mayer::MIN_SAMPLES {
            return domain(format!(
                "mc_samples must be at least {}, got {}",
                crate::oracle::mayer::MIN_SAMPLES,
                self.mc_samples
            ));
        }
        if self.starts == 0 {
            return domain("starts must be at least 1");
        }
        if !(2..=crate::oracle::cluster::MAX_PARTICLES).contains(&self.n_max) {
            return Err(Error::Cap {
                what: "n_max",
                value: self.n_max,
                cap: crate::oracle::cluster::MAX_PARTICLES,
            });
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            split_points: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A value quoted in the source analysis.
    Paper,
    /// A value produced by an independent computation.
    Derived,
    /// Follows directly from the definitions.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation {
    /// `|computed - expected| <= tolerance` (relative when `relative`).
    Approx { relative: bool },
    AtMost,
    AtLeast,
    Below,
    Above,
    /// Open interval `(expected, upper)`.
    Between { upper: f64 },
    /// A boolean predicate; `computed` is 1 when it holds.
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub criterion: u32,
    pub description: String,
    pub relation: Relation,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub passed: bool,
}

impl Check {
    pub fn new(
        criterion: u32,
        id: &str,
        description: impl Into<String>,
        relation: Relation,
        expected: f64,
        computed: f64,
        tolerance: f64,
        provenance: Provenance,
    ) -> Self {
        let passed = match relation {
            Relation::Approx { relative } => {
                let scale = if relative { expected.abs() } else { 1.0 };
                (computed - expected).abs() <= tolerance * scale
            }
            Relation::AtMost => computed <= expected + tolerance,
            Relation::AtLeast => computed >= expected - tolerance,
            Relation::Below => computed < expected,
            Relation::Above => computed > expected,
            Relation::Between { upper } => computed > expected && computed < upper,
            Relation::Holds => computed == 1.0,
        };
        Self {
            id: id.to_string(),
            criterion,
            description: description.into(),
            relation,
            expected,
            computed,
            tolerance,
            provenance,
            passed,
        }
    }

    pub fn holds(criterion: u32, id: &str, description: impl Into<String>, holds: bool, provenance: Provenance) -> Self {
        Self::new(
            criterion,
            id,
            description,
            Relation::Holds,
            1.0,
            if holds { 1.0 } else { 0.0 },
            0.0,
            provenance,
        )
    }

    pub fn summary(&self) -> String {
        let rel = match self.relation {
            Relation::Approx { relative } => format!(
                "~ {} ({} tol {:e})",
                self.expected,
                if relative { "rel" } else { "abs" },
                self.tolerance
            ),
            Relation::AtMost => format!("<= {}", self.expected),
            Relation::AtLeast => format!(">= {}", self.expected),
            Relation::Below => format!("< {}", self.expected),
            Relation::Above => format!("> {}", self.expected),
            Relation::Between { upper } => format!("in ({}, {upper})", self.expected),
            Relation::Holds => "holds".to_string(),
        };
        format!(
            "[{}] {:>2} {:<28} computed {} {rel}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.id,
            self.computed,
            self.description
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrals {
    /// `C(beta)` for full Lennard-Jones.
    pub c: IntegralResult,
    /// `C~(beta)` at the configured `a`.
    pub c_tilde: IntegralResult,
    pub c_tilde_overestimate: f64,
    /// `4 pi int_{2^(-1/6)}^inf |V| r^2 dr` by quadrature.
    pub attractive_tail: IntegralResult,
    pub attractive_tail_closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCount {
    pub n: usize,
    pub connected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub lj_minima: Vec<StabilityRow>,
    pub cutoff_minima: Vec<StabilityRow>,
    pub graph_counts: Vec<GraphCount>,
    pub c2: MayerCoefficientEstimate,
    pub c3: MayerCoefficientEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub certificate: Lemma1Record,
    pub integrals: Integrals,
    pub radii: RadiusReport,
    pub ratio_certificate: RatioCertificate,
    pub sweep: Vec<SweepRow>,
    pub oracle: OracleReport,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs every check of the suite for `config` and assembles the report.
pub fn verify_paper(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let spec = config.quadrature();
    let mut checks = Vec::new();
    threshold_checks(&mut checks)?;
    minimum_checks(&mut checks)?;

    // criterion 6: certificate at the configured (a, ell)
    let record = verify_lemma1_with(config.a, config.ell, FULL_LJ_RMIN);
    let cert = &record.certificate;
    let reason = cert.failure_reason.clone().unwrap_or_default();
    checks.push(Check::holds(
        6,
        "certificate-valid",
        format!("r_min certificate at a = {}, ell = {} {reason}", config.a, config.ell),
        cert.valid,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        6,
        "rmin-lower",
        "certified r_min lower bound",
        Relation::AtLeast,
        RMIN_FROM_PROOF,
        cert.rmin_lower,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        6,
        "rmin-above-a",
        "r_min lower bound exceeds the cut-off radius",
        Relation::Above,
        config.a,
        cert.rmin_lower,
        0.0,
        Provenance::Trivial,
    ));
    checks.push(Check::holds(
        6,
        "lemma1",
        "cut-off and full potential share their minimisers",
        record.certified,
        Provenance::Paper,
    ));

    // criteria 7, 8: integrals
    let tail_spec = spec.clone().with_splits(vec![1.0]);
    let attractive_tail = integrate_radial(
        |r| 4.0 * PI * r * r * lj_eval(r).unwrap_or(f64::NAN).abs(),
        LJ_ZERO,
        f64::INFINITY,
        &tail_spec,
    )?;
    let closed = attractive_tail_closed_form();
    checks.push(Check::new(
        7,
        "tail-quadrature",
        "attractive tail integral vs 16 sqrt(2) pi / 9",
        Relation::Approx { relative: true },
        closed,
        attractive_tail.value,
        1e-6,
        Provenance::Derived,
    ));
    checks.push(Check::new(
        7,
        "tail-above-7.89",
        "attractive tail exceeds the quoted lower bound",
        Relation::Above,
        C_LOWER,
        attractive_tail.value,
        0.0,
        Provenance::Paper,
    ));
    let c = c_beta(config.beta, &PotentialSpec::Lj, &spec)?;
    let c_tilde = tilde_c_beta(config.beta, config.a, &spec)?;
    let over = tilde_c_overestimate(config.beta, config.a)?;
    let over_quad = integrate_radial(
        tilde_c_overestimate_integrand(config.beta, config.a),
        0.0,
        f64::INFINITY,
        &spec.clone().with_splits(vec![config.a, LJ_ZERO, 1.0]),
    )?;
    checks.push(Check::new(
        8,
        "c-tilde-below-closed-form",
        "C~ by quadrature is below its closed-form overestimate",
        Relation::AtMost,
        over,
        c_tilde.value,
        0.0,
        Provenance::Derived,
    ));
    checks.push(Check::new(
        8,
        "closed-form-below-50000",
        "closed-form overestimate of C~",
        Relation::Below,
        C_TILDE_UPPER,
        over,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        8,
        "closed-form-reproduced",
        "closed-form overestimate vs quadrature of its integrand",
        Relation::Approx { relative: true },
        over,
        over_quad.value,
        1e-6,
        Provenance::Derived,
    ));

    // criterion 9
    let ratio_certificate = certify_conservative_ratio(config.beta, config.stability_b)?;
    checks.push(Check::holds(
        9,
        "ratio-divisor",
        "7.89 * 6338 >= 50000, so the ratio is at least e^(beta B) / 6338 (exact)",
        ratio_certificate.divisor_holds,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        9,
        "ratio-vs-divisor",
        "ln ratio lower bound vs beta B - ln 6338",
        Relation::AtLeast,
        config.beta * config.stability_b - RATIO_DIVISOR.ln(),
        ratio_certificate.ln_ratio_lower,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::holds(
        9,
        "ratio-exp-32.9",
        format!(
            "ratio lower bound e^(beta B) 7.89/50000 >= e^{RATIO_EXPONENT} (exact, ln = {:.4})",
            ratio_certificate.ln_ratio_lower
        ),
        ratio_certificate.exponent_holds,
        Provenance::Paper,
    ));

    let inputs = BoundInputs {
        beta: config.beta,
        stability_b: config.stability_b,
        c: c.value,
        c_tilde: c_tilde.value,
        a: config.a,
    };
    let radii = radius_report(inputs, Some(cert.clone()), 6)?;

    // criterion 10
    let lj_minima = empirical_stability(
        config.n_max,
        &PotentialSpec::Lj,
        config.starts,
        config.seed,
        config.stability_b,
        cert.rmin_lower,
    )?;
    let cutoff = PotentialSpec::CutoffLj { a: config.a };
    let cutoff_minima = empirical_stability(
        config.n_max,
        &cutoff,
        config.starts,
        config.seed,
        config.stability_b,
        cert.rmin_lower,
    )?;
    oracle_checks(&mut checks, &lj_minima, &cutoff_minima, cert.rmin_lower, config.stability_b);

    // criterion 11
    let graph_counts = (2..=crate::oracle::graphs::MAX_VERTICES)
        .map(|n| {
            enumerate_connected_graphs(n).map(|g| GraphCount {
                n,
                connected: g.count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c2 = c2_exact(config.beta, &PotentialSpec::Lj, &spec)?;
    let c3 = c3_monte_carlo(&McParams::new(
        config.beta,
        PotentialSpec::Lj,
        config.mc_samples,
        config.seed,
    ))?;
    let pr2 = coefficient_bound(2, Variant::PenroseRuelle, &inputs)?;
    let new2 = coefficient_bound(2, Variant::New, &inputs)?;
    let new3 = coefficient_bound(3, Variant::New, &inputs)?;
    checks.push(Check::new(
        11,
        "c2-below-pr",
        "|C_2| vs the order-2 classical bound",
        Relation::AtMost,
        pr2,
        c2.value.abs() + c2.truncation_error,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        11,
        "c2-below-new",
        "|C_2| vs the order-2 split bound",
        Relation::AtMost,
        new2,
        c2.value.abs() + c2.truncation_error,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        11,
        "c3-below-new",
        "|C_3| + 3 sigma + truncation bound vs the order-3 split bound",
        Relation::AtMost,
        new3,
        c3.value.abs() + 3.0 * c3.statistical_error + c3.truncation_error,
        0.0,
        Provenance::Derived,
    ));

    // criterion 12
    property_checks(&mut checks, config, &spec)?;
    let sweep = sweep_checks(&mut checks, config, &spec)?;

    let passed = checks.iter().all(|c| c.passed);
    Ok(Report {
        config: config.clone(),
        certificate: record,
        integrals: Integrals {
            c,
            c_tilde,
            c_tilde_overestimate: over,
            attractive_tail,
            attractive_tail_closed_form: closed,
        },
        radii,
        ratio_certificate,
        sweep,
        oracle: OracleReport {
            lj_minima,
            cutoff_minima,
            graph_counts,
            c2,
            c3,
        },
        checks,
        passed,
        version: VERSION.to_string(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

fn threshold_checks(checks: &mut Vec<Check>) -> Result<()> {
    let cap = decimal("0.4275")?;
    checks.push(Check::holds(
        1,
        "case1-margin-exact",
        "case-1 margin at ell = 0.4275 is positive (exact)",
        case_margin_exact(Case::One, &cap).is_positive(),
        Provenance::Paper,
    ));
    let t1 = threshold(Case::One)?;
    checks.push(Check::new(
        1,
        "ell1-root",
        "case-1 threshold ell_1",
        Relation::Between { upper: 0.45 },
        0.4275,
        t1.root,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        1,
        "ell1-bracket",
        "bracket width of ell_1",
        Relation::AtMost,
        1e-12,
        (t1.hi - t1.lo).abs(),
        0.0,
        Provenance::Trivial,
    ));
    let c2_at = decimal("0.6268")?;
    checks.push(Check::holds(
        2,
        "case2-margin-exact",
        "case-2 margin at ell = 0.6268 is non-negative (exact)",
        !case_margin_exact(Case::Two, &c2_at).is_negative(),
        Provenance::Paper,
    ));
    let t2 = threshold(Case::Two)?;
    checks.push(Check::new(
        2,
        "ell2-root",
        "case-2 threshold ell_2",
        Relation::Between { upper: 0.66 },
        0.6268,
        t2.root,
        0.0,
        Provenance::Paper,
    ));
    checks.push(Check::new(
        2,
        "ell2-bracket",
        "bracket width of ell_2",
        Relation::AtMost,
        1e-12,
        (t2.hi - t2.lo).abs(),
        0.0,
        Provenance::Trivial,
    ));
    Ok(())
}

fn minimum_checks(checks: &mut Vec<Check>) -> Result<()> {
    for (criterion, name, target, lo, hi, at, value) in [
        (3, "case1", BoundFn::Case1, 0.30, 0.427, 0.3672, 4712.0),
        (4, "case2", BoundFn::Case2, 0.45, 0.62, 0.5385, 3020.0),
    ] {
        let m = minimize_bound(target, lo, hi, 1e-3, 1e-10)?;
        checks.push(Check::new(
            criterion,
            &format!("{name}-argmin"),
            format!("location of the {name} bound minimum"),
            Relation::Approx { relative: false },
            at,
            m.ell,
            1e-3,
            Provenance::Paper,
        ));
        checks.push(Check::new(
            criterion,
            &format!("{name}-min-value"),
            format!("{name} bound minimum is slightly below {value}"),
            Relation::Between { upper: value },
            0.99 * value,
            m.value,
            0.0,
            Provenance::Paper,
        ));
    }
    let f = f_bound(DEFAULT_ELL)?;
    checks.push(Check::new(
        5,
        "f-at-0.42",
        "F(0.42) is slightly below 15545",
        Relation::Between { upper: 15545.0 },
        14000.0,
        f,
        0.0,
        Provenance::Paper,
    ));
    Ok(())
}

fn oracle_checks(
    checks: &mut Vec<Check>,
    lj: &[StabilityRow],
    cutoff: &[StabilityRow],
    rmin_lower: f64,
    stability_b: f64,
) {
    for (n, e) in [(2, -1.0), (3, -3.0), (4, -6.0)] {
        if let Some(row) = lj.iter().find(|r| r.n == n) {
            checks.push(Check::new(
                10,
                &format!("lj-energy-n{n}"),
                format!("minimum energy of {n} particles"),
                Relation::Approx { relative: false },
                e,
                row.energy,
                1e-6,
                Provenance::Trivial,
            ));
        }
    }
    let all = |f: &dyn Fn(&StabilityRow) -> bool| lj.iter().chain(cutoff).all(f);
    checks.push(Check::holds(
        10,
        "prop1",
        "W(i) < 0 for every particle of every found minimum",
        all(&|r| r.prop1_passed),
        Provenance::Paper,
    ));
    checks.push(Check::holds(
        10,
        "wplus-witness",
        "max W+(i) >= V(r_min) at every found minimum",
        all(&|r| r.wplus_witness),
        Provenance::Paper,
    ));
    let rmin_emp = lj
        .iter()
        .chain(cutoff)
        .map(|r| r.rmin_emp)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        10,
        "rmin-empirical",
        "smallest pair distance over found minima vs the certified bound",
        Relation::AtLeast,
        rmin_lower,
        rmin_emp,
        0.0,
        Provenance::Derived,
    ));
    checks.push(Check::new(
        10,
        "rmin-empirical-full",
        "smallest pair distance over found minima vs the full-potential bound",
        Relation::AtLeast,
        FULL_LJ_RMIN,
        rmin_emp,
        0.0,
        Provenance::Paper,
    ));
    let quotient = lj.iter().map(|r| r.quotient).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new(
        10,
        "stability-quotient",
        "largest -U_min / N over found minima",
        Relation::AtMost,
        stability_b,
        quotient,
        0.0,
        Provenance::Paper,
    ));
    let gap = lj
        .iter()
        .zip(cutoff)
        .map(|(x, y)| (x.energy - y.energy).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        10,
        "cutoff-matches-lj",
        "largest energy gap between cut-off and full minima from identical seeds",
        Relation::AtMost,
        0.0,
        gap,
        1e-6,
        Provenance::Derived,
    ));
}

fn property_checks(checks: &mut Vec<Check>, config: &RunConfig, spec: &QuadratureSpec) -> Result<()> {
    // potential domination on a grid
    let a = config.a;
    let points = 100_000;
    let (lo, hi) = (0.05, 5.0);
    let mut dominated = true;
    let mut equal_beyond = true;
    for k in 0..points {
        let r = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let (v, va) = (lj_eval(r)?, cutoff_eval(r, a)?);
        dominated &= va <= v;
        if r >= a {
            equal_beyond &= va == v;
        }
    }
    checks.push(Check::holds(
        12,
        "domination",
        "V_a <= V on 1e5 grid points, with equality for r >= a",
        dominated && equal_beyond,
        Provenance::Trivial,
    ));

    // two quadrature methods
    let c = c_beta(config.beta, &PotentialSpec::Lj, spec)?;
    let mid = midpoint_radial(
        c_beta_integrand(config.beta, PotentialSpec::Lj),
        0.0,
        f64::INFINITY,
        &PotentialSpec::Lj.breakpoints(),
        10_000_000,
    )?;
    checks.push(Check::new(
        12,
        "quadrature-two-methods",
        "C(beta): adaptive Gauss-Kronrod vs composite midpoint",
        Relation::Approx { relative: true },
        c.value,
        mid,
        1e-6,
        Provenance::Derived,
    ));

    // lattice tail sum
    let coarse = exact::to_f64(&lsbound::lattice_tail_sum_upper_exact(4)?);
    checks.push(Check::new(
        12,
        "tail-sum-certified",
        "certified upper bound of sum n^3/(n-1)^6",
        Relation::Below,
        9.0,
        coarse,
        0.0,
        Provenance::Paper,
    ));
    let fine = lsbound::lattice_tail_sum(100_000)?;
    checks.push(Check::new(
        12,
        "tail-sum-value",
        "value of sum n^3/(n-1)^6",
        Relation::Approx { relative: false },
        8.57,
        0.5 * (fine.lower + fine.upper),
        0.01,
        Provenance::Derived,
    ));

    // gradient vs central differences
    let worst = gradient_fd_error(&PotentialSpec::Lj)?.max(gradient_fd_error(&PotentialSpec::CutoffLj { a })?);
    checks.push(Check::new(
        12,
        "gradient-fd",
        "analytic gradient vs central differences (relative)",
        Relation::AtMost,
        0.0,
        worst,
        1e-6,
        Provenance::Derived,
    ));
    Ok(())
}

/// Largest relative deviation between analytic and central-difference
/// gradients on a fixed five-particle configuration.
pub fn gradient_fd_error(potential: &PotentialSpec) -> Result<f64> {
    let x: Vec<Point> = vec![
        [0.0, 0.0, 0.0],
        [1.05, 0.1, -0.05],
        [0.45, 0.95, 0.12],
        [0.5, 0.3, 0.9],
        [1.6, 1.2, 0.7],
    ];
    let (_, g) = energy_and_gradient(&x, potential)?;
    let h = 1e-5;
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        for d in 0..3 {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[i][d] += h;
            minus[i][d] -= h;
            let fd = (crate::potentials::total_energy(&plus, potential)?
                - crate::potentials::total_energy(&minus, potential)?)
                / (2.0 * h);
            worst = worst.max((fd - g[i][d]).abs() / scale);
        }
    }
    Ok(worst)
}

/// Grid of cut-off radii used for the monotonicity property.
pub const SWEEP_RANGE: (f64, f64, f64) = (0.30, DEFAULT_A, 0.0025);

fn sweep_checks(checks: &mut Vec<Check>, config: &RunConfig, spec: &QuadratureSpec) -> Result<Vec<SweepRow>> {
    let (lo, hi, step) = SWEEP_RANGE;
    let grid = a_grid(lo, hi, step)?;
    let out = optimize_radius(config.beta, config.stability_b, &grid, EllPolicy::Tight, spec)?;
    let valid: Vec<&SweepRow> = out.rows.iter().filter(|r| r.valid).collect();
    let monotone = valid.windows(2).all(|w| w[1].rho_new > w[0].rho_new);
    checks.push(Check::holds(
        12,
        "rho-monotone-in-a",
        format!(
            "rho_new increases with a over the {} valid sweep points",
            valid.len()
        ),
        monotone && valid.len() >= 2,
        Provenance::Paper,
    ));
    Ok(out.rows)
}

/// Curves exported for plotting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    F,
    Case1,
    Case2,
    RadiusVsA,
}

impl std::str::FromStr for CurveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" => Ok(CurveKind::F),
            "case1" => Ok(CurveKind::Case1),
            "case2" => Ok(CurveKind::Case2),
            "radius-vs-a" => Ok(CurveKind::RadiusVsA),
            _ => domain(format!("unknown curve {s:?}; expected F, case1, case2 or radius-vs-a")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: Option<f64>,
    /// Why `y` is missing.
    pub flag: Option<String>,
}

/// Samples a curve on an inclusive grid; points outside the curve's domain
/// are flagged rather than aborting the run.
pub fn curve(kind: CurveKind, lo: f64, hi: f64, step: f64, config: &RunConfig) -> Result<Vec<CurvePoint>> {
    let grid = a_grid(lo, hi, step)?;
    let spec = config.quadrature();
    let point = |x: f64| -> Result<f64> {
        match kind {
            CurveKind::F => f_bound(x),
            CurveKind::Case1 => lsbound::case1_bound(x),
            CurveKind::Case2 => lsbound::case2_bound(x),
            CurveKind::RadiusVsA => {
                let row = optimize_radius(config.beta, config.stability_b, &[x], EllPolicy::Tight, &spec)?
                    .rows
                    .remove(0);
                match row.reason {
                    None => Ok(row.rho_new),
                    Some(r) => domain(r),
                }
            }
        }
    };
    Ok(grid
        .into_iter()
        .map(|x| match point(x) {
            Ok(y) => CurvePoint { x, y: Some(y), flag: None },
            Err(e) => CurvePoint {
                x,
                y: None,
                flag: Some(e.to_string()),
            },
        })
        .collect())
}

/// Convergence-radius report at the configured point, with the
/// certificate for `(a, ell)`.
pub fn bounds(config: &RunConfig) -> Result<RadiusReport> {
    config.validate()?;
    let spec = config.quadrature();
    let c = c_beta(config.beta, &PotentialSpec::Lj, &spec)?.require_converged()?;
    let c_tilde = tilde_c_beta(config.beta, config.a, &spec)?.require_converged()?;
    let cert = lsbound::rmin_certificate(config.a, config.ell);
    radius_report(
        BoundInputs {
            beta: config.beta,
            stability_b: config.stability_b,
            c: c.value,
            c_tilde: c_tilde.value,
            a: config.a,
        },
        Some(cert),
        6,
    )
}

/// `4 pi int |V| r^2` beyond the zero of the potential, used by the report.
pub fn attractive_tail_moment() -> Result<f64> {
    Ok(4.0 * PI * lj_abs_moment(LJ_ZERO)?)
}
