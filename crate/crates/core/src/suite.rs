//! Verification suites: each compares a closed form against its independent
//! oracle on seeded samples or full quadrature and records pass/fail.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chern_simons::{adiabatic_sweep, cs_integrand_trace, cs_reduced, density_terms, CsResult, Fit};
use crate::connection::christoffel_generic;
use crate::error::{Error, Result};
use crate::frames::{
    build_vielbein3, reduce_spin_connection, reduced_closed_form, spin_connection_closed_form,
    spin_connection_generic,
};
use crate::geometry::DerivativeMode;
use crate::kaluza_klein::{assemble_metric, christoffel_closed_form, KkData, KkMetricField};
use crate::presets::{build_preset, Preset, PresetName, PresetSpec};
use crate::quadrature::integrate_many;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Christoffel,
    Spin,
    Reduce,
    Integrand,
    Cs,
    Sweep,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        Self::Christoffel,
        Self::Spin,
        Self::Reduce,
        Self::Integrand,
        Self::Cs,
        Self::Sweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Christoffel => "christoffel",
            Self::Spin => "spin",
            Self::Reduce => "reduce",
            Self::Integrand => "integrand",
            Self::Cs => "cs",
            Self::Sweep => "sweep",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub christoffel: f64,
    pub spin: f64,
    pub reduce: f64,
    pub antisymmetry: f64,
    pub frame: f64,
    pub integrand: f64,
    pub cs_value: f64,
    /// Allowed route gap in units of the combined error estimate.
    pub route_factor: f64,
    pub max_error_estimate: f64,
    pub exact_term: f64,
    pub sweep_relative: f64,
    pub polynomial_residual: f64,
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            christoffel: 1e-8,
            spin: 1e-8,
            reduce: 1e-8,
            antisymmetry: 1e-9,
            frame: 1e-12,
            integrand: 1e-6,
            cs_value: 1e-4,
            route_factor: 3.0,
            max_error_estimate: 1e-6,
            exact_term: 1e-10,
            sweep_relative: 1e-5,
            polynomial_residual: 1e-9,
            limit: 1.3e-3,
        }
    }
}

impl Tolerances {
    /// Replace every absolute and relative tolerance with `t`.
    pub fn uniform(t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be finite and non-negative, got {t}")));
        }
        Ok(Self {
            christoffel: t,
            spin: t,
            reduce: t,
            antisymmetry: t,
            frame: t,
            integrand: t,
            cs_value: t,
            max_error_estimate: t,
            exact_term: t,
            sweep_relative: t,
            polynomial_residual: t,
            limit: t,
            ..Self::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub preset: PresetName,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub points: usize,
    pub tolerances: Tolerances,
    pub eps_grid: Vec<f64>,
}

pub const DEFAULT_EPS_GRID: [f64; 6] = [1.0, 0.5, 0.25, 0.1, 0.01, 1e-4];
/// Number of seeded datasets in the torus route-equivalence check.
pub const TORUS_DATASETS: u64 = 20;

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            points: 100,
            tolerances: Tolerances::default(),
            eps_grid: DEFAULT_EPS_GRID.to_vec(),
        }
    }
}

/// Outcome of one suite, with any Chern-Simons results it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub results: Vec<CsResult>,
    pub fit: Option<Fit>,
}

/// One sampled configuration: data at a random ε and a random chart point.
pub struct Sample {
    pub kk: KkData,
    pub point: [f64; 2],
}

/// Seeded samples of `(h, φ, ε, point)`; the torus preset draws a fresh dataset
/// per sample, the others keep their fields and vary ε and the point.
pub fn samples(spec: &PresetSpec, count: usize) -> Result<Vec<Sample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0fc0_ffee);
    let base = build_preset(spec)?;
    (0..count)
        .map(|i| {
            let preset = if spec.name == PresetName::TorusRandom {
                let mut s = spec.clone();
                s.seed = spec.seed.wrapping_add(i as u64);
                build_preset(&s)?
            } else {
                base.clone()
            };
            let eps = rng.random_range(0.05..4.0);
            let margin = if preset.domain.is_periodic(0) { 0.0 } else { 0.2 };
            let (lo, hi) = preset.domain.bounds(0);
            let (lo1, hi1) = preset.domain.bounds(1);
            let point = [rng.random_range(lo + margin..hi - margin), rng.random_range(lo1..hi1)];
            Ok(Sample {
                kk: preset.kk.with_epsilon(eps)?,
                point,
            })
        })
        .collect()
}

fn max_mat3_dev(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn christoffel_suite(spec: &PresetSpec, opts: &RunOptions) -> Result<Vec<Check>> {
    let (mut dev, mut fiber) = (0.0_f64, 0.0_f64);
    for s in samples(spec, opts.points)? {
        let closed = christoffel_closed_form(&s.kk, &s.point)?;
        let generic = christoffel_generic(&KkMetricField::new(s.kk.clone()), &s.point, DerivativeMode::Analytic, None)?;
        dev = dev.max(closed.max_abs_diff(&generic));
        for l in 0..3 {
            fiber = fiber.max(closed.get(l, 2, 2).abs()).max(generic.get(l, 2, 2).abs());
        }
    }
    let t = &opts.tolerances;
    Ok(vec![
        Check::at_most("closed_vs_generic", dev, t.christoffel),
        Check::at_most("fiber_fiber_components", fiber, t.christoffel),
    ])
}

fn spin_suite(spec: &PresetSpec, opts: &RunOptions) -> Result<Vec<Check>> {
    let (mut dev, mut anti, mut duality, mut recon) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for s in samples(spec, opts.points)? {
        let closed = spin_connection_closed_form(&s.kk, &s.point)?;
        let generic = spin_connection_generic(&s.kk, &s.point)?;
        dev = dev.max(closed.max_abs_diff(&generic));
        anti = anti.max(generic.antisymmetry_violation()).max(closed.antisymmetry_violation());
        let v = build_vielbein3(&s.kk, &s.point)?;
        let g = assemble_metric(&s.kk, &s.point)?.metric;
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| v.e[i][k] * v.inv[k][j]).sum();
                duality = duality.max((d - if i == j { 1.0 } else { 0.0 }).abs());
                let gij: f64 = (0..3).map(|a| v.e[a][i] * v.e[a][j]).sum();
                recon = recon.max((gij - g.get(i, j)).abs());
            }
        }
    }
    let t = &opts.tolerances;
    Ok(vec![
        Check::at_most("closed_vs_generic", dev, t.spin),
        Check::at_most("antisymmetry", anti, t.antisymmetry),
        Check::at_most("frame_duality", duality, t.frame),
        Check::at_most("metric_reconstruction", recon, t.frame),
    ])
}

fn reduce_suite(spec: &PresetSpec, opts: &RunOptions) -> Result<Vec<Check>> {
    let (mut dev, mut recon) = (0.0_f64, 0.0_f64);
    for s in samples(spec, opts.points)? {
        let generic = spin_connection_generic(&s.kk, &s.point)?;
        let reduced = reduce_spin_connection(&generic)?;
        let closed = reduced_closed_form(&s.kk, &s.point)?;
        dev = dev.max(max_mat3_dev(&closed.connection.components, &reduced.components));
        recon = recon.max(reduced.reconstruct().max_abs_diff(&generic));
    }
    let t = &opts.tolerances;
    Ok(vec![
        Check::at_most("closed_vs_reduced_generic", dev, t.reduce),
        Check::at_most("reconstruction", recon, t.antisymmetry),
    ])
}

fn integrand_suite(preset: &Preset, opts: &RunOptions) -> Result<Vec<Check>> {
    let t = &opts.tolerances;
    let mut pointwise = 0.0_f64;
    for s in samples(&preset.spec, opts.points)? {
        let trace = cs_integrand_trace(&s.kk, &s.point)?;
        let reduced = density_terms(&s.kk, &s.point)?.density;
        pointwise = pointwise.max((trace - reduced).abs());
    }
    let kk = &preset.kk;
    let eps = kk.epsilon();
    let [trace, reduced, display] = integrate_many(
        |x| {
            let d = density_terms(kk, x)?;
            let tr = cs_integrand_trace(kk, x)?;
            Ok([tr, d.density, eps * d.linear + eps * eps * d.quadratic])
        },
        &preset.domain,
        &preset.quadrature,
    )?;
    let v = kk.fiber_volume();
    let integrated_gap = v * (trace.value - reduced.value).abs();
    // Density integrated over the total space versus −(V/4π)∫√h(εfr + ε²f³).
    let direct = v * reduced.value;
    let expected = -v / (4.0 * PI) * display.value;
    let display_gap = (direct - expected).abs() / expected.abs().max(1.0);
    Ok(vec![
        Check::at_most("trace_vs_reduced_pointwise", pointwise, t.integrand),
        Check::at_most("trace_vs_reduced_integrated", integrated_gap, t.integrand),
        Check::at_most("integrated_density_vs_display", display_gap, t.integrand),
    ])
}

/// Closed-form Chern-Simons coefficients `(a, b)` of the round-sphere presets:
/// a = (V/4π)·r·area = 2V, b = (V/4π)·area = V R².
pub fn sphere_coefficients(spec: &PresetSpec, fiber_volume: f64) -> Option<(f64, f64)> {
    match spec.name {
        PresetName::Hopf | PresetName::Lens => Some((2.0 * fiber_volume, fiber_volume * spec.radius * spec.radius)),
        PresetName::ProductFlat => Some((0.0, 0.0)),
        PresetName::TorusRandom => None,
    }
}

fn route_checks(r: &CsResult, t: &Tolerances, label: &str) -> Vec<Check> {
    vec![
        Check::at_most(
            &format!("{label}route_gap_over_error"),
            r.route_gap(),
            t.route_factor * r.quadrature_error_estimate,
        ),
        Check::at_most(&format!("{label}error_estimate"), r.quadrature_error_estimate, t.max_error_estimate),
    ]
}

fn cs_suite(preset: &Preset, opts: &RunOptions) -> Result<(Vec<Check>, Vec<CsResult>)> {
    let t = &opts.tolerances;
    let r = cs_reduced(&preset.kk, &preset.domain, &preset.quadrature)?;
    let mut checks = Vec::new();
    if let Some((a, b)) = sphere_coefficients(&preset.spec, r.fiber_volume) {
        let expected = a * r.epsilon + b * r.epsilon * r.epsilon;
        checks.push(Check::at_most("cs_reduced_vs_closed_form", (r.cs_reduced - expected).abs(), t.cs_value));
        checks.push(Check::at_most("cs_direct_vs_closed_form", (r.cs_direct - expected).abs(), t.cs_value));
    }
    checks.extend(route_checks(&r, t, ""));
    let mut results = vec![r];
    if preset.domain.is_periodic(0) && preset.domain.is_periodic(1) {
        checks.push(Check::at_most("exact_term_integral", r.exact_term_integral.abs(), t.exact_term));
    }
    if preset.spec.name == PresetName::TorusRandom {
        // Route equivalence on further seeded datasets.
        let mut worst_ratio = 0.0_f64;
        let mut worst_err = 0.0_f64;
        for k in 1..TORUS_DATASETS {
            let mut s = preset.spec.clone();
            s.seed = preset.spec.seed.wrapping_add(k);
            let p = build_preset(&s)?;
            let rk = cs_reduced(&p.kk, &p.domain, &p.quadrature)?;
            worst_ratio = worst_ratio.max(rk.route_gap() / (t.route_factor * rk.quadrature_error_estimate));
            worst_err = worst_err.max(rk.quadrature_error_estimate);
            results.push(rk);
        }
        checks.push(Check::at_most("datasets_route_gap_ratio", worst_ratio, 1.0));
        checks.push(Check::at_most("datasets_error_estimate", worst_err, t.max_error_estimate));
    }
    Ok((checks, results))
}

fn sweep_suite(preset: &Preset, opts: &RunOptions) -> Result<(Vec<Check>, Vec<CsResult>, Fit)> {
    let t = &opts.tolerances;
    let sweep = adiabatic_sweep(&preset.kk, &opts.eps_grid, &preset.domain, &preset.quadrature)?;
    let mut checks = vec![Check::at_most("fit_residual", sweep.fit.residual, t.polynomial_residual)];
    let v = preset.kk.fiber_volume();
    if let Some((a, b)) = sphere_coefficients(&preset.spec, v) {
        let rel = |got: f64, want: f64| if want == 0.0 { got.abs() } else { (got - want).abs() / want.abs() };
        checks.push(Check::at_most("fit_a_relative", rel(sweep.fit.a, a), t.sweep_relative));
        checks.push(Check::at_most("fit_b_relative", rel(sweep.fit.b, b), t.sweep_relative));
    }
    // CS must shrink toward 0 as ε decreases.
    let mut by_eps: Vec<&CsResult> = sweep.results.iter().collect();
    by_eps.sort_by(|x, y| x.epsilon.total_cmp(&y.epsilon));
    let increases = by_eps
        .windows(2)
        .filter(|w| w[0].cs_reduced.abs() > w[1].cs_reduced.abs() + t.cs_value)
        .count();
    checks.push(Check::at_most("non_monotone_steps", increases as f64, 0.0));
    let smallest = by_eps[0];
    let bound = if sphere_coefficients(&preset.spec, v).is_some_and(|(a, _)| a != 0.0) {
        t.limit
    } else {
        2.0 * smallest.epsilon * sweep.fit.a.abs() + t.cs_value
    };
    checks.push(Check::at_most("smallest_epsilon_value", smallest.cs_reduced.abs(), bound));
    Ok((checks, sweep.results, sweep.fit))
}

pub fn run_suite(suite: SuiteName, spec: &PresetSpec, opts: &RunOptions) -> Result<SuiteOutcome> {
    let preset = build_preset(spec)?;
    let mut results = Vec::new();
    let mut fit = None;
    let checks = match suite {
        SuiteName::Christoffel => christoffel_suite(spec, opts)?,
        SuiteName::Spin => spin_suite(spec, opts)?,
        SuiteName::Reduce => reduce_suite(spec, opts)?,
        SuiteName::Integrand => integrand_suite(&preset, opts)?,
        SuiteName::Cs => {
            let (c, r) = cs_suite(&preset, opts)?;
            results = r;
            c
        }
        SuiteName::Sweep => {
            let (c, r, f) = sweep_suite(&preset, opts)?;
            results = r;
            fit = Some(f);
            c
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    let samples = match suite {
        SuiteName::Cs | SuiteName::Sweep => results.len(),
        _ => opts.points,
    };
    Ok(SuiteOutcome {
        report: SuiteReport {
            suite,
            preset: spec.name,
            samples,
            checks,
            passed,
        },
        results,
        fit,
    })
}
