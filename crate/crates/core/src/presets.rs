//! Geometry presets with exact first and second partials.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Arity, ChartDomain, ConstantField, Field, FnField};
use crate::kaluza_klein::KkData;
use crate::quadrature::{AxisRule, AxisSpec, QuadratureSpec, DEFAULT_POINTS};

/// Round metric `diag(R², R² sin² x⁰)` in polar/azimuthal coordinates.
pub fn sphere_metric(radius: f64) -> FnField {
    let r2 = radius * radius;
    FnField::new(Arity::SymMatrix(2), 2, move |x| vec![r2, 0.0, 0.0, r2 * x[0].sin().powi(2)])
        .with_partial(move |a, x| {
            let d = if a == 0 { r2 * (2.0 * x[0]).sin() } else { 0.0 };
            vec![0.0, 0.0, 0.0, d]
        })
        .with_second_partial(move |a, b, x| {
            let d = if a == 0 && b == 0 { 2.0 * r2 * (2.0 * x[0]).cos() } else { 0.0 };
            vec![0.0, 0.0, 0.0, d]
        })
}

/// Connection one-form `(0, −R² cos x⁰)` of the Hopf bundle; its curl is the
/// area form of the round metric, so f ≡ 1.
pub fn hopf_potential(radius: f64) -> FnField {
    let r2 = radius * radius;
    FnField::new(Arity::OneForm(2), 2, move |x| vec![0.0, -r2 * x[0].cos()])
        .with_partial(move |a, x| vec![0.0, if a == 0 { r2 * x[0].sin() } else { 0.0 }])
        .with_second_partial(move |a, b, x| vec![0.0, if a == 0 && b == 0 { r2 * x[0].cos() } else { 0.0 }])
}

/// Finite sum `c + Σ (p_k cos θ_k + q_k sin θ_k)` with `θ_k = m_k x⁰ + n_k x¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub wave: [f64; 2],
    pub cos: f64,
    pub sin: f64,
}

impl TrigSeries {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    /// Random series whose oscillating part is bounded by `amplitude`.
    pub fn random(rng: &mut ChaCha8Rng, constant: f64, amplitude: f64, terms: usize, max_wave: i32) -> Self {
        let raw: Vec<TrigTerm> = (0..terms)
            .map(|_| {
                let mut wave = [0.0; 2];
                while wave == [0.0; 2] {
                    wave = [
                        rng.random_range(-max_wave..=max_wave) as f64,
                        rng.random_range(-max_wave..=max_wave) as f64,
                    ];
                }
                TrigTerm {
                    wave,
                    cos: rng.random_range(-1.0..1.0),
                    sin: rng.random_range(-1.0..1.0),
                }
            })
            .collect();
        let total: f64 = raw.iter().map(|t| t.cos.abs() + t.sin.abs()).sum();
        let scale = if total > 0.0 { amplitude / total } else { 0.0 };
        Self {
            constant,
            terms: raw
                .into_iter()
                .map(|t| TrigTerm {
                    cos: t.cos * scale,
                    sin: t.sin * scale,
                    ..t
                })
                .collect(),
        }
    }

    /// Upper bound on |value − constant|.
    pub fn amplitude(&self) -> f64 {
        self.terms.iter().map(|t| t.cos.abs() + t.sin.abs()).sum()
    }

    fn phase(t: &TrigTerm, x: &[f64]) -> f64 {
        t.wave[0] * x[0] + t.wave[1] * x[1]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| {
                    let p = Self::phase(t, x);
                    t.cos * p.cos() + t.sin * p.sin()
                })
                .sum::<f64>()
    }

    pub fn partial(&self, axis: usize, x: &[f64]) -> f64 {
        if axis >= 2 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| {
                let p = Self::phase(t, x);
                t.wave[axis] * (-t.cos * p.sin() + t.sin * p.cos())
            })
            .sum()
    }

    pub fn second_partial(&self, a: usize, b: usize, x: &[f64]) -> f64 {
        if a >= 2 || b >= 2 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| {
                let p = Self::phase(t, x);
                -t.wave[a] * t.wave[b] * (t.cos * p.cos() + t.sin * p.sin())
            })
            .sum()
    }
}

/// Field whose components are trigonometric series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField {
    arity: Arity,
    components: Vec<TrigSeries>,
}

impl TrigField {
    /// Symmetric 2×2 field from its (00, 01, 11) entries.
    pub fn sym2(s00: TrigSeries, s01: TrigSeries, s11: TrigSeries) -> Self {
        Self {
            arity: Arity::SymMatrix(2),
            components: vec![s00, s01.clone(), s01, s11],
        }
    }

    pub fn one_form(c0: TrigSeries, c1: TrigSeries) -> Self {
        Self {
            arity: Arity::OneForm(2),
            components: vec![c0, c1],
        }
    }

    pub fn components(&self) -> &[TrigSeries] {
        &self.components
    }
}

impl Field for TrigField {
    fn arity(&self) -> Arity {
        self.arity
    }

    fn chart_dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|s| s.value(x)).collect()
    }

    fn partial(&self, axis: usize, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.components.iter().map(|s| s.partial(axis, x)).collect())
    }

    fn second_partial(&self, a: usize, b: usize, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.components.iter().map(|s| s.second_partial(a, b, x)).collect())
    }
}

/// Bound on each metric perturbation entry of the random torus preset.
pub const TORUS_METRIC_AMPLITUDE: f64 = 0.2;
const TORUS_PHI_AMPLITUDE: f64 = 0.8;
const TORUS_TERMS: usize = 3;
const TORUS_MAX_WAVE: i32 = 2;

/// Seeded smooth periodic data: `h = I + δh` with every |δh_{αβ}| ≤ 0.2 (so the
/// smallest eigenvalue is at least 0.6) and a trigonometric one-form φ.
pub fn torus_random_fields(seed: u64) -> (TrigField, TrigField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = TORUS_METRIC_AMPLITUDE;
    let h = TrigField::sym2(
        TrigSeries::random(&mut rng, 1.0, a, TORUS_TERMS, TORUS_MAX_WAVE),
        TrigSeries::random(&mut rng, 0.0, a, TORUS_TERMS, TORUS_MAX_WAVE),
        TrigSeries::random(&mut rng, 1.0, a, TORUS_TERMS, TORUS_MAX_WAVE),
    );
    let phi = TrigField::one_form(
        TrigSeries::random(&mut rng, 0.0, TORUS_PHI_AMPLITUDE, TORUS_TERMS, TORUS_MAX_WAVE),
        TrigSeries::random(&mut rng, 0.0, TORUS_PHI_AMPLITUDE, TORUS_TERMS, TORUS_MAX_WAVE),
    );
    (h, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Hopf,
    Lens,
    TorusRandom,
    ProductFlat,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [Self::Hopf, Self::Lens, Self::TorusRandom, Self::ProductFlat];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hopf => "hopf",
            Self::Lens => "lens",
            Self::TorusRandom => "torus-random",
            Self::ProductFlat => "product-flat",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetSpec {
    pub name: PresetName,
    pub radius: f64,
    pub lens_order: u32,
    pub seed: u64,
    /// Quadrature points per base axis.
    pub grid: [usize; 2],
    pub epsilon: f64,
    /// Overrides the preset's natural fiber volume.
    pub fiber_volume: Option<f64>,
}

impl PresetSpec {
    pub fn new(name: PresetName) -> Self {
        Self {
            name,
            radius: 0.5,
            lens_order: if name == PresetName::Lens { 2 } else { 1 },
            seed: 0,
            grid: [DEFAULT_POINTS, DEFAULT_POINTS],
            epsilon: 1.0,
            fiber_volume: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.radius)));
        }
        if self.lens_order < 1 {
            return Err(Error::InvalidParameter("lens order p must be at least 1".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::NonPositiveEpsilon(self.epsilon));
        }
        if let Some(v) = self.fiber_volume {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveFiberVolume(v));
            }
        }
        Ok(())
    }

    pub fn natural_fiber_volume(&self) -> f64 {
        match self.name {
            PresetName::Lens => TAU / self.lens_order as f64,
            _ => TAU,
        }
    }
}

/// Data, chart and quadrature produced by a preset.
#[derive(Debug, Clone)]
pub struct Preset {
    pub spec: PresetSpec,
    pub kk: KkData,
    pub domain: ChartDomain,
    pub quadrature: QuadratureSpec,
}

pub fn build_preset(spec: &PresetSpec) -> Result<Preset> {
    spec.validate()?;
    let (h, phi, domain): (Arc<dyn Field>, Arc<dyn Field>, ChartDomain) = match spec.name {
        PresetName::Hopf | PresetName::Lens => (
            Arc::new(sphere_metric(spec.radius)),
            Arc::new(hopf_potential(spec.radius)),
            ChartDomain::new(vec![(0.0, PI), (0.0, TAU)], vec![false, true])?,
        ),
        PresetName::TorusRandom => {
            let (h, phi) = torus_random_fields(spec.seed);
            (Arc::new(h), Arc::new(phi), ChartDomain::torus())
        }
        PresetName::ProductFlat => (
            Arc::new(ConstantField::new(Arity::SymMatrix(2), 2, vec![1.0, 0.0, 0.0, 1.0])?),
            Arc::new(ConstantField::new(Arity::OneForm(2), 2, vec![0.0, 0.0])?),
            ChartDomain::torus(),
        ),
    };
    let quadrature = QuadratureSpec::new(
        (0..2)
            .map(|i| AxisSpec {
                rule: if domain.is_periodic(i) { AxisRule::PeriodicTrapezoid } else { AxisRule::GaussLegendre },
                points: spec.grid[i],
            })
            .collect(),
        2,
    )?;
    let kk = KkData::new(h, phi, spec.epsilon)?
        .with_fiber_volume(spec.fiber_volume.unwrap_or_else(|| spec.natural_fiber_volume()))?
        .with_domain(domain.clone());
    Ok(Preset {
        spec: spec.clone(),
        kk,
        domain,
        quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{partial_derivative, second_partial_derivative, DerivativeMode};
    use approx::assert_abs_diff_eq;

    #[test]
    fn names_roundtrip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert!(matches!("klein".parse::<PresetName>(), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn invalid_parameters() {
        let mut s = PresetSpec::new(PresetName::Lens);
        s.lens_order = 0;
        assert!(build_preset(&s).is_err());
        let mut s = PresetSpec::new(PresetName::Hopf);
        s.radius = -1.0;
        assert!(build_preset(&s).is_err());
        s.radius = 0.5;
        s.grid = [3, 64];
        assert!(build_preset(&s).is_err());
    }

    #[test]
    fn lens_fiber_volume() {
        let mut s = PresetSpec::new(PresetName::Lens);
        s.lens_order = 3;
        assert_abs_diff_eq!(build_preset(&s).unwrap().kk.fiber_volume(), TAU / 3.0, epsilon = 0.0);
    }

    #[test]
    fn trig_partials_match_finite_differences() {
        let (h, phi) = torus_random_fields(5);
        let fd = DerivativeMode::FiniteDifference { step: Some(1e-3) };
        let x = [0.7, 4.1];
        for field in [&h as &dyn Field, &phi] {
            for a in 0..2 {
                let exact = field.partial(a, &x).unwrap();
                let approx = partial_derivative(field, a, &x, fd, None).unwrap();
                for (e, g) in exact.iter().zip(&approx) {
                    assert_abs_diff_eq!(e, g, epsilon = 1e-9);
                }
                for b in 0..2 {
                    let exact = field.second_partial(a, b, &x).unwrap();
                    let approx = second_partial_derivative(field, a, b, &x, fd, None).unwrap();
                    for (e, g) in exact.iter().zip(&approx) {
                        assert_abs_diff_eq!(e, g, epsilon = 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn torus_metric_perturbation_bounded() {
        for seed in 0..20 {
            let (h, _) = torus_random_fields(seed);
            for c in h.components() {
                assert!(c.amplitude() <= TORUS_METRIC_AMPLITUDE + 1e-15);
            }
        }
    }

    #[test]
    fn same_seed_same_fields() {
        assert_eq!(torus_random_fields(42), torus_random_fields(42));
        assert_ne!(torus_random_fields(42), torus_random_fields(43));
    }
}
