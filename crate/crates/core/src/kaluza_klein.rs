//! The adiabatic metric family built from surface data `(h, φ)` and its
//! closed-form Christoffel symbols, field strength and covariant derivative.
//!
//! Index ledger: α, β, γ, δ, ζ, ρ range over the base axes {0, 1}; μ, ν, λ over
//! {0, 1, 2}; axis 2 is the fiber. Base indices are raised with `h`.

use std::fmt;
use std::sync::Arc;

use num_dual::Dual64;
use serde::{Deserialize, Serialize};

use crate::connection::{christoffel_from_metric, ChristoffelArray, ChristoffelSet};
use crate::geometry::{
    cst, dual, inverse_spd, partial_derivative, second_partial_derivative, Arity, ChartDomain,
    DerivativeMode, Field, Mat2, Mat3, Metric3, Scalar,
};
use crate::error::{Error, Result};

/// Values and first partials of `h` and `φ` at a base point.
/// `dh[γ] = ∂_γ h`, `dphi[γ][β] = ∂_γ φ_β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseJet<T> {
    pub h: Mat2<T>,
    pub dh: [Mat2<T>; 2],
    pub phi: [T; 2],
    pub dphi: Mat2<T>,
}

/// [`BaseJet`] plus second partials: `ddh[a][b] = ∂_a ∂_b h`,
/// `ddphi[a][b][β] = ∂_a ∂_b φ_β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseJet2 {
    pub first: BaseJet<f64>,
    pub ddh: [[Mat2; 2]; 2],
    pub ddphi: [Mat2; 2],
}

impl BaseJet2 {
    /// Jet whose dual parts carry ∂_ν of every entry.
    pub fn lift(&self, nu: usize) -> BaseJet<Dual64> {
        let j = &self.first;
        let z = Dual64::from(0.0);
        let mut out = BaseJet {
            h: [[z; 2]; 2],
            dh: [[[z; 2]; 2]; 2],
            phi: [z; 2],
            dphi: [[z; 2]; 2],
        };
        for i in 0..2 {
            out.phi[i] = dual(j.phi[i], j.dphi[nu][i]);
            for k in 0..2 {
                out.h[i][k] = dual(j.h[i][k], j.dh[nu][i][k]);
                out.dphi[i][k] = dual(j.dphi[i][k], self.ddphi[i][nu][k]);
                for g in 0..2 {
                    out.dh[g][i][k] = dual(j.dh[g][i][k], self.ddh[g][nu][i][k]);
                }
            }
        }
        out
    }
}

/// Local data `(h, φ, ε, fiber volume)` of one member of the metric family.
#[derive(Clone)]
pub struct KkData {
    h: Arc<dyn Field>,
    phi: Arc<dyn Field>,
    epsilon: f64,
    fiber_volume: f64,
    derivatives: DerivativeMode,
    domain: Option<ChartDomain>,
}

impl fmt::Debug for KkData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KkData")
            .field("epsilon", &self.epsilon)
            .field("fiber_volume", &self.fiber_volume)
            .field("derivatives", &self.derivatives)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(epsilon))
    }
}

impl KkData {
    /// Fiber volume defaults to 2π and derivatives to analytic mode.
    pub fn new(h: Arc<dyn Field>, phi: Arc<dyn Field>, epsilon: f64) -> Result<Self> {
        if h.arity() != Arity::SymMatrix(2) {
            return Err(Error::WrongArity {
                expected: "sym-matrix(2)",
                found: h.arity().to_string(),
            });
        }
        if phi.arity() != Arity::OneForm(2) {
            return Err(Error::WrongArity {
                expected: "one-form(2)",
                found: phi.arity().to_string(),
            });
        }
        for field in [&h, &phi] {
            if field.chart_dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: field.chart_dim(),
                });
            }
        }
        check_epsilon(epsilon)?;
        Ok(Self {
            h,
            phi,
            epsilon,
            fiber_volume: std::f64::consts::TAU,
            derivatives: DerivativeMode::Analytic,
            domain: None,
        })
    }

    pub fn with_fiber_volume(mut self, fiber_volume: f64) -> Result<Self> {
        if !(fiber_volume.is_finite() && fiber_volume > 0.0) {
            return Err(Error::NonPositiveFiberVolume(fiber_volume));
        }
        self.fiber_volume = fiber_volume;
        Ok(self)
    }

    pub fn with_derivatives(mut self, mode: DerivativeMode) -> Self {
        self.derivatives = mode;
        self
    }

    /// Chart used for finite-difference boundary checks.
    pub fn with_domain(mut self, domain: ChartDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Same fields at another ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let mut out = self.clone();
        out.epsilon = epsilon;
        Ok(out)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn fiber_volume(&self) -> f64 {
        self.fiber_volume
    }

    pub fn derivatives(&self) -> DerivativeMode {
        self.derivatives
    }

    pub fn h_field(&self) -> &Arc<dyn Field> {
        &self.h
    }

    pub fn phi_field(&self) -> &Arc<dyn Field> {
        &self.phi
    }

    fn base_point(point: &[f64]) -> Result<[f64; 2]> {
        if point.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: point.len(),
            });
        }
        Ok([point[0], point[1]])
    }

    fn mat(v: Vec<f64>) -> Result<Mat2> {
        if v.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: v.len() });
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("metric field"));
        }
        Ok([[v[0], v[1]], [v[2], v[3]]])
    }

    fn vec2(v: Vec<f64>) -> Result<[f64; 2]> {
        if v.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: v.len() });
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("one-form field"));
        }
        Ok([v[0], v[1]])
    }

    /// Values and first partials at `point` (the fiber coordinate, if given, is ignored).
    pub fn jet(&self, point: &[f64]) -> Result<BaseJet<f64>> {
        let p = Self::base_point(point)?;
        let (mode, dom) = (self.derivatives, self.domain.as_ref());
        let h = Self::mat(self.h.eval(&p))?;
        let phi = Self::vec2(self.phi.eval(&p))?;
        let mut dh = [[[0.0; 2]; 2]; 2];
        let mut dphi = [[0.0; 2]; 2];
        for g in 0..2 {
            dh[g] = Self::mat(partial_derivative(&*self.h, g, &p, mode, dom)?)?;
            dphi[g] = Self::vec2(partial_derivative(&*self.phi, g, &p, mode, dom)?)?;
        }
        Ok(BaseJet { h, dh, phi, dphi })
    }

    /// Values, first and second partials at `point`.
    pub fn jet2(&self, point: &[f64]) -> Result<BaseJet2> {
        let first = self.jet(point)?;
        let p = Self::base_point(point)?;
        let (mode, dom) = (self.derivatives, self.domain.as_ref());
        let mut ddh = [[[[0.0; 2]; 2]; 2]; 2];
        let mut ddphi = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                ddh[a][b] = Self::mat(second_partial_derivative(&*self.h, a, b, &p, mode, dom)?)?;
                ddphi[a][b] = Self::vec2(second_partial_derivative(&*self.phi, a, b, &p, mode, dom)?)?;
            }
        }
        Ok(BaseJet2 { first, ddh, ddphi })
    }
}

pub(crate) fn sqrt_det2<T: Scalar>(h: &Mat2<T>) -> T {
    (h[0][0] * h[1][1] - h[0][1] * h[1][0]).sqrt()
}

/// G = [[h + εφφᵀ, εφ], [εφᵀ, ε]].
pub fn metric3_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Mat3<T> {
    let mut g = [[cst::<T>(0.0); 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b] = jet.h[a][b] + eps * jet.phi[a] * jet.phi[b];
        }
        g[a][2] = eps * jet.phi[a];
        g[2][a] = eps * jet.phi[a];
    }
    g[2][2] = eps;
    g
}

/// ∂_ρ G by the product rule; ∂₂ G = 0.
pub fn metric3_partials_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> [Mat3<T>; 3] {
    let mut dg = [[[cst::<T>(0.0); 3]; 3]; 3];
    for (g, d) in dg.iter_mut().take(2).enumerate() {
        let dp = jet.dphi[g];
        for a in 0..2 {
            for b in 0..2 {
                d[a][b] = jet.dh[g][a][b] + eps * (dp[a] * jet.phi[b] + jet.phi[a] * dp[b]);
            }
            d[a][2] = eps * dp[a];
            d[2][a] = eps * dp[a];
        }
    }
    dg
}

/// [[h⁻¹, −h⁻¹φ], [−φᵀh⁻¹, 1/ε + φᵀh⁻¹φ]].
pub fn metric3_inverse_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<Mat3<T>> {
    let (hinv, _) = inverse_spd(&jet.h)?;
    let up = raise(&hinv, &jet.phi);
    let mut gi = [[cst::<T>(0.0); 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            gi[a][b] = hinv[a][b];
        }
        gi[a][2] = -up[a];
        gi[2][a] = -up[a];
    }
    gi[2][2] = eps.recip() + up[0] * jet.phi[0] + up[1] * jet.phi[1];
    Ok(gi)
}

pub(crate) fn raise<T: Scalar>(hinv: &Mat2<T>, v: &[T; 2]) -> [T; 2] {
    [
        hinv[0][0] * v[0] + hinv[0][1] * v[1],
        hinv[1][0] * v[0] + hinv[1][1] * v[1],
    ]
}

/// `f_{αβ} = ∂_α φ_β − ∂_β φ_α` and `f = f₀₁ / √h`.
pub fn field_strength_t<T: Scalar>(jet: &BaseJet<T>) -> (Mat2<T>, T) {
    let f01 = jet.dphi[0][1] - jet.dphi[1][0];
    let z = cst::<T>(0.0);
    ([[z, f01], [-f01, z]], f01 / sqrt_det2(&jet.h))
}

/// Christoffel symbols γ^δ_{αβ} of `h`.
pub fn gamma2_t<T: Scalar>(jet: &BaseJet<T>) -> Result<ChristoffelArray<T, 2>> {
    christoffel_from_metric(&jet.h, &jet.dh)
}

/// `D[α][β] = ∂_α φ_β − γ^ζ_{αβ} φ_ζ`.
pub fn covariant_phi_t<T: Scalar>(jet: &BaseJet<T>, gam: &ChristoffelArray<T, 2>) -> Mat2<T> {
    let mut d = [[cst::<T>(0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            d[a][b] = jet.dphi[a][b] - gam[0][a][b] * jet.phi[0] - gam[1][a][b] * jet.phi[1];
        }
    }
    d
}

/// Christoffel symbols of G from the five closed-form families.
pub fn christoffel_closed_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<ChristoffelArray<T, 3>> {
    let (hinv, _) = inverse_spd(&jet.h)?;
    let gam = gamma2_t(jet)?;
    let d = covariant_phi_t(jet, &gam);
    let (fab, _) = field_strength_t(jet);
    let up = raise(&hinv, &jet.phi);
    let phi = jet.phi;
    let half = eps * 0.5;
    let z = cst::<T>(0.0);
    let mut out = [[[z; 3]; 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            // S_ζ = φ_β f_{ζα} + φ_α f_{ζβ}
            let s = [
                phi[b] * fab[0][a] + phi[a] * fab[0][b],
                phi[b] * fab[1][a] + phi[a] * fab[1][b],
            ];
            for del in 0..2 {
                out[del][a][b] = gam[del][a][b] - half * (hinv[del][0] * s[0] + hinv[del][1] * s[1]);
            }
            out[2][a][b] = (d[a][b] + d[b][a]) * 0.5 + half * (up[0] * s[0] + up[1] * s[1]);
        }
    }
    for b in 0..2 {
        for del in 0..2 {
            let v = half * (hinv[del][0] * fab[b][0] + hinv[del][1] * fab[b][1]);
            out[del][2][b] = v;
            out[del][b][2] = v;
        }
        let v = half * (up[0] * fab[0][b] + up[1] * fab[1][b]);
        out[2][2][b] = v;
        out[2][b][2] = v;
    }
    Ok(out)
}

/// Metric and its closed-form inverse at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssembledMetric {
    pub metric: Metric3,
    pub inverse: Metric3,
}

pub fn assemble_metric(kk: &KkData, point: &[f64]) -> Result<AssembledMetric> {
    let p = KkData::base_point(point)?;
    let h = KkData::mat(kk.h.eval(&p))?;
    let phi = KkData::vec2(kk.phi.eval(&p))?;
    crate::geometry::Metric2::new(h)?;
    let jet = BaseJet {
        h,
        dh: [[[0.0; 2]; 2]; 2],
        phi,
        dphi: [[0.0; 2]; 2],
    };
    let g = metric3_t(&jet, kk.epsilon);
    let gi = metric3_inverse_t(&jet, kk.epsilon)?;
    Ok(AssembledMetric {
        metric: Metric3::new_unchecked(g),
        inverse: Metric3::new_unchecked(gi),
    })
}

/// Antisymmetric `f_{αβ}` and the invariant scalar `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStrength {
    pub components: Mat2,
    pub invariant: f64,
}

pub fn field_strength(kk: &KkData, point: &[f64]) -> Result<FieldStrength> {
    let jet = kk.jet(point)?;
    crate::geometry::Metric2::new(jet.h)?;
    let (components, invariant) = field_strength_t(&jet);
    Ok(FieldStrength {
        components,
        invariant,
    })
}

/// Full 2×2 array `D_α φ_β`.
pub fn covariant_derivative_oneform(kk: &KkData, point: &[f64]) -> Result<Mat2> {
    let jet = kk.jet(point)?;
    let gam = gamma2_t(&jet)?;
    Ok(covariant_phi_t(&jet, &gam))
}

pub fn christoffel_closed_form(kk: &KkData, point: &[f64]) -> Result<ChristoffelSet> {
    let jet = kk.jet(point)?;
    Ok(ChristoffelSet::from_array(&christoffel_closed_t(&jet, kk.epsilon)?))
}

/// The assembled 3D metric as a field on the base chart, with product-rule
/// partials. Serves as input to the generic Christoffel formula.
#[derive(Debug, Clone)]
pub struct KkMetricField {
    kk: KkData,
}

impl KkMetricField {
    pub fn new(kk: KkData) -> Self {
        Self { kk }
    }

    fn flat(m: &Mat3) -> Vec<f64> {
        m.iter().flatten().copied().collect()
    }
}

impl Field for KkMetricField {
    fn arity(&self) -> Arity {
        Arity::SymMatrix(3)
    }

    fn chart_dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let h = self.kk.h.eval(&x[..2]);
        let phi = self.kk.phi.eval(&x[..2]);
        let jet = BaseJet {
            h: [[h[0], h[1]], [h[2], h[3]]],
            dh: [[[0.0; 2]; 2]; 2],
            phi: [phi[0], phi[1]],
            dphi: [[0.0; 2]; 2],
        };
        Self::flat(&metric3_t(&jet, self.kk.epsilon))
    }

    fn partial(&self, axis: usize, x: &[f64]) -> Option<Vec<f64>> {
        if axis >= 2 {
            return Some(vec![0.0; 9]);
        }
        let jet = self.kk.jet(x).ok()?;
        Some(Self::flat(&metric3_partials_t(&jet, self.kk.epsilon)[axis]))
    }
}
