//! Chern-Simons densities, the direct and reduced integrals, and the ε-sweep.

use std::f64::consts::PI;

use num_dual::Dual64;
use serde::{Deserialize, Serialize};

use crate::connection::scalar_curvature_from_jet;
use crate::error::{Error, Result};
use crate::frames::{reduced_closed_t, spin_generic_t};
use crate::geometry::{eps3, ChartDomain, Mat3};
use crate::kaluza_klein::KkData;
use crate::quadrature::{integrate_fn, integrate_many, Integral, QuadratureSpec};

/// Sign applied to the direct 3D integral so both routes share the orientation
/// of the base in which the reduced formula is stated.
pub const ORIENTATION: f64 = -1.0;

/// −(1/2π) ε^{μνλ} Σ_B A^B_μ ∂_ν A^B_λ + (1/π) det(A^C_μ),
/// with `a[C][μ]` and `da[ν][C][μ] = ∂_ν A^C_μ`.
pub fn reduced_density(a: &Mat3, da: &[Mat3; 3]) -> f64 {
    let mut cs = 0.0;
    for mu in 0..3 {
        for nu in 0..3 {
            for lam in 0..3 {
                let s = eps3(mu, nu, lam);
                if s != 0.0 {
                    cs += s * (0..3).map(|b| a[b][mu] * da[nu][b][lam]).sum::<f64>();
                }
            }
        }
    }
    -cs / (2.0 * PI) + det3(a) / PI
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// (1/4π) ε^{μνλ} Tr(A_μ ∂_ν A_λ + ⅔ A_μ A_ν A_λ),
/// with `a[μ][A][B]` and `da[ν][λ][A][B] = ∂_ν [A_λ]^A_B`.
pub fn trace_density(a: &[Mat3; 3], da: &[[Mat3; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for mu in 0..3 {
        for nu in 0..3 {
            for lam in 0..3 {
                let e = eps3(mu, nu, lam);
                if e != 0.0 {
                    let cubic = trace(&matmul(&matmul(&a[mu], &a[nu]), &a[lam]));
                    s += e * (trace(&matmul(&a[mu], &da[nu][lam])) + 2.0 / 3.0 * cubic);
                }
            }
        }
    }
    s / (4.0 * PI)
}

/// A reduced connection `A^C_μ` with its partials at a chart point.
pub trait ReducedConnectionField: Sync {
    fn reduced_jet(&self, x: &[f64]) -> Result<(Mat3, [Mat3; 3])>;
}

/// A matrix-valued spin connection `[A_μ]^A_B` with its partials.
pub trait SpinConnectionField: Sync {
    fn spin_jet(&self, x: &[f64]) -> Result<([Mat3; 3], [[Mat3; 3]; 3])>;
}

fn eps_parts<const R: usize, const C: usize>(m: &[[Dual64; C]; R]) -> [[f64; C]; R] {
    m.map(|row| row.map(|v| v.eps))
}

/// Closed-form reduced connection of the metric family.
impl ReducedConnectionField for KkData {
    fn reduced_jet(&self, x: &[f64]) -> Result<(Mat3, [Mat3; 3])> {
        let jet2 = self.jet2(x)?;
        let parts = reduced_closed_t(&jet2.first, self.epsilon())?;
        let mut da = [[[0.0; 3]; 3]; 3];
        for (nu, d) in da.iter_mut().take(2).enumerate() {
            let lifted = reduced_closed_t(&jet2.lift(nu), Dual64::from(self.epsilon()))?;
            *d = eps_parts(&lifted.connection);
        }
        Ok((parts.connection, da))
    }
}

/// Spin connection of the metric family from the defining formula.
impl SpinConnectionField for KkData {
    fn spin_jet(&self, x: &[f64]) -> Result<([Mat3; 3], [[Mat3; 3]; 3])> {
        let jet2 = self.jet2(x)?;
        let a = spin_generic_t(&jet2.first, self.epsilon())?;
        let mut da = [[[[0.0; 3]; 3]; 3]; 3];
        for (nu, d) in da.iter_mut().take(2).enumerate() {
            let lifted = spin_generic_t(&jet2.lift(nu), Dual64::from(self.epsilon()))?;
            *d = lifted.map(|m| eps_parts(&m));
        }
        Ok((a, da))
    }
}

pub fn cs_integrand_reduced(field: &dyn ReducedConnectionField, x: &[f64]) -> Result<f64> {
    let (a, da) = field.reduced_jet(x)?;
    Ok(reduced_density(&a, &da))
}

pub fn cs_integrand_trace(field: &dyn SpinConnectionField, x: &[f64]) -> Result<f64> {
    let (a, da) = field.spin_jet(x)?;
    Ok(trace_density(&a, &da))
}

/// Pointwise ingredients of both routes at one base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityTerms {
    /// Full reduced density, exact term included.
    pub density: f64,
    /// ∂₁(ω₀ f) − ∂₀(ω₁ f).
    pub exact_term: f64,
    /// √h f r.
    pub linear: f64,
    /// √h f³.
    pub quadratic: f64,
    pub f: f64,
    pub r: f64,
    pub sqrt_h: f64,
}

pub fn density_terms(kk: &KkData, x: &[f64]) -> Result<DensityTerms> {
    let jet2 = kk.jet2(x)?;
    let eps = kk.epsilon();
    let parts = reduced_closed_t(&jet2.first, eps)?;
    let mut da = [[[0.0; 3]; 3]; 3];
    let mut dwf = [[0.0; 2]; 2];
    for nu in 0..2 {
        let lifted = reduced_closed_t(&jet2.lift(nu), Dual64::from(eps))?;
        da[nu] = eps_parts(&lifted.connection);
        for al in 0..2 {
            dwf[nu][al] = (lifted.omega[al] * lifted.f).eps;
        }
    }
    let j = &jet2.first;
    let r = scalar_curvature_from_jet(&j.h, &j.dh, &jet2.ddh)?;
    let (f, sqrt_h) = (parts.f, parts.sqrt_h);
    Ok(DensityTerms {
        density: reduced_density(&parts.connection, &da),
        exact_term: dwf[1][0] - dwf[0][1],
        linear: sqrt_h * f * r,
        quadratic: sqrt_h * f * f * f,
        f,
        r,
        sqrt_h,
    })
}

/// Both Chern-Simons routes at one ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsResult {
    pub epsilon: f64,
    pub fiber_volume: f64,
    /// Oriented fiber-volume × base integral of the density with the exact
    /// term removed.
    pub cs_direct: f64,
    /// term_linear·ε + term_quadratic·ε².
    pub cs_reduced: f64,
    /// (V/4π) ∫ r f √h.
    pub term_linear: f64,
    /// (V/4π) ∫ f³ √h.
    pub term_quadratic: f64,
    /// Sum of the direct and reduced quadrature error estimates.
    pub quadrature_error_estimate: f64,
    pub direct_error_estimate: f64,
    pub reduced_error_estimate: f64,
    /// Oriented direct integral keeping the exact term.
    pub cs_direct_with_exact_term: f64,
    /// ∫ [∂₁(ω₀ f) − ∂₀(ω₁ f)] dx⁰dx¹ over the chart.
    pub exact_term_integral: f64,
    pub exact_term_error_estimate: f64,
}

impl CsResult {
    pub fn route_gap(&self) -> f64 {
        (self.cs_direct - self.cs_reduced).abs()
    }
}

fn check_domain(domain: &ChartDomain) -> Result<()> {
    if domain.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: domain.dim(),
        });
    }
    Ok(())
}

/// Direct and reduced Chern-Simons values of `kk` over a closed base chart.
pub fn cs_reduced(kk: &KkData, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<CsResult> {
    check_domain(domain)?;
    let eps = kk.epsilon();
    let [density, exact, lin, quad] = integrate_many(
        |x| {
            let t = density_terms(kk, x)?;
            Ok([t.density, t.exact_term, t.linear, t.quadratic])
        },
        domain,
        spec,
    )?;
    let v = kk.fiber_volume();
    let scale = v / (4.0 * PI);
    let term_linear = scale * lin.value;
    let term_quadratic = scale * quad.value;
    let shift = eps / (4.0 * PI);
    let cs_direct = ORIENTATION * v * (density.value + shift * exact.value);
    let direct_error = v * (density.error_estimate + shift * exact.error_estimate);
    let reduced_error = scale * (eps * lin.error_estimate + eps * eps * quad.error_estimate);
    Ok(CsResult {
        epsilon: eps,
        fiber_volume: v,
        cs_direct,
        cs_reduced: term_linear * eps + term_quadratic * eps * eps,
        term_linear,
        term_quadratic,
        quadrature_error_estimate: direct_error + reduced_error,
        direct_error_estimate: direct_error,
        reduced_error_estimate: reduced_error,
        cs_direct_with_exact_term: ORIENTATION * v * density.value,
        exact_term_integral: exact.value,
        exact_term_error_estimate: exact.error_estimate,
    })
}

/// Oriented direct integral alone, with its error estimate.
pub fn cs_direct(kk: &KkData, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<Integral> {
    check_domain(domain)?;
    let shift = kk.epsilon() / (4.0 * PI);
    let s = ORIENTATION * kk.fiber_volume();
    let r = integrate_fn(
        |x| {
            let t = density_terms(kk, x)?;
            Ok(t.density + shift * t.exact_term)
        },
        domain,
        spec,
    )?;
    Ok(Integral {
        value: s * r.value,
        refined_value: s * r.refined_value,
        error_estimate: s.abs() * r.error_estimate,
    })
}

/// Chart integral of the exact term ∂₁(ω₀ f) − ∂₀(ω₁ f).
pub fn exact_term_integral(kk: &KkData, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<Integral> {
    check_domain(domain)?;
    integrate_fn(|x| Ok(density_terms(kk, x)?.exact_term), domain, spec)
}

/// Least-squares coefficients of `a·ε + b·ε²` through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub a: f64,
    pub b: f64,
    /// max |y − fit| / max |y| (0 when every y is 0).
    pub residual: f64,
}

impl Fit {
    pub fn eval(&self, eps: f64) -> f64 {
        self.a * eps + self.b * eps * eps
    }
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if let Some(&bad) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::NonPositiveEpsilon(bad));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(Error::DegenerateGrid(sorted.len()));
    }
    Ok(())
}

pub fn fit_quadratic(eps: &[f64], values: &[f64]) -> Result<Fit> {
    if eps.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: eps.len(),
            found: values.len(),
        });
    }
    check_grid(eps)?;
    let (mut s2, mut s3, mut s4, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&e, &y) in eps.iter().zip(values) {
        s2 += e * e;
        s3 += e * e * e;
        s4 += e * e * e * e;
        y1 += e * y;
        y2 += e * e * y;
    }
    let det = s2 * s4 - s3 * s3;
    if !(det.abs() > 0.0) {
        return Err(Error::DegenerateGrid(eps.len()));
    }
    let a = (y1 * s4 - y2 * s3) / det;
    let b = (s2 * y2 - s3 * y1) / det;
    let fit = Fit { a, b, residual: 0.0 };
    let scale = values.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    let worst = eps
        .iter()
        .zip(values)
        .fold(0.0_f64, |m, (&e, &y)| m.max((y - fit.eval(e)).abs()));
    let residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(Fit { residual, ..fit })
}

/// Per-ε results and the fit of `cs_reduced` against ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub results: Vec<CsResult>,
    pub fit: Fit,
}

impl Sweep {
    /// Value at the smallest ε of the grid.
    pub fn smallest_epsilon_value(&self) -> Option<f64> {
        self.results
            .iter()
            .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
            .map(|r| r.cs_reduced)
    }
}

pub fn adiabatic_sweep(kk: &KkData, eps_grid: &[f64], domain: &ChartDomain, spec: &QuadratureSpec) -> Result<Sweep> {
    check_grid(eps_grid)?;
    let results = eps_grid
        .iter()
        .map(|&e| cs_reduced(&kk.with_epsilon(e)?, domain, spec))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = results.iter().map(|r| r.cs_reduced).collect();
    let fit = fit_quadratic(eps_grid, &ys)?;
    Ok(Sweep { results, fit })
}

/// CS / (24π), the Chern-Simons share of the framing correction.
pub fn framing_correction(cs_value: f64) -> f64 {
    cs_value / (24.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_connection_has_zero_density() {
        let z = [[0.0; 3]; 3];
        assert_eq!(reduced_density(&z, &[z; 3]), 0.0);
        assert_eq!(trace_density(&[z; 3], &[[z; 3]; 3]), 0.0);
    }

    #[test]
    fn lone_fiber_component_is_rank_deficient() {
        let mut a = [[0.0; 3]; 3];
        a[2][2] = -0.25;
        assert_eq!(reduced_density(&a, &[[[0.0; 3]; 3]; 3]), 0.0);
    }

    #[test]
    fn constant_trace_density_matches_brute_force() {
        let mut a = [[[0.0; 3]; 3]; 3];
        let vals = [0.3, -1.1, 0.7, 0.2, 0.9, -0.4, 0.5, -0.8, 1.3];
        for mu in 0..3 {
            a[mu][0][1] = vals[3 * mu];
            a[mu][0][2] = vals[3 * mu + 1];
            a[mu][1][2] = vals[3 * mu + 2];
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                a[mu][j][i] = -a[mu][i][j];
            }
        }
        let mut brute = 0.0;
        for mu in 0..3 {
            for nu in 0..3 {
                for lam in 0..3 {
                    let e = crate::geometry::levi_civita_symbol(&[mu, nu, lam]).unwrap() as f64;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                brute += e * a[mu][i][j] * a[nu][j][k] * a[lam][k][i];
                            }
                        }
                    }
                }
            }
        }
        let got = trace_density(&a, &[[[[0.0; 3]; 3]; 3]; 3]);
        assert_abs_diff_eq!(got, brute * 2.0 / 3.0 / (4.0 * PI), epsilon = 1e-14);
    }

    #[test]
    fn fit_recovers_exact_quadratic() {
        let eps = [1.0, 0.5, 0.25, 0.1];
        let ys: Vec<f64> = eps.iter().map(|e| 3.0 * e - 0.5 * e * e).collect();
        let fit = fit_quadratic(&eps, &ys).unwrap();
        assert_abs_diff_eq!(fit.a, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.b, -0.5, epsilon = 1e-12);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn fit_rejects_degenerate_grids() {
        assert!(matches!(fit_quadratic(&[1.0, 1.0, 0.5], &[0.0; 3]), Err(Error::DegenerateGrid(2))));
        assert!(matches!(fit_quadratic(&[1.0, 0.0, 0.5], &[0.0; 3]), Err(Error::NonPositiveEpsilon(_))));
        let zero = fit_quadratic(&[1.0, 0.5, 0.25], &[0.0; 3]).unwrap();
        assert_eq!((zero.a, zero.b, zero.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn framing_examples() {
        assert_eq!(framing_correction(0.0), 0.0);
        assert_abs_diff_eq!(framing_correction(24.0 * PI), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(framing_correction(4.0 * PI + PI / 2.0), 1.0 / 6.0 + 1.0 / 48.0, epsilon = 1e-15);
    }
}
