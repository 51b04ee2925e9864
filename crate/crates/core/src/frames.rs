//! Orthonormal frames and the spin connection.
//!
//! Storage: `e[a][α]` and `inv[α][a]` for the Zweibein, `E[A][μ]` and
//! `Ẽ[μ][A]` for the Vielbein, `[A_μ]^A_B` as `a[μ][A][B]`, and the reduced
//! connection `A^C_μ` as `a[C][μ]`. The frame metric η is the identity, so
//! lowering frame indices is a no-op.

use serde::{Deserialize, Serialize};

use crate::connection::{christoffel_from_metric, christoffel_generic, lift_metric2, metric2_jet, ChristoffelArray};
use crate::error::{Error, Result};
use crate::geometry::{cst, eps3, inverse_spd, ChartDomain, DerivativeMode, Field, Mat2, Mat3, Metric2, Scalar};
use crate::kaluza_klein::{
    christoffel_closed_t, field_strength_t, gamma2_t, metric3_partials_t, metric3_t, raise, sqrt_det2, BaseJet,
    KkData, KkMetricField,
};

/// Tolerance on the antisymmetry of the lowered spin connection.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zweibein<T = f64> {
    pub e: Mat2<T>,
    pub inv: Mat2<T>,
}

/// Zweibein with its partials `de[γ][a][α] = ∂_γ e^a_α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZweibeinJet<T> {
    pub frame: Zweibein<T>,
    pub de: [Mat2<T>; 2],
}

/// Lower-triangular square root `e = [[e00, 0], [e10, e11]]` with `e11 = √h11`, `e10 = h01/e11`,
/// `e00 = √(h00 − e10²)`.
pub(crate) fn zweibein_t<T: Scalar>(h: &Mat2<T>) -> Result<Zweibein<T>> {
    if !(h[1][1].re() > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let e11 = h[1][1].sqrt();
    let e10 = h[0][1] / e11;
    let rem = h[0][0] - e10 * e10;
    if !(rem.re() > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let e00 = rem.sqrt();
    let z = cst::<T>(0.0);
    let e = [[e00, z], [e10, e11]];
    let inv = [[e00.recip(), z], [-e10 / (e00 * e11), e11.recip()]];
    Ok(Zweibein { e, inv })
}

pub(crate) fn zweibein_jet_t<T: Scalar>(h: &Mat2<T>, dh: &[Mat2<T>; 2]) -> Result<ZweibeinJet<T>> {
    let frame = zweibein_t(h)?;
    let [[e00, _], [e10, e11]] = frame.e;
    let z = cst::<T>(0.0);
    let mut de = [[[z; 2]; 2]; 2];
    for (g, d) in de.iter_mut().enumerate() {
        let d11 = dh[g][1][1] / (e11 * 2.0);
        let d10 = (dh[g][0][1] - e10 * d11) / e11;
        let d00 = (dh[g][0][0] - e10 * d10 * 2.0) / (e00 * 2.0);
        *d = [[d00, z], [d10, d11]];
    }
    Ok(ZweibeinJet { frame, de })
}

pub fn build_zweibein(h: &Metric2) -> Result<Zweibein> {
    zweibein_t(h.components())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vielbein3<T = f64> {
    pub e: Mat3<T>,
    pub inv: Mat3<T>,
}

/// Vielbein with partials `de[μ][A][λ] = ∂_μ E^A_λ` (∂₂ E = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VielbeinJet<T> {
    pub frame: Vielbein3<T>,
    pub de: [Mat3<T>; 3],
    pub zweibein: ZweibeinJet<T>,
}

pub(crate) fn vielbein_jet_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<VielbeinJet<T>> {
    let zw = zweibein_jet_t(&jet.h, &jet.dh)?;
    let (e, inv) = (zw.frame.e, zw.frame.inv);
    let s = eps.sqrt();
    let z = cst::<T>(0.0);
    let mut ev = [[z; 3]; 3];
    let mut iv = [[z; 3]; 3];
    for a in 0..2 {
        for al in 0..2 {
            ev[a][al] = e[a][al];
            iv[al][a] = inv[al][a];
        }
        ev[2][a] = s * jet.phi[a];
        iv[2][a] = -(jet.phi[0] * inv[0][a] + jet.phi[1] * inv[1][a]);
    }
    ev[2][2] = s;
    iv[2][2] = s.recip();
    let mut de = [[[z; 3]; 3]; 3];
    for g in 0..2 {
        for a in 0..2 {
            for al in 0..2 {
                de[g][a][al] = zw.de[g][a][al];
            }
            de[g][2][a] = s * jet.dphi[g][a];
        }
    }
    Ok(VielbeinJet {
        frame: Vielbein3 { e: ev, inv: iv },
        de,
        zweibein: zw,
    })
}

pub fn build_vielbein3(kk: &KkData, point: &[f64]) -> Result<Vielbein3> {
    let jet = kk.jet(point)?;
    Ok(vielbein_jet_t(&jet, kk.epsilon())?.frame)
}

/// `[A_μ]^A_B` for μ = 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinConnection {
    pub components: [Mat3; 3],
}

impl SpinConnection {
    pub fn zeros() -> Self {
        Self {
            components: [[[0.0; 3]; 3]; 3],
        }
    }

    /// `[A_μ]^A_B`.
    pub fn get(&self, mu: usize, a: usize, b: usize) -> f64 {
        self.components[mu][a][b]
    }

    /// `[A_μ]_{AB}`; identical to the mixed form for Euclidean η.
    pub fn lowered(&self, mu: usize, a: usize, b: usize) -> f64 {
        self.components[mu][a][b]
    }

    /// max |[A_μ]_{AB} + [A_μ]_{BA}|.
    pub fn antisymmetry_violation(&self) -> f64 {
        let mut m = 0.0_f64;
        for mu in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    m = m.max((self.lowered(mu, a, b) + self.lowered(mu, b, a)).abs());
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_diff(self.components.iter().flatten().flatten(), other.components.iter().flatten().flatten())
    }
}

fn max_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `A^C_μ` stored as `components[C][μ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedConnection {
    pub components: Mat3,
}

impl ReducedConnection {
    pub fn get(&self, c: usize, mu: usize) -> f64 {
        self.components[c][mu]
    }

    /// `[A_μ]_{AB} = ε_{ABC} A^C_μ`.
    pub fn reconstruct(&self) -> SpinConnection {
        let mut out = SpinConnection::zeros();
        for mu in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out.components[mu][a][b] = (0..3).map(|c| eps3(a, b, c) * self.components[c][mu]).sum();
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_diff(self.components.iter().flatten(), other.components.iter().flatten())
    }
}

/// [A_μ]^A_B = E^A_ν Ẽ^λ_B Γ^ν_{μλ} − Ẽ^λ_B ∂_μ E^A_λ.
pub(crate) fn spin_from_parts<T: Scalar>(vb: &VielbeinJet<T>, gam: &ChristoffelArray<T, 3>) -> [Mat3<T>; 3] {
    let (e, inv) = (&vb.frame.e, &vb.frame.inv);
    let z = cst::<T>(0.0);
    let mut out = [[[z; 3]; 3]; 3];
    for (mu, am) in out.iter_mut().enumerate() {
        for a in 0..3 {
            for b in 0..3 {
                let mut s = z;
                for lam in 0..3 {
                    let mut conn = z;
                    for nu in 0..3 {
                        conn += e[a][nu] * gam[nu][mu][lam];
                    }
                    s += inv[lam][b] * (conn - vb.de[mu][a][lam]);
                }
                am[a][b] = s;
            }
        }
    }
    out
}

/// Generic spin connection from the defining formula, with the Christoffel
/// symbols of the assembled metric computed from its partials.
pub(crate) fn spin_generic_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<[Mat3<T>; 3]> {
    let vb = vielbein_jet_t(jet, eps)?;
    let gam = christoffel_from_metric(&metric3_t(jet, eps), &metric3_partials_t(jet, eps))?;
    Ok(spin_from_parts(&vb, &gam))
}

/// `D[α][a][ζ] = ∂_α e^a_ζ − γ^δ_{αζ} e^a_δ`.
fn covariant_zweibein_t<T: Scalar>(zw: &ZweibeinJet<T>, gam: &ChristoffelArray<T, 2>) -> [Mat2<T>; 2] {
    let e = &zw.frame.e;
    let mut d = [[[cst::<T>(0.0); 2]; 2]; 2];
    for al in 0..2 {
        for a in 0..2 {
            for ze in 0..2 {
                d[al][a][ze] = zw.de[al][a][ze] - gam[0][al][ze] * e[a][0] - gam[1][al][ze] * e[a][1];
            }
        }
    }
    d
}

/// ω_α = ẽ^ζ_1 D_α e^0_ζ.
pub(crate) fn omega_t<T: Scalar>(h: &Mat2<T>, dh: &[Mat2<T>; 2]) -> Result<[T; 2]> {
    let zw = zweibein_jet_t(h, dh)?;
    let gam = christoffel_from_metric(h, dh)?;
    let d = covariant_zweibein_t(&zw, &gam);
    let inv = &zw.frame.inv;
    Ok([
        inv[0][1] * d[0][0][0] + inv[1][1] * d[0][0][1],
        inv[0][1] * d[1][0][0] + inv[1][1] * d[1][0][1],
    ])
}

/// Spin connection from the closed-form families.
pub(crate) fn spin_closed_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<[Mat3<T>; 3]> {
    let zw = zweibein_jet_t(&jet.h, &jet.dh)?;
    let gam = gamma2_t(jet)?;
    let d = covariant_zweibein_t(&zw, &gam);
    let (hinv, _) = inverse_spd(&jet.h)?;
    let (fab, _) = field_strength_t(jet);
    let (e, inv) = (&zw.frame.e, &zw.frame.inv);
    let half = eps * 0.5;
    let shalf = eps.sqrt() * 0.5;
    let z = cst::<T>(0.0);
    // eh[a][ρ] = e^a_δ h^{δρ}
    let mut eh = [[z; 2]; 2];
    for a in 0..2 {
        for r in 0..2 {
            eh[a][r] = e[a][0] * hinv[0][r] + e[a][1] * hinv[1][r];
        }
    }
    let mut out = [[[z; 3]; 3]; 3];
    for al in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let mut s = z;
                for ze in 0..2 {
                    let ef = eh[a][0] * fab[0][ze] + eh[a][1] * fab[1][ze];
                    s += inv[ze][b] * (-d[al][a][ze] - half * jet.phi[al] * ef);
                }
                out[al][a][b] = s;
            }
            let v = shalf * (eh[a][0] * fab[al][0] + eh[a][1] * fab[al][1]);
            out[al][a][2] = v;
            out[al][2][a] = -v;
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            let mut s = z;
            for ze in 0..2 {
                s += inv[ze][b] * (eh[a][0] * fab[ze][0] + eh[a][1] * fab[ze][1]);
            }
            out[2][a][b] = half * s;
        }
    }
    Ok(out)
}

/// A^C_μ = ½ ε^{ABC} [A_μ]_{AB}, without the antisymmetry check.
pub(crate) fn reduce_t<T: Scalar>(a: &[Mat3<T>; 3]) -> Mat3<T> {
    let mut out = [[cst::<T>(0.0); 3]; 3];
    for (c, row) in out.iter_mut().enumerate() {
        for (mu, am) in a.iter().enumerate() {
            let mut s = cst::<T>(0.0);
            for x in 0..3 {
                for y in 0..3 {
                    let sign = eps3(x, y, c);
                    if sign != 0.0 {
                        s += am[x][y] * sign;
                    }
                }
            }
            row[mu] = s * 0.5;
        }
    }
    out
}

/// Closed-form reduced connection with its named ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParts<T> {
    pub connection: Mat3<T>,
    pub omega: [T; 2],
    pub f: T,
    pub sqrt_h: T,
}

pub(crate) fn reduced_closed_t<T: Scalar>(jet: &BaseJet<T>, eps: T) -> Result<ReducedParts<T>> {
    let omega = omega_t(&jet.h, &jet.dh)?;
    let zw = zweibein_t(&jet.h)?;
    let (_, f) = field_strength_t(jet);
    let z = cst::<T>(0.0);
    let half = eps * 0.5;
    let shalf = eps.sqrt() * 0.5;
    let mut a = [[z; 3]; 3];
    for al in 0..2 {
        a[2][al] = -omega[al] - half * f * jet.phi[al];
        for c in 0..2 {
            a[c][al] = shalf * zw.e[c][al] * f;
        }
    }
    a[2][2] = -half * f;
    Ok(ReducedParts {
        connection: a,
        omega,
        f,
        sqrt_h: sqrt_det2(&jet.h),
    })
}

/// Spin connection from the defining formula, with Γ taken from the generic
/// Christoffel routine applied to the assembled metric field.
pub fn spin_connection_generic(kk: &KkData, point: &[f64]) -> Result<SpinConnection> {
    let jet = kk.jet(point)?;
    let vb = vielbein_jet_t(&jet, kk.epsilon())?;
    let set = christoffel_generic(&KkMetricField::new(kk.clone()), point, DerivativeMode::Analytic, None)?;
    let mut gam = [[[0.0; 3]; 3]; 3];
    for (l, g) in gam.iter_mut().enumerate() {
        for m in 0..3 {
            for n in 0..3 {
                g[m][n] = set.get(l, m, n);
            }
        }
    }
    Ok(SpinConnection {
        components: spin_from_parts(&vb, &gam),
    })
}

pub fn spin_connection_closed_form(kk: &KkData, point: &[f64]) -> Result<SpinConnection> {
    let jet = kk.jet(point)?;
    Ok(SpinConnection {
        components: spin_closed_t(&jet, kk.epsilon())?,
    })
}

pub fn reduce_spin_connection(a: &SpinConnection) -> Result<ReducedConnection> {
    let v = a.antisymmetry_violation();
    if !(v <= ANTISYMMETRY_TOLERANCE) {
        return Err(Error::AntisymmetryViolation(v));
    }
    Ok(ReducedConnection {
        components: reduce_t(&a.components),
    })
}

/// Closed-form reduced connection plus ω_α, f and √h at the point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedClosedForm {
    pub connection: ReducedConnection,
    pub omega: [f64; 2],
    pub f: f64,
}

pub fn reduced_closed_form(kk: &KkData, point: &[f64]) -> Result<ReducedClosedForm> {
    let jet = kk.jet(point)?;
    let parts = reduced_closed_t(&jet, kk.epsilon())?;
    Ok(ReducedClosedForm {
        connection: ReducedConnection {
            components: parts.connection,
        },
        omega: parts.omega,
        f: parts.f,
    })
}

/// Scalar curvature from the curl of the 2D spin connection,
/// r = 2(∂₁ω₀ − ∂₀ω₁)/√h.
pub fn scalar_curvature_2d_curl(
    h_field: &dyn Field,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<f64> {
    let (h, dh, ddh) = metric2_jet(h_field, point, mode, domain)?;
    let mut domega = [[0.0; 2]; 2];
    for (nu, d) in domega.iter_mut().enumerate() {
        let (hl, dhl) = lift_metric2(&h, &dh, &ddh, nu);
        let w = omega_t(&hl, &dhl)?;
        *d = [w[0].eps, w[1].eps];
    }
    let r = 2.0 * (domega[1][0] - domega[0][1]) / sqrt_det2(&h);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("scalar curvature"))
    }
}

/// Raised one-form `φ^α = h^{αβ} φ_β`, exposed for diagnostics.
pub fn raised_phi(jet: &BaseJet<f64>) -> Result<[f64; 2]> {
    let (hinv, _) = inverse_spd(&jet.h)?;
    Ok(raise(&hinv, &jet.phi))
}

/// Christoffel symbols of G from the closed form, as a full array.
pub fn christoffel_closed_array(jet: &BaseJet<f64>, eps: f64) -> Result<ChristoffelArray<f64, 3>> {
    christoffel_closed_t(jet, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Arity, ConstantField, FnField};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn zweibein_examples() {
        let z = build_zweibein(&Metric2::identity()).unwrap();
        assert_eq!(z.e, [[1.0, 0.0], [0.0, 1.0]]);
        let z = build_zweibein(&Metric2::new([[4.0, 0.0], [0.0, 9.0]]).unwrap()).unwrap();
        assert_eq!(z.e, [[2.0, 0.0], [0.0, 3.0]]);
        let z = build_zweibein(&Metric2::new([[2.0, 0.7], [0.7, 1.5]]).unwrap()).unwrap();
        let det = z.e[0][0] * z.e[1][1] - z.e[0][1] * z.e[1][0];
        assert_abs_diff_eq!(det, (2.0f64 * 1.5 - 0.49).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn flat_product_vielbein_is_identity() {
        let h: Arc<dyn Field> = Arc::new(ConstantField::new(Arity::SymMatrix(2), 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let phi: Arc<dyn Field> = Arc::new(ConstantField::new(Arity::OneForm(2), 2, vec![0.0, 0.0]).unwrap());
        let kk = KkData::new(h, phi, 1.0).unwrap();
        let v = build_vielbein3(&kk, &[0.1, 0.2]).unwrap();
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(v.e, id);
        assert_eq!(v.inv, id);
        assert_eq!(spin_connection_generic(&kk, &[0.1, 0.2]).unwrap(), SpinConnection::zeros());
    }

    #[test]
    fn reduce_single_entry() {
        let mut a = SpinConnection::zeros();
        a.components[0][0][1] = 0.8;
        a.components[0][1][0] = -0.8;
        let r = reduce_spin_connection(&a).unwrap();
        for c in 0..3 {
            for mu in 0..3 {
                assert_eq!(r.get(c, mu), if (c, mu) == (2, 0) { 0.8 } else { 0.0 });
            }
        }
        assert_eq!(reduce_spin_connection(&SpinConnection::zeros()).unwrap().components, [[0.0; 3]; 3]);
    }

    #[test]
    fn reduce_rejects_symmetric_part() {
        let mut a = SpinConnection::zeros();
        a.components[1][0][2] = 1.0;
        a.components[1][2][0] = -0.9;
        assert!(matches!(reduce_spin_connection(&a), Err(Error::AntisymmetryViolation(_))));
    }

    #[test]
    fn curl_curvature_on_sphere() {
        let h = crate::presets::sphere_metric(0.5);
        for x0 in [0.3, 1.5, 2.7] {
            let r = scalar_curvature_2d_curl(&h, &[x0, 0.1], DerivativeMode::Analytic, None).unwrap();
            assert_abs_diff_eq!(r, 8.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sphere_spin_connection_winds() {
        // ω₁ = cos x⁰ for the round metric in the lower-triangular gauge
        let h = crate::presets::sphere_metric(0.5);
        let jet = crate::connection::metric2_jet(&h, &[0.9, 0.0], DerivativeMode::Analytic, None).unwrap();
        let w = omega_t(&jet.0, &jet.1).unwrap();
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.9f64.cos(), epsilon = 1e-14);
    }

    #[test]
    fn hyperbolic_curl_curvature() {
        let h = FnField::new(Arity::SymMatrix(2), 2, |x| vec![1.0, 0.0, 0.0, (2.0 * x[0]).exp()])
            .with_partial(|a, x| vec![0.0, 0.0, 0.0, if a == 0 { 2.0 * (2.0 * x[0]).exp() } else { 0.0 }])
            .with_second_partial(|a, b, x| {
                vec![0.0, 0.0, 0.0, if a == 0 && b == 0 { 4.0 * (2.0 * x[0]).exp() } else { 0.0 }]
            });
        let r = scalar_curvature_2d_curl(&h, &[0.2, 0.3], DerivativeMode::Analytic, None).unwrap();
        assert_abs_diff_eq!(r, -2.0, epsilon = 1e-12);
    }
}
