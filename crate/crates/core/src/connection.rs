//! Levi-Civita connection of a 2D or 3D metric from its defining formula, and
//! the scalar curvature of a surface metric.

use num_dual::Dual64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cst, dual, inverse_spd, partial_derivative, second_partial_derivative, Arity, ChartDomain,
    DerivativeMode, Field, Mat2, Scalar,
};

/// Full Christoffel array `gam[λ][μ][ν]`.
pub type ChristoffelArray<T, const N: usize> = [[[T; N]; N]; N];

/// Γ^λ_{μν} = ½ G^{λρ}(∂_ν G_{ρμ} + ∂_μ G_{ρν} − ∂_ρ G_{μν}), with `dg[ρ] = ∂_ρ G`.
pub fn christoffel_from_metric<T: Scalar, const N: usize>(
    g: &[[T; N]; N],
    dg: &[[[T; N]; N]; N],
) -> Result<ChristoffelArray<T, N>> {
    let (ginv, _) = inverse_spd(g)?;
    // lowered[ρ][μ][ν] = ½(∂_ν G_{ρμ} + ∂_μ G_{ρν} − ∂_ρ G_{μν})
    let mut lowered = [[[cst::<T>(0.0); N]; N]; N];
    for (rho, lr) in lowered.iter_mut().enumerate() {
        for mu in 0..N {
            for nu in mu..N {
                let v = (dg[nu][rho][mu] + dg[mu][rho][nu] - dg[rho][mu][nu]) * 0.5;
                lr[mu][nu] = v;
                lr[nu][mu] = v;
            }
        }
    }
    let mut gam = [[[cst::<T>(0.0); N]; N]; N];
    for lam in 0..N {
        for mu in 0..N {
            for nu in mu..N {
                let mut s = cst::<T>(0.0);
                for rho in 0..N {
                    s += ginv[lam][rho] * lowered[rho][mu][nu];
                }
                gam[lam][mu][nu] = s;
                gam[lam][nu][mu] = s;
            }
        }
    }
    Ok(gam)
}

/// Christoffel symbols at a point, stored once per unordered lower pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelSet {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelSet {
    fn pair_index(dim: usize, mu: usize, nu: usize) -> usize {
        let (a, b) = if mu <= nu { (mu, nu) } else { (nu, mu) };
        // row-major upper triangle
        a * dim - a * (a + 1) / 2 + b
    }

    fn pairs(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * Self::pairs(dim)],
        }
    }

    pub fn from_array<const N: usize>(gam: &ChristoffelArray<f64, N>) -> Self {
        let mut set = Self::zeros(N);
        for (lam, g) in gam.iter().enumerate() {
            for mu in 0..N {
                for nu in mu..N {
                    set.set(lam, mu, nu, g[mu][nu]);
                }
            }
        }
        set
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, lam: usize, mu: usize, nu: usize) -> f64 {
        self.data[lam * Self::pairs(self.dim) + Self::pair_index(self.dim, mu, nu)]
    }

    pub(crate) fn set(&mut self, lam: usize, mu: usize, nu: usize, v: f64) {
        let idx = lam * Self::pairs(self.dim) + Self::pair_index(self.dim, mu, nu);
        self.data[idx] = v;
    }

    /// Independent components (λ, μ ≤ ν).
    pub fn independent_len(&self) -> usize {
        self.data.len()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "comparing Christoffel sets of different dimension");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

fn matrix_dim(field: &dyn Field) -> Result<usize> {
    match field.arity() {
        Arity::SymMatrix(n) if n == 2 || n == 3 => Ok(n),
        other => Err(Error::WrongArity {
            expected: "sym-matrix(2) or sym-matrix(3)",
            found: other.to_string(),
        }),
    }
}

fn padded(point: &[f64], n: usize) -> Vec<f64> {
    let mut p = point.to_vec();
    if p.len() < n {
        p.resize(n, 0.0);
    }
    p
}

fn to_mat<const N: usize>(v: &[f64]) -> Result<[[f64; N]; N]> {
    if v.len() != N * N {
        return Err(Error::DimensionMismatch {
            expected: N * N,
            found: v.len(),
        });
    }
    let mut m = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            m[i][j] = v[i * N + j];
        }
    }
    Ok(m)
}

fn generic_n<const N: usize>(
    field: &dyn Field,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<ChristoffelSet> {
    let p = padded(point, N);
    let g = to_mat::<N>(&field.eval(&p))?;
    let mut dg = [[[0.0; N]; N]; N];
    for (rho, d) in dg.iter_mut().enumerate() {
        *d = to_mat::<N>(&partial_derivative(field, rho, &p, mode, domain)?)?;
    }
    Ok(ChristoffelSet::from_array(&christoffel_from_metric(&g, &dg)?))
}

/// Christoffel symbols of a metric field at `point` from the defining formula.
pub fn christoffel_generic(
    metric: &dyn Field,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<ChristoffelSet> {
    match matrix_dim(metric)? {
        2 => generic_n::<2>(metric, point, mode, domain),
        _ => generic_n::<3>(metric, point, mode, domain),
    }
}

/// ∂_ν of a 2×2 metric jet: value `∂_ν h`, derivatives `∂_ρ ∂_ν h`.
pub(crate) fn lift_metric2(
    h: &Mat2,
    dh: &[Mat2; 2],
    ddh: &[[Mat2; 2]; 2],
    nu: usize,
) -> (Mat2<Dual64>, [Mat2<Dual64>; 2]) {
    let mut hl = [[Dual64::from(0.0); 2]; 2];
    let mut dhl = [[[Dual64::from(0.0); 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            hl[i][j] = dual(h[i][j], dh[nu][i][j]);
            for rho in 0..2 {
                dhl[rho][i][j] = dual(dh[rho][i][j], ddh[rho][nu][i][j]);
            }
        }
    }
    (hl, dhl)
}

/// Scalar curvature of a surface metric from its value, first and second
/// partials (`ddh[a][b] = ∂_a ∂_b h`) via the Riemann contraction.
pub fn scalar_curvature_from_jet(h: &Mat2, dh: &[Mat2; 2], ddh: &[[Mat2; 2]; 2]) -> Result<f64> {
    let gam = christoffel_from_metric(h, dh)?;
    // dgam[μ][ρ][ν][σ] = ∂_μ Γ^ρ_{νσ}
    let mut dgam = [[[[0.0; 2]; 2]; 2]; 2];
    for (mu, d) in dgam.iter_mut().enumerate() {
        let (hl, dhl) = lift_metric2(h, dh, ddh, mu);
        let gl = christoffel_from_metric(&hl, &dhl)?;
        for rho in 0..2 {
            for nu in 0..2 {
                for sig in 0..2 {
                    d[rho][nu][sig] = gl[rho][nu][sig].eps;
                }
            }
        }
    }
    let (hinv, _) = inverse_spd(h)?;
    let mut r = 0.0;
    for sig in 0..2 {
        for nu in 0..2 {
            // Ric_{σν} = R^ρ_{σρν}
            let mut ric = 0.0;
            for rho in 0..2 {
                let mut riem = dgam[rho][rho][nu][sig] - dgam[nu][rho][rho][sig];
                for lam in 0..2 {
                    riem += gam[rho][rho][lam] * gam[lam][nu][sig] - gam[rho][nu][lam] * gam[lam][rho][sig];
                }
                ric += riem;
            }
            r += hinv[sig][nu] * ric;
        }
    }
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("scalar curvature"))
    }
}

pub(crate) fn metric2_jet(
    h_field: &dyn Field,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<(Mat2, [Mat2; 2], [[Mat2; 2]; 2])> {
    if matrix_dim(h_field)? != 2 {
        return Err(Error::WrongArity {
            expected: "sym-matrix(2)",
            found: h_field.arity().to_string(),
        });
    }
    let p = padded(point, 2);
    let h = to_mat::<2>(&h_field.eval(&p))?;
    let mut dh = [[[0.0; 2]; 2]; 2];
    let mut ddh = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        dh[a] = to_mat::<2>(&partial_derivative(h_field, a, &p, mode, domain)?)?;
        for b in 0..2 {
            ddh[a][b] = to_mat::<2>(&second_partial_derivative(h_field, a, b, &p, mode, domain)?)?;
        }
    }
    Ok((h, dh, ddh))
}

/// Scalar curvature r (twice the Gauss curvature) of a surface metric field,
/// from the Riemann tensor contraction.
pub fn scalar_curvature_2d(
    h_field: &dyn Field,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<f64> {
    let (h, dh, ddh) = metric2_jet(h_field, point, mode, domain)?;
    scalar_curvature_from_jet(&h, &dh, &ddh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConstantField, FnField};
    use approx::assert_abs_diff_eq;

    pub(crate) fn sphere(radius: f64) -> FnField {
        let r2 = radius * radius;
        FnField::new(Arity::SymMatrix(2), 2, move |x| vec![r2, 0.0, 0.0, r2 * x[0].sin().powi(2)])
            .with_partial(move |a, x| {
                let d = if a == 0 { 2.0 * r2 * x[0].sin() * x[0].cos() } else { 0.0 };
                vec![0.0, 0.0, 0.0, d]
            })
            .with_second_partial(move |a, b, x| {
                let d = if a == 0 && b == 0 { 2.0 * r2 * (2.0 * x[0]).cos() } else { 0.0 };
                vec![0.0, 0.0, 0.0, d]
            })
    }

    #[test]
    fn flat_metric_has_no_christoffels() {
        let id = ConstantField::new(Arity::SymMatrix(3), 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let g = christoffel_generic(&id, &[0.1, 0.2, 0.3], DerivativeMode::Analytic, None).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.independent_len(), 18);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn sphere_christoffels_are_radius_independent() {
        let x = [std::f64::consts::FRAC_PI_4, 0.3];
        for radius in [0.5, 1.0, 3.0] {
            let g = christoffel_generic(&sphere(radius), &x, DerivativeMode::Analytic, None).unwrap();
            assert_abs_diff_eq!(g.get(0, 1, 1), -0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(g.get(1, 0, 1), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(g.get(1, 1, 0), 1.0, epsilon = 1e-14);
            assert_eq!(g.get(0, 0, 0), 0.0);
        }
    }

    #[test]
    fn wrong_arity_rejected() {
        let s = ConstantField::new(Arity::Scalar, 2, vec![1.0]).unwrap();
        assert!(matches!(
            christoffel_generic(&s, &[0.0, 0.0], DerivativeMode::Analytic, None),
            Err(Error::WrongArity { .. })
        ));
    }

    #[test]
    fn curvature_examples() {
        let flat = ConstantField::new(Arity::SymMatrix(2), 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(scalar_curvature_2d(&flat, &[0.3, 0.4], DerivativeMode::Analytic, None).unwrap(), 0.0);

        for x0 in [0.2, 1.0, 2.9] {
            let r = scalar_curvature_2d(&sphere(0.5), &[x0, 1.0], DerivativeMode::Analytic, None).unwrap();
            assert_abs_diff_eq!(r, 8.0, epsilon = 1e-10);
        }

        let hyperbolic = FnField::new(Arity::SymMatrix(2), 2, |x| vec![1.0, 0.0, 0.0, (2.0 * x[0]).exp()])
            .with_partial(|a, x| vec![0.0, 0.0, 0.0, if a == 0 { 2.0 * (2.0 * x[0]).exp() } else { 0.0 }])
            .with_second_partial(|a, b, x| {
                vec![0.0, 0.0, 0.0, if a == 0 && b == 0 { 4.0 * (2.0 * x[0]).exp() } else { 0.0 }]
            });
        let r = scalar_curvature_2d(&hyperbolic, &[0.7, -0.2], DerivativeMode::Analytic, None).unwrap();
        assert_abs_diff_eq!(r, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn curvature_by_finite_differences() {
        let fd = DerivativeMode::FiniteDifference { step: Some(1e-3) };
        let r = scalar_curvature_2d(&sphere(0.5), &[1.1, 0.4], fd, None).unwrap();
        assert_abs_diff_eq!(r, 8.0, epsilon = 1e-6);
    }
}
