//! Charts, evaluatable fields, derivatives and small symmetric-matrix algebra.
//!
//! Coordinates are dimensionless reals. Axis 2 of a three-dimensional chart is
//! the fiber coordinate; fields on the base surface ignore it.

use std::fmt;

use num_dual::{Dual64, DualNum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar types the closed-form geometry is generic over: `f64` and forward-mode
/// dual numbers built on it.
pub trait Scalar: DualNum<Primitive = f64> + Copy + Send + Sync {}

impl<T> Scalar for T where T: DualNum<Primitive = f64> + Copy + Send + Sync {}

pub type Mat2<T = f64> = [[T; 2]; 2];
pub type Mat3<T = f64> = [[T; 3]; 3];

#[inline]
pub(crate) fn cst<T: Scalar>(x: f64) -> T {
    T::from(x)
}

#[inline]
pub(crate) fn dual(re: f64, eps: f64) -> Dual64 {
    Dual64::new(re, eps)
}

#[inline]
pub(crate) fn re<T: Scalar>(x: T) -> f64 {
    x.re()
}

/// Rectangular coordinate domain, optionally periodic per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    bounds: Vec<(f64, f64)>,
    periodic: Vec<bool>,
}

impl ChartDomain {
    pub fn new(bounds: Vec<(f64, f64)>, periodic: Vec<bool>) -> Result<Self> {
        let dim = bounds.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::ChartDimension(dim));
        }
        if periodic.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: periodic.len(),
            });
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::DegenerateAxis { axis, lo, hi });
            }
        }
        Ok(Self { bounds, periodic })
    }

    /// Square `[0, 2π]²` torus chart, periodic on both axes.
    pub fn torus() -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            bounds: vec![(0.0, tau), (0.0, tau)],
            periodic: vec![true, true],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        self.bounds[axis]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        hi - lo
    }

    /// Affine map of `unit ∈ [0,1]^dim` into the chart.
    pub fn point_at(&self, unit: &[f64]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(unit)
            .map(|(&(lo, hi), &u)| lo + u * (hi - lo))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arity {
    Scalar,
    OneForm(usize),
    SymMatrix(usize),
}

impl Arity {
    /// Number of stored components. Matrices are stored row-major in full.
    pub fn len(self) -> usize {
        match self {
            Arity::Scalar => 1,
            Arity::OneForm(n) => n,
            Arity::SymMatrix(n) => n * n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Scalar => write!(f, "scalar"),
            Arity::OneForm(n) => write!(f, "one-form({n})"),
            Arity::SymMatrix(n) => write!(f, "sym-matrix({n})"),
        }
    }
}

/// A smooth map from chart points to component values.
///
/// `eval` must be deterministic. A field with `chart_dim() == 2` is a base
/// field: it reads only `x[0]` and `x[1]` and its partials along axis 2 vanish.
/// Analytic partials are optional; when absent, callers fall back to finite
/// differences.
pub trait Field: Send + Sync {
    fn arity(&self) -> Arity;

    fn chart_dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Vec<f64>;

    fn partial(&self, _axis: usize, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn second_partial(&self, _a: usize, _b: usize, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

type EvalFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type PartialFn = Box<dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync>;
type SecondFn = Box<dyn Fn(usize, usize, &[f64]) -> Vec<f64> + Send + Sync>;

/// Closure-backed field.
pub struct FnField {
    arity: Arity,
    chart_dim: usize,
    eval: EvalFn,
    partial: Option<PartialFn>,
    second: Option<SecondFn>,
}

impl FnField {
    pub fn new(
        arity: Arity,
        chart_dim: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            arity,
            chart_dim,
            eval: Box::new(eval),
            partial: None,
            second: None,
        }
    }

    pub fn with_partial(
        mut self,
        partial: impl Fn(usize, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.partial = Some(Box::new(partial));
        self
    }

    pub fn with_second_partial(
        mut self,
        second: impl Fn(usize, usize, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.second = Some(Box::new(second));
        self
    }
}

impl Field for FnField {
    fn arity(&self) -> Arity {
        self.arity
    }

    fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    fn partial(&self, axis: usize, x: &[f64]) -> Option<Vec<f64>> {
        self.partial.as_ref().map(|p| p(axis, x))
    }

    fn second_partial(&self, a: usize, b: usize, x: &[f64]) -> Option<Vec<f64>> {
        self.second.as_ref().map(|s| s(a, b, x))
    }
}

/// Field with the same value everywhere.
#[derive(Debug, Clone)]
pub struct ConstantField {
    arity: Arity,
    chart_dim: usize,
    value: Vec<f64>,
}

impl ConstantField {
    pub fn new(arity: Arity, chart_dim: usize, value: Vec<f64>) -> Result<Self> {
        if value.len() != arity.len() {
            return Err(Error::DimensionMismatch {
                expected: arity.len(),
                found: value.len(),
            });
        }
        Ok(Self {
            arity,
            chart_dim,
            value,
        })
    }
}

impl Field for ConstantField {
    fn arity(&self) -> Arity {
        self.arity
    }

    fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    fn eval(&self, _x: &[f64]) -> Vec<f64> {
        self.value.clone()
    }

    fn partial(&self, _axis: usize, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.value.len()])
    }

    fn second_partial(&self, _a: usize, _b: usize, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.value.len()])
    }
}

/// How partial derivatives of a field are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum DerivativeMode {
    /// Caller-supplied exact partials.
    #[default]
    Analytic,
    /// Fourth-order central differences. `None` picks `1e-4 × axis length`
    /// when a domain is known and `1e-4` otherwise.
    FiniteDifference { step: Option<f64> },
}

const DEFAULT_RELATIVE_STEP: f64 = 1e-4;

fn fd_step(step: Option<f64>, axis: usize, domain: Option<&ChartDomain>) -> f64 {
    step.unwrap_or_else(|| match domain {
        Some(d) if axis < d.dim() => DEFAULT_RELATIVE_STEP * d.length(axis),
        _ => DEFAULT_RELATIVE_STEP,
    })
}

fn check_finite(values: Vec<f64>, what: &'static str) -> Result<Vec<f64>> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(values)
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_point(field: &dyn Field, point: &[f64]) -> Result<()> {
    if point.len() < field.chart_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.chart_dim(),
            found: point.len(),
        });
    }
    Ok(())
}

/// Fourth-order central difference of a vector-valued map along `axis`.
fn central4(
    g: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    axis: usize,
    point: &[f64],
    step: f64,
    domain: Option<&ChartDomain>,
) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    if let Some(d) = domain {
        if axis < d.dim() && !d.is_periodic(axis) {
            let (lo, hi) = d.bounds(axis);
            let x = point[axis];
            if x - 2.0 * step < lo || x + 2.0 * step > hi {
                return Err(Error::StencilOutsideDomain { axis, coordinate: x });
            }
        }
    }
    let mut shifted = point.to_vec();
    let mut sample = |offset: f64| -> Result<Vec<f64>> {
        shifted[axis] = point[axis] + offset * step;
        g(&shifted)
    };
    let m2 = sample(-2.0)?;
    let m1 = sample(-1.0)?;
    let p1 = sample(1.0)?;
    let p2 = sample(2.0)?;
    Ok((0..m2.len())
        .map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * step))
        .collect())
}

/// ∂_axis of every component of `field` at `point`.
pub fn partial_derivative(
    field: &dyn Field,
    axis: usize,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<Vec<f64>> {
    check_point(field, point)?;
    if axis >= point.len() {
        return Err(Error::IndexOutOfRange {
            index: axis,
            dim: point.len(),
        });
    }
    let n = field.arity().len();
    if axis >= field.chart_dim() {
        return Ok(vec![0.0; n]);
    }
    let values = match mode {
        DerivativeMode::Analytic => field
            .partial(axis, point)
            .ok_or(Error::MissingAnalyticPartial { axis })?,
        DerivativeMode::FiniteDifference { step } => {
            let eval = |x: &[f64]| check_finite(field.eval(x), "field value");
            central4(&eval, axis, point, fd_step(step, axis, domain), domain)?
        }
    };
    check_finite(values, "partial derivative")
}

/// ∂_a ∂_b of every component of `field` at `point`.
///
/// In finite-difference mode the outer derivative is differenced; the inner one
/// uses analytic partials when the field has them.
pub fn second_partial_derivative(
    field: &dyn Field,
    a: usize,
    b: usize,
    point: &[f64],
    mode: DerivativeMode,
    domain: Option<&ChartDomain>,
) -> Result<Vec<f64>> {
    check_point(field, point)?;
    for axis in [a, b] {
        if axis >= point.len() {
            return Err(Error::IndexOutOfRange {
                index: axis,
                dim: point.len(),
            });
        }
    }
    let n = field.arity().len();
    if a >= field.chart_dim() || b >= field.chart_dim() {
        return Ok(vec![0.0; n]);
    }
    let values = match mode {
        DerivativeMode::Analytic => field
            .second_partial(a, b, point)
            .ok_or(Error::MissingAnalyticPartial { axis: a })?,
        DerivativeMode::FiniteDifference { step } => {
            let inner = |x: &[f64]| match field.partial(a, x) {
                Some(v) => check_finite(v, "partial derivative"),
                None => partial_derivative(field, a, x, mode, domain),
            };
            central4(&inner, b, point, fd_step(step, b, domain), domain)?
        }
    };
    check_finite(values, "second partial derivative")
}

/// Inverse and determinant of a symmetric positive-definite matrix by
/// Gauss-Jordan elimination without pivoting (all pivots are positive for SPD
/// input).
pub(crate) fn inverse_spd<T: Scalar, const N: usize>(m: &[[T; N]; N]) -> Result<([[T; N]; N], T)> {
    let scale = (0..N).map(|i| re(m[i][i]).abs()).fold(0.0, f64::max);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::SingularMetric { det: 0.0 });
    }
    let mut a = *m;
    let mut inv = [[cst::<T>(0.0); N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = cst(1.0);
    }
    let mut det = cst::<T>(1.0);
    for col in 0..N {
        let pivot = a[col][col];
        if !(re(pivot) > scale * 1e-14) {
            return Err(Error::SingularMetric {
                det: re(det) * re(pivot),
            });
        }
        det *= pivot;
        let pinv = pivot.recip();
        for k in 0..N {
            a[col][k] *= pinv;
            inv[col][k] *= pinv;
        }
        for row in 0..N {
            if row != col {
                let factor = a[row][col];
                for k in 0..N {
                    let (ack, ick) = (a[col][k], inv[col][k]);
                    a[row][k] -= factor * ack;
                    inv[row][k] -= factor * ick;
                }
            }
        }
    }
    Ok((inv, det))
}

/// Symmetric positive-definite N×N metric at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric<const N: usize>(#[serde(with = "matrix_serde")] [[f64; N]; N]);

pub type Metric2 = Metric<2>;
pub type Metric3 = Metric<3>;

mod matrix_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(m: &[[f64; N]; N], s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|r| r.to_vec()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[[f64; N]; N], D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let mut m = [[0.0; N]; N];
        if rows.len() != N || rows.iter().any(|r| r.len() != N) {
            return Err(serde::de::Error::custom("wrong matrix shape"));
        }
        for (i, r) in rows.iter().enumerate() {
            m[i].copy_from_slice(r);
        }
        Ok(m)
    }
}

impl<const N: usize> Metric<N> {
    /// Validates symmetry (relative 1e-12) and positive definiteness.
    pub fn new(components: [[f64; N]; N]) -> Result<Self> {
        let scale = components
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if !components.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("metric components"));
        }
        for i in 0..N {
            for j in 0..i {
                if (components[i][j] - components[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        // Sylvester: leading pivots of an LDLᵀ sweep must be positive.
        let mut a = components;
        for k in 0..N {
            if !(a[k][k] > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            for i in k + 1..N {
                let f = a[i][k] / a[k][k];
                for j in k..N {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        Ok(Self(components))
    }

    pub(crate) fn new_unchecked(components: [[f64; N]; N]) -> Self {
        Self(components)
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; N]; N];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }

    pub fn components(&self) -> &[[f64; N]; N] {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        inverse_spd(&self.0).map(|(_, d)| d).unwrap_or(0.0)
    }

    pub fn inverse(&self) -> Result<Self> {
        invert_symmetric(self)
    }
}

/// Inverse of a symmetric positive-definite metric.
pub fn invert_symmetric<const N: usize>(m: &Metric<N>) -> Result<Metric<N>> {
    let (mut inv, _) = inverse_spd(&m.0)?;
    for i in 0..N {
        for j in 0..i {
            let avg = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = avg;
            inv[j][i] = avg;
        }
    }
    Ok(Metric(inv))
}

/// Permutation symbol on `indices.len()` ∈ {2, 3} labels, with ε^{01} = ε^{012} = 1.
pub fn levi_civita_symbol(indices: &[usize]) -> Result<i32> {
    let dim = indices.len();
    if !(2..=3).contains(&dim) {
        return Err(Error::ChartDimension(dim));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, dim });
    }
    let mut sign = 1;
    for i in 0..dim {
        for j in i + 1..dim {
            match indices[i].cmp(&indices[j]) {
                std::cmp::Ordering::Equal => return Ok(0),
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Ok(sign)
}

#[inline]
pub(crate) fn eps3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine_field() -> FnField {
        FnField::new(Arity::Scalar, 2, |x| vec![x[0].sin()])
            .with_partial(|axis, x| vec![if axis == 0 { x[0].cos() } else { 0.0 }])
    }

    #[test]
    fn chart_rejects_degenerate_axes() {
        assert!(ChartDomain::new(vec![(0.0, 1.0), (2.0, 2.0)], vec![false, false]).is_err());
        assert!(ChartDomain::new(vec![(0.0, 1.0)], vec![false]).is_err());
        assert!(ChartDomain::new(vec![(0.0, 1.0), (0.0, 1.0)], vec![false]).is_err());
        assert!(ChartDomain::new(vec![(0.0, 1.0), (0.0, f64::NAN)], vec![false, true]).is_err());
        let d = ChartDomain::new(vec![(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)], vec![false, true, true]).unwrap();
        assert_eq!(d.dim(), 3);
        assert_eq!(d.length(2), 3.0);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = ConstantField::new(Arity::OneForm(2), 2, vec![3.0, -1.0]).unwrap();
        for axis in 0..3 {
            let p = [0.3, 0.4, 0.5];
            assert_eq!(partial_derivative(&c, axis, &p, DerivativeMode::Analytic, None).unwrap(), vec![0.0, 0.0]);
            let fd = partial_derivative(&c, axis, &p, DerivativeMode::FiniteDifference { step: None }, None).unwrap();
            assert!(fd.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn sine_derivative_analytic_and_fd() {
        let f = sine_field();
        let analytic = partial_derivative(&f, 0, &[0.0, 0.0], DerivativeMode::Analytic, None).unwrap();
        assert_abs_diff_eq!(analytic[0], 1.0, epsilon = 1e-10);
        let fd = partial_derivative(&f, 0, &[0.0, 0.0], DerivativeMode::FiniteDifference { step: Some(1e-3) }, None)
            .unwrap();
        assert_abs_diff_eq!(fd[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn base_field_has_no_fiber_dependence() {
        let f = sine_field();
        let d = partial_derivative(&f, 2, &[0.2, 0.1, 7.0], DerivativeMode::Analytic, None).unwrap();
        assert_eq!(d, vec![0.0]);
        let d2 = second_partial_derivative(&f, 2, 0, &[0.2, 0.1, 7.0], DerivativeMode::Analytic, None).unwrap();
        assert_eq!(d2, vec![0.0]);
    }

    #[test]
    fn stencil_near_boundary_is_rejected() {
        let f = sine_field();
        let d = ChartDomain::new(vec![(0.0, 1.0), (0.0, 1.0)], vec![false, true]).unwrap();
        let mode = DerivativeMode::FiniteDifference { step: Some(1e-2) };
        let err = partial_derivative(&f, 0, &[0.01, 0.5], mode, Some(&d)).unwrap_err();
        assert!(matches!(err, Error::StencilOutsideDomain { axis: 0, .. }));
        // periodic axis: fine anywhere
        partial_derivative(&f, 1, &[0.5, 0.0], mode, Some(&d)).unwrap();
    }

    #[test]
    fn missing_analytic_partial_and_non_finite() {
        let f = FnField::new(Arity::Scalar, 2, |x| vec![1.0 / x[0]]);
        assert!(matches!(
            partial_derivative(&f, 0, &[1.0, 0.0], DerivativeMode::Analytic, None),
            Err(Error::MissingAnalyticPartial { axis: 0 })
        ));
        let fd = DerivativeMode::FiniteDifference { step: Some(0.25) };
        assert!(matches!(partial_derivative(&f, 0, &[0.5, 0.0], fd, None), Err(Error::NonFinite(_))));
    }

    #[test]
    fn fd_convergence_order_is_four() {
        let f = FnField::new(Arity::Scalar, 2, |x| vec![(1.3 * x[0]).sin() * (0.7 * x[1]).exp()]);
        let exact = 1.3 * (1.3_f64 * 0.4).cos() * (0.7_f64 * 0.2).exp();
        let err = |h: f64| {
            let d = partial_derivative(&f, 0, &[0.4, 0.2], DerivativeMode::FiniteDifference { step: Some(h) }, None)
                .unwrap();
            (d[0] - exact).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "measured order {order}");
    }

    #[test]
    fn second_partial_fd_matches_analytic() {
        let f = FnField::new(Arity::Scalar, 2, |x| vec![x[0].sin() * x[1].cos()]);
        let p = [0.3, 1.1];
        let fd = DerivativeMode::FiniteDifference { step: Some(1e-3) };
        let mixed = second_partial_derivative(&f, 0, 1, &p, fd, None).unwrap()[0];
        assert_abs_diff_eq!(mixed, -p[0].cos() * p[1].sin(), epsilon = 1e-7);
        let pure = second_partial_derivative(&f, 1, 1, &p, fd, None).unwrap()[0];
        assert_abs_diff_eq!(pure, -p[0].sin() * p[1].cos(), epsilon = 1e-7);
    }

    #[test]
    fn inverse_examples() {
        let id = Metric2::identity();
        assert_eq!(invert_symmetric(&id).unwrap(), id);
        let d = Metric2::new([[4.0, 0.0], [0.0, 0.25]]).unwrap();
        let inv = invert_symmetric(&d).unwrap();
        assert_abs_diff_eq!(inv.get(0, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.get(1, 1), 4.0, epsilon = 1e-15);
        assert_eq!(inv.get(0, 1), 0.0);
    }

    #[test]
    fn singular_and_indefinite_rejected() {
        assert!(Metric2::new([[1.0, 1.0], [1.0, 1.0]]).is_err());
        assert!(Metric2::new([[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(Metric2::new([[1.0, 0.5], [0.4, 1.0]]).is_err());
        let nearly = Metric::new_unchecked([[1.0, 1.0], [1.0, 1.0 + 1e-17]]);
        assert!(matches!(invert_symmetric(&nearly), Err(Error::SingularMetric { .. })));
    }

    fn random_spd3(rng: &mut ChaCha8Rng) -> Metric3 {
        let mut b = [[0.0; 3]; 3];
        for row in b.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        Metric3::new(m).unwrap()
    }

    #[test]
    fn random_spd_multiply_back_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_spd3(&mut rng);
            let inv = invert_symmetric(&m).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let p: f64 = (0..3).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                    assert_abs_diff_eq!(p, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
            let back = invert_symmetric(&inv).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(back.get(i, j), m.get(i, j), epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn levi_civita_all_permutations() {
        assert_eq!(levi_civita_symbol(&[0, 1, 2]).unwrap(), 1);
        assert_eq!(levi_civita_symbol(&[1, 0, 2]).unwrap(), -1);
        assert_eq!(levi_civita_symbol(&[0, 0, 2]).unwrap(), 0);
        let perms = [
            ([0, 1, 2], 1),
            ([1, 2, 0], 1),
            ([2, 0, 1], 1),
            ([0, 2, 1], -1),
            ([2, 1, 0], -1),
            ([1, 0, 2], -1),
        ];
        for (p, s) in perms {
            assert_eq!(levi_civita_symbol(&p).unwrap(), s);
            assert_eq!(eps3(p[0], p[1], p[2]), s as f64);
        }
        assert_eq!(levi_civita_symbol(&[0, 1]).unwrap(), 1);
        assert_eq!(levi_civita_symbol(&[1, 0]).unwrap(), -1);
        assert!(matches!(levi_civita_symbol(&[0, 3, 1]), Err(Error::IndexOutOfRange { index: 3, dim: 3 })));
    }
}
