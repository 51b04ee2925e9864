//! Tensor-product quadrature on rectangular charts.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Arity, ChartDomain, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisRule {
    PeriodicTrapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub rule: AxisRule,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    axes: Vec<AxisSpec>,
    refinement: usize,
}

pub const MIN_POINTS: usize = 4;
pub const DEFAULT_POINTS: usize = 64;

impl QuadratureSpec {
    /// `refinement` multiplies every point count for the error estimate.
    pub fn new(axes: Vec<AxisSpec>, refinement: usize) -> Result<Self> {
        if let Some(a) = axes.iter().find(|a| a.points < MIN_POINTS) {
            return Err(Error::InvalidQuadrature(format!(
                "need at least {MIN_POINTS} points per axis, got {}",
                a.points
            )));
        }
        if refinement < 2 {
            return Err(Error::InvalidQuadrature(format!("refinement factor must be at least 2, got {refinement}")));
        }
        Ok(Self { axes, refinement })
    }

    /// Trapezoid on periodic axes, Gauss-Legendre elsewhere, refinement ×2.
    pub fn default_for(domain: &ChartDomain, points: usize) -> Result<Self> {
        let axes = (0..domain.dim())
            .map(|i| AxisSpec {
                rule: if domain.is_periodic(i) { AxisRule::PeriodicTrapezoid } else { AxisRule::GaussLegendre },
                points,
            })
            .collect();
        Self::new(axes, 2)
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn refined(&self) -> Self {
        Self {
            axes: self
                .axes
                .iter()
                .map(|a| AxisSpec { rule: a.rule, points: a.points * self.refinement })
                .collect(),
            refinement: self.refinement,
        }
    }

    pub fn validate(&self, domain: &ChartDomain) -> Result<()> {
        if self.axes.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: self.axes.len(),
            });
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.rule == AxisRule::PeriodicTrapezoid && !domain.is_periodic(i) {
                return Err(Error::InvalidQuadrature(format!(
                    "periodic trapezoid on non-periodic axis {i}"
                )));
            }
        }
        Ok(())
    }

    fn nodes(&self, domain: &ChartDomain) -> Vec<Vec<(f64, f64)>> {
        self.axes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (lo, hi) = domain.bounds(i);
                match a.rule {
                    AxisRule::PeriodicTrapezoid => {
                        let h = (hi - lo) / a.points as f64;
                        (0..a.points).map(|k| (lo + k as f64 * h, h)).collect()
                    }
                    AxisRule::GaussLegendre => {
                        let n = NonZeroUsize::new(a.points).expect("point count validated");
                        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                        GaussLegendre::new(n)
                            .as_node_weight_pairs()
                            .iter()
                            .map(|&(x, w)| (mid + half * x, half * w))
                            .collect()
                    }
                }
            })
            .collect()
    }
}

/// Quadrature value with `error_estimate = |value − refined value|`, floored
/// by the accumulated rounding bound of the refined sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub refined_value: f64,
    pub error_estimate: f64,
}

const ROUNDING_FACTOR: f64 = 64.0 * f64::EPSILON;

/// One pass: weighted sums and absolute weighted sums of K integrands.
fn sum_pass<const K: usize, F>(f: &F, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<([f64; K], [f64; K])>
where
    F: Fn(&[f64]) -> Result<[f64; K]> + Sync,
{
    let nodes = spec.nodes(domain);
    let (first, rest) = nodes.split_first().expect("chart has at least two axes");
    // Cartesian product of the remaining axes, in a fixed order.
    let mut tail: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in rest {
        tail = tail
            .into_iter()
            .flat_map(|(p, w)| {
                axis.iter().map(move |&(x, wx)| {
                    let mut q = p.clone();
                    q.push(x);
                    (q, w * wx)
                })
            })
            .collect();
    }
    let rows: Vec<([f64; K], [f64; K])> = first
        .par_iter()
        .map(|&(x0, w0)| {
            let mut sum = [0.0; K];
            let mut abs = [0.0; K];
            let mut point = vec![x0; rest.len() + 1];
            for (suffix, w) in &tail {
                point[1..].copy_from_slice(suffix);
                let v = f(&point)?;
                for k in 0..K {
                    if !v[k].is_finite() {
                        return Err(Error::NonFinite("integrand sample"));
                    }
                    sum[k] += w * v[k];
                    abs[k] += (w * v[k]).abs();
                }
            }
            Ok((sum.map(|s| s * w0), abs.map(|s| s * w0.abs())))
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; K];
    let mut abs = [0.0; K];
    for (s, a) in rows {
        for k in 0..K {
            total[k] += s[k];
            abs[k] += a[k];
        }
    }
    Ok((total, abs))
}

/// Integrate K scalar integrands together, sharing every sample point.
pub fn integrate_many<const K: usize, F>(f: F, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<[Integral; K]>
where
    F: Fn(&[f64]) -> Result<[f64; K]> + Sync,
{
    spec.validate(domain)?;
    let (coarse, _) = sum_pass(&f, domain, spec)?;
    let (fine, abs) = sum_pass(&f, domain, &spec.refined())?;
    Ok(std::array::from_fn(|k| Integral {
        value: coarse[k],
        refined_value: fine[k],
        error_estimate: (coarse[k] - fine[k]).abs() + ROUNDING_FACTOR * abs[k],
    }))
}

pub fn integrate_fn<F>(f: F, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let [out] = integrate_many(|x| f(x).map(|v| [v]), domain, spec)?;
    Ok(out)
}

/// Integral of a scalar field over the chart in coordinate measure.
pub fn integrate_chart(field: &dyn Field, domain: &ChartDomain, spec: &QuadratureSpec) -> Result<Integral> {
    if field.arity() != Arity::Scalar {
        return Err(Error::WrongArity {
            expected: "scalar",
            found: field.arity().to_string(),
        });
    }
    integrate_fn(|x| Ok(field.eval(x)[0]), domain, spec)
}
