//! Derivative engines for vector-valued component functions.
//!
//! A [`ComponentSource`] is either a table of expressions (differentiable
//! exactly with nested dual numbers) or an opaque closure (finite
//! differences only). [`jet`] returns value and partials up to third order.

use std::fmt;
use std::sync::Arc;

use crate::dual::{seed1, seed2, seed3, Dual, Real};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Closure producing all components at a point.
pub type ComponentFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub enum ComponentSource {
    Expressions(Arc<Vec<Expr>>),
    Closure(Arc<ComponentFn>),
}

impl fmt::Debug for ComponentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSource::Expressions(e) => write!(f, "Expressions({} components)", e.len()),
            ComponentSource::Closure(_) => write!(f, "Closure"),
        }
    }
}

impl ComponentSource {
    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        match self {
            ComponentSource::Expressions(es) => es.iter().map(|e| e.eval(p)).collect(),
            ComponentSource::Closure(f) => f(p),
        }
    }

    pub fn is_expression(&self) -> bool {
        matches!(self, ComponentSource::Expressions(_))
    }
}

/// Accuracy order of the central stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FdOrder {
    Second,
    Fourth,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum DifferentiationStrategy {
    /// Dual numbers for expression-backed sources, otherwise fourth-order
    /// central differences with the default step.
    #[default]
    Auto,
    /// Central differences; the absolute step is `step * max(1, |p|)`.
    CentralFd { order: FdOrder, step: f64 },
    DualForward,
}

pub const DEFAULT_RELATIVE_STEP: f64 = 2e-3;

impl DifferentiationStrategy {
    pub fn fd4() -> Self {
        DifferentiationStrategy::CentralFd {
            order: FdOrder::Fourth,
            step: DEFAULT_RELATIVE_STEP,
        }
    }

    pub fn fd(order: FdOrder, step: f64) -> Self {
        DifferentiationStrategy::CentralFd { order, step }
    }

    fn resolve(self, source: &ComponentSource) -> Result<Self> {
        match self {
            DifferentiationStrategy::Auto if source.is_expression() => {
                Ok(DifferentiationStrategy::DualForward)
            }
            DifferentiationStrategy::Auto => Ok(Self::fd4()),
            DifferentiationStrategy::DualForward if !source.is_expression() => {
                Err(Error::DualUnavailable)
            }
            DifferentiationStrategy::CentralFd { step, .. } if !(step > 0.0) => Err(
                Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")),
            ),
            s => Ok(s),
        }
    }

    /// Tolerance for identities on first/second derivatives.
    pub fn tolerance(&self) -> f64 {
        match self {
            DifferentiationStrategy::CentralFd {
                order: FdOrder::Second,
                ..
            } => 1e-4,
            _ => 1e-6,
        }
    }

    /// Tolerance for quantities involving third derivatives.
    pub fn tolerance_third(&self) -> f64 {
        match self {
            DifferentiationStrategy::CentralFd {
                order: FdOrder::Second,
                ..
            } => 1e-3,
            DifferentiationStrategy::CentralFd { .. } => 1e-4,
            _ => 1e-8,
        }
    }
}

/// Value and partial derivatives of `m` components in `n` variables.
#[derive(Clone, Debug)]
pub struct Jet {
    pub m: usize,
    pub n: usize,
    pub order: usize,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl Jet {
    fn empty(m: usize, n: usize, order: usize) -> Self {
        Self {
            m,
            n,
            order,
            value: vec![0.0; m],
            d1: vec![0.0; if order >= 1 { m * n } else { 0 }],
            d2: vec![0.0; if order >= 2 { m * n * n } else { 0 }],
            d3: vec![0.0; if order >= 3 { m * n * n * n } else { 0 }],
        }
    }

    pub fn value(&self, c: usize) -> f64 {
        self.value[c]
    }
    pub fn d1(&self, c: usize, a: usize) -> f64 {
        self.d1[c * self.n + a]
    }
    pub fn d2(&self, c: usize, a: usize, b: usize) -> f64 {
        self.d2[(c * self.n + a) * self.n + b]
    }
    pub fn d3(&self, c: usize, a: usize, b: usize, d: usize) -> f64 {
        self.d3[((c * self.n + a) * self.n + b) * self.n + d]
    }

    fn set_d2(&mut self, c: usize, a: usize, b: usize, v: f64) {
        let n = self.n;
        self.d2[(c * n + a) * n + b] = v;
        self.d2[(c * n + b) * n + a] = v;
    }

    fn set_d3(&mut self, c: usize, a: usize, b: usize, d: usize, v: f64) {
        let n = self.n;
        for [i, j, k] in [[a, b, d], [a, d, b], [b, a, d], [b, d, a], [d, a, b], [d, b, a]] {
            self.d3[((c * n + i) * n + j) * n + k] = v;
        }
    }
}

/// Partials up to `order` (0..=3) of every component at `p`.
///
/// `inside` is consulted for every finite-difference stencil point.
pub fn jet(
    source: &ComponentSource,
    p: &[f64],
    order: usize,
    strategy: DifferentiationStrategy,
    inside: &dyn Fn(&[f64]) -> bool,
) -> Result<Jet> {
    assert!(order <= 3);
    match strategy.resolve(source)? {
        DifferentiationStrategy::DualForward => {
            let ComponentSource::Expressions(es) = source else {
                unreachable!()
            };
            Ok(dual_jet(es, p, order))
        }
        DifferentiationStrategy::CentralFd { order: acc, step } => {
            fd_jet(source, p, order, acc, step, inside)
        }
        DifferentiationStrategy::Auto => unreachable!(),
    }
}

fn dual_jet(es: &[Expr], p: &[f64], order: usize) -> Jet {
    let n = p.len();
    let m = es.len();
    let mut j = Jet::empty(m, n, order);
    for (c, e) in es.iter().enumerate() {
        j.value[c] = e.eval(p);
    }
    if order >= 1 {
        for a in 0..n {
            let x = seed1(p, a);
            for (c, e) in es.iter().enumerate() {
                let v: Dual<f64> = e.eval(&x);
                j.d1[c * n + a] = v.eps;
            }
        }
    }
    if order >= 2 {
        for a in 0..n {
            for b in a..n {
                let x = seed2(p, a, b);
                for (c, e) in es.iter().enumerate() {
                    let v = e.eval(&x);
                    j.set_d2(c, a, b, v.eps.eps);
                }
            }
        }
    }
    if order >= 3 {
        for a in 0..n {
            for b in a..n {
                for d in b..n {
                    let x = seed3(p, a, b, d);
                    for (c, e) in es.iter().enumerate() {
                        let v = e.eval(&x);
                        j.set_d3(c, a, b, d, v.eps.eps.eps);
                    }
                }
            }
        }
    }
    j
}

/// One-dimensional central stencil `(offsets, weights)` for the `k`-th
/// derivative, unit spacing.
pub fn stencil(k: usize, acc: FdOrder) -> (&'static [f64], &'static [f64]) {
    match (k, acc) {
        (1, FdOrder::Second) => (&[-1.0, 1.0], &[-0.5, 0.5]),
        (2, FdOrder::Second) => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
        (3, FdOrder::Second) => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
        (1, FdOrder::Fourth) => (
            &[-2.0, -1.0, 1.0, 2.0],
            &[1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0],
        ),
        (2, FdOrder::Fourth) => (
            &[-2.0, -1.0, 0.0, 1.0, 2.0],
            &[-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
        ),
        (3, FdOrder::Fourth) => (
            &[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
            &[0.125, -1.0, 1.625, -1.625, 1.0, -0.125],
        ),
        _ => panic!("no stencil for derivative order {k}"),
    }
}

/// Mixed partial over the axis multiset `axes` by tensor-product stencils.
fn fd_partial(
    source: &ComponentSource,
    p: &[f64],
    axes: &[usize],
    acc: FdOrder,
    h: f64,
    inside: &dyn Fn(&[f64]) -> bool,
) -> Result<Vec<f64>> {
    // group repeated axes: (axis, multiplicity)
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &a in axes {
        match groups.iter_mut().find(|(g, _)| *g == a) {
            Some(g) => g.1 += 1,
            None => groups.push((a, 1)),
        }
    }
    let stencils: Vec<_> = groups.iter().map(|&(_, k)| stencil(k, acc)).collect();
    let mut counters = vec![0usize; groups.len()];
    let mut acc_v: Option<Vec<f64>> = None;
    let mut q = p.to_vec();
    loop {
        let mut w = 1.0;
        q.copy_from_slice(p);
        for (g, (&(axis, _), (offs, ws))) in groups.iter().zip(&stencils).enumerate() {
            q[axis] += offs[counters[g]] * h;
            w *= ws[counters[g]];
        }
        if !inside(&q) {
            return Err(Error::StencilOutsideDomain(p.to_vec()));
        }
        let v = source.eval(&q);
        match acc_v.as_mut() {
            None => acc_v = Some(v.iter().map(|x| w * x).collect()),
            Some(s) => s.iter_mut().zip(&v).for_each(|(s, x)| *s += w * x),
        }
        // odometer
        let mut g = 0;
        loop {
            if g == groups.len() {
                let scale = h.powi(axes.len() as i32);
                return Ok(acc_v.unwrap().into_iter().map(|s| s / scale).collect());
            }
            counters[g] += 1;
            if counters[g] < stencils[g].0.len() {
                break;
            }
            counters[g] = 0;
            g += 1;
        }
    }
}

fn fd_jet(
    source: &ComponentSource,
    p: &[f64],
    order: usize,
    acc: FdOrder,
    rel_step: f64,
    inside: &dyn Fn(&[f64]) -> bool,
) -> Result<Jet> {
    let n = p.len();
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = rel_step * norm.max(1.0);
    let value = source.eval(p);
    let m = value.len();
    let mut j = Jet::empty(m, n, order);
    j.value = value;
    if order >= 1 {
        for a in 0..n {
            let d = fd_partial(source, p, &[a], acc, h, inside)?;
            for c in 0..m {
                j.d1[c * n + a] = d[c];
            }
        }
    }
    if order >= 2 {
        for a in 0..n {
            for b in a..n {
                let d = fd_partial(source, p, &[a, b], acc, h, inside)?;
                for (c, v) in d.into_iter().enumerate() {
                    j.set_d2(c, a, b, v);
                }
            }
        }
    }
    if order >= 3 {
        for a in 0..n {
            for b in a..n {
                for e in b..n {
                    let d = fd_partial(source, p, &[a, b, e], acc, h, inside)?;
                    for (c, v) in d.into_iter().enumerate() {
                        j.set_d3(c, a, b, e, v);
                    }
                }
            }
        }
    }
    Ok(j)
}

/// Evaluates a source at dual-number coordinates; only for expressions.
pub fn eval_generic<T: Real>(es: &[Expr], x: &[T]) -> Vec<T> {
    es.iter().map(|e| e.eval(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_source() -> ComponentSource {
        let v: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        ComponentSource::Expressions(Arc::new(vec![
            Expr::parse("x^3*y + sin(x*y)", &v).unwrap(),
            Expr::parse("exp(x - 2*y)", &v).unwrap(),
        ]))
    }

    #[test]
    fn stencil_weights_are_exact_on_monomials() {
        // k-th derivative of x^k / k! is 1; lower-degree monomials give 0
        for acc in [FdOrder::Second, FdOrder::Fourth] {
            for k in 1..=3 {
                let (offs, ws) = stencil(k, acc);
                for deg in 0..=k {
                    let s: f64 = offs.iter().zip(ws).map(|(o, w)| w * o.powi(deg as i32)).sum();
                    let fact: f64 = (1..=k).map(|i| i as f64).product();
                    let expected = if deg == k { fact } else { 0.0 };
                    assert!((s - expected).abs() < 1e-12, "k={k} deg={deg} {acc:?}");
                }
            }
        }
    }

    #[test]
    fn fd_agrees_with_dual_to_high_order() {
        let src = poly_source();
        let p = [0.4, -0.3];
        let all = |_: &[f64]| true;
        let exact = jet(&src, &p, 3, DifferentiationStrategy::DualForward, &all).unwrap();
        let fd = jet(&src, &p, 3, DifferentiationStrategy::fd4(), &all).unwrap();
        for c in 0..2 {
            for a in 0..2 {
                assert!((exact.d1(c, a) - fd.d1(c, a)).abs() < 1e-10);
                for b in 0..2 {
                    assert!((exact.d2(c, a, b) - fd.d2(c, a, b)).abs() < 1e-8);
                    for d in 0..2 {
                        assert!((exact.d3(c, a, b, d) - fd.d3(c, a, b, d)).abs() < 1e-5);
                    }
                }
            }
        }
        // x^3 y: d/dx d/dx d/dy = 6x
        let cubic = ComponentSource::Expressions(Arc::new(vec![Expr::parse(
            "x^3*y",
            &["x".to_string(), "y".to_string()],
        )
        .unwrap()]));
        let j = jet(&cubic, &p, 3, DifferentiationStrategy::DualForward, &all).unwrap();
        assert!((j.d3(0, 0, 1, 0) - 6.0 * 0.4).abs() < 1e-14);
    }

    #[test]
    fn stencil_leaving_domain_is_an_error() {
        let src = poly_source();
        let inside = |q: &[f64]| q[0] > 0.0;
        let err = jet(&src, &[0.001, 0.0], 1, DifferentiationStrategy::fd4(), &inside).unwrap_err();
        assert!(matches!(err, Error::StencilOutsideDomain(_)));
    }

    #[test]
    fn dual_requires_expressions() {
        let src = ComponentSource::Closure(Arc::new(|p: &[f64]| vec![p[0]]));
        let err = jet(&src, &[0.0], 1, DifferentiationStrategy::DualForward, &|_| true).unwrap_err();
        assert_eq!(err, Error::DualUnavailable);
    }
}
