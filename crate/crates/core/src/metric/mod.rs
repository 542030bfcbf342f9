//! Metric fields: signature, domain, evaluation, and scalar fields on the
//! same charts.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::diff::{jet, ComponentSource, DifferentiationStrategy, Jet};
use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::tensor::{invert, Tensor2};

pub mod catalog;
pub mod config;

pub use catalog::{catalog_construct, catalog_entries, CatalogEntry};
pub use config::{load_metric, parse_metric_doc, to_document, to_expression_document, MetricDoc};

/// Named real parameters of a catalog entry.
pub type Params = BTreeMap<String, f64>;

/// Diagonal signature with the `-1` entries first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub n_minus: usize,
    pub n_plus: usize,
}

impl Signature {
    pub fn new(n_minus: usize, n_plus: usize) -> Result<Self> {
        if n_minus + n_plus == 0 {
            return Err(Error::InvalidArgument("signature of dimension 0".into()));
        }
        Ok(Self { n_minus, n_plus })
    }

    pub fn riemannian(n: usize) -> Self {
        Self { n_minus: 0, n_plus: n }
    }

    pub fn lorentzian(n: usize) -> Self {
        Self { n_minus: 1, n_plus: n - 1 }
    }

    /// Parses a list of `±1` entries; minus entries must come first.
    pub fn from_list(list: &[i64]) -> Result<Self> {
        let n_minus = list.iter().take_while(|&&s| s == -1).count();
        if list[n_minus..].iter().any(|&s| s != 1) {
            return Err(Error::InvalidArgument(format!(
                "signature {list:?} must list -1 entries first, then +1 entries"
            )));
        }
        Self::new(n_minus, list.len() - n_minus)
    }

    pub fn to_list(&self) -> Vec<i64> {
        (0..self.dim()).map(|a| self.eta(a) as i64).collect()
    }

    pub fn dim(&self) -> usize {
        self.n_minus + self.n_plus
    }

    pub fn eta(&self, a: usize) -> f64 {
        if a < self.n_minus {
            -1.0
        } else {
            1.0
        }
    }

    pub fn eta_matrix(&self) -> Tensor2 {
        Tensor2::from_fn(self.dim(), |[a, b]| if a == b { self.eta(a) } else { 0.0 })
    }

    /// `η(u, v)` for frame components.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).enumerate().map(|(a, (x, y))| self.eta(a) * x * y).sum()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}-, {}+)", self.n_minus, self.n_plus)
    }
}

/// Open coordinate box, optionally intersected with a Euclidean ball about
/// the chart origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    pub radius: Option<f64>,
}

impl Domain {
    pub fn unbounded(n: usize) -> Self {
        Self {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            radius: None,
        }
    }

    pub fn ball(n: usize, radius: f64) -> Self {
        Self {
            radius: Some(radius),
            ..Self::unbounded(n)
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let in_box = self
            .bounds
            .iter()
            .zip(p)
            .all(|(&(lo, hi), &x)| x > lo && x < hi);
        in_box
            && self
                .radius
                .is_none_or(|r| p.iter().map(|x| x * x).sum::<f64>() < r * r)
    }
}

/// How a field was built; used to serialize it back into a document.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Catalog { name: String, params: Params },
    Components,
    Closure,
}

/// Smooth symmetric matrix field of fixed signature on a single chart.
#[derive(Clone, Debug)]
pub struct MetricField {
    signature: Signature,
    domain: Domain,
    label: String,
    variables: Vec<String>,
    source: ComponentSource,
    provenance: Provenance,
}

/// `G(p)`, its inverse and determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricValue {
    pub g: Tensor2,
    pub inv: Tensor2,
    pub det: f64,
}

pub fn default_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl MetricField {
    /// `components` holds all `n²` entries row-major.
    pub fn from_expressions(
        signature: Signature,
        components: Vec<Expr>,
        domain: Domain,
        label: impl Into<String>,
    ) -> Self {
        let n = signature.dim();
        assert_eq!(components.len(), n * n);
        Self {
            signature,
            domain,
            label: label.into(),
            variables: default_variables(n),
            source: ComponentSource::Expressions(Arc::new(components)),
            provenance: Provenance::Components,
        }
    }

    pub fn from_fn(
        signature: Signature,
        domain: Domain,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> Tensor2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            signature,
            domain,
            label: label.into(),
            variables: default_variables(signature.dim()),
            source: ComponentSource::Closure(Arc::new(move |p| f(p).as_slice().to_vec())),
            provenance: Provenance::Closure,
        }
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub(crate) fn with_variables(mut self, variables: Vec<String>) -> Self {
        self.variables = variables;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }
    pub fn signature(&self) -> Signature {
        self.signature
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn variables(&self) -> &[String] {
        &self.variables
    }
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
    pub fn source(&self) -> &ComponentSource {
        &self.source
    }

    pub fn expressions(&self) -> Option<&[Expr]> {
        match &self.source {
            ComponentSource::Expressions(e) => Some(e),
            ComponentSource::Closure(_) => None,
        }
    }

    /// Raw components without domain or nondegeneracy checks.
    pub fn components(&self, p: &[f64]) -> Tensor2 {
        let v = self.source.eval(p);
        Tensor2::from_fn(self.dim(), |[i, j]| v[i * self.dim() + j])
    }

    /// Jet of the `n²` components (row-major component index).
    pub fn jet(&self, p: &[f64], order: usize, d: DifferentiationStrategy) -> Result<Jet> {
        self.check_point(p)?;
        jet(&self.source, p, order, d, &|q| self.domain.contains(q))
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p.to_vec()));
        }
        Ok(())
    }

    /// Counts eigenvalue signs of `G(p)` and compares with the declared
    /// signature.
    pub fn check_signature(&self, p: &[f64]) -> Result<()> {
        let found = eigen_signs(&self.components(p));
        let declared = (self.signature.n_minus, self.signature.n_plus);
        if found != declared {
            return Err(Error::SignatureMismatch {
                point: p.to_vec(),
                declared,
                found,
            });
        }
        Ok(())
    }

    /// Block-diagonal product; both factors must be expression-backed.
    pub fn product(&self, other: &MetricField) -> Result<MetricField> {
        let (Some(a), Some(b)) = (self.expressions(), other.expressions()) else {
            return Err(Error::DualUnavailable);
        };
        let (n1, n2) = (self.dim(), other.dim());
        let n = n1 + n2;
        let shift = move |i: usize| i + n1;
        let comps = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i < n1 && j < n1 {
                    a[i * n1 + j].clone()
                } else if i >= n1 && j >= n1 {
                    b[(i - n1) * n2 + (j - n1)].map_vars(&shift)
                } else {
                    Expr::constant(0.0)
                }
            })
            .collect();
        let sig = Signature::new(
            self.signature.n_minus + other.signature.n_minus,
            self.signature.n_plus + other.signature.n_plus,
        )?;
        if self.signature.n_plus > 0 && other.signature.n_minus > 0 {
            return Err(Error::InvalidArgument(
                "product would interleave signs; reorder the factors".into(),
            ));
        }
        let mut bounds = self.domain.bounds.clone();
        bounds.extend(other.domain.bounds.iter().copied());
        if self.domain.radius.is_some() || other.domain.radius.is_some() {
            return Err(Error::InvalidArgument("product of ball domains is not a ball".into()));
        }
        Ok(MetricField::from_expressions(
            sig,
            comps,
            Domain { bounds, radius: None },
            format!("{} x {}", self.label, other.label),
        ))
    }

    /// `exp(2ψ)·G` as a new expression-backed field.
    pub fn conformal_rescale(&self, psi: &ScalarField) -> Result<MetricField> {
        let (Some(g), Some(e)) = (self.expressions(), psi.expression()) else {
            return Err(Error::DualUnavailable);
        };
        let factor = Expr::call(Func::Exp, Expr::constant(2.0) * e.clone());
        let comps = g.iter().map(|c| factor.clone() * c.clone()).collect();
        Ok(MetricField::from_expressions(
            self.signature,
            comps,
            self.domain.clone(),
            format!("exp(2 {}) {}", psi.label(), self.label),
        ))
    }
}

/// `(negative, positive)` eigenvalue counts of a symmetric matrix.
pub fn eigen_signs(g: &Tensor2) -> (usize, usize) {
    let eig = SymmetricEigen::new(g.to_matrix());
    let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    (neg, pos)
}

/// `G(p)` with inverse and determinant.
///
/// Degeneracy is reported before the domain test, so a point on a polar
/// axis is diagnosed as singular rather than merely excluded.
pub fn evaluate_metric(m: &MetricField, p: &[f64]) -> Result<MetricValue> {
    if p.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: p.len(),
        });
    }
    let raw = m.components(p);
    let n = m.dim();
    if raw.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::OutsideDomain(p.to_vec()));
    }
    let g = Tensor2::from_fn(n, |[i, j]| 0.5 * (raw[[i, j]] + raw[[j, i]]));
    let det = DMatrix::from_fn(n, n, |i, j| g[[i, j]]).determinant();
    let scale = g.max_abs().max(f64::MIN_POSITIVE).powi(n as i32);
    if det.abs() < 1e-14 * scale {
        return Err(Error::SingularMetric {
            point: p.to_vec(),
            det,
        });
    }
    m.check_point(p)?;
    let inv = invert(&g).ok_or(Error::SingularMetric {
        point: p.to_vec(),
        det,
    })?;
    Ok(MetricValue { g, inv, det })
}

/// Real scalar field on a chart, used for conformal factors and test
/// functions.
#[derive(Clone, Debug)]
pub struct ScalarField {
    source: ComponentSource,
    label: String,
}

impl ScalarField {
    pub fn from_expr(e: Expr, label: impl Into<String>) -> Self {
        Self {
            source: ComponentSource::Expressions(Arc::new(vec![e])),
            label: label.into(),
        }
    }

    /// Parses `src` over the default variables `x1..xn` (and `x, y, z`
    /// when `n <= 3`).
    pub fn parse(src: &str, n: usize) -> Result<Self> {
        let e = config::parse_expression(src, n, None, "scalar")?;
        Ok(Self::from_expr(e, src))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::constant(c), format!("{c}"))
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            source: ComponentSource::Closure(Arc::new(move |p| vec![f(p)])),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn expression(&self) -> Option<&Expr> {
        match &self.source {
            ComponentSource::Expressions(e) => e.first(),
            ComponentSource::Closure(_) => None,
        }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.source.eval(p)[0]
    }

    pub fn jet(
        &self,
        p: &[f64],
        order: usize,
        d: DifferentiationStrategy,
        inside: &dyn Fn(&[f64]) -> bool,
    ) -> Result<Jet> {
        jet(&self.source, p, order, d, inside)
    }
}
