//! so(p, q) generators in exact complex-rational arithmetic.
//!
//! `(L_AB)^C_D = i(η_AD δ^C_B − η_BD δ^C_A)`. Acting on the coordinate
//! functions `x^C`, a generator is the first-order operator with
//! `L̂_AB x = M_AB x`; composing two such operators reverses the matrix
//! order, so operator commutators are `M₂M₁ − M₁M₂`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::metric::Signature;
use crate::tensor::Tensor4;

pub type Rational = Ratio<i64>;
pub type Scalar = Complex<Rational>;

fn rat(v: i64) -> Scalar {
    Complex::new(Ratio::from_integer(v), Ratio::zero())
}

fn imag(v: i64) -> Scalar {
    Complex::new(Ratio::zero(), Ratio::from_integer(v))
}

fn magnitude(z: &Scalar) -> f64 {
    let re = z.re.to_f64().unwrap_or(f64::NAN);
    let im = z.im.to_f64().unwrap_or(f64::NAN);
    re.hypot(im)
}

/// Square matrix over `Q(i)`.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    n: usize,
    data: Vec<Scalar>,
}

impl ExactMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Scalar::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = rat(1);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.n + c] = v;
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(magnitude).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Scalar {
        (0..self.n).map(|i| self.get(i, i)).fold(Scalar::zero(), |a, b| a + b)
    }

    /// `(re, im)` entries as floats.
    pub fn to_f64(&self) -> Vec<Vec<(f64, f64)>> {
        (0..self.n)
            .map(|r| {
                (0..self.n)
                    .map(|c| {
                        let v = self.get(r, c);
                        (v.re.to_f64().unwrap_or(f64::NAN), v.im.to_f64().unwrap_or(f64::NAN))
                    })
                    .collect()
            })
            .collect()
    }

    /// `ab − ba`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|r| (0..self.n).map(|c| { let v = self.get(r, c); format!("{}+{}i", v.re, v.im) }).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, o: &ExactMatrix) -> ExactMatrix {
        ExactMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, o: &ExactMatrix) -> ExactMatrix {
        ExactMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, o: &ExactMatrix) -> ExactMatrix {
        let n = self.n;
        let mut out = ExactMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * o.get(k, c);
                }
            }
        }
        out
    }
}

/// `L_AB` for every ordered pair, stored at `A·n + B`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    pub signature: Signature,
    pub generators: Vec<ExactMatrix>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn get(&self, a: usize, b: usize) -> &ExactMatrix {
        &self.generators[a * self.dim() + b]
    }

    /// Dimension of the representation space.
    pub fn rep_dim(&self) -> usize {
        self.generators.first().map_or(0, ExactMatrix::dim)
    }

    /// Every generator zero on a one-dimensional space.
    pub fn trivial(signature: Signature) -> Self {
        let n = signature.dim();
        Self { signature, generators: vec![ExactMatrix::zeros(1); n * n] }
    }

    fn eta(&self, a: usize, b: usize) -> Scalar {
        if a == b {
            rat(self.signature.eta(a) as i64)
        } else {
            Scalar::zero()
        }
    }
}

/// Defining representation of so(p, q): `p` entries `+1` and `q` entries
/// `−1` in η (stored minus-first).
pub fn so_generators(p: usize, q: usize) -> Result<GeneratorSet> {
    let n = p + q;
    if n < 2 {
        return Err(Error::DimensionTooSmall { op: "so_generators", n, min: 2 });
    }
    let signature = Signature::new(q, p)?;
    let eta = |a: usize| signature.eta(a) as i64;
    let mut generators = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut m = ExactMatrix::zeros(n);
            if a != b {
                // column D = A: +i η_AA at row C = B; column D = B: −i η_BB at row C = A
                m.set(b, a, imag(eta(a)));
                m.set(a, b, imag(-eta(b)));
            }
            generators.push(m);
        }
    }
    Ok(GeneratorSet { signature, generators })
}

/// `[L_AB, L_CD]` as operators: `L_CD L_AB − L_AB L_CD` in matrices.
pub fn operator_commutator(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    b.commutator(a)
}

/// Largest entry of
/// `[L_AB, L_CD] + i(η_AC L_BD + η_AD L_CB + η_BC L_DA + η_BD L_AC)`
/// over all index quadruples.
pub fn commutation_check(g: &GeneratorSet) -> f64 {
    let n = g.dim();
    let i = imag(1);
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let lhs = operator_commutator(g.get(a, b), g.get(c, d));
                    let rhs = [
                        g.get(b, d).scale(g.eta(a, c)),
                        g.get(c, b).scale(g.eta(a, d)),
                        g.get(d, a).scale(g.eta(b, c)),
                        g.get(a, c).scale(g.eta(b, d)),
                    ]
                    .iter()
                    .fold(ExactMatrix::zeros(g.rep_dim()), |acc, m| &acc + m)
                    .scale(-i);
                    worst = worst.max((&lhs - &rhs).max_abs());
                }
            }
        }
    }
    worst
}

/// Largest entry of `[[X, Y], Z] + [[Y, Z], X] + [[Z, X], Y]` over all
/// triples of independent generators `L_AB`, `A < B`.
pub fn jacobi_residual(g: &GeneratorSet) -> f64 {
    let n = g.dim();
    let basis: Vec<&ExactMatrix> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| g.get(a, b)).collect();
    let mut worst = 0.0f64;
    for x in &basis {
        for y in &basis {
            for z in &basis {
                let s = &(&x.commutator(y).commutator(z) + &y.commutator(z).commutator(x)) + &z.commutator(x).commutator(y);
                worst = worst.max(s.max_abs());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct CasimirReport {
    /// `C₂ = ½ η^{AC} η^{BD} L_AB L_CD`
    pub matrix: ExactMatrix,
    /// `λ` when `C₂ = λ I`.
    pub scalar: Option<f64>,
    /// Largest entry of `[C₂, L_AB]` over all generators.
    pub commutator_residual: f64,
}

pub fn casimir(g: &GeneratorSet) -> CasimirReport {
    let n = g.dim();
    let k = g.rep_dim();
    let mut c2 = ExactMatrix::zeros(k);
    for a in 0..n {
        for b in 0..n {
            let w = g.eta(a, a) * g.eta(b, b);
            if a != b {
                let sq = g.get(a, b) * g.get(a, b);
                c2 = &c2 + &sq.scale(w);
            }
        }
    }
    let c2 = c2.scale(Complex::new(Ratio::new(1, 2), Ratio::zero()));
    let commutator_residual = g.generators.iter().map(|l| c2.commutator(l).max_abs()).fold(0.0, f64::max);
    let lam = c2.trace() * Complex::new(Ratio::new(1, k as i64), Ratio::zero());
    let off = &c2 - &ExactMatrix::identity(k).scale(lam);
    let scalar = (off.max_abs() < 1e-10 && lam.im.is_zero()).then(|| lam.re.to_f64().unwrap_or(f64::NAN));
    CasimirReport { matrix: c2, scalar, commutator_residual }
}

/// Largest entry of `i R² R_{ABCD} η^{CE} − (L_AB)^E_D` over all indices,
/// for a frame curvature tensor `curv` and radius `R`.
pub fn curvature_generator_identity(curv: &Tensor4, radius: f64, g: &GeneratorSet) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::ParameterOutOfRange {
            name: "R".into(),
            value: radius,
            reason: "radius must be positive".into(),
        });
    }
    let n = g.dim();
    if curv.dim() != n || g.rep_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: curv.dim() });
    }
    let r2 = radius * radius;
    let mut worst = 0.0f64;
    for [a, b, e, d] in curv.indices() {
        // i R² R_ABED η^EE has zero real part
        let want = g.get(a, b).get(e, d);
        let im = r2 * curv[[a, b, e, d]] * g.signature.eta(e);
        let re_w = want.re.to_f64().unwrap_or(f64::NAN);
        let im_w = want.im.to_f64().unwrap_or(f64::NAN);
        worst = worst.max(re_w.abs().max((im - im_w).abs()));
    }
    Ok(worst)
}

/// Real vector field `Σ U^A V^B (−i L_AB) x`, the generator action on the
/// ambient position.
pub fn generator_vector_field(g: &GeneratorSet, u: &[f64], v: &[f64], x: &[f64]) -> Vec<f64> {
    let n = g.dim();
    let mut out = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            let w = u[a] * v[b];
            if w == 0.0 || a == b {
                continue;
            }
            let m = g.get(a, b).scale(imag(-1));
            for (r, o) in out.iter_mut().enumerate() {
                for (c, xc) in x.iter().enumerate() {
                    *o += w * m.get(r, c).re.to_f64().unwrap_or(f64::NAN) * xc;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::constant_curvature_frame;

    #[test]
    fn so2_generator_entries() {
        let g = so_generators(2, 0).unwrap();
        let l = g.get(0, 1);
        assert_eq!(l.get(1, 0), imag(1));
        assert_eq!(l.get(0, 1), imag(-1));
        assert!(g.get(1, 1).is_zero());
        assert_eq!(g.get(1, 0), &g.get(0, 1).scale(rat(-1)));
        assert!(so_generators(1, 0).is_err());
    }

    #[test]
    fn commutation_relations_are_exact() {
        for (p, q) in [(3, 0), (3, 1), (2, 2), (4, 0)] {
            let g = so_generators(p, q).unwrap();
            assert_eq!(commutation_check(&g), 0.0, "so({p},{q})");
        }
        // the plain matrix commutator has the opposite sign
        let g = so_generators(3, 0).unwrap();
        let direct = g.get(0, 1).commutator(g.get(1, 2));
        assert_eq!(direct, operator_commutator(g.get(0, 1), g.get(1, 2)).scale(rat(-1)));
        assert!(!direct.is_zero());
    }

    #[test]
    fn corrupted_generator_is_detected() {
        let mut g = so_generators(3, 0).unwrap();
        let v = g.generators[1].get(1, 0) + Complex::new(Ratio::new(1, 1000), Ratio::zero());
        g.generators[1].set(1, 0, v);
        assert!(commutation_check(&g) >= 1e-3);
    }

    #[test]
    fn casimir_values() {
        let c3 = casimir(&so_generators(3, 0).unwrap());
        assert_eq!(c3.scalar, Some(2.0));
        assert_eq!(c3.commutator_residual, 0.0);
        assert_eq!(casimir(&so_generators(2, 0).unwrap()).scalar, Some(1.0));
        let triv = casimir(&GeneratorSet::trivial(Signature::riemannian(3)));
        assert!(triv.matrix.is_zero());
        let lor = casimir(&so_generators(3, 1).unwrap());
        assert_eq!(lor.commutator_residual, 0.0);
    }

    #[test]
    fn jacobi_holds() {
        assert_eq!(jacobi_residual(&so_generators(2, 1).unwrap()), 0.0);
        assert_eq!(jacobi_residual(&so_generators(3, 1).unwrap()), 0.0);
    }

    #[test]
    fn curvature_identity() {
        for (p, q) in [(3, 0), (2, 1)] {
            let g = so_generators(p, q).unwrap();
            for r in [1.0, 2.0] {
                let curv = constant_curvature_frame(g.signature, 1.0 / (r * r));
                assert_eq!(curvature_generator_identity(&curv, r, &g).unwrap(), 0.0);
            }
        }
        let g = so_generators(3, 0).unwrap();
        let mut curv = constant_curvature_frame(g.signature, 1.0);
        curv[[0, 1, 0, 1]] += 0.1;
        assert!((curvature_generator_identity(&curv, 1.0, &g).unwrap() - 0.1).abs() < 1e-15);
        assert!(curvature_generator_identity(&curv, 0.0, &g).is_err());
    }
}
