//! Dense component arrays with all indices running over `0..n`.

use std::ops::{Index, IndexMut};

use crate::dual::Real;

/// Rank-`R` array of `n^R` components, row-major (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T, const R: usize> {
    n: usize,
    data: Vec<T>,
}

pub type Tensor2<T = f64> = Tensor<T, 2>;
pub type Tensor3<T = f64> = Tensor<T, 3>;
pub type Tensor4<T = f64> = Tensor<T, 4>;
pub type Tensor5<T = f64> = Tensor<T, 5>;

impl<T: Copy, const R: usize> Tensor<T, R> {
    pub fn filled(n: usize, v: T) -> Self {
        Self {
            n,
            data: vec![v; n.pow(R as u32)],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut([usize; R]) -> T) -> Self {
        let len = n.pow(R as u32);
        let data = (0..len).map(|k| f(unflatten(n, k))).collect();
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Tensor<U, R> {
        Tensor {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// All index tuples in storage order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; R]> + '_ {
        (0..self.data.len()).map(move |k| unflatten(self.n, k))
    }

    #[inline]
    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }
}

fn unflatten<const R: usize>(n: usize, mut k: usize) -> [usize; R] {
    let mut idx = [0; R];
    for slot in idx.iter_mut().rev() {
        *slot = k % n;
        k /= n;
    }
    idx
}

impl<T: Real, const R: usize> Tensor<T, R> {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, T::zero())
    }
}

impl<const R: usize> Tensor<f64, R> {
    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl<T: Copy, const R: usize> Index<[usize; R]> for Tensor<T, R> {
    type Output = T;
    #[inline]
    fn index(&self, idx: [usize; R]) -> &T {
        &self.data[self.offset(idx)]
    }
}

impl<T: Copy, const R: usize> IndexMut<[usize; R]> for Tensor<T, R> {
    #[inline]
    fn index_mut(&mut self, idx: [usize; R]) -> &mut T {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

impl Tensor2<f64> {
    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self[[i, j]])
    }

    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |[i, j]| m[(i, j)])
    }
}

/// Gauss-Jordan inverse with partial pivoting on the real part.
///
/// Works for any [`Real`], so derivatives of an inverse metric come out of
/// the same routine when fed dual numbers. Returns `None` for a pivot below
/// `1e-300`.
pub fn invert<T: Real>(m: &Tensor2<T>) -> Option<Tensor2<T>> {
    let n = m.dim();
    let mut a = m.clone();
    let mut inv = Tensor2::from_fn(n, |[i, j]| if i == j { T::one() } else { T::zero() });
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[[r, col]]
                    .value()
                    .abs()
                    .total_cmp(&a[[s, col]].value().abs())
            })
            .unwrap();
        if a[[pivot, col]].value().abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let t = a[[col, j]];
                a[[col, j]] = a[[pivot, j]];
                a[[pivot, j]] = t;
                let t = inv[[col, j]];
                inv[[col, j]] = inv[[pivot, j]];
                inv[[pivot, j]] = t;
            }
        }
        let p = T::one() / a[[col, col]];
        for j in 0..n {
            a[[col, j]] = a[[col, j]] * p;
            inv[[col, j]] = inv[[col, j]] * p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[[r, col]];
            if f.value() == 0.0 && f == T::zero() {
                continue;
            }
            for j in 0..n {
                a[[r, j]] = a[[r, j]] - f * a[[col, j]];
                inv[[r, j]] = inv[[r, j]] - f * inv[[col, j]];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    #[test]
    fn index_layout_is_row_major() {
        let t = Tensor3::from_fn(3, |[a, b, c]| (100 * a + 10 * b + c) as f64);
        assert_eq!(t[[2, 1, 0]], 210.0);
        assert_eq!(t.as_slice()[5], 12.0);
        let idx: Vec<_> = t.indices().take(4).collect();
        assert_eq!(idx, vec![[0, 0, 0], [0, 0, 1], [0, 0, 2], [0, 1, 0]]);
    }

    #[test]
    fn inverse_of_indefinite_matrix() {
        let m = Tensor2::from_fn(3, |[i, j]| [[0.0, 2.0, 1.0], [2.0, -1.0, 0.5], [1.0, 0.5, 3.0]][i][j]);
        let inv = invert(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[[i, k]] * inv[[k, j]]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(invert(&Tensor2::<f64>::zeros(2)).is_none());
    }

    #[test]
    fn inverse_derivative_matches_formula() {
        // d(M^-1) = -M^-1 dM M^-1 for M(t) = [[2+t, t],[t, 1]]
        let m = Tensor2::from_fn(2, |[i, j]| {
            let base = [[2.0, 0.0], [0.0, 1.0]][i][j];
            let d = [[1.0, 1.0], [1.0, 0.0]][i][j];
            Dual::new(base, d)
        });
        let inv = invert(&m).unwrap();
        // M^-1 at t=0 is diag(1/2, 1); -M^-1 dM M^-1 = -[[1/4, 1/2],[1/2, 0]]
        assert!((inv[[0, 0]].eps + 0.25).abs() < 1e-15);
        assert!((inv[[0, 1]].eps + 0.5).abs() < 1e-15);
        assert!((inv[[1, 1]].eps).abs() < 1e-15);
    }
}
