use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used throughout the numerical modules: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Eigenvalues and eigenvectors of a dense symmetric `n x n` row-major
    /// matrix. Eigenvectors are returned row-major with one eigenvector per
    /// column, in the solver's (unsorted) order.
    fn symmetric_eigen(matrix: &[Self], n: usize) -> (Vec<Self>, Vec<Self>);

    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn symmetric_eigen(matrix: &[Self], n: usize) -> (Vec<Self>, Vec<Self>) {
                assert_eq!(matrix.len(), n * n);
                if n == 0 {
                    return (Vec::new(), Vec::new());
                }
                let m = DMatrix::<$t>::from_row_slice(n, n, matrix);
                let eig = SymmetricEigen::new(m);
                let values = eig.eigenvalues.iter().copied().collect();
                let mut vectors = vec![0.0; n * n];
                for col in 0..n {
                    for row in 0..n {
                        vectors[row * n + col] = eig.eigenvectors[(row, col)];
                    }
                }
                (values, vectors)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
