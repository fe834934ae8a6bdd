//! Dense order-d tensors stored row-major (last index fastest).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{from_row_major, to_row_major};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::SizeMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data: vec![0.0; dims.iter().product()],
        })
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        DenseTensor { dims, data }
    }

    /// Outer product `a ⊗ b ⊗ ...` of vectors.
    pub fn outer(factors: &[Vec<f64>]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(Vec::len).collect();
        check_dims(&dims)?;
        let mut data = vec![1.0];
        for f in factors {
            data = data
                .iter()
                .flat_map(|a| f.iter().map(move |b| a * b))
                .collect();
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    /// Rows of the `split`-th matricization: `n_1 * ... * n_split`.
    fn split_rows(&self, split: usize) -> Result<usize> {
        if split == 0 || split >= self.dims.len() {
            return Err(Error::SplitOutOfRange {
                split,
                order: self.dims.len(),
            });
        }
        Ok(self.dims[..split].iter().product())
    }

    /// `(n_1...n_split) x (n_{split+1}...n_d)` matrix view as an owned matrix.
    pub fn unfold(&self, split: usize) -> Result<DMatrix<f64>> {
        let rows = self.split_rows(split)?;
        Ok(from_row_major(rows, self.data.len() / rows, &self.data))
    }

    pub fn matricize(&self, split: usize) -> Result<Matricization> {
        let matrix = self.unfold(split)?;
        Ok(Matricization {
            dims: self.dims.clone(),
            split,
            matrix,
        })
    }

    pub fn check_same_dims(&self, other: &DenseTensor) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|a| alpha * a).collect(),
        }
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_dims(other)?;
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.axpy(-1.0, other)
    }

    /// `‖self - other‖`
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// `‖self - other‖ / ‖other‖`, falling back to the absolute distance when
    /// `other` is zero.
    pub fn relative_error(&self, reference: &DenseTensor) -> Result<f64> {
        let d = self.distance(reference)?;
        let n = reference.norm();
        Ok(if n == 0.0 { d } else { d / n })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims {
            dims: dims.to_vec(),
            reason: "order must be at least 1".into(),
        });
    }
    if dims.contains(&0) {
        return Err(Error::InvalidDims {
            dims: dims.to_vec(),
            reason: "every dimension must be positive".into(),
        });
    }
    Ok(())
}

/// A tensor reshaped into `(n_1...n_split) x (n_{split+1}...n_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matricization {
    pub dims: Vec<usize>,
    pub split: usize,
    pub matrix: DMatrix<f64>,
}

impl Matricization {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn matricize(t: &DenseTensor, split: usize) -> Result<Matricization> {
    t.matricize(split)
}

/// Inverse of [`matricize`]: reads the matrix row-major into a tensor of `dims`.
pub fn tensorize(m: &DMatrix<f64>, dims: &[usize]) -> Result<DenseTensor> {
    check_dims(dims)?;
    let expected: usize = dims.iter().product();
    if expected != m.len() {
        return Err(Error::SizeMismatch {
            expected,
            actual: m.len(),
        });
    }
    Ok(DenseTensor {
        dims: dims.to_vec(),
        data: to_row_major(m),
    })
}

/// TT product of `a` (`n_1 x ... x n_i x k`) and `b` (`k x n_{i+1} x ... x n_d`),
/// contracting the trailing index of `a` with the leading index of `b`.
///
/// Contracting two vectors yields a scalar, returned with dims `[1]`.
pub fn tt_product(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let k = *a.dims.last().expect("dims non-empty");
    let kb = b.dims[0];
    if k != kb {
        return Err(Error::BondMismatch { left: k, right: kb });
    }
    let rows = a.data.len() / k;
    let cols = b.data.len() / k;
    let am = from_row_major(rows, k, &a.data);
    let bm = from_row_major(k, cols, &b.data);
    let mut dims: Vec<usize> = a.dims[..a.dims.len() - 1].to_vec();
    dims.extend_from_slice(&b.dims[1..]);
    if dims.is_empty() {
        dims.push(1);
    }
    Ok(DenseTensor {
        dims,
        data: to_row_major(&(am * bm)),
    })
}
