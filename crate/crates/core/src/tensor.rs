//! Dense row-major tensors of rank 1..=4.
//!
//! Feature maps are `C×H×W` slices of `N×C×H×W` batches; element `(n,c,i,j)`
//! lives at flat offset `((n*C + c)*H + i)*W + j`. Storage is always dense
//! and owned; write operations return new tensors.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// Builds a tensor from a flat row-major buffer.
    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        validate_shape(shape)?;
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::Shape {
                expected: format!("{expect} elements for shape {shape:?}"),
                got: format!("{} elements", data.len()),
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        validate_shape(shape).expect("invalid tensor shape");
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn filled(shape: &[usize], value: T) -> Self {
        validate_shape(shape).expect("invalid tensor shape");
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Number of elements.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn dims2(&self) -> Result<(usize, usize)> {
        match *self.shape {
            [a, b] => Ok((a, b)),
            _ => Err(rank_error(&self.shape, 2)),
        }
    }

    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match *self.shape {
            [a, b, c] => Ok((a, b, c)),
            _ => Err(rank_error(&self.shape, 3)),
        }
    }

    pub fn dims4(&self) -> Result<(usize, usize, usize, usize)> {
        match *self.shape {
            [a, b, c, d] => Ok((a, b, c, d)),
            _ => Err(rank_error(&self.shape, 4)),
        }
    }

    /// Flat offset of `(c, i, j)` in a rank-3 tensor. No bounds checks.
    #[inline]
    pub fn offset3(&self, c: usize, i: usize, j: usize) -> usize {
        let h = self.shape[1];
        let w = self.shape[2];
        (c * h + i) * w + j
    }

    /// Flat offset of `(n, c, i, j)` in a rank-4 tensor. No bounds checks.
    #[inline]
    pub fn offset4(&self, n: usize, c: usize, i: usize, j: usize) -> usize {
        let ch = self.shape[1];
        let h = self.shape[2];
        let w = self.shape[3];
        ((n * ch + c) * h + i) * w + j
    }

    pub fn get(&self, idx: &[usize]) -> T {
        assert_eq!(idx.len(), self.rank(), "index rank mismatch");
        let mut off = 0;
        for (d, (&i, &dim)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(i < dim, "index {i} out of bounds in dim {d} (size {dim})");
            off = off * dim + i;
        }
        self.data[off]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        assert_eq!(idx.len(), self.rank(), "index rank mismatch");
        let mut off = 0;
        for (d, (&i, &dim)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(i < dim, "index {i} out of bounds in dim {d} (size {dim})");
            off = off * dim + i;
        }
        self.data[off] = v;
    }

    /// Converts every element, e.g. `f32` → `f64` for reference math.
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }

    /// Borrows the `C×H×W` slice of sample `n` in a rank-4 tensor.
    pub fn sample(&self, n: usize) -> Result<&[T]> {
        let (batch, c, h, w) = self.dims4()?;
        if n >= batch {
            return Err(Error::Bounds {
                dim: "batch",
                index: n,
                limit: batch,
            });
        }
        let stride = c * h * w;
        Ok(&self.data[n * stride..(n + 1) * stride])
    }

    /// Copies out a square `s×s` patch of channel `c` with top-left `(i, j)`.
    pub fn read_patch(&self, c: usize, i: usize, j: usize, s: usize) -> Result<Tensor<T>> {
        let (channels, h, w) = self.dims3()?;
        check_patch_bounds(channels, h, w, c, i, j, s)?;
        let mut out = Vec::with_capacity(s * s);
        for row in 0..s {
            let start = self.offset3(c, i + row, j);
            out.extend_from_slice(&self.data[start..start + s]);
        }
        Tensor::from_vec(&[s, s], out)
    }

    /// Returns a copy of `self` with `patch` written at `(c, i, j)`.
    pub fn write_patch(&self, c: usize, i: usize, j: usize, patch: &Tensor<T>) -> Result<Tensor<T>> {
        let (channels, h, w) = self.dims3()?;
        let (ph, pw) = patch.dims2()?;
        if ph != pw {
            return Err(Error::Shape {
                expected: "square patch".into(),
                got: format!("{ph}x{pw}"),
            });
        }
        let s = ph;
        check_patch_bounds(channels, h, w, c, i, j, s)?;
        let mut out = self.clone();
        for row in 0..s {
            let start = out.offset3(c, i + row, j);
            out.data[start..start + s].copy_from_slice(&patch.data[row * s..(row + 1) * s]);
        }
        Ok(out)
    }
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > 4 {
        return Err(Error::Shape {
            expected: "rank 1..=4".into(),
            got: format!("rank {}", shape.len()),
        });
    }
    if shape.iter().any(|&d| d == 0) {
        return Err(Error::Shape {
            expected: "positive dimensions".into(),
            got: format!("{shape:?}"),
        });
    }
    Ok(())
}

fn rank_error(shape: &[usize], want: usize) -> Error {
    Error::Shape {
        expected: format!("rank {want}"),
        got: format!("shape {shape:?}"),
    }
}

fn check_patch_bounds(
    channels: usize,
    h: usize,
    w: usize,
    c: usize,
    i: usize,
    j: usize,
    s: usize,
) -> Result<()> {
    if c >= channels {
        return Err(Error::Bounds {
            dim: "channel",
            index: c,
            limit: channels,
        });
    }
    if s == 0 || s > h.min(w) {
        return Err(Error::Bounds {
            dim: "patch size",
            index: s,
            limit: h.min(w),
        });
    }
    if i + s > h {
        return Err(Error::Bounds {
            dim: "row",
            index: i,
            limit: h - s + 1,
        });
    }
    if j + s > w {
        return Err(Error::Bounds {
            dim: "col",
            index: j,
            limit: w - s + 1,
        });
    }
    Ok(())
}
