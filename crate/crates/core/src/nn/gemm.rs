//! Bounds-checked wrapper over `matrixmultiply::dgemm`.

/// Strided read-only matrix view.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub data: &'a [f64],
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    pub rs: usize,
    pub cs: usize,
}

/// Strided writable matrix view.
pub(crate) struct ViewMut<'a> {
    pub data: &'a mut [f64],
    pub offset: usize,
    pub rs: usize,
    pub cs: usize,
}

fn last_index(offset: usize, rows: usize, cols: usize, rs: usize, cs: usize) -> usize {
    offset + (rows - 1) * rs + (cols - 1) * cs
}

impl<'a> View<'a> {
    pub fn new(data: &'a [f64], offset: usize, rows: usize, cols: usize, rs: usize, cs: usize) -> Self {
        Self {
            data,
            offset,
            rows,
            cols,
            rs,
            cs,
        }
    }

    /// The transpose, sharing storage.
    pub fn t(self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            ..self
        }
    }
}

impl<'a> ViewMut<'a> {
    pub fn new(data: &'a mut [f64], offset: usize, rs: usize, cs: usize) -> Self {
        Self { data, offset, rs, cs }
    }
}

/// `c = alpha * a * b + beta * c`.
///
/// Panics if any view reaches past its slice or the inner dimensions
/// disagree. Rows of `c` must not alias each other.
pub(crate) fn gemm(alpha: f64, a: View, b: View, beta: f64, c: ViewMut) {
    assert_eq!(a.cols, b.rows, "gemm inner dimensions");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return;
    }
    assert!(last_index(c.offset, m, n, c.rs, c.cs) < c.data.len(), "gemm output view out of range");
    if k == 0 {
        for i in 0..m {
            for j in 0..n {
                let x = &mut c.data[c.offset + i * c.rs + j * c.cs];
                *x *= beta;
            }
        }
        return;
    }
    assert!(last_index(a.offset, m, k, a.rs, a.cs) < a.data.len(), "gemm left view out of range");
    assert!(last_index(b.offset, k, n, b.rs, b.cs) < b.data.len(), "gemm right view out of range");
    // SAFETY: every element the kernel touches lies inside the borrowed
    // slices (checked above); `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr().add(a.offset),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr().add(b.offset),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.data.as_mut_ptr().add(c.offset),
            c.rs as isize,
            c.cs as isize,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_product_with_strides() {
        let a: Vec<f64> = (0..12).map(|v| v as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..20).map(|v| (v as f64).sin()).collect();
        // a as 3x4 row-major, b as 4x5 column-major.
        let mut c = vec![1.0; 15];
        gemm(2.0, View::new(&a, 0, 3, 4, 4, 1), View::new(&b, 0, 4, 5, 1, 4), 0.5, ViewMut::new(&mut c, 0, 5, 1));
        for i in 0..3 {
            for j in 0..5 {
                let want: f64 = 0.5 + 2.0 * (0..4).map(|k| a[i * 4 + k] * b[j * 4 + k]).sum::<f64>();
                assert!((c[i * 5 + j] - want).abs() < 1e-12);
            }
        }
    }
}
