//! Dense `f32` activations in `[batch][channel][time][frequency]` order.

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub n: usize,
    pub c: usize,
    pub t: usize,
    pub f: usize,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(n: usize, c: usize, t: usize, f: usize) -> Self {
        Self {
            n,
            c,
            t,
            f,
            data: vec![0.0; n * c * t * f],
        }
    }

    pub fn from_vec(n: usize, c: usize, t: usize, f: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), n * c * t * f, "tensor data length mismatch");
        Self { n, c, t, f, data }
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n, self.c, self.t, self.f]
    }

    /// Elements in one `[time][frequency]` plane.
    pub fn plane(&self) -> usize {
        self.t * self.f
    }

    /// Elements in one batch item.
    pub fn item(&self) -> usize {
        self.c * self.t * self.f
    }

    pub fn item_slice(&self, n: usize) -> &[f32] {
        let len = self.item();
        &self.data[n * len..(n + 1) * len]
    }

    pub fn item_slice_mut(&mut self, n: usize) -> &mut [f32] {
        let len = self.item();
        &mut self.data[n * len..(n + 1) * len]
    }

    #[inline]
    pub fn idx(&self, n: usize, c: usize, t: usize, f: usize) -> usize {
        ((n * self.c + c) * self.t + t) * self.f + f
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.n, self.c, self.t, self.f)
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `C = alpha * op(A) * op(B) + beta * C` for row-major operands, where
/// `op(A)` is `m x k` and `op(B)` is `k x n`.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f32],
    a_transposed: bool,
    b: &[f32],
    b_transposed: bool,
    beta: f32,
    c: &mut [f32],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in &mut c[..m * n] {
            *v *= beta;
        }
        return;
    }
    // Row-major op(A): element (i, p) at i*k + p, or p*m + i if stored transposed.
    let (rsa, csa) = if a_transposed { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_transposed { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every index implied by the strides.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
