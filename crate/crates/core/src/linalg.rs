//! Dense complex matrix engine for few-qubit density operators.
//!
//! All multipartite indexing is big-endian over the `dims` list: the first
//! listed subsystem is the leftmost tensor factor and contributes the most
//! significant part of a flat index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = -1e-9;

/// Dimensions stay capped at 2^6; the link model never exceeds five qubits.
pub const MAX_DIM: usize = 64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

/// Pauli matrix, `k` in 0..=3 with `0` the identity.
pub fn pauli(k: usize) -> CMat {
    match k {
        0 => identity(2),
        1 => CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        2 => CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        3 => CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// Kronecker product with the left operand as the most significant factor.
pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[&CMat]) -> CMat {
    let mut out = identity(1);
    for f in factors {
        out = tensor_product(&out, f);
    }
    out
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().sum()
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// first to absorb rounding from channel compositions.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Unitary permutation matrix sending basis state with qubit tuple `x` to the
/// state where qubit `i` holds what qubit `perm[i]` held.
pub fn qubit_permutation_unitary(n_qubits: usize, perm: &[usize]) -> CMat {
    assert_eq!(perm.len(), n_qubits);
    let dim = 1usize << n_qubits;
    let mut u = zeros(dim);
    for x in 0..dim {
        let mut y = 0usize;
        for i in 0..n_qubits {
            // big-endian: qubit 0 is the most significant bit
            let bit = (x >> (n_qubits - 1 - perm[i])) & 1;
            y |= bit << (n_qubits - 1 - i);
        }
        u[(y, x)] = c(1., 0.);
    }
    u
}

/// Partial transpose over one subsystem of a matrix with subsystem
/// dimensions `dims`.
pub fn partial_transpose(m: &CMat, dims: &[usize], subsystem: usize) -> Result<CMat> {
    if subsystem >= dims.len() {
        return Err(Error::InvalidSubsystem {
            index: subsystem,
            count: dims.len(),
        });
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: m.nrows(),
        });
    }
    let st = strides(dims);
    let d = dims[subsystem];
    let s = st[subsystem];
    let mut out = zeros(total);
    for row in 0..total {
        let ri = (row / s) % d;
        let rbase = row - ri * s;
        for col in 0..total {
            let ci = (col / s) % d;
            let cbase = col - ci * s;
            out[(rbase + ci * s, cbase + ri * s)] = m[(row, col)];
        }
    }
    Ok(out)
}

/// Partial trace keeping the subsystems in `keep` (original order preserved).
pub fn partial_trace_raw(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n = dims.len();
    for &k in keep {
        if k >= n {
            return Err(Error::InvalidSubsystem { index: k, count: n });
        }
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidState("duplicate subsystem in keep set".into()));
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: m.nrows(),
        });
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let st = strides(dims);
    let keep_dim: usize = keep.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();
    let mut out = zeros(keep_dim);

    // flat kept/traced indices decompose against their own mixed-radix bases
    let expand = |flat: usize, subs: &[usize]| -> usize {
        let mut rem = flat;
        let mut idx = 0usize;
        for &sub in subs.iter().rev() {
            let d = dims[sub];
            idx += (rem % d) * st[sub];
            rem /= d;
        }
        idx
    };

    for kr in 0..keep_dim {
        let row_k = expand(kr, keep);
        for kc in 0..keep_dim {
            let col_k = expand(kc, keep);
            let mut acc = c(0., 0.);
            for t in 0..traced_dim {
                let off = expand(t, &traced);
                acc += m[(row_k + off, col_k + off)];
            }
            out[(kr, kc)] = acc;
        }
    }
    Ok(out)
}

/// A pure qubit `alpha |0> + beta |1>`.
#[derive(Debug, Clone, Copy)]
pub struct PureQubit {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PureQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "amplitudes not normalized: |alpha|^2 + |beta|^2 = {norm}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Bloch-angle parameterization `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            alpha: c((theta / 2.0).cos(), 0.0),
            beta: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    pub fn zero() -> Self {
        Self {
            alpha: c(1., 0.),
            beta: c(0., 0.),
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        let cross = self.alpha.conj() * self.beta;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.alpha.norm_sqr() - self.beta.norm_sqr(),
        ]
    }

    /// `-beta* |0> + alpha |1>`, orthogonal to `self`.
    pub fn orthogonal(&self) -> Self {
        Self {
            alpha: -self.beta.conj(),
            beta: self.alpha,
        }
    }

    pub fn ket(&self) -> CMat {
        CMat::from_column_slice(2, 1, &[self.alpha, self.beta])
    }

    pub fn density(&self) -> DensityMatrix {
        let k = self.ket();
        DensityMatrix::from_matrix(&k * k.adjoint(), vec![2]).expect("pure state is valid")
    }
}

/// Hermitian, unit-trace, PSD operator over a labeled register of subsystems.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    data: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (min eigenvalue >= -1e-9) before accepting the matrix.
    pub fn from_matrix(data: CMat, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::InvalidState(format!(
                "dimension {total} exceeds cap {MAX_DIM}"
            )));
        }
        if data.nrows() != total || data.ncols() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: data.nrows(),
            });
        }
        let herm_dev = max_abs_diff(&data, &data.adjoint());
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let tr = trace(&data);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", tr)));
        }
        let min_ev = min_eigenvalue(&data);
        if min_ev < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not PSD: min eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(Self { data, dims })
    }

    /// Skips validation; for intermediates whose validity is established by
    /// construction or checked later.
    pub fn from_matrix_unchecked(data: CMat, dims: Vec<usize>) -> Self {
        Self { data, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        Self {
            data: identity(total).scale(1.0 / total as f64),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        Self::from_matrix(self.data.clone(), self.dims.clone()).map(|_| ())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            data: tensor_product(&self.data, &other.data),
            dims,
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let data = partial_trace_raw(&self.data, &self.dims, keep)?;
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(Self { data, dims })
    }

    /// Overlap `<psi| rho |psi>` for a single-qubit state.
    pub fn fidelity_with_pure(&self, psi: &PureQubit) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim(),
            });
        }
        let k = psi.ket();
        let val = (k.adjoint() * &self.data * k)[(0, 0)];
        Ok(val.re)
    }
}
