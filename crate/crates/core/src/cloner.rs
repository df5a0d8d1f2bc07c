//! Asymmetric 1->2 and symmetric 1->M universal cloning of a pure qubit.

use crate::error::{Error, Result};
use crate::linalg::{
    identity, pauli, qubit_permutation_unitary, tensor_all, tensor_product, CMat,
    DensityMatrix, PureQubit,
};

/// Asymmetry record of the 1->2 cloner. A single parameter `a` fixes the
/// remaining fields through the positive root of `a^2 + ab + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneParams {
    pub a: f64,
    pub b: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa: f64,
}

pub const SYMMETRIC_A: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

impl CloneParams {
    pub fn symmetric() -> Self {
        params_from_a(SYMMETRIC_A).expect("symmetric point is in range")
    }

    /// Marginal fidelity of clone 1, `(1 + gamma1)/2`.
    pub fn fidelity_clone1(&self) -> f64 {
        0.5 * (1.0 + self.gamma1)
    }

    pub fn fidelity_clone2(&self) -> f64 {
        0.5 * (1.0 + self.gamma2)
    }
}

pub fn params_from_a(a: f64) -> Result<CloneParams> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::ParamOutOfRange { name: "a", value: a });
    }
    let b = (-a + (4.0 - 3.0 * a * a).sqrt()) / 2.0;
    Ok(CloneParams {
        a,
        b,
        gamma1: a * (a + b),
        gamma2: b * (a + b),
        kappa: a * b,
    })
}

/// Joint two-clone state in the Pauli basis:
/// `rho_c = rho_0 + sum_k r_k A_k` with
/// `rho_0 = (s0 x s0 + kappa sum_k s_k x s_k)/4` and
/// `A_k = (gamma1 s_k x I + gamma2 I x s_k)/4`.
pub fn two_clone_state(r: [f64; 3], p: &CloneParams) -> Result<DensityMatrix> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::ParamOutOfRange {
            name: "bloch norm",
            value: norm,
        });
    }
    let mut m = tensor_product(&identity(2), &identity(2)).scale(0.25);
    for k in 1..=3 {
        let sk = pauli(k);
        m += tensor_product(&sk, &sk).scale(0.25 * p.kappa);
        let a_k = tensor_product(&sk, &identity(2)).scale(0.25 * p.gamma1)
            + tensor_product(&identity(2), &sk).scale(0.25 * p.gamma2);
        m += a_k.scale(r[k - 1]);
    }
    DensityMatrix::from_matrix(m, vec![2, 2])
}

/// Three-register output of the cloning unitary, clones `A`, `B` and ancilla
/// `C`, in singlet-pair form:
/// `(a |psi>_A |S>_BC + b |psi>_B |S>_AC) / sqrt(2)` with
/// `|S> = |01> - |10>`. The singlet is invariant under `U (x) U` up to phase,
/// which makes the construction state-independent in quality; kept as an
/// independent route for cross-checking the Pauli-basis clone state.
pub fn cloner_unitary_output(psi: &PureQubit, p: &CloneParams) -> DensityMatrix {
    let k = psi.ket();
    let zero = PureQubit::zero().ket();
    let one = PureQubit::zero().orthogonal().ket();
    let term = |x: &CMat, y: &CMat, z: &CMat| tensor_all(&[x, y, z]);
    // a |psi (01 - 10)> + b with the psi and singlet registers interleaved
    let ket = (term(&k, &zero, &one) - term(&k, &one, &zero)).scale(p.a)
        + (term(&zero, &k, &one) - term(&one, &k, &zero)).scale(p.b);
    let rho = (&ket * ket.adjoint()).scale(0.5);
    DensityMatrix::from_matrix_unchecked(rho, vec![2, 2, 2])
}

/// Projector onto the symmetric subspace of `m` qubits.
fn symmetric_projector(m: usize) -> CMat {
    let perms = permutations(m);
    let dim = 1usize << m;
    let mut p = CMat::zeros(dim, dim);
    for perm in &perms {
        p += qubit_permutation_unitary(m, perm);
    }
    p.scale(1.0 / perms.len() as f64)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..m).collect();
    heap_permute(&mut items, m, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Optimal universal symmetric 1->M clone state: the input tensored with
/// maximally mixed ancillas, projected onto the symmetric subspace and
/// rescaled by `2^M / (M + 1)`.
pub fn symmetric_clone_state(psi: &PureQubit, m: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&m) {
        return Err(Error::ParamOutOfRange {
            name: "M",
            value: m as f64,
        });
    }
    let mut state = psi.density().into_matrix();
    for _ in 1..m {
        state = tensor_product(&state, &identity(2).scale(0.5));
    }
    let p = symmetric_projector(m);
    let out = (&p * state * &p).scale((1usize << m) as f64 / (m as f64 + 1.0));
    DensityMatrix::from_matrix(out, vec![2; m])
}

/// `F_{K->M} = (KM + K + M) / (M (K + 2))`.
pub fn symmetric_fidelity(k: usize, m: usize) -> Result<f64> {
    if k < 1 || k > m {
        return Err(Error::ParamOutOfRange {
            name: "K",
            value: k as f64,
        });
    }
    let (k, m) = (k as f64, m as f64);
    Ok((k * m + k + m) / (m * (k + 2.0)))
}

/// Admissible 1->2 fidelity pair test:
/// `sqrt((1-F_A)(1-F_B)) >= 1/2 - (1-F_A) - (1-F_B)`.
pub fn in_cloning_region(f_a: f64, f_b: f64) -> Result<bool> {
    for (name, v) in [("F_A", f_a), ("F_B", f_b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParamOutOfRange { name, value: v });
        }
    }
    let (da, db) = (1.0 - f_a, 1.0 - f_b);
    // Tolerance absorbs the cancellation error of 1 - F near F = 1, which
    // boundary points at extreme asymmetry hit (relative error ~1e-11 in the
    // smaller deficit, ~1e-14 after the square root).
    Ok((da * db).sqrt() >= 0.5 - da - db - 1e-12)
}
