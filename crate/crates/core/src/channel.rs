//! Layered crosstalk-plus-depolarization MIMO channel on `N = 2^m` streams.
//!
//! Crosstalk is a recursive butterfly of probabilistic SWAPs: layer `l`
//! (1-indexed) exchanges blocks of `2^(l-1)` adjacent streams. Boxes within a
//! layer flip independently; the transpositions inside one box are a single
//! joint block SWAP. After all layers each stream passes through a local
//! depolarizing map.

use crate::error::{Error, Result};
use crate::linalg::{
    self, identity, pauli, qubit_permutation_unitary, tensor_all, CMat, DensityMatrix,
};

/// Parameters of the `N = 2^m` channel: one crosstalk strength per layer and
/// one depolarizing strength per stream.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannelSpec {
    m: usize,
    etas: Vec<f64>,
    lambdas: Vec<f64>,
}

impl MimoChannelSpec {
    pub fn new(etas: Vec<f64>, lambdas: Vec<f64>) -> Result<Self> {
        let m = etas.len();
        if lambdas.len() != (1 << m) {
            return Err(Error::DimensionMismatch {
                expected: 1 << m,
                found: lambdas.len(),
            });
        }
        for &eta in &etas {
            if !(0.0..=0.5).contains(&eta) {
                return Err(Error::ParamOutOfRange { name: "eta", value: eta });
            }
        }
        for &lam in &lambdas {
            if !(0.0..=1.0).contains(&lam) {
                return Err(Error::ParamOutOfRange { name: "lambda", value: lam });
            }
        }
        Ok(Self { m, etas, lambdas })
    }

    /// 2x2 link, Eq-style `(N_l1 x N_l2) o C_eta`.
    pub fn two_by_two(eta: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(vec![eta], vec![lambda1, lambda2])
    }

    /// 4x4 link with uniform depolarization.
    pub fn four_by_four(eta1: f64, eta2: f64, lambda: f64) -> Result<Self> {
        Self::new(vec![eta1, eta2], vec![lambda; 4])
    }

    pub fn layers(&self) -> usize {
        self.m
    }

    pub fn num_streams(&self) -> usize {
        1 << self.m
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Boxes of layer `l` (1-indexed): each box is the list of qubit
    /// transpositions applied jointly with probability `eta_l`.
    pub fn layer_boxes(&self, layer: usize) -> Vec<Vec<(usize, usize)>> {
        let n = self.num_streams();
        let half = 1 << (layer - 1);
        let group = half * 2;
        (0..n / group)
            .map(|g| {
                let base = g * group;
                (0..half).map(|i| (base + i, base + i + half)).collect()
            })
            .collect()
    }
}

fn embedded_pauli(n_qubits: usize, stream: usize, k: usize) -> CMat {
    let factors: Vec<CMat> = (0..n_qubits)
        .map(|q| if q == stream { pauli(k) } else { identity(2) })
        .collect();
    let refs: Vec<&CMat> = factors.iter().collect();
    tensor_all(&refs)
}

/// Depolarizing map `(1 - lambda) rho + lambda I/2` on one stream of a
/// multiqubit state, realized in Pauli form.
pub fn depolarize(rho: &DensityMatrix, stream: usize, lambda: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParamOutOfRange { name: "lambda", value: lambda });
    }
    let n = rho.num_subsystems();
    if stream >= n {
        return Err(Error::InvalidSubsystem { index: stream, count: n });
    }
    let mut out = rho.matrix().scale(1.0 - 0.75 * lambda);
    for k in 1..=3 {
        let s = embedded_pauli(n, stream, k);
        out += (&s * rho.matrix() * &s).scale(0.25 * lambda);
    }
    Ok(DensityMatrix::from_matrix_unchecked(out, rho.dims().to_vec()))
}

/// One crosstalk layer: every box in `boxes` independently applies its joint
/// block SWAP with probability `eta`.
pub fn cswap_layer(
    rho: &DensityMatrix,
    boxes: &[Vec<(usize, usize)>],
    eta: f64,
) -> Result<DensityMatrix> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::ParamOutOfRange { name: "eta", value: eta });
    }
    let n = rho.num_subsystems();
    let mut seen = vec![false; n];
    for b in boxes {
        for &(i, j) in b {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::InvalidSubsystem { index: idx, count: n });
                }
                if seen[idx] {
                    return Err(Error::InvalidState(format!(
                        "stream {idx} appears in more than one swap"
                    )));
                }
                seen[idx] = true;
            }
        }
    }
    let mut out = rho.clone();
    for b in boxes {
        let mut perm: Vec<usize> = (0..n).collect();
        for &(i, j) in b {
            perm.swap(i, j);
        }
        let s = qubit_permutation_unitary(n, &perm);
        let mixed = out.matrix().scale(1.0 - eta) + (&s * out.matrix() * s.adjoint()).scale(eta);
        out = DensityMatrix::from_matrix_unchecked(mixed, rho.dims().to_vec());
    }
    Ok(out)
}

/// Full channel: crosstalk layers 1..m in order, then per-stream
/// depolarization.
pub fn apply_mimo_channel(rho_in: &DensityMatrix, spec: &MimoChannelSpec) -> Result<DensityMatrix> {
    let n = spec.num_streams();
    if rho_in.num_subsystems() != n || rho_in.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: rho_in.dim(),
        });
    }
    let mut rho = rho_in.clone();
    for layer in 1..=spec.layers() {
        rho = cswap_layer(&rho, &spec.layer_boxes(layer), spec.etas()[layer - 1])?;
    }
    for (stream, &lam) in spec.lambdas().iter().enumerate() {
        rho = depolarize(&rho, stream, lam)?;
    }
    Ok(rho)
}

/// `p_{j,k}` under the layered circuit: bit `l` of `j XOR k` decides whether
/// layer `l+1` must have swapped.
pub fn crossing_probability(j: usize, k: usize, etas: &[f64]) -> Result<f64> {
    let n = 1usize << etas.len();
    for idx in [j, k] {
        if idx >= n {
            return Err(Error::InvalidSubsystem { index: idx, count: n });
        }
    }
    let bits = j ^ k;
    let mut p = 1.0;
    for (l, &eta) in etas.iter().enumerate() {
        if (bits >> l) & 1 == 1 {
            p *= eta;
        } else {
            p *= 1.0 - eta;
        }
    }
    Ok(p)
}

/// CPTP certificate for the full channel map.
#[derive(Debug, Clone)]
pub struct CptpReport {
    pub min_choi_eigenvalue: f64,
    pub tp_deviation: f64,
    pub passes: bool,
}

/// Builds the Choi matrix of the channel from basis inputs and certifies
/// positivity (min eigenvalue >= -1e-9) and trace preservation (1e-10).
pub fn cptp_check(spec: &MimoChannelSpec) -> Result<CptpReport> {
    let n = spec.num_streams();
    let dim = 1usize << n;
    let choi_dim = dim * dim;
    let mut choi = CMat::zeros(choi_dim, choi_dim);
    // Choi = sum_ij |i><j| (x) H(|i><j|)
    for i in 0..dim {
        for j in 0..dim {
            let mut basis = CMat::zeros(dim, dim);
            basis[(i, j)] = linalg::c(1.0, 0.0);
            let mapped = apply_mimo_channel(
                &DensityMatrix::from_matrix_unchecked(basis, vec![2; n]),
                spec,
            )?;
            let block = mapped.matrix();
            for r in 0..dim {
                for s in 0..dim {
                    choi[(i * dim + r, j * dim + s)] = block[(r, s)];
                }
            }
        }
    }
    let min_ev = linalg::min_eigenvalue(&choi);
    let tr_out = linalg::partial_trace_raw(&choi, &[dim, dim], &[0])?;
    let tp_dev = linalg::max_abs_diff(&tr_out, &identity(dim));
    Ok(CptpReport {
        min_choi_eigenvalue: min_ev,
        tp_deviation: tp_dev,
        passes: min_ev >= -1e-9 && tp_dev <= 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, PureQubit};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depolarize_endpoints() {
        let psi = PureQubit::from_angles(0.4, 1.0);
        let rho = psi.density();
        let same = depolarize(&rho, 0, 0.0).unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
        let mixed = depolarize(&rho, 0, 1.0).unwrap();
        assert!(max_abs_diff(mixed.matrix(), &identity(2).scale(0.5)) < 1e-14);
    }

    #[test]
    fn depolarize_zero_ket() {
        let rho = depolarize(&PureQubit::zero().density(), 0, 0.3).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.85, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.15, epsilon = 1e-14);
    }

    #[test]
    fn cswap_endpoints() {
        let rho = PureQubit::zero()
            .density()
            .tensor(&PureQubit::from_angles(2.0, 0.5).density());
        let id = cswap_layer(&rho, &[vec![(0, 1)]], 0.0).unwrap();
        assert!(max_abs_diff(id.matrix(), rho.matrix()) < 1e-15);

        let half = cswap_layer(&rho, &[vec![(0, 1)]], 0.5).unwrap();
        let swap = qubit_permutation_unitary(2, &[1, 0]);
        let expect = rho.matrix().scale(0.5) + (&swap * rho.matrix() * swap.adjoint()).scale(0.5);
        assert!(max_abs_diff(half.matrix(), &expect) < 1e-14);
    }

    #[test]
    fn cswap_marginal_example() {
        // eta = 0.245 on |0><0| (x) I/2: stream-1 marginal diag(0.8775, 0.1225)
        let rho = PureQubit::zero()
            .density()
            .tensor(&DensityMatrix::maximally_mixed(vec![2]));
        let out = cswap_layer(&rho, &[vec![(0, 1)]], 0.245).unwrap();
        let marg = out.partial_trace(&[0]).unwrap();
        assert_abs_diff_eq!(marg.matrix()[(0, 0)].re, 0.8775, epsilon = 1e-12);
        assert_abs_diff_eq!(marg.matrix()[(1, 1)].re, 0.1225, epsilon = 1e-12);
    }

    #[test]
    fn cswap_rejects_overlap() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 2, 2]);
        assert!(cswap_layer(&rho, &[vec![(0, 1), (1, 2)]], 0.1).is_err());
    }

    #[test]
    fn channel_identity_when_noiseless() {
        let spec = MimoChannelSpec::two_by_two(0.0, 0.0, 0.0).unwrap();
        let rho = PureQubit::from_angles(1.0, 0.0)
            .density()
            .tensor(&PureQubit::from_angles(0.3, 2.0).density());
        let out = apply_mimo_channel(&rho, &spec).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-13);
    }

    #[test]
    fn channel_single_layer_mixture() {
        let spec = MimoChannelSpec::two_by_two(0.245, 0.0, 0.0).unwrap();
        let one = PureQubit::new(crate::linalg::c(0., 0.), crate::linalg::c(1., 0.)).unwrap();
        let rho = PureQubit::zero().density().tensor(&one.density());
        let out = apply_mimo_channel(&rho, &spec).unwrap();
        // 0.755 |01><01| + 0.245 |10><10|
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, 0.755, epsilon = 1e-13);
        assert_abs_diff_eq!(out.matrix()[(2, 2)].re, 0.245, epsilon = 1e-13);
    }

    #[test]
    fn crossing_probability_2x2() {
        assert_abs_diff_eq!(crossing_probability(0, 0, &[0.245]).unwrap(), 0.755, epsilon = 1e-15);
        assert_abs_diff_eq!(crossing_probability(0, 1, &[0.245]).unwrap(), 0.245, epsilon = 1e-15);
    }

    #[test]
    fn crossing_probability_4x4_xor() {
        let etas = [0.3, 0.2];
        // stream 1 -> 2 needs both a layer-1 and a layer-2 swap
        assert_abs_diff_eq!(crossing_probability(1, 2, &etas).unwrap(), 0.06, epsilon = 1e-15);
        assert_abs_diff_eq!(
            crossing_probability(2, 2, &etas).unwrap(),
            0.7 * 0.8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn crossing_probability_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let etas: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..0.5)).collect();
            for j in 0..4 {
                let total: f64 = (0..4)
                    .map(|k| crossing_probability(j, k, &etas).unwrap())
                    .sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                for k in 0..4 {
                    assert_abs_diff_eq!(
                        crossing_probability(j, k, &etas).unwrap(),
                        crossing_probability(k, j, &etas).unwrap(),
                        epsilon = 1e-15
                    );
                }
            }
        }
    }

    /// Monte-Carlo permutation oracle: simulate the layered coin flips and
    /// count where stream j's content ends up.
    fn mc_crossing(j: usize, etas: &[f64], draws: usize, seed: u64) -> Vec<f64> {
        let spec = MimoChannelSpec::new(etas.to_vec(), vec![0.0; 1 << etas.len()]).unwrap();
        let n = spec.num_streams();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            let mut pos: Vec<usize> = (0..n).collect();
            for layer in 1..=spec.layers() {
                for b in spec.layer_boxes(layer) {
                    if rng.gen::<f64>() < etas[layer - 1] {
                        for &(x, y) in &b {
                            pos.swap(x, y);
                        }
                    }
                }
            }
            // pos[out] = input stream now at `out`
            let out = pos.iter().position(|&p| p == j).unwrap();
            counts[out] += 1;
        }
        counts.iter().map(|&cnt| cnt as f64 / draws as f64).collect()
    }

    #[test]
    fn crossing_probability_matches_permutation_oracle() {
        let etas = [0.3, 0.2];
        let freq = mc_crossing(1, &etas, 100_000, 42);
        for k in 0..4 {
            let p = crossing_probability(1, k, &etas).unwrap();
            assert!(
                (freq[k] - p).abs() < 1e-2,
                "stream 1->{k}: mc {} vs analytic {p}",
                freq[k]
            );
        }
    }

    #[test]
    fn marginal_consistency_over_paths() {
        // stream j carries rho, everything else I/2: stream-k marginal is
        // p_jk (1 - lambda_k) rho + (1 - p_jk (1 - lambda_k)) I/2
        let spec = MimoChannelSpec::new(vec![0.31, 0.17], vec![0.1, 0.25, 0.4, 0.05]).unwrap();
        let psi = PureQubit::from_angles(1.3, -0.4);
        for j in 0..4 {
            let mut state = if j == 0 {
                psi.density()
            } else {
                DensityMatrix::maximally_mixed(vec![2])
            };
            for q in 1..4 {
                let factor = if q == j {
                    psi.density()
                } else {
                    DensityMatrix::maximally_mixed(vec![2])
                };
                state = state.tensor(&factor);
            }
            let out = apply_mimo_channel(&state, &spec).unwrap();
            for k in 0..4 {
                let p = crossing_probability(j, k, spec.etas()).unwrap();
                let w = p * (1.0 - spec.lambdas()[k]);
                let expect = psi.density().matrix().scale(w) + identity(2).scale((1.0 - w) / 2.0);
                let marg = out.partial_trace(&[k]).unwrap();
                assert!(
                    max_abs_diff(marg.matrix(), &expect) < 1e-10,
                    "j={j} k={k}"
                );
            }
        }
    }

    #[test]
    fn channel_preserves_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = MimoChannelSpec::two_by_two(0.245, 0.1, 0.2).unwrap();
        for _ in 0..50 {
            let a = PureQubit::from_angles(rng.gen_range(0.0..3.14), rng.gen_range(0.0..6.28));
            let b = PureQubit::from_angles(rng.gen_range(0.0..3.14), rng.gen_range(0.0..6.28));
            let rho = a.density().tensor(&b.density());
            let out = apply_mimo_channel(&rho, &spec).unwrap();
            out.validate().unwrap();
        }
    }

    #[test]
    fn permutation_covariance_uniform() {
        // uniform lambda: layer-generated relabelings commute with the channel
        let spec = MimoChannelSpec::four_by_four(0.245, 0.245, 0.1).unwrap();
        let rho = {
            let a = PureQubit::from_angles(0.9, 0.1).density();
            let b = DensityMatrix::maximally_mixed(vec![2]);
            a.tensor(&b.clone()).tensor(&b.clone()).tensor(&b)
        };
        // swap within layer-1 pair and the layer-2 block relabeling
        for perm in [vec![1usize, 0, 3, 2], vec![2, 3, 0, 1]] {
            let u = qubit_permutation_unitary(4, &perm);
            let lhs = apply_mimo_channel(
                &DensityMatrix::from_matrix_unchecked(
                    &u * rho.matrix() * u.adjoint(),
                    vec![2; 4],
                ),
                &spec,
            )
            .unwrap();
            let rhs = apply_mimo_channel(&rho, &spec).unwrap();
            let rhs_rot = &u * rhs.matrix() * u.adjoint();
            assert!(max_abs_diff(lhs.matrix(), &rhs_rot) < 1e-10);
        }
    }

    #[test]
    fn cptp_reports() {
        let id = MimoChannelSpec::two_by_two(0.0, 0.0, 0.0).unwrap();
        let rep = cptp_check(&id).unwrap();
        assert!(rep.passes);
        assert!(rep.tp_deviation < 1e-14);

        let noisy = MimoChannelSpec::two_by_two(0.245, 0.1, 0.2).unwrap();
        assert!(cptp_check(&noisy).unwrap().passes);
    }
}
