//! Haar-averaged operators feeding the purification program.
//!
//! The 2x2 asymmetric-cloner case has a closed form built from the
//! noise-processed Pauli components; every other configuration goes through
//! spherical quadrature or Monte-Carlo sampling of the Bloch sphere. The
//! integrands are at most quadratic in the Bloch components, so low quadrature
//! orders are already exact; Monte Carlo is retained as an independent oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_mimo_channel, MimoChannelSpec};
use crate::cloner::CloneParams;
use crate::error::{Error, Result};
use crate::linalg::{
    identity, max_abs_diff, partial_trace_raw, pauli, qubit_permutation_unitary,
    tensor_product, CMat, DensityMatrix, PureQubit,
};

/// The pair of Haar-averaged matrices entering the purification SDP, each of
/// dimension `2^(K+1)`: `K` clone registers followed by the reference qubit.
#[derive(Debug, Clone)]
pub struct QROperators {
    pub q: CMat,
    pub r: CMat,
    pub k: usize,
}

impl QROperators {
    pub fn dim(&self) -> usize {
        1 << (self.k + 1)
    }

    /// Hermiticity, trace normalization (Tr Q = 1, Tr R = 2) and the tensor
    /// factorization of R.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.q.nrows() != dim || self.r.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.q.nrows(),
            });
        }
        for (name, m) in [("Q", &self.q), ("R", &self.r)] {
            if max_abs_diff(m, &m.adjoint()) > 1e-10 {
                return Err(Error::InvalidState(format!("{name} not Hermitian")));
            }
        }
        let tq = self.q.diagonal().sum();
        let tr = self.r.diagonal().sum();
        if (tq.re - 1.0).abs() > 1e-10 || tq.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("Tr Q = {tq} != 1")));
        }
        if (tr.re - 2.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("Tr R = {tr} != 2")));
        }
        // R must factor as (average clone state) (x) I_2
        let avg = partial_trace_raw(&self.r, &[dim / 2, 2], &[0])?.scale(0.5);
        let rebuilt = tensor_product(&avg, &identity(2));
        if max_abs_diff(&rebuilt, &self.r) > 1e-10 {
            return Err(Error::InvalidState("R does not factor as avg (x) I_2".into()));
        }
        Ok(())
    }
}

/// Cloner coefficients after the 2x2 channel: contracted Bloch coefficients
/// and the surviving inter-clone correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProcessedCloner {
    pub gamma1p: f64,
    pub gamma2p: f64,
    pub kappap: f64,
}

impl NoiseProcessedCloner {
    pub fn new(p: &CloneParams, eta: f64, lambda1: f64, lambda2: f64) -> Self {
        Self {
            gamma1p: (1.0 - lambda1) * ((1.0 - eta) * p.gamma1 + eta * p.gamma2),
            gamma2p: (1.0 - lambda2) * ((1.0 - eta) * p.gamma2 + eta * p.gamma1),
            kappap: p.kappa * (1.0 - lambda1) * (1.0 - lambda2),
        }
    }
}

/// Noise-processed identity component: `(I x I + kappa' sum_k s_k x s_k)/4`.
fn gamma0(n: &NoiseProcessedCloner) -> CMat {
    let mut m = identity(4);
    for k in 1..=3 {
        let sk = pauli(k);
        m += tensor_product(&sk, &sk).scale(n.kappap);
    }
    m.scale(0.25)
}

/// Noise-processed Pauli component: `(gamma1' s_k x I + gamma2' I x s_k)/4`
/// with clone 1 as the leading factor, matching the clone-state Pauli form.
fn gamma_k(n: &NoiseProcessedCloner, k: usize) -> CMat {
    assert!((1..=3).contains(&k), "gamma index {k} out of range");
    let sk = pauli(k);
    (tensor_product(&sk, &identity(2)).scale(n.gamma1p)
        + tensor_product(&identity(2), &sk).scale(n.gamma2p))
    .scale(0.25)
}

/// Closed-form Q and R for the 1->2 cloner through the 2x2 channel:
/// `R = Gamma_0 (x) I_2`, `Q = Gamma_0 (x) I_2 / 2 + sum_k Gamma_k (x) s_k / 6`.
pub fn analytic_qr_2x2(p: &CloneParams, eta: f64, lambda1: f64, lambda2: f64) -> QROperators {
    let n = NoiseProcessedCloner::new(p, eta, lambda1, lambda2);
    let g0 = gamma0(&n);
    let r = tensor_product(&g0, &identity(2));
    let mut q = r.scale(0.5);
    for k in 1..=3 {
        q += tensor_product(&gamma_k(&n, k), &pauli(k)).scale(1.0 / 6.0);
    }
    QROperators { q, r, k: 2 }
}

/// Re-lays an operator on clones + reference so the reference qubit becomes
/// the leading tensor factor. The golden `Q` entries are recorded in this
/// layout (while `R` stays clones-first); internally everything is
/// clones-first.
pub fn reference_first_layout(m: &CMat, k: usize) -> CMat {
    let mut perm = vec![k];
    perm.extend(0..k);
    let p = qubit_permutation_unitary(k + 1, &perm);
    &p * m * p.adjoint()
}

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Product rule over the Bloch sphere: Gauss-Legendre in cos(theta), uniform
/// in phi. Weights sum to 1.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub nodes: Vec<(PureQubit, f64)>,
}

impl SphereQuadrature {
    pub fn new(theta_order: usize, phi_points: usize) -> Self {
        let gl = gauss_legendre(theta_order);
        let mut nodes = Vec::with_capacity(theta_order * phi_points);
        for &(x, w) in &gl {
            let theta = x.acos();
            for j in 0..phi_points {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / phi_points as f64;
                nodes.push((
                    PureQubit::from_angles(theta, phi),
                    w / (2.0 * phi_points as f64),
                ));
            }
        }
        Self { nodes }
    }

    /// Exact for integrands quadratic in the Bloch components.
    pub fn default_grid() -> Self {
        Self::new(20, 40)
    }
}

fn haar_sample(rng: &mut ChaCha8Rng) -> PureQubit {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    PureQubit::from_angles(z.acos(), phi)
}

/// Haar-average of a bounded scalar functional over pure qubit states.
#[derive(Debug, Clone)]
pub enum HaarMethod {
    Quadrature(SphereQuadrature),
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct HaarEstimate {
    pub value: f64,
    /// Standard error for Monte Carlo; `None` for quadrature.
    pub std_error: Option<f64>,
}

pub fn haar_average<F: Fn(&PureQubit) -> f64>(f: F, method: &HaarMethod) -> HaarEstimate {
    match method {
        HaarMethod::Quadrature(grid) => {
            let value = grid.nodes.iter().map(|(psi, w)| w * f(psi)).sum();
            HaarEstimate {
                value,
                std_error: None,
            }
        }
        HaarMethod::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..*samples {
                let v = f(&haar_sample(&mut rng));
                sum += v;
                sum_sq += v * v;
            }
            let n = *samples as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).max(0.0);
            HaarEstimate {
                value: mean,
                std_error: Some((var / n).sqrt()),
            }
        }
    }
}

fn accumulate_qr<I>(
    states: I,
    encode: &dyn Fn(&PureQubit) -> Result<DensityMatrix>,
    spec: &MimoChannelSpec,
    keep: &[usize],
) -> Result<QROperators>
where
    I: Iterator<Item = (PureQubit, f64)>,
{
    let k = keep.len();
    let dim = 1usize << (k + 1);
    let mut q = CMat::zeros(dim, dim);
    let mut avg_kept = CMat::zeros(1 << k, 1 << k);
    let mut checked_dims = false;
    for (psi, w) in states {
        let rho_in = encode(&psi)?;
        if !checked_dims {
            if rho_in.num_subsystems() != spec.num_streams() {
                return Err(Error::DimensionMismatch {
                    expected: spec.num_streams(),
                    found: rho_in.num_subsystems(),
                });
            }
            checked_dims = true;
        }
        let rho_o = apply_mimo_channel(&rho_in, spec)?;
        let kept = rho_o.partial_trace(keep)?;
        let rho_ref = psi.density();
        q += tensor_product(kept.matrix(), rho_ref.matrix()).scale(w);
        avg_kept += kept.matrix().scale(w);
    }
    let r = tensor_product(&avg_kept, &identity(2));
    Ok(QROperators { q, r, k })
}

/// Haar integrals of the kept channel outputs by spherical quadrature. The
/// encoder maps the logical qubit to the full `N`-stream input state; unused
/// streams should carry `I/2`. Streams not in `keep` are traced out.
pub fn numeric_qr(
    encode: &dyn Fn(&PureQubit) -> Result<DensityMatrix>,
    spec: &MimoChannelSpec,
    keep: &[usize],
    grid: &SphereQuadrature,
) -> Result<QROperators> {
    accumulate_qr(grid.nodes.iter().cloned(), encode, spec, keep)
}

/// Monte-Carlo counterpart of [`numeric_qr`]; same seed gives the same
/// estimate.
pub fn numeric_qr_mc(
    encode: &dyn Fn(&PureQubit) -> Result<DensityMatrix>,
    spec: &MimoChannelSpec,
    keep: &[usize],
    samples: usize,
    seed: u64,
) -> Result<QROperators> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 1.0 / samples as f64;
    let states = (0..samples).map(move |_| (haar_sample(&mut rng), w));
    accumulate_qr(states, encode, spec, keep)
}

/// Standard 2x2 encoder: the correlated two-clone state of the asymmetric
/// cloner.
pub fn two_clone_encoder(p: CloneParams) -> impl Fn(&PureQubit) -> Result<DensityMatrix> {
    move |psi: &PureQubit| crate::cloner::two_clone_state(psi.bloch(), &p)
}
