//! Dense primal-dual interior-point method for the purification program.
//!
//! The primal variable is the pair (J, S): the Choi operator of the decoding
//! map and the PSD slack absorbing `Tr_B[J] <= I`. Constraints are the single
//! trace equality `Tr[J R^T] = p` and the Hermitian block equality
//! `Tr_B[J] + S = I`. Search directions use Nesterov-Todd scaling; the Schur
//! complement is assembled in an orthonormal Hermitian basis and solved
//! densely. Problem sizes never exceed side 32 (+16 slack), so everything is
//! dense and single-threaded.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{identity, partial_trace_raw, tensor_product, CMat};

pub const GAP_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.98;

fn herm(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Re Tr[A B] for Hermitian A, B.
fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * y.conj()).re)
        .sum()
}

fn herm_eig(m: &CMat) -> (DVector<f64>, CMat) {
    let se = herm(m).symmetric_eigen();
    (se.eigenvalues, se.eigenvectors)
}

/// `m^pow` through the eigendecomposition, eigenvalues clamped away from zero.
fn herm_pow(m: &CMat, pow: f64) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let floor = vals.iter().cloned().fold(0.0f64, f64::max).abs() * 1e-15 + 1e-300;
    let diag: Vec<Complex64> = vals
        .iter()
        .map(|&v| Complex64::new(v.max(floor).powf(pow), 0.0))
        .collect();
    let d = CMat::from_diagonal(&DVector::from_vec(diag));
    &vecs * d * vecs.adjoint()
}

/// Nesterov-Todd scaling point: W with W Z W = X.
fn nt_scaling(x: &CMat, z: &CMat) -> CMat {
    let xs = herm_pow(x, 0.5);
    let mid = herm(&(&xs * z * &xs));
    let mid_inv_sqrt = herm_pow(&mid, -0.5);
    herm(&(&xs * mid_inv_sqrt * &xs))
}

/// Largest alpha <= 1 with X + alpha D remaining PSD (fraction-to-boundary).
fn max_step(x: &CMat, d: &CMat) -> f64 {
    let xinv_sqrt = herm_pow(x, -0.5);
    let scaled = herm(&(&xinv_sqrt * d * &xinv_sqrt));
    let (vals, _) = herm_eig(&scaled);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= -1e-13 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / min)).min(1.0)
    }
}

/// Orthonormal (Frobenius) basis of Hermitian d x d matrices, used to express
/// the Hermitian-valued constraint block as real coordinates.
struct HermBasis {
    d: usize,
}

impl HermBasis {
    fn new(d: usize) -> Self {
        Self { d }
    }

    fn len(&self) -> usize {
        self.d * self.d
    }

    fn svec(&self, m: &CMat) -> DVector<f64> {
        let d = self.d;
        let sq2 = std::f64::consts::SQRT_2;
        let mut v = DVector::zeros(self.len());
        let mut idx = 0;
        for i in 0..d {
            v[idx] = m[(i, i)].re;
            idx += 1;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                v[idx] = sq2 * m[(i, j)].re;
                v[idx + 1] = sq2 * m[(i, j)].im;
                idx += 2;
            }
        }
        v
    }

    fn unsvec(&self, v: &DVector<f64>) -> CMat {
        let d = self.d;
        let inv_sq2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMat::zeros(d, d);
        let mut idx = 0;
        for i in 0..d {
            m[(i, i)] = Complex64::new(v[idx], 0.0);
            idx += 1;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let re = v[idx] * inv_sq2;
                let im = v[idx + 1] * inv_sq2;
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
                idx += 2;
            }
        }
        m
    }

    fn basis_mat(&self, alpha: usize) -> CMat {
        let mut v = DVector::zeros(self.len());
        v[alpha] = 1.0;
        self.unsvec(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub j: CMat,
    pub slack: CMat,
    pub objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: IpmStatus,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Maximizes Tr[J Qt] subject to Tr[J Rt] = p, Tr_B[J] + S = I, J, S >= 0.
pub struct PurifierIpm {
    qt: CMat,
    rt: CMat,
    p: f64,
    da: usize,
    n: usize,
}

struct Point {
    j: CMat,
    s: CMat,
    y0: f64,
    ym: CMat,
    zj: CMat,
    zs: CMat,
}

impl PurifierIpm {
    pub fn new(qt: CMat, rt: CMat, p: f64) -> Self {
        let n = qt.nrows();
        let da = n / 2;
        Self { qt, rt, p, da, n }
    }

    fn trb(&self, j: &CMat) -> CMat {
        partial_trace_raw(j, &[self.da, 2], &[0]).expect("dims fixed by construction")
    }

    fn embed(&self, y: &CMat) -> CMat {
        tensor_product(y, &identity(2))
    }

    /// A(X) in real coordinates: [Tr[J Rt], svec(Tr_B[J] + S)].
    fn apply_a(&self, basis: &HermBasis, j: &CMat, s: &CMat) -> DVector<f64> {
        let mut v = DVector::zeros(1 + basis.len());
        v[0] = inner(j, &self.rt);
        let block = self.trb(j) + s;
        v.rows_mut(1, basis.len()).copy_from(&basis.svec(&block));
        v
    }

    /// A*(y) on the two blocks.
    fn apply_a_adjoint(&self, y0: f64, ym: &CMat) -> (CMat, CMat) {
        (self.rt.scale(y0) + self.embed(ym), ym.clone())
    }

    pub fn solve(&self) -> IpmSolution {
        let basis = HermBasis::new(self.da);
        let m_dim = 1 + basis.len();
        let nu = (self.n + self.da) as f64;

        // min form: C = (-Qt, 0)
        let c_j = -self.qt.clone();
        let c_s = CMat::zeros(self.da, self.da);
        let b = {
            let mut v = DVector::zeros(m_dim);
            v[0] = self.p;
            v.rows_mut(1, basis.len())
                .copy_from(&basis.svec(&identity(self.da)));
            v
        };
        let b_norm = b.norm();
        let c_norm = (c_j.norm().powi(2) + c_s.norm().powi(2)).sqrt();

        let mut pt = Point {
            j: identity(self.n).scale(0.5),
            s: identity(self.da).scale(0.5),
            y0: 0.0,
            ym: CMat::zeros(self.da, self.da),
            zj: identity(self.n),
            zs: identity(self.da),
        };

        let mut status = IpmStatus::MaxIterations;
        let mut iterations = MAX_ITERATIONS;
        let mut final_res = (f64::INFINITY, f64::INFINITY);

        for iter in 0..MAX_ITERATIONS {
            let r_p = &b - self.apply_a(&basis, &pt.j, &pt.s);
            let (aj, asl) = self.apply_a_adjoint(pt.y0, &pt.ym);
            let r_dj = &c_j - &pt.zj - aj;
            let r_ds = &c_s - &pt.zs - asl;

            let gap = inner(&pt.j, &pt.zj) + inner(&pt.s, &pt.zs);
            let mu = gap / nu;
            let pobj = inner(&c_j, &pt.j);
            let dobj = b.dot(&{
                let mut y = DVector::zeros(m_dim);
                y[0] = pt.y0;
                y.rows_mut(1, basis.len()).copy_from(&basis.svec(&pt.ym));
                y
            });

            let pres = r_p.norm() / (1.0 + b_norm);
            let dres = (r_dj.norm().powi(2) + r_ds.norm().powi(2)).sqrt() / (1.0 + c_norm);
            let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            final_res = (pres, dres);
            if pres < RESIDUAL_TOL && dres < RESIDUAL_TOL && rel_gap < GAP_TOL {
                status = IpmStatus::Optimal;
                iterations = iter;
                break;
            }

            let wj = nt_scaling(&pt.j, &pt.zj);
            let ws = nt_scaling(&pt.s, &pt.zs);
            let zj_inv = herm_pow(&pt.zj, -1.0);
            let zs_inv = herm_pow(&pt.zs, -1.0);

            // Schur complement M[i][j] = <A_i, W A_j W>
            let mut schur = DMatrix::<f64>::zeros(m_dim, m_dim);
            {
                let g = herm(&(&wj * &self.rt * &wj));
                let col = self.apply_a(&basis, &g, &CMat::zeros(self.da, self.da));
                schur.column_mut(0).copy_from(&col);
            }
            for alpha in 0..basis.len() {
                let h = basis.basis_mat(alpha);
                let gj = herm(&(&wj * self.embed(&h) * &wj));
                let gs = herm(&(&ws * &h * &ws));
                let col = self.apply_a(&basis, &gj, &gs);
                schur.column_mut(alpha + 1).copy_from(&col);
            }
            schur = (&schur + schur.transpose()).scale(0.5);

            let solve_dirs = |r_c_j: &CMat, r_c_s: &CMat| -> (CMat, CMat, f64, CMat, CMat, CMat) {
                // M dy = r_p - A(r_c) + A(W r_d W)
                let w_rd_j = herm(&(&wj * &r_dj * &wj));
                let w_rd_s = herm(&(&ws * &r_ds * &ws));
                let rhs = &r_p - self.apply_a(&basis, r_c_j, r_c_s)
                    + self.apply_a(&basis, &w_rd_j, &w_rd_s);
                let dy = schur
                    .clone()
                    .cholesky()
                    .map(|ch| ch.solve(&rhs))
                    .unwrap_or_else(|| {
                        schur
                            .clone()
                            .lu()
                            .solve(&rhs)
                            .expect("Schur system singular")
                    });
                let dy0 = dy[0];
                let dym = basis.unsvec(&DVector::from_iterator(
                    basis.len(),
                    dy.iter().skip(1).cloned(),
                ));
                let (adj_j, adj_s) = self.apply_a_adjoint(dy0, &dym);
                let dzj = herm(&(&r_dj - adj_j));
                let dzs = herm(&(&r_ds - adj_s));
                let dxj = herm(&(r_c_j - &wj * &dzj * &wj));
                let dxs = herm(&(r_c_s - &ws * &dzs * &ws));
                (dxj, dxs, dy0, dym, dzj, dzs)
            };

            // predictor (affine, sigma = 0)
            let aff_cj = -pt.j.clone();
            let aff_cs = -pt.s.clone();
            let (dxj_a, dxs_a, _, _, dzj_a, dzs_a) = solve_dirs(&aff_cj, &aff_cs);
            let ap = max_step(&pt.j, &dxj_a).min(max_step(&pt.s, &dxs_a));
            let ad = max_step(&pt.zj, &dzj_a).min(max_step(&pt.zs, &dzs_a));
            let mu_aff = (inner(&(&pt.j + dxj_a.scale(ap)), &(&pt.zj + dzj_a.scale(ad)))
                + inner(&(&pt.s + dxs_a.scale(ap)), &(&pt.zs + dzs_a.scale(ad))))
                / nu;
            let sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);

            // corrector
            let cor_cj = zj_inv.scale(sigma * mu) - &pt.j;
            let cor_cs = zs_inv.scale(sigma * mu) - &pt.s;
            let (dxj, dxs, dy0, dym, dzj, dzs) = solve_dirs(&cor_cj, &cor_cs);
            let ap = max_step(&pt.j, &dxj).min(max_step(&pt.s, &dxs));
            let ad = max_step(&pt.zj, &dzj).min(max_step(&pt.zs, &dzs));

            pt.j = herm(&(&pt.j + dxj.scale(ap)));
            pt.s = herm(&(&pt.s + dxs.scale(ap)));
            pt.y0 += ad * dy0;
            pt.ym = herm(&(&pt.ym + dym.scale(ad)));
            pt.zj = herm(&(&pt.zj + dzj.scale(ad)));
            pt.zs = herm(&(&pt.zs + dzs.scale(ad)));
        }

        let pobj = inner(&c_j, &pt.j);
        let dobj = self.p * pt.y0 + pt.ym.diagonal().iter().map(|z| z.re).sum::<f64>();
        IpmSolution {
            objective: -pobj, // back to the maximization reading
            dual_objective: -dobj,
            duality_gap: (pobj - dobj).abs(),
            j: pt.j,
            slack: pt.s,
            iterations,
            status,
            primal_residual: final_res.0,
            dual_residual: final_res.1,
        }
    }
}
