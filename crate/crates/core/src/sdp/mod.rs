//! Purification program: solve for the decoding Choi operator at a fixed
//! success probability, sweep the fidelity/success trade-off, select knee
//! operating points and evaluate mismatched purifiers.

pub mod ipm;

pub use ipm::{IpmStatus, MAX_ITERATIONS};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::QROperators;
use crate::linalg::{partial_transpose, CMat};

/// Purification instance: Haar operators plus the target success probability.
#[derive(Debug, Clone)]
pub struct PurificationProblem {
    pub qr: QROperators,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverStatus::Optimal => write!(f, "optimal"),
            SolverStatus::MaxIter => write!(f, "max-iter"),
            SolverStatus::Infeasible => write!(f, "infeasible"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PurificationSolution {
    /// Choi operator of the decoder, dims (2^K, 2).
    pub j: CMat,
    /// Post-selected fidelity Tr[J Q^T] / p.
    pub f_p: f64,
    pub p_achieved: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

/// Partial transpose of Q (or R) over the clone register.
pub fn clone_register_transpose(m: &CMat, k: usize) -> CMat {
    partial_transpose(m, &[1 << k, 2], 0).expect("dims fixed by K")
}

pub fn solve_purification(prob: &PurificationProblem) -> Result<PurificationSolution> {
    let p = prob.p;
    if p <= 0.0 {
        return Err(Error::ParamOutOfRange { name: "p", value: p });
    }
    prob.qr.validate()?;
    if p > 1.0 + 1e-12 {
        // Tr[J R^T] = Tr[Tr_B[J] avg^T] <= Tr[avg] = 1 under Tr_B[J] <= I,
        // so success probabilities above 1 cannot be met.
        return Ok(PurificationSolution {
            j: CMat::zeros(prob.qr.dim(), prob.qr.dim()),
            f_p: f64::NAN,
            p_achieved: 0.0,
            duality_gap: f64::INFINITY,
            iterations: 0,
            status: SolverStatus::Infeasible,
        });
    }
    let qt = clone_register_transpose(&prob.qr.q, prob.qr.k);
    let rt = clone_register_transpose(&prob.qr.r, prob.qr.k);
    let sol = ipm::PurifierIpm::new(qt, rt.clone(), p).solve();
    let p_achieved = sol
        .j
        .iter()
        .zip(rt.iter())
        .map(|(a, b)| (a * b.conj()).re)
        .sum::<f64>();
    Ok(PurificationSolution {
        f_p: sol.objective / p_achieved,
        p_achieved,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
        status: match sol.status {
            // residuals back the optimality claim; a converged gap with
            // drifting feasibility is still reported as unfinished
            IpmStatus::Optimal
                if sol.primal_residual < 1e-7 && sol.dual_residual < 1e-7 =>
            {
                SolverStatus::Optimal
            }
            IpmStatus::Optimal | IpmStatus::MaxIterations => SolverStatus::MaxIter,
        },
        j: sol.j,
    })
}

/// Default success-probability grid {0.02, 0.04, ..., 1.0}.
pub fn default_p_grid() -> Vec<f64> {
    (1..=50).map(|i| i as f64 * 0.02).collect()
}

#[derive(Debug, Clone)]
pub struct TradeoffPoint {
    pub p: f64,
    pub solution: PurificationSolution,
}

/// Re-solves the program per grid point; points are independent and run in
/// parallel, assembled in grid order.
pub fn tradeoff_curve(qr: &QROperators, p_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    p_grid
        .par_iter()
        .map(|&p| {
            let solution = solve_purification(&PurificationProblem { qr: qr.clone(), p })?;
            Ok(TradeoffPoint { p, solution })
        })
        .collect()
}

/// Knee rule: the point of maximum perpendicular distance from the chord
/// joining the curve endpoints, ties broken toward larger p. A flat curve
/// yields the largest grid point.
pub fn knee_point(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::InvalidState(format!(
            "knee detection needs at least 3 points, got {}",
            curve.len()
        )));
    }
    let (p0, f0) = curve[0];
    let (p1, f1) = *curve.last().unwrap();
    let span_f: f64 = curve
        .iter()
        .map(|&(_, f)| f)
        .fold(f64::NEG_INFINITY, f64::max)
        - curve.iter().map(|&(_, f)| f).fold(f64::INFINITY, f64::min);
    if span_f < 1e-9 {
        return Ok(p1.max(p0));
    }
    let dx = p1 - p0;
    let dy = f1 - f0;
    let norm = (dx * dx + dy * dy).sqrt();
    let mut best = (f64::NEG_INFINITY, p0);
    for &(p, f) in curve {
        let dist = (dy * (p - p0) - dx * (f - f0)).abs() / norm;
        if dist > best.0 + 1e-12 || (dist > best.0 - 1e-12 && p > best.1) {
            best = (dist.max(best.0), p);
        }
    }
    Ok(best.1)
}

/// Evaluates a fixed purifier against possibly different true channel
/// operators: `p_real = Tr[J R^T]`, `F_real = Tr[J Q^T] / p_real`.
pub fn evaluate_purifier(j: &CMat, qr_true: &QROperators) -> Result<(f64, f64)> {
    let qt = clone_register_transpose(&qr_true.q, qr_true.k);
    let rt = clone_register_transpose(&qr_true.r, qr_true.k);
    let dot = |a: &CMat, b: &CMat| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
    };
    let p_real = dot(j, &rt);
    if p_real <= 1e-12 {
        return Err(Error::Solver(
            "purifier success probability vanished; fidelity undefined".into(),
        ));
    }
    let f_real = dot(j, &qt) / p_real;
    Ok((f_real, p_real))
}

/// Average over purification success and failure: `p F_P + (1 - p)/2`.
pub fn effective_fidelity(f_p: f64, p: f64) -> Result<f64> {
    for (name, v) in [("F_P", f_p), ("p", p)] {
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::ParamOutOfRange { name, value: v });
        }
    }
    Ok(p * f_p + (1.0 - p) * 0.5)
}
