//! One function per subcommand: computes the experiment, writes plot-ready
//! tables plus a provenance summary into the output directory. All files are
//! byte-stable for a fixed config and seed (no timestamps, fixed float
//! rendering, ordered assembly).

use std::fmt::Write as _;
use std::path::Path;

use qmimo::cloner::{params_from_a, SYMMETRIC_A};
use qmimo::haar::{analytic_qr_2x2, reference_first_layout};
use qmimo::io::fmt12;
use qmimo::sdp::{
    ipm, knee_point, solve_purification, tradeoff_curve, PurificationProblem, SolverStatus,
};
use qmimo::strategies::{best_strategy_region, fidelity_gain_scan, scan_4x4, StrategyContext};
use qmimo::validate::run_validation;
use qmimo::{Error, Result};

use crate::config::{
    GainsConfig, QrDumpConfig, Scan2x2Config, Scan4x4Config, TradeoffConfig,
};

fn write_file(out: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), contents)?;
    Ok(())
}

struct StatusTally {
    optimal: usize,
    max_iter: usize,
    infeasible: usize,
}

impl StatusTally {
    fn new() -> Self {
        Self { optimal: 0, max_iter: 0, infeasible: 0 }
    }

    fn add(&mut self, s: SolverStatus) {
        match s {
            SolverStatus::Optimal => self.optimal += 1,
            SolverStatus::MaxIter => self.max_iter += 1,
            SolverStatus::Infeasible => self.infeasible += 1,
        }
    }

    fn line(&self) -> String {
        format!(
            "solver cells: optimal={} max-iter={} infeasible={}",
            self.optimal, self.max_iter, self.infeasible
        )
    }
}

fn solver_provenance() -> String {
    format!(
        "solver: dense primal-dual interior point, gap tol {:.0e}, residual tol {:.0e}, max {} iterations",
        ipm::GAP_TOL,
        ipm::RESIDUAL_TOL,
        ipm::MAX_ITERATIONS
    )
}

fn grid_line(name: &str, grid: &[f64]) -> String {
    let vals: Vec<String> = grid.iter().map(|&v| fmt12(v)).collect();
    format!("{name}: [{}]", vals.join(", "))
}

pub fn scan2x2(cfg: &Scan2x2Config, out: &Path) -> Result<String> {
    let ctx = StrategyContext::with_settings(cfg.p_grid.clone(), cfg.a_step, cfg.golden_tol);
    let mut tally = StatusTally::new();
    let mut written = Vec::new();
    for &regime in &cfg.regimes {
        let cells = best_strategy_region(&ctx, cfg.eta, cfg.grid, regime)?;
        let mut csv = String::from(
            "lambda1,lambda2,F_strategy1,F_strategy2,F_strategy3,argmax,\
             status_strategy1,status_strategy2,status_strategy3\n",
        );
        for c in &cells {
            for s in c.statuses {
                tally.add(s);
            }
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                fmt12(c.lambda1),
                fmt12(c.lambda2),
                fmt12(c.f[0]),
                fmt12(c.f[1]),
                fmt12(c.f[2]),
                c.argmax,
                c.statuses[0],
                c.statuses[1],
                c.statuses[2]
            )
            .expect("string write");
        }
        let name = format!("scan2x2_case{regime}.csv");
        write_file(out, &name, &csv)?;
        written.push(name);
    }
    let mut summary = String::from("subcommand: scan2x2\n");
    writeln!(summary, "eta: {}", fmt12(cfg.eta)).unwrap();
    writeln!(summary, "grid: {} x {} (lambda1 < lambda2 kept)", cfg.grid, cfg.grid).unwrap();
    writeln!(
        summary,
        "regimes: {}",
        cfg.regimes.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
    )
    .unwrap();
    writeln!(summary, "{}", grid_line("p_grid", &cfg.p_grid)).unwrap();
    writeln!(summary, "a_step: {} golden_tol: {}", fmt12(cfg.a_step), fmt12(cfg.golden_tol))
        .unwrap();
    writeln!(summary, "{}", solver_provenance()).unwrap();
    writeln!(summary, "{}", tally.line()).unwrap();
    writeln!(summary, "files: {}", written.join(", ")).unwrap();
    write_file(out, "summary.txt", &summary)?;
    Ok(summary)
}

pub fn scan4x4(cfg: &Scan4x4Config, out: &Path) -> Result<String> {
    let m4_grid = cfg.include_m4.then(|| cfg.p_grid_m4.as_slice());
    let cells = scan_4x4(&cfg.lambda_grid(), &cfg.eta_grid(), &cfg.p_grid_m2, m4_grid)?;
    let mut tally = StatusTally::new();
    let mut csv = String::from("lambda,eta,F_direct,F_p_m2,p_m2,F_eff_m2,status_m2");
    if cfg.include_m4 {
        csv.push_str(",F_p_m4,p_m4,F_eff_m4,status_m4");
    }
    csv.push_str(",delta_F_m2_vs_direct\n");
    for c in &cells {
        tally.add(c.m2.status);
        write!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt12(c.lambda),
            fmt12(c.eta),
            fmt12(c.f_direct),
            fmt12(c.m2.f_p),
            fmt12(c.m2.p),
            fmt12(c.m2.f_eff),
            c.m2.status
        )
        .expect("string write");
        if let Some(m4) = c.m4 {
            tally.add(m4.status);
            write!(csv, ",{},{},{},{}", fmt12(m4.f_p), fmt12(m4.p), fmt12(m4.f_eff), m4.status)
                .expect("string write");
        }
        writeln!(csv, ",{}", fmt12(c.m2.f_eff - c.f_direct)).expect("string write");
    }
    write_file(out, "scan4x4.csv", &csv)?;
    let mut summary = String::from("subcommand: scan4x4\n");
    writeln!(
        summary,
        "grid: {} lambda cells x {} eta cells, include_m4: {}",
        cfg.lambda_cells, cfg.eta_cells, cfg.include_m4
    )
    .unwrap();
    writeln!(summary, "{}", grid_line("p_grid_m2", &cfg.p_grid_m2)).unwrap();
    if cfg.include_m4 {
        writeln!(summary, "{}", grid_line("p_grid_m4", &cfg.p_grid_m4)).unwrap();
    }
    writeln!(summary, "{}", solver_provenance()).unwrap();
    writeln!(summary, "{}", tally.line()).unwrap();
    writeln!(summary, "files: scan4x4.csv").unwrap();
    write_file(out, "summary.txt", &summary)?;
    Ok(summary)
}

pub fn tradeoff(cfg: &TradeoffConfig, out: &Path) -> Result<String> {
    let mut tally = StatusTally::new();
    let mut csv = String::from("lambda,a_mode,a,p,F_P,knee,status\n");
    let a_grid: Vec<f64> = {
        let n = (1.0 / cfg.a_step).round() as usize;
        (1..=n).map(|i| (i as f64 * cfg.a_step).min(1.0)).collect()
    };
    for &lambda in &cfg.lambdas {
        // symmetric cloner curve
        let qr = analytic_qr_2x2(&params_from_a(SYMMETRIC_A)?, cfg.eta, lambda, lambda);
        let curve = tradeoff_curve(&qr, &cfg.p_grid)?;
        let pairs: Vec<(f64, f64)> = curve.iter().map(|pt| (pt.p, pt.solution.f_p)).collect();
        let knee = knee_point(&pairs)?;
        for pt in &curve {
            tally.add(pt.solution.status);
            writeln!(
                csv,
                "{},symmetric,{},{},{},{},{}",
                fmt12(lambda),
                fmt12(SYMMETRIC_A),
                fmt12(pt.p),
                fmt12(pt.solution.f_p),
                u8::from(pt.p == knee),
                pt.solution.status
            )
            .expect("string write");
        }
        // per-p optimized asymmetry: envelope over the a grid
        let mut env = Vec::new();
        for &p in &cfg.p_grid {
            let mut best: Option<(f64, qmimo::PurificationSolution)> = None;
            for &a in &a_grid {
                let qr_a = analytic_qr_2x2(&params_from_a(a)?, cfg.eta, lambda, lambda);
                let sol = solve_purification(&PurificationProblem { qr: qr_a, p })?;
                if best.as_ref().is_none_or(|(_, b)| sol.f_p > b.f_p) {
                    best = Some((a, sol));
                }
            }
            env.push((p, best.expect("a grid non-empty")));
        }
        let pairs: Vec<(f64, f64)> = env.iter().map(|(p, (_, s))| (*p, s.f_p)).collect();
        let knee = knee_point(&pairs)?;
        for (p, (a, sol)) in &env {
            tally.add(sol.status);
            writeln!(
                csv,
                "{},optimized,{},{},{},{},{}",
                fmt12(lambda),
                fmt12(*a),
                fmt12(*p),
                fmt12(sol.f_p),
                u8::from(*p == knee),
                sol.status
            )
            .expect("string write");
        }
    }
    write_file(out, "tradeoff.csv", &csv)?;
    let mut summary = String::from("subcommand: tradeoff\n");
    writeln!(summary, "eta: {}", fmt12(cfg.eta)).unwrap();
    writeln!(summary, "{}", grid_line("lambdas", &cfg.lambdas)).unwrap();
    writeln!(summary, "{}", grid_line("p_grid", &cfg.p_grid)).unwrap();
    writeln!(summary, "a_step: {}", fmt12(cfg.a_step)).unwrap();
    writeln!(summary, "{}", solver_provenance()).unwrap();
    writeln!(summary, "{}", tally.line()).unwrap();
    writeln!(summary, "files: tradeoff.csv").unwrap();
    write_file(out, "summary.txt", &summary)?;
    Ok(summary)
}

pub fn gains(cfg: &GainsConfig, out: &Path) -> Result<String> {
    let ctx = StrategyContext::with_settings(cfg.p_grid.clone(), cfg.a_step, cfg.golden_tol);
    let points = fidelity_gain_scan(&ctx, &cfg.eta_grid(), cfg.grid, &cfg.regimes)?;
    let mut tally = StatusTally::new();
    let mut csv = String::from(
        "eta,regime,mean_gain_cloning,mean_gain_purification,\
         mean_rel_gain_purification,max_rel_gain_purification,\
         mean_rel_gain_postselected,max_rel_gain_postselected,worst_status\n",
    );
    for g in &points {
        tally.add(g.worst_status);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            fmt12(g.eta),
            g.regime,
            fmt12(g.mean_gain_cloning),
            fmt12(g.mean_gain_purification),
            fmt12(g.mean_rel_gain_purification),
            fmt12(g.max_rel_gain_purification),
            fmt12(g.mean_rel_gain_postselected),
            fmt12(g.max_rel_gain_postselected),
            g.worst_status
        )
        .expect("string write");
    }
    write_file(out, "gains.csv", &csv)?;
    let mut summary = String::from("subcommand: gains\n");
    writeln!(
        summary,
        "eta_points: {} ensemble grid: {} x {} (lambda1 < lambda2)",
        cfg.eta_points, cfg.grid, cfg.grid
    )
    .unwrap();
    writeln!(
        summary,
        "regimes: {}",
        cfg.regimes.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
    )
    .unwrap();
    writeln!(summary, "{}", grid_line("p_grid", &cfg.p_grid)).unwrap();
    writeln!(summary, "{}", solver_provenance()).unwrap();
    writeln!(summary, "{}", tally.line()).unwrap();
    writeln!(summary, "files: gains.csv").unwrap();
    write_file(out, "summary.txt", &summary)?;
    Ok(summary)
}

pub fn qr_dump(cfg: &QrDumpConfig, out: &Path) -> Result<String> {
    let qr = analytic_qr_2x2(&params_from_a(cfg.a)?, cfg.eta, cfg.lambda1, cfg.lambda2);
    let sol = solve_purification(&PurificationProblem { qr: qr.clone(), p: cfg.p })?;
    let q_ref_first = reference_first_layout(&qr.q, qr.k);
    let mut buf: Vec<u8> = Vec::new();
    {
        use std::io::Write as _;
        writeln!(
            buf,
            "# Haar-averaged operators and decoder for a={} eta={} lambda1={} lambda2={} p={}",
            fmt12(cfg.a),
            fmt12(cfg.eta),
            fmt12(cfg.lambda1),
            fmt12(cfg.lambda2),
            fmt12(cfg.p)
        )?;
        writeln!(
            buf,
            "# layouts: Q has the reference qubit as the leading tensor factor; \
             Q_CLONES_FIRST, R and J are clones-first"
        )?;
        writeln!(buf, "# decoder status: {}, duality gap {:.3e}", sol.status, sol.duality_gap)?;
    }
    qmimo::io::write_matrices(
        &mut buf,
        &[
            ("Q", &q_ref_first),
            ("Q_CLONES_FIRST", &qr.q),
            ("R", &qr.r),
            ("J", &sol.j),
        ],
    )?;
    let text = String::from_utf8(buf).expect("dump is ascii");
    write_file(out, "qr_dump.txt", &text)?;
    let mut summary = String::from("subcommand: qr-dump\n");
    writeln!(
        summary,
        "a: {} eta: {} lambda1: {} lambda2: {} p: {}",
        fmt12(cfg.a),
        fmt12(cfg.eta),
        fmt12(cfg.lambda1),
        fmt12(cfg.lambda2),
        fmt12(cfg.p)
    )
    .unwrap();
    writeln!(summary, "{}", solver_provenance()).unwrap();
    writeln!(
        summary,
        "decoder: status {} gap {:.3e} iterations {}",
        sol.status, sol.duality_gap, sol.iterations
    )
    .unwrap();
    writeln!(summary, "files: qr_dump.txt").unwrap();
    write_file(out, "summary.txt", &summary)?;
    Ok(summary)
}

pub fn validate(seed: Option<u64>, out: &Path) -> Result<(String, bool)> {
    let seed = seed.ok_or_else(|| {
        Error::InvalidState("validate runs Monte-Carlo oracles; --seed is required".into())
    })?;
    let report = run_validation(seed)?;
    let text = format!("{report}\n");
    write_file(out, "validation.txt", &text)?;
    Ok((text, report.all_passed()))
}
