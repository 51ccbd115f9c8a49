use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use blockry::arnoldi::ArnoldiOptions;
use blockry::diagnostics::{classify, verify_breakdown_gap, verify_trig_relation};
use blockry::solvers::{IteratePair, Session, SolverOptions};
use blockry::Error;

use crate::{problem, RunArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    BudgetExhausted,
    /// The Krylov space stopped growing before convergence.
    RangeExhausted,
}

impl Status {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Status::Converged => ExitCode::SUCCESS,
            Status::BudgetExhausted | Status::RangeExhausted => ExitCode::from(2),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Value of an identity check, or `None` when its preconditions fail at this iteration.
fn applicable(r: blockry::Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::SingularHessenberg { .. } | Error::SingularY2 { .. } | Error::Contract(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &RunArgs) -> Result<Status> {
    anyhow::ensure!(args.tol > 0.0, "--tol must be positive");
    let spec = problem::load(&args.problem)?;
    let (n, l) = (spec.dim(), spec.block_size());
    let max_iter = args.max_iter.unwrap_or(n.div_ceil(l));
    anyhow::ensure!(max_iter >= 1, "--max-iter must be at least 1");

    let options = SolverOptions {
        arnoldi: ArnoldiOptions {
            seed: args.problem.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut session = Session::new(spec.operator.clone(), &spec.b, Some(&spec.x0), options)?;

    let mut header = vec!["j".to_string(), "breakdown_p".to_string()];
    header.extend((1..=l).map(|k| format!("res_gmres_{k}")));
    if args.emit_fom {
        header.extend((1..=l).map(|k| format!("res_fom_{k}")));
        header.push("fom_generalized".into());
    }
    if args.diagnostics {
        header.extend(["rank_r", "rank_c", "case", "intersection_dim"].map(String::from));
        header.extend((1..=l).map(|k| format!("sin2_{k}")));
    }
    if args.verify {
        header.extend(["trig_residual", "gap_residual"].map(String::from));
    }
    let mut csv = header.join(",");
    csv.push('\n');

    let mut converged_at: Vec<Option<usize>> = vec![None; l];
    let mut max_verify = 0.0f64;
    let mut status = Status::BudgetExhausted;
    for j in 1..=max_iter {
        let step = match session.step() {
            Ok(s) => s,
            Err(Error::RangeExhausted { .. }) => {
                status = Status::RangeExhausted;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let pair = session.iterate(j)?;
        let f0 = session.state().f0();
        let rel = IteratePair::relative(&pair.gmres_residual_norms, f0);
        let mut row = vec![j.to_string(), step.p.to_string()];
        row.extend(rel.iter().map(|&r| num(r)));
        if args.emit_fom {
            row.extend(IteratePair::relative(&pair.fom_residual_norms, f0).into_iter().map(num));
            row.push(u8::from(pair.fom_is_generalized).to_string());
        }
        if args.diagnostics {
            let rep = classify(session.state(), session.factorization(), j)?;
            row.extend([
                rep.rank_r.to_string(),
                rep.rank_c.to_string(),
                rep.case.label().to_string(),
                rep.intersection_dim.to_string(),
            ]);
            row.extend(rep.cs.sines.iter().map(|s| num(s * s)));
        }
        if args.verify {
            let x_prev = session.gmres_x(j - 1)?;
            let trig = applicable(verify_trig_relation(&pair, &x_prev, session.factorization()))?;
            let gap = applicable(verify_breakdown_gap(&pair, session.state(), session.factorization()))?;
            for v in [trig, gap] {
                match v {
                    Some(v) => {
                        max_verify = max_verify.max(v);
                        row.push(num(v));
                    }
                    None => row.push(String::new()),
                }
            }
        }
        csv.push_str(&row.join(","));
        csv.push('\n');

        for (k, &r) in rel.iter().enumerate() {
            if converged_at[k].is_none() && r <= args.tol {
                converged_at[k] = Some(j);
            }
        }
        if rel.iter().all(|&r| r <= args.tol) {
            status = Status::Converged;
            break;
        }
        if step.exhausted {
            status = Status::RangeExhausted;
            break;
        }
    }

    let iterations = session.iteration();
    let mut summary = String::new();
    writeln!(summary, "problem: {}", spec.label)?;
    writeln!(summary, "dimension: {n}")?;
    writeln!(summary, "block size: {l}")?;
    writeln!(summary, "seed: {:#x}", args.problem.seed)?;
    writeln!(summary, "tolerance: {:e}", args.tol)?;
    writeln!(summary, "iterations: {iterations}")?;
    let status_line = match status {
        Status::Converged => format!("converged at iteration {iterations}"),
        Status::BudgetExhausted => format!("not converged within {max_iter} iterations"),
        Status::RangeExhausted => format!("Krylov space exhausted at iteration {iterations} before convergence"),
    };
    writeln!(summary, "status: {status_line}")?;
    for (k, c) in converged_at.iter().enumerate() {
        match c {
            Some(j) => writeln!(summary, "column {}: converged at iteration {j}", k + 1)?,
            None => writeln!(summary, "column {}: not converged", k + 1)?,
        }
    }
    let log = session.state().breakdown_log();
    if log.is_empty() {
        writeln!(summary, "breakdowns: none")?;
    }
    for b in log {
        writeln!(
            summary,
            "breakdown: iteration {}, p = {}, replaced directions {:?}",
            b.iteration, b.p, b.replaced
        )?;
    }
    if args.verify {
        let relation = session.state().relation_residual()?;
        let orth = session.state().orthonormality_residual();
        writeln!(summary, "arnoldi relation residual: {relation:.3e}")?;
        writeln!(summary, "basis orthonormality residual: {orth:.3e}")?;
        writeln!(summary, "max verification residual: {max_verify:.3e}")?;
    }
    for note in &spec.notes {
        writeln!(summary, "note: {note}")?;
    }

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: &str, body: &str| -> Result<()> {
        let path = args.out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    };
    write("iterations.csv", &csv)?;
    write("summary.txt", &summary)?;
    if args.plot {
        write("plot.gp", &gnuplot_script(l, args))?;
    }
    print!("{summary}");
    Ok(status)
}

fn gnuplot_script(l: usize, args: &RunArgs) -> String {
    let first_res = 3;
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n\
         set xlabel 'iteration'\n",
    );
    s.push_str("set output 'residuals.png'\nset logscale y\nset ylabel 'relative residual'\n");
    s.push_str(&format!(
        "plot for [k={first_res}:{}] 'iterations.csv' using 1:k with linespoints\n",
        first_res + l - 1
    ));
    if args.diagnostics {
        let mut col = first_res + l;
        if args.emit_fom {
            col += l + 1;
        }
        let first_sine = col + 4;
        s.push_str("unset logscale y\nset output 'sines.png'\nset ylabel 'squared sine'\nset yrange [0:1.05]\n");
        s.push_str(&format!(
            "plot for [k={first_sine}:{}] 'iterations.csv' using 1:k with linespoints\n",
            first_sine + l - 1
        ));
    }
    s
}
