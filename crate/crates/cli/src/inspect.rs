use anyhow::{bail, Result};
use blockry::arnoldi::ArnoldiOptions;
use blockry::diagnostics::classify;
use blockry::kernels::canonical_signs;
use blockry::solvers::{Session, SolverOptions};
use blockry::Matrix;

use crate::{problem, InspectArgs};

const SIGN_TOL: f64 = 1e-10;

fn print_matrix(name: &str, m: &Matrix) {
    println!("{name} =");
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:>25.16e}")).collect();
        println!("  {}", row.join(" "));
    }
    let canon = canonical_signs(m, SIGN_TOL);
    println!("{name} (canonical signs) =");
    for i in 0..canon.nrows() {
        let row: Vec<String> = canon
            .row(i)
            .iter()
            .map(|&x| format!("{:>10.4}", if x.abs() <= SIGN_TOL { 0.0 } else { x })).collect();
        println!("  {}", row.join(" "));
    }
}

pub fn inspect(args: &InspectArgs) -> Result<()> {
    if args.at == 0 {
        bail!("--at must be at least 1");
    }
    let spec = problem::load(&args.problem)?;
    let options = SolverOptions {
        arnoldi: ArnoldiOptions {
            seed: args.problem.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut session = Session::new(spec.operator.clone(), &spec.b, Some(&spec.x0), options)?;
    for _ in 0..args.at {
        session.step()?;
    }
    let j = args.at;
    let f = session.factorization();
    let st = f.step(j)?;
    let rep = classify(session.state(), f, j)?;
    println!("problem: {} (n = {}, L = {})", spec.label, spec.dim(), spec.block_size());
    println!("iteration: {j}");
    println!("rank_r: {}", st.rank_r);
    println!("case: {}", rep.case.label());
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(", ");
    println!("cosines: [{}]", fmt(&rep.cs.cosines));
    println!("sines: [{}]", fmt(&rep.cs.sines));
    for (name, m) in [
        ("C~", &st.c_tilde),
        ("C", &st.c),
        ("C^", &st.c_hat),
        ("N", &st.n),
        ("N^", &st.n_hat),
    ] {
        print_matrix(&format!("{name}_{j}"), m);
    }
    Ok(())
}
