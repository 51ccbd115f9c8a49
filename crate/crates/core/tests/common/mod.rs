#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use blockry::arnoldi::{BlockOperator, StepReport};
use blockry::problems::{builtin_experiment, Experiment, ExperimentConfig, ProblemSpec};
use blockry::solvers::{IteratePair, Session};
use blockry::Matrix;
use rand::{rngs::StdRng, Rng, SeedableRng};

pub const SWEEP_SIZE: u64 = 20;

pub struct Run {
    pub session: Session,
    pub steps: Vec<StepReport>,
    /// First iteration with every relative residual at or below the stop tolerance.
    pub converged_at: Option<usize>,
}

/// Steps until convergence, exhaustion, an Arnoldi error or `max_iter`.
pub fn run(op: Arc<BlockOperator>, b: &Matrix, max_iter: usize, stop_rel: f64) -> Run {
    let mut session = Session::new(op, b, None, Default::default()).expect("session");
    let mut steps = Vec::new();
    let mut converged_at = None;
    for j in 1..=max_iter {
        let Ok(rep) = session.step() else { break };
        let exhausted = rep.exhausted;
        steps.push(rep);
        let pair = session.iterate(j).expect("iterate");
        let rel = IteratePair::relative(&pair.gmres_residual_norms, session.state().f0());
        if rel.iter().all(|r| *r <= stop_rel) {
            converged_at = Some(j);
            break;
        }
        if exhausted {
            break;
        }
    }
    Run {
        session,
        steps,
        converged_at,
    }
}

/// Member `k` of the seeded random sweep: dense nonsymmetric `A`,
/// `n` in 15..=40, `L` cycling through 1, 2, 3.
pub fn sweep_problem(k: u64) -> (String, Arc<BlockOperator>, Matrix) {
    let mut rng = StdRng::seed_from_u64(0x5EED + k);
    let n = rng.random_range(15..=40);
    let l = [1, 2, 3][(k % 3) as usize];
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = Matrix::from_fn(n, l, |_, _| rng.random_range(-1.0..1.0));
    (
        format!("sweep#{k} n={n} L={l}"),
        Arc::new(BlockOperator::dense(a).expect("square")),
        b,
    )
}

pub fn sweep_run(k: u64) -> (String, Run) {
    let (label, op, b) = sweep_problem(k);
    let n = b.nrows();
    (label, run(op, &b, n, 1e-12))
}

pub fn builtin(ex: Experiment) -> ProblemSpec {
    builtin_experiment(ex, &ExperimentConfig::default()).expect("builtin problem")
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn random_matrix(m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = StdRng::seed_from_u64(seed);
    Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}
