use std::path::Path;

use anyhow::{bail, Context, Result};
use blockry::problems::{
    builtin_experiment, read_matrix_market_file, seeded_normal_block, Experiment, ExperimentConfig, ProblemSpec,
};

use crate::ProblemArgs;

pub fn load(args: &ProblemArgs) -> Result<ProblemSpec> {
    let spec = match args.problem.parse::<Experiment>() {
        Ok(ex) => {
            if args.rhs.is_some() && ex != Experiment::Sherman4Mixed {
                bail!("--rhs is not accepted by the {} experiment", ex.name());
            }
            let config = ExperimentConfig {
                data_dir: args.data_dir.clone(),
                matrix_file: None,
                rhs_file: args.rhs.clone(),
                seed: args.seed,
            };
            builtin_experiment(ex, &config)?
        }
        Err(_) => from_file(Path::new(&args.problem), args)?,
    };
    if let Some(l) = args.block_size {
        if l != spec.block_size() {
            bail!("--block-size {l} does not match the {} right-hand sides of {}", spec.block_size(), spec.label);
        }
    }
    Ok(spec)
}

fn from_file(path: &Path, args: &ProblemArgs) -> Result<ProblemSpec> {
    if path.extension().is_none_or(|e| e != "mtx") && !path.exists() {
        bail!(
            "unknown problem {:?}: expected one of {} or a .mtx file",
            args.problem,
            Experiment::ALL.map(|e| e.name()).join(", ")
        );
    }
    let op = read_matrix_market_file(path)?.into_operator()?;
    let n = op.dim();
    let b = match &args.rhs {
        Some(rhs) => {
            let b = read_matrix_market_file(rhs)?.to_dense();
            if b.nrows() != n {
                bail!("right-hand side {} has {} rows, matrix has {n}", rhs.display(), b.nrows());
            }
            b
        }
        None => seeded_normal_block(n, args.block_size.unwrap_or(1), args.seed),
    };
    let label = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut spec = ProblemSpec::new(op.into(), b, label).with_context(|| format!("loading {}", path.display()))?;
    if args.rhs.is_none() {
        spec.notes
            .push(format!("right-hand side: seeded standard-normal block (seed {:#x})", args.seed));
    }
    Ok(spec)
}
