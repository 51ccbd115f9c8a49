//! Test problems: shift matrices, Matrix Market input, built-in experiments.

mod matrix_market;

pub use matrix_market::{
    parse_matrix_market, read_matrix_market_file, write_matrix_market, write_matrix_market_dense, MatrixMarket,
};

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arnoldi::{BlockOperator, CsrMatrix, DEFAULT_SEED};
use crate::error::{contract, Error, Result};
use crate::kernels::Matrix;

/// Environment variable naming the default matrix directory.
pub const DATA_ENV: &str = "BLOCKRY_DATA";

const SHERMAN4_FILE: &str = "sherman4.mtx";
const SHERMAN4_RHS_FILE: &str = "sherman4_rhs1.mtx";
const SHERMAN4_HINT: &str = "download sherman4.tar.gz from https://sparse.tamu.edu/HB/sherman4, \
     unpack sherman4.mtx (and optionally sherman4_rhs1.mtx) into $BLOCKRY_DATA or pass --data-dir";

/// A linear system with a block of right-hand sides.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub operator: Arc<BlockOperator>,
    pub b: Matrix,
    pub x0: Matrix,
    pub label: String,
    /// Known events `(iteration, description)` used by fixtures.
    pub expected_events: Vec<(usize, String)>,
    /// Notes about substituted data.
    pub notes: Vec<String>,
}

impl ProblemSpec {
    pub fn new(operator: Arc<BlockOperator>, b: Matrix, label: impl Into<String>) -> Result<Self> {
        if operator.dim() != b.nrows() {
            return Err(contract(format!(
                "operator dimension {} does not match {} right-hand-side rows",
                operator.dim(),
                b.nrows()
            )));
        }
        let x0 = Matrix::zeros(b.nrows(), b.ncols());
        Ok(Self {
            operator,
            b,
            x0,
            label: label.into(),
            expected_events: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn block_size(&self) -> usize {
        self.b.ncols()
    }
}

/// Cyclic shift: `A e_i = e_{i+1}`, `A e_n = e_1`.
pub fn shift_matrix(n: usize) -> Result<BlockOperator> {
    if n < 2 {
        return Err(contract(format!("shift matrix needs n >= 2, got {n}")));
    }
    let trip: Vec<_> = (0..n).map(|i| ((i + 1) % n, i, 1.0)).collect();
    BlockOperator::sparse(CsrMatrix::from_triplets(n, n, &trip)?)
}

pub fn block_diagonal(a: BlockOperator, b: BlockOperator) -> BlockOperator {
    BlockOperator::BlockDiagonal(Box::new(a), Box::new(b))
}

/// Columns `e_{i}` (1-based indices) of the `n x n` identity.
pub fn unit_columns(n: usize, indices: &[usize]) -> Matrix {
    let mut b = Matrix::zeros(n, indices.len());
    for (c, &i) in indices.iter().enumerate() {
        b[(i - 1, c)] = 1.0;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    TotalStag,
    PartialStag,
    Sherman4Mixed,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Self::TotalStag, Self::PartialStag, Self::Sherman4Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Self::TotalStag => "total-stag",
            Self::PartialStag => "partial-stag",
            Self::Sherman4Mixed => "sherman4-mixed",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| contract(format!("unknown experiment {s:?}")))
    }
}

/// Where to find external data for the built-in experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Directory holding `sherman4.mtx`; falls back to `$BLOCKRY_DATA`.
    pub data_dir: Option<PathBuf>,
    /// Explicit sherman4 matrix file, overriding `data_dir`.
    pub matrix_file: Option<PathBuf>,
    /// Explicit file for the packaged right-hand side.
    pub rhs_file: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            matrix_file: None,
            rhs_file: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl ExperimentConfig {
    fn data_dir(&self) -> Option<PathBuf> {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
    }

    fn sherman4_path(&self) -> PathBuf {
        match (&self.matrix_file, self.data_dir()) {
            (Some(p), _) => p.clone(),
            (None, Some(d)) => d.join(SHERMAN4_FILE),
            (None, None) => PathBuf::from(SHERMAN4_FILE),
        }
    }

    fn rhs_path(&self, matrix: &Path) -> PathBuf {
        match &self.rhs_file {
            Some(p) => p.clone(),
            None => {
                let stem = matrix.file_stem().and_then(|s| s.to_str()).unwrap_or("sherman4");
                let name = if stem == "sherman4" {
                    SHERMAN4_RHS_FILE.to_string()
                } else {
                    format!("{stem}_rhs1.mtx")
                };
                matrix.with_file_name(name)
            }
        }
    }
}

fn seeded_normal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(n, 1, |_, _| StandardNormal.sample(rng))
}

/// `n x l` block of standard-normal entries drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_normal_block(n: usize, l: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, l, |_, _| StandardNormal.sample(&mut rng))
}

pub fn builtin_experiment(which: Experiment, config: &ExperimentConfig) -> Result<ProblemSpec> {
    match which {
        Experiment::TotalStag => {
            let op = Arc::new(shift_matrix(200)?);
            let mut p = ProblemSpec::new(op, unit_columns(200, &[1, 50, 100, 150]), which.name())?;
            p.expected_events.push((49, "plateau ends".into()));
            Ok(p)
        }
        Experiment::PartialStag => {
            let op = Arc::new(shift_matrix(30)?);
            let mut p = ProblemSpec::new(op, unit_columns(30, &[1, 25]), which.name())?;
            p.expected_events.push((6, "breakdown p=1, column 1 converges".into()));
            Ok(p)
        }
        Experiment::Sherman4Mixed => sherman4_mixed(config),
    }
}

fn sherman4_mixed(config: &ExperimentConfig) -> Result<ProblemSpec> {
    let path = config.sherman4_path();
    let sherman = read_matrix_market_file(&path).map_err(|e| match e {
        Error::MissingFile { path, .. } => Error::MissingFile {
            path,
            hint: SHERMAN4_HINT.into(),
        },
        other => other,
    })?;
    let (m, n) = sherman.shape();
    if m != n {
        return Err(contract(format!("{} is {m}x{n}, expected square", path.display())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut notes = Vec::new();
    let rhs_path = config.rhs_path(&path);
    let packaged = match read_matrix_market_file(&rhs_path) {
        Ok(mm) => {
            let d = mm.to_dense();
            if d.nrows() != n || d.ncols() < 1 {
                return Err(contract(format!(
                    "right-hand side {} is {}x{}, expected {n}x1",
                    rhs_path.display(),
                    d.nrows(),
                    d.ncols()
                )));
            }
            d.columns(0, 1).into_owned()
        }
        Err(Error::MissingFile { .. }) if config.rhs_file.is_none() => {
            notes.push(format!(
                "packaged right-hand side {} not found; substituted a seeded standard-normal vector (seed {:#x})",
                rhs_path.display(),
                config.seed
            ));
            seeded_normal(n, &mut rng)
        }
        Err(e) => return Err(e),
    };
    let mut random = seeded_normal(n, &mut rng);
    random *= 1e7 / random.norm();

    let shift_n = 200;
    let op = Arc::new(block_diagonal(sherman.into_operator()?, shift_matrix(shift_n)?));
    let mut b = Matrix::zeros(n + shift_n, 2);
    b.view_mut((0, 0), (n, 1)).copy_from(&packaged);
    b.view_mut((0, 1), (n, 1)).copy_from(&random);
    b.view_mut((n, 0), (shift_n, 2)).copy_from(&unit_columns(shift_n, &[50, 150]));
    let mut p = ProblemSpec::new(op, b, Experiment::Sherman4Mixed.name())?;
    p.notes = notes;
    Ok(p)
}
