//! Reading vectors and pairs named on the command line.

use std::path::{Path, PathBuf};

use lpsketch::io::{load_dataset, DataFormat, Dataset};
use lpsketch::DataVector64;

use crate::CliError;

pub fn dataset(path: &Path, dim: Option<usize>) -> Result<Dataset, CliError> {
    let format = DataFormat::detect(path, dim).map_err(|e| CliError::Usage(e.to_string()))?;
    load_dataset(path, format).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn first_row(path: &Path, dim: Option<usize>) -> Result<DataVector64, CliError> {
    dataset(path, dim)?
        .rows
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: no rows", path.display())))
}

/// `--pair` (first two rows of one file) or `--x`/`--y` (first row of each).
pub fn pair(
    pair: Option<&PathBuf>,
    x: Option<&PathBuf>,
    y: Option<&PathBuf>,
    dim: Option<usize>,
) -> Result<(DataVector64, DataVector64), CliError> {
    match (pair, x, y) {
        (Some(p), None, None) => {
            let mut rows = dataset(p, dim)?.rows.into_iter();
            match (rows.next(), rows.next()) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(CliError::Data(format!("{}: a pair file needs two rows", p.display()))),
            }
        }
        (None, Some(x), Some(y)) => Ok((first_row(x, dim)?, first_row(y, dim)?)),
        _ => Err(CliError::Usage("give either --pair FILE or both --x FILE and --y FILE".into())),
    }
}
