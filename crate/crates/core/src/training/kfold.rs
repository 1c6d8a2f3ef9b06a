use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Error;

/// Indices into the dataset for one fold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` once, cuts it into `k` contiguous test shards and, for
/// each fold, takes `val_fraction` of the remaining development indices as
/// validation.
pub fn kfold_split(n: usize, k: usize, val_fraction: f64, seed: u64) -> Result<Vec<Fold>, Error> {
    if k < 2 || k > n {
        return Err(Error::Usage(format!("cannot make {k} folds from {n} sentences")));
    }
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::Usage(format!("validation fraction {val_fraction} not in [0, 1)")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let test = order[start..start + size].to_vec();
        let dev: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        let n_val = (dev.len() as f64 * val_fraction).round() as usize;
        folds.push(Fold {
            validation: dev[..n_val].to_vec(),
            train: dev[n_val..].to_vec(),
            test,
        });
        start += size;
    }
    Ok(folds)
}
