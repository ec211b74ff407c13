use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::matrix::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Stratified train/test split on the response.
///
/// The training size is `round(ratio * n)` (kept within `1..n`), shared out
/// between the two classes by largest remainder so each stratum gets
/// `floor` or `ceil` of `ratio * n_class`. Index lists are sorted.
pub fn train_test_split(data: &DataMatrix, ratio: f64, seed: u64) -> Result<SplitSpec> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio {ratio} not in (0, 1)")));
    }
    let n = data.n_rows();
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 rows to split, have {n}"
        )));
    }
    let labels = data.labels();
    let mut strata: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        strata[usize::from(y)].push(i);
    }
    for (class, s) in strata.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::SmallStratum {
                class: class as u8,
                count: s.len(),
            });
        }
    }

    let sizes = allocate(ratio, [strata[0].len(), strata[1].len()]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(sizes[0] + sizes[1]);
    let mut test = Vec::with_capacity(n - sizes[0] - sizes[1]);
    for (stratum, &k) in strata.iter_mut().zip(&sizes) {
        stratum.shuffle(&mut rng);
        train.extend_from_slice(&stratum[..k]);
        test.extend_from_slice(&stratum[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitSpec {
        train_indices: train,
        test_indices: test,
        seed,
        ratio,
    })
}

/// Largest-remainder allocation of `round(ratio * total)` training rows.
fn allocate(ratio: f64, counts: [usize; 2]) -> [usize; 2] {
    let total = counts[0] + counts[1];
    let target = ((ratio * total as f64).round() as usize).clamp(1, total - 1);
    let quotas = counts.map(|c| ratio * c as f64);
    let mut sizes = quotas.map(|q| q.floor() as usize);
    let mut order = [0usize, 1];
    // Larger fractional part first; ties go to the lower class.
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut assigned = sizes[0] + sizes[1];
    for &c in order.iter().cycle().take(4) {
        if assigned >= target {
            break;
        }
        if sizes[c] < counts[c] {
            sizes[c] += 1;
            assigned += 1;
        }
    }
    while assigned > target {
        let c = if sizes[1] > sizes[0] { 1 } else { 0 };
        sizes[c] -= 1;
        assigned -= 1;
    }
    sizes
}
