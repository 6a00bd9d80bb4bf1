use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Ordered pair `(i, j)` naming the component `H_{i,j}`; `(i, j)` and `(j, i)` are
/// distinct members of the `n²` components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

impl PairIndex {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    fn from_flat(k: usize, n: usize) -> Self {
        Self { i: k / n, j: k % n }
    }
}

/// A set of `τ` distinct pairs, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minibatch {
    pairs: Vec<PairIndex>,
}

impl Minibatch {
    pub fn pairs(&self) -> &[PairIndex] {
        &self.pairs
    }

    pub fn tau(&self) -> usize {
        self.pairs.len()
    }
}

/// Independent uniform `i` and `j` (one `index` draw each, `i` first).
#[inline]
pub fn sample_pair(rng: &mut RngStream, n: usize) -> PairIndex {
    let i = rng.index(n);
    let j = rng.index(n);
    PairIndex { i, j }
}

/// Uniform `τ`-subset of the `n²` ordered pairs, drawn without replacement
/// (Floyd's algorithm).
pub fn sample_minibatch(rng: &mut RngStream, n: usize, tau: usize) -> Result<Minibatch> {
    let total = n
        .checked_mul(n)
        .ok_or_else(|| Error::invalid("n", "n² overflows"))?;
    if tau == 0 || tau > total {
        return Err(Error::invalid(
            "tau",
            format!("must lie in 1..={total}, got {tau}"),
        ));
    }
    let mut chosen = BTreeSet::new();
    if tau == total {
        chosen.extend(0..total);
    } else {
        for m in total - tau..total {
            let t = rng.index(m + 1);
            if !chosen.insert(t) {
                chosen.insert(m);
            }
        }
    }
    Ok(Minibatch {
        pairs: chosen
            .into_iter()
            .map(|k| PairIndex::from_flat(k, n))
            .collect(),
    })
}
