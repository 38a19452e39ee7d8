//! Classic local search problems with CLO encoders and prescribed coverings.

pub mod cut;
pub mod maxsat;
pub mod mca;
pub mod setsystem;
pub mod tsp;

pub use cut::{hedonic_to_maxkcut, party_affiliation_to_maxcut, CutInstance, HedonicGame, PartyAffiliationGame};
pub use maxsat::{Clause, CnfInstance};
pub use mca::{McaConstraint, McaInstance};
pub use setsystem::{HsMoves, SetSystemInstance, SetSystemVariant};
pub use tsp::TourInstance;

use alloc::format;
use alloc::vec::Vec;

use crate::covering::ClusterTag;
use crate::error::{Error, Result};
use crate::util::combinations;

/// Largest symbolic covering an encoder will list.
pub const MAX_DECLARED_CLUSTERS: usize = 2_000_000;

pub(crate) fn tag(xs: &[usize]) -> ClusterTag {
    xs.iter().map(|&x| x as i64).collect()
}

/// Every subset of `0..n` with size in `lo..=hi`, smaller sizes first.
pub(crate) fn subsets_by_size(n: usize, lo: usize, hi: usize) -> Result<Vec<Vec<usize>>> {
    let mut total = 0.0;
    for r in lo..=hi.min(n) {
        total += crate::util::binomial(n as u64, r as u64);
    }
    if total > MAX_DECLARED_CLUSTERS as f64 {
        return Err(Error::UnsupportedAtScale(format!(
            "{total} transition clusters exceed the listing limit of {MAX_DECLARED_CLUSTERS}"
        )));
    }
    Ok((lo..=hi.min(n)).flat_map(|r| combinations(n, r)).collect())
}

/// Positions where two equal-length vectors differ.
pub(crate) fn differing<T: PartialEq>(a: &[T], b: &[T]) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i] != b[i]).collect()
}
