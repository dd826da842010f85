//! `K`-subset enumeration and top-`K` selection.

use itertools::Itertools;

use crate::env::ArmSet;

/// Largest subset count the exact routines will enumerate.
pub const EXACT_SUBSET_LIMIT: u128 = 1_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = ArmSet> {
    (0..n).combinations(k).map(|c| ArmSet::new(c).expect("combinations are sorted and distinct"))
}

/// Indices of the `k` largest values; ties go to the lower index.
pub fn top_k_indices(values: &[f64], k: usize) -> ArmSet {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    ArmSet::new(order).expect("indices are distinct")
}
