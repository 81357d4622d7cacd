//! Strictly increasing multi-indices, stored as bit masks.

use std::sync::OnceLock;

pub const MAX_DIM: usize = 12;

pub struct Basis {
    pub n: usize,
    /// `by_degree[p]` lists the masks of size `p` in lexicographic order of their index lists.
    pub by_degree: Vec<Vec<u32>>,
    /// Position of a mask inside its degree block.
    pub position: Vec<usize>,
}

fn build(n: usize) -> Basis {
    let mut by_degree = vec![Vec::new(); n + 1];
    let mut all: Vec<u32> = (0..(1u32 << n)).collect();
    all.sort_by_key(|&m| indices(m));
    for m in all {
        by_degree[m.count_ones() as usize].push(m);
    }
    let mut position = vec![0usize; 1 << n];
    for block in &by_degree {
        for (k, &m) in block.iter().enumerate() {
            position[m as usize] = k;
        }
    }
    Basis { n, by_degree, position }
}

pub fn basis(n: usize) -> &'static Basis {
    static TABLES: OnceLock<Vec<Basis>> = OnceLock::new();
    assert!(n <= MAX_DIM, "exterior algebra dimension {n} exceeds {MAX_DIM}");
    &TABLES.get_or_init(|| (0..=MAX_DIM).map(build).collect())[n]
}

pub fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn mask_of(idx: &[usize]) -> u32 {
    idx.iter().fold(0u32, |m, &i| m | (1 << i))
}

/// Sign of the permutation sorting the concatenation (a, b) of two disjoint sorted sets.
pub fn merge_sign(a: u32, b: u32) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of an arbitrary index sequence relative to its sorted order, 0 on repeats.
pub fn permutation_sign(seq: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] == seq[j] {
                return 0.0;
            }
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sizes_are_binomials() {
        for n in 0..=6 {
            let b = basis(n);
            for p in 0..=n {
                assert_eq!(b.by_degree[p].len(), binomial(n, p));
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        let b = basis(4);
        let two: Vec<Vec<usize>> = b.by_degree[2].iter().map(|&m| indices(m)).collect();
        assert_eq!(two[0], vec![0, 1]);
        assert_eq!(two[1], vec![0, 2]);
        assert_eq!(two[5], vec![2, 3]);
    }

    #[test]
    fn merge_sign_matches_permutation_sign() {
        for a in 0u32..16 {
            for b in 0u32..16 {
                if a & b != 0 {
                    continue;
                }
                let mut seq = indices(a);
                seq.extend(indices(b));
                assert_eq!(merge_sign(a, b), permutation_sign(&seq));
            }
        }
    }
}
