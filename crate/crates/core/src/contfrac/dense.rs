//! Target directions `u_k` for the coupled slopes.
//!
//! The default enumeration lists every positive integer `(d+1)`-tuple once.
//! Tuples are grouped by their largest entry `m = 1, 2, 3, ...`; inside a
//! group they appear in lexicographic order. For `d = 2` the sequence starts
//!
//! ```text
//! k = 1  (1,1,1)
//! k = 2  (1,1,2)
//! k = 3  (1,2,1)
//! k = 4  (1,2,2)
//! k = 5  (2,1,1)
//! k = 6  (2,1,2)
//! k = 7  (2,2,1)
//! k = 8  (2,2,2)
//! k = 9  (1,1,3)
//! ```
//!
//! Every rational direction in the positive cone shows up, so the image is
//! projectively dense.

use crate::error::{Error, Result};

/// `k`-th tuple (`k >= 1`) of the default enumeration for `d + 1` entries.
pub fn default_dense_sequence(d: usize, k: usize) -> Vec<u64> {
    assert!(k >= 1, "the dense sequence is indexed from 1");
    let len = d + 1;
    // the group with max entry m holds m^len - (m-1)^len tuples
    let mut m: u64 = 1;
    let mut before: u128 = 0;
    loop {
        let total = (m as u128).pow(len as u32);
        if (k as u128) <= total {
            break;
        }
        before = total;
        m += 1;
    }
    let mut rank = k as u128 - before;
    let mut tuple = vec![1u64; len];
    loop {
        if tuple.contains(&m) {
            rank -= 1;
            if rank == 0 {
                return tuple;
            }
        }
        // lexicographic successor in {1..m}^len
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            if tuple[pos] < m {
                tuple[pos] += 1;
                for t in &mut tuple[pos + 1..] {
                    *t = 1;
                }
                break;
            }
        }
    }
}

/// A finite list of target tuples `u_1, ..., u_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSequence {
    d: usize,
    tuples: Vec<Vec<u64>>,
}

impl DenseSequence {
    /// First `levels` tuples of the default enumeration.
    pub fn default_for(d: usize, levels: usize) -> Self {
        DenseSequence {
            d,
            tuples: (1..=levels).map(|k| default_dense_sequence(d, k)).collect(),
        }
    }

    /// User-supplied tuples; every entry must be positive and every tuple have `d + 1` entries.
    pub fn custom(d: usize, tuples: Vec<Vec<u64>>) -> Result<Self> {
        for (k, u) in tuples.iter().enumerate() {
            if u.len() != d + 1 {
                return Err(Error::Config(format!(
                    "u_{} has {} entries, expected {}",
                    k + 1,
                    u.len(),
                    d + 1
                )));
            }
            if u.contains(&0) {
                return Err(Error::Config(format!("u_{} has a zero entry", k + 1)));
            }
        }
        Ok(DenseSequence { d, tuples })
    }

    /// Parses one tuple per line, entries separated by commas or whitespace.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        let mut tuples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let u = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad tuple entry: {e}"),
                })?;
            tuples.push(u);
        }
        DenseSequence::custom(d, tuples)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// `u_k` for `1 <= k <= len`.
    pub fn get(&self, k: usize) -> Option<&[u64]> {
        k.checked_sub(1).and_then(|i| self.tuples.get(i)).map(Vec::as_slice)
    }

    pub fn tuples(&self) -> &[Vec<u64>] {
        &self.tuples
    }

    /// First `levels` tuples.
    pub fn truncated(&self, levels: usize) -> DenseSequence {
        DenseSequence {
            d: self.d,
            tuples: self.tuples.iter().take(levels).cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_tuples() {
        assert_eq!(default_dense_sequence(2, 1), vec![1, 1, 1]);
        assert_eq!(default_dense_sequence(2, 2), vec![1, 1, 2]);
        assert_eq!(default_dense_sequence(1, 1), vec![1, 1]);
        assert_eq!(default_dense_sequence(0, 3), vec![3]);
    }

    #[test]
    fn documented_order_for_d2() {
        let seq = DenseSequence::default_for(2, 9);
        let expected: Vec<Vec<u64>> = vec![
            vec![1, 1, 1],
            vec![1, 1, 2],
            vec![1, 2, 1],
            vec![1, 2, 2],
            vec![2, 1, 1],
            vec![2, 1, 2],
            vec![2, 2, 1],
            vec![2, 2, 2],
            vec![1, 1, 3],
        ];
        assert_eq!(seq.tuples(), expected.as_slice());
    }

    #[test]
    fn enumeration_is_a_bijection_onto_small_boxes() {
        // brute force: all tuples with max <= 4 appear exactly once among the first 4^3
        let mut seen: Vec<Vec<u64>> = (1..=64).map(|k| default_dense_sequence(2, k)).collect();
        assert!(seen.iter().all(|u| u.iter().all(|&x| (1..=4).contains(&x))));
        let maxes: Vec<u64> = seen.iter().map(|u| *u.iter().max().unwrap()).collect();
        assert!(maxes.windows(2).all(|w| w[0] <= w[1]));
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn custom_sequences_are_validated() {
        assert!(DenseSequence::custom(1, vec![vec![1, 2]]).is_ok());
        assert!(DenseSequence::custom(1, vec![vec![1, 2, 3]]).is_err());
        assert!(DenseSequence::custom(1, vec![vec![0, 2]]).is_err());
        let parsed = DenseSequence::parse(2, "# alternating\n1,1,2\n2 1 1\n\n").unwrap();
        assert_eq!(parsed.get(2), Some(&[2u64, 1, 1][..]));
        let err = DenseSequence::parse(2, "1,1,1\n1,x,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
