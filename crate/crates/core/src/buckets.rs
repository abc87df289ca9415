//! Fixed vertex partition into about `sqrt(n)` buckets.

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BucketError {
    #[error("vertex {0} is in more than one bucket")]
    Repeated(VertexId),
    #[error("vertex {0} is in no bucket")]
    Uncovered(VertexId),
    #[error("vertex {vertex} out of range for n = {n}")]
    OutOfRange { vertex: VertexId, n: usize },
    #[error("bucket {0} is empty")]
    EmptyBucket(usize),
}

/// `ceil(sqrt(n))`, exact for all `usize`.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

/// `ceil(log2 n)`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketPartition {
    bucket_of: Vec<usize>,
    buckets: Vec<Vec<VertexId>>,
}

impl BucketPartition {
    /// `ceil(sqrt(n))` buckets filled round-robin: `b(v) = v mod B`.
    pub fn round_robin(n: usize) -> Self {
        let b = ceil_sqrt(n).max(1);
        let mut buckets = vec![Vec::new(); b];
        let bucket_of = (0..n)
            .map(|v| {
                buckets[v % b].push(v);
                v % b
            })
            .collect();
        Self { bucket_of, buckets }
    }

    /// Explicit partition; each inner list is one bucket.
    pub fn from_buckets(n: usize, buckets: Vec<Vec<VertexId>>) -> Result<Self, BucketError> {
        let mut bucket_of = vec![usize::MAX; n];
        for (i, bucket) in buckets.iter().enumerate() {
            if bucket.is_empty() {
                return Err(BucketError::EmptyBucket(i));
            }
            for &v in bucket {
                if v >= n {
                    return Err(BucketError::OutOfRange { vertex: v, n });
                }
                if bucket_of[v] != usize::MAX {
                    return Err(BucketError::Repeated(v));
                }
                bucket_of[v] = i;
            }
        }
        if let Some(v) = bucket_of.iter().position(|&b| b == usize::MAX) {
            return Err(BucketError::Uncovered(v));
        }
        let buckets = buckets
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Self { bucket_of, buckets })
    }

    pub fn n(&self) -> usize {
        self.bucket_of.len()
    }

    pub fn count(&self) -> usize {
        self.buckets.len()
    }

    #[inline]
    pub fn bucket_of(&self, v: VertexId) -> usize {
        self.bucket_of[v]
    }

    pub fn members(&self, i: usize) -> &[VertexId] {
        &self.buckets[i]
    }

    pub fn max_size(&self) -> usize {
        self.buckets.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_and_logs() {
        let cases = [(0, 0), (1, 1), (2, 2), (4, 2), (5, 3), (144, 12), (145, 13), (100, 10)];
        for (n, r) in cases {
            assert_eq!(ceil_sqrt(n), r, "n={n}");
        }
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(144), 8);
        assert_eq!(ceil_log2(128), 7);
        assert_eq!(ceil_log2(129), 8);
    }

    #[test]
    fn round_robin_sizes() {
        for n in 1..200 {
            let p = BucketPartition::round_robin(n);
            assert_eq!(p.count(), ceil_sqrt(n));
            assert!(p.max_size() <= ceil_sqrt(n));
            let total: usize = (0..p.count()).map(|i| p.members(i).len()).sum();
            assert_eq!(total, n);
            for v in 0..n {
                assert!(p.members(p.bucket_of(v)).contains(&v));
            }
        }
    }

    #[test]
    fn explicit_partition() {
        let p = BucketPartition::from_buckets(4, vec![vec![1, 0], vec![2, 3]]).unwrap();
        assert_eq!(p.bucket_of(3), 1);
        assert_eq!(p.members(0), &[0, 1]);
        assert_eq!(
            BucketPartition::from_buckets(3, vec![vec![0, 1]]),
            Err(BucketError::Uncovered(2))
        );
        assert_eq!(
            BucketPartition::from_buckets(3, vec![vec![0, 1], vec![1, 2]]),
            Err(BucketError::Repeated(1))
        );
    }
}
