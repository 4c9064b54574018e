//! Reservoir-style shuffling buffer over a row stream.

use rand::Rng as _;

use crate::rng::{self, stream, Rng};

/// Holds up to `buffer_rows` rows; each emitted row is drawn uniformly from
/// the buffer and its slot is refilled from the source. Every source row is
/// emitted exactly once.
pub struct ShuffledStream<I: Iterator> {
    source: I,
    buffer: Vec<I::Item>,
    capacity: usize,
    rng: Rng,
}

pub fn shuffled_stream<I: Iterator>(source: I, buffer_rows: usize, seed: u64) -> ShuffledStream<I> {
    ShuffledStream::new(source, buffer_rows, rng::substream(seed, stream::SHUFFLE))
}

impl<I: Iterator> ShuffledStream<I> {
    pub fn new(source: I, buffer_rows: usize, rng: Rng) -> Self {
        let capacity = buffer_rows.max(1);
        Self {
            source,
            buffer: Vec::with_capacity(capacity),
            capacity,
            rng,
        }
    }

    /// Recovers the generator, e.g. to keep reshuffling across passes.
    pub fn into_rng(self) -> Rng {
        self.rng
    }
}

impl<I: Iterator> Iterator for ShuffledStream<I> {
    type Item = I::Item;

    fn next(&mut self) -> Option<I::Item> {
        while self.buffer.len() < self.capacity {
            match self.source.next() {
                Some(row) => self.buffer.push(row),
                None => break,
            }
        }
        if self.buffer.is_empty() {
            return None;
        }
        let j = self.rng.random_range(0..self.buffer.len());
        Some(match self.source.next() {
            Some(next) => std::mem::replace(&mut self.buffer[j], next),
            None => self.buffer.swap_remove(j),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_buffer_preserves_order() {
        let out: Vec<u32> = shuffled_stream(0..100u32, 1, 3).collect();
        assert_eq!(out, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn full_buffer_is_a_permutation() {
        let out: Vec<u32> = shuffled_stream(0..1000u32, 1000, 3).collect();
        assert_ne!(out, (0..1000).collect::<Vec<_>>());
        let mut sorted = out.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_order() {
        let a: Vec<u32> = shuffled_stream(0..500u32, 64, 9).collect();
        let b: Vec<u32> = shuffled_stream(0..500u32, 64, 9).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn first_position_is_roughly_uniform_over_buffer() {
        // With buffer = n the first emitted row is uniform over all n rows.
        let mut counts = [0usize; 4];
        for seed in 0..4000 {
            let first = shuffled_stream(0..4usize, 4, seed).next().unwrap();
            counts[first] += 1;
        }
        for c in counts {
            assert!((c as f64 - 1000.0).abs() < 120.0, "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn conserves_multiset(rows in prop::collection::vec(0u8..20, 0..200), buf in 1usize..50, seed: u64) {
            let mut out: Vec<u8> = shuffled_stream(rows.clone().into_iter(), buf, seed).collect();
            let mut expected = rows;
            out.sort_unstable();
            expected.sort_unstable();
            prop_assert_eq!(out, expected);
        }
    }
}
