use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// A uniformly random ordering of `0..n`, consumed front to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSampler {
    order: Vec<usize>,
    cursor: usize,
}

impl PermutationSampler {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl Iterator for PermutationSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let i = *self.order.get(self.cursor)?;
        self.cursor += 1;
        Some(i)
    }
}

/// Seeded Fisher-Yates shuffle of `0..n`.
pub fn permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PermutationSampler> {
    if n == 0 {
        return Err(Error::invalid("permutation of zero elements"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Ok(PermutationSampler { order, cursor: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn single_element() {
        let p = permutation(1, &mut rng::stream(3, 0)).unwrap();
        assert_eq!(p.collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(permutation(0, &mut rng::stream(3, 0)).is_err());
    }

    #[test]
    fn is_a_permutation_and_deterministic() {
        for n in [2, 10, 97] {
            let a = permutation(n, &mut rng::stream(11, 0)).unwrap();
            let b = permutation(n, &mut rng::stream(11, 0)).unwrap();
            assert_eq!(a.order(), b.order());
            let mut sorted = a.order().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cursor_advances_to_len() {
        let mut p = permutation(5, &mut rng::stream(1, 0)).unwrap();
        while p.next().is_some() {}
        assert_eq!(p.cursor(), p.len());
    }
}
