use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Bit permutation shared by transmitter and receiver.
/// `interleave(x)[i] = x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self {
            perm: (0..len).collect(),
        }
    }

    pub fn from_seed(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng_from_seed(seed));
        Self { perm }
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::Dimension {
                expected: self.perm.len(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perm.iter().map(|&p| input[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (&p, &v) in self.perm.iter().zip(input) {
            out[p] = v;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_transparent() {
        let x = [1u8, 0, 1, 1, 0];
        assert_eq!(Interleaver::identity(5).interleave(&x).unwrap(), x);
    }

    #[test]
    fn seeded_permutation_is_reproducible() {
        assert_eq!(
            Interleaver::from_seed(300, 8),
            Interleaver::from_seed(300, 8)
        );
        assert_ne!(
            Interleaver::from_seed(300, 8),
            Interleaver::from_seed(300, 9)
        );
    }

    #[test]
    fn length_mismatch_rejected() {
        let il = Interleaver::from_seed(4, 1);
        assert!(il.interleave(&[0u8; 5]).is_err());
        assert!(il.deinterleave(&[0.0f64; 3]).is_err());
        assert!(Interleaver::from_permutation(vec![0, 0]).is_err());
        assert!(Interleaver::from_permutation(vec![1, 2]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(x in prop::collection::vec(any::<u8>(), 0..200), seed: u64) {
            let il = Interleaver::from_seed(x.len(), seed);
            let y = il.interleave(&x).unwrap();
            prop_assert_eq!(il.deinterleave(&y).unwrap(), x);
        }
    }
}
