//! Permutations of `{0, .., n-1}` in one-line notation.

use std::fmt;

use thiserror::Error;

/// Largest `n` for which all `n!` permutations are enumerated.
pub const MAX_ENUMERATED: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("InvalidPermutation: {0:?} is not a permutation of 0..n")]
    Invalid(Vec<usize>),
    #[error("TooLarge: enumeration is limited to n <= {MAX_ENUMERATED}, got {0}")]
    TooLarge(usize),
}

/// `image[i]` is the position that `i` is sent to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, PermutationError> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(PermutationError::Invalid(image));
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// Transposition of `i` and `j` on `n` points.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.image.swap(i, j);
        p
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(
            self.len(),
            other.len(),
            "permutations act on different sets"
        );
        Permutation {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    /// +1 or -1, from the parity of the number of transpositions used to sort
    /// the image back to the identity.
    pub fn sign(&self) -> i32 {
        let mut work = self.image.clone();
        let mut swaps = 0usize;
        for i in 0..work.len() {
            while work[i] != i {
                let j = work[i];
                work.swap(i, j);
                swaps += 1;
            }
        }
        if swaps.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// All permutations of `n` points in lexicographic order.
    pub fn all(n: usize) -> Result<Vec<Permutation>, PermutationError> {
        if n > MAX_ENUMERATED {
            return Err(PermutationError::TooLarge(n));
        }
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation {
                image: current.clone(),
            });
            if !next_lexicographic(&mut current) {
                return Ok(out);
            }
        }
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.image)
    }
}
