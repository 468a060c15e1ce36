//! Permutations of temperature labels.
//!
//! A permutation `sigma` maps particle `j` to temperature `sigma(j)`. Acting
//! on a product state it moves component `j` to slot `sigma(j)`, so
//! `x^sigma = (x_{sigma^{-1}(1)}, ..., x_{sigma^{-1}(K)})`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    /// From the image list `[sigma(0), ..., sigma(K-1)]`; `None` unless it is a
    /// bijection of `0..K`.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sigma(j)`.
    pub fn image(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &s) in self.0.iter().enumerate() {
            inv[s] = j;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(j, &s)| j == s)
    }

    /// `x^sigma`, written into `out`.
    pub fn apply_into<T: Copy>(&self, x: &[T], out: &mut [T]) {
        for (j, &s) in self.0.iter().enumerate() {
            out[s] = x[j];
        }
    }

    pub fn apply<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        write!(f, ")")
    }
}

/// All `K!` permutations in lexicographic order of their image lists; the
/// identity comes first.
pub fn all_permutations(k: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(Permutation(current.clone()));
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let pivot = i - 1;
        let j = (pivot + 1..k).rev().find(|&j| current[j] > current[pivot]).unwrap();
        current.swap(pivot, j);
        current[i..].reverse();
    }
    out
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}
