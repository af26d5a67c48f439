//! Exhaustive machinery for the symmetric group `S_n` acting on transaction lists.
//!
//! Convention: a permutation `π` moves the element at position `j` to position
//! `π(j)`, so `apply(π, x)[π(j)] = x[j]`. With this convention the action law is
//! `apply(π, apply(σ, x)) = apply(π∘σ, x)` where `(π∘σ)(j) = π(σ(j))`.
//!
//! Vertices of permutation graphs and entries of table payoffs are indexed by the
//! lexicographic rank of the mapping array (`0..n!`).

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::factorial;

/// Largest degree accepted by exhaustive enumeration (`8! = 40320`).
pub const MAX_DEGREE: usize = 8;

pub(crate) fn check_degree(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange { n, cap: MAX_DEGREE });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    /// Parity of a composition: even + even = even, etc.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// An element of `S_n`, stored as the image of each position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.map)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl Permutation {
    /// Builds a permutation from its mapping array, checking that it is a bijection.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty mapping".into()));
        }
        let mut seen = vec![false; n];
        for &image in &map {
            if image >= n || seen[image] {
                return Err(Error::InvalidPermutation(format!(
                    "{map:?} is not a bijection on 0..{n}"
                )));
            }
            seen[image] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// The transposition swapping positions `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidPermutation(format!(
                "transposition ({i} {j}) invalid for degree {n}"
            )));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Ok(Self { map })
    }

    /// The cycle `c[0] -> c[1] -> ... -> c[0]`, fixing everything else.
    pub fn cycle(n: usize, cycle: &[usize]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        for (k, &from) in cycle.iter().enumerate() {
            let to = cycle[(k + 1) % cycle.len()];
            if from >= n || to >= n {
                return Err(Error::InvalidPermutation(format!(
                    "cycle {cycle:?} out of range for degree {n}"
                )));
            }
            map[from] = to;
        }
        Self::new(map)
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.map
    }

    /// Destination of the element currently at position `j`.
    pub fn image(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::LengthMismatch {
                expected: self.degree(),
                got: other.degree(),
            });
        }
        Ok(Permutation {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (j, &image) in self.map.iter().enumerate() {
            inv[image] = j;
        }
        Permutation { map: inv }
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.degree();
        let mut visited = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !visited[j] {
                visited[j] = true;
                j = self.map[j];
            }
        }
        cycles
    }

    /// Even iff `n - cycles` is even.
    pub fn parity(&self) -> Parity {
        if (self.degree() - self.cycle_count()) % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Lexicographic rank of the mapping array in `0..n!`.
    pub fn rank(&self) -> usize {
        let n = self.degree();
        let mut rank = 0;
        for i in 0..n {
            let smaller_after = self.map[i + 1..].iter().filter(|&&m| m < self.map[i]).count();
            rank += smaller_after * factorial(n - 1 - i);
        }
        rank
    }

    /// Inverse of [`Permutation::rank`].
    pub fn unrank(n: usize, rank: usize) -> Result<Permutation> {
        check_degree(n)?;
        let count = factorial(n);
        if rank >= count {
            return Err(Error::RankOutOfRange { rank, n, count });
        }
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut map = Vec::with_capacity(n);
        let mut r = rank;
        for i in 0..n {
            let block = factorial(n - 1 - i);
            map.push(remaining.remove(r / block));
            r %= block;
        }
        Ok(Permutation { map })
    }

    /// Permutes a list: `result[π(j)] = x[j]`.
    pub fn apply<A: Clone>(&self, x: &[A]) -> Result<Vec<A>> {
        if x.len() != self.degree() {
            return Err(Error::LengthMismatch {
                expected: self.degree(),
                got: x.len(),
            });
        }
        let mut out: Vec<Option<A>> = vec![None; x.len()];
        for (j, item) in x.iter().enumerate() {
            out[self.map[j]] = Some(item.clone());
        }
        Ok(out.into_iter().map(|v| v.expect("bijection")).collect())
    }

    /// Swaps the images of positions `i` and `j`, i.e. returns `self ∘ (i j)`.
    pub fn swapped(&self, i: usize, j: usize) -> Permutation {
        let mut map = self.map.clone();
        map.swap(i, j);
        Permutation { map }
    }

    /// Steps to the next permutation in lexicographic order, in place.
    fn advance(map: &mut [usize]) -> bool {
        let n = map.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && map[i - 1] >= map[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while map[j] <= map[i - 1] {
            j -= 1;
        }
        map.swap(i - 1, j);
        map[i..].reverse();
        true
    }
}

/// All `n!` permutations of degree `n` in lexicographic order; position `i` is `unrank(n, i)`.
pub fn enumerate_group(n: usize) -> Result<Vec<Permutation>> {
    check_degree(n)?;
    let mut out = Vec::with_capacity(factorial(n));
    let mut map: Vec<usize> = (0..n).collect();
    loop {
        out.push(Permutation { map: map.clone() });
        if !Permutation::advance(&mut map) {
            break;
        }
    }
    Ok(out)
}

/// True iff `sigma = pi ∘ τ` for a single transposition `τ`.
pub fn transposition_adjacent(pi: &Permutation, sigma: &Permutation) -> Result<bool> {
    if pi.degree() != sigma.degree() {
        return Err(Error::LengthMismatch {
            expected: pi.degree(),
            got: sigma.degree(),
        });
    }
    let diff: Vec<usize> = (0..pi.degree()).filter(|&i| pi.map[i] != sigma.map[i]).collect();
    Ok(diff.len() == 2 && pi.map[diff[0]] == sigma.map[diff[1]] && pi.map[diff[1]] == sigma.map[diff[0]])
}

/// An ordered list of actions `x ∈ A^n`. The alphabet only needs equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransactionList<A> {
    actions: Vec<A>,
}

impl<A> From<Vec<A>> for TransactionList<A> {
    fn from(actions: Vec<A>) -> Self {
        Self { actions }
    }
}

impl<A> Deref for TransactionList<A> {
    type Target = [A];

    fn deref(&self) -> &[A] {
        &self.actions
    }
}

impl<A> TransactionList<A> {
    pub fn new(actions: Vec<A>) -> Self {
        Self { actions }
    }

    pub fn as_slice(&self) -> &[A] {
        &self.actions
    }

    pub fn into_inner(self) -> Vec<A> {
        self.actions
    }
}

impl<A: Clone> TransactionList<A> {
    /// `π(x)`.
    pub fn permuted(&self, pi: &Permutation) -> Result<Self> {
        pi.apply(&self.actions).map(Self::new)
    }
}

impl<A: PartialEq> TransactionList<A> {
    /// Class label of each position: the index of the first equal entry.
    ///
    /// Two lists in the same orbit are equal iff their permuted labels agree,
    /// which lets orbits be deduplicated with equality alone.
    pub fn pattern(&self) -> Vec<usize> {
        let x = &self.actions;
        (0..x.len())
            .map(|i| (0..=i).find(|&j| x[j] == x[i]).unwrap_or(i))
            .collect()
    }

    /// True iff `y` is a rearrangement of `self`.
    pub fn same_orbit(&self, y: &[A]) -> bool {
        if y.len() != self.len() {
            return false;
        }
        let mut used = vec![false; y.len()];
        self.actions
            .iter()
            .all(|a| match (0..y.len()).find(|&k| !used[k] && y[k] == *a) {
                Some(k) => {
                    used[k] = true;
                    true
                }
                None => false,
            })
    }

    /// The stabilizer `F(x) = {π : π(x) = x}` in rank order.
    pub fn stabilizer(&self) -> Result<Vec<Permutation>> {
        let labels = self.pattern();
        Ok(enumerate_group(self.len())?
            .into_iter()
            .filter(|pi| (0..labels.len()).all(|j| labels[j] == labels[pi.image(j)]))
            .collect())
    }

    pub fn stabilizer_size(&self) -> Result<usize> {
        Ok(self.stabilizer()?.len())
    }
}

impl<A: Clone + PartialEq> TransactionList<A> {
    /// The orbit `S(x)`, deduplicated, in order of first appearance by rank.
    pub fn orbit(&self) -> Result<Vec<Self>> {
        Ok(self.orbit_with_ranks()?.into_iter().map(|(_, y)| y).collect())
    }

    /// Orbit elements paired with the smallest rank `r` such that `unrank(r)(x)` is that element.
    pub fn orbit_with_ranks(&self) -> Result<Vec<(usize, Self)>> {
        let labels = self.pattern();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (rank, pi) in enumerate_group(self.len())?.iter().enumerate() {
            let key = pi.apply(&labels)?;
            if seen.insert(key) {
                out.push((rank, self.permuted(pi)?));
            }
        }
        Ok(out)
    }

    pub fn orbit_size(&self) -> Result<usize> {
        Ok(self.orbit_with_ranks()?.len())
    }
}
