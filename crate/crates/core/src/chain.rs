//! Sparse chains over a filtration's simplex index set.
//!
//! Chains are generic over the coefficient domain: [`F2`] for persistence
//! reduction and `f64` for the signed chains fed to the linear program.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

/// Coefficient domain of a chain.
pub trait Coefficient: Copy + PartialEq + Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    /// Image of an incidence sign `±1`.
    fn from_sign(sign: i8) -> Self;
}

/// The non-trivial element of the two-element field. Zero is never stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct F2(pub bool);

impl F2 {
    pub const ONE: F2 = F2(true);
}

impl Coefficient for F2 {
    fn zero() -> Self {
        F2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn add(self, other: Self) -> Self {
        F2(self.0 ^ other.0)
    }
    fn mul(self, other: Self) -> Self {
        F2(self.0 & other.0)
    }
    fn from_sign(_sign: i8) -> Self {
        F2(true)
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn from_sign(sign: i8) -> Self {
        f64::from(sign)
    }
}

/// A `dim`-chain: sparse map from simplex index to a nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain<C> {
    dim: usize,
    entries: BTreeMap<usize, C>,
}

pub type F2Chain = Chain<F2>;
pub type RealChain = Chain<f64>;

impl<C: Coefficient> Chain<C> {
    pub fn zero(dim: usize) -> Self {
        Chain { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `coef` to the entry at `index`, dropping it if it cancels.
    pub fn add_term(&mut self, index: usize, coef: C) {
        if coef.is_zero() {
            return;
        }
        match self.entries.get_mut(&index) {
            Some(c) => {
                let sum = c.add(coef);
                if sum.is_zero() {
                    self.entries.remove(&index);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.entries.insert(index, coef);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Chain<C>) {
        for (&i, &c) in &other.entries {
            self.add_term(i, c);
        }
    }

    pub fn get(&self, index: usize) -> C {
        self.entries.get(&index).copied().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Simplex indices with nonzero coefficient, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, C)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }
}

impl Chain<F2> {
    /// Chain with coefficient one on every listed index; repeated indices cancel.
    pub fn from_indices<I: IntoIterator<Item = usize>>(dim: usize, indices: I) -> Self {
        let mut c = Chain::zero(dim);
        for i in indices {
            c.add_term(i, F2::ONE);
        }
        c
    }
}

impl Chain<f64> {
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(dim: usize, pairs: I) -> Self {
        let mut c = Chain::zero(dim);
        for (i, v) in pairs {
            c.add_term(i, v);
        }
        c
    }

    /// Reduction mod 2 of an integer-valued chain; entries are rounded first.
    pub fn to_f2(&self) -> Chain<F2> {
        Chain::from_indices(
            self.dim,
            self.iter().filter(|(_, v)| (v.round() as i64).rem_euclid(2) == 1).map(|(i, _)| i),
        )
    }
}
