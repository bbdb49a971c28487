//! Multi-indices and dense monomial tables.

use serde::{Deserialize, Serialize};

/// Spatial multi-index `mu` together with a time-derivative order `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndexSpec {
    pub mu: Vec<u32>,
    pub l: u32,
}

impl MultiIndexSpec {
    pub fn new(mu: Vec<u32>, l: u32) -> Self {
        Self { mu, l }
    }

    /// Pure spatial index.
    pub fn spatial(mu: Vec<u32>) -> Self {
        Self { mu, l: 0 }
    }

    pub fn zero(n: usize) -> Self {
        Self { mu: vec![0; n], l: 0 }
    }

    /// Unit spatial index `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut mu = vec![0; n];
        mu[i] = 1;
        Self { mu, l: 0 }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn spatial_order(&self) -> u32 {
        self.mu.iter().sum()
    }

    /// Parabolic order `|mu| + 2 l`.
    pub fn order(&self) -> u32 {
        self.spatial_order() + 2 * self.l
    }

    /// `mu! l!` as a float; exact for the orders used here.
    pub fn factorial_weight(&self) -> f64 {
        self.mu.iter().map(|&m| factorial(m)).product::<f64>() * factorial(self.l)
    }

    /// All indices of parabolic order exactly `m` in dimension `n`, ordered by
    /// decreasing `l` and then graded-lexicographically in `mu`.
    pub fn of_order(n: usize, m: u32) -> Vec<MultiIndexSpec> {
        let mut out = Vec::new();
        for l in (0..=m / 2).rev() {
            for mu in spatial_indices_of_degree(n, m - 2 * l) {
                out.push(MultiIndexSpec { mu, l });
            }
        }
        out
    }

    /// All indices with parabolic order `<= m`.
    pub fn up_to_order(n: usize, m: u32) -> Vec<MultiIndexSpec> {
        (0..=m).flat_map(|k| Self::of_order(n, k)).collect()
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Spatial multi-indices of degree exactly `deg` in `n` variables, in
/// reverse-lexicographic order (`x_1` powers first).
pub fn spatial_indices_of_degree(n: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=deg).rev() {
            prefix.push(first);
            rec(n, deg - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, deg, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Spatial multi-indices of degree `<= deg`, graded.
pub fn spatial_indices_up_to(n: usize, deg: u32) -> Vec<Vec<u32>> {
    (0..=deg).flat_map(|k| spatial_indices_of_degree(n, k)).collect()
}

/// Fixed-size exponent triple used on hot paths (unused slots are zero).
pub type Exps = [u32; 3];

/// Dense lookup table for spatial monomials of degree `<= max_degree` in
/// `n <= 3` variables.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    n: usize,
    max_degree: u32,
    list: Vec<Exps>,
    lookup: Vec<u32>,
}

impl MonomialTable {
    pub fn new(n: usize, max_degree: u32) -> Self {
        assert!((1..=3).contains(&n), "monomial tables support n in 1..=3");
        assert!(max_degree < 32, "monomial degree too large");
        let side = max_degree as usize + 1;
        let mut lookup = vec![u32::MAX; side.pow(3)];
        let mut list = Vec::new();
        for mu in spatial_indices_up_to(n, max_degree) {
            let mut e = [0u32; 3];
            e[..n].copy_from_slice(&mu);
            lookup[Self::slot(side, &e)] = list.len() as u32;
            list.push(e);
        }
        Self { n, max_degree, list, lookup }
    }

    #[inline]
    fn slot(side: usize, e: &Exps) -> usize {
        (e[0] as usize * side + e[1] as usize) * side + e[2] as usize
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn exps(&self, idx: usize) -> &Exps {
        &self.list[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Exps> {
        self.list.iter()
    }

    /// Index of a monomial, or `None` when its degree exceeds the table.
    #[inline]
    pub fn index(&self, e: &Exps) -> Option<usize> {
        let deg: u32 = e.iter().sum();
        if deg > self.max_degree {
            return None;
        }
        let side = self.max_degree as usize + 1;
        let v = self.lookup[Self::slot(side, e)];
        (v != u32::MAX).then_some(v as usize)
    }

    /// Fill `out[i] = prod_k x_k^{e_k}` for every monomial in the table.
    pub fn powers(&self, x: &[f64], out: &mut [f64]) {
        let side = self.max_degree as usize + 1;
        let mut pw = [[1.0f64; 32]; 3];
        for k in 0..self.n {
            for p in 1..side {
                pw[k][p] = pw[k][p - 1] * x[k];
            }
        }
        for (o, e) in out.iter_mut().zip(&self.list) {
            *o = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
        }
    }
}

pub(crate) fn to_exps(mu: &[u32]) -> Exps {
    let mut e = [0u32; 3];
    e[..mu.len()].copy_from_slice(mu);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(a: usize, b: usize) -> usize {
        (0..b).fold(1, |acc, i| acc * (a - i) / (i + 1))
    }

    #[test]
    fn counts_match_binomials() {
        for n in 1..=3 {
            for d in 0..7u32 {
                assert_eq!(spatial_indices_of_degree(n, d).len(), binom(d as usize + n - 1, n - 1));
                assert_eq!(MonomialTable::new(n, d).len(), binom(d as usize + n, n));
            }
        }
    }

    #[test]
    fn order_and_weights() {
        let s = MultiIndexSpec::new(vec![2, 1], 3);
        assert_eq!(s.order(), 9);
        assert_eq!(s.factorial_weight(), 2.0 * 1.0 * 6.0);
        for m in 0..6 {
            assert!(MultiIndexSpec::of_order(2, m).iter().all(|s| s.order() == m));
        }
    }

    #[test]
    fn table_lookup_roundtrip() {
        let t = MonomialTable::new(3, 5);
        for i in 0..t.len() {
            assert_eq!(t.index(t.exps(i)), Some(i));
        }
        assert_eq!(t.index(&[6, 0, 0]), None);
        let mut out = vec![0.0; t.len()];
        t.powers(&[2.0, 3.0, 5.0], &mut out);
        let i = t.index(&[1, 2, 1]).unwrap();
        assert_eq!(out[i], 2.0 * 9.0 * 5.0);
    }
}
