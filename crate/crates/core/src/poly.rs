//! Polynomials in `(x, t)` with plain monomial coefficients.

use crate::kernels::MultiIndexSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Scalar polynomial `sum c_{mu,l} x^mu t^l`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub n: usize,
    pub terms: BTreeMap<MultiIndexSpec, f64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn monomial(n: usize, mu: Vec<u32>, l: u32, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndexSpec::new(mu, l), c);
        p
    }

    pub fn add_term(&mut self, spec: MultiIndexSpec, c: f64) {
        if c != 0.0 {
            *self.terms.entry(spec).or_insert(0.0) += c;
        }
    }

    /// Highest parabolic order `|mu| + 2l` present.
    pub fn parabolic_degree(&self) -> u32 {
        self.terms.keys().map(|s| s.order()).max().unwrap_or(0)
    }

    pub fn spatial_degree(&self) -> u32 {
        self.terms.keys().map(|s| s.spatial_order()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| c * s.mu.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>() * t.powi(s.l as i32))
            .sum()
    }

    pub fn dx(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (s, c) in &self.terms {
            if s.mu[i] > 0 {
                let mut mu = s.mu.clone();
                mu[i] -= 1;
                out.add_term(MultiIndexSpec::new(mu, s.l), c * s.mu[i] as f64);
            }
        }
        out
    }

    pub fn dt(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (s, c) in &self.terms {
            if s.l > 0 {
                out.add_term(MultiIndexSpec::new(s.mu.clone(), s.l - 1), c * s.l as f64);
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n);
        for i in 0..self.n {
            out = out.add(&self.dx(i).dx(i));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(s, c)| (s.clone(), c * k)).collect() }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// `sum_l t^l Delta^l q / l!` for a polynomial `q(x)`: the caloric
    /// function equal to `q` at `t = 0`.
    pub fn caloric_extension(q: &Poly) -> Self {
        let mut out = Self::zero(q.n);
        let mut lap = q.clone();
        let mut fact = 1.0;
        let mut l = 0u32;
        while !lap.terms.is_empty() {
            for (s, c) in &lap.terms {
                out.add_term(MultiIndexSpec::new(s.mu.clone(), s.l + l), c / fact);
            }
            lap = lap.laplacian();
            l += 1;
            fact *= l as f64;
        }
        out
    }
}

/// Vector of polynomials in `(x, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePolynomial {
    pub n: usize,
    pub components: Vec<Poly>,
}

impl SpaceTimePolynomial {
    pub fn zero(n: usize, components: usize) -> Self {
        Self { n, components: vec![Poly::zero(n); components] }
    }

    /// `sum_{mu, l} x^mu t^l / (mu! l!) c_{mu,l}` from Taylor data.
    pub fn from_taylor(n: usize, components: usize, data: &[(MultiIndexSpec, Vec<f64>)]) -> Self {
        let mut out = Self::zero(n, components);
        for (spec, vals) in data {
            let w = spec.factorial_weight();
            for (k, v) in vals.iter().enumerate() {
                out.components[k].add_term(spec.clone(), v / w);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64], t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval(x, t);
        }
    }

    pub fn eval_vec(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x, t)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { n: self.n, components: self.components.iter().map(|p| p.scale(k)).collect() }
    }

    pub fn divergence(&self) -> Poly {
        let mut out = Poly::zero(self.n);
        for (j, p) in self.components.iter().enumerate().take(self.n) {
            out = out.add(&p.dx(j));
        }
        out
    }

    /// `d_t P - Delta P` componentwise.
    pub fn heat_operator(&self) -> Self {
        Self {
            n: self.n,
            components: self.components.iter().map(|p| p.dt().add(&p.laplacian().scale(-1.0))).collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.components.iter().fold(0.0, |a, p| a.max(p.max_abs_coefficient()))
    }

    /// Largest coefficient of the divergence, relative to the largest coefficient.
    pub fn divergence_residual(&self) -> f64 {
        self.divergence().max_abs_coefficient() / self.max_abs_coefficient().max(f64::MIN_POSITIVE)
    }

    /// Largest coefficient of `d_t P - Delta P`, relative to the largest coefficient.
    pub fn heat_residual(&self) -> f64 {
        self.heat_operator().max_abs_coefficient() / self.max_abs_coefficient().max(f64::MIN_POSITIVE)
    }

    /// Coefficients of `x^alpha` at time `t`, for `|alpha| <= degree`.
    pub fn slice_at(&self, t: f64) -> Vec<Poly> {
        self.components
            .iter()
            .map(|p| {
                let mut out = Poly::zero(self.n);
                for (s, c) in &p.terms {
                    out.add_term(MultiIndexSpec::new(s.mu.clone(), 0), c * t.powi(s.l as i32));
                }
                out
            })
            .collect()
    }
}
