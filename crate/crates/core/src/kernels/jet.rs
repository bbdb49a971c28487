//! Batched evaluation of heat-kernel and Stokes-tensor derivatives.
//!
//! Spatial derivatives of the heat kernel are Hermite polynomials times the
//! Gaussian. For the Stokes tensor we use the subordination identity
//! `1/|xi|^2 = int_0^inf e^{-sigma |xi|^2} d sigma`, which turns the symbol
//! `(delta_jk - xi_j xi_k / |xi|^2) e^{-tau |xi|^2}` into
//!
//! ```text
//! K_jk(z, tau) = delta_jk Gamma(z, tau) + Phi^{e_j + e_k}(z, tau),
//! Phi^beta(z, tau) = int_tau^inf d^beta Gamma(z, sigma) d sigma,
//! ```
//!
//! and each `Phi^beta` is a finite sum of monomials in `z` times scaled lower
//! incomplete gamma functions. Time derivatives follow from the heat
//! equation: `d_tau Phi^beta = -d^beta Gamma`.

use super::hermite::{hermite_coefficients, hermite_values};
use super::incgamma::{gamma_half_integer, scaled_lower_gamma_ladder};
use super::multi_index::{factorial, spatial_indices_of_degree, to_exps, Exps, MonomialTable, MultiIndexSpec};
use super::KernelError;
use std::f64::consts::PI;

/// All spatial derivatives `d^beta Gamma(z, tau)` with `|beta| <= order`.
#[derive(Clone, Debug)]
pub struct HeatJet {
    n: usize,
    table: MonomialTable,
    herm: [[f64; 32]; 3],
    values: Vec<f64>,
}

impl HeatJet {
    pub fn new(n: usize, order: u32) -> Self {
        let table = MonomialTable::new(n, order);
        let len = table.len();
        Self { n, table, herm: [[0.0; 32]; 3], values: vec![0.0; len] }
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluate; returns `false` (and zeros) for `tau <= 0`.
    pub fn eval(&mut self, z: &[f64], tau: f64) -> bool {
        if tau <= 0.0 {
            self.values.iter_mut().for_each(|v| *v = 0.0);
            return false;
        }
        let n = self.n;
        let order = self.table.max_degree() as usize;
        let sq = tau.sqrt();
        let inv = 0.5 / sq;
        let mut r2 = 0.0;
        for i in 0..n {
            r2 += z[i] * z[i];
            hermite_values(z[i] * inv, order, &mut self.herm[i]);
        }
        let g0 = (4.0 * PI * tau).powf(-0.5 * n as f64) * (-r2 / (4.0 * tau)).exp();
        let mut cpow = [1.0f64; 32];
        for k in 1..=order {
            cpow[k] = cpow[k - 1] * (-inv);
        }
        for (v, e) in self.values.iter_mut().zip(self.table.iter()) {
            let deg = (e[0] + e[1] + e[2]) as usize;
            let mut h = self.herm[0][e[0] as usize];
            if n > 1 {
                h *= self.herm[1][e[1] as usize];
            }
            if n > 2 {
                h *= self.herm[2][e[2] as usize];
            }
            *v = g0 * cpow[deg] * h;
        }
        true
    }

    /// `d_t^l d_x^mu Gamma = Delta^l d^mu Gamma` from the current values.
    pub fn time_derivative(&self, mu: &Exps, l: u32) -> f64 {
        laplacian_power(self.n, l)
            .iter()
            .map(|(kappa, c)| {
                let e = [mu[0] + 2 * kappa[0], mu[1] + 2 * kappa[1], mu[2] + 2 * kappa[2]];
                c * self.values[self.table.index(&e).expect("heat jet order too small")]
            })
            .sum()
    }
}

/// Expansion of `Delta^l` as `sum_{|kappa| = l} (l! / kappa!) d^{2 kappa}`.
pub fn laplacian_power(n: usize, l: u32) -> Vec<(Exps, f64)> {
    spatial_indices_of_degree(n, l)
        .into_iter()
        .map(|kappa| {
            let w = factorial(l) / kappa.iter().map(|&k| factorial(k)).product::<f64>();
            (to_exps(&kappa), w)
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
enum Source {
    Heat(u32),
    Phi(u32),
}

#[derive(Clone, Debug)]
struct PhiTerm {
    zpow: u32,
    rung: u32,
    coeff: f64,
}

/// All derivatives `D_x^mu D_t^l K_jk(z, tau)` with `|mu| + 2l <= order`.
///
/// Values are laid out as `values[(term * n + j) * n + k]` where `term`
/// indexes [`StokesJet::terms`].
#[derive(Clone, Debug)]
pub struct StokesJet {
    n: usize,
    order: u32,
    terms: Vec<MultiIndexSpec>,
    heat: HeatJet,
    phi_table: MonomialTable,
    phi_recipe: Vec<Vec<PhiTerm>>,
    phi_values: Vec<f64>,
    zpow: Vec<f64>,
    b_min: f64,
    ladder: Vec<f64>,
    rungs: Vec<f64>,
    recipe_offsets: Vec<u32>,
    recipe: Vec<(Source, f64)>,
    values: Vec<f64>,
}

impl StokesJet {
    /// Evaluator for `n in {2, 3}` and maximal parabolic order `order`.
    pub fn new(n: usize, order: u32) -> Self {
        assert!(n == 2 || n == 3, "Stokes tensor supports n in {{2, 3}}");
        let terms = MultiIndexSpec::up_to_order(n, order);
        let heat = HeatJet::new(n, order.max(1));
        let phi_table = MonomialTable::new(n, order + 2);
        let herm = hermite_coefficients(order as usize + 2);
        let b_min = 0.5 * n as f64;
        let norm = (4.0 * PI).powf(-0.5 * n as f64);

        let mut phi_recipe = Vec::with_capacity(phi_table.len());
        for beta in phi_table.iter() {
            let bdeg = beta.iter().sum::<u32>();
            let mut list = Vec::new();
            if bdeg >= 2 {
                let pref = norm * (-0.5f64).powi(bdeg as i32);
                for (gi, gam) in phi_table.iter().enumerate() {
                    let mut coeff = pref;
                    for i in 0..n {
                        if gam[i] > beta[i] || (beta[i] - gam[i]) % 2 == 1 {
                            coeff = 0.0;
                            break;
                        }
                        coeff *= herm[beta[i] as usize][gam[i] as usize];
                    }
                    if coeff != 0.0 {
                        let gdeg = gam.iter().sum::<u32>();
                        // a = (n + |beta| + |gamma|) / 2, rung b = a - 1 measured from b_min
                        let rung = (bdeg + gdeg - 2) / 2;
                        list.push(PhiTerm { zpow: gi as u32, rung, coeff });
                    }
                }
            }
            phi_recipe.push(list);
        }
        let rung_count = order as usize + 3;

        let mut recipe_offsets = vec![0u32];
        let mut recipe = Vec::new();
        for term in &terms {
            let mu = to_exps(&term.mu);
            for j in 0..n {
                for k in 0..n {
                    if j == k {
                        for (kappa, c) in laplacian_power(n, term.l) {
                            let e = add(&mu, &[2 * kappa[0], 2 * kappa[1], 2 * kappa[2]]);
                            recipe.push((Source::Heat(heat.table().index(&e).unwrap() as u32), c));
                        }
                    }
                    let mut jk = mu;
                    jk[j] += 1;
                    jk[k] += 1;
                    if term.l == 0 {
                        recipe.push((Source::Phi(phi_table.index(&jk).unwrap() as u32), 1.0));
                    } else {
                        for (kappa, c) in laplacian_power(n, term.l - 1) {
                            let e = add(&jk, &[2 * kappa[0], 2 * kappa[1], 2 * kappa[2]]);
                            recipe.push((Source::Heat(heat.table().index(&e).unwrap() as u32), -c));
                        }
                    }
                    recipe_offsets.push(recipe.len() as u32);
                }
            }
        }
        let values = vec![0.0; terms.len() * n * n];
        Self {
            n,
            order,
            terms,
            heat,
            phi_values: vec![0.0; phi_table.len()],
            zpow: vec![0.0; phi_table.len()],
            phi_table,
            phi_recipe,
            b_min,
            ladder: vec![0.0; rung_count],
            rungs: vec![0.0; rung_count],
            recipe_offsets,
            recipe,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &[MultiIndexSpec] {
        &self.terms
    }

    pub fn term_index(&self, spec: &MultiIndexSpec) -> Option<usize> {
        self.terms.iter().position(|t| t == spec)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `n x n` block of term `idx`.
    pub fn block(&self, idx: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.values[idx * nn..(idx + 1) * nn]
    }

    /// Evaluate every derivative at `(z, tau)`. For `tau <= 0` all values are
    /// zero (causal convention).
    pub fn eval(&mut self, z: &[f64], tau: f64) -> Result<(), KernelError> {
        if !self.heat.eval(z, tau) {
            self.values.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let n = self.n;
        let r2: f64 = z[..n].iter().map(|v| v * v).sum();
        let s = r2 / (4.0 * tau);
        self.fill_rungs(r2, s, tau)?;

        let half = [0.5 * z[0], 0.5 * z[1], if n > 2 { 0.5 * z[2] } else { 0.0 }];
        self.phi_table.powers(&half[..n], &mut self.zpow);
        for (out, list) in self.phi_values.iter_mut().zip(&self.phi_recipe) {
            *out = list
                .iter()
                .map(|t| t.coeff * self.zpow[t.zpow as usize] * self.rungs[t.rung as usize])
                .sum();
        }

        let heat = self.heat.values();
        for (slot, w) in self.values.iter_mut().zip(self.recipe_offsets.windows(2)) {
            *slot = self.recipe[w[0] as usize..w[1] as usize]
                .iter()
                .map(|&(src, c)| match src {
                    Source::Heat(i) => c * heat[i as usize],
                    Source::Phi(i) => c * self.phi_values[i as usize],
                })
                .sum();
        }
        Ok(())
    }

    /// `rungs[i] = int_tau^inf sigma^{-(b_min + i) - 1} e^{-r^2 / 4 sigma} d sigma
    ///           = tau^{-b} g(b, S)`, `b = b_min + i`.
    fn fill_rungs(&mut self, r2: f64, s: f64, tau: f64) -> Result<(), KernelError> {
        let top = self.rungs.len() - 1;
        let b_top = self.b_min + top as f64;
        if s < b_top + 40.0 {
            scaled_lower_gamma_ladder(self.b_min, s, &mut self.ladder)?;
            let inv = 1.0 / tau;
            let mut p = tau.powf(-self.b_min);
            for (r, g) in self.rungs.iter_mut().zip(&self.ladder) {
                *r = g * p;
                p *= inv;
            }
        } else {
            // Far field: gamma(b, S) (4 / r^2)^b with the upper tail by
            // Gamma(b + 1, S) = b Gamma(b, S) + S^b e^{-S}; the tail is below
            // 1e-13 relative here but kept for completeness.
            let mut upper = upper_tail_leading(self.b_min, s);
            let q = 4.0 / r2;
            let mut qp = q.powf(self.b_min);
            for i in 0..=top {
                let b = self.b_min + i as f64;
                self.rungs[i] = (gamma_half_integer(b) - upper) * qp;
                upper = b * upper + (b * s.ln() - s).exp();
                qp *= q;
            }
        }
        Ok(())
    }
}

/// Leading asymptotic `Gamma(b, S) ~ S^{b-1} e^{-S}` used only when `S` is so
/// large that the tail is far below double precision relative to `Gamma(b)`.
fn upper_tail_leading(b: f64, s: f64) -> f64 {
    ((b - 1.0) * s.ln() - s).exp() * (1.0 + (b - 1.0) / s)
}

fn add(a: &Exps, b: &Exps) -> Exps {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
