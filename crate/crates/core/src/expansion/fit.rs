//! Least-squares polynomial fits with an optional divergence constraint, and
//! extrapolation in the fit radius with known exponents.

use super::ExpansionError;
use crate::kernels::MultiIndexSpec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Monomials `x^mu t^l` of one fit, repeated for every component. Unknowns
/// are ordered component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FitBasis {
    pub n: usize,
    pub components: usize,
    pub specs: Vec<MultiIndexSpec>,
}

impl FitBasis {
    /// All `x^mu t^l` with `|mu| + 2l <= d`.
    pub fn space_time(n: usize, components: usize, d: u32) -> Self {
        Self { n, components, specs: MultiIndexSpec::up_to_order(n, d) }
    }

    /// All `x^mu` with `|mu| <= d`.
    pub fn spatial(n: usize, components: usize, d: u32) -> Self {
        let specs = MultiIndexSpec::up_to_order(n, d).into_iter().filter(|s| s.l == 0).collect();
        Self { n, components, specs }
    }

    pub fn len(&self) -> usize {
        self.components * self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn column(&self, component: usize, spec: usize) -> usize {
        component * self.specs.len() + spec
    }

    fn position(&self, spec: &MultiIndexSpec) -> Option<usize> {
        self.specs.iter().position(|s| s == spec)
    }

    pub fn monomials(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.specs
            .iter()
            .map(|s| s.mu.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>() * t.powi(s.l as i32))
            .collect()
    }

    /// One row per monomial of the divergence: `sum_j (beta_j + 1) c_{j, beta + e_j} = 0`.
    pub fn divergence_constraints(&self) -> DMatrix<f64> {
        let rows: Vec<Vec<(usize, f64)>> = self
            .specs
            .iter()
            .filter_map(|s| {
                let row: Vec<(usize, f64)> = (0..self.n)
                    .filter_map(|j| {
                        let mut mu = s.mu.clone();
                        mu[j] += 1;
                        self.position(&MultiIndexSpec::new(mu, s.l)).map(|p| (self.column(j, p), (s.mu[j] + 1) as f64))
                    })
                    .collect();
                (!row.is_empty()).then_some(row)
            })
            .collect();
        let mut c = DMatrix::zeros(rows.len(), self.len());
        for (r, row) in rows.iter().enumerate() {
            for &(col, v) in row {
                c[(r, col)] = v;
            }
        }
        c
    }
}

/// The linear map from sampled values to fitted coefficients.
#[derive(Clone, Debug)]
pub struct Fitter {
    solve: DMatrix<f64>,
    pub condition: f64,
}

impl Fitter {
    /// Fit `basis` to values at `points` (`values[p * components + c]`),
    /// optionally restricted to divergence-free polynomials.
    pub fn new(basis: &FitBasis, points: &[(Vec<f64>, f64)], constrained: bool, max_condition: f64) -> Result<Self, ExpansionError> {
        let nc = basis.components;
        let nb = basis.specs.len();
        if points.len() * nc < basis.len() {
            return Err(ExpansionError::TooFewSamples { radius: f64::NAN, samples: points.len(), unknowns: basis.len() });
        }
        let mut a = DMatrix::zeros(points.len() * nc, basis.len());
        for (p, (x, t)) in points.iter().enumerate() {
            let row = basis.monomials(x, *t);
            for c in 0..nc {
                for (m, v) in row.iter().enumerate() {
                    a[(p * nc + c, c * nb + m)] = *v;
                }
            }
        }
        let null = if constrained && nc == basis.n { Some(null_space(&basis.divergence_constraints())) } else { None };
        let reduced = match &null {
            Some(z) => &a * z,
            None => a,
        };
        let svd = reduced.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= max_condition) {
            return Err(ExpansionError::IllConditioned { radius: f64::NAN, condition, samples: points.len() });
        }
        let pinv = svd.pseudo_inverse(smax * 1e-14).map_err(|e| ExpansionError::Shape(e.to_string()))?;
        let solve = match null {
            Some(z) => z * pinv,
            None => pinv,
        };
        Ok(Self { solve, condition })
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (&self.solve * DVector::from_column_slice(values)).iter().copied().collect()
    }
}

/// Orthonormal basis of `{c : C c = 0}` as columns.
fn null_space(c: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = c.ncols();
    if c.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let eig = SymmetricEigen::new(c.transpose() * c);
    let top = eig.eigenvalues.amax().max(1.0);
    let keep: Vec<usize> = (0..cols).filter(|&i| eig.eigenvalues[i].abs() < 1e-10 * top).collect();
    DMatrix::from_fn(cols, keep.len(), |r, k| eig.eigenvectors[(r, keep[k])])
}

/// Limit `c` of `v(r) = c + sum_j a_j r^{e_j}` from values at several radii.
/// Uses as many exponents as the data allow (the first `radii - 1`), in the
/// least-squares sense when more radii are given.
pub fn extrapolate(radii: &[f64], values: &[f64], exponents: &[f64]) -> f64 {
    let m = radii.len();
    let e = &exponents[..exponents.len().min(m.saturating_sub(1))];
    if e.is_empty() {
        return values.iter().sum::<f64>() / m as f64;
    }
    let scale = radii.iter().copied().fold(0.0, f64::max);
    let v = DMatrix::from_fn(m, e.len() + 1, |i, j| if j == 0 { 1.0 } else { (radii[i] / scale).powf(e[j - 1]) });
    let b = DVector::from_column_slice(values);
    let sol = v.svd(true, true).solve(&b, 1e-15).expect("svd solve with both factors");
    sol[0]
}

/// Weights `w` with `extrapolate(radii, values, e) = sum w_i values_i`.
pub fn extrapolation_weights(radii: &[f64], exponents: &[f64]) -> Vec<f64> {
    (0..radii.len())
        .map(|i| {
            let mut unit = vec![0.0; radii.len()];
            unit[i] = 1.0;
            extrapolate(radii, &unit, exponents)
        })
        .collect()
}
