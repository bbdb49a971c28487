//! Time-sliced vector polynomials and their JSON form.

use crate::kernels::MultiIndexSpec;
use crate::poly::{Poly, SpaceTimePolynomial};
use serde::{Deserialize, Serialize};

/// Coefficients of `x^alpha` (plain, not divided by `alpha!`) at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySlice {
    pub t: f64,
    /// One polynomial in `x` per component, with `l = 0` in every term.
    pub components: Vec<Poly>,
}

impl PolySlice {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x, 0.0)).collect()
    }

    pub fn coefficient(&self, component: usize, mu: &[u32]) -> f64 {
        self.components[component].terms.get(&MultiIndexSpec::spatial(mu.to_vec())).copied().unwrap_or(0.0)
    }
}

/// `P_{d,t}`: an `n`-vector of degree-`d` polynomials in `x` stored per time
/// slice, with an optional pressure companion `R` on the same slices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolynomialExport", try_from = "PolynomialExport")]
pub struct VectorPolynomial {
    pub n: usize,
    pub degree: u32,
    pub slices: Vec<PolySlice>,
    pub pressure: Option<Vec<PolySlice>>,
}

impl VectorPolynomial {
    pub fn zero(n: usize, degree: u32, times: &[f64]) -> Self {
        let slices = times.iter().map(|&t| PolySlice { t, components: vec![Poly::zero(n); n] }).collect();
        Self { n, degree, slices, pressure: None }
    }

    /// Slices of a polynomial in `(x, t)`, truncated to spatial degree `degree`.
    pub fn from_space_time(p: &SpaceTimePolynomial, degree: u32, times: &[f64]) -> Self {
        let slices = times
            .iter()
            .map(|&t| {
                let components = p
                    .slice_at(t)
                    .into_iter()
                    .map(|c| Poly { n: c.n, terms: c.terms.into_iter().filter(|(s, _)| s.spatial_order() <= degree).collect() })
                    .collect();
                PolySlice { t, components }
            })
            .collect();
        Self { n: p.n, degree, slices, pressure: None }
    }

    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    /// The slice stored at `t` (matched to within rounding).
    pub fn slice_at(&self, t: f64) -> Option<&PolySlice> {
        self.slices.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        let sc = |v: &Vec<PolySlice>| v.iter().map(|s| PolySlice { t: s.t, components: s.components.iter().map(|p| p.scale(k)).collect() }).collect();
        Self { n: self.n, degree: self.degree, slices: sc(&self.slices), pressure: self.pressure.as_ref().map(sc) }
    }

    /// Largest absolute coefficient over all slices and components.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.slices.iter().flat_map(|s| &s.components).fold(0.0, |a, p| a.max(p.max_abs_coefficient()))
    }

    /// Largest coefficient of `sum_j d_j P^j` over all slices.
    pub fn divergence_max(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| {
                let mut div = Poly::zero(self.n);
                for (j, p) in s.components.iter().enumerate() {
                    div = div.add(&p.dx(j));
                }
                div.max_abs_coefficient()
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference on common slices; `None` when the slice
    /// times differ.
    pub fn max_difference(&self, other: &Self) -> Option<f64> {
        if self.slices.len() != other.slices.len() {
            return None;
        }
        let mut m = 0.0f64;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
                return None;
            }
            for (p, q) in a.components.iter().zip(&b.components) {
                m = m.max(p.add(&q.scale(-1.0)).max_abs_coefficient());
            }
        }
        Some(m)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// One row per `(component, multi-index, t)`.
    pub fn rows(&self) -> Vec<CoefficientRow> {
        let mut out = Vec::new();
        for s in &self.slices {
            for (c, p) in s.components.iter().enumerate() {
                for (spec, v) in &p.terms {
                    out.push(CoefficientRow { t: s.t, component: c, multi_index: spec.mu.clone(), value: *v });
                }
            }
        }
        out
    }
}

/// Flat coefficient record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub t: f64,
    pub component: usize,
    pub multi_index: Vec<u32>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub component: usize,
    pub multi_index: Vec<u32>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceExport {
    pub t: f64,
    pub coefficients: Vec<CoefficientEntry>,
}

/// `{degree, dimension, slices: [{t, coefficients: [...]}], pressure}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialExport {
    pub degree: u32,
    pub dimension: usize,
    pub slices: Vec<SliceExport>,
    #[serde(default)]
    pub pressure: Option<Vec<SliceExport>>,
}

fn export_slices(v: &[PolySlice]) -> Vec<SliceExport> {
    v.iter()
        .map(|s| SliceExport {
            t: s.t,
            coefficients: s
                .components
                .iter()
                .enumerate()
                .flat_map(|(c, p)| p.terms.iter().map(move |(k, v)| CoefficientEntry { component: c, multi_index: k.mu.clone(), value: *v }))
                .collect(),
        })
        .collect()
}

fn import_slices(n: usize, components: usize, v: Vec<SliceExport>) -> Result<Vec<PolySlice>, String> {
    v.into_iter()
        .map(|s| {
            let mut comps = vec![Poly::zero(n); components];
            for e in s.coefficients {
                if e.component >= components || e.multi_index.len() != n {
                    return Err(format!("coefficient {:?} of component {} does not fit dimension {n}", e.multi_index, e.component));
                }
                comps[e.component].add_term(MultiIndexSpec::spatial(e.multi_index), e.value);
            }
            Ok(PolySlice { t: s.t, components: comps })
        })
        .collect()
}

impl From<VectorPolynomial> for PolynomialExport {
    fn from(p: VectorPolynomial) -> Self {
        Self { degree: p.degree, dimension: p.n, slices: export_slices(&p.slices), pressure: p.pressure.as_deref().map(export_slices) }
    }
}

impl TryFrom<PolynomialExport> for VectorPolynomial {
    type Error = String;

    fn try_from(e: PolynomialExport) -> Result<Self, String> {
        let n = e.dimension;
        let slices = import_slices(n, n, e.slices)?;
        let pressure = e.pressure.map(|p| import_slices(n, 1, p)).transpose()?;
        let p = Self { n, degree: e.degree, slices, pressure };
        let over = p.slices.iter().flat_map(|s| &s.components).any(|c| c.spatial_degree() > e.degree);
        if over {
            return Err(format!("coefficients beyond degree {}", e.degree));
        }
        Ok(p)
    }
}
