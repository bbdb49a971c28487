//! Dyadic space-time shells and quasi-random supremum sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Shells `{2^u rho < |(y, s)| < 2^{u+1} rho}` for `u = 1..=count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicShellDecomposition {
    pub base: f64,
    pub count: usize,
}

impl DyadicShellDecomposition {
    pub fn new(base: f64, count: usize) -> Self {
        assert!(base > 0.0, "shell base radius must be positive");
        Self { base, count }
    }

    /// Shells whose outer radii are `largest, largest / 2, ...` (`count` of them).
    pub fn with_outer_radii(largest: f64, count: usize) -> Self {
        Self::new(largest * 0.5f64.powi(count as i32 + 1), count)
    }

    /// `(inner, outer)` for each shell, innermost first.
    pub fn shells(&self) -> Vec<(f64, f64)> {
        (1..=self.count)
            .map(|u| (self.base * 2f64.powi(u as i32), self.base * 2f64.powi(u as i32 + 1)))
            .collect()
    }
}

/// Which time half of each shell to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShellHalf {
    /// `s < 0`, the half relevant for one-sided cylinders.
    #[default]
    Past,
    Future,
    Full,
}

/// Unit-cube samples reused for every shell: a Kronecker sequence with the
/// generalised golden ratio, shifted by a seeded random offset.
#[derive(Clone, Debug)]
pub struct ShellSampler {
    n: usize,
    half: ShellHalf,
    unit: Vec<[f64; 5]>,
}

impl ShellSampler {
    pub fn new(n: usize, samples: usize, half: ShellHalf, seed: u64) -> Self {
        assert!((1..=3).contains(&n), "shell sampling supports n in 1..=3");
        let dims = 2 + (n - 1) + usize::from(half == ShellHalf::Full);
        let phi = generalized_golden(dims);
        let alpha: Vec<f64> = (1..=dims).map(|i| phi.powi(-(i as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
        let unit = (0..samples)
            .map(|k| {
                let mut u = [0.0; 5];
                for i in 0..dims {
                    u[i] = (shift[i] + alpha[i] * (k + 1) as f64).fract();
                }
                u
            })
            .collect();
        Self { n, half, unit }
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Map the unit samples into the shell `a < |(y, s)| < b`.
    pub fn points(&self, a: f64, b: f64) -> Vec<(Vec<f64>, f64)> {
        let n = self.n;
        self.unit
            .iter()
            .map(|u| {
                let rho = a + (b - a) * u[0];
                let c = u[1];
                let mut omega = [0.0; 3];
                match n {
                    1 => omega[0] = if u[2] < 0.5 { -1.0 } else { 1.0 },
                    2 => {
                        let th = 2.0 * PI * u[2];
                        omega[0] = th.cos();
                        omega[1] = th.sin();
                    }
                    _ => {
                        let z = 2.0 * u[2] - 1.0;
                        let st = (1.0 - z * z).max(0.0).sqrt();
                        let th = 2.0 * PI * u[3];
                        omega = [st * th.cos(), st * th.sin(), z];
                    }
                }
                let dims = 2 + (n - 1);
                let sign = match self.half {
                    ShellHalf::Past => -1.0,
                    ShellHalf::Future => 1.0,
                    ShellHalf::Full => {
                        if u[dims] < 0.5 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                let y: Vec<f64> = omega[..n].iter().map(|w| rho * c * w).collect();
                (y, sign * rho * rho * (1.0 - c * c))
            })
            .collect()
    }
}

/// Root of `x^{d+1} = x + 1`; its inverse powers give a low-discrepancy
/// additive recurrence in `d` dimensions.
fn generalized_golden(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// Per-shell supremum record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSup {
    pub shell_index: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub sup_value: f64,
}

/// Sampled `sup |f|` on every shell. `f` receives `(y, s)`; non-finite
/// values are propagated into the result so callers can detect them.
pub fn shell_supremum<F>(f: F, shells: &DyadicShellDecomposition, sampler: &ShellSampler) -> Vec<ShellSup>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    shells
        .shells()
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let pts = sampler.points(a, b);
            let sup = pts
                .par_iter()
                .map(|(y, s)| f(y, *s).abs())
                .reduce(|| 0.0, |p, q| if p.is_nan() || q.is_nan() { f64::NAN } else { p.max(q) });
            ShellSup { shell_index: i + 1, inner_radius: a, outer_radius: b, sup_value: sup }
        })
        .collect()
}

/// Write shells as CSV with columns `shell_index, inner_radius, outer_radius, sup_value`.
pub fn write_shell_csv<W: Write>(out: W, rows: &[ShellSup]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a shell CSV written by [`write_shell_csv`].
pub fn read_shell_csv<R: std::io::Read>(input: R) -> Result<Vec<ShellSup>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
