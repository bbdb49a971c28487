use super::*;
use crate::kernels::{heat_kernel, stokes_kernel};
use crate::point::SpaceTimePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const L: f64 = PI;

fn max_diff(a: &SpectralGrid, b: &SpectralGrid) -> f64 {
    a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Random trigonometric polynomial with modes |k_i| <= 4, `components` fields.
fn random_field(n: usize, points: usize, components: usize, seed: u64, mean_free: bool) -> SpectralGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(usize, [f64; 3], f64, f64)> = (0..12 * components)
        .map(|i| {
            let mut k = [0.0; 3];
            for a in 0..n {
                k[a] = rng.gen_range(-4i32..=4) as f64;
            }
            (i % components, k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let c0 = if mean_free { 0.0 } else { 0.7 };
    SpectralGrid::from_fn(n, L, points, components, |x, out| {
        for &(c, k, a, ph) in &modes {
            let arg: f64 = (0..n).map(|i| k[i] * x[i] * PI / L).sum::<f64>() + ph;
            if k.iter().any(|&v| v != 0.0) || !mean_free {
                out[c] += a * arg.cos();
            }
        }
        out[0] += c0;
    })
    .unwrap()
}

#[test]
fn constants_are_annihilated() {
    let g = SpectralGrid::from_fn(2, L, 16, 1, |_, o| o[0] = 3.5).unwrap();
    for j in 0..2 {
        assert!(riesz_transform(j, &g).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn sum_of_squared_riesz_is_minus_identity() {
    for n in 1..=3 {
        let g = random_field(n, 16, 1, n as u64, true);
        let mut acc = SpectralGrid::zeros(n, L, 16, 1).unwrap();
        for j in 0..n {
            let r = riesz_transform(j, &riesz_transform(j, &g).unwrap()).unwrap();
            acc.values.iter_mut().zip(&r.values).for_each(|(a, v)| *a += v);
        }
        acc.values.iter_mut().zip(&g.values).for_each(|(a, v)| *a += v);
        assert!(acc.max_abs() < 1e-10 * g.max_abs().max(1.0), "n={n}: {}", acc.max_abs());
    }
}

#[test]
fn single_mode_riesz() {
    let ext = 2.0;
    let g = SpectralGrid::from_fn(2, ext, 32, 1, |x, o| o[0] = (PI * x[0] / ext).sin()).unwrap();
    let want = SpectralGrid::from_fn(2, ext, 32, 1, |x, o| o[0] = -(PI * x[0] / ext).cos()).unwrap();
    assert!(max_diff(&riesz_transform(0, &g).unwrap(), &want) < 1e-13);
    assert!(riesz_transform(1, &g).unwrap().max_abs() < 1e-13);
}

#[test]
fn riesz_transforms_commute() {
    let g = random_field(3, 16, 1, 5, false);
    let a = riesz_transform(0, &riesz_transform(2, &g).unwrap()).unwrap();
    let b = riesz_transform(2, &riesz_transform(0, &g).unwrap()).unwrap();
    assert!(max_diff(&a, &b) < 1e-12);
}

#[test]
fn parseval_roundtrip() {
    let g = random_field(2, 32, 1, 8, false);
    let fft = FftNd::new(2, 32);
    let mut d: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut d);
    let energy: f64 = g.values.iter().map(|v| v * v).sum();
    let spec: f64 = d.iter().map(|v| v.norm_sqr()).sum::<f64>() / d.len() as f64;
    assert!((energy - spec).abs() < 1e-12 * energy);
    fft.inverse(&mut d);
    let back: f64 = d.iter().zip(&g.values).fold(0.0, |m, (a, b)| m.max((a.re - b).abs() + a.im.abs()));
    assert!(back < 1e-12 * g.max_abs());
}

fn stream(x: &[f64]) -> [f64; 3] {
    // psi = sin(x) cos(2 y) + cos(3 x + y); returns (psi, d1 psi, d2 psi)
    let (a, b) = (x[0], x[1]);
    [
        a.sin() * (2.0 * b).cos() + (3.0 * a + b).cos(),
        a.cos() * (2.0 * b).cos() - 3.0 * (3.0 * a + b).sin(),
        -2.0 * a.sin() * (2.0 * b).sin() - (3.0 * a + b).sin(),
    ]
}

#[test]
fn leray_fixes_solenoidal_and_kills_gradients() {
    let sol = SpectralGrid::from_fn(2, L, 32, 2, |x, o| {
        let s = stream(x);
        o[0] = s[2];
        o[1] = -s[1];
    })
    .unwrap();
    assert!(max_diff(&leray_project(&sol).unwrap(), &sol) < 1e-10);
    let grad = SpectralGrid::from_fn(2, L, 32, 2, |x, o| {
        let s = stream(x);
        o[0] = s[1];
        o[1] = s[2];
    })
    .unwrap();
    assert!(leray_project(&grad).unwrap().max_abs() < 1e-10);
}

#[test]
fn leray_is_idempotent_and_solenoidal() {
    for n in 2..=3 {
        let f = random_field(n, 16, n, 40 + n as u64, false);
        let p1 = leray_project(&f).unwrap();
        let p2 = leray_project(&p1).unwrap();
        assert!(max_diff(&p1, &p2) < 1e-12 * f.max_abs());
        assert!(divergence(&p1).unwrap().max_abs() < 1e-9 * f.max_abs());
        // f = leray(f) + grad p
        let gp = gradient(&pressure_from_forcing(&f).unwrap()).unwrap();
        let mut sum = p1.clone();
        sum.values.iter_mut().zip(&gp.values).for_each(|(a, b)| *a += b);
        assert!(max_diff(&sum, &f) < 1e-9 * f.max_abs());
    }
}

#[test]
fn pressure_inverts_gradients() {
    let grad = SpectralGrid::from_fn(2, L, 32, 2, |x, o| {
        let s = stream(x);
        o[0] = s[1];
        o[1] = s[2];
    })
    .unwrap();
    let phi = SpectralGrid::from_fn(2, L, 32, 1, |x, o| o[0] = stream(x)[0]).unwrap();
    let p = pressure_from_forcing(&grad).unwrap();
    assert!(max_diff(&p, &phi) < 1e-10);
    let sol = SpectralGrid::from_fn(2, L, 32, 2, |x, o| {
        let s = stream(x);
        o[0] = s[2];
        o[1] = -s[1];
    })
    .unwrap();
    assert!(pressure_from_forcing(&sol).unwrap().max_abs() < 1e-10);
}

#[test]
fn pressure_poisson_consistency() {
    let f = random_field(2, 32, 2, 77, true);
    let p = pressure_from_forcing(&f).unwrap();
    let lhs = laplacian(&p);
    let rhs = divergence(&f).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-9 * rhs.max_abs());
}

#[test]
fn shape_errors() {
    let g = SpectralGrid::zeros(2, L, 8, 2).unwrap();
    assert!(riesz_transform(0, &g).is_err());
    assert!(pressure_from_forcing(&SpectralGrid::zeros(2, L, 8, 1).unwrap()).is_err());
    assert!(SpectralGrid::zeros(2, L, 7, 1).is_err());
    assert!(spectral_stokes_kernel_oracle(0, 0, 0.0, 2, 16.0, 32, 1.0).is_err());
}

fn interior_agreement(n: usize, extent: f64, points: usize, t: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let o = spectral_stokes_kernel_oracle(j, k, t, n, extent, points, 1.0).unwrap();
            let space = o.grid.space();
            for p in 0..space.len() {
                let x = space.point(p);
                if x.iter().map(|v| v * v).sum::<f64>() > 1.0 {
                    continue;
                }
                let direct = stokes_kernel(j, k, &SpaceTimePoint::new(x, t), n).unwrap();
                worst = worst.max((direct - o.grid.values[p]).abs());
                scale = scale.max(direct.abs());
            }
        }
    }
    worst / scale
}

#[test]
fn kernel_oracle_agrees_in_2d() {
    let rel = interior_agreement(2, 16.0, 256, 0.1);
    assert!(rel < 1e-5, "relative disagreement {rel}");
}

#[test]
fn kernel_oracle_agrees_in_3d() {
    let rel = interior_agreement(3, 8.0, 128, 0.1);
    assert!(rel < 1e-5, "relative disagreement {rel}");
}

#[test]
fn kernel_oracle_trace_and_divergence() {
    let (n, t) = (2, 0.1);
    let comps: Vec<SpectralGrid> = [(0, 0), (0, 1), (1, 1)]
        .iter()
        .map(|&(j, k)| spectral_stokes_kernel_oracle(j, k, t, n, 16.0, 128, 0.5).unwrap().grid)
        .collect();
    let space = comps[0].space();
    let mut worst = 0.0f64;
    for p in 0..space.len() {
        let x = space.point(p);
        let gam = heat_kernel(&SpaceTimePoint::new(x, t), n);
        worst = worst.max((comps[0].values[p] + comps[2].values[p] - gam).abs());
    }
    assert!(worst < 1e-6, "trace error {worst}");
    for col in [(0usize, 1usize), (1, 2)] {
        // column k: sum_j d_j K_jk
        let mut div = derivative(0, &comps[col.0]);
        let d1 = derivative(1, &comps[col.1]);
        div.values.iter_mut().zip(&d1.values).for_each(|(a, b)| *a += b);
        assert!(div.max_abs() < 1e-8, "divergence {}", div.max_abs());
    }
}

#[test]
fn kernel_oracle_warns_on_small_boxes() {
    assert!(spectral_stokes_kernel_oracle(0, 0, 0.1, 2, 4.0, 32, 1.0).unwrap().warning.is_some());
    assert!(spectral_stokes_kernel_oracle(0, 0, 0.1, 2, 16.0, 32, 0.5).unwrap().warning.is_none());
}
