use super::*;
use crate::kernels::{heat_kernel, stokes_kernel};
use proptest::prelude::*;
use std::f64::consts::PI;

fn cyl(x: Vec<f64>, t: f64, r: f64) -> ParabolicCylinder {
    ParabolicCylinder::new(SpaceTimePoint::new(x, t), r).unwrap()
}

fn slope(rows: &[ShellSup]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.outer_radius.ln(), r.sup_value.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[test]
fn membership_is_one_sided() {
    let q = cyl(vec![0.5, 0.0], 1.0, 0.5);
    assert!(q.contains(&[0.6, 0.1], 0.9));
    assert!(!q.contains(&[0.6, 0.1], 1.01));
    assert!(!q.contains(&[0.6, 0.1], 0.7));
    assert!(!q.contains(&[1.1, 0.0], 0.9));
    assert!(ParabolicCylinder::centered(2, 0.0).is_err());
}

#[test]
fn volume_is_ball_times_height() {
    for &r in &[1.0, 0.3, 2.0] {
        let q = cyl(vec![0.2, -0.1], 0.4, r);
        let v = integrate_cylinder(&q, &CylinderScheme::default(), |_, _| 1.0).unwrap();
        assert!((v - PI * r.powi(4)).abs() < 1e-8 * r.powi(4).max(1.0), "r={r}: {v}");
    }
    let q = cyl(vec![0.0; 3], 0.0, 0.7);
    let v = integrate_cylinder(&q, &CylinderScheme::default(), |_, _| 1.0).unwrap();
    assert!((v - q.volume()).abs() < 1e-10);
}

#[test]
fn odd_integrands_vanish() {
    let q = ParabolicCylinder::centered(2, 1.0).unwrap();
    let v = integrate_cylinder(&q, &CylinderScheme::default(), |y, s| y[0] * (1.0 + s * s)).unwrap();
    assert!(v.abs() < 1e-10);
}

#[test]
fn polynomials_are_integrated_exactly() {
    // int over Q_r(0,0) of y1^2 s = int_{-r^2}^0 s ds * int_{B_r} y1^2 = (-r^4/2)(pi r^4 / 4) in 2D
    let q = ParabolicCylinder::centered(2, 0.8).unwrap();
    let v = integrate_cylinder(&q, &CylinderScheme::default(), |y, s| y[0] * y[0] * s).unwrap();
    let want = -0.8f64.powi(4) / 2.0 * PI * 0.8f64.powi(4) / 4.0;
    assert!((v - want).abs() < 1e-12, "{v} vs {want}");
}

fn heat_mass_oracle() -> f64 {
    // int_0^1 (1 - exp(-1 / 4 tau)) d tau; the integrand is smooth on [0, 1].
    let g = Gauss::new(30);
    (0..64).map(|k| g.integrate(k as f64 / 64.0, (k + 1) as f64 / 64.0, |tau| 1.0 - (-0.25 / tau).exp())).sum()
}

#[test]
fn heat_kernel_over_unit_cylinder() {
    let want = heat_mass_oracle();
    let q = ParabolicCylinder::centered(2, 1.0).unwrap();
    let f = |y: &[f64], s: f64| heat_kernel(&SpaceTimePoint::new(y.to_vec(), -s), 2);
    let direct = integrate_cylinder(&q, &CylinderScheme::default().refined(), f).unwrap();
    assert!((direct - want).abs() < 1e-6, "{direct} vs {want}");
    let ex = integrate_cylinder_excised(&q, &CylinderScheme::default(), None, f).unwrap();
    assert!((ex.value - want).abs() < 1e-6, "{} vs {want}", ex.value);
    assert!((ex.exponent - 2.0).abs() < 0.05, "estimated exponent {}", ex.exponent);
    let known = integrate_cylinder_excised(&q, &CylinderScheme::default(), Some(2.0), f).unwrap();
    assert!((known.value - want).abs() < 1e-6);
}

#[test]
fn singular_samples_are_reported() {
    let q = ParabolicCylinder::centered(2, 1.0).unwrap();
    let r = integrate_cylinder(&q, &CylinderScheme::default(), |y, _| if y[0] > 0.5 { f64::INFINITY } else { 0.0 });
    assert!(matches!(r, Err(QuadratureError::NonFinite { .. })));
}

#[test]
fn additive_over_time_slabs() {
    let f = |y: &[f64], s: f64| (y[0] - 0.3 * y[1]).powi(3) + s * s * y[1] + 1.0;
    let x0 = [0.1, 0.2];
    let q = cyl(x0.to_vec(), 0.5, 0.9);
    let whole = integrate_cylinder(&q, &CylinderScheme::default(), f).unwrap();
    let h = 0.5 - 0.81;
    let a = integrate_slab(&x0, 0.9, h, 0.1, 8, 16, f).unwrap();
    let b = integrate_slab(&x0, 0.9, 0.1, 0.5, 8, 16, f).unwrap();
    assert!((whole - a - b).abs() < 1e-12 * whole.abs().max(1.0));
}

#[test]
fn lq_norm_of_constant() {
    let q = cyl(vec![0.0, 0.0], 0.0, 0.5);
    let v = lq_norm_on_cylinder(&q, &CylinderScheme::default(), 3.0, |_, _| 2.0).unwrap();
    assert!((v - 2.0 * q.volume().powf(1.0 / 3.0)).abs() < 1e-12);
    assert!(lq_norm_on_cylinder(&q, &CylinderScheme::default(), 0.5, |_, _| 1.0).is_err());
}

#[test]
fn lq_norm_scales_homogeneously() {
    let beta = 0.7;
    let qexp = 3.0;
    let norms: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&r| {
            let q = ParabolicCylinder::centered(2, r).unwrap();
            lq_norm_on_cylinder(&q, &CylinderScheme::default(), qexp, |y, s| crate::point::parabolic_norm(y, s).powf(beta)).unwrap()
        })
        .collect();
    let want = beta + 4.0 / qexp;
    for w in norms.windows(2) {
        assert!(((w[0] / w[1]).log2() - want).abs() < 0.02);
    }
}

#[test]
fn shell_sup_of_norm_is_outer_radius() {
    let shells = DyadicShellDecomposition::with_outer_radii(0.5, 5);
    let outer: Vec<f64> = shells.shells().iter().map(|s| s.1).collect();
    assert!((outer[4] - 0.5).abs() < 1e-15 && (outer[0] - 0.5f64.powi(5)).abs() < 1e-15);
    for n in 1..=3 {
        let sampler = ShellSampler::new(n, 4096, ShellHalf::Full, 7);
        let rows = shell_supremum(|y, s| crate::point::parabolic_norm(y, s), &shells, &sampler);
        for r in &rows {
            assert!(r.sup_value <= r.outer_radius && r.sup_value > 0.995 * r.outer_radius);
        }
    }
}

#[test]
fn shell_sup_tracks_homogeneity() {
    let shells = DyadicShellDecomposition::with_outer_radii(0.5, 5);
    let sampler = ShellSampler::new(2, 4096, ShellHalf::Past, 1);
    let rows = shell_supremum(|y, s| crate::point::parabolic_norm(y, s).powf(2.5), &shells, &sampler);
    for w in rows.windows(2) {
        assert!(((w[1].sup_value / w[0].sup_value).log2() - 2.5).abs() < 0.05);
    }
}

#[test]
fn stokes_kernel_shell_slope() {
    let shells = DyadicShellDecomposition::with_outer_radii(0.5, 5);
    let sampler = ShellSampler::new(2, 4096, ShellHalf::Future, 3);
    let rows = shell_supremum(
        |y, s| if s > 0.0 { stokes_kernel(0, 0, &SpaceTimePoint::new(y.to_vec(), s), 2).unwrap() } else { 0.0 },
        &shells,
        &sampler,
    );
    assert!((slope(&rows) + 2.0).abs() < 0.1, "slope {}", slope(&rows));
}

#[test]
fn sup_is_monotone_in_sample_count() {
    let shells = DyadicShellDecomposition::with_outer_radii(1.0, 3);
    let f = |y: &[f64], s: f64| (7.0 * y[0]).sin() * (3.0 * s).cos() + y[1];
    let mut prev = vec![0.0; 3];
    for k in [256, 512, 1024, 2048] {
        let rows = shell_supremum(f, &shells, &ShellSampler::new(2, k, ShellHalf::Past, 11));
        for (p, r) in prev.iter_mut().zip(&rows) {
            assert!(r.sup_value >= *p);
            *p = r.sup_value;
        }
    }
}

#[test]
fn shell_csv_roundtrip() {
    let shells = DyadicShellDecomposition::new(0.01, 4);
    let rows = shell_supremum(|y, s| y[0] + s, &shells, &ShellSampler::new(2, 64, ShellHalf::Full, 0));
    let mut buf = Vec::new();
    write_shell_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("shell_index,inner_radius,outer_radius,sup_value"));
    assert_eq!(read_shell_csv(&buf[..]).unwrap(), rows);
}

#[test]
fn sampling_is_deterministic() {
    let a = ShellSampler::new(3, 100, ShellHalf::Full, 42).points(0.1, 0.2);
    let b = ShellSampler::new(3, 100, ShellHalf::Full, 42).points(0.1, 0.2);
    assert_eq!(a, b);
    let c = ShellSampler::new(3, 100, ShellHalf::Full, 43).points(0.1, 0.2);
    assert_ne!(a, c);
}

proptest! {
    #[test]
    fn integration_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1.0f64..5.0) {
        let q = ParabolicCylinder::centered(2, 0.6).unwrap();
        let sch = CylinderScheme { radial: 6, cosine: 6, azimuthal: 12, panels: 3, rim_panels: 3, outer: 6 };
        let f = |y: &[f64], s: f64| (k * y[0]).sin() + s;
        let g = |y: &[f64], s: f64| (y[1] * s).exp();
        let lhs = integrate_cylinder(&q, &sch, |y, s| a * f(y, s) + b * g(y, s)).unwrap();
        let rhs = a * integrate_cylinder(&q, &sch, f).unwrap() + b * integrate_cylinder(&q, &sch, g).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn lq_norm_is_monotone_in_domain(r1 in 0.1f64..1.0, dr in 0.0f64..0.5) {
        let sch = CylinderScheme::default();
        let f = |y: &[f64], s: f64| 1.0 + y[0] * y[0] + s.abs();
        let n1 = lq_norm_on_cylinder(&ParabolicCylinder::centered(2, r1).unwrap(), &sch, 2.0, f).unwrap();
        let n2 = lq_norm_on_cylinder(&ParabolicCylinder::centered(2, r1 + dr).unwrap(), &sch, 2.0, f).unwrap();
        prop_assert!(n2 >= n1 * (1.0 - 1e-12));
    }
}
