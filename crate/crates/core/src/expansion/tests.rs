use super::*;
use crate::grid::{Provenance, SpatialGrid, TimeGrid};
use proptest::prelude::*;

fn grid_of(p: &SpaceTimePolynomial, points: usize, times: TimeGrid) -> GridField {
    let space = SpatialGrid::new(p.n, 1.0, points).unwrap();
    GridField::from_fn(p.n, space, times, Provenance::default(), |x, t, out| p.eval(x, t, out))
}

fn opts(radii: Vec<f64>, model: ExponentModel) -> ExtractionOptions {
    ExtractionOptions { radii, samples: 48, model, constrained: true, max_condition: 1e8, inner_fraction: 0.1, seed: 7 }
}

fn eval_poly(p: &SpaceTimePolynomial) -> impl FnMut(&[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>, String> + '_ {
    move |pts| Ok(pts.iter().map(|(x, t)| p.eval_vec(x, *t)).collect())
}

#[test]
fn exponent_model_lists_distinct_positive_powers() {
    let m = ExponentModel::vanishing(2, 0.5, 2);
    assert_eq!(m.exponents(2, 4), vec![0.5, 1.0, 1.5, 2.0]);
    assert_eq!(m.exponents(0, 3), vec![2.5, 3.0, 3.5]);
    assert_eq!(ExponentModel::smooth(3).exponents(1, 2), vec![3.0, 4.0]);
}

#[test]
fn space_time_extraction_is_exact_on_polynomials() {
    for n in [2, 3] {
        let b = caloric_background(n, 2, &[1.0, -0.5, 0.25, 2.0]);
        let o = opts(vec![0.5, 0.25, 0.125], ExponentModel::vanishing(2, 0.5, 1));
        let ex = extract_space_time(n, 2, eval_poly(&b), &o).unwrap();
        let err = ex.polynomial.add(&b.scale(-1.0)).max_abs_coefficient();
        assert!(err < 1e-10, "n={n} err={err}");
        assert!(ex.polynomial.divergence().max_abs_coefficient() < 1e-10);
    }
}

#[test]
fn space_time_extraction_removes_vanishing_part() {
    // u = B + |(x,t)|^{2.5} (1, 1) + smooth cubic: the limit recovers B
    let b = caloric_background(2, 2, &[1.0, 0.3]);
    let f = |pts: &[(Vec<f64>, f64)]| -> Result<Vec<Vec<f64>>, String> {
        Ok(pts
            .iter()
            .map(|(x, t)| {
                let r = crate::point::parabolic_norm(x, *t);
                let h = r.powf(2.5) + x[0].powi(3) - x[1] * *t;
                let bv = b.eval_vec(x, *t);
                vec![bv[0] + h, bv[1] - 2.0 * h]
            })
            .collect())
    };
    let radii: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let o = ExtractionOptions { constrained: false, ..opts(radii, ExponentModel::vanishing(2, 0.5, 1)) };
    let ex = extract_space_time(2, 2, f, &o).unwrap();
    let err = ex.polynomial.add(&b.scale(-1.0)).max_abs_coefficient();
    assert!(err < 1e-8, "{err}");
    // a single fit without extrapolation is far off
    let raw = ex.per_radius[0].add(&b.scale(-1.0)).max_abs_coefficient();
    assert!(raw > 1e-2);
}

#[test]
fn slice_extraction_is_exact_and_a_projection() {
    let b = caloric_background(2, 3, &[0.7, -1.1, 0.4]);
    let u = grid_of(&b, 32, TimeGrid::past(0.2, 3));
    let so = SliceOptions::smooth(3);
    let p = extract_polynomial(&u, 3, 1, &[0.9, 0.6, 0.45], &so).unwrap();
    let t = u.header.time.time(1);
    let want = VectorPolynomial::from_space_time(&b, 3, &[t]);
    assert!(p.max_difference(&want).unwrap() < 1e-8);
    assert!(p.divergence_max() < 1e-10);
    // re-extract from a sampling of the fit
    let slice = p.slices[0].clone();
    let again_field = GridField::from_fn(2, u.header.space.clone(), TimeGrid::single(t), Provenance::default(), |x, _, out| {
        out.copy_from_slice(&slice.eval(x))
    });
    let again = extract_polynomial(&again_field, 3, 0, &[0.9, 0.6, 0.45], &so).unwrap();
    assert!(again.max_difference(&p).unwrap() < 1e-12);
}

#[test]
fn both_fit_modes_keep_solenoidal_inputs_solenoidal() {
    let b = caloric_background(2, 2, &[1.0, 2.0]);
    let u = grid_of(&b, 24, TimeGrid::single(-0.1));
    for constrained in [true, false] {
        let so = SliceOptions { constrained, ..SliceOptions::smooth(2) };
        let p = extract_polynomial(&u, 2, 0, &[0.8], &so).unwrap();
        assert!(p.divergence_max() < 1e-10, "constrained={constrained}");
    }
}

#[test]
fn smooth_remainder_decays_one_order_above_degree() {
    // U = rot psi with psi = exp(-2t) sin(x1 + 0.3) sin(x2 - 0.2), caloric
    let d = 2;
    let space = SpatialGrid::new(2, 1.0, 128).unwrap();
    let t = -0.05;
    let u = GridField::from_fn(2, space, TimeGrid::single(t), Provenance::default(), |x, t, out| {
        let e = (-2.0 * t).exp();
        out[0] = e * (x[0] + 0.3).sin() * (x[1] - 0.2).cos();
        out[1] = -e * (x[0] + 0.3).cos() * (x[1] - 0.2).sin();
    });
    let p = extract_polynomial(&u, d, 0, &[0.4, 0.3, 0.2], &SliceOptions::smooth(d)).unwrap();
    let rem = remainder_field(&u, &p).unwrap();
    let sup_within = |rad: f64| {
        (0..rem.header.space.len())
            .filter(|&q| rem.header.space.point(q).iter().map(|v| v * v).sum::<f64>() <= rad * rad)
            .map(|q| rem.values[rem.index(0, 0, q)].abs().max(rem.values[rem.index(1, 0, q)].abs()))
            .fold(0.0, f64::max)
    };
    let ratio = sup_within(0.5) / sup_within(0.25);
    assert!(ratio >= 0.9 * 2f64.powi(d as i32 + 1), "{ratio}");
}

#[test]
fn remainder_of_polynomial_vanishes_and_scales() {
    let b = caloric_background(2, 2, &[1.0, -2.0]);
    let u = grid_of(&b, 16, TimeGrid::past(0.1, 3));
    let p = VectorPolynomial::from_space_time(&b, 2, &u.header.time.times());
    let r = remainder_field(&u, &p).unwrap();
    assert!(r.values.iter().all(|v| v.abs() < 1e-12));
    let mut u2 = u.clone();
    u2.values.iter_mut().for_each(|v| *v = 2.0 * *v + 1.0);
    let r1 = remainder_field(&u2, &p.scale(2.0)).unwrap();
    assert!(r1.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    let mut wrong = p.clone();
    wrong.slices.pop();
    assert!(matches!(remainder_field(&u, &wrong), Err(ExpansionError::MissingSlice(_))));
}

#[test]
fn json_round_trip_is_exact() {
    let b = caloric_background(3, 2, &[0.1, -0.7, 1.3]);
    let p = with_pressure(&VectorPolynomial::from_space_time(&b, 2, &[-0.2, -0.1, 0.0])).unwrap();
    let s = p.to_json().unwrap();
    let back = VectorPolynomial::from_json(&s).unwrap();
    assert_eq!(back, p);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["dimension"], 3);
    assert!(v["slices"][0]["coefficients"][0]["multi_index"].is_array());
    assert!(VectorPolynomial::from_json(&s.replace("\"degree\": 2", "\"degree\": 1")).is_err());
}

#[test]
fn residual_structure_of_stationary_harmonic_polynomial_is_zero() {
    // P = (x1^2 - x2^2, -2 x1 x2): harmonic, divergence-free, constant in t
    let mut p = VectorPolynomial::zero(2, 2, &[-0.2, -0.1, 0.0]);
    for s in &mut p.slices {
        s.components[0] = Poly::monomial(2, vec![2, 0], 0, 1.0).add(&Poly::monomial(2, vec![0, 2], 0, -1.0));
        s.components[1] = Poly::monomial(2, vec![1, 1], 0, -2.0);
    }
    let r = residual_structure(&p).unwrap();
    assert_eq!(r.low_degree_ratio, 0.0);
    assert!(r.slices.iter().all(|s| s.top.iter().all(|e| e.value.abs() < 1e-14)));
    assert_eq!(r.divergence, 0.0);
}

#[test]
fn pressure_companion_absorbs_gradient_in_time() {
    // P = t grad h + B with h = x1 x2 harmonic: d_t P - Delta P = grad h, R = -h
    let d = 3;
    let b = caloric_background(2, d, &[0.5, 1.5]);
    let h = Poly::monomial(2, vec![1, 1], 0, 1.0);
    let g = SpaceTimePolynomial { n: 2, components: vec![h.dx(0), h.dx(1)] };
    let tg = SpaceTimePolynomial { n: 2, components: g.components.iter().map(|c| Poly { n: 2, terms: c.terms.iter().map(|(s, v)| (MultiIndexSpec::new(s.mu.clone(), s.l + 1), *v)).collect() }).collect() };
    let total = b.add(&tg);
    let p = VectorPolynomial::from_space_time(&total, d, &[-0.3, -0.2, -0.1, 0.0]);
    let r = residual_structure(&p).unwrap();
    assert!(r.low_degree_ratio < 1e-12, "{}", r.low_degree_ratio);
    let comp = pressure_companion(&p).unwrap();
    for s in &comp {
        assert!(s.components[0].add(&h).max_abs_coefficient() < 1e-12);
    }
    assert!(matches!(residual_structure(&VectorPolynomial::zero(2, 2, &[0.0, 1.0])), Err(ExpansionError::InsufficientSlices(2))));
}

#[test]
fn curl_of_gradient_vanishes_and_is_antisymmetric() {
    let space = SpatialGrid::new(2, 1.0, 32).unwrap();
    let u = GridField::from_fn(2, space, TimeGrid::single(0.0), Provenance::default(), |x, _, out| {
        // grad of x1^3 x2 + x1^2 x2^2
        out[0] = 3.0 * x[0] * x[0] * x[1] + 2.0 * x[0] * x[1] * x[1];
        out[1] = x[0].powi(3) + 2.0 * x[0] * x[0] * x[1];
    });
    let w = curl(&u).unwrap();
    assert!(w.slice(1, 0).iter().all(|v| v.abs() < 1e-8));
    for (a, b) in w.slice(1, 0).iter().zip(w.slice(2, 0)) {
        assert_eq!(*a, -*b);
    }
    assert!(w.slice(0, 0).iter().all(|v| *v == 0.0));
}

#[test]
fn vorticity_of_pressure_driven_solution_is_caloric() {
    // U = rot psi + cos(t) grad h solves d_t U - Delta U + grad p = 0 with
    // p = sin(t) h, div U = 0; psi caloric, h harmonic.
    let space = SpatialGrid::new(2, 1.0, 64).unwrap();
    let time = TimeGrid { start: -0.2, step: 0.002, count: 5 };
    let u = GridField::from_fn(2, space, time, Provenance::default(), |x, t, out| {
        let e = (-2.0 * t).exp();
        let (h1, h2) = (x[0].exp() * x[1].cos(), -x[0].exp() * x[1].sin());
        out[0] = e * x[0].sin() * x[1].cos() + t.cos() * h1;
        out[1] = -e * x[0].cos() * x[1].sin() + t.cos() * h2;
    });
    let w = curl(&u).unwrap();
    let res = heat_residual(&w).unwrap();
    let space = &res.header.space;
    let scale = w.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for k in 0..res.header.time.count {
        for q in 0..space.len() {
            let x = space.point(q);
            if x.iter().all(|v| v.abs() < 0.8) {
                worst = worst.max(res.values[res.index(1, k, q)].abs());
            }
        }
    }
    assert!(worst / scale < 1e-3, "{}", worst / scale);
}

#[test]
fn ill_conditioned_fit_reports_radius() {
    let b = caloric_background(2, 2, &[1.0]);
    let u = grid_of(&b, 8, TimeGrid::single(0.0));
    match extract_polynomial(&u, 2, 0, &[0.3], &SliceOptions::smooth(2)) {
        Err(ExpansionError::TooFewSamples { radius, .. }) | Err(ExpansionError::IllConditioned { radius, .. }) => assert_eq!(radius, 0.3),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extraction_is_linear_and_absorbs_polynomials(c in proptest::collection::vec(-2.0f64..2.0, 3), k in 0.5f64..3.0) {
        let b = caloric_background(2, 2, &c);
        let o = opts(vec![0.4, 0.2], ExponentModel::vanishing(2, 0.3, 1));
        let base = |pts: &[(Vec<f64>, f64)]| -> Result<Vec<Vec<f64>>, String> {
            Ok(pts.iter().map(|(x, t)| { let r = crate::point::parabolic_norm(x, *t).powf(2.3); vec![r, -r] }).collect())
        };
        let a = extract_space_time(2, 2, base, &o).unwrap();
        let shifted = extract_space_time(2, 2, |pts: &[(Vec<f64>, f64)]| -> Result<Vec<Vec<f64>>, String> {
            let v = base(pts)?;
            Ok(v.into_iter().zip(pts).map(|(u, (x, t))| { let bv = b.eval_vec(x, *t); vec![k * u[0] + bv[0], k * u[1] + bv[1]] }).collect())
        }, &o).unwrap();
        let diff = shifted.polynomial.add(&a.polynomial.scale(-k)).add(&b.scale(-1.0)).max_abs_coefficient();
        prop_assert!(diff < 1e-9 * (1.0 + b.max_abs_coefficient()));
    }
}
