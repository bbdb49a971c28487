use criterion::{black_box, criterion_group, criterion_main, Criterion};
use parastokes::construct::{make_forcing, ForcingForm, ForcingSpec, PotentialScheme, ProfileSpec, Route, VolumePotential};
use parastokes::expansion::{caloric_background, extract_space_time, ExponentModel, ExtractionOptions};

fn corrected(c: &mut Criterion) {
    let spec = ForcingSpec { n: 2, d: 2, alpha: 0.5, gamma: 1.0, q: 3.0, form: ForcingForm::Standard, profile: ProfileSpec::Swirl, support_radius: 1.0 };
    let forcing = make_forcing(&spec).unwrap();
    let mut group = c.benchmark_group("corrected_point");
    group.sample_size(10);
    for (name, scheme) in [("coarse", PotentialScheme::coarse()), ("default", PotentialScheme::default())] {
        let p = VolumePotential::new(forcing.clone(), Route::Standard, 2, scheme).unwrap();
        group.bench_function(name, |b| b.iter(|| p.corrected(black_box(&[0.05, -0.03]), black_box(-0.002)).unwrap()));
    }
    group.finish();
}

fn extraction(c: &mut Criterion) {
    let bg = caloric_background(2, 3, &[0.4, -0.2, 0.7, 0.1]);
    let opts = ExtractionOptions { radii: vec![0.125, 0.0625, 0.03125], samples: 48, model: ExponentModel::smooth(3), constrained: true, max_condition: 1e8, inner_fraction: 0.1, seed: 1 };
    c.bench_function("extract_space_time_d3", |b| {
        b.iter(|| {
            extract_space_time(2, 3, |pts| -> Result<Vec<Vec<f64>>, String> { Ok(pts.iter().map(|(x, t)| bg.eval_vec(x, *t)).collect()) }, black_box(&opts)).unwrap()
        })
    });
}

criterion_group!(benches, corrected, extraction);
criterion_main!(benches);
