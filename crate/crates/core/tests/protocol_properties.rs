
use symbench::channels::{depolarizing, dilated_noise, Channel, Gate};
use symbench::fitting::{fit_decay, FitOptions};
use symbench::linalg;
use symbench::onedesign::{exact_gamma, half_twirl, number_design};
use symbench::protocol::{
    estimate_curve, interleaved_curve, run_fixed_sequence, CurvePoint, DecayCurve, ExactOracle, ExperimentSpec,
    InterleaveSet, NoiseModel, RoundChoice,
};

fn curve_of(lengths: &[usize], values: &[f64]) -> DecayCurve {
    DecayCurve {
        points: lengths
            .iter()
            .zip(values)
            .map(|(&length, &mean)| CurvePoint { length, mean, stderr: 0.0, n_sequences: 1, shots: 0 })
            .collect(),
    }
}

#[test]
fn full_enumeration_equals_exact_average() {
    let noise = dilated_noise(2, (0, 1), 0.3, 3).unwrap();
    let spec = ExperimentSpec::new(number_design(2, 1).unwrap(), NoiseModel::global(noise.clone()), vec![1, 2], 1, 0);
    let members = spec.design.enumerate().unwrap();
    let ht = half_twirl(&noise, &spec.design).unwrap();
    for y in 1..=2usize {
        let mut total = 0.0;
        let mut count = 0;
        let mut idx = vec![0usize; y];
        loop {
            let rounds: Vec<RoundChoice> = idx
                .iter()
                .map(|&k| RoundChoice { element: members[k].0.clone(), randomizer: 0, interleave: 0 })
                .collect();
            total += run_fixed_sequence(&spec, &rounds).unwrap();
            count += 1;
            let mut pos = 0;
            while pos < y {
                idx[pos] += 1;
                if idx[pos] < members.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == y {
                break;
            }
        }
        assert_eq!(count, members.len().pow(y as u32));
        let exact = exact_gamma(&ht, y, &spec.initial_state, &spec.measure).unwrap();
        assert!((total / count as f64 - exact).abs() < 1e-12);
    }
}

#[test]
fn means_decrease_under_depolarizing_noise() {
    let spec = ExperimentSpec::new(
        number_design(3, 1).unwrap(),
        NoiseModel::global(depolarizing(3, 0.03).unwrap()),
        vec![1, 2, 4, 8, 16, 32],
        40,
        8,
    )
    .with_shots(300);
    let curve = estimate_curve(&spec).unwrap();
    for w in curve.points.windows(2) {
        let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].mean <= w[0].mean + slack, "{:?}", w);
    }
    assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.mean) && p.stderr >= 0.0));
}

#[test]
fn stderr_scales_with_inverse_root_shots() {
    // Survival is 0.75 for every sequence, so the spread is pure shot noise.
    let base = ExperimentSpec::new(number_design(2, 1).unwrap(), NoiseModel::Noiseless, vec![1], 400, 17)
        .with_spam(None, Some(depolarizing(2, 0.5).unwrap()));
    let shots = [100u64, 1000, 10000];
    let logs: Vec<(f64, f64)> = shots
        .iter()
        .map(|&s| {
            let c = estimate_curve(&base.clone().with_shots(s)).unwrap();
            ((s as f64).ln(), c.points[0].stderr.ln())
        })
        .collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn identity_spam_and_identity_interleave_change_nothing() {
    let noise = NoiseModel::global(dilated_noise(3, (0, 2), 0.2, 6).unwrap());
    let spec = ExperimentSpec::new(number_design(3, 2).unwrap(), noise, vec![1, 2, 4, 8], 30, 21).with_shots(100);
    let plain = estimate_curve(&spec).unwrap();
    let with_spam = spec.clone().with_spam(Some(Channel::identity(3)), Some(Channel::identity(3)));
    assert_eq!(estimate_curve(&with_spam).unwrap(), plain);

    let set = InterleaveSet::new(vec![Gate::unitary(vec![], linalg::identity(1))], Some(Channel::identity(3))).unwrap();
    let inter = interleaved_curve(&spec.clone().with_interleave(set).with_stream_tag(5)).unwrap();
    for (a, b) in inter.points.iter().zip(&plain.points) {
        let slack = 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= slack, "{a:?} vs {b:?}");
    }
}

#[test]
fn spam_changes_amplitude_not_rate() {
    let lengths: Vec<usize> = (1..=32).collect();
    let noise = NoiseModel::global(dilated_noise(4, (1, 2), 0.15, 42).unwrap());
    let base = ExperimentSpec::new(number_design(4, 2).unwrap(), noise, lengths.clone(), 1, 1);
    let fit = |spec: &ExperimentSpec| {
        let values = ExactOracle::new(spec).unwrap().curve(&lengths);
        fit_decay(&curve_of(&lengths, &values), FitOptions::default()).unwrap()
    };
    let reference = fit(&base);
    for (prep, meas) in [(Some(depolarizing(4, 0.05).unwrap()), None), (None, Some(depolarizing(4, 0.05).unwrap()))] {
        let other = fit(&base.clone().with_spam(prep, meas));
        assert!((other.lambda() - reference.lambda()).abs() < 1e-3);
        assert!((other.total_amplitude() - reference.total_amplitude()).abs() > 1e-2);
    }
}

#[test]
fn fitted_curve_tracks_the_oracle() {
    let lengths: Vec<usize> = (1..=32).collect();
    let noise = NoiseModel::global(dilated_noise(4, (0, 1), 0.15, 42).unwrap());
    let spec = ExperimentSpec::new(number_design(4, 2).unwrap(), noise, lengths.clone(), 1, 1);
    let values = ExactOracle::new(&spec).unwrap().curve(&lengths);
    let fit = fit_decay(&curve_of(&lengths, &values), FitOptions::default()).unwrap();
    for (&y, &v) in lengths.iter().zip(&values) {
        assert!((fit.model(y as f64) - v).abs() < 1e-3);
    }
    let ht = half_twirl(&dilated_noise(4, (0, 1), 0.15, 42).unwrap(), &spec.design).unwrap();
    let exact_mu = 1.0 - exact_gamma(&ht, 1, &spec.initial_state, &spec.measure).unwrap();
    assert!((fit.mu - exact_mu).abs() / exact_mu < 0.1);
}

#[test]
fn fitted_mu_grows_with_noise_strength() {
    let mut last = -1.0;
    for eps in [0.05, 0.1, 0.2] {
        let noise = NoiseModel::global(dilated_noise(3, (0, 1), eps, 9).unwrap());
        let spec = ExperimentSpec::new(number_design(3, 1).unwrap(), noise, vec![1, 2, 4, 8, 16, 32], 50, 4);
        let mu = fit_decay(&estimate_curve(&spec).unwrap(), FitOptions::default()).unwrap().mu;
        assert!(mu > last, "eps {eps}: mu {mu} not above {last}");
        last = mu;
    }
}

#[test]
fn noiseless_interleave_matches_reference_rate() {
    let noise = NoiseModel::global(dilated_noise(3, (1, 2), 0.2, 1).unwrap());
    let spec = ExperimentSpec::new(number_design(3, 1).unwrap(), noise, vec![1, 2, 4, 8, 16], 1, 1);
    let set = InterleaveSet::new(vec![Gate::Iswap(symbench::channels::Iswap { a: 0, b: 2 })], None).unwrap();
    let lengths = spec.lengths.clone();
    let plain = ExactOracle::new(&spec).unwrap().curve(&lengths);
    let ispec = spec.clone().with_interleave(set);
    let inter = ExactOracle::new(&ispec).unwrap().curve(&lengths);
    for (a, b) in plain.iter().zip(&inter) {
        assert!((a - b).abs() < 1e-12);
    }
    let ht = ExactOracle::new(&ispec).unwrap().half_twirl().unwrap();
    let g1 = exact_gamma(&ht, 1, &ispec.initial_state, &ispec.measure).unwrap();
    assert!((g1 - plain[0]).abs() < 1e-12);
}

#[test]
fn per_iswap_oracle_matches_enumeration() {
    let noise = NoiseModel::per_iswap(dilated_noise(3, (0, 1), 0.2, 5).unwrap()).unwrap();
    let spec = ExperimentSpec::new(number_design(3, 2).unwrap(), noise, vec![1], 1, 0);
    let mean: f64 = spec
        .design
        .enumerate()
        .unwrap()
        .iter()
        .map(|(e, w)| w * run_fixed_sequence(&spec, &[RoundChoice { element: e.clone(), randomizer: 0, interleave: 0 }]).unwrap())
        .sum();
    assert!((ExactOracle::new(&spec).unwrap().gamma(1) - mean).abs() < 1e-12);
}
