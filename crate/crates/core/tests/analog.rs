mod common;

use ekgnet::analog::{
    agc, characterize_mac, hardware_rpeak_detect, mac_sequence, AnalogNetwork, ChipMismatch,
    Hysteresis, MacConfig, DEFAULT_THRESHOLD_FRACTION, REFRACTORY_SAMPLES,
};
use ekgnet::model::{argmax, predict_logits, train, NoiseModel, TrainConfig};
use ekgnet::pipeline::{
    find_rpeaks, normalize, resample, scale_to_voltage, window_10s, PipelineConfig,
};
use ekgnet::quant::{build_codebook, decode, quantize, QuantizedModel, BITS};
use ekgnet::synth::{arrhythmia_record, SynthConfig};
use ekgnet::Task;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trained_quantized(seed: u64) -> (QuantizedModel, Vec<ekgnet::Beat>) {
    let split = common::synthetic_split(Task::MitBih, 400, 125, 400, seed);
    let cfg = TrainConfig {
        epochs: 6,
        seed,
        ..TrainConfig::default()
    };
    let params = train(
        &cfg,
        &NoiseModel::default(),
        4,
        &split.train,
        &split.validation,
        None,
    )
    .unwrap()
    .params;
    (
        quantize(&params, &build_codebook(&params, BITS).unwrap()),
        split.test,
    )
}

#[test]
fn characterization_recovers_configured_nrmse() {
    let cfg = MacConfig::default();
    let r = characterize_mac(&cfg, 100_000, 1).unwrap();
    for (got, want) in [
        (r.nrmse_weight_path, 0.0036),
        (r.nrmse_input_path, 0.0062),
        (r.nrmse_kernel, 0.0002),
    ] {
        assert!((got / want - 1.0).abs() <= 0.2, "{got} vs {want}");
    }
    assert!(characterize_mac(&cfg, 9_999, 1).is_err());
}

#[test]
fn mac_noise_is_zero_mean() {
    let cfg = MacConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 50_000;
    let mut errs = Vec::with_capacity(n);
    for _ in 0..n {
        let w: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(0.6..0.7)).collect();
        let ideal = cfg.v_ref
            + cfg.gain
                * w.iter()
                    .zip(&x)
                    .map(|(w, x)| w * (x - cfg.input_center))
                    .sum::<f64>();
        errs.push(mac_sequence(&w, &x, &cfg, &mut rng).unwrap() - ideal);
    }
    let mean = errs.iter().sum::<f64>() / n as f64;
    let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!(sd > 0.0);
    assert!(
        mean.abs() < 3.0 * sd / (n as f64).sqrt(),
        "mean {mean:e} sd {sd:e}"
    );
}

#[test]
fn noiseless_hardware_agrees_with_float_argmax() {
    let (q, test) = trained_quantized(3);
    let params = decode(&q).unwrap();
    let net = AnalogNetwork::new(&q, &MacConfig::default().noiseless()).unwrap();
    let chip = ChipMismatch::none(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let beats = common::first_beats(&test, 500);
    assert_eq!(beats.len(), 500);
    for b in &beats {
        let hw = net
            .forward(&scale_to_voltage(&b.samples).unwrap(), &chip, &mut rng)
            .unwrap();
        assert_eq!(
            usize::from(hw.class_code),
            argmax(&predict_logits(&params, &b.samples).unwrap()),
            "beat {}",
            b.id()
        );
    }
}

#[test]
fn hardware_detector_agrees_with_software_detector() {
    let threshold = PipelineConfig::default().rpeak_threshold;
    let (mut hits, mut total) = (0, 0);
    for seed in 0..4 {
        let rec = arrhythmia_record("x", &SynthConfig::default(), seed).unwrap();
        let signal = resample(&rec.signal, rec.sampling_rate, 125.0).unwrap();
        for window in window_10s(&signal) {
            let g = agc(window, 1.0, &[1.0, 2.0, 5.0, 10.0]).unwrap();
            let amp: Vec<f64> = window.iter().map(|v| v * g.gain).collect();
            let hw = hardware_rpeak_detect(
                &amp,
                Hysteresis::calibrate(&amp, DEFAULT_THRESHOLD_FRACTION),
                REFRACTORY_SAMPLES,
            );
            let sw = find_rpeaks(&normalize(window).samples, threshold);
            hits += sw
                .iter()
                .filter(|&&p| hw.iter().any(|&h| h.abs_diff(p) <= 12))
                .count();
            total += sw.len();
        }
    }
    let agreement = hits as f64 / total as f64;
    assert!(
        agreement >= 0.9,
        "agreement {agreement:.3} over {total} peaks"
    );
}
