use ftn_core::channel::{
    block_rng, channel_pass, decode, precode, run_ber, EnergyConvention, MatchedFilterChannel,
    TransmissionConfig,
};
use ftn_core::toeplitz::{build_rrc_gramian, build_sinc_gramian, PrecoderMode};
use ftn_core::FtnError;
use rand::Rng;

#[test]
fn noiseless_chain_is_transparent_up_to_1024() {
    for h in [
        build_sinc_gramian(1.0, 1024).unwrap(),
        build_rrc_gramian(0.9, 0.22, 1024).unwrap(),
    ] {
        let ch = MatchedFilterChannel::new(h, PrecoderMode::ExactEigen).unwrap();
        let mut rng = block_rng(1, 1);
        let x: Vec<f64> = (0..1024).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = precode(&x, ch.precoder()).unwrap();
        let s = decode(
            &channel_pass(&a, &ch, 0.0, &mut rng).unwrap(),
            ch.precoder(),
        )
        .unwrap();
        let err = s
            .iter()
            .zip(&x)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}

#[test]
fn ill_conditioned_configuration_is_reported() {
    let config = TransmissionConfig {
        rho: 0.5,
        beta: 0.22,
        block_m: 256,
        ..Default::default()
    };
    match MatchedFilterChannel::from_config(&config).unwrap_err() {
        FtnError::IllConditioned { hint, .. } => assert!(hint.unwrap().contains("(1+β)ρ")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn circulant_mode_runs_in_the_well_conditioned_regime() {
    let config = TransmissionConfig {
        rho: 0.9,
        beta: 0.22,
        block_m: 128,
        precoder_mode: PrecoderMode::CirculantFft,
        seed: 12,
        ..Default::default()
    };
    let pts = run_ber(&config, &[f64::INFINITY, 4.0], 50_000).unwrap();
    // the circulant surrogate leaves a little residual interference
    assert_eq!(pts[0].errors, 0);
    let p = &pts[1];
    assert!((p.ber - p.ber_oracle).abs() < 0.1 * p.ber_oracle, "{p:?}");
}

#[test]
fn constant_power_lowers_the_per_sample_energy() {
    let config = TransmissionConfig {
        rho: 0.9,
        beta: 0.22,
        block_m: 64,
        energy_convention: EnergyConvention::ConstantPower,
        seed: 5,
        ..Default::default()
    };
    let p = &run_ber(&config, &[3.0], 100_000).unwrap()[0];
    let sigma = 10f64.powf(-3.0 / 20.0);
    let expected = ftn_core::channel::q_function((0.9f64).sqrt() / sigma);
    assert!((p.ber_oracle - expected).abs() < 1e-15);
    assert!((p.ber - expected).abs() <= p.oracle_half_width());
}

#[test]
fn thread_count_does_not_change_results() {
    let config = TransmissionConfig {
        rho: 0.85,
        beta: 0.3,
        block_m: 48,
        seed: 77,
        ..Default::default()
    };
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| run_ber(&config, &[1.0, 5.0], 20_000).unwrap());
    let b = four.install(|| run_ber(&config, &[1.0, 5.0], 20_000).unwrap());
    assert_eq!(a, b);
}
