//! Monte-Carlo cross-checks of the closed-form model.

use pilot_ofdm::analytic::{ber_bin, cpe_variance, dispersion_delay};
use pilot_ofdm::constellation::Constellation;
use pilot_ofdm::simkernel::{
    demod_bin, estimate_cpe_variance, pilot_cancel, run_trials, synthesize_received, trial_rng,
    wiener_path, McSettings,
};
use pilot_ofdm::{LinkSpec, ModulationScheme, SystemKind, SystemParams, VarianceMode};
use rand::Rng;

fn reference(kind: SystemKind, order: u32) -> SystemParams {
    LinkSpec::reference(kind, ModulationScheme::psk(order).unwrap())
        .validate()
        .unwrap()
}

#[test]
fn cpe_estimate_follows_exact_form_above_symbol_time() {
    // k = 100 at 225 km: d = 2.883 ns
    let p = reference(SystemKind::Co, 4);
    let est = estimate_cpe_variance(&p, 100, 225e3, 10_000, 2024).unwrap();
    let exact = cpe_variance(&p, 100, 225e3, VarianceMode::ExactFiltered).unwrap();
    let linear = cpe_variance(&p, 100, 225e3, VarianceMode::PaperLinear).unwrap();
    assert!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
    assert!((est.value - linear).abs() > 3.0 * est.stderr);
}

#[test]
fn cpe_estimate_dd_bin() {
    // DD, k = 1 at 5 km: d = 201·τ ≈ 0.13 ns, well below T
    let p = reference(SystemKind::Dd, 4);
    let est = estimate_cpe_variance(&p, 1, 5e3, 4000, 8).unwrap();
    let exact = cpe_variance(&p, 1, 5e3, VarianceMode::ExactFiltered).unwrap();
    assert!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
}

#[test]
fn no_phase_noise_means_no_errors() {
    let p = reference(SystemKind::Co, 16).with_linewidths(0.0, 0.0).unwrap();
    let m = run_trials(&p, 225e3, &McSettings::for_params(&p, 20, 3)).unwrap();
    assert_eq!(m.symbol_errors, 0);
    assert_eq!(m.bit_errors, 0);
    assert!(m.evm <= 1e-9, "{}", m.evm);
}

#[test]
fn zero_length_cancels_everything() {
    for kind in [SystemKind::Co, SystemKind::Dd] {
        let p = reference(kind, 16).with_linewidths(50e6, 50e6).unwrap();
        let m = run_trials(&p, 0.0, &McSettings::for_params(&p, 30, 4)).unwrap();
        assert_eq!(m.symbol_errors, 0, "{kind}");
        assert!(m.evm <= 1e-9, "{kind}: {}", m.evm);
    }
}

#[test]
fn run_trials_is_deterministic() {
    let p = reference(SystemKind::Dd, 4).with_n_bins(16).unwrap();
    let s = McSettings::for_params(&p, 150, 77);
    let a = run_trials(&p, 60e3, &s).unwrap();
    let b = run_trials(&p, 60e3, &s).unwrap();
    assert_eq!(a, b);
    let c = run_trials(&p, 60e3, &McSettings { seed: 78, ..s }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn counts_are_consistent() {
    let p = reference(SystemKind::Co, 16).with_n_bins(32).unwrap();
    let m = run_trials(&p, 200e3, &McSettings::for_params(&p, 100, 5)).unwrap();
    assert_eq!(m.symbols_sent, 100 * 32);
    assert_eq!(m.bits_sent, 100 * 32 * 4);
    assert!(m.bit_errors <= m.symbol_errors * 4);
    assert_eq!(m.symbol_errors, m.per_bin.iter().map(|b| b.symbol_errors).sum::<u64>());
    assert!(m.symbol_errors > 0);
}

/// The CPE phase the simulator extracts per bin tracks the exact filtered
/// variance; the residual (ICI) is reported separately.
#[test]
fn simulated_cpe_matches_exact_mode() {
    let p = reference(SystemKind::Co, 4).with_n_bins(16).unwrap();
    // choose L so that bin 8 sits at d = 2T
    let tau = dispersion_delay(&p, 1.0);
    let length = 2.0 * p.symbol_time() / (8.0 * tau);
    let m = run_trials(&p, length, &McSettings::for_params(&p, 3000, 12)).unwrap();
    for b in m.per_bin.iter().filter(|b| b.k.abs() >= 4) {
        let exact = cpe_variance(&p, b.k, length, VarianceMode::ExactFiltered).unwrap();
        assert!(
            (b.cpe_var.value - exact).abs() < 4.0 * b.cpe_var.stderr,
            "k = {}: {:?} vs {exact}",
            b.k,
            b.cpe_var
        );
    }
}

#[test]
fn received_symbol_carries_cpe_rotation() {
    // one active bin: after cancellation r_k = a_k · cpe_factor exactly
    let p = reference(SystemKind::Dd, 4).with_n_bins(8).unwrap();
    let c = Constellation::new(p.modulation()).unwrap();
    let m = 32;
    let length = 80e3;
    let d_max = 16.0 * dispersion_delay(&p, length);
    let path = wiener_path(20e6, p.symbol_time() / 2048.0, p.symbol_time() + d_max, 6).unwrap();
    let mut rng = trial_rng(6, 1);
    for active in 0..8 {
        let mut a = vec![num_complex::Complex64::new(0.0, 0.0); 8];
        a[active] = c.points()[rng.random_range(0..4)];
        let rx = synthesize_received(&p, &a, &path, length, m).unwrap();
        let corrected = pilot_cancel(&rx.data, &rx.pilot).unwrap();
        let k = p.bin_indices()[active];
        let r = demod_bin(&corrected, k, m).unwrap();
        assert!((r - a[active] * rx.cpe_factors[active]).norm() < 1e-12);
    }
}

/// At 225 km the bin-100 measured BER lies within a factor 3 of the
/// CPE-only BER floor evaluated with the exact filtered variance. About two
/// minutes on one core.
#[test]
#[ignore = "slow: 5e4 full-band trials"]
fn edge_bin_ber_matches_analytic_floor() {
    let p = reference(SystemKind::Co, 4);
    let m = run_trials(&p, 225e3, &McSettings::for_params(&p, 50_000, 31)).unwrap();
    let (mut bits, mut decisions) = (0u64, 0u64);
    for b in m.per_bin.iter().filter(|b| b.k.abs() == 100) {
        bits += b.bit_errors;
        decisions += b.symbols;
    }
    assert!(decisions >= 100_000);
    let measured = bits as f64 / (2 * decisions) as f64;
    let sigma_sq = cpe_variance(&p, 100, 225e3, VarianceMode::ExactFiltered).unwrap();
    let analytic = ber_bin(sigma_sq, p.modulation()).unwrap();
    let ratio = measured / analytic;
    println!("measured {measured:.4e}, analytic {analytic:.4e}, ratio {ratio:.3}");
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "ratio {ratio}");
}
