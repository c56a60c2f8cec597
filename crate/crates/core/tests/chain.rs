//! Whole-chain properties on the reference scenario.

use std::f64::consts::PI;
use std::sync::OnceLock;

use lunar_wpt::chain::{extremes, mc_in_windows, path_lengths, run_timeseries};
use lunar_wpt::{McConfig, McTarget, Scenario, Timeseries, Tracking};

fn reference() -> &'static Timeseries {
    static TS: OnceLock<Timeseries> = OnceLock::new();
    TS.get_or_init(|| run_timeseries(&Scenario::default()).unwrap())
}

#[test]
fn powers_only_inside_common_window() {
    let ts = reference();
    assert!(ts.has_contact());
    for s in &ts.samples {
        assert_eq!(s.p_hl.is_some(), ts.windows.in_common(s.t), "t = {}", s.t);
        assert_eq!(s.p_hp.is_some(), s.in_window);
        if s.in_window {
            assert!(s.vis_fso && s.vis_lsp && s.vis_mal, "t = {}", s.t);
        }
    }
}

#[test]
fn in_window_row_count_matches_duration() {
    let ts = reference();
    let w = ts.windows.longest_common().unwrap();
    let rows = ts.in_window().count() as f64;
    assert!(
        (rows - w.duration() / 10.0).abs() <= 1.0,
        "{rows} rows for {} s",
        w.duration()
    );
}

#[test]
fn rf_power_is_modular_composition() {
    let s = Scenario::default();
    let lambda = s.rf.wavelength();
    let k = s.rf.re_efficiency * s.rf.er_efficiency * (lambda / (4.0 * PI)).powi(2);
    for x in reference().in_window() {
        let p_hl = x.p_hl.unwrap();
        let want_p = k * p_hl * x.g_tp * x.g_rp / (x.d_p * 1e3).powi(2);
        let want_m = k * p_hl * x.g_tm * x.g_rm / (x.d_m * 1e3).powi(2);
        assert!((x.p_hp.unwrap() / want_p - 1.0).abs() < 1e-12);
        assert!((x.p_hm.unwrap() / want_m - 1.0).abs() < 1e-12);
        // boresight gains bound every link
        let g_max = s.rf.transmitter.boresight_gain(lambda) * s.rf.receiver.boresight_gain(lambda);
        assert!(x.p_hm.unwrap() <= k * p_hl * g_max / (x.d_m * 1e3).powi(2));
        let want_l = s
            .fso
            .harvested_optical(s.fso.captured_power_aligned(x.z * 1e3));
        assert_eq!(p_hl, want_l);
    }
}

#[test]
fn primary_link_runs_at_boresight() {
    let s = Scenario::default();
    let lambda = s.rf.wavelength();
    for x in reference().in_window() {
        assert!((x.g_tp / s.rf.transmitter.boresight_gain(lambda) - 1.0).abs() < 1e-12);
        assert_eq!(x.g_rp, s.rf.receiver.boresight_gain(lambda));
        assert_eq!(x.g_rm, x.g_rp);
    }
}

#[test]
fn argmax_instants() {
    let ts = reference();
    let r = extremes(&ts.samples).unwrap();
    // constant gains on the tracked link: power peaks at the shortest range
    assert_eq!(r.p_hp_max.t, r.d_p_min.t);
    assert_eq!(r.p_hl_max.t, r.z_min.t);
    assert_eq!(r.p_hl_min.t, r.z_max.t);
    assert_eq!(r.p_hm_max.t, r.g_tm_max.t);
    for e in [
        r.z_min, r.z_max, r.d_p_min, r.d_p_max, r.g_tm_min, r.g_tm_max,
    ] {
        assert!(ts.windows.in_common(e.t));
    }
}

#[test]
fn end_to_end_lengths_add() {
    for p in path_lengths(&reference().samples) {
        assert_eq!(p.z_plus_d_p, p.z + p.d_p);
        assert_eq!(p.z_plus_d_m, p.z + p.d_m);
    }
}

#[test]
fn monte_carlo_never_beats_alignment() {
    let s = Scenario::default();
    let ts = reference();
    let r = extremes(&ts.samples).unwrap();
    let cfg = McConfig::new(20_000, 3);
    for (t, target) in [
        (r.d_p_min.t, McTarget::Lsp),
        (r.g_tm_min.t, McTarget::Malapert),
        (r.z_max.t, McTarget::Llo),
    ] {
        let run = mc_in_windows(&s, &ts.windows, t, &cfg, target).unwrap();
        assert!(run.samples.iter().all(|&p| p <= run.aligned));
        assert!(run.stats.mean < run.aligned);
        assert!(run.stats.mean > 0.0);
    }
}

#[test]
fn monte_carlo_outside_window_is_rejected() {
    let s = Scenario::default();
    let ts = reference();
    let err =
        mc_in_windows(&s, &ts.windows, 0.0, &McConfig::new(10, 1), McTarget::Llo).unwrap_err();
    assert!(err
        .to_string()
        .contains("outside the common visibility window"));
}

#[test]
fn split_power_halves_surface_power() {
    let split = run_timeseries(&Scenario {
        split_power: true,
        ..Scenario::default()
    })
    .unwrap();
    for (a, b) in reference().in_window().zip(split.in_window()) {
        assert_eq!(a.p_hl, b.p_hl);
        assert!((b.p_hp.unwrap() / a.p_hp.unwrap() - 0.5).abs() < 1e-14);
        assert!((b.p_hm.unwrap() / a.p_hm.unwrap() - 0.5).abs() < 1e-14);
    }
}

#[test]
fn fixed_dishes_lose_gain() {
    let mut s = Scenario::default();
    s.rf.transmitter.tracking = Tracking::Fixed;
    s.rf.receiver.tracking = Tracking::Fixed;
    let fixed = run_timeseries(&s).unwrap();
    for (a, b) in reference().in_window().zip(fixed.in_window()) {
        assert!(b.g_rp <= a.g_rp && b.g_rm <= a.g_rm);
        assert!(b.g_tp <= a.g_tp * (1.0 + 1e-12));
    }
}

#[test]
fn parallel_and_serial_runs_agree() {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let ts = pool.install(|| run_timeseries(&Scenario::default()).unwrap());
    assert_eq!(&ts, reference());
}
