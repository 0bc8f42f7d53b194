use std::ffi::{CStr, CString};
use std::ptr;

use snspm_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = snspm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn preset(name: &str) -> *mut SnspmParams {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { snspm_params_preset(c(name).as_ptr(), &mut h) },
        SnspmStatus::Ok
    );
    assert!(!h.is_null());
    h
}

#[test]
fn rate_matches_core() {
    let h = preset("fig4");
    let mut point = SnspmRatePoint::default();
    let status = unsafe { snspm_rate(h, c("real").as_ptr(), 100.0, &mut point) };
    assert_eq!(status, SnspmStatus::Ok);
    let params = snspm_core::presets::find("fig4")
        .unwrap()
        .params
        .with_distance(100.0);
    let expected =
        snspm_core::rates::rate_point(&params, snspm_core::rates::Variant::Real).unwrap();
    assert_eq!(point.rate, expected.rate);
    assert_eq!(point.e_signal, expected.e_signal.unwrap());
    assert_eq!(point.p_nn, expected.p_nn);
    unsafe { snspm_params_free(h) };
}

#[test]
fn undefined_error_rate_is_nan() {
    let h = preset("fig4");
    unsafe {
        assert_eq!(
            snspm_params_override(h, c("epsilon=0").as_ptr()),
            SnspmStatus::Ok
        );
        assert_eq!(
            snspm_params_override(h, c("p_dark=0").as_ptr()),
            SnspmStatus::Ok
        );
        assert_eq!(
            snspm_params_override(h, c("warp=1").as_ptr()),
            SnspmStatus::Config
        );
    }
    let mut point = SnspmRatePoint::default();
    assert_eq!(
        unsafe { snspm_rate(h, c("real").as_ptr(), 10.0, &mut point) },
        SnspmStatus::Ok
    );
    assert_eq!(point.rate, 0.0);
    assert_eq!(point.p_conclusive, 0.0);
    assert!(point.e_signal.is_nan());
    unsafe { snspm_params_free(h) };
}

#[test]
fn max_distance_and_errors() {
    let h = preset("fig7a");
    let mut km = 0.0;
    assert_eq!(
        unsafe { snspm_max_distance(h, c("real_aopp").as_ptr(), 0.0, 1100.0, &mut km) },
        SnspmStatus::Ok
    );
    assert!((km - 973.0).abs() < 0.02 * 973.0, "{km}");

    let loss = preset("fig2");
    let status = unsafe { snspm_max_distance(loss, c("loss").as_ptr(), 0.0, 2000.0, &mut km) };
    assert_eq!(status, SnspmStatus::Numerical);
    assert!(last_error().contains("sign change"));

    let status = unsafe { snspm_max_distance(h, c("warp").as_ptr(), 0.0, 10.0, &mut km) };
    assert_eq!(status, SnspmStatus::Config);
    unsafe {
        snspm_params_free(h);
        snspm_params_free(loss);
    }
}

#[test]
fn failed_override_leaves_handle_untouched() {
    let h = preset("fig4");
    let status = unsafe { snspm_params_override(h, c("mu=-1").as_ptr()) };
    assert_eq!(status, SnspmStatus::Domain);
    assert!(last_error().contains("mu"));
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { snspm_params_to_json(h, &mut json) },
        SnspmStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { snspm_string_free(json) };
    let back = snspm_core::params::ProtocolParams::from_json(&text).unwrap();
    assert_eq!(back.mu, 0.1);

    let mut h2 = ptr::null_mut();
    assert_eq!(
        unsafe { snspm_params_from_json(c(&text).as_ptr(), &mut h2) },
        SnspmStatus::Ok
    );
    unsafe {
        snspm_params_free(h);
        snspm_params_free(h2);
    }
}

#[test]
fn null_and_bad_strings_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { snspm_params_preset(ptr::null(), &mut h) },
        SnspmStatus::NullPointer
    );
    assert_eq!(
        unsafe { snspm_params_preset(c("fig4").as_ptr(), ptr::null_mut()) },
        SnspmStatus::NullPointer
    );
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { snspm_params_preset(bad.as_ptr().cast(), &mut h) },
        SnspmStatus::InvalidUtf8
    );
    assert_eq!(
        unsafe { snspm_params_from_json(c("{").as_ptr(), &mut h) },
        SnspmStatus::Config
    );
    let mut point = SnspmRatePoint::default();
    assert_eq!(
        unsafe { snspm_rate(ptr::null(), c("real").as_ptr(), 0.0, &mut point) },
        SnspmStatus::NullPointer
    );
    unsafe { snspm_params_free(ptr::null_mut()) };
}

#[test]
fn attack_and_mc() {
    let h = preset("fig3");
    let mut r = SnspmAttackReport::default();
    assert_eq!(
        unsafe { snspm_attack(h, true, 500.0, &mut r) },
        SnspmStatus::Ok
    );
    assert!(r.detectable && r.ratio > 1.0);
    unsafe { snspm_params_free(h) };

    let mut s = SnspmMcSummary::default();
    assert_eq!(
        unsafe { snspm_mc_simulate(0.1, 0.05, 1.0, 100_000, 3, &mut s) },
        SnspmStatus::Ok
    );
    assert_eq!(s.rounds, 100_000);
    assert_eq!(s.correlation, 1.0);
    assert_eq!(
        unsafe { snspm_mc_simulate(-0.1, 0.05, 1.0, 10, 3, &mut s) },
        SnspmStatus::Domain
    );
}

#[test]
fn entropy_and_version() {
    let mut h = 0.0;
    assert_eq!(
        unsafe { snspm_binary_entropy(0.5, &mut h) },
        SnspmStatus::Ok
    );
    assert_eq!(h, 1.0);
    assert_eq!(
        unsafe { snspm_binary_entropy(1.5, &mut h) },
        SnspmStatus::Domain
    );
    let v = unsafe { CStr::from_ptr(snspm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
