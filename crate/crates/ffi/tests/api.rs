use std::ffi::{CStr, CString};
use std::ptr;

use lia_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(lia_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_and_a3() {
    let v = unsafe { CStr::from_ptr(lia_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let eu = lia_closed_form_a3(0.2, LIA_METRIC_EUCLIDEAN);
    let hy = lia_closed_form_a3(0.2, LIA_METRIC_HYPERBOLIC);
    assert!((eu - 0.9391013674).abs() < 1e-10);
    assert!((hy - 1.0648477733).abs() < 1e-10);
    assert!(lia_closed_form_a3(0.2, 7).is_nan());
}

#[test]
fn profile_round_trip() {
    let mut h: *mut LiaProfile = ptr::null_mut();
    let st = unsafe { lia_profile_new(0.2, 1.0, LIA_METRIC_EUCLIDEAN, 50.0, 0.01, &mut h) };
    assert_eq!(st, LiaStatus::Ok);
    let n = unsafe { lia_profile_len(h) };
    assert_eq!(n, 10001);
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; 3 * n];
    assert_eq!(unsafe { lia_profile_tangents(h, s.as_mut_ptr(), t.as_mut_ptr(), n) }, LiaStatus::Ok);
    assert_eq!(s[0], -50.0);
    assert_eq!(s[n - 1], 50.0);
    let mid = n / 2;
    assert!((t[3 * mid + 2] - 1.0).abs() < 1e-12, "T(0) = e3");
    for i in (0..n).step_by(997) {
        let norm = t[3 * i].powi(2) + t[3 * i + 1].powi(2) + t[3 * i + 2].powi(2);
        assert!((norm - 1.0).abs() < 1e-12);
    }
    let (mut am, mut ap) = ([0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { lia_profile_asymptotics(h, am.as_mut_ptr(), ap.as_mut_ptr()) }, LiaStatus::Ok);
    let a3 = lia_closed_form_a3(0.2, LIA_METRIC_EUCLIDEAN);
    assert!((ap[2] - a3).abs() < 0.012 && (am[2] - a3).abs() < 0.012);

    assert_eq!(unsafe { lia_profile_tangents(h, s.as_mut_ptr(), t.as_mut_ptr(), n - 1) }, LiaStatus::BufferTooSmall);
    assert!(last_error().contains("buffer"));
    unsafe { lia_profile_free(h) };
}

#[test]
fn null_and_invalid_arguments() {
    let mut h: *mut LiaProfile = ptr::null_mut();
    assert_eq!(unsafe { lia_profile_new(0.2, 1.0, LIA_METRIC_EUCLIDEAN, 5.0, 0.1, ptr::null_mut()) }, LiaStatus::NullPointer);
    assert!(last_error().contains("out"));
    assert_eq!(unsafe { lia_profile_new(0.2, 1.0, 0, 5.0, 0.1, &mut h) }, LiaStatus::InvalidArgument);
    assert!(h.is_null());
    assert_eq!(unsafe { lia_profile_new(0.2, -1.0, LIA_METRIC_EUCLIDEAN, 5.0, 0.1, &mut h) }, LiaStatus::InvalidArgument);
    assert_eq!(unsafe { lia_profile_len(ptr::null()) }, 0);
    assert_eq!(unsafe { lia_report_stages(ptr::null()) }, 0);
    assert!(unsafe { lia_report_json(ptr::null(), 0) }.is_null());
    unsafe {
        lia_profile_free(ptr::null_mut());
        lia_report_free(ptr::null_mut());
        lia_string_free(ptr::null_mut());
    }
}

#[test]
fn fd_run_and_report_access() {
    let probes = [0.95, 0.9];
    let mut r: *mut LiaReport = ptr::null_mut();
    let st = unsafe {
        lia_fd_run_backward(0.2, LIA_METRIC_EUCLIDEAN, 5.0, 0.1, -2e-3, 0.9, false, probes.as_ptr(), probes.len(), &mut r)
    };
    assert_eq!(st, LiaStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { lia_report_stages(r) }, 1);
    let (mut final_t, mut steps, mut n_probes) = (0.0, 0u64, 0usize);
    assert_eq!(unsafe { lia_report_summary(r, 0, &mut final_t, &mut steps, &mut n_probes) }, LiaStatus::Ok);
    assert!((final_t - 0.9).abs() < 1e-9);
    assert_eq!(steps, 50);
    assert_eq!(n_probes, 2);
    let (mut t, mut c, mut err) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { lia_report_probe(r, 0, 1, &mut t, &mut c, &mut err) }, LiaStatus::Ok);
    assert!((t - 0.9).abs() < 1e-9);
    assert!((c - 0.2 / 0.9f64.sqrt()).abs() < 1e-2);
    assert_eq!(unsafe { lia_report_probe(r, 0, 2, &mut t, &mut c, &mut err) }, LiaStatus::InvalidArgument);
    assert_eq!(unsafe { lia_report_summary(r, 1, &mut final_t, &mut steps, &mut n_probes) }, LiaStatus::InvalidArgument);

    let json = unsafe { lia_report_json(r, 0) };
    assert!(!json.is_null());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"probes\""));
    unsafe {
        lia_string_free(json);
        lia_report_free(r);
    }
}

#[test]
fn spectral_run_rejects_bad_bc_code() {
    let mut r: *mut LiaReport = ptr::null_mut();
    let st = unsafe { lia_spectral_run_backward(0.2, LIA_METRIC_EUCLIDEAN, 10.0, 64, -1e-3, 0.9, 9, 0.0, ptr::null(), 0, &mut r) };
    assert_eq!(st, LiaStatus::InvalidArgument);
    assert!(r.is_null());
}

#[test]
fn spectral_run_small() {
    let probes = [0.99];
    let mut r: *mut LiaReport = ptr::null_mut();
    let st = unsafe {
        lia_spectral_run_backward(0.2, LIA_METRIC_EUCLIDEAN, 10.0, 256, -1e-4, 0.99, LIA_BC_SELF_SIMILARITY, 0.0, probes.as_ptr(), 1, &mut r)
    };
    assert_eq!(st, LiaStatus::Ok, "{}", last_error());
    let (mut t, mut c, mut err) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { lia_report_probe(r, 0, 0, &mut t, &mut c, &mut err) }, LiaStatus::Ok);
    assert!(err < 1e-3, "{err}");
    unsafe { lia_report_free(r) };
}

#[test]
fn config_errors_map_to_status() {
    let mut r: *mut LiaReport = ptr::null_mut();
    let bad = CString::new("experiment = FdBackwardFixed\nbogus = 1\n").unwrap();
    assert_eq!(unsafe { lia_run_config(bad.as_ptr(), ptr::null(), &mut r) }, LiaStatus::Config);
    assert!(last_error().contains("bogus"));
    assert_eq!(unsafe { lia_run_config(ptr::null(), ptr::null(), &mut r) }, LiaStatus::NullPointer);

    let unphysical = CString::new("experiment = FdBackwardAsymptotic\nc0 = 3\nL = 5\nds = 0.1\ndt = -1e-3\nt_end = 0.99\nprobes = 0.99\n").unwrap();
    assert_eq!(unsafe { lia_run_config(unphysical.as_ptr(), ptr::null(), &mut r) }, LiaStatus::Solver);
}

#[test]
fn config_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new("experiment = FdBackwardFixed\nL = 5\nds = 0.1\ndt = -2e-3\nt_end = 0.9\nprobes = 0.95, 0.9\n").unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut r: *mut LiaReport = ptr::null_mut();
    assert_eq!(unsafe { lia_run_config(cfg.as_ptr(), out.as_ptr(), &mut r) }, LiaStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { lia_report_stages(r) }, 1);
    assert!(dir.path().join("manifest.json").is_file());
    assert!(dir.path().join("report.json").is_file());
    unsafe { lia_report_free(r) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lia.h")).unwrap();
    for name in [
        "lia_last_error",
        "lia_version",
        "lia_profile_new",
        "lia_profile_free",
        "lia_fd_run_backward",
        "lia_spectral_run_backward",
        "lia_run_config",
        "lia_report_json",
        "lia_string_free",
        "LIA_STATUS_BUFFER_TOO_SMALL",
        "LIA_METRIC_HYPERBOLIC",
        "typedef struct LiaReport LiaReport",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
