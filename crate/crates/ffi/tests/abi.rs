use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use zmw_ffi::*;

fn set(re: &[f64], im: &[f64], repeats: bool) -> *mut ZmwShiftSet {
    let mut out = ptr::null_mut();
    let st = unsafe { zmw_shift_set_new(re.as_ptr(), im.as_ptr(), re.len(), i32::from(repeats), &mut out) };
    assert_eq!(st, ZmwStatus::Ok);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(zmw_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn zeta_two() {
    let mut z = ZmwComplex::default();
    assert_eq!(unsafe { zmw_zeta(2.0, 0.0, &mut z) }, ZmwStatus::Ok);
    assert!((z.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
    assert_eq!(unsafe { zmw_zeta(1.0, 0.0, &mut z) }, ZmwStatus::Domain);
    assert!(last_error().contains("pole"));
}

#[test]
fn divisor_table_round_trip() {
    let d = set(&[0.0, 0.0], &[0.0, 0.0], true);
    assert_eq!(unsafe { zmw_shift_set_len(d) }, 2);
    let mut table = ptr::null_mut();
    assert_eq!(unsafe { zmw_tau_table_build(d, 100, &mut table) }, ZmwStatus::Ok);
    assert_eq!(unsafe { zmw_tau_table_limit(table) }, 100);
    let mut v = ZmwComplex::default();
    // d(72) = d(2^3 3^2) = 12
    assert_eq!(unsafe { zmw_tau_table_get(table, 72, &mut v) }, ZmwStatus::Ok);
    assert!((v.re - 12.0).abs() < 1e-12 && v.im == 0.0);
    assert_eq!(unsafe { zmw_tau_table_get(table, 101, &mut v) }, ZmwStatus::Bounds);
    assert_eq!(unsafe { zmw_tau_table_get(table, 0, &mut v) }, ZmwStatus::Bounds);
    unsafe {
        zmw_tau_table_free(table);
        zmw_shift_set_free(d);
    }
}

#[test]
fn invalid_input_is_reported() {
    let mut out = ptr::null_mut();
    let re = [0.01, 0.01];
    let im = [0.0, 0.0];
    let st = unsafe { zmw_shift_set_new(re.as_ptr(), im.as_ptr(), 2, 0, &mut out) };
    assert_eq!(st, ZmwStatus::InvalidShiftSet);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { zmw_zeta(2.0, 0.0, ptr::null_mut()) }, ZmwStatus::NullPointer);
    assert_eq!(unsafe { zmw_tau_table_build(ptr::null(), 10, &mut ptr::null_mut()) }, ZmwStatus::NullPointer);
    unsafe {
        zmw_shift_set_free(ptr::null_mut());
        zmw_string_free(ptr::null_mut());
    }
}

#[test]
fn euler_product_of_unshifted_sets() {
    // A({0}, {0}) = 1 exactly: each local factor is (1 - p^-2) / (1 - p^-2).
    let z = set(&[0.0], &[0.0], false);
    let mut v = ZmwComplex::default();
    let mut err = -1.0;
    assert_eq!(unsafe { zmw_euler_a(z, z, 1000, &mut v, &mut err) }, ZmwStatus::Ok);
    assert!((v.re - 1.0).abs() < 1e-14 && v.im.abs() < 1e-15);
    assert!(err >= 0.0);
    unsafe { zmw_shift_set_free(z) };
}

#[test]
fn moment_and_report() {
    let a = set(&[0.013], &[0.0], false);
    let b = set(&[0.007], &[0.0], false);
    let (mut ta, mut tb) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(zmw_tau_table_build(a, 2000, &mut ta), ZmwStatus::Ok);
        assert_eq!(zmw_tau_table_build(b, 2000, &mut tb), ZmwStatus::Ok);
    }
    let mut v = ZmwComplex::default();
    assert_eq!(unsafe { zmw_moment_empirical(ta, tb, 300.0, 2000, &mut v) }, ZmwStatus::Ok);
    assert!(v.re > 0.0);
    assert_eq!(unsafe { zmw_moment_empirical(ta, tb, 300.0, 5000, &mut v) }, ZmwStatus::Bounds);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { zmw_moment_report_json(a, b, 300.0, 2000, 100, &mut json) }, ZmwStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { zmw_string_free(json) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(report["rel_dev"].as_f64().unwrap() < 0.1);
    assert!(report.get("timing").is_none());
    assert_eq!(report["version"], unsafe { CStr::from_ptr(zmw_version()) }.to_str().unwrap());
    unsafe {
        zmw_tau_table_free(ta);
        zmw_tau_table_free(tb);
        zmw_shift_set_free(a);
        zmw_shift_set_free(b);
    }
}

#[test]
fn identity_suite_over_the_boundary() {
    let mut json = ptr::null_mut();
    let mut passed = -1;
    assert_eq!(unsafe { zmw_identities_json(3, 4, &mut passed, &mut json) }, ZmwStatus::Ok);
    assert_eq!(passed, 1);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { zmw_string_free(json) };
    assert!(text.contains("local_identity"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("zmw.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct ZmwShiftSet ZmwShiftSet;",
        "typedef struct ZmwTauTable ZmwTauTable;",
        "ZMW_STATUS_OK = 0",
        "ZMW_STATUS_PANIC",
        "zmw_last_error_message(void)",
        "zmw_shift_set_new(",
        "zmw_tau_table_free(",
        "zmw_moment_report_json(",
        "size_t len",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libzmw_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_c");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "zmw.h"

int main(void) {
    double re[2] = {0.0, 0.0}, im[2] = {0.0, 0.0};
    ZmwShiftSet *d = NULL;
    ZmwTauTable *t = NULL;
    ZmwComplex v;
    if (zmw_shift_set_new(re, im, 2, 1, &d) != ZMW_STATUS_OK) return 1;
    if (zmw_tau_table_build(d, 1000, &t) != ZMW_STATUS_OK) return 2;
    if (zmw_tau_table_get(t, 360, &v) != ZMW_STATUS_OK) return 3;
    if (zmw_tau_table_get(t, 1001, &v) != ZMW_STATUS_BOUNDS) return 4;
    if (zmw_last_error_message() == NULL) return 5;
    zmw_tau_table_get(t, 360, &v);
    printf("%s d(360) = %.1f\n", zmw_version(), v.re);
    zmw_tau_table_free(t);
    zmw_shift_set_free(d);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("main");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("running the C compiler");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("d(360) = 24.0"), "{text}");
}
