//! The C interface exercised from Rust, plus a C program built against the
//! generated header and the static library.

use lhg_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let p = lhg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { lhg_laguerre_function(7, 0.5, 0.0, &mut v) }, LhgStatus::Ok);
    assert!((v - 1.0).abs() < 1e-13);

    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { lhg_bessel_j(0.0, 0.0, 0.0, &mut re, &mut im) }, LhgStatus::Ok);
    assert_eq!((re, im), (1.0, 0.0));

    let mut h0 = 0.0;
    let mut h1 = 0.0;
    assert_eq!(unsafe { lhg_heat_kernel(0.0, 0.5, 2.0, 0.0, 0.0, &mut h0) }, LhgStatus::Ok);
    assert_eq!(unsafe { lhg_heat_kernel(0.0, 0.5, 2.0, 1.0, 0.5, &mut h1) }, LhgStatus::Ok);
    assert!(h0 > h1 && h1 > 0.0);
}

#[test]
fn errors_are_reported() {
    let mut v = 0.0;
    assert_eq!(unsafe { lhg_laguerre_function(1, 0.0, -1.0, &mut v) }, LhgStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { lhg_laguerre_function(1, 0.0, 1.0, ptr::null_mut()) }, LhgStatus::NullArgument);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { lhg_heat_kernel(0.0, 0.5, -1.0, 0.0, 0.0, &mut v) }, LhgStatus::InvalidArgument);
    let mut f = ptr::null_mut();
    let missing = CString::new("/nonexistent/dir/f").unwrap();
    assert_eq!(unsafe { lhg_grid_function_read(missing.as_ptr(), &mut f) }, LhgStatus::Io);
    assert!(f.is_null());
}

#[test]
fn handles_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = CString::new(dir.path().join("h").to_str().unwrap()).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { lhg_fixture_heat_kernel(0.0, 1.0, &mut f) }, LhgStatus::Ok);
    assert_eq!(unsafe { lhg_grid_function_write(f, stem.as_ptr()) }, LhgStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { lhg_grid_function_read(stem.as_ptr(), &mut g) }, LhgStatus::Ok);

    let (mut alpha, mut n_x, mut n_t) = (0.0, 0usize, 0usize);
    assert_eq!(unsafe { lhg_grid_function_shape(g, &mut alpha, &mut n_x, &mut n_t) }, LhgStatus::Ok);
    let mut a = [0.0; 4];
    let mut b = [0.0; 4];
    for (i, j) in [(0, 0), (n_x / 2, n_t / 3), (n_x - 1, n_t - 1)] {
        let [x, t, re, im] = &mut a;
        assert_eq!(unsafe { lhg_grid_function_sample(f, i, j, x, t, re, im) }, LhgStatus::Ok);
        let [x, t, re, im] = &mut b;
        assert_eq!(unsafe { lhg_grid_function_sample(g, i, j, x, t, re, im) }, LhgStatus::Ok);
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }
    let [x, t, re, im] = &mut a;
    assert_eq!(unsafe { lhg_grid_function_sample(g, n_x, 0, x, t, re, im) }, LhgStatus::OutOfBounds);
    unsafe {
        lhg_grid_function_free(f);
        lhg_grid_function_free(g);
    }
}

#[test]
fn packet_transform_peaks_at_its_frequency_and_degree() {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { lhg_fixture_psi_packet(1.0, 1.0, 2, 4.0, &mut f) }, LhgStatus::Ok);
    let mut fh = ptr::null_mut();
    assert_eq!(unsafe { lhg_forward(f, 8, 3.0, &mut fh) }, LhgStatus::Ok);
    let (mut n_l, mut n_m) = (0usize, 0usize);
    assert_eq!(unsafe { lhg_spectral_function_shape(fh, &mut n_l, &mut n_m) }, LhgStatus::Ok);
    assert_eq!(n_m, 9);
    let (mut best, mut at) = (0.0_f64, (0.0, 0));
    for l in 0..n_l {
        for m in 0..n_m {
            let (mut lambda, mut re, mut im) = (0.0, 0.0, 0.0);
            assert_eq!(unsafe { lhg_spectral_function_sample(fh, l, m, &mut lambda, &mut re, &mut im) }, LhgStatus::Ok);
            if re.hypot(im) > best {
                best = re.hypot(im);
                at = (lambda, m);
            }
        }
    }
    assert_eq!(at.1, 2);
    assert!((at.0 - 1.0).abs() < 0.1);

    let mut back = ptr::null_mut();
    assert_eq!(unsafe { lhg_inverse(fh, f, &mut back) }, LhgStatus::Ok);
    let (mut alpha, mut n_x, mut n_t) = (0.0, 0usize, 0usize);
    assert_eq!(unsafe { lhg_grid_function_shape(back, &mut alpha, &mut n_x, &mut n_t) }, LhgStatus::Ok);
    assert_eq!(alpha, 1.0);
    unsafe {
        lhg_spectral_function_free(fh);
        lhg_grid_function_free(f);
        lhg_grid_function_free(back);
    }
}

#[test]
fn zero_function_must_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { lhg_fixture_heat_kernel(0.0, 0.25, &mut f) }, LhgStatus::Ok);
    // overwrite the samples with zeros through the file format
    let stem = dir.path().join("z");
    let cstem = CString::new(stem.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { lhg_grid_function_write(f, cstem.as_ptr()) }, LhgStatus::Ok);
    let csv = stem.with_extension("csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let mut out = String::from(lines.next().unwrap());
    out.push('\n');
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        out.push_str(&format!("{},{},0.0000000000000000e0,0.0000000000000000e0\n", cols[0], cols[1]));
    }
    std::fs::write(&csv, out).unwrap();
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { lhg_grid_function_read(cstem.as_ptr(), &mut z) }, LhgStatus::Ok, "{}", last_error());
    let mut conclusion = LhgConclusion::Inconclusive;
    let mut residual = f64::NAN;
    let st = unsafe { lhg_miyachi_certificate(z, 1.0, 0.3, 1.0, 0.25, &mut conclusion, &mut residual) };
    assert_eq!(st, LhgStatus::Ok);
    assert_eq!(conclusion, LhgConclusion::MustVanish);
    assert_eq!(residual, 0.0);
    unsafe {
        lhg_grid_function_free(f);
        lhg_grid_function_free(z);
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("liblhg_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
