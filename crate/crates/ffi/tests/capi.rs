use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hhofenn_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        hho_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn objective(name: &str, dim: usize) -> *mut HhoObjective {
    let name = CString::new(name).unwrap();
    let mut obj = ptr::null_mut();
    let status = unsafe { hho_objective_new(name.as_ptr(), dim, &mut obj) };
    assert_eq!(status, HhoStatus::Ok, "{}", last_error());
    obj
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(hho_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn objective_lifecycle_and_evaluation() {
    let obj = objective("sphere", 3);
    unsafe {
        assert_eq!(hho_objective_dim(obj), 3);
        let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
        assert_eq!(
            hho_objective_bounds(obj, lo.as_mut_ptr(), hi.as_mut_ptr(), 3),
            HhoStatus::Ok
        );
        assert_eq!(lo, [-100.0; 3]);
        assert_eq!(hi, [100.0; 3]);
        let x = [1.0, 2.0, 3.0];
        let mut v = 0.0;
        assert_eq!(hho_objective_evaluate(obj, x.as_ptr(), 3, 0, &mut v), HhoStatus::Ok);
        assert_eq!(v, 14.0);
        let (mut has, mut opt) = (0, 1.0);
        assert_eq!(hho_objective_optimum(obj, &mut has, &mut opt), HhoStatus::Ok);
        assert_eq!((has, opt), (1, 0.0));

        assert_eq!(
            hho_objective_evaluate(obj, x.as_ptr(), 2, 0, &mut v),
            HhoStatus::DimensionMismatch
        );
        assert!(last_error().contains("dimension"));
        assert_eq!(
            hho_objective_bounds(obj, lo.as_mut_ptr(), hi.as_mut_ptr(), 2),
            HhoStatus::BufferTooSmall
        );
        hho_objective_free(obj);
        hho_objective_free(ptr::null_mut());
    }
}

#[test]
fn noisy_quartic_has_no_optimum_and_uses_the_seed() {
    let obj = objective("quartic_noise", 4);
    let x = [0.0; 4];
    unsafe {
        let (mut has, mut opt) = (1, 0.0);
        assert_eq!(hho_objective_optimum(obj, &mut has, &mut opt), HhoStatus::Ok);
        assert_eq!(has, 0);
        assert!(opt.is_nan());
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        hho_objective_evaluate(obj, x.as_ptr(), 4, 1, &mut a);
        hho_objective_evaluate(obj, x.as_ptr(), 4, 1, &mut b);
        hho_objective_evaluate(obj, x.as_ptr(), 4, 2, &mut c);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((0.0..1.0).contains(&a));
        hho_objective_free(obj);
    }
}

#[test]
fn bad_arguments_map_to_status_codes() {
    let mut obj = ptr::null_mut();
    let unknown = CString::new("no_such_function").unwrap();
    unsafe {
        assert_eq!(hho_objective_new(unknown.as_ptr(), 3, &mut obj), HhoStatus::UnknownId);
        assert!(obj.is_null());
        assert!(last_error().contains("no_such_function"));
        let sphere = CString::new("sphere").unwrap();
        assert_eq!(
            hho_objective_new(sphere.as_ptr(), 0, &mut obj),
            HhoStatus::InvalidArgument
        );
        assert_eq!(hho_objective_new(ptr::null(), 3, &mut obj), HhoStatus::NullPointer);
        assert_eq!(
            hho_objective_new(sphere.as_ptr(), 3, ptr::null_mut()),
            HhoStatus::NullPointer
        );
        assert_eq!(hho_objective_dim(ptr::null()), 0);
        assert!(hho_run_final_fitness(ptr::null()).is_nan());
        let mut t = 0.0;
        assert_eq!(hho_adaptive_threshold(0, 0, &mut t), HhoStatus::InvalidArgument);
    }
}

#[test]
fn error_message_is_truncated_and_terminated() {
    unsafe {
        hho_objective_new(ptr::null(), 3, &mut ptr::null_mut());
        let full = hho_last_error_message(ptr::null_mut(), 0);
        assert!(full > 4);
        let mut buf = [1 as c_char; 5];
        assert_eq!(hho_last_error_message(buf.as_mut_ptr(), 5), full);
        assert_eq!(buf[4], 0);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 4);
    }
}

#[test]
fn run_is_deterministic_and_exposes_its_trace() {
    let obj = objective("rastrigin", 5);
    let alg = CString::new("hho_plus").unwrap();
    unsafe {
        let (mut r1, mut r2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(hho_run(obj, alg.as_ptr(), 10, 40, 7, &mut r1), HhoStatus::Ok);
        assert_eq!(hho_run(obj, alg.as_ptr(), 10, 40, 7, &mut r2), HhoStatus::Ok);
        assert_eq!(hho_run_final_fitness(r1), hho_run_final_fitness(r2));
        assert!(hho_run_evaluations(r1) > 0);
        let n = hho_run_trace_len(r1);
        assert_eq!(n, 40);
        let mut trace = vec![0.0; n];
        assert_eq!(hho_run_trace(r1, trace.as_mut_ptr(), n), HhoStatus::Ok);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(trace[n - 1], hho_run_final_fitness(r1));
        let mut pos = [0.0; 5];
        assert_eq!(hho_run_position(r1, pos.as_mut_ptr(), 5), HhoStatus::Ok);
        let mut v = 0.0;
        hho_objective_evaluate(obj, pos.as_ptr(), 5, 0, &mut v);
        assert_eq!(v, hho_run_final_fitness(r1));
        assert_eq!(hho_run_trace(r1, trace.as_mut_ptr(), n - 1), HhoStatus::BufferTooSmall);
        hho_run_free(r1);
        hho_run_free(r2);

        let bad = CString::new("simulated_annealing").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(hho_run(obj, bad.as_ptr(), 10, 40, 7, &mut r), HhoStatus::UnknownId);
        assert_eq!(hho_run(obj, alg.as_ptr(), 1, 40, 7, &mut r), HhoStatus::InvalidArgument);
        hho_objective_free(obj);
    }
}

#[test]
fn rank_statistics() {
    unsafe {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        let mut p = 0.0;
        assert_eq!(hho_rank_sum_test(a.as_ptr(), 3, b.as_ptr(), 3, &mut p), HhoStatus::Ok);
        assert!((p - 0.1).abs() < 1e-12);
        let same = [2.0; 3];
        assert_eq!(
            hho_rank_sum_test(same.as_ptr(), 3, same.as_ptr(), 3, &mut p),
            HhoStatus::Ok
        );
        assert!(p.is_nan());
        assert_eq!(
            hho_rank_sum_test(ptr::null(), 0, b.as_ptr(), 3, &mut p),
            HhoStatus::InvalidArgument
        );

        let cells = [1.0, 2.0, 3.0, 3.0, 1.0, 2.0];
        let mut ranks = [0.0; 3];
        assert_eq!(
            hho_friedman_mean_ranks(cells.as_ptr(), 2, 3, ranks.as_mut_ptr()),
            HhoStatus::Ok
        );
        assert_eq!(ranks, [2.0, 1.5, 2.5]);
        assert_eq!(
            hho_friedman_mean_ranks(cells.as_ptr(), 1, 3, ranks.as_mut_ptr()),
            HhoStatus::InvalidArgument
        );

        let mut t = 0.0;
        assert_eq!(hho_adaptive_threshold(1, 10, &mut t), HhoStatus::Ok);
        assert!(t.is_finite());
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hhofenn.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "hho_objective_new",
        "hho_run_trace",
        "hho_friedman_mean_ranks",
        "HHO_STATUS_OK",
    ] {
        assert!(text.contains(sym), "{sym} missing from the header");
    }
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler found; skipping compilation");
        return;
    };
    assert!(probe.status.success());
    let src = std::env::temp_dir().join(format!("hhofenn_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"hhofenn.h\"\nint main(void) { HhoObjective *o = 0; HhoStatus s = hho_objective_new(\"sphere\", 2, &o); hho_objective_free(o); return s == HHO_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
