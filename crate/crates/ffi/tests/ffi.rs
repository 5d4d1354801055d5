use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use roa_ffi::*;

fn last_error() -> String {
    let p = roa_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn nonlinear(w: f64) -> *mut RoaSystem {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { roa_system_new_nonlinear(w, &mut sys) }, RoaStatus::Ok);
    sys
}

#[test]
fn constructors_validate() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { roa_system_new_linear(2.0, -1.0, 1.0, &mut sys) }, RoaStatus::InvalidArgument);
    assert!(sys.is_null());
    assert!(last_error().contains("beta must be positive"));

    let (f, g) = ([0.0, 1.0, -1.0], [1.0, 1.0]);
    let st = unsafe { roa_system_new_poly(1.0, f.as_ptr(), 3, g.as_ptr(), 2, &mut sys) };
    assert_eq!(st, RoaStatus::InvalidArgument);

    let g = [0.0, -0.1, 1.0];
    let st = unsafe { roa_system_new_poly(3.0, f.as_ptr(), 3, g.as_ptr(), 3, &mut sys) };
    assert_eq!(st, RoaStatus::Ok);
    unsafe { roa_system_free(sys) };

    assert_eq!(unsafe { roa_system_new_nonlinear(1.0, ptr::null_mut()) }, RoaStatus::NullPointer);
    unsafe { roa_system_free(ptr::null_mut()) };
}

#[test]
fn rhs_and_equilibria() {
    let sys = nonlinear(3.0);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(unsafe { roa_reduced_rhs(sys, 1.0, 1.0, &mut a, &mut b) }, RoaStatus::Ok);
    assert_eq!((a, b), (0.0, 0.0));

    let mut count = 0;
    let st = unsafe { roa_equilibria(sys, -1.0, 2.0, ptr::null_mut(), 0, &mut count) };
    assert_eq!(st, RoaStatus::BufferTooSmall);
    assert_eq!(count, 4);
    let mut buf = vec![
        RoaEquilibrium { li: 0.0, lbar: 0.0, kind: RoaEquilibriumKind::NonHyperbolic };
        count
    ];
    let st = unsafe { roa_equilibria(sys, -1.0, 2.0, buf.as_mut_ptr(), buf.len(), &mut count) };
    assert_eq!(st, RoaStatus::Ok);
    let second = buf.iter().find(|e| e.lbar == 1.0 && e.li > 1.2).unwrap();
    assert!((second.li - 1.35).abs() < 1e-8);
    assert_eq!(second.kind, RoaEquilibriumKind::Saddle);
    unsafe { roa_system_free(sys) };
}

#[test]
fn solve_and_inspect() {
    let sys = nonlinear(3.0);
    let grid = RoaGridSpec { xmin: -0.5, xmax: 2.5, ymin: -0.5, ymax: 2.5, nx: 41, ny: 41 };
    let snaps = [0.5, 1.0];
    let mut sol = ptr::null_mut();
    let st = unsafe { roa_solve(sys, &grid, 1.0, 1.0, 0.3, 1.0, 0.5, snaps.as_ptr(), 2, &mut sol) };
    assert_eq!(st, RoaStatus::Ok);
    assert_eq!(unsafe { roa_solution_snapshot_count(sol) }, 2);

    let (mut a0, mut a1) = (0.0, 0.0);
    unsafe {
        assert_eq!(roa_solution_area(sol, 0, &mut a0), RoaStatus::Ok);
        assert_eq!(roa_solution_area(sol, 1, &mut a1), RoaStatus::Ok);
        assert_eq!(roa_solution_area(sol, 2, &mut a1), RoaStatus::InvalidArgument);
    }
    assert!(a0 > 0.0 && a1 >= a0);

    let n = 41 * 41;
    let mut values = vec![0.0; n];
    let mut mask = vec![0u8; n];
    unsafe {
        assert_eq!(roa_solution_values(sol, 1, values.as_mut_ptr(), n - 1), RoaStatus::BufferTooSmall);
        assert_eq!(roa_solution_values(sol, 1, values.as_mut_ptr(), n), RoaStatus::Ok);
        assert_eq!(roa_solution_mask(sol, 1, mask.as_mut_ptr(), n), RoaStatus::Ok);
    }
    for (v, m) in values.iter().zip(&mask) {
        assert_eq!(*m == 1, *v <= 0.0);
    }
    let dx = 3.0 / 40.0;
    let counted = mask.iter().filter(|&&m| m == 1).count() as f64 * dx * dx;
    assert!((counted - a1).abs() < 1e-12);

    let bad = [1.0, 0.5];
    let mut sol2 = ptr::null_mut();
    let st = unsafe { roa_solve(sys, &grid, 1.0, 1.0, 0.3, 1.0, 0.5, bad.as_ptr(), 2, &mut sol2) };
    assert_eq!(st, RoaStatus::InvalidArgument);
    assert!(sol2.is_null());
    unsafe {
        roa_solution_free(sol);
        roa_system_free(sys);
    }
}

#[test]
fn basin_and_convergence() {
    let sys = nonlinear(3.0);
    let grid = RoaGridSpec { xmin: 0.4, xmax: 1.6, ymin: 0.4, ymax: 1.6, nx: 7, ny: 7 };
    let mut buf = vec![0u8; 49];
    assert_eq!(unsafe { roa_classify_basin(sys, &grid, buf.as_mut_ptr(), 49) }, RoaStatus::Ok);
    // centre (1, 1) converges; (1.6, 1.0) lies beyond the saddle at 1.35
    assert_eq!(buf[3 * 7 + 3], 1);
    assert_eq!(buf[3 * 7 + 6], 0);

    let (mut t, mut kind) = (-1.0, RoaConvergence::Timeout);
    assert_eq!(unsafe { roa_convergence_time(sys, 1.0, 1.0, 1e-3, &mut t, &mut kind) }, RoaStatus::Ok);
    assert_eq!((t, kind), (0.0, RoaConvergence::Reached));
    assert_eq!(unsafe { roa_convergence_time(sys, 1.4, 1.0, 1e-3, &mut t, &mut kind) }, RoaStatus::Ok);
    assert_eq!(kind, RoaConvergence::Diverged);
    unsafe { roa_system_free(sys) };
}

#[test]
fn certify() {
    // complete graph on 3 nodes
    let w = [0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
    let (mut ok, mut margin) = (false, 0.0);
    assert_eq!(unsafe { roa_certify_linear(3, w.as_ptr(), 1.0, 1.0, &mut ok, &mut margin) }, RoaStatus::Ok);
    assert!(ok && (margin - 1.0).abs() < 1e-12);
    let self_loop = [1.0];
    let st = unsafe { roa_certify_linear(1, self_loop.as_ptr(), 1.0, 1.0, &mut ok, &mut margin) };
    assert_eq!(st, RoaStatus::InvalidArgument);
    let st = unsafe { roa_certify_linear(3, ptr::null(), 1.0, 1.0, &mut ok, &mut margin) };
    assert_eq!(st, RoaStatus::NullPointer);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/roa_ffi.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["roa_system_new_linear", "roa_solve", "roa_solution_free", "roa_last_error_message", "RoaStatus"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ RoaSystem *s = 0; return (int)roa_system_new_nonlinear(1.0, &s); }}\n",
            header.display()
        ),
    )
    .unwrap();
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() else {
        eprintln!("no C compiler available; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
