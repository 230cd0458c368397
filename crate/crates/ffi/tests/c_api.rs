use asep_spectra_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;

#[test]
fn ensemble_gaps() {
    let mut e = std::ptr::null_mut();
    assert_eq!(unsafe { asep_ensemble_new(0.5, 1, 2, 1, &mut e) }, AsepStatus::Ok);
    let mut gap = 0.0;
    assert_eq!(unsafe { asep_sector_gap(e, AsepForm::Full, &mut gap) }, AsepStatus::Ok);
    assert!((gap - 2.5).abs() < 1e-12);
    assert_eq!(unsafe { asep_profile_gap(e, &mut gap) }, AsepStatus::Ok);
    assert!((gap - 2.5).abs() < 1e-12);
    unsafe { asep_ensemble_free(e) };

    assert_eq!(unsafe { asep_ensemble_new(0.5, 3, 2, 2, &mut e) }, AsepStatus::Ok);
    let mut tm = -1.0;
    assert_eq!(unsafe { asep_third_modulus(e, &mut tm) }, AsepStatus::Ok);
    assert!((tm - 0.1212).abs() < 5e-4);
    unsafe { asep_ensemble_free(e) };
}

#[test]
fn modified_form_needs_two_sticks() {
    let mut e = std::ptr::null_mut();
    assert_eq!(unsafe { asep_ensemble_new(0.5, 1, 2, 1, &mut e) }, AsepStatus::Ok);
    let mut gap = 0.0;
    assert_ne!(unsafe { asep_sector_gap(e, AsepForm::Modified, &mut gap) }, AsepStatus::Ok);
    assert!(unsafe { asep_last_error(std::ptr::null_mut(), 0) } > 0);
    unsafe { asep_ensemble_free(e) };
}

#[test]
fn degenerate_sector_code() {
    let mut e = std::ptr::null_mut();
    assert_eq!(unsafe { asep_ensemble_new(0.5, 2, 2, 0, &mut e) }, AsepStatus::Ok);
    let mut gap = 0.0;
    assert_eq!(unsafe { asep_profile_gap(e, &mut gap) }, AsepStatus::DegenerateSector);
    unsafe { asep_ensemble_free(e) };
}

#[test]
fn xxz_and_verify() {
    let mut gap = 0.0;
    assert_eq!(unsafe { asep_xxz_gap(1, 2, 2.0, 0, &mut gap) }, AsepStatus::Ok);
    assert!((gap - 1.0).abs() < 1e-10);
    assert_eq!(unsafe { asep_xxz_gap(1, 2, 0.5, 0, &mut gap) }, AsepStatus::InvalidParams);

    let mut passed = -1;
    let filter = c"closed-form";
    assert_eq!(unsafe { asep_verify(filter.as_ptr(), &mut passed) }, AsepStatus::Ok);
    assert_eq!(passed, 1);
    assert_eq!(unsafe { asep_verify(c"nope".as_ptr(), &mut passed) }, AsepStatus::InvalidParams);
}

#[test]
fn simulator_conserves_particles() {
    let mut e = std::ptr::null_mut();
    assert_eq!(unsafe { asep_ensemble_new(0.5, 3, 4, 5, &mut e) }, AsepStatus::Ok);
    let mut s = std::ptr::null_mut();
    assert_eq!(unsafe { asep_simulator_new(e, AsepMode::Lattice, 9, &mut s) }, AsepStatus::Ok);
    unsafe { asep_ensemble_free(e) };
    let mut t = 0.0;
    assert_eq!(unsafe { asep_simulator_step(s, 10_000, &mut t) }, AsepStatus::Ok);
    assert!(t > 0.0);
    let mut prof = [0usize; 4];
    assert_eq!(unsafe { asep_simulator_profile(s, prof.as_mut_ptr(), 4) }, AsepStatus::Ok);
    assert_eq!(prof.iter().sum::<usize>(), 5);
    assert!(prof.iter().all(|&w| w <= 3));
    assert_eq!(unsafe { asep_simulator_profile(s, prof.as_mut_ptr(), 2) }, AsepStatus::OutOfRange);
    unsafe { asep_simulator_free(s) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(asep_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/asep_spectra.h");
    assert!(header.exists());
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"asep_spectra.h\"\n\
         int main(void) {\n\
           AsepEnsemble *e = 0;\n\
           if (asep_ensemble_new(0.5, 2, 2, 1, &e) != ASEP_STATUS_OK) return 1;\n\
           double gap = 0;\n\
           AsepStatus s = asep_sector_gap(e, ASEP_FORM_FULL, &gap);\n\
           asep_ensemble_free(e);\n\
           return s == ASEP_STATUS_OK ? 0 : 2;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
