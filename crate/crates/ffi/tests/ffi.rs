use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wavefront_ffi::*;

const SCENARIO: &str = "flux = \"greenshields\"\nR = 1.0\nV = 1.0\nalpha = 0.75\nnu = 4\nrho0 = [[-1.0, 0.4], [0.0, 0.6]]\nu = [[0.0, 0.1]]\ny0 = 0.0\nt_end = 1.0\n";

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { wft_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn geometry_matches_closed_form() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            wft_flux_model_new(WFT_FAMILY_GREENSHIELDS, 1.0, 1.0, 0.75, 0.0, &mut m),
            WftStatus::Ok
        );
        let mut g = WftGeometry::default();
        assert_eq!(wft_geometry_at(m, 0.4, &mut g), WftStatus::Ok);
        assert!((g.check_rho - 0.25 * 0.6).abs() < 1e-12);
        assert!((g.hat_rho - 0.75 * 0.6).abs() < 1e-12);
        assert!((g.capacity - 0.1875 * 0.36).abs() < 1e-12);
        let mut f = 0.0;
        assert_eq!(wft_flux(m, 0.5, &mut f), WftStatus::Ok);
        assert_eq!(f, 0.25);
        assert_eq!(wft_geometry_at(m, 1.5, &mut g), WftStatus::Domain);
        assert!(last_error().contains("1.5"));
        wft_flux_model_free(m);
    }
}

#[test]
fn bad_arguments_report_status() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            wft_flux_model_new(WFT_FAMILY_GREENSHIELDS, 1.0, 1.0, 1.5, 0.0, &mut m),
            WftStatus::Model
        );
        assert!(m.is_null());
        assert!(last_error().contains("alpha"));
        assert_eq!(
            wft_flux_model_new(7, 1.0, 1.0, 0.5, 0.0, &mut m),
            WftStatus::InvalidArgument
        );
        assert_eq!(
            wft_flux_model_new(WFT_FAMILY_GREENSHIELDS, 1.0, 1.0, 0.5, 0.0, ptr::null_mut()),
            WftStatus::NullPointer
        );
        let mut out = 0.0;
        assert_eq!(wft_simulation_time(ptr::null(), &mut out), WftStatus::NullPointer);
        let bad = CString::new("flux = \"greenshields\"\nalpha = 2\n").unwrap();
        let mut sim = ptr::null_mut();
        assert_eq!(wft_simulation_new(bad.as_ptr(), &mut sim), WftStatus::Scenario);
        assert!(sim.is_null());
        wft_simulation_free(ptr::null_mut());
        wft_flux_model_free(ptr::null_mut());
    }
}

#[test]
fn simulation_lifecycle() {
    let text = CString::new(SCENARIO).unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(
            wft_simulation_new(text.as_ptr(), &mut sim),
            WftStatus::Ok,
            "{}",
            last_error()
        );
        let mut n = 0usize;
        assert_eq!(wft_simulation_validate(sim, 10, &mut n), WftStatus::InvalidArgument);
        assert_eq!(wft_simulation_run(sim, 0.5), WftStatus::Ok);
        assert_eq!(wft_simulation_run(sim, 0.25), WftStatus::Validation);
        assert_eq!(wft_simulation_run(sim, -1.0), WftStatus::Ok);
        let mut t = 0.0;
        wft_simulation_time(sim, &mut t);
        assert_eq!(t, 1.0);

        // u = 0.1 is projected onto the nu = 4 speed grid, so compare with the
        // grid run through the library.
        let sc = wavefront::Scenario::parse(SCENARIO).unwrap();
        let h = sc.solve().unwrap();
        let xs = [-0.5, -0.01, 0.05, 0.15, 0.5];
        let mut rho = [0.0; 5];
        assert_eq!(
            wft_simulation_sample_density(sim, xs.as_ptr(), xs.len(), rho.as_mut_ptr()),
            WftStatus::Ok
        );
        assert_eq!(rho.to_vec(), h.sample_density(1.0, &xs).unwrap());
        let mut y = 0.0;
        wft_simulation_av_position(sim, &mut y);
        assert_eq!(y, h.av_position(1.0).unwrap());

        let mut len = 0usize;
        wft_simulation_ledger_len(sim, &mut len);
        assert_eq!(len, h.ledger.len());
        let mut e = WftLedgerEntry::default();
        assert_eq!(wft_simulation_ledger_entry(sim, 0, &mut e), WftStatus::Ok);
        assert_eq!(e.kind, 0);
        assert_eq!(e.upsilon, h.upsilon0());
        assert_eq!(
            wft_simulation_ledger_entry(sim, len, &mut e),
            WftStatus::InvalidArgument
        );
        let mut ups = 0.0;
        wft_simulation_upsilon(sim, &mut ups);
        assert!(ups <= h.upsilon0() + 1e-9);

        assert_eq!(wft_simulation_validate(sim, 100, &mut n), WftStatus::Ok);
        assert_eq!(n, 0);

        let mut needed = 0usize;
        assert_eq!(
            wft_simulation_scenario_hash(sim, ptr::null_mut(), 0, &mut needed),
            WftStatus::Ok
        );
        assert_eq!(needed, 65);
        let mut buf = vec![0 as c_char; needed];
        wft_simulation_scenario_hash(sim, buf.as_mut_ptr(), buf.len(), ptr::null_mut());
        let hash: String = buf[..64].iter().map(|&c| c as u8 as char).collect();
        assert_eq!(hash, sc.hash());
        wft_simulation_free(sim);
    }
}

/// Compiles a small C program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("wavefront.h").exists(), "header not generated");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libwavefront_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "wavefront.h"
int main(void) {
    WftFluxModel *m = NULL;
    if (wft_flux_model_new(WFT_FAMILY_GREENSHIELDS, 1.0, 1.0, 0.75, 0.0, &m) != WFT_STATUS_OK) return 1;
    WftGeometry g;
    if (wft_geometry_at(m, 0.1, &g) != WFT_STATUS_OK) return 2;
    wft_flux_model_free(m);
    if (g.hat_rho < 0.6749 || g.hat_rho > 0.6751) return 3;
    const char *text = "flux = \"greenshields\"\nR = 1.0\nV = 1.0\nalpha = 0.75\nnu = 3\n"
                       "rho0 = [[0.0, 0.5]]\nu = [[0.0, 0.5]]\ny0 = 0.0\nt_end = 2.0\n";
    WftSimulation *s = NULL;
    if (wft_simulation_new(text, &s) != WFT_STATUS_OK) return 4;
    if (wft_simulation_run(s, -1.0) != WFT_STATUS_OK) return 5;
    double y = 0.0;
    wft_simulation_av_position(s, &y);
    wft_simulation_free(s);
    printf("%s %.6f\n", wft_version(), y);
    return y > 0.999 && y < 1.001 ? 0 : 6;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}

fn tempfile_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
