//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler or static library is available.

use std::path::{Path, PathBuf};
use std::process::Command;

const SOURCE: &str = r#"
#include <math.h>
#include <stdio.h>
#include "edtc.h"

static const char *FIG1 =
    "params t1=100 t2=1 meq=0.8\n"
    "delay 10\n"
    "pulse y 180deg\n"
    "repeat 200\n";

int main(void) {
    EdtcProgram *prog = NULL;
    if (edtc_program_parse(FIG1, &prog) != EDTC_STATUS_OK) return 10;
    EdtcSeries *series = NULL;
    if (edtc_simulate(prog, -1, false, &series) != EDTC_STATUS_OK) return 11;
    EdtcSpectrum *spec = NULL;
    if (edtc_spectrum(series, 0, 2, &spec) != EDTC_STATUS_OK) return 12;
    EdtcSpectrumSummary s;
    if (edtc_spectrum_summary(spec, &s) != EDTC_STATUS_OK) return 13;
    if (!s.has_peak || fabs(s.peak_nu - 0.5) > s.bin_width) return 14;

    EdtcProgram *bad = NULL;
    if (edtc_program_parse("params meq=0.8 t1=1 t2=1\nwait 3\n", &bad) != EDTC_STATUS_PARSE) return 15;
    size_t line = 0, col = 0;
    if (!edtc_last_error_position(&line, &col) || line != 2 || col != 1) return 16;
    char msg[256];
    edtc_last_error_message(msg, sizeof msg);

    printf("f=%.6f peak=%.6f version=%s\n", s.f, s.peak_nu, edtc_version());
    edtc_spectrum_free(spec);
    edtc_series_free(series);
    edtc_program_free(prog);
    return 0;
}
"#;

/// `target/<profile>`, found from this test binary's location.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libedtc_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: need {cc} and {}", lib.display());
        return;
    }
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("c_program");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, SOURCE).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("peak=0.500000"));
}
