//! Compiles a small C program against the generated header and the static
//! library and runs it.

use std::env;
use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "quadproj.h"

int main(void) {
    const double a[4] = {1.0, 0.0, 0.0, 0.25};
    const double b[2] = {0.0, 0.0};
    QpQuadric *q = NULL;
    QpProjector *p = NULL;
    if (qp_quadric_new(2, a, b, -1.0, &q) != QP_STATUS_OK) return 1;
    if (qp_projector_new(q, &p) != QP_STATUS_OK) return 2;
    qp_quadric_free(q);

    double x0[2] = {0.0, 0.0}, point[2];
    QpProjectionInfo info;
    if (qp_project(p, x0, point, &info) != QP_STATUS_OK) return 3;
    if (fabs(info.distance - 1.0) > 1e-12 || !info.degenerate) return 4;
    printf("%s %.17g %.17g %.17g\n", qp_version(), point[0], point[1], info.distance);
    qp_projector_free(p);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/c_smoke-<hash>
    let exe = env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn compiler() -> Option<String> {
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn c_program_links_and_projects() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libquadproj_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = stdout.split_whitespace().collect();
    assert_eq!(fields[0], env!("CARGO_PKG_VERSION"));
    let x: f64 = fields[1].parse().unwrap();
    let y: f64 = fields[2].parse().unwrap();
    assert!((x.abs() - 1.0).abs() < 1e-12 && y.abs() < 1e-12);
}
