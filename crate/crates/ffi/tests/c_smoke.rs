//! Compiles a C program against the generated header and links it to the
//! static library. Skipped when no C compiler is on the path.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps; the static library sits one level up
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libcongdist_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("congdist_smoke");
    let compiled = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status();
    match compiled {
        Err(_) => eprintln!("skipping: no C compiler"),
        Ok(status) => {
            assert!(status.success(), "C compilation failed");
            let run = Command::new(&out).output().unwrap();
            assert!(run.status.success(), "smoke program exited with {:?}", run.status.code());
            assert!(String::from_utf8_lossy(&run.stdout).contains("missing"));
        }
    }
}
