use std::path::PathBuf;
use std::process::Command;

#[test]
fn python_smoke_script() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest.join("../../target"));
    let lib = ["debug", "debug/deps", "release", "release/deps"]
        .iter()
        .map(|p| target.join(p).join("libaltbase_py.so"))
        .find(|p| p.exists());
    let Some(lib) = lib else {
        eprintln!("libaltbase_py.so not built; skipping");
        return;
    };
    let out = match Command::new("python3")
        .arg(manifest.join("python/smoke_test.py"))
        .arg(&lib)
        .output()
    {
        Ok(o) => o,
        Err(e) => {
            eprintln!("python3 unavailable ({e}); skipping");
            return;
        }
    };
    assert!(
        out.status.success(),
        "{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("smoke test passed"));
}
