use std::path::Path;
use std::process::Command;

/// Runs the Python smoke script when an installed build of the module is
/// importable; skips otherwise since the cdylib cannot be linked here.
#[test]
fn python_smoke_script() {
    let python = std::env::var("PYTHON").unwrap_or_else(|_| "python3".into());
    let importable = Command::new(&python)
        .args(["-c", "import magnodrag"])
        .status()
        .map(|s| s.success())
        .unwrap_or(false);
    if !importable {
        eprintln!("skipping: `import magnodrag` fails under {python}");
        return;
    }
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("python/smoke_test.py");
    let out = Command::new(&python).arg(&script).output().unwrap();
    assert!(
        out.status.success(),
        "{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}
