use std::path::PathBuf;
use std::process::Command;

fn header() -> (PathBuf, String) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fracstab.h");
    let text = std::fs::read_to_string(&path).unwrap();
    (path, text)
}

fn exported_names() -> Vec<String> {
    let src = include_str!("../src/lib.rs");
    let lines: Vec<&str> = src.lines().collect();
    let mut names = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim() != "#[no_mangle]" {
            continue;
        }
        let sig = lines[i + 1];
        let start = sig.find("fn ").unwrap() + 3;
        let end = sig[start..].find('(').unwrap() + start;
        names.push(sig[start..end].to_string());
    }
    names
}

#[test]
fn header_declares_every_export() {
    let (_, text) = header();
    let names = exported_names();
    assert!(names.len() > 25, "{names:?}");
    for name in names {
        let declared = [" ", "*"].iter().any(|p| text.contains(&format!("{p}{name}(")));
        assert!(declared, "{name} missing from header");
    }
    for ty in ["FracstabSystem", "FracstabReport", "FracstabApprox", "FracstabTrajectory"] {
        assert!(text.contains(&format!("typedef struct {ty} {ty};")), "{ty} is not opaque");
    }
    assert!(text.contains("#ifndef FRACSTAB_H"));
    assert!(text.contains("FRACSTAB_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let (path, _) = header();
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"fracstab.h\"\n\
         int main(void) {\n\
           FracstabSystem *sys = 0;\n\
           double a[1] = {-1.0};\n\
           int64_t p[1] = {1}, q[1] = {2};\n\
           FracstabStatus s = fracstab_system_new(1, a, p, q, &sys);\n\
           fracstab_system_free(sys);\n\
           return s == FRACSTAB_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = match Command::new(&compiler)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(path.parent().unwrap())
        .arg(&main)
        .status()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("skipping: cannot run {compiler}: {e}");
            return;
        }
    };
    assert!(status.success());
}
