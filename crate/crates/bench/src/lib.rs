//! Benchmark inputs for the verifier; the benchmarks live in `benches/`.

use std::path::{Path, PathBuf};

use atomguard_core::{parse_program, Program};

pub fn programs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

/// Every `.mg` file directly under `programs/<sub>`, parsed, in name order.
pub fn load_dir(sub: &str) -> Vec<(String, Program)> {
    let dir = programs_dir().join(sub);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mg"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&f).unwrap();
            let program = parse_program(&name, &text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, program)
        })
        .collect()
}
