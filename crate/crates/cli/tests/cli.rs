use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pals(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pals")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[model]
kind = "ct"
domain = [-1.0, 1.0, -1.0, 1.0]
cells = [16, 16]
detectors = 18
angles_deg = [1.0, 179.0, 10.0]

[phantom]
inside = 2.0
outside = 1.0
[[phantom.shapes]]
type = "disc"
center = [0.0, 0.0]
radius = 0.5

[pals]
bumps = 6
dilation = 2.5
box = [-0.5, 0.5, -0.5, 0.5]

[solver]
max_iters = MAX

[noise]
percent = 2.0
seed = 3
"#;

fn write_config(dir: &Path, max_iters: usize) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL.replace("MAX", &max_iters.to_string())).unwrap();
    path
}

#[test]
fn phantom_writes_truth_images() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 5);
    let out = tmp.path().join("o");
    let o = pals(&["phantom", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("truth.csv").exists());
    assert!(fs::read(out.join("truth.pgm")).unwrap().starts_with(b"P5"));
}

#[test]
fn missing_section_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 5);
    let text = fs::read_to_string(&cfg).unwrap();
    let cut = &text[..text.find("[pals]").unwrap()];
    fs::write(&cfg, format!("{cut}[solver]\nmax_iters = 5\n")).unwrap();
    let o = pals(&["reconstruct", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing field `pals`"), "{}", stderr(&o));
}

#[test]
fn compact_heaviside_rejects_small_level() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 5);
    let text = fs::read_to_string(&cfg).unwrap().replace("[pals]\n", "[pals]\nlevel = 0.05\nepsilon = 0.1\n");
    fs::write(&cfg, text).unwrap();
    let o = pals(&["phantom", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("|level| >= epsilon"), "{}", stderr(&o));
}

#[test]
fn zero_iterations_exits_with_max_iters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 0);
    let out = tmp.path().join("o");
    let o = pals(&["reconstruct", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let log = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 4);
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = pals(&["--threads", "1", "reconstruct", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(matches!(o.status.code(), Some(0 | 4 | 5)), "{}", stderr(&o));
        (fs::read(out.join("parameters.csv")).unwrap(), fs::read(out.join("data_noisy.csv")).unwrap())
    };
    let a = run("a", "3");
    assert_eq!(a, run("b", "3"));
    assert_ne!(a.1, run("c", "4").1);
    let metrics = fs::read_to_string(tmp.path().join("c/metrics.txt")).unwrap();
    assert!(metrics.contains("seed") && metrics.contains('4'));
}

#[test]
fn forward_writes_clean_and_noisy_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 1);
    let out = tmp.path().join("o");
    let o = pals(&["forward", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["data_clean.csv", "data_noisy.csv", "noise.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn check_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), 1);
    let out = tmp.path().join("o");
    let o = pals(&["check", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("check.txt").exists());
}

#[test]
fn missing_config_file_exits_two() {
    let o = pals(&["phantom", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_view_ct_reaches_discrepancy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = pals(&["reconstruct", configs().join("ct_full.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", fs::read_to_string(out.join("metrics.txt")).unwrap_or_default());
}
