use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dspc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspc"))
        .args(args)
        .output()
        .expect("spawn dspc")
}

fn program(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/programs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Compares with `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn assert_golden(name: &str, actual: &str) {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

fn parse_outputs(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn build_filter_design_stages() {
    let out = dspc(&["build", "FilterDesign", "--emit=dsp"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for op in ["low_pass_fir_coeffs", "hamming_window", "mul(", "print("] {
        assert!(text.contains(op), "{op} missing from\n{text}");
    }
    assert_golden("filter_design.dsp.txt", &text);

    let out = dspc(&["build", "FilterDesign", "--emit=dsp-opt", "--opt=dsp"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("filter_hamm_opt"));
    assert_golden("filter_design.dsp-opt.txt", &stdout(&out));
}

#[test]
fn golden_dumps() {
    let reverse = program("reverse.dsp");
    let energy = program("energy16.dsp");
    let cases: [(&str, Vec<&str>); 5] = [
        (
            "reverse.tokens.txt",
            vec!["build", &reverse, "--emit=tokens"],
        ),
        (
            "reverse.loop.txt",
            vec!["build", &reverse, "--emit=loop", "--opt=none"],
        ),
        ("energy16.ast.txt", vec!["build", &energy, "--emit=ast"]),
        (
            "energy16.dsp-opt.txt",
            vec!["build", &energy, "--emit=dsp-opt", "--synth", "x=16"],
        ),
        (
            "energy16.loop.txt",
            vec!["build", &energy, "--emit=loop", "--synth", "x=16"],
        ),
    ];
    for (golden, args) in cases {
        let first = dspc(&args);
        assert_eq!(code(&first), 0, "{golden}: {}", stderr(&first));
        // Dumps are stable across runs.
        assert_eq!(stdout(&first), stdout(&dspc(&args)));
        assert_golden(golden, &stdout(&first));
    }
}

#[test]
fn dsp_opt_needs_opt_dsp() {
    let out = dspc(&["build", "FilterDesign", "--emit=dsp-opt", "--opt=none"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--opt=dsp"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&dspc(&["build"])), 1);
    assert_eq!(code(&dspc(&["build", "FilterDesign", "--emit=bogus"])), 1);
    assert_eq!(code(&dspc(&["--help"])), 0);
    assert_eq!(code(&dspc(&["build", "no_such_app"])), 1);
    assert_eq!(
        code(&dspc(&[
            "run",
            &program("reverse.dsp"),
            "--synth",
            "x=oops"
        ])),
        1
    );
    assert_eq!(
        code(&dspc(&["run", &program("reverse.dsp"), "--synth", "y=4"])),
        1
    );
    assert_eq!(code(&dspc(&["run", &program("energy16.dsp")])), 1);
    assert_eq!(
        code(&dspc(&[
            "run",
            &program("reverse.dsp"),
            "--print-index",
            "9"
        ])),
        1
    );
    assert_eq!(
        code(&dspc(&[
            "run",
            "FilterDesign",
            "--opt=none",
            "--patterns=1"
        ])),
        1
    );
}

#[test]
fn parse_error_has_position() {
    let out = dspc(&["build", &program("broken.dsp")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2:19"), "{}", stderr(&out));
}

#[test]
fn verify_error_exit_code() {
    let out = dspc(&["build", &program("bad_delay.dsp")]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn energy_opt_modes_agree() {
    let energy = program("energy16.dsp");
    let none = dspc(&["run", &energy, "--synth", "x=16,7", "--opt=none"]);
    let dsp = dspc(&["run", &energy, "--synth", "x=16,7", "--opt=dsp"]);
    assert_eq!(code(&none), 0);
    assert_eq!(code(&dsp), 0);
    let (a, b) = (
        parse_outputs(&stdout(&none))[0][0],
        parse_outputs(&stdout(&dsp))[0][0],
    );
    assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn identity_programs_pass_input_through() {
    let dir = tempfile::tempdir().unwrap();
    let input: Vec<f64> = (0..64)
        .map(|i| ((i * 37 % 64) as f64 - 31.5) / 7.0)
        .collect();
    let file = dir.path().join("x.json");
    fs::write(&file, serde_json::to_string(&input).unwrap()).unwrap();
    let binding = format!("x={}", file.display());
    for name in ["identity_dftidft.dsp", "identity_updown.dsp"] {
        let json = dir.path().join("out.json");
        let out = dspc(&[
            "run",
            &program(name),
            "--opt=dsp",
            "--input",
            &binding,
            "--json",
            json.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        let printed = parse_outputs(&stdout(&out));
        assert_eq!(printed, std::slice::from_ref(&input), "{name}");
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
        let counters = &report["counters"];
        assert_eq!(counters["trig_calls"], 0, "{name}");
        assert_eq!(counters["mults"], 0, "{name}");
    }
}

#[test]
fn lms_divergence_is_a_runtime_error() {
    let out = dspc(&["run", &program("lms_diverge.dsp")]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("diverged"), "{}", stderr(&out));
}

#[test]
fn print_index_and_counters() {
    let out = dspc(&[
        "run",
        &program("reverse.dsp"),
        "--synth",
        "x=4,3",
        "--print-index",
        "0",
        "--counters",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("[0] = "));
    let counters: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    // Delay leaves its first slot at the buffer's zero fill.
    assert_eq!(counters["stores"], 4 + 3 + 4);
    assert_eq!(counters["loads"], 4 + 3 + 8);
}

#[test]
fn bench_energy_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bench.json");
    let out = dspc(&["bench", "EnergyOfSignal", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS mult ratio"));
    let text = fs::read_to_string(&json).unwrap();
    let keys = [
        "\"app\"",
        "\"input_size\"",
        "\"fired\"",
        "\"none\"",
        "\"dsp\"",
        "\"ratios\"",
        "\"checks\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(
        positions.windows(2).all(|w| w[0] < w[1]),
        "key order {positions:?}"
    );
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["input_size"], 1024);
    assert!(report["max_rel_deviation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn bench_failure_exit_code() {
    // Disabling pattern 5 leaves the fired set short of the annotation.
    let out = dspc(&[
        "bench",
        "EnergyOfSignal",
        "--patterns=1",
        "--repetitions",
        "1",
    ]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains("FAIL fired patterns"));
}
