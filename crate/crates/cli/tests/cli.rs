use std::path::Path;
use std::process::{Command, Output};

use inroute_core::{read_instance, read_results_json, CSV_HEADER};

const E1: &str =
    "NAME E1\nN 2\nP 3\nK 30\nDEPOT 0 0\nCUSTOMER 1 0 10 20 1 2 2 2\nCUSTOMER 2 10 0 12 0 4 4 4\n";

fn inroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inroute"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&inroute(&[])), 1);
    assert_eq!(code(&inroute(&["frobnicate"])), 1);
    assert_eq!(code(&inroute(&["solve", "--out", "x"])), 1);
    assert_eq!(
        code(&inroute(&[
            "generate",
            "--n",
            "3",
            "--p",
            "3",
            "--k",
            "5",
            "--pattern",
            "wavy",
            "--seed",
            "1",
            "--out",
            "x"
        ])),
        1
    );
    assert_eq!(
        code(&inroute(&[
            "solve",
            "--instance",
            "a",
            "--out",
            "b",
            "--random",
            "-1"
        ])),
        1
    );
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&inroute(&["--help"])), 0);
    assert_eq!(code(&inroute(&["--version"])), 0);
    assert_eq!(code(&inroute(&["solve", "--help"])), 0);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = dir.path().join("out");
    assert_eq!(
        code(&inroute(&[
            "solve",
            "--instance",
            s(&missing),
            "--out",
            s(&out)
        ])),
        2
    );

    let bad = dir.path().join("bad.txt");
    std::fs::write(
        &bad,
        "NAME B\nN 2\nP 1\nK 5\nDEPOT 0 0\nCUSTOMER 1 0 0 5 0 1\n",
    )
    .unwrap();
    let out_bad = inroute(&["solve", "--instance", s(&bad), "--out", s(&out)]);
    assert_eq!(code(&out_bad), 2);
    assert!(!String::from_utf8_lossy(&out_bad.stderr).is_empty());

    let e1 = dir.path().join("e1.txt");
    std::fs::write(&e1, E1).unwrap();
    let ladder = inroute(&[
        "solve",
        "--instance",
        s(&e1),
        "--ladder",
        "2,3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&ladder), 2);

    let gen = inroute(&[
        "generate",
        "--n",
        "0",
        "--p",
        "3",
        "--k",
        "10",
        "--pattern",
        "constant",
        "--seed",
        "1",
        "--out",
        s(&dir.path().join("g.txt")),
    ]);
    assert_eq!(code(&gen), 2);
}

#[test]
fn generate_writes_parseable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst one.txt");
    let out = inroute(&[
        "generate",
        "--n",
        "12",
        "--p",
        "10",
        "--k",
        "80",
        "--pattern",
        "increasing",
        "--seed",
        "5",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let inst = read_instance(&path).unwrap();
    assert_eq!(inst.name, "inst_one");
    assert_eq!(
        (inst.num_customers(), inst.periods, inst.capacity),
        (12, 10, 80)
    );

    // same seed, same file
    let again = dir.path().join("again.txt");
    inroute(&[
        "generate",
        "--n",
        "12",
        "--p",
        "10",
        "--k",
        "80",
        "--pattern",
        "increasing",
        "--seed",
        "5",
        "--name",
        "inst_one",
        "--out",
        s(&again),
    ]);
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn generate_with_coordinate_file() {
    let dir = tempfile::tempdir().unwrap();
    let coords = dir.path().join("coords.txt");
    std::fs::write(&coords, "0 0\n1 2\n3 4\n").unwrap();
    let path = dir.path().join("c.txt");
    let args = [
        "generate",
        "--n",
        "2",
        "--p",
        "4",
        "--k",
        "50",
        "--pattern",
        "sinusoid",
        "--seed",
        "1",
    ];
    let out = inroute(&[&args[..], &["--coords", s(&coords), "--out", s(&path)]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let inst = read_instance(&path).unwrap();
    assert_eq!((inst.depot.x, inst.depot.y), (0.0, 0.0));
    assert_eq!(
        (inst.customers[1].location.x, inst.customers[1].location.y),
        (3.0, 4.0)
    );

    let short = dir.path().join("short.txt");
    std::fs::write(&short, "0 0\n1 2\n").unwrap();
    let out = inroute(&[&args[..], &["--coords", s(&short), "--out", s(&path)]].concat());
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = dir.path().join("e1.txt");
    std::fs::write(&e1, E1).unwrap();
    let out_dir = dir.path().join("results");
    let out = inroute(&[
        "solve",
        "--instance",
        s(&e1),
        "--random",
        "0",
        "--controlled",
        "0",
        "--ladder",
        "1",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines[1], "0,day_to_day,102.426407,0.000000,true");
    assert!(lines[3].starts_with("2,ladder:1,102.426407,0.000000,"));

    let result = read_results_json(&out_dir.join("results.json")).unwrap();
    assert_eq!(result.alternatives.len(), 3);
    assert_eq!(result.instance, "E1");
}

#[test]
fn solve_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.txt");
    inroute(&[
        "generate",
        "--n",
        "15",
        "--p",
        "12",
        "--k",
        "60",
        "--pattern",
        "sinusoid",
        "--seed",
        "2",
        "--out",
        s(&inst),
    ]);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = inroute(&[
            "solve",
            "--instance",
            s(&inst),
            "--improve",
            "--random",
            "10",
            "--controlled",
            "2",
            "--seed",
            "4",
            "--out",
            s(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(out_dir.join("results.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn serve_rejects_missing_directory() {
    let out = inroute(&[
        "serve",
        "--instance-dir",
        "/definitely/not/here",
        "--port",
        "0",
    ]);
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_inroute"))
        .args(["serve", "--instance-dir", "/definitely/not/here"])
        .env("INROUTE_PORT", "not-a-port")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}
