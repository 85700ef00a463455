use std::path::PathBuf;
use std::process::{Command, Output};

fn sparsesplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsesplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sparsesplit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SMALL: [&str; 8] = ["--n", "300", "--d1", "5", "--d2", "200", "--q", "0.02"];

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_writes_documented_header_and_summary() {
    let mut args = vec![
        "run",
        "--algorithm",
        "upd-gini",
        "--oracle",
        "--report-every",
        "100",
    ];
    args.extend(SMALL);
    let out = sparsesplit(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "point_index,algo,alpha,point_ns,cum_ns,nonempty_T,best_feature,best_score,oracle_feature,oracle_score,ratio"
    );
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert!(lines[4].starts_with("summary,upd-gini,0.1,"));
}

#[test]
fn fixed_seed_run_is_byte_identical_without_clock() {
    let mut args = vec![
        "run",
        "--algorithm",
        "upd-ent",
        "--oracle",
        "--clock",
        "off",
        "--seed",
        "11",
    ];
    args.extend(SMALL);
    let a = sparsesplit(&args);
    let b = sparsesplit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn generated_file_replays_like_the_generator() {
    let path = scratch("gen.txt");
    let p = path.to_str().unwrap();
    let mut gen = vec!["gen", "--seed", "4", "--output", p];
    gen.extend(SMALL);
    assert!(sparsesplit(&gen).status.success());

    let file_run = sparsesplit(&[
        "run",
        "--input",
        p,
        "--algorithm",
        "base-ent",
        "--clock",
        "off",
    ]);
    let mut direct = vec![
        "run",
        "--seed",
        "4",
        "--algorithm",
        "base-ent",
        "--clock",
        "off",
    ];
    direct.extend(SMALL);
    let gen_run = sparsesplit(&direct);
    assert!(
        file_run.status.success(),
        "{}",
        String::from_utf8_lossy(&file_run.stderr)
    );
    assert_eq!(file_run.stdout, gen_run.stdout);
}

#[test]
fn usage_and_io_errors_exit_with_one() {
    assert_eq!(sparsesplit(&["run", "--alpha", "0"]).status.code(), Some(1));
    assert_eq!(
        sparsesplit(&["run", "--report-every", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(sparsesplit(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        sparsesplit(&["run", "--input", "/nonexistent/data.txt"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn malformed_input_reports_line() {
    let path = scratch("bad.txt");
    std::fs::write(&path, "1 3:1\n2 1:1\n").unwrap();
    let out = sparsesplit(&["run", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn sweep_emits_one_row_per_value_and_algorithm() {
    let mut args = vec![
        "sweep",
        "--axis",
        "alpha",
        "--values",
        "0.1,1",
        "--algorithms",
        "upd-ent,base-ent",
        "--repeats",
        "2",
        "--clock",
        "off",
        "--threads",
        "2",
    ];
    args.extend(SMALL);
    let out = sparsesplit(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "axis,value,algo,repeats,mean_total_ns,mean_point_ns,mean_nonempty_T"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("alpha,0.1,upd-ent,2,"));
}

#[test]
fn verify_passes_on_small_fixture() {
    let out = sparsesplit(&["verify", "--n", "300", "--d2", "100", "--seeds", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("0 invariant failures, 0 guarantee failures"));
}
