use std::process::{Command, Output};

fn meadow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meadow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn decide_valid_equation() {
    let o = meadow(&["decide", "x - x = 0*x"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "verdict=valid\ncondition=all-passed\n");
}

#[test]
fn decide_invalid_equation_with_countermodel() {
    let o = meadow(&["decide", "x/x = 1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("verdict=invalid\ncondition=variable-sets\n"));

    let o = meadow(&["decide", "x/x = 1 + 0*x"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(
        out.starts_with("verdict=invalid\ncondition=denominator-zero-set\n"),
        "{out}"
    );
    assert!(out.contains("countermodel.carrier="));
    assert!(out.ends_with("countermodel.x=0\n"), "{out}");

    let o = meadow(&["decide", "1/2 = 3/6"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "verdict=invalid\ncondition=content-prime-support\ncountermodel.carrier=fp:3\n"
    );
}

#[test]
fn decide_explains_canonical_forms() {
    let o = meadow(&["decide", "--explain", "bot = x/0 + 1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "lhs=bot\nrhs=bot\nverdict=valid\ncondition=both-bottom\n");
}

#[test]
fn eval_in_prime_field() {
    let o = meadow(&["eval", "--carrier", "fp:3", "3/6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "bot\n");
    let o = meadow(&["eval", "--carrier", "fp:5", "--set", "x=2", "1/x"]);
    assert_eq!(stdout(&o), "3\n");
    let o = meadow(&["eval", "--set", "x=1/2", "--set", "y=bot", "x * x"]);
    assert_eq!(stdout(&o), "1/4\n");
    let o = meadow(&["eval", "--set", "y=bot", "x + y"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flatten_with_trace() {
    let o = meadow(&["flatten", "--trace", "bot + x/y"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(lines[0].starts_with("step 1: (18) at [0]"));
    assert!(lines[1].starts_with("step 2: (15) at []"));
    assert_eq!(lines[2], "(1 * y + 0 * x) / (0 * y)");
}

#[test]
fn normalize_and_parse() {
    assert_eq!(stdout(&meadow(&["normalize", "x + (-x)"])), "0 * x\n");
    assert_eq!(stdout(&meadow(&["normalize", "x * bot"])), "bot\n");
    assert_eq!(meadow(&["normalize", "1/x"]).status.code(), Some(2));
    assert_eq!(stdout(&meadow(&["parse", "x·(y+⊥)"])), "x * (y + bot)\n");
    assert_eq!(stdout(&meadow(&["parse", "x-y = (x)"])), "x + (-y) = x\n");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(meadow(&["decide", "x + = 1"]).status.code(), Some(2));
    assert_eq!(meadow(&["eval", "--carrier", "fp:4", "1"]).status.code(), Some(2));
    assert_eq!(meadow(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(meadow(&["decide"]).status.code(), Some(2));
}

#[test]
fn decide_file_reports_worst_status() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/mixed.eq");
    let o = meadow(&["decide", "--file", path]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.matches("verdict=valid").count(), 2);
    assert_eq!(out.matches("verdict=invalid").count(), 1);
    assert!(out.contains("line=5\nequation=x/x = 1\n"), "{out}");
}

#[test]
fn output_is_stable() {
    let a = meadow(&["fuzz", "-n", "25", "--seed", "9", "--samples", "300"]);
    let b = meadow(&["fuzz", "-n", "25", "--seed", "9", "--samples", "300"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 26);
}

#[test]
fn axioms_pass() {
    let o = meadow(&["axioms", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("pass axiom")).count(), 18);
    assert!(out.contains("pass control"));
}
