use std::process::Command;

fn run(args: &[&str]) -> (String, bool) {
    let out = Command::new(env!("CARGO_BIN_EXE_schrodinger"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).trim().to_string(),
        out.status.success(),
    )
}

#[test]
fn verify_axioms_clean_and_faulted() {
    let (out, ok) = run(&["verify-axioms", "--n", "2"]);
    assert!(ok);
    assert!(out.contains("0 violations"));
    let (out, ok) = run(&["verify-axioms", "--n", "1", "--fault", "flip-ef"]);
    assert!(!ok);
    assert!(out.contains("violations"));
    // faulted report names the flipped pair
    assert!(out.contains('e') && out.contains('f'));
}

#[test]
fn normal_order_examples() {
    let (out, ok) = run(&["normal-order", "x(1)*y(1)", "--n", "1"]);
    assert!(ok);
    assert_eq!(out, "y(1) x(1) + z");
    let (out, _) = run(&["normal-order", "e*f^2", "--n", "1"]);
    assert_eq!(out, "f^2 e + 2*f h - 2*f");
}

#[test]
fn theta_prints_exact_operators() {
    let (out, ok) = run(&["theta", "e", "--n", "2", "--zdot", "4"]);
    assert!(ok);
    assert_eq!(out, "1/2*d(1)^2 + 1/2*d(2)^2");
    let (out, _) = run(&["theta", "z", "--n", "1", "--zdot", "2"]);
    assert_eq!(out, "2");
    // formal square root prints symbolically
    let (out, _) = run(&["theta", "x(1)", "--n", "1", "--zdot", "2"]);
    assert_eq!(out, "S*d(1)");
}

#[test]
fn gamma_closed_form() {
    let (out, ok) = run(&["gamma", "--gen", "e", "--b", "1/2", "--n", "2"]);
    assert!(ok);
    assert_eq!(out, "e - 1/2*f^-1 h - 3/4*f^-1");
}

#[test]
fn verma_table_is_exact_csv() {
    let (out, ok) = run(&["verma", "--lambda", "-1/2", "--n", "1", "--depth", "4"]);
    assert!(ok);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "weight,offset,dimension");
    assert_eq!(lines[1], "-1/2,0,1");
    assert_eq!(lines[5], "-9/2,-4,3");
}

#[test]
fn singular_and_character_table() {
    let (out, ok) = run(&["singular", "--lambda", "1/2", "--n", "1", "--depth", "6"]);
    assert!(ok);
    assert!(out.contains("\"level\": 4"));
    let (out, ok) = run(&["character-table", "--lambda", "-1/2", "--n", "1", "--depth", "5"]);
    assert!(ok);
    assert!(out.contains("intertwiner,true"));
    assert!(!out.contains("false"));
}

#[test]
fn classify_and_dense() {
    let (out, ok) = run(&["classify", "--source", "verma", "--lambda", "1/3", "--n", "1"]);
    assert!(ok);
    assert!(out.contains("\"HighestWeight\""));
    let (out, ok) = run(&[
        "classify", "--source", "dense", "--lambda", "1/2", "--k", "1", "--n", "1",
    ]);
    assert!(ok);
    assert!(out.contains("\"Dense\""));
    let (out, ok) = run(&["dense", "--k", "1", "--lambda1", "1/2", "--n", "1", "--depth", "3"]);
    assert!(ok);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",2")));
}

#[test]
fn verify_all_battery() {
    let (out, ok) = run(&["verify-all", "--n", "1"]);
    assert!(ok, "{}", out);
    assert!(!out.contains("FAIL"));
}
