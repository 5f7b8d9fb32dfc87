use prescribed_area::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["prescribed-area"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn verify_passes_in_hyperbolic_space() {
    let (code, out, _) = call(&["verify", "--kappa", "-1", "--k", "3", "--n", "4", "--R", "1.2", "--sy", "0.5", "--samples", "5000", "--seed", "7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_fails_where_the_sphere_condition_fails() {
    let (code, out, err) = call(&["verify", "--kappa", "1", "--k", "2", "--R", "1.5", "--sy", "0.4", "--samples", "5000", "--seed", "1"]);
    assert_eq!(code, 1, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(call(&["verify", "--kappa", "2", "--k", "3", "--R", "1", "--sy", "0.3", "--seed", "1"]).0, 2);
    assert_eq!(call(&["verify", "--kappa", "0", "--k", "3", "--R", "1", "--sy", "0.3"]).0, 2);
    assert_eq!(call(&["geodesic", "--sy", "0.9", "--R", "0.5"]).0, 2);
    assert_eq!(call(&["no-such-command"]).0, 2);
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["verify", "--kappa", "0", "--k", "2", "--R", "1", "--sy", "0.3", "--samples", "3000", "--seed", "42"][..],
        &["sweep-sphere", "--k", "4", "--grid", "5"][..],
        &["geodesic", "--sy", "0.3", "--R", "0.8", "--table", "19"][..],
        &["domain", "--kappa", "0", "--k", "3", "--R", "1", "--sy", "0.4"][..],
        &["wedge", "--grid", "10"][..],
    ] {
        let a = call(args);
        let b = call(args);
        assert_eq!(a.0, 0, "{args:?}: {}", a.2);
        assert_eq!(a.1, b.1, "{args:?}");
    }
}

#[test]
fn geodesic_table_and_summary() {
    let (code, out, err) = call(&["geodesic", "--sy", "0.3", "--R", "0.8", "--table", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "alpha,total_length");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",1.6000000000000001e0"));
    assert!(err.contains("L_star"));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("prescribed-area-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wedge.csv");
    let (code, _, _) = call(&["--out", path.to_str().unwrap(), "wedge", "--grid", "8"]);
    assert_eq!(code, 0);
    let (_, stdout, _) = call(&["wedge", "--grid", "8"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
