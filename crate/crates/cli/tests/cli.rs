use std::path::PathBuf;
use std::process::{Command, Output};

const A: &str = "9.8125";

fn chirplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirplab"))
        .args(args)
        .env_remove("CHIRPLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("chirplab-cli-{}-{name}", std::process::id()))
}

#[test]
fn non_square_n_is_a_config_error() {
    let o = chirplab(&["t2max", "--n-list", "17", "--a-override", A]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("17"));
    assert_eq!(chirplab(&["verify", "--n-list", "9"]).status.code(), Some(2));
}

#[test]
fn bad_flags_are_config_errors() {
    for args in [
        &["t3inf", "--tol", "nonsense=1", "--a-override", A][..],
        &["t3inf", "--format", "xml", "--a-override", A],
        &["t3inf", "--j0", "1.2", "--a-override", A],
        &["t3inf", "--workers", "0", "--a-override", A],
        &["t3inf", "--a-override", "-1"],
        &["t3inf", "--unknown-flag"],
    ] {
        assert_eq!(chirplab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn coarse_grid_fails_verification() {
    let o = chirplab(&["verify", "--oversample", "0.5", "--a-override", A]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("does not resolve")));
}

#[test]
fn t3inf_writes_csv_and_json() {
    let o = chirplab(&["t3inf", "--n-list", "16", "--a-override", A]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scenario,N,j0,k,x,value_re,value_im,magnitude,ratio_log_n,walltime_ms"));
    assert_eq!(lines.count(), 6);
    assert!(csv.contains("t3_inf,16,24,") && csv.contains(",inf,"));

    let path = temp("t3.json");
    let o = chirplab(&["t3inf", "--n-list", "16", "--a-override", A, "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.trim_start().starts_with('[') && text.contains("\"scenario\": \"t3_kkk\""));
    std::fs::remove_file(path).ok();
}

#[test]
fn worker_count_from_environment_or_flag_does_not_change_output() {
    let args = ["bounded", "--n-list", "16", "--a-override", A];
    let base = stdout(&chirplab(&args));
    let env = Command::new(env!("CARGO_BIN_EXE_chirplab"))
        .args(args)
        .env("CHIRPLAB_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(base, stdout(&env));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--workers", "2"]);
    assert_eq!(base, stdout(&chirplab(&with_flag)));
}

#[test]
fn unwritable_output_names_the_path() {
    let o = chirplab(&["t3inf", "--n-list", "16", "--a-override", A, "--out", "/nonexistent-dir/t3.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/t3.csv"));
}

#[test]
fn dump_profiles_writes_simplex_profiles() {
    let dir = temp("profiles");
    let o = chirplab(&[
        "t3inf", "--n-list", "16", "--a-override", A, "--dump-profiles", dir.to_str().unwrap(), "--profile-stride", "2048",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("t3_profile_N16.csv")).unwrap();
    assert!(text.starts_with("x,re_w1,im_w1,re_w2,im_w2,re_w3,im_w3\n"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bump_check_and_select_a_pass() {
    let o = chirplab(&["bump-check", "--a-override", A]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    let o = chirplab(&["select-a", "--a-override", A, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"pass\": true"));
}
