use std::path::Path;
use std::process::{Command, Output};

fn simulate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate")).args(args).current_dir(dir).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn smoke_run_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let run = simulate(&["run", "--suite", "smoke", "--jobs", "2", "--out", "smoke.csv"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", text(&run));
    let csv = std::fs::read_to_string(dir.path().join("smoke.csv")).unwrap();
    assert!(csv.starts_with("suite,mode,snr_db,beta,T_c,T_d,N_d,overhead,ber,nmse,seed,runtime_s,error\n"));
    assert_eq!(csv.lines().count(), 7);
    assert!(dir.path().join("smoke.csv.meta").exists());

    let sum = simulate(&["summarize", "--in", "smoke.csv"], dir.path());
    assert_eq!(sum.status.code(), Some(0), "{}", text(&sum));
    assert!(text(&sum).contains("dedicated_dual"));
}

#[test]
fn failing_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("strict.suite"),
        "suite = strict\nseeds = 1\nN_b = 8\nN_m = 8\nM_b = 32\nM_m = 32\nN_c = 16\ntotal_symbols = 3000\ncheck = ber < 0\n",
    )
    .unwrap();
    let run = simulate(&["run", "--suite", "strict.suite", "--out", "strict.csv"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", text(&run));
    let sum = simulate(&["summarize", "--in", "strict.csv", "--suite", "strict.suite"], dir.path());
    assert_eq!(sum.status.code(), Some(2), "{}", text(&sum));
}

#[test]
fn empty_or_malformed_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "suite,mode,snr_db,beta,T_c,T_d,N_d,overhead,ber,nmse,seed,runtime_s,error\n").unwrap();
    std::fs::write(dir.path().join("junk.csv"), "not,a,results,file\n1,2,3,4\n").unwrap();
    for file in ["empty.csv", "junk.csv", "missing.csv"] {
        let o = simulate(&["summarize", "--in", file], dir.path());
        assert_eq!(o.status.code(), Some(1), "{file}: {}", text(&o));
    }
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(&["run", "--suite", "smoke", "warp_factor=9"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("warp_factor"), "{}", text(&o));
    assert!(!dir.path().join("smoke.csv").exists());
}

#[test]
fn config_prints_every_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(&["config", "mode=dedicated_single", "snr_db=12.5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    for key in dbtrain::SimConfig::KEYS {
        assert!(out.lines().any(|l| l.starts_with(&format!("{key} = "))), "missing {key} in\n{out}");
    }
    assert!(out.contains("snr_db = 12.5"));
    assert!(out.contains("N_d = 1"));

    let bad = simulate(&["config", "snr_db=loud"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(text(&bad).contains("snr_db"));
}

#[test]
fn suites_lists_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(&["suites"], dir.path());
    let out = String::from_utf8(o.stdout).unwrap();
    for name in ["smoke", "overhead_conventional", "mse_vs_snr", "overhead_dedicated"] {
        assert!(out.contains(name));
    }
}
