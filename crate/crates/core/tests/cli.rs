use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fracobst");

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn fracobst(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

const SMALL_SWEEP: &str = "\
example=example1
alpha=0.5,1
N=16
gamma=20
tol=1e-4
scheme=all
";

#[test]
fn sweep_writes_one_summary_row_per_combination() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.conf", SMALL_SWEEP);
    let out = tmp.path().join("out");
    let o = fracobst(&["sweep"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for s in ["S1", "S2", "S3"] {
        let rows = data_rows(&out.join(format!("summary_{s}.csv")));
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r[9] == "true"));
    }
    assert!(out.join("metadata.json").exists());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().filter(|l| !l.trim().is_empty()).count() >= 6);
}

#[test]
fn sweep_output_is_byte_identical_across_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.conf", SMALL_SWEEP);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let oa = fracobst(&["sweep", "--workers", "1", "--traj-every", "3"], &cfg, &a);
    let ob = fracobst(&["sweep", "--workers", "4", "--traj-every", "3"], &cfg, &b);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(ob.status.code(), Some(0));
    let ta = read_tree(&a);
    assert!(ta.iter().any(|(p, _)| p.starts_with("trajectories")));
    assert_eq!(ta, read_tree(&b));
    assert!(ta.iter().all(|(_, bytes)| !bytes.contains(&b'\r')));
}

#[test]
fn mismatched_alpha_zero_ratio_is_skipped() {
    let tmp = TempDir::new().unwrap();
    // N=16 gives h = 1/8, so alpha = 0 with tau = 1 needs gamma = 64
    let cfg = write_config(
        tmp.path(),
        "skip.conf",
        "example=example1\nalpha=0,0.5\nN=16\ngamma=20\nscheme=S3\n",
    );
    let out = tmp.path().join("out");
    let o = fracobst(&["sweep"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&out.join("summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.5);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn short_horizon_without_convergence_is_partial_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "tiny.conf",
        "example=example1\nalpha=0.5,1\nN=16\ngamma=20\nT=0.01\ntol=1e-4\nscheme=S1\n",
    );
    let out = tmp.path().join("out");
    let o = fracobst(&["sweep"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let rows = data_rows(&out.join("summary.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[9] == "false"));
}

#[test]
fn open_horizon_cut_by_budget_completes_cleanly() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "open.conf",
        "example=example1\nalpha=0.5\nN=16\ngamma=20\ntol=1e-12\nscheme=S1\n",
    );
    let out = tmp.path().join("out");
    let o = fracobst(&["sweep", "--budget", "3"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&out.join("summary.csv"));
    assert_eq!(rows[0][6], "3");
    assert_eq!(rows[0][9], "false");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["runs"][0]["budget_exhausted"], serde_json::Value::Bool(true));
}

#[test]
fn config_errors_are_fatal_and_name_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.conf", "example=example1\nlambda=3\n");
    let o = fracobst(&["sweep"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("lambda"), "{err}");

    let missing = tmp.path().join("absent.conf");
    assert_eq!(fracobst(&["sweep"], &missing, &tmp.path().join("out")).status.code(), Some(1));
}

#[test]
fn run_requires_a_single_combination_and_writes_its_trajectory() {
    let tmp = TempDir::new().unwrap();
    let many = write_config(tmp.path(), "many.conf", SMALL_SWEEP);
    assert_eq!(fracobst(&["run"], &many, &tmp.path().join("x")).status.code(), Some(1));

    let one = write_config(
        tmp.path(),
        "one.conf",
        "example=example2\nalpha=0.7\nN=16\ngamma=30\nscheme=S3\n",
    );
    let out = tmp.path().join("out");
    let o = fracobst(&["run"], &one, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = data_rows(&out.join("summary.csv"));
    assert_eq!(summary.len(), 1);
    let n_iter: usize = summary[0][6].parse().unwrap();
    let traj: Vec<_> = fs::read_dir(out.join("trajectories")).unwrap().collect();
    assert_eq!(traj.len(), 1);
    let rows = data_rows(&traj[0].as_ref().unwrap().path());
    // every step on the 15 interior nodes, including the initial state
    assert_eq!(rows.len(), 15 * (n_iter + 1));
}

#[test]
fn stationary_and_decay_commands_write_their_tables() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "decay.conf",
        "example=example2\nalpha=1,0.5\nN=16\ngamma=50\nT=10\nscheme=S3\ndecay_samples=5\n",
    );
    let out = tmp.path().join("stat");
    assert_eq!(fracobst(&["stationary"], &cfg, &out).status.code(), Some(0));
    let rows = data_rows(&out.join("stationary_N16_g50.csv"));
    assert_eq!(rows.len(), 15);

    let out = tmp.path().join("decay");
    let o = fracobst(&["decay"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(out.join("decay.csv")).unwrap();
    assert!(header.starts_with("alpha,t,l1_error,j_value,ratio,regime\n"));
    let rows = data_rows(&out.join("decay.csv"));
    assert!(rows.iter().any(|r| r[5] == "exp" && r[3].parse::<f64>().unwrap() == 0.0));
    assert!(rows.iter().any(|r| r[5] == "power"));
    assert!(out.join("decay_summary.csv").exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let config = frac_obstacle::config::parse_config(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!config.sweep.combos().is_empty());
        count += 1;
    }
    assert_eq!(count, 3);
}
