use pftg::io::{load_snapshot, read_csv};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "[model]\nproblem = P\nepsilon = 0.05\nlambda0 = 0.5\nhorizon = 4e-3\n\
[grid]\nnx = 32\nny = 32\n[time]\ndt = 5e-4\nsteps = 8\n[sweep]\nradius = 0.2\n";

fn pftg(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pftg"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("PFTG_OUT")
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

/// Unstabilized and with a huge step: the run has to abort.
fn unstable() -> String {
    SMALL.replace("dt = 5e-4", "dt = 50\nstabilization = 0")
}

#[test]
fn run_writes_trace_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = pftg(&["run", "--stride", "4"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let (header, rows) = read_csv(&trace).unwrap();
    assert_eq!(header[0], "t");
    assert_eq!(rows.len(), 9);
    for k in [0, 4, 8] {
        assert!(out.join(format!("snap_{k:08}.pftg")).exists());
    }
    assert!(!out.join("snap_00000002.pftg").exists());
    assert!(out.join("config.resolved").exists());
}

#[test]
fn diag_reproduces_trace_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert!(pftg(&["run", "--stride", "4"], &cfg, &out).status.success());
    let (header, rows) = read_csv(&fs::read_to_string(out.join("trace.csv")).unwrap()).unwrap();
    let e_col = header.iter().position(|h| h == "E").unwrap();
    let snaps: Vec<String> = [0, 4, 8]
        .iter()
        .map(|k| out.join(format!("snap_{k:08}.pftg")).display().to_string())
        .collect();
    let mut args = vec!["diag"];
    args.extend(snaps.iter().map(String::as_str));
    let o = pftg(&args, &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let dh: Vec<&str> = lines.next().unwrap().split(',').collect();
    let de = dh.iter().position(|h| *h == "E").unwrap();
    let data: Vec<Vec<&str>> = lines.filter(|l| !l.starts_with('#')).map(|l| l.split(',').collect()).collect();
    assert_eq!(data.len(), 3);
    for (row, k) in data.iter().zip([0, 4, 8]) {
        let a: f64 = row[de].parse().unwrap();
        let b = rows[k][e_col];
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
    assert!(text.contains("# holder_chi_l1_1/8"));
    let snap = load_snapshot(&snaps[2]).unwrap();
    assert!((snap.state.t - 4e-3).abs() < 1e-15);
    assert_eq!(snap.epsilon, 0.05);
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &format!("{SMALL}noise = 0.01\n[output]\nseed = 7\n"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(pftg(&["run"], &cfg, &a).status.success());
    assert!(pftg(&["run"], &cfg, &b).status.success());
    for f in ["trace.csv", "snap_00000008.pftg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let cfg2 = write_cfg(tmp.path(), &format!("{SMALL}noise = 0.01\n[output]\nseed = 8\n"));
    let c = tmp.path().join("c");
    assert!(pftg(&["run"], &cfg2, &c).status.success());
    assert_ne!(fs::read(a.join("trace.csv")).unwrap(), fs::read(c.join("trace.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = write_cfg(tmp.path(), "[model]\nepsilon = -1\n");
    let o = pftg(&["run"], &bad, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = tmp.path().join("nope.cfg");
    assert_eq!(pftg(&["check"], &missing, &out).status.code(), Some(2));

    let proto = write_cfg(tmp.path(), "[model]\nproblem = H\ninterpolation = prototype\n");
    assert_eq!(pftg(&["check"], &proto, &out).status.code(), Some(2));

    let unstable = write_cfg(tmp.path(), &unstable());
    let o = pftg(&["run"], &unstable, &out);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn aborted_run_leaves_readable_prefix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &unstable());
    let out = tmp.path().join("out");
    let o = pftg(&["run"], &cfg, &out);
    assert!(!o.status.success());
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let (header, rows) = read_csv(&trace).unwrap();
    assert_eq!(header.len(), 14);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 14));
}

#[test]
fn sweep_writes_report_and_run_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "[model]\nproblem = P\nproliferation = zero\nhorizon = 2e-4\n[sweep]\nepsilons = 0.05, 0.04\nradius = 0.2\n",
    );
    let out = tmp.path().join("out");
    let o = pftg(&["sweep"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("sweep_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
    assert!(report.lines().nth(1).unwrap().starts_with("5"));
    for eps in ["0.05", "0.04"] {
        let d = out.join(format!("eps_{eps}"));
        assert!(d.join("trace.csv").exists());
        assert!(load_snapshot(d.join("final.pftg")).is_ok());
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("w_dist"), "{stdout}");
}
