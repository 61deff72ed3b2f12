use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tfmbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfmbe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn kernels_check_prints_table_and_csv() {
    let o = tfmbe(&["kernels-check", "--alpha", "0.4", "--mesh", "graded", "--N", "30", "--gamma", "3"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("max orthogonality residual"));

    let o = tfmbe(&["kernels-check", "--alpha", "0.7", "--mesh", "random", "--N", "25", "--seed", "4", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("alpha,mesh,N,gamma,seed,orthogonality"));
    assert!(lines[1].starts_with("0.7,random,25,1,4,"));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(tfmbe(&["kernels-check", "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(tfmbe(&["kernels-check"]).status.code(), Some(1));
    assert_eq!(tfmbe(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(tfmbe(&["kernels-check", "--alpha", "0.5", "--config", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(tfmbe(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("audit.cfg");
    fs::write(&cfg, "# audit\nalpha = 0.9\nmesh = random\nN = 12\nseed = 9\ncsv = true\n").unwrap();
    let o = tfmbe(&["kernels-check", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.9,random,12,1,9,"));

    let o = tfmbe(&["kernels-check", "--config", p(&cfg), "--N", "20", "--alpha", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.3,random,20,1,9,"));

    fs::write(&cfg, "alpha = 0.9\nbogus = 1\n").unwrap();
    assert_eq!(tfmbe(&["kernels-check", "--config", p(&cfg)]).status.code(), Some(1));
}

#[test]
fn converge_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orders.csv");
    let o = tfmbe(&[
        "converge", "--alpha", "0.8", "--gammas", "1,2", "--Ns", "10,20", "--seed", "3", "--grid", "8", "--out",
        p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("alpha,gamma,N,tau_max,eN,order,status\n"));

    let json = dir.path().join("orders.json");
    let o = tfmbe(&["converge", "--alpha", "0.8", "--gammas", "1", "--Ns", "10,20", "--grid", "8", "--out", p(&json)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&json).unwrap();
    assert!(text.trim_start().starts_with('[') && text.contains("\"e_n\""));
}

#[test]
fn simulate_writes_record_snapshots_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let ckpt = dir.path().join("run.ckpt");
    let o = tfmbe(&[
        "simulate", "--alpha", "0.7", "--T", "0.2", "--grid", "16", "--eta", "100", "--snapshots", "0,0.1",
        "--snapshot-format", "bin", "--checkpoint", p(&ckpt), "--out", p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\nn,t_n,tau_n,E,E_alpha,volume,l2_norm,l2_margin,fp_iters\n"));
    assert!(text.contains("# snapshot1=requested=0.1"));
    let last = text.lines().last().unwrap();
    assert_eq!(last.split(',').nth(1).unwrap(), "0.2");
    for i in 0..2 {
        let snap = fs::read(dir.path().join(format!("run_snap{i}.bin"))).unwrap();
        assert_eq!(&snap[..5], b"TFMF\x01");
        assert_eq!(snap.len(), 5 + 16 + 16 * 16 * 8);
    }
    let ck = fs::read(&ckpt).unwrap();
    assert_eq!(&ck[..8], b"TFMBECKP");

    let resumed = dir.path().join("resumed.json");
    let o = tfmbe(&[
        "simulate", "--alpha", "0.7", "--T", "0.3", "--grid", "16", "--eta", "100", "--resume", p(&ckpt), "--out",
        p(&resumed),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = fs::read_to_string(&resumed).unwrap();
    assert!(text.contains("\"resumed_at\": \"0.2\""));

    // a checkpoint from another scheme is an error
    let o = tfmbe(&[
        "simulate", "--alpha", "0.7", "--T", "0.3", "--grid", "16", "--scheme", "euler", "--resume", p(&ckpt),
        "--out", p(&resumed),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_schemes_and_csv_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["l1", "splitting", "euler"] {
        let out = dir.path().join(format!("{scheme}.json"));
        let o = tfmbe(&[
            "simulate", "--alpha", "0.5", "--T", "0.1", "--grid", "8", "--scheme", scheme, "--snapshots", "0.05",
            "--out", p(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{scheme}: {o:?}");
        let snap = fs::read_to_string(dir.path().join(format!("{scheme}_snap0.csv"))).unwrap();
        assert_eq!(snap.lines().count(), 8);
        assert_eq!(snap.lines().next().unwrap().split(',').count(), 8);
    }
}
