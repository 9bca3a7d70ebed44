use std::fs;
use std::path::Path;
use std::process::Command;

use hybrid_v2x::cli::{
    cmd_dor_sweep, cmd_prp_sweep, cmd_rate_sweep, cmd_validate, RunOptions, DOR_HEADER,
    MANIFEST_FILE, PRP_HEADER, RATE_HEADER,
};
use hybrid_v2x::metrics::{instantaneous_rate, Mode, TrialOutcome};
use hybrid_v2x::scenario::ScenarioConfig;
use hybrid_v2x::Error;

const SMALL: &str = "\
sweep.prp_distances_m = 30, 90, 150
sweep.rate_distances_m = 50, 200
sweep.dor_distances_m = 50, 200
sweep.t_th_ms = 1, 2, 3, 5
sweep.n_trials = 2000
";

fn opts(dir: &Path, config: &str) -> RunOptions {
    let cfg = dir.join("exp.cfg");
    fs::write(&cfg, config).unwrap();
    RunOptions {
        config_path: Some(cfg),
        out_dir: dir.join("out"),
        ..RunOptions::default()
    }
}

struct Row {
    key: Vec<String>,
    value: f64,
}

fn read_csv(path: &Path, header: &str, key_cols: usize) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), header.split(',').count(), "{l}");
            Row {
                key: f[..key_cols].iter().map(|s| s.to_string()).collect(),
                value: f[key_cols].parse().unwrap(),
            }
        })
        .collect()
}

fn lookup<'a>(rows: &'a [Row], key: &[&str]) -> &'a Row {
    rows.iter().find(|r| r.key == key).unwrap_or_else(|| panic!("missing {key:?}"))
}

#[test]
fn prp_sweep_csv_shape_and_la_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let o = opts(dir.path(), SMALL);
    let written = cmd_prp_sweep(&o).unwrap();
    assert!(written.iter().any(|p| p.ends_with(MANIFEST_FILE)));
    let rows = read_csv(&o.out_dir.join("prp_sweep.csv"), PRP_HEADER, 3);
    assert_eq!(rows.len(), 3 * 4 * 3);
    for d in ["30", "90", "150"] {
        for w in ["clear", "rain", "fog", "dry_snow"] {
            let la = lookup(&rows, &[d, w, "la"]).value;
            assert!(la >= lookup(&rows, &[d, w, "pure_vlc"]).value);
            assert!(la >= lookup(&rows, &[d, w, "pure_rf"]).value);
            assert_eq!(
                lookup(&rows, &[d, w, "pure_rf"]).value,
                lookup(&rows, &[d, "clear", "pure_rf"]).value
            );
        }
    }
    let manifest = fs::read_to_string(o.out_dir.join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("subcommand = prp-sweep"));
    assert!(manifest.contains("n_trials = 2000"));
    assert!(manifest.contains("config_hash = sha256:"));
}

#[test]
fn dor_sweep_is_monotone_in_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(dir.path(), SMALL);
    o.weathers = Some(vec!["clear".parse().unwrap(), "fog".parse().unwrap()]);
    cmd_dor_sweep(&o).unwrap();
    let rows = read_csv(&o.out_dir.join("dor_sweep.csv"), DOR_HEADER, 4);
    assert_eq!(rows.len(), 4 * 2 * 2 * 3);
    for d in ["50", "200"] {
        for w in ["clear", "fog"] {
            for m in ["pure_vlc", "pure_rf", "la"] {
                let series: Vec<f64> = ["1", "2", "3", "5"]
                    .iter()
                    .map(|t| lookup(&rows, &[t, d, w, m]).value)
                    .collect();
                assert!(series.windows(2).all(|p| p[1] <= p[0]), "{d} {w} {m}: {series:?}");
            }
        }
    }
}

#[test]
fn rate_dump_replays_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(dir.path(), SMALL);
    o.weathers = Some(vec!["rain".parse().unwrap()]);
    o.dump_trials = true;
    o.gnuplot = true;
    cmd_rate_sweep(&o).unwrap();
    let rows = read_csv(&o.out_dir.join("rate_sweep.csv"), RATE_HEADER, 3);
    assert_eq!(rows.len(), 2 * 4);
    assert!(o.out_dir.join("gnuplot/rate_rain_non_la.dat").exists());

    let cfg = ScenarioConfig::default();
    for d in ["50", "200"] {
        let dump = fs::read_to_string(o.out_dir.join(format!("trials/rate_{d}m_rain.csv"))).unwrap();
        let outcomes: Vec<TrialOutcome> = dump
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                TrialOutcome {
                    sinr_vlc: f[1].parse().unwrap(),
                    sinr_rf: f[2].parse().unwrap(),
                    n_interferers_same: 0,
                    n_interferers_perp: 0,
                }
            })
            .collect();
        assert_eq!(outcomes.len(), 2000);
        // non_la recomputed by hand from the dumped SINRs
        for o in &outcomes {
            let rv = cfg.vlc.bandwidth * (1.0 + o.sinr_vlc).log2();
            let rr = cfg.rf.bandwidth * (1.0 + o.sinr_rf).log2();
            let expect = cfg.rho_a * rv.max(rr);
            let got = instantaneous_rate(o, Mode::NonLa, &cfg);
            assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "{got} vs {expect}");
        }
        // CSV carries 9 significant digits
        for m in Mode::ALL {
            let mean = outcomes.iter().map(|o| instantaneous_rate(o, m, &cfg)).sum::<f64>()
                / outcomes.len() as f64
                * 1e-6;
            let reported = lookup(&rows, &[d, "rain", m.name()]).value;
            assert!((mean - reported).abs() <= 1e-8 * reported, "{d} {m}: {mean} vs {reported}");
        }
    }
}

#[test]
fn reruns_and_worker_counts_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = opts(dir.path(), SMALL);
    a.workers = 1;
    cmd_prp_sweep(&a).unwrap();
    let first = fs::read(a.out_dir.join("prp_sweep.csv")).unwrap();

    let mut b = a.clone();
    b.out_dir = dir.path().join("out4");
    b.workers = 4;
    cmd_prp_sweep(&b).unwrap();
    assert_eq!(first, fs::read(b.out_dir.join("prp_sweep.csv")).unwrap());

    let mut c = a.clone();
    c.seed = Some(2);
    c.out_dir = dir.path().join("seed2");
    cmd_prp_sweep(&c).unwrap();
    assert_ne!(first, fs::read(c.out_dir.join("prp_sweep.csv")).unwrap());
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(dir.path(), SMALL);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    o.out_dir = blocker.join("out");
    assert!(matches!(cmd_prp_sweep(&o), Err(Error::Io(_))));
    assert!(!blocker.join("out").exists());
}

#[test]
fn config_errors_surface() {
    let dir = tempfile::tempdir().unwrap();
    let o = opts(dir.path(), "beta_ov = 1.5\n");
    match cmd_validate(&o) {
        Err(Error::InvalidConfig(v)) => assert_eq!(v[0].field, "beta_ov"),
        other => panic!("{other:?}"),
    }
    let o = opts(dir.path(), "\nnot_a_key = 3\n");
    assert!(matches!(cmd_validate(&o), Err(Error::Parse { line: 2, .. })));

    let mut o = opts(dir.path(), SMALL);
    o.trials = Some(10);
    assert!(matches!(cmd_prp_sweep(&o), Err(Error::InvalidConfig(_))));
}

#[test]
fn binary_validate_and_sweep() {
    let exe = env!("CARGO_BIN_EXE_hybrid-v2x");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, SMALL).unwrap();

    let out = Command::new(exe).arg("validate").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("config_hash = sha256:"));

    let out = Command::new(exe)
        .args(["prp-sweep", "--trials", "500", "--weather", "clear,dry_snow", "--modes", "la,non_la", "--out"])
        .arg(dir.path().join("run"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("run/prp_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "rho_a = 7\n").unwrap();
    let out = Command::new(exe).arg("validate").arg("--config").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_a"));
}
