use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ogb_core::policies::{build_policy, opt_hindsight, PolicyKind};
use ogb_core::run::run_policy;
use ogb_sim::seed::cell_seed;
use ogb_sim::simulate::{simulate, Capacity, RunSummary, SimSpec};
use ogb_sim::read_trace_file;
use tempfile::TempDir;

fn ogb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ogb")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = ogb(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn gen_zipf_file(dir: &Path) -> String {
    let path = p(dir, "zipf.txt");
    ok(&["gen", "--gen", "zipf", "--n", "500", "--t", "2e4", "--alpha", "0.8", "--seed", "1", "--out", &path]);
    path
}

fn summary(prefix: &str) -> RunSummary {
    serde_json::from_str(&fs::read_to_string(format!("{prefix}.summary.json")).unwrap()).unwrap()
}

fn series(prefix: &str) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(format!("{prefix}.series.csv")).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(dir.path(), "a.txt"), p(dir.path(), "b.txt"));
    for out in [&a, &b] {
        ok(&["gen", "--gen", "adversarial", "--n", "100", "--rounds", "50", "--seed", "7", "--out", out]);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_eq!(text.iter().filter(|&&c| c == b'\n').count(), 5000);
    let stdout = ok(&["gen", "--gen", "adversarial", "--n", "100", "--rounds", "50", "--seed", "7"]).stdout;
    assert_eq!(stdout, text);
    let other = ok(&["gen", "--gen", "adversarial", "--n", "100", "--rounds", "50", "--seed", "8"]).stdout;
    assert_ne!(other, text);
}

#[test]
fn simulate_is_deterministic_and_consistent() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let (a, b) = (p(dir.path(), "a"), p(dir.path(), "b"));
    for prefix in [&a, &b] {
        ok(&["simulate", "--trace", &trace, "--policy", "ogb", "--c", "25", "--batch", "4", "--window", "3000", "--seed", "9", "--out", prefix]);
    }
    for suffix in [".series.csv", ".occupancy.csv"] {
        assert_eq!(fs::read(format!("{a}{suffix}")).unwrap(), fs::read(format!("{b}{suffix}")).unwrap());
    }
    let text = fs::read_to_string(format!("{a}.series.csv")).unwrap();
    assert!(text.starts_with("t_window_start,hit_ratio,occupancy,removals_per_req,regret,regret_bound\n"));
    assert!(!text.contains('\r'));

    // Every summary scalar recomputes from the series and occupancy files.
    let s = summary(&a);
    let rows = series(&a);
    let t = s.t as f64;
    assert_eq!(rows.len(), 7);
    let lens: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(k, r)| rows.get(k + 1).map_or(t, |next| next[0]) - r[0])
        .collect();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
    let weighted = |col: usize| rows.iter().zip(&lens).map(|(r, l)| r[col] * l).sum::<f64>() / t;
    assert!(close(weighted(1), s.hit_ratio));
    assert!(close(weighted(3), s.removals_per_req));
    let last = rows.last().unwrap();
    assert!(close(last[4], s.final_regret));
    assert!(close(last[5], s.final_regret_bound));
    assert!(close(s.opt_hit_ratio, s.hit_ratio + s.final_regret / t));
    let occ: Vec<f64> = fs::read_to_string(format!("{a}.occupancy.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // Sampled every max(1, T / 10^4) requests.
    assert_eq!(occ.len(), 10_000);
    let mean = occ.iter().sum::<f64>() / occ.len() as f64;
    let sd = (occ.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>() / occ.len() as f64).sqrt();
    let max_dev = occ.iter().map(|o| (o - 25.0).abs() / 25.0).fold(0.0, f64::max);
    assert!(close(mean, s.occupancy_mean));
    assert!(close(sd / mean, s.occupancy_cov));
    assert!(close(max_dev, s.occupancy_max_rel_dev));
    assert_eq!(s.eta_setting, "auto");
    assert!(close(s.eta, ogb_core::theory::learning_rate(25.0, 500, 20_000, 4).unwrap()));
}

#[test]
fn summary_has_the_fixed_key_set() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let prefix = p(dir.path(), "run");
    ok(&["simulate", "--trace", &trace, "--policy", "lru", "--out", &prefix]);
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{prefix}.summary.json")).unwrap()).unwrap();
    let keys: Vec<&str> = value.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut expected = vec![
        "policy", "mode", "trace", "n", "t", "capacity", "batch", "eta_setting", "eta", "zeta_setting", "zeta",
        "window", "seed", "sampler_seed", "ftpl_seed", "hit_ratio", "opt_hit_ratio", "final_regret",
        "final_regret_bound", "occupancy_mean", "occupancy_cov", "occupancy_max_rel_dev", "removals_per_req",
        "wall_ns_per_req",
    ];
    let mut got = keys.clone();
    got.sort_unstable();
    expected.sort_unstable();
    assert_eq!(got, expected);
    // Default cache size is 5% of the catalog.
    assert_eq!(value["capacity"], 25.0);
    assert_eq!(value["window"], 100_000);
    for (_, v) in value.as_object().unwrap() {
        if let Some(x) = v.as_f64().filter(|_| v.is_f64()) {
            let digits = format!("{:e}", x).split('e').next().unwrap().replace(['.', '-'], "").len();
            assert!(digits <= 12, "{x}");
        }
    }
}

#[test]
fn opt_summary_matches_hindsight() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let prefix = p(dir.path(), "opt");
    ok(&["simulate", "--trace", &trace, "--policy", "opt", "--c", "40", "--out", &prefix]);
    let t = read_trace_file(Path::new(&trace)).unwrap();
    let s = summary(&prefix);
    assert_eq!(s.hit_ratio, opt_hindsight(&t, 40).hits as f64 / t.len() as f64);
    assert_eq!(s.final_regret, 0.0);
}

#[test]
fn ogb_and_ogb_cl_coincide_for_unit_batches() {
    let trace = ogb_core::trace::gen_zipf(300, 5000, 0.9, 4).unwrap();
    let mut spec = SimSpec::new(PolicyKind::Ogb);
    spec.capacity = Capacity::Items(30.0);
    spec.seed = 12;
    let cfg = spec.run_config(&trace).unwrap();
    let a = run_policy(build_policy(PolicyKind::Ogb, &cfg, &trace).unwrap().as_mut(), &trace).unwrap();
    let b = run_policy(build_policy(PolicyKind::OgbCl, &cfg, &trace).unwrap().as_mut(), &trace).unwrap();
    let worst = a.rewards.iter().zip(&b.rewards).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn adversarial_fractional_run_is_near_optimal() {
    let trace = ogb_core::trace::gen_adversarial(1000, 1000, 7).unwrap();
    let mut spec = SimSpec::new(PolicyKind::OgbFrac);
    spec.capacity = Capacity::Items(250.0);
    spec.window = 250_000;
    let out = simulate(&trace, "adversarial", &spec).unwrap();
    assert_eq!(out.summary.opt_hit_ratio, 0.25);
    let last_quarter = out.rows.last().unwrap().hit_ratio;
    assert!(last_quarter >= 0.9 * 0.25, "{last_quarter}");
}

#[test]
fn analyze_reports_lifetimes_and_reuse() {
    let dir = TempDir::new().unwrap();
    let trace = p(dir.path(), "t.txt");
    fs::write(&trace, "a\nb\na\nc\na\n").unwrap();
    let prefix = p(dir.path(), "loc");
    ok(&["analyze", "--trace", &trace, "--out", &prefix]);
    let lifetime = fs::read_to_string(format!("{prefix}.lifetime.csv")).unwrap();
    assert_eq!(
        lifetime,
        "key,first,last,count,lifetime,max_hits,cumulative_hit_ratio\n\
         b,1,1,1,0,0,0\n\
         c,3,3,1,0,0,0\n\
         a,0,4,3,4,2,0.4\n"
    );
    let reuse = fs::read_to_string(format!("{prefix}.reuse.csv")).unwrap();
    assert_eq!(reuse, "key,mean_gap,cdf\na,2,1\n");

    let again = p(dir.path(), "again");
    ok(&["analyze", "--trace", &trace, "--out", &again]);
    assert_eq!(fs::read(format!("{again}.lifetime.csv")).unwrap(), lifetime.as_bytes());
}

#[test]
fn analyze_cdf_is_monotone() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let prefix = p(dir.path(), "loc");
    ok(&["analyze", "--trace", &trace, "--out", &prefix]);
    let cdf: Vec<f64> = fs::read_to_string(format!("{prefix}.reuse.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*cdf.last().unwrap(), 1.0);
}

#[test]
fn single_cell_sweep_equals_simulate() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let sweep = p(dir.path(), "sw");
    ok(&["sweep", "--trace", &trace, "--policy", "ogb", "--c", "25", "--batch", "2", "--eta", "auto*0.5", "--window", "5000", "--seed", "77", "--jobs", "2", "--out", &sweep]);
    let seed = cell_seed(77, 0).to_string();
    let single = p(dir.path(), "single");
    ok(&["simulate", "--trace", &trace, "--policy", "ogb", "--c", "25", "--batch", "2", "--eta", "auto*0.5", "--window", "5000", "--seed", &seed, "--out", &single]);
    assert_eq!(fs::read(format!("{sweep}.cell0.series.csv")).unwrap(), fs::read(format!("{single}.series.csv")).unwrap());
    let (mut a, mut b) = (summary(&format!("{sweep}.cell0")), summary(&single));
    a.wall_ns_per_req = 0.0;
    b.wall_ns_per_req = 0.0;
    assert_eq!(a, b);
    let merged = fs::read_to_string(format!("{sweep}.sweep.csv")).unwrap();
    assert_eq!(merged.lines().count(), 2);
    assert!(merged.lines().nth(1).unwrap().starts_with("0,ok,ogb,25,2,auto*0.5,"));
}

#[test]
fn sweep_isolates_failing_cells() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let sweep = p(dir.path(), "sw");
    // FTPL needs a whole number of slots; the gradient policy does not.
    let out = ogb(&["sweep", "--trace", &trace, "--policy", "ogb-frac,ftpl", "--c", "12.5", "--window", "1e4", "--out", &sweep]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell 1 failed"));
    let mut rdr = csv::Reader::from_path(format!("{sweep}.sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((&rows[0][1], &rows[1][1]), ("ok", "failed"));
    assert!(rows[1][20].contains("integral capacity"));
    assert!(Path::new(&format!("{sweep}.cell0.series.csv")).exists());
}

#[test]
fn batch_grid_gives_one_series_per_batch() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let sweep = p(dir.path(), "sw");
    ok(&["sweep", "--trace", &trace, "--policy", "ogb-frac", "--c", "25", "--batch", "1,100,10000", "--window", "2000", "--out", &sweep]);
    let mut batches = Vec::new();
    for cell in 0..3 {
        let s = summary(&format!("{sweep}.cell{cell}"));
        assert_eq!(s.mode, "fractional");
        batches.push(s.batch);
        assert_eq!(series(&format!("{sweep}.cell{cell}")).len(), 10);
    }
    assert_eq!(batches, vec![1, 100, 10_000]);
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let out = p(dir.path(), "x");
    let cases: [(&[&str], &str); 4] = [
        (&["simulate", "--trace", &trace, "--policy", "arc", "--out", &out], "unknown policy"),
        (&["simulate", "--trace", &trace, "--c", "500", "--out", &out], "infeasible cache size"),
        (&["simulate", "--trace", "/nonexistent/trace", "--out", &out], "cannot open trace"),
        (&["simulate", "--gen", "zipf", "--n", "10", "--out", &out], "--t is required"),
    ];
    for (args, msg) in cases {
        let o = ogb(args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(msg), "{args:?}: {err}");
    }
    let bad = PathBuf::from(p(dir.path(), "bad.txt"));
    fs::write(&bad, b"a\n\xff\n").unwrap();
    let o = ogb(&["simulate", "--trace", bad.to_str().unwrap(), "--out", &out]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn generator_source_matches_file_source() {
    let dir = TempDir::new().unwrap();
    let trace = gen_zipf_file(dir.path());
    let (a, b) = (p(dir.path(), "a"), p(dir.path(), "b"));
    ok(&["simulate", "--trace", &trace, "--policy", "lfu", "--seed", "1", "--window", "5000", "--out", &a]);
    ok(&["simulate", "--gen", "zipf", "--n", "500", "--t", "2e4", "--alpha", "0.8", "--policy", "lfu", "--seed", "1", "--window", "5000", "--out", &b]);
    assert_eq!(fs::read(format!("{a}.series.csv")).unwrap(), fs::read(format!("{b}.series.csv")).unwrap());
}
