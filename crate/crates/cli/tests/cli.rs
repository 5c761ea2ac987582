use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

use lpkit::kernels::make_haar;
use lpkit::{Geometry, SampledField};
use serde_json::Value;

fn lpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpkit")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn kernel_info_haar() {
    let o = lpkit(&["kernel-info", "haar"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["cancellation"]["pass"], true);
    assert_eq!(v["hypotheses"]["b_eps"]["value"], 0.0);
    assert!((v["hypotheses"]["h_majorant_l1"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert_eq!(v["nondegeneracy"]["dyadic"]["pass"], true);
}

#[test]
fn kernel_info_flags_divergent_cu() {
    let v = json(&lpkit(&["kernel-info", "gm:0.75"]));
    let c4 = v["hypotheses"]["c_u"].as_array().unwrap().iter().find(|e| e["u"] == 4.0).unwrap();
    assert_eq!(c4["value"]["state"], "divergent");
}

#[test]
fn unknown_kernel_is_a_usage_error() {
    let o = lpkit(&["kernel-info", "nosuch"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
    assert_eq!(code(&lpkit(&[])), 2);
}

#[test]
fn haar_continuous_symbol_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("haar.csv");
    let o = lpkit(&["symbol", "haar", "--grid-n", "512", "--grid-l", "16", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let xi = csv_column(&out, 0);
    let m = csv_column(&out, 1);
    for (x, v) in xi.iter().zip(&m) {
        if *x != 0.0 {
            assert!((v - 4.0 * LN_2).abs() < 1e-4, "m({x}) = {v}");
        }
    }
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("haar.json")).unwrap()).unwrap();
    assert!(side["homogeneity_defect"].as_f64().unwrap() < 1e-4);
    assert_eq!(side["range"]["mode"], "continuous");
}

#[test]
fn single_scale_dyadic_symbol_is_squared_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let args = ["symbol", "haar", "--mode", "dyadic", "--k-min", "-1", "--k-max", "-1", "--grid-n", "256", "--grid-l", "8"];
    let o = lpkit(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = make_haar();
    for (x, v) in csv_column(&out, 0).iter().zip(csv_column(&out, 1)) {
        assert!((v - h.fourier(&[0.5 * x]).norm_sqr()).abs() < 1e-14);
    }
}

#[test]
fn empty_dyadic_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = lpkit(&["symbol", "haar", "--mode", "dyadic", "--k-min", "3", "--k-max", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(lpkit(&["symbol", "haar"]).status.code() == Some(2));
}

#[test]
fn one_member_family_has_unit_spread() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[grid]\nn = 512\nhalf_length = 16.0\n[equivalence]\nmembers = 1\n");
    let v = json(&lpkit(&["equivalence", "--config", &cfg]));
    assert_eq!(v["report"]["spread"], 1.0);
    assert_eq!(v["pass"], true);
}

#[test]
fn haar_equivalence_spread_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "seed = 5\n[grid]\nn = 1024\nhalf_length = 32.0\nt_min = 1e-6\nt_max = 1e6\nper_octave = 32\n[equivalence]\nbound = 1.01\n",
    );
    let o = lpkit(&["equivalence", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["report"]["spread"].as_f64().unwrap() <= 1.01);
}

#[test]
fn degenerate_kernel_fails_the_gate() {
    let o = lpkit(&["equivalence", "--operator", "delta-psi", "--kernel", "band:1:1.5", "--grid-n", "512", "--grid-l", "16"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-degeneracy"));
    let v = json(&o);
    assert_eq!(v["gate"]["pass"], false);
    assert!(v["report"].is_null());
}

#[test]
fn exceeded_bound_exits_one() {
    let o = lpkit(&["equivalence", "--kernel", "poisson-q", "--bound", "1.0001", "--grid-n", "512", "--grid-l", "16"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sobolev_runs() {
    let o = lpkit(&["sobolev", "--grid-n", "1024", "--grid-l", "32"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["report"]["spread"].as_f64().unwrap() <= v["spectral_bound"]["spread_bound"].as_f64().unwrap());
    let o = lpkit(&["sobolev", "--p", "1.5", "--weight", "pow:0.3", "--seed", "3", "--grid-n", "1024", "--grid-l", "32"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["spectral_bound"].is_null());
    assert_eq!(v["report"]["ratios"].as_array().unwrap().len(), 20);
}

#[test]
fn mar_scan_report() {
    let o = lpkit(&["mar-scan", "--alpha", "1.0"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for key in ["alpha", "max_ratio", "argmax", "refinement_delta", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(code(&lpkit(&["mar-scan", "--alpha", "2.0"])), 2);
}

#[test]
fn conditions_exit_codes() {
    assert_eq!(code(&lpkit(&["conditions", "haar"])), 0);
    assert_eq!(code(&lpkit(&["conditions", "band:1:1.5"])), 1);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = lpkit(&["sobolev", "--seed", "9", "--grid-n", "512", "--grid-l", "16", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[sobolev]\nalpah = 0.5\n");
    let o = lpkit(&["sobolev", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
    let o = lpkit(&["sobolev", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.toml"));
}

#[test]
fn gfun_reads_binary_fields() {
    let dir = tempfile::tempdir().unwrap();
    let geom = Geometry::new(1, 256, 8.0).unwrap();
    let f = SampledField::from_real_fn(geom, |x| x[0] * (-x[0] * x[0]).exp()).unwrap();
    let path = dir.path().join("f.lpsf");
    lpkit::grid::io::write_binary(&f, std::fs::File::create(&path).unwrap()).unwrap();
    let out = dir.path().join("g.csv");
    let o = lpkit(&["gfun", "haar", "--input", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = csv_column(&out, 3);
    assert_eq!(g.len(), 256);
    assert!(g.iter().all(|v| *v >= 0.0));
}

#[test]
fn example_config_parses() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.toml");
    let o = lpkit(&["conditions", "haar", "--config", path]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
