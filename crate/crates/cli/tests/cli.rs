use std::path::Path;
use std::process::Command;

use flagchart::geometry::Tolerances;
use flagchart_cli::config::{AxisConfig, GroupConfig};
use flagchart_cli::RunConfig;
use proptest::prelude::*;

fn flagchart(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_flagchart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, config: &RunConfig) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, config.to_toml().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lemmas_pass_and_corrupted_gram_names_signature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let mut config = RunConfig {
        lemma_samples: 200,
        ..RunConfig::default()
    };
    let cfg = write_config(dir.path(), &config);
    let run = flagchart(&["check-lemmas", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("lemmas.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    let mut gram = vec![vec![0.0; 5]; 5];
    gram[0][1] = 1.0;
    gram[1][0] = 1.0;
    gram[2][2] = 1.0;
    gram[3][3] = -1.0;
    gram[4][4] = -1.0;
    config.gram = Some(gram);
    let cfg = write_config(dir.path(), &config);
    let run = flagchart(&["check-lemmas", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("signature"));
}

#[test]
fn lemma_verdict_does_not_depend_on_seed() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let config = RunConfig {
            n: 5,
            lemma_samples: 100,
            ..RunConfig::default()
        };
        let cfg = write_config(dir.path(), &config);
        let run = flagchart(&[
            "check-lemmas",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(run.status.code(), Some(0));
    }
}

#[test]
fn exit_codes_for_dynamical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut config = RunConfig {
        depth: 4,
        ..RunConfig::default()
    };
    config.group.rapidity = 0.01;
    let cfg = write_config(dir.path(), &config);
    assert_eq!(
        flagchart(&["limit-set", "--config", &cfg, "--out", out]).status.code(),
        Some(2)
    );

    // a ball centered on the hyperplane of the attracting point of `a`
    config.group.rapidity = 3.0;
    let cfg = write_config(dir.path(), &config);
    let run = flagchart(&["find-domain", "--config", &cfg, "--out", out]);
    assert_eq!(run.status.code(), Some(0));
    let thick: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("thickening.json")).unwrap()).unwrap();
    let item = thick["items"]
        .as_array()
        .unwrap()
        .iter()
        .find(|it| it["word"] == "a")
        .unwrap();
    let w: Vec<f64> = item["w"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let alpha = item["alpha"].as_f64().unwrap();
    // G'w with G' = diag(1, 1, -1); v = -α G'w / |G'w|²
    let gw = [w[0], w[1], -w[2]];
    let nn: f64 = gw.iter().map(|x| x * x).sum();
    let center: Vec<String> = gw.iter().map(|x| format!("{}", -alpha * x / nn)).collect();
    let run = flagchart(&[
        "audit",
        "--config",
        &cfg,
        "--out",
        out,
        "--center",
        &center.join(","),
        "--radius",
        "1.0",
    ]);
    assert_eq!(run.status.code(), Some(4), "{}", String::from_utf8_lossy(&run.stdout));
    let audit: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(audit["stabilized"], false);
    assert_eq!(audit["schema_version"], 1);
}

#[test]
fn pipeline_writes_every_artifact_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        depth: 6,
        ..RunConfig::default()
    };
    let cfg = write_config(dir.path(), &config);
    let names = [
        "limit_set.csv",
        "limit_set_2d.csv",
        "limit_set.svg",
        "thickening.json",
        "domain_point.json",
        "audit.json",
    ];
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = flagchart(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(
            status.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        runs.push(names.map(|n| std::fs::read(out.join(n)).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    let csv = String::from_utf8(runs[0][0].clone()).unwrap();
    assert!(csv.starts_with("x0,x1,x2,x3,x4,word_len,word\n"));
}

#[test]
fn scale_flag_rescales_the_domain_problem() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        depth: 6,
        ..RunConfig::default()
    };
    let cfg = write_config(dir.path(), &config);
    let read = |sub: &str| -> serde_json::Value {
        serde_json::from_slice(&std::fs::read(dir.path().join(sub).join("thickening.json")).unwrap()).unwrap()
    };
    for (sub, t) in [("t1", "1"), ("t05", "0.5")] {
        let out = dir.path().join(sub);
        let run = flagchart(&[
            "find-domain",
            "--config",
            &cfg,
            "--scale",
            t,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(run.status.code(), Some(0));
    }
    // offsets scale by t, directions do not move
    let (a, b) = (read("t1"), read("t05"));
    for (x, y) in a["items"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["items"].as_array().unwrap())
    {
        assert_eq!(x["word"], y["word"]);
        let (ax, ay) = (x["alpha"].as_f64().unwrap(), y["alpha"].as_f64().unwrap());
        assert!((0.5 * ax - ay).abs() < 1e-9, "{ax} {ay}");
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, 1e-15..1e-3f64, Just(0.0)]
}

fn axis() -> impl Strategy<Value = AxisConfig> {
    (
        prop::collection::vec(finite(), 3),
        prop::collection::vec(finite(), 3),
        prop::option::of(finite()),
        prop::option::of(prop::collection::vec(finite(), 3)),
        prop::option::of(finite()),
    )
        .prop_map(
            |(attracting, repelling, rapidity, translation, ball_radius)| AxisConfig {
                attracting,
                repelling,
                rapidity,
                translation,
                ball_radius,
            },
        )
}

proptest! {
    #[test]
    fn config_round_trips(
        n in 3usize..8,
        seed in any::<u64>(),
        depth in 1usize..12,
        refine in prop::option::of(1usize..14),
        scale in finite(),
        fraction in finite(),
        axes in prop::collection::vec(axis(), 0..3),
        tol in (finite(), finite(), finite()),
        out in "[a-z/_.]{1,12}",
    ) {
        let config = RunConfig {
            n,
            seed,
            depth,
            refine_depth: refine,
            scale,
            out: out.into(),
            radius_fraction: fraction,
            lemma_samples: 10,
            gram: None,
            group: GroupConfig { axes, ..GroupConfig::default() },
            tolerances: Tolerances { null: tol.0, incidence: tol.1, dedup: tol.2, ..Tolerances::default() },
        };
        let text = config.to_toml().unwrap();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), config);
    }
}
