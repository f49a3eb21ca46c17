use dpg_adapt::assembly::TestNorm;
use dpg_adapt::config::RunConfig;
use dpg_adapt::study::Mode;

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "case = \"gaussian\"\np = 1\ncycles = 3\nmode = \"goal\"\nalpha = 200.0\n",
    )
    .unwrap();
    let c = RunConfig::load(&path).unwrap();
    assert_eq!((c.p, c.cycles, c.mode), (1, 3, Mode::Goal));
    assert_eq!(c.norm, TestNorm::Scaled);
    assert_eq!(c.case_params().alpha, 200.0);
    let s = c.settings().unwrap();
    assert_eq!(s.cycles, 3);
    assert_eq!(s.space.p, 1);
}

#[test]
fn invalid_values_rejected() {
    assert!(RunConfig::load("/nonexistent/run.toml").is_err());
    assert!(RunConfig::from_str("p = \"two\"").is_err());
    let c = RunConfig {
        growth: 0.0,
        ..Default::default()
    };
    assert!(c.settings().is_err());
    let c = RunConfig {
        p: 0,
        ..Default::default()
    };
    assert!(c.settings().is_err());
}
