use cli_runner::*;
use proptest::prelude::*;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elorenz"))
}

fn code(c: &mut Command) -> i32 {
    c.output().unwrap().status.code().unwrap()
}

#[test]
fn unknown_keys_rejected() {
    assert!(matches!(RunConfig::from_toml("colour = 1"), Err(CliError::Usage(_))));
    assert!(matches!(RunConfig::from_toml("[cones]\ngrid = 8"), Err(CliError::Usage(_))));
    assert!(matches!(RunConfig::from_toml("[henon_nf.table]\na = 1.0\nb = 0.0\nc = 0.0\nd = [0.0, 0.0, 0.0, 0.0]\ne = 2.0"), Err(CliError::Usage(_))));
    assert!(matches!(RunConfig::from_toml("schema_version = 7"), Err(CliError::Usage(_))));
    let ok = RunConfig::from_toml("[cones]\ngrid_n = 8\n[butterfly]\nbetas = [0.01]").unwrap();
    assert_eq!(ok.cones.grid_n, 8);
    assert_eq!(ok.cones.eps, ConesParams::default().eps);
}

#[test]
fn flags_win_and_defaults_materialize() {
    let cfg = RunConfig::from_toml("tol = 1e-5\nthreads = 2\nout_dir = \"from-file\"").unwrap();
    let ov = Overrides { tol: Some(1e-7), threads: Some(3), ..Default::default() };
    let m = cfg.clone().materialize(CommandName::Cones, &ov).unwrap();
    assert_eq!(m.tol, Some(1e-7));
    assert_eq!(m.threads, 3);
    assert_eq!(m.out_dir.as_deref(), Some(Path::new("from-file")));
    assert_eq!(m.command, Some(CommandName::Cones));

    let d = RunConfig::default().materialize(CommandName::HenonNf, &Overrides::default()).unwrap();
    assert_eq!(d.tol, Some(CommandName::HenonNf.default_tol()));
    assert!(d.out_dir.unwrap().ends_with("henon-nf"));

    let wrong = RunConfig::from_toml("command = \"cones\"").unwrap();
    assert!(matches!(wrong.materialize(CommandName::Butterfly, &Overrides::default()), Err(CliError::Usage(_))));
    assert!(matches!(RunConfig::from_toml("[separatrix]\nbetas = [0.2]"), Err(CliError::Usage(_))));
}

#[test]
fn manifest_records_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default().materialize(CommandName::VerifyClosedForms, &Overrides { out: Some(dir.path().into()), ..Default::default() }).unwrap();
    let m = execute(&cfg).unwrap();
    assert_eq!(m.status, Status::Pass);
    assert_eq!(m.exit_code, 0);
    let listed: Vec<String> = m.artifacts.iter().map(|a| a.file.clone()).collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).filter(|f| f != MANIFEST_FILE).collect();
    on_disk.sort();
    let mut l = listed.clone();
    l.sort();
    assert_eq!(l, on_disk);
    for a in &m.artifacts {
        let bytes = std::fs::read(dir.path().join(&a.file)).unwrap();
        assert_eq!(sha256_hex(&bytes), a.sha256);
        assert_eq!(bytes.len(), a.bytes);
    }
    // the manifest alone reproduces the configuration
    let back = RunConfig::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(back, cfg);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("closed_forms.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], REPORT_SCHEMA_VERSION);
    assert!(report["a1"]["quadrature_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = |s: &str| dir.path().join(s);
    assert_eq!(code(bin().args(["verify-closed-forms", "--out"]).arg(out("a"))), 0);
    assert_eq!(code(bin().args(["verify-closed-forms", "--perturb", "a1", "--out"]).arg(out("b"))), 1);
    assert_eq!(code(bin().args(["verify-closed-forms", "--perturb", "nonsense", "--out"]).arg(out("c"))), 2);
    assert_eq!(code(bin().args(["no-such-command"])), 2);
    assert_eq!(code(bin().args(["verify-closed-forms", "--tol", "-1", "--out"]).arg(out("d"))), 2);
    let bad = out("bad.toml");
    std::fs::write(&bad, "[lyapunov]\nwhatever = 3\n").unwrap();
    assert_eq!(code(bin().args(["lyapunov", "--config"]).arg(&bad).arg("--out").arg(out("e"))), 2);
    // an orbit bound below the start point makes the iteration diverge at once
    let tiny = out("tiny.toml");
    std::fs::write(&tiny, "[lyapunov]\nbound = 1e-9\nn_iter = 100\n").unwrap();
    assert_eq!(code(bin().args(["lyapunov", "--config"]).arg(&tiny).arg("--out").arg(out("f"))), 3);
}

#[test]
fn perturbation_names_the_failing_check() {
    for name in CLOSED_FORM_CHECKS {
        let p = ClosedFormsParams { perturb: Some(name.to_string()), ..Default::default() };
        let r = verify_closed_forms(&p, 1e-12).unwrap();
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec![name]);
    }
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin().arg("verify-closed-forms").env(OUT_ENV, dir.path()).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(dir.path().join("verify-closed-forms").join(MANIFEST_FILE).exists());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_snapshot_round_trips(grid in 1usize..100, eps in 0.01..0.99f64, tol in 1e-14..1e-3f64, a in -1.0..1.0f64, threads in 0usize..8) {
        let mut cfg = RunConfig::default();
        cfg.cones.grid_n = grid;
        cfg.quotient.eps = eps;
        cfg.henon_nf.table.a = a;
        let ov = Overrides { tol: Some(tol), threads: Some(threads), out: Some("x".into()), perturb: None };
        let m = cfg.materialize(CommandName::Quotient, &ov).unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        let t: RunConfig = RunConfig::from_toml(&toml::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(t, m);
    }

    #[test]
    fn checks_fail_on_nan(v in -1.0..1.0f64) {
        prop_assert!(!Check::below("x", f64::NAN, v).pass);
        prop_assert!(!Check::above("x", f64::NAN, v).pass);
        prop_assert!(!Check::within("x", f64::NAN, -2.0, 2.0).pass);
        prop_assert!(Check::within("x", v, -1.0, 1.0).pass);
    }
}
