use tori::models::ModelSpec;
use tori_cli::config::{parse_config, Command};

#[test]
fn minimal_document_takes_defaults() {
    let cfg = parse_config(
        "command = \"check\"\n[system]\nname = \"action_oscillators\"\nn = 2\ns = 1\n",
    )
    .unwrap();
    assert_eq!(cfg.command, Command::Check);
    assert_eq!(
        cfg.system,
        ModelSpec::ActionOscillators {
            omega: vec![1.0, 2f64.sqrt()],
            a: vec![1.0, 1.0],
            s: 1
        }
    );
    assert_eq!(cfg.alpha, Some(vec![1]));
    assert_eq!(cfg.eps_grid, vec![0.0]);
    assert_eq!(cfg.beta_grid.len(), 1);
    assert_eq!(cfg.tolerances.tol_unit, 1e-6);
    assert_eq!(cfg.tolerances.tol_int, 1e-8);
    assert_eq!(cfg.tolerances.fixed_point, 1e-9);
    assert_eq!(cfg.tolerances.ode_rel, 1e-10);
    assert_eq!(cfg.tolerances.ode_abs, 1e-12);
    assert_eq!(cfg.twist_kappa, 0);
}

#[test]
fn default_action_oscillators_are_system_a() {
    let cfg =
        parse_config("command = \"floquet\"\n[system]\nname = \"action_oscillators\"\n").unwrap();
    assert_eq!(cfg.system, ModelSpec::system_a());
}

#[test]
fn negative_tolerance_names_its_key() {
    let text =
        "command = \"floquet\"\n[system]\nname = \"lyapunov\"\n[tolerances]\ntol_unit = -1.0\n";
    let err = parse_config(text).unwrap_err();
    assert_eq!(err.path, "tolerances.tol_unit");
}

#[test]
fn type_mismatch_names_its_key() {
    let text = "command = \"floquet\"\n[system]\nname = \"lyapunov\"\n[tolerances]\nfixed_point = \"small\"\n";
    let err = parse_config(text).unwrap_err();
    assert_eq!(err.path, "tolerances.fixed_point");
}

#[test]
fn unknown_and_missing_keys() {
    let err = parse_config("command = \"check\"\ncolour = 1\n[system]\nname = \"lyapunov\"\n")
        .unwrap_err();
    assert!(err.message.contains("colour"), "{err}");
    let err = parse_config("command = \"check\"\n").unwrap_err();
    assert!(err.message.contains("system"), "{err}");
    let err = parse_config("command = \"plot\"\n[system]\nname = \"lyapunov\"\n").unwrap_err();
    assert_eq!(err.path, "command");
}

#[test]
fn invalid_model_parameters() {
    let text = "command = \"check\"\n[system]\nname = \"isotropic_momentum\"\na = 1.0\nb = 1.0\n";
    let err = parse_config(text).unwrap_err();
    assert_eq!(err.path, "system");
}

#[test]
fn grids() {
    let text =
        "command = \"continue\"\neps_grid = [0.0, 0.1]\n[system]\nname = \"isotropic_momentum\"\n\
                [beta_grid]\ncenter = [1.0, 0.2]\nstep = [0.1, 0.05]\ncount = [3, 2]\n";
    let cfg = parse_config(text).unwrap();
    let levels: Vec<(f64, f64)> = cfg.beta_grid.iter().map(|b| (b[0], b[1])).collect();
    let expected = [
        (0.9, 0.175),
        (0.9, 0.225),
        (1.0, 0.175),
        (1.0, 0.225),
        (1.1, 0.175),
        (1.1, 0.225),
    ];
    assert_eq!(levels.len(), expected.len());
    for ((a, b), (x, y)) in levels.iter().zip(expected) {
        assert!((a - x).abs() < 1e-12 && (b - y).abs() < 1e-12);
    }
    assert_eq!(cfg.beta_step, vec![0.1, 0.05]);

    let empty = "command = \"continue\"\n[system]\nname = \"lyapunov\"\n[beta_grid]\ncount = [0]\n";
    assert_eq!(parse_config(empty).unwrap_err().path, "beta_grid.count");
    let no_eps = "command = \"continue\"\neps_grid = []\n[system]\nname = \"lyapunov\"\n";
    assert_eq!(parse_config(no_eps).unwrap_err().path, "eps_grid");
    let short = "command = \"continue\"\nalpha = [1]\n[system]\nname = \"isotropic_momentum\"\n";
    assert_eq!(parse_config(short).unwrap_err().path, "alpha");
}

#[test]
fn nondeg_without_cycle_searches() {
    let cfg =
        parse_config("command = \"nondeg\"\n[system]\nname = \"isotropic_momentum\"\n").unwrap();
    assert_eq!(cfg.alpha, None);
}
