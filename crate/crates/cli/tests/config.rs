use collapsim::config::parse_file;
use collapsim::output::{Cell, Table, DILATION_HEADER, FLASHES_HEADER};
use collapsim::{CliError, Experiment, ExperimentConfig, Overrides};

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn field_of(e: CliError) -> String {
    match e {
        CliError::Config { field, .. } => field.into_owned(),
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn defaults_file_then_overrides() {
    let file = pairs(&[("experiment", "grw1d"), ("tau", "2"), ("alpha", "0.25"), ("seed", "5")]);
    let over = Overrides {
        seed: Some(9),
        params: pairs(&[("tau", "3")]),
        ..Overrides::default()
    };
    let c = ExperimentConfig::build(Experiment::Grw1d, &file, &over).unwrap();
    assert_eq!(c.get("tau"), 3.0);
    assert_eq!(c.get("alpha"), 0.25);
    assert_eq!(c.get("mass"), 1.0);
    assert_eq!(c.seed, 9);
    assert_eq!(c.trials, 100_000);
}

#[test]
fn unknown_key_is_named() {
    let over = Overrides {
        params: pairs(&[("tua", "1")]),
        ..Overrides::default()
    };
    let e = ExperimentConfig::build(Experiment::Grw1d, &[], &over).unwrap_err();
    assert_eq!(field_of(e), "tua");
}

#[test]
fn negative_tau_names_the_field() {
    let e = ExperimentConfig::build(Experiment::Dilation, &pairs(&[("tau", "-1")]), &Overrides::default()).unwrap_err();
    let text = e.to_string();
    assert_eq!(field_of(e), "tau");
    assert!(text.contains("positive"), "{text}");
}

#[test]
fn counts_must_be_whole() {
    let e = ExperimentConfig::build(Experiment::Dilation, &pairs(&[("flashes", "2.5")]), &Overrides::default()).unwrap_err();
    assert_eq!(field_of(e), "flashes");
    let zero = Overrides {
        trials: Some(0),
        ..Overrides::default()
    };
    assert_eq!(field_of(ExperimentConfig::build(Experiment::Grw1d, &[], &zero).unwrap_err()), "trials");
}

#[test]
fn file_for_another_experiment_is_rejected() {
    let e = ExperimentConfig::build(Experiment::Grw1d, &pairs(&[("experiment", "dilation")]), &Overrides::default()).unwrap_err();
    assert_eq!(field_of(e), "experiment");
}

#[test]
fn config_file_syntax() {
    let parsed = parse_file("# comment\ntau = 2 # trailing\n\nalpha=0.5\n").unwrap();
    assert_eq!(parsed, pairs(&[("tau", "2"), ("alpha", "0.5")]));
    assert_eq!(field_of(parse_file("tau = 1\ntau = 2\n").unwrap_err()), "tau");
    assert!(parse_file("tau 1\n").is_err());
}

#[test]
fn every_experiment_parses_by_name() {
    for e in Experiment::ALL {
        assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        assert!(!e.tolerances().is_empty());
    }
    assert!("nope".parse::<Experiment>().is_err());
}

#[test]
fn csv_headers_and_precision() {
    let mut t = Table::new("flashes.csv", &FLASHES_HEADER);
    t.rows.push(vec![Cell::Int(0), Cell::Int(1), Cell::Real(0.1), Cell::Real(-2.0), Cell::Real(1.0 / 3.0)]);
    let csv = t.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("trajectory,index,t,x,delta_T"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.1);
    assert_eq!(row[4].parse::<f64>().unwrap(), 1.0 / 3.0);
    assert_eq!(DILATION_HEADER.join(","), "eta,mean_dt,ci_lo,ci_hi");
}
