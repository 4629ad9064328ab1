//! Experiment registry and strict flat `key = value` configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Grw1d,
    FlashChain,
    Dilation,
    Covariance,
    Microcausality,
    BellNoncompare,
    Factorization,
    Amplification,
    FockMacro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Positive,
    Real,
    /// Positive integer.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub kind: Kind,
}

const fn p(name: &'static str, default: f64, kind: Kind) -> ParamSpec {
    ParamSpec {
        name,
        default,
        kind,
    }
}

use Kind::{Count, Positive, Real};

const GRW1D: &[ParamSpec] = &[
    p("tau", 1.0, Positive),
    p("alpha", 0.5, Positive),
    p("mass", 1.0, Positive),
    p("grid_length", 200.0, Positive),
    p("grid_points", 1024.0, Count),
    p("states", 100.0, Count),
    p("trajectories", 4.0, Count),
    p("collapses", 50.0, Count),
];

const FLASH_CHAIN: &[ParamSpec] = &[
    p("tau", 50.0, Positive),
    p("alpha", 0.01, Positive),
    p("width", 10.0, Positive),
    p("grid_length", 1024.0, Positive),
    p("grid_points", 1024.0, Count),
    p("flashes", 10.0, Count),
    p("cases", 50.0, Count),
    p("case_alpha", 0.5, Positive),
];

const DILATION: &[ParamSpec] = &[
    p("tau", 300.0, Positive),
    p("alpha", 0.004, Positive),
    p("width", 10.0, Positive),
    p("grid_length", 4096.0, Positive),
    p("grid_points", 4096.0, Count),
    p("flashes", 14.0, Count),
];

const COVARIANCE: &[ParamSpec] = &[
    p("eta", 0.5, Real),
    p("dt", 5.0, Positive),
    p("tau", 300.0, Positive),
    p("alpha", 0.004, Positive),
    p("width", 10.0, Positive),
    p("grid_length", 4096.0, Positive),
    p("grid_points", 4096.0, Count),
    p("boost", 0.9, Real),
    p("chains", 100.0, Count),
    p("flashes", 10.0, Count),
    p("bins", 10.0, Count),
];

const MICROCAUSALITY: &[ParamSpec] = &[
    p("alpha", 1.0, Positive),
    p("width", 15.0, Positive),
];

const BELL: &[ParamSpec] = &[
    p("tau", 1.0, Positive),
    p("alpha", 1.0, Positive),
    p("offset", 10.0, Positive),
    p("width", 1.0, Positive),
    p("grid_length", 64.0, Positive),
    p("grid_points", 128.0, Count),
    p("sigma_rapidity", 0.3, Real),
    p("sigma_time", 50.0, Real),
];

const FACTORIZATION: &[ParamSpec] = &[
    p("alpha", 1.0, Positive),
    p("offset", 10.0, Positive),
    p("width", 1.0, Positive),
    p("grid_length", 64.0, Positive),
    p("grid_points", 128.0, Count),
    p("coupling_max", 0.8, Positive),
    p("coupling_range", 1.0, Positive),
];

const AMPLIFICATION: &[ParamSpec] = &[
    p("tau", 1.0, Positive),
    p("alpha", 1.0, Positive),
    p("offset", 10.0, Positive),
    p("width", 1.0, Positive),
    p("grid_length", 64.0, Positive),
    p("grid_points", 128.0, Count),
];

const FOCK: &[ParamSpec] = &[
    p("d", 11.0, Positive),
    p("r", 4.0, Positive),
    p("eps", 1.0, Positive),
    p("alpha", 1.0, Positive),
    p("modes", 32.0, Count),
    p("fermions", 4.0, Count),
];

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Grw1d,
        Experiment::FlashChain,
        Experiment::Dilation,
        Experiment::Covariance,
        Experiment::Microcausality,
        Experiment::BellNoncompare,
        Experiment::Factorization,
        Experiment::Amplification,
        Experiment::FockMacro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Grw1d => "grw1d",
            Experiment::FlashChain => "flash-chain",
            Experiment::Dilation => "dilation",
            Experiment::Covariance => "covariance",
            Experiment::Microcausality => "microcausality",
            Experiment::BellNoncompare => "bell-noncompare",
            Experiment::Factorization => "factorization",
            Experiment::Amplification => "amplification",
            Experiment::FockMacro => "fock-macro",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Grw1d => "nonrelativistic GRW: location pdf normalization, Poisson intervals, collapse trajectories",
            Experiment::FlashChain => "relativistic flash chains and surface independence of the collapse",
            Experiment::Dilation => "lab-frame flash intervals of moving packets",
            Experiment::Covariance => "unitary covariance defect and boosted flash-chain ensembles",
            Experiment::Microcausality => "collapse-operator commutators versus separation",
            Experiment::BellNoncompare => "frame-comparison obstruction and no-signaling",
            Experiment::Factorization => "factorization of joint flash laws and the interaction obstruction",
            Experiment::Amplification => "decay rate of GHZ-type superpositions versus particle number",
            Experiment::FockMacro => "fermionic two-object superposition and its collapse",
        }
    }

    /// What `trials` counts, and its default.
    pub fn trials(self) -> (&'static str, usize) {
        match self {
            Experiment::Grw1d => ("sampled intervals", 100_000),
            Experiment::FlashChain => ("chains", 8),
            Experiment::Dilation => ("chains per rapidity", 400),
            Experiment::Covariance => ("random states", 100),
            Experiment::Microcausality => ("random nonrelativistic cases", 10),
            Experiment::BellNoncompare => ("no-signaling trials", 10_000),
            Experiment::Factorization => ("random separable states", 100),
            Experiment::Amplification => ("trials per particle number", 500),
            Experiment::FockMacro => ("unused", 1),
        }
    }

    pub fn tolerances(self) -> &'static [&'static str] {
        match self {
            Experiment::Grw1d => &[
                "pdf integral = 1 within 1e-9",
                "mean interval = tau within 3 sigma",
                "exponential KS p > 0.01",
            ],
            Experiment::FlashChain => &[
                "post-collapse states via two hyperplanes agree within 1e-8",
                "every chain complete and time-like ordered",
            ],
            Experiment::Dilation => &["mean lab interval / tau = cosh(eta) within 5%, eta in {0, 0.5, 1}"],
            Experiment::Covariance => &[
                "covariance defect <= 1e-8",
                "rest and boosted dT histograms agree within 3 sigma per bin",
            ],
            Experiment::Microcausality => &[
                "defect < 1e-3 at separation >= 20",
                "nonrelativistic same-hyperplane defect <= 1e-12",
            ],
            Experiment::BellNoncompare => &[
                "Bell trace distance > 0.9",
                "separable trace distance < 1e-6",
                "no-signaling |z| < 3",
            ],
            Experiment::Factorization => &[
                "separable defect < 1e-9",
                "Bell same-side defect = 0.25 +- 0.01",
                "interaction defect < 1e-9 at zero coupling",
                "interaction defect strictly increasing",
            ],
            Experiment::Amplification => &["rate(N) / rate(1) = N within 20%, N in {1, 2, 4, 8}"],
            Experiment::FockMacro => &[
                "total and left number eigenvalues exact",
                "left-of-(-d) residual > 0.1",
                "fidelity >= 0.99",
                "suppressed amplitude < 1e-4",
                "object-2 Schmidt coefficients 1/sqrt(2) within 1e-3",
                "earliest object-2 flash time = 2d",
            ],
        }
    }

    pub fn schema(self) -> &'static [ParamSpec] {
        match self {
            Experiment::Grw1d => GRW1D,
            Experiment::FlashChain => FLASH_CHAIN,
            Experiment::Dilation => DILATION,
            Experiment::Covariance => COVARIANCE,
            Experiment::Microcausality => MICROCAUSALITY,
            Experiment::BellNoncompare => BELL,
            Experiment::Factorization => FACTORIZATION,
            Experiment::Amplification => AMPLIFICATION,
            Experiment::FockMacro => FOCK,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::config("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub params: BTreeMap<&'static str, f64>,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub params: Vec<(String, String)>,
}

/// Splits `key=value`.
pub fn split_pair(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config("param", format!("`{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Parses a flat config file: one `key = value` per line, `#` comments.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line)?;
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(CliError::config_owned(k, "given twice in the config file"));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn parse_number(name: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::config_owned(name.to_string(), format!("`{value}` is not a number")))
}

fn check_kind(spec: &ParamSpec, v: f64) -> Result<()> {
    let bad = |reason: &str| Err(CliError::config(spec.name, format!("{v} {reason}")));
    if !v.is_finite() {
        return bad("is not finite");
    }
    match spec.kind {
        Kind::Positive if v <= 0.0 => bad("must be positive"),
        Kind::Count if v < 1.0 || v.fract() != 0.0 => bad("must be a positive integer"),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    /// Defaults, then the file's entries, then the overrides. Unknown keys
    /// are rejected.
    pub fn build(experiment: Experiment, file: &[(String, String)], over: &Overrides) -> Result<Self> {
        let mut config = Self {
            experiment,
            seed: 0,
            trials: experiment.trials().1,
            params: experiment.schema().iter().map(|s| (s.name, s.default)).collect(),
            out: PathBuf::from("out").join(experiment.name()),
        };
        for (k, v) in file {
            config.set(k, v)?;
        }
        for (k, v) in &over.params {
            config.set(k, v)?;
        }
        if let Some(seed) = over.seed {
            config.seed = seed;
        }
        if let Some(trials) = over.trials {
            config.set_trials(trials)?;
        }
        if let Some(out) = &over.out {
            config.out = out.clone();
        }
        Ok(config)
    }

    fn set_trials(&mut self, trials: usize) -> Result<()> {
        if trials == 0 {
            return Err(CliError::config("trials", "must be positive"));
        }
        self.trials = trials;
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                if value != self.experiment.name() {
                    return Err(CliError::config(
                        "experiment",
                        format!("file is for `{value}`, running `{}`", self.experiment),
                    ));
                }
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| CliError::config("seed", format!("`{value}` is not a non-negative integer")))?;
            }
            "trials" => {
                let n = value
                    .parse()
                    .map_err(|_| CliError::config("trials", format!("`{value}` is not a positive integer")))?;
                self.set_trials(n)?;
            }
            "out" => self.out = PathBuf::from(value),
            _ => {
                let spec = self
                    .experiment
                    .schema()
                    .iter()
                    .find(|s| s.name == key)
                    .ok_or_else(|| {
                        CliError::config_owned(key.to_string(), format!("unknown key for {}", self.experiment))
                    })?;
                let v = parse_number(spec.name, value)?;
                check_kind(spec, v)?;
                self.params.insert(spec.name, v);
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        *self
            .params
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` is not in the {} schema", self.experiment))
    }

    pub fn count(&self, name: &str) -> usize {
        self.get(name) as usize
    }
}
