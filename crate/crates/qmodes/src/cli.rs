//! Command-line front end: single-point probes, time sweeps, disentangling
//! coefficient dumps, and the validation suite. Output is CSV (UTF-8, `\n`
//! line endings, header row first, 17 significant digits) for external
//! plotting; identical configs produce byte-identical output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::algebra::{GenName, Group};
use crate::disentangle;
use crate::error::{Error, Result};
use crate::fock;
use crate::models::{reduce, ModelSpec};
use crate::transition::{self, TransitionResult};
use crate::validation;

/// Default mode frequencies. Transition probabilities do not depend on
/// them (the free evolution is diagonal), so they are fixed here rather
/// than exposed as flags.
pub const FC_OMEGAS: (f64, f64) = (1.3, 0.7);
pub const PA_OMEGAS: (f64, f64) = (1.1, 0.9);
pub const RAMAN_OMEGAS: (f64, f64, f64) = (0.9, 1.4, 0.6);

/// Resolved run configuration; the flat `key = value` config file holds
/// exactly these keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub k: f64,
    pub delta: f64,
    pub gs: f64,
    pub ga: f64,
    pub ks: f64,
    pub ka: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// Initial / final occupation tuples; empty means the model default.
    pub initial: Vec<usize>,
    pub final_state: Vec<usize>,
    pub t: f64,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    /// Oracle per-mode cap; 0 means the per-model default.
    pub nmax: usize,
    pub dt: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "fc".into(),
            k: 1.0,
            delta: 0.0,
            gs: 0.6,
            ga: 0.4,
            ks: 0.3,
            ka: 0.1,
            g1: 1.0,
            g2: 0.5,
            g3: 0.25,
            initial: Vec::new(),
            final_state: Vec::new(),
            t: 1.0,
            t0: 0.0,
            t1: 5.0,
            steps: 100,
            nmax: 0,
            dt: 0.01,
            out: None,
        }
    }
}

fn parse_usize_list(v: &str) -> Result<Vec<usize>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("occupation list entry {s:?}: {e}")))
        })
        .collect()
}

fn fmt_usize_list(v: &[usize]) -> String {
    v.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Parse a flat `key = value` file. Lines starting with `#` and blank
    /// lines are ignored; later keys override earlier ones.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidInput(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("{key} = {v:?}: {e}")))
        };
        match key {
            "model" => self.model = value.to_string(),
            "k" => self.k = parse_f64(value)?,
            "delta" => self.delta = parse_f64(value)?,
            "gs" => self.gs = parse_f64(value)?,
            "ga" => self.ga = parse_f64(value)?,
            "ks" => self.ks = parse_f64(value)?,
            "ka" => self.ka = parse_f64(value)?,
            "g1" => self.g1 = parse_f64(value)?,
            "g2" => self.g2 = parse_f64(value)?,
            "g3" => self.g3 = parse_f64(value)?,
            "initial" => self.initial = parse_usize_list(value)?,
            "final" => self.final_state = parse_usize_list(value)?,
            "t" => self.t = parse_f64(value)?,
            "t0" => self.t0 = parse_f64(value)?,
            "t1" => self.t1 = parse_f64(value)?,
            "steps" => {
                self.steps = value
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("steps = {value:?}: {e}")))?
            }
            "nmax" => {
                self.nmax = value
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("nmax = {value:?}: {e}")))?
            }
            "dt" => self.dt = parse_f64(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::InvalidInput(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    /// Emit the flat config; parsing it back yields an equivalent config.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model);
        for (k, v) in [
            ("k", self.k),
            ("delta", self.delta),
            ("gs", self.gs),
            ("ga", self.ga),
            ("ks", self.ks),
            ("ka", self.ka),
            ("g1", self.g1),
            ("g2", self.g2),
            ("g3", self.g3),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        if !self.initial.is_empty() {
            let _ = writeln!(s, "initial = {}", fmt_usize_list(&self.initial));
        }
        if !self.final_state.is_empty() {
            let _ = writeln!(s, "final = {}", fmt_usize_list(&self.final_state));
        }
        for (k, v) in [("t", self.t), ("t0", self.t0), ("t1", self.t1)] {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "nmax = {}", self.nmax);
        let _ = writeln!(s, "dt = {}", self.dt);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        s
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let spec = match self.model.as_str() {
            "fc" => ModelSpec::FrequencyConverter {
                omega_a: FC_OMEGAS.0,
                omega_b: FC_OMEGAS.1,
                k: self.k,
                delta: self.delta,
            },
            "pa" => ModelSpec::ParametricAmplifier {
                omega_a: PA_OMEGAS.0,
                omega_b: PA_OMEGAS.1,
                k: self.k,
                delta: self.delta,
            },
            "raman" => ModelSpec::Raman {
                omega_v: RAMAN_OMEGAS.0,
                omega_s: RAMAN_OMEGAS.1,
                omega_a: RAMAN_OMEGAS.2,
                g_s: self.gs,
                g_a: self.ga,
                k_s: self.ks,
                k_a: self.ka,
            },
            "su3" => ModelSpec::Su3 {
                g1: self.g1,
                g2: self.g2,
                g3: self.g3,
            },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown model {other:?} (expected fc, pa, raman or su3)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn states(&self, spec: &ModelSpec) -> Result<(Vec<usize>, Vec<usize>)> {
        let (default_initial, default_final): (Vec<usize>, Vec<usize>) = match spec {
            ModelSpec::FrequencyConverter { .. } => (vec![1, 0], vec![0, 1]),
            ModelSpec::ParametricAmplifier { .. } => (vec![0, 0], vec![1, 1]),
            ModelSpec::Raman { .. } => (vec![0, 0, 0], vec![1, 1, 0]),
            ModelSpec::Su3 { .. } => (vec![1, 0, 0], vec![0, 1, 0]),
        };
        let initial = if self.initial.is_empty() {
            default_initial
        } else {
            self.initial.clone()
        };
        let final_state = if self.final_state.is_empty() {
            default_final
        } else {
            self.final_state.clone()
        };
        if initial.len() != spec.n_modes() || final_state.len() != spec.n_modes() {
            return Err(Error::InvalidInput(format!(
                "occupation tuples must have {} entries for this model",
                spec.n_modes()
            )));
        }
        Ok((initial, final_state))
    }

    fn oracle_nmax(&self, spec: &ModelSpec, initial: &[usize], final_state: &[usize]) -> usize {
        if self.nmax > 0 {
            return self.nmax;
        }
        let occ_floor = initial
            .iter()
            .chain(final_state.iter())
            .copied()
            .max()
            .unwrap_or(0);
        let default = match spec {
            ModelSpec::FrequencyConverter { .. } => 8,
            ModelSpec::ParametricAmplifier { .. } => 60,
            ModelSpec::Raman { .. } => 14,
            ModelSpec::Su3 { .. } => 8,
        };
        default.max(occ_floor + 2)
    }
}

fn closed_form(
    spec: &ModelSpec,
    initial: &[usize],
    final_state: &[usize],
    t: f64,
) -> Result<TransitionResult> {
    match spec {
        ModelSpec::FrequencyConverter { k, delta, .. } => {
            let n = initial[0];
            if initial[1] != 0 || final_state != [0, n] {
                return Err(Error::InvalidInput(
                    "the converter closed form covers |N,0> -> |0,N>; pass --initial N,0 --final 0,N"
                        .into(),
                ));
            }
            Ok(transition::fc_swap(n as u32, *k, *delta, t))
        }
        ModelSpec::ParametricAmplifier { k, delta, .. } => {
            if initial != [0, 0] || final_state != [1, 1] {
                return Err(Error::InvalidInput(
                    "the amplifier closed form covers |0,0> -> |1,1>".into(),
                ));
            }
            transition::pa_vac_to_11(*k, *delta, t)
        }
        ModelSpec::Raman { .. } => {
            if initial != [0, 0, 0] {
                return Err(Error::InvalidInput(
                    "the Raman closed form starts from the vacuum |0,0,0>".into(),
                ));
            }
            transition::raman_from_vacuum(final_state[0], final_state[1], final_state[2], spec, t)
        }
        ModelSpec::Su3 { .. } => Err(Error::InvalidInput(
            "no closed-form transition is defined for the su3 model; use decompose".into(),
        )),
    }
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Evaluate the closed form and the oracle at a single time; one CSV row.
pub fn probe(config: &RunConfig) -> Result<String> {
    let spec = config.model_spec()?;
    let (initial, final_state) = config.states(&spec)?;
    let t = config.t;
    let closed = closed_form(&spec, &initial, &final_state, t)?;

    let n_max = config.oracle_nmax(&spec, &initial, &final_state);
    let basis = fock::build_basis(spec.n_modes(), n_max)?;
    let form = reduce(&spec)?;
    let prop = fock::interaction_propagator(&form, &basis)?;
    let oracle = prop
        .amplitude_at(t, basis.index(&final_state)?, basis.index(&initial)?)
        .norm_sqr();

    let note = if closed.selection_rule_violated {
        "selection_rule"
    } else {
        ""
    };
    let mut out = String::from("t,prob_closed,prob_oracle,abs_err,prob_closed_printed,note\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        sig17(t),
        sig17(closed.prob_closed),
        sig17(oracle),
        sig17((closed.prob_closed - oracle).abs()),
        sig17(closed.prob_closed_printed),
        note
    );
    Ok(out)
}

/// Closed form and oracle over the time grid; points evaluated in
/// parallel, rows emitted in grid order.
pub fn sweep(config: &RunConfig) -> Result<String> {
    if config.t1 <= config.t0 || config.steps == 0 {
        return Err(Error::InvalidInput(
            "sweep needs t1 > t0 and steps >= 1".into(),
        ));
    }
    let spec = config.model_spec()?;
    let (initial, final_state) = config.states(&spec)?;
    closed_form(&spec, &initial, &final_state, config.t0.max(1e-9))?; // validate states early

    let n_max = config.oracle_nmax(&spec, &initial, &final_state);
    let basis = fock::build_basis(spec.n_modes(), n_max)?;
    let form = reduce(&spec)?;
    let prop = fock::interaction_propagator(&form, &basis)?;
    let fi = basis.index(&final_state)?;
    let ii = basis.index(&initial)?;

    let ts: Vec<f64> = (0..=config.steps)
        .map(|i| config.t0 + (config.t1 - config.t0) * i as f64 / config.steps as f64)
        .collect();
    let rows: Vec<Result<String>> = ts
        .par_iter()
        .map(|&t| {
            let closed = closed_form(&spec, &initial, &final_state, t)?;
            let oracle = prop.amplitude_at(t, fi, ii).norm_sqr();
            Ok(format!(
                "{},{},{},{}\n",
                sig17(t),
                sig17(closed.prob_closed),
                sig17(oracle),
                sig17((closed.prob_closed - oracle).abs())
            ))
        })
        .collect();
    let mut out = String::from("t,prob_closed,prob_oracle,abs_err\n");
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

/// Disentangling coefficients at a single time, in the group's canonical
/// factor order, plus the factorization residual.
pub fn decompose(config: &RunConfig) -> Result<String> {
    let spec = config.model_spec()?;
    let form = reduce(&spec)?;
    let t = config.t;
    let factored = match form.group {
        Group::Su2 | Group::Su11 => {
            let rate = |name: GenName| {
                form.rates
                    .iter()
                    .find(|(g, _)| *g == name)
                    .map(|(_, c)| *c)
                    .unwrap_or_default()
            };
            let (plus, diag, minus) = match form.group {
                Group::Su2 => (GenName::JPlus, GenName::J3, GenName::JMinus),
                _ => (GenName::KPlus, GenName::K3, GenName::KMinus),
            };
            disentangle::disentangle_rank1(
                form.group,
                rate(diag) * t,
                rate(plus) * t,
                rate(minus) * t,
            )?
        }
        Group::Su21 => disentangle::disentangle_su21(&form, t)?,
        Group::Su3 => {
            let m = form.rep_exponent(1.0)?;
            disentangle::disentangle_su3(&m, t)?
        }
    };
    let direct = crate::smallmat::expm(&form.rep_exponent(t)?, num_complex::Complex64::new(1.0, 0.0));
    let residual = disentangle::verify_factorization(&factored, &direct)?;

    let mut out = String::from("generator,re,im\n");
    for (name, coeff) in &factored.factors {
        let _ = writeln!(out, "{},{},{}", name, sig17(coeff.re), sig17(coeff.im));
    }
    let _ = writeln!(out, "residual,{},0", sig17(residual));
    Ok(out)
}

/// Run the validation suite; one pass/fail line per criterion.
pub fn validate(config: &RunConfig, list_only: bool) -> Result<(String, bool)> {
    if list_only {
        let mut out = String::new();
        for name in validation::CRITERION_NAMES {
            let _ = writeln!(out, "{name}");
        }
        return Ok((out, true));
    }
    let mut settings = validation::Settings::default();
    if config.nmax > 0 {
        settings.pa_nmax = config.nmax;
    }
    let results = validation::run_all(&settings);
    let mut out = String::new();
    let mut all_ok = true;
    for r in &results {
        all_ok &= r.passed;
        let _ = writeln!(out, "{}", r.line());
    }
    let _ = writeln!(
        out,
        "{} of {} criteria passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok((out, all_ok))
}

/// Write `text` to the configured output path, or return it for stdout.
pub fn deliver(config: &RunConfig, text: &str) -> Result<Option<String>> {
    match &config.out {
        Some(path) => {
            std::fs::write(path, text.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}
