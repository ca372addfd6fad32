//! The `ferdisc` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::decomp::{sector_split, walgate_in_subspace};
use crate::discrim::{
    attach_ancilla, classify_perfect, critical_prior, delta, helstrom_error, locc_error, optimality_report,
    CriticalPrior, DiscriminationInstance,
};
use crate::error::{Error, Result};
use crate::fock::{sector_projectors, FockVector, ModePartition, Subspace};
use crate::linalg::c64;
use crate::oracle::sandwich;
use crate::protocol::{build_protocol, simulate, LoccProtocol, ProtocolKind};
use crate::random::random_instance;
use crate::statefile::{read_state_file, write_states};
use crate::sweep::{fig1_grid, parse_range};
use crate::DEFAULT_TOL;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 24301;

const AFTER_HELP: &str = "\
STATE FILES
  UTF-8 text, one item per line, `#` starts a comment:
    modes: <n_alice>+<n_bob>     partition header, required first
    state: <name>                starts a named state (optional)
    <bitstring>: <re>,<im>       one basis amplitude
  Character j of a bitstring is the occupation of mode j; Alice owns the
  first n_alice modes. A file read with --in holds two states, named psi and
  phi or taken in order. States are rescaled to unit norm on load.

  Example, the pair (|00>|00> +- |01>|01>)/sqrt 2:
    modes: 2+2
    state: psi
    0000: 0.7071067811865476,0
    0101: 0.7071067811865476,0
    state: phi
    0000: 0.7071067811865476,0
    0101: -0.7071067811865476,0

EXIT CODES
  0 success, 1 I/O failure, 2 invalid input, 3 numerical non-convergence";

#[derive(Debug, Clone, Parser)]
#[command(name = "ferdisc", version, about = "Discrimination of bipartite Fermionic pure states by LOCC", after_help = AFTER_HELP)]
pub struct RunConfig {
    /// Tolerance for every numerical equality test.
    #[arg(long, global = true, env = "FERDISC_TOL", default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
    pub tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Decide perfect LOCC discriminability of two orthogonal states.
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// Also print the E/O components and, when perfect, the local decomposition.
        #[arg(long)]
        explain: bool,
    },
    /// Helstrom and LOCC error probabilities and the optimality verdict.
    Error {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        prior: f64,
    },
    /// Prior at which unassisted LOCC reaches the Helstrom error.
    Prior {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Build an explicit two-round protocol and write it as JSON.
    Protocol {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        prior: f64,
        #[arg(long, value_enum, default_value_t = ProtocolKind::Auto)]
        kind: ProtocolKind,
        /// Output path; the JSON goes to stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo run of a protocol.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        prior: f64,
        /// Protocol JSON to run; built as by `protocol --kind auto` when omitted.
        #[arg(long, value_name = "PATH")]
        protocol: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Compare sampled separable effects with the closed forms.
    Oracle {
        #[command(flatten)]
        input: OptionalInput,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        prior: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random instances to test when no states are given.
        #[arg(long, default_value_t = 5)]
        instances: usize,
    },
    /// Error excess over a grid of family parameters and prior shifts.
    Sweep {
        #[arg(long, value_name = "a:b:n", default_value = "0.02:0.2:10", allow_hyphen_values = true)]
        xi: String,
        #[arg(long, value_name = "c:d:m", default_value = "-0.1:0.1:41", allow_hyphen_values = true)]
        eps: String,
        /// CSV output path; the CSV goes to stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, value_name = "KIND")]
        emit_plot: Option<PlotKind>,
        /// Plot script path; defaults to the CSV path with a `.gp` extension.
        #[arg(long, value_name = "PATH", requires = "emit_plot")]
        plot_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Gnuplot,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// State file holding both states.
    #[arg(long = "in", value_name = "PATH", required_unless_present = "psi")]
    pub input: Option<PathBuf>,
    /// State file for the first state.
    #[arg(long, value_name = "PATH", conflicts_with = "input", requires = "phi")]
    pub psi: Option<PathBuf>,
    /// State file for the second state.
    #[arg(long, value_name = "PATH", conflicts_with = "input", requires = "psi")]
    pub phi: Option<PathBuf>,
    /// Share the ancilla a|00> + b|11> (one new mode per party) first.
    #[arg(long, value_name = "max|a,b")]
    pub ancilla: Option<String>,
    /// Write the states actually used (after the ancilla) to a state file.
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptionalInput {
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "PATH", conflicts_with = "input", requires = "phi")]
    pub psi: Option<PathBuf>,
    #[arg(long, value_name = "PATH", conflicts_with = "input", requires = "psi")]
    pub phi: Option<PathBuf>,
    #[arg(long, value_name = "max|a,b")]
    pub ancilla: Option<String>,
    /// Partition for random instances, `<n_alice>+<n_bob>`.
    #[arg(long, default_value = "2+2")]
    pub modes: String,
}

fn parse_ancilla(spec: &str) -> Result<(Complex64, Complex64)> {
    if spec.trim() == "max" {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return Ok((c64(h, 0.0), c64(h, 0.0)));
    }
    let bad = || Error::InvalidArgument(format!("--ancilla expects `max` or `a,b`, got {spec:?}"));
    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((c64(a, 0.0), c64(b, 0.0)))
}

fn load_pair(input: Option<&Path>, psi: Option<&Path>, phi: Option<&Path>) -> Result<(FockVector, FockVector)> {
    let (a, b) = match (input, psi, phi) {
        (Some(path), _, _) => {
            let file = read_state_file(path)?;
            let states = file.fock_states(true)?;
            let pick = |name: &str, fallback: usize| -> Result<FockVector> {
                match file.states.iter().position(|s| s.name.as_deref() == Some(name)) {
                    Some(i) => Ok(states[i].clone()),
                    None => states.get(fallback).cloned().ok_or_else(|| {
                        Error::InvalidArgument(format!("{} holds {} state(s); two are needed", path.display(), states.len()))
                    }),
                }
            };
            (pick("psi", 0)?, pick("phi", 1)?)
        }
        (None, Some(p), Some(f)) => {
            let one = |path: &Path| -> Result<FockVector> {
                let states = read_state_file(path)?.fock_states(true)?;
                match states.len() {
                    1 => Ok(states.into_iter().next().expect("one state")),
                    n => Err(Error::InvalidArgument(format!("{} holds {n} states; expected one", path.display()))),
                }
            };
            (one(p)?, one(f)?)
        }
        _ => return Err(Error::InvalidArgument("give --in, or both --psi and --phi".into())),
    };
    if a.partition() != b.partition() {
        return Err(Error::PartitionMismatch);
    }
    Ok((a, b))
}

fn with_ancilla(pair: (FockVector, FockVector), spec: Option<&str>) -> Result<(FockVector, FockVector)> {
    match spec {
        None => Ok(pair),
        Some(spec) => {
            let (a, b) = parse_ancilla(spec)?;
            Ok((attach_ancilla(&pair.0, a, b)?, attach_ancilla(&pair.1, a, b)?))
        }
    }
}

impl InputArgs {
    fn states(&self) -> Result<(FockVector, FockVector)> {
        let pair = load_pair(self.input.as_deref(), self.psi.as_deref(), self.phi.as_deref())?;
        let pair = with_ancilla(pair, self.ancilla.as_deref())?;
        if let Some(path) = &self.dump {
            std::fs::write(path, write_states(&[(Some("psi"), &pair.0), (Some("phi"), &pair.1)])?).map_err(Error::file(path))?;
        }
        Ok(pair)
    }
}

/// Ordered key/value output rendered as text, CSV or JSON.
struct Report {
    fields: Vec<(String, Value)>,
    notes: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { fields: Vec::new(), notes: Vec::new() }
    }

    fn add(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut s = String::new();
                for (k, v) in &self.fields {
                    s.push_str(&format!("{k}: {}\n", text_value(v)));
                }
                for n in &self.notes {
                    s.push_str(n);
                    s.push('\n');
                }
                s
            }
            Format::Csv => {
                let mut s = String::from("key,value\n");
                for (k, v) in &self.fields {
                    flatten_csv(k, v, &mut s);
                }
                s
            }
            Format::Json => {
                let map: serde_json::Map<String, Value> = self.fields.iter().cloned().collect();
                format!("{}\n", serde_json::to_string_pretty(&Value::Object(map)).expect("plain JSON value"))
            }
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => n.as_f64().map_or_else(|| n.to_string(), num),
        other => other.to_string(),
    }
}

fn flatten_csv(key: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten_csv(&format!("{key}.{k}"), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten_csv(&format!("{key}.{i}"), v, out)),
        Value::String(s) if s.contains(',') || s.contains('"') => {
            out.push_str(&format!("{key},\"{}\"\n", s.replace('"', "\"\"")))
        }
        other => out.push_str(&format!("{key},{}\n", text_value(other))),
    }
}

/// Shortest round-trip representation, with `-0` shown as `0`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:?}")
    }
}

fn complex_text(z: Complex64) -> String {
    let im = if z.im < 0.0 { format!("-{}", num(-z.im)) } else { format!("+{}", num(z.im)) };
    format!("{}{im}i", num(z.re))
}

fn terms_text(v: &FockVector) -> String {
    let terms = v.terms();
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|(i, a)| format!("({}) |{}>", complex_text(*a), v.partition().bitstring(*i)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn local_terms_text(v: &crate::linalg::CVector, modes: usize) -> String {
    let terms: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| format!("({}) |{}>", complex_text(*a), (0..modes).map(|m| if i >> m & 1 == 1 { '1' } else { '0' }).collect::<String>()))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn prior_value(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::InvalidPrior(p))
    }
}

fn check_cmd(tol: f64, input: &InputArgs, explain: bool) -> Result<Report> {
    let (psi, phi) = input.states()?;
    let verdict = classify_perfect(&psi, &phi, tol)?;
    let mut r = Report::new();
    r.add("verdict", if verdict.is_perfect() { "perfect-locc" } else { "not-perfectly-locc" })
        .add("case", verdict.case.as_str())
        .add("modes", psi.partition().to_string());
    let names = ["psi_E", "psi_O", "phi_E", "phi_O"];
    let nulls: Vec<&str> = names.iter().zip(verdict.null_components).filter(|(_, z)| *z).map(|(n, _)| *n).collect();
    r.add("null_components", if nulls.is_empty() { "none".to_string() } else { nulls.join(" ") });
    r.add("sigma_e", complex_text(verdict.sigma_e))
        .add("sigma_o", complex_text(verdict.sigma_o))
        .add("sigma_e_abs", verdict.sigma_e.norm())
        .add("sigma_o_abs", verdict.sigma_o.norm());
    if explain && psi.sector() == phi.sector() {
        let (pe, fe) = (psi.to_even_sector(), phi.to_even_sector());
        if psi.sector() != pe.sector() {
            r.notes.push("odd pair: shown after the Bob-local parity flip".into());
        }
        let (a, b) = (sector_split(&pe)?, sector_split(&fe)?);
        for s in Subspace::both() {
            r.notes.push(format!("psi_{s} = {}", terms_text(a.component(s))));
            r.notes.push(format!("phi_{s} = {}", terms_text(b.component(s))));
        }
        if verdict.is_perfect() {
            let p = *pe.partition();
            for s in Subspace::both() {
                let (u, v) = (a.component(s).amplitudes(), b.component(s).amplitudes());
                if u.norm() == 0.0 && v.norm() == 0.0 {
                    continue;
                }
                let w = walgate_in_subspace(&p, s, u, v, tol)?;
                r.notes.push(format!("decomposition on {s}:"));
                for k in 0..w.alice_basis.len() {
                    r.notes.push(format!("  alice {s}{k} = {}", local_terms_text(&w.alice_basis[k], p.n_alice())));
                    r.notes.push(format!("    eta = {}", local_terms_text(&w.bob_eta[k], p.n_bob())));
                    r.notes.push(format!("    nu  = {}", local_terms_text(&w.bob_nu[k], p.n_bob())));
                }
            }
        }
    }
    Ok(r)
}

fn error_cmd(tol: f64, input: &InputArgs, prior: f64) -> Result<Report> {
    let (psi, phi) = input.states()?;
    let inst = DiscriminationInstance::new(psi, phi, prior_value(prior)?)?;
    let mut r = Report::new();
    r.add("prior_p", prior);
    if inst.psi.sector() != inst.phi.sector() {
        r.add("helstrom_error", 0.0).add("locc_error", 0.0).add("gap", 0.0).add("locc_optimal", true);
        r.notes.push("different global parity: local parity measurements identify the state".into());
        return Ok(r);
    }
    let even = inst.even_form()?;
    let d = delta(&even);
    let sp = sector_projectors(even.partition());
    let (h, l) = (helstrom_error(&d), locc_error(&d, &sp)?);
    let report = optimality_report(&d, &sp, tol);
    r.add("helstrom_error", h)
        .add("locc_error", l)
        .add("gap", l - h)
        .add("locc_optimal", report.locc_optimal())
        .add("commutes_with_pe", report.commutes)
        .add("commutator_residual", report.commutator_residual)
        .add("eigvec_sector_residual", report.eigvec_sector_residual)
        .add("parity_contrast_residual", report.parity_contrast_residual);
    Ok(r)
}

fn prior_cmd(tol: f64, input: &InputArgs) -> Result<Report> {
    let (psi, phi) = input.states()?;
    if psi.sector() != phi.sector() {
        return Err(Error::WrongSector { expected: "same global parity for both states" });
    }
    let (pe, fe) = (psi.to_even_sector(), phi.to_even_sector());
    let mut r = Report::new();
    match critical_prior(&pe, &fe, tol)? {
        CriticalPrior::AllPriors => r.add("critical_prior", "all"),
        CriticalPrior::Unique(p) => r.add("critical_prior", "unique").add("p", p),
        CriticalPrior::None => r.add("critical_prior", "none"),
    };
    Ok(r)
}

fn protocol_summary(r: &mut Report, proto: &LoccProtocol, inst: &DiscriminationInstance) {
    let bob: usize = proto.alice.iter().map(|a| a.bob.len()).sum();
    r.add("construction", serde_json::to_value(proto.construction).expect("enum"))
        .add("alice_outcomes", proto.alice.len())
        .add("bob_outcomes", bob)
        .add("analytic_error", proto.analytic_error(inst));
}

fn protocol_cmd(
    tol: f64,
    input: &InputArgs,
    prior: f64,
    kind: ProtocolKind,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Option<Report>> {
    let (psi, phi) = input.states()?;
    let proto = build_protocol(&psi, &phi, prior, kind, tol)?;
    let text = proto.to_json()?;
    match out_path {
        None => {
            writeln!(out, "{text}")?;
            Ok(None)
        }
        Some(path) => {
            std::fs::write(path, format!("{text}\n")).map_err(Error::file(path))?;
            let inst = DiscriminationInstance::new(psi, phi, prior_value(prior)?)?;
            let mut r = Report::new();
            r.add("written", path.display().to_string()).add("prior_p", prior);
            protocol_summary(&mut r, &proto, &inst);
            Ok(Some(r))
        }
    }
}

fn simulate_cmd(
    tol: f64,
    input: &InputArgs,
    prior: f64,
    protocol: Option<&Path>,
    shots: u64,
    seed: u64,
) -> Result<Report> {
    let (psi, phi) = input.states()?;
    let proto = match protocol {
        Some(path) => LoccProtocol::from_json(&std::fs::read_to_string(path).map_err(Error::file(path))?)?,
        None => build_protocol(&psi, &phi, prior, ProtocolKind::Auto, tol)?,
    };
    let inst = DiscriminationInstance::new(psi, phi, prior_value(prior)?)?;
    let rep = simulate(&proto, &inst, shots, seed)?;
    let analytic = proto.analytic_error(&inst);
    let mut r = Report::new();
    r.add("prior_p", prior);
    protocol_summary(&mut r, &proto, &inst);
    r.add("shots", rep.shots)
        .add("seed", rep.seed)
        .add("errors", rep.errors)
        .add("empirical_error", rep.empirical_error)
        .add("std_err", rep.std_err);
    let dev = rep.empirical_error - analytic;
    r.add("deviation", dev);
    r.add("z_score", if rep.std_err > 0.0 { dev / rep.std_err } else { 0.0 });
    Ok(r)
}

fn oracle_cmd(input: &OptionalInput, prior: f64, trials: usize, seed: u64, instances: usize) -> Result<Report> {
    let mut list: Vec<DiscriminationInstance> = Vec::new();
    if input.input.is_some() || input.psi.is_some() {
        let pair = load_pair(input.input.as_deref(), input.psi.as_deref(), input.phi.as_deref())?;
        let (psi, phi) = with_ancilla(pair, input.ancilla.as_deref())?;
        list.push(DiscriminationInstance::new(psi, phi, prior_value(prior)?)?.even_form()?);
    } else {
        let (na, nb) = input
            .modes
            .split_once('+')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| Error::InvalidArgument(format!("--modes expects <n_alice>+<n_bob>, got {:?}", input.modes)))?;
        let p = ModePartition::new(na, nb)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..instances {
            list.push(random_instance(&mut rng, p));
        }
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, inst) in list.iter().enumerate() {
        let d = delta(inst);
        let sp = sector_projectors(inst.partition());
        let s = sandwich(&d, &sp, trials, seed.wrapping_add(i as u64))?;
        let p = inst.prior_p;
        let locc = locc_error(&d, &sp)?;
        let hel = helstrom_error(&d);
        let row_ok = s.sampled <= s.best_sep + 1e-10
            && s.best_sep <= s.unconstrained + 1e-10
            && (p - s.best_sep - locc).abs() <= 1e-10
            && (p - s.unconstrained - hel).abs() <= 1e-10;
        ok &= row_ok;
        rows.push(json!({
            "prior_p": p,
            "sampled": s.sampled,
            "best_sep": s.best_sep,
            "unconstrained": s.unconstrained,
            "p_minus_best_sep": p - s.best_sep,
            "locc_error": locc,
            "p_minus_unconstrained": p - s.unconstrained,
            "helstrom_error": hel,
            "consistent": row_ok,
        }));
    }
    let mut r = Report::new();
    r.add("trials", trials).add("seed", seed).add("all_consistent", ok).add("instances", Value::Array(rows));
    Ok(r)
}

fn sweep_cmd(
    xi: &str,
    eps: &str,
    out_path: Option<&Path>,
    emit_plot: Option<PlotKind>,
    plot_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Option<Report>> {
    let grid = fig1_grid(&parse_range(xi)?, &parse_range(eps)?)?;
    let csv = grid.to_csv();
    let check = grid.check();
    let mut r = Report::new();
    match out_path {
        Some(path) => {
            std::fs::write(path, &csv).map_err(Error::file(path))?;
            r.add("written", path.display().to_string());
        }
        None if emit_plot.is_none() || plot_out.is_some() => {
            out.write_all(csv.as_bytes())?;
        }
        None => {}
    }
    if let Some(PlotKind::Gnuplot) = emit_plot {
        let csv_name = out_path.map_or_else(|| "grid.csv".to_string(), |p| p.display().to_string());
        let script = grid.gnuplot_script(&csv_name);
        match plot_out.map(Path::to_path_buf).or_else(|| out_path.map(|p| p.with_extension("gp"))) {
            Some(path) => {
                std::fs::write(&path, &script).map_err(Error::file(&path))?;
                r.add("plot_script", path.display().to_string());
            }
            None => out.write_all(script.as_bytes())?,
        }
    }
    if out_path.is_none() {
        return Ok(None);
    }
    r.add("points", grid.points.len())
        .add("all_checks_pass", check.passes())
        .add("zero_line_exact", check.zero_line_exact)
        .add("slopes_increase", check.slopes_increase)
        .add("min_delta_perr", check.min_delta_perr)
        .add("min_bound_slack", check.min_bound_slack)
        .add("min_prime_bound_slack", check.min_prime_bound_slack);
    for s in &check.slopes {
        r.notes.push(format!("xi {}: one-sided slopes left {} right {}", num(s.xi), num(s.left), num(s.right)));
    }
    Ok(Some(r))
}

/// Execute one parsed command line, writing results to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let tol = config.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let report = match &config.command {
        Command::Check { input, explain } => Some(check_cmd(tol, input, *explain)?),
        Command::Error { input, prior } => Some(error_cmd(tol, input, *prior)?),
        Command::Prior { input } => Some(prior_cmd(tol, input)?),
        Command::Protocol { input, prior, kind, out: path } => {
            protocol_cmd(tol, input, *prior, *kind, path.as_deref(), out)?
        }
        Command::Simulate { input, prior, protocol, shots, seed } => {
            Some(simulate_cmd(tol, input, *prior, protocol.as_deref(), *shots, *seed)?)
        }
        Command::Oracle { input, prior, trials, seed, instances } => {
            Some(oracle_cmd(input, *prior, *trials, *seed, *instances)?)
        }
        Command::Sweep { xi, eps, out: path, emit_plot, plot_out } => {
            sweep_cmd(xi, eps, path.as_deref(), *emit_plot, plot_out.as_deref(), out)?
        }
    };
    if let Some(r) = report {
        out.write_all(r.render(config.format).as_bytes())?;
    }
    Ok(())
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(&config, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "ferdisc: {e}");
            e.exit_code()
        }
    }
}
