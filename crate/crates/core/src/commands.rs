//! Batch commands behind the `isrs-nli` binary. Each returns the complete CSV
//! text; [`write_output`] then places it atomically, so a failed run leaves
//! no partial files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::closed_form::{appendix_identity, total_nli_closedform, NliReport, Tier};
use crate::config::{check_channels, Config, FormatConfig, Scenario};
use crate::error::{NliError, Result};
use crate::integral::{integral_report, sinc_series_energy, sinc_series_increment, total_correction_integral};
use crate::modulation::ModulationFormat;
use crate::quad::QuadratureSpec;
use crate::raman::check_bandwidth;
use crate::ssfm::{simulate, simulate_checkpoints, SimulationResult};
use crate::units::{dbm_to_watt, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Validate,
    Simulate,
    Sweep,
    IdentityCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::IdentityCheck => "identity-check",
        }
    }
}

impl FromStr for Command {
    type Err = NliError;

    fn from_str(s: &str) -> Result<Self> {
        [Command::Estimate, Command::Validate, Command::Simulate, Command::Sweep, Command::IdentityCheck]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| NliError::Config(format!("unknown command '{s}'")))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub spans: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    /// Empty means the command's default.
    pub tiers: Vec<Tier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub file_name: String,
    pub text: String,
}

pub fn run(config: &Config, command: Command, overrides: &Overrides) -> Result<Output> {
    let scenario = config.scenario(overrides.spans, overrides.epsilon, overrides.seed)?;
    let mut text = header(config, command, overrides);
    match command {
        Command::Estimate => estimate(&scenario, overrides, &mut text)?,
        Command::Validate => validate(config, &scenario, overrides, &mut text)?,
        Command::Simulate => simulate_csv(&scenario, &mut text)?,
        Command::Sweep => sweep(config, &scenario, overrides, &mut text)?,
        Command::IdentityCheck => identity_check(config, &mut text)?,
    }
    Ok(Output { file_name: format!("{}.csv", command.name()), text })
}

/// Writes through a temporary file in `dir` and renames it into place.
pub fn write_output(dir: &Path, output: &Output) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(&output.file_name);
    let tmp = dir.join(format!(".{}.tmp", output.file_name));
    std::fs::write(&tmp, &output.text)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

fn header(config: &Config, command: Command, o: &Overrides) -> String {
    let mut h = format!("# isrs-nli {}\n# command: {}\n", env!("CARGO_PKG_VERSION"), command.name());
    if let Some(p) = config.preset {
        let _ = writeln!(h, "# preset: {}", if p == crate::config::Preset::Smf { "smf" } else { "nzdsf" });
    }
    if let Some(n) = o.spans {
        let _ = writeln!(h, "# override spans: {n}");
    }
    if let Some(e) = o.epsilon {
        let _ = writeln!(h, "# override epsilon: {e}");
    }
    if let Some(s) = o.seed {
        let _ = writeln!(h, "# override seed: {s}");
    }
    if !o.tiers.is_empty() {
        let tiers: Vec<_> = o.tiers.iter().map(Tier::flag).collect();
        let _ = writeln!(h, "# override tier: {}", tiers.join(","));
    }
    h
}

fn db(x: f64) -> f64 {
    linear_to_db(x)
}

fn tier_error(tier: Tier) -> impl Fn(NliError) -> NliError {
    move |e| NliError::Tier { tier: tier.label(), source: Box::new(e) }
}

fn single_tier(o: &Overrides, allowed: &[Tier], default: Tier) -> Result<Tier> {
    match o.tiers.as_slice() {
        [] => Ok(default),
        [t] if allowed.contains(t) => Ok(*t),
        other => Err(NliError::Config(format!("this command takes one tier out of {allowed:?}, got {other:?}"))),
    }
}

fn closed_form(s: &Scenario, grid: &crate::grid::ChannelGrid, plan: &crate::plan::LinkPlan) -> Result<NliReport> {
    check_bandwidth(grid, s.validity)?;
    total_nli_closedform(grid, &s.fiber, plan, s.params.as_ref()).map_err(tier_error(Tier::ClosedForm))
}

fn write_report(report: &NliReport, indices: &[usize], out: &mut String) {
    out.push_str(
        "# eta_gn_db, eta_total_db: 10 log10(eta / 1 W^-2); eta_corr: linear, 1/W^2 (negative for sub-Gaussian formats)\n",
    );
    out.push_str("channel,f_thz,eta_gn_db,eta_corr,eta_total_db,snr_db\n");
    for (&i, c) in indices.iter().zip(&report.channels) {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            c.center_freq * 1e-12,
            db(c.eta_gn),
            c.eta_corr,
            db(c.eta_total),
            db(c.snr)
        );
    }
}

fn estimate(s: &Scenario, o: &Overrides, out: &mut String) -> Result<()> {
    let tier = single_tier(o, &[Tier::ClosedForm, Tier::Integral, Tier::Ssfm], Tier::ClosedForm)?;
    let _ = writeln!(out, "# tier: {}\n# spans: {}", tier.label(), s.plan.span_count());
    match tier {
        Tier::ClosedForm => {
            let report = closed_form(s, &s.grid, &s.plan)?;
            let all: Vec<usize> = (0..s.grid.len()).collect();
            write_report(&report, &all, out);
        }
        Tier::Integral => {
            check_bandwidth(&s.grid, s.validity)?;
            let report = integral_report(&s.grid, &s.fiber, &s.plan, &s.integral_channels, &s.integral)
                .map_err(tier_error(Tier::Integral))?;
            write_report(&report, &s.integral_channels, out);
        }
        Tier::Ssfm => simulate_csv(s, out)?,
    }
    Ok(())
}

fn simulate_csv(s: &Scenario, out: &mut String) -> Result<()> {
    let r = simulate(&s.grid, &s.fiber, s.plan.span_count(), &s.simulation).map_err(tier_error(Tier::Ssfm))?;
    write_simulation(&r, out);
    Ok(())
}

fn write_simulation(r: &SimulationResult, out: &mut String) {
    let _ = writeln!(out, "# tier: ssfm\n# spans: {}\n# realizations: {}", r.span_count, r.per_realization.len());
    out.push_str("# eta from the received SNR, eta = 1/(SNR P^2); eta_std_error is the standard error over realizations\n");
    out.push_str("channel,f_thz,eta_db,eta,eta_std_error,snr_db");
    for k in 0..r.per_realization.len() {
        let _ = write!(out, ",snr_db_r{k}");
    }
    out.push('\n');
    for (i, c) in r.channels.iter().enumerate() {
        let _ = write!(out, "{i},{},{},{},{},{}", c.center_freq * 1e-12, db(c.eta), c.eta, c.eta_std_error, db(c.snr));
        for real in &r.per_realization {
            let _ = write!(out, ",{}", db(real[i].snr));
        }
        out.push('\n');
    }
}

fn validate(config: &Config, s: &Scenario, o: &Overrides, out: &mut String) -> Result<()> {
    let v = &config.validate;
    let mut spans = v.spans.clone().unwrap_or_else(|| vec![1, 2, 5, 10, 20, 50, 100]);
    if let Some(n) = o.spans {
        spans = vec![n];
    }
    if spans.is_empty() || spans.contains(&0) || spans.windows(2).any(|w| w[0] >= w[1]) {
        return Err(NliError::Config("validate.spans must be strictly increasing and ≥ 1".into()));
    }
    let channels = v.channels.clone().unwrap_or_else(|| vec![s.grid.len() / 2]);
    check_channels(&channels, &s.grid)?;
    let tiers = if !o.tiers.is_empty() {
        o.tiers.clone()
    } else {
        match &v.tiers {
            Some(t) => t.iter().map(|x| x.parse()).collect::<Result<Vec<Tier>>>()?,
            None => vec![Tier::ClosedForm, Tier::Integral],
        }
    };
    let with_int = tiers.contains(&Tier::Integral);
    let with_ssfm = tiers.contains(&Tier::Ssfm);
    let sims = if with_ssfm {
        Some(simulate_checkpoints(&s.grid, &s.fiber, &spans, &s.simulation).map_err(tier_error(Tier::Ssfm))?)
    } else {
        None
    };
    let tier_names: Vec<_> = tiers.iter().map(Tier::flag).collect();
    let _ = writeln!(out, "# tiers: {}", tier_names.join(","));
    out.push_str("# delta_*_db = 10 log10(closed-form / other tier); eta_corr columns are linear 1/W^2\n");
    out.push_str(
        "n,channel,f_thz,eta_gn_cf_db,eta_corr_cf,eta_total_cf_db,eta_corr_int,delta_corr_db,eta_ssfm_db,eta_ssfm_std_error,delta_ssfm_db\n",
    );
    let rows = spans
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let plan = s.plan.with_span_count(n)?;
            let cf = closed_form(s, &s.grid, &plan)?;
            let ints = if with_int {
                check_bandwidth(&s.grid, s.validity)?;
                channels
                    .par_iter()
                    .map(|&i| total_correction_integral(&s.grid, &s.fiber, i, n, &s.integral).map(Some))
                    .collect::<Result<Vec<_>>>()
                    .map_err(tier_error(Tier::Integral))?
            } else {
                vec![None; channels.len()]
            };
            let mut rows = String::new();
            for (&i, int) in channels.iter().zip(ints) {
                let r = &cf.channels[i];
                let _ = write!(rows, "{n},{i},{},{},{},{}", r.center_freq * 1e-12, db(r.eta_gn), r.eta_corr, db(r.eta_total));
                match int {
                    Some(x) => {
                        let _ = write!(rows, ",{x},{}", delta_db(r.eta_corr, x));
                    }
                    None => rows.push_str(",,"),
                }
                match &sims {
                    Some(sims) => {
                        let sc = &sims[c].channels[i];
                        let _ = write!(rows, ",{},{},{}", db(sc.eta), sc.eta_std_error, db(r.eta_total / sc.eta));
                    }
                    None => rows.push_str(",,,"),
                }
                rows.push('\n');
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    out.extend(rows);
    Ok(())
}

/// `10 log10(a/b)` for same-signed values; `0` when both vanish.
fn delta_db(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        db(a / b)
    }
}

fn sweep(config: &Config, s: &Scenario, o: &Overrides, out: &mut String) -> Result<()> {
    single_tier(o, &[Tier::ClosedForm], Tier::ClosedForm)?;
    let w = &config.sweep;
    let formats = match &w.formats {
        Some(f) => f.clone(),
        None => vec![
            FormatConfig::Name("qpsk".into()),
            FormatConfig::Name("16qam".into()),
            FormatConfig::Name("64qam".into()),
            FormatConfig::Name("256qam".into()),
            FormatConfig::Kurtosis { name: "gs64qam".into(), kurtosis: -0.3403 },
            FormatConfig::Kurtosis { name: "ps64qam".into(), kurtosis: -0.1871 },
            FormatConfig::Name("gaussian".into()),
        ],
    };
    let formats = formats.iter().map(FormatConfig::build).collect::<Result<Vec<ModulationFormat>>>()?;
    let spans = match o.spans {
        Some(n) => vec![n],
        None => w.spans.clone().unwrap_or_else(|| vec![s.plan.span_count()]),
    };
    let mean_power = s.grid.total_power() / s.grid.len() as f64;
    let powers = w.power_dbm.clone().unwrap_or_else(|| vec![linear_to_db(mean_power) + 30.0]);
    let channels = w.channels.clone().unwrap_or_else(|| (0..s.grid.len()).collect());
    check_channels(&channels, &s.grid)?;
    out.push_str("# power_dbm sets the mean launch power per channel; eta columns as in estimate\n");
    out.push_str("format,excess_kurtosis,n,power_dbm,channel,f_thz,eta_gn_db,eta_corr,eta_total_db,snr_db\n");
    for format in &formats {
        let base = s.grid.map_formats(|_, _| format.clone());
        for &p in &powers {
            let grid = base.scale_power(dbm_to_watt(p) / mean_power)?;
            for &n in &spans {
                let plan = s.plan.with_span_count(n)?;
                let report = closed_form(s, &grid, &plan)?;
                for &i in &channels {
                    let c = &report.channels[i];
                    let _ = writeln!(
                        out,
                        "{},{},{n},{p},{i},{},{},{},{},{}",
                        format.name(),
                        format.excess_kurtosis(),
                        c.center_freq * 1e-12,
                        db(c.eta_gn),
                        c.eta_corr,
                        db(c.eta_total),
                        db(c.snr)
                    );
                }
            }
        }
    }
    Ok(())
}

fn identity_check(config: &Config, out: &mut String) -> Result<()> {
    let id = &config.identity;
    let pairs = id.pairs.clone().unwrap_or_else(|| vec![[1.0, 1.0], [1.0, 3.0], [1.0, 50.0]]);
    let ns = id.n.clone().unwrap_or_else(|| vec![10, 100, 1000]);
    for &[a, b] in &pairs {
        if !(a > 0.0) || b < a {
            return Err(NliError::Config(format!("identity pair (a = {a}, b = {b}) needs b ≥ a > 0")));
        }
    }
    if ns.contains(&0) {
        return Err(NliError::Config("identity.n entries must be ≥ 1".into()));
    }
    let spec = QuadratureSpec::one_dimensional();
    let jobs: Vec<([f64; 2], usize)> = pairs.iter().flat_map(|&p| ns.iter().map(move |&n| (p, n))).collect();
    let rows = jobs
        .par_iter()
        .map(|&([a, b], n)| {
            let c_n = sinc_series_energy(n, a, b, &spec)?;
            let fd = sinc_series_increment(n, a, b, &spec)?;
            let limit = appendix_identity(a, b)?;
            Ok((a, b, n, c_n, fd, limit, (fd - limit) / limit))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push_str("# c_n = integral of |sum_{m=1}^{n} sinc(m a x) e^{j m b x}|^2; finite_difference = c_{n+1} - c_n\n");
    out.push_str("a,b,n,c_n,finite_difference,closed_form,relative_error\n");
    for (a, b, n, c_n, fd, limit, rel) in &rows {
        let _ = writeln!(out, "{a},{b},{n},{c_n},{fd},{limit},{rel}");
    }
    let largest = ns.iter().max().copied().unwrap_or(0);
    for (a, b, n, .., rel) in rows.iter().filter(|r| r.2 == largest) {
        let _ = writeln!(out, "# a = {a}, b = {b}: relative error {rel:.3e} at n = {n}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn small(extra: &str) -> Config {
        Config::from_json(&format!(r#"{{"preset": "smf", "grid": {{"channels": 5 {extra}}}}}"#)).unwrap()
    }

    #[test]
    fn command_names_round_trip() {
        for c in ["estimate", "validate", "simulate", "sweep", "identity-check"] {
            assert_eq!(c.parse::<Command>().unwrap().name(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn estimate_writes_one_row_per_channel() {
        let out = run(&small(""), Command::Estimate, &Overrides { spans: Some(6), ..Default::default() }).unwrap();
        assert_eq!(out.file_name, "estimate.csv");
        let rows: Vec<&str> = out.text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "channel,f_thz,eta_gn_db,eta_corr,eta_total_db,snr_db");
        assert_eq!(rows.len(), 6);
        assert!(out.text.contains("# override spans: 6"));
        // Gaussian default: zero correction.
        assert!(rows[1..].iter().all(|r| r.split(',').nth(3) == Some("0")));
    }

    #[test]
    fn sweep_rejects_other_tiers_and_identity_rejects_b_below_a() {
        let o = Overrides { tiers: vec![Tier::Ssfm], ..Default::default() };
        assert!(run(&small(""), Command::Sweep, &o).is_err());
        let cfg = Config::from_json(r#"{"identity": {"pairs": [[3, 1]], "n": [5]}}"#).unwrap();
        assert!(matches!(run(&cfg, Command::IdentityCheck, &Overrides::default()), Err(NliError::Config(_))));
    }

    #[test]
    fn output_is_deterministic_and_atomic() {
        let cfg = Config::preset(Preset::Nzdsf);
        let a = run(&cfg, Command::Estimate, &Overrides::default()).unwrap();
        let b = run(&cfg, Command::Estimate, &Overrides::default()).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let path = write_output(dir.path(), &a).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), a.text);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
