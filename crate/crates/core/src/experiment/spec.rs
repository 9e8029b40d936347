use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use crate::drx::{DrxConfig, Policy};
use crate::error::{Error, Result};
use crate::traffic::RateSchedule;

/// Arrival process of an experiment, before any trace file is read.
#[derive(Debug, Clone, PartialEq)]
pub enum TrafficSpec {
    Poisson { rates: Vec<f64> },
    Pareto { rates: Vec<f64>, shape: f64 },
    /// Rows are reported per segment, skipping the first `skip` ms of each,
    /// plus one row for the whole run.
    Schedule { schedule: RateSchedule, skip: f64 },
    Trace { path: PathBuf },
}

/// A parsed and validated experiment file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub cfg: DrxConfig,
    pub horizon: f64,
    pub psf: f64,
    pub seeds: Vec<u64>,
    pub level: f64,
    pub traffic: TrafficSpec,
    pub policies: Vec<Policy>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Read and parse `path`. Relative trace and output paths are resolved
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut spec = parse_spec(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let TrafficSpec::Trace { path } = &mut spec.traffic {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(out) = &mut spec.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(spec)
    }

    /// Sweep rates; a single nominal entry for schedules and traces.
    pub fn rates(&self) -> Vec<Option<f64>> {
        match &self.traffic {
            TrafficSpec::Poisson { rates } | TrafficSpec::Pareto { rates, .. } => {
                rates.iter().map(|&r| Some(r)).collect()
            }
            TrafficSpec::Schedule { .. } | TrafficSpec::Trace { .. } => vec![None],
        }
    }

    /// Grid points in emission order: rate-major, then policy.
    pub fn grid(&self) -> Vec<(Option<f64>, Policy)> {
        self.rates()
            .into_iter()
            .flat_map(|r| self.policies.iter().map(move |p| (r, *p)))
            .collect()
    }

    /// Use seeds `1..=n` instead of the file's list.
    pub fn override_seeds(&mut self, n: u64) -> Result<()> {
        if n < 2 {
            return Err(Error::Validation(format!("need at least 2 seeds, got {n}")));
        }
        self.seeds = (1..=n).collect();
        Ok(())
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("experiment", &["name", "seeds", "horizon", "psf", "level", "output"]),
    ("drx", &["t_in", "t_on", "t_short", "t_long", "n_short"]),
    ("traffic", &["kind", "rate", "shape", "schedule", "skip", "file"]),
    ("policy", &["kinds", "q_w", "w_star", "w_max_ratio"]),
];

struct Entry {
    value: String,
    line: usize,
}

struct Doc {
    entries: HashMap<(String, String), Entry>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl Doc {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                match SECTIONS.iter().find(|(s, _)| *s == name) {
                    Some((s, _)) => section = Some(s),
                    None => return Err(perr(line, format!("unknown section [{name}]"))),
                }
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(perr(line, format!("expected `key = value`, got `{content}`")));
            };
            let key = key.trim();
            let Some(sec) = section else {
                return Err(perr(line, format!("key `{key}` appears before any section")));
            };
            let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(perr(line, format!("unknown key `{key}` in [{sec}]")));
            }
            let slot = (sec.to_string(), key.to_string());
            if entries.contains_key(&slot) {
                return Err(perr(line, format!("duplicate key `{key}` in [{sec}]")));
            }
            entries.insert(slot, Entry { value: value.trim().to_string(), line });
        }
        Ok(Self { entries })
    }

    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn require(&self, sec: &str, key: &str) -> Result<&Entry> {
        self.get(sec, key)
            .ok_or_else(|| perr(0, format!("missing required key `{key}` in [{sec}]")))
    }

    fn f64_or(&self, sec: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(sec, key) {
            Some(e) => parse_f64(key, e),
            None => Ok(default),
        }
    }
}

fn parse_f64(key: &str, e: &Entry) -> Result<f64> {
    scalar(key, e.line, &e.value)
}

fn scalar(key: &str, line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| perr(line, format!("`{key}`: expected a number, got `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(perr(line, format!("`{key}`: value must be finite")));
    }
    Ok(v)
}

/// Comma-separated numbers; an item `a:b:step` expands to an inclusive range.
fn parse_f64_list(key: &str, e: &Entry) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [one] => out.push(scalar(key, e.line, one)?),
            [a, b, step] => {
                let (a, b, step) = (scalar(key, e.line, a)?, scalar(key, e.line, b)?, scalar(key, e.line, step)?);
                if !(step > 0.0) || b < a {
                    return Err(perr(e.line, format!("`{key}`: bad range `{item}`")));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                // rounding keeps 0.1:0.9:0.1 printing as 0.3, not 0.30000000000000004
                out.extend((0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9));
            }
            _ => return Err(perr(e.line, format!("`{key}`: cannot parse `{item}`"))),
        }
    }
    if out.is_empty() {
        return Err(perr(e.line, format!("`{key}`: empty list")));
    }
    Ok(out)
}

/// Comma-separated integers; an item `a..b` expands to an inclusive range.
fn parse_u64_list(key: &str, e: &Entry) -> Result<Vec<u64>> {
    let int = |s: &str| -> Result<u64> {
        s.trim()
            .parse()
            .map_err(|_| perr(e.line, format!("`{key}`: expected an integer, got `{}`", s.trim())))
    };
    let mut out = Vec::new();
    for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b)?);
                if b < a {
                    return Err(perr(e.line, format!("`{key}`: bad range `{item}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(int(item)?),
        }
    }
    Ok(out)
}

fn positive(key: &str, line: usize, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(perr(line, format!("`{key}` must be positive, got {v}")))
    }
}

/// Parse an experiment document. See the `experiments/` directory for the
/// format; unknown sections and keys are rejected.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let doc = Doc::parse(text)?;

    let name = doc.get("experiment", "name").map(|e| e.value.clone()).unwrap_or_else(|| "experiment".into());
    let seeds = match doc.get("experiment", "seeds") {
        Some(e) => {
            let seeds = parse_u64_list("seeds", e)?;
            let mut seen = HashSet::new();
            if let Some(dup) = seeds.iter().find(|s| !seen.insert(**s)) {
                return Err(perr(e.line, format!("`seeds`: seed {dup} listed twice")));
            }
            if seeds.len() < 2 {
                return Err(perr(e.line, "`seeds`: need at least 2 seeds"));
            }
            seeds
        }
        None => (1..=10).collect(),
    };
    let psf = doc.f64_or("experiment", "psf", 1.0)?;
    positive("psf", doc.get("experiment", "psf").map_or(0, |e| e.line), psf)?;
    let level = doc.f64_or("experiment", "level", 0.95)?;
    if !(level > 0.0 && level < 1.0) {
        let line = doc.get("experiment", "level").map_or(0, |e| e.line);
        return Err(perr(line, format!("`level` must be in (0, 1), got {level}")));
    }
    let output = doc.get("experiment", "output").map(|e| PathBuf::from(&e.value));

    let d = DrxConfig::reference();
    let n_short = match doc.get("drx", "n_short") {
        Some(e) => e
            .value
            .parse()
            .map_err(|_| perr(e.line, format!("`n_short`: expected an integer, got `{}`", e.value)))?,
        None => d.n_short,
    };
    let cfg = DrxConfig {
        t_in: doc.f64_or("drx", "t_in", d.t_in)?,
        t_on: doc.f64_or("drx", "t_on", d.t_on)?,
        t_short: doc.f64_or("drx", "t_short", d.t_short)?,
        t_long: doc.f64_or("drx", "t_long", d.t_long)?,
        n_short,
    };
    if let Err(err) = cfg.validate() {
        let line = ["t_in", "t_on", "t_short", "t_long", "n_short"]
            .iter()
            .filter_map(|k| doc.get("drx", k).map(|e| e.line))
            .min()
            .unwrap_or(0);
        return Err(perr(line, format!("[drx]: {err}")));
    }

    let kind = doc.get("traffic", "kind").map(|e| e.value.as_str()).unwrap_or("poisson");
    let kind_line = doc.get("traffic", "kind").map_or(0, |e| e.line);
    let rates = || -> Result<Vec<f64>> {
        let e = doc.require("traffic", "rate")?;
        let rates = parse_f64_list("rate", e)?;
        for &r in &rates {
            positive("rate", e.line, r)?;
        }
        Ok(rates)
    };
    let traffic = match kind {
        "poisson" => TrafficSpec::Poisson { rates: rates()? },
        "pareto" => {
            let shape = doc.f64_or("traffic", "shape", 1.5)?;
            if !(shape > 1.0) {
                let line = doc.get("traffic", "shape").map_or(0, |e| e.line);
                return Err(perr(line, format!("`shape` must exceed 1, got {shape}")));
            }
            TrafficSpec::Pareto { rates: rates()?, shape }
        }
        "schedule" => {
            let e = doc.require("traffic", "schedule")?;
            let mut segments = Vec::new();
            for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (dur, rate) = item
                    .split_once(':')
                    .ok_or_else(|| perr(e.line, format!("`schedule`: expected `duration:rate`, got `{item}`")))?;
                segments.push((scalar("schedule", e.line, dur)?, scalar("schedule", e.line, rate)?));
            }
            let schedule = RateSchedule::new(segments).map_err(|err| perr(e.line, format!("`schedule`: {err}")))?;
            let skip = doc.f64_or("traffic", "skip", 0.0)?;
            if skip < 0.0 || schedule.segments().iter().any(|&(d, _)| skip >= d) {
                let line = doc.get("traffic", "skip").map_or(0, |e| e.line);
                return Err(perr(line, "`skip` must be >= 0 and shorter than every segment"));
            }
            TrafficSpec::Schedule { schedule, skip }
        }
        "trace" => TrafficSpec::Trace { path: PathBuf::from(&doc.require("traffic", "file")?.value) },
        other => return Err(perr(kind_line, format!("`kind`: unknown traffic kind `{other}`"))),
    };
    for key in ["shape", "schedule", "skip", "file", "rate"] {
        let used = match (&traffic, key) {
            (TrafficSpec::Poisson { .. }, "rate") => true,
            (TrafficSpec::Pareto { .. }, "rate" | "shape") => true,
            (TrafficSpec::Schedule { .. }, "schedule" | "skip") => true,
            (TrafficSpec::Trace { .. }, "file") => true,
            _ => false,
        };
        if let (false, Some(e)) = (used, doc.get("traffic", key)) {
            return Err(perr(e.line, format!("`{key}` does not apply to {kind} traffic")));
        }
    }

    let horizon = match (doc.get("experiment", "horizon"), &traffic) {
        (Some(e), _) => positive("horizon", e.line, parse_f64("horizon", e)?)?,
        (None, TrafficSpec::Schedule { schedule, .. }) => schedule.total_duration(),
        (None, _) => 100_000.0,
    };

    let kinds_entry = doc.require("policy", "kinds")?;
    let ratio = doc.f64_or("policy", "w_max_ratio", 2.0)?;
    let mut policies = Vec::new();
    for k in kinds_entry.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match k {
            "standard" => policies.push(Policy::Standard),
            "fixed" => {
                let e = doc.require("policy", "q_w")?;
                for q in parse_f64_list("q_w", e)? {
                    policies.push(Policy::fixed(q).map_err(|err| perr(e.line, format!("`q_w`: {err}")))?);
                }
            }
            "adaptive" => {
                let e = doc.require("policy", "w_star")?;
                for w in parse_f64_list("w_star", e)? {
                    let p = Policy::adaptive(w, ratio * w).map_err(|err| perr(e.line, format!("`w_star`: {err}")))?;
                    policies.push(p);
                }
            }
            other => return Err(perr(kinds_entry.line, format!("`kinds`: unknown policy `{other}`"))),
        }
    }
    if policies.is_empty() {
        return Err(perr(kinds_entry.line, "`kinds`: empty policy set"));
    }

    Ok(ExperimentSpec { name, cfg, horizon, psf, seeds, level, traffic, policies, output })
}
