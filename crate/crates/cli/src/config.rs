//! Experiment configuration: one flat record per run, fully serializable to
//! and from a `key=value` text file so any report can be reproduced from its
//! config alone.

use congamma_core::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CommandKind {
    Identity,
    Primes,
    Doubles,
    Goldbach,
    Cramer,
    Sieve,
    PropStep,
    PropGreen,
    PropSpectrum,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Identity => "identity",
            CommandKind::Primes => "primes",
            CommandKind::Doubles => "doubles",
            CommandKind::Goldbach => "goldbach",
            CommandKind::Cramer => "cramer",
            CommandKind::Sieve => "sieve",
            CommandKind::PropStep => "prop-step",
            CommandKind::PropGreen => "prop-green",
            CommandKind::PropSpectrum => "prop-spectrum",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => CommandKind::Identity,
            "primes" => CommandKind::Primes,
            "doubles" => CommandKind::Doubles,
            "goldbach" => CommandKind::Goldbach,
            "cramer" => CommandKind::Cramer,
            "sieve" => CommandKind::Sieve,
            "prop-step" => CommandKind::PropStep,
            "prop-green" => CommandKind::PropGreen,
            "prop-spectrum" => CommandKind::PropSpectrum,
            other => {
                return Err(Error::parse("command", format!("unknown command {other:?}")));
            }
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::parse("format", format!("unknown format {other:?}"))),
        }
    }
}

/// Complete description of one run. Scalar fields carry their defaults;
/// optional fields are command-specific inputs.
#[derive(Clone, PartialEq, Debug)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    /// Grid spec: single value, comma list, or `start:stop:scale[:n]`.
    pub x: Option<String>,
    pub i: u32,
    pub digits: u32,
    pub max_terms: usize,
    pub tail_tol: f64,
    pub mode: Option<String>,
    pub format: ReportFormat,
    pub threads: usize,
    pub cache_path: Option<String>,
    pub compare: Option<String>,
    pub energy: Option<f64>,
    pub v0: Option<f64>,
    /// Inline piecewise potential (`;`-separated lines) or `@file`.
    pub potential: Option<String>,
    pub xa: Option<f64>,
    pub xb: Option<f64>,
    pub depth: u32,
    pub length: Option<f64>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub spec_tol: f64,
}

impl ExperimentConfig {
    pub fn defaults(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            x: None,
            i: 1,
            digits: 50,
            max_terms: 1_000_000,
            tail_tol: 1e-12,
            mode: None,
            format: ReportFormat::Csv,
            threads: 0,
            cache_path: None,
            compare: None,
            energy: None,
            v0: None,
            potential: None,
            xa: None,
            xb: None,
            depth: 40,
            length: None,
            e_min: None,
            e_max: None,
            spec_tol: 1e-10,
        }
    }

    /// Serialize as `key=value` lines. Optional fields that are unset are
    /// omitted; everything else is written explicitly so the file alone
    /// reproduces the run.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        put("command", self.command.name().to_string());
        if let Some(x) = &self.x {
            put("x", x.clone());
        }
        put("i", self.i.to_string());
        put("digits", self.digits.to_string());
        put("max_terms", self.max_terms.to_string());
        put("tail_tol", self.tail_tol.to_string());
        if let Some(m) = &self.mode {
            put("mode", m.clone());
        }
        put("format", self.format.name().to_string());
        put("threads", self.threads.to_string());
        if let Some(p) = &self.cache_path {
            put("cache_path", p.clone());
        }
        if let Some(c) = &self.compare {
            put("compare", c.clone());
        }
        if let Some(v) = self.energy {
            put("energy", v.to_string());
        }
        if let Some(v) = self.v0 {
            put("v0", v.to_string());
        }
        if let Some(p) = &self.potential {
            put("potential", p.clone());
        }
        if let Some(v) = self.xa {
            put("xa", v.to_string());
        }
        if let Some(v) = self.xb {
            put("xb", v.to_string());
        }
        put("depth", self.depth.to_string());
        if let Some(v) = self.length {
            put("length", v.to_string());
        }
        if let Some(v) = self.e_min {
            put("e_min", v.to_string());
        }
        if let Some(v) = self.e_max {
            put("e_max", v.to_string());
        }
        put("spec_tol", self.spec_tol.to_string());
        out
    }

    /// Parse a `key=value` file body. Blank lines are skipped and `#` starts
    /// a comment. The `command` key must be present.
    pub fn parse_key_values(text: &str) -> Result<Self> {
        let mut command = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse("config", format!("line {}: expected key=value", idx + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "command" {
                command = Some(CommandKind::parse(value)?);
            } else {
                pairs.push((idx + 1, key.to_string(), value.to_string()));
            }
        }
        let command = command
            .ok_or_else(|| Error::parse("config", "missing `command` key".to_string()))?;
        let mut cfg = ExperimentConfig::defaults(command);
        for (lineno, key, value) in pairs {
            cfg.set_key(&key, &value)
                .map_err(|e| Error::parse("config", format!("line {lineno}: {e}")))?;
        }
        Ok(cfg)
    }

    /// Apply one `key=value` assignment. Used by both the config-file parser
    /// and the round-trip tests.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| Error::parse(key, format!("bad value {value:?}: {e}")))
        }
        match key {
            "x" => self.x = Some(value.to_string()),
            "i" => self.i = num::<u32>("i", value)?,
            "digits" => self.digits = num::<u32>("digits", value)?,
            "max_terms" => self.max_terms = num::<usize>("max_terms", value)?,
            "tail_tol" => self.tail_tol = num::<f64>("tail_tol", value)?,
            "mode" => self.mode = Some(value.to_string()),
            "format" => self.format = ReportFormat::parse(value)?,
            "threads" => self.threads = num::<usize>("threads", value)?,
            "cache_path" => self.cache_path = Some(value.to_string()),
            "compare" => self.compare = Some(value.to_string()),
            "energy" => self.energy = Some(num::<f64>("energy", value)?),
            "v0" => self.v0 = Some(num::<f64>("v0", value)?),
            "potential" => self.potential = Some(value.to_string()),
            "xa" => self.xa = Some(num::<f64>("xa", value)?),
            "xb" => self.xb = Some(num::<f64>("xb", value)?),
            "depth" => self.depth = num::<u32>("depth", value)?,
            "length" => self.length = Some(num::<f64>("length", value)?),
            "e_min" => self.e_min = Some(num::<f64>("e_min", value)?),
            "e_max" => self.e_max = Some(num::<f64>("e_max", value)?),
            "spec_tol" => self.spec_tol = num::<f64>("spec_tol", value)?,
            other => {
                return Err(Error::parse("config", format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }
}
