//! Run configuration: flat `key = value` lines, `#` comments, dotted
//! section prefixes.
//!
//! ```text
//! domain.kind = annulus
//! domain.r_inner = 1
//! domain.r_outer = 2
//! domain.n1 = 32
//! domain.n2 = 32
//! physics.mu = 0.1
//! physics.t_final = 1
//! physics.initial = swirl
//! physics.initial.a = 0.5
//! physics.boundary = match_initial
//! physics.boundary.offset = 3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use vortibc::fixedpoint::PicardConfig;
use vortibc::geometry::{DomainKind, DomainSpec};
use vortibc::scenarios::{BoundaryData, InitialCondition};
use vortibc::stokes::TimeScheme;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub n1: usize,
    pub n2: usize,
    pub mu: f64,
    pub t_final: f64,
    /// `None` picks the solver default.
    pub dt: Option<f64>,
    pub initial: InitialCondition,
    pub boundary: BoundaryData,
    pub picard: PicardConfig,
    pub scheme: TimeScheme,
    /// Viscosities for `sweep`.
    pub mu_list: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Checkpoint every `stride` steps; 0 writes only the final state.
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::annulus(1.0, 2.0),
            n1: 32,
            n2: 32,
            mu: 0.1,
            t_final: 1.0,
            dt: None,
            initial: InitialCondition::Circulation { c: 1.0 },
            boundary: BoundaryData::Zero,
            picard: PicardConfig::default(),
            scheme: TimeScheme::BackwardEuler,
            mu_list: vec![1e-1, 3e-2, 1e-2],
            seed: 0,
            out_dir: PathBuf::from("out"),
            stride: 0,
        }
    }
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

/// Parsed `key = value` pairs with usage tracking so that typos surface.
struct Table {
    entries: BTreeMap<String, (usize, String)>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(CliError::Config(format!("line {}: bad key `{k}`", n + 1)));
            }
            if entries.insert(k.to_string(), (n + 1, v.trim().to_string())).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            Some(v) => v.parse().map_err(|e| bad(key, e)),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.iter().next() {
            Some((k, (line, _))) => Err(CliError::Config(format!("line {line}: unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let d = Self::default();
        let mut t = Table::parse(text)?;
        let kind_name = t.take("domain.kind").unwrap_or_else(|| d.domain.kind.name().into());
        let kind = DomainKind::parse(&kind_name).ok_or_else(|| bad("domain.kind", format!("unknown `{kind_name}`")))?;
        let domain = DomainSpec {
            kind,
            r_inner: t.num("domain.r_inner", if kind == DomainKind::Annulus { 1.0 } else { 0.0 })?,
            r_outer: t.num("domain.r_outer", if kind.is_polar() { 2.0 } else { 0.0 })?,
            length_x: t.num("domain.length_x", if kind.is_polar() { 0.0 } else { std::f64::consts::TAU })?,
            length_y: t.num("domain.length_y", if kind.is_polar() { 0.0 } else { std::f64::consts::TAU })?,
        };
        let n1 = t.num("domain.n1", d.n1)?;
        let n2 = t.num("domain.n2", d.n2)?;
        let mu = t.num("physics.mu", d.mu)?;
        let t_final = t.num("physics.t_final", d.t_final)?;
        let dt = match t.take("physics.dt") {
            None => None,
            Some(v) if v == "auto" => None,
            Some(v) => Some(v.parse::<f64>().map_err(|e| bad("physics.dt", e))?),
        };
        let initial = parse_initial(&mut t, d.initial)?;
        let boundary = parse_boundary(&mut t, d.boundary)?;
        let picard = PicardConfig {
            tol_fix: t.num("solver.tol_fix", d.picard.tol_fix)?,
            max_iter: t.num("solver.max_iter", d.picard.max_iter)?,
            contraction_window: t.num("solver.contraction_window", d.picard.contraction_window)?,
        };
        let scheme = match t.take("solver.scheme") {
            None => d.scheme,
            Some(s) => TimeScheme::parse(&s).ok_or_else(|| bad("solver.scheme", format!("unknown `{s}`")))?,
        };
        let mu_list = match t.take("sweep.mu_list") {
            None => d.mu_list,
            Some(s) => s
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| bad("sweep.mu_list", e)))
                .collect::<Result<_, _>>()?,
        };
        let seed = t.num("run.seed", d.seed)?;
        let out_dir = t.take("output.dir").map(PathBuf::from).unwrap_or(d.out_dir);
        let stride = t.num("output.stride", d.stride)?;
        t.finish()?;
        let cfg = Self {
            domain,
            n1,
            n2,
            mu,
            t_final,
            dt,
            initial,
            boundary,
            picard,
            scheme,
            mu_list,
            seed,
            out_dir,
            stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Numeric ranges. Resolution limits are left to the grid builder.
    pub fn validate(&self) -> Result<(), CliError> {
        self.domain.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.mu) {
            return Err(bad("physics.mu", "must be positive"));
        }
        if !pos(self.t_final) {
            return Err(bad("physics.t_final", "must be positive"));
        }
        if self.dt.is_some_and(|dt| !pos(dt)) {
            return Err(bad("physics.dt", "must be positive"));
        }
        if self.mu_list.iter().any(|m| !pos(*m)) {
            return Err(bad("sweep.mu_list", "viscosities must be positive"));
        }
        self.picard.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical text form; `parse(to_text())` reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("domain.kind", self.domain.kind.name().into());
        put("domain.r_inner", self.domain.r_inner.to_string());
        put("domain.r_outer", self.domain.r_outer.to_string());
        put("domain.length_x", self.domain.length_x.to_string());
        put("domain.length_y", self.domain.length_y.to_string());
        put("domain.n1", self.n1.to_string());
        put("domain.n2", self.n2.to_string());
        put("physics.mu", self.mu.to_string());
        put("physics.t_final", self.t_final.to_string());
        put("physics.dt", self.dt.map_or("auto".into(), |v| v.to_string()));
        put("physics.initial", self.initial.name().into());
        match self.initial {
            InitialCondition::Zero => {}
            InitialCondition::Circulation { c } => put("physics.initial.c", c.to_string()),
            InitialCondition::Swirl { a, b, c } => {
                put("physics.initial.a", a.to_string());
                put("physics.initial.b", b.to_string());
                put("physics.initial.c", c.to_string());
            }
            InitialCondition::TaylorGreen { amp } => put("physics.initial.amp", amp.to_string()),
        }
        put("physics.boundary", self.boundary.name().into());
        match self.boundary {
            BoundaryData::Zero => {}
            BoundaryData::Constant { value } => put("physics.boundary.value", value.to_string()),
            BoundaryData::MatchInitial { offset } => put("physics.boundary.offset", offset.to_string()),
            BoundaryData::Sine { amp, mode } => {
                put("physics.boundary.amp", amp.to_string());
                put("physics.boundary.mode", mode.to_string());
            }
            BoundaryData::Oscillating { amp, freq } => {
                put("physics.boundary.amp", amp.to_string());
                put("physics.boundary.freq", freq.to_string());
            }
        }
        put("solver.tol_fix", self.picard.tol_fix.to_string());
        put("solver.max_iter", self.picard.max_iter.to_string());
        put("solver.contraction_window", self.picard.contraction_window.to_string());
        put("solver.scheme", self.scheme.name().into());
        put("sweep.mu_list", self.mu_list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "));
        put("run.seed", self.seed.to_string());
        put("output.dir", self.out_dir.display().to_string());
        put("output.stride", self.stride.to_string());
        s
    }
}

fn parse_initial(t: &mut Table, default: InitialCondition) -> Result<InitialCondition, CliError> {
    let Some(name) = t.take("physics.initial") else {
        return Ok(default);
    };
    Ok(match name.as_str() {
        "zero" => InitialCondition::Zero,
        "circulation" => InitialCondition::Circulation { c: t.num("physics.initial.c", 1.0)? },
        "swirl" => InitialCondition::Swirl {
            a: t.num("physics.initial.a", 0.0)?,
            b: t.num("physics.initial.b", 0.0)?,
            c: t.num("physics.initial.c", 0.0)?,
        },
        "taylor_green" => InitialCondition::TaylorGreen { amp: t.num("physics.initial.amp", 1.0)? },
        other => return Err(bad("physics.initial", format!("unknown `{other}`"))),
    })
}

fn parse_boundary(t: &mut Table, default: BoundaryData) -> Result<BoundaryData, CliError> {
    let Some(name) = t.take("physics.boundary") else {
        return Ok(default);
    };
    Ok(match name.as_str() {
        "zero" => BoundaryData::Zero,
        "constant" => BoundaryData::Constant { value: t.num("physics.boundary.value", 0.0)? },
        "match_initial" => BoundaryData::MatchInitial { offset: t.num("physics.boundary.offset", 0.0)? },
        "sine" => BoundaryData::Sine {
            amp: t.num("physics.boundary.amp", 1.0)?,
            mode: t.num("physics.boundary.mode", 1)?,
        },
        "oscillating" => BoundaryData::Oscillating {
            amp: t.num("physics.boundary.amp", 1.0)?,
            freq: t.num("physics.boundary.freq", 1.0)?,
        },
        other => return Err(bad("physics.boundary", format!("unknown `{other}`"))),
    })
}
