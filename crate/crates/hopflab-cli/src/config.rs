//! Suite configuration: desk-scale defaults, plain-text configuration files
//! (one `key = value` pair per line, dotted keys), and flag overrides.
//!
//! Precedence is defaults, then the configuration file, then command-line
//! flags; later layers override earlier ones field by field. Family lines
//! accumulate, but the first family selection in a layer clears whatever the
//! previous layer chose, so a config file or flag set that names families
//! replaces the default catalog instead of appending to it.

use std::path::{Path, PathBuf};

use hopflab_core::catalog::Family;
use hopflab_core::TolerancePolicy;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown configuration key {key:?}")]
    UnknownKey { key: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: &'static str,
    },
    #[error("unknown family descriptor {descriptor:?}: {reason}")]
    UnknownFamily {
        descriptor: String,
        reason: &'static str,
    },
    #[error("family descriptor {descriptor:?} is missing parameter {parameter}")]
    MissingParameter {
        descriptor: String,
        parameter: &'static str,
    },
    #[error("flag --{flag} only applies together with a bare --family kind")]
    OrphanParameter { flag: &'static str },
    #[error("could not read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed line {line} in {path}: expected `key = value`")]
    MalformedLine { path: String, line: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(ConfigError::InvalidValue {
                key: "format".into(),
                value: other.into(),
                reason: "expected `json` or `markdown`",
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Markdown => "markdown",
        }
    }
}

/// Everything a suite run depends on. Two equal configurations produce
/// byte-identical reports.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub n: usize,
    pub p: usize,
    pub families: Vec<Family>,
    /// Sampled points per family for the residual tables.
    pub samples: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 4,
            p: 2,
            families: default_families(),
            samples: 10,
            seed: 42,
            tol: TolerancePolicy::default(),
            out: None,
            format: ReportFormat::Json,
        }
    }
}

/// The built-in catalog at desk scale: both curvature signs of the two-block
/// family, the three quadric-tube regimes, the degenerate member between
/// them, and the horosphere.
pub fn default_families() -> Vec<Family> {
    vec![
        Family::TypeA { q: 1, m: 4, t: 0.75 },
        Family::TypeA { q: 1, m: 4, t: 2.0 },
        Family::TypeB { t: 0.5 },
        Family::TypeB { t: 4.0 },
        Family::TypeB { t: 1.0f64.cosh().powi(2) },
        Family::Degenerate,
        Family::Horosphere { t: 1.0 },
    ]
}

/// Canonical display form, also the sort key for report ordering.
pub fn canonical_id(family: &Family) -> String {
    match family {
        Family::TypeA { q, m, t } => format!("type_a(q={q}, m={m}, t={t})"),
        Family::TypeB { t } => format!("type_b(t={t})"),
        Family::Degenerate => "degenerate".to_string(),
        Family::Horosphere { t } => format!("horosphere(t={t})"),
    }
}

fn parse_param<T: core::str::FromStr>(
    descriptor: &str,
    key: &'static str,
    value: &str,
) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::UnknownFamily {
        descriptor: descriptor.into(),
        reason: match key {
            "q" => "q must be a non-negative integer",
            "m" => "m must be a non-negative integer",
            _ => "t must be a real number",
        },
    })
}

/// Parses one family descriptor. Accepted forms: `all`, `degenerate`,
/// `horosphere:t=1`, `type_a:q=1,m=4,t=0.75`, `type_b:t=4`.
pub fn parse_family_descriptor(descriptor: &str) -> Result<Vec<Family>, ConfigError> {
    let trimmed = descriptor.trim();
    if trimmed == "all" {
        return Ok(default_families());
    }
    let (kind, params) = match trimmed.split_once(':') {
        Some((k, p)) => (k.trim(), p.trim()),
        None => (trimmed, ""),
    };
    let mut q: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut t: Option<f64> = None;
    for piece in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((key, value)) = piece.split_once('=') else {
            return Err(ConfigError::UnknownFamily {
                descriptor: trimmed.into(),
                reason: "parameters must look like `key=value`",
            });
        };
        match key.trim() {
            "q" => q = Some(parse_param(trimmed, "q", value)?),
            "m" => m = Some(parse_param(trimmed, "m", value)?),
            "t" => t = Some(parse_param(trimmed, "t", value)?),
            _ => {
                return Err(ConfigError::UnknownFamily {
                    descriptor: trimmed.into(),
                    reason: "only q, m, and t are family parameters",
                })
            }
        }
    }
    let missing = |parameter: &'static str| ConfigError::MissingParameter {
        descriptor: trimmed.into(),
        parameter,
    };
    match kind {
        "type_a" => Ok(vec![Family::TypeA {
            q: q.ok_or_else(|| missing("q"))?,
            m: m.ok_or_else(|| missing("m"))?,
            t: t.ok_or_else(|| missing("t"))?,
        }]),
        "type_b" => Ok(vec![Family::TypeB {
            t: t.ok_or_else(|| missing("t"))?,
        }]),
        "degenerate" => Ok(vec![Family::Degenerate]),
        "horosphere" => Ok(vec![Family::Horosphere {
            t: t.ok_or_else(|| missing("t"))?,
        }]),
        _ => Err(ConfigError::UnknownFamily {
            descriptor: trimmed.into(),
            reason: "expected all, type_a, type_b, degenerate, or horosphere",
        }),
    }
}

/// Applies one `key = value` pair. `family_replaced` tracks whether this
/// layer has already cleared the inherited family list.
pub fn apply_pair(
    cfg: &mut SuiteConfig,
    key: &str,
    value: &str,
    family_replaced: &mut bool,
) -> Result<(), ConfigError> {
    let bad = |reason: &'static str| ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason,
    };
    match key {
        "sig.n" => cfg.n = value.trim().parse().map_err(|_| bad("expected an integer"))?,
        "sig.p" => cfg.p = value.trim().parse().map_err(|_| bad("expected an integer"))?,
        "samples" => {
            cfg.samples = value.trim().parse().map_err(|_| bad("expected an integer"))?
        }
        "seed" => cfg.seed = value.trim().parse().map_err(|_| bad("expected an integer"))?,
        "out" => cfg.out = Some(PathBuf::from(value.trim())),
        "format" => cfg.format = ReportFormat::parse(value)?,
        "family" => {
            if !*family_replaced {
                cfg.families.clear();
                *family_replaced = true;
            }
            cfg.families.extend(parse_family_descriptor(value)?);
        }
        "tol.constraint_tol" => {
            cfg.tol.constraint_tol = value.trim().parse().map_err(|_| bad("expected a number"))?
        }
        "tol.eig_cluster_tol" => {
            cfg.tol.eig_cluster_tol = value.trim().parse().map_err(|_| bad("expected a number"))?
        }
        "tol.rank_tol" => {
            cfg.tol.rank_tol = value.trim().parse().map_err(|_| bad("expected a number"))?
        }
        "tol.fd_step" => {
            cfg.tol.fd_step = value.trim().parse().map_err(|_| bad("expected a number"))?
        }
        "tol.newton_tol" => {
            cfg.tol.newton_tol = value.trim().parse().map_err(|_| bad("expected a number"))?
        }
        "tol.newton_max_iter" => {
            cfg.tol.newton_max_iter =
                value.trim().parse().map_err(|_| bad("expected an integer"))?
        }
        _ => return Err(ConfigError::UnknownKey { key: key.into() }),
    }
    Ok(())
}

/// Reads a plain-text configuration file into the config. Lines are
/// `key = value`; `#` starts a comment; blank lines are skipped.
pub fn apply_config_file(cfg: &mut SuiteConfig, path: &Path) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut family_replaced = false;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::MalformedLine {
                path: path.display().to_string(),
                line: index + 1,
            });
        };
        apply_pair(cfg, key.trim(), value.trim(), &mut family_replaced)?;
    }
    Ok(())
}

/// Resolves an output path against the optional output-directory environment
/// variable: absolute paths win, relative ones are joined under
/// `HOPFLAB_OUT_DIR` when it is set.
pub fn resolve_out_path(out: &Path) -> PathBuf {
    if out.is_absolute() {
        return out.to_path_buf();
    }
    match std::env::var_os("HOPFLAB_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(out),
        _ => out.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_cover_the_catalog() {
        assert_eq!(parse_family_descriptor("all").unwrap().len(), 7);
        assert_eq!(
            parse_family_descriptor("type_a:q=1,m=4,t=0.75").unwrap(),
            vec![Family::TypeA { q: 1, m: 4, t: 0.75 }]
        );
        assert_eq!(
            parse_family_descriptor(" type_b: t=4 ").unwrap(),
            vec![Family::TypeB { t: 4.0 }]
        );
        assert_eq!(
            parse_family_descriptor("degenerate").unwrap(),
            vec![Family::Degenerate]
        );
        assert!(matches!(
            parse_family_descriptor("type_a:q=1,m=4"),
            Err(ConfigError::MissingParameter { parameter: "t", .. })
        ));
        assert!(parse_family_descriptor("cylinder").is_err());
    }

    #[test]
    fn pairs_override_fields() {
        let mut cfg = SuiteConfig::default();
        let mut replaced = false;
        apply_pair(&mut cfg, "sig.n", "5", &mut replaced).unwrap();
        apply_pair(&mut cfg, "seed", "7", &mut replaced).unwrap();
        apply_pair(&mut cfg, "tol.fd_step", "1e-4", &mut replaced).unwrap();
        apply_pair(&mut cfg, "family", "horosphere:t=1", &mut replaced).unwrap();
        apply_pair(&mut cfg, "family", "degenerate", &mut replaced).unwrap();
        assert_eq!(cfg.n, 5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol.fd_step, 1e-4);
        assert_eq!(
            cfg.families,
            vec![Family::Horosphere { t: 1.0 }, Family::Degenerate]
        );
        assert!(matches!(
            apply_pair(&mut cfg, "sig.q", "1", &mut replaced),
            Err(ConfigError::UnknownKey { .. })
        ));
    }

    #[test]
    fn canonical_ids_sort_deterministically() {
        let mut ids: Vec<String> = default_families().iter().map(canonical_id).collect();
        ids.sort();
        assert_eq!(ids[0], "degenerate");
        assert_eq!(ids[1], "horosphere(t=1)");
        assert!(ids[2].starts_with("type_a("));
        assert!(ids[6].starts_with("type_b("));
    }
}
