//! Scenario config files.
//!
//! One `key = value` per line, `#` starts a comment, `[section]` opens a
//! section. Every file names a preset with `scenario = ...` and overrides
//! parts of it:
//!
//! ```text
//! scenario = fig7-two-slit-spin
//! seed = 7
//! units = dimensionless      # or si
//! spin = on                  # on | off | both
//!
//! [model]
//! sigma0 = 1                 # length; sigma0_x / sigma0_y for products
//! light_speed = 2e5          # speed
//!
//! [two-slit]
//! separation = 20            # length
//! group_speed = 100          # speed
//!
//! [ensemble]
//! kind = rings               # rings | contour | density
//! radii = 0.4, 0.8, 1.2      # lengths (rings)
//! reference_radius = 1       # length (rings)
//! reference_count = 20       # rings
//! count = 16                 # contour, density
//! scale = 1                  # contour, in units of the packet widths
//! seed = 3                   # density
//!
//! [integrator]
//! t0 = 0                     # times
//! t1 = 12
//! stride = 0.02
//! max_step = 0.05
//! rel_tol = 1e-8
//! abs_tol = 1e-10            # length
//!
//! [boost]
//! factors = 0.8, 2, 5        # multiples of w along +x
//!
//! [si]
//! sigma0 = 2e-8              # m
//! mass = 9.1093837015e-31    # kg
//! hbar = 1.054571817e-34     # J s
//! ```
//!
//! With `units = dimensionless` lengths are in σ0, times in mσ0²/ħ and
//! speeds in ħ/mσ0. With `units = si` they are metres, seconds and m/s,
//! converted once here using the `[si]` constants (an electron with
//! σ0 = 20 nm by default).

use std::path::Path;

use spinguide::ensemble::{ContourLevel, EnsembleSpec, RingSpec};
use spinguide::guidance::GuidanceMode;
use spinguide::scenarios::{preset, ModelSpec, ScenarioConfig, UnitSystem, ELECTRON_MASS_SI, HBAR_SI, SI_SIGMA0};
use spinguide::Vec2;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    None,
    Length,
    Time,
    Speed,
    /// SI constants, never rescaled.
    Raw,
}

const KEYS: &[(&str, &str, Unit)] = &[
    ("", "scenario", Unit::None),
    ("", "seed", Unit::None),
    ("", "units", Unit::None),
    ("", "spin", Unit::None),
    ("model", "sigma0", Unit::Length),
    ("model", "sigma0_x", Unit::Length),
    ("model", "sigma0_y", Unit::Length),
    ("model", "light_speed", Unit::Speed),
    ("two-slit", "separation", Unit::Length),
    ("two-slit", "group_speed", Unit::Speed),
    ("ensemble", "kind", Unit::None),
    ("ensemble", "radii", Unit::Length),
    ("ensemble", "reference_radius", Unit::Length),
    ("ensemble", "reference_count", Unit::None),
    ("ensemble", "count", Unit::None),
    ("ensemble", "scale", Unit::None),
    ("ensemble", "seed", Unit::None),
    ("integrator", "t0", Unit::Time),
    ("integrator", "t1", Unit::Time),
    ("integrator", "stride", Unit::Time),
    ("integrator", "max_step", Unit::Time),
    ("integrator", "rel_tol", Unit::None),
    ("integrator", "abs_tol", Unit::Length),
    ("boost", "factors", Unit::None),
    ("si", "sigma0", Unit::Raw),
    ("si", "mass", Unit::Raw),
    ("si", "hbar", Unit::Raw),
];

#[derive(Debug, Clone)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
    unit: Unit,
}

impl Entry {
    fn name(&self) -> String {
        if self.section.is_empty() {
            self.key.clone()
        } else {
            format!("{}.{}", self.section, self.key)
        }
    }

    fn numbers(&self) -> Result<Vec<f64>, ConfigError> {
        self.value
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| ConfigError::Parse {
                    line: self.line,
                    message: format!("`{}` expects a number, got `{}`", self.key, v.trim()),
                })
            })
            .collect()
    }

    fn number(&self) -> Result<f64, ConfigError> {
        match self.numbers()?.as_slice() {
            [v] => Ok(*v),
            _ => Err(ConfigError::Parse {
                line: self.line,
                message: format!("`{}` expects a single number", self.key),
            }),
        }
    }

    fn integer(&self) -> Result<u64, ConfigError> {
        self.value.parse::<u64>().map_err(|_| ConfigError::Parse {
            line: self.line,
            message: format!("`{}` expects a non-negative integer, got `{}`", self.key, self.value),
        })
    }
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = String::new();
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            let name = name.trim();
            if !KEYS.iter().any(|(s, _, _)| *s == name) || name.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown section `[{name}]`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(&(_, _, unit)) = KEYS.iter().find(|(s, k, _)| *s == section && *k == key) else {
            let place = if section.is_empty() {
                "at top level".to_string()
            } else {
                format!("in [{section}]")
            };
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key `{key}` {place}"),
            });
        };
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if entries.iter().any(|e| e.section == section && e.key == key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        entries.push(Entry {
            section: section.clone(),
            key: key.to_string(),
            value: value.to_string(),
            line,
            unit,
        });
    }
    Ok(entries)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let entries = tokenize(text)?;
    let get = |section: &str, key: &str| entries.iter().find(|e| e.section == section && e.key == key);

    let scenario = get("", "scenario").ok_or_else(|| invalid("scenario", "a preset name is required"))?;
    let mut cfg =
        preset(&scenario.value).ok_or_else(|| invalid("scenario", format!("unknown preset `{}`", scenario.value)))?;

    let units = match get("", "units").map(|e| e.value.as_str()) {
        None | Some("dimensionless") => {
            if let Some(e) = entries.iter().find(|e| e.section == "si") {
                return Err(invalid(&e.name(), "[si] constants require `units = si`"));
            }
            UnitSystem::Dimensionless
        }
        Some("si") => {
            let constant = |key: &str, default: f64| -> Result<f64, ConfigError> {
                match get("si", key) {
                    Some(e) => {
                        let v = e.number()?;
                        if v.is_finite() && v > 0.0 {
                            Ok(v)
                        } else {
                            Err(invalid(&e.name(), "must be positive"))
                        }
                    }
                    None => Ok(default),
                }
            };
            UnitSystem::Si {
                sigma0: constant("sigma0", SI_SIGMA0)?,
                mass: constant("mass", ELECTRON_MASS_SI)?,
                hbar: constant("hbar", HBAR_SI)?,
            }
        }
        Some(other) => {
            return Err(invalid(
                "units",
                format!("expected `dimensionless` or `si`, got `{other}`"),
            ))
        }
    };
    if let UnitSystem::Si { .. } = units {
        cfg.units = units;
        cfg.c_ratio = spinguide::scenarios::LIGHT_SPEED_SI / units.speed();
        if let ModelSpec::TwoSlit { group_velocity, .. } = &mut cfg.model {
            if group_velocity.norm() > 0.0 {
                *group_velocity = group_velocity.normalize() * (spinguide::scenarios::SI_GROUP_SPEED / units.speed());
            }
        }
    }
    let scale = |e: &Entry, v: f64| match e.unit {
        Unit::Length => v / units.length(),
        Unit::Time => v / units.time(),
        Unit::Speed => v / units.speed(),
        Unit::None | Unit::Raw => v,
    };
    let positive = |e: &Entry| -> Result<f64, ConfigError> {
        let v = e.number()?;
        if v.is_finite() && v > 0.0 {
            Ok(scale(e, v))
        } else {
            Err(invalid(&e.key, format!("must be positive, got {v}")))
        }
    };

    for e in entries.iter().filter(|e| e.section == "model") {
        match (e.key.as_str(), &mut cfg.model) {
            ("light_speed", _) => cfg.c_ratio = positive(e)?,
            ("sigma0", ModelSpec::Gaussian { sigma0 }) | ("sigma0", ModelSpec::TwoSlit { sigma0, .. }) => {
                *sigma0 = positive(e)?
            }
            ("sigma0_x", ModelSpec::Product { sigma0_x, .. }) => *sigma0_x = positive(e)?,
            ("sigma0_y", ModelSpec::Product { sigma0_y, .. }) => *sigma0_y = positive(e)?,
            (key, _) => return Err(invalid(key, format!("not applicable to preset `{}`", cfg.name))),
        }
    }

    for e in entries.iter().filter(|e| e.section == "two-slit") {
        let ModelSpec::TwoSlit {
            separation,
            group_velocity,
            ..
        } = &mut cfg.model
        else {
            return Err(invalid(
                &e.key,
                format!("preset `{}` is not a two-packet model", cfg.name),
            ));
        };
        match e.key.as_str() {
            "separation" => *separation = positive(e)?,
            "group_speed" => {
                let v = e.number()?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(&e.key, format!("must be non-negative, got {v}")));
                }
                *group_velocity = Vec2::new(scale(e, v), 0.0);
            }
            _ => unreachable!("key table"),
        }
    }

    apply_ensemble(&mut cfg, &entries, &scale)?;

    for e in entries.iter().filter(|e| e.section == "integrator") {
        let v = e.number()?;
        let v = scale(e, v);
        let ic = &mut cfg.integrator;
        match e.key.as_str() {
            "t0" => ic.t0 = v,
            "t1" => ic.t1 = v,
            "stride" => ic.stride = v,
            "max_step" => ic.max_step = v,
            "rel_tol" => ic.rel_tol = v,
            "abs_tol" => ic.abs_tol = v,
            _ => unreachable!("key table"),
        }
    }

    if let Some(e) = get("boost", "factors") {
        cfg.boosts = e.numbers()?;
    }

    if let Some(e) = get("", "spin") {
        cfg.modes = match e.value.as_str() {
            "on" => vec![GuidanceMode::SPIN_ON],
            "off" => vec![GuidanceMode::SPIN_OFF],
            "both" => vec![GuidanceMode::SPIN_OFF, GuidanceMode::SPIN_ON],
            other => return Err(invalid("spin", format!("expected on, off or both, got `{other}`"))),
        };
    }
    if let Some(e) = get("", "seed") {
        cfg = cfg.with_seed(e.integer()?);
    }

    cfg.validate().map_err(|err| match err {
        spinguide::Error::Validation { field, reason } => invalid(&field, reason),
        other => invalid("scenario", other.to_string()),
    })?;
    Ok(cfg)
}

fn apply_ensemble(
    cfg: &mut ScenarioConfig,
    entries: &[Entry],
    scale: &dyn Fn(&Entry, f64) -> f64,
) -> Result<(), ConfigError> {
    let section: Vec<&Entry> = entries.iter().filter(|e| e.section == "ensemble").collect();
    if let Some(kind) = section.iter().find(|e| e.key == "kind") {
        let current = match cfg.ensemble {
            EnsembleSpec::CanonicalRings { .. } => "rings",
            EnsembleSpec::UniformContour { .. } => "contour",
            EnsembleSpec::DensitySample { .. } => "density",
        };
        if kind.value != current {
            cfg.ensemble = match kind.value.as_str() {
                "rings" => EnsembleSpec::CanonicalRings {
                    rings: RingSpec::two_slit_default(1.0),
                    centers: vec![],
                },
                "contour" => EnsembleSpec::UniformContour {
                    level: ContourLevel::Scale(1.0),
                    count: 16,
                },
                "density" => EnsembleSpec::DensitySample {
                    count: 1000,
                    seed: cfg.seed,
                },
                other => {
                    return Err(invalid(
                        "kind",
                        format!("expected rings, contour or density, got `{other}`"),
                    ))
                }
            };
        }
    }
    for e in section.into_iter().filter(|e| e.key != "kind") {
        let mismatch = || invalid(&e.key, "not applicable to this ensemble kind");
        match (&mut cfg.ensemble, e.key.as_str()) {
            (EnsembleSpec::CanonicalRings { rings, .. }, "radii") => {
                rings.radii = e.numbers()?.into_iter().map(|v| scale(e, v)).collect();
            }
            (EnsembleSpec::CanonicalRings { rings, .. }, "reference_radius") => {
                rings.reference_radius = scale(e, e.number()?);
            }
            (EnsembleSpec::CanonicalRings { rings, .. }, "reference_count") => {
                rings.reference_count = e.integer()? as usize;
            }
            (EnsembleSpec::UniformContour { count, .. }, "count")
            | (EnsembleSpec::DensitySample { count, .. }, "count") => *count = e.integer()? as usize,
            (EnsembleSpec::UniformContour { level, .. }, "scale") => {
                let v = e.number()?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid("scale", format!("must be positive, got {v}")));
                }
                *level = ContourLevel::Scale(v);
            }
            (EnsembleSpec::DensitySample { seed, .. }, "seed") => *seed = e.integer()?,
            _ => return Err(mismatch()),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_the_preset() {
        let c = parse_config_str("scenario = fig2-catherine-wheel\n").unwrap();
        assert_eq!(c, preset("fig2-catherine-wheel").unwrap());
    }

    #[test]
    fn two_slit_separation() {
        let c = parse_config_str("scenario = fig7-two-slit-spin\n[two-slit]\nseparation = 20 # 2a\n").unwrap();
        assert!(matches!(c.model, ModelSpec::TwoSlit { separation, .. } if separation == 20.0));
        let err = parse_config_str("scenario = fig7-two-slit-spin\n[two-slit]\nseparation = -1\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Validation { ref key, .. } if key == "separation"),
            "{err}"
        );
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config_str("scenario = fig2-catherine-wheel\n\n[model]\nwidth = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 4, .. }), "{err}");
        let err = parse_config_str("scenario = fig2-catherine-wheel\n[nope]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config_str("scenario = fig2-catherine-wheel\nseed = x\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config_str("scenario fig2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn missing_or_unknown_scenario() {
        assert!(matches!(
            parse_config_str("seed = 1\n"),
            Err(ConfigError::Validation { .. })
        ));
        assert!(matches!(
            parse_config_str("scenario = fig9\n"),
            Err(ConfigError::Validation { .. })
        ));
    }

    #[test]
    fn si_values_are_converted() {
        let text = "scenario = fig8-speed-ratio\nunits = si\n[integrator]\nt1 = 1e-12\n";
        let c = parse_config_str(text).unwrap();
        let u = UnitSystem::electron();
        assert_eq!(c.units, u);
        assert!((c.integrator.t1 * u.time() - 1e-12).abs() < 1e-24);
        let ModelSpec::TwoSlit { group_velocity, .. } = c.model else {
            panic!()
        };
        assert!((group_velocity.x * u.speed() - 1e8).abs() < 1e-3);
        assert!(parse_config_str("scenario = fig2-catherine-wheel\n[si]\nmass = 1\n").is_err());
    }

    #[test]
    fn overrides() {
        let text = "scenario = fig5-superposition\nspin = on\nseed = 4\n[ensemble]\nkind = density\ncount = 50\n[boost]\nfactors = 1, 2\n";
        let c = parse_config_str(text).unwrap();
        assert_eq!(c.modes, vec![GuidanceMode::SPIN_ON]);
        assert_eq!(c.ensemble, EnsembleSpec::DensitySample { count: 50, seed: 4 });
        assert_eq!(c.boosts, vec![1.0, 2.0]);
        let err = parse_config_str("scenario = fig2-catherine-wheel\n[ensemble]\nradii = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "radii"));
        let err = parse_config_str("scenario = fig2-catherine-wheel\n[integrator]\nt1 = -1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "t1"));
    }
}
