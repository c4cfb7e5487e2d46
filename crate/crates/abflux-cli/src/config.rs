//! Strict sectioned key-value experiment configs.
//!
//! The format is deliberately flat and schema-checked: `[section]`
//! headers, `key = value` lines, `#` comment lines, nothing else. Every
//! key a config mentions must exist in the experiment's schema and no
//! key may repeat, so a typo aborts the run before any computation
//! starts instead of silently falling back to a default. Parse and
//! validation errors carry the line and column they point at.

use std::collections::BTreeSet;
use std::fmt;

use abflux::em_fields::GaugeSpec;
use abflux::expr::ChiField;
use abflux::geom::Vec2;

/// Parse or validation failure, pinned to a config location.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    value: String,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone)]
struct RawSection {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

/// A parsed config, structure checked but not yet schema checked.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: Vec<RawSection>,
}

/// Parses the sectioned key-value text. Structural rules only; schema
/// checking happens in [`RawConfig::resolve`].
pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end();
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::new(lineno, indent + 1, "unterminated section header"));
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::new(lineno, indent + 2, "empty section name"));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::new(
                    lineno,
                    indent + 2,
                    format!("section [{name}] appears twice"),
                ));
            }
            sections.push(RawSection { name: name.to_string(), line: lineno, entries: Vec::new() });
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(ConfigError::new(lineno, indent + 1, "expected `key = value` or `[section]`"));
        };
        let key = trimmed[..eq].trim();
        let value = trimmed[eq + 1..].trim();
        if key.is_empty() {
            return Err(ConfigError::new(lineno, indent + 1, "missing key before `=`"));
        }
        if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::new(
                lineno,
                indent + 1,
                format!("key `{key}` may only contain letters, digits and `_`"),
            ));
        }
        let Some(section) = sections.last_mut() else {
            return Err(ConfigError::new(lineno, indent + 1, "key outside of any [section]"));
        };
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::new(
                lineno,
                indent + 1,
                format!("key `{key}` appears twice in section [{}]", section.name),
            ));
        }
        section.entries.push(RawEntry {
            key: key.to_string(),
            value: value.to_string(),
            line: lineno,
            column: indent + 1,
        });
    }
    Ok(RawConfig { sections })
}

/// One schema slot: a key the experiment understands, its default, and
/// the template comment documenting it (units included).
#[derive(Debug, Clone, Copy)]
pub struct SchemaKey {
    pub section: &'static str,
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

/// A config resolved against a schema: every schema key has a value
/// (explicit or default) and nothing outside the schema survived.
#[derive(Debug, Clone)]
pub struct Resolved {
    values: Vec<ResolvedKey>,
}

#[derive(Debug, Clone)]
struct ResolvedKey {
    section: &'static str,
    key: &'static str,
    value: String,
    /// Source location when the config set the value explicitly.
    at: Option<(usize, usize)>,
}

impl RawConfig {
    /// Checks the config against a schema and fills in defaults. Any
    /// section or key the schema does not list is an error — strictness
    /// is the whole point, a misspelled tolerance must not silently run
    /// with the default.
    pub fn resolve(&self, schema: &[SchemaKey]) -> Result<Resolved, ConfigError> {
        let known_sections: BTreeSet<&str> = schema.iter().map(|s| s.section).collect();
        for section in &self.sections {
            if !known_sections.contains(section.name.as_str()) {
                return Err(ConfigError::new(
                    section.line,
                    2,
                    format!("unknown section [{}] for this experiment", section.name),
                ));
            }
            for entry in &section.entries {
                if !schema.iter().any(|s| s.section == section.name && s.key == entry.key) {
                    return Err(ConfigError::new(
                        entry.line,
                        entry.column,
                        format!("unknown key `{}` in section [{}]", entry.key, section.name),
                    ));
                }
            }
        }
        let values = schema
            .iter()
            .map(|slot| {
                let found = self
                    .sections
                    .iter()
                    .find(|s| s.name == slot.section)
                    .and_then(|s| s.entries.iter().find(|e| e.key == slot.key));
                ResolvedKey {
                    section: slot.section,
                    key: slot.key,
                    value: found.map_or_else(|| slot.default.to_string(), |e| e.value.clone()),
                    at: found.map(|e| (e.line, e.column)),
                }
            })
            .collect();
        Ok(Resolved { values })
    }

    /// The `[experiment] name` value and its location, needed before any
    /// schema is known.
    pub fn experiment_name(&self) -> Result<(&str, usize, usize), ConfigError> {
        let section = self
            .sections
            .iter()
            .find(|s| s.name == "experiment")
            .ok_or_else(|| ConfigError::new(1, 1, "missing [experiment] section"))?;
        let entry = section
            .entries
            .iter()
            .find(|e| e.key == "name")
            .ok_or_else(|| ConfigError::new(section.line, 1, "missing `name` in [experiment]"))?;
        Ok((&entry.value, entry.line, entry.column))
    }
}

impl Resolved {
    fn slot(&self, section: &str, key: &str) -> &ResolvedKey {
        self.values
            .iter()
            .find(|v| v.section == section && v.key == key)
            .unwrap_or_else(|| panic!("schema has no {section}.{key}"))
    }

    fn err(&self, slot: &ResolvedKey, message: String) -> ConfigError {
        let (line, column) = slot.at.unwrap_or((0, 0));
        ConfigError::new(line, column, message)
    }

    pub fn str(&self, section: &str, key: &str) -> &str {
        &self.slot(section, key).value
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        let slot = self.slot(section, key);
        slot.value.parse().map_err(|_| {
            self.err(slot, format!("{section}.{key}: expected a number, got `{}`", slot.value))
        })
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<usize, ConfigError> {
        let slot = self.slot(section, key);
        slot.value.parse().map_err(|_| {
            self.err(slot, format!("{section}.{key}: expected a non-negative integer, got `{}`", slot.value))
        })
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<u64, ConfigError> {
        let slot = self.slot(section, key);
        slot.value.parse().map_err(|_| {
            self.err(slot, format!("{section}.{key}: expected a non-negative integer, got `{}`", slot.value))
        })
    }

    /// Gauge list in the mini-grammar, e.g.
    /// `azimuthal; string(3.14159); azimuthal + chi(3*x*y)`.
    pub fn gauges(&self, section: &str, key: &str) -> Result<Vec<GaugeSpec>, ConfigError> {
        let slot = self.slot(section, key);
        parse_gauges(&slot.value)
            .map_err(|m| self.err(slot, format!("{section}.{key}: {m}")))
    }

    pub fn gauge(&self, section: &str, key: &str) -> Result<GaugeSpec, ConfigError> {
        let slot = self.slot(section, key);
        let mut list = parse_gauges(&slot.value)
            .map_err(|m| self.err(slot, format!("{section}.{key}: {m}")))?;
        if list.len() != 1 {
            return Err(self.err(slot, format!("{section}.{key}: expected exactly one gauge")));
        }
        Ok(list.remove(0))
    }

    /// A config error pointing at a slot whose value parsed but failed a
    /// domain check (e.g. an enum-like key with an unknown variant).
    pub fn error_at(&self, section: &str, key: &str, message: String) -> ConfigError {
        self.err(self.slot(section, key), message)
    }

    /// Overrides a slot after resolution (command-line flags). The new
    /// value is what `render` reports, so the manifest always shows the
    /// parameters the run actually used.
    pub fn set(&mut self, section: &str, key: &str, value: String) {
        let v = self
            .values
            .iter_mut()
            .find(|v| v.section == section && v.key == key)
            .unwrap_or_else(|| panic!("schema has no {section}.{key}"));
        v.value = value;
        v.at = None;
    }

    /// Renders the effective parameters back in config syntax, for the
    /// run manifest. Documentation comments are dropped; values are the
    /// ones the run actually used.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for v in &self.values {
            if v.section != current {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{}]\n", v.section));
                current = v.section;
            }
            out.push_str(&format!("{} = {}\n", v.key, v.value));
        }
        out
    }
}

/// Renders a commented template config for a schema.
pub fn render_template(schema: &[SchemaKey]) -> String {
    let mut out = String::new();
    let mut current = "";
    for slot in schema {
        if slot.section != current {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{}]\n", slot.section));
            current = slot.section;
        }
        if !slot.doc.is_empty() {
            out.push_str(&format!("# {}\n", slot.doc));
        }
        out.push_str(&format!("{} = {}\n", slot.key, slot.default));
    }
    out
}

/// Parses the gauge mini-grammar: gauges separated by `;`, each a base
/// (`azimuthal` or `string(<angle>)`) optionally extended by `+ chi(<expr>)`
/// transformations. The string angle itself may be a constant expression
/// (`pi/2` is more auditable than 1.5707963267948966).
pub fn parse_gauges(text: &str) -> Result<Vec<GaugeSpec>, String> {
    let mut gauges = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let mut spec: Option<GaugeSpec> = None;
        for (i, term) in part.split('+').enumerate() {
            let term = term.trim();
            if i == 0 {
                spec = Some(parse_base(term)?);
            } else {
                let body = call_body(term, "chi")
                    .ok_or_else(|| format!("expected `chi(<expr>)` after `+`, got `{term}`"))?;
                let chi = ChiField::parse(body).map_err(|e| e.to_string())?;
                spec = spec.map(|s| s.transformed(chi));
            }
        }
        gauges.push(spec.ok_or_else(|| "empty gauge entry".to_string())?);
    }
    if gauges.is_empty() {
        return Err("no gauges given".into());
    }
    Ok(gauges)
}

fn parse_base(term: &str) -> Result<GaugeSpec, String> {
    if term == "azimuthal" {
        return Ok(GaugeSpec::azimuthal());
    }
    if let Some(body) = call_body(term, "string") {
        return Ok(GaugeSpec::string(constant(body)?));
    }
    Err(format!("unknown gauge base `{term}` (expected `azimuthal` or `string(<angle>)`)"))
}

fn call_body<'t>(term: &'t str, name: &str) -> Option<&'t str> {
    term.strip_prefix(name)
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
}

/// Evaluates a constant expression (a χ expression that must not depend
/// on position).
fn constant(body: &str) -> Result<f64, String> {
    let expr = ChiField::parse(body).map_err(|e| e.to_string())?;
    let a = expr.eval(Vec2::ZERO);
    let b = expr.eval(Vec2::new(0.731, -1.279));
    if a != b || !a.is_finite() {
        return Err(format!("`{body}` must be a finite constant expression"));
    }
    Ok(a)
}
