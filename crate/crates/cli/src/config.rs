//! Flag parsing helpers and the config-file merge.
//!
//! --config names a flat TOML table whose keys mirror the long flag names;
//! any flag given on the command line wins over the file.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use streamframe::cases::{get_case, CaseSystem};
use streamframe::exprfield::{parse_field, FieldDef, Params};
use streamframe::R3;

#[derive(Debug, Default)]
pub struct FileDefaults(toml::Table);

impl FileDefaults {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let table: toml::Table = text
            .parse()
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(FileDefaults(table))
    }

    /// File value rendered as a flag string; numbers and booleans are
    /// accepted wherever a flag would be.
    pub fn get(&self, key: &str) -> Option<String> {
        self.0.get(key).map(|v| match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|s| parse_number(&s).with_context(|| format!("config key `{key}`")))
            .transpose()
    }
}

/// Flag if present, else the config-file value.
pub fn pick(flag: Option<String>, file: &FileDefaults, key: &str) -> Option<String> {
    flag.or_else(|| file.get(key))
}

pub fn pick_f64(flag: Option<f64>, file: &FileDefaults, key: &str) -> Result<Option<f64>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get_f64(key),
    }
}

/// Number with an optional p/q fraction, so --params a=1/3 reads exactly.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let num: f64 = p.trim().parse().with_context(|| format!("number `{s}`"))?;
            let den: f64 = q.trim().parse().with_context(|| format!("number `{s}`"))?;
            num / den
        }
        None => match s {
            "inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            _ => s.parse().with_context(|| format!("number `{s}`"))?,
        },
    };
    Ok(v)
}

fn split_n<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        bail!("{what} needs {N} comma-separated values, got `{s}`");
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_number(part)?;
    }
    Ok(out)
}

pub fn parse_point(s: &str) -> Result<R3> {
    let [x, y, z] = split_n::<3>(s, "a point")?;
    Ok(R3::new(x, y, z))
}

pub fn parse_span(s: &str) -> Result<(f64, f64)> {
    let [a, b] = split_n::<2>(s, "a span")?;
    Ok((a, b))
}

pub fn parse_pair(s: &str) -> Result<[f64; 2]> {
    split_n::<2>(s, "a pair")
}

pub fn parse_params(s: &str) -> Result<Params> {
    let mut params = Params::new();
    for item in s.split(',') {
        let Some((key, value)) = item.split_once('=') else {
            bail!("parameter `{item}` is not of the form k=v");
        };
        params.insert(key.trim().to_string(), parse_number(value)?);
    }
    Ok(params)
}

/// The resolved field source of a run.
pub enum Source {
    Case(CaseSystem),
    Field(FieldDef, Params),
}

impl Source {
    pub fn field(&self) -> &FieldDef {
        match self {
            Source::Case(sys) => &sys.field,
            Source::Field(f, _) => f,
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            Source::Case(sys) => &sys.params,
            Source::Field(_, p) => p,
        }
    }

    pub fn case(&self) -> Option<&CaseSystem> {
        match self {
            Source::Case(sys) => Some(sys),
            Source::Field(..) => None,
        }
    }

    /// The case seed when no explicit point was given.
    pub fn default_seed(&self) -> Option<R3> {
        self.case().map(|sys| sys.default_seed())
    }
}

pub fn resolve_source(
    case: Option<String>,
    field: Option<String>,
    params: Option<String>,
) -> Result<Source> {
    let params = params.as_deref().map(parse_params).transpose()?;
    match (case, field) {
        (Some(_), Some(_)) => bail!("--case and --field are mutually exclusive"),
        (None, None) => bail!("a field source is required: --case NAME or --field fx,fy,fz"),
        (Some(name), None) => {
            let sys = get_case(&name, &params.unwrap_or_default())?;
            Ok(Source::Case(sys))
        }
        (None, Some(src)) => {
            let comps: Vec<&str> = src.split(',').collect();
            if comps.len() != 3 {
                bail!("--field needs exactly three comma-separated expressions, got `{src}`");
            }
            let params = params.unwrap_or_default();
            let field = parse_field(comps[0], comps[1], comps[2], &params)?;
            Ok(Source::Field(field, params))
        }
    }
}
