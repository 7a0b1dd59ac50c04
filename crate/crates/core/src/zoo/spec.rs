//! Spec-string grammar: `family[:key=value,...]`.
//!
//! A comma token without `=` continues the previous value, so
//! `shiftpinch:d=4,K=1,2` gives `K = "1,2"`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ChannelSpec;
use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{basis, C64};

/// JSON schema for `diag:file=PATH`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalFile {
    pub dim: usize,
    pub diagonals: Vec<DiagonalEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalEntry {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

pub fn parse_diagonal_file(text: &str) -> Result<ChannelSpec> {
    let file: DiagonalFile = serde_json::from_str(text)?;
    let mut diagonals = Vec::with_capacity(file.diagonals.len());
    for (k, entry) in file.diagonals.into_iter().enumerate() {
        if entry.re.len() != entry.im.len() {
            return Err(Error::Parse(format!(
                "diagonals[{k}]: re and im lengths differ"
            )));
        }
        let diag: Vec<C64> = entry
            .re
            .iter()
            .zip(&entry.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        if diag.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse(format!("diagonals[{k}]: non-finite entry")));
        }
        diagonals.push(diag);
    }
    Ok(ChannelSpec::Diagonal {
        d: file.dim,
        diagonals,
    })
}

fn split_params(body: &str) -> Result<BTreeMap<String, String>> {
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    let mut last: Option<String> = None;
    for token in body.split(',').map(str::trim) {
        if token.is_empty() {
            return Err(Error::Parse(format!("empty parameter in '{body}'")));
        }
        match token.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if params.contains_key(&k) {
                    return Err(Error::Parse(format!("parameter '{k}' given twice")));
                }
                params.insert(k.clone(), v.trim().to_string());
                last = Some(k);
            }
            None => {
                let key = last
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got '{token}'")))?;
                let v = params.get_mut(key).expect("key inserted");
                v.push(',');
                v.push_str(token);
            }
        }
    }
    Ok(params)
}

struct Params {
    family: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("{}: missing parameter '{key}'", self.family)))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.required(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("{}: '{key}={v}' is not a count", self.family)))
    }

    fn counts(&mut self, key: &str, sep: char) -> Result<Vec<usize>> {
        let v = self.required(key)?;
        v.split(sep)
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    Error::Parse(format!("{}: '{key}={v}' is not a list of counts", self.family))
                })
            })
            .collect()
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Parse(format!("{}: unknown parameter '{k}'", self.family))),
            None => Ok(()),
        }
    }
}

impl ChannelSpec {
    /// Parses a spec string, reading `diag:file=PATH` relative to `base`.
    pub fn parse_with_base(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        let (family, body) = match s.split_once(':') {
            Some((f, b)) => (f.trim(), Some(b)),
            None => (s, None),
        };
        let map = match body {
            Some(b) => split_params(b)?,
            None => BTreeMap::new(),
        };
        let mut p = Params {
            family: family.to_string(),
            map,
        };
        let spec = match family {
            "wh" => ChannelSpec::WernerHolevo { d: p.count("d")? },
            "weyl" => ChannelSpec::WeylShift { d: p.count("d")? },
            "casimir" => ChannelSpec::CasimirIrreducible { d: p.count("d")? },
            "casimir-reducible" => ChannelSpec::CasimirReducibleExample,
            "stretch" => {
                let d = p.count("d")?;
                let lambda_s = p.required("lambda")?;
                let lambda: f64 = lambda_s
                    .parse()
                    .map_err(|_| Error::Parse(format!("stretch: bad lambda '{lambda_s}'")))?;
                let omega_index = match p.take("omega") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Parse(format!("stretch: bad omega index '{v}'")))?,
                    None => 0,
                };
                if omega_index >= d.max(1) {
                    return Err(Error::SpecInvalid(format!(
                        "omega index {omega_index} outside 0..{d}"
                    )));
                }
                ChannelSpec::Stretching {
                    d,
                    lambda,
                    omega: DensityMatrix::from_pure(&basis(d.max(1), omega_index)),
                }
            }
            "pinch" => {
                let d = p.count("d")?;
                let blocks = match p.map.contains_key("blocks") {
                    true => p.counts("blocks", '+')?,
                    false => vec![1; d],
                };
                ChannelSpec::pinching_blocks(d, &blocks)?
            }
            "shiftpinch" => {
                let d = p.count("d")?;
                let shifts = p.counts("K", ',')?;
                ChannelSpec::ShiftsPinching { d, shifts }
            }
            "coarse" => ChannelSpec::CoarseGraining {
                n: p.count("n")?,
                block: p.count("D")?,
            },
            "diag" => {
                let file = p.required("file")?;
                let path = base.join(&file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Parse(format!("diag: cannot read '{file}': {e}")))?;
                parse_diagonal_file(&text)?
            }
            other => return Err(Error::Parse(format!("unknown channel family '{other}'"))),
        };
        p.finish()?;
        Ok(spec)
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_base(s, Path::new("."))
    }
}
