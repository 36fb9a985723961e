// Key file: UTF-8, one `name = value` per line, `#` starts a comment.
// Floats are written with 17 significant digits so they parse back exactly.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{StegoKey, StegoParams};
use crate::error::{Error, Result};

const FIELDS: [&str; 16] = [
    "version", "seed", "N", "M", "b", "l", "p1", "p2", "p3", "m", "alpha", "beta", "gamma", "c",
    "num_secrets", "assignment",
];

pub fn write_key(key: &StegoKey, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, key.to_text())?;
    Ok(())
}

pub fn read_key(path: impl AsRef<Path>) -> Result<StegoKey> {
    StegoKey::from_text(&fs::read_to_string(path)?)
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl StegoKey {
    /// Canonical textual form.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let assignment: Vec<String> = self.assignment.iter().map(usize::to_string).collect();
        format!(
            "# sabmis stego key\n\
             version = 1\n\
             seed = {}\n\
             N = {}\nM = {}\nb = {}\nl = {}\n\
             p1 = {}\np2 = {}\np3 = {}\nm = {}\n\
             alpha = {}\nbeta = {}\ngamma = {}\n\
             c = {}\nnum_secrets = {}\nassignment = {}\n",
            self.seed,
            p.cover_side,
            p.secret_side,
            p.cover_block,
            p.secret_block,
            p.p1,
            p.p2,
            p.p3,
            p.m,
            float(p.alpha),
            float(p.beta),
            float(p.gamma),
            p.c,
            p.num_secrets,
            assignment.join(","),
        )
    }

    /// Parses and validates a key file body.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut values: HashMap<&'static str, (usize, &str)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `name = value`, found {line:?}"),
            })?;
            let name = name.trim();
            let field = FIELDS.iter().find(|f| **f == name).ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("unknown field {name:?}"),
            })?;
            if values.insert(field, (line_no, value.trim())).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate field {name:?}") });
            }
        }
        let last_line = text.lines().count();
        let get = |name: &'static str| -> Result<(usize, &str)> {
            values.get(name).copied().ok_or_else(|| Error::Parse {
                line: last_line,
                msg: format!("missing field {name:?}"),
            })
        };
        fn num<V: std::str::FromStr>(name: &str, (line, s): (usize, &str)) -> Result<V> {
            s.parse().map_err(|_| Error::Parse { line, msg: format!("bad value for {name}: {s:?}") })
        }
        let version: u32 = num("version", get("version")?)?;
        if version != 1 {
            return Err(Error::Parse {
                line: get("version")?.0,
                msg: format!("unsupported key version {version}"),
            });
        }
        let params = StegoParams {
            cover_side: num("N", get("N")?)?,
            secret_side: num("M", get("M")?)?,
            cover_block: num("b", get("b")?)?,
            secret_block: num("l", get("l")?)?,
            p1: num("p1", get("p1")?)?,
            p2: num("p2", get("p2")?)?,
            p3: num("p3", get("p3")?)?,
            m: num("m", get("m")?)?,
            alpha: num("alpha", get("alpha")?)?,
            beta: num("beta", get("beta")?)?,
            gamma: num("gamma", get("gamma")?)?,
            c: num("c", get("c")?)?,
            num_secrets: num("num_secrets", get("num_secrets")?)?,
        };
        let (line, raw) = get("assignment")?;
        let assignment = raw
            .split(',')
            .map(|s| num::<usize>("assignment", (line, s.trim())))
            .collect::<Result<Vec<_>>>()?;
        StegoKey::with_assignment(num("seed", get("seed")?)?, params, assignment)
    }
}
