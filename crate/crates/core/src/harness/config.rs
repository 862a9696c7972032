use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Line-oriented `key = value` settings. `#` starts a comment line; later
/// keys override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("invalid key `{key}`"),
                });
            }
            entries.insert(key.to_string(), (i + 1, value.trim().to_string()));
        }
        Ok(Config { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Removes and parses `key`, if present.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, value)) = self.entries.remove(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|e| {
            let message = format!("invalid value `{value}` for `{key}`: {e}");
            if line == 0 {
                Error::config(message)
            } else {
                Error::Parse { line, message }
            }
        })
    }

    pub fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) if line > 0 => Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            }),
            Some((key, _)) => Err(Error::config(format!("unknown key `{key}`"))),
        }
    }
}

/// A list of sample points: either `a, b, c` or `start end count [lin|log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

impl Sweep {
    pub fn linear(start: f64, end: f64, count: usize) -> Self {
        Sweep(spaced(start, end, count, |x| x))
    }

    pub fn logarithmic(start: f64, end: f64, count: usize) -> Self {
        Sweep(
            spaced(start.log10(), end.log10(), count, |x| x)
                .into_iter()
                .map(|e| 10f64.powf(e))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn spaced(start: f64, end: f64, count: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![f(start)],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    f(end)
                } else {
                    f(start + (end - start) * i as f64 / (count - 1) as f64)
                }
            })
            .collect(),
    }
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("`{t}` is not a number")))
        };
        let sweep = if s.contains(',') {
            Sweep(s.split(',').map(num).collect::<Result<_>>()?)
        } else {
            let parts: Vec<&str> = s.split_whitespace().collect();
            match parts.as_slice() {
                [one] => Sweep(vec![num(one)?]),
                [a, b, n] | [a, b, n, "lin"] => {
                    Sweep::linear(num(a)?, num(b)?, count(n)?)
                }
                [a, b, n, "log"] => {
                    let (a, b) = (num(a)?, num(b)?);
                    if !(a > 0.0 && b > 0.0) {
                        return Err(Error::config("a log sweep needs positive bounds"));
                    }
                    Sweep::logarithmic(a, b, count(n)?)
                }
                _ => {
                    return Err(Error::config(format!(
                        "expected `a, b, ...` or `start end count [lin|log]`, got `{s}`"
                    )))
                }
            }
        };
        if sweep.0.is_empty() {
            return Err(Error::config("empty sweep"));
        }
        if sweep.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("non-finite value in sweep `{s}`")));
        }
        Ok(sweep)
    }
}

fn count(t: &str) -> Result<usize> {
    t.parse()
        .map_err(|_| Error::config(format!("`{t}` is not a point count")))
}

/// A closed `(low, high)` interval written `low high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::config(format!("`{t}` is not a number"))))
            .collect::<Result<_>>()?;
        match parts.as_slice() {
            [x] => Ok(Interval(*x, *x)),
            [lo, hi] if lo <= hi => Ok(Interval(*lo, *hi)),
            _ => Err(Error::config(format!("expected `low high`, got `{s}`"))),
        }
    }
}

/// `level:weight` pairs separated by commas, e.g. `1:2, 2:1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelWeights(pub Vec<(u32, f64)>);

impl FromStr for LevelWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|item| {
                let (l, w) = item.split_once(':').unwrap_or((item, "1"));
                let level = l.trim().parse().map_err(|_| Error::config(format!("bad level `{l}`")))?;
                let weight = w.trim().parse().map_err(|_| Error::config(format!("bad weight `{w}`")))?;
                Ok((level, weight))
            })
            .collect::<Result<_>>()
            .map(LevelWeights)
    }
}
