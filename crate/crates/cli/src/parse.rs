//! Value parsers for angles, grids and comma-separated lists.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Parses a decimal or a multiple of π: `1.5`, `pi`, `3pi`, `2*pi`, `pi/2`,
/// `3pi/2`, `0.5*pi/4`. `π` is accepted for `pi`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .replace(' ', "");
    let number = |x: &str| -> Result<f64, String> {
        x.parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number or pi-expression"))
    };
    let value = match t.split_once("pi") {
        None => number(&t)?,
        Some((pre, post)) => {
            let pre = pre.strip_suffix('*').unwrap_or(pre);
            let factor = if pre.is_empty() { 1.0 } else { number(pre)? };
            let divisor = match post {
                "" => 1.0,
                d => number(
                    d.strip_prefix('/')
                        .ok_or_else(|| format!("`{s}`: expected `/` after pi"))?,
                )?,
            };
            if divisor == 0.0 {
                return Err(format!("`{s}`: division by zero"));
            }
            factor * PI / divisor
        }
    };
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(value)
}

/// `start:end:count` in `χτ`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, count] = parts[..] else {
            return Err(format!("grid `{s}` must have the form start:end:count"));
        };
        let count = count
            .trim()
            .parse()
            .map_err(|_| format!("grid count `{count}` is not a positive integer"))?;
        Ok(Grid {
            start: parse_real(start)?,
            end: parse_real(end)?,
            count,
        })
    }
}

/// Comma-separated reals, each a decimal or pi-expression.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(parse_real)
            .collect::<Result<_, _>>()
            .map(RealList)
    }
}

impl fmt::Display for RealList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:?}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Comma-separated non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimList(pub Vec<usize>);

impl FromStr for DimList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| format!("`{x}` is not a non-negative integer"))
            })
            .collect::<Result<_, _>>()
            .map(DimList)
    }
}

impl fmt::Display for DimList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
