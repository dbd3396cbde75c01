//! Line-oriented `key = value` platform configuration.
//!
//! ```text
//! # Sanov pair as an explicit affine platform
//! platform = affine
//! dim = 2
//! gen = 0 0 | 1 2 0 1
//! gen = 0 0 | 1 0 2 1
//! ```
//!
//! Keys: `platform` (required), `dim` and repeated `gen = <u> | <M row-major>`
//! for `affine`; `preperiod` and `period` for `gomega`; `pegs` for `hanoi`.
//! Blank lines and `#` comments are ignored.

use num_bigint::BigInt;

use crate::element::PlatformSpec;
use crate::error::GroupError;
use crate::platforms::{AffineElement, GOmegaSpec};

fn bad(line: usize, msg: impl Into<String>) -> GroupError {
    GroupError::InvalidSpec(format!("config line {line}: {}", msg.into()))
}

fn parse_ints(line: usize, s: &str) -> Result<Vec<BigInt>, GroupError> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<BigInt>().map_err(|_| bad(line, format!("bad integer `{t}`"))))
        .collect()
}

fn parse_digits(line: usize, s: &str) -> Result<Vec<u8>, GroupError> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0'..='2' => Ok(c as u8 - b'0'),
            _ => Err(bad(line, format!("bad ω letter `{c}`"))),
        })
        .collect()
}

pub fn parse_platform_config(text: &str) -> Result<PlatformSpec, GroupError> {
    let mut platform: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut gens: Vec<(usize, Vec<BigInt>, Vec<BigInt>)> = Vec::new();
    let mut preperiod: Vec<u8> = Vec::new();
    let mut period: Option<Vec<u8>> = None;
    let mut pegs: Option<u8> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| bad(line, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "platform" => platform = Some(value.to_ascii_lowercase()),
            "dim" => dim = Some(value.parse().map_err(|_| bad(line, "bad dim"))?),
            "gen" => {
                let (u, m) = value.split_once('|').ok_or_else(|| bad(line, "gen needs `u | M`"))?;
                gens.push((line, parse_ints(line, u)?, parse_ints(line, m)?));
            }
            "preperiod" => preperiod = parse_digits(line, value)?,
            "period" => period = Some(parse_digits(line, value)?),
            "pegs" => pegs = Some(value.parse().map_err(|_| bad(line, "bad pegs"))?),
            other => return Err(bad(line, format!("unknown key `{other}`"))),
        }
    }

    let platform = platform.ok_or_else(|| GroupError::InvalidSpec("config lacks `platform`".into()))?;
    match platform.as_str() {
        "affine" => {
            let n = dim.ok_or_else(|| GroupError::InvalidSpec("affine config lacks `dim`".into()))?;
            if gens.is_empty() {
                return Err(GroupError::InvalidSpec("affine config has no `gen`".into()));
            }
            let mut out = Vec::with_capacity(gens.len());
            for (line, u, m) in gens {
                if u.len() != n {
                    return Err(bad(line, format!("translation has {} entries, expected {n}", u.len())));
                }
                if m.len() != n * n {
                    return Err(bad(line, format!("matrix has {} entries, expected {}", m.len(), n * n)));
                }
                out.push(AffineElement::new(u, m)?);
            }
            Ok(PlatformSpec::Affine(out))
        }
        "gomega" => {
            let period = period.ok_or_else(|| GroupError::InvalidSpec("gomega config lacks `period`".into()))?;
            Ok(PlatformSpec::GOmega(GOmegaSpec::new(preperiod, period)?))
        }
        "hanoi" => Ok(PlatformSpec::Hanoi(pegs.unwrap_or(3))),
        other => PlatformSpec::parse(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platforms::AffineGroup;

    #[test]
    fn sanov_config_matches_builtin() {
        let text = "# Sanov\nplatform = affine\ndim = 2\ngen = 0 0 | 1 2 0 1\ngen = 0 0 | 1 0 2 1\n";
        let spec = parse_platform_config(text).unwrap();
        assert_eq!(spec, PlatformSpec::Affine(AffineGroup::sanov().generators().to_vec()));
    }

    #[test]
    fn gomega_config() {
        let spec = parse_platform_config("platform=gomega\npreperiod=2\nperiod=01").unwrap();
        assert_eq!(spec, PlatformSpec::GOmega(GOmegaSpec::parse("2/01").unwrap()));
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_platform_config("platform = affine\ndim = 2\ngen = 0 0 | 2 0 0 1\n").unwrap_err();
        assert_eq!(err, GroupError::NonUnimodular);
        let err = parse_platform_config("platform = affine\ndim = 2\ngen = 0 | 1 0 0 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
        assert!(parse_platform_config("dim = 2").is_err());
        assert!(parse_platform_config("platform = affine\nbogus = 1").is_err());
    }
}
