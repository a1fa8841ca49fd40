//! Parsing of node-set specifications such as `40x40`, `random:300:seed=7`
//! and `subdiv:2`.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSpec {
    /// Nodes per axis of a regular grid.
    Structured(Vec<usize>),
    /// Uniform random nodes; `None` falls back to the `--seed` flag.
    Random { count: usize, seed: Option<u64> },
    /// Subdivision level of an icosphere.
    Subdiv(usize),
}

impl GridSpec {
    /// Fills in a missing seed.
    pub fn with_default_seed(self, seed: u64) -> Self {
        match self {
            GridSpec::Random { count, seed: None } => GridSpec::Random { count, seed: Some(seed) },
            other => other,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Structured(c) => {
                let parts: Vec<String> = c.iter().map(|k| k.to_string()).collect();
                f.write_str(&parts.join("x"))
            }
            GridSpec::Random { count, seed: Some(s) } => write!(f, "random:{count}:seed={s}"),
            GridSpec::Random { count, seed: None } => write!(f, "random:{count}"),
            GridSpec::Subdiv(k) => write!(f, "subdiv:{k}"),
        }
    }
}

fn number<T: FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("invalid {what} `{s}`"))
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("subdiv:") {
            return Ok(GridSpec::Subdiv(number(rest, "subdivision level")?));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let mut parts = rest.split(':');
            let count: usize = number(parts.next().unwrap_or(""), "node count")?;
            let seed = match parts.next() {
                None => None,
                Some(p) => Some(number(p.strip_prefix("seed=").ok_or(format!("expected seed=<u64>, got `{p}`"))?, "seed")?),
            };
            if parts.next().is_some() {
                return Err(format!("trailing fields in `{s}`"));
            }
            if count == 0 {
                return Err("random node count must be positive".into());
            }
            return Ok(GridSpec::Random { count, seed });
        }
        let counts = s.split('x').map(|p| number::<usize>(p, "node count")).collect::<Result<Vec<_>, _>>()?;
        if counts.iter().any(|&k| k < 2) {
            return Err(format!("grid `{s}` needs at least 2 nodes per axis"));
        }
        Ok(GridSpec::Structured(counts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!("40x40".parse::<GridSpec>().unwrap(), GridSpec::Structured(vec![40, 40]));
        assert_eq!("10x20x10".parse::<GridSpec>().unwrap(), GridSpec::Structured(vec![10, 20, 10]));
        assert_eq!("random:300:seed=7".parse::<GridSpec>().unwrap(), GridSpec::Random { count: 300, seed: Some(7) });
        assert_eq!("random:50".parse::<GridSpec>().unwrap(), GridSpec::Random { count: 50, seed: None });
        assert_eq!("subdiv:2".parse::<GridSpec>().unwrap(), GridSpec::Subdiv(2));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "40x", "1x40", "random:", "random:0", "random:5:7", "random:5:seed=x", "subdiv:-1", "axb"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["40x40", "random:300:seed=7", "subdiv:3", "3x4x5"] {
            assert_eq!(s.parse::<GridSpec>().unwrap().to_string(), s);
        }
    }
}
