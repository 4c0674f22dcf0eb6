use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ChargeError, Result};
use crate::lax::Spin;

/// A simple substate: one fixed sequence of up (`1`) and down (`2`) spins.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinState {
    sites: Vec<Spin>,
}

impl SpinState {
    pub fn new(sites: Vec<Spin>) -> Result<Self> {
        if sites.is_empty() {
            return Err(ChargeError::InvalidInput("substate must have at least one site".into()));
        }
        Ok(SpinState { sites })
    }

    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        let sites = labels
            .iter()
            .map(|&l| match l {
                1 => Ok(Spin::Up),
                2 => Ok(Spin::Down),
                other => Err(ChargeError::Parse(format!("site label {other} is not 1 or 2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        SpinState::new(sites)
    }

    pub fn sites(&self) -> &[Spin] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn n_up(&self) -> usize {
        self.sites.iter().filter(|&&s| s == Spin::Up).count()
    }

    pub fn n_down(&self) -> usize {
        self.len() - self.n_up()
    }

    /// `n_down / n_up`; `None` when there are no up spins.
    pub fn ratio(&self) -> Option<f64> {
        let up = self.n_up();
        (up > 0).then(|| self.n_down() as f64 / up as f64)
    }

    pub fn rotate(&self, k: usize) -> SpinState {
        let mut sites = self.sites.clone();
        let len = sites.len();
        sites.rotate_left(k % len);
        SpinState { sites }
    }

    pub fn flip(&self) -> SpinState {
        SpinState { sites: self.sites.iter().map(|s| s.flip()).collect() }
    }

    pub fn repeat(&self, times: usize) -> SpinState {
        SpinState { sites: self.sites.repeat(times.max(1)) }
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sites {
            write!(f, "{}", s.label())?;
        }
        Ok(())
    }
}

impl FromStr for SpinState {
    type Err = ChargeError;

    /// Accepts `1112` as well as `{1, 1, 1, 2}` / `1,1,1,2`.
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .filter(|c| !matches!(c, '{' | '}' | '[' | ']' | ',' | ' '))
            .map(|c| match c {
                '1' => Ok(1u8),
                '2' => Ok(2u8),
                other => Err(ChargeError::Parse(format!("unexpected character {other:?} in substate"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(ChargeError::Parse("empty substate".into()));
        }
        SpinState::from_labels(&labels)
    }
}

impl Serialize for SpinState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpinState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_counts() {
        let psi: SpinState = "1111212".parse().unwrap();
        assert_eq!(psi.len(), 7);
        assert_eq!((psi.n_up(), psi.n_down()), (5, 2));
        assert_eq!(psi.ratio(), Some(0.4));
        assert_eq!(psi.to_string(), "1111212");
        let braces: SpinState = "{1, 1, 1, 1, 2, 1, 2}".parse().unwrap();
        assert_eq!(braces, psi);
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<SpinState>().is_err());
        assert!("1213".parse::<SpinState>().is_err());
        assert!(SpinState::new(vec![]).is_err());
    }

    #[test]
    fn flip_inverts_ratio() {
        let psi: SpinState = "11212".parse().unwrap();
        assert_eq!(psi.flip().ratio(), Some(3.0 / 2.0));
        assert_eq!("222".parse::<SpinState>().unwrap().ratio(), None);
        assert_eq!(psi.rotate(2).to_string(), "21211");
    }
}
