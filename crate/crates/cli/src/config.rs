use std::path::{Path, PathBuf};

use icluster::rational::{dyadic, is_positive, parse_coord, parse_q, q, serde_coord, serde_q, serde_q_vec, Coord, Q};
use icluster::sequence::cluster::{default_q_grid, AnalysisParams, RadiusSchedule};
use icluster::sequence::Point;
use icluster::{Error, Result};
use serde::{Deserialize, Serialize};

/// Everything a run depends on. Written verbatim into every primary output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub ideal: String,
    pub ideal_params: Option<serde_json::Value>,
    pub sequence: String,
    pub horizon: u64,
    pub schedule: RadiusSchedule,
    #[serde(with = "serde_coord")]
    pub pitch: Coord,
    #[serde(with = "serde_q_vec")]
    pub q_grid: Vec<Q>,
    #[serde(with = "serde_q")]
    pub theta: Q,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// analyze: all, gamma, limit, lambda, lambda-q, convergence. preserve: add, preserve.
    pub mode: Option<String>,
    /// sigma or pi.
    pub kind: Option<String>,
    pub q: Option<String>,
    /// Target point, comma separated coordinates.
    pub ell: Option<String>,
    #[serde(with = "serde_q")]
    pub witness_q: Q,
    pub rounds: u64,
    pub trials: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AnalysisParams::default();
        RunConfig {
            command: String::new(),
            ideal: "density-zero".into(),
            ideal_params: None,
            sequence: "char:evens".into(),
            horizon: a.horizon,
            schedule: a.schedule,
            pitch: a.pitch,
            q_grid: default_q_grid(),
            theta: a.theta,
            seed: 0,
            out_dir: PathBuf::from("out"),
            mode: None,
            kind: None,
            q: None,
            ell: None,
            witness_q: q(1, 2),
            rounds: 20,
            trials: 100,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.rounds == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("horizon, rounds and trials must be positive".into()));
        }
        if !self.q_grid.iter().all(is_positive) || !is_positive(&self.theta) || !is_positive(&self.witness_q) {
            return Err(Error::InvalidParameter("q-grid, theta and witness-q must be positive".into()));
        }
        if let Some(v) = self.q_value()? {
            if !is_positive(&v) {
                return Err(Error::InvalidParameter("q must be positive".into()));
            }
        }
        self.ell_point()?;
        self.analysis().validate()
    }

    pub fn analysis(&self) -> AnalysisParams {
        AnalysisParams {
            horizon: self.horizon,
            schedule: self.schedule.clone(),
            pitch: self.pitch,
            theta: self.theta.clone(),
            ..Default::default()
        }
    }

    pub fn q_value(&self) -> Result<Option<Q>> {
        self.q.as_deref().map(parse_q).transpose()
    }

    pub fn ell_point(&self) -> Result<Option<Point>> {
        self.ell.as_deref().map(parse_point).transpose()
    }

    pub fn require_ell(&self) -> Result<Point> {
        self.ell_point()?.ok_or_else(|| Error::InvalidParameter("--ell is required".into()))
    }
}

pub fn parse_point(s: &str) -> Result<Point> {
    s.split(',').map(|c| parse_coord(c.trim())).collect()
}

/// `K` alone means the dyadic radii `1/2 .. 2^-K`; otherwise a comma list.
pub fn parse_schedule(s: &str) -> Result<RadiusSchedule> {
    if let Ok(k) = s.trim().parse::<u32>() {
        if k == 0 || k > 40 {
            return Err(Error::InvalidParameter("dyadic schedule length must be in 1..=40".into()));
        }
        return Ok(RadiusSchedule::dyadic(k));
    }
    RadiusSchedule::new(s.split(',').map(|c| parse_coord(c.trim())).collect::<Result<_>>()?)
}

pub fn parse_pitch(s: &str) -> Result<Coord> {
    match s.trim().strip_prefix("2^-") {
        Some(k) => Ok(dyadic(k.parse().map_err(|_| Error::Parse(format!("bad pitch `{s}`")))?)),
        None => parse_coord(s),
    }
}

pub fn parse_q_grid(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(|v| parse_q(v.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig { command: "analyze".into(), ell: Some("1/2".into()), ..Default::default() };
        c.ideal_params = Some(serde_json::json!({"weights": ["1/2"]}));
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let c = RunConfig { horizon: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { q: Some("0".into()), ..Default::default() };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"horizn": 5}"#).is_err());
        assert!(parse_schedule("1/4,1/2").is_err());
    }

    #[test]
    fn parses_shorthands() {
        assert_eq!(parse_schedule("3").unwrap(), RadiusSchedule::dyadic(3));
        assert_eq!(parse_pitch("2^-6").unwrap(), Coord::new(1, 64));
        assert_eq!(parse_point("0, 1/2").unwrap(), vec![Coord::new(0, 1), Coord::new(1, 2)]);
    }
}
