//! Classified estimates of limit points, I-cluster points, and the
//! q-thick cluster sets, plus I-convergence.

use std::cell::OnceCell;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::{DecideParams, Decision, FinIdeal, Ideal, Membership};
use crate::natset::{Bits, NatSet};
use crate::rational::{dyadic, fmt_q, q, serde_coord, serde_coord_vec, serde_q, serde_q_opt, Coord, Q};
use crate::submeasure::{Lscsm, Trend};

use super::{fmt_point, within, Point, SequenceSpec};

/// Strictly decreasing positive radii `eps_1 > … > eps_K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadiusSchedule(#[serde(with = "serde_coord_vec")] Vec<Coord>);

impl RadiusSchedule {
    pub fn new(radii: Vec<Coord>) -> Result<Self> {
        let s = RadiusSchedule(radii);
        s.validate()?;
        Ok(s)
    }

    /// `2^-1, …, 2^-k`.
    pub fn dyadic(k: u32) -> Self {
        RadiusSchedule((1..=k).map(dyadic).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() || self.0.last().is_some_and(|e| *e <= Coord::zero()) {
            return Err(Error::InvalidParameter("radius schedule needs positive radii".into()));
        }
        if self.0.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidParameter("radius schedule must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn radii(&self) -> &[Coord] {
        &self.0
    }

    pub fn smallest(&self) -> &Coord {
        self.0.last().expect("validated schedule is non-empty")
    }
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self::dyadic(10)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub horizon: u64,
    pub schedule: RadiusSchedule,
    #[serde(with = "serde_coord")]
    pub pitch: Coord,
    pub hit_min: u64,
    #[serde(with = "serde_q")]
    pub theta: Q,
    pub cuts: Option<Vec<u64>>,
    /// Points classified in addition to the letters or grid cells.
    #[serde(skip)]
    pub extra_candidates: Vec<Point>,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        let d = DecideParams::default();
        AnalysisParams {
            horizon: 1 << 17,
            schedule: RadiusSchedule::default(),
            pitch: dyadic(10),
            hit_min: d.hit_min,
            theta: d.theta,
            cuts: None,
            extra_candidates: Vec::new(),
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.decide_params().validate()?;
        if self.pitch <= Coord::zero() || self.pitch > *self.schedule.smallest() {
            return Err(Error::InvalidParameter("grid pitch must lie in (0, smallest radius]".into()));
        }
        Ok(())
    }

    pub fn decide_params(&self) -> DecideParams {
        DecideParams { horizon: self.horizon, theta: self.theta.clone(), cuts: self.cuts.clone(), hit_min: self.hit_min }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Cluster,
    NotCluster,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    LimitPoints,
    Gamma,
    /// Union over a grid of thresholds; reported as the smallest one.
    Lambda {
        #[serde(with = "serde_q")]
        q_min: Q,
    },
    LambdaQ {
        #[serde(with = "serde_q")]
        q: Q,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRecord {
    #[serde(with = "serde_coord")]
    pub eps: Coord,
    pub verdict: Membership,
    #[serde(with = "serde_q_opt")]
    pub exact: Option<Q>,
    #[serde(with = "serde_q_opt")]
    pub numeric: Option<Q>,
    pub reason: String,
}

impl LevelRecord {
    fn from_decision(eps: &Coord, d: &Decision) -> Self {
        LevelRecord {
            eps: *eps,
            verdict: d.verdict,
            exact: d.estimate.as_ref().and_then(|e| e.exact.clone()),
            numeric: d.estimate.as_ref().map(|e| e.numeric.clone()),
            reason: d.reason.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRecord {
    #[serde(with = "serde_coord_vec")]
    pub point: Point,
    pub class: Class,
    /// Radii actually evaluated, smallest first.
    pub levels: Vec<LevelRecord>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub mode: Mode,
    pub sequence: String,
    pub ideal: String,
    pub horizon: u64,
    #[serde(with = "serde_coord")]
    pub pitch: Coord,
    pub schedule: RadiusSchedule,
    pub candidates: Vec<CandidateRecord>,
    /// Cluster labels withdrawn because a larger set in the chain lacked them.
    pub downgraded: usize,
}

impl ClusterReport {
    pub fn class_of(&self, p: &[Coord]) -> Option<Class> {
        self.candidates.iter().find(|c| c.point == p).map(|c| c.class)
    }

    pub fn with_class(&self, class: Class) -> Vec<&Point> {
        self.candidates.iter().filter(|c| c.class == class).map(|c| &c.point).collect()
    }

    pub fn clusters(&self) -> Vec<&Point> {
        self.with_class(Class::Cluster)
    }

    /// One row per evaluated level: candidate, eps, exact, numeric, class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,eps,exact,numeric,verdict,class\n");
        let class = |c: Class| match c {
            Class::Cluster => "cluster",
            Class::NotCluster => "not-cluster",
            Class::Undecided => "undecided",
        };
        for c in &self.candidates {
            for l in &c.levels {
                out.push_str(&format!(
                    "\"{}\",{},{},{},{},{}\n",
                    fmt_point(&c.point),
                    crate::rational::fmt_coord(&l.eps),
                    l.exact.as_ref().map(fmt_q).unwrap_or_default(),
                    l.numeric.as_ref().map(fmt_q).unwrap_or_default(),
                    l.verdict,
                    class(c.class)
                ));
            }
        }
        out
    }

    /// Withdraws Cluster labels the containing report does not share.
    fn guard_against(&mut self, outer: &ClusterReport) {
        for c in &mut self.candidates {
            if c.class == Class::Cluster && outer.class_of(&c.point) != Some(Class::Cluster) {
                c.class = Class::Undecided;
                c.reason = format!("{}; withdrawn, not a cluster point of the containing set", c.reason);
                self.downgraded += 1;
            }
        }
    }
}

/// Caches the sequence prefix for bitmap indicators.
pub(crate) struct Evaluator<'a> {
    x: &'a SequenceSpec,
    horizon: u64,
    points: OnceCell<(Vec<Point>, Vec<Vec<f64>>)>,
}

fn to_f64(c: &Coord) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(x: &'a SequenceSpec, params: &AnalysisParams) -> Result<Self> {
        params.validate()?;
        Ok(Evaluator { x, horizon: x.usable_horizon(params.horizon), points: OnceCell::new() })
    }

    fn points(&self) -> Result<&(Vec<Point>, Vec<Vec<f64>>)> {
        if let Some(p) = self.points.get() {
            return Ok(p);
        }
        let p = self.x.points(self.horizon)?;
        let f = p.iter().map(|v| v.iter().map(to_f64).collect()).collect();
        Ok(self.points.get_or_init(|| (p, f)))
    }

    pub(crate) fn indicator(&self, center: &[Coord], eps: &Coord) -> Result<NatSet> {
        if let Some(s) = self.x.generator.indicator(center, eps) {
            return s;
        }
        let (pts, approx) = self.points()?;
        let c: Vec<f64> = center.iter().map(to_f64).collect();
        let e = to_f64(eps);
        let (outer, inner) = (e * (1.0 + 1e-9) + 1e-12, e * (1.0 - 1e-9) - 1e-12);
        let mut bits = Bits::repeat(false, pts.len());
        for (i, (p, f)) in pts.iter().zip(approx).enumerate() {
            // the float test is exact away from the sphere
            let d = f.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let hit = if d > outer {
                false
            } else if d < inner {
                true
            } else {
                within(p, center, eps)
            };
            if hit {
                bits.set(i, true);
            }
        }
        Ok(NatSet::bitmap(bits))
    }
}

pub(crate) fn snap(c: &Coord, pitch: &Coord) -> Coord {
    (c / pitch).round() * pitch
}

/// Grid cells visited by the upper half of the prefix.
fn grid_candidates(ev: &Evaluator, params: &AnalysisParams) -> Result<Vec<Point>> {
    let n = ev.horizon;
    let mut cells = std::collections::BTreeSet::new();
    for i in n / 2 + 1..=n {
        cells.insert(ev.x.point(i)?.iter().map(|c| snap(c, &params.pitch)).collect::<Point>());
    }
    Ok(cells.into_iter().collect())
}

fn candidate_list(ev: &Evaluator, params: &AnalysisParams) -> Result<Vec<Point>> {
    let mut out: Vec<Point> = match &ev.x.alphabet {
        Some(a) => a.letters.iter().map(|l| l.0.clone()).collect(),
        None => grid_candidates(ev, params)?,
    };
    out.extend(params.extra_candidates.iter().cloned());
    out.sort();
    out.dedup();
    Ok(out)
}

/// Gamma-style classification of one candidate: the smallest ball first,
/// then larger balls only while nothing is settled.
fn classify_membership(ev: &Evaluator, ideal: &dyn Ideal, dp: &DecideParams, p: &[Coord], schedule: &RadiusSchedule) -> Result<CandidateRecord> {
    let mut levels = Vec::new();
    let radii = schedule.radii();
    let (class, reason) = 'walk: {
        for (i, eps) in radii.iter().rev().enumerate() {
            let d = ideal.decide(&ev.indicator(p, eps)?, dp)?;
            levels.push(LevelRecord::from_decision(eps, &d));
            match (i, d.verdict) {
                // larger balls are supersets
                (0, Membership::NotIn) => break 'walk (Class::Cluster, "smallest ball outside the ideal"),
                (_, Membership::In) => break 'walk (Class::NotCluster, "a ball inside the ideal"),
                _ => {}
            }
        }
        (Class::Undecided, "no radius settles membership")
    };
    Ok(CandidateRecord { point: p.to_vec(), class, levels, reason: reason.into() })
}

fn membership_report(x: &SequenceSpec, ideal: &dyn Ideal, params: &AnalysisParams, mode: Mode, candidates: Option<&[Point]>) -> Result<ClusterReport> {
    let ev = Evaluator::new(x, params)?;
    let owned;
    let cands = match candidates {
        Some(c) => c,
        None => {
            owned = candidate_list(&ev, params)?;
            &owned
        }
    };
    let dp = params.decide_params();
    let records = cands
        .iter()
        .map(|p| classify_membership(&ev, ideal, &dp, p, &params.schedule))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterReport {
        mode,
        sequence: x.name.clone(),
        ideal: ideal.name().to_string(),
        horizon: ev.horizon,
        pitch: params.pitch,
        schedule: params.schedule.clone(),
        candidates: records,
        downgraded: 0,
    })
}

/// Limit points: cluster points with respect to finite sets.
pub fn limit_points_estimate(x: &SequenceSpec, params: &AnalysisParams) -> Result<ClusterReport> {
    membership_report(x, &FinIdeal::new(), params, Mode::LimitPoints, None)
}

pub fn gamma_estimate(x: &SequenceSpec, ideal: &dyn Ideal, params: &AnalysisParams) -> Result<ClusterReport> {
    membership_report(x, ideal, params, Mode::Gamma, None)
}

fn classify_thick(ev: &Evaluator, ideal: &dyn Ideal, dp: &DecideParams, p: &[Coord], eps: &Coord, threshold: &Q) -> Result<CandidateRecord> {
    let d = ideal.decide(&ev.indicator(p, eps)?, dp)?;
    let e = d.estimate.as_ref().ok_or_else(|| Error::NotAnalyticP(ideal.name().to_string()))?;
    let (class, reason) = if let Some(x) = &e.exact {
        if x >= threshold {
            (Class::Cluster, "exact norm reaches the threshold")
        } else {
            (Class::NotCluster, "exact norm below the threshold")
        }
    } else if e.certified_lower.as_ref().is_some_and(|l| l >= threshold) {
        (Class::Cluster, "certified lower bound reaches the threshold")
    } else if d.verdict == Membership::In {
        (Class::NotCluster, "smallest ball inside the ideal")
    } else if d.verdict == Membership::NotIn && e.numeric >= *threshold {
        (Class::Cluster, "tail estimate reaches the threshold")
    } else if e.numeric < *threshold && e.trend != Trend::Mixed {
        (Class::NotCluster, "tail estimate below the threshold")
    } else {
        (Class::Undecided, "tail estimate inconclusive")
    };
    Ok(CandidateRecord { point: p.to_vec(), class, levels: vec![LevelRecord::from_decision(eps, &d)], reason: reason.into() })
}

fn thick_report(x: &SequenceSpec, ideal: &dyn Ideal, threshold: &Q, params: &AnalysisParams, mode: Mode, candidates: Option<&[Point]>) -> Result<ClusterReport> {
    if ideal.lscsm().is_none() {
        return Err(Error::NotAnalyticP(ideal.name().to_string()));
    }
    if *threshold <= Q::zero() || *threshold > q(1, 1) {
        return Err(Error::InvalidParameter("threshold must lie in (0, 1]".into()));
    }
    let ev = Evaluator::new(x, params)?;
    let owned;
    let cands = match candidates {
        Some(c) => c,
        None => {
            owned = candidate_list(&ev, params)?;
            &owned
        }
    };
    let dp = params.decide_params();
    let eps = params.schedule.smallest();
    let records = cands
        .iter()
        .map(|p| classify_thick(&ev, ideal, &dp, p, eps, threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterReport {
        mode,
        sequence: x.name.clone(),
        ideal: ideal.name().to_string(),
        horizon: ev.horizon,
        pitch: params.pitch,
        schedule: params.schedule.clone(),
        candidates: records,
        downgraded: 0,
    })
}

/// Points whose shrinking balls keep submeasure norm at least `threshold`.
pub fn lambda_q_estimate(x: &SequenceSpec, ideal: &dyn Ideal, threshold: &Q, params: &AnalysisParams) -> Result<ClusterReport> {
    thick_report(x, ideal, threshold, params, Mode::LambdaQ { q: threshold.clone() }, None)
}

pub fn default_q_grid() -> Vec<Q> {
    vec![q(1, 64), q(1, 16), q(1, 4), q(1, 2), q(1, 1)]
}

/// All four classified sets on one candidate list, chained so that each
/// Cluster label also holds in every containing set.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub limit_points: ClusterReport,
    pub gamma: ClusterReport,
    pub lambda: Option<ClusterReport>,
    pub lambda_q: Vec<ClusterReport>,
}

impl Analysis {
    pub fn downgraded(&self) -> usize {
        self.gamma.downgraded
            + self.lambda.as_ref().map_or(0, |r| r.downgraded)
            + self.lambda_q.iter().map(|r| r.downgraded).sum::<usize>()
    }
}

pub fn analyze(x: &SequenceSpec, ideal: &dyn Ideal, q_grid: &[Q], params: &AnalysisParams) -> Result<Analysis> {
    let ev = Evaluator::new(x, params)?;
    let cands = candidate_list(&ev, params)?;
    let limit_points = membership_report(x, &FinIdeal::new(), params, Mode::LimitPoints, Some(&cands))?;
    let mut gamma = membership_report(x, ideal, params, Mode::Gamma, Some(&cands))?;
    gamma.guard_against(&limit_points);
    if ideal.lscsm().is_none() {
        return Ok(Analysis { limit_points, gamma, lambda: None, lambda_q: Vec::new() });
    }
    let mut grid = q_grid.to_vec();
    grid.sort();
    grid.dedup();
    let q_min = grid.first().cloned().ok_or_else(|| Error::InvalidParameter("empty threshold grid".into()))?;
    let mut lambda = thick_report(x, ideal, &q_min, params, Mode::Lambda { q_min: q_min.clone() }, Some(&cands))?;
    lambda.guard_against(&gamma);
    let mut lambda_q = Vec::new();
    for t in &grid {
        let mut r = thick_report(x, ideal, t, params, Mode::LambdaQ { q: t.clone() }, Some(&cands))?;
        r.guard_against(&lambda);
        if let Some(prev) = lambda_q.last() {
            r.guard_against(prev);
        }
        lambda_q.push(r);
    }
    Ok(Analysis { limit_points, gamma, lambda: Some(lambda), lambda_q })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UFrakLevel {
    #[serde(with = "serde_coord")]
    pub eps: Coord,
    #[serde(with = "serde_q_opt")]
    pub exact: Option<Q>,
    #[serde(with = "serde_q")]
    pub numeric: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UFrak {
    /// Value at the smallest radius.
    #[serde(with = "serde_q_opt")]
    pub exact: Option<Q>,
    #[serde(with = "serde_q")]
    pub numeric: Q,
    pub levels: Vec<UFrakLevel>,
    /// Values never increase as the radius shrinks.
    pub non_increasing: bool,
}

/// Submeasure norm of shrinking balls around `center` along `y`, which is
/// usually a subsequence of some other sequence.
pub fn u_frak(y: &SequenceSpec, center: &[Coord], phi: &Lscsm, params: &AnalysisParams) -> Result<UFrak> {
    let ev = Evaluator::new(y, params)?;
    let n = ev.horizon;
    let cuts = params.decide_params().cuts_for(n);
    let mut levels = Vec::new();
    for eps in params.schedule.radii() {
        let s = ev.indicator(center, eps)?;
        let e = phi.norm_estimate(&s, n, &cuts, &|_| false)?;
        levels.push(UFrakLevel { eps: *eps, exact: e.exact, numeric: e.numeric });
    }
    let non_increasing = levels.windows(2).all(|w| match (&w[0].exact, &w[1].exact) {
        (Some(a), Some(b)) => b <= a,
        _ => w[1].numeric <= w[0].numeric,
    });
    let last = levels.last().expect("schedule is non-empty");
    Ok(UFrak { exact: last.exact.clone(), numeric: last.numeric.clone(), levels: levels.clone(), non_increasing })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Converges,
    Diverges,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub verdict: Convergence,
    /// From the sets of indices outside each ball.
    pub primary: Convergence,
    /// From the cluster set being exactly the target.
    pub cross_check: Convergence,
    /// Both paths decided and disagree.
    pub disagreement: bool,
    pub levels: Vec<LevelRecord>,
    pub gamma: ClusterReport,
}

pub fn ideal_convergence_check(x: &SequenceSpec, ideal: &dyn Ideal, target: &[Coord], params: &AnalysisParams) -> Result<ConvergenceReport> {
    if target.len() != x.dim {
        return Err(Error::InvalidParameter("target dimension differs from the sequence".into()));
    }
    let ev = Evaluator::new(x, params)?;
    let dp = params.decide_params();
    let mut levels = Vec::new();
    let primary = 'walk: {
        // complements grow as the radius shrinks
        for (i, eps) in params.schedule.radii().iter().rev().enumerate() {
            let outside = NatSet::complement(ev.indicator(target, eps)?)?;
            let d = ideal.decide(&outside, &dp)?;
            levels.push(LevelRecord::from_decision(eps, &d));
            match (i, d.verdict) {
                (0, Membership::In) => break 'walk Convergence::Converges,
                (_, Membership::NotIn) => break 'walk Convergence::Diverges,
                _ => {}
            }
        }
        Convergence::Undecided
    };

    let mut with_target = params.clone();
    with_target.extra_candidates.push(target.to_vec());
    let gamma = gamma_estimate(x, ideal, &with_target)?;
    let eps_min = params.schedule.smallest();
    let mut target_class = Class::Undecided;
    let (mut far_cluster, mut far_open) = (false, false);
    for c in &gamma.candidates {
        if c.point == target {
            target_class = c.class;
        } else if !within(&c.point, target, eps_min) {
            // a cluster ball missing the target holds another cluster point
            far_cluster |= c.class == Class::Cluster;
            far_open |= c.class == Class::Undecided;
        }
    }
    let cross_check = if target_class == Class::NotCluster || far_cluster {
        Convergence::Diverges
    } else if target_class == Class::Cluster && !far_open {
        Convergence::Converges
    } else {
        Convergence::Undecided
    };
    let decided = |c: Convergence| c != Convergence::Undecided;
    let disagreement = decided(primary) && decided(cross_check) && primary != cross_check;
    let verdict = if primary == cross_check { primary } else { Convergence::Undecided };
    Ok(ConvergenceReport { verdict, primary, cross_check, disagreement, levels, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::builtin;
    use crate::sequence::zoo;

    fn c(n: i64) -> Point {
        vec![Coord::from_integer(n)]
    }

    fn small() -> AnalysisParams {
        AnalysisParams { horizon: 1 << 14, ..Default::default() }
    }

    #[test]
    fn limit_points_of_characteristic_sequences() {
        let x = zoo::sequence("char:powers2").unwrap();
        let r = limit_points_estimate(&x, &small()).unwrap();
        assert_eq!(r.clusters(), vec![&c(0), &c(1)]);
        let h = zoo::harmonic();
        let r = limit_points_estimate(&h, &small()).unwrap();
        assert_eq!(r.clusters(), vec![&c(0)]);
    }

    #[test]
    fn gamma_examples() {
        let z = builtin("density-zero").unwrap();
        let x = zoo::sequence("char:powers2").unwrap();
        let r = gamma_estimate(&x, z.as_ref(), &small()).unwrap();
        assert_eq!(r.clusters(), vec![&c(0)]);
        assert_eq!(r.class_of(&c(1)), Some(Class::NotCluster));
        let x = zoo::sequence("char:evens").unwrap();
        let r = gamma_estimate(&x, z.as_ref(), &small()).unwrap();
        assert_eq!(r.clusters(), vec![&c(0), &c(1)]);
    }

    #[test]
    fn lambda_examples() {
        let z = builtin("density-zero").unwrap();
        let quarter = q(1, 4);
        let x = zoo::sequence("char:evens").unwrap();
        assert_eq!(lambda_q_estimate(&x, z.as_ref(), &quarter, &small()).unwrap().clusters(), vec![&c(0), &c(1)]);
        let x = zoo::sequence("char:powers2").unwrap();
        assert_eq!(lambda_q_estimate(&x, z.as_ref(), &quarter, &small()).unwrap().clusters(), vec![&c(0)]);
        let h = zoo::harmonic();
        assert_eq!(lambda_q_estimate(&h, z.as_ref(), &q(1, 1), &small()).unwrap().clusters(), vec![&c(0)]);
        let fxf = builtin("fin-x-fin").unwrap();
        assert!(matches!(lambda_q_estimate(&h, fxf.as_ref(), &quarter, &small()), Err(Error::NotAnalyticP(_))));
    }

    #[test]
    fn u_frak_examples() {
        let p = small();
        let x = zoo::sequence("char:evens").unwrap();
        let u = u_frak(&x, &c(1), &Lscsm::RunningDensity, &p).unwrap();
        assert_eq!(u.exact, Some(q(1, 2)));
        let u = u_frak(&zoo::harmonic(), &c(0), &Lscsm::RunningDensity, &p).unwrap();
        assert_eq!(u.exact, Some(q(1, 1)));
        assert!(u.non_increasing);
    }

    #[test]
    fn convergence_examples() {
        let p = small();
        let z = builtin("density-zero").unwrap();
        let fin = builtin("fin").unwrap();
        let x = zoo::sequence("char:powers2").unwrap();
        let r = ideal_convergence_check(&x, z.as_ref(), &c(0), &p).unwrap();
        assert_eq!((r.primary, r.cross_check), (Convergence::Converges, Convergence::Converges));
        let x = zoo::sequence("char:evens").unwrap();
        assert_eq!(ideal_convergence_check(&x, z.as_ref(), &c(0), &p).unwrap().verdict, Convergence::Diverges);
        let h = zoo::harmonic();
        assert_eq!(ideal_convergence_check(&h, fin.as_ref(), &c(0), &p).unwrap().verdict, Convergence::Converges);
        let x = zoo::sequence("char:powers2").unwrap();
        assert_eq!(ideal_convergence_check(&x, fin.as_ref(), &c(0), &p).unwrap().verdict, Convergence::Diverges);
    }

    #[test]
    fn bitmap_and_symbolic_paths_agree() {
        // a harmonic copy without the interval shortcut
        struct Plain;
        impl super::super::PointGenerator for Plain {
            fn point(&self, n: u64) -> Result<Point> {
                Ok(vec![Coord::new(1, n as i64)])
            }
        }
        let plain = SequenceSpec::from_fn("plain", 1, Coord::from_integer(1), std::sync::Arc::new(Plain), None);
        let h = zoo::harmonic();
        for (cn, cd) in [(0, 1), (1, 3), (1, 2), (1, 1), (-1, 4)] {
            let ctr = vec![Coord::new(cn, cd)];
            for eps in [Coord::new(1, 100), Coord::new(1, 7), dyadic(3)] {
                let a = h.indicator_set(&ctr, &eps, 5000).unwrap().prefix(5000).unwrap();
                let b = plain.indicator_set(&ctr, &eps, 5000).unwrap().prefix(5000).unwrap();
                assert_eq!(a, b, "center {cn}/{cd} eps {eps}");
            }
        }
    }

    #[test]
    fn analysis_chain_holds() {
        let z = builtin("density-zero").unwrap();
        for name in ["char:evens", "char:powers2", "harmonic"] {
            let x = zoo::sequence(name).unwrap();
            let a = analyze(&x, z.as_ref(), &default_q_grid(), &small()).unwrap();
            assert_eq!(a.downgraded(), 0, "{name}");
        }
    }
}

#[cfg(test)]
mod rationals_tests {
    use super::*;
    use crate::ideal::builtin;
    use crate::sequence::zoo;

    #[test]
    fn rationals_fill_the_grid() {
        let x = zoo::rationals();
        let p = AnalysisParams { horizon: 100_000, ..Default::default() };
        let r = limit_points_estimate(&x, &p).unwrap();
        // the tail of the prefix has denominators below 1024, so cells next
        // to 0 and 1 are not visited; every cell is within two pitches of a
        // limit cell
        let found = r.clusters();
        assert_eq!(found.len(), r.candidates.len());
        for i in 0..=1024 {
            let g = vec![Coord::new(i, 1024)];
            assert!(found.iter().any(|f| within(f, &g, &(p.pitch * 2))), "{g:?}");
        }
        // coarser resolution for the density ideal: balls of width 2^-5 clear theta
        let coarse = AnalysisParams { horizon: 100_000, schedule: RadiusSchedule::dyadic(6), pitch: dyadic(6), ..Default::default() };
        let z = builtin("density-zero").unwrap();
        let a = analyze(&x, z.as_ref(), &default_q_grid(), &coarse).unwrap();
        assert_eq!(a.gamma.clusters().len(), 65);
        // balls of radius 1/64 carry density near 1/32, so only the
        // smallest threshold sees them; the end cells only get half a ball
        for i in 1..64 {
            assert_eq!(a.lambda_q[0].class_of(&[Coord::new(i, 64)]), Some(Class::Cluster));
        }
        assert!(a.lambda_q[1..].iter().all(|r| r.clusters().is_empty()));
        assert_eq!(a.downgraded(), 0);
    }
}
