use std::sync::Arc;

use icluster::games::{run_game, Adversary, GameTarget, MapKind, Verdict};
use icluster::ideal::{builtin_with, IdealHandle, IdealRegistry};
use icluster::meager::{build_witness, verify_witness};
use icluster::rational::{fmt_q, q, q_ratio, serde_q, Q};
use icluster::sequence::cluster::{analyze, gamma_estimate, ideal_convergence_check, lambda_q_estimate, limit_points_estimate, Class, ClusterReport};
use icluster::sequence::{fmt_point, zoo, SequenceSpec};
use icluster::transforms::builders::{
    cluster_adding_pi, cluster_adding_sigma, cluster_preserving_pi, cluster_preserving_sigma, BuildParams, FilledBlock,
};
use icluster::transforms::{apply, random_pi, random_sigma, GapLaw, IndexMap};
use icluster::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const HEURISTIC: &str = "HEURISTIC: Monte-Carlo frequencies over random maps. Category is not measure; these numbers say nothing about meagerness or comeagerness.";

/// What a command produced: primary files, a stdout summary and an exit code.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: Value,
    pub code: i32,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    banner: Option<&'static str>,
    result: T,
}

fn envelope<T: Serialize>(cfg: &RunConfig, banner: Option<&'static str>, result: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { config: cfg, seed: cfg.seed, banner, result })?;
    s.push('\n');
    Ok(s)
}

fn setup(cfg: &RunConfig) -> Result<(SequenceSpec, IdealHandle)> {
    cfg.validate()?;
    Ok((zoo::sequence(&cfg.sequence)?, builtin_with(&cfg.ideal, cfg.ideal_params.as_ref())?))
}

fn map_kind(cfg: &RunConfig) -> Result<MapKind> {
    match cfg.kind.as_deref().unwrap_or("sigma") {
        "sigma" => Ok(MapKind::Sigma),
        "pi" => Ok(MapKind::Pi),
        k => Err(Error::InvalidParameter(format!("kind must be sigma or pi, not `{k}`"))),
    }
}

fn points(r: &ClusterReport, class: Class) -> Vec<String> {
    r.with_class(class).into_iter().map(|p| fmt_point(p)).collect()
}

fn label(r: &ClusterReport) -> String {
    serde_json::to_value(&r.mode).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default()
}

fn report_csv(reports: &[&ClusterReport]) -> String {
    let mut out = String::from("set,candidate,eps,exact,numeric,verdict,class\n");
    for r in reports {
        let name = match &r.mode {
            icluster::sequence::cluster::Mode::LambdaQ { q } => format!("lambda-q:{}", fmt_q(q)),
            _ => label(r),
        };
        for line in r.to_csv().lines().skip(1) {
            out.push_str(&format!("{name},{line}\n"));
        }
    }
    out
}

fn undecided_dominated(reports: &[&ClusterReport]) -> bool {
    let total: usize = reports.iter().map(|r| r.candidates.len()).sum();
    let undecided: usize = reports.iter().map(|r| r.with_class(Class::Undecided).len()).sum();
    2 * undecided > total
}

pub fn analyze_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (x, ideal) = setup(cfg)?;
    let params = cfg.analysis();
    let mode = cfg.mode.as_deref().unwrap_or("all");
    let (json, reports): (String, Vec<ClusterReport>) = match mode {
        "all" => {
            let a = analyze(&x, ideal.as_ref(), &cfg.q_grid, &params)?;
            let mut reports = vec![a.limit_points.clone(), a.gamma.clone()];
            reports.extend(a.lambda.clone());
            reports.extend(a.lambda_q.iter().cloned());
            (envelope(cfg, None, &a)?, reports)
        }
        "limit" => {
            let r = limit_points_estimate(&x, &params)?;
            (envelope(cfg, None, &r)?, vec![r])
        }
        "gamma" => {
            let r = gamma_estimate(&x, ideal.as_ref(), &params)?;
            (envelope(cfg, None, &r)?, vec![r])
        }
        "lambda" | "lambda-q" => {
            let grid = match cfg.q_value()? {
                Some(v) => vec![v],
                None if mode == "lambda-q" => return Err(Error::InvalidParameter("--q is required for lambda-q".into())),
                None => cfg.q_grid.clone(),
            };
            let rs = grid.iter().map(|v| lambda_q_estimate(&x, ideal.as_ref(), v, &params)).collect::<Result<Vec<_>>>()?;
            (envelope(cfg, None, &rs)?, rs)
        }
        "convergence" => {
            let target = cfg.require_ell()?;
            let c = ideal_convergence_check(&x, ideal.as_ref(), &target, &params)?;
            let summary = json!({ "verdict": c.verdict, "primary": c.primary, "cross_check": c.cross_check, "gamma": points(&c.gamma, Class::Cluster) });
            let mut csv = String::from("eps,exact,numeric,verdict\n");
            for l in &c.levels {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    icluster::rational::fmt_coord(&l.eps),
                    l.exact.as_ref().map(fmt_q).unwrap_or_default(),
                    l.numeric.as_ref().map(fmt_q).unwrap_or_default(),
                    l.verdict
                ));
            }
            let code = if c.disagreement { 4 } else { 0 };
            return Ok(Outcome { files: vec![("analyze.json".into(), envelope(cfg, None, &c)?), ("analyze.csv".into(), csv)], summary, code });
        }
        m => return Err(Error::InvalidParameter(format!("unknown analyze mode `{m}`"))),
    };
    let refs: Vec<&ClusterReport> = reports.iter().collect();
    let mut summary = serde_json::Map::new();
    for r in &reports {
        let key = match &r.mode {
            icluster::sequence::cluster::Mode::LambdaQ { q } => format!("lambda-q:{}", fmt_q(q)),
            _ => label(r),
        };
        summary.insert(key, json!({ "clusters": points(r, Class::Cluster), "undecided": points(r, Class::Undecided) }));
    }
    let code = if undecided_dominated(&refs) { 2 } else { 0 };
    Ok(Outcome { files: vec![("analyze.json".into(), json), ("analyze.csv".into(), report_csv(&refs))], summary: Value::Object(summary), code })
}

fn witness_q(cfg: &RunConfig) -> Result<Q> {
    Ok(cfg.q_value()?.unwrap_or_else(|| cfg.witness_q.clone()))
}

pub fn witness_build(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let ideal = builtin_with(&cfg.ideal, cfg.ideal_params.as_ref())?;
    let w = build_witness(&ideal, &witness_q(cfg)?, cfg.horizon)?;
    let iota: Vec<u64> = (1..).map_while(|n| w.iota(n)).take_while(|&i| i <= cfg.horizon).take(1024).collect();
    let mut csv = String::from("n,iota\n");
    for (i, v) in iota.iter().enumerate() {
        csv.push_str(&format!("{},{v}\n", i + 1));
    }
    let summary = json!({ "iota_prefix": iota.iter().take(12).collect::<Vec<_>>() });
    Ok(Outcome { files: vec![("witness.json".into(), envelope(cfg, None, &w)?), ("witness.csv".into(), csv)], summary, code: 0 })
}

pub fn witness_verify(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let ideal = builtin_with(&cfg.ideal, cfg.ideal_params.as_ref())?;
    let w = build_witness(&ideal, &witness_q(cfg)?, cfg.horizon)?;
    let r = verify_witness(&ideal, &w, cfg.trials as usize, cfg.horizon, cfg.seed)?;
    let mut csv = String::from("sample,set,verdict,numeric\n");
    for (i, s) in r.samples.iter().enumerate() {
        csv.push_str(&format!("{},\"{}\",{},{}\n", i + 1, s.set, s.verdict, s.numeric.as_ref().map(fmt_q).unwrap_or_default()));
    }
    let summary = json!({
        "pass": r.pass,
        "min_numeric": r.min_numeric.as_ref().map(fmt_q),
        "members_separated": format!("{}/{}", r.members_separated, r.members_checked),
        "cofinite_rejected": format!("{}/{}", r.cofinite_rejected, r.cofinite_checked),
    });
    let code = if r.pass { 0 } else { 4 };
    Ok(Outcome { files: vec![("verify.json".into(), envelope(cfg, None, &r)?), ("verify.csv".into(), csv)], summary, code })
}

fn blocks_csv(blocks: &[FilledBlock]) -> String {
    let mut csv = String::from("block,start,end,target,radius\n");
    for b in blocks {
        csv.push_str(&format!("{},{},{},{},{}\n", b.block, b.start, b.end, b.target, b.radius));
    }
    csv
}

pub fn preserve(cfg: &RunConfig) -> Result<Outcome> {
    let (x, ideal) = setup(cfg)?;
    let params = BuildParams { analysis: cfg.analysis(), witness_q: cfg.witness_q.clone() };
    let adding = match cfg.mode.as_deref().unwrap_or("preserve") {
        "add" => Some(cfg.require_ell()?),
        "preserve" => None,
        m => return Err(Error::InvalidParameter(format!("preserve mode must be add or preserve, not `{m}`"))),
    };
    let i = ideal.as_ref();
    let (map, report, blocks, passed) = match (map_kind(cfg)?, &adding) {
        (MapKind::Sigma, Some(ell)) => {
            let b = cluster_adding_sigma(&x, ell, i, None, &params)?;
            (serde_json::to_string_pretty(&b.map)?, envelope(cfg, None, &b)?, b.blocks.clone(), b.audit.passed())
        }
        (MapKind::Sigma, None) => {
            let b = cluster_preserving_sigma(&x, i, None, None, &params)?;
            (serde_json::to_string_pretty(&b.map)?, envelope(cfg, None, &b)?, b.blocks.clone(), b.audit.passed())
        }
        (MapKind::Pi, Some(ell)) => {
            let b = cluster_adding_pi(&x, ell, i, None, &params)?;
            (serde_json::to_string_pretty(&b.map)?, envelope(cfg, None, &b)?, b.blocks.clone(), b.audit.passed())
        }
        (MapKind::Pi, None) => {
            let b = cluster_preserving_pi(&x, i, None, None, &params)?;
            (serde_json::to_string_pretty(&b.map)?, envelope(cfg, None, &b)?, b.blocks.clone(), b.audit.passed())
        }
    };
    let summary = json!({ "audit": if passed { "PASS" } else { "FAIL" }, "blocks": blocks.len() });
    Ok(Outcome {
        files: vec![("map.json".into(), map + "\n"), ("preserve.json".into(), report), ("preserve.csv".into(), blocks_csv(&blocks))],
        summary,
        code: if passed { 0 } else { 4 },
    })
}

pub fn game(cfg: &RunConfig) -> Result<Outcome> {
    let (x, ideal) = setup(cfg)?;
    let target = GameTarget {
        ell: cfg.require_ell()?,
        q: cfg.q_value()?.unwrap_or_else(|| q(1, 4)),
        schedule: cfg.schedule.clone(),
    };
    let r = run_game(&x, ideal.as_ref(), map_kind(cfg)?, &target, &Adversary::new(cfg.seed), cfg.rounds, cfg.horizon)?;
    let mut csv = String::from("round,player,start,length,radius\n");
    for m in &r.transcript {
        let player = serde_json::to_value(m.player)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            m.round,
            player.as_str().unwrap_or_default(),
            m.start,
            m.values.len(),
            m.certificate.as_ref().map(|c| c.k.to_string()).unwrap_or_default()
        ));
    }
    let code = match r.verdict {
        Verdict::Loss { .. } => 3,
        _ => 0,
    };
    let summary = json!({ "verdict": r.verdict, "radii_reached": r.radii_reached });
    Ok(Outcome { files: vec![("game.json".into(), envelope(cfg, None, &r)?), ("game.csv".into(), csv)], summary, code })
}

#[derive(Serialize)]
struct SampleRow {
    seed: u64,
    clusters: Vec<String>,
    undecided: usize,
    preserved: bool,
}

#[derive(Serialize)]
struct SampleReport {
    kind: MapKind,
    map_length: u64,
    source_clusters: Vec<String>,
    trials: u64,
    preserved: u64,
    #[serde(with = "serde_q")]
    frequency: Q,
    samples: Vec<SampleRow>,
}

/// Random maps get their own seeds, derived from the run seed by index.
pub fn sample(cfg: &RunConfig) -> Result<Outcome> {
    let (x, ideal) = setup(cfg)?;
    let params = cfg.analysis();
    let kind = map_kind(cfg)?;
    let source = points(&gamma_estimate(&x, ideal.as_ref(), &params)?, Class::Cluster);
    let len = cfg.horizon;
    let law = GapLaw::Geometric { p: q(1, 2) };
    let mut samples = Vec::new();
    for t in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(t);
        let map: Arc<dyn IndexMap> = match kind {
            MapKind::Sigma => Arc::new(random_sigma(seed, &law, len as usize)?),
            MapKind::Pi => Arc::new(random_pi(seed, 16, len)?),
        };
        let y = apply(map, &x)?;
        let g = gamma_estimate(&y, ideal.as_ref(), &params)?;
        let clusters = points(&g, Class::Cluster);
        let undecided = g.with_class(Class::Undecided).len();
        samples.push(SampleRow { seed, preserved: undecided == 0 && clusters == source, clusters, undecided });
    }
    let preserved = samples.iter().filter(|s| s.preserved).count() as u64;
    let report = SampleReport {
        kind,
        map_length: len,
        source_clusters: source,
        trials: cfg.trials,
        preserved,
        frequency: q_ratio(preserved, cfg.trials),
        samples,
    };
    let mut csv = format!("# {HEURISTIC}\nseed,preserved,undecided,clusters\n");
    for s in &report.samples {
        csv.push_str(&format!("{},{},{},\"{}\"\n", s.seed, s.preserved, s.undecided, s.clusters.join(" ")));
    }
    let summary = json!({ "banner": HEURISTIC, "frequency": fmt_q(&report.frequency) });
    Ok(Outcome { files: vec![("sample.json".into(), envelope(cfg, Some(HEURISTIC), &report)?), ("sample.csv".into(), csv)], summary, code: 0 })
}

pub fn ideals(cfg: &RunConfig) -> Result<Outcome> {
    let list = IdealRegistry::builtins().list()?;
    let mut csv = String::from("name,aliases,lscsm,analytic_p,witness_rule\n");
    for i in &list {
        csv.push_str(&format!("{},{},{},{},\"{}\"\n", i.name, i.aliases.join(" "), i.lscsm.unwrap_or(""), i.analytic_p, i.witness_rule));
    }
    let summary = json!(list.iter().map(|i| i.name.clone()).collect::<Vec<_>>());
    Ok(Outcome { files: vec![("ideals.json".into(), envelope(cfg, None, &list)?), ("ideals.csv".into(), csv)], summary, code: 0 })
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotRepresentable(_)
        | Error::NotAnalyticP(_)
        | Error::ExhaustedA { .. }
        | Error::NotALimitPoint(_)
        | Error::HypothesisFailed(_)
        | Error::MassUnavailable { .. }
        | Error::SupplyExhausted { .. }
        | Error::BlockSearchExceeded { .. } => 3,
        Error::WitnessRefuted(_) | Error::InvalidMap(_) | Error::BijectivityOverflow { .. } => 4,
        _ => 1,
    }
}
