//! End-to-end acceptance run. One line per criterion; exits nonzero on any failure.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use icluster::games::{run_game, Adversary, GameTarget, MapKind, Verdict};
use icluster::ideal::{builtin, IdealRegistry, Membership};
use icluster::meager::{build_witness, fk_holds, separating_k, verify_witness};
use icluster::rational::{dyadic, q, q_ratio, Coord, Q};
use icluster::sequence::cluster::{
    analyze, gamma_estimate, ideal_convergence_check, limit_points_estimate, AnalysisParams, Class, ClusterReport, Convergence,
    RadiusSchedule,
};
use icluster::sequence::{fmt_point, zoo, FiniteAlphabet, SequenceSpec};
use icluster::submeasure::{BlockLaw, Lscsm, WeightLaw};
use icluster::transforms::builders::{cluster_adding_sigma, cluster_preserving_pi, cluster_preserving_sigma, BuildParams};
use icluster::transforms::{apply, generic_subsequence, limit_witness_extraction, SubsequenceMap};
use icluster::{BlockSelector, Error, NatSet, Tri};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    format!("{}: {e}", e.kind())
}

fn within_time(start: Instant, limit: Duration, detail: String) -> Check {
    let t = start.elapsed();
    ensure(t < limit, || format!("{detail}; took {t:.1?}, limit {limit:?}"))?;
    Ok(format!("{detail}; {t:.1?}"))
}

fn clusters(r: &ClusterReport) -> BTreeSet<String> {
    r.with_class(Class::Cluster).into_iter().map(|p| fmt_point(p)).collect()
}

fn undecided(r: &ClusterReport) -> usize {
    r.with_class(Class::Undecided).len()
}

/// `sup_n |A ∩ [1,n]| / n`, attained at a member.
fn running_density(sorted: &[u64]) -> Q {
    sorted.iter().enumerate().map(|(i, &m)| q_ratio(i as u64 + 1, m)).max().unwrap_or_default()
}

fn power_of_two(n: u64) -> bool {
    n != 0 && n & (n - 1) == 0
}

fn c1_submeasure_axioms() -> Check {
    let start = Instant::now();
    let variants = vec![
        Lscsm::RunningDensity,
        Lscsm::CountingCap,
        Lscsm::density_family(BlockLaw::Dyadic, vec![q(1, 2), q(1, 3)], q(1, 1)).map_err(err)?,
        Lscsm::weighted_sum(WeightLaw::Harmonic, q(1, 1)).map_err(err)?,
        Lscsm::weighted_sum(WeightLaw::InversePower { p: 2 }, q(1, 1)).map_err(err)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        let hi = rng.gen_range(2..600);
        let mut v: Vec<u64> = (0..rng.gen_range(0..30)).map(|_| rng.gen_range(1..hi)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut checked = 0;
    for m in &variants {
        for _ in 0..1000 {
            let (a, b) = (set(&mut rng), set(&mut rng));
            let mut u: Vec<u64> = a.iter().chain(&b).copied().collect();
            u.sort_unstable();
            u.dedup();
            let meet: Vec<u64> = a.iter().copied().filter(|n| b.binary_search(n).is_ok()).collect();
            let (fa, fb, fu, fm) = (m.phi_exact_members(&a), m.phi_exact_members(&b), m.phi_exact_members(&u), m.phi_exact_members(&meet));
            ensure(fa <= fu && fb <= fu && fm <= fa, || format!("{} not monotone on {a:?} {b:?}", m.variant_name()))?;
            ensure(fu <= &fa + &fb, || format!("{} not subadditive on {a:?} {b:?}", m.variant_name()))?;
            ensure(m.phi_exact_members(&[]) == Q::default(), || format!("{} nonzero on the empty set", m.variant_name()))?;
            checked += 1;
        }
    }
    within_time(start, Duration::from_secs(10), format!("{checked} pairs over {} variants", variants.len()))
}

fn suite() -> Result<Vec<SequenceSpec>, String> {
    let mod3 = |r: u64| NatSet::progression(if r == 0 { 3 } else { r }, 3);
    let three = FiniteAlphabet::new(
        vec![vec![Coord::from_integer(0)], vec![Coord::new(1, 2)], vec![Coord::from_integer(1)]],
        vec![mod3(0).map_err(err)?, mod3(1).map_err(err)?, mod3(2).map_err(err)?],
    )
    .map_err(err)?;
    let sparse = NatSet::powers_of(3).map_err(err)?;
    let dense = NatSet::complement(sparse.clone()).map_err(err)?;
    let rare = FiniteAlphabet::new(vec![vec![Coord::new(1, 4)], vec![Coord::new(3, 4)]], vec![dense, sparse]).map_err(err)?;
    let mut out = ["char:evens", "char:odds", "char:powers2", "harmonic", "const:1/2"]
        .iter()
        .map(|n| zoo::sequence(n).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(SequenceSpec::from_alphabet("mod3", three).map_err(err)?);
    out.push(SequenceSpec::from_alphabet("powers-of-3", rare).map_err(err)?);
    Ok(out)
}

fn c2_inclusion_chain() -> Check {
    let params = AnalysisParams { horizon: 1 << 16, ..Default::default() };
    let grid = [q(1, 8), q(1, 4), q(1, 2)];
    let mut runs = 0;
    for x in suite()? {
        for name in ["fin", "density-zero", "summable"] {
            let ideal = builtin(name).map_err(err)?;
            let a = analyze(&x, ideal.as_ref(), &grid, &params).map_err(err)?;
            let tag = format!("{} under {name}", x.name);
            let (l, g) = (clusters(&a.limit_points), clusters(&a.gamma));
            let lam = a.lambda.as_ref().map(clusters).ok_or_else(|| format!("{tag}: no lambda report"))?;
            ensure(g.is_subset(&l), || format!("{tag}: gamma {g:?} not in limit points {l:?}"))?;
            ensure(lam.is_subset(&g), || format!("{tag}: lambda {lam:?} not in gamma {g:?}"))?;
            for r in &a.lambda_q {
                let lq = clusters(r);
                ensure(lq.is_subset(&lam), || format!("{tag}: lambda-q {lq:?} not in lambda {lam:?}"))?;
            }
            if x.alphabet.is_some() {
                ensure(a.downgraded() == 0, || format!("{tag}: {} levels left the exact path", a.downgraded()))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} sequence/ideal pairs, no violations"))
}

fn c3_fin_gamma_is_limit_points() -> Check {
    let params = AnalysisParams { horizon: 1 << 16, ..Default::default() };
    let fin = builtin("fin").map_err(err)?;
    let mut n = 0;
    for x in suite()? {
        let g = gamma_estimate(&x, fin.as_ref(), &params).map_err(err)?;
        let l = limit_points_estimate(&x, &params).map_err(err)?;
        ensure(undecided(&g) == 0 && undecided(&l) == 0, || format!("{}: undecided candidates", x.name))?;
        for c in &g.candidates {
            ensure(l.class_of(&c.point) == Some(c.class), || format!("{}: {} differs", x.name, fmt_point(&c.point)))?;
        }
        ensure(g.candidates.len() == l.candidates.len(), || format!("{}: candidate lists differ", x.name))?;
        n += 1;
    }
    Ok(format!("{n} suite members agree"))
}

fn c4_witness_validity() -> Check {
    let start = Instant::now();
    let z = builtin("density-zero").map_err(err)?;
    let h = 1 << 20;
    let w = build_witness(&z, &q(1, 2), h).map_err(err)?;
    for n in 1..=20u64 {
        ensure(w.iota(n) == Some(1 << n), || format!("density-zero iota_{n} = {:?}", w.iota(n)))?;
    }
    let r = verify_witness(&z, &w, 100, h, 2024).map_err(err)?;
    let floor = q(9, 20);
    for s in &r.samples {
        ensure(s.verdict == Membership::NotIn, || format!("sample {} decided {}", s.set, s.verdict))?;
        ensure(s.numeric.as_ref().is_some_and(|v| *v >= floor), || format!("sample {} numeric {:?} below 0.45", s.set, s.numeric))?;
    }
    ensure(r.samples.len() == 100, || "fewer than 100 samples".into())?;

    let fxf = builtin("fin-x-fin").map_err(err)?;
    let w = build_witness(&fxf, &q(1, 2), 100_000).map_err(err)?;
    let mut iota = w.iota(1).ok_or("no first fin-x-fin endpoint")?;
    for n in 1..14u64 {
        let next = w.iota(n + 1).ok_or("fin-x-fin endpoints end early")?;
        ensure(next == iota + (2 << n), || format!("fin-x-fin iota_{} = {next}", n + 1))?;
        iota = next;
    }
    let r = verify_witness(&fxf, &w, 100, 100_000, 2024).map_err(err)?;
    for s in &r.samples {
        ensure(s.verdict == Membership::NotIn, || format!("fin-x-fin sample {} decided {}", s.set, s.verdict))?;
        ensure(s.row_hits.len() == 11 && s.row_hits.iter().all(|&c| c > 0), || format!("fin-x-fin sample {} misses a row", s.set))?;
    }
    within_time(start, Duration::from_secs(30), "100 + 100 block unions NotIn, numeric >= 9/20, rows 0..=10 hit".into())
}

/// Singleton blocks make `F_k` the subsets of `[1, k)`, so fin members with
/// `k <= 20` live below 20.
fn member(name: &str, rng: &mut ChaCha8Rng) -> Result<NatSet, Error> {
    let top = if name == "fin" { 20 } else { 5000 };
    let noise = NatSet::finite((0..rng.gen_range(0..15)).map(|_| rng.gen_range(1..top)))?;
    let shape = match (name, rng.gen_range(0..3)) {
        ("fin", _) | (_, 0) => return Ok(noise),
        ("fin-x-fin", 1) => {
            let r = rng.gen_range(0..4);
            NatSet::progression(1 << r, 2 << r)?
        }
        ("fin-x-fin", _) => NatSet::union(NatSet::progression(1, 2)?, NatSet::powers_of(2)?)?,
        (_, 1) => NatSet::powers_of(rng.gen_range(2..8))?,
        _ => NatSet::intersection(NatSet::powers_of(rng.gen_range(2..5))?, NatSet::progression(1, rng.gen_range(1..4))?)?,
    };
    NatSet::union(shape, noise)
}

fn c5_fsigma_separation() -> Check {
    let h = 1 << 16;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let names = IdealRegistry::builtins().names();
    let mut worst = 0;
    for name in &names {
        let ideal = builtin(name).map_err(err)?;
        let w = build_witness(&ideal, &q(1, 2), h).map_err(err)?;
        for _ in 0..100 {
            let s = member(name, &mut rng).map_err(err)?;
            let k = separating_k(&w, &s, 20, h).map_err(err)?.ok_or_else(|| format!("{name}: member {s} in no F_k"))?;
            worst = worst.max(k);
        }
        for _ in 0..20 {
            let s = NatSet::cofinite((0..rng.gen_range(0..12)).map(|_| rng.gen_range(1..2000))).map_err(err)?;
            for k in 1..=20 {
                ensure(fk_holds(&w, &s, k, h).map_err(err)? != Tri::True, || format!("{name}: cofinite {s} in F_{k}"))?;
            }
        }
    }
    Ok(format!("{} ideals x 100 members, largest k {worst}; cofinite samples rejected", names.len()))
}

fn c6_generic_subsequence() -> Check {
    let h = 1 << 16;
    let a = NatSet::powers_of(2).map_err(err)?;
    let w = builtin("density-zero").map_err(err)?.build_witness(&q(1, 2), h).map_err(err)?;
    let mut checked = 0;
    for sel in [NatSet::progression(1, 1), NatSet::progression(1, 2), NatSet::progression(2, 3)] {
        let sel = BlockSelector::IndexSet(sel.map_err(err)?);
        let b = generic_subsequence(&a, &w, &sel, h).map_err(err)?;
        ensure(b.audit.block_failures.is_empty(), || format!("audit failures {:?}", b.audit.block_failures))?;
        ensure(!b.blocks.is_empty(), || "no block filled".into())?;
        for blk in &b.blocks {
            ensure(sel.selects(blk.block) == Tri::True, || format!("block {} not selected", blk.block))?;
            for n in blk.start..blk.end {
                let v = b.map.table()[n as usize - 1];
                ensure(power_of_two(v), || format!("position {n} maps to {v}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} positions in selected blocks map into A"))
}

fn c7_preservation() -> Check {
    let evens = zoo::sequence("char:evens").map_err(err)?;
    let z = builtin("density-zero").map_err(err)?;
    let base = BuildParams { analysis: AnalysisParams { horizon: 1 << 16, ..Default::default() }, ..Default::default() };
    let source_report = gamma_estimate(&evens, z.as_ref(), &base.analysis).map_err(err)?;
    let source = clusters(&source_report);
    let s = cluster_preserving_sigma(&evens, z.as_ref(), None, None, &base).map_err(err)?;
    ensure(s.audit.passed(), || format!("evens sigma audit {:?}", s.audit.preservation))?;
    let p = cluster_preserving_pi(&evens, z.as_ref(), None, None, &base).map_err(err)?;
    ensure(p.audit.passed(), || format!("evens pi audit {:?}", p.audit.preservation))?;
    // recompute on the new sequence itself
    let y = apply(Arc::new(s.map.clone()), &evens).map_err(err)?;
    // the last dyadic block fills half the prefix, so classify every source point explicitly
    let extra = source_report.clusters().into_iter().cloned().collect();
    let yp = AnalysisParams { horizon: s.map.table().len() as u64, extra_candidates: extra, ..base.analysis.clone() };
    let got = clusters(&gamma_estimate(&y, z.as_ref(), &yp).map_err(err)?);
    ensure(got == source, || format!("evens: sigma image has {got:?}, source {source:?}"))?;

    let rationals = zoo::rationals();
    let coarse = BuildParams {
        analysis: AnalysisParams { horizon: 100_000, schedule: RadiusSchedule::dyadic(6), pitch: dyadic(6), ..Default::default() },
        witness_q: q(1, 64),
    };
    let s = cluster_preserving_sigma(&rationals, z.as_ref(), None, None, &coarse).map_err(err)?;
    ensure(s.audit.passed(), || format!("rationals sigma audit {:?}", s.audit.preservation))?;
    let p = cluster_preserving_pi(&rationals, z.as_ref(), None, None, &coarse).map_err(err)?;
    ensure(p.audit.passed(), || format!("rationals pi audit {:?}", p.audit.preservation))?;
    let cells = s.audit.preservation.as_ref().map_or(0, |v| v.covered.len());

    let powers = zoo::sequence("char:powers2").map_err(err)?;
    let one = vec![Coord::from_integer(1)];
    let add = cluster_adding_sigma(&powers, &one, z.as_ref(), None, &base).map_err(err)?;
    ensure(add.audit.passed(), || "adding sigma audit failed".into())?;
    for c in &add.audit.certificates {
        ensure(c.exact.as_ref().is_some_and(|e| *e >= q(1, 4)), || format!("certificate at {} has exact {:?}", c.eps, c.exact))?;
    }
    let table = add.map.table();
    let hits: Vec<u64> = (1..=table.len() as u64).filter(|&n| power_of_two(table[n as usize - 1])).collect();
    for blk in &add.blocks {
        let upto = hits.iter().filter(|&&n| n < blk.end).count() as u64;
        ensure(q_ratio(upto, blk.end - 1) >= q(1, 4), || format!("preimage density {upto}/{} at block {}", blk.end - 1, blk.block))?;
    }
    match cluster_preserving_sigma(&powers, z.as_ref(), None, None, &base) {
        Err(Error::HypothesisFailed(_)) => {}
        other => return Err(format!("powers of two preserving: expected HypothesisFailed, got {:?}", other.map(|b| b.audit.passed()))),
    }
    Ok(format!("evens and rationals ({cells} cells) preserved by sigma and pi; 1 added for powers of two; preserving refused"))
}

fn c8_extraction() -> Check {
    let x = zoo::sequence("char:evens").map_err(err)?;
    let ell = [Coord::from_integer(1)];
    let quarter = q(1, 4);
    let params = AnalysisParams::default();
    let (tau, cert) =
        limit_witness_extraction(&x, Arc::new(SubsequenceMap::identity()), &ell, &quarter, &Lscsm::RunningDensity, &params).map_err(err)?;
    ensure(cert.valid(), || "certificate reports itself invalid".into())?;
    let mut prev_max = 0;
    for (k, b) in cert.blocks.iter().enumerate() {
        ensure(running_density(&b.members) >= quarter, || format!("block {k} density below 1/4"))?;
        ensure(b.members[0] > prev_max, || format!("block {k} overlaps its predecessor"))?;
        for &n in &b.members {
            // x_n is 1 exactly on evens, so every even index sits at distance 0
            ensure(n % 2 == 0 && Coord::from_integer(0) <= b.eps, || format!("member {n} outside its ball"))?;
        }
        prev_max = *b.members.last().unwrap();
    }
    let table = tau.table();
    let mut floor = 0;
    for b in &cert.blocks {
        let rest: Vec<u64> = table.iter().copied().filter(|&n| n > floor && n % 2 == 0).collect();
        ensure(running_density(&rest) >= quarter, || format!("recomputed mass past {floor} below 1/4"))?;
        floor = *b.members.last().unwrap();
    }
    Ok(format!("{} blocks, each of mass >= 1/4, separated and inside their balls", cert.blocks.len()))
}

fn c9_convergence() -> Check {
    let params = AnalysisParams { horizon: 1 << 16, ..Default::default() };
    let z = builtin("density-zero").map_err(err)?;
    let zero = [Coord::from_integer(0)];
    let powers = zoo::sequence("char:powers2").map_err(err)?;
    let c = ideal_convergence_check(&powers, z.as_ref(), &zero, &params).map_err(err)?;
    ensure(c.primary == Convergence::Converges && c.cross_check == Convergence::Converges, || {
        format!("powers of two: paths {:?} / {:?}", c.primary, c.cross_check)
    })?;
    let g = clusters(&gamma_estimate(&powers, z.as_ref(), &params).map_err(err)?);
    ensure(g == BTreeSet::from(["0".to_string()]), || format!("powers of two gamma {g:?}"))?;
    let l = clusters(&limit_points_estimate(&powers, &params).map_err(err)?);
    ensure(l.len() == 2, || format!("powers of two limit points {l:?}"))?;
    let add = cluster_adding_sigma(&powers, &[Coord::from_integer(1)], z.as_ref(), None, &BuildParams { analysis: params.clone(), ..Default::default() })
        .map_err(err)?;
    ensure(add.audit.passed(), || "cluster-adding sigma failed its audit".into())?;
    for name in ["fin", "density-zero"] {
        let ideal = builtin(name).map_err(err)?;
        let c = ideal_convergence_check(&zoo::harmonic(), ideal.as_ref(), &zero, &params).map_err(err)?;
        ensure(c.verdict == Convergence::Converges && !c.disagreement, || format!("harmonic under {name}: {:?}", c.verdict))?;
    }
    Ok("powers of two converge to 0 under Z on both paths, not ordinarily; harmonic converges under fin and Z".into())
}

fn c10_games() -> Check {
    let start = Instant::now();
    let z = builtin("density-zero").map_err(err)?;
    let evens = zoo::sequence("char:evens").map_err(err)?;
    let powers = zoo::sequence("char:powers2").map_err(err)?;
    let target = |ell: i64| GameTarget { ell: vec![Coord::from_integer(ell)], q: q(1, 4), schedule: RadiusSchedule::default() };
    let (mut wins, mut losses) = (0, 0);
    for seed in 0..100 {
        for ell in [0, 1] {
            let kind = if seed % 2 == 0 { MapKind::Sigma } else { MapKind::Pi };
            let g = run_game(&evens, z.as_ref(), kind, &target(ell), &Adversary::new(seed), 20, 100_000).map_err(err)?;
            ensure(g.verdict == Verdict::Win, || format!("seed {seed}, ell {ell}: {:?}", g.verdict))?;
            wins += 1;
        }
        let g = run_game(&powers, z.as_ref(), MapKind::Sigma, &target(1), &Adversary::new(seed), 20, 100_000).map_err(err)?;
        ensure(matches!(&g.verdict, Verdict::Loss { error, .. } if error == "SupplyExhausted"), || format!("powers seed {seed}: {:?}", g.verdict))?;
        losses += 1;
    }
    within_time(start, Duration::from_secs(60), format!("{wins}/200 wins on evens, {losses}/100 SupplyExhausted on powers of two"))
}

fn c11_reproducibility() -> Check {
    let runs: [&[&str]; 9] = [
        &["analyze", "--seq", "char:powers2", "--ideal", "density-zero", "--horizon", "65536"],
        &["analyze", "--seq", "harmonic", "--ideal", "fin", "--mode", "convergence", "--ell", "0", "--horizon", "65536"],
        &["witness", "build", "--ideal", "density-zero", "--q", "1/2"],
        &["witness", "verify", "--ideal", "summable", "--horizon", "65536", "--trials", "10", "--seed", "9"],
        &["preserve", "sigma", "--seq", "char:evens", "--mode", "preserve", "--horizon", "65536"],
        &["preserve", "pi", "--seq", "char:powers2", "--mode", "add", "--ell", "1", "--horizon", "65536"],
        &["game", "run", "--seq", "char:evens", "--ell", "1", "--q", "1/4", "--rounds", "20", "--seed", "7", "--horizon", "100000"],
        &["sample", "--seq", "char:evens", "--horizon", "4096", "--trials", "10", "--seed", "3", "--kind", "pi"],
        &["ideals", "list"],
    ];
    let bin = env!("CARGO_BIN_EXE_icluster");
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut files = 0;
    for args in runs {
        for d in &dirs {
            let o = Command::new(bin).args(args).args(["--out-dir", "out"]).current_dir(d.path()).output().map_err(|e| e.to_string())?;
            ensure(o.status.code() == Some(0), || format!("{args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))?;
        }
        let out = |d: &Path| d.join("out");
        for entry in std::fs::read_dir(out(dirs[0].path())).map_err(|e| e.to_string())? {
            let name = entry.map_err(|e| e.to_string())?.file_name();
            if name.to_string_lossy().ends_with(".meta.json") {
                continue;
            }
            let a = std::fs::read(out(dirs[0].path()).join(&name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(out(dirs[1].path()).join(&name)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{args:?}: {} differs between reruns", name.to_string_lossy()))?;
            files += 1;
        }
    }
    Ok(format!("{} commands, {files} primary files byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("submeasure axioms", c1_submeasure_axioms),
        ("inclusion chain", c2_inclusion_chain),
        ("fin cluster points equal limit points", c3_fin_gamma_is_limit_points),
        ("witness validity", c4_witness_validity),
        ("F-sigma separation", c5_fsigma_separation),
        ("generic subsequence", c6_generic_subsequence),
        ("preserving and adding maps", c7_preservation),
        ("greedy limit witness", c8_extraction),
        ("convergence cross-check", c9_convergence),
        ("game harness", c10_games),
        ("reproducibility", c11_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.1?}]", i + 1, t.elapsed()),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} [{:.1?}]", i + 1, t.elapsed());
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
