//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use brickgen_core::builder::{build_model, has_tag_iri, timeseries_predicate, BuildInput, Module, ModuleToggles};
use brickgen_core::extract::{tokenize_all, SemiLayout};
use brickgen_core::fixtures;
use brickgen_core::ingest::{parse_timeseries_str, PointList};
use brickgen_core::matcher::{jaccard, match_corpus, MatchConfig, Score};
use brickgen_core::pipeline::{self, Resources};
use brickgen_core::rdf::{parse_turtle, serialize_turtle, Graph, Iri, Literal, Term, Triple, XSD};
use brickgen_core::store::{Project, ProjectConfig, LAYOUT, MODEL};
use brickgen_core::validate::{validate, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ftc_project(dir: &std::path::Path) -> Result<(Project, Resources), String> {
    let p = Project::init(dir, ProjectConfig::new("ftc", fixtures::ftc_build_config())).map_err(|e| e.to_string())?;
    let res = Resources::load(&p).map_err(|e| e.to_string())?;
    let samples = parse_timeseries_str(fixtures::FTC_TIMESERIES_CSV).map_err(|e| e.to_string())?;
    pipeline::run_all(&p, &res, Some((&fixtures::ftc_pointlist(), &samples))).map_err(|e| e.to_string())?;
    Ok((p, res))
}

fn ftc_iri(local: &str) -> Iri {
    Iri::new(format!("{}{local}", fixtures::FTC_BASE)).expect("valid")
}

fn reference_labels() -> Check {
    let expected = [
        ("SDF_65_Zone_Average_Temp", "Average_Zone_Air_Temperature_Sensor"),
        ("SDF1_People number", "Occupancy_Count_Sensor"),
        ("AHU_67_Indoor_Humi", "Humidity_Sensor"),
        ("SDF_3_WP_Sensor_Illuminance", "Illuminance_Sensor"),
        ("VAV_6_F_Audience_Area", "Auditorium"),
        ("Reserve_AV", "No Match"),
    ];
    let start = Instant::now();
    let list = fixtures::ftc_pointlist();
    let rows: Vec<_> = list.points.into_iter().filter(|p| p.code.starts_with("20.01.001.")).collect();
    let tax = fixtures::taxonomy();
    let pts = tokenize_all(&rows, &fixtures::dictionary(), &fixtures::abbreviations(), &fixtures::registry());
    let (results, _) = match_corpus(&pts, &tax, MatchConfig::default());
    let elapsed = start.elapsed();
    ensure(rows.len() == expected.len(), || format!("{} reference rows in fixture", rows.len()))?;
    for ((raw, r), (label, class)) in rows.iter().zip(&results).zip(expected) {
        ensure(raw.name == label, || format!("fixture row {:?} != {label:?}", raw.name))?;
        let got = r.best.as_deref().unwrap_or("No Match");
        ensure(got == class, || format!("{label}: got {got}, expected {class}"))?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("6/6 labels exact, {elapsed:.2?}"))
}

fn brute_force(a: &[u32], b: &[u32]) -> Score {
    let mut universe: Vec<u32> = a.iter().chain(b).copied().collect();
    universe.sort_unstable();
    universe.dedup();
    let inter = universe.iter().filter(|x| a.contains(x) && b.contains(x)).count() as u64;
    if universe.is_empty() {
        Score::ZERO
    } else {
        Score::new(inter, universe.len() as u64)
    }
}

fn jaccard_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let gen = |rng: &mut ChaCha8Rng| -> Vec<u32> {
            let n = rng.gen_range(0..10);
            (0..n).map(|_| rng.gen_range(0..15)).collect()
        };
        let (a, b) = (gen(&mut rng), gen(&mut rng));
        let sa: BTreeSet<u32> = a.iter().copied().collect();
        let sb: BTreeSet<u32> = b.iter().copied().collect();
        let fast = jaccard(&sa, &sb);
        let slow = brute_force(&a, &b);
        ensure(fast == slow, || format!("pair {i}: {a:?} {b:?}: {fast:?} != {slow:?}"))?;
    }
    Ok("1000 random pairs equal as rationals".into())
}

fn locker_block() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (p, res) = ftc_project(tmp.path())?;
    let ttl = p.read_text(MODEL).map_err(|e| e.to_string())?;
    let g = parse_turtle(&ttl).map_err(|e| e.to_string())?;
    let tax = &res.taxonomy;
    let s = Iri::new(fixtures::LOCKER_POINT).expect("valid");
    let types = g.types_of(&s).count();
    let tags = g.objects(&s, &has_tag_iri(tax)).count();
    let ids: Vec<&Term> = g.objects(&s, &timeseries_predicate()).collect();
    ensure(types == 4, || format!("{types} types"))?;
    ensure(tags == 4, || format!("{tags} tags"))?;
    ensure(ids.len() == 1, || format!("{} timeseries ids", ids.len()))?;
    let Term::Literal(id) = ids[0] else {
        return Err("timeseries id is not a literal".into());
    };
    ensure(
        !id.lexical.is_empty() && id.lexical.len() <= 39 && id.lexical.bytes().all(|b| b.is_ascii_digit()),
        || format!("bad id {:?}", id.lexical),
    )?;
    ensure(ttl.contains("ftc103:10F_536_Locker_Room_in_library_On_Off_Status a brick:On_Off_Status"), || {
        "locker block not serialized under the ftc103 prefix".into()
    })?;
    let golden = parse_turtle(fixtures::GOLDEN_LOCKER_TTL).map_err(|e| e.to_string())?;
    let preds: BTreeSet<Iri> = [Iri::rdf_type(), has_tag_iri(tax), timeseries_predicate()].into();
    let actual: BTreeSet<Triple> = g
        .iter()
        .filter(|t| t.subject == s && preds.contains(&t.predicate))
        .collect();
    ensure(actual == golden.triples(), || {
        format!("subgraph differs from golden: {actual:#?}")
    })?;
    Ok("4 types, 4 tags, 1 id; golden subgraph equal".into())
}

fn relations() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (p, res) = ftc_project(tmp.path())?;
    let g = p.graph().map_err(|e| e.to_string())?;
    let tax = &res.taxonomy;
    let feeds = tax.relation_iri("feeds");
    let has_point = tax.relation_iri("hasPoint");
    let link = |s: &str, rel: &Iri, o: &str| g.contains(&Triple::new(ftc_iri(s), rel.clone(), Term::Iri(ftc_iri(o))));

    let units = ["CAV_635", "SDF_223", "SDF_445", "SDF_154", "SDF_137", "SDF_488", "SDF_987", "SDF_234", "SDF_128", "SDF_444"];
    for u in units {
        ensure(link("AC_977", &feeds, u), || format!("AC_977 does not feed {u}"))?;
    }
    let list = fixtures::ftc_pointlist();
    let ac600: Vec<&str> = list
        .points
        .iter()
        .filter(|p| p.code.starts_with("40.60.") && p.name.contains("AC_600"))
        .map(|p| p.name.as_str())
        .collect();
    ensure(ac600.len() == 11, || format!("{} AC_600 points in fixture", ac600.len()))?;
    for name in &ac600 {
        ensure(link("AC_600", &has_point, name), || format!("AC_600 lacks hasPoint {name}"))?;
    }
    ensure(link("SDF_102_7", &has_point, "SDF_102_7_SP_Value"), || "SDF_102_7 lacks its SP value".into())?;

    let mut checked = 0;
    for t in g.iter() {
        let Some(rel) = tax.relation_of_iri(&t.predicate) else { continue };
        let Ok(inv) = tax.relation_inverse(rel) else { continue };
        let Term::Iri(o) = &t.object else { continue };
        let back = Triple::new(o.clone(), tax.relation_iri(inv), Term::Iri(t.subject.clone()));
        ensure(g.contains(&back), || format!("missing inverse of {t:?}"))?;
        checked += 1;
    }
    Ok(format!("10 feeds, {} AC_600 points, SDF_102_7 ok; {checked} relation triples inverse-closed", ac600.len()))
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    const LOCALS: [&str; 10] = ["a", "Zone_1", "x-y", "1abc", "dotted.name", "slash/part", "é", "q?x=1", "", "AC_977"];
    const TEXT: [&str; 8] = ["plain", "with \"quotes\"", "line\nbreak", "tab\there", "back\\slash", "給気温度", "", "  spaced  "];
    let bases = ["http://example.com/a#", "http://example.com/b/", "urn:x:"];
    let mut g = Graph::new();
    g.bind_prefix("a", Iri::new(bases[0]).expect("valid")).expect("prefix");
    g.bind_prefix("b", Iri::new(bases[1]).expect("valid")).expect("prefix");
    let iri = |rng: &mut ChaCha8Rng| {
        let base = bases[rng.gen_range(0..bases.len())];
        let local = LOCALS[rng.gen_range(0..LOCALS.len())];
        Iri::new(format!("{base}{local}{}", rng.gen_range(0..50))).expect("valid")
    };
    while g.len() < n {
        let s = iri(rng);
        let p = if rng.gen_bool(0.2) { Iri::rdf_type() } else { iri(rng) };
        let o = match rng.gen_range(0..4) {
            0 | 1 => Term::Iri(iri(rng)),
            2 => Term::Literal(Literal::plain(format!("{}{}", TEXT[rng.gen_range(0..TEXT.len())], rng.gen_range(0..5)))),
            _ => Term::Literal(Literal::typed(
                rng.gen_range(-1000..1000).to_string(),
                Iri::new(format!("{XSD}integer")).expect("valid"),
            )),
        };
        g.add(Triple::new(s, p, o));
    }
    g
}

fn roundtrip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_graph(&mut rng, 10_000);
    let text = serialize_turtle(&g);
    let back = parse_turtle(&text).map_err(|e| e.to_string())?;
    ensure(back.triples() == g.triples(), || "random graph triple sets differ after round-trip".into())?;
    ensure(serialize_turtle(&back) == text, || "re-serialization differs".into())?;
    ensure(serialize_turtle(&g) == text, || "serialization not byte-deterministic".into())?;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (p, _) = ftc_project(tmp.path())?;
    let model = p.read_text(MODEL).map_err(|e| e.to_string())?;
    let mut goldens = 0;
    for (name, src) in [
        ("golden locker", fixtures::GOLDEN_LOCKER_TTL.to_string()),
        ("thermostat", fixtures::THERMOSTAT_TTL.to_string()),
        ("FTC model", model),
    ] {
        let g = parse_turtle(&src).map_err(|e| format!("{name}: {e}"))?;
        let again = parse_turtle(&serialize_turtle(&g)).map_err(|e| format!("{name}: {e}"))?;
        ensure(again.triples() == g.triples(), || format!("{name} differs after round-trip"))?;
        ensure(serialize_turtle(&g) == serialize_turtle(&again), || format!("{name} not deterministic"))?;
        goldens += 1;
    }
    Ok(format!("{} random triples and {goldens} fixtures round-trip; output byte-stable", g.len()))
}

fn thermostat_validation() -> Check {
    let tax = fixtures::taxonomy();
    let templates = fixtures::templates();
    let mut g = parse_turtle(fixtures::THERMOSTAT_TTL).map_err(|e| e.to_string())?;
    let ok = validate(&g, &templates, &tax);
    ensure(ok.summary.instances == 1 && ok.summary.passed == 1, || format!("{:?}", ok.summary))?;
    let co2 = Iri::new("http://example.com/tstat#co2").expect("valid");
    g.remove_node(&co2);
    let bad = validate(&g, &templates, &tax);
    let failures: Vec<_> = bad.results.iter().filter(|r| r.status == Status::Fail).collect();
    ensure(failures.len() == 1, || format!("{} failures", failures.len()))?;
    ensure(failures[0].missing == ["CO2_Sensor"], || format!("missing {:?}", failures[0].missing))?;
    Ok("passes intact; one failure missing [CO2_Sensor] without the co2 point".into())
}

fn corpus_project(dir: &std::path::Path) -> Result<(Project, Resources), String> {
    let p = Project::init(dir, ProjectConfig::new("corpus", fixtures::ftc_build_config())).map_err(|e| e.to_string())?;
    let res = Resources::load(&p).map_err(|e| e.to_string())?;
    Ok((p, res))
}

fn corpus_rate() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (p, res) = corpus_project(tmp.path())?;
    let list: PointList = fixtures::corpus();
    ensure(list.len() >= 200, || format!("corpus has {} labels", list.len()))?;
    let start = Instant::now();
    pipeline::ingest(&p, &list, &[]).map_err(|e| e.to_string())?;
    pipeline::translate(&p, &res).map_err(|e| e.to_string())?;
    pipeline::tokenize(&p, &res).map_err(|e| e.to_string())?;
    let stats = pipeline::match_points(&p, &res).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(stats.match_rate >= 0.90, || format!("match rate {:.3}", stats.match_rate))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;

    let results = pipeline::matches(&p).map_err(|e| e.to_string())?;
    let expected: BTreeMap<&str, &str> = list
        .points
        .iter()
        .map(|x| (x.code.as_str(), x.extra.get("expected").map_or("", String::as_str)))
        .collect();
    let agree = results
        .iter()
        .filter(|r| r.best.as_deref().unwrap_or("") == expected[r.code.as_str()])
        .count();
    Ok(format!(
        "{} labels, match rate {:.3}, {agree}/{} agree with expected class, {elapsed:.2?}",
        stats.total,
        stats.match_rate,
        results.len()
    ))
}

fn layout_floors() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (p, res) = corpus_project(tmp.path())?;
    pipeline::ingest(&p, &fixtures::corpus(), &[]).map_err(|e| e.to_string())?;
    pipeline::translate(&p, &res).map_err(|e| e.to_string())?;
    pipeline::tokenize(&p, &res).map_err(|e| e.to_string())?;
    pipeline::layout(&p).map_err(|e| e.to_string())?;
    let layout: SemiLayout = p.read_json(LAYOUT).map_err(|e| e.to_string())?;
    let floors: Vec<u32> = layout.floors.iter().map(|f| f.floor).collect();
    ensure(floors == [1, 2, 3, 4, 5, 6], || format!("floors {floors:?}"))?;
    Ok(format!("layout.json floors {floors:?}"))
}

fn toggles() -> Check {
    let tax = fixtures::taxonomy();
    let reg = fixtures::registry();
    let list = fixtures::ftc_pointlist();
    let pts = tokenize_all(&list.points, &fixtures::dictionary(), &fixtures::abbreviations(), &reg);
    let cfg = MatchConfig::default();
    let (matches, _) = match_corpus(&pts, &tax, cfg);
    let ids = BTreeMap::new();
    let input = BuildInput {
        points: &pts,
        matches: &matches,
        registry: &reg,
        taxonomy: &tax,
        timeseries_ids: &ids,
        threshold: cfg.threshold,
    };
    let build = |toggles: ModuleToggles| {
        let mut c = fixtures::ftc_build_config();
        c.toggles = toggles;
        build_model(&input, &c).map_err(|e| e.to_string())
    };
    let all = build(ModuleToggles::all())?;
    let full = all.graph.triples();
    let mut sizes = Vec::new();
    for m in Module::ALL {
        let off = build(ModuleToggles::all().without(m))?.graph.triples();
        let diff: BTreeSet<Triple> = full.difference(&off).cloned().collect();
        let own = all.module_triples(m);
        ensure(off.is_subset(&full), || format!("{m}: switching off added triples"))?;
        ensure(diff == own, || format!("{m}: difference {} triples, module set {}", diff.len(), own.len()))?;
        ensure(!own.is_empty(), || format!("{m}: module contributes nothing on the fixture"))?;
        sizes.push(format!("{m}={}", own.len()));
    }
    Ok(sizes.join(" "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("reference label classes", reference_labels),
        ("jaccard oracle", jaccard_oracle),
        ("locker point block", locker_block),
        ("feeds / hasPoint relations and inverse closure", relations),
        ("turtle round-trip", roundtrip),
        ("thermostat validation", thermostat_validation),
        ("corpus match rate", corpus_rate),
        ("semi-layout floors", layout_floors),
        ("module toggle property", toggles),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
