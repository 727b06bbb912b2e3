//! Acceptance criteria, one line each. Tolerances and timing budgets are
//! pinned here; every criterion runs even if an earlier one fails.
//!
//! Run with `cargo test -p elicit-cli --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use elicit_core::corpus::{balanced_split, ingest, ingest_ndjson, Corpus, RawReview, Split};
use elicit_core::eval::{evaluate_predictor, Predictor};
use elicit_core::knowledge::{taxonomy_coverage, JustificationBody, RatingMatrix};
use elicit_core::rulemodel::{audit_provenance, classify, compile, extract_signals};
use elicit_core::textvec::{kmeans, KMeansParams, TfidfModel, TfidfVector};
use elicit_core::{
    fleiss_kappa, representative_sample, trivial_baseline, Condition, Justification, KnowledgeRepository, Label, Span, Taxonomy,
};
use elicit_server::project::CorpusUpload;
use elicit_server::{CreateProject, GoldAnswer, GoldQuestion, Qualification, ServiceError, Workbench};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Label::{Negative, Positive};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! require {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const ROUNDING: f64 = 0.0005;
const TFIDF_TOL: f64 = 1e-9;
const KAPPA_TOL: f64 = 1e-12;
const COVERAGE_TOL: f64 = 1e-4;
const TRIVIAL_BUDGET: Duration = Duration::from_secs(1);
const SAMPLING_BUDGET: Duration = Duration::from_secs(1);
const PIPELINE_BUDGET: Duration = Duration::from_secs(10);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus_of(texts: &[(&str, i64)]) -> Corpus {
    let records = texts.iter().map(|&(t, stars)| RawReview { text: t.into(), stars });
    ingest(records, 0).unwrap().corpus
}

/// The bundled mini corpus, split as in `mini.toml`.
fn mini_corpus() -> Corpus {
    let text = fs::read_to_string(fixtures().join("mini_reviews.ndjson")).unwrap();
    let corpus = ingest_ndjson(text.as_bytes(), 7).unwrap().corpus;
    balanced_split(&corpus, 20, 10, 11).unwrap()
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// --- trivial baseline ---------------------------------------------------

fn balanced_test_corpus(per_class: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reviews: Vec<RawReview> = Vec::new();
    for i in 0..per_class * 2 {
        let stars = if i % 2 == 0 { rng.random_range(4..=5) } else { rng.random_range(1..=2) };
        reviews.push(RawReview {
            text: format!("review {i} with {} words", rng.random_range(1..50)),
            stars,
        });
    }
    let corpus = ingest(reviews, seed).unwrap().corpus;
    balanced_split(&corpus, 0, per_class * 2, seed).unwrap()
}

fn trivial_row() -> Check {
    // Table 4's trivial row: 0.5 1.0 0.667 | 0.0 0.0 0.0 | 0.5 1.0 0.667
    let expected = [0.5, 1.0, 0.667, 0.0, 0.0, 0.0, 0.5, 1.0, 0.667];
    let mut slowest = Duration::ZERO;
    for (per_class, seed) in [(1, 1), (5, 2), (37, 3), (1000, 4)] {
        let corpus = balanced_test_corpus(per_class, seed);
        let start = Instant::now();
        let r = trivial_baseline(&corpus, Split::Test).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        let got = [
            r.positive.precision,
            r.positive.recall,
            r.positive.f1,
            r.negative.precision,
            r.negative.recall,
            r.negative.f1,
            r.delta.precision,
            r.delta.recall,
            r.delta.f1,
        ];
        for (i, (g, p)) in got.iter().zip(expected).enumerate() {
            require!(near(*g, p, ROUNDING), "{} instances, column {i}: {g} vs {p}", per_class * 2);
        }
        require!(r.test_size == per_class * 2, "test size {}", r.test_size);
    }
    require!(slowest < TRIVIAL_BUDGET, "2,000 instances took {slowest:?}");
    Ok(format!("published row reproduced on 4 balanced splits; 2,000 instances in {slowest:?}"))
}

// --- sampling -------------------------------------------------------------

const PLANTED: [&str; 9] = [
    "pizza crust cheese sauce pizza",
    "pizza crust cheese sauce",
    "pizza crust cheese sauce fresh",
    "waiter rude slow waiter",
    "waiter rude slow",
    "waiter rude slow manager",
    "price expensive bill overpriced",
    "price expensive bill",
    "price expensive bill tip",
];

fn sampling() -> Check {
    let start = Instant::now();
    let mut planted = corpus_of(&PLANTED.map(|t| (t, 5)));
    planted.assign_all(Split::Train);
    let mut whole = representative_sample(&planted, 9, 3).map_err(|e| e.to_string())?;
    whole.sort();
    let all: Vec<String> = planted.instances.iter().map(|i| i.id.clone()).collect();
    require!(whole == all, "m = split size did not return the split: {whole:?}");

    for seed in 0..10 {
        let picked = representative_sample(&planted, 3, seed).map_err(|e| e.to_string())?;
        let groups: BTreeSet<usize> = picked
            .iter()
            .map(|id| planted.instances.iter().position(|i| &i.id == id).unwrap() / 3)
            .collect();
        require!(groups.len() == 3, "seed {seed}: {picked:?} misses a planted group");
    }

    let mini = mini_corpus();
    let first = representative_sample(&mini, 10, 7).map_err(|e| e.to_string())?;
    for run in 1..10 {
        let again = representative_sample(&mini, 10, 7).map_err(|e| e.to_string())?;
        require!(again == first, "run {run} differs: {again:?} vs {first:?}");
    }
    let elapsed = start.elapsed();
    require!(elapsed < SAMPLING_BUDGET, "took {elapsed:?}");
    Ok(format!("whole split, 10/10 planted runs, 10 identical runs, {elapsed:?}"))
}

// --- tf-idf ---------------------------------------------------------------

const TOY: [&str; 5] = [
    "the food was good",
    "the service was slow",
    "good food and good service",
    "slow slow service",
    "the cake",
];

fn tfidf_oracle() -> Check {
    let n = TOY.len() as f64;
    let model = TfidfModel::fit(TOY).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for doc in TOY {
        // tf · (ln((1 + n) / (1 + df)) + 1), then L2-normalized
        let mut raw: BTreeMap<&str, f64> = BTreeMap::new();
        for w in doc.split_whitespace() {
            *raw.entry(w).or_default() += 1.0;
        }
        for (w, tf) in raw.iter_mut() {
            let df = TOY.iter().filter(|d| d.split_whitespace().any(|x| x == *w)).count() as f64;
            *tf *= ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        }
        let norm = raw.values().map(|x| x * x).sum::<f64>().sqrt();
        let v: TfidfVector<f64> = model.transform(doc);
        require!(v.entries.len() == raw.len(), "{doc:?}: {} non-zeros, expected {}", v.entries.len(), raw.len());
        for (w, x) in raw {
            let col = *model.vocabulary.get(w).ok_or(format!("{w} missing from vocabulary"))?;
            worst = worst.max((v.get(col) - x / norm).abs());
        }
    }
    require!(worst <= TFIDF_TOL, "max deviation {worst:e}");
    Ok(format!("5 documents, max deviation {worst:.1e}"))
}

// --- k-means ----------------------------------------------------------------

fn kmeans_monotone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut iterations = 0;
    for fixture in 0..100u64 {
        let n = rng.random_range(1..=100);
        let k = rng.random_range(1..=8.min(n));
        let dim = rng.random_range(2..=16);
        let vectors: Vec<TfidfVector<f64>> = (0..n)
            .map(|_| {
                let dense: Vec<f64> = (0..dim)
                    .map(|_| if rng.random_bool(0.3) { rng.random_range(0.0..1.0) } else { 0.0 })
                    .collect();
                TfidfVector::from_dense(&dense)
            })
            .collect();
        let c = kmeans(&vectors, KMeansParams::new(k, fixture)).map_err(|e| format!("fixture {fixture}: {e}"))?;
        for w in c.objective_history.windows(2) {
            require!(w[1] <= w[0], "fixture {fixture}: objective rose {} -> {}", w[0], w[1]);
        }
        iterations += c.objective_history.len();
    }
    Ok(format!("100 fixtures, {iterations} recorded objectives, none increasing"))
}

// --- pattern engine -----------------------------------------------------------

type Triple = (Option<String>, String, bool, Label);

fn t(noun: &str, adj: &str, negated: bool, polarity: Label) -> Triple {
    (Some(noun.into()), adj.into(), negated, polarity)
}

fn pattern_fixtures() -> Check {
    let cases: Vec<(&str, Label, Vec<Triple>)> = vec![
        ("our server was kind", Positive, vec![t("server", "kind", false, Positive)]),
        ("our server was not kind", Positive, vec![t("server", "kind", true, Negative)]),
        ("our server was rude", Negative, vec![t("server", "rude", false, Negative)]),
        ("There were delicious burgers", Positive, vec![t("burgers", "delicious", false, Positive)]),
        ("There were disgusting burgers", Negative, vec![t("burgers", "disgusting", false, Negative)]),
        (
            "The cake was rich and moist",
            Positive,
            vec![t("cake", "rich", false, Positive), t("cake", "moist", false, Positive)],
        ),
    ];
    let total = cases.len();
    for (text, label, want) in cases {
        let got: Vec<Triple> = extract_signals(text, label)
            .into_iter()
            .map(|s| (s.noun, s.adjective, s.negated, s.polarity))
            .collect();
        require!(got == want, "{text:?}: {got:?}");
    }
    Ok(format!("{total}/{total} example sentences"))
}

// --- perturbation duality ---------------------------------------------------

const SUBSTITUTIONS: [(&str, i64, &str); 10] = [
    ("There were delicious burgers", 5, "There were disgusting burgers"),
    ("our server was kind", 5, "our server was rude"),
    ("The pasta was bland", 1, "The pasta was flavorful"),
    ("Great pizza and cheap beer", 5, "Awful pizza and cheap beer"),
    ("the waiter was attentive all night", 4, "the waiter was careless all night"),
    ("We had a stale croissant for breakfast", 2, "We had a flaky croissant for breakfast"),
    ("The room is noisy", 1, "The room is quiet"),
    ("Honestly the salsa was fresh", 5, "Honestly the salsa was stale"),
    ("The noodles were tasty and the portions were generous", 4, "The noodles were bland and the portions were generous"),
    ("The steak was tough", 1, "The steak was tender"),
];

fn single_repo(text: &str, stars: i64) -> KnowledgeRepository {
    let c = corpus_of(&[(text, stars)]);
    KnowledgeRepository::for_corpus(&c, [c.instances[0].id.as_str()]).unwrap()
}

fn perturbation_duality() -> Check {
    for (original, stars, perturbed) in SUBSTITUTIONS {
        let mut repo = single_repo(original, stars);
        let inst = repo.instances.values().next().unwrap().clone();
        repo.add_justification(Justification {
            instance_id: inst.id.clone(),
            label: inst.label,
            author: "expert".into(),
            body: JustificationBody::Perturbation { perturbed_text: perturbed.into() },
        })
        .map_err(|e| format!("{original:?}: {e}"))?;
        let model = compile(&repo, Condition::Perturbation).map_err(|e| e.to_string())?.model;
        let a = classify(&model, original).label;
        let b = classify(&model, perturbed).label;
        require!(a == Some(inst.label), "{original:?} classified {a:?}, expected {}", inst.label);
        require!(b == Some(inst.label.opposite()), "{perturbed:?} classified {b:?}");
    }
    Ok(format!("{0}/{0} substitution fixtures", SUBSTITUTIONS.len()))
}

// --- provenance audit -------------------------------------------------------

#[derive(serde::Deserialize)]
struct Script {
    taxonomies: Vec<Taxonomy>,
    justifications: Vec<Justification>,
}

fn mini_repository() -> KnowledgeRepository {
    let corpus = mini_corpus();
    let ids = representative_sample(&corpus, 10, 7).unwrap();
    let mut repo = KnowledgeRepository::for_corpus(&corpus, ids.iter().map(String::as_str)).unwrap();
    let script: Script =
        serde_json::from_str(&fs::read_to_string(fixtures().join("mini_justifications.json")).unwrap()).unwrap();
    for t in script.taxonomies {
        repo.set_taxonomy(t).unwrap();
    }
    for j in script.justifications {
        repo.add_justification(j).unwrap();
    }
    repo
}

fn provenance_audit() -> Check {
    let mut repos = vec![("mini", mini_repository())];
    for (original, stars, perturbed) in SUBSTITUTIONS {
        let mut repo = single_repo(original, stars);
        let inst = repo.instances.values().next().unwrap().clone();
        let j = Justification {
            instance_id: inst.id,
            label: inst.label,
            author: "expert".into(),
            body: JustificationBody::Perturbation { perturbed_text: perturbed.into() },
        };
        repo.add_justification(j).unwrap();
        repos.push((original, repo));
    }
    let mut models = 0;
    let mut entries = 0;
    for (name, repo) in &repos {
        for c in Condition::ALL {
            let Ok(compiled) = compile(repo, c) else { continue };
            let m = &compiled.model;
            let failures = audit_provenance(m, repo);
            require!(failures.is_empty(), "{name} {c}: {failures:?}");
            models += 1;
            entries += m.noun_lexicon.len() + m.adjective_lexicon.len() + m.keyword_lexicon.len();
        }
    }
    // the audit is not vacuous: a term nobody supplied is caught
    let repo = &repos[0].1;
    let mut forged = compile(repo, Condition::Bow).unwrap().model;
    forged.keyword_lexicon.insert("scrumptious".into(), Positive);
    require!(!audit_provenance(&forged, repo).is_empty(), "forged keyword passed the audit");
    Ok(format!("{models} models, {entries} lexicon entries traced; forged entry caught"))
}

// --- metrics -------------------------------------------------------------------

struct Scripted(HashMap<String, Option<Label>>);

impl Predictor for Scripted {
    fn predict(&self, text: &str) -> Option<Label> {
        self.0[text]
    }
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let n = rng.random_range(1..=30);
        let mut reviews = Vec::new();
        let mut script = HashMap::new();
        for i in 0..n {
            let text = format!("case {case} item {i}");
            let stars = if rng.random_bool(0.5) { 5 } else { 1 };
            let pred = match rng.random_range(0..3) {
                0 => None,
                1 => Some(Positive),
                _ => Some(Negative),
            };
            script.insert(text.clone(), pred);
            reviews.push(RawReview { text, stars });
        }
        let mut corpus = ingest(reviews, 0).unwrap().corpus;
        corpus.assign_all(Split::Test);
        let r = evaluate_predictor::<f64, _>(&Scripted(script.clone()), "bow", &corpus, Split::Test)
            .map_err(|e| e.to_string())?;

        for class in [Positive, Negative] {
            let mut tp = 0usize;
            let mut predicted = 0usize;
            let mut gold = 0usize;
            for inst in &corpus.instances {
                let p = script[&inst.text];
                tp += usize::from(inst.label == class && p == Some(class));
                predicted += usize::from(p == Some(class));
                gold += usize::from(inst.label == class);
            }
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let (p, rc) = (ratio(tp, predicted), ratio(tp, gold));
            let f = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
            let m = r.class(class);
            let cc = r.confusion.class(class);
            require!(
                cc.true_positives == tp && cc.true_positives + cc.false_positives == predicted && cc.total == gold,
                "case {case} {class}: confusion {cc:?} vs tp={tp} predicted={predicted} gold={gold}"
            );
            require!(
                m.precision == p && m.recall == rc && m.f1 == f,
                "case {case} {class}: ({}, {}, {}) vs ({p}, {rc}, {f})",
                m.precision,
                m.recall,
                m.f1
            );
        }
        let abstained = script.values().filter(|p| p.is_none()).count();
        require!(r.abstentions == abstained, "case {case}: abstentions {} vs {abstained}", r.abstentions);
    }
    Ok("1000/1000 random prediction sets exact".into())
}

// --- agreement ---------------------------------------------------------------

fn kappa_and_coverage() -> Check {
    let perfect = RatingMatrix::new(vec![vec!["food"; 4], vec!["service"; 4], vec!["price"; 4]]).unwrap();
    let k: f64 = fleiss_kappa(&perfect);
    require!(k == 1.0, "perfect agreement gave {k}");

    // items: [a,a] [a,b] [b,b]. P_i = 1, 0, 1 so P̄ = 2/3; p_a = p_b = 1/2
    // so P_e = 1/2; κ = (2/3 - 1/2) / (1 - 1/2) = 1/3.
    let m = RatingMatrix::new(vec![vec!["a", "a"], vec!["a", "b"], vec!["b", "b"]]).unwrap();
    let k: f64 = fleiss_kappa(&m);
    require!(near(k, 1.0 / 3.0, KAPPA_TOL), "3×2 fixture gave {k}");

    let t = Taxonomy::new("expert")
        .with_topic("food quality", ["tasty", "bland"])
        .with_topic("customer service", ["kind", "rude"]);
    let assignments: Vec<Option<&str>> = (0..36)
        .map(|i| (i < 25).then_some(if i % 3 == 0 { "customer service" } else { "food quality" }))
        .collect();
    let c: f64 = taxonomy_coverage(&t, &assignments).map_err(|e| e.to_string())?;
    require!(near(c, 0.6944, COVERAGE_TOL), "coverage {c}");
    Ok(format!("κ perfect = 1, κ(3×2) = {k:.12}, coverage 25/36 = {c:.4}"))
}

// --- end to end -----------------------------------------------------------------

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_elicit"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    require!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(())
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = dir.path();
    let cfg = fixtures().join("mini.toml").display().to_string();
    let start = Instant::now();
    run(dir, &["--config", &cfg, "ingest", "--out", "corpus.json"])?;
    run(dir, &["--config", &cfg, "sample", "--corpus", "corpus.json", "--out", "sample.json"])?;
    run(
        dir,
        &["--config", &cfg, "export", "--corpus", "corpus.json", "--sample", "sample.json", "--out", "repository.json"],
    )?;
    for c in Condition::ALL {
        let out = format!("{c}.model.json");
        run(dir, &["compile", "--repository", "repository.json", "--condition", c.as_str(), "--out", &out])?;
    }
    run(
        dir,
        &[
            "eval", "--corpus", "corpus.json", "--repository", "repository.json", "--condition", "all", "--out",
            "report.json", "--table", "report.txt",
        ],
    )?;
    let elapsed = start.elapsed();
    require!(elapsed < PIPELINE_BUDGET, "pipeline took {elapsed:?}");

    for name in ["report.txt", "report.json"] {
        let got = fs::read(dir.join(name)).map_err(|e| e.to_string())?;
        let want = fs::read(fixtures().join("golden").join(name)).map_err(|e| e.to_string())?;
        require!(got == want, "{name} differs from the committed golden copy");
    }
    let table = fs::read_to_string(dir.join("report.txt")).unwrap();
    let rows = table.lines().skip(3).take_while(|l| !l.is_empty()).count();
    require!(rows == 6, "{rows} table rows");
    Ok(format!("6-row report matches golden byte-for-byte, {elapsed:?}"))
}

// --- qualification gate ----------------------------------------------------------

/// The keyword an expert should highlight in each sampled mini-corpus review.
const KEYWORDS: [(&str, &str); 10] = [
    ("inst-000001", "rude"),
    ("inst-000002", "kind"),
    ("inst-000004", "juicy"),
    ("inst-000006", "delicious"),
    ("inst-000014", "Terrible"),
    ("inst-000018", "slow"),
    ("inst-000019", "loved"),
    ("inst-000026", "Friendly"),
    ("inst-000028", "excellent"),
    ("inst-000031", "tasty"),
];

fn qualification_gate() -> Check {
    let keywords: BTreeMap<&str, &str> = KEYWORDS.into_iter().collect();
    let corpus = mini_corpus();
    let wb = Workbench::in_memory();
    let err = |e: ServiceError| e.to_string();
    let id = wb.create_project(CreateProject::default()).map_err(err)?.id;
    wb.upload_corpus(&id, CorpusUpload::Corpus(Box::new(corpus.clone()))).map_err(err)?;
    let sample = wb.request_sample(&id, 10, 7).map_err(err)?;
    let gold_ids: Vec<String> = sample.ids[..5].to_vec();
    let gold: Vec<GoldQuestion> = gold_ids
        .iter()
        .map(|g| GoldQuestion {
            instance_id: g.clone(),
            condition: Condition::Bow,
            answer: GoldAnswer::Terms {
                terms: vec![keywords[g.as_str()].to_lowercase()],
                min_jaccard: None,
            },
        })
        .collect();
    wb.set_gold(&id, gold).map_err(err)?;

    let answer = |g: &str, right: bool| {
        let inst = corpus.get(g).unwrap();
        let word = if right { keywords[g] } else { "and" };
        Justification {
            instance_id: g.to_string(),
            label: inst.label,
            author: String::new(),
            body: JustificationBody::Bow {
                spans: vec![Span::find(&inst.text, word).expect("word in text")],
            },
        }
    };
    let mut results = Vec::new();
    for (worker, correct) in [("three", 3), ("two", 2)] {
        let session = wb.open_session(&id, worker, Some(Condition::Bow)).map_err(err)?;
        let answers = gold_ids.iter().enumerate().map(|(i, g)| answer(g, i < correct)).collect();
        let result = wb.check_qualification(&session.id, answers).map_err(err)?;
        require!(result.correct == correct && result.total == 5, "{worker}: graded {}/{}", result.correct, result.total);
        results.push((session.id, result.state));
    }
    require!(results[0].1 == Qualification::Passed, "3/5 gave {:?}", results[0].1);
    require!(results[1].1 == Qualification::Failed, "2/5 gave {:?}", results[1].1);

    let queued = sample.ids[5].as_str();
    wb.submit_justification(&results[0].0, answer(queued, true))
        .map_err(|e| format!("passed worker refused: {e}"))?;
    match wb.submit_justification(&results[1].0, answer(queued, true)) {
        Err(ServiceError::SessionLocked(_)) => {}
        other => return Err(format!("failed worker's submission gave {other:?}")),
    }
    require!(
        matches!(wb.next_task(&results[1].0), Err(ServiceError::SessionLocked(_))),
        "failed worker still receives tasks"
    );
    Ok("3/5 passes, 2/5 fails, locked session rejects submissions".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("trivial baseline", trivial_row),
        ("sampling identity and determinism", sampling),
        ("tf-idf oracle equivalence", tfidf_oracle),
        ("k-means monotonicity", kmeans_monotone),
        ("pattern engine fixtures", pattern_fixtures),
        ("perturbation duality", perturbation_duality),
        ("no-external-knowledge audit", provenance_audit),
        ("metric oracle", metric_oracle),
        ("Fleiss' kappa and coverage", kappa_and_coverage),
        ("end-to-end golden pipeline", end_to_end),
        ("qualification gate", qualification_gate),
    ];
    let mut failed = Vec::new();
    // written to the real stdout so the lines show without --nocapture
    let mut out = std::io::stdout();
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let line = match &outcome {
            Ok(detail) => format!("PASS  {name}: {detail}\n"),
            Err(why) => {
                failed.push(name);
                format!("FAIL  {name}: {why}\n")
            }
        };
        out.write_all(line.as_bytes()).unwrap();
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
