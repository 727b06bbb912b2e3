use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use elicit_core::corpus::{balanced_split, ingest_ndjson, Corpus, Split};
use elicit_core::eval::{report_table, table_rows};
use elicit_core::knowledge::{Condition, Justification, KnowledgeRepository, Taxonomy};
use elicit_core::rulemodel::{audit_provenance, compile};
use elicit_core::textvec::{representative_sample_with, KMeansParams};
use elicit_core::{evaluate, trivial_baseline, Error};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, Config, Usage};
use crate::manifest::{artifact, read_input, Builder};
use crate::{CompileArgs, EvalArgs, ExportArgs, IngestArgs, SampleArgs, ServeArgs, ValidateArgs};

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleFile {
    pub corpus_hash: String,
    pub m: usize,
    pub seed: u64,
    pub ids: Vec<String>,
}

/// Taxonomies and justification records to load into a fresh repository
/// over the sampled instances.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub taxonomies: Vec<Taxonomy>,
    #[serde(default)]
    pub justifications: Vec<Justification>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_corpus(b: &mut Builder, path: &Path) -> Result<Corpus> {
    let text = read_input(b, "corpus", path)?;
    Corpus::from_json(&text).with_context(|| format!("corpus {}", path.display()))
}

fn load_repository(b: &mut Builder, path: &Path) -> Result<KnowledgeRepository> {
    let text = read_input(b, "repository", path)?;
    KnowledgeRepository::import(&text).with_context(|| format!("repository {}", path.display()))
}

fn parse_condition(tag: &str) -> Result<Condition, Usage> {
    tag.parse().map_err(|_| {
        let known: Vec<_> = Condition::ALL.iter().map(|c| c.as_str()).collect();
        Usage(format!("unknown condition {tag:?} (expected one of {})", known.join(", ")))
    })
}

pub fn ingest(args: &IngestArgs, cfg: &Config) -> Result<()> {
    let input = require(&args.input, &cfg.input, "input")?;
    let out = require(&args.out, &cfg.out, "out")?;
    let seed = pick(&args.seed, &cfg.seed).unwrap_or(0);
    let train = pick(&args.train, &cfg.train);
    let test = pick(&args.test, &cfg.test);
    let split_seed = pick(&args.split_seed, &cfg.split_seed).unwrap_or(seed);
    if train.is_some() != test.is_some() {
        return Err(Usage("--train and --test go together".into()).into());
    }

    let mut b = Builder::new("ingest");
    let text = read_input(&mut b, "reviews", &input)?;
    b.param("seed", seed);
    let ingested = ingest_ndjson(text.as_bytes(), seed)?;
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    let corpus = match (train, test) {
        (Some(train), Some(test)) => {
            b.param("train", train).param("test", test).param("split_seed", split_seed);
            balanced_split(&ingested.corpus, train, test, split_seed)?
        }
        _ => ingested.corpus,
    };
    write(&out, &artifact(&b.finish(), &corpus)?)?;
    let s = &corpus.splits;
    println!(
        "{} instances ({} train, {} test, {} unassigned), {} neutral skipped, {} malformed",
        corpus.len(),
        s.train.total(),
        s.test.total(),
        s.unassigned.total(),
        corpus.skipped_neutral,
        ingested.warnings.len()
    );
    Ok(())
}

pub fn sample(args: &SampleArgs, cfg: &Config) -> Result<()> {
    let corpus_path = require(&args.corpus, &cfg.corpus, "corpus")?;
    let out = require(&args.out, &cfg.out, "out")?;
    let m = require(&args.m, &cfg.m, "m")?;
    if m == 0 {
        return Err(Usage("--m must be at least 1".into()).into());
    }
    let mut params = KMeansParams::new(m, require(&args.seed, &cfg.seed, "seed")?);
    params.tol = pick(&args.tol, &cfg.tol).unwrap_or(params.tol);
    params.max_iter = pick(&args.max_iter, &cfg.max_iter).unwrap_or(params.max_iter);

    let mut b = Builder::new("sample");
    let corpus = load_corpus(&mut b, &corpus_path)?;
    b.param("m", m)
        .param("seed", params.seed)
        .param("tol", params.tol)
        .param("max_iter", params.max_iter);
    let ids = representative_sample_with::<f64>(&corpus, params)?;
    let file = SampleFile {
        corpus_hash: corpus.content_hash(),
        m,
        seed: params.seed,
        ids,
    };
    write(&out, &artifact(&b.finish(), &file)?)?;
    println!("{}", file.ids.join(" "));
    Ok(())
}

/// Builds a repository over the sampled instances from a script, returning
/// every problem found instead of stopping at the first.
fn build_repository(corpus: &Corpus, sample: &SampleFile, script: Script) -> Result<(KnowledgeRepository, Vec<String>)> {
    ensure!(
        sample.corpus_hash == corpus.content_hash(),
        "sample was drawn from a different corpus"
    );
    let mut repo = KnowledgeRepository::for_corpus(corpus, sample.ids.iter().map(String::as_str))?;
    let mut problems = Vec::new();
    for t in script.taxonomies {
        let author = t.author.clone();
        if let Err(e) = repo.set_taxonomy(t) {
            problems.push(format!("taxonomy by {author}: {e}"));
        }
    }
    for (i, j) in script.justifications.into_iter().enumerate() {
        let what = format!("justification {i} ({} {} by {})", j.condition(), j.instance_id, j.author);
        match repo.validate_justification(&j) {
            Err(e) => problems.push(format!("{what}: {e}")),
            Ok(v) if !v.is_ok() => problems.extend(v.violations.iter().map(|x| format!("{what}: {x}"))),
            Ok(_) => {
                for w in repo.add_justification(j)?.warnings {
                    eprintln!("warning: {what}: {w}");
                }
            }
        }
    }
    Ok((repo, problems))
}

fn load_script_inputs(b: &mut Builder, corpus: &Path, sample: &Path, script: &Path) -> Result<(Corpus, SampleFile, Script)> {
    let corpus = load_corpus(b, corpus)?;
    let text = read_input(b, "sample", sample)?;
    let sample: SampleFile = serde_json::from_str(&text).with_context(|| format!("sample {}", sample.display()))?;
    let text = read_input(b, "justifications", script)?;
    let script: Script = serde_json::from_str(&text).with_context(|| format!("script {}", script.display()))?;
    Ok((corpus, sample, script))
}

fn report_problems(problems: &[String]) -> Result<()> {
    for p in problems {
        eprintln!("violation: {p}");
    }
    if !problems.is_empty() {
        bail!("{} violation(s)", problems.len());
    }
    Ok(())
}

pub fn export(args: &ExportArgs, cfg: &Config) -> Result<()> {
    let corpus = require(&args.corpus, &cfg.corpus, "corpus")?;
    let sample = require(&args.sample, &cfg.sample, "sample")?;
    let script = require(&args.justifications, &cfg.justifications, "justifications")?;
    let out = require(&args.out, &cfg.out, "out")?;

    let mut b = Builder::new("export");
    let (corpus, sample, script) = load_script_inputs(&mut b, &corpus, &sample, &script)?;
    let (repo, problems) = build_repository(&corpus, &sample, script)?;
    report_problems(&problems)?;
    let doc: serde_json::Value = serde_json::from_str(&repo.export()?)?;
    write(&out, &artifact(&b.finish(), doc)?)?;
    println!(
        "{} instances, {} taxonomies, {} justifications (revision {})",
        repo.instances.len(),
        repo.taxonomies().len(),
        repo.len(),
        repo.revision
    );
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    valid: bool,
    violations: Vec<String>,
}

pub fn validate(args: &ValidateArgs, cfg: &Config) -> Result<()> {
    let mut b = Builder::new("validate");
    let problems = match pick(&args.justifications, &cfg.justifications) {
        Some(script) => {
            let corpus = require(&args.corpus, &cfg.corpus, "corpus")?;
            let sample = require(&args.sample, &cfg.sample, "sample")?;
            let (corpus, sample, script) = load_script_inputs(&mut b, &corpus, &sample, &script)?;
            build_repository(&corpus, &sample, script)?.1
        }
        None => {
            let path = require(&args.repository, &cfg.repository, "repository")
                .map_err(|_| Usage("validate needs --repository, or --justifications with --corpus and --sample".into()))?;
            let text = read_input(&mut b, "repository", &path)?;
            match KnowledgeRepository::import(&text) {
                Ok(_) => Vec::new(),
                Err(Error::Rejected(vs)) => vs.iter().map(|v| v.to_string()).collect(),
                Err(e) => vec![e.to_string()],
            }
        }
    };
    if let Some(out) = pick(&args.out, &cfg.out) {
        let report = ValidationReport {
            valid: problems.is_empty(),
            violations: problems.clone(),
        };
        write(&out, &artifact(&b.finish(), report)?)?;
    }
    report_problems(&problems)?;
    println!("valid");
    Ok(())
}

pub fn compile_cmd(args: &CompileArgs, cfg: &Config) -> Result<()> {
    let path = require(&args.repository, &cfg.repository, "repository")?;
    let condition = parse_condition(&require(&args.condition, &cfg.condition, "condition")?)?;
    let out = require(&args.out, &cfg.out, "out")?;

    let mut b = Builder::new("compile");
    let repo = load_repository(&mut b, &path)?;
    b.param("condition", condition);
    let compiled = compile(&repo, condition)?;
    let failures = audit_provenance(&compiled.model, &repo);
    ensure!(failures.is_empty(), "provenance audit failed: {}", failures.join("; "));
    let body = serde_json::json!({
        "condition": condition,
        "repository_hash": repo.content_hash(),
        "model": compiled.model,
        "log": compiled.log,
    });
    write(&out, &artifact(&b.finish(), body)?)?;
    let m = &compiled.model;
    println!(
        "{condition}: {} nouns, {} adjectives, {} keywords",
        m.noun_lexicon.len(),
        m.adjective_lexicon.len(),
        m.keyword_lexicon.len()
    );
    Ok(())
}

pub fn eval(args: &EvalArgs, cfg: &Config) -> Result<()> {
    let corpus_path = require(&args.corpus, &cfg.corpus, "corpus")?;
    let repo_path = require(&args.repository, &cfg.repository, "repository")?;
    let out = require(&args.out, &cfg.out, "out")?;
    let table = pick(&args.table, &cfg.table);
    let selection = pick(&args.condition, &cfg.condition).unwrap_or_else(|| "all".into());
    let conditions = if selection == "all" {
        Condition::ALL.to_vec()
    } else {
        vec![parse_condition(&selection)?]
    };

    let mut b = Builder::new("eval");
    let corpus = load_corpus(&mut b, &corpus_path)?;
    let repo = load_repository(&mut b, &repo_path)?;
    b.param("condition", &selection).param("split", Split::Test);
    ensure!(
        repo.corpus_hash == corpus.content_hash(),
        "repository was built over a different corpus"
    );

    let mut reports = vec![trivial_baseline(&corpus, Split::Test)?];
    for &c in &conditions {
        match compile(&repo, c) {
            Ok(compiled) => reports.push(evaluate(&compiled.model, &corpus, Split::Test)?),
            // with `all`, a condition nobody justified is left out of the table
            Err(Error::InsufficientData(msg)) if conditions.len() > 1 => eprintln!("warning: skipping {c}: {msg}"),
            Err(e) => return Err(e.into()),
        }
    }
    if reports.len() == 1 {
        return Err(Error::InsufficientData("no condition could be compiled".into()).into());
    }

    let manifest = b.finish();
    let rows = table_rows(&reports);
    write(&out, &artifact(&manifest, serde_json::json!({ "reports": rows }))?)?;
    let text = format!("{}\nmanifest {}\n", report_table(&rows), manifest.hash);
    if let Some(path) = table {
        write(&path, &text)?;
    }
    print!("{text}");
    Ok(())
}

pub fn serve(args: &ServeArgs, cfg: &Config) -> Result<()> {
    let dir: PathBuf = pick(&args.data_dir, &cfg.data_dir).unwrap_or_else(|| PathBuf::from("elicit-data"));
    let addr = pick(&args.addr, &cfg.addr).unwrap_or_else(|| "127.0.0.1:8080".into());
    let addr: SocketAddr = addr
        .parse()
        .map_err(|e| Usage(format!("invalid --addr {addr:?}: {e}")))?;
    let workbench = elicit_server::Workbench::open(&dir)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(elicit_server::serve(addr, workbench))?;
    Ok(())
}
