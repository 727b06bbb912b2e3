use std::collections::{BTreeMap, BTreeSet};

use super::model::{RuleModel, Source, Via};
use super::patterns::normalized_words;
use crate::knowledge::{Justification, JustificationBody, KnowledgeRepository};

/// Checks that every lexicon entry can be traced to the repository: each
/// entry has a source, each source exists, and the term actually occurs
/// in the text that source points at. Returns one message per failure.
type Sources = BTreeMap<String, BTreeSet<Source>>;

pub fn audit_provenance(model: &RuleModel, repo: &KnowledgeRepository) -> Vec<String> {
    let mut failures = Vec::new();
    let prov = &model.provenance;
    let lexicons: [(&str, Vec<&String>, &Sources); 3] = [
        ("noun", model.noun_lexicon.iter().collect(), &prov.nouns),
        ("adjective", model.adjective_lexicon.keys().collect(), &prov.adjectives),
        ("keyword", model.keyword_lexicon.keys().collect(), &prov.keywords),
    ];
    for (kind, terms, sources) in lexicons {
        for term in terms {
            match sources.get(term) {
                None => failures.push(format!("{kind} {term:?} has no provenance")),
                Some(set) if set.is_empty() => failures.push(format!("{kind} {term:?} has no provenance")),
                Some(set) => {
                    for src in set {
                        if let Err(msg) = trace(term, src, repo) {
                            failures.push(format!("{kind} {term:?}: {msg}"));
                        }
                    }
                }
            }
        }
    }
    failures
}

fn contains_term(text: &str, term: &str) -> bool {
    let words = normalized_words(text);
    let needle: Vec<&str> = term.split(' ').collect();
    words
        .windows(needle.len())
        .any(|w| w.iter().zip(&needle).all(|(a, b)| a == b))
}

fn trace(term: &str, src: &Source, repo: &KnowledgeRepository) -> Result<(), String> {
    match src {
        Source::Taxonomy {
            author,
            topic,
            description,
        } => {
            let t = repo
                .taxonomies()
                .into_iter()
                .find(|t| &t.author == author)
                .ok_or_else(|| format!("no taxonomy by {author}"))?;
            let text = match description {
                Some(d) if t.has_pair(topic, d) => d.as_str(),
                None if t.topic(topic).is_some() => topic.as_str(),
                _ => return Err(format!("taxonomy by {author} lacks {topic}/{description:?}")),
            };
            contains_term(text, term)
                .then_some(())
                .ok_or_else(|| format!("term not found in taxonomy entry {text:?}"))
        }
        Source::Justification {
            instance_id,
            author,
            condition,
            via,
        } => {
            let j: &Justification = repo
                .justifications(*condition)
                .find(|j| &j.instance_id == instance_id && &j.author == author)
                .ok_or_else(|| format!("no {condition} justification by {author} on {instance_id}"))?;
            let inst = repo
                .instance(instance_id)
                .ok_or_else(|| format!("instance {instance_id} missing"))?;
            let mut texts: Vec<String> = Vec::new();
            match (via, &j.body) {
                (Via::Span, _) => {
                    texts.extend(j.spans().iter().filter_map(|s| inst.text.get(s.start..s.end)).map(str::to_string))
                }
                (_, JustificationBody::Perturbation { perturbed_text }) => {
                    texts.push(inst.text.clone());
                    texts.push(perturbed_text.clone());
                }
                (_, JustificationBody::Simplification { simplified_text }) => texts.push(simplified_text.clone()),
                _ => return Err(format!("{via:?} source on a {condition} record")),
            }
            texts
                .iter()
                .any(|t| contains_term(t, term))
                .then_some(())
                .ok_or_else(|| format!("term not found in {condition} record on {instance_id}"))
        }
    }
}
