//! Per-condition compilers from justifications to match lexicons.

use std::collections::{BTreeMap, BTreeSet};

use super::diff::{token_diff, touches};
use super::model::{Compiled, LexiconBuilder, Source, Via};
use super::patterns::{normalized_words, PatternEngine, PatternSignal};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::knowledge::{
    Condition, InstanceRecord, Justification, JustificationBody, KnowledgeRepository, Span, Taxonomy,
};

pub type Instances = BTreeMap<String, InstanceRecord>;

fn source(j: &Justification, via: Via) -> Source {
    Source::Justification {
        instance_id: j.instance_id.clone(),
        author: j.author.clone(),
        condition: j.condition(),
        via,
    }
}

/// Looks up the instance text, logging records that cannot be compiled.
fn instance_text<'a>(
    j: &Justification,
    condition: Condition,
    instances: &'a Instances,
    b: &mut LexiconBuilder,
) -> Option<&'a str> {
    if j.condition() != condition {
        b.log.warnings.push(format!(
            "{} record for {} ignored by the {condition} compiler",
            j.condition(),
            j.instance_id
        ));
        return None;
    }
    match instances.get(&j.instance_id) {
        Some(inst) => Some(&inst.text),
        None => {
            b.log.warnings.push(format!("instance {} not found", j.instance_id));
            None
        }
    }
}

fn add_signals(b: &mut LexiconBuilder, signals: &[PatternSignal], src: &Source) {
    for s in signals {
        if let Some(noun) = &s.noun {
            b.noun(noun, src.clone());
        }
        b.adjective(&s.adjective, s.polarity, src.clone());
    }
}

fn span_words(text: &str, span: &Span) -> Vec<String> {
    text.get(span.start..span.end).map(normalized_words).unwrap_or_default()
}

/// Highlighted spans become keywords (multi-token spans as phrases) with
/// the instance label.
pub fn compile_bow(justs: &[&Justification], instances: &Instances) -> Compiled {
    let engine = PatternEngine::default();
    let mut b = LexiconBuilder::default();
    for j in justs {
        let Some(text) = instance_text(j, Condition::Bow, instances, &mut b) else {
            continue;
        };
        let JustificationBody::Bow { spans } = &j.body else {
            continue;
        };
        let mut any = false;
        for span in spans {
            let phrase = span_words(text, span).join(" ");
            if phrase.is_empty() {
                continue;
            }
            any = true;
            b.keyword(&phrase, j.label, source(j, Via::Span));
        }
        if !any {
            b.log.uncovered.push(j.instance_id.clone());
        }
    }
    b.finish(Condition::Bow, engine.closed_class())
}

/// Aligns original and perturbed text token by token. Signals touching
/// the changed region count for the original label on the original side
/// and for the opposite label on the perturbed side. A perturbation that
/// shares no token with the original falls back to whole-text extraction
/// and is flagged low-confidence.
pub fn compile_perturbation(justs: &[&Justification], instances: &Instances) -> Compiled {
    let engine = PatternEngine::default();
    let mut b = LexiconBuilder::default();
    for j in justs {
        let Some(text) = instance_text(j, Condition::Perturbation, instances, &mut b) else {
            continue;
        };
        let JustificationBody::Perturbation { perturbed_text } = &j.body else {
            continue;
        };
        let original = normalized_words(text);
        let perturbed = normalized_words(perturbed_text);
        let (common, hunks) = token_diff(&original, &perturbed);

        let orig_ex = engine.extract_words(&original, j.label);
        let pert_ex = engine.extract_words(&perturbed, j.label.opposite());
        b.log.warnings.extend(orig_ex.warnings.iter().chain(&pert_ex.warnings).cloned());

        let (orig_signals, pert_signals, via): (Vec<_>, Vec<_>, _) = if common == 0 {
            b.log.low_confidence.push(j.instance_id.clone());
            (orig_ex.signals, pert_ex.signals, Via::Text)
        } else {
            let keep = |signals: Vec<PatternSignal>, pick: fn(&super::diff::Hunk) -> &std::ops::Range<usize>| {
                signals
                    .into_iter()
                    .filter(|s| hunks.iter().any(|h| touches(&s.tokens, pick(h))))
                    .collect::<Vec<_>>()
            };
            (
                keep(orig_ex.signals, |h| &h.original),
                keep(pert_ex.signals, |h| &h.perturbed),
                Via::Diff,
            )
        };

        if orig_signals.is_empty() && pert_signals.is_empty() {
            b.log.uncovered.push(j.instance_id.clone());
            continue;
        }
        let src = source(j, via);
        add_signals(&mut b, &orig_signals, &src);
        add_signals(&mut b, &pert_signals, &src);
    }
    b.finish(Condition::Perturbation, engine.closed_class())
}

/// Every signal in the simplified text counts for the instance label.
pub fn compile_simplification(justs: &[&Justification], instances: &Instances) -> Compiled {
    let engine = PatternEngine::default();
    let mut b = LexiconBuilder::default();
    for j in justs {
        if instance_text(j, Condition::Simplification, instances, &mut b).is_none() {
            continue;
        }
        let JustificationBody::Simplification { simplified_text } = &j.body else {
            continue;
        };
        let ex = engine.extract(simplified_text, j.label);
        b.log.warnings.extend(ex.warnings);
        if ex.signals.is_empty() {
            b.log.uncovered.push(j.instance_id.clone());
            continue;
        }
        add_signals(&mut b, &ex.signals, &source(j, Via::Text));
    }
    b.finish(Condition::Simplification, engine.closed_class())
}

type PairKey = (String, String);

fn pair_key(topic: &str, description: &str) -> PairKey {
    (topic.trim().to_lowercase(), description.trim().to_lowercase())
}

/// Majority label over the records citing each pair; ties yield no
/// polarity.
fn pair_polarities<'a>(
    justs: &[&Justification],
    pairs_of: impl Fn(&Justification) -> Vec<(&str, &str)> + 'a,
) -> BTreeMap<PairKey, Option<Label>> {
    let mut votes: BTreeMap<PairKey, (usize, usize)> = BTreeMap::new();
    for j in justs {
        let cited: BTreeSet<PairKey> = pairs_of(j).into_iter().map(|(t, d)| pair_key(t, d)).collect();
        for key in cited {
            let v = votes.entry(key).or_default();
            match j.label {
                Label::Positive => v.0 += 1,
                Label::Negative => v.1 += 1,
            }
        }
    }
    votes
        .into_iter()
        .map(|(k, (pos, neg))| {
            let label = match pos.cmp(&neg) {
                std::cmp::Ordering::Greater => Some(Label::Positive),
                std::cmp::Ordering::Less => Some(Label::Negative),
                std::cmp::Ordering::Equal => None,
            };
            (k, label)
        })
        .collect()
}

/// Content words of a term, and whether the term carries a negator.
fn content_terms(engine: &PatternEngine, words: &[String]) -> (Vec<String>, bool) {
    let negated = words.iter().any(|w| engine.is_negator(w));
    let content = words.iter().filter(|w| engine.is_content(w)).cloned().collect();
    (content, negated)
}

/// Topic names seed the noun lexicon; each description seeds the adjective
/// lexicon with the polarity of its pair, when one could be derived.
fn seed_taxonomies(
    engine: &PatternEngine,
    b: &mut LexiconBuilder,
    taxonomies: &[&Taxonomy],
    polarities: &BTreeMap<PairKey, Option<Label>>,
) {
    for t in taxonomies {
        for topic in &t.topics {
            let (nouns, _) = content_terms(engine, &normalized_words(&topic.name));
            for n in nouns {
                b.noun(
                    &n,
                    Source::Taxonomy {
                        author: t.author.clone(),
                        topic: topic.name.clone(),
                        description: None,
                    },
                );
            }
            for d in &topic.descriptions {
                let Some(Some(polarity)) = polarities.get(&pair_key(&topic.name, d)) else {
                    continue;
                };
                let (adjs, negated) = content_terms(engine, &normalized_words(d));
                for a in adjs {
                    b.adjective(
                        &a,
                        polarity.xor(negated),
                        Source::Taxonomy {
                            author: t.author.clone(),
                            topic: topic.name.clone(),
                            description: Some(d.clone()),
                        },
                    );
                }
            }
        }
    }
}

fn log_skipped_pairs(b: &mut LexiconBuilder, polarities: &BTreeMap<PairKey, Option<Label>>) {
    for ((topic, desc), polarity) in polarities {
        if polarity.is_none() {
            tracing::warn!(topic, desc, "concept pair has tied labels, skipping");
            b.log
                .skipped_pairs
                .push(format!("({topic}, {desc}): labels tied, annotations skipped"));
        }
    }
}

/// The taxonomy is encoded as 'Noun is Adjective'; every highlighted
/// content word enters both the noun and the adjective lexicon.
pub fn compile_concept_bow(taxonomies: &[&Taxonomy], justs: &[&Justification], instances: &Instances) -> Compiled {
    let engine = PatternEngine::default();
    let mut b = LexiconBuilder::default();
    let polarities = pair_polarities(justs, |j| match &j.body {
        JustificationBody::ConceptBow { items } => items
            .iter()
            .map(|i| (i.topic.as_str(), i.description.as_str()))
            .collect(),
        _ => Vec::new(),
    });
    log_skipped_pairs(&mut b, &polarities);
    seed_taxonomies(&engine, &mut b, taxonomies, &polarities);

    for j in justs {
        let Some(text) = instance_text(j, Condition::ConceptBow, instances, &mut b) else {
            continue;
        };
        let JustificationBody::ConceptBow { items } = &j.body else {
            continue;
        };
        for item in items {
            let Some(Some(polarity)) = polarities.get(&pair_key(&item.topic, &item.description)) else {
                continue;
            };
            for span in &item.spans {
                let (terms, negated) = content_terms(&engine, &span_words(text, span));
                for w in terms {
                    b.noun(&w, source(j, Via::Span));
                    b.adjective(&w, polarity.xor(negated), source(j, Via::Span));
                }
            }
        }
    }
    b.finish(Condition::ConceptBow, engine.closed_class())
}

/// Topic spans feed the noun lexicon and description spans the adjective
/// lexicon; the taxonomy is seeded as for concept bag of words.
pub fn compile_concept_annotation(
    taxonomies: &[&Taxonomy],
    justs: &[&Justification],
    instances: &Instances,
) -> Compiled {
    let engine = PatternEngine::default();
    let mut b = LexiconBuilder::default();
    let polarities = pair_polarities(justs, |j| match &j.body {
        JustificationBody::ConceptAnnotation { items } => items
            .iter()
            .map(|i| (i.topic.as_str(), i.description.as_str()))
            .collect(),
        _ => Vec::new(),
    });
    log_skipped_pairs(&mut b, &polarities);
    seed_taxonomies(&engine, &mut b, taxonomies, &polarities);

    for j in justs {
        let Some(text) = instance_text(j, Condition::ConceptAnnotation, instances, &mut b) else {
            continue;
        };
        let JustificationBody::ConceptAnnotation { items } = &j.body else {
            continue;
        };
        for item in items {
            let Some(Some(polarity)) = polarities.get(&pair_key(&item.topic, &item.description)) else {
                continue;
            };
            for span in &item.topic_spans {
                let (terms, _) = content_terms(&engine, &span_words(text, span));
                for w in terms {
                    b.noun(&w, source(j, Via::Span));
                }
            }
            for span in &item.description_spans {
                let (terms, negated) = content_terms(&engine, &span_words(text, span));
                for w in terms {
                    b.adjective(&w, polarity.xor(negated), source(j, Via::Span));
                }
            }
        }
    }
    b.finish(Condition::ConceptAnnotation, engine.closed_class())
}

/// Compiles the repository's records for one condition. The model's
/// provenance records the repository content hash.
pub fn compile(repo: &KnowledgeRepository, condition: Condition) -> Result<Compiled> {
    let justs: Vec<&Justification> = repo.justifications(condition).collect();
    if justs.is_empty() {
        return Err(Error::InsufficientData(format!("repository has no {condition} justifications")));
    }
    let taxonomies = repo.taxonomies();
    let mut compiled = match condition {
        Condition::Bow => compile_bow(&justs, &repo.instances),
        Condition::Perturbation => compile_perturbation(&justs, &repo.instances),
        Condition::Simplification => compile_simplification(&justs, &repo.instances),
        Condition::ConceptBow => compile_concept_bow(&taxonomies, &justs, &repo.instances),
        Condition::ConceptAnnotation => compile_concept_annotation(&taxonomies, &justs, &repo.instances),
    };
    compiled.model.provenance.repository_hash = Some(repo.content_hash());
    Ok(compiled)
}
