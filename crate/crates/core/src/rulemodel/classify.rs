use serde::{Deserialize, Serialize};

use super::model::RuleModel;
use super::patterns::{normalized_words, PatternEngine};
use crate::corpus::Label;
use crate::knowledge::Condition;

/// One lexicon hit that counted toward a decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub noun: Option<String>,
    pub term: String,
    pub negated: bool,
    pub polarity: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// `None` is an abstention: no evidence, or a tie.
    pub label: Option<Label>,
    pub positive: usize,
    pub negative: usize,
    pub evidence: Vec<Evidence>,
}

impl Prediction {
    fn decide(evidence: Vec<Evidence>) -> Prediction {
        let positive = evidence.iter().filter(|e| e.polarity == Label::Positive).count();
        let negative = evidence.len() - positive;
        let label = match positive.cmp(&negative) {
            std::cmp::Ordering::Greater => Some(Label::Positive),
            std::cmp::Ordering::Less => Some(Label::Negative),
            std::cmp::Ordering::Equal => None,
        };
        Prediction {
            label,
            positive,
            negative,
            evidence,
        }
    }

    pub fn abstained(&self) -> bool {
        self.label.is_none()
    }
}

fn keyword_hits(model: &RuleModel, words: &[String]) -> Vec<Evidence> {
    let mut hits = Vec::new();
    for (phrase, &polarity) in &model.keyword_lexicon {
        let needle: Vec<&str> = phrase.split(' ').collect();
        if needle.is_empty() || needle.len() > words.len() {
            continue;
        }
        let count = words
            .windows(needle.len())
            .filter(|w| w.iter().zip(&needle).all(|(a, b)| a == b))
            .count();
        for _ in 0..count {
            hits.push(Evidence {
                noun: None,
                term: phrase.clone(),
                negated: false,
                polarity,
            });
        }
    }
    hits
}

fn pattern_hits(model: &RuleModel, words: &[String]) -> Vec<Evidence> {
    let engine = PatternEngine::default();
    engine
        .matches_in(words)
        .into_iter()
        .filter_map(|m| {
            let &base = model.adjective_lexicon.get(&m.adjective)?;
            let noun_known = m.noun.as_ref().is_some_and(|n| model.noun_lexicon.contains(n));
            if !noun_known && !model.allow_adjective_only {
                return None;
            }
            Some(Evidence {
                noun: m.noun,
                term: m.adjective,
                negated: m.negated,
                polarity: base.xor(m.negated),
            })
        })
        .collect()
}

/// Bag-of-words models count keyword and phrase hits; every other model
/// counts pattern matches whose noun and adjective are both in the
/// lexicons, with negation flipping the adjective's polarity. The side with
/// strictly more evidence wins.
pub fn classify(model: &RuleModel, text: &str) -> Prediction {
    let words = normalized_words(text);
    let evidence = match model.condition {
        Condition::Bow => keyword_hits(model, &words),
        _ => pattern_hits(model, &words),
    };
    Prediction::decide(evidence)
}
