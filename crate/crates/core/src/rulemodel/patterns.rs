//! 'Noun is Adjective' pattern engine.
//!
//! Two surface forms are recognized without a part-of-speech tagger:
//!
//! * copula: `NOUN (is|was|are|were) [not|never|n't]* ADJ (and ADJ)*`
//! * adjacency: `ADJ+ NOUN`, a run of content words whose last word is the
//!   noun and every earlier word an adjective candidate.
//!
//! A content word is any alphabetic token outside the shipped closed-class
//! list. A copula predicate is only taken when it is a single content word
//! (otherwise the run after the copula is a noun phrase and is left to the
//! adjacency form).

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::lexicon::{normalize, ClosedClass};
use crate::corpus::Label;
use crate::textvec::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Copula,
    Adjacency,
}

/// A label-free occurrence of the pattern in some text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatch {
    pub kind: PatternKind,
    pub noun: Option<String>,
    pub adjective: String,
    pub negated: bool,
    /// More than one negator applied; only a single flip is honored.
    pub stacked_negation: bool,
    /// Token indices covered, noun through adjective.
    pub tokens: Range<usize>,
}

/// A pattern occurrence read under a source label. `polarity` is the
/// polarity the adjective carries: the label, flipped when negated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSignal {
    pub noun: Option<String>,
    pub adjective: String,
    pub negated: bool,
    pub polarity: Label,
    pub kind: PatternKind,
    #[serde(skip)]
    pub tokens: Range<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub signals: Vec<PatternSignal>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Content,
    /// `implicit_subject` marks contractions like "it's".
    Copula { negated: bool, implicit_subject: bool },
    Negator,
    Distributive,
    Intensifier,
    Closed,
}

fn classify_word(cc: &ClosedClass, w: &str) -> Kind {
    if cc.is("copula_contraction", w) {
        Kind::Copula {
            negated: false,
            implicit_subject: true,
        }
    } else if cc.is("negated_copula", w) {
        Kind::Copula {
            negated: true,
            implicit_subject: false,
        }
    } else if cc.is("copula", w) {
        Kind::Copula {
            negated: false,
            implicit_subject: false,
        }
    } else if cc.is("negator", w) || w.ends_with("n't") {
        Kind::Negator
    } else if cc.is("distributive", w) {
        Kind::Distributive
    } else if cc.is("intensifier", w) {
        Kind::Intensifier
    } else if cc.is_content(w) {
        Kind::Content
    } else {
        Kind::Closed
    }
}

/// Lowercased, apostrophe-normalized tokens of `text`.
pub fn normalized_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| normalize(&t.text)).collect()
}

pub struct PatternEngine<'a> {
    closed: &'a ClosedClass,
}

impl Default for PatternEngine<'static> {
    fn default() -> Self {
        PatternEngine {
            closed: ClosedClass::shipped(),
        }
    }
}

impl<'a> PatternEngine<'a> {
    pub fn with_closed_class(closed: &'a ClosedClass) -> Self {
        PatternEngine { closed }
    }

    pub fn closed_class(&self) -> &ClosedClass {
        self.closed
    }

    pub fn is_content(&self, word: &str) -> bool {
        self.closed.is_content(word)
    }

    pub fn is_negator(&self, word: &str) -> bool {
        matches!(
            classify_word(self.closed, word),
            Kind::Negator | Kind::Copula { negated: true, .. }
        )
    }

    pub fn matches(&self, text: &str) -> Vec<PatternMatch> {
        self.matches_in(&normalized_words(text))
    }

    pub fn matches_in(&self, words: &[String]) -> Vec<PatternMatch> {
        let kinds: Vec<Kind> = words.iter().map(|w| classify_word(self.closed, w)).collect();
        let mut out = Vec::new();
        self.copula_matches(words, &kinds, &mut out);
        self.adjacency_matches(words, &kinds, &mut out);
        out.sort_by_key(|m| (m.tokens.start, m.tokens.end));
        out
    }

    fn copula_matches(&self, words: &[String], kinds: &[Kind], out: &mut Vec<PatternMatch>) {
        let is_content = |i: usize| kinds.get(i) == Some(&Kind::Content);
        // a lone content word: the next token is not another content word
        let predicate_at = |i: usize| is_content(i) && !is_content(i + 1);

        for (i, kind) in kinds.iter().enumerate() {
            let Kind::Copula {
                negated,
                implicit_subject,
            } = *kind
            else {
                continue;
            };
            let subject = (!implicit_subject && i > 0 && is_content(i - 1)).then(|| i - 1);

            let mut negations = usize::from(negated);
            let mut p = i + 1;
            while p < kinds.len() {
                match kinds[p] {
                    Kind::Negator => negations += 1,
                    Kind::Intensifier => {}
                    _ => break,
                }
                p += 1;
            }
            if !predicate_at(p) {
                continue;
            }

            let start = subject.unwrap_or(i);
            let mut emit = |adj: usize, local: usize| {
                out.push(PatternMatch {
                    kind: PatternKind::Copula,
                    noun: subject.map(|s| words[s].clone()),
                    adjective: words[adj].clone(),
                    negated: negations > 0 || local > 0,
                    stacked_negation: negations > 1 || local > 1,
                    tokens: start..adj + 1,
                });
            };
            emit(p, 0);

            // "rich and moist": distribute the copula over conjoined predicates
            let mut q = p + 1;
            while q < kinds.len() && kinds[q] == Kind::Distributive {
                let mut r = q + 1;
                let mut local = 0;
                while r < kinds.len() {
                    match kinds[r] {
                        Kind::Negator => local += 1,
                        Kind::Intensifier => {}
                        _ => break,
                    }
                    r += 1;
                }
                if !predicate_at(r) {
                    break;
                }
                emit(r, local);
                q = r + 1;
            }
        }
    }

    fn adjacency_matches(&self, words: &[String], kinds: &[Kind], out: &mut Vec<PatternMatch>) {
        let mut i = 0;
        while i < kinds.len() {
            if kinds[i] != Kind::Content {
                i += 1;
                continue;
            }
            let start = i;
            while i < kinds.len() && kinds[i] == Kind::Content {
                i += 1;
            }
            let end = i;
            if end - start < 2 {
                continue;
            }

            // "not good food", "wasn't great food"
            let mut negations = 0;
            let mut b = start;
            while b > 0 {
                match kinds[b - 1] {
                    Kind::Intensifier => b -= 1,
                    Kind::Negator | Kind::Copula { negated: true, .. } => {
                        negations += 1;
                        b -= 1;
                    }
                    Kind::Copula { negated: false, .. } => b -= 1,
                    _ => break,
                }
            }
            let noun = end - 1;
            for adj in start..noun {
                out.push(PatternMatch {
                    kind: PatternKind::Adjacency,
                    noun: Some(words[noun].clone()),
                    adjective: words[adj].clone(),
                    negated: negations > 0,
                    stacked_negation: negations > 1,
                    tokens: adj..end,
                });
            }
        }
    }

    /// Pattern occurrences in `text` read as evidence for `label`.
    pub fn extract(&self, text: &str, label: Label) -> Extraction {
        self.extract_words(&normalized_words(text), label)
    }

    pub fn extract_words(&self, words: &[String], label: Label) -> Extraction {
        let mut ex = Extraction::default();
        for m in self.matches_in(words) {
            if m.stacked_negation {
                ex.warnings.push(format!(
                    "stacked negation around {:?}; applying a single flip",
                    m.adjective
                ));
            }
            ex.signals.push(PatternSignal {
                polarity: label.xor(m.negated),
                noun: m.noun,
                adjective: m.adjective,
                negated: m.negated,
                kind: m.kind,
                tokens: m.tokens,
            });
        }
        ex
    }
}

/// Signals from `text` under the shipped closed-class list.
pub fn extract_signals(text: &str, label: Label) -> Vec<PatternSignal> {
    PatternEngine::default().extract(text, label).signals
}
