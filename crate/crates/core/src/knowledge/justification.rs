use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::taxonomy::Taxonomy;
use crate::corpus::Label;
use crate::error::Error;

/// The five elicitation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Bow,
    Perturbation,
    Simplification,
    ConceptBow,
    ConceptAnnotation,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Bow,
        Condition::Perturbation,
        Condition::Simplification,
        Condition::ConceptBow,
        Condition::ConceptAnnotation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Bow => "bow",
            Condition::Perturbation => "perturbation",
            Condition::Simplification => "simplification",
            Condition::ConceptBow => "concept_bow",
            Condition::ConceptAnnotation => "concept_annotation",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Condition::Bow => "Bag of Words",
            Condition::Perturbation => "Perturbation",
            Condition::Simplification => "Simplification",
            Condition::ConceptBow => "Concept Bag of Words",
            Condition::ConceptAnnotation => "Concept Annotation",
        }
    }

    pub fn uses_spans(self) -> bool {
        matches!(self, Condition::Bow | Condition::ConceptBow | Condition::ConceptAnnotation)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCondition(s.to_string()))
    }
}

/// Half-open byte range into an instance's UTF-8 text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    /// Span of the first occurrence of `needle` in `text`.
    pub fn find(text: &str, needle: &str) -> Option<Span> {
        text.find(needle).map(|s| Span::new(s, s + needle.len()))
    }

    pub fn check(&self, text: &str) -> Option<Violation> {
        if self.start >= self.end || self.end > text.len() {
            return Some(Violation::SpanOutOfBounds {
                start: self.start,
                end: self.end,
                text_len: text.len(),
            });
        }
        if !text.is_char_boundary(self.start) || !text.is_char_boundary(self.end) {
            return Some(Violation::SpanNotCharBoundary {
                start: self.start,
                end: self.end,
            });
        }
        None
    }

    /// Caller must have checked the span.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSpans {
    pub topic: String,
    pub description: String,
    pub spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptRoles {
    pub topic: String,
    pub description: String,
    #[serde(default)]
    pub topic_spans: Vec<Span>,
    #[serde(default)]
    pub description_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum JustificationBody {
    Bow { spans: Vec<Span> },
    Perturbation { perturbed_text: String },
    Simplification { simplified_text: String },
    ConceptBow { items: Vec<ConceptSpans> },
    ConceptAnnotation { items: Vec<ConceptRoles> },
}

/// Why `instance_id` carries `label`, in one of the five formats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Justification {
    pub instance_id: String,
    pub label: Label,
    pub author: String,
    #[serde(flatten)]
    pub body: JustificationBody,
}

impl Justification {
    pub fn condition(&self) -> Condition {
        match self.body {
            JustificationBody::Bow { .. } => Condition::Bow,
            JustificationBody::Perturbation { .. } => Condition::Perturbation,
            JustificationBody::Simplification { .. } => Condition::Simplification,
            JustificationBody::ConceptBow { .. } => Condition::ConceptBow,
            JustificationBody::ConceptAnnotation { .. } => Condition::ConceptAnnotation,
        }
    }

    /// Every span the record cites, across all items and roles.
    pub fn spans(&self) -> Vec<Span> {
        match &self.body {
            JustificationBody::Bow { spans } => spans.clone(),
            JustificationBody::ConceptBow { items } => items.iter().flat_map(|i| i.spans.iter().copied()).collect(),
            JustificationBody::ConceptAnnotation { items } => items
                .iter()
                .flat_map(|i| i.topic_spans.iter().chain(&i.description_spans).copied())
                .collect(),
            JustificationBody::Perturbation { .. } | JustificationBody::Simplification { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("span [{start}, {end}) out of bounds for text of {text_len} bytes")]
    SpanOutOfBounds { start: usize, end: usize, text_len: usize },
    #[error("span [{start}, {end}) does not fall on character boundaries")]
    SpanNotCharBoundary { start: usize, end: usize },
    #[error("{field} must contain at least one span")]
    EmptySpanList { field: String },
    #[error("perturbation unchanged")]
    PerturbationUnchanged,
    #[error("{field} is empty")]
    EmptyText { field: String },
    #[error("unknown concept ({topic}, {description})")]
    UnknownConcept { topic: String, description: String },
    #[error("no concept items")]
    NoConceptItems,
    #[error("asserted label {asserted} differs from instance label {gold}")]
    LabelMismatch { asserted: Label, gold: Label },
    #[error("author is empty")]
    EmptyAuthor,
}

/// Outcome of validating one record: hard violations and soft warnings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_spans(spans: &[Span], field: &str, text: &str, required: bool, out: &mut Vec<Violation>) {
    if required && spans.is_empty() {
        out.push(Violation::EmptySpanList { field: field.to_string() });
    }
    out.extend(spans.iter().filter_map(|s| s.check(text)));
}

fn check_concept(topic: &str, description: &str, taxonomies: &[&Taxonomy], out: &mut Vec<Violation>) {
    if !taxonomies.iter().any(|t| t.has_pair(topic, description)) {
        out.push(Violation::UnknownConcept {
            topic: topic.to_string(),
            description: description.to_string(),
        });
    }
}

/// Checks one record against its instance text, gold label and the
/// taxonomies in scope. Collects every violation rather than stopping.
pub fn validate_against(j: &Justification, text: &str, gold: Label, taxonomies: &[&Taxonomy]) -> Validation {
    let mut v = Validation::default();
    let out = &mut v.violations;
    if j.author.trim().is_empty() {
        out.push(Violation::EmptyAuthor);
    }
    if j.label != gold {
        out.push(Violation::LabelMismatch {
            asserted: j.label,
            gold,
        });
    }
    match &j.body {
        JustificationBody::Bow { spans } => check_spans(spans, "spans", text, true, out),
        JustificationBody::Perturbation { perturbed_text } => {
            if perturbed_text.trim().is_empty() {
                out.push(Violation::EmptyText {
                    field: "perturbed_text".into(),
                });
            } else if perturbed_text.trim() == text.trim() {
                out.push(Violation::PerturbationUnchanged);
            }
        }
        JustificationBody::Simplification { simplified_text } => {
            if simplified_text.trim().is_empty() {
                out.push(Violation::EmptyText {
                    field: "simplified_text".into(),
                });
            } else if simplified_text.len() > text.len() {
                v.warnings.push(format!(
                    "simplification is longer than the original ({} > {} bytes)",
                    simplified_text.len(),
                    text.len()
                ));
            }
        }
        JustificationBody::ConceptBow { items } => {
            if items.is_empty() {
                out.push(Violation::NoConceptItems);
            }
            for item in items {
                check_concept(&item.topic, &item.description, taxonomies, out);
                check_spans(&item.spans, "spans", text, true, out);
            }
        }
        JustificationBody::ConceptAnnotation { items } => {
            if items.is_empty() {
                out.push(Violation::NoConceptItems);
            }
            for item in items {
                check_concept(&item.topic, &item.description, taxonomies, out);
                if item.topic_spans.is_empty() && item.description_spans.is_empty() {
                    out.push(Violation::EmptySpanList {
                        field: "topic_spans/description_spans".into(),
                    });
                }
                check_spans(&item.topic_spans, "topic_spans", text, false, out);
                check_spans(&item.description_spans, "description_spans", text, false, out);
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "The delicious cake";

    fn taxonomy() -> Taxonomy {
        Taxonomy::new("e1").with_topic("food", ["tasty"])
    }

    fn just(body: JustificationBody) -> Justification {
        Justification {
            instance_id: "inst-000000".into(),
            label: Label::Positive,
            author: "e1".into(),
            body,
        }
    }

    fn check(body: JustificationBody) -> Validation {
        let t = taxonomy();
        validate_against(&just(body), TEXT, Label::Positive, &[&t])
    }

    #[test]
    fn in_bounds_span_ok() {
        let v = check(JustificationBody::Bow {
            spans: vec![Span::new(4, 13)],
        });
        assert!(v.is_ok(), "{v:?}");
        assert_eq!(Span::new(4, 13).slice(TEXT), "delicious");
    }

    #[test]
    fn bad_spans_all_reported() {
        let v = check(JustificationBody::Bow {
            spans: vec![Span::new(4, 40), Span::new(5, 5), Span::new(0, 3)],
        });
        assert_eq!(v.violations.len(), 2);
        let v = check(JustificationBody::Bow { spans: vec![] });
        assert_eq!(v.violations, vec![Violation::EmptySpanList { field: "spans".into() }]);
    }

    #[test]
    fn char_boundary_enforced() {
        let t = taxonomy();
        let text = "crème";
        let j = just(JustificationBody::Bow {
            spans: vec![Span::new(0, 3)],
        });
        let v = validate_against(&j, text, Label::Positive, &[&t]);
        assert!(matches!(v.violations[0], Violation::SpanNotCharBoundary { .. }));
    }

    #[test]
    fn unchanged_perturbation() {
        let v = check(JustificationBody::Perturbation {
            perturbed_text: TEXT.into(),
        });
        assert_eq!(v.violations, vec![Violation::PerturbationUnchanged]);
        assert_eq!(v.violations[0].to_string(), "perturbation unchanged");
    }

    #[test]
    fn unknown_concept() {
        let v = check(JustificationBody::ConceptBow {
            items: vec![ConceptSpans {
                topic: "price".into(),
                description: "high".into(),
                spans: vec![Span::new(4, 13)],
            }],
        });
        assert_eq!(v.violations.len(), 1);
        assert!(v.violations[0].to_string().starts_with("unknown concept"));
    }

    #[test]
    fn concept_annotation_needs_some_span() {
        let v = check(JustificationBody::ConceptAnnotation {
            items: vec![ConceptRoles {
                topic: "food".into(),
                description: "tasty".into(),
                topic_spans: vec![],
                description_spans: vec![Span::new(4, 13)],
            }],
        });
        assert!(v.is_ok());
        let v = check(JustificationBody::ConceptAnnotation {
            items: vec![ConceptRoles {
                topic: "food".into(),
                description: "tasty".into(),
                topic_spans: vec![],
                description_spans: vec![],
            }],
        });
        assert_eq!(v.violations.len(), 1);
    }

    #[test]
    fn long_simplification_warns() {
        let v = check(JustificationBody::Simplification {
            simplified_text: "The delicious cake was very good indeed".into(),
        });
        assert!(v.is_ok());
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn label_mismatch() {
        let t = taxonomy();
        let j = just(JustificationBody::Bow {
            spans: vec![Span::new(4, 13)],
        });
        let v = validate_against(&j, TEXT, Label::Negative, &[&t]);
        assert!(matches!(v.violations[0], Violation::LabelMismatch { .. }));
    }

    #[test]
    fn condition_tags_on_the_wire() {
        let j = just(JustificationBody::ConceptAnnotation { items: vec![] });
        let json = serde_json::to_value(&j).unwrap();
        assert_eq!(json["condition"], "concept_annotation");
        let back: Justification = serde_json::from_value(json).unwrap();
        assert_eq!(back, j);
        for c in Condition::ALL {
            assert_eq!(c.as_str().parse::<Condition>().unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), c.as_str());
        }
        assert!("crowd".parse::<Condition>().is_err());
    }
}
