use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub descriptions: Vec<String>,
}

/// One expert's topic → descriptions hierarchy, e.g. `food → {tasty, cold}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub author: String,
    pub topics: Vec<Topic>,
    /// Client-supplied timestamp; the repository never reads the clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

fn key(s: &str) -> String {
    s.trim().to_lowercase()
}

impl Taxonomy {
    pub fn new(author: impl Into<String>) -> Self {
        Taxonomy {
            author: author.into(),
            topics: Vec::new(),
            created_at: None,
        }
    }

    pub fn with_topic<S: Into<String>>(mut self, name: impl Into<String>, descriptions: impl IntoIterator<Item = S>) -> Self {
        self.topics.push(Topic {
            name: name.into(),
            descriptions: descriptions.into_iter().map(Into::into).collect(),
        });
        self
    }

    /// Every broken invariant, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.author.trim().is_empty() {
            out.push("taxonomy author is empty".to_string());
        }
        if self.topics.is_empty() {
            out.push("taxonomy has no topics".to_string());
        }
        let mut names = BTreeSet::new();
        for topic in &self.topics {
            if topic.name.trim().is_empty() {
                out.push("topic name is empty".to_string());
            } else if !names.insert(key(&topic.name)) {
                out.push(format!("duplicate topic {:?}", topic.name));
            }
            let mut descs = BTreeSet::new();
            for d in &topic.descriptions {
                if d.trim().is_empty() {
                    out.push(format!("empty description under topic {:?}", topic.name));
                } else if !descs.insert(key(d)) {
                    out.push(format!("duplicate description {:?} under topic {:?}", d, topic.name));
                }
            }
        }
        out
    }

    pub fn topic(&self, name: &str) -> Option<&Topic> {
        let k = key(name);
        self.topics.iter().find(|t| key(&t.name) == k)
    }

    pub fn has_pair(&self, topic: &str, description: &str) -> bool {
        let d = key(description);
        self.topic(topic)
            .is_some_and(|t| t.descriptions.iter().any(|x| key(x) == d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_taxonomy() {
        let t = Taxonomy::new("e1")
            .with_topic("food", ["tasty", "cold"])
            .with_topic("service", ["kind"]);
        assert!(t.violations().is_empty());
        assert!(t.has_pair("Food", "TASTY"));
        assert!(!t.has_pair("price", "high"));
    }

    #[test]
    fn duplicate_topics_case_insensitive() {
        let t = Taxonomy::new("e1")
            .with_topic("Food", ["tasty"])
            .with_topic("food", ["cold", "cold"]);
        let v = t.violations();
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn empty_taxonomy() {
        assert_eq!(Taxonomy::new("e1").violations(), vec!["taxonomy has no topics"]);
    }
}
