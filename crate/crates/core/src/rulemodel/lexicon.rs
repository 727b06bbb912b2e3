use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

const CLOSED_CLASS_DATA: &str = include_str!("closed_class.txt");

/// Closed-class word lists, keyed by word class.
#[derive(Debug)]
pub struct ClosedClass {
    pub version: String,
    classes: BTreeMap<String, BTreeSet<String>>,
    all: BTreeSet<String>,
}

impl ClosedClass {
    pub fn parse(data: &str) -> ClosedClass {
        let mut version = String::from("0");
        let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for line in data.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("version ") {
                version = v.trim().to_string();
            } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(name.to_string());
                classes.entry(name.to_string()).or_default();
            } else if let Some(name) = &current {
                let set = classes.get_mut(name).expect("section registered");
                set.extend(line.split_whitespace().map(str::to_string));
            }
        }
        let all = classes.values().flatten().cloned().collect();
        ClosedClass { version, classes, all }
    }

    pub fn shipped() -> &'static ClosedClass {
        static SHIPPED: OnceLock<ClosedClass> = OnceLock::new();
        SHIPPED.get_or_init(|| ClosedClass::parse(CLOSED_CLASS_DATA))
    }

    pub fn is(&self, class: &str, word: &str) -> bool {
        self.classes.get(class).is_some_and(|s| s.contains(word))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.all.contains(word)
    }

    /// Alphabetic word outside every closed class.
    pub fn is_content(&self, word: &str) -> bool {
        word.chars().any(char::is_alphabetic) && !self.contains(word)
    }
}

/// Folds typographic apostrophes so lexicon lookups see one spelling.
pub fn normalize(word: &str) -> String {
    word.replace('\u{2019}', "'")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_list_loads() {
        let cc = ClosedClass::shipped();
        assert_eq!(cc.version, "1");
        assert!(cc.is("copula", "was"));
        assert!(cc.is("negator", "never"));
        assert!(cc.is("distributive", "and"));
        assert!(!cc.is_content("the"));
        assert!(!cc.is_content("42"));
        assert!(cc.is_content("cake"));
        assert!(cc.is_content("rich"));
    }
}
