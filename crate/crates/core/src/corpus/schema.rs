use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DEFAULT_SCHEMA: &str = include_str!("../../data/schema.json");

/// Category and act inventory plus the act → category mapping.
///
/// Labels are addressed by their position in `categories` / `acts`; the
/// position is the class index used by every classifier layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaFile", into = "SchemaFile")]
pub struct TagSchema {
    categories: Vec<String>,
    acts: Vec<String>,
    category_of: Vec<usize>,
    category_index: HashMap<String, usize>,
    act_index: HashMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SchemaFile {
    categories: Vec<String>,
    acts: Vec<ActEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ActEntry {
    name: String,
    category: String,
}

impl TryFrom<SchemaFile> for TagSchema {
    type Error = Error;

    fn try_from(file: SchemaFile) -> Result<Self> {
        let pairs = file
            .acts
            .into_iter()
            .map(|a| (a.name, a.category))
            .collect::<Vec<_>>();
        TagSchema::new(file.categories, pairs)
    }
}

impl From<TagSchema> for SchemaFile {
    fn from(schema: TagSchema) -> Self {
        let acts = schema
            .acts
            .iter()
            .zip(&schema.category_of)
            .map(|(name, &c)| ActEntry {
                name: name.clone(),
                category: schema.categories[c].clone(),
            })
            .collect();
        SchemaFile {
            categories: schema.categories,
            acts,
        }
    }
}

impl TagSchema {
    pub fn new(categories: Vec<String>, acts: Vec<(String, String)>) -> Result<Self> {
        if categories.len() < 2 {
            return Err(Error::Schema("at least two categories are required".into()));
        }
        if acts.len() < 2 {
            return Err(Error::Schema("at least two acts are required".into()));
        }
        let mut category_index = HashMap::new();
        for (i, c) in categories.iter().enumerate() {
            if c.trim().is_empty() {
                return Err(Error::Schema("empty category label".into()));
            }
            if category_index.insert(c.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate category {c:?}")));
            }
        }
        let mut act_index = HashMap::new();
        let mut names = Vec::with_capacity(acts.len());
        let mut category_of = Vec::with_capacity(acts.len());
        for (i, (name, cat)) in acts.into_iter().enumerate() {
            if name.trim().is_empty() {
                return Err(Error::Schema("empty act label".into()));
            }
            let Some(&c) = category_index.get(&cat) else {
                return Err(Error::Schema(format!(
                    "act {name:?} maps to unknown category {cat:?}"
                )));
            };
            if act_index.insert(name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate act {name:?}")));
            }
            names.push(name);
            category_of.push(c);
        }
        Ok(Self {
            categories,
            acts: names,
            category_of,
            category_index,
            act_index,
        })
    }

    /// Six categories and the eighteen acts named for call-center dialogues.
    pub fn default_schema() -> Self {
        Self::from_json(DEFAULT_SCHEMA).expect("bundled schema is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn acts(&self) -> &[String] {
        &self.acts
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn num_acts(&self) -> usize {
        self.acts.len()
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.category_index.get(label).copied()
    }

    pub fn act_index(&self, label: &str) -> Option<usize> {
        self.act_index.get(label).copied()
    }

    /// Category index of an act index.
    pub fn category_of(&self, act: usize) -> usize {
        self.category_of[act]
    }

    pub fn category_of_label(&self, act: &str) -> Option<&str> {
        self.act_index(act)
            .map(|a| self.categories[self.category_of[a]].as_str())
    }

    pub fn acts_in_category(&self, category: usize) -> impl Iterator<Item = usize> + '_ {
        self.category_of
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == category)
            .map(|(a, _)| a)
    }

    /// Short content hash of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("schema serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..6])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_has_six_categories_and_named_acts() {
        let s = TagSchema::default_schema();
        assert_eq!(s.num_categories(), 6);
        assert_eq!(s.num_acts(), 18);
        assert_eq!(s.category_of_label("Greeting"), Some("Social Obligation"));
        assert_eq!(s.category_of_label("Service-Question"), Some("Question"));
        let so = s.category_index("Social Obligation").unwrap();
        let mut acts: Vec<_> = s.acts_in_category(so).map(|a| s.acts()[a].clone()).collect();
        acts.sort();
        assert_eq!(acts, ["Apology", "Greeting", "SelfIntroduce", "Thanking"]);
    }

    #[test]
    fn json_round_trip() {
        let s = TagSchema::default_schema();
        let back = TagSchema::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.fingerprint(), back.fingerprint());
    }

    #[test]
    fn rejects_unknown_category_and_duplicates() {
        let cats = vec!["A".to_string(), "B".to_string()];
        let bad = TagSchema::new(
            cats.clone(),
            vec![("x".into(), "A".into()), ("y".into(), "C".into())],
        );
        assert!(matches!(bad, Err(Error::Schema(_))));
        let dup = TagSchema::new(cats, vec![("x".into(), "A".into()), ("x".into(), "B".into())]);
        assert!(matches!(dup, Err(Error::Schema(_))));
    }

    #[test]
    fn needs_two_of_each() {
        let r = TagSchema::new(vec!["A".into()], vec![("x".into(), "A".into())]);
        assert!(r.is_err());
    }
}
