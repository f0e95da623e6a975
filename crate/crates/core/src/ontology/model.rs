//! Serializable ontology records. These mirror the on-disk JSON format
//! one-to-one; [`OntologyStore`](super::OntologyStore) is built from them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Current version of the ontology file format.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        ConceptId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    fn from(s: &str) -> Self {
        ConceptId(s.to_owned())
    }
}

impl std::borrow::Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptKind {
    Entity,
    Action,
    Attribute,
    Domain,
    Value,
    Abstract,
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConceptKind::Entity => "entity",
            ConceptKind::Action => "action",
            ConceptKind::Attribute => "attribute",
            ConceptKind::Domain => "domain",
            ConceptKind::Value => "value",
            ConceptKind::Abstract => "abstract",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub kind: ConceptKind,
    /// Semiotic links: (term, language tag).
    #[serde(default)]
    pub terms: Vec<(String, String)>,
    #[serde(default)]
    pub is_essential: bool,
}

/// `child` is_a `parent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortEdge {
    pub child: ConceptId,
    pub parent: ConceptId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub whole: ConceptId,
    pub part: ConceptId,
    pub required: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictiveRelation {
    pub action: ConceptId,
    pub entity: ConceptId,
    pub sign: Sign,
}

/// A value held by a descriptive triple: either a member concept of an
/// enumerated domain or a magnitude in a numeric one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainValue {
    Numeric(f64),
    Concept(ConceptId),
}

impl fmt::Display for DomainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainValue::Numeric(x) => write!(f, "{x}"),
            DomainValue::Concept(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveTriple {
    pub subject: ConceptId,
    pub attribute: ConceptId,
    pub domain: ConceptId,
    #[serde(default)]
    pub value: Option<DomainValue>,
    #[serde(default)]
    pub assigned_by_default: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainVariant {
    Numeric { lower: f64, upper: f64, unit: String },
    Enumerated { members: Vec<ConceptId> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub id: ConceptId,
    pub variant: DomainVariant,
}

impl Domain {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self.variant {
            DomainVariant::Numeric { lower, upper, .. } => Some((lower, upper)),
            DomainVariant::Enumerated { .. } => None,
        }
    }

    pub fn members(&self) -> &[ConceptId] {
        match &self.variant {
            DomainVariant::Numeric { .. } => &[],
            DomainVariant::Enumerated { members } => members,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    /// `target = scale * source + offset`, numeric to numeric.
    Linear { scale: f64, offset: f64 },
    /// Representative numeric value for each member of an enumerated domain.
    FuzzyLabels(BTreeMap<ConceptId, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainCorrespondence {
    pub from_domain: ConceptId,
    pub to_domain: ConceptId,
    pub mapping: Mapping,
}

/// The whole ontology file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OntologyDocument {
    pub format: u32,
    #[serde(default)]
    pub concepts: Vec<Concept>,
    #[serde(default)]
    pub sort_edges: Vec<SortEdge>,
    #[serde(default)]
    pub compositions: Vec<Composition>,
    #[serde(default)]
    pub restrictive: Vec<RestrictiveRelation>,
    #[serde(default)]
    pub descriptive: Vec<DescriptiveTriple>,
    #[serde(default)]
    pub domains: Vec<Domain>,
    #[serde(default)]
    pub correspondences: Vec<DomainCorrespondence>,
}
