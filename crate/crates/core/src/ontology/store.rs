use std::collections::{BTreeSet, HashMap};

use super::model::*;
use crate::error::{Error, Result};

/// Which components of a whole to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartFilter {
    All,
    Required,
    Optional,
}

/// Sign filter for restrictive lookups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignFilter {
    Positive,
    Negative,
    Any,
}

impl From<Sign> for SignFilter {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Positive => SignFilter::Positive,
            Sign::Negative => SignFilter::Negative,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct AttributeSlot {
    pub attribute: usize,
    pub value: Option<DomainValue>,
    pub by_default: bool,
}

/// Entity counts per ontological dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct StoreStats {
    pub concepts: usize,
    pub essential_concepts: usize,
    pub terms: usize,
    pub sort_edges: usize,
    pub compositions: usize,
    pub restrictive: usize,
    pub descriptive: usize,
    pub domains: usize,
    pub correspondences: usize,
}

/// Immutable, validated ontology with precomputed adjacency and closures.
///
/// Concepts are addressed internally by their position in the source
/// document; all set-valued indexes hold sorted, deduplicated positions.
#[derive(Debug)]
pub struct OntologyStore {
    pub(crate) doc: OntologyDocument,
    pub(crate) index: HashMap<ConceptId, usize>,
    pub(crate) ancestors: Vec<Vec<usize>>,
    pub(crate) essential: Vec<Vec<usize>>,
    pub(crate) parts_all: Vec<Vec<usize>>,
    pub(crate) parts_required: Vec<Vec<usize>>,
    pub(crate) actions_pos: Vec<Vec<usize>>,
    pub(crate) actions_neg: Vec<Vec<usize>>,
    pub(crate) entities_pos: Vec<Vec<usize>>,
    pub(crate) entities_neg: Vec<Vec<usize>>,
    pub(crate) attributes: Vec<Vec<AttributeSlot>>,
    pub(crate) attribute_values: Vec<Vec<usize>>,
    pub(crate) domain_attributes: Vec<Vec<usize>>,
    /// Concept position of a domain -> position in `doc.domains`.
    pub(crate) domain_record: HashMap<usize, usize>,
    /// Value concept -> enumerated domains listing it, in document order.
    pub(crate) value_domains: Vec<Vec<usize>>,
    /// Source domain -> positions in `doc.correspondences`.
    pub(crate) correspondences_from: HashMap<usize, Vec<usize>>,
}

impl OntologyStore {
    pub fn len(&self) -> usize {
        self.doc.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc.concepts.is_empty()
    }

    pub fn document(&self) -> &OntologyDocument {
        &self.doc
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.doc.concepts.iter()
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.doc.concepts[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn stats(&self) -> StoreStats {
        let d = &self.doc;
        StoreStats {
            concepts: d.concepts.len(),
            essential_concepts: d.concepts.iter().filter(|c| c.is_essential).count(),
            terms: d.concepts.iter().map(|c| c.terms.len()).sum(),
            sort_edges: d.sort_edges.len(),
            compositions: d.compositions.len(),
            restrictive: d.restrictive.len(),
            descriptive: d.descriptive.len(),
            domains: d.domains.len(),
            correspondences: d.correspondences.len(),
        }
    }

    pub(crate) fn idx(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(id.to_owned()))
    }

    pub(crate) fn kind_of(&self, i: usize) -> ConceptKind {
        self.doc.concepts[i].kind
    }

    pub(crate) fn id_of(&self, i: usize) -> &ConceptId {
        &self.doc.concepts[i].id
    }

    fn id_set(&self, positions: impl IntoIterator<Item = usize>) -> BTreeSet<&ConceptId> {
        positions.into_iter().map(|i| self.id_of(i)).collect()
    }

    pub(crate) fn expect_kind(&self, i: usize, expected: ConceptKind) -> Result<()> {
        let found = self.kind_of(i);
        if found == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                concept: self.id_of(i).to_string(),
                expected: expected.to_string(),
                found: found.to_string(),
            })
        }
    }

    /// Reflexive-transitive closure of `c` over is_a edges (child to parent).
    pub fn ancestors(&self, c: &str) -> Result<BTreeSet<&ConceptId>> {
        let i = self.idx(c)?;
        Ok(self.id_set(self.ancestors[i].iter().copied()))
    }

    /// Ancestors of `c` (itself included) that belong to the essential taxonomy.
    pub fn essential_ancestors(&self, c: &str) -> Result<BTreeSet<&ConceptId>> {
        let i = self.idx(c)?;
        Ok(self.id_set(self.essential[i].iter().copied()))
    }

    /// Direct components of `c`; part-of is not followed transitively.
    pub fn parts(&self, c: &str, which: PartFilter) -> Result<BTreeSet<&ConceptId>> {
        let i = self.idx(c)?;
        let set = match which {
            PartFilter::All => self.id_set(self.parts_all[i].iter().copied()),
            PartFilter::Required => self.id_set(self.parts_required[i].iter().copied()),
            PartFilter::Optional => self.id_set(
                self.parts_all[i]
                    .iter()
                    .copied()
                    .filter(|p| self.parts_required[i].binary_search(p).is_err()),
            ),
        };
        Ok(set)
    }

    pub fn related_actions(&self, entity: &str, sign: SignFilter) -> Result<BTreeSet<&ConceptId>> {
        let i = self.idx(entity)?;
        self.expect_kind(i, ConceptKind::Entity)?;
        Ok(self.signed_set(&self.actions_pos[i], &self.actions_neg[i], sign))
    }

    pub fn related_entities(&self, action: &str, sign: SignFilter) -> Result<BTreeSet<&ConceptId>> {
        let i = self.idx(action)?;
        self.expect_kind(i, ConceptKind::Action)?;
        Ok(self.signed_set(&self.entities_pos[i], &self.entities_neg[i], sign))
    }

    fn signed_set(&self, pos: &[usize], neg: &[usize], sign: SignFilter) -> BTreeSet<&ConceptId> {
        match sign {
            SignFilter::Positive => self.id_set(pos.iter().copied()),
            SignFilter::Negative => self.id_set(neg.iter().copied()),
            SignFilter::Any => self.id_set(pos.iter().chain(neg).copied()),
        }
    }

    pub fn domain(&self, id: &str) -> Option<&Domain> {
        let i = *self.index.get(id)?;
        self.domain_record.get(&i).map(|&d| &self.doc.domains[d])
    }

    pub(crate) fn domain_at(&self, i: usize) -> Option<&Domain> {
        self.domain_record.get(&i).map(|&d| &self.doc.domains[d])
    }

    /// Maps `value`, expressed in domain `from`, into numeric domain `target`.
    ///
    /// Accepts the identity, one correspondence hop, or two hops where the
    /// second is a linear numeric-to-numeric map.
    pub fn to_numeric(&self, value: &DomainValue, from: &str, target: &str) -> Result<f64> {
        let from_i = self.idx(from)?;
        let target_i = self.idx(target)?;
        let target_dom = self
            .domain_at(target_i)
            .ok_or_else(|| Error::validation(target, "not a declared domain"))?;
        let (lower, upper) = target_dom.bounds().ok_or_else(|| Error::KindMismatch {
            concept: target.to_owned(),
            expected: "numeric domain".into(),
            found: "enumerated domain".into(),
        })?;
        let source_dom = self
            .domain_at(from_i)
            .ok_or_else(|| Error::validation(from, "not a declared domain"))?;
        self.check_source_value(source_dom, value)?;

        let mapped = if from_i == target_i {
            match value {
                DomainValue::Numeric(x) => Some(*x),
                DomainValue::Concept(_) => None,
            }
        } else {
            self.map_within_two_hops(value, from_i, target_i)
        };
        let x = mapped.ok_or_else(|| Error::NoCorrespondence {
            from: from.to_owned(),
            to: target.to_owned(),
        })?;
        if !(lower - 1e-9..=upper + 1e-9).contains(&x) {
            return Err(Error::OutOfRange {
                domain: target.to_owned(),
                value: x,
                lower,
                upper,
            });
        }
        Ok(x.clamp(lower, upper))
    }

    fn check_source_value(&self, dom: &Domain, value: &DomainValue) -> Result<()> {
        match (&dom.variant, value) {
            (DomainVariant::Numeric { lower, upper, .. }, DomainValue::Numeric(x)) => {
                if (*lower..=*upper).contains(x) {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        domain: dom.id.to_string(),
                        value: *x,
                        lower: *lower,
                        upper: *upper,
                    })
                }
            }
            (DomainVariant::Enumerated { members }, DomainValue::Concept(c)) if members.contains(c) => Ok(()),
            _ => Err(Error::validation(
                dom.id.to_string(),
                format!("value `{value}` does not belong to this domain"),
            )),
        }
    }

    fn apply_hop(&self, corr: usize, value: &DomainValue) -> Option<f64> {
        match (&self.doc.correspondences[corr].mapping, value) {
            (Mapping::Linear { scale, offset }, DomainValue::Numeric(x)) => Some(scale * x + offset),
            (Mapping::FuzzyLabels(labels), DomainValue::Concept(c)) => labels.get(c).copied(),
            _ => None,
        }
    }

    fn map_within_two_hops(&self, value: &DomainValue, from: usize, target: usize) -> Option<f64> {
        let first_hops = self.correspondences_from.get(&from)?;
        // Direct hop first, then via one intermediate numeric domain.
        for &c in first_hops {
            if self.index[&self.doc.correspondences[c].to_domain] == target {
                if let Some(x) = self.apply_hop(c, value) {
                    return Some(x);
                }
            }
        }
        for &c in first_hops {
            let mid = self.index[&self.doc.correspondences[c].to_domain];
            let Some(x) = self.apply_hop(c, value) else { continue };
            for &c2 in self.correspondences_from.get(&mid).into_iter().flatten() {
                if self.index[&self.doc.correspondences[c2].to_domain] == target {
                    if let Some(y) = self.apply_hop(c2, &DomainValue::Numeric(x)) {
                        return Some(y);
                    }
                }
            }
        }
        None
    }

    /// Numeric domains in document order.
    pub(crate) fn numeric_domains(&self) -> impl Iterator<Item = &Domain> {
        self.doc.domains.iter().filter(|d| d.bounds().is_some())
    }
}

/// Size of the intersection of two sorted, deduplicated slices.
pub(crate) fn intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}
