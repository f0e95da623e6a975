//! Shared helpers for integration tests: fixture loading, a random ontology
//! generator, and a naive re-implementation of every similarity formula
//! working directly on the document records.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use ontosim::ontology::{
    Composition, Concept, ConceptKind, DescriptiveTriple, Domain, DomainCorrespondence, DomainValue, DomainVariant,
    Mapping, OntologyDocument, RestrictiveRelation, Sign, SortEdge, FORMAT_VERSION,
};
use ontosim::{JudgmentDataset, OntologyStore};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_store() -> OntologyStore {
    OntologyStore::from_path(fixture_path("ontology.json")).expect("fixture ontology loads")
}

pub fn fixture_dataset() -> JudgmentDataset {
    JudgmentDataset::from_path(fixture_path("judgments.csv")).expect("fixture dataset loads")
}

fn concept(id: String, kind: ConceptKind, essential: bool) -> Concept {
    Concept {
        id: id.as_str().into(),
        kind,
        terms: vec![(id, "en".into())],
        is_essential: essential,
    }
}

/// Random ontology of at most 30 concepts with every dimension populated:
/// entity and action taxonomies with multiple parents, essential flags,
/// compositions, signed restrictive relations, two numeric and two
/// enumerated domains joined by fuzzy-label and linear correspondences, and
/// descriptive triples with explicit, default and missing values.
pub fn random_document(seed: u64) -> OntologyDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entities = rng.random_range(6..=11);
    let n_actions = rng.random_range(3..=5);
    let n_attributes = rng.random_range(2..=3);
    let n_values = (rng.random_range(2..=3), rng.random_range(2..=3));

    let mut doc = OntologyDocument {
        format: FORMAT_VERSION,
        ..Default::default()
    };
    let entities: Vec<String> = (0..n_entities).map(|i| format!("e{i}")).collect();
    let actions: Vec<String> = (0..n_actions).map(|i| format!("a{i}")).collect();
    let attributes: Vec<String> = (0..n_attributes).map(|i| format!("attr{i}")).collect();
    let small: Vec<String> = (0..n_values.0).map(|i| format!("u{i}")).collect();
    let big: Vec<String> = (0..n_values.1).map(|i| format!("v{i}")).collect();

    for e in &entities {
        doc.concepts
            .push(concept(e.clone(), ConceptKind::Entity, rng.random_bool(0.4)));
    }
    for a in &actions {
        doc.concepts
            .push(concept(a.clone(), ConceptKind::Action, rng.random_bool(0.4)));
    }
    for a in &attributes {
        doc.concepts.push(concept(a.clone(), ConceptKind::Attribute, false));
    }
    for d in ["metres", "millimetres", "grade", "level"] {
        doc.concepts.push(concept(d.into(), ConceptKind::Domain, false));
    }
    for v in small.iter().chain(&big) {
        doc.concepts.push(concept(v.clone(), ConceptKind::Value, false));
    }
    assert!(doc.concepts.len() <= 30);

    // Taxonomies: parents always come earlier, so the graph is acyclic.
    for group in [&entities, &actions] {
        for i in 1..group.len() {
            let k = rng.random_range(0..=2.min(i));
            let mut parents: Vec<usize> = (0..i).collect();
            parents.shuffle(&mut rng);
            for &p in parents.iter().take(k) {
                doc.sort_edges.push(SortEdge {
                    child: group[i].as_str().into(),
                    parent: group[p].as_str().into(),
                });
            }
        }
    }

    for (i, whole) in entities.iter().enumerate() {
        if !rng.random_bool(0.6) {
            continue;
        }
        let mut others: Vec<usize> = (0..entities.len()).filter(|&j| j != i).collect();
        others.shuffle(&mut rng);
        for &j in others.iter().take(rng.random_range(1..=4)) {
            doc.compositions.push(Composition {
                whole: whole.as_str().into(),
                part: entities[j].as_str().into(),
                required: rng.random_bool(0.5),
            });
        }
    }

    for a in &actions {
        let mut targets: Vec<&String> = entities.iter().collect();
        targets.shuffle(&mut rng);
        for e in targets.into_iter().take(rng.random_range(0..=4)) {
            doc.restrictive.push(RestrictiveRelation {
                action: a.as_str().into(),
                entity: e.as_str().into(),
                sign: if rng.random_bool(0.6) {
                    Sign::Positive
                } else {
                    Sign::Negative
                },
            });
        }
    }

    doc.domains = vec![
        Domain {
            id: "metres".into(),
            variant: DomainVariant::Numeric {
                lower: 0.0,
                upper: 10.0,
                unit: "m".into(),
            },
        },
        Domain {
            id: "millimetres".into(),
            variant: DomainVariant::Numeric {
                lower: 0.0,
                upper: 10000.0,
                unit: "mm".into(),
            },
        },
        Domain {
            id: "grade".into(),
            variant: DomainVariant::Enumerated {
                members: small.iter().map(|v| v.as_str().into()).collect(),
            },
        },
        Domain {
            id: "level".into(),
            variant: DomainVariant::Enumerated {
                members: big.iter().map(|v| v.as_str().into()).collect(),
            },
        },
    ];
    let labels = |vals: &[String], hi: f64, rng: &mut ChaCha8Rng| -> BTreeMap<_, _> {
        vals.iter()
            .map(|v| (v.as_str().into(), (rng.random_range(0..=20) as f64) * hi / 20.0))
            .collect()
    };
    doc.correspondences = vec![
        DomainCorrespondence {
            from_domain: "grade".into(),
            to_domain: "metres".into(),
            mapping: Mapping::FuzzyLabels(labels(&small, 10.0, &mut rng)),
        },
        DomainCorrespondence {
            from_domain: "level".into(),
            to_domain: "millimetres".into(),
            mapping: Mapping::FuzzyLabels(labels(&big, 10000.0, &mut rng)),
        },
        DomainCorrespondence {
            from_domain: "metres".into(),
            to_domain: "millimetres".into(),
            mapping: Mapping::Linear {
                scale: 1000.0,
                offset: 0.0,
            },
        },
    ];

    let subjects: Vec<&String> = entities.iter().chain(&actions).collect();
    for s in subjects {
        if !rng.random_bool(0.7) {
            continue;
        }
        for attr in &attributes {
            if !rng.random_bool(0.6) {
                continue;
            }
            let domain = *["metres", "millimetres", "grade", "level"].choose(&mut rng).unwrap();
            let value = if rng.random_bool(0.25) {
                None
            } else {
                Some(match domain {
                    "metres" => DomainValue::Numeric(rng.random_range(0..=2) as f64 * 5.0),
                    "millimetres" => DomainValue::Numeric(rng.random_range(0..=2) as f64 * 5000.0),
                    "grade" => DomainValue::Concept(small.choose(&mut rng).unwrap().as_str().into()),
                    _ => DomainValue::Concept(big.choose(&mut rng).unwrap().as_str().into()),
                })
            };
            let by_default = value.is_some() && rng.random_bool(0.3);
            doc.descriptive.push(DescriptiveTriple {
                subject: s.as_str().into(),
                attribute: attr.as_str().into(),
                domain: domain.into(),
                value,
                assigned_by_default: by_default,
            });
        }
    }
    doc
}

/// Straight-from-the-formula similarity over plain string sets.
pub mod oracle {
    use super::*;

    type Set = BTreeSet<String>;

    fn kind(doc: &OntologyDocument, c: &str) -> ConceptKind {
        doc.concepts.iter().find(|x| x.id.as_str() == c).expect("concept").kind
    }

    pub fn ancestors(doc: &OntologyDocument, c: &str) -> Set {
        let mut seen = Set::new();
        let mut stack = vec![c.to_string()];
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                for e in &doc.sort_edges {
                    if e.child.as_str() == x {
                        stack.push(e.parent.to_string());
                    }
                }
            }
        }
        seen
    }

    fn essentials(doc: &OntologyDocument, c: &str) -> Set {
        ancestors(doc, c)
            .into_iter()
            .filter(|a| doc.concepts.iter().any(|x| x.id.as_str() == a && x.is_essential))
            .collect()
    }

    fn parts(doc: &OntologyDocument, c: &str, only_required: bool) -> Set {
        doc.compositions
            .iter()
            .filter(|p| p.whole.as_str() == c && (p.required || !only_required))
            .map(|p| p.part.to_string())
            .collect()
    }

    fn common(a: &Set, b: &Set) -> f64 {
        a.intersection(b).count() as f64
    }

    fn dice(a: &Set, b: &Set) -> Option<f64> {
        let den = (a.len() + b.len()) as f64;
        (den > 0.0).then(|| 2.0 * common(a, b) / den)
    }

    fn mean(terms: &[Option<f64>]) -> Option<f64> {
        let present: Vec<f64> = terms.iter().flatten().copied().collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    }

    pub fn sort(doc: &OntologyDocument, c1: &str, c2: &str) -> Option<f64> {
        let (a, b) = (ancestors(doc, c1), ancestors(doc, c2));
        Some(2.0 * common(&a, &b) / (a.len() + b.len()) as f64)
    }

    pub fn comp(doc: &OntologyDocument, c1: &str, c2: &str) -> Option<f64> {
        let (all1, all2) = (parts(doc, c1, false), parts(doc, c2, false));
        let (req1, req2) = (parts(doc, c1, true), parts(doc, c2, true));
        if all1.is_empty() && all2.is_empty() {
            return None;
        }
        let frac = |n: f64, d: usize| (d > 0).then(|| n / d as f64);
        mean(&[
            frac(common(&all1, &req2), req2.len()),
            frac(common(&all2, &req1), req1.len()),
            dice(&req1, &req2),
            dice(&all1, &all2),
        ])
    }

    pub fn essential(doc: &OntologyDocument, c1: &str, c2: &str) -> Option<f64> {
        dice(&essentials(doc, c1), &essentials(doc, c2))
    }

    fn related(doc: &OntologyDocument, c: &str, sign: Sign, c_is_entity: bool) -> Set {
        doc.restrictive
            .iter()
            .filter(|r| r.sign == sign)
            .filter_map(|r| {
                if c_is_entity && r.entity.as_str() == c {
                    Some(r.action.to_string())
                } else if !c_is_entity && r.action.as_str() == c {
                    Some(r.entity.to_string())
                } else {
                    None
                }
            })
            .collect()
    }

    /// `None` both for "no knowledge" and for comparisons the dimension does
    /// not define.
    pub fn restrictive(doc: &OntologyDocument, c1: &str, c2: &str) -> Option<f64> {
        let (k1, k2) = (kind(doc, c1), kind(doc, c2));
        match (k1, k2) {
            (ConceptKind::Entity, ConceptKind::Entity) => {
                let p1 = related(doc, c1, Sign::Positive, true);
                let n1 = related(doc, c1, Sign::Negative, true);
                let p2 = related(doc, c2, Sign::Positive, true);
                let n2 = related(doc, c2, Sign::Negative, true);
                let m1 = common(&p1, &p2);
                let m2 = common(&n1, &n2);
                let pos = (p1.len() + p2.len() > 0).then(|| m1 / (p1.len() + p2.len()) as f64);
                let neg = (n1.len() + n2.len() > 0).then(|| m2 / (n1.len() + n2.len()) as f64);
                mean(&[pos, neg])
            }
            (ConceptKind::Action, ConceptKind::Action) => {
                let p1 = related(doc, c1, Sign::Positive, false);
                let n1 = related(doc, c1, Sign::Negative, false);
                let p2 = related(doc, c2, Sign::Positive, false);
                let n2 = related(doc, c2, Sign::Negative, false);
                mean(&[dice(&p1, &p2), dice(&n1, &n2)])
            }
            _ => None,
        }
    }

    fn is_subject(k: ConceptKind) -> bool {
        matches!(k, ConceptKind::Entity | ConceptKind::Action | ConceptKind::Abstract)
    }

    fn domain<'a>(doc: &'a OntologyDocument, id: &str) -> Option<&'a Domain> {
        doc.domains.iter().find(|d| d.id.as_str() == id)
    }

    /// Numeric image of value concept `v` in numeric domain `target`, via a
    /// fuzzy label, optionally followed by one linear hop.
    fn numeric_image(doc: &OntologyDocument, v: &str, target: &str) -> Option<f64> {
        let home = doc
            .domains
            .iter()
            .find(|d| d.members().iter().any(|m| m.as_str() == v))?;
        let (lo, hi) = domain(doc, target)?.bounds()?;
        for c in doc.correspondences.iter().filter(|c| c.from_domain == home.id) {
            let Mapping::FuzzyLabels(labels) = &c.mapping else {
                continue;
            };
            let x = labels[v];
            let y = if c.to_domain.as_str() == target {
                Some(x)
            } else {
                doc.correspondences.iter().find_map(|h| match h.mapping {
                    Mapping::Linear { scale, offset }
                        if h.from_domain == c.to_domain && h.to_domain.as_str() == target =>
                    {
                        Some(scale * x + offset)
                    }
                    _ => None,
                })
            };
            if let Some(y) = y.filter(|y| (lo - 1e-9..=hi + 1e-9).contains(y)) {
                return Some(y.clamp(lo, hi));
            }
        }
        None
    }

    pub fn descriptive(doc: &OntologyDocument, c1: &str, c2: &str) -> Option<f64> {
        let (k1, k2) = (kind(doc, c1), kind(doc, c2));
        if is_subject(k1) && is_subject(k2) {
            let t1: Vec<&DescriptiveTriple> = doc.descriptive.iter().filter(|t| t.subject.as_str() == c1).collect();
            let t2: Vec<&DescriptiveTriple> = doc.descriptive.iter().filter(|t| t.subject.as_str() == c2).collect();
            if t1.is_empty() && t2.is_empty() {
                return None;
            }
            let (mut n1, mut n2, mut n3) = (0.0, 0.0, 0.0);
            for x in &t1 {
                for y in t2.iter().filter(|y| y.attribute == x.attribute) {
                    match (&x.value, &y.value) {
                        (None, None) => n1 += 1.0,
                        (Some(a), Some(b)) if a == b => {
                            if x.assigned_by_default == y.assigned_by_default {
                                n2 += 1.0;
                            } else {
                                n3 += 1.0;
                            }
                        }
                        _ => {}
                    }
                }
            }
            return Some((2.0 * n1 + 2.0 * n2 + n3) / (t1.len() + t2.len()) as f64);
        }
        match (k1, k2) {
            (ConceptKind::Attribute, ConceptKind::Attribute) => {
                let values = |a: &str| -> Set {
                    doc.descriptive
                        .iter()
                        .filter(|t| t.attribute.as_str() == a)
                        .flat_map(|t| domain(doc, t.domain.as_str()).unwrap().members())
                        .map(|m| m.to_string())
                        .collect()
                };
                dice(&values(c1), &values(c2))
            }
            (ConceptKind::Domain, ConceptKind::Domain) => {
                let attrs = |d: &str| -> Set {
                    doc.descriptive
                        .iter()
                        .filter(|t| t.domain.as_str() == d)
                        .map(|t| t.attribute.to_string())
                        .collect()
                };
                let members = |d: &str| -> Set {
                    domain(doc, d)
                        .map(|x| x.members().iter().map(|m| m.to_string()).collect())
                        .unwrap_or_default()
                };
                mean(&[dice(&attrs(c1), &attrs(c2)), dice(&members(c1), &members(c2))])
            }
            (ConceptKind::Value, ConceptKind::Value) => {
                if c1 == c2 {
                    return Some(1.0);
                }
                doc.domains.iter().find_map(|d| {
                    let (lo, hi) = d.bounds()?;
                    let x1 = numeric_image(doc, c1, d.id.as_str())?;
                    let x2 = numeric_image(doc, c2, d.id.as_str())?;
                    Some((1.0 - (x1 - x2).abs() / (hi - lo)).clamp(0.0, 1.0))
                })
            }
            _ => None,
        }
    }

    pub fn partials(doc: &OntologyDocument, c1: &str, c2: &str) -> [Option<f64>; 5] {
        [
            sort(doc, c1, c2),
            comp(doc, c1, c2),
            essential(doc, c1, c2),
            restrictive(doc, c1, c2),
            descriptive(doc, c1, c2),
        ]
    }
}

/// Twenty pairs that share concepts heavily: successive hubs drawn from
/// `concepts` are paired with up to four partners each, keeping pairs whose
/// partials leave room above the strongest dimension.
pub fn shared_concept_pairs(store: &OntologyStore, concepts: &[String]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    let mut hubs = BTreeSet::new();
    for h in concepts {
        if pairs.len() >= 20 {
            break;
        }
        let partners: Vec<&String> = concepts
            .iter()
            .filter(|c| *c != h && !hubs.contains(*c))
            .filter(|c| {
                let p = ontosim::similarity::partials(store, h, c).unwrap();
                p.iter().flatten().count() >= 3 && p.iter().flatten().all(|&x| x < 0.9)
            })
            .take(4)
            .collect();
        if partners.len() == 4 {
            hubs.insert(h.clone());
            pairs.extend(partners.into_iter().map(|c| (h.clone(), c.clone())));
        }
    }
    pairs.truncate(20);
    pairs
}

/// Ground-truth weights for pair `k`: even pairs put almost all weight on
/// their strongest dimension, odd pairs weigh every dimension equally.
pub fn hidden_weights(partials: &[Option<f64>; 5], k: usize) -> ontosim::WeightVector {
    let mut w = [1.0; 5];
    if k.is_multiple_of(2) {
        let top = (0..5)
            .filter(|&d| partials[d].is_some())
            .max_by(|&x, &y| partials[x].partial_cmp(&partials[y]).unwrap())
            .unwrap();
        w = [0.1; 5];
        w[top] = 20.0;
    }
    ontosim::WeightVector::new(w, [1.0; 5]).unwrap()
}

/// Judgments generated from hidden weights: each score is the weighted
/// similarity on the 0-10 scale plus Gaussian noise, clipped to the scale.
pub fn hidden_weight_dataset(
    store: &OntologyStore,
    pairs: &[(String, String)],
    users: u32,
    noise_sd: f64,
    seed: u64,
) -> JudgmentDataset {
    use rand_distr::{Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).unwrap();
    let mut judgments = Vec::new();
    for (k, (c1, c2)) in pairs.iter().enumerate() {
        let p = ontosim::similarity::partials(store, c1, c2).unwrap();
        let s = ontosim::aggregate(&p, &hidden_weights(&p, k)).unwrap();
        for u in 0..users {
            let score = (10.0 * s + noise.sample(&mut rng)).clamp(0.0, 10.0);
            judgments.push(ontosim::Judgment {
                pair_id: k as u32,
                c1: c1.as_str().into(),
                c2: c2.as_str().into(),
                user_id: u,
                score,
            });
        }
    }
    JudgmentDataset::new(judgments).unwrap()
}

/// Sorted, deduplicated concepts of a dataset.
pub fn dataset_concepts(ds: &JudgmentDataset) -> Vec<String> {
    let set: BTreeSet<String> = ds
        .pairs()
        .iter()
        .flat_map(|p| [p.c1.to_string(), p.c2.to_string()])
        .collect();
    set.into_iter().collect()
}
