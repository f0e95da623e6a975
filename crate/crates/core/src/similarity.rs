//! Per-dimension similarity measures and their weighted aggregation.
//!
//! Every partial measure returns `None` ("not applicable") when the ontology
//! holds no knowledge for the pair in that dimension. Terms of a formula whose
//! denominator is zero are dropped and the remaining terms averaged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{intersection_count, ConceptKind, DomainValue, OntologyStore};

/// The five dimensions that take part in the global measure, in weight order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Sort,
    Compositional,
    Essential,
    Restrictive,
    Descriptive,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Sort,
        Dimension::Compositional,
        Dimension::Essential,
        Dimension::Restrictive,
        Dimension::Descriptive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Sort => "sort",
            Dimension::Compositional => "comp",
            Dimension::Essential => "essential",
            Dimension::Restrictive => "restrictive",
            Dimension::Descriptive => "descriptive",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sort" => Ok(Dimension::Sort),
            "comp" | "compositional" => Ok(Dimension::Compositional),
            "essential" => Ok(Dimension::Essential),
            "restrictive" => Ok(Dimension::Restrictive),
            "descriptive" => Ok(Dimension::Descriptive),
            other => Err(format!("unknown dimension `{other}`")),
        }
    }
}

/// One dimension's score; `value` is `None` when the dimension has no
/// knowledge about the pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSimilarity {
    pub dimension: Dimension,
    pub value: Option<f64>,
}

impl PartialSimilarity {
    pub fn is_applicable(&self) -> bool {
        self.value.is_some()
    }
}

/// Partial scores indexed by [`Dimension::index`].
pub type Partials = [Option<f64>; 5];

/// Aggregation weights plus the increments applied at the previous training step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w: [f64; 5],
    pub prev_delta: [f64; 5],
}

impl WeightVector {
    pub fn ones() -> Self {
        Self::uniform(1.0, 1.0)
    }

    pub fn uniform(weight: f64, prev_delta: f64) -> Self {
        WeightVector {
            w: [weight; 5],
            prev_delta: [prev_delta; 5],
        }
    }

    /// Validated constructor for externally supplied weights.
    pub fn new(w: [f64; 5], prev_delta: [f64; 5]) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Range("weights must be finite and non-negative".into()));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::Range("at least one weight must be positive".into()));
        }
        if prev_delta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Range("previous increments must be finite".into()));
        }
        Ok(WeightVector { w, prev_delta })
    }

    pub fn weight(&self, d: Dimension) -> f64 {
        self.w[d.index()]
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        Self::ones()
    }
}

fn dice(common: usize, a: usize, b: usize) -> Option<f64> {
    (a + b > 0).then(|| 2.0 * common as f64 / (a + b) as f64)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean_of_present(terms: &[Option<f64>]) -> Option<f64> {
    let (sum, n) = terms.iter().flatten().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Wu-Palmer style overlap of the two reflexive ancestor sets.
pub fn sim_sort(store: &OntologyStore, c1: &str, c2: &str) -> Result<PartialSimilarity> {
    let (a, b) = (store.idx(c1)?, store.idx(c2)?);
    let (x, y) = (&store.ancestors[a], &store.ancestors[b]);
    Ok(PartialSimilarity {
        dimension: Dimension::Sort,
        value: dice(intersection_count(x, y), x.len(), y.len()),
    })
}

/// Overlap of required and optional components.
pub fn sim_comp(store: &OntologyStore, c1: &str, c2: &str) -> Result<PartialSimilarity> {
    let (a, b) = (store.idx(c1)?, store.idx(c2)?);
    let (all1, all2) = (&store.parts_all[a], &store.parts_all[b]);
    let (req1, req2) = (&store.parts_required[a], &store.parts_required[b]);
    let value = if all1.is_empty() && all2.is_empty() {
        None
    } else {
        let n1 = intersection_count(all1, req2);
        let n2 = intersection_count(all2, req1);
        let n3 = intersection_count(req1, req2);
        let n4 = intersection_count(all1, all2);
        let (m1, m2) = (req1.len(), req2.len());
        let (m3, m4) = (all1.len(), all2.len());
        mean_of_present(&[ratio(n1, m2), ratio(n2, m1), dice(n3, m1, m2), dice(n4, m3, m4)])
    };
    Ok(PartialSimilarity {
        dimension: Dimension::Compositional,
        value,
    })
}

/// Dice coefficient of the essential-ancestor sets.
pub fn sim_essential(store: &OntologyStore, c1: &str, c2: &str) -> Result<PartialSimilarity> {
    let (a, b) = (store.idx(c1)?, store.idx(c2)?);
    let (x, y) = (&store.essential[a], &store.essential[b]);
    Ok(PartialSimilarity {
        dimension: Dimension::Essential,
        value: dice(intersection_count(x, y), x.len(), y.len()),
    })
}

/// Restrictive similarity: entities compare the actions they admit,
/// actions compare the entities they restrict (per sign, then averaged).
pub fn sim_restrictive(store: &OntologyStore, c1: &str, c2: &str) -> Result<PartialSimilarity> {
    let (a, b) = (store.idx(c1)?, store.idx(c2)?);
    let value = match (store.kind_of(a), store.kind_of(b)) {
        (ConceptKind::Entity, ConceptKind::Entity) => {
            let (p1, n1) = (&store.actions_pos[a], &store.actions_neg[a]);
            let (p2, n2) = (&store.actions_pos[b], &store.actions_neg[b]);
            if p1.is_empty() && n1.is_empty() && p2.is_empty() && n2.is_empty() {
                None
            } else {
                // Common positives over all positives, and likewise for negatives.
                let positive = ratio(intersection_count(p1, p2), p1.len() + p2.len());
                let negative = ratio(intersection_count(n1, n2), n1.len() + n2.len());
                mean_of_present(&[positive, negative])
            }
        }
        (ConceptKind::Action, ConceptKind::Action) => {
            let (p1, n1) = (&store.entities_pos[a], &store.entities_neg[a]);
            let (p2, n2) = (&store.entities_pos[b], &store.entities_neg[b]);
            mean_of_present(&[
                dice(intersection_count(p1, p2), p1.len(), p2.len()),
                dice(intersection_count(n1, n2), n1.len(), n2.len()),
            ])
        }
        (k1, k2) => {
            let (concept, found, expected) = if matches!(k1, ConceptKind::Entity | ConceptKind::Action) {
                (c2, k2, k1)
            } else {
                (
                    c1,
                    k1,
                    if k2 == ConceptKind::Action {
                        k2
                    } else {
                        ConceptKind::Entity
                    },
                )
            };
            return Err(Error::KindMismatch {
                concept: concept.to_owned(),
                expected: expected.to_string(),
                found: found.to_string(),
            });
        }
    };
    Ok(PartialSimilarity {
        dimension: Dimension::Restrictive,
        value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DescriptiveRole {
    Subject,
    Attribute,
    Domain,
    Value,
}

fn role_of(kind: ConceptKind) -> DescriptiveRole {
    match kind {
        ConceptKind::Attribute => DescriptiveRole::Attribute,
        ConceptKind::Domain => DescriptiveRole::Domain,
        ConceptKind::Value => DescriptiveRole::Value,
        ConceptKind::Entity | ConceptKind::Action | ConceptKind::Abstract => DescriptiveRole::Subject,
    }
}

/// Descriptive similarity, dispatched on the role both concepts play
/// (described subject, attribute, domain or domain value).
pub fn sim_descriptive(store: &OntologyStore, c1: &str, c2: &str) -> Result<PartialSimilarity> {
    let (a, b) = (store.idx(c1)?, store.idx(c2)?);
    let role = role_of(store.kind_of(a));
    if role != role_of(store.kind_of(b)) {
        return Err(Error::RoleMismatch(c1.to_owned(), c2.to_owned()));
    }
    let value = match role {
        DescriptiveRole::Subject => descriptive_subjects(store, a, b),
        DescriptiveRole::Attribute => {
            let (x, y) = (&store.attribute_values[a], &store.attribute_values[b]);
            dice(intersection_count(x, y), x.len(), y.len())
        }
        DescriptiveRole::Domain => {
            let (x, y) = (&store.domain_attributes[a], &store.domain_attributes[b]);
            let attrs = dice(intersection_count(x, y), x.len(), y.len());
            let m1 = store.domain_at(a).map(|d| d.members()).unwrap_or(&[]);
            let m2 = store.domain_at(b).map(|d| d.members()).unwrap_or(&[]);
            let shared = m1.iter().filter(|m| m2.contains(m)).count();
            mean_of_present(&[attrs, dice(shared, m1.len(), m2.len())])
        }
        DescriptiveRole::Value => Some(descriptive_values(store, a, b)?),
    };
    Ok(PartialSimilarity {
        dimension: Dimension::Descriptive,
        value,
    })
}

fn descriptive_subjects(store: &OntologyStore, a: usize, b: usize) -> Option<f64> {
    let (s1, s2) = (&store.attributes[a], &store.attributes[b]);
    let (m1, m2) = (s1.len(), s2.len());
    if m1 + m2 == 0 {
        return None;
    }
    let (mut unvalued, mut equal, mut equal_one_default) = (0usize, 0usize, 0usize);
    for x in s1 {
        let Ok(k) = s2.binary_search_by_key(&x.attribute, |s| s.attribute) else {
            continue;
        };
        let y = &s2[k];
        match (&x.value, &y.value) {
            (None, None) => unvalued += 1,
            (Some(u), Some(v)) if u == v => {
                if x.by_default != y.by_default {
                    equal_one_default += 1;
                } else {
                    // Both explicit, or both inherited from the same default.
                    equal += 1;
                }
            }
            _ => {}
        }
    }
    Some((2 * unvalued + 2 * equal + equal_one_default) as f64 / (m1 + m2) as f64)
}

fn descriptive_values(store: &OntologyStore, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Ok(1.0);
    }
    let (v1, v2) = (store.id_of(a), store.id_of(b));
    let no_path = || Error::NoCorrespondence {
        from: v1.to_string(),
        to: v2.to_string(),
    };
    let (&d1, &d2) = (
        store.value_domains[a].first().ok_or_else(no_path)?,
        store.value_domains[b].first().ok_or_else(no_path)?,
    );
    let (d1, d2) = (store.id_of(d1).as_str(), store.id_of(d2).as_str());
    let (x1, x2) = (DomainValue::Concept(v1.clone()), DomainValue::Concept(v2.clone()));
    for target in store.numeric_domains() {
        let t = target.id.as_str();
        if let (Ok(p), Ok(q)) = (store.to_numeric(&x1, d1, t), store.to_numeric(&x2, d2, t)) {
            let (lower, upper) = target.bounds().expect("numeric domain");
            return Ok((1.0 - (p - q).abs() / (upper - lower).abs()).clamp(0.0, 1.0));
        }
    }
    Err(no_path())
}

/// Weighted mean over the applicable partials.
pub fn aggregate(partials: &Partials, weights: &WeightVector) -> Result<f64> {
    let (num, den) = partials
        .iter()
        .zip(weights.w)
        .filter_map(|(p, w)| p.map(|s| (s * w, w)))
        .fold((0.0, 0.0), |(n, d), (sw, w)| (n + sw, d + w));
    if den > 0.0 {
        Ok((num / den).clamp(0.0, 1.0))
    } else {
        Err(Error::NothingApplicable)
    }
}

/// Global score together with the partials that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityResult {
    pub global: f64,
    pub partials: [PartialSimilarity; 5],
}

/// Computes all five partials. Comparisons a dimension does not define for
/// the pair (cross-kind restrictive, cross-role descriptive, values with no
/// shared numeric domain) are reported as not applicable.
pub fn partials(store: &OntologyStore, c1: &str, c2: &str) -> Result<Partials> {
    fn soft(r: Result<PartialSimilarity>) -> Result<Option<f64>> {
        match r {
            Ok(p) => Ok(p.value),
            Err(Error::KindMismatch { .. } | Error::RoleMismatch(..) | Error::NoCorrespondence { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
    Ok([
        sim_sort(store, c1, c2)?.value,
        sim_comp(store, c1, c2)?.value,
        sim_essential(store, c1, c2)?.value,
        soft(sim_restrictive(store, c1, c2))?,
        soft(sim_descriptive(store, c1, c2))?,
    ])
}

pub fn similarity(store: &OntologyStore, c1: &str, c2: &str, weights: &WeightVector) -> Result<SimilarityResult> {
    let p = partials(store, c1, c2)?;
    let global = aggregate(&p, weights)?;
    Ok(SimilarityResult {
        global,
        partials: std::array::from_fn(|i| PartialSimilarity {
            dimension: Dimension::ALL[i],
            value: p[i],
        }),
    })
}
