use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Read;
use std::path::Path;

use super::model::*;
use super::store::{AttributeSlot, OntologyStore};
use crate::error::{Error, Result};

/// Parses and validates an ontology document.
pub fn load_ontology<R: Read>(source: R) -> Result<OntologyStore> {
    let doc: OntologyDocument = serde_json::from_reader(source)?;
    OntologyStore::from_document(doc)
}

impl OntologyStore {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        load_ontology(std::io::BufReader::new(file))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        load_ontology(json.as_bytes())
    }

    pub fn from_document(doc: OntologyDocument) -> Result<Self> {
        if doc.format != FORMAT_VERSION {
            return Err(Error::validation(
                "format",
                format!("unsupported format {}, expected {FORMAT_VERSION}", doc.format),
            ));
        }
        Builder::new(doc)?.build()
    }
}

struct Builder {
    doc: OntologyDocument,
    index: HashMap<ConceptId, usize>,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl Builder {
    fn new(doc: OntologyDocument) -> Result<Self> {
        let mut index = HashMap::with_capacity(doc.concepts.len());
        for (i, c) in doc.concepts.iter().enumerate() {
            if c.id.0.is_empty() {
                return Err(Error::validation(format!("concepts[{i}]"), "empty concept id"));
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::validation(c.id.to_string(), "duplicate concept id"));
            }
        }
        Ok(Builder { doc, index })
    }

    fn resolve(&self, id: &ConceptId, context: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::validation(context, format!("dangling concept id `{id}`")))
    }

    fn resolve_kind(&self, id: &ConceptId, kind: ConceptKind, context: &str) -> Result<usize> {
        let i = self.resolve(id, context)?;
        let found = self.doc.concepts[i].kind;
        if found != kind {
            return Err(Error::validation(
                context,
                format!("`{id}` has kind {found}, expected {kind}"),
            ));
        }
        Ok(i)
    }

    fn build(self) -> Result<OntologyStore> {
        let n = self.doc.concepts.len();

        // Sort dimension.
        let mut parents = vec![Vec::new(); n];
        for e in &self.doc.sort_edges {
            let ctx = format!("sort_edge {} -> {}", e.child, e.parent);
            let c = self.resolve(&e.child, &ctx)?;
            let p = self.resolve(&e.parent, &ctx)?;
            if c == p {
                return Err(Error::validation(ctx, "cycle: self loop"));
            }
            parents[c].push(p);
        }
        let parents: Vec<Vec<usize>> = parents.into_iter().map(sorted).collect();
        let order = self.topological_order(&parents)?;
        let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); n];
        // Parents precede children in `order`, so their closures are ready.
        for &c in &order {
            let mut acc = vec![c];
            for &p in &parents[c] {
                acc.extend_from_slice(&ancestors[p]);
            }
            ancestors[c] = sorted(acc);
        }
        let essential: Vec<Vec<usize>> = ancestors
            .iter()
            .map(|a| {
                a.iter()
                    .copied()
                    .filter(|&x| self.doc.concepts[x].is_essential)
                    .collect()
            })
            .collect();

        // Compositional dimension.
        let mut parts_all = vec![Vec::new(); n];
        let mut parts_required = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for comp in &self.doc.compositions {
            let ctx = format!("composition {} > {}", comp.whole, comp.part);
            let w = self.resolve(&comp.whole, &ctx)?;
            let p = self.resolve(&comp.part, &ctx)?;
            if w == p {
                return Err(Error::validation(ctx, "a concept cannot be part of itself"));
            }
            if !seen.insert((w, p)) {
                return Err(Error::validation(ctx, "duplicate composition"));
            }
            parts_all[w].push(p);
            if comp.required {
                parts_required[w].push(p);
            }
        }
        let parts_all = parts_all.into_iter().map(sorted).collect();
        let parts_required = parts_required.into_iter().map(sorted).collect();

        // Restrictive dimension.
        let mut actions_pos = vec![Vec::new(); n];
        let mut actions_neg = vec![Vec::new(); n];
        let mut entities_pos = vec![Vec::new(); n];
        let mut entities_neg = vec![Vec::new(); n];
        let mut signs: HashMap<(usize, usize), Sign> = HashMap::new();
        for r in &self.doc.restrictive {
            let ctx = format!("restrictive {} ~ {}", r.action, r.entity);
            let a = self.resolve_kind(&r.action, ConceptKind::Action, &ctx)?;
            let e = self.resolve_kind(&r.entity, ConceptKind::Entity, &ctx)?;
            if let Some(prev) = signs.insert((a, e), r.sign) {
                let reason = if prev == r.sign {
                    "duplicate restrictive relation"
                } else {
                    "sign conflict: pair declared both positive and negative"
                };
                return Err(Error::validation(ctx, reason));
            }
            match r.sign {
                Sign::Positive => {
                    actions_pos[e].push(a);
                    entities_pos[a].push(e);
                }
                Sign::Negative => {
                    actions_neg[e].push(a);
                    entities_neg[a].push(e);
                }
            }
        }

        // Domains.
        let mut domain_record = HashMap::new();
        let mut value_domains = vec![Vec::new(); n];
        for (k, d) in self.doc.domains.iter().enumerate() {
            let ctx = format!("domain {}", d.id);
            let di = self.resolve_kind(&d.id, ConceptKind::Domain, &ctx)?;
            if domain_record.insert(di, k).is_some() {
                return Err(Error::validation(ctx, "domain declared twice"));
            }
            match &d.variant {
                DomainVariant::Numeric { lower, upper, .. } => {
                    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                        return Err(Error::validation(ctx, "numeric bounds require lower < upper"));
                    }
                }
                DomainVariant::Enumerated { members } => {
                    if members.is_empty() {
                        return Err(Error::validation(ctx, "enumerated domain has no members"));
                    }
                    let mut uniq = HashSet::new();
                    for m in members {
                        let mi = self.resolve_kind(m, ConceptKind::Value, &ctx)?;
                        if !uniq.insert(mi) {
                            return Err(Error::validation(ctx, format!("duplicate member `{m}`")));
                        }
                        value_domains[mi].push(di);
                    }
                }
            }
        }

        // Descriptive dimension.
        let mut attributes: Vec<Vec<AttributeSlot>> = vec![Vec::new(); n];
        let mut attribute_domains: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut domain_attributes: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &self.doc.descriptive {
            let ctx = format!("descriptive ({}, {}, {})", t.subject, t.attribute, t.domain);
            let s = self.resolve(&t.subject, &ctx)?;
            let a = self.resolve_kind(&t.attribute, ConceptKind::Attribute, &ctx)?;
            let di = self.resolve_kind(&t.domain, ConceptKind::Domain, &ctx)?;
            let dom = domain_record
                .get(&di)
                .map(|&k| &self.doc.domains[k])
                .ok_or_else(|| Error::validation(&ctx, format!("`{}` is not a declared domain", t.domain)))?;
            match (&t.value, &dom.variant) {
                (None, _) => {
                    if t.assigned_by_default {
                        return Err(Error::validation(ctx, "default flag set without a value"));
                    }
                }
                (Some(DomainValue::Numeric(x)), DomainVariant::Numeric { lower, upper, .. }) => {
                    if !(lower..=upper).contains(&x) {
                        return Err(Error::validation(ctx, format!("value {x} outside [{lower}, {upper}]")));
                    }
                }
                (Some(DomainValue::Concept(c)), DomainVariant::Enumerated { members }) => {
                    if !members.contains(c) {
                        return Err(Error::validation(ctx, format!("`{c}` is not a member of the domain")));
                    }
                }
                (Some(v), _) => {
                    return Err(Error::validation(
                        ctx,
                        format!("value `{v}` does not fit the domain kind"),
                    ));
                }
            }
            if attributes[s].iter().any(|slot| slot.attribute == a) {
                return Err(Error::validation(ctx, "attribute described twice for the same subject"));
            }
            attributes[s].push(AttributeSlot {
                attribute: a,
                value: t.value.clone(),
                by_default: t.assigned_by_default,
            });
            attribute_domains[a].push(di);
            domain_attributes[di].push(a);
        }
        for slots in &mut attributes {
            slots.sort_by_key(|s| s.attribute);
        }
        let attribute_values = attribute_domains
            .into_iter()
            .map(|doms| {
                let mut vals = Vec::new();
                for d in sorted(doms) {
                    for m in self.doc.domains[domain_record[&d]].members() {
                        vals.push(self.index[m]);
                    }
                }
                sorted(vals)
            })
            .collect();
        let domain_attributes = domain_attributes.into_iter().map(sorted).collect();

        // Correspondences.
        let mut correspondences_from: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, c) in self.doc.correspondences.iter().enumerate() {
            let ctx = format!("correspondence {} -> {}", c.from_domain, c.to_domain);
            let lookup = |id: &ConceptId| -> Result<(usize, &Domain)> {
                let i = self.resolve_kind(id, ConceptKind::Domain, &ctx)?;
                let d = domain_record
                    .get(&i)
                    .map(|&r| &self.doc.domains[r])
                    .ok_or_else(|| Error::validation(&ctx, format!("`{id}` is not a declared domain")))?;
                Ok((i, d))
            };
            let (fi, from) = lookup(&c.from_domain)?;
            let (_, to) = lookup(&c.to_domain)?;
            match (&c.mapping, &from.variant, &to.variant) {
                (Mapping::Linear { scale, offset }, DomainVariant::Numeric { .. }, DomainVariant::Numeric { .. }) => {
                    if !(scale.is_finite() && offset.is_finite() && *scale != 0.0) {
                        return Err(Error::validation(ctx, "linear map needs a finite non-zero scale"));
                    }
                }
                (
                    Mapping::FuzzyLabels(labels),
                    DomainVariant::Enumerated { members },
                    DomainVariant::Numeric { lower, upper, .. },
                ) => {
                    for m in members {
                        match labels.get(m) {
                            None => {
                                return Err(Error::validation(
                                    ctx,
                                    format!("member `{m}` has no representative value"),
                                ))
                            }
                            Some(x) if !(lower..=upper).contains(&x) => {
                                return Err(Error::validation(
                                    ctx,
                                    format!("representative {x} of `{m}` outside [{lower}, {upper}]"),
                                ))
                            }
                            Some(_) => {}
                        }
                    }
                    if let Some(extra) = labels.keys().find(|k| !members.contains(k)) {
                        return Err(Error::validation(
                            ctx,
                            format!("`{extra}` is not a member of the source domain"),
                        ));
                    }
                }
                (Mapping::Linear { .. }, _, _) => {
                    return Err(Error::validation(ctx, "linear maps relate two numeric domains"));
                }
                (Mapping::FuzzyLabels(_), _, _) => {
                    return Err(Error::validation(
                        ctx,
                        "fuzzy labels map an enumerated domain to a numeric one",
                    ));
                }
            }
            correspondences_from.entry(fi).or_default().push(k);
        }

        Ok(OntologyStore {
            doc: self.doc,
            index: self.index,
            ancestors,
            essential,
            parts_all,
            parts_required,
            actions_pos: actions_pos.into_iter().map(sorted).collect(),
            actions_neg: actions_neg.into_iter().map(sorted).collect(),
            entities_pos: entities_pos.into_iter().map(sorted).collect(),
            entities_neg: entities_neg.into_iter().map(sorted).collect(),
            attributes,
            attribute_values,
            domain_attributes,
            domain_record,
            value_domains,
            correspondences_from,
        })
    }

    /// Kahn's algorithm from the roots down; reports one cycle on failure.
    fn topological_order(&self, parents: &[Vec<usize>]) -> Result<Vec<usize>> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &c in &children[i] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        let cycle = find_cycle(parents, &pending);
        let names: Vec<&str> = cycle.iter().map(|&i| self.doc.concepts[i].id.as_str()).collect();
        Err(Error::validation(
            names[0],
            format!("cycle in sort edges: {}", names.join(" -> ")),
        ))
    }
}

/// Walks parent links among unresolved nodes until a node repeats.
fn find_cycle(parents: &[Vec<usize>], pending: &[usize]) -> Vec<usize> {
    let start = pending.iter().position(|&p| p > 0).expect("cycle exists");
    let mut pos: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut cur = start;
    loop {
        if let Some(&k) = pos.get(&cur) {
            let mut cycle = path[k..].to_vec();
            cycle.push(cur);
            return cycle;
        }
        pos.insert(cur, path.len());
        path.push(cur);
        // Every unresolved node has at least one unresolved parent.
        cur = *parents[cur]
            .iter()
            .find(|&&p| pending[p] > 0)
            .expect("unresolved node has an unresolved parent");
    }
}
