//! Multi-dimensional ontology: sort (is_a polytree), compositional,
//! essential, restrictive and descriptive knowledge about concepts, plus the
//! semiotic term links carried on each concept.

mod load;
mod model;
mod store;

pub use load::load_ontology;
pub use model::*;
pub(crate) use store::intersection_count;
pub use store::{OntologyStore, PartFilter, SignFilter, StoreStats};

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap, VecDeque};

    use proptest::prelude::*;
    use serde_json::json;

    use super::*;
    use crate::Error;

    fn concept(id: &str, kind: &str, essential: bool) -> serde_json::Value {
        json!({"id": id, "kind": kind, "terms": [[id, "en"]], "is_essential": essential})
    }

    fn store(v: serde_json::Value) -> OntologyStore {
        OntologyStore::from_json(&v.to_string()).unwrap()
    }

    fn ids(set: BTreeSet<&ConceptId>) -> Vec<&str> {
        set.into_iter().map(|c| c.as_str()).collect()
    }

    fn diamond() -> OntologyStore {
        store(json!({
            "format": 1,
            "concepts": [concept("a", "entity", true), concept("b1", "entity", false),
                         concept("b2", "entity", true), concept("c", "entity", false),
                         concept("r", "entity", false)],
            "sort_edges": [{"child": "c", "parent": "b1"}, {"child": "c", "parent": "b2"},
                           {"child": "b1", "parent": "a"}, {"child": "b2", "parent": "a"}]
        }))
    }

    #[test]
    fn empty_document_loads() {
        let s = store(
            json!({"format": 1, "concepts": [], "sort_edges": [], "compositions": [],
            "restrictive": [], "descriptive": [], "domains": [], "correspondences": []}),
        );
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn format_field_is_required() {
        let err = OntologyStore::from_json(r#"{"concepts": []}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let err = OntologyStore::from_json(r#"{"format": 2}"#).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn two_node_cycle_is_rejected() {
        let err = OntologyStore::from_json(
            &json!({"format": 1,
                "concepts": [concept("A", "entity", false), concept("B", "entity", false)],
                "sort_edges": [{"child": "A", "parent": "B"}, {"child": "B", "parent": "A"}]})
            .to_string(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cycle"), "{msg}");
        assert!(msg.contains('A') && msg.contains('B'), "{msg}");
    }

    #[test]
    fn dangling_ids_are_named() {
        let err = OntologyStore::from_json(
            &json!({"format": 1, "concepts": [concept("x", "entity", false)],
                "descriptive": [{"subject": "x", "attribute": "ghost", "domain": "d"}]})
            .to_string(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn sign_conflict_is_rejected() {
        let err = OntologyStore::from_json(
            &json!({"format": 1,
                "concepts": [concept("burn", "action", false), concept("pc", "entity", false)],
                "restrictive": [{"action": "burn", "entity": "pc", "sign": "positive"},
                                {"action": "burn", "entity": "pc", "sign": "negative"}]})
            .to_string(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sign conflict"));
    }

    #[test]
    fn ancestors_of_root_and_chain() {
        let s = store(json!({"format": 1,
            "concepts": [concept("a", "entity", false), concept("b", "entity", false), concept("c", "entity", false)],
            "sort_edges": [{"child": "c", "parent": "b"}, {"child": "b", "parent": "a"}]}));
        assert_eq!(ids(s.ancestors("a").unwrap()), vec!["a"]);
        assert_eq!(ids(s.ancestors("c").unwrap()), vec!["a", "b", "c"]);
        assert!(matches!(s.ancestors("zzz"), Err(Error::UnknownConcept(_))));
    }

    #[test]
    fn ancestors_of_diamond_match_bfs() {
        let s = diamond();
        let got = ids(s.ancestors("c").unwrap());
        assert_eq!(got, bfs(&s.document().sort_edges, "c"));
        assert_eq!(got, vec!["a", "b1", "b2", "c"]);
    }

    #[test]
    fn essential_ancestors_filter_closure() {
        let s = diamond();
        assert_eq!(ids(s.essential_ancestors("c").unwrap()), vec!["a", "b2"]);
        assert_eq!(ids(s.essential_ancestors("b2").unwrap()), vec!["a", "b2"]);
        assert!(s.essential_ancestors("r").unwrap().is_empty());
    }

    #[test]
    fn parts_are_direct_only() {
        let s = store(json!({"format": 1,
            "concepts": [concept("computer", "entity", false), concept("cpu", "entity", false),
                         concept("ram", "entity", false), concept("printer", "entity", false),
                         concept("board", "entity", false), concept("chip", "entity", false),
                         concept("rock", "entity", false)],
            "compositions": [
                {"whole": "computer", "part": "cpu", "required": true},
                {"whole": "computer", "part": "ram", "required": true},
                {"whole": "computer", "part": "printer", "required": false},
                {"whole": "computer", "part": "board", "required": true},
                {"whole": "board", "part": "chip", "required": true}]}));
        assert_eq!(s.parts("computer", PartFilter::All).unwrap().len(), 4);
        assert_eq!(s.parts("computer", PartFilter::Required).unwrap().len(), 3);
        assert_eq!(ids(s.parts("computer", PartFilter::Optional).unwrap()), vec!["printer"]);
        assert!(!ids(s.parts("computer", PartFilter::All).unwrap()).contains(&"chip"));
        for f in [PartFilter::All, PartFilter::Required, PartFilter::Optional] {
            assert!(s.parts("rock", f).unwrap().is_empty());
        }
    }

    fn restrictive_store() -> OntologyStore {
        store(json!({"format": 1,
            "concepts": [concept("compute", "action", false), concept("burn", "action", false),
                         concept("computer", "entity", false), concept("calculator", "entity", false),
                         concept("laptop", "entity", false), concept("stone", "entity", false)],
            "restrictive": [
                {"action": "compute", "entity": "computer", "sign": "positive"},
                {"action": "compute", "entity": "calculator", "sign": "positive"},
                {"action": "compute", "entity": "laptop", "sign": "positive"},
                {"action": "burn", "entity": "computer", "sign": "negative"}]}))
    }

    #[test]
    fn restrictive_lookups_respect_signs() {
        let s = restrictive_store();
        assert_eq!(
            ids(s.related_actions("computer", SignFilter::Positive).unwrap()),
            vec!["compute"]
        );
        assert_eq!(
            ids(s.related_actions("computer", SignFilter::Negative).unwrap()),
            vec!["burn"]
        );
        assert_eq!(
            ids(s.related_actions("computer", SignFilter::Any).unwrap()),
            vec!["burn", "compute"]
        );
        assert!(s.related_actions("stone", SignFilter::Any).unwrap().is_empty());
        assert_eq!(
            ids(s.related_entities("compute", SignFilter::Positive).unwrap()),
            vec!["calculator", "computer", "laptop"]
        );
        assert!(s.related_entities("compute", SignFilter::Negative).unwrap().is_empty());
        assert!(matches!(
            s.related_actions("compute", SignFilter::Any),
            Err(Error::KindMismatch { .. })
        ));
    }

    fn domain_store() -> OntologyStore {
        store(json!({"format": 1,
            "concepts": [concept("bytes", "domain", false), concept("kbytes", "domain", false),
                         concept("size", "domain", false), concept("size2", "domain", false),
                         concept("small", "value", false), concept("large", "value", false),
                         concept("tiny", "value", false)],
            "domains": [
                {"id": "bytes", "variant": {"numeric": {"lower": 0.0, "upper": 1000.0, "unit": "B"}}},
                {"id": "kbytes", "variant": {"numeric": {"lower": 0.0, "upper": 1.0, "unit": "KB"}}},
                {"id": "size", "variant": {"enumerated": {"members": ["small", "large"]}}},
                {"id": "size2", "variant": {"enumerated": {"members": ["tiny"]}}}],
            "correspondences": [
                {"from_domain": "kbytes", "to_domain": "bytes", "mapping": {"linear": {"scale": 1000.0, "offset": 0.0}}},
                {"from_domain": "bytes", "to_domain": "kbytes", "mapping": {"linear": {"scale": 0.001, "offset": 0.0}}},
                {"from_domain": "size", "to_domain": "bytes", "mapping": {"fuzzy_labels": {"small": 100.0, "large": 900.0}}}]}))
    }

    #[test]
    fn numeric_mappings() {
        let s = domain_store();
        let v = |x| DomainValue::Numeric(x);
        let c = |id: &str| DomainValue::Concept(id.into());
        assert_eq!(s.to_numeric(&v(512.0), "bytes", "bytes").unwrap(), 512.0);
        assert_eq!(s.to_numeric(&v(0.5), "kbytes", "bytes").unwrap(), 500.0);
        assert_eq!(s.to_numeric(&c("small"), "size", "bytes").unwrap(), 100.0);
        // Enumerated -> numeric -> numeric.
        assert!((s.to_numeric(&c("large"), "size", "kbytes").unwrap() - 0.9).abs() < 1e-12);
        assert!(matches!(
            s.to_numeric(&c("tiny"), "size2", "bytes"),
            Err(Error::NoCorrespondence { .. })
        ));
        assert!(matches!(
            s.to_numeric(&v(2.0), "kbytes", "bytes"),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn linear_scale_of_thousand() {
        let s = store(json!({"format": 1,
            "concepts": [concept("kb", "domain", false), concept("b", "domain", false)],
            "domains": [
                {"id": "kb", "variant": {"numeric": {"lower": 0.0, "upper": 10.0, "unit": "KB"}}},
                {"id": "b", "variant": {"numeric": {"lower": 0.0, "upper": 10000.0, "unit": "B"}}}],
            "correspondences": [
                {"from_domain": "kb", "to_domain": "b", "mapping": {"linear": {"scale": 1000.0, "offset": 0.0}}}]}));
        assert_eq!(s.to_numeric(&DomainValue::Numeric(2.0), "kb", "b").unwrap(), 2000.0);
    }

    #[test]
    fn fuzzy_labels_must_cover_members_within_bounds() {
        let mut doc: OntologyDocument =
            serde_json::from_str(&serde_json::to_string(domain_store().document()).unwrap()).unwrap();
        if let Mapping::FuzzyLabels(l) = &mut doc.correspondences[2].mapping {
            l.insert("large".into(), 5000.0);
        }
        assert!(OntologyStore::from_document(doc.clone()).is_err());
        if let Mapping::FuzzyLabels(l) = &mut doc.correspondences[2].mapping {
            l.remove("large");
        }
        assert!(OntologyStore::from_document(doc).is_err());
    }

    fn bfs<'a>(edges: &'a [SortEdge], start: &'a str) -> Vec<&'a str> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for e in edges.iter().filter(|e| e.child.as_str() == c) {
                if seen.insert(e.parent.as_str()) {
                    queue.push_back(e.parent.as_str());
                }
            }
        }
        seen.into_iter().collect()
    }

    prop_compose! {
        /// Random DAG on up to 50 nodes: edges only point from higher to lower index.
        fn random_dag()(n in 1usize..50)
            (edges in proptest::collection::vec((0..n, 0..n), 0..n * 2),
             essential in proptest::collection::vec(any::<bool>(), n), n in Just(n))
            -> OntologyDocument {
            let concepts = (0..n).map(|i| Concept {
                id: ConceptId(format!("c{i}")), kind: ConceptKind::Entity,
                terms: vec![], is_essential: essential[i],
            }).collect();
            let mut sort_edges: Vec<SortEdge> = edges.into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.max(b), a.min(b)))
                .map(|(c, p)| SortEdge { child: ConceptId(format!("c{c}")), parent: ConceptId(format!("c{p}")) })
                .collect();
            sort_edges.dedup();
            OntologyDocument { format: 1, concepts, sort_edges, ..Default::default() }
        }
    }

    proptest! {
        #[test]
        fn closures_match_bfs_oracle(doc in random_dag()) {
            let edges = doc.sort_edges.clone();
            let essential: HashMap<String, bool> =
                doc.concepts.iter().map(|c| (c.id.0.clone(), c.is_essential)).collect();
            let s = OntologyStore::from_document(doc).unwrap();
            for c in s.concepts() {
                let oracle = bfs(&edges, c.id.as_str());
                prop_assert_eq!(ids(s.ancestors(c.id.as_str()).unwrap()), oracle.clone());
                let ess: Vec<&str> = oracle.into_iter().filter(|x| essential[*x]).collect();
                prop_assert_eq!(ids(s.essential_ancestors(c.id.as_str()).unwrap()), ess);
            }
            // Every child's closure contains its parent's closure.
            for e in &edges {
                let child = s.ancestors(e.child.as_str()).unwrap();
                let parent = s.ancestors(e.parent.as_str()).unwrap();
                prop_assert!(parent.is_subset(&child));
            }
        }

        #[test]
        fn linear_round_trip_is_identity(x in 0.0f64..1.0) {
            let s = domain_store();
            let there = s.to_numeric(&DomainValue::Numeric(x), "kbytes", "bytes").unwrap();
            let back = s.to_numeric(&DomainValue::Numeric(there), "bytes", "kbytes").unwrap();
            prop_assert!((back - x).abs() < 1e-9);
        }
    }
}
