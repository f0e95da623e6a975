//! Human similarity judgments: concept pairs scored 0-10 by individual judges.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyStore};

pub const MAX_SCORE: f64 = 10.0;

/// One judge's score for one concept pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub pair_id: u32,
    #[serde(rename = "concept1")]
    pub c1: ConceptId,
    #[serde(rename = "concept2")]
    pub c2: ConceptId,
    pub user_id: u32,
    pub score: f64,
}

impl Judgment {
    /// Score rescaled to the [0, 1] range of similarity values.
    pub fn normalized(&self) -> f64 {
        self.score / MAX_SCORE
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptPair {
    pub pair_id: u32,
    pub c1: ConceptId,
    pub c2: ConceptId,
}

/// Summary of the scores one pair received.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStats {
    pub pair_id: u32,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    /// Maximum minus minimum score.
    pub range: f64,
}

pub fn sample_stats(scores: &[f64]) -> (f64, f64, f64) {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let sd = if scores.len() > 1 {
        (scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    (mean, sd, max - min)
}

/// Validated set of judgments; pairs are kept in ascending `pair_id` order.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgmentDataset {
    pairs: Vec<ConceptPair>,
    judgments: Vec<Judgment>,
}

impl JudgmentDataset {
    pub fn new(judgments: Vec<Judgment>) -> Result<Self> {
        let mut pairs: BTreeMap<u32, ConceptPair> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for j in &judgments {
            if !(0.0..=MAX_SCORE).contains(&j.score) {
                return Err(Error::Dataset(format!(
                    "score {} of user {} on pair {} outside [0, 10]",
                    j.score, j.user_id, j.pair_id
                )));
            }
            if !seen.insert((j.pair_id, j.user_id)) {
                return Err(Error::Dataset(format!(
                    "user {} scored pair {} twice",
                    j.user_id, j.pair_id
                )));
            }
            let entry = pairs.entry(j.pair_id).or_insert_with(|| ConceptPair {
                pair_id: j.pair_id,
                c1: j.c1.clone(),
                c2: j.c2.clone(),
            });
            if entry.c1 != j.c1 || entry.c2 != j.c2 {
                return Err(Error::Dataset(format!(
                    "pair {} names different concepts across rows",
                    j.pair_id
                )));
            }
        }
        Ok(JudgmentDataset {
            pairs: pairs.into_values().collect(),
            judgments,
        })
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["pair_id", "concept1", "concept2", "user_id", "score"];
        if headers.iter().ne(expected) {
            return Err(Error::Dataset(format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let judgments = rdr.deserialize().collect::<std::result::Result<Vec<Judgment>, _>>()?;
        Self::new(judgments)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for j in &self.judgments {
            w.serialize(j)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn pairs(&self) -> &[ConceptPair] {
        &self.pairs
    }

    pub fn judgments(&self) -> &[Judgment] {
        &self.judgments
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Distinct judge ids in ascending order.
    pub fn users(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.judgments.iter().map(|j| j.user_id).collect();
        set.into_iter().collect()
    }

    pub fn scores_of_pair(&self, pair_id: u32) -> Vec<f64> {
        self.judgments
            .iter()
            .filter(|j| j.pair_id == pair_id)
            .map(|j| j.score)
            .collect()
    }

    pub fn pair_stats(&self) -> Vec<PairStats> {
        self.pairs
            .iter()
            .map(|p| {
                let scores = self.scores_of_pair(p.pair_id);
                let (mean, sd, range) = sample_stats(&scores);
                PairStats {
                    pair_id: p.pair_id,
                    n: scores.len(),
                    mean,
                    sd,
                    range,
                }
            })
            .collect()
    }

    /// Pair ids whose concepts also appear in some other pair.
    pub fn pairs_with_repeated_concepts(&self) -> Vec<u32> {
        let mut counts: BTreeMap<&ConceptId, usize> = BTreeMap::new();
        for p in &self.pairs {
            *counts.entry(&p.c1).or_default() += 1;
            if p.c2 != p.c1 {
                *counts.entry(&p.c2).or_default() += 1;
            }
        }
        self.pairs
            .iter()
            .filter(|p| counts[&p.c1] > 1 || counts[&p.c2] > 1)
            .map(|p| p.pair_id)
            .collect()
    }

    /// Fails on the first concept the store does not know.
    pub fn check_concepts(&self, store: &OntologyStore) -> Result<()> {
        for p in &self.pairs {
            for c in [&p.c1, &p.c2] {
                if !store.contains(c.as_str()) {
                    return Err(Error::Dataset(format!(
                        "pair {} references unknown concept `{c}`",
                        p.pair_id
                    )));
                }
            }
        }
        Ok(())
    }
}
