//! Reinforcement-style weight training against human judgments.
//!
//! Each step predicts the global similarity with the current weights, records
//! the absolute error, then applies one of three update cases:
//!
//! 1. every applicable partial is below the judgment: the weight of the
//!    largest partial grows by 1;
//! 2. every applicable partial is above the judgment: the weight of the
//!    smallest partial shrinks by 1 (clamped at 0);
//! 3. otherwise each weight moves by `alpha * (y - s_i) * prev_delta_i * s_i`.
//!
//! Not-applicable dimensions take no part in either the case selection or
//! the update.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::JudgmentDataset;
use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyStore};
use crate::similarity::{aggregate, partials, Dimension, Partials, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Pair,
    User,
    Feature,
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Pair, Strategy::User, Strategy::Feature, Strategy::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pair => "pair",
            Strategy::User => "user",
            Strategy::Feature => "feature",
            Strategy::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pair" => Ok(Strategy::Pair),
            "user" => Ok(Strategy::User),
            "feature" => Ok(Strategy::Feature),
            "hybrid" => Ok(Strategy::Hybrid),
            other => Err(format!("unknown training method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Learning rate of the proportional update case.
    pub alpha: f64,
    /// Shuffled repetitions run by the experiment harness.
    pub repetitions: usize,
    pub seed: u64,
    /// Initial `prev_delta` of every fresh weight vector.
    pub bootstrap_delta: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            alpha: 0.1,
            repetitions: 300,
            seed: 0,
            bootstrap_delta: 1.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Range(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.repetitions == 0 {
            return Err(Error::Range("repetitions must be at least 1".into()));
        }
        if !self.bootstrap_delta.is_finite() {
            return Err(Error::Range("bootstrap delta must be finite".into()));
        }
        Ok(())
    }

    pub fn initial_weights(&self) -> WeightVector {
        WeightVector::uniform(1.0, self.bootstrap_delta)
    }
}

/// Which update case fired for a training step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateCase {
    /// All applicable partials below the target: raise the largest.
    Raise(Dimension),
    /// All applicable partials above the target: lower the smallest.
    Lower(Dimension),
    Proportional,
    /// No applicable partial; nothing to learn from.
    Skip,
}

/// Classifies a step. Strict inequalities; ties on the extreme partial go
/// to the lowest dimension index.
pub fn update_case(partials: &Partials, y_norm: f64) -> UpdateCase {
    let applicable: Vec<(usize, f64)> = partials
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|s| (i, s)))
        .collect();
    if applicable.is_empty() {
        return UpdateCase::Skip;
    }
    if applicable.iter().all(|&(_, s)| s < y_norm) {
        let mut best = applicable[0];
        for &(i, s) in &applicable[1..] {
            if s > best.1 {
                best = (i, s);
            }
        }
        return UpdateCase::Raise(Dimension::ALL[best.0]);
    }
    if applicable.iter().all(|&(_, s)| s > y_norm) {
        let mut worst = applicable[0];
        for &(i, s) in &applicable[1..] {
            if s < worst.1 {
                worst = (i, s);
            }
        }
        return UpdateCase::Lower(Dimension::ALL[worst.0]);
    }
    UpdateCase::Proportional
}

/// Increments the update rule prescribes, `None` for dimensions left untouched.
pub fn weight_increments(
    w: &WeightVector,
    partials: &Partials,
    y_norm: f64,
    alpha: &[f64; 5],
) -> (UpdateCase, [Option<f64>; 5]) {
    let case = update_case(partials, y_norm);
    let mut inc = [None; 5];
    for (i, p) in partials.iter().enumerate() {
        if let Some(s) = p {
            inc[i] = Some(match case {
                UpdateCase::Raise(d) => f64::from(u8::from(d.index() == i)),
                UpdateCase::Lower(d) => -f64::from(u8::from(d.index() == i)),
                UpdateCase::Proportional => alpha[i] * (y_norm - s) * w.prev_delta[i] * s,
                UpdateCase::Skip => unreachable!("skip implies no applicable partial"),
            });
        }
    }
    (case, inc)
}

/// Adds `inc` to the weights (clamping at 0) and records it as the new
/// `prev_delta`.
pub fn apply_increments(w: &WeightVector, inc: &[Option<f64>; 5]) -> WeightVector {
    let mut out = *w;
    for (i, d) in inc.iter().enumerate() {
        if let Some(d) = d {
            out.w[i] = (out.w[i] + d).max(0.0);
            out.prev_delta[i] = *d;
        }
    }
    out
}

pub fn update_weights(w: &WeightVector, partials: &Partials, y_norm: f64, alpha: f64) -> WeightVector {
    update_weights_scaled(w, partials, y_norm, &[alpha; 5]).0
}

/// As [`update_weights`] with a per-dimension learning rate.
pub fn update_weights_scaled(
    w: &WeightVector,
    partials: &Partials,
    y_norm: f64,
    alpha: &[f64; 5],
) -> (WeightVector, UpdateCase) {
    let (case, inc) = weight_increments(w, partials, y_norm, alpha);
    (apply_increments(w, &inc), case)
}

/// Global score used during training. When every applicable dimension has
/// been driven to zero weight the unweighted mean of those partials is used.
pub fn predict(partials: &Partials, w: &WeightVector) -> Result<f64> {
    match aggregate(partials, w) {
        Err(Error::NothingApplicable) => {
            let vals: Vec<f64> = partials.iter().flatten().copied().collect();
            if vals.is_empty() {
                Err(Error::NothingApplicable)
            } else {
                Ok(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        }
        other => other,
    }
}

/// Trained weight vectors keyed by pair id, user id or concept id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    pub strategy: Strategy,
    /// Key -> `[w1..w5, prev_delta1..prev_delta5]`.
    #[serde(with = "state_serde")]
    pub weights: BTreeMap<String, WeightVector>,
}

mod state_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::similarity::WeightVector;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, WeightVector>, s: S) -> Result<S::Ok, S::Error> {
        let flat: BTreeMap<&String, [f64; 10]> = m
            .iter()
            .map(|(k, v)| {
                let mut a = [0.0; 10];
                a[..5].copy_from_slice(&v.w);
                a[5..].copy_from_slice(&v.prev_delta);
                (k, a)
            })
            .collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, WeightVector>, D::Error> {
        let flat = BTreeMap::<String, [f64; 10]>::deserialize(d)?;
        flat.into_iter()
            .map(|(k, a)| {
                let mut w = [0.0; 5];
                let mut p = [0.0; 5];
                w.copy_from_slice(&a[..5]);
                p.copy_from_slice(&a[5..]);
                WeightVector::new(w, p)
                    .map(|v| (k, v))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

impl TrainingState {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Weights a stored state assigns to a concept pair, if it has any.
    pub fn weights_for(&self, pair_id: Option<u32>, c1: &str, c2: &str, user_id: Option<u32>) -> Option<WeightVector> {
        match self.strategy {
            Strategy::Pair => pair_id.and_then(|p| self.weights.get(&p.to_string()).copied()),
            Strategy::User | Strategy::Hybrid => user_id.and_then(|u| self.weights.get(&u.to_string()).copied()),
            Strategy::Feature => {
                let a = self.weights.get(c1)?;
                let b = self.weights.get(c2)?;
                Some(mean_vector(a, b))
            }
        }
    }

    /// Element-wise mean of all stored weight vectors (zero vector if empty).
    pub fn mean_weights(&self) -> [f64; 5] {
        let mut acc = [0.0; 5];
        for v in self.weights.values() {
            for (a, w) in acc.iter_mut().zip(v.w) {
                *a += w;
            }
        }
        let n = self.weights.len().max(1) as f64;
        acc.map(|a| a / n)
    }
}

fn mean_vector(a: &WeightVector, b: &WeightVector) -> WeightVector {
    WeightVector {
        w: std::array::from_fn(|i| (a.w[i] + b.w[i]) / 2.0),
        prev_delta: std::array::from_fn(|i| (a.prev_delta[i] + b.prev_delta[i]) / 2.0),
    }
}

/// Dataset joined with the ontology: partials computed once per pair.
#[derive(Clone, Debug)]
pub struct PreparedDataset {
    pub pair_ids: Vec<u32>,
    pub pair_concepts: Vec<(usize, usize)>,
    pub concepts: Vec<ConceptId>,
    pub partials: Vec<Partials>,
    pub users: Vec<u32>,
    pub judgments: Vec<PreparedJudgment>,
    /// Judgment positions grouped by pair, in dataset order.
    pub by_pair: Vec<Vec<usize>>,
    /// Judgment positions grouped by user, in dataset order.
    pub by_user: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct PreparedJudgment {
    pub pair: usize,
    pub user: usize,
    pub y_norm: f64,
}

impl PreparedDataset {
    pub fn new(dataset: &JudgmentDataset, store: &OntologyStore) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        dataset.check_concepts(store)?;
        let mut concept_index: HashMap<ConceptId, usize> = HashMap::new();
        let mut concepts = Vec::new();
        let mut intern = |c: &ConceptId| {
            *concept_index.entry(c.clone()).or_insert_with(|| {
                concepts.push(c.clone());
                concepts.len() - 1
            })
        };
        let mut pair_ids = Vec::new();
        let mut pair_concepts = Vec::new();
        let mut pair_partials = Vec::new();
        for p in dataset.pairs() {
            let parts = partials(store, p.c1.as_str(), p.c2.as_str())?;
            if parts.iter().all(Option::is_none) {
                return Err(Error::NothingApplicable);
            }
            pair_ids.push(p.pair_id);
            pair_concepts.push((intern(&p.c1), intern(&p.c2)));
            pair_partials.push(parts);
        }
        let users = dataset.users();
        let pair_pos: HashMap<u32, usize> = pair_ids.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let user_pos: HashMap<u32, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let mut by_pair = vec![Vec::new(); pair_ids.len()];
        let mut by_user = vec![Vec::new(); users.len()];
        let judgments = dataset
            .judgments()
            .iter()
            .enumerate()
            .map(|(k, j)| {
                let (pair, user) = (pair_pos[&j.pair_id], user_pos[&j.user_id]);
                by_pair[pair].push(k);
                by_user[user].push(k);
                PreparedJudgment {
                    pair,
                    user,
                    y_norm: j.normalized(),
                }
            })
            .collect();
        Ok(PreparedDataset {
            pair_ids,
            pair_concepts,
            concepts,
            partials: pair_partials,
            users,
            judgments,
            by_pair,
            by_user,
        })
    }

    /// Absolute error (percent) of the untrained, all-ones prediction.
    pub fn untrained_error(&self, judgment: usize) -> f64 {
        let j = self.judgments[judgment];
        let pred = predict(&self.partials[j.pair], &WeightVector::ones()).expect("pair has applicable partials");
        (j.y_norm - pred).abs() * 100.0
    }
}

/// One predict-then-update step of a training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    /// 0-based position of the step within its training sequence.
    pub iteration: usize,
    pub judgment: usize,
    /// Absolute error (percent) of the prediction made before updating.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingOutcome {
    pub state: TrainingState,
    pub steps: Vec<Step>,
    /// Mean error (percent) per iteration position.
    pub error_trace: Vec<f64>,
    /// Mean error per pair, in `PreparedDataset::pair_ids` order.
    pub per_pair_error: Vec<f64>,
    /// Mean error per user, in `PreparedDataset::users` order.
    pub per_user_error: Vec<f64>,
}

impl TrainingOutcome {
    fn from_steps(prepared: &PreparedDataset, state: TrainingState, steps: Vec<Step>) -> Self {
        let len = steps.iter().map(|s| s.iteration + 1).max().unwrap_or(0);
        let mut trace = vec![(0.0, 0usize); len];
        let mut pair = vec![(0.0, 0usize); prepared.pair_ids.len()];
        let mut user = vec![(0.0, 0usize); prepared.users.len()];
        for s in &steps {
            let j = prepared.judgments[s.judgment];
            for (slot, k) in [(&mut trace, s.iteration), (&mut pair, j.pair), (&mut user, j.user)] {
                slot[k].0 += s.error;
                slot[k].1 += 1;
            }
        }
        let mean = |v: Vec<(f64, usize)>| v.into_iter().map(|(s, n)| s / n.max(1) as f64).collect();
        TrainingOutcome {
            state,
            steps,
            error_trace: mean(trace),
            per_pair_error: mean(pair),
            per_user_error: mean(user),
        }
    }

    pub fn average_error(&self) -> f64 {
        self.per_pair_error.iter().sum::<f64>() / self.per_pair_error.len().max(1) as f64
    }
}

/// Rng for one repetition of a seeded run.
pub fn repetition_rng(seed: u64, repetition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repetition);
    rng
}

fn step(
    prepared: &PreparedDataset,
    k: usize,
    iteration: usize,
    w: &WeightVector,
    alpha: &[f64; 5],
) -> Result<(Step, [Option<f64>; 5])> {
    let j = prepared.judgments[k];
    let parts = &prepared.partials[j.pair];
    let pred = predict(parts, w)?;
    let (_, inc) = weight_increments(w, parts, j.y_norm, alpha);
    Ok((
        Step {
            iteration,
            judgment: k,
            error: (j.y_norm - pred).abs() * 100.0,
        },
        inc,
    ))
}

/// One weight vector per pair, trained over that pair's judges in shuffled order.
pub fn train_pair_prepared(
    prepared: &PreparedDataset,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingOutcome> {
    let alpha = [config.alpha; 5];
    let mut weights = BTreeMap::new();
    let mut steps = Vec::with_capacity(prepared.judgments.len());
    for (p, judges) in prepared.by_pair.iter().enumerate() {
        let mut order = judges.clone();
        order.shuffle(rng);
        let mut w = config.initial_weights();
        for (it, &k) in order.iter().enumerate() {
            let (s, inc) = step(prepared, k, it, &w, &alpha)?;
            w = apply_increments(&w, &inc);
            steps.push(s);
        }
        weights.insert(prepared.pair_ids[p].to_string(), w);
    }
    let state = TrainingState {
        strategy: Strategy::Pair,
        weights,
    };
    Ok(TrainingOutcome::from_steps(prepared, state, steps))
}

/// One weight vector per user, trained over that user's pairs in shuffled order.
pub fn train_user_prepared(
    prepared: &PreparedDataset,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingOutcome> {
    run_user_loop(prepared, config, rng, Strategy::User, |_| [config.alpha; 5])
}

/// One weight vector per concept. A pair is predicted with the mean of its
/// two concepts' vectors and the resulting increment is applied to both.
pub fn train_feature_prepared(
    prepared: &PreparedDataset,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingOutcome> {
    let alpha = [config.alpha; 5];
    let mut vectors = vec![config.initial_weights(); prepared.concepts.len()];
    let mut order: Vec<usize> = (0..prepared.judgments.len()).collect();
    order.shuffle(rng);
    let mut steps = Vec::with_capacity(order.len());
    for (it, &k) in order.iter().enumerate() {
        let (a, b) = prepared.pair_concepts[prepared.judgments[k].pair];
        let w = mean_vector(&vectors[a], &vectors[b]);
        let (s, inc) = step(prepared, k, it, &w, &alpha)?;
        vectors[a] = apply_increments(&vectors[a], &inc);
        if b != a {
            vectors[b] = apply_increments(&vectors[b], &inc);
        }
        steps.push(s);
    }
    let weights = prepared
        .concepts
        .iter()
        .zip(vectors)
        .map(|(c, v)| (c.to_string(), v))
        .collect();
    let state = TrainingState {
        strategy: Strategy::Feature,
        weights,
    };
    Ok(TrainingOutcome::from_steps(prepared, state, steps))
}

/// Per-dimension learning-rate multipliers for a pair: the mean of the two
/// concepts' feature weights, normalized to sum to 5. Concepts missing from
/// the feature state count as all-ones.
pub fn feature_modulation(feature: &TrainingState, c1: &str, c2: &str) -> [f64; 5] {
    let ones = WeightVector::ones();
    let a = feature.weights.get(c1).unwrap_or(&ones);
    let b = feature.weights.get(c2).unwrap_or(&ones);
    let mean: [f64; 5] = std::array::from_fn(|i| (a.w[i] + b.w[i]) / 2.0);
    let total: f64 = mean.iter().sum();
    if total > 0.0 {
        mean.map(|m| 5.0 * m / total)
    } else {
        [1.0; 5]
    }
}

/// User-oriented training whose learning rate per dimension is modulated by
/// the feature-oriented weights of the pair's concepts.
pub fn train_hybrid_prepared(
    prepared: &PreparedDataset,
    config: &TrainingConfig,
    feature_state: &TrainingState,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingOutcome> {
    if feature_state.strategy != Strategy::Feature {
        return Err(Error::MissingFeatureState);
    }
    let scales: Vec<[f64; 5]> = prepared
        .pair_concepts
        .iter()
        .map(|&(a, b)| {
            feature_modulation(
                feature_state,
                prepared.concepts[a].as_str(),
                prepared.concepts[b].as_str(),
            )
            .map(|m| m * config.alpha)
        })
        .collect();
    run_user_loop(prepared, config, rng, Strategy::Hybrid, |pair| scales[pair])
}

fn run_user_loop(
    prepared: &PreparedDataset,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
    strategy: Strategy,
    alpha_for_pair: impl Fn(usize) -> [f64; 5],
) -> Result<TrainingOutcome> {
    let mut weights = BTreeMap::new();
    let mut steps = Vec::with_capacity(prepared.judgments.len());
    for (u, own) in prepared.by_user.iter().enumerate() {
        let mut order = own.clone();
        order.shuffle(rng);
        let mut w = config.initial_weights();
        for (it, &k) in order.iter().enumerate() {
            let alpha = alpha_for_pair(prepared.judgments[k].pair);
            let (s, inc) = step(prepared, k, it, &w, &alpha)?;
            w = apply_increments(&w, &inc);
            steps.push(s);
        }
        weights.insert(prepared.users[u].to_string(), w);
    }
    Ok(TrainingOutcome::from_steps(
        prepared,
        TrainingState { strategy, weights },
        steps,
    ))
}

fn prepare(dataset: &JudgmentDataset, store: &OntologyStore, config: &TrainingConfig) -> Result<PreparedDataset> {
    config.validate()?;
    PreparedDataset::new(dataset, store)
}

pub fn train_pair_oriented(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
) -> Result<TrainingOutcome> {
    let prepared = prepare(dataset, store, config)?;
    train_pair_prepared(&prepared, config, &mut repetition_rng(config.seed, 0))
}

pub fn train_user_oriented(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
) -> Result<TrainingOutcome> {
    let prepared = prepare(dataset, store, config)?;
    train_user_prepared(&prepared, config, &mut repetition_rng(config.seed, 0))
}

pub fn train_feature_oriented(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
) -> Result<TrainingOutcome> {
    let prepared = prepare(dataset, store, config)?;
    train_feature_prepared(&prepared, config, &mut repetition_rng(config.seed, 0))
}

pub fn train_hybrid(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
    feature_state: Option<&TrainingState>,
) -> Result<TrainingOutcome> {
    let feature_state = feature_state.ok_or(Error::MissingFeatureState)?;
    let prepared = prepare(dataset, store, config)?;
    train_hybrid_prepared(&prepared, config, feature_state, &mut repetition_rng(config.seed, 0))
}
