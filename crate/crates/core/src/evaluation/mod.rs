//! Experimental protocol: shuffled repetitions of each training method,
//! untrained and single-dimension baselines, and the paired significance test.

mod metrics;
pub mod report;
mod significance;
pub mod synth;
pub mod table1;

use std::fmt;

use serde::Serialize;

pub use metrics::{absolute_error, mean_error_per_pair, mean_error_per_user};
pub use significance::{critical_value, significance_test, SignificanceResult};
pub use synth::{synthesize_judgments, TargetStats};

use crate::dataset::JudgmentDataset;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::ontology::OntologyStore;
use crate::similarity::Dimension;
use crate::training::{
    repetition_rng, train_feature_prepared, train_hybrid_prepared, train_pair_prepared, train_user_prepared,
    PreparedDataset, Strategy, TrainingConfig, TrainingOutcome, TrainingState,
};
use metrics::order_free_mean;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Trained(Strategy),
    SortOnly,
    Untrained,
    SingleDimension(Dimension),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Trained(s) => s.name().to_owned(),
            Method::SortOnly => "sort_only".into(),
            Method::Untrained => "untrained".into(),
            Method::SingleDimension(d) => format!("single_{}", d.name()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Errors are percentages of the normalized [0, 1] similarity scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub pair_ids: Vec<u32>,
    /// `None` where the method cannot score the pair.
    pub per_pair_error: Vec<Option<f64>>,
    pub user_ids: Vec<u32>,
    pub per_user_error: Option<Vec<f64>>,
    /// Mean of the defined per-pair errors.
    pub avg_error: f64,
    /// Mean error at each iteration position of the training sequence.
    pub trace: Vec<f64>,
    /// Untrained error of the judgments visited at each iteration position.
    pub control_trace: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    /// Mean final weight vector over keys and repetitions, for trained methods.
    pub mean_final_weights: Option<[f64; 5]>,
}

/// Running mean of a per-iteration trace.
pub fn accumulate(trace: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    trace
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

impl ExperimentReport {
    pub fn accumulated_trace(&self) -> Vec<f64> {
        accumulate(&self.trace)
    }

    pub fn accumulated_control(&self) -> Vec<f64> {
        accumulate(&self.control_trace)
    }

    pub fn error_of(&self, pair_id: u32) -> Option<f64> {
        let k = self.pair_ids.iter().position(|&p| p == pair_id)?;
        self.per_pair_error[k]
    }

    /// Defined per-pair errors, dropping pairs the method cannot score.
    pub fn defined_errors(&self) -> Vec<f64> {
        self.per_pair_error.iter().flatten().copied().collect()
    }

    /// Average restricted to the given pairs.
    pub fn avg_over(&self, pair_ids: &[u32]) -> Option<f64> {
        let vals: Vec<f64> = pair_ids.iter().filter_map(|&p| self.error_of(p)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Pair id with the largest error (lowest id on ties).
    pub fn worst_pair(&self) -> Option<u32> {
        let mut best: Option<(u32, f64)> = None;
        for (&p, e) in self.pair_ids.iter().zip(&self.per_pair_error) {
            if let Some(e) = *e {
                if best.is_none_or(|(_, b)| e > b) {
                    best = Some((p, e));
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

/// Which single dimension predicts a pair best.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRanking {
    pub pair_id: u32,
    pub errors: [Option<f64>; 5],
    pub best: Option<Dimension>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleDimensionReport {
    pub report: ExperimentReport,
    pub ranking: Vec<DimensionRanking>,
}

struct RepetitionSummary {
    per_pair: Vec<f64>,
    per_user: Vec<f64>,
    trace: Vec<f64>,
    control: Vec<f64>,
    weights: [f64; 5],
}

/// Runs methods over one dataset/ontology pairing.
pub struct Experiment {
    prepared: PreparedDataset,
    config: TrainingConfig,
    execution: Execution,
    feature_state: Option<TrainingState>,
    untrained: Vec<f64>,
}

impl Experiment {
    pub fn new(dataset: &JudgmentDataset, store: &OntologyStore, config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        let prepared = PreparedDataset::new(dataset, store)?;
        let untrained = (0..prepared.judgments.len())
            .map(|k| prepared.untrained_error(k))
            .collect();
        Ok(Experiment {
            prepared,
            config,
            execution: Execution::default(),
            feature_state: None,
            untrained,
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Feature-oriented state that hybrid training modulates its rates by.
    pub fn with_feature_state(mut self, state: TrainingState) -> Self {
        self.feature_state = Some(state);
        self
    }

    pub fn prepared(&self) -> &PreparedDataset {
        &self.prepared
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn run(&self, method: Method) -> Result<ExperimentReport> {
        match method {
            Method::Trained(s) => self.run_trained(s),
            Method::Untrained => Ok(self.static_report(method, |k| Some(self.untrained[k]))),
            Method::SortOnly => Ok(self.single_dimension_errors(method, Dimension::Sort)),
            Method::SingleDimension(d) => Ok(self.single_dimension_errors(method, d)),
        }
    }

    pub fn single_dimension(&self, dimension: Dimension) -> SingleDimensionReport {
        SingleDimensionReport {
            report: self.single_dimension_errors(Method::SingleDimension(dimension), dimension),
            ranking: self.dimension_ranking(),
        }
    }

    /// Per pair, the dimension whose partial alone is closest to the judges.
    pub fn dimension_ranking(&self) -> Vec<DimensionRanking> {
        let p = &self.prepared;
        (0..p.pair_ids.len())
            .map(|pair| {
                let errors: [Option<f64>; 5] = std::array::from_fn(|d| {
                    let s = p.partials[pair][d]?;
                    let errs: Vec<f64> = p.by_pair[pair]
                        .iter()
                        .map(|&k| (p.judgments[k].y_norm - s).abs() * 100.0)
                        .collect();
                    mean_error_per_pair(&errs).ok()
                });
                let mut best: Option<(usize, f64)> = None;
                for (d, e) in errors.iter().enumerate() {
                    if let Some(e) = *e {
                        if best.is_none_or(|(_, b)| e < b) {
                            best = Some((d, e));
                        }
                    }
                }
                DimensionRanking {
                    pair_id: p.pair_ids[pair],
                    errors,
                    best: best.map(|(d, _)| Dimension::ALL[d]),
                }
            })
            .collect()
    }

    fn train_once(&self, strategy: Strategy, repetition: usize) -> Result<TrainingOutcome> {
        let mut rng = repetition_rng(self.config.seed, repetition as u64);
        match strategy {
            Strategy::Pair => train_pair_prepared(&self.prepared, &self.config, &mut rng),
            Strategy::User => train_user_prepared(&self.prepared, &self.config, &mut rng),
            Strategy::Feature => train_feature_prepared(&self.prepared, &self.config, &mut rng),
            Strategy::Hybrid => {
                let feature = self.feature_state.as_ref().ok_or(Error::MissingFeatureState)?;
                train_hybrid_prepared(&self.prepared, &self.config, feature, &mut rng)
            }
        }
    }

    fn run_trained(&self, strategy: Strategy) -> Result<ExperimentReport> {
        if strategy == Strategy::Hybrid && self.feature_state.is_none() {
            return Err(Error::MissingFeatureState);
        }
        let reps = map_indexed(self.execution, self.config.repetitions, |r| {
            let out = self.train_once(strategy, r)?;
            let mut control = vec![(0.0, 0usize); out.error_trace.len()];
            for s in &out.steps {
                control[s.iteration].0 += self.untrained[s.judgment];
                control[s.iteration].1 += 1;
            }
            Ok(RepetitionSummary {
                control: control.into_iter().map(|(s, n)| s / n.max(1) as f64).collect(),
                weights: out.state.mean_weights(),
                per_pair: out.per_pair_error,
                per_user: out.per_user_error,
                trace: out.error_trace,
            })
        })?;
        let column = |get: &dyn Fn(&RepetitionSummary) -> Option<f64>| order_free_mean(reps.iter().filter_map(get));
        let width = |get: &dyn Fn(&RepetitionSummary) -> usize| reps.iter().map(get).max().unwrap_or(0);

        let per_pair_error: Vec<Option<f64>> = (0..self.prepared.pair_ids.len())
            .map(|p| column(&|r| r.per_pair.get(p).copied()))
            .collect();
        let per_user_error = (0..self.prepared.users.len())
            .map(|u| column(&|r| r.per_user.get(u).copied()).unwrap_or(0.0))
            .collect();
        let trace = (0..width(&|r| r.trace.len()))
            .map(|i| column(&|r| r.trace.get(i).copied()).unwrap_or(0.0))
            .collect();
        let control_trace = (0..width(&|r| r.control.len()))
            .map(|i| column(&|r| r.control.get(i).copied()).unwrap_or(0.0))
            .collect();
        let weights = std::array::from_fn(|d| column(&|r| Some(r.weights[d])).unwrap_or(0.0));
        Ok(self.finish(
            Method::Trained(strategy),
            per_pair_error,
            Some(per_user_error),
            trace,
            control_trace,
            self.config.repetitions,
            Some(weights),
        ))
    }

    fn single_dimension_errors(&self, method: Method, dimension: Dimension) -> ExperimentReport {
        let p = &self.prepared;
        self.static_report(method, |k| {
            let j = p.judgments[k];
            p.partials[j.pair][dimension.index()].map(|s| (j.y_norm - s).abs() * 100.0)
        })
    }

    /// Report for a method without training: judgments are visited per pair
    /// in dataset order.
    fn static_report(&self, method: Method, error: impl Fn(usize) -> Option<f64>) -> ExperimentReport {
        let p = &self.prepared;
        let mut per_user: Vec<Vec<f64>> = vec![Vec::new(); p.users.len()];
        let mut trace: Vec<(f64, usize)> = Vec::new();
        let mut control: Vec<(f64, usize)> = Vec::new();
        let per_pair_error = p
            .by_pair
            .iter()
            .map(|judges| {
                let mut errs = Vec::new();
                for (it, &k) in judges.iter().enumerate() {
                    if trace.len() <= it {
                        trace.push((0.0, 0));
                        control.push((0.0, 0));
                    }
                    control[it].0 += self.untrained[k];
                    control[it].1 += 1;
                    if let Some(e) = error(k) {
                        errs.push(e);
                        per_user[p.judgments[k].user].push(e);
                        trace[it].0 += e;
                        trace[it].1 += 1;
                    }
                }
                mean_error_per_pair(&errs).ok()
            })
            .collect();
        let per_user_error = per_user.iter().map(|e| mean_error_per_user(e).unwrap_or(0.0)).collect();
        let mean = |v: Vec<(f64, usize)>| v.into_iter().map(|(s, n)| s / n.max(1) as f64).collect();
        self.finish(
            method,
            per_pair_error,
            Some(per_user_error),
            mean(trace),
            mean(control),
            1,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        method: Method,
        per_pair_error: Vec<Option<f64>>,
        per_user_error: Option<Vec<f64>>,
        trace: Vec<f64>,
        control_trace: Vec<f64>,
        repetitions: usize,
        mean_final_weights: Option<[f64; 5]>,
    ) -> ExperimentReport {
        let defined: Vec<f64> = per_pair_error.iter().flatten().copied().collect();
        let avg_error = if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        };
        ExperimentReport {
            method,
            pair_ids: self.prepared.pair_ids.clone(),
            per_pair_error,
            user_ids: self.prepared.users.clone(),
            per_user_error,
            avg_error,
            trace,
            control_trace,
            repetitions,
            seed: self.config.seed,
            mean_final_weights,
        }
    }
}

pub fn run_experiment(
    method: Method,
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
    feature_state: Option<&TrainingState>,
) -> Result<ExperimentReport> {
    let mut exp = Experiment::new(dataset, store, *config)?;
    if let Some(f) = feature_state {
        exp = exp.with_feature_state(f.clone());
    }
    exp.run(method)
}

pub fn single_dimension_report(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    dimension: Dimension,
) -> Result<SingleDimensionReport> {
    Ok(Experiment::new(dataset, store, TrainingConfig::default())?.single_dimension(dimension))
}

/// Everything the full protocol produces.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolResults {
    pub pair: ExperimentReport,
    pub feature: ExperimentReport,
    pub user: ExperimentReport,
    pub hybrid: ExperimentReport,
    pub sort_only: ExperimentReport,
    pub untrained: ExperimentReport,
    /// Pairs sharing a concept with another pair.
    pub repeated_pairs: Vec<u32>,
    pub feature_repeated_avg: Option<f64>,
    pub single_dimension: Vec<ExperimentReport>,
    pub ranking: Vec<DimensionRanking>,
    /// Feature-oriented errors tested against sort-only errors.
    pub significance: SignificanceResult,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Runs every method and baseline under one configuration. Hybrid training
/// uses a feature-oriented state trained once with the configured seed.
pub fn run_protocol(
    dataset: &JudgmentDataset,
    store: &OntologyStore,
    config: &TrainingConfig,
    execution: Execution,
) -> Result<ProtocolResults> {
    let base = Experiment::new(dataset, store, *config)?.with_execution(execution);
    let feature_state =
        train_feature_prepared(base.prepared(), config, &mut repetition_rng(config.seed, u64::MAX))?.state;
    let exp = base.with_feature_state(feature_state);

    let pair = exp.run(Method::Trained(Strategy::Pair))?;
    let feature = exp.run(Method::Trained(Strategy::Feature))?;
    let user = exp.run(Method::Trained(Strategy::User))?;
    let hybrid = exp.run(Method::Trained(Strategy::Hybrid))?;
    let sort_only = exp.run(Method::SortOnly)?;
    let untrained = exp.run(Method::Untrained)?;
    let single_dimension = Dimension::ALL
        .iter()
        .map(|&d| exp.run(Method::SingleDimension(d)))
        .collect::<Result<Vec<_>>>()?;
    let repeated_pairs = dataset.pairs_with_repeated_concepts();
    let feature_repeated_avg = feature.avg_over(&repeated_pairs);

    let (a, b): (Vec<f64>, Vec<f64>) = feature
        .per_pair_error
        .iter()
        .zip(&sort_only.per_pair_error)
        .filter_map(|(f, s)| Some(((*f)?, (*s)?)))
        .unzip();
    let significance = significance_test(&a, &b, SIGNIFICANCE_LEVEL)?;

    Ok(ProtocolResults {
        ranking: exp.dimension_ranking(),
        pair,
        feature,
        user,
        hybrid,
        sort_only,
        untrained,
        repeated_pairs,
        feature_repeated_avg,
        single_dimension,
        significance,
    })
}
