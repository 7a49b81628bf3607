//! Leave-one-pitcher-out and within-individual evaluation.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mean, r_squared};
use super::seed::{derive_seed, fold_seed};
use super::train::{train, ChannelScaler, TrainConfig};
use crate::dataset::{restrict, Corpus, Region, RestrictedSample, WindowSpec, PITCHES_PER_PITCHER};
use crate::error::{Error, Result};
use crate::joints::CompetitiveLevel;
use crate::models::{ModelOptions, ModelSpec, Regressor};

/// Everything an evaluation needs besides the corpus and the spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub train: TrainConfig,
    pub model: ModelOptions,
    pub workers: usize,
    pub region: Region,
    pub window: WindowSpec,
    pub repeat: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            model: ModelOptions::default(),
            workers: 1,
            region: Region::WholeBody,
            window: WindowSpec::FULL,
            repeat: 0,
        }
    }
}

/// Runs `f` on a pool of `workers` threads, or on the current pool when
/// already inside one.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if rayon::current_thread_index().is_some() {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Indices of one pitch in a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleRef {
    pub pitcher: usize,
    pub pitch: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub index: usize,
    pub test_pitcher: usize,
    pub train: Vec<SampleRef>,
    pub test: Vec<SampleRef>,
}

fn refs_of(corpus: &Corpus, pitcher: usize) -> impl Iterator<Item = SampleRef> + '_ {
    (0..corpus.pitchers[pitcher].pitches.len()).map(move |pitch| SampleRef { pitcher, pitch })
}

fn check_unique(corpus: &Corpus) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in &corpus.pitchers {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::DuplicatePitcher(p.id.clone()));
        }
    }
    Ok(())
}

/// One fold per pitcher: all of that pitcher's pitches are held out.
pub fn losocv_folds(corpus: &Corpus) -> Result<Vec<Fold>> {
    check_unique(corpus)?;
    if corpus.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "leave-one-pitcher-out needs at least 2 pitchers, got {}",
            corpus.len()
        )));
    }
    Ok((0..corpus.len())
        .map(|i| Fold {
            index: i,
            test_pitcher: i,
            train: (0..corpus.len())
                .filter(|&j| j != i)
                .flat_map(|j| refs_of(corpus, j))
                .collect(),
            test: refs_of(corpus, i).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WithinSplit {
    pub train: Vec<SampleRef>,
    pub test: Vec<SampleRef>,
}

/// Holds out one uniformly chosen pitch of every pitcher.
pub fn within_individual_split(corpus: &Corpus, seed: u64) -> Result<WithinSplit> {
    check_unique(corpus)?;
    if let Some(p) = corpus.pitchers.iter().find(|p| p.pitches.len() != PITCHES_PER_PITCHER) {
        return Err(Error::InvalidConfig(format!(
            "pitcher `{}` has {} pitches; within-individual split needs exactly {PITCHES_PER_PITCHER}",
            p.id,
            p.pitches.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = WithinSplit {
        train: Vec::new(),
        test: Vec::new(),
    };
    for i in 0..corpus.len() {
        let held = rng.random_range(0..PITCHES_PER_PITCHER);
        for r in refs_of(corpus, i) {
            if r.pitch == held {
                split.test.push(r);
            } else {
                split.train.push(r);
            }
        }
    }
    Ok(split)
}

/// Restricted copy of every sample, indexed like the corpus.
pub fn restricted_corpus(corpus: &Corpus, region: Region, window: WindowSpec) -> Vec<Vec<RestrictedSample>> {
    corpus
        .pitchers
        .iter()
        .map(|p| p.pitches.iter().map(|s| restrict(s, region, window)).collect())
        .collect()
}

fn gather<'a>(data: &'a [Vec<RestrictedSample>], refs: &[SampleRef]) -> Vec<&'a RestrictedSample> {
    refs.iter().map(|r| &data[r.pitcher][r.pitch]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_pitcher_id: String,
    pub level: CompetitiveLevel,
    pub predictions: Vec<f64>,
    pub truths: Vec<f64>,
    pub mean_prediction: f64,
    pub mean_truth: f64,
    pub epochs_run: usize,
    pub final_train_r2: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub spec: ModelSpec,
    pub region: Region,
    pub window: WindowSpec,
    pub repeat: usize,
    pub parameters: usize,
    pub folds: Vec<FoldOutcome>,
    /// R² over per-pitcher (true mean, predicted mean) pairs.
    pub r2: f64,
}

impl EvaluationResult {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.folds.iter().map(|f| (f.mean_truth, f.mean_prediction)).collect()
    }
}

/// Builds a model for `samples` and fits it, checking the partition and the
/// standardization statistics.
fn fit_fold(
    spec: ModelSpec,
    train_set: &[&RestrictedSample],
    forbidden: Option<&str>,
    config: &EvalConfig,
    seed: u64,
) -> Result<super::train::TrainedModel> {
    if let Some(id) = forbidden {
        if train_set.iter().any(|s| s.pitcher_id == id) {
            return Err(Error::Leakage(format!("test pitcher `{id}` present in training data")));
        }
    }
    let first = train_set
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty training set".into()))?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let model = Regressor::build(spec, &first.joints, first.frames, &config.model, &mut init_rng)?;
    let train_config = TrainConfig {
        seed: derive_seed(seed, &[1]),
        ..config.train.clone()
    };
    let trained = train(model, train_set, &train_config)?;
    if ChannelScaler::fit(train_set, train_config.input_standardization) != trained.inputs {
        return Err(Error::Leakage(
            "input statistics differ from the training portion".into(),
        ));
    }
    Ok(trained)
}

/// Leave-one-pitcher-out evaluation of a fresh model per fold.
pub fn evaluate_losocv(spec: ModelSpec, corpus: &Corpus, config: &EvalConfig) -> Result<EvaluationResult> {
    spec.validate()?;
    let folds = losocv_folds(corpus)?;
    let data = restricted_corpus(corpus, config.region, config.window);
    let run = |fold: &Fold| -> Result<FoldOutcome> {
        let pitcher = &corpus.pitchers[fold.test_pitcher];
        let seed = fold_seed(
            config.train.seed,
            fold.index,
            config.repeat,
            config.region,
            config.window,
        );
        let annotate = |e: Error| Error::Fold {
            pitcher: pitcher.id.clone(),
            source: Box::new(e),
        };
        let train_set = gather(&data, &fold.train);
        let test_set = gather(&data, &fold.test);
        let trained = fit_fold(spec, &train_set, Some(&pitcher.id), config, seed).map_err(annotate)?;
        let predictions = trained.predict(&test_set).map_err(annotate)?;
        if predictions.iter().any(|p| !p.is_finite()) {
            return Err(annotate(Error::InvalidConfig("non-finite prediction".into())));
        }
        let truths: Vec<f64> = test_set.iter().map(|s| s.ball_speed).collect();
        Ok(FoldOutcome {
            fold: fold.index,
            test_pitcher_id: pitcher.id.clone(),
            level: pitcher.level,
            mean_prediction: mean(&predictions),
            mean_truth: mean(&truths),
            predictions,
            truths,
            epochs_run: trained.epochs_run(),
            final_train_r2: trained.final_train_r2(),
            seed,
        })
    };
    let mut outcomes = with_workers(config.workers, || {
        folds.par_iter().map(run).collect::<Vec<Result<FoldOutcome>>>()
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by_key(|o| o.fold);

    let truths: Vec<f64> = outcomes.iter().map(|o| o.mean_truth).collect();
    let preds: Vec<f64> = outcomes.iter().map(|o| o.mean_prediction).collect();
    let first = &data[0][0];
    Ok(EvaluationResult {
        spec,
        region: config.region,
        window: config.window,
        repeat: config.repeat,
        parameters: Regressor::expected_parameter_count(&spec, first.joints.len()),
        r2: r_squared(&truths, &preds)?,
        folds: outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinPrediction {
    pub pitcher_id: String,
    pub truth: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinResult {
    pub spec: ModelSpec,
    pub predictions: Vec<WithinPrediction>,
    /// R² over the held-out pitches.
    pub r2: f64,
    /// R² over per-pitcher means of the held-out pitches.
    pub r2_pitcher_means: f64,
    pub epochs_run: usize,
    pub train_size: usize,
}

/// One model trained on four pitches of every pitcher, tested on the fifth.
pub fn evaluate_within(spec: ModelSpec, corpus: &Corpus, config: &EvalConfig) -> Result<WithinResult> {
    spec.validate()?;
    let split = within_individual_split(corpus, derive_seed(config.train.seed, &[0x5717]))?;
    let data = restricted_corpus(corpus, config.region, config.window);
    let train_set = gather(&data, &split.train);
    let test_set = gather(&data, &split.test);
    let seed = derive_seed(
        fold_seed(
            config.train.seed,
            usize::MAX,
            config.repeat,
            config.region,
            config.window,
        ),
        &[0x5717],
    );
    let trained = with_workers(config.workers, || fit_fold(spec, &train_set, None, config, seed))??;
    let preds = trained.predict(&test_set)?;
    let predictions: Vec<WithinPrediction> = test_set
        .iter()
        .zip(&preds)
        .map(|(s, &p)| WithinPrediction {
            pitcher_id: s.pitcher_id.clone(),
            truth: s.ball_speed,
            prediction: p,
        })
        .collect();
    let truths: Vec<f64> = predictions.iter().map(|p| p.truth).collect();
    let r2 = r_squared(&truths, &preds)?;

    let mut ids: Vec<&str> = predictions.iter().map(|p| p.pitcher_id.as_str()).collect();
    ids.dedup();
    let (mut mt, mut mp) = (Vec::new(), Vec::new());
    for id in ids {
        let rows: Vec<&WithinPrediction> = predictions.iter().filter(|p| p.pitcher_id == id).collect();
        mt.push(rows.iter().map(|p| p.truth).sum::<f64>() / rows.len() as f64);
        mp.push(rows.iter().map(|p| p.prediction).sum::<f64>() / rows.len() as f64);
    }
    Ok(WithinResult {
        spec,
        r2,
        r2_pitcher_means: r_squared(&mt, &mp)?,
        predictions,
        epochs_run: trained.epochs_run(),
        train_size: train_set.len(),
    })
}
