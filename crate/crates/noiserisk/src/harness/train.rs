//! Data preparation and the per-method training loops behind `run_single`.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::data::{
    generate_synthetic, ingest_csv, inject_symmetric_noise, LabeledDataset, NoiseSpec, SplitTag,
};
use crate::error::{Error, Result};
use crate::metrics::ConfusionCounts;
use crate::nnet::{
    cs_loss_per_sample, hard_label_delta, mse_output_delta, semi_loss, soft_ce_delta,
    soft_ce_value, CostWeights, MlpParams, OptimState,
};
use crate::rng::{stream_rng, stream_seed, Stream};
use crate::selection::{
    fit_gmm_em, forget_rate, gmm_select, normalize_losses, small_loss_select,
    uniform_class_select, SelectionMask, SelectionQuality,
};
use crate::semisup::{augment_batch, co_guess, co_refine, mixup_batch, sharpen, SoftLabel};

use super::config::{ExperimentConfig, Method};
use super::run::{EpochTrace, SelectionStats};

/// Train/val/test triple with noise applied to the training split, plus the
/// augmentation scale derived from the training features.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    pub test: LabeledDataset,
    /// Gaussian augmentation sigma: `semi.sigma_aug_scale` times the mean
    /// per-dimension feature standard deviation.
    pub sigma_aug: f64,
}

/// Materialize the configured data source and apply label noise.
///
/// Synthetic data is regenerated from its own seed (shared by every cell of
/// a sweep) and always passes through the injector so the flip mask exists
/// even at rate zero. CSV training data that already carries a `true_label`
/// column is treated as pre-noised: asking for more noise on top is a config
/// error, and at rate zero it is used as-is. CSV data without ground truth
/// is assumed clean when noise is requested.
pub fn prepare_data(config: &ExperimentConfig) -> Result<PreparedData> {
    let noise = NoiseSpec {
        rate: config.noise_rate,
        seed: stream_seed(config.seed, Stream::Noise),
    };
    noise.validate()?;

    let (train, val, test) = if let Some(spec) = &config.data.synthetic {
        let (clean_train, val, test) = generate_synthetic(spec)?;
        (inject_symmetric_noise(&clean_train, &noise)?, val, test)
    } else if let Some(csv) = &config.data.csv {
        let label = csv.label_column.as_str();
        let bin = csv.binarization.as_ref();
        let train = ingest_csv(&csv.train, label, bin, SplitTag::Train)?;
        let val = ingest_csv(&csv.val, label, bin, SplitTag::Val)?;
        let test = ingest_csv(&csv.test, label, bin, SplitTag::Test)?;
        let train = if config.noise_rate > 0.0 {
            if train.true_labels.is_some() {
                return Err(Error::Config(format!(
                    "{} already carries a true_label column; refusing to stack \
                     noise_rate {} on top of existing noise",
                    csv.train.display(),
                    config.noise_rate
                )));
            }
            inject_symmetric_noise(&train, &noise)?
        } else {
            train
        };
        (train, val, test)
    } else {
        config.data.validate()?;
        unreachable!("validate rejects configs without a data source");
    };

    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let stds = train.feature_std();
    let mean_std = stds.iter().sum::<f64>() / stds.len().max(1) as f64;
    let sigma_aug = config.semi.sigma_aug_scale * mean_std;

    Ok(PreparedData {
        train,
        val,
        test,
        sigma_aug,
    })
}

/// Everything the training loop produces: final parameters (one or two
/// networks), the per-epoch trace, aggregated selection quality, and the
/// epoch-stamped failure message if training aborted.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub nets: Vec<MlpParams>,
    pub trace: Vec<EpochTrace>,
    pub selection_stats: Option<SelectionStats>,
    pub failure: Option<String>,
}

/// Mean positive-class probability across an ensemble of networks.
pub fn ensemble_scores(nets: &[MlpParams], features: &Array2<f64>) -> Result<Vec<f64>> {
    if nets.is_empty() {
        return Err(Error::InvalidParameter("no networks to evaluate".into()));
    }
    let mut acc = vec![0.0; features.nrows()];
    for net in nets {
        for (a, p) in acc.iter_mut().zip(net.predict_proba(features)?) {
            *a += p;
        }
    }
    let k = nets.len() as f64;
    Ok(acc.into_iter().map(|s| s / k).collect())
}

/// Threshold scores into hard labels; ties go to the positive class.
pub fn scores_to_preds(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores
        .iter()
        .map(|&s| u8::from(s >= threshold))
        .collect()
}

/// Train the configured method on `train`, tracking validation balanced
/// accuracy per epoch. Numeric failures mid-training are reported through
/// `TrainOutcome::failure` rather than an error so the partial trace
/// survives.
pub fn train_model(
    config: &ExperimentConfig,
    train: &LabeledDataset,
    val: &LabeledDataset,
    sigma_aug: f64,
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(config, train, val, sigma_aug)?;
    trainer.run()
}

struct Trainer<'a> {
    cfg: &'a ExperimentConfig,
    train: &'a LabeledDataset,
    val: &'a LabeledDataset,
    nets: Vec<MlpParams>,
    opts: Vec<OptimState>,
    shuffle_rng: ChaCha8Rng,
    semi_rng: ChaCha8Rng,
    sigma_aug: f64,
}

/// One epoch's training summary: mean loss over the samples actually
/// trained on (net A for two-network methods), the fraction selected, and
/// the selection mask when one exists.
struct EpochSummary {
    train_loss: f64,
    selected_fraction: f64,
    mask: Option<Vec<bool>>,
}

/// A loss-mixture division of the training set for one network.
struct Division {
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    posteriors: Vec<f64>,
    selected: Vec<bool>,
}

impl<'a> Trainer<'a> {
    fn new(
        cfg: &'a ExperimentConfig,
        train: &'a LabeledDataset,
        val: &'a LabeledDataset,
        sigma_aug: f64,
    ) -> Result<Self> {
        let dim = train.feature_dim();
        let mut nets = vec![MlpParams::init(
            dim,
            &cfg.hidden,
            stream_seed(cfg.seed, Stream::InitA),
        )?];
        if cfg.method.two_networks() {
            nets.push(MlpParams::init(
                dim,
                &cfg.hidden,
                stream_seed(cfg.seed, Stream::InitB),
            )?);
        }
        let opts = nets
            .iter()
            .map(|net| OptimState::new(net, cfg.momentum, cfg.base_lr, cfg.epochs))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            train,
            val,
            nets,
            opts,
            shuffle_rng: stream_rng(cfg.seed, Stream::Shuffle),
            semi_rng: stream_rng(cfg.seed, Stream::Semi),
            sigma_aug,
        })
    }

    fn run(&mut self) -> Result<TrainOutcome> {
        let mut trace: Vec<EpochTrace> = Vec::with_capacity(self.cfg.epochs);
        let mut last_mask: Option<Vec<bool>> = None;
        let mut failure = None;

        for epoch in 0..self.cfg.epochs {
            let summary = match self.epoch(epoch) {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(format!("epoch {epoch}: {e}"));
                    break;
                }
            };
            let val_bac = self.val_bac()?;
            let selection_agreement = match (&summary.mask, &self.train.flip_mask) {
                (Some(mask), Some(flips)) => Some(SelectionQuality::score(mask, flips)?.agreement),
                _ => None,
            };
            trace.push(EpochTrace {
                epoch,
                train_loss: summary.train_loss,
                selected_fraction: summary.selected_fraction,
                val_bac,
                selection_agreement,
            });
            if summary.mask.is_some() {
                last_mask = summary.mask;
            }
        }

        let selection_stats = self.selection_stats(&trace, last_mask.as_deref())?;
        Ok(TrainOutcome {
            nets: std::mem::take(&mut self.nets),
            trace,
            selection_stats,
            failure,
        })
    }

    fn epoch(&mut self, epoch: usize) -> Result<EpochSummary> {
        let in_warmup = epoch < self.cfg.warmup_epochs;
        let weights = if self.cfg.cost_sensitive && !in_warmup {
            self.cfg.weights
        } else {
            CostWeights::uniform()
        };
        let n = self.train.n_samples();
        let all: Vec<usize> = (0..n).collect();

        match self.cfg.method {
            Method::Baseline => {
                let loss = self.supervised_epoch(0, &all, &weights, epoch)?;
                Ok(EpochSummary {
                    train_loss: loss,
                    selected_fraction: 1.0,
                    mask: None,
                })
            }
            Method::GmmFilter => {
                if in_warmup {
                    let loss = self.supervised_epoch(0, &all, &weights, epoch)?;
                    return Ok(EpochSummary {
                        train_loss: loss,
                        selected_fraction: 1.0,
                        mask: None,
                    });
                }
                let losses = self.per_sample_losses(0)?;
                let mask = self.clean_mask(&losses)?;
                let idx = mask.indices();
                let loss = self.supervised_epoch(0, &idx, &weights, epoch)?;
                Ok(EpochSummary {
                    train_loss: loss,
                    selected_fraction: idx.len() as f64 / n as f64,
                    mask: Some(mask.selected),
                })
            }
            Method::CoTeaching => self.co_teaching_epoch(&weights, epoch),
            Method::Dividemix | Method::Unicon => {
                if in_warmup {
                    let loss = self.supervised_epoch(0, &all, &weights, epoch)?;
                    self.supervised_epoch(1, &all, &weights, epoch)?;
                    return Ok(EpochSummary {
                        train_loss: loss,
                        selected_fraction: 1.0,
                        mask: None,
                    });
                }
                self.divide_epoch(&weights, epoch)
            }
        }
    }

    /// One pass of plain minibatch SGD for net `k` over the given sample
    /// indices. Returns the sample-weighted mean loss.
    fn supervised_epoch(
        &mut self,
        k: usize,
        indices: &[usize],
        weights: &CostWeights,
        epoch: usize,
    ) -> Result<f64> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter(
                "no samples selected for training".into(),
            ));
        }
        let mut order = indices.to_vec();
        order.shuffle(&mut self.shuffle_rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(self.cfg.batch_size) {
            let x = self.train.features.select(Axis(0), chunk);
            let y: Vec<u8> = chunk.iter().map(|&i| self.train.observed_labels[i]).collect();
            let pass = self.nets[k].forward(&x)?;
            let losses = cs_loss_per_sample(&pass.probs, &y, weights)?;
            let delta = hard_label_delta(&pass.probs, &y, weights)?;
            let grads = self.nets[k].backward_from_delta(&pass, &delta)?;
            self.opts[k].step(&mut self.nets[k], &grads, epoch)?;
            loss_sum += losses.iter().sum::<f64>();
        }
        Ok(loss_sum / order.len() as f64)
    }

    /// Unweighted per-sample cross-entropy of net `k` on the full training
    /// set, the input to every selection mechanism.
    fn per_sample_losses(&self, k: usize) -> Result<Vec<f64>> {
        let pass = self.nets[k].forward(&self.train.features)?;
        cs_loss_per_sample(
            &pass.probs,
            &self.train.observed_labels,
            &CostWeights::uniform(),
        )
    }

    /// Normalize, fit the loss mixture, and threshold the clean posterior.
    /// Falls back to selecting everything when the losses are degenerate or
    /// the mask comes back empty, so training never starves.
    fn clean_mask(&self, losses: &[f64]) -> Result<SelectionMask> {
        let n = losses.len();
        let normed = match normalize_losses(losses) {
            Ok(v) => v,
            Err(Error::DegenerateLosses) => return Ok(SelectionMask::select_all(n)),
            Err(e) => return Err(e),
        };
        let gmm = match fit_gmm_em(&normed, &self.cfg.gmm.options()) {
            Ok(g) => g,
            Err(Error::DegenerateLosses) => return Ok(SelectionMask::select_all(n)),
            Err(e) => return Err(e),
        };
        let mask = gmm_select(&normed, &gmm, self.cfg.gmm.threshold)?;
        if mask.n_selected() == 0 {
            return Ok(SelectionMask::select_all(n));
        }
        Ok(mask)
    }

    /// Per-batch cross-training: each net keeps the `keep` fraction of
    /// smallest-loss samples judged by itself, and its peer trains on them.
    fn co_teaching_epoch(&mut self, weights: &CostWeights, epoch: usize) -> Result<EpochSummary> {
        let n = self.train.n_samples();
        let keep = forget_rate(epoch, self.cfg.noise_rate, self.cfg.forget_ramp_epochs)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.shuffle_rng);

        let mut trained_by_a = vec![false; n];
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;

        for chunk in order.chunks(self.cfg.batch_size) {
            let x = self.train.features.select(Axis(0), chunk);
            let y: Vec<u8> = chunk.iter().map(|&i| self.train.observed_labels[i]).collect();
            let mut picks: Vec<Vec<usize>> = Vec::with_capacity(2);
            for k in 0..2 {
                let pass = self.nets[k].forward(&x)?;
                let losses = cs_loss_per_sample(&pass.probs, &y, &CostWeights::uniform())?;
                picks.push(small_loss_select(&losses, keep)?);
            }
            // Net A trains on what B picked and vice versa.
            for k in 0..2 {
                let pick = &picks[1 - k];
                let rows: Vec<usize> = pick.iter().map(|&j| chunk[j]).collect();
                let xs = self.train.features.select(Axis(0), &rows);
                let ys: Vec<u8> = pick.iter().map(|&j| y[j]).collect();
                let pass = self.nets[k].forward(&xs)?;
                let losses = cs_loss_per_sample(&pass.probs, &ys, weights)?;
                let delta = hard_label_delta(&pass.probs, &ys, weights)?;
                let grads = self.nets[k].backward_from_delta(&pass, &delta)?;
                self.opts[k].step(&mut self.nets[k], &grads, epoch)?;
                if k == 0 {
                    for &row in &rows {
                        trained_by_a[row] = true;
                    }
                    loss_sum += losses.iter().sum::<f64>();
                    loss_count += losses.len();
                }
            }
        }

        Ok(EpochSummary {
            train_loss: loss_sum / loss_count.max(1) as f64,
            selected_fraction: keep,
            mask: Some(trained_by_a),
        })
    }

    /// One dividemix/unicon epoch: each net's training set is divided by
    /// its PEER's loss mixture, labels are co-refined, unlabeled samples are
    /// co-guessed, and both batches pass through mixup before the combined
    /// objective.
    fn divide_epoch(&mut self, weights: &CostWeights, epoch: usize) -> Result<EpochSummary> {
        let losses = [self.per_sample_losses(0)?, self.per_sample_losses(1)?];
        let divisions = [
            self.division_from_losses(&losses[1])?,
            self.division_from_losses(&losses[0])?,
        ];
        let lambda = self
            .cfg
            .semi
            .lambda_at(epoch.saturating_sub(self.cfg.warmup_epochs));

        let mut net_a_loss = 0.0;
        for (k, division) in divisions.iter().enumerate() {
            let loss = self.semi_train_net(k, division, weights, lambda, epoch)?;
            if k == 0 {
                net_a_loss = loss;
            }
        }

        let n = self.train.n_samples() as f64;
        Ok(EpochSummary {
            train_loss: net_a_loss,
            selected_fraction: divisions[0].labeled.len() as f64 / n,
            mask: Some(divisions[0].selected.clone()),
        })
    }

    /// Divide the training set by a loss vector: labeled = clean posterior
    /// above the threshold (class-uniform for unicon), unlabeled = the rest.
    /// Degenerate mixtures or empty labeled sets fall back to everything
    /// labeled.
    fn division_from_losses(&self, losses: &[f64]) -> Result<Division> {
        let n = losses.len();
        let all_labeled = |posteriors: Vec<f64>| Division {
            labeled: (0..n).collect(),
            unlabeled: Vec::new(),
            posteriors,
            selected: vec![true; n],
        };

        let normed = match normalize_losses(losses) {
            Ok(v) => v,
            Err(Error::DegenerateLosses) => return Ok(all_labeled(vec![1.0; n])),
            Err(e) => return Err(e),
        };
        let gmm = match fit_gmm_em(&normed, &self.cfg.gmm.options()) {
            Ok(g) => g,
            Err(Error::DegenerateLosses) => return Ok(all_labeled(vec![1.0; n])),
            Err(e) => return Err(e),
        };
        let base = gmm_select(&normed, &gmm, self.cfg.gmm.threshold)?;
        let mask = match self.cfg.method {
            Method::Unicon => {
                let budget = gmm.clean_mass().min(1.0);
                uniform_class_select(&base.clean_posterior, &self.train.observed_labels, budget)?.0
            }
            _ => base,
        };
        if mask.n_selected() == 0 {
            return Ok(all_labeled(mask.clean_posterior));
        }
        let labeled = mask.indices();
        let unlabeled: Vec<usize> = (0..n).filter(|i| !mask.selected[*i]).collect();
        Ok(Division {
            labeled,
            unlabeled,
            posteriors: mask.clean_posterior,
            selected: mask.selected,
        })
    }

    /// Train net `k` on its division for one epoch. The unlabeled pool is
    /// consumed round-robin so every labeled batch gets a same-sized
    /// unlabeled batch. Returns the mean combined loss.
    fn semi_train_net(
        &mut self,
        k: usize,
        div: &Division,
        weights: &CostWeights,
        lambda: f64,
        epoch: usize,
    ) -> Result<f64> {
        let mut labeled = div.labeled.clone();
        labeled.shuffle(&mut self.shuffle_rng);
        let mut unlabeled = div.unlabeled.clone();
        unlabeled.shuffle(&mut self.shuffle_rng);

        let mut cursor = 0usize;
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        // chunks() borrows `labeled`, and the batch step needs &mut self.
        let batches: Vec<Vec<usize>> = labeled
            .chunks(self.cfg.batch_size)
            .map(|c| c.to_vec())
            .collect();
        for chunk in batches {
            let u_chunk: Vec<usize> = if unlabeled.is_empty() {
                Vec::new()
            } else {
                (0..chunk.len())
                    .map(|_| {
                        let i = unlabeled[cursor % unlabeled.len()];
                        cursor += 1;
                        i
                    })
                    .collect()
            };
            let loss = self.semi_batch_step(k, &chunk, &u_chunk, div, weights, lambda, epoch)?;
            loss_sum += loss * chunk.len() as f64;
            seen += chunk.len();
        }
        Ok(loss_sum / seen.max(1) as f64)
    }

    /// One semi-supervised batch for net `k`: refine labeled targets from
    /// augmented views, guess unlabeled targets with both nets, mix both
    /// batches against a shared pool, then descend the combined objective.
    #[allow(clippy::too_many_arguments)]
    fn semi_batch_step(
        &mut self,
        k: usize,
        chunk: &[usize],
        u_chunk: &[usize],
        div: &Division,
        weights: &CostWeights,
        lambda: f64,
        epoch: usize,
    ) -> Result<f64> {
        let semi = &self.cfg.semi;
        let xl = self.train.features.select(Axis(0), chunk);
        let nl = chunk.len();

        // Refined labeled targets: own net's mean prediction over augmented
        // views, blended with the observed label by the clean posterior.
        let own_views = self.view_predictions(&[k], &xl, semi.augmentations)?;
        let mut ql = Array2::zeros((nl, 2));
        for (i, &row) in chunk.iter().enumerate() {
            let avg = co_guess(&per_sample(&own_views, i))?;
            let refined = co_refine(
                self.train.observed_labels[row],
                div.posteriors[row],
                avg,
            )?;
            ql[[i, 0]] = refined.q0;
            ql[[i, 1]] = refined.q1;
        }

        // Guessed unlabeled targets: both nets' views, sharpened.
        let (xu, qu) = if u_chunk.is_empty() {
            (None, None)
        } else {
            let xu = self.train.features.select(Axis(0), u_chunk);
            let views = self.view_predictions(&[0, 1], &xu, semi.augmentations)?;
            let mut qu = Array2::zeros((u_chunk.len(), 2));
            for i in 0..u_chunk.len() {
                let guess = co_guess(&per_sample(&views, i))?;
                let sharp = sharpen(guess, semi.temperature)?;
                qu[[i, 0]] = sharp.q0;
                qu[[i, 1]] = sharp.q1;
            }
            (Some(xu), Some(qu))
        };

        // Training views and the shared mixup pool.
        let xl_hat = augment_batch(&xl, self.sigma_aug, &mut self.semi_rng)?;
        let xu_hat = match &xu {
            Some(xu) => Some(augment_batch(xu, self.sigma_aug, &mut self.semi_rng)?),
            None => None,
        };
        let (pool_x, pool_q) = match (&xu_hat, &qu) {
            (Some(xu_hat), Some(qu)) => (
                ndarray::concatenate(Axis(0), &[xl_hat.view(), xu_hat.view()])
                    .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
                ndarray::concatenate(Axis(0), &[ql.view(), qu.view()])
                    .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
            ),
            _ => (xl_hat.clone(), ql.clone()),
        };
        let mut perm: Vec<usize> = (0..pool_x.nrows()).collect();
        perm.shuffle(&mut self.semi_rng);

        let (mx_l, mq_l) = mixup_batch(
            &xl_hat,
            &ql,
            &pool_x.select(Axis(0), &perm[..nl]),
            &pool_q.select(Axis(0), &perm[..nl]),
            semi.alpha,
            &mut self.semi_rng,
        )?;
        let mixed_u = match (&xu_hat, &qu) {
            (Some(xu_hat), Some(qu)) => {
                let rows = &perm[nl..nl + u_chunk.len()];
                Some(mixup_batch(
                    xu_hat,
                    qu,
                    &pool_x.select(Axis(0), rows),
                    &pool_q.select(Axis(0), rows),
                    semi.alpha,
                    &mut self.semi_rng,
                )?)
            }
            _ => None,
        };

        // Combined objective: weighted soft CE on labeled, lambda * MSE on
        // unlabeled, backpropagated as one gradient.
        let pass_l = self.nets[k].forward(&mx_l)?;
        let delta_l = soft_ce_delta(&pass_l.probs, &mq_l, weights)?;
        let mut grads = self.nets[k].backward_from_delta(&pass_l, &delta_l)?;
        let loss = match &mixed_u {
            Some((mx_u, mq_u)) => {
                let pass_u = self.nets[k].forward(mx_u)?;
                let delta_u = mse_output_delta(&pass_u.probs, mq_u)? * lambda;
                grads.accumulate(&self.nets[k].backward_from_delta(&pass_u, &delta_u)?)?;
                semi_loss(&pass_l.probs, &mq_l, &pass_u.probs, mq_u, lambda, weights)?.0
            }
            None => soft_ce_value(&pass_l.probs, &mq_l, weights)?,
        };
        self.opts[k].step(&mut self.nets[k], &grads, epoch)?;
        Ok(loss)
    }

    /// Predictions of the chosen nets on `augmentations` noisy views of a
    /// batch. Outer index: (net, view) pairs in order; inner: batch row.
    fn view_predictions(
        &mut self,
        net_indices: &[usize],
        x: &Array2<f64>,
        augmentations: usize,
    ) -> Result<Vec<Array2<f64>>> {
        let mut out = Vec::with_capacity(net_indices.len() * augmentations);
        for &k in net_indices {
            for _ in 0..augmentations {
                let view = augment_batch(x, self.sigma_aug, &mut self.semi_rng)?;
                out.push(self.nets[k].forward(&view)?.probs);
            }
        }
        Ok(out)
    }

    fn val_bac(&self) -> Result<Option<f64>> {
        if self.val.n_samples() == 0 {
            return Ok(None);
        }
        let scores = ensemble_scores(&self.nets, &self.val.features)?;
        let preds = scores_to_preds(&scores, self.cfg.decision_threshold);
        let counts = ConfusionCounts::from_predictions(&preds, &self.val.observed_labels)?;
        Ok(counts.bac())
    }

    fn selection_stats(
        &self,
        trace: &[EpochTrace],
        last_mask: Option<&[bool]>,
    ) -> Result<Option<SelectionStats>> {
        let agreements: Vec<f64> = trace
            .iter()
            .filter_map(|t| t.selection_agreement)
            .collect();
        let Some(mask) = last_mask else {
            return Ok(None);
        };
        let Some(flips) = &self.train.flip_mask else {
            return Ok(None);
        };
        let quality = SelectionQuality::score(mask, flips)?;
        let mean = if agreements.is_empty() {
            None
        } else {
            Some(agreements.iter().sum::<f64>() / agreements.len() as f64)
        };
        Ok(Some(SelectionStats {
            mean_agreement_post_warmup: mean,
            final_agreement: quality.agreement,
            final_precision: quality.precision,
            final_recall: quality.recall,
        }))
    }
}

/// Gather the i-th row of every prediction matrix as soft labels.
fn per_sample(views: &[Array2<f64>], i: usize) -> Vec<SoftLabel> {
    views
        .iter()
        .map(|p| {
            let (a, b) = (p[[i, 0]], p[[i, 1]]);
            let sum = a + b;
            SoftLabel {
                q0: a / sum,
                q1: b / sum,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SyntheticSpec;
    use crate::harness::config::ExperimentConfig;

    fn tiny_config(method: Method) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::synthetic_default(method);
        let spec = SyntheticSpec {
            n_train: 120,
            n_val: 60,
            n_test: 60,
            ..SyntheticSpec::derma_preset()
        };
        cfg.data = crate::harness::config::DataConfig::synthetic(spec);
        cfg.epochs = 6;
        cfg.warmup_epochs = 2;
        cfg.noise_rate = 0.2;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn prepare_data_injects_noise_and_derives_sigma() {
        let cfg = tiny_config(Method::Baseline);
        let prep = prepare_data(&cfg).unwrap();
        assert_eq!(prep.train.n_samples(), 120);
        let flips = prep.train.flip_mask.as_ref().unwrap();
        assert!(flips.iter().any(|&f| f), "noise at 0.2 should flip something");
        assert!(prep.sigma_aug > 0.0);
        // Evaluation splits stay clean.
        let val_flips = prep.val.flip_mask.as_ref().unwrap();
        assert!(val_flips.iter().all(|&f| !f));
    }

    #[test]
    fn prepare_data_rate_zero_still_materializes_truth_for_synthetic() {
        let mut cfg = tiny_config(Method::Baseline);
        cfg.noise_rate = 0.0;
        let prep = prepare_data(&cfg).unwrap();
        let flips = prep.train.flip_mask.as_ref().unwrap();
        assert!(flips.iter().all(|&f| !f));
        assert_eq!(
            prep.train.true_labels.as_ref().unwrap(),
            &prep.train.observed_labels
        );
    }

    #[test]
    fn same_seed_same_noise_across_methods() {
        let a = prepare_data(&tiny_config(Method::Baseline)).unwrap();
        let b = prepare_data(&tiny_config(Method::Dividemix)).unwrap();
        assert_eq!(a.train.observed_labels, b.train.observed_labels);
        assert_eq!(a.train.flip_mask, b.train.flip_mask);
    }

    #[test]
    fn every_method_trains_end_to_end() {
        for method in Method::ALL {
            let cfg = tiny_config(method);
            let prep = prepare_data(&cfg).unwrap();
            let out = train_model(&cfg, &prep.train, &prep.val, prep.sigma_aug).unwrap();
            assert!(out.failure.is_none(), "{method}: {:?}", out.failure);
            assert_eq!(out.trace.len(), cfg.epochs);
            assert_eq!(out.nets.len(), if method.two_networks() { 2 } else { 1 });
            for t in &out.trace {
                assert!(t.train_loss.is_finite(), "{method} epoch {}", t.epoch);
                assert!(t.selected_fraction > 0.0 && t.selected_fraction <= 1.0);
                assert!(t.val_bac.is_some());
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = tiny_config(Method::Dividemix);
        let prep = prepare_data(&cfg).unwrap();
        let a = train_model(&cfg, &prep.train, &prep.val, prep.sigma_aug).unwrap();
        let b = train_model(&cfg, &prep.train, &prep.val, prep.sigma_aug).unwrap();
        let ja: Vec<String> = a.nets.iter().map(|n| n.to_json().unwrap()).collect();
        let jb: Vec<String> = b.nets.iter().map(|n| n.to_json().unwrap()).collect();
        assert_eq!(ja, jb);
        for (ta, tb) in a.trace.iter().zip(&b.trace) {
            assert_eq!(ta.train_loss.to_bits(), tb.train_loss.to_bits());
        }
    }

    #[test]
    fn warmup_trains_on_everything() {
        let cfg = tiny_config(Method::GmmFilter);
        let prep = prepare_data(&cfg).unwrap();
        let out = train_model(&cfg, &prep.train, &prep.val, prep.sigma_aug).unwrap();
        for t in &out.trace[..cfg.warmup_epochs] {
            assert_eq!(t.selected_fraction, 1.0);
            assert!(t.selection_agreement.is_none());
        }
        for t in &out.trace[cfg.warmup_epochs..] {
            assert!(t.selection_agreement.is_some());
        }
        assert!(out.selection_stats.is_some());
    }

    #[test]
    fn co_teaching_fraction_follows_forget_schedule() {
        let mut cfg = tiny_config(Method::CoTeaching);
        cfg.noise_rate = 0.4;
        cfg.forget_ramp_epochs = 4;
        cfg.epochs = 6;
        let prep = prepare_data(&cfg).unwrap();
        let out = train_model(&cfg, &prep.train, &prep.val, prep.sigma_aug).unwrap();
        for t in &out.trace {
            let expected = forget_rate(t.epoch, 0.4, 4).unwrap();
            assert!((t.selected_fraction - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_scores_average_the_networks() {
        let cfg = tiny_config(Method::Baseline);
        let prep = prepare_data(&cfg).unwrap();
        let net_a = MlpParams::init(prep.train.feature_dim(), &[8], 1).unwrap();
        let net_b = MlpParams::init(prep.train.feature_dim(), &[8], 2).unwrap();
        let pa = net_a.predict_proba(&prep.test.features).unwrap();
        let pb = net_b.predict_proba(&prep.test.features).unwrap();
        let ens = ensemble_scores(&[net_a, net_b], &prep.test.features).unwrap();
        for i in 0..ens.len() {
            assert!((ens[i] - 0.5 * (pa[i] + pb[i])).abs() < 1e-12);
        }
    }
}
