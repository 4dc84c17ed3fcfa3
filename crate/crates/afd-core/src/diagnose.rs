//! Schedule evaluation on a "true" bank and maximum-likelihood fault
//! decisions.
//!
//! A designed schedule is replayed over a bank built from the true
//! parameter table; at every measurement time the per-model output
//! ensembles are fitted and all pairwise common areas recorded, which
//! reproduces the benchmark's area-versus-time comparison. A separately
//! simulated realization of one designated true model provides observations
//! for the decision rule.

use crate::distfit::{fit_normal_ml, tv_density, MomentPdf, OutputEnsemble, PdfFamily};
use crate::error::{AfdError, Result};
use crate::parallel;
use crate::rng::{StreamKind, Streams};
use crate::schedule::InputSchedule;
use crate::sysmodel::{integrate_terminal, ModelBank, NonlinearModel};
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub mc_count: usize,
    pub seed: u64,
    pub dt: f64,
    /// Which model the observed realization actually follows.
    pub true_model_index: usize,
    pub family: PdfFamily,
}

impl EvaluateOptions {
    pub fn new(seed: u64) -> Self {
        EvaluateOptions {
            mc_count: 10_000,
            seed,
            dt: 1.0,
            true_model_index: 0,
            family: PdfFamily::Normal,
        }
    }
}

/// Everything measured while replaying a schedule on a bank.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub times: Vec<f64>,
    /// Unordered model pairs, lexicographic.
    pub pair_indices: Vec<(usize, usize)>,
    /// Per time, per pair: `1 - d_TV` of the fitted densities.
    pub pair_areas: Vec<Vec<f64>>,
    /// Per time: sum of the pairwise areas.
    pub total_areas: Vec<f64>,
    /// Per time, per model: fitted density.
    pub pdfs: Vec<Vec<MomentPdf>>,
    /// Observed output of the designated true realization, per time.
    pub observations: Vec<f64>,
    /// Per time, per model: density of the fitted PDF at the observation.
    pub likelihoods: Vec<Vec<f64>>,
    /// Per time: argmax-likelihood model index (ties to the lower index).
    pub decisions: Vec<usize>,
    pub final_pair_areas: Vec<f64>,
    pub final_total_area: f64,
    pub true_model_index: usize,
}

impl EvaluationReport {
    fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9)
            .ok_or_else(|| AfdError::InvalidArgument(format!("no fitted densities at t = {t}")))
    }

    /// Decision from the product of per-time likelihoods up to `t`
    /// (sequential fusion; the pointwise rule is the default elsewhere).
    pub fn fused_decision_at(&self, t: f64) -> Result<usize> {
        let idx = self.time_index(t)?;
        let n_models = self.likelihoods[0].len();
        let mut log_products = vec![0.0f64; n_models];
        for row in self.likelihoods.iter().take(idx + 1) {
            for (acc, &l) in log_products.iter_mut().zip(row) {
                *acc += l.max(f64::MIN_POSITIVE).ln();
            }
        }
        Ok(argmax_lower_tie(&log_products))
    }
}

pub(crate) fn argmax_lower_tie(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Simulates one seeded realization of `bank.models[model_index]` under the
/// schedule, returning `(time, noisy observation)` at each measurement time.
/// Distinct `rep` values give independent realizations.
pub fn simulate_realization(
    bank: &ModelBank,
    model_index: usize,
    schedule: &InputSchedule,
    horizon: f64,
    dt: f64,
    seed: u64,
    rep: u64,
) -> Result<Vec<(f64, f64)>> {
    if model_index >= bank.model_count() {
        return Err(AfdError::InvalidArgument(format!(
            "model index {model_index} out of range"
        )));
    }
    let streams = Streams::new(seed);
    let model = &bank.models[model_index];
    let theta = crate::sysmodel::sample_parameters(
        model,
        &mut streams.stream(StreamKind::Observation, model_index, 0, rep),
    );
    let mut state = crate::sysmodel::sample_init_state(
        model,
        &mut streams.stream(StreamKind::Observation, model_index, 1, rep),
    );
    let times = measurement_times(schedule, horizon);
    let mut observations = Vec::with_capacity(times.len());
    let mut t0 = 0.0;
    for (k, &t1) in times.iter().enumerate() {
        let mut rng = streams.stream(StreamKind::Observation, model_index, 2 + k as u64, rep);
        let z: f64 = StandardNormal.sample(&mut rng);
        let out = integrate_terminal(
            model,
            &theta,
            &state,
            schedule,
            (t0, t1),
            dt,
            &bank.state_box,
            z * bank.noise_std,
        )?;
        observations.push((t1, out.output));
        state = out.state;
        t0 = t1;
    }
    Ok(observations)
}

fn measurement_times(schedule: &InputSchedule, horizon: f64) -> Vec<f64> {
    let mut times: Vec<f64> = schedule.breakpoints().iter().skip(1).copied().collect();
    if times.last().is_none_or(|&t| t < horizon - 1e-9) {
        times.push(horizon);
    }
    times
}

/// Replays `schedule` on `bank` with `opts.mc_count` samples per model,
/// fitting densities and recording pairwise common areas at every
/// measurement time, plus observations and decisions for the designated
/// true realization.
pub fn evaluate_schedule(
    bank: &ModelBank,
    schedule: &InputSchedule,
    horizon: f64,
    opts: &EvaluateOptions,
) -> Result<EvaluationReport> {
    if schedule.input_dim() != bank.n_u {
        return Err(AfdError::InvalidArgument(format!(
            "schedule has input dimension {}, bank expects {}",
            schedule.input_dim(),
            bank.n_u
        )));
    }
    if !schedule.within_box(&bank.input_box) {
        return Err(AfdError::InvalidArgument(
            "schedule values violate the input box".into(),
        ));
    }
    if opts.true_model_index >= bank.model_count() {
        return Err(AfdError::InvalidArgument(format!(
            "true model index {} out of range",
            opts.true_model_index
        )));
    }
    if bank.model_count() < 2 {
        return Err(AfdError::InvalidArgument(
            "evaluation needs at least 2 models".into(),
        ));
    }
    let times = measurement_times(schedule, horizon);
    let n = opts.mc_count;
    let n_models = bank.model_count();
    let streams = Streams::new(opts.seed);

    // Propagate every (model, sample) across all intervals, collecting the
    // output at each measurement time.
    let per_sample: Vec<Vec<f64>> = parallel::try_map_indexed(n_models * n, |flat| {
        let m = flat / n;
        let s = flat % n;
        let model: &NonlinearModel = &bank.models[m];
        let theta = crate::sysmodel::sample_parameters(
            model,
            &mut streams.stream(StreamKind::Parameters, m, 0, s as u64),
        );
        let mut state = crate::sysmodel::sample_init_state(
            model,
            &mut streams.stream(StreamKind::InitState, m, 0, s as u64),
        );
        let mut outs = Vec::with_capacity(times.len());
        let mut t0 = 0.0;
        for (k, &t1) in times.iter().enumerate() {
            let mut rng = streams.stream(StreamKind::Noise, m, k as u64, s as u64);
            let z: f64 = StandardNormal.sample(&mut rng);
            let out = integrate_terminal(
                model,
                &theta,
                &state,
                schedule,
                (t0, t1),
                opts.dt,
                &bank.state_box,
                z * bank.noise_std,
            )?;
            outs.push(out.output);
            state = out.state;
            t0 = t1;
        }
        Ok::<Vec<f64>, AfdError>(outs)
    })?;

    let realization = simulate_realization(
        bank,
        opts.true_model_index,
        schedule,
        horizon,
        opts.dt,
        opts.seed,
        0,
    )?;

    let pair_indices: Vec<(usize, usize)> = (0..n_models)
        .flat_map(|i| ((i + 1)..n_models).map(move |j| (i, j)))
        .collect();

    let mut pdfs = Vec::with_capacity(times.len());
    let mut pair_areas = Vec::with_capacity(times.len());
    let mut total_areas = Vec::with_capacity(times.len());
    let mut observations = Vec::with_capacity(times.len());
    let mut likelihoods = Vec::with_capacity(times.len());
    let mut decisions = Vec::with_capacity(times.len());

    for (k, &t) in times.iter().enumerate() {
        let mut fits = Vec::with_capacity(n_models);
        for m in 0..n_models {
            let samples: Vec<f64> = (0..n).map(|s| per_sample[m * n + s][k]).collect();
            let ens = OutputEnsemble::new(m, t, samples)?;
            let fit = fit_normal_ml(&ens)?;
            fits.push(MomentPdf::clamped(opts.family, fit.mu, fit.sigma)?);
        }
        let mut areas = Vec::with_capacity(pair_indices.len());
        for &(i, j) in &pair_indices {
            areas.push(1.0 - tv_density(&fits[i], &fits[j])?);
        }
        let total = areas.iter().sum::<f64>();
        let obs = realization[k].1;
        let lik: Vec<f64> = fits.iter().map(|p| p.density(obs)).collect();
        decisions.push(argmax_lower_tie(&lik));
        likelihoods.push(lik);
        observations.push(obs);
        pair_areas.push(areas);
        total_areas.push(total);
        pdfs.push(fits);
    }

    let final_pair_areas = pair_areas.last().cloned().unwrap_or_default();
    let final_total_area = *total_areas.last().unwrap_or(&f64::NAN);

    Ok(EvaluationReport {
        times,
        pair_indices,
        pair_areas,
        total_areas,
        pdfs,
        observations,
        likelihoods,
        decisions,
        final_pair_areas,
        final_total_area,
        true_model_index: opts.true_model_index,
    })
}

/// Pointwise maximum-likelihood decision at measurement time `t`: the model
/// whose fitted density is largest at `observation`, ties broken toward the
/// lower index.
pub fn decide(report: &EvaluationReport, observation: f64, t: f64) -> Result<usize> {
    let idx = report.time_index(t)?;
    let lik: Vec<f64> = report.pdfs[idx]
        .iter()
        .map(|p| p.density(observation))
        .collect();
    Ok(argmax_lower_tie(&lik))
}
