//! Outer minimization: picks the piecewise-constant input that minimizes the
//! worst-case common area, interval by interval.
//!
//! One frozen set of parameter and noise draws per (model, interval, sample)
//! is reused for every candidate input, so the outer objective is a
//! deterministic function of the candidate and the minimization is
//! well-posed. Candidates are screened on a coarse grid and the best grid
//! point is polished with a bounded Nelder-Mead; any candidate whose samples
//! hit the state clamp is rejected outright.

use std::collections::HashMap;

use crate::ambiguity::{build_roi, RoiBox};
use crate::distfit::{fit_normal_ml, MomentPdf, OutputEnsemble, PdfFamily};
use crate::error::{AfdError, Result};
use crate::parallel;
use crate::rng::{StreamKind, Streams};
use crate::sysmodel::{integrate_terminal, sample_init_state, sample_parameters, ModelBank};
use crate::worstcase::{worst_case_common_area, InnerOptions, WorstCaseSolution};
use rand_distr::{Distribution, StandardNormal};

pub use crate::schedule::InputSchedule;

/// Knobs of one design run.
#[derive(Debug, Clone)]
pub struct DesignOptions {
    /// Monte Carlo samples per model. 10000 reproduces the benchmark scale;
    /// 2000 is the desk-scale profile.
    pub mc_count: usize,
    pub seed: u64,
    /// TV radius per model.
    pub radii: Vec<f64>,
    pub family: PdfFamily,
    /// Integrator step, s.
    pub dt: f64,
    /// Grid points per input dimension for the coarse screen.
    pub grid_points: usize,
    pub nm: NmOptions,
    pub inner: InnerOptions,
    /// Fraction of samples allowed to hit the state clamp before a candidate
    /// is rejected. `None` rejects on any clamp (the hard-constraint rule).
    pub clamp_quantile: Option<f64>,
}

impl DesignOptions {
    pub fn new(seed: u64, radii: Vec<f64>) -> Self {
        DesignOptions {
            mc_count: 10_000,
            seed,
            radii,
            family: PdfFamily::Normal,
            dt: 1.0,
            grid_points: 6,
            nm: NmOptions::default(),
            inner: InnerOptions::default(),
            clamp_quantile: None,
        }
    }
}

/// Bounded Nelder-Mead settings for the refinement stage.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_evals: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_evals: 60,
            f_tol: 1e-6,
            x_tol: 1e-9,
        }
    }
}

/// Everything frozen for one interval's candidate evaluations.
pub struct IntervalContext<'a> {
    pub bank: &'a ModelBank,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Current sample states, `[model][sample][coord]`.
    pub states: &'a [Vec<Vec<f64>>],
    /// Frozen parameter draws, `[model][sample][theta]`.
    pub params: &'a [Vec<Vec<f64>>],
    /// Frozen terminal-noise draws (already scaled), `[model][sample]`.
    pub noise: &'a [Vec<f64>],
    pub radii: &'a [f64],
    pub family: PdfFamily,
    pub inner: &'a InnerOptions,
    pub clamp_quantile: Option<f64>,
}

/// Raw ensemble propagation of one candidate input.
pub struct Propagation {
    /// Terminal outputs, `[model][sample]`.
    pub outputs: Vec<Vec<f64>>,
    /// Terminal states, `[model][sample][coord]`.
    pub terminal_states: Vec<Vec<Vec<f64>>>,
    /// Samples that hit the state clamp at least once.
    pub clamped_samples: usize,
}

fn propagate_with<F>(cx: &IntervalContext<'_>, u: &[f64], map: F) -> Result<Propagation>
where
    F: Fn(
        usize,
        &(dyn Fn(usize) -> Result<(f64, Vec<f64>, bool)> + Sync),
    ) -> Result<Vec<(f64, Vec<f64>, bool)>>,
{
    let n_models = cx.bank.model_count();
    let n = cx.states[0].len();
    let schedule = InputSchedule::constant(u.to_vec());
    let worker = |flat: usize| -> Result<(f64, Vec<f64>, bool)> {
        let m = flat / n;
        let s = flat % n;
        let out = integrate_terminal(
            &cx.bank.models[m],
            &cx.params[m][s],
            &cx.states[m][s],
            &schedule,
            (cx.t0, cx.t1),
            cx.dt,
            &cx.bank.state_box,
            cx.noise[m][s],
        )?;
        Ok((out.output, out.state, out.clamped))
    };
    let flat = map(n_models * n, &worker)?;
    let mut outputs = vec![Vec::with_capacity(n); n_models];
    let mut terminal = vec![Vec::with_capacity(n); n_models];
    let mut clamped = 0usize;
    for (i, (y, state, hit)) in flat.into_iter().enumerate() {
        let m = i / n;
        outputs[m].push(y);
        terminal[m].push(state);
        clamped += hit as usize;
    }
    Ok(Propagation {
        outputs,
        terminal_states: terminal,
        clamped_samples: clamped,
    })
}

/// Propagates all samples of all models under constant `u` over the
/// interval; parallel when the `parallel` feature is enabled.
pub fn propagate_candidate(cx: &IntervalContext<'_>, u: &[f64]) -> Result<Propagation> {
    propagate_with(cx, u, |n, f| parallel::try_map_indexed(n, f))
}

/// Sequential twin of [`propagate_candidate`]; the benches compare the two.
pub fn propagate_candidate_seq(cx: &IntervalContext<'_>, u: &[f64]) -> Result<Propagation> {
    propagate_with(cx, u, |n, f| (0..n).map(f).collect())
}

/// One candidate's evaluation: worst-case area, feasibility and the fitted
/// artifacts behind it.
#[derive(Debug, Clone)]
pub struct CandidateOutcome {
    pub input: Vec<f64>,
    /// Worst-case common area; `INFINITY` when the candidate could not be
    /// evaluated at all.
    pub area: f64,
    pub feasible: bool,
    /// Why the candidate failed, when it did.
    pub failure: Option<String>,
    pub pdfs: Vec<MomentPdf>,
    pub rois: Vec<RoiBox>,
    pub solution: Option<WorstCaseSolution>,
    pub terminal_states: Vec<Vec<Vec<f64>>>,
}

/// Evaluates one constant candidate input under the frozen draws: propagate,
/// fit, build ambiguity boxes, solve the inner maximization. Integration or
/// fitting failures mark the candidate infeasible instead of aborting the
/// design.
pub fn evaluate_candidate(cx: &IntervalContext<'_>, u: &[f64]) -> Result<CandidateOutcome> {
    if u.len() != cx.bank.n_u {
        return Err(AfdError::InvalidArgument(format!(
            "candidate has dimension {}, bank expects {}",
            u.len(),
            cx.bank.n_u
        )));
    }
    if !InputSchedule::constant(u.to_vec()).within_box(&cx.bank.input_box) {
        return Err(AfdError::InvalidArgument(format!(
            "candidate {u:?} outside the input box"
        )));
    }
    let n = cx.states[0].len();
    if n < 100 {
        return Err(AfdError::InvalidArgument(format!(
            "need at least 100 Monte Carlo samples, got {n}"
        )));
    }
    if cx.bank.model_count() < 2 {
        return Err(AfdError::InvalidArgument(
            "separation objective is undefined with fewer than 2 models".into(),
        ));
    }

    let prop = match propagate_candidate(cx, u) {
        Ok(p) => p,
        Err(e) => {
            return Ok(CandidateOutcome {
                input: u.to_vec(),
                area: f64::INFINITY,
                feasible: false,
                failure: Some(e.to_string()),
                pdfs: vec![],
                rois: vec![],
                solution: None,
                terminal_states: vec![],
            })
        }
    };

    let allowed_clamps = match cx.clamp_quantile {
        None => 0,
        Some(q) => ((cx.bank.model_count() * n) as f64 * q).floor() as usize,
    };
    let state_feasible = prop.clamped_samples <= allowed_clamps;

    let fit_all = || -> Result<(f64, Vec<MomentPdf>, Vec<RoiBox>, WorstCaseSolution)> {
        let mut pdfs = Vec::with_capacity(cx.bank.model_count());
        let mut rois = Vec::with_capacity(cx.bank.model_count());
        for (m, outputs) in prop.outputs.iter().enumerate() {
            let ens = OutputEnsemble::new(m, cx.t1, outputs.clone())?;
            let fit = fit_normal_ml(&ens)?;
            let pdf = MomentPdf::clamped(cx.family, fit.mu, fit.sigma)?;
            let roi = build_roi(&pdf, cx.radii[m], cx.bank.output_box)?.for_model(m);
            pdfs.push(pdf);
            rois.push(roi);
        }
        let (area, solution) = worst_case_common_area(&rois, cx.family, cx.inner)?;
        Ok((area, pdfs, rois, solution))
    };

    match fit_all() {
        Ok((area, pdfs, rois, solution)) => Ok(CandidateOutcome {
            input: u.to_vec(),
            area,
            feasible: state_feasible,
            failure: (!state_feasible)
                .then(|| format!("{} samples hit the state clamp", prop.clamped_samples)),
            pdfs,
            rois,
            solution: Some(solution),
            terminal_states: prop.terminal_states,
        }),
        Err(e) => Ok(CandidateOutcome {
            input: u.to_vec(),
            area: f64::INFINITY,
            feasible: false,
            failure: Some(e.to_string()),
            pdfs: vec![],
            rois: vec![],
            solution: None,
            terminal_states: prop.terminal_states,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidatePhase {
    Grid,
    Refine,
}

/// Ledger line for one evaluated candidate.
#[derive(Debug, Clone)]
pub struct CandidateEval {
    pub input: Vec<f64>,
    pub area: f64,
    pub feasible: bool,
    pub phase: CandidatePhase,
}

/// Everything recorded about one designed interval.
#[derive(Debug, Clone)]
pub struct IntervalRecord {
    pub index: usize,
    pub t0: f64,
    pub t1: f64,
    pub candidates: Vec<CandidateEval>,
    pub chosen_input: Vec<f64>,
    pub objective: f64,
    pub nominal_pdfs: Vec<MomentPdf>,
    pub rois: Vec<RoiBox>,
    pub worst_case: WorstCaseSolution,
    /// Mean handed-off state per model, a compact summary of the ensembles.
    pub mean_terminal_state: Vec<Vec<f64>>,
}

/// Designs one interval: coarse grid screen, then bounded Nelder-Mead from
/// the best feasible grid point, all under the frozen draws. Returns the
/// chosen input's full evaluation alongside the record.
pub fn design_interval(
    cx: &IntervalContext<'_>,
    index: usize,
    grid_points: usize,
    nm: &NmOptions,
) -> Result<(CandidateOutcome, IntervalRecord)> {
    if cx.bank.model_count() < 2 {
        return Err(AfdError::InvalidArgument(
            "separation objective is undefined with fewer than 2 models".into(),
        ));
    }
    if grid_points < 2 {
        return Err(AfdError::InvalidArgument(
            "grid needs at least 2 points per dim".into(),
        ));
    }

    let mut cache: HashMap<Vec<u64>, (f64, bool)> = HashMap::new();
    let mut ledger: Vec<CandidateEval> = Vec::new();

    let mut eval = |u: &[f64],
                    phase: CandidatePhase,
                    ledger: &mut Vec<CandidateEval>|
     -> Result<(f64, bool)> {
        let key: Vec<u64> = u.iter().map(|v| v.to_bits()).collect();
        if let Some(&hit) = cache.get(&key) {
            return Ok(hit);
        }
        let out = evaluate_candidate(cx, u)?;
        let score = if out.feasible {
            out.area
        } else {
            f64::INFINITY
        };
        cache.insert(key, (score, out.feasible));
        ledger.push(CandidateEval {
            input: u.to_vec(),
            area: out.area,
            feasible: out.feasible,
            phase,
        });
        Ok((score, out.feasible))
    };

    // Coarse grid over the input box.
    let axes: Vec<Vec<f64>> = cx
        .bank
        .input_box
        .iter()
        .map(|&(lo, hi)| {
            (0..grid_points)
                .map(|i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64)
                .collect()
        })
        .collect();
    let mut best_u: Option<Vec<f64>> = None;
    let mut best_score = f64::INFINITY;
    let mut idx = vec![0usize; axes.len()];
    loop {
        let u: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
        let (score, feasible) = eval(&u, CandidatePhase::Grid, &mut ledger)?;
        if feasible && score < best_score {
            best_score = score;
            best_u = Some(u);
        }
        let mut d = 0;
        while d < axes.len() {
            idx[d] += 1;
            if idx[d] < grid_points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == axes.len() {
            break;
        }
    }

    let Some(grid_best) = best_u else {
        return Err(AfdError::DesignInfeasible {
            t0: cx.t0,
            t1: cx.t1,
        });
    };

    // Nelder-Mead polish from the best grid point, projected into the box.
    let mut chosen = grid_best.clone();
    {
        let mut objective = |u: &[f64]| -> Result<f64> {
            let (score, _) = eval(u, CandidatePhase::Refine, &mut ledger)?;
            Ok(score)
        };
        let (xn, fx) = nelder_mead_box(
            &mut objective,
            &grid_best,
            best_score,
            &cx.bank.input_box,
            nm,
        )?;
        if fx < best_score {
            chosen = xn;
        }
    }

    let outcome = evaluate_candidate(cx, &chosen)?;
    debug_assert!(outcome.feasible);
    let mean_terminal: Vec<Vec<f64>> = outcome
        .terminal_states
        .iter()
        .map(|per_model| {
            let n = per_model.len().max(1);
            let mut mean = vec![0.0; cx.bank.n_x];
            for s in per_model {
                for (acc, v) in mean.iter_mut().zip(s) {
                    *acc += v / n as f64;
                }
            }
            mean
        })
        .collect();

    let record = IntervalRecord {
        index,
        t0: cx.t0,
        t1: cx.t1,
        candidates: ledger,
        chosen_input: chosen,
        objective: outcome.area,
        nominal_pdfs: outcome.pdfs.clone(),
        rois: outcome.rois.clone(),
        worst_case: outcome
            .solution
            .clone()
            .expect("feasible chosen candidate has a solution"),
        mean_terminal_state: mean_terminal,
    };
    Ok((outcome, record))
}

/// Why a procedure run stopped early.
#[derive(Debug, Clone)]
pub struct DesignFailure {
    pub interval_index: usize,
    pub t0: f64,
    pub t1: f64,
    pub reason: String,
}

/// Full run ledger: one record per designed interval, plus the failure
/// marker when an interval had no feasible candidate.
#[derive(Debug, Clone)]
pub struct DesignRecord {
    pub intervals: Vec<IntervalRecord>,
    pub failure: Option<DesignFailure>,
}

/// Frozen per-run draws.
pub struct RunDraws {
    /// `[model][sample][theta]`
    pub params: Vec<Vec<Vec<f64>>>,
    /// `[model][sample][coord]`
    pub init_states: Vec<Vec<Vec<f64>>>,
}

/// Draws parameters and initial states for every (model, sample) from the
/// run's counter streams.
pub fn draw_run(bank: &ModelBank, streams: &Streams, n: usize) -> RunDraws {
    let params = bank
        .models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            parallel::map_indexed(n, |s| {
                sample_parameters(
                    model,
                    &mut streams.stream(StreamKind::Parameters, m, 0, s as u64),
                )
            })
        })
        .collect();
    let init_states = bank
        .models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            parallel::map_indexed(n, |s| {
                sample_init_state(
                    model,
                    &mut streams.stream(StreamKind::InitState, m, 0, s as u64),
                )
            })
        })
        .collect();
    RunDraws {
        params,
        init_states,
    }
}

/// Draws the interval's measurement noise for every (model, sample), scaled
/// to the bank's noise std.
pub fn draw_interval_noise(
    bank: &ModelBank,
    streams: &Streams,
    interval: usize,
    n: usize,
) -> Vec<Vec<f64>> {
    bank.models
        .iter()
        .enumerate()
        .map(|(m, _)| {
            parallel::map_indexed(n, |s| {
                let mut rng = streams.stream(StreamKind::Noise, m, interval as u64, s as u64);
                let z: f64 = StandardNormal.sample(&mut rng);
                z * bank.noise_std
            })
        })
        .collect()
}

/// Runs the interval-by-interval design over the whole horizon.
///
/// Measurement times partition `[0, horizon]`; each interval is designed
/// with [`design_interval`] and the chosen input's terminal sample states
/// are handed to the next interval unchanged. On a design-infeasible
/// interval the partial schedule and ledger are returned with the failure
/// marker set.
pub fn run_procedure(
    bank: &ModelBank,
    measurement_times: &[f64],
    horizon: f64,
    opts: &DesignOptions,
) -> Result<(InputSchedule, DesignRecord)> {
    if measurement_times.is_empty() {
        return Err(AfdError::InvalidArgument(
            "need at least one measurement time".into(),
        ));
    }
    if measurement_times[0] <= 0.0
        || measurement_times.windows(2).any(|w| w[1] <= w[0])
        || *measurement_times.last().unwrap() > horizon + 1e-9
    {
        return Err(AfdError::InvalidArgument(
            "measurement times must be strictly increasing within (0, horizon]".into(),
        ));
    }
    if opts.radii.len() != bank.model_count() {
        return Err(AfdError::InvalidArgument(format!(
            "need one TV radius per model: got {}, bank has {}",
            opts.radii.len(),
            bank.model_count()
        )));
    }
    let n = opts.mc_count;
    let streams = Streams::new(opts.seed);
    let draws = draw_run(bank, &streams, n);
    let mut states = draws.init_states.clone();

    let mut breakpoints = Vec::with_capacity(measurement_times.len());
    let mut values = Vec::with_capacity(measurement_times.len());
    let mut intervals = Vec::with_capacity(measurement_times.len());
    let mut failure = None;

    let mut t0 = 0.0;
    for (k, &t1) in measurement_times.iter().enumerate() {
        let noise = draw_interval_noise(bank, &streams, k, n);
        let cx = IntervalContext {
            bank,
            t0,
            t1,
            dt: opts.dt,
            states: &states,
            params: &draws.params,
            noise: &noise,
            radii: &opts.radii,
            family: opts.family,
            inner: &opts.inner,
            clamp_quantile: opts.clamp_quantile,
        };
        match design_interval(&cx, k, opts.grid_points, &opts.nm) {
            Ok((outcome, record)) => {
                breakpoints.push(t0);
                values.push(record.chosen_input.clone());
                intervals.push(record);
                states = outcome.terminal_states;
                t0 = t1;
            }
            Err(AfdError::DesignInfeasible { t0: a, t1: b }) => {
                failure = Some(DesignFailure {
                    interval_index: k,
                    t0: a,
                    t1: b,
                    reason: "no feasible candidate".into(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }

    if breakpoints.is_empty() {
        return Err(AfdError::DesignInfeasible {
            t0: 0.0,
            t1: measurement_times[0],
        });
    }
    let schedule = InputSchedule::new(breakpoints, values)?;
    Ok((schedule, DesignRecord { intervals, failure }))
}

/// Bounded Nelder-Mead minimization. Points are projected into the box
/// before evaluation; the incumbent can only improve on `f0` at `x0`.
fn nelder_mead_box(
    f: &mut impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    f0: f64,
    box_: &[(f64, f64)],
    opts: &NmOptions,
) -> Result<(Vec<f64>, f64)> {
    let dim = x0.len();
    let project = |x: &mut Vec<f64>| {
        for (v, &(lo, hi)) in x.iter_mut().zip(box_) {
            *v = v.clamp(lo, hi);
        }
    };

    let mut evals = 0usize;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f0));
    for d in 0..dim {
        let (lo, hi) = box_[d];
        let step = 0.15 * (hi - lo);
        let mut p = x0.to_vec();
        p[d] += if p[d] + step <= hi { step } else { -step };
        project(&mut p);
        let fp = f(&p)?;
        evals += 1;
        simplex.push((p, fp));
    }

    let span: f64 = box_.iter().map(|&(lo, hi)| hi - lo).fold(0.0f64, f64::max);

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let width: f64 = simplex
            .iter()
            .skip(1)
            .map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if (worst.is_finite() && (worst - best).abs() <= opts.f_tol) || width <= opts.x_tol * span {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (p, _) in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let blend = |a: f64, pt: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(pt)
                .map(|(c, w)| c + a * (c - w))
                .collect();
            project(&mut x);
            x
        };

        let xr = blend(1.0, &simplex[dim].0);
        let fr = f(&xr)?;
        evals += 1;
        if fr < simplex[0].1 {
            let xe = blend(2.0, &simplex[dim].0);
            let fe = f(&xe)?;
            evals += 1;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let xc = blend(-0.5, &simplex[dim].0);
        let fc = f(&xc)?;
        evals += 1;
        if fc < simplex[dim].1 {
            simplex[dim] = (xc, fc);
            continue;
        }
        // Shrink toward the incumbent.
        let best_point = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let mut p: Vec<f64> = entry
                .0
                .iter()
                .zip(&best_point)
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            project(&mut p);
            let fp = f(&p)?;
            evals += 1;
            *entry = (p, fp);
            if evals >= opts.max_evals {
                break;
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok((simplex[0].0.clone(), simplex[0].1))
}
