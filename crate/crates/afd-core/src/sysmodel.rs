//! Nonlinear model banks and deterministic fixed-step trajectory integration.
//!
//! A bank holds one faultless model at index 0 plus one model per fault
//! scenario, all sharing state/input/output dimensions. Trajectories are
//! produced by classic fixed-step RK4 with post-step clamping to the state
//! box; integration is a pure function of its arguments, so ensembles can be
//! propagated concurrently without coordination.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{AfdError, Result};
use crate::schedule::InputSchedule;

pub mod three_tank;

/// State derivative map: `(state, input, theta, out_derivative)`.
pub type DynamicsFn = Arc<dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Scalar measurement map: `(state, input, theta, noise) -> output`.
pub type OutputFn = Arc<dyn Fn(&[f64], &[f64], &[f64], f64) -> f64 + Send + Sync>;

/// Distribution of one uncertain scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDist {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Normal { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
    Point { value: f64 },
}

impl ParamDist {
    pub fn normal(name: &str, mean: f64, variance: f64) -> Result<Self> {
        if variance <= 0.0 || !variance.is_finite() {
            return Err(AfdError::InvalidArgument(format!(
                "parameter {name}: normal variance must be positive, got {variance}"
            )));
        }
        Ok(ParamDist {
            name: name.into(),
            kind: ParamKind::Normal { mean, variance },
        })
    }

    pub fn uniform(name: &str, lo: f64, hi: f64) -> Result<Self> {
        if lo >= hi {
            return Err(AfdError::InvalidArgument(format!(
                "parameter {name}: uniform needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ParamDist {
            name: name.into(),
            kind: ParamKind::Uniform { lo, hi },
        })
    }

    pub fn point(name: &str, value: f64) -> Self {
        ParamDist {
            name: name.into(),
            kind: ParamKind::Point { value },
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.kind {
            ParamKind::Normal { mean, variance } => Normal::new(mean, variance.sqrt())
                .expect("validated on construction")
                .sample(rng),
            ParamKind::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            ParamKind::Point { value } => value,
        }
    }
}

/// Initial condition: either a fixed vector or per-state uniform intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum InitState {
    Fixed(Vec<f64>),
    Uniform(Vec<(f64, f64)>),
}

impl InitState {
    pub fn dim(&self) -> usize {
        match self {
            InitState::Fixed(v) => v.len(),
            InitState::Uniform(v) => v.len(),
        }
    }
}

/// One model of the bank: dynamics, scalar measurement map, parameter
/// distributions and initial condition.
#[derive(Clone)]
pub struct NonlinearModel {
    pub name: String,
    pub dynamics: DynamicsFn,
    pub output: OutputFn,
    pub param_dists: Vec<ParamDist>,
    pub init_state: InitState,
}

impl std::fmt::Debug for NonlinearModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearModel")
            .field("name", &self.name)
            .field("param_dists", &self.param_dists)
            .field("init_state", &self.init_state)
            .finish()
    }
}

/// Indexed set of models sharing dimensions; index 0 is the faultless model.
#[derive(Debug, Clone)]
pub struct ModelBank {
    pub models: Vec<NonlinearModel>,
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub state_box: Vec<(f64, f64)>,
    pub input_box: Vec<(f64, f64)>,
    /// Interval of the measured output channel, used for ambiguity boxes.
    pub output_box: (f64, f64),
    /// Standard deviation of the additive measurement noise.
    pub noise_std: f64,
}

impl ModelBank {
    pub fn new(
        models: Vec<NonlinearModel>,
        state_box: Vec<(f64, f64)>,
        input_box: Vec<(f64, f64)>,
        output_box: (f64, f64),
        noise_std: f64,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(AfdError::InvalidArgument(
                "bank needs at least one model".into(),
            ));
        }
        let n_x = state_box.len();
        let n_u = input_box.len();
        if n_x == 0 || n_u == 0 {
            return Err(AfdError::InvalidArgument(
                "state and input boxes must be nonempty".into(),
            ));
        }
        if state_box.iter().chain(&input_box).any(|(lo, hi)| lo > hi) {
            return Err(AfdError::InvalidArgument(
                "box intervals must satisfy lo <= hi".into(),
            ));
        }
        for m in &models {
            if m.init_state.dim() != n_x {
                return Err(AfdError::InvalidArgument(format!(
                    "model {}: init state dimension {} != n_x {}",
                    m.name,
                    m.init_state.dim(),
                    n_x
                )));
            }
        }
        if noise_std < 0.0 || !noise_std.is_finite() {
            return Err(AfdError::InvalidArgument(format!(
                "noise std must be nonnegative, got {noise_std}"
            )));
        }
        Ok(ModelBank {
            models,
            n_x,
            n_u,
            n_y: 1,
            state_box,
            input_box,
            output_box,
            noise_std,
        })
    }

    /// Number of fault scenarios (models beyond the faultless one).
    pub fn fault_count(&self) -> usize {
        self.models.len() - 1
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }
}

/// A measurement request: take the output at `time` with additive `noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub time: f64,
    pub noise: f64,
}

/// A fixed-step trajectory with outputs at the requested measurement times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `(time, output)` pairs, one per requested measurement.
    pub outputs: Vec<(f64, f64)>,
    /// True iff any post-step projection moved the state onto the box.
    pub clamped: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Draws one parameter vector for `model` from `rng`, one independent draw
/// per distribution in declaration order.
pub fn sample_parameters<R: Rng>(model: &NonlinearModel, rng: &mut R) -> Vec<f64> {
    model.param_dists.iter().map(|d| d.sample(rng)).collect()
}

/// Draws an initial state for `model`.
pub fn sample_init_state<R: Rng>(model: &NonlinearModel, rng: &mut R) -> Vec<f64> {
    match &model.init_state {
        InitState::Fixed(x0) => x0.clone(),
        InitState::Uniform(ranges) => ranges
            .iter()
            .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
            .collect(),
    }
}

fn clamp_to_box(state: &mut [f64], state_box: &[(f64, f64)]) -> bool {
    let mut moved = false;
    for (x, (lo, hi)) in state.iter_mut().zip(state_box) {
        if *x < *lo {
            *x = *lo;
            moved = true;
        } else if *x > *hi {
            *x = *hi;
            moved = true;
        }
    }
    moved
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let span = t1 - t0;
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-6 * dt {
        return Err(AfdError::MisalignedSpan { t0, t1, dt });
    }
    Ok(n as usize)
}

/// RK4 stepping of one schedule piece with constant input. `on_step` sees
/// every post-clamp state together with its time.
#[allow(clippy::too_many_arguments)]
fn rk4_piece<F: FnMut(f64, &[f64])>(
    model: &NonlinearModel,
    theta: &[f64],
    state: &mut [f64],
    u: &[f64],
    t0: f64,
    n_steps: usize,
    dt: f64,
    state_box: &[(f64, f64)],
    clamped: &mut bool,
    bufs: &mut StepBufs,
    mut on_step: F,
) -> Result<()> {
    let n_x = state.len();
    for step in 0..n_steps {
        let t = t0 + step as f64 * dt;
        let StepBufs {
            k1,
            k2,
            k3,
            k4,
            tmp,
        } = bufs;
        (model.dynamics)(state, u, theta, k1);
        for i in 0..n_x {
            tmp[i] = state[i] + 0.5 * dt * k1[i];
        }
        (model.dynamics)(tmp, u, theta, k2);
        for i in 0..n_x {
            tmp[i] = state[i] + 0.5 * dt * k2[i];
        }
        (model.dynamics)(tmp, u, theta, k3);
        for i in 0..n_x {
            tmp[i] = state[i] + dt * k3[i];
        }
        (model.dynamics)(tmp, u, theta, k4);
        for i in 0..n_x {
            let incr = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !incr.is_finite() {
                return Err(AfdError::IntegrationDiverged {
                    time: t,
                    state: state.to_vec(),
                });
            }
            state[i] += incr;
        }
        if clamp_to_box(state, state_box) {
            *clamped = true;
        }
        on_step(t + dt, state);
    }
    Ok(())
}

struct StepBufs {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl StepBufs {
    fn new(n_x: usize) -> Self {
        StepBufs {
            k1: vec![0.0; n_x],
            k2: vec![0.0; n_x],
            k3: vec![0.0; n_x],
            k4: vec![0.0; n_x],
            tmp: vec![0.0; n_x],
        }
    }
}

/// Integrates `model` under the piecewise-constant schedule `u` over
/// `t_span` with fixed step `dt`, recording the full state grid and taking
/// the requested measurements.
///
/// The span is split at schedule breakpoints and each piece is integrated
/// with that piece's constant input, so every RK4 stage of a segment sees
/// the segment's own value. Spans and measurement times must align with the
/// step grid. Measurements at a segment boundary use the ending segment's
/// input (the one that produced the state).
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    model: &NonlinearModel,
    theta: &[f64],
    x0: &[f64],
    u: &InputSchedule,
    t_span: (f64, f64),
    dt: f64,
    state_box: &[(f64, f64)],
    measurements: &[Measurement],
) -> Result<Trajectory> {
    let (start, end) = t_span;
    if dt.is_nan() || dt <= 0.0 {
        return Err(AfdError::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if end <= start {
        return Err(AfdError::InvalidArgument(format!(
            "t_span must be increasing, got [{start}, {end}]"
        )));
    }
    if x0.len() != state_box.len() {
        return Err(AfdError::InvalidArgument(format!(
            "x0 has dimension {}, state box has {}",
            x0.len(),
            state_box.len()
        )));
    }
    for (i, (x, (lo, hi))) in x0.iter().zip(state_box).enumerate() {
        if *x < lo - 1e-9 || *x > hi + 1e-9 {
            return Err(AfdError::InvalidArgument(format!(
                "x0[{i}] = {x} outside the state box [{lo}, {hi}]"
            )));
        }
    }
    let mut sorted_meas = measurements.to_vec();
    sorted_meas.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));

    let mut state = x0.to_vec();
    clamp_to_box(&mut state, state_box);
    let mut clamped = false;
    let mut times = vec![start];
    let mut states = vec![state.clone()];
    let mut outputs = Vec::with_capacity(sorted_meas.len());
    let mut bufs = StepBufs::new(state.len());
    let mut next_meas = 0;

    // A measurement exactly at the span start is taken before stepping.
    take_due_measurements(
        model,
        &state,
        u,
        theta,
        start,
        &sorted_meas,
        &mut next_meas,
        &mut outputs,
        start,
    )?;

    for (p0, p1, u_piece) in u.pieces_in(start, end) {
        let n = step_count(p0, p1, dt)?;
        let u_owned = u_piece.to_vec();
        let model_ref = model;
        let meas_ref = &sorted_meas;
        let outputs_ref = &mut outputs;
        let next_ref = &mut next_meas;
        let times_ref = &mut times;
        let states_ref = &mut states;
        let mut step_err: Option<AfdError> = None;
        rk4_piece(
            model_ref,
            theta,
            &mut state,
            &u_owned,
            p0,
            n,
            dt,
            state_box,
            &mut clamped,
            &mut bufs,
            |t, s| {
                times_ref.push(t);
                states_ref.push(s.to_vec());
                if step_err.is_none() {
                    if let Err(e) = take_due_measurements(
                        model_ref,
                        s,
                        u,
                        theta,
                        t,
                        meas_ref,
                        next_ref,
                        outputs_ref,
                        p0,
                    ) {
                        step_err = Some(e);
                    }
                }
            },
        )?;
        if let Some(e) = step_err {
            return Err(e);
        }
    }

    if next_meas < sorted_meas.len() {
        return Err(AfdError::InvalidArgument(format!(
            "measurement time {} not on the integration grid of [{start}, {end}] with dt {dt}",
            sorted_meas[next_meas].time
        )));
    }

    Ok(Trajectory {
        times,
        states,
        outputs,
        clamped,
    })
}

#[allow(clippy::too_many_arguments)]
fn take_due_measurements(
    model: &NonlinearModel,
    state: &[f64],
    u: &InputSchedule,
    theta: &[f64],
    t: f64,
    meas: &[Measurement],
    next: &mut usize,
    outputs: &mut Vec<(f64, f64)>,
    piece_start: f64,
) -> Result<()> {
    while *next < meas.len() && (meas[*next].time - t).abs() <= 1e-9 {
        // Left-limit input: at a boundary, measure under the segment that
        // produced the state.
        let u_at = u.value_at(if t > piece_start { piece_start } else { t });
        let y = (model.output)(state, u_at, theta, meas[*next].noise);
        if !y.is_finite() {
            return Err(AfdError::IntegrationDiverged {
                time: t,
                state: state.to_vec(),
            });
        }
        outputs.push((meas[*next].time, y));
        *next += 1;
    }
    if *next < meas.len() && meas[*next].time < t - 1e-9 {
        return Err(AfdError::InvalidArgument(format!(
            "measurement time {} not on the integration grid",
            meas[*next].time
        )));
    }
    Ok(())
}

/// Outcome of a storage-free propagation: terminal state, terminal output,
/// and whether the trajectory ever hit the clamp.
#[derive(Debug, Clone)]
pub struct LeanOutcome {
    pub state: Vec<f64>,
    pub output: f64,
    pub clamped: bool,
}

/// Propagates without recording the grid; used by the Monte Carlo ensembles
/// where only the handoff state and the terminal measurement matter.
/// Arithmetic is identical to [`integrate`].
#[allow(clippy::too_many_arguments)]
pub fn integrate_terminal(
    model: &NonlinearModel,
    theta: &[f64],
    x0: &[f64],
    u: &InputSchedule,
    t_span: (f64, f64),
    dt: f64,
    state_box: &[(f64, f64)],
    terminal_noise: f64,
) -> Result<LeanOutcome> {
    let (start, end) = t_span;
    if dt.is_nan() || dt <= 0.0 || end <= start {
        return Err(AfdError::InvalidArgument(format!(
            "bad span [{start}, {end}] or dt {dt}"
        )));
    }
    let mut state = x0.to_vec();
    clamp_to_box(&mut state, state_box);
    let mut clamped = false;
    let mut bufs = StepBufs::new(state.len());
    let mut last_u = u.value_at(start).to_vec();
    for (p0, p1, u_piece) in u.pieces_in(start, end) {
        let n = step_count(p0, p1, dt)?;
        last_u.clear();
        last_u.extend_from_slice(u_piece);
        rk4_piece(
            model,
            theta,
            &mut state,
            u_piece,
            p0,
            n,
            dt,
            state_box,
            &mut clamped,
            &mut bufs,
            |_, _| {},
        )?;
    }
    let output = (model.output)(&state, &last_u, theta, terminal_noise);
    if !output.is_finite() {
        return Err(AfdError::IntegrationDiverged {
            time: end,
            state: state.clone(),
        });
    }
    Ok(LeanOutcome {
        state,
        output,
        clamped,
    })
}
