//! Worst-case common-area evaluation over ambiguity boxes.
//!
//! The common area between normal densities is bounded above in closed form
//! by moments alone; the inner adversary maximizes that bound over the box
//! product. Whenever every model's mean interval shares a common point the
//! maximizer is the analytic merged-means ridge; otherwise a multi-start
//! projected gradient ascent finds the maximizer and a coordinatewise KKT
//! residual certifies it. Ties on flat ridges are resolved toward the
//! nominal moments so the reported worst case is a deterministic function
//! of the boxes.

use crate::ambiguity::RoiBox;
use crate::distfit::{common_area, MomentPdf, PdfFamily};
use crate::error::{AfdError, Result};
use crate::rng::{StreamKind, Streams};
use rand::Rng;

/// Hard lower guard on the adversary's std, keeping the bound away from its
/// all-zero singularity.
pub const SIGMA_GUARD: f64 = 1e-9;

/// Single-pair bound: `1/2 + (2 mu_i mu_j + s_i^2 + s_j^2) / (2 (mu_i^2 +
/// mu_j^2 + s_i^2 + s_j^2))`, equivalently `1 - (mu_i - mu_j)^2 / (2 (...))`.
pub fn pair_bound(mu_i: f64, sigma_i: f64, mu_j: f64, sigma_j: f64) -> Result<f64> {
    let denom = mu_i * mu_i + mu_j * mu_j + sigma_i * sigma_i + sigma_j * sigma_j;
    if denom == 0.0 {
        return Err(AfdError::UndefinedBound);
    }
    let gap = mu_i - mu_j;
    Ok(1.0 - gap * gap / (2.0 * denom))
}

/// Sum of [`pair_bound`] over unordered model pairs.
pub fn total_bound(moments: &[(f64, f64)]) -> Result<f64> {
    if moments.len() < 2 {
        return Err(AfdError::InvalidArgument(format!(
            "bound needs at least 2 models, got {}",
            moments.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..moments.len() {
        for j in (i + 1)..moments.len() {
            total += pair_bound(moments[i].0, moments[i].1, moments[j].0, moments[j].1)?;
        }
    }
    Ok(total)
}

/// Analytic gradient of [`total_bound`]: per model `(d/d mu_j, d/d sigma_j)`.
pub fn bound_gradient(moments: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = moments.len();
    let mut grad = vec![(0.0, 0.0); n];
    for j in 0..n {
        let (mu_j, s_j) = moments[j];
        let mut d_mu = 0.0;
        let mut d_sigma = 0.0;
        for (i, &(mu_i, s_i)) in moments.iter().enumerate() {
            if i == j {
                continue;
            }
            let denom = mu_i * mu_i + mu_j * mu_j + s_i * s_i + s_j * s_j;
            if denom == 0.0 {
                continue;
            }
            let d2 = denom * denom;
            d_mu += (mu_i - mu_j) * (mu_i * mu_i + mu_i * mu_j + s_i * s_i + s_j * s_j) / d2;
            d_sigma += s_j * (mu_j - mu_i) * (mu_j - mu_i) / d2;
        }
        grad[j] = (d_mu, d_sigma);
    }
    grad
}

/// Nonnegative multipliers of the four interval constraints of one model.
#[derive(Debug, Clone, Copy, Default)]
pub struct KktMultipliers {
    /// Multiplier of the upper mean bound `mu <= beta`.
    pub lambda_mu: f64,
    /// Multiplier of the lower mean bound `mu >= alpha`.
    pub s_mu: f64,
    /// Multiplier of the upper std bound `sigma <= delta`.
    pub lambda_sigma: f64,
    /// Multiplier of the lower std bound `sigma >= gamma`.
    pub s_sigma: f64,
}

/// The inner maximizer: adversarial moments, recovered multipliers, bound
/// value and the KKT residual that certifies stationarity.
#[derive(Debug, Clone)]
pub struct WorstCaseSolution {
    pub moments: Vec<(f64, f64)>,
    pub multipliers: Vec<KktMultipliers>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct InnerOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Random interior restarts beyond the midpoint and nominal starts.
    pub restarts: usize,
    pub restart_seed: u64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            max_iters: 4000,
            tol: 1e-6,
            restarts: 8,
            restart_seed: 0x5eed,
        }
    }
}

struct BoxBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nominal: Vec<f64>,
}

fn box_bounds(boxes: &[RoiBox]) -> Result<BoxBounds> {
    let n = boxes.len();
    let mut lo = Vec::with_capacity(2 * n);
    let mut hi = Vec::with_capacity(2 * n);
    let mut nominal = Vec::with_capacity(2 * n);
    for b in boxes {
        let (alpha, beta) = b.mu_interval;
        let (gamma, delta) = b.sigma_interval;
        if beta < alpha || delta < gamma {
            return Err(AfdError::InvalidArgument(format!(
                "model {}: empty ambiguity intervals",
                b.model_index
            )));
        }
        let g = gamma.max(SIGMA_GUARD);
        lo.push(alpha);
        hi.push(beta);
        lo.push(g);
        hi.push(delta.max(g));
        nominal.push(b.nominal.mu);
        nominal.push(b.nominal.sigma.max(SIGMA_GUARD));
    }
    Ok(BoxBounds { lo, hi, nominal })
}

fn project(x: &mut [f64], b: &BoxBounds) {
    for (i, v) in x.iter_mut().enumerate() {
        *v = v.clamp(b.lo[i], b.hi[i]);
    }
}

fn as_moments(x: &[f64]) -> Vec<(f64, f64)> {
    x.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn flat_gradient(x: &[f64]) -> Vec<f64> {
    let g = bound_gradient(&as_moments(x));
    let mut out = Vec::with_capacity(x.len());
    for (gm, gs) in g {
        out.push(gm);
        out.push(gs);
    }
    out
}

/// Coordinatewise stationarity/complementarity residual for maximization on
/// a box: interior coordinates need a vanishing gradient, active bounds need
/// the gradient to push outward.
fn kkt_residual(x: &[f64], g: &[f64], b: &BoxBounds) -> f64 {
    let mut res = 0.0f64;
    for i in 0..x.len() {
        if b.hi[i] == b.lo[i] {
            continue;
        }
        let r = if x[i] == b.lo[i] {
            g[i].max(0.0)
        } else if x[i] == b.hi[i] {
            (-g[i]).max(0.0)
        } else {
            g[i].abs()
        };
        res = res.max(r);
    }
    res
}

fn recover_multipliers(x: &[f64], g: &[f64], b: &BoxBounds) -> Vec<KktMultipliers> {
    x.chunks_exact(2)
        .zip(g.chunks_exact(2))
        .enumerate()
        .map(|(j, (xm, gm))| {
            let (i_mu, i_s) = (2 * j, 2 * j + 1);
            let at_hi = |i: usize, v: f64| v == b.hi[i];
            let at_lo = |i: usize, v: f64| v == b.lo[i];
            KktMultipliers {
                lambda_mu: if at_hi(i_mu, xm[0]) {
                    gm[0].max(0.0)
                } else {
                    0.0
                },
                s_mu: if at_lo(i_mu, xm[0]) && !at_hi(i_mu, xm[0]) {
                    (-gm[0]).max(0.0)
                } else {
                    0.0
                },
                lambda_sigma: if at_hi(i_s, xm[1]) {
                    gm[1].max(0.0)
                } else {
                    0.0
                },
                s_sigma: if at_lo(i_s, xm[1]) && !at_hi(i_s, xm[1]) {
                    (-gm[1]).max(0.0)
                } else {
                    0.0
                },
            }
        })
        .collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Projected gradient ascent with Armijo backtracking and step growth.
/// Returns the final iterate and whether the residual met the tolerance.
fn ascend(mut x: Vec<f64>, b: &BoxBounds, opts: &InnerOptions) -> (Vec<f64>, bool) {
    project(&mut x, b);
    let mut step = 1.0f64;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let g = flat_gradient(&x);
        if kkt_residual(&x, &g, b) <= opts.tol {
            converged = true;
            break;
        }
        let f0 = total_bound(&as_moments(&x)).unwrap_or(f64::NEG_INFINITY);
        let mut t = (step * 4.0).min(1e12);
        let mut accepted = false;
        for _ in 0..80 {
            let mut xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + t * gi).collect();
            project(&mut xn, b);
            let dir: f64 = xn
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((n, o), gi)| (n - o) * gi)
                .sum();
            if dir <= 0.0 {
                // Projection removed all ascent; the point is blocked.
                break;
            }
            let fn_ = total_bound(&as_moments(&xn)).unwrap_or(f64::NEG_INFINITY);
            if fn_ >= f0 + 1e-4 * dir {
                x = xn;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let g2 = flat_gradient(&x);
            converged = kkt_residual(&x, &g2, b) <= opts.tol;
            break;
        }
    }
    (x, converged)
}

/// Maximizes [`total_bound`] over the product of ambiguity boxes.
///
/// If every mean interval shares a common point the maximum is exactly one
/// per pair, attained on the merged-means ridge; the returned point is the
/// ridge point closest to the nominal moments. Otherwise projected gradient
/// ascent runs from the box midpoint, the nominal moments and
/// `opts.restarts` seeded interior points, keeping the best converged
/// iterate (ties resolved toward the nominals). A solution is `certified`
/// when its KKT residual is within `opts.tol`; otherwise the best iterate is
/// returned flagged non-certified.
pub fn solve_inner(boxes: &[RoiBox], opts: &InnerOptions) -> Result<WorstCaseSolution> {
    if boxes.len() < 2 {
        return Err(AfdError::InvalidArgument(format!(
            "inner problem needs at least 2 models, got {}",
            boxes.len()
        )));
    }
    let bounds = box_bounds(boxes)?;

    // Merged-means ridge: all pair gaps can vanish, the bound hits one per
    // pair, and sigma is free. Pick the ridge point nearest the nominals.
    let common_lo = boxes
        .iter()
        .map(|b| b.mu_interval.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let common_hi = boxes
        .iter()
        .map(|b| b.mu_interval.1)
        .fold(f64::INFINITY, f64::min);
    if common_lo <= common_hi {
        let mean_of_nominals = boxes.iter().map(|b| b.nominal.mu).sum::<f64>() / boxes.len() as f64;
        let mu_star = mean_of_nominals.clamp(common_lo, common_hi);
        let mut x = Vec::with_capacity(2 * boxes.len());
        for (j, _b) in boxes.iter().enumerate() {
            x.push(mu_star);
            x.push(bounds.nominal[2 * j + 1].clamp(bounds.lo[2 * j + 1], bounds.hi[2 * j + 1]));
        }
        project(&mut x, &bounds);
        let moments = as_moments(&x);
        let objective = total_bound(&moments)?;
        let g = flat_gradient(&x);
        let residual = kkt_residual(&x, &g, &bounds);
        let multipliers = recover_multipliers(&x, &g, &bounds);
        return Ok(WorstCaseSolution {
            moments,
            multipliers,
            objective,
            kkt_residual: residual,
            certified: residual <= opts.tol,
        });
    }

    // Generic case: multi-start projected gradient ascent.
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(2 + opts.restarts);
    starts.push(
        bounds
            .lo
            .iter()
            .zip(&bounds.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect(),
    );
    starts.push(bounds.nominal.clone());
    let streams = Streams::new(opts.restart_seed);
    for k in 0..opts.restarts {
        let mut rng = streams.stream(StreamKind::Scratch, 0, 0, k as u64);
        starts.push(
            bounds
                .lo
                .iter()
                .zip(&bounds.hi)
                .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                .collect(),
        );
    }

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in starts {
        let (x, converged) = ascend(start, &bounds, opts);
        let f = total_bound(&as_moments(&x))?;
        let better = match &best {
            None => true,
            Some((bx, bf, _)) => {
                f > *bf + 1e-12
                    || ((f - *bf).abs() <= 1e-9
                        && dist2(&x, &bounds.nominal) < dist2(bx, &bounds.nominal))
            }
        };
        if better {
            best = Some((x, f, converged));
        }
    }
    let (x, objective, _) = best.expect("at least one start");
    let g = flat_gradient(&x);
    let residual = kkt_residual(&x, &g, &bounds);
    let multipliers = recover_multipliers(&x, &g, &bounds);
    Ok(WorstCaseSolution {
        moments: as_moments(&x),
        multipliers,
        objective,
        kkt_residual: residual,
        certified: residual <= opts.tol,
    })
}

/// Solves the inner problem, then evaluates the exact TV common area of the
/// adversarial densities in the configured family.
pub fn worst_case_common_area(
    boxes: &[RoiBox],
    family: PdfFamily,
    opts: &InnerOptions,
) -> Result<(f64, WorstCaseSolution)> {
    let solution = solve_inner(boxes, opts)?;
    let pdfs: Vec<MomentPdf> = solution
        .moments
        .iter()
        .map(|&(mu, sigma)| MomentPdf::clamped(family, mu, sigma))
        .collect::<Result<_>>()?;
    let area = common_area(&pdfs)?;
    Ok((area, solution))
}
