//! Ambiguity boxes: per-model feasible (mean, std) intervals induced by a
//! TV radius around the fitted nominal density.
//!
//! The box form is a product of per-coordinate intervals. Each interval is
//! exact for its own coordinate: sliding the mean at nominal std (or the std
//! at nominal mean) to an interval endpoint keeps the TV from the nominal
//! within the radius. Joint corner moves can exceed the radius; corners are
//! tracked as a diagnostic flag rather than rejected, since the box is the
//! working feasible set of the inner maximization.

use crate::distfit::{tv_density, MomentPdf, PdfFamily};
use crate::error::{AfdError, Result};
use crate::special::norm_quantile;

/// Smallest std the ambiguity machinery will produce.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Feasible region of interest for one model: mean interval, std interval,
/// the radius that induced them, and the nominal they were built around.
#[derive(Debug, Clone)]
pub struct RoiBox {
    pub model_index: usize,
    pub mu_interval: (f64, f64),
    pub sigma_interval: (f64, f64),
    pub radius: f64,
    pub nominal: MomentPdf,
    /// True iff all four box corners also satisfy the TV constraint; a
    /// monitored diagnostic of the box-versus-ball geometry.
    pub corners_feasible: bool,
}

impl RoiBox {
    /// True iff `(mu, sigma)` lies in the closed box.
    pub fn contains(&self, mu: f64, sigma: f64) -> bool {
        mu >= self.mu_interval.0
            && mu <= self.mu_interval.1
            && sigma >= self.sigma_interval.0
            && sigma <= self.sigma_interval.1
    }

    pub fn for_model(mut self, model_index: usize) -> Self {
        self.model_index = model_index;
        self
    }

    /// True iff both intervals are single points (radius zero).
    pub fn is_degenerate(&self) -> bool {
        self.mu_interval.0 == self.mu_interval.1 && self.sigma_interval.0 == self.sigma_interval.1
    }
}

/// Builds the region of interest around `nominal` with TV radius `radius`,
/// restricted to the measured channel's `state_box` interval.
///
/// The mean interval is the largest symmetric shift at nominal std that
/// keeps the TV within the radius (closed form for normals, bisection
/// otherwise), intersected with the box. The std interval comes from
/// bisection on the monotone TV-versus-std maps on each side of the
/// nominal, capped above by the unimodal-density bound `(b - a) / 3`.
pub fn build_roi(nominal: &MomentPdf, radius: f64, state_box: (f64, f64)) -> Result<RoiBox> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(AfdError::InvalidArgument(format!(
            "TV radius must lie in [0, 1], got {radius}"
        )));
    }
    let (box_lo, box_hi) = state_box;
    if box_hi <= box_lo {
        return Err(AfdError::InvalidArgument(format!(
            "state box [{box_lo}, {box_hi}] must be increasing"
        )));
    }
    let (mu, sigma) = (nominal.mu, nominal.sigma);

    if radius == 0.0 {
        return Ok(RoiBox {
            model_index: 0,
            mu_interval: (mu, mu),
            sigma_interval: (sigma, sigma),
            radius,
            nominal: *nominal,
            corners_feasible: true,
        });
    }

    // Mean extents at nominal std. The normal TV is symmetric in the shift
    // direction and has a closed form; other families are bisected per
    // direction since their shape changes with the mean.
    let (down_width, up_width) = if nominal.family == PdfFamily::Normal {
        let w = if radius >= 1.0 {
            f64::INFINITY
        } else {
            2.0 * sigma * norm_quantile(0.5 * (1.0 + radius))
        };
        (w, w)
    } else {
        let reach = (box_hi - box_lo).max(sigma) * 4.0;
        let up = bisect_extent(radius, reach, |t| {
            shifted(nominal, mu + t, sigma).and_then(|p| tv_density(&p, nominal))
        })?;
        let down = bisect_extent(radius, reach, |t| {
            shifted(nominal, mu - t, sigma).and_then(|p| tv_density(&p, nominal))
        })?;
        (down, up)
    };
    let mut mu_lo = (mu - down_width).max(box_lo);
    let mut mu_hi = (mu + up_width).min(box_hi);
    // The box intersection must not evict the nominal itself.
    mu_lo = mu_lo.min(mu);
    mu_hi = mu_hi.max(mu);

    // Std extents at nominal mean. TV grows monotonically as the std moves
    // away from the nominal on either side.
    let sigma_cap = ((box_hi - box_lo) / 3.0).max(sigma);
    let sigma_hi = if radius >= 1.0 {
        sigma_cap
    } else {
        let up = bisect_extent(radius, sigma_cap - sigma, |t| {
            shifted(nominal, mu, sigma + t).and_then(|p| tv_density(&p, nominal))
        })?;
        (sigma + up).min(sigma_cap)
    };
    let sigma_lo = if radius >= 1.0 {
        SIGMA_FLOOR
    } else {
        let down = bisect_extent(radius, sigma - SIGMA_FLOOR, |t| {
            shifted(nominal, mu, sigma - t).and_then(|p| tv_density(&p, nominal))
        })?;
        (sigma - down).max(SIGMA_FLOOR)
    };

    let (sigma_lo, sigma_hi) = family_sigma_guard(nominal.family, mu, sigma_lo, sigma_hi, sigma);

    let corners_feasible = {
        let mut ok = true;
        for &cm in &[mu_lo, mu_hi] {
            for &cs in &[sigma_lo, sigma_hi] {
                if let Ok(p) = shifted(nominal, cm, cs) {
                    if let Ok(tv) = tv_density(&p, nominal) {
                        ok &= tv <= radius + 1e-6;
                        continue;
                    }
                }
                ok = false;
            }
        }
        ok
    };

    Ok(RoiBox {
        model_index: 0,
        mu_interval: (mu_lo, mu_hi),
        sigma_interval: (sigma_lo, sigma_hi),
        radius,
        nominal: *nominal,
        corners_feasible,
    })
}

/// Same family as the nominal with replaced moments; gamma/beta moments are
/// nudged into their feasible domain before construction.
fn shifted(nominal: &MomentPdf, mu: f64, sigma: f64) -> Result<MomentPdf> {
    MomentPdf::clamped(nominal.family, mu, sigma.max(SIGMA_FLOOR))
}

/// Extra interval guards for families whose moment domain is restricted.
fn family_sigma_guard(
    family: PdfFamily,
    mu: f64,
    lo: f64,
    hi: f64,
    nominal_sigma: f64,
) -> (f64, f64) {
    match family {
        PdfFamily::Beta => {
            let cap = ((mu * (1.0 - mu)).sqrt() * 0.999).max(nominal_sigma);
            (lo, hi.min(cap))
        }
        _ => (lo, hi),
    }
}

/// Largest `t` in `[0, max_extent]` with `tv(t) <= radius`, by bisection on
/// the monotone map `t -> tv(t)`. Returns the feasible (lower) end of the
/// final bracket so the result never overshoots the radius.
fn bisect_extent(radius: f64, max_extent: f64, tv_at: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let max_extent = max_extent.max(0.0);
    if max_extent == 0.0 {
        return Ok(0.0);
    }
    if tv_at(max_extent)? <= radius {
        return Ok(max_extent);
    }
    let (mut lo, mut hi) = (0.0, max_extent);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tv_at(mid)? <= radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * max_extent.max(1.0) {
            break;
        }
    }
    Ok(lo)
}
