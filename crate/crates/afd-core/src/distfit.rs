//! Moment-parameterized densities, maximum-likelihood fits, and total
//! variation distances.
//!
//! Every fitted density is summarized by `(family, mean, std)`; the whole
//! worst-case machinery works on those two moments. TV between two normals
//! is evaluated exactly through the density crossing points; every other
//! family pair goes through adaptive quadrature on the union support.

use crate::error::{AfdError, Result};
use crate::special::{integrate_adaptive, ln_gamma, norm_cdf, norm_pdf};

/// Absolute tolerance of the quadrature fallback.
pub const QUAD_TOL: f64 = 1e-8;
/// Normal supports are truncated at this many standard deviations; the mass
/// beyond is far below the quadrature tolerance.
const SUPPORT_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfFamily {
    Normal,
    Gamma,
    Beta,
}

impl std::fmt::Display for PdfFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PdfFamily::Normal => write!(f, "normal"),
            PdfFamily::Gamma => write!(f, "gamma"),
            PdfFamily::Beta => write!(f, "beta"),
        }
    }
}

/// A density with the given family, mean `mu` and standard deviation
/// `sigma`. Gamma and beta shapes are derived from the moments on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPdf {
    pub family: PdfFamily,
    pub mu: f64,
    pub sigma: f64,
}

impl MomentPdf {
    pub fn new(family: PdfFamily, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(AfdError::InvalidArgument(format!(
                "moments must be finite with sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        match family {
            PdfFamily::Normal => {}
            PdfFamily::Gamma => {
                gamma_from_moments(mu, sigma)?;
            }
            PdfFamily::Beta => {
                beta_from_moments(mu, sigma)?;
            }
        }
        Ok(MomentPdf { family, mu, sigma })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        MomentPdf::new(PdfFamily::Normal, mu, sigma)
    }

    /// Builds a density from moments that may sit on or just outside the
    /// family's moment domain, nudging them inside. Used where optimizer
    /// iterates touch domain boundaries (a zero mean for gamma, a variance
    /// at the beta feasibility edge).
    pub fn clamped(family: PdfFamily, mu: f64, sigma: f64) -> Result<Self> {
        const FLOOR: f64 = 1e-12;
        let sigma = sigma.max(FLOOR);
        match family {
            PdfFamily::Normal => MomentPdf::new(family, mu, sigma),
            PdfFamily::Gamma => MomentPdf::new(family, mu.max(FLOOR), sigma),
            PdfFamily::Beta => {
                let mu = mu.clamp(FLOOR, 1.0 - FLOOR);
                let cap = (mu * (1.0 - mu)).sqrt() * 0.999;
                MomentPdf::new(family, mu, sigma.min(cap))
            }
        }
    }

    /// Density value at `y`.
    pub fn density(&self, y: f64) -> f64 {
        match self.family {
            PdfFamily::Normal => norm_pdf((y - self.mu) / self.sigma) / self.sigma,
            PdfFamily::Gamma => {
                if y <= 0.0 {
                    return 0.0;
                }
                let (a, b) =
                    gamma_from_moments(self.mu, self.sigma).expect("validated on construction");
                (a * b.ln() + (a - 1.0) * y.ln() - b * y - ln_gamma(a)).exp()
            }
            PdfFamily::Beta => {
                if y <= 0.0 || y >= 1.0 {
                    return 0.0;
                }
                let (a, b) =
                    beta_from_moments(self.mu, self.sigma).expect("validated on construction");
                let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
                ((a - 1.0) * y.ln() + (b - 1.0) * (1.0 - y).ln() - ln_beta).exp()
            }
        }
    }

    /// Interval carrying all but a negligible sliver of mass, used to bound
    /// quadrature. Endpoint singularities of gamma/beta shapes below one are
    /// kept out of the interval.
    fn support(&self) -> (f64, f64) {
        match self.family {
            PdfFamily::Normal => (
                self.mu - SUPPORT_SIGMAS * self.sigma,
                self.mu + SUPPORT_SIGMAS * self.sigma,
            ),
            PdfFamily::Gamma => {
                let (a, b) =
                    gamma_from_moments(self.mu, self.sigma).expect("validated on construction");
                let lo = if a >= 1.0 {
                    (self.mu - SUPPORT_SIGMAS * self.sigma).max(0.0)
                } else {
                    // Mass of Gamma(a, b) below eps is ~ (b eps)^a / (a Gamma(a)).
                    ((1e-13 * a * ln_gamma(a).exp()).powf(1.0 / a) / b).min(self.mu * 1e-3)
                };
                (lo, self.mu + (SUPPORT_SIGMAS + 2.0) * self.sigma)
            }
            PdfFamily::Beta => (1e-12, 1.0 - 1e-12),
        }
    }
}

/// Monte Carlo outputs of one model at one measurement time.
#[derive(Debug, Clone)]
pub struct OutputEnsemble {
    pub model_index: usize,
    pub time: f64,
    pub samples: Vec<f64>,
}

impl OutputEnsemble {
    pub fn new(model_index: usize, time: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(AfdError::InvalidArgument(format!(
                "ensemble needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AfdError::InvalidArgument(
                "ensemble samples must be finite".into(),
            ));
        }
        Ok(OutputEnsemble {
            model_index,
            time,
            samples,
        })
    }
}

/// Maximum-likelihood normal fit: `mu = mean`, `sigma^2 = (1/N) sum (y - mu)^2`
/// (the biased ML form, not the Bessel-corrected one).
pub fn fit_normal_ml(ens: &OutputEnsemble) -> Result<MomentPdf> {
    let n = ens.samples.len() as f64;
    let mu = ens.samples.iter().sum::<f64>() / n;
    let var = ens.samples.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / n;
    // Identical samples can leave rounding dust in the variance; anything at
    // the scale of the mean's representation error is degenerate.
    let dust = (4.0 * f64::EPSILON * mu.abs()).powi(2);
    if var <= dust {
        return Err(AfdError::DegenerateEnsemble);
    }
    MomentPdf::normal(mu, var.sqrt())
}

/// Shape/rate of the gamma distribution with the given mean and std.
pub fn gamma_from_moments(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    if mu <= 0.0 || sigma <= 0.0 || !mu.is_finite() || !sigma.is_finite() {
        return Err(AfdError::InfeasibleMoments(format!(
            "gamma needs mu > 0 and sigma > 0, got mu = {mu}, sigma = {sigma}"
        )));
    }
    let shape = (mu / sigma) * (mu / sigma);
    let rate = mu / (sigma * sigma);
    Ok((shape, rate))
}

/// Shape pair of the beta distribution with the given mean and std.
pub fn beta_from_moments(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    let var = sigma * sigma;
    if !(mu > 0.0 && mu < 1.0) || sigma <= 0.0 || var >= mu * (1.0 - mu) {
        return Err(AfdError::InfeasibleMoments(format!(
            "beta needs 0 < mu < 1 and sigma^2 < mu(1 - mu), got mu = {mu}, sigma = {sigma}"
        )));
    }
    let a = mu * (mu - mu * mu - var) / var;
    let b = a * (1.0 - mu) / mu;
    Ok((a, b))
}

/// Total variation distance between two densities, in `[0, 1]`.
pub fn tv_density(p: &MomentPdf, q: &MomentPdf) -> Result<f64> {
    if p.family == PdfFamily::Normal && q.family == PdfFamily::Normal {
        return Ok(tv_normal_exact(p.mu, p.sigma, q.mu, q.sigma));
    }
    tv_by_quadrature(p, q)
}

/// Integrates `|f_p - f_q|` over the union support, split into panels at
/// each density's support edges and mode so a density far narrower than the
/// other cannot slip between quadrature nodes.
fn tv_by_quadrature(p: &MomentPdf, q: &MomentPdf) -> Result<f64> {
    let (plo, phi) = p.support();
    let (qlo, qhi) = q.support();
    let lo = plo.min(qlo);
    let hi = phi.max(qhi);
    let mut cuts = vec![lo, plo, phi, qlo, qhi, p.mu, q.mu, hi];
    cuts.retain(|c| c.is_finite() && *c >= lo && *c <= hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
    cuts.dedup();
    let f = |y: f64| (p.density(y) - q.density(y)).abs();
    let mut integral = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            integral += integrate_adaptive(&f, w[0], w[1], QUAD_TOL / 8.0)?;
        }
    }
    Ok((0.5 * integral).clamp(0.0, 1.0))
}

/// Exact TV between two normals via the crossing points of the densities
/// (roots of the quadratic `log f_p = log f_q`) and CDF differences.
///
/// The quadratic is solved in the narrow density's standardized coordinate,
/// where the discriminant is a sum of nonnegative terms; the naive
/// coefficient form cancels catastrophically at extreme sigma ratios.
fn tv_normal_exact(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    if (s1 - s2).abs() <= 1e-12 * s1.max(s2) {
        // Equal variances: single crossing at the midpoint.
        let sigma = 0.5 * (s1 + s2);
        return (2.0 * norm_cdf((mu1 - mu2).abs() / (2.0 * sigma)) - 1.0).clamp(0.0, 1.0);
    }
    // Canonical narrow/wide order keeps the result symmetric in (p, q).
    let (mn, sn, mw, sw) = if s1 < s2 {
        (mu1, s1, mu2, s2)
    } else {
        (mu2, s2, mu1, s1)
    };
    // With z = (y - mn) / sn:  a z^2 + b z + c = 0, a in [-1, 0).
    let ratio = sn / sw;
    let d = mn - mw;
    let a = ratio * ratio - 1.0;
    let b = 2.0 * sn * d / (sw * sw);
    let c = d * d / (sw * sw) + 2.0 * (sw / sn).ln();
    // c >= 0 and a < 0, so the discriminant never cancels.
    let sq = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let z1 = (-b + sq) / (2.0 * a);
    let z2 = (-b - sq) / (2.0 * a);
    let (zlo, zhi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
    let ylo = mn + sn * zlo;
    let yhi = mn + sn * zhi;

    let cdf_n = |y: f64| norm_cdf((y - mn) / sn);
    let cdf_w = |y: f64| norm_cdf((y - mw) / sw);
    let seg = |a: f64, b: f64| ((cdf_n(b) - cdf_n(a)) - (cdf_w(b) - cdf_w(a))).abs();
    let tv = 0.5 * (seg(f64::NEG_INFINITY, ylo) + seg(ylo, yhi) + seg(yhi, f64::INFINITY));
    tv.clamp(0.0, 1.0)
}

/// A normalized histogram: masses over increasing bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn new(bin_edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if bin_edges.len() != masses.len() + 1 || masses.is_empty() {
            return Err(AfdError::InvalidArgument(
                "histogram needs edges = masses + 1, nonempty".into(),
            ));
        }
        if bin_edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AfdError::InvalidArgument(
                "bin edges must be increasing".into(),
            ));
        }
        if masses.iter().any(|m| *m < 0.0) {
            return Err(AfdError::InvalidArgument(
                "masses must be nonnegative".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AfdError::InvalidArgument(format!(
                "masses must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(Histogram { bin_edges, masses })
    }

    /// Histogram with the Freedman–Diaconis bin width (range-based fallback
    /// when the interquartile range vanishes).
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(AfdError::InvalidArgument("need at least 2 samples".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let n = sorted.len();
        let q = |p: f64| sorted[(p * (n - 1) as f64).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let lo = sorted[0];
        let hi = sorted[n - 1];
        if hi <= lo {
            return Err(AfdError::DegenerateEnsemble);
        }
        let width = if iqr > 0.0 {
            2.0 * iqr / (n as f64).cbrt()
        } else {
            (hi - lo) / (n as f64).sqrt().max(1.0)
        };
        let bins = (((hi - lo) / width).ceil() as usize).clamp(1, 10_000);
        Self::equal_bins(samples, lo, hi, bins)
    }

    /// Histogram with `bins` equal-width bins on `[lo, hi]`; samples outside
    /// the range are clamped into the edge bins.
    pub fn equal_bins(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || hi <= lo {
            return Err(AfdError::InvalidArgument(
                "need bins > 0 and hi > lo".into(),
            ));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &s in samples {
            let idx = (((s - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
            counts[idx] += 1;
        }
        let n = samples.len() as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        // Last mass absorbs rounding so the total is exactly one.
        let mut masses: Vec<f64> = counts.iter().map(|c| *c as f64 / n).collect();
        let sum: f64 = masses.iter().sum();
        if let Some(last) = masses.last_mut() {
            *last += 1.0 - sum;
        }
        Histogram::new(edges, masses)
    }
}

/// Discrete TV on the common bin-edge refinement of two histograms.
pub fn tv_histogram(p: &Histogram, q: &Histogram) -> f64 {
    let mut cuts: Vec<f64> = p
        .bin_edges
        .iter()
        .chain(q.bin_edges.iter())
        .copied()
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    cuts.dedup();

    let density_at = |h: &Histogram, a: f64, b: f64| -> f64 {
        // The refined interval (a, b) lies inside exactly one source bin.
        let mid = 0.5 * (a + b);
        if mid < h.bin_edges[0] || mid > *h.bin_edges.last().expect("nonempty") {
            return 0.0;
        }
        let idx = match h
            .bin_edges
            .binary_search_by(|e| e.partial_cmp(&mid).expect("finite"))
        {
            Ok(i) => i.min(h.masses.len() - 1),
            Err(i) => i - 1,
        };
        h.masses[idx] / (h.bin_edges[idx + 1] - h.bin_edges[idx])
    };

    let mut tv = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        tv += 0.5 * (density_at(p, a, b) - density_at(q, a, b)).abs() * (b - a);
    }
    tv.clamp(0.0, 1.0)
}

/// Pairwise common area `sum_{i<j} (1 - d_TV(f_i, f_j))`.
pub fn common_area(pdfs: &[MomentPdf]) -> Result<f64> {
    if pdfs.len() < 2 {
        return Err(AfdError::InvalidArgument(format!(
            "common area needs at least 2 densities, got {}",
            pdfs.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..pdfs.len() {
        for j in (i + 1)..pdfs.len() {
            total += 1.0 - tv_density(&pdfs[i], &pdfs[j])?;
        }
    }
    Ok(total)
}

/// Quadrature route for the normal/normal TV; test oracle for the exact path.
#[doc(hidden)]
pub fn tv_density_quadrature(p: &MomentPdf, q: &MomentPdf) -> Result<f64> {
    tv_by_quadrature(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{StreamKind, Streams};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn ml_fit_is_the_biased_form() {
        let ens = OutputEnsemble::new(0, 0.0, vec![1.0, 2.0, 3.0]).unwrap();
        let pdf = fit_normal_ml(&ens).unwrap();
        assert!((pdf.mu - 2.0).abs() < 1e-15);
        assert!((pdf.sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_ensemble_is_degenerate() {
        let ens = OutputEnsemble::new(0, 0.0, vec![0.4; 10]).unwrap();
        assert!(matches!(
            fit_normal_ml(&ens),
            Err(AfdError::DegenerateEnsemble)
        ));
    }

    #[test]
    fn ml_fit_is_consistent_on_seeded_draws() {
        let streams = Streams::new(77);
        let mut rng = streams.stream(StreamKind::Scratch, 0, 0, 0);
        let normal = Normal::new(0.5, 0.1).unwrap();
        let samples: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let pdf = fit_normal_ml(&OutputEnsemble::new(0, 0.0, samples).unwrap()).unwrap();
        assert!((pdf.mu - 0.5).abs() < 0.01);
        assert!((pdf.sigma - 0.1).abs() < 0.01);
    }

    #[test]
    fn gamma_map_known_values() {
        assert_eq!(gamma_from_moments(2.0, 1.0).unwrap(), (4.0, 2.0));
        assert_eq!(gamma_from_moments(1.0, 1.0).unwrap(), (1.0, 1.0));
        assert!(gamma_from_moments(-1.0, 1.0).is_err());
    }

    #[test]
    fn beta_map_known_values() {
        let (a, b) = beta_from_moments(0.5, 0.05f64.sqrt()).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-12);
        assert!(beta_from_moments(0.5, 0.5).is_err());
    }

    #[test]
    fn tv_of_identical_densities_is_zero() {
        let p = MomentPdf::normal(0.3, 0.05).unwrap();
        assert_eq!(tv_density(&p, &p).unwrap(), 0.0);
        let g = MomentPdf::new(PdfFamily::Gamma, 2.0, 0.5).unwrap();
        assert!(tv_density(&g, &g).unwrap() < 1e-10);
    }

    #[test]
    fn equal_variance_tv_matches_frozen_value() {
        // Two-sigma mean gap: TV = 2 Phi(1) - 1.
        let p = MomentPdf::normal(0.0, 1.0).unwrap();
        let q = MomentPdf::normal(2.0, 1.0).unwrap();
        let tv = tv_density(&p, &q).unwrap();
        assert!((tv - 0.682689492137086).abs() < 1e-6, "tv = {tv}");
        let quad = tv_density_quadrature(&p, &q).unwrap();
        assert!((tv - quad).abs() < 1e-7, "closed {tv} vs quad {quad}");
    }

    #[test]
    fn far_separated_normals_have_tv_near_one() {
        let p = MomentPdf::normal(0.0, 1.0).unwrap();
        let q = MomentPdf::normal(10.0, 1.0).unwrap();
        assert!(tv_density(&p, &q).unwrap() >= 0.9999);
    }

    #[test]
    fn unequal_variance_tv_matches_quadrature() {
        let cases = [
            (0.0, 1.0, 0.5, 2.0),
            (0.3, 0.05, 0.32, 0.011),
            (-1.0, 0.3, 2.0, 1.7),
            (0.0, 1.0, 0.0, 3.0),
        ];
        for (m1, s1, m2, s2) in cases {
            let p = MomentPdf::normal(m1, s1).unwrap();
            let q = MomentPdf::normal(m2, s2).unwrap();
            let exact = tv_density(&p, &q).unwrap();
            let quad = tv_density_quadrature(&p, &q).unwrap();
            assert!(
                (exact - quad).abs() < 1e-7,
                "({m1},{s1}) vs ({m2},{s2}): exact {exact}, quad {quad}"
            );
        }
    }

    #[test]
    fn histogram_tv_known_values() {
        let p = Histogram::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0]).unwrap();
        let q = Histogram::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!((tv_histogram(&p, &q) - 0.5).abs() < 1e-15);
        assert_eq!(tv_histogram(&p, &p), 0.0);

        let far = Histogram::new(vec![10.0, 11.0], vec![1.0]).unwrap();
        assert!((tv_histogram(&p, &far) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_tv_handles_unaligned_edges() {
        let p = Histogram::new(vec![0.0, 2.0], vec![1.0]).unwrap();
        let q = Histogram::new(vec![1.0, 3.0], vec![1.0]).unwrap();
        // Densities are 0.5 each; they overlap on [1, 2] only.
        assert!((tv_histogram(&p, &q) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn common_area_counts_pairs() {
        let p = MomentPdf::normal(0.5, 0.1).unwrap();
        assert!((common_area(&[p, p]).unwrap() - 1.0).abs() < 1e-12);
        assert!((common_area(&[p, p, p]).unwrap() - 3.0).abs() < 1e-12);
        let q = MomentPdf::normal(100.0, 0.1).unwrap();
        assert!(common_area(&[p, q]).unwrap() <= 1e-4);
        assert!(common_area(&[p]).is_err());
    }

    #[test]
    fn histogram_tv_tracks_density_tv_on_large_ensembles() {
        let streams = Streams::new(3);
        let mut rng = streams.stream(StreamKind::Scratch, 0, 0, 1);
        let d1 = Normal::new(0.0, 1.0).unwrap();
        let d2 = Normal::new(1.2, 1.4).unwrap();
        let n = 100_000;
        let s1: Vec<f64> = (0..n).map(|_| d1.sample(&mut rng)).collect();
        let s2: Vec<f64> = (0..n).map(|_| d2.sample(&mut rng)).collect();
        let lo = s1.iter().chain(&s2).fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = s1
            .iter()
            .chain(&s2)
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let h1 = Histogram::equal_bins(&s1, lo, hi, 100).unwrap();
        let h2 = Histogram::equal_bins(&s2, lo, hi, 100).unwrap();
        let tv_h = tv_histogram(&h1, &h2);
        let tv_d = tv_density(
            &MomentPdf::normal(0.0, 1.0).unwrap(),
            &MomentPdf::normal(1.2, 1.4).unwrap(),
        )
        .unwrap();
        assert!((tv_h - tv_d).abs() <= 0.02, "hist {tv_h} vs density {tv_d}");
    }

    #[test]
    fn freedman_diaconis_masses_sum_to_one() {
        let streams = Streams::new(5);
        let mut rng = streams.stream(StreamKind::Scratch, 0, 0, 2);
        let samples: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>() * 3.0).collect();
        let h = Histogram::from_samples(&samples).unwrap();
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_pdf() -> impl Strategy<Value = MomentPdf> {
            (0..3, 0.05f64..0.9, 0.01f64..0.2).prop_map(|(fam, mu, sigma)| {
                match fam {
                    0 => MomentPdf::normal(mu, sigma).unwrap(),
                    1 => MomentPdf::new(PdfFamily::Gamma, mu, sigma).unwrap(),
                    _ => {
                        // Keep beta feasible: sigma^2 < mu (1 - mu).
                        let cap = (mu * (1.0 - mu)).sqrt() * 0.8;
                        MomentPdf::new(PdfFamily::Beta, mu, sigma.min(cap)).unwrap()
                    }
                }
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn tv_is_symmetric_and_bounded(p in arb_pdf(), q in arb_pdf()) {
                let a = tv_density(&p, &q).unwrap();
                let b = tv_density(&q, &p).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert!((0.0..=1.0).contains(&a));
            }

            #[test]
            fn tv_separates_distinct_densities(p in arb_pdf(), q in arb_pdf()) {
                let a = tv_density(&p, &q).unwrap();
                let same = p.family == q.family
                    && (p.mu - q.mu).abs() < 1e-12
                    && (p.sigma - q.sigma).abs() < 1e-12;
                if same {
                    prop_assert!(a < 1e-9);
                } else {
                    prop_assert!(a > 0.0);
                }
            }

            #[test]
            fn tv_triangle_inequality(p in arb_pdf(), q in arb_pdf(), r in arb_pdf()) {
                let pq = tv_density(&p, &q).unwrap();
                let pr = tv_density(&p, &r).unwrap();
                let rq = tv_density(&r, &q).unwrap();
                prop_assert!(pq <= pr + rq + 1e-7);
            }

            #[test]
            fn gamma_moments_round_trip(mu in 0.01f64..50.0, sigma in 0.01f64..10.0) {
                let (a, b) = gamma_from_moments(mu, sigma).unwrap();
                prop_assert!((a / b - mu).abs() <= 1e-12 * mu.max(1.0));
                prop_assert!((a / (b * b) - sigma * sigma).abs() <= 1e-12 * (sigma * sigma).max(1.0));
            }

            #[test]
            fn beta_moments_round_trip(mu in 0.02f64..0.98, frac in 0.05f64..0.95) {
                let sigma = (mu * (1.0 - mu)).sqrt() * frac;
                let (a, b) = beta_from_moments(mu, sigma).unwrap();
                let mean = a / (a + b);
                let var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
                prop_assert!((mean - mu).abs() <= 1e-12);
                prop_assert!((var - sigma * sigma).abs() <= 1e-12);
            }
        }
    }
}
