//! Smoothed costs: φ-bounded uniform densities and their sampler.

use alloc::vec::Vec;

use crate::clo::CostVector;
use crate::error::{invalid, Result};
use crate::util::Rng64;

/// Closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };
    pub const SIGNED: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid!("interval [{lo}, {hi}] is empty or not finite"));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Width-`1/phi` interval centered at `nominal`, shifted minimally into `support`.
pub fn fit_window(nominal: f64, phi: f64, support: Interval) -> Result<Interval> {
    let width = support.width();
    if !(phi.is_finite() && phi * width + 1e-12 >= 1.0) {
        return Err(invalid!(
            "phi = {phi} is below 1/|support| = {}",
            1.0 / width
        ));
    }
    let w = 1.0 / phi;
    if w >= width {
        return Ok(support);
    }
    let mut lo = nominal - w / 2.0;
    if lo < support.lo {
        lo = support.lo;
    }
    if lo + w > support.hi {
        lo = support.hi - w;
    }
    Ok(Interval { lo, hi: lo + w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DensityKind {
    /// Uniform on a width-`1/phi` window around the nominal value.
    UniformWindow,
    /// Uniform on the whole support.
    UniformFull,
}

/// A φ-bounded density on a support interval.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhiDensity {
    pub kind: DensityKind,
    pub support: Interval,
    pub nominal: f64,
    pub phi: f64,
}

impl PhiDensity {
    pub fn new(kind: DensityKind, support: Interval, nominal: f64, phi: f64) -> Result<Self> {
        fit_window(nominal, phi, support)?;
        if !support.contains(nominal) {
            return Err(invalid!(
                "nominal {nominal} outside support [{}, {}]",
                support.lo,
                support.hi
            ));
        }
        Ok(Self {
            kind,
            support,
            nominal,
            phi,
        })
    }

    pub fn window(&self) -> Interval {
        match self.kind {
            DensityKind::UniformFull => self.support,
            DensityKind::UniformWindow => {
                fit_window(self.nominal, self.phi, self.support).unwrap_or(self.support)
            }
        }
    }

    /// Supremum of the density function.
    pub fn max_density(&self) -> f64 {
        1.0 / self.window().width()
    }

    pub fn mean(&self) -> f64 {
        let w = self.window();
        (w.lo + w.hi) / 2.0
    }

    pub fn variance(&self) -> f64 {
        let w = self.window().width();
        w * w / 12.0
    }

    pub fn sample(&self, rng: &mut Rng64) -> f64 {
        let w = self.window();
        w.lo + w.width() * rng.next_f64()
    }
}

/// Independent per-coordinate densities with a seed.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothedCostModel {
    pub densities: Vec<PhiDensity>,
    pub seed: u64,
}

impl SmoothedCostModel {
    pub fn new(densities: Vec<PhiDensity>, seed: u64) -> Self {
        Self { densities, seed }
    }

    /// One density per nominal value, all of the same kind, support and phi.
    pub fn around(
        nominals: &[f64],
        kind: DensityKind,
        support: Interval,
        phi: f64,
        seed: u64,
    ) -> Result<Self> {
        let densities = nominals
            .iter()
            .map(|&x| PhiDensity::new(kind, support, x.clamp(support.lo, support.hi), phi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { densities, seed })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            densities: self.densities.clone(),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    /// The largest phi among the densities (the global density bound).
    pub fn max_phi(&self) -> f64 {
        self.densities.iter().map(|d| d.phi).fold(0.0, f64::max)
    }

    /// Stream for coordinate `i`; adding coordinates does not perturb others.
    pub fn coordinate_stream(&self, i: usize) -> Rng64 {
        Rng64::with_stream(self.seed, i as u64)
    }

    pub fn sample(&self) -> CostVector {
        let coeffs = self
            .densities
            .iter()
            .enumerate()
            .map(|(i, d)| d.sample(&mut self.coordinate_stream(i)))
            .collect();
        CostVector {
            coeffs,
            scale: 1.0,
        }
    }

    /// `count` successive draws of coordinate `i` from its own stream.
    pub fn coordinate_samples(&self, i: usize, count: usize) -> Vec<f64> {
        let mut rng = self.coordinate_stream(i);
        (0..count).map(|_| self.densities[i].sample(&mut rng)).collect()
    }
}

/// `min(1/‖ξ‖∞, √2/‖ξ‖₂) · ε · φ`.
pub fn anticoncentration_bound(xi: &[i64], eps: f64, phi: f64) -> f64 {
    let inf = xi.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
    let two = libm::sqrt(xi.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>());
    (1.0 / inf).min(core::f64::consts::SQRT_2 / two) * eps * phi
}

/// Outcome of a Monte Carlo check of `P(0 ≤ ξ·X ≤ ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiConcentrationOutcome {
    pub p_hat: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Estimates `P(0 ≤ ξ·X ≤ ε)` with `trials` draws of X from `model`.
pub fn anticoncentration_check(
    xi: &[i64],
    eps: f64,
    model: &SmoothedCostModel,
    trials: usize,
) -> Result<AntiConcentrationOutcome> {
    if xi.iter().all(|&x| x == 0) {
        return Err(invalid!("xi must be nonzero"));
    }
    if xi.len() != model.len() {
        return Err(invalid!(
            "xi has {} entries but the model has {} coordinates",
            xi.len(),
            model.len()
        ));
    }
    if !(eps >= 0.0) {
        return Err(invalid!("eps must be nonnegative"));
    }
    if trials < 10_000 {
        return Err(invalid!("need at least 10^4 trials, got {trials}"));
    }
    let active: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] != 0).collect();
    let phi = active
        .iter()
        .map(|&i| model.densities[i].phi)
        .fold(0.0, f64::max);
    let mut streams: Vec<Rng64> = active.iter().map(|&i| model.coordinate_stream(i)).collect();
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut y = 0.0;
        for (k, &i) in active.iter().enumerate() {
            y += xi[i] as f64 * model.densities[i].sample(&mut streams[k]);
        }
        if (0.0..=eps).contains(&y) {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / trials as f64;
    let stderr = libm::sqrt(p_hat * (1.0 - p_hat) / trials as f64);
    let bound = anticoncentration_bound(xi, eps, phi);
    Ok(AntiConcentrationOutcome {
        p_hat,
        stderr,
        bound,
        pass: p_hat <= bound + 3.0 * stderr,
    })
}
