//! Laser-spot geometry and the induced-current model.
//!
//! The beam is a normalized 2-D Gaussian characterized by its 1/e² diameter
//! (the disc holding 86.5 % of beam power). A reverse-biased junction `j`
//! illuminated at laser power `P` contributes
//!
//! ```text
//! I_j = i_sat * response(P) * kappa[kind_j] * area(rect_j) * overlap(spot, rect_j)
//! ```
//!
//! in µA, where `response` is a saturating threshold-exponential in the power
//! percentage and `kappa` is a per-junction-kind sensitivity per µm² of
//! junction area. Junctions that are not reverse-biased contribute nothing.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::eval::{evaluate_chip, BiasEntry, EvalError, JunctionKind, JunctionSite, DEFAULT_VDD};
use crate::geom::{Point, Rect};
use crate::netlist::{CellLibrary, ChipDesign, InputPattern};

/// Focused laser spot: geometry, drive power and pulse timing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserSpot {
    /// Beam centre, chip coordinates (µm).
    pub cx: f64,
    pub cy: f64,
    /// Spot diameter at 1/e² intensity (µm).
    #[serde(default = "default_diameter")]
    pub diameter_1e2: f64,
    /// Laser drive as percent of full scale, 0..=100.
    pub power_pct: f64,
    /// Pulse window start (µs from trace start).
    #[serde(default = "default_pulse_start")]
    pub pulse_start_us: f64,
    /// Pulse length (µs).
    #[serde(default = "default_pulse_duration")]
    pub pulse_duration_us: f64,
}

fn default_diameter() -> f64 {
    2.6
}

/// Default pulse start: with the nominal 11 µs sample spacing this makes
/// sample index 6 the first illuminated sample.
fn default_pulse_start() -> f64 {
    66.0
}

fn default_pulse_duration() -> f64 {
    100.0
}

impl LaserSpot {
    pub fn new(cx: f64, cy: f64, power_pct: f64) -> Self {
        LaserSpot {
            cx,
            cy,
            diameter_1e2: default_diameter(),
            power_pct,
            pulse_start_us: default_pulse_start(),
            pulse_duration_us: default_pulse_duration(),
        }
    }

    /// 1/e² radius (µm).
    pub fn waist(&self) -> f64 {
        self.diameter_1e2 / 2.0
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// True when time `t` (µs) falls inside the pulse window.
    pub fn pulse_covers(&self, t: f64) -> bool {
        t >= self.pulse_start_us && t < self.pulse_start_us + self.pulse_duration_us
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.diameter_1e2 > 0.0) {
            return Err(ModelError::Invalid("spot diameter must be positive"));
        }
        if !(0.0..=100.0).contains(&self.power_pct) {
            return Err(ModelError::Invalid("power_pct must lie in [0,100]"));
        }
        if !(self.pulse_duration_us > 0.0) {
            return Err(ModelError::Invalid("pulse duration must be positive"));
        }
        Ok(())
    }
}

/// Per-junction-kind sensitivity (per µm² of illuminated junction area).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub ndiff: f64,
    pub pdiff: f64,
    pub nwell: f64,
}

impl Kappa {
    pub fn get(&self, kind: JunctionKind) -> f64 {
        match kind {
            JunctionKind::NdiffPsub => self.ndiff,
            JunctionKind::PdiffNwell => self.pdiff,
            JunctionKind::NwellPsub => self.nwell,
        }
    }
}

/// Saturating power-response model for the induced current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObicParams {
    /// Illumination threshold (percent of full scale): no response below it.
    pub p_th: f64,
    /// Exponential rise constant (percent).
    pub p_k: f64,
    /// Saturation current scale (µA).
    pub i_sat: f64,
    pub kappa: Kappa,
}

impl ObicParams {
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.p_th >= 0.0) {
            return Err(ModelError::Invalid("p_th must be >= 0"));
        }
        if !(self.p_k > 0.0) {
            return Err(ModelError::Invalid("p_k must be > 0"));
        }
        if !(self.i_sat > 0.0) {
            return Err(ModelError::Invalid("i_sat must be > 0"));
        }
        if self.kappa.ndiff < 0.0 || self.kappa.pdiff < 0.0 || self.kappa.nwell < 0.0 {
            return Err(ModelError::Invalid("kappa values must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Normalized beam intensity at point `p`: exp(-2 r² / w²), peak 1 at the
/// centre, 1/e² at one waist radius.
pub fn spot_intensity(spot: &LaserSpot, p: Point) -> f64 {
    let w = spot.waist();
    let r2 = (p.x - spot.cx).powi(2) + (p.y - spot.cy).powi(2);
    (-2.0 * r2 / (w * w)).exp()
}

/// Fraction of total beam power falling inside `rect`, in closed form as the
/// product of one-dimensional Gaussian integrals along x and y.
pub fn overlap_fraction(spot: &LaserSpot, rect: &Rect) -> f64 {
    let w = spot.waist();
    let fx = axis_fraction(rect.x, rect.x1(), spot.cx, w);
    let fy = axis_fraction(rect.y, rect.y1(), spot.cy, w);
    fx * fy
}

fn axis_fraction(a: f64, b: f64, c: f64, w: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 / w;
    0.5 * (erf(s * (b - c)) - erf(s * (a - c)))
}

/// Power-response scale in [0,1]: zero up to the threshold, then
/// 1 - exp(-(P - p_th)/p_k), approaching 1 as the power grows.
pub fn obic_response(params: &ObicParams, power_pct: f64) -> f64 {
    if power_pct <= params.p_th {
        0.0
    } else {
        1.0 - (-(power_pct - params.p_th) / params.p_k).exp()
    }
}

/// Per-junction currents and their total (µA).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentBreakdown {
    pub per_junction: Vec<(JunctionSite, f64)>,
    pub total: f64,
}

/// Induced current for a chip in a given static state under a laser spot.
/// Geometry is taken in chip coordinates (placements already applied).
pub fn induced_current(
    design: &ChipDesign,
    lib: &CellLibrary,
    pattern: &InputPattern,
    spot: &LaserSpot,
    params: &ObicParams,
) -> Result<CurrentBreakdown, ModelError> {
    spot.check()?;
    params.check()?;
    let eval = evaluate_chip(design, lib, pattern, DEFAULT_VDD)?;
    Ok(breakdown_from_bias(&eval.bias.entries, spot, params))
}

/// Shared current computation over classified junction entries.
pub fn breakdown_from_bias(
    entries: &[BiasEntry],
    spot: &LaserSpot,
    params: &ObicParams,
) -> CurrentBreakdown {
    let response = obic_response(params, spot.power_pct);
    let mut per_junction = Vec::with_capacity(entries.len());
    let mut total = 0.0;
    for entry in entries {
        let current = if entry.reverse_biased {
            params.i_sat
                * response
                * params.kappa.get(entry.site.kind)
                * entry.site.rect.area()
                * overlap_fraction(spot, &entry.site.rect)
        } else {
            0.0
        };
        total += current;
        per_junction.push((entry.site.clone(), current));
    }
    CurrentBreakdown { per_junction, total }
}

/// Area of `rect` covered by the 1/e² disc of the spot (µm²), evaluated by
/// midpoint integration over the clipped region. This is the "illuminated
/// area" figure reported for a cell footprint.
pub fn illuminated_area(spot: &LaserSpot, rect: &Rect) -> f64 {
    let w = spot.waist();
    let disc = Rect::new(spot.cx - w, spot.cy - w, 2.0 * w, 2.0 * w);
    let Some(clip) = rect.intersection(&disc) else {
        return 0.0;
    };
    const N: usize = 512;
    let dx = clip.w / N as f64;
    let dy = clip.h / N as f64;
    let mut inside = 0usize;
    for i in 0..N {
        let x = clip.x + (i as f64 + 0.5) * dx;
        for j in 0..N {
            let y = clip.y + (j as f64 + 0.5) * dy;
            if (x - spot.cx).powi(2) + (y - spot.cy).powi(2) <= w * w {
                inside += 1;
            }
        }
    }
    inside as f64 * dx * dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spot_at(cx: f64, cy: f64) -> LaserSpot {
        LaserSpot::new(cx, cy, 7.0)
    }

    #[test]
    fn intensity_peaks_at_centre() {
        let s = spot_at(1.0, 2.0);
        assert_eq!(spot_intensity(&s, Point::new(1.0, 2.0)), 1.0);
    }

    #[test]
    fn intensity_at_waist_radius_is_e_minus_2() {
        let s = spot_at(0.0, 0.0);
        let v = spot_intensity(&s, Point::new(1.3, 0.0));
        assert_abs_diff_eq!(v, (-2.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.1353, epsilon = 1e-4);
    }

    #[test]
    fn intensity_far_away_vanishes() {
        let s = spot_at(0.0, 0.0);
        assert!(spot_intensity(&s, Point::new(100.0, 0.0)) < 1e-30);
    }

    #[test]
    fn overlap_of_whole_plane_is_one() {
        let s = spot_at(0.0, 0.0);
        let all = Rect::new(-1e4, -1e4, 2e4, 2e4);
        assert_abs_diff_eq!(overlap_fraction(&s, &all), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn overlap_of_zero_area_rect_is_zero() {
        let s = spot_at(0.0, 0.0);
        assert_eq!(overlap_fraction(&s, &Rect::new(0.3, 0.1, 0.0, 2.0)), 0.0);
    }

    #[test]
    fn response_is_zero_at_threshold_and_saturates() {
        let params = ObicParams {
            p_th: 6.5,
            p_k: 1.5,
            i_sat: 1000.0,
            kappa: Kappa { ndiff: 1.0, pdiff: 1.0, nwell: 1.0 },
        };
        assert_eq!(obic_response(&params, 6.5), 0.0);
        assert_eq!(obic_response(&params, 0.0), 0.0);
        assert!(obic_response(&params, 1e6) > 1.0 - 1e-12);
        // 5 rise constants past threshold is > 0.99.
        assert!(obic_response(&params, 6.5 + 5.0 * 1.5) > 0.99);
    }

    #[test]
    fn far_away_spot_induces_nothing() {
        let lib = crate::netlist::builtin_fixtures();
        let chip = crate::netlist::build_chain(&crate::netlist::nand2(), 1, &Default::default())
            .unwrap();
        let spot = spot_at(1000.0, 1000.0);
        let params = ObicParams {
            p_th: 1.0,
            p_k: 2.0,
            i_sat: 1000.0,
            kappa: Kappa { ndiff: 1.0, pdiff: 1.0, nwell: 1.0 },
        };
        let out = induced_current(
            &chip,
            &lib,
            &InputPattern::new("11").unwrap(),
            &spot,
            &params,
        )
        .unwrap();
        assert!(out.total.abs() < 1e-6);
    }

    #[test]
    fn breakdown_total_is_the_sum() {
        let lib = crate::netlist::builtin_fixtures();
        let chip = crate::netlist::build_chain(&crate::netlist::nand2(), 1, &Default::default())
            .unwrap();
        let spot = spot_at(3.0, 1.05);
        let params = ObicParams {
            p_th: 1.0,
            p_k: 2.0,
            i_sat: 1000.0,
            kappa: Kappa { ndiff: 2.0, pdiff: 0.5, nwell: 1.0 },
        };
        let out = induced_current(
            &chip,
            &lib,
            &InputPattern::new("01").unwrap(),
            &spot,
            &params,
        )
        .unwrap();
        let sum: f64 = out.per_junction.iter().map(|(_, c)| c).sum();
        assert_abs_diff_eq!(out.total, sum, epsilon = 1e-12);
        assert!(out.per_junction.iter().all(|(_, c)| *c >= 0.0));
        assert!(out.total > 0.0);
    }

    #[test]
    fn illuminated_area_of_centered_disc() {
        // Disc fully inside the rect: area = pi * w².
        let s = spot_at(3.5, 2.5);
        let area = illuminated_area(&s, &Rect::new(0.0, 0.0, 7.0, 5.0));
        assert_abs_diff_eq!(area, std::f64::consts::PI * 1.3 * 1.3, epsilon = 0.01);
    }
}
