//! Continuous-mesh sizing: optimal density, predicted error, regularisation
//! and the per-element target metric.

use crate::anisotropy::AnisotropyResult;
use crate::error::{check_len, Error, Result};
use crate::field::{vertex_metric_from_elements, MetricField};
use crate::mesh::Triangulation;
use crate::metric::{Metric, MetricDecomposition, UNIT_TRIANGLE_AREA};

/// Area of a unit triangle, `3√3/4`.
pub const ALPHA: f64 = UNIT_TRIANGLE_AREA;
/// Floor applied by [`regularize`] relative to the equidistributed error.
pub const REGULARIZATION_FLOOR: f64 = 0.1;
/// Growth of the complexity between adaptation cycles.
pub const DEFAULT_GROWTH: f64 = 1.3;

/// `Ā = η² / |K|^{p+2}`.
pub fn abar(eta: f64, area: f64, p: usize) -> f64 {
    eta * eta / area.powi(p as i32 + 2)
}

fn power_sum(eta: &[f64], p: usize) -> f64 {
    let e = 2.0 / (p as f64 + 2.0);
    eta.iter().map(|v| v.powf(e)).sum()
}

/// `d*_K = N η_K^{2/(p+2)} / (|K| Σ η^{2/(p+2)})`; uniform when every indicator vanishes.
pub fn optimal_density(eta: &[f64], areas: &[f64], complexity: f64, p: usize) -> Result<Vec<f64>> {
    check_len(eta.len(), areas.len())?;
    if !(complexity > 0.0) {
        return Err(Error::InvalidInput(format!(
            "complexity must be positive, got {complexity}"
        )));
    }
    let total_area: f64 = areas.iter().sum();
    let s = power_sum(eta, p);
    if !(s > 0.0) {
        return Ok(vec![complexity / total_area; eta.len()]);
    }
    let e = 2.0 / (p as f64 + 2.0);
    Ok(eta
        .iter()
        .zip(areas)
        .map(|(v, a)| complexity * v.powf(e) / (a * s))
        .collect())
}

/// Per-element error of the optimised mesh,
/// `α^{(p+2)/2} N^{-(p+2)/2} (Σ η^{2/(p+2)})^{(p+2)/2}`.
pub fn equidistributed_error(eta: &[f64], complexity: f64, p: usize) -> f64 {
    let h = 0.5 * (p as f64 + 2.0);
    ALPHA.powf(h) * complexity.powf(-h) * power_sum(eta, p).powf(h)
}

/// `E* = (α/N)^{(p+1)/2} (Σ η^{2/(p+2)})^{(p+2)/2}`.
pub fn predicted_error(eta: &[f64], complexity: f64, p: usize) -> f64 {
    let pf = p as f64;
    (ALPHA / complexity).powf(0.5 * (pf + 1.0)) * power_sum(eta, p).powf(0.5 * (pf + 2.0))
}

/// Raise vanishing indicators to a fraction of the equidistributed error.
pub fn regularize(eta: &[f64], complexity: f64, p: usize) -> Vec<f64> {
    let floor = REGULARIZATION_FLOOR * equidistributed_error(eta, complexity, p);
    eta.iter().map(|v| v.max(floor)).collect()
}

/// Clamp densities to `[N/(10³|Ω|), 10⁶ N/|Ω|]` while keeping `Σ d|K| = N`.
pub fn clamp_density(density: &mut [f64], areas: &[f64], complexity: f64) {
    let omega: f64 = areas.iter().sum();
    let (lo, hi) = (complexity / (1e3 * omega), 1e6 * complexity / omega);
    for _ in 0..20 {
        let mut changed = false;
        for d in density.iter_mut() {
            let c = d.clamp(lo, hi);
            changed |= c != *d;
            *d = c;
        }
        let total: f64 = density.iter().zip(areas).map(|(d, a)| d * a).sum();
        let s = complexity / total;
        density.iter_mut().for_each(|d| *d *= s);
        if !changed {
            break;
        }
    }
}

/// Per-element sizing and the resulting metric.
#[derive(Clone, Debug)]
pub struct AdaptPlan {
    pub density: Vec<f64>,
    pub aspect_ratio: Vec<f64>,
    pub orientation: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub predicted_error: f64,
    pub complexity: f64,
}

impl AdaptPlan {
    /// `Σ d*_K |K|`.
    pub fn achieved_complexity(&self, areas: &[f64]) -> f64 {
        self.density.iter().zip(areas).map(|(d, a)| d * a).sum()
    }

    /// Vertex field rescaled so that its integral over `mesh` equals the planned complexity.
    pub fn vertex_field(&self, mesh: &Triangulation) -> Result<MetricField> {
        let field = vertex_metric_from_elements(mesh, &self.metrics)?;
        let total = field_complexity(mesh, &field);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "vertex field complexity {total}"
            )));
        }
        let s = self.complexity / total;
        MetricField::new(field.metrics.iter().map(|m| m.scale(s)).collect())
    }
}

/// `∫ sqrt(det M)` of a vertex field under log-Euclidean interpolation, by the edge-midpoint rule.
pub fn field_complexity(mesh: &Triangulation, field: &MetricField) -> f64 {
    let logd: Vec<f64> = field.metrics.iter().map(|m| 0.5 * m.det().ln()).collect();
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let mid = |a: usize, b: usize| (0.5 * (logd[t[a]] + logd[t[b]])).exp();
            mesh.area(k) * (mid(0, 1) + mid(1, 2) + mid(2, 0)) / 3.0
        })
        .sum()
}

/// Combine densities with anisotropy into element metrics.
pub fn build_plan(
    density: &[f64],
    aniso: &[AnisotropyResult],
    predicted_error: f64,
    complexity: f64,
) -> Result<AdaptPlan> {
    check_len(density.len(), aniso.len())?;
    let metrics = density
        .iter()
        .zip(aniso)
        .map(|(d, a)| {
            MetricDecomposition {
                density: *d,
                aspect_ratio: a.aspect_ratio,
                orientation: a.orientation,
            }
            .compose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdaptPlan {
        density: density.to_vec(),
        aspect_ratio: aniso.iter().map(|a| a.aspect_ratio).collect(),
        orientation: aniso.iter().map(|a| a.orientation).collect(),
        metrics,
        predicted_error,
        complexity,
    })
}

/// Full sizing step: optional regularisation, optimal density, clamping and
/// metric synthesis. `size_eta` drives the density (energy or goal
/// indicator); `energy_eta` only enters `E*`.
pub fn plan(
    areas: &[f64],
    size_eta: &[f64],
    energy_eta: &[f64],
    aniso: &[AnisotropyResult],
    complexity: f64,
    p: usize,
    regularized: bool,
) -> Result<AdaptPlan> {
    check_len(areas.len(), size_eta.len())?;
    let eta = if regularized {
        regularize(size_eta, complexity, p)
    } else {
        size_eta.to_vec()
    };
    let mut d = optimal_density(&eta, areas, complexity, p)?;
    clamp_density(&mut d, areas, complexity);
    build_plan(
        &d,
        aniso,
        predicted_error(energy_eta, complexity, p),
        complexity,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abar_examples() {
        assert_eq!(abar(0.0, 0.3, 2), 0.0);
        for p in 1..4 {
            assert_eq!(abar(1.0, 1.0, p), 1.0);
        }
    }

    #[test]
    fn density_examples() {
        let d = optimal_density(&[0.5; 4], &[0.25; 4], 10.0, 2).unwrap();
        assert!(d.iter().all(|v| (v - 10.0).abs() < 1e-12));
        for p in 1..4 {
            let eta2_ratio = 2f64.powi(p as i32 + 2);
            let d = optimal_density(&[1.0, eta2_ratio.sqrt()], &[1.0, 1.0], 3.0, p).unwrap();
            assert!((d[1] / d[0] - 2.0).abs() < 1e-12);
        }
        let d = optimal_density(&[0.0; 3], &[1.0, 2.0, 1.0], 8.0, 1).unwrap();
        assert!(d.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn predicted_error_examples() {
        for p in 1..4 {
            assert!((predicted_error(&[1.0], ALPHA, p) - 1.0).abs() < 1e-14);
            let a = predicted_error(&[0.3, 0.7, 0.1], 50.0, p);
            let b = predicted_error(&[0.9, 2.1, 0.3], 50.0, p);
            assert!((b / a - 3.0).abs() < 1e-12);
            let e1 = equidistributed_error(&[1.0], 10.0, p);
            let e2 = equidistributed_error(&[1.0], 20.0, p);
            assert!((e2 / e1 - 2f64.powf(-(p as f64 + 2.0) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn regularize_floor() {
        let eta = [1.0, 0.0, 0.5];
        let e = equidistributed_error(&eta, 30.0, 2);
        let r = regularize(&eta, 30.0, 2);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[1], 0.1 * e);
        assert_eq!(r[2], 0.5_f64.max(0.1 * e));
    }

    #[test]
    fn clamp_conserves() {
        let areas = [0.25; 4];
        let mut d = vec![1e-9, 1.0, 1.0, 1e12];
        clamp_density(&mut d, &areas, 40.0);
        let total: f64 = d.iter().zip(&areas).map(|(a, b)| a * b).sum();
        assert!((total - 40.0).abs() < 1e-10 * 40.0);
        assert!(d[0] > 0.0);
    }
}
