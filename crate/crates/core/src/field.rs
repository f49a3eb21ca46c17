//! Per-vertex metric fields and their evaluation over a background mesh.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::mesh::Triangulation;
use crate::metric::{Metric, MetricEval, Sym2};

/// How a vertex field is evaluated between vertices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    /// Barycentric mean of matrix logarithms.
    #[default]
    LogEuclidean,
}

#[derive(Clone, Debug)]
pub struct MetricField {
    pub metrics: Vec<Metric>,
    pub interpolation: Interpolation,
}

impl MetricField {
    pub fn new(metrics: Vec<Metric>) -> Result<Self> {
        if let Some((i, m)) = metrics.iter().enumerate().find(|(_, m)| !m.is_spd()) {
            return Err(Error::InvalidMetric(format!("vertex {i}: {m:?}")));
        }
        Ok(Self {
            metrics,
            interpolation: Interpolation::LogEuclidean,
        })
    }

    pub fn len(&self) -> usize {
        self.metrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }
}

/// Vertex field from element metrics by area-weighted log-Euclidean averaging.
pub fn vertex_metric_from_elements(
    mesh: &Triangulation,
    element_metrics: &[Metric],
) -> Result<MetricField> {
    crate::error::check_len(mesh.num_elements(), element_metrics.len())?;
    let logs: Vec<Sym2> = element_metrics.iter().map(Metric::log).collect();
    let mut acc = vec![Sym2::zero(); mesh.num_vertices()];
    let mut weight = vec![0.0; mesh.num_vertices()];
    for (k, t) in mesh.triangles().iter().enumerate() {
        let a = mesh.area(k);
        for &v in t {
            acc[v] = acc[v].add(&logs[k].scale(a));
            weight[v] += a;
        }
    }
    let mut out = Vec::with_capacity(acc.len());
    for (v, (s, w)) in acc.iter().zip(&weight).enumerate() {
        if *w <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not used by any element"
            )));
        }
        out.push(Metric::exp(&s.scale(1.0 / w)));
    }
    MetricField::new(out)
}

/// A vertex field living on a (background) mesh, evaluated by point location.
pub struct BackgroundMetric<'a> {
    mesh: &'a Triangulation,
    logs: Vec<Sym2>,
    hint: Cell<usize>,
}

impl<'a> BackgroundMetric<'a> {
    pub fn new(mesh: &'a Triangulation, field: &MetricField) -> Result<Self> {
        crate::error::check_len(mesh.num_vertices(), field.len())?;
        Ok(Self {
            mesh,
            logs: field.metrics.iter().map(Metric::log).collect(),
            hint: Cell::new(0),
        })
    }

    pub fn mesh(&self) -> &Triangulation {
        self.mesh
    }
}

impl MetricEval for BackgroundMetric<'_> {
    fn metric_at(&self, x: [f64; 2]) -> Metric {
        let (k, b) = self.mesh.locate(x, self.hint.get());
        self.hint.set(k);
        let t = self.mesh.triangles()[k];
        // clip for points slightly outside the background mesh
        let mut w = b.map(|v| v.max(0.0));
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let mut acc = Sym2::zero();
        for i in 0..3 {
            acc = acc.add(&self.logs[t[i]].scale(w[i]));
        }
        Metric::exp(&acc)
    }
}
