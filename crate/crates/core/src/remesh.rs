//! Metric-conforming remeshing by local operations (split, collapse, flip,
//! smoothing), plus file exchange with an external metric-based generator.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BackgroundMetric, MetricField};
use crate::mesh::{read_mesh, write_mesh, write_metric, Triangulation};
use crate::metric::{riemannian_edge_length, signed_area, Metric, MetricEval, UNIT_EDGE_SQUARED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Builtin,
    External,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "builtin" => Ok(Self::Builtin),
            "external" => Ok(Self::External),
            _ => Err(Error::Config(format!("unknown remesher backend `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemeshConfig {
    pub length_low: f64,
    pub length_high: f64,
    pub max_passes: usize,
    /// Smoothing never lets the worst incident quality drop below this.
    pub quality_floor: f64,
    pub backend: Backend,
}

impl Default for RemeshConfig {
    fn default() -> Self {
        Self {
            length_low: std::f64::consts::FRAC_1_SQRT_2,
            length_high: std::f64::consts::SQRT_2,
            max_passes: 40,
            quality_floor: 0.0,
            backend: Backend::Builtin,
        }
    }
}

impl RemeshConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.length_low && self.length_low < 1.0 && 1.0 < self.length_high) {
            return Err(Error::Config(format!(
                "edge-length band [{}, {}] must satisfy 0 < lo < 1 < hi",
                self.length_low, self.length_high
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RemeshStats {
    pub passes: usize,
    pub splits: usize,
    pub collapses: usize,
    pub flips: usize,
    pub moves: usize,
    pub out_of_band: f64,
}

/// Remesh `mesh` towards the vertex field `field` defined on it.
pub fn remesh(
    mesh: &Triangulation,
    field: &MetricField,
    config: &RemeshConfig,
) -> Result<Triangulation> {
    let bg = BackgroundMetric::new(mesh, field)?;
    remesh_with(mesh, &bg, config).map(|(m, _)| m)
}

/// Remesh towards an arbitrary metric field.
pub fn remesh_with(
    mesh: &Triangulation,
    metric: &dyn MetricEval,
    config: &RemeshConfig,
) -> Result<(Triangulation, RemeshStats)> {
    config.validate()?;
    let mut w = Work::new(mesh, metric, config);
    let mut stats = RemeshStats::default();
    for pass in 0..config.max_passes {
        stats.passes = pass + 1;
        let s = w.split_sweep();
        let c = w.collapse_sweep();
        let mut f = 0;
        for _ in 0..8 {
            let n = w.flip_sweep();
            f += n;
            if n == 0 {
                break;
            }
        }
        let m = w.smooth_sweep() + w.smooth_sweep();
        f += w.flip_sweep();
        stats.splits += s;
        stats.collapses += c;
        stats.flips += f;
        stats.moves += m;
        stats.out_of_band = w.out_of_band_fraction();
        log::debug!(
            "remesh pass {pass}: {s} splits, {c} collapses, {f} flips, {m} moves, {:.3} out of band",
            stats.out_of_band
        );
        if stats.out_of_band < 0.01 || (s == 0 && c == 0 && f == 0 && pass > 0) {
            break;
        }
    }
    let out = w.finish()?;
    Ok((out, stats))
}

/// Edge lengths of `mesh` measured in `metric`, normalised so a unit
/// triangle has unit edges.
pub fn metric_edge_lengths(mesh: &Triangulation, metric: &dyn MetricEval) -> Vec<f64> {
    let p = mesh.vertices();
    mesh.edges()
        .iter()
        .map(|e| {
            riemannian_edge_length(metric, p[e.vertices[0]], p[e.vertices[1]])
                / UNIT_EDGE_SQUARED.sqrt()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Interior,
    Corner,
    /// On a straight boundary segment with the given tag.
    Boundary(u32),
}

const DEAD: [usize; 3] = [usize::MAX; 3];

struct Work<'a> {
    pts: Vec<[f64; 2]>,
    kind: Vec<Kind>,
    tris: Vec<[usize; 3]>,
    bnd: HashMap<[usize; 2], u32>,
    metric: &'a dyn MetricEval,
    lo: f64,
    hi: f64,
    quality_floor: f64,
}

fn key(a: usize, b: usize) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Rotate `t` so that `a` comes first.
fn rotate_to(t: [usize; 3], a: usize) -> [usize; 3] {
    let i = t.iter().position(|&v| v == a).expect("vertex in triangle");
    [t[i], t[(i + 1) % 3], t[(i + 2) % 3]]
}

impl<'a> Work<'a> {
    fn new(mesh: &Triangulation, metric: &'a dyn MetricEval, config: &RemeshConfig) -> Self {
        let pts = mesh.vertices().to_vec();
        let bnd: HashMap<[usize; 2], u32> = mesh
            .boundary_tags()
            .into_iter()
            .map(|(e, t)| (key(e[0], e[1]), t))
            .collect();
        let mut incident: Vec<Vec<([usize; 2], u32)>> = vec![Vec::new(); pts.len()];
        for (&e, &t) in &bnd {
            incident[e[0]].push((e, t));
            incident[e[1]].push((e, t));
        }
        let kind = incident
            .iter()
            .enumerate()
            .map(|(v, list)| match list.len() {
                0 => Kind::Interior,
                2 => {
                    let other = |e: [usize; 2]| if e[0] == v { e[1] } else { e[0] };
                    let d0 = sub(pts[other(list[0].0)], pts[v]);
                    let d1 = sub(pts[other(list[1].0)], pts[v]);
                    let straight = cross(d0, d1).abs()
                        <= 1e-12 * (d0[0].hypot(d0[1]) * d1[0].hypot(d1[1]))
                        && d0[0] * d1[0] + d0[1] * d1[1] < 0.0;
                    if straight && list[0].1 == list[1].1 {
                        Kind::Boundary(list[0].1)
                    } else {
                        Kind::Corner
                    }
                }
                _ => Kind::Corner,
            })
            .collect();
        Self {
            pts,
            kind,
            tris: mesh.triangles().to_vec(),
            bnd,
            metric,
            lo: config.length_low,
            hi: config.length_high,
            quality_floor: config.quality_floor,
        }
    }

    fn length(&self, a: usize, b: usize) -> f64 {
        self.length_pts(self.pts[a], self.pts[b])
    }

    fn length_pts(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        riemannian_edge_length(self.metric, x, y) / UNIT_EDGE_SQUARED.sqrt()
    }

    fn scaled_metric(&self, x: [f64; 2]) -> Metric {
        self.metric.metric_at(x).scale(1.0 / UNIT_EDGE_SQUARED)
    }

    fn orient_ok(&self, p: [[f64; 2]; 3]) -> bool {
        let a = signed_area(&p);
        let scale = [sub(p[1], p[0]), sub(p[2], p[1]), sub(p[0], p[2])]
            .iter()
            .map(|d| d[0] * d[0] + d[1] * d[1])
            .fold(0.0, f64::max);
        a > 1e-12 * scale
    }

    /// Metric shape quality: 1 for a triangle equilateral in the metric.
    fn quality(&self, p: [[f64; 2]; 3]) -> f64 {
        let c = [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ];
        let m = self.scaled_metric(c);
        let area = signed_area(&p) * m.det().sqrt();
        let s: f64 = (0..3).map(|i| m.quad(sub(p[(i + 1) % 3], p[i]))).sum();
        4.0 * 3f64.sqrt() * area / s
    }

    fn tri_pts(&self, t: [usize; 3]) -> [[f64; 2]; 3] {
        t.map(|v| self.pts[v])
    }

    fn adjacency(&self) -> (HashMap<[usize; 2], Vec<usize>>, Vec<Vec<usize>>) {
        let mut edges: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
        let mut ring = vec![Vec::new(); self.pts.len()];
        for (k, t) in self.tris.iter().enumerate() {
            if *t == DEAD {
                continue;
            }
            for j in 0..3 {
                edges.entry(key(t[j], t[(j + 1) % 3])).or_default().push(k);
                ring[t[j]].push(k);
            }
        }
        (edges, ring)
    }

    fn sorted_edges(&self, edges: &HashMap<[usize; 2], Vec<usize>>) -> Vec<[usize; 2]> {
        let mut keys: Vec<[usize; 2]> = edges.keys().copied().collect();
        keys.sort_unstable();
        keys
    }

    fn out_of_band_fraction(&self) -> f64 {
        let (edges, _) = self.adjacency();
        let n = edges.len();
        let bad = edges
            .keys()
            .filter(|e| {
                let l = self.length(e[0], e[1]);
                l < self.lo || l > self.hi
            })
            .count();
        bad as f64 / n.max(1) as f64
    }

    fn metric_midpoint(&self, a: usize, b: usize) -> [f64; 2] {
        let (x, y) = (self.pts[a], self.pts[b]);
        let at = |t: f64| [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])];
        let (mut lo, mut hi) = (0.25, 0.75);
        for _ in 0..6 {
            let t = 0.5 * (lo + hi);
            let m = at(t);
            if self.length_pts(x, m) > self.length_pts(m, y) {
                hi = t;
            } else {
                lo = t;
            }
        }
        at(0.5 * (lo + hi))
    }

    fn split_sweep(&mut self) -> usize {
        let (edges, _) = self.adjacency();
        let mut long: Vec<([usize; 2], f64)> = self
            .sorted_edges(&edges)
            .into_iter()
            .map(|e| (e, self.length(e[0], e[1])))
            .filter(|(_, l)| *l > self.hi)
            .collect();
        long.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut touched = vec![false; self.tris.len()];
        let mut count = 0;
        for (e, _) in long {
            let adj = &edges[&e];
            if adj.iter().any(|&t| touched[t]) {
                continue;
            }
            let m = self.metric_midpoint(e[0], e[1]);
            // reject splits that would create an inverted half
            let mut halves = Vec::new();
            for &t in adj {
                let tri = self.tris[t];
                let c = tri.iter().copied().find(|v| !e.contains(v)).unwrap();
                let r = rotate_to(tri, c);
                // r = [c, x, y] with edge x → y
                halves.push((t, r[1], r[2], c));
            }
            let ok = halves.iter().all(|&(_, x, y, c)| {
                self.orient_ok([self.pts[x], m, self.pts[c]])
                    && self.orient_ok([m, self.pts[y], self.pts[c]])
            });
            if !ok {
                continue;
            }
            let v = self.pts.len();
            self.pts.push(m);
            let kind = match self.bnd.remove(&e) {
                Some(tag) => {
                    self.bnd.insert(key(e[0], v), tag);
                    self.bnd.insert(key(v, e[1]), tag);
                    Kind::Boundary(tag)
                }
                None => Kind::Interior,
            };
            self.kind.push(kind);
            for (t, x, y, c) in halves {
                self.tris[t] = [x, v, c];
                self.tris.push([v, y, c]);
                touched[t] = true;
                touched.push(true);
            }
            count += 1;
        }
        count
    }

    fn can_remove(&self, r: usize, boundary_edge: bool) -> bool {
        match self.kind[r] {
            Kind::Corner => false,
            Kind::Boundary(_) => boundary_edge,
            Kind::Interior => true,
        }
    }

    fn try_collapse(&mut self, r: usize, k: usize, shared: &[usize], ring: &[Vec<usize>]) -> bool {
        let boundary_edge = self.bnd.contains_key(&key(r, k));
        if !self.can_remove(r, boundary_edge) {
            return false;
        }
        // link condition
        let nbrs = |v: usize| {
            let mut s: Vec<usize> = ring[v]
                .iter()
                .flat_map(|&t| self.tris[t])
                .filter(|&w| w != v)
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let (nr, nk) = (nbrs(r), nbrs(k));
        let common = nr.iter().filter(|v| nk.binary_search(v).is_ok()).count();
        if common != shared.len() {
            return false;
        }
        let target = self.pts[k];
        for &t in &ring[r] {
            if shared.contains(&t) {
                continue;
            }
            let tri = self.tris[t];
            let p = tri.map(|v| if v == r { target } else { self.pts[v] });
            if !self.orient_ok(p) {
                return false;
            }
        }
        for &v in &nr {
            if v != k
                && !shared.iter().any(|&t| self.tris[t].contains(&v))
                && self.length(k, v) > self.hi
            {
                return false;
            }
        }
        for &t in &ring[r] {
            if shared.contains(&t) {
                self.tris[t] = DEAD;
            } else {
                for v in self.tris[t].iter_mut() {
                    if *v == r {
                        *v = k;
                    }
                }
            }
        }
        if let Some(tag) = self.bnd.remove(&key(r, k)) {
            let other = self
                .bnd
                .keys()
                .copied()
                .find(|e| e.contains(&r))
                .expect("boundary vertex has two boundary edges");
            self.bnd.remove(&other);
            let o = if other[0] == r { other[1] } else { other[0] };
            self.bnd.insert(key(k, o), tag);
        }
        true
    }

    fn collapse_sweep(&mut self) -> usize {
        let (edges, ring) = self.adjacency();
        let mut short: Vec<([usize; 2], f64)> = self
            .sorted_edges(&edges)
            .into_iter()
            .map(|e| (e, self.length(e[0], e[1])))
            .filter(|(_, l)| *l < self.lo)
            .collect();
        short.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut touched = vec![false; self.tris.len()];
        let mut count = 0;
        for (e, _) in short {
            if ring[e[0]]
                .iter()
                .chain(ring[e[1]].iter())
                .any(|&t| touched[t])
            {
                continue;
            }
            let shared = &edges[&e];
            let order = if matches!(self.kind[e[0]], Kind::Interior)
                || !matches!(self.kind[e[1]], Kind::Interior)
            {
                [(e[0], e[1]), (e[1], e[0])]
            } else {
                [(e[1], e[0]), (e[0], e[1])]
            };
            for (r, k) in order {
                if self.try_collapse(r, k, shared, &ring) {
                    for &t in ring[r].iter().chain(ring[k].iter()) {
                        touched[t] = true;
                    }
                    count += 1;
                    break;
                }
            }
        }
        count
    }

    fn flip_sweep(&mut self) -> usize {
        let (edges, _) = self.adjacency();
        let mut touched = vec![false; self.tris.len()];
        let mut count = 0;
        for e in self.sorted_edges(&edges) {
            let adj = &edges[&e];
            if adj.len() != 2 || adj.iter().any(|&t| touched[t]) {
                continue;
            }
            let (t1, t2) = (adj[0], adj[1]);
            let c = self.tris[t1]
                .iter()
                .copied()
                .find(|v| !e.contains(v))
                .unwrap();
            let r1 = rotate_to(self.tris[t1], c); // [c, a, b]
            let (a, b) = (r1[1], r1[2]);
            let d = self.tris[t2]
                .iter()
                .copied()
                .find(|v| !e.contains(v))
                .unwrap();
            if edges.contains_key(&key(c, d)) {
                continue;
            }
            let (pa, pb, pc, pd) = (self.pts[a], self.pts[b], self.pts[c], self.pts[d]);
            let n1 = [pa, pd, pc];
            let n2 = [pd, pb, pc];
            if !self.orient_ok(n1) || !self.orient_ok(n2) {
                continue;
            }
            let centre = [
                0.25 * (pa[0] + pb[0] + pc[0] + pd[0]),
                0.25 * (pa[1] + pb[1] + pc[1] + pd[1]),
            ];
            let m = self.metric.metric_at(centre);
            let map = |x: [f64; 2]| {
                let r11 = m.m11.sqrt();
                let r12 = m.m12 / r11;
                let r22 = (m.m22 - r12 * r12).max(0.0).sqrt();
                [r11 * x[0] + r12 * x[1], r22 * x[1]]
            };
            // (c, a, b) is counterclockwise; d opposite
            if !in_circle(map(pc), map(pa), map(pb), map(pd)) {
                continue;
            }
            self.tris[t1] = [a, d, c];
            self.tris[t2] = [d, b, c];
            touched[t1] = true;
            touched[t2] = true;
            count += 1;
        }
        count
    }

    fn smooth_sweep(&mut self) -> usize {
        let (edges, ring) = self.adjacency();
        let mut moved = 0;
        for v in 0..self.pts.len() {
            if ring[v].is_empty() || matches!(self.kind[v], Kind::Corner) {
                continue;
            }
            let mut nb: Vec<usize> = ring[v]
                .iter()
                .flat_map(|&t| self.tris[t])
                .filter(|&w| w != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            let x = self.pts[v];
            let mut target = [0.0, 0.0];
            for &j in &nb {
                let l = self.length(v, j).max(1e-12);
                let xj = self.pts[j];
                target[0] += xj[0] + (x[0] - xj[0]) / l;
                target[1] += xj[1] + (x[1] - xj[1]) / l;
            }
            target = [target[0] / nb.len() as f64, target[1] / nb.len() as f64];
            let mut step = sub(target, x);
            if let Kind::Boundary(_) = self.kind[v] {
                // slide along the boundary line between the two boundary neighbours
                let bn: Vec<usize> = nb
                    .iter()
                    .copied()
                    .filter(|&j| edges.get(&key(v, j)).is_some_and(|a| a.len() == 1))
                    .collect();
                if bn.len() != 2 {
                    continue;
                }
                let (p0, p1) = (self.pts[bn[0]], self.pts[bn[1]]);
                let dir = sub(p1, p0);
                let len2 = dir[0] * dir[0] + dir[1] * dir[1];
                let s =
                    ((x[0] + step[0] - p0[0]) * dir[0] + (x[1] + step[1] - p0[1]) * dir[1]) / len2;
                let s = s.clamp(0.1, 0.9);
                let s0 = ((x[0] - p0[0]) * dir[0] + (x[1] - p0[1]) * dir[1]) / len2;
                let ds = s - s0;
                step = [ds * dir[0], ds * dir[1]];
            }
            let before = ring[v]
                .iter()
                .map(|&t| self.quality(self.tri_pts(self.tris[t])))
                .fold(f64::INFINITY, f64::min);
            let mut accepted = false;
            for relax in [0.5, 0.25] {
                let y = [x[0] + relax * step[0], x[1] + relax * step[1]];
                self.pts[v] = y;
                let ok = ring[v]
                    .iter()
                    .all(|&t| self.orient_ok(self.tri_pts(self.tris[t])));
                if ok {
                    let after = ring[v]
                        .iter()
                        .map(|&t| self.quality(self.tri_pts(self.tris[t])))
                        .fold(f64::INFINITY, f64::min);
                    if after >= before && after >= self.quality_floor.min(before) {
                        accepted = true;
                        break;
                    }
                }
                self.pts[v] = x;
            }
            if accepted {
                moved += 1;
            }
        }
        moved
    }

    fn finish(self) -> Result<Triangulation> {
        let mut map = vec![usize::MAX; self.pts.len()];
        let mut pts = Vec::new();
        let mut tris = Vec::new();
        for t in self.tris.iter().filter(|t| **t != DEAD) {
            let mut nt = [0; 3];
            for (i, &v) in t.iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = pts.len();
                    pts.push(self.pts[v]);
                }
                nt[i] = map[v];
            }
            tris.push(nt);
        }
        let mut tags: Vec<([usize; 2], u32)> = self
            .bnd
            .iter()
            .map(|(e, &t)| ([map[e[0]], map[e[1]]], t))
            .collect();
        tags.sort_unstable();
        if tags.iter().any(|(e, _)| e.contains(&usize::MAX)) {
            return Err(Error::Remesh("boundary edge lost during remeshing".into()));
        }
        Triangulation::new(pts, tris, &tags)
            .map_err(|e| Error::Remesh(format!("invalid output mesh: {e}")))
    }
}

/// True when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `(a, b, c)`.
fn in_circle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (ax, ay) = (a[0] - d[0], a[1] - d[1]);
    let (bx, by) = (b[0] - d[0], b[1] - d[1]);
    let (cx, cy) = (c[0] - d[0], c[1] - d[1]);
    let det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay);
    let scale = [ax, ay, bx, by, cx, cy]
        .iter()
        .map(|v| v * v)
        .fold(0.0, f64::max);
    det > 1e-10 * scale * scale
}

/// Paths written by [`export_external`].
#[derive(Clone, Debug)]
pub struct ExternalFiles {
    pub mesh: PathBuf,
    pub metric: PathBuf,
    pub output: PathBuf,
}

impl ExternalFiles {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let d = dir.as_ref();
        Self {
            mesh: d.join("background.mesh"),
            metric: d.join("background.sol"),
            output: d.join("adapted.mesh"),
        }
    }
}

/// Write the background mesh and its vertex metric for an external generator.
pub fn export_external(
    mesh: &Triangulation,
    field: &MetricField,
    dir: impl AsRef<Path>,
) -> Result<ExternalFiles> {
    crate::error::check_len(mesh.num_vertices(), field.len())?;
    std::fs::create_dir_all(dir.as_ref())?;
    let files = ExternalFiles::in_dir(dir);
    write_mesh(mesh, &files.mesh)?;
    write_metric(&field.metrics, &files.metric)?;
    Ok(files)
}

/// Read the generator output back.
pub fn import_external(files: &ExternalFiles) -> Result<Triangulation> {
    read_mesh(&files.output)
}
