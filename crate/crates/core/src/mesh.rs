//! Conforming triangulations with tagged boundary edges, MEDIT I/O and a few
//! structured generators.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::signed_area;

/// A mesh edge. `vertices` is sorted ascending; the canonical normal is the
/// unit tangent from the lower to the higher vertex rotated by +90°.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Boundary tag, `None` for interior edges.
    pub tag: Option<u32>,
    /// First adjacent element and the second one for interior edges.
    pub elements: (usize, Option<usize>),
    pub normal: [f64; 2],
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tag.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    vertex_refs: Vec<u32>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `j` of element `k` joins vertices `j` and `j+1 (mod 3)`.
    element_edges: Vec<[usize; 3]>,
    /// `+1` when the canonical normal of the local edge points out of the element.
    edge_signs: Vec<[f64; 3]>,
}

impl Triangulation {
    /// Build from counterclockwise triangles. Boundary edges that are not
    /// listed in `boundary_tags` get tag 0.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_tags: &[([usize; 2], u32)],
    ) -> Result<Self> {
        let nv = vertices.len();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {k} references missing vertex"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {k} repeats a vertex")));
            }
            let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            let a = signed_area(&p);
            if !(a > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {k} has non-positive signed area {a:e}"
                )));
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut element_edges = Vec::with_capacity(triangles.len());
        let mut edge_signs = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            let mut signs = [0.0; 3];
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = match lookup.get(&key) {
                    Some(&id) => {
                        let e = &mut edges[id];
                        if e.elements.1.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "edge {key:?} shared by more than two triangles"
                            )));
                        }
                        e.elements.1 = Some(k);
                        id
                    }
                    None => {
                        let (p, q) = (vertices[key[0]], vertices[key[1]]);
                        let d = [q[0] - p[0], q[1] - p[1]];
                        let length = d[0].hypot(d[1]);
                        edges.push(Edge {
                            vertices: key,
                            tag: None,
                            elements: (k, None),
                            normal: [-d[1] / length, d[0] / length],
                            length,
                        });
                        lookup.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                local[j] = id;
                // outward normal of the counterclockwise edge a → b is (dy, -dx)
                let (pa, pb) = (vertices[a], vertices[b]);
                let out = [pb[1] - pa[1], -(pb[0] - pa[0])];
                let n = edges[id].normal;
                signs[j] = if n[0] * out[0] + n[1] * out[1] > 0.0 {
                    1.0
                } else {
                    -1.0
                };
            }
            element_edges.push(local);
            edge_signs.push(signs);
        }

        let tags: HashMap<[usize; 2], u32> = boundary_tags
            .iter()
            .map(|(e, t)| ([e[0].min(e[1]), e[0].max(e[1])], *t))
            .collect();
        let mut vertex_refs = vec![0; nv];
        for e in edges.iter_mut() {
            if e.elements.1.is_none() {
                let tag = tags.get(&e.vertices).copied().unwrap_or(0);
                e.tag = Some(tag);
                for &v in &e.vertices {
                    if vertex_refs[v] == 0 {
                        vertex_refs[v] = tag;
                    }
                }
            }
        }
        for (k, t) in triangles.iter().enumerate() {
            for j in 0..3 {
                let e = &edges[element_edges[k][j]];
                let (a, b) = (t[j], t[(j + 1) % 3]);
                let forward = a < b;
                // the interior neighbour must traverse the edge the other way
                if let (Some(o), true) = (e.elements.1, e.elements.0 == k) {
                    let to = &triangles[o];
                    let jo = element_edges[o]
                        .iter()
                        .position(|&x| x == element_edges[k][j])
                        .unwrap();
                    if (to[jo] < to[(jo + 1) % 3]) == forward {
                        return Err(Error::InvalidMesh(format!(
                            "triangles {k} and {o} have inconsistent orientation"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            vertices,
            vertex_refs,
            triangles,
            edges,
            element_edges,
            edge_signs,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertex_refs(&self) -> &[u32] {
        &self.vertex_refs
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn element_edges(&self, k: usize) -> [usize; 3] {
        self.element_edges[k]
    }

    /// `sgn(n_e · n_K)` for each local edge of element `k`.
    pub fn edge_signs(&self, k: usize) -> [f64; 3] {
        self.edge_signs[k]
    }

    pub fn element_points(&self, k: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[k];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    pub fn area(&self, k: usize) -> f64 {
        signed_area(&self.element_points(k))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements()).map(|k| self.area(k)).sum()
    }

    pub fn centroid(&self, k: usize) -> [f64; 2] {
        let p = self.element_points(k);
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    }

    /// Smallest altitude `2|K| / longest edge` of element `k`.
    pub fn min_altitude(&self, k: usize) -> f64 {
        let longest = self.element_edges[k]
            .iter()
            .map(|&e| self.edges[e].length)
            .fold(0.0, f64::max);
        2.0 * self.area(k) / longest
    }

    /// Element across local edge `j` of element `k`.
    pub fn neighbor(&self, k: usize, j: usize) -> Option<usize> {
        let e = &self.edges[self.element_edges[k][j]];
        match e.elements {
            (a, Some(b)) if a == k => Some(b),
            (a, Some(_)) => Some(a),
            _ => None,
        }
    }

    pub fn neighbors(&self, k: usize) -> [Option<usize>; 3] {
        [
            self.neighbor(k, 0),
            self.neighbor(k, 1),
            self.neighbor(k, 2),
        ]
    }

    /// Elements incident to each vertex.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (k, t) in self.triangles.iter().enumerate() {
            for &v in t {
                out[v].push(k);
            }
        }
        out
    }

    /// Barycentric coordinates of `x` in element `k`.
    pub fn barycentric(&self, k: usize, x: [f64; 2]) -> [f64; 3] {
        let p = self.element_points(k);
        let a = signed_area(&p);
        let l0 = signed_area(&[x, p[1], p[2]]) / a;
        let l1 = signed_area(&[p[0], x, p[2]]) / a;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Element containing `x`, found by walking from `hint`; falls back to the
    /// element with the largest minimum barycentric coordinate.
    pub fn locate(&self, x: [f64; 2], hint: usize) -> (usize, [f64; 3]) {
        let tol = -1e-12;
        let mut k = hint.min(self.num_elements().saturating_sub(1));
        for _ in 0..self.num_elements() + 1 {
            let b = self.barycentric(k, x);
            let (jmin, bmin) =
                b.iter()
                    .copied()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                    );
            if bmin >= tol {
                return (k, b);
            }
            // the vertex opposite local edge j is j + 2
            match self.neighbor(k, (jmin + 1) % 3) {
                Some(n) => k = n,
                None => break,
            }
        }
        let mut best = (0, [0.0; 3], f64::NEG_INFINITY);
        for k in 0..self.num_elements() {
            let b = self.barycentric(k, x);
            let m = b[0].min(b[1]).min(b[2]);
            if m > best.2 {
                best = (k, b, m);
                if m >= tol {
                    break;
                }
            }
        }
        (best.0, best.1)
    }

    /// Boundary edges as `(vertex pair, tag)`.
    pub fn boundary_tags(&self) -> Vec<([usize; 2], u32)> {
        self.edges
            .iter()
            .filter_map(|e| e.tag.map(|t| (e.vertices, t)))
            .collect()
    }

    fn with_vertex_refs(mut self, refs: Vec<u32>) -> Self {
        if refs.len() == self.vertex_refs.len() {
            self.vertex_refs = refs;
        }
        self
    }
}

/// Structured `nx × ny` grid of the rectangle, two triangles per cell.
/// Tags: bottom 1, right 2, top 3, left 4.
pub fn rectangle(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<Triangulation> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("grid needs at least one cell".into()));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut tags = Vec::new();
    for i in 0..nx {
        tags.push(([id(i, 0), id(i + 1, 0)], 1));
        tags.push(([id(i, ny), id(i + 1, ny)], 3));
    }
    for j in 0..ny {
        tags.push(([id(nx, j), id(nx, j + 1)], 2));
        tags.push(([id(0, j), id(0, j + 1)], 4));
    }
    Triangulation::new(vertices, triangles, &tags)
}

/// `n × n × 2` mesh of the unit square.
pub fn unit_square(n: usize) -> Result<Triangulation> {
    rectangle(0.0, 1.0, 0.0, 1.0, n, n)
}

/// `[-1,1]² \ (0,1]×[-1,0)` meshed with `n × n` cells per unit square,
/// two triangles per cell. Every boundary edge has tag 1.
pub fn l_shape(n: usize) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidInput("grid needs at least one cell".into()));
    }
    let m = 2 * n;
    let h = 1.0 / n as f64;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let inside_cell = |i: usize, j: usize| !(i >= n && j < n);
    let mut id = |i: usize, j: usize, vertices: &mut Vec<[f64; 2]>| {
        *index.entry((i, j)).or_insert_with(|| {
            vertices.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if !inside_cell(i, j) {
                continue;
            }
            let a = id(i, j, &mut vertices);
            let b = id(i + 1, j, &mut vertices);
            let c = id(i + 1, j + 1, &mut vertices);
            let d = id(i, j + 1, &mut vertices);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mesh = Triangulation::new(vertices.clone(), triangles.clone(), &[])?;
    let tags: Vec<_> = mesh
        .boundary_tags()
        .into_iter()
        .map(|(e, _)| (e, 1))
        .collect();
    Triangulation::new(vertices, triangles, &tags)
}

/// Write a MEDIT ASCII mesh (1-based indices).
pub fn write_mesh(mesh: &Triangulation, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh))?;
    Ok(())
}

pub fn mesh_to_string(mesh: &Triangulation) -> String {
    let mut s = String::new();
    s.push_str("MeshVersionFormatted 2\n\nDimension 2\n\n");
    let _ = writeln!(s, "Vertices\n{}", mesh.num_vertices());
    for (p, r) in mesh.vertices.iter().zip(&mesh.vertex_refs) {
        let _ = writeln!(s, "{:.16e} {:.16e} {}", p[0], p[1], r);
    }
    let bnd: Vec<_> = mesh.edges.iter().filter(|e| e.is_boundary()).collect();
    let _ = writeln!(s, "\nEdges\n{}", bnd.len());
    for e in bnd {
        let _ = writeln!(
            s,
            "{} {} {}",
            e.vertices[0] + 1,
            e.vertices[1] + 1,
            e.tag.unwrap()
        );
    }
    let _ = writeln!(s, "\nTriangles\n{}", mesh.num_elements());
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {} 0", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s.push_str("\nEnd\n");
    s
}

struct Tokens<'a> {
    path: String,
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(path: &str, text: &'a str) -> Self {
        let mut items = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                items.push((ln + 1, tok));
            }
        }
        Self {
            path: path.to_string(),
            items,
            pos: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let line = self
            .items
            .get(self.pos.min(self.items.len().saturating_sub(1)))
            .map_or(0, |t| t.0);
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.items.get(self.pos).map(|t| t.1);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self
            .next()
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))?;
        tok.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("expected {what}, found `{tok}`"))
        })
    }

    fn index(&mut self, n: usize) -> Result<usize> {
        let i: usize = self.parse("index")?;
        if i == 0 || i > n {
            self.pos -= 1;
            return Err(self.err(format!("index {i} out of range 1..={n}")));
        }
        Ok(i - 1)
    }
}

/// Read a MEDIT ASCII mesh.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<Triangulation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&path.display().to_string(), &text)
}

pub fn parse_mesh(name: &str, text: &str) -> Result<Triangulation> {
    let mut tk = Tokens::new(name, text);
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut refs = Vec::new();
    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    let mut seen_end = false;
    while let Some(kw) = tk.next() {
        match kw {
            "MeshVersionFormatted" => {
                let _: u32 = tk.parse("version")?;
            }
            "Dimension" => {
                let d: u32 = tk.parse("dimension")?;
                if d != 2 {
                    tk.pos -= 1;
                    return Err(tk.err(format!("only 2D meshes are supported, got {d}")));
                }
            }
            "Vertices" => {
                let n: usize = tk.parse("vertex count")?;
                for _ in 0..n {
                    let x = tk.parse("coordinate")?;
                    let y = tk.parse("coordinate")?;
                    let r: i64 = tk.parse("reference")?;
                    vertices.push([x, y]);
                    refs.push(r.max(0) as u32);
                }
            }
            "Edges" => {
                let n: usize = tk.parse("edge count")?;
                for _ in 0..n {
                    let a = tk.index(vertices.len())?;
                    let b = tk.index(vertices.len())?;
                    let r: i64 = tk.parse("reference")?;
                    tags.push(([a, b], r.max(0) as u32));
                }
            }
            "Triangles" => {
                let n: usize = tk.parse("triangle count")?;
                for _ in 0..n {
                    let a = tk.index(vertices.len())?;
                    let b = tk.index(vertices.len())?;
                    let c = tk.index(vertices.len())?;
                    let _: i64 = tk.parse("reference")?;
                    triangles.push([a, b, c]);
                }
            }
            "Corners" | "RequiredVertices" | "RequiredEdges" | "Ridges" => {
                let n: usize = tk.parse("count")?;
                for _ in 0..n {
                    let _: usize = tk.parse("index")?;
                }
            }
            "End" => {
                seen_end = true;
                break;
            }
            other => {
                tk.pos -= 1;
                return Err(tk.err(format!("unknown section `{other}`")));
            }
        }
    }
    if !seen_end {
        return Err(tk.err("missing End"));
    }
    // generators do not always keep counterclockwise order
    for t in triangles.iter_mut() {
        if signed_area(&[vertices[t[0]], vertices[t[1]], vertices[t[2]]]) < 0.0 {
            t.swap(1, 2);
        }
    }
    Ok(Triangulation::new(vertices, triangles, &tags)?.with_vertex_refs(refs))
}

/// Write per-vertex symmetric tensors as a MEDIT `.sol` file.
pub fn write_metric(metrics: &[crate::metric::Metric], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, metric_to_string(metrics))?;
    Ok(())
}

pub fn metric_to_string(metrics: &[crate::metric::Metric]) -> String {
    let mut s = String::new();
    s.push_str("MeshVersionFormatted 2\n\nDimension 2\n\n");
    let _ = writeln!(s, "SolAtVertices\n{}\n1 3", metrics.len());
    for m in metrics {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", m.m11, m.m12, m.m22);
    }
    s.push_str("\nEnd\n");
    s
}

/// Read a `.sol` file holding one symmetric tensor per vertex.
pub fn read_metric(path: impl AsRef<Path>) -> Result<Vec<crate::metric::Metric>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut tk = Tokens::new(&path.display().to_string(), &text);
    let mut out = Vec::new();
    while let Some(kw) = tk.next() {
        match kw {
            "MeshVersionFormatted" | "Dimension" => {
                let _: u32 = tk.parse("integer")?;
            }
            "SolAtVertices" => {
                let n: usize = tk.parse("count")?;
                let nf: usize = tk.parse("field count")?;
                let ty: usize = tk.parse("field type")?;
                if nf != 1 || ty != 3 {
                    return Err(tk.err("expected a single symmetric tensor field (1 3)"));
                }
                for _ in 0..n {
                    let a = tk.parse("m11")?;
                    let b = tk.parse("m12")?;
                    let c = tk.parse("m22")?;
                    let m =
                        crate::metric::Metric::new(a, b, c).map_err(|e| tk.err(e.to_string()))?;
                    out.push(m);
                }
            }
            "End" => return Ok(out),
            other => {
                tk.pos -= 1;
                return Err(tk.err(format!("unknown section `{other}`")));
            }
        }
    }
    Err(tk.err("missing End"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts() {
        let m = unit_square(4).unwrap();
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_elements(), 32);
        assert_eq!(m.num_boundary_edges(), 16);
        assert_eq!(m.num_edges(), 56);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        let tags: Vec<u32> = m.edges().iter().filter_map(|e| e.tag).collect();
        for t in 1..=4 {
            assert_eq!(tags.iter().filter(|&&x| x == t).count(), 4);
        }
    }

    #[test]
    fn l_shape_counts() {
        let m = l_shape(2).unwrap();
        assert_eq!(m.num_elements(), 24);
        assert!((m.total_area() - 3.0).abs() < 1e-14);
        assert_eq!(m.num_boundary_edges(), 16);
    }

    #[test]
    fn normals_and_signs() {
        let m = unit_square(3).unwrap();
        for e in m.edges() {
            assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-15);
        }
        for e in m.edges() {
            if let (a, Some(b)) = e.elements {
                let ja = m
                    .element_edges(a)
                    .iter()
                    .position(|&x| x == m.edges().iter().position(|y| y == e).unwrap())
                    .unwrap();
                let jb = m
                    .element_edges(b)
                    .iter()
                    .position(|&x| x == m.edges().iter().position(|y| y == e).unwrap())
                    .unwrap();
                assert_eq!(m.edge_signs(a)[ja], -m.edge_signs(b)[jb]);
            }
        }
    }

    #[test]
    fn rejects_clockwise() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Triangulation::new(v, vec![[0, 2, 1]], &[]).is_err());
    }

    #[test]
    fn locate_walk() {
        let m = unit_square(8).unwrap();
        for &x in &[[0.01, 0.02], [0.99, 0.97], [0.5, 0.5], [0.31, 0.77]] {
            let (k, b) = m.locate(x, 0);
            assert!(b.iter().all(|&v| v >= -1e-12), "{k} {b:?}");
        }
        let l = l_shape(2).unwrap();
        let (k, b) = l.locate([-0.9, -0.9], 23);
        assert!(b.iter().all(|&v| v >= -1e-12), "{k} {b:?}");
    }

    #[test]
    fn medit_round_trip() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0 / 3.0]];
        let m = Triangulation::new(v, vec![[0, 1, 2], [0, 2, 3]], &[([0, 1], 7)]).unwrap();
        let text = mesh_to_string(&m);
        let back = parse_mesh("mem", &text).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_tags(), m.boundary_tags());
    }

    #[test]
    fn medit_rejects_zero_index() {
        let text = "MeshVersionFormatted 2\nDimension 2\nVertices\n3\n0 0 0\n1 0 0\n0 1 0\nTriangles\n1\n0 1 2 0\nEnd\n";
        match parse_mesh("bad.mesh", text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn medit_rejects_bad_header() {
        let text = "MeshVersionFormatted 2\nDimension 2\nVerticez\n";
        assert!(matches!(
            parse_mesh("bad.mesh", text),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
