//! Convex polytopes in R^2 and R^3: face lattice, exact Fourier transform by
//! recursive application of the divergence theorem, and the face-chain bound.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

const GEOM_TOL: f64 = 1e-12;
const DIRECT_ORDER: usize = 10;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn phase(xi: &[f64], x: &[f64]) -> Complex64 {
    let t = -2.0 * PI * dot(xi, x);
    Complex64::new(t.cos(), t.sin())
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Gram–Schmidt on the given directions; drops those already spanned.
fn orthonormal_basis(dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in dirs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let n = norm(&w);
        if n > 1e-9 * norm(v).max(1e-300) && n > 1e-14 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Counter-clockwise convex hull of planar points (Andrew's monotone chain).
/// Returns indices; collinear points are dropped.
fn hull_2d(points: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    idx.dedup_by(|a, b| {
        (points[*a][0] - points[*b][0]).abs() < GEOM_TOL
            && (points[*a][1] - points[*b][1]).abs() < GEOM_TOL
    });
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= GEOM_TOL
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= GEOM_TOL
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A j-dimensional face of the polytope.
#[derive(Debug, Clone)]
pub struct Face {
    pub dim: usize,
    /// Vertex indices; for 2-faces in cyclic order.
    pub vertices: Vec<usize>,
    /// Orthonormal basis of the linear space parallel to the face.
    pub basis: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
    /// j-dimensional measure.
    pub measure: f64,
    /// Facets of this face with their outward unit normals (inside the face's span).
    pub children: Vec<(usize, Vec<f64>)>,
}

impl Face {
    /// `P_F xi`, expressed in R^d.
    pub fn project(&self, xi: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; xi.len()];
        for b in &self.basis {
            let c = dot(xi, b);
            p.iter_mut().zip(b).for_each(|(pi, bi)| *pi += c * bi);
        }
        p
    }

    pub fn projected_norm(&self, xi: &[f64]) -> f64 {
        self.basis.iter().map(|b| dot(xi, b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Convex polytope with its face lattice. Face 0 is the polytope itself.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dimension: usize,
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<Face>,
    /// Outward unit normal and offset of each facet: `n . x <= h` inside.
    pub halfspaces: Vec<(Vec<f64>, f64)>,
    pub diameter: f64,
    pub epsilon: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

struct FaceBuilder {
    vertices: Vec<Vec<f64>>,
    faces: Vec<Face>,
    index: HashMap<Vec<usize>, usize>,
}

impl FaceBuilder {
    fn face(&mut self, ordered: Vec<usize>, dim: usize) -> usize {
        let mut key = ordered.clone();
        key.sort_unstable();
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let d = self.vertices[0].len();
        let origin = self.vertices[ordered[0]].clone();
        let dirs: Vec<Vec<f64>> = ordered[1..]
            .iter()
            .map(|&v| sub(&self.vertices[v], &origin))
            .collect();
        let basis = orthonormal_basis(&dirs);
        debug_assert_eq!(basis.len(), dim);
        let mut centroid = vec![0.0; d];
        for &v in &ordered {
            centroid
                .iter_mut()
                .zip(&self.vertices[v])
                .for_each(|(c, x)| *c += x / ordered.len() as f64);
        }
        let id = self.faces.len();
        self.faces.push(Face {
            dim,
            vertices: ordered,
            basis,
            centroid,
            measure: 0.0,
            children: Vec::new(),
        });
        self.index.insert(key, id);
        id
    }
}

impl Polytope {
    /// Convex hull of `vertices` (d = 2 or 3). `epsilon` is the required gap in
    /// `diameter < 1 - epsilon`.
    pub fn from_vertices(vertices: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        let d = vertices.first().map(|v| v.len()).unwrap_or(0);
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d, "2, 3 for polytopes"));
        }
        if vertices.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidSet("vertex coordinates must be finite and of equal dimension".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidSet("epsilon must lie in (0, 1)".into()));
        }
        let mut diameter: f64 = 0.0;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max(norm(&sub(a, b)));
            }
        }
        if diameter >= 1.0 - epsilon {
            return Err(Error::InvalidSet(format!(
                "diameter {diameter} is not below 1 - epsilon = {}",
                1.0 - epsilon
            )));
        }
        let mut builder = FaceBuilder {
            vertices: vertices.clone(),
            faces: Vec::new(),
            index: HashMap::new(),
        };
        let (top, facet_lists) = if d == 2 {
            let pts: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
            let hull = hull_2d(&pts);
            if hull.len() < 3 {
                return Err(Error::InvalidSet("polygon is degenerate".into()));
            }
            let edges: Vec<Vec<usize>> = (0..hull.len())
                .map(|i| vec![hull[i], hull[(i + 1) % hull.len()]])
                .collect();
            (hull, edges)
        } else {
            let facets = hull_3d(&vertices)?;
            let mut all: Vec<usize> = facets.iter().flatten().copied().collect();
            all.sort_unstable();
            all.dedup();
            (all, facets)
        };
        let top_id = builder.face(top.clone(), d);
        let mut top_children = Vec::new();
        for facet in &facet_lists {
            let fid = builder.face(facet.clone(), d - 1);
            top_children.push(fid);
            if d == 3 {
                let n = facet.len();
                let mut kids = Vec::new();
                for i in 0..n {
                    let (a, b) = (facet[i], facet[(i + 1) % n]);
                    let eid = builder.face(vec![a.min(b), a.max(b)], 1);
                    kids.push(eid);
                }
                builder.faces[fid].children = kids.into_iter().map(|k| (k, Vec::new())).collect();
            }
        }
        builder.faces[top_id].children = top_children.into_iter().map(|k| (k, Vec::new())).collect();
        // Vertices of every edge.
        let edge_ids: Vec<usize> = (0..builder.faces.len())
            .filter(|&i| builder.faces[i].dim == 1)
            .collect();
        for eid in edge_ids {
            let ends = builder.faces[eid].vertices.clone();
            let kids: Vec<usize> = ends
                .iter()
                .map(|&v| builder.face(vec![v], 0))
                .collect();
            builder.faces[eid].children = kids.into_iter().map(|k| (k, Vec::new())).collect();
        }
        let mut faces = builder.faces;
        // Outward normals of each child inside the parent's span.
        for fid in 0..faces.len() {
            let parent_centroid = faces[fid].centroid.clone();
            let parent_basis = faces[fid].basis.clone();
            let kids: Vec<usize> = faces[fid].children.iter().map(|c| c.0).collect();
            let mut with_normals = Vec::new();
            for k in kids {
                let child = &faces[k];
                let w = sub(&child.centroid, &parent_centroid);
                let mut n = vec![0.0; d];
                for b in &parent_basis {
                    let c = dot(&w, b);
                    n.iter_mut().zip(b).for_each(|(ni, bi)| *ni += c * bi);
                }
                for b in &child.basis {
                    let c = dot(&n, b);
                    n.iter_mut().zip(b).for_each(|(ni, bi)| *ni -= c * bi);
                }
                let len = norm(&n);
                if len < 1e-14 {
                    return Err(Error::InvalidSet("degenerate face lattice".into()));
                }
                n.iter_mut().for_each(|x| *x /= len);
                with_normals.push((k, n));
            }
            faces[fid].children = with_normals;
        }
        // Measures, bottom-up by dimension.
        for dim in 0..=d {
            for fid in 0..faces.len() {
                if faces[fid].dim != dim {
                    continue;
                }
                let m = match dim {
                    0 => 1.0,
                    1 => {
                        let v = &faces[fid].vertices;
                        norm(&sub(&vertices[v[0]], &vertices[v[1]]))
                    }
                    _ => {
                        // Divergence theorem: mu_j(F) = (1/j) sum_G mu(G) n_G . (c_G - c_F)
                        let f = &faces[fid];
                        f.children
                            .iter()
                            .map(|(g, n)| {
                                let gf = &faces[*g];
                                gf.measure * dot(n, &sub(&gf.centroid, &f.centroid))
                            })
                            .sum::<f64>()
                            / dim as f64
                    }
                };
                faces[fid].measure = m;
            }
        }
        let halfspaces = faces[top_id]
            .children
            .iter()
            .map(|(g, n)| (n.clone(), dot(n, &faces[*g].centroid)))
            .collect();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for v in &vertices {
            for a in 0..d {
                lower[a] = lower[a].min(v[a]);
                upper[a] = upper[a].max(v[a]);
            }
        }
        Ok(Self {
            dimension: d,
            vertices,
            faces,
            halfspaces,
            diameter,
            epsilon,
            lower,
            upper,
        })
    }

    pub fn volume(&self) -> f64 {
        self.faces[0].measure
    }

    /// Closed membership in R^d (not periodized).
    pub fn contains_point(&self, y: &[f64]) -> bool {
        self.halfspaces
            .iter()
            .all(|(n, h)| dot(n, y) <= h + GEOM_TOL)
    }

    /// Integer translates `n` for which `x + n` can be near the polytope.
    pub(crate) fn nearby_shifts(&self, x: &[f64], margin: f64) -> Vec<Vec<f64>> {
        let mut shifts = vec![Vec::new()];
        for a in 0..self.dimension {
            let lo = (self.lower[a] - margin - x[a]).ceil() as i64;
            let hi = (self.upper[a] + margin - x[a]).floor() as i64;
            let mut next = Vec::new();
            for s in &shifts {
                for n in lo..=hi {
                    let mut t = s.clone();
                    t.push(n as f64);
                    next.push(t);
                }
            }
            shifts = next;
        }
        shifts
    }

    /// Periodized closed membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.nearby_shifts(x, 0.0).iter().any(|n| {
            let y: Vec<f64> = x.iter().zip(n).map(|(a, b)| a + b).collect();
            self.contains_point(&y)
        })
    }

    /// Euclidean distance from `y` to the face `fid` (as a closed set).
    fn distance_to_face(&self, fid: usize, y: &[f64]) -> f64 {
        let f = &self.faces[fid];
        if f.dim == 0 {
            return norm(&sub(y, &self.vertices[f.vertices[0]]));
        }
        let w = sub(y, &f.centroid);
        let inside = f.children.iter().all(|(g, n)| {
            let gc = &self.faces[*g].centroid;
            dot(n, &sub(y, gc)) <= 0.0
        });
        if inside {
            let pw = f.project(&w);
            return norm(&sub(&w, &pw));
        }
        f.children
            .iter()
            .map(|(g, _)| self.distance_to_face(*g, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `y` in R^d to the boundary of this single copy.
    pub fn boundary_distance_point(&self, y: &[f64]) -> f64 {
        if self.contains_point(y) {
            self.halfspaces
                .iter()
                .map(|(n, h)| (h - dot(n, y)).max(0.0))
                .fold(f64::INFINITY, f64::min)
        } else {
            self.faces[0]
                .children
                .iter()
                .map(|(g, _)| self.distance_to_face(*g, y))
                .fold(f64::INFINITY, f64::min)
        }
    }

    /// Distance from `x` in T^d to the periodized boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let margin = (self.dimension as f64).sqrt();
        self.nearby_shifts(x, margin)
            .iter()
            .map(|n| {
                let y: Vec<f64> = x.iter().zip(n).map(|(a, b)| a + b).collect();
                self.boundary_distance_point(&y)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `int_P exp(-2 pi i xi . x) dx`.
    pub fn fourier_transform(&self, xi: &[f64]) -> Complex64 {
        let mut memo = vec![None; self.faces.len()];
        self.face_integral(0, xi, &mut memo)
    }

    fn face_integral(&self, fid: usize, xi: &[f64], memo: &mut [Option<Complex64>]) -> Complex64 {
        if let Some(v) = memo[fid] {
            return v;
        }
        let f = &self.faces[fid];
        let value = if f.dim == 0 {
            phase(xi, &self.vertices[f.vertices[0]])
        } else {
            let p = f.project(xi);
            let p2 = dot(&p, &p);
            if 2.0 * PI * p2.sqrt() * self.diameter < 1.0 {
                self.direct_integral(fid, xi)
            } else {
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, n) in &f.children {
                    let c = dot(n, &p);
                    if c != 0.0 {
                        acc += c * self.face_integral(*g, xi, memo);
                    }
                }
                acc * Complex64::new(0.0, 1.0 / (2.0 * PI * p2))
            }
        };
        memo[fid] = Some(value);
        value
    }

    /// Low-order product Gauss quadrature over a face; used only where the
    /// phase varies by less than one radian across it.
    fn direct_integral(&self, fid: usize, xi: &[f64]) -> Complex64 {
        let gl = GaussLegendre::new(DIRECT_ORDER);
        let f = &self.faces[fid];
        let v = |i: usize| &self.vertices[i];
        match f.dim {
            0 => phase(xi, v(f.vertices[0])),
            1 => {
                let (a, b) = (v(f.vertices[0]), v(f.vertices[1]));
                let len = norm(&sub(b, a));
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, w) in gl.mapped(0.0, 1.0) {
                    let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
                    acc += w * phase(xi, &x);
                }
                acc * len
            }
            2 => {
                let ring = self.ordered_ring(fid);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 1..ring.len() - 1 {
                    acc += triangle_integral(&gl, xi, v(ring[0]), v(ring[i]), v(ring[i + 1]));
                }
                acc
            }
            _ => {
                let apex = f.vertices[0];
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, _) in &f.children {
                    if self.faces[*g].vertices.contains(&apex) {
                        continue;
                    }
                    let ring = self.ordered_ring(*g);
                    for i in 1..ring.len() - 1 {
                        acc += tetra_integral(
                            &gl,
                            xi,
                            v(apex),
                            v(ring[0]),
                            v(ring[i]),
                            v(ring[i + 1]),
                        );
                    }
                }
                acc
            }
        }
    }

    /// Vertices of a 2-face in cyclic order.
    fn ordered_ring(&self, fid: usize) -> Vec<usize> {
        let f = &self.faces[fid];
        let pts: Vec<[f64; 2]> = f
            .vertices
            .iter()
            .map(|&i| {
                let w = sub(&self.vertices[i], &f.centroid);
                [dot(&w, &f.basis[0]), dot(&w, &f.basis[1])]
            })
            .collect();
        hull_2d(&pts).into_iter().map(|i| f.vertices[i]).collect()
    }

    /// Decreasing face chains `P = F(d) > F(d-1) > ... > F(1)` as face-id lists.
    pub fn face_chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(chain) = stack.pop() {
            let last = *chain.last().unwrap();
            if self.faces[last].dim == 1 {
                out.push(chain);
                continue;
            }
            for (g, _) in self.faces[last].children.iter().rev() {
                let mut next = chain.clone();
                next.push(*g);
                stack.push(next);
            }
        }
        out
    }

    /// `2 sum_chains prod_j min{lambda, (2 pi |P_F(j) xi|)^{-1}}`.
    pub fn ft_bound(&self, xi: &[f64]) -> f64 {
        let lambda = self.diameter;
        2.0 * self
            .face_chains()
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .map(|&f| {
                        let p = self.faces[f].projected_norm(xi);
                        if p == 0.0 {
                            lambda
                        } else {
                            lambda.min(1.0 / (2.0 * PI * p))
                        }
                    })
                    .product::<f64>()
            })
            .sum::<f64>()
    }
}

fn triangle_integral(gl: &GaussLegendre, xi: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Complex64 {
    // x = a + u (b - a) + u v (c - b), dx = u |det| du dv
    let ba = sub(b, a);
    let cb = sub(c, b);
    let jac = if a.len() == 2 {
        (ba[0] * cb[1] - ba[1] * cb[0]).abs()
    } else {
        norm(&cross(&ba, &cb))
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, wu) in gl.mapped(0.0, 1.0) {
        for (v, wv) in gl.mapped(0.0, 1.0) {
            let x: Vec<f64> = (0..a.len())
                .map(|i| a[i] + u * ba[i] + u * v * cb[i])
                .collect();
            acc += wu * wv * u * phase(xi, &x);
        }
    }
    acc * jac
}

fn tetra_integral(
    gl: &GaussLegendre,
    xi: &[f64],
    a: &[f64],
    b: &[f64],
    c: &[f64],
    e: &[f64],
) -> Complex64 {
    // x = a + u[(b - a) + v((c - b) + w(e - c))], dx = u^2 v |det| du dv dw
    let ba = sub(b, a);
    let cb = sub(c, b);
    let ec = sub(e, c);
    let det = dot(&ba, &cross(&cb, &ec)).abs();
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, wu) in gl.mapped(0.0, 1.0) {
        for (v, wv) in gl.mapped(0.0, 1.0) {
            for (w, ww) in gl.mapped(0.0, 1.0) {
                let x: Vec<f64> = (0..3)
                    .map(|i| a[i] + u * (ba[i] + v * (cb[i] + w * ec[i])))
                    .collect();
                acc += wu * wv * ww * u * u * v * phase(xi, &x);
            }
        }
    }
    acc * det
}

/// Facets of the convex hull of points in R^3, each as a list of vertex indices
/// (unordered, collinear interior edge points removed).
fn hull_3d(points: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::InvalidSet("a 3-d polytope needs at least 4 vertices".into()));
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .fold(1e-300, f64::max);
    let tol = 1e-10 * scale;
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut facets = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = cross(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                let len = norm(&nrm);
                if len < tol * scale {
                    continue;
                }
                let mut nv: Vec<f64> = nrm.iter().map(|x| x / len).collect();
                let mut h = dot(&nv, &points[i]);
                let side: Vec<f64> = points.iter().map(|p| dot(&nv, p) - h).collect();
                let above = side.iter().any(|s| *s > tol);
                let below = side.iter().any(|s| *s < -tol);
                if above && below {
                    continue;
                }
                if above {
                    nv.iter_mut().for_each(|x| *x = -*x);
                    h = -h;
                }
                if planes
                    .iter()
                    .any(|(m, g)| norm(&sub(m, &nv)) < 1e-9 && (g - h).abs() < tol)
                {
                    continue;
                }
                let on: Vec<usize> = (0..n).filter(|&q| side[q].abs() <= tol).collect();
                planes.push((nv, h));
                facets.push(on);
            }
        }
    }
    if facets.len() < 4 {
        return Err(Error::InvalidSet("polytope is degenerate (flat)".into()));
    }
    // Keep only extreme points of each facet polygon.
    let mut cleaned = Vec::new();
    for on in facets {
        let origin = &points[on[0]];
        let dirs: Vec<Vec<f64>> = on[1..].iter().map(|&q| sub(&points[q], origin)).collect();
        let basis = orthonormal_basis(&dirs);
        let pts: Vec<[f64; 2]> = on
            .iter()
            .map(|&q| {
                let w = sub(&points[q], origin);
                [dot(&w, &basis[0]), dot(&w, &basis[1])]
            })
            .collect();
        cleaned.push(hull_2d(&pts).into_iter().map(|q| on[q]).collect());
    }
    Ok(cleaned)
}
