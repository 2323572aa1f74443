//! Decreasing chains of subspaces cut out by a hyperplane family, and the
//! weight `Phi(xi)` built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::polytope::{dot, norm, Polytope};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Subspace {
    pub dim: usize,
    /// Orthonormal basis of the subspace.
    pub basis: Vec<Vec<f64>>,
    /// Orthonormal basis of its orthogonal complement.
    pub complement: Vec<Vec<f64>>,
}

impl Subspace {
    pub fn projected_norm(&self, xi: &[f64]) -> f64 {
        self.basis.iter().map(|b| dot(xi, b).powi(2)).sum::<f64>().sqrt()
    }

    fn same_as(&self, other: &Subspace) -> bool {
        if self.dim != other.dim {
            return false;
        }
        // Equal subspaces have equal projectors.
        let d = self.basis.first().or(self.complement.first()).map_or(0, |v| v.len());
        for i in 0..d {
            for j in 0..d {
                let p = |s: &Subspace| s.basis.iter().map(|b| b[i] * b[j]).sum::<f64>();
                if (p(self) - p(other)).abs() > 1e-9 {
                    return false;
                }
            }
        }
        true
    }
}

fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, v: &[f64]) -> bool {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
    }
    let n = norm(&w);
    if n < 1e-9 * norm(v).max(1e-300) {
        return false;
    }
    basis.push(w.into_iter().map(|x| x / n).collect());
    true
}

fn subspace_from_complement(d: usize, complement: Vec<Vec<f64>>) -> Subspace {
    let mut all = complement.clone();
    let mut basis = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        if extend_orthonormal(&mut all, &e) {
            basis.push(all.last().unwrap().clone());
        }
    }
    Subspace {
        dim: d - complement.len(),
        basis,
        complement,
    }
}

/// All decreasing chains `R^d = A(d) > A(d-1) > ... > A(1)` of intersections
/// of hyperplanes from a family X.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSystem {
    pub dimension: usize,
    /// Unit normals of the (deduplicated) hyperplanes of X.
    pub normals: Vec<Vec<f64>>,
    /// Subspaces; index 0 is R^d.
    pub subspaces: Vec<Subspace>,
    /// Each chain as subspace indices `[A(d), A(d-1), ..., A(1)]`.
    pub chains: Vec<Vec<usize>>,
    /// Vertex count of a polytope the system was built from (the j = 0 term of
    /// the level-set bound), when known.
    pub vertex_count_for_j0: Option<usize>,
}

impl ChainSystem {
    pub fn from_normals(normals: &[Vec<f64>]) -> Result<Self> {
        let d = normals.first().map_or(0, |n| n.len());
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
        }
        let mut unit: Vec<Vec<f64>> = Vec::new();
        for n in normals {
            if n.len() != d {
                return Err(Error::InvalidSet("normals of unequal dimension".into()));
            }
            let l = norm(n);
            if l == 0.0 || !l.is_finite() {
                return Err(Error::InvalidSet("zero or non-finite normal".into()));
            }
            let u: Vec<f64> = n.iter().map(|x| x / l).collect();
            let parallel = unit.iter().any(|v| (dot(v, &u).abs() - 1.0).abs() < 1e-12);
            if !parallel {
                unit.push(u);
            }
        }
        let mut subspaces = vec![subspace_from_complement(d, Vec::new())];
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier = vec![0usize];
        while let Some(&first) = frontier.first() {
            if subspaces[first].dim <= 1 {
                break;
            }
            let mut next = Vec::new();
            for &s in &frontier {
                for n in &unit {
                    let mut comp = subspaces[s].complement.clone();
                    if !extend_orthonormal(&mut comp, n) {
                        continue;
                    }
                    let cand = subspace_from_complement(d, comp);
                    let id = match subspaces.iter().position(|t| t.same_as(&cand)) {
                        Some(id) => id,
                        None => {
                            subspaces.push(cand);
                            children.push(Vec::new());
                            next.push(subspaces.len() - 1);
                            subspaces.len() - 1
                        }
                    };
                    if !children[s].contains(&id) {
                        children[s].push(id);
                    }
                }
            }
            frontier = next;
        }
        let mut chains = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(chain) = stack.pop() {
            let last = *chain.last().unwrap();
            if subspaces[last].dim == 1 {
                chains.push(chain);
                continue;
            }
            for &c in children[last].iter().rev() {
                let mut next = chain.clone();
                next.push(c);
                stack.push(next);
            }
        }
        Ok(Self {
            dimension: d,
            normals: unit,
            subspaces,
            chains,
            vertex_count_for_j0: None,
        })
    }

    /// X = the coordinate hyperplanes `{x_j = 0}`.
    pub fn coordinate(d: usize) -> Result<Self> {
        let normals: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_normals(&normals)
    }

    /// X = the facet hyperplanes of a polytope.
    pub fn from_polytope(p: &Polytope) -> Result<Self> {
        let normals: Vec<Vec<f64>> = p.halfspaces.iter().map(|(n, _)| n.clone()).collect();
        let mut system = Self::from_normals(&normals)?;
        system.vertex_count_for_j0 = Some(p.faces.iter().filter(|f| f.dim == 0).count());
        Ok(system)
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    /// `Phi(xi) = sum_chains prod_j min{1, (2 pi |P_A(j) xi|)^{-1}}`.
    pub fn phi(&self, xi: &[f64]) -> f64 {
        self.chains
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .map(|&s| {
                        let p = 2.0 * PI * self.subspaces[s].projected_norm(xi);
                        if p <= 1.0 {
                            1.0
                        } else {
                            1.0 / p
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }

    pub fn phi_int(&self, k: &[i64]) -> f64 {
        let xi: Vec<f64> = k.iter().map(|&v| v as f64).collect();
        self.phi(&xi)
    }

    /// Orthonormal flag basis `a_1, ..., a_d` adapted to chain `c`:
    /// `a_1..a_j` span A(j).
    pub fn flag_basis(&self, c: usize) -> Vec<Vec<f64>> {
        let chain = &self.chains[c];
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for &s in chain.iter().rev() {
            for b in &self.subspaces[s].basis {
                if basis.len() == self.subspaces[s].dim {
                    break;
                }
                extend_orthonormal(&mut basis, b);
            }
        }
        basis
    }
}
