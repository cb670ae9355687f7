//! Ordered systems of subspaces, optionally extended cyclically to model an
//! infinite periodic list.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::{AmbientSpace, Tol};
use crate::subspace::{orthonormal_range, stacked_rank, Subspace};

#[derive(Debug, Clone)]
pub struct SubspaceSystem {
    ambient: AmbientSpace,
    subspaces: Vec<Subspace>,
    cyclic: bool,
}

impl SubspaceSystem {
    pub fn new(subspaces: Vec<Subspace>, cyclic: bool) -> Result<SubspaceSystem> {
        let Some(first) = subspaces.first() else {
            return Err(Error::InvalidInput("a system needs at least one subspace".into()));
        };
        let ambient = first.ambient();
        if subspaces.iter().any(|s| s.ambient() != ambient) {
            return Err(Error::AmbientMismatch);
        }
        Ok(SubspaceSystem {
            ambient,
            subspaces,
            cyclic,
        })
    }

    pub fn ambient(&self) -> AmbientSpace {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one subspace
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    /// Subspace at the 1-based index `k`; cyclic systems repeat their list.
    pub fn subspace_at(&self, k: usize) -> Result<&Subspace> {
        if k == 0 {
            return Err(Error::IndexOutOfBounds {
                index: k,
                len: self.len(),
            });
        }
        if self.cyclic {
            Ok(&self.subspaces[(k - 1) % self.len()])
        } else if k <= self.len() {
            Ok(&self.subspaces[k - 1])
        } else {
            Err(Error::IndexOutOfBounds {
                index: k,
                len: self.len(),
            })
        }
    }

    /// Resolve an unrolled 1-based index to the 1-based period index.
    pub fn period_index(&self, k: usize) -> usize {
        (k - 1) % self.len() + 1
    }

    /// Closure of the linear span of the subspaces indexed by `indices`
    /// (1-based, cyclic indices allowed for cyclic systems).
    pub fn span_closure(&self, indices: &[usize], tol: &Tol) -> Result<Subspace> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("span over an empty index set".into()));
        }
        let mut cols: Vec<DVector<f64>> = Vec::new();
        let mut seen = vec![false; self.len()];
        for &k in indices {
            let s = self.subspace_at(k)?;
            let pk = self.period_index(k) - 1;
            if seen[pk] {
                continue;
            }
            seen[pk] = true;
            cols.extend(s.basis().column_iter().map(|c| c.into_owned()));
        }
        if cols.is_empty() {
            return Ok(Subspace::trivial(self.ambient));
        }
        let m = DMatrix::from_columns(&cols);
        Subspace::from_orthonormal(orthonormal_range(&m, tol.rank), self.ambient, tol)
    }

    /// Whether the union of all subspaces spans the ambient space.
    pub fn spanning(&self, tol: &Tol) -> bool {
        let parts: Vec<&DMatrix<f64>> = self.subspaces.iter().map(|s| s.basis()).collect();
        stacked_rank(&parts, tol.rank) == self.ambient.coord_dim()
    }

    /// The annihilator block X'_k = ⋂_{j≠k} X_j^⊥, as a subspace of the dual
    /// space (same coordinates, dual norm exponent). The intersection over an
    /// empty family is the whole dual space.
    pub fn annihilator(&self, k: usize, tol: &Tol) -> Result<Subspace> {
        if self.cyclic {
            return Err(Error::InvalidInput(
                "annihilator blocks are defined for finite systems".into(),
            ));
        }
        if k == 0 || k > self.len() {
            return Err(Error::IndexOutOfBounds {
                index: k,
                len: self.len(),
            });
        }
        let dual = self.ambient.dual();
        let others: Vec<DVector<f64>> = self
            .subspaces
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k - 1)
            .flat_map(|(_, s)| s.basis().column_iter().map(|c| c.into_owned()))
            .collect();
        if others.is_empty() {
            return Ok(Subspace::whole(dual));
        }
        let span = Subspace::from_orthonormal(
            orthonormal_range(&DMatrix::from_columns(&others), tol.rank),
            self.ambient,
            tol,
        )?;
        let comp = span.complement();
        Subspace::from_orthonormal(comp.basis().clone(), dual, tol)
    }
}
