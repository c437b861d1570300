//! Cohomology bases per support class, induced maps and quotient dimensions.

use crate::cochain::{Cochain, SupportClass};
use crate::error::Error;
use crate::linalg::{DenseMatrix, Quotient, SparseMatrix, SparseVec};
use crate::mesh::Complex;
use crate::scalar::Q;

/// Basis of `ker d_k / im d_{k-1}` inside the cochains of one class.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    degree: usize,
    support: SupportClass,
    home: u64,
    allowed: Vec<usize>,
    local: Vec<usize>,
    quotient: Quotient,
    reps: Vec<Cochain>,
    /// Coboundaries of a basis of the allowed (k−1)-cochains.
    image_gens: SparseMatrix,
}

fn allowed_cells(x: &dyn Complex, k: usize, s: SupportClass) -> Vec<usize> {
    let ex = x.excluded(k, s);
    (0..x.count(k)).filter(|i| !ex[*i]).collect()
}

pub fn cohomology_basis(x: &dyn Complex, k: usize, s: SupportClass) -> Result<QuotientBasis, Error> {
    if k > x.dim() {
        return Err(Error::Degree { degree: k, max: x.dim() });
    }
    let allowed = allowed_cells(x, k, s);
    let mut local = vec![usize::MAX; x.count(k)];
    for (i, c) in allowed.iter().enumerate() {
        local[*c] = i;
    }
    let relations = if k < x.dim() {
        let rows = allowed_cells(x, k + 1, s);
        x.coboundary(k).select(&rows, &allowed)
    } else {
        SparseMatrix::zeros(0, allowed.len())
    };
    let image_gens = if k > 0 {
        let cols = allowed_cells(x, k - 1, s);
        x.coboundary(k - 1).select(&allowed, &cols)
    } else {
        SparseMatrix::zeros(allowed.len(), 0)
    };
    let quotient = Quotient::new(&relations, &image_gens)?;
    let reps = quotient
        .reps()
        .iter()
        .map(|r| {
            let v: SparseVec = r.iter().map(|(i, a)| (allowed[*i], a.clone())).collect();
            Cochain::from_sparse(x, k, &v, s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuotientBasis { degree: k, support: s, home: x.id(), allowed, local, quotient, reps, image_gens })
}

impl QuotientBasis {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn support(&self) -> SupportClass {
        self.support
    }
    pub fn home(&self) -> u64 {
        self.home
    }
    pub fn reps(&self) -> &[Cochain] {
        &self.reps
    }

    /// Number of coboundary generators; `coboundary_generator(i)` is the
    /// coboundary of the i-th allowed lower cell, in ambient coordinates.
    pub fn n_coboundary_generators(&self) -> usize {
        self.image_gens.ncols()
    }

    pub fn coboundary_generators(&self) -> Vec<SparseVec> {
        self.image_gens
            .transpose()
            .rows()
            .iter()
            .map(|g| g.iter().map(|(i, a)| (self.allowed[*i], a.clone())).collect())
            .collect()
    }

    /// Class coordinates of a cocycle of this class.
    pub fn coordinates(&self, c: &Cochain) -> Result<Vec<Q>, Error> {
        if c.home() != self.home {
            return Err(Error::ComplexMismatch(c.home(), self.home));
        }
        if c.degree() != self.degree {
            return Err(Error::Precondition(format!(
                "a degree-{} cochain, got degree {}",
                self.degree,
                c.degree()
            )));
        }
        let mut v = Vec::new();
        for (i, a) in c.coeffs().iter().enumerate() {
            if *a == 0u32 {
                continue;
            }
            let l = self.local[i];
            if l == usize::MAX {
                return Err(Error::Support(format!(
                    "cell {i} is excluded by class {}",
                    self.support.as_str()
                )));
            }
            v.push((l, a.clone()));
        }
        self.quotient.coordinates(&v)
    }
}

pub fn betti_profile(x: &dyn Complex, s: SupportClass) -> Result<Vec<usize>, Error> {
    (0..=x.dim()).map(|k| Ok(cohomology_basis(x, k, s)?.dim())).collect()
}

/// Matrix of the map induced by `l` on cohomology, after checking that `l`
/// sends every representative to a cocycle of the target class and every
/// coboundary generator to a coboundary.
pub fn induced_map(
    l: &dyn Fn(&Cochain) -> Result<Cochain, Error>,
    src: &QuotientBasis,
    dst: &QuotientBasis,
) -> Result<DenseMatrix, Error> {
    let mut cols = Vec::with_capacity(src.dim());
    for (i, r) in src.reps().iter().enumerate() {
        let y = l(r)?;
        let c = dst.coordinates(&y).map_err(|e| {
            Error::ChainMap(format!("image of representative {i} is not a target cocycle: {e}"))
        })?;
        cols.push(c);
    }
    if src.dim() > 0 {
        let n = src.local.len();
        for (g, gen) in src.coboundary_generators().iter().enumerate() {
            let mut coeffs = vec![Q::from(0u32); n];
            for (i, a) in gen {
                coeffs[*i] = a.clone();
            }
            let c = Cochain::raw(src.degree, coeffs, src.support, src.home);
            let y = l(&c)?;
            let z = dst.coordinates(&y).map_err(|e| {
                Error::ChainMap(format!("image of coboundary generator {g} is not a cocycle: {e}"))
            })?;
            if z.iter().any(|q| *q != 0u32) {
                return Err(Error::ChainMap(format!(
                    "image of coboundary generator {g} has nonzero class"
                )));
            }
        }
    }
    Ok(DenseMatrix::from_columns(dst.dim(), &cols))
}

/// `dim ker A − rank B` after checking `A·B = 0`.
pub fn quotient_dims(a: &SparseMatrix, b: &SparseMatrix) -> Result<usize, Error> {
    if a.ncols() != b.nrows() {
        return Err(Error::Precondition(format!(
            "composable matrices, got {} columns against {} rows",
            a.ncols(),
            b.nrows()
        )));
    }
    let prod = a.matmul(b);
    if !prod.is_zero() {
        let t = prod.transpose();
        let j = (0..t.nrows()).find(|j| !t.row(*j).is_empty()).unwrap_or(0);
        return Err(Error::Inclusion(format!("column {j} of B is not in ker A")));
    }
    Ok(a.ncols() - a.rank() - b.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_sigma_str;

    #[test]
    fn circle_and_path() {
        let c = build_sigma_str("circle(3)").unwrap();
        assert_eq!(betti_profile(&c, SupportClass::Free).unwrap(), vec![1, 1]);
        let p = build_sigma_str("path(4)").unwrap();
        assert_eq!(betti_profile(&p, SupportClass::Compact).unwrap(), vec![0, 1]);
        assert_eq!(betti_profile(&p, SupportClass::Free).unwrap(), vec![1, 0]);
    }

    #[test]
    fn sphere3_free() {
        let s = build_sigma_str("sphere3").unwrap();
        assert_eq!(betti_profile(&s, SupportClass::Free).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn quotient_dims_cases() {
        let c = build_sigma_str("circle(3)").unwrap();
        let d0 = c.coboundary(0).clone();
        let zero1 = SparseMatrix::zeros(0, 3);
        assert_eq!(quotient_dims(&zero1, &d0).unwrap(), 1);
        assert_eq!(quotient_dims(&d0, &SparseMatrix::zeros(3, 0)).unwrap(), 1);
        assert!(quotient_dims(&d0, &SparseMatrix::identity(3)).is_err());
    }

    #[test]
    fn identity_and_zero_maps() {
        let c = build_sigma_str("torus2(3,3)").unwrap();
        let h = cohomology_basis(&c, 1, SupportClass::Free).unwrap();
        let id = induced_map(&|x| Ok(x.clone()), &h, &h).unwrap();
        assert!(id.is_identity());
        let z = induced_map(&|x| Ok(x.scale(&Q::from(0u32))), &h, &h).unwrap();
        assert_eq!(z, DenseMatrix::zeros(2, 2));
    }
}
