//! Exact sparse linear algebra: matrices, echelon forms, kernels and quotients.
//!
//! Pivots are always the lowest nonzero index of a row, so every basis built
//! here is a deterministic function of the input ordering.

use malachite_base::num::arithmetic::traits::{DivExact, Lcm};
use malachite_base::num::basic::traits::One;
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;

use crate::error::Error;
use crate::scalar::{format_q, inv_mod, mul_mod, to_mod_p, Scalar, PRIME, Q};

pub type SparseVec = Vec<(usize, Q)>;

pub fn sparse_from_dense(v: &[Q]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn sparse_to_dense(v: &[(usize, Q)], n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// `y + a·x` for sorted sparse vectors.
pub fn axpy(y: &[(usize, Q)], a: &Q, x: &[(usize, Q)]) -> SparseVec {
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < y.len() || j < x.len() {
        if j == x.len() || (i < y.len() && y[i].0 < x[j].0) {
            out.push(y[i].clone());
            i += 1;
        } else if i == y.len() || x[j].0 < y[i].0 {
            out.push((x[j].0, a * &x[j].1));
            j += 1;
        } else {
            let s = &y[i].1 + a * &x[j].1;
            if !s.is_zero() {
                out.push((y[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale_sparse(v: &mut SparseVec, a: &Q) {
    for (_, x) in v.iter_mut() {
        *x *= a;
    }
}

/// Row-major sparse matrix; rows are sorted by column and hold no zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T = Q> {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, rows: vec![Vec::new(); nrows] }
    }

    /// Duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, T)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for (r, c, v) in t {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            let row = &mut rows[r];
            match row.last_mut() {
                Some(last) if last.0 == c => last.1 = last.1.add(&v),
                _ => row.push((c, v)),
            }
        }
        for row in rows.iter_mut() {
            row.retain(|e| !e.1.is_zero());
        }
        SparseMatrix { nrows, ncols, rows }
    }

    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        for r in &rows {
            debug_assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
            debug_assert!(r.iter().all(|e| e.0 < ncols && !e.1.is_zero()));
        }
        SparseMatrix { nrows: rows.len(), ncols, rows }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(d: &[T]) -> Self {
        let rows = d
            .iter()
            .enumerate()
            .map(|(i, x)| if x.is_zero() { Vec::new() } else { vec![(i, x.clone())] })
            .collect();
        SparseMatrix { nrows: d.len(), ncols: d.len(), rows }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn row(&self, r: usize) -> &[(usize, T)] {
        &self.rows[r]
    }
    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        match self.rows[r].binary_search_by_key(&c, |e| e.0) {
            Ok(i) => self.rows[r][i].1.clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "vector length does not match matrix");
        self.rows
            .iter()
            .map(|row| {
                let mut s = T::zero();
                for (c, a) in row {
                    if !x[*c].is_zero() {
                        s.add_assign_mul(a, &x[*c]);
                    }
                }
                s
            })
            .collect()
    }

    /// Row `r` of `self · x`.
    pub fn apply_row(&self, r: usize, x: &[T]) -> T {
        let mut s = T::zero();
        for (c, a) in &self.rows[r] {
            if !x[*c].is_zero() {
                s.add_assign_mul(a, &x[*c]);
            }
        }
        s
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, a) in row {
                rows[*c].push((r, a.clone()));
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, rows }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut acc: Vec<T> = vec![T::zero(); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        let mut rows = Vec::with_capacity(self.nrows);
        for row in &self.rows {
            for (k, a) in row {
                for (c, b) in &other.rows[*k] {
                    if !mark[*c] {
                        mark[*c] = true;
                        touched.push(*c);
                    }
                    acc[*c].add_assign_mul(a, b);
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &c in &touched {
                let v = std::mem::replace(&mut acc[c], T::zero());
                mark[c] = false;
                if !v.is_zero() {
                    out.push((c, v));
                }
            }
            touched.clear();
            rows.push(out);
        }
        SparseMatrix { nrows: self.nrows, ncols: other.ncols, rows }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for (r, row) in self.rows.iter().enumerate() {
            t.extend(row.iter().map(|(c, a)| (r, *c, a.clone())));
        }
        for (r, row) in other.rows.iter().enumerate() {
            t.extend(
                row.iter()
                    .map(|(c, a)| (r, *c, if negate { a.neg() } else { a.clone() })),
            );
        }
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn scale(&self, s: &T) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(c, a)| (*c, a.mul(s)))
                    .filter(|e| !e.1.is_zero())
                    .collect()
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    /// Submatrix on the listed rows and columns, in list order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.ncols];
        for (i, c) in cols.iter().enumerate() {
            pos[*c] = i;
        }
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let mut row: Vec<(usize, T)> = self.rows[*r]
                .iter()
                .filter(|(c, _)| pos[*c] != usize::MAX)
                .map(|(c, a)| (pos[*c], a.clone()))
                .collect();
            row.sort_by_key(|e| e.0);
            out.push(row);
        }
        SparseMatrix { nrows: rows.len(), ncols: cols.len(), rows: out }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        SparseMatrix {
            nrows: rows.len(),
            ncols: self.ncols,
            rows: rows.iter().map(|r| self.rows[*r].clone()).collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparseMatrix<U> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(c, a)| (*c, f(a)))
                    .filter(|e| !e.1.is_zero())
                    .collect()
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    /// Line-oriented dump: `row col value` per nonzero.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, a)| (r, c.to_owned(), a)))
    }
}

impl SparseMatrix<Q> {
    pub fn apply_sparse(&self, x: &[(usize, Q)]) -> SparseVec {
        let dense = sparse_to_dense(x, self.ncols);
        sparse_from_dense(&self.apply(&dense))
    }

    /// Columns are the sparse vectors in `cols`.
    pub fn from_columns(nrows: usize, cols: &[SparseVec]) -> Self {
        let mut t = Vec::new();
        for (j, col) in cols.iter().enumerate() {
            t.extend(col.iter().map(|(i, a)| (*i, j, a.clone())));
        }
        Self::from_triplets(nrows, cols.len(), t)
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.ncols);
        for row in &self.rows {
            e.insert(row.clone());
        }
        e.rank()
    }

    /// A basis of the right kernel, one vector per non-pivot column.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::new(self.ncols);
        for row in &self.rows {
            e.insert(row.clone());
        }
        let free: Vec<usize> = (0..self.ncols).filter(|c| !e.is_pivot(*c)).collect();
        free.iter().map(|f| e.kernel_vector(*f)).collect()
    }
}

/// Rank of the rows over the prime field. Never exceeds the rank over the
/// rationals.
pub fn rank_mod_p(rows: &[SparseVec], ncols: usize) -> Result<usize, Error> {
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; ncols];
    let mut rank = 0;
    let mut x = vec![0u64; ncols];
    for row in rows {
        let mut lo = ncols;
        for (i, a) in row {
            x[*i] = to_mod_p(a).ok_or_else(|| Error::Precondition("entry with denominator divisible by the prime".into()))?;
            lo = lo.min(*i);
        }
        let mut found = None;
        for idx in lo..ncols {
            if x[idx] == 0 {
                continue;
            }
            match &pivots[idx] {
                Some(p) => {
                    let c = PRIME - x[idx];
                    for (j, b) in p {
                        x[*j] = (x[*j] + mul_mod(c, *b)) % PRIME;
                    }
                }
                None if found.is_none() => found = Some(idx),
                None => {}
            }
        }
        if let Some(f) = found {
            let inv = inv_mod(x[f]);
            let v: Vec<(usize, u64)> = (f..ncols).filter(|&j| x[j] != 0).map(|j| (j, mul_mod(x[j], inv))).collect();
            pivots[f] = Some(v);
            rank += 1;
        }
        x.iter_mut().for_each(|v| *v = 0);
    }
    Ok(rank)
}

/// Row echelon form over a fixed ambient dimension.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<SparseVec>,
    pivot_row: Vec<usize>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon { dim, rows: Vec::new(), pivot_row: vec![usize::MAX; dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    pub fn is_pivot(&self, i: usize) -> bool {
        self.pivot_row[i] != usize::MAX
    }
    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    /// Remainder of `v` after eliminating every pivot position.
    pub fn reduce(&self, v: SparseVec) -> SparseVec {
        let Some(lo) = v.iter().map(|(i, _)| *i).min() else {
            return v;
        };
        let mut x = vec![Q::zero(); self.dim];
        for (i, a) in v {
            x[i] = a;
        }
        for idx in lo..self.dim {
            let pr = self.pivot_row[idx];
            if pr == usize::MAX || x[idx].is_zero() {
                continue;
            }
            let c = x[idx].clone();
            for (j, b) in &self.rows[pr] {
                x[*j] -= &c * b;
            }
        }
        sparse_from_dense(&x)
    }

    /// Returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut r = self.reduce(v);
        if r.is_empty() {
            return false;
        }
        let inv = Q::one() / &r[0].1;
        scale_sparse(&mut r, &inv);
        self.pivot_row[r[0].0] = self.rows.len();
        self.rows.push(r);
        true
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Kernel vector of the row space taking the prescribed values at the
    /// non-pivot columns, listed in increasing column order.
    pub fn kernel_with(&self, free_values: &[Q]) -> SparseVec {
        let mut x = vec![Q::zero(); self.dim];
        let mut it = free_values.iter();
        for c in 0..self.dim {
            if !self.is_pivot(c) {
                x[c] = it.next().expect("one value per free column").clone();
            }
        }
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|r| std::cmp::Reverse(self.rows[*r][0].0));
        for r in order {
            let row = &self.rows[r];
            let mut s = Q::zero();
            for (c, a) in &row[1..] {
                if !x[*c].is_zero() {
                    s += a * &x[*c];
                }
            }
            x[row[0].0] = -s;
        }
        sparse_from_dense(&x)
    }

    /// Kernel vector of the row space with a 1 in the non-pivot column
    /// `free` and zeros in every other non-pivot column.
    pub fn kernel_vector(&self, free: usize) -> SparseVec {
        debug_assert!(!self.is_pivot(free));
        let mut x = vec![Q::zero(); self.dim];
        x[free] = Q::one();
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|r| std::cmp::Reverse(self.rows[*r][0].0));
        for r in order {
            let row = &self.rows[r];
            let p = row[0].0;
            let mut s = Q::zero();
            for (c, a) in &row[1..] {
                if !x[*c].is_zero() {
                    s += a * &x[*c];
                }
            }
            x[p] = -s;
        }
        sparse_from_dense(&x)
    }
}

/// `ker A / span(image)` with representatives and a coordinate functional.
///
/// Kernel vectors are parametrized by their entries at the non-pivot
/// columns of `A`; the image is reduced in those coordinates and the
/// representatives are the canonical kernel vectors at the coordinates the
/// image does not reach.
#[derive(Clone, Debug)]
pub struct Quotient {
    ambient: usize,
    relations: SparseMatrix,
    free_slot: Vec<usize>,
    free_count: usize,
    image: Echelon,
    rep_slot: Vec<usize>,
    reps: Vec<SparseVec>,
}

impl Quotient {
    /// `image_cols` holds the generators as columns. Fails with the index of
    /// the first generator not annihilated by `a`.
    pub fn new(a: &SparseMatrix, image_cols: &SparseMatrix) -> Result<Self, Error> {
        assert_eq!(a.ncols(), image_cols.nrows(), "generator length does not match");
        let prod = a.matmul(image_cols);
        if !prod.is_zero() {
            let t = prod.transpose();
            let j = (0..t.nrows()).find(|j| !t.row(*j).is_empty()).unwrap_or(0);
            return Err(Error::Inclusion(format!("generator {j} is not in the kernel")));
        }
        Ok(Self::new_unchecked(a, image_cols))
    }

    pub fn new_unchecked(a: &SparseMatrix, image_cols: &SparseMatrix) -> Self {
        let n = a.ncols();
        let mut rel = Echelon::new(n);
        for row in a.rows() {
            rel.insert(row.clone());
        }
        let mut free_slot = vec![usize::MAX; n];
        let mut free_cols = Vec::new();
        for c in 0..n {
            if !rel.is_pivot(c) {
                free_slot[c] = free_cols.len();
                free_cols.push(c);
            }
        }
        let nf = free_cols.len();
        let mut image = Echelon::new(nf);
        let gens = image_cols.transpose();
        for g in gens.rows() {
            let proj: SparseVec = g
                .iter()
                .filter(|(i, _)| free_slot[*i] != usize::MAX)
                .map(|(i, x)| (free_slot[*i], x.clone()))
                .collect();
            image.insert(proj);
        }
        let mut rep_slot = vec![usize::MAX; nf];
        let mut reps = Vec::new();
        for (f, &col) in free_cols.iter().enumerate() {
            if !image.is_pivot(f) {
                rep_slot[f] = reps.len();
                reps.push(rel.kernel_vector(col));
            }
        }
        Quotient {
            ambient: n,
            relations: a.clone(),
            free_slot,
            free_count: nf,
            image,
            rep_slot,
            reps,
        }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn kernel_dim(&self) -> usize {
        self.free_count
    }
    pub fn image_rank(&self) -> usize {
        self.image.rank()
    }
    pub fn reps(&self) -> &[SparseVec] {
        &self.reps
    }

    /// Whether `v` is annihilated by the defining relations.
    pub fn in_kernel(&self, v: &[(usize, Q)]) -> Option<usize> {
        let dense = sparse_to_dense(v, self.ambient);
        (0..self.relations.nrows()).find(|r| !self.relations.apply_row(*r, &dense).is_zero())
    }

    /// Class coordinates of a kernel element. Fails with the first violated
    /// relation when `v` is not in the kernel.
    pub fn coordinates(&self, v: &[(usize, Q)]) -> Result<Vec<Q>, Error> {
        if let Some(r) = self.in_kernel(v) {
            return Err(Error::NotCocycle(format!("relation {r} does not vanish")));
        }
        Ok(self.coordinates_unchecked(v))
    }

    pub fn coordinates_unchecked(&self, v: &[(usize, Q)]) -> Vec<Q> {
        let proj: SparseVec = v
            .iter()
            .filter(|(i, _)| self.free_slot[*i] != usize::MAX)
            .map(|(i, x)| (self.free_slot[*i], x.clone()))
            .collect();
        let rem = self.image.reduce(proj);
        let mut out = vec![Q::zero(); self.reps.len()];
        for (f, x) in rem {
            let s = self.rep_slot[f];
            debug_assert!(s != usize::MAX);
            out[s] = x;
        }
        out
    }
}

/// Small dense matrix for induced maps, pairings and evaluation matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        m.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows)
    }

    pub fn with_row(&self, row: Vec<Q>) -> DenseMatrix {
        assert_eq!(row.len(), self.cols);
        let mut data = self.data.clone();
        data.extend(row);
        DenseMatrix { rows: self.rows + 1, cols: self.cols, data }
    }

    fn as_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_rows(
            self.cols,
            (0..self.rows).map(|i| sparse_from_dense(self.row(i))).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        let full = self.rows.min(self.cols);
        let sparse = self.as_sparse();
        if rank_mod_p(sparse.rows(), self.cols).is_ok_and(|r| r == full) {
            return full;
        }
        sparse.rank()
    }

    /// Right kernel basis.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        self.as_sparse()
            .kernel()
            .into_iter()
            .map(|v| sparse_to_dense(&v, self.cols))
            .collect()
    }

    /// Rows scaled to integers, with the positive factor used per row.
    fn cleared(&self) -> (Vec<Integer>, Vec<Natural>) {
        let mut out = Vec::with_capacity(self.data.len());
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let l = row.iter().fold(Natural::ONE, |l, x| l.lcm(x.denominator_ref()));
            let lq = Q::from(&l);
            out.extend(row.iter().map(|x| Integer::try_from(x * &lq).expect("denominators cleared")));
            scales.push(l);
        }
        (out, scales)
    }

    /// Determinant by fraction-free elimination on the cleared rows.
    pub fn det(&self) -> Q {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Q::one();
        }
        let (mut a, scales) = self.cleared();
        let mut negate = false;
        let mut prev = Integer::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|r| a[r * n + c] != 0u32) else {
                return Q::zero();
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                negate = !negate;
            }
            for r in c + 1..n {
                for j in c + 1..n {
                    let t = &a[c * n + c] * &a[r * n + j] - &a[r * n + c] * &a[c * n + j];
                    a[r * n + j] = t.div_exact(&prev);
                }
            }
            prev = a[c * n + c].clone();
        }
        let denom = scales.iter().fold(Natural::ONE, |acc, l| acc * l);
        let d = Q::from(prev) / Q::from(denom);
        if negate {
            -d
        } else {
            d
        }
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<DenseMatrix> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut b = Self::identity(n).data;
        for c in 0..n {
            let p = (c..n).find(|r| !a[r * n + c].is_zero())?;
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                    b.swap(p * n + j, c * n + j);
                }
            }
            let inv = Q::one() / &a[c * n + c];
            for j in 0..n {
                a[c * n + j] *= &inv;
                b[c * n + j] *= &inv;
            }
            for r in 0..n {
                if r == c || a[r * n + c].is_zero() {
                    continue;
                }
                let f = a[r * n + c].clone();
                for j in 0..n {
                    if !a[c * n + j].is_zero() {
                        let t = &f * &a[c * n + j];
                        a[r * n + j] -= t;
                    }
                    if !b[c * n + j].is_zero() {
                        let t = &f * &b[c * n + j];
                        b[r * n + j] -= t;
                    }
                }
            }
        }
        Some(DenseMatrix { rows: n, cols: n, data: b })
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(format_q).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> SparseMatrix {
        let ncols = rows[0].len();
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                t.push((i, j, int(*x)));
            }
        }
        SparseMatrix::from_triplets(rows.len(), ncols, t)
    }

    #[test]
    fn kernel_of_small_matrix() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        let x = sparse_to_dense(&k[0], 3);
        assert_eq!(a.apply(&x), vec![int(0), int(0)]);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn quotient_of_circle_complex() {
        // d0 of a three-cycle; H^1 = C^1 / im d0 is one-dimensional.
        let d0 = m(&[&[-1, 1, 0], &[0, -1, 1], &[-1, 0, 1]]);
        let q = Quotient::new(&SparseMatrix::zeros(0, 3), &d0).unwrap();
        assert_eq!(q.dim(), 1);
        let c = q.coordinates(&q.reps()[0]).unwrap();
        assert_eq!(c, vec![int(1)]);
        let b = d0.apply_sparse(&[(1, int(5))]);
        assert_eq!(q.coordinates(&b).unwrap(), vec![int(0)]);
    }

    #[test]
    fn inclusion_failure_is_reported() {
        let a = m(&[&[1, 0]]);
        let b = m(&[&[1], &[0]]);
        assert!(matches!(Quotient::new(&a, &b), Err(Error::Inclusion(_))));
    }

    #[test]
    fn determinant_and_rank() {
        let d = DenseMatrix::from_columns(2, &[vec![int(1), int(3)], vec![int(2), int(4)]]);
        assert_eq!(d.det(), int(-2));
        assert_eq!(d.rank(), 2);
        let s = DenseMatrix::from_columns(2, &[vec![int(1), int(2)], vec![frac(1, 2), int(1)]]);
        assert_eq!(s.det(), int(0));
        assert_eq!(s.kernel().len(), 1);
        assert!(s.inverse().is_none());
        assert!(d.mul(&d.inverse().unwrap()).is_identity());
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_annihilated(entries in prop::collection::vec(-2i64..3, 20)) {
            let rows: Vec<&[i64]> = entries.chunks(5).collect();
            let a = m(&rows);
            let k = a.kernel();
            prop_assert_eq!(k.len() + a.rank(), 5);
            for v in &k {
                prop_assert!(a.apply_sparse(v).is_empty());
            }
        }

        #[test]
        fn quotient_coordinates_are_unit_on_reps(entries in prop::collection::vec(-2i64..3, 12)) {
            let rows: Vec<&[i64]> = entries.chunks(4).collect();
            let a = m(&rows).transpose().transpose();
            let ker = a.kernel();
            let gens: Vec<SparseVec> = ker.iter().take(1).cloned().collect();
            let img = SparseMatrix::from_columns(4, &gens);
            let q = Quotient::new(&a, &img).unwrap();
            prop_assert_eq!(q.dim(), ker.len() - gens.len());
            for (i, r) in q.reps().iter().enumerate() {
                let c = q.coordinates(r).unwrap();
                for (j, x) in c.iter().enumerate() {
                    prop_assert_eq!(x.clone(), if i == j { int(1) } else { int(0) });
                }
            }
            for g in &gens {
                prop_assert!(q.coordinates(g).unwrap().iter().all(|x| *x == 0u32));
            }
        }
    }
}
