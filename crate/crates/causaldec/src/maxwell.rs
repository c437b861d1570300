//! Degree-k potential and Faraday field theories on a finite window: the
//! solution and observable quotients, their parametrization through the
//! causal propagator, and the evaluation pairing between them.
//!
//! With margin μ and N slices:
//! - the observation window holds blocks μ ..= N−1−μ. Fields live there,
//!   and a row carries an equation only when its stencil stays inside the
//!   window and it is not a spatial end cell;
//! - sources are supported on the same blocks, which are timelike compact;
//! - the observable core is one block further in and drops spatial end
//!   cells.

use rand::Rng;
use serde::Serialize;

use crate::error::Error;
use crate::linalg::{rank_mod_p, sparse_from_dense, DenseMatrix, Echelon, Quotient, SparseMatrix, SparseVec};
use crate::lorentz::{vertex_distances, CheckOutcome, GreenSolver, Lorentzian};
use crate::mesh::{CellType, Complex, ProductSpacetime};
use crate::scalar::{format_q, frac, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Potential,
    Faraday,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Potential => "potential",
            Flavor::Faraday => "faraday",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "potential" => Ok(Flavor::Potential),
            "faraday" => Ok(Flavor::Faraday),
            _ => Err(Error::Parse(format!("flavor `{s}`, expected potential or faraday"))),
        }
    }
}

#[derive(Clone, Debug)]
struct CellSet {
    cells: Vec<usize>,
    pos: Vec<usize>,
}

impl CellSet {
    fn from_mask(mask: &[bool]) -> Self {
        let cells: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        Self::from_cells(mask.len(), cells)
    }

    fn from_cells(n: usize, cells: Vec<usize>) -> Self {
        let mut pos = vec![usize::MAX; n];
        for (i, &c) in cells.iter().enumerate() {
            pos[c] = i;
        }
        CellSet { cells, pos }
    }

    fn len(&self) -> usize {
        self.cells.len()
    }

    fn contains(&self, i: usize) -> bool {
        self.pos[i] != usize::MAX
    }

    fn restrict(&self, v: &[Q]) -> SparseVec {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| v[c] != 0u32)
            .map(|(i, &c)| (i, v[c].clone()))
            .collect()
    }

    fn extend(&self, v: &[(usize, Q)]) -> Vec<Q> {
        let mut out = vec![Q::from(0u32); self.pos.len()];
        for (i, a) in v {
            out[self.cells[*i]] = a.clone();
        }
        out
    }
}

fn zero_vec(n: usize) -> Vec<Q> {
    vec![Q::from(0u32); n]
}

fn add_into(y: &mut [Q], x: &[Q]) {
    for (a, b) in y.iter_mut().zip(x) {
        if *b != 0u32 {
            *a += b;
        }
    }
}

fn random_q(rng: &mut impl Rng) -> Q {
    frac(rng.random_range(-4..=4), rng.random_range(1..=2))
}

fn random_on(set: &CellSet, rng: &mut impl Rng) -> Vec<Q> {
    let mut v = zero_vec(set.pos.len());
    for &c in &set.cells {
        if rng.random_range(0..3) != 0 {
            v[c] = random_q(rng);
        }
    }
    v
}

fn stack(parts: &[&SparseMatrix], ncols: usize) -> SparseMatrix {
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p.rows().iter().cloned());
    }
    SparseMatrix::from_rows(ncols, rows)
}

fn block_diag(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let mut t: Vec<(usize, usize, Q)> = a.triplets().map(|(r, c, x)| (r, c, x.clone())).collect();
    t.extend(b.triplets().map(|(r, c, x)| (r + a.nrows(), c + a.ncols(), x.clone())));
    SparseMatrix::from_triplets(a.nrows() + b.nrows(), a.ncols() + b.ncols(), t)
}

/// Rows among `cand` that are not spatial end cells and whose stencil in
/// `op` stays inside `w`.
fn complete_rows(m: &ProductSpacetime, deg: usize, op: &SparseMatrix, cand: &CellSet, w: &CellSet) -> Vec<usize> {
    cand.cells
        .iter()
        .copied()
        .filter(|&r| !m.is_space_end(deg, r) && op.row(r).iter().all(|(c, _)| w.contains(*c)))
        .collect()
}

/// Cells among `cand` whose column of `op` (read from its transpose `opt`)
/// is supported in `region`.
fn columns_inside(opt: &SparseMatrix, cand: &[usize], region: &CellSet) -> Vec<usize> {
    cand.iter().copied().filter(|&c| opt.row(c).iter().all(|(i, _)| region.contains(*i))).collect()
}

/// Rows of `op` (given as `opt`) meeting the columns in `cols`.
fn rows_meeting(opt: &SparseMatrix, cols: &CellSet) -> Vec<usize> {
    let mut r: Vec<usize> = cols.cells.iter().flat_map(|&c| opt.row(c).iter().map(|(i, _)| *i)).collect();
    r.sort_unstable();
    r.dedup();
    r
}

/// Space of field configurations modulo gauge on the observation window.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    degree: usize,
    flavor: Flavor,
    domain: CellSet,
    window: CellSet,
    quotient: Quotient,
    equations: usize,
    reps: Vec<Vec<Q>>,
}

impl SolutionSpace {
    fn build(
        degree: usize,
        flavor: Flavor,
        domain: CellSet,
        window: CellSet,
        relations: &SparseMatrix,
        gauge: &SparseMatrix,
    ) -> Result<Self, Error> {
        let quotient = Quotient::new(relations, gauge)?;
        let reps = quotient.reps().iter().map(|r| domain.extend(r)).collect();
        Ok(SolutionSpace { degree, flavor, domain, window, quotient, equations: relations.nrows(), reps })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }
    pub fn equations(&self) -> usize {
        self.equations
    }
    pub fn unknowns(&self) -> usize {
        self.domain.len()
    }
    pub fn kernel_dim(&self) -> usize {
        self.quotient.kernel_dim()
    }
    pub fn gauge_rank(&self) -> usize {
        self.quotient.image_rank()
    }
    /// Representatives as full-length cochain coefficients.
    pub fn reps(&self) -> &[Vec<Q>] {
        &self.reps
    }

    /// Class of a field given on the whole spacetime. Only the window is
    /// read; inside it the field must vanish off the domain.
    pub fn coordinates(&self, v: &[Q]) -> Result<Vec<Q>, Error> {
        if let Some(&c) = self.window.cells.iter().find(|&&c| v[c] != 0u32 && !self.domain.contains(c)) {
            return Err(Error::Support(format!("field is nonzero at cell {c} outside the solution domain")));
        }
        self.quotient
            .coordinates(&self.domain.restrict(v))
            .map_err(|e| Error::OffShell(format!("degree {} {}: {e}", self.degree, self.flavor.as_str())))
    }
}

/// Observables on the core modulo functionals vanishing on solutions.
#[derive(Clone, Debug)]
pub struct ObservableSpace {
    degree: usize,
    flavor: Flavor,
    method: DimensionMethod,
    reps: Vec<Vec<Q>>,
    generators: Vec<SparseVec>,
    gauge: CheckOutcome,
}

impl ObservableSpace {
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
    pub fn method(&self) -> DimensionMethod {
        self.method
    }
    pub fn reps(&self) -> &[Vec<Q>] {
        &self.reps
    }
    /// Spanning set of the redundant functionals in global cell indices.
    pub fn redundant_generators(&self) -> &[SparseVec] {
        &self.generators
    }
    /// Pairing of every representative with a basis of pure gauge fields.
    pub fn gauge_check(&self) -> &CheckOutcome {
        &self.gauge
    }
}

/// Multipliers `f₊` per block with `f₋ = 1 − f₊`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePartition {
    plus: Vec<Q>,
}

impl GaugePartition {
    /// Zero up to block `lo`, one from block `hi`, linear in between.
    pub fn ramp(n_blocks: usize, lo: usize, hi: usize) -> Result<Self, Error> {
        if lo >= hi || hi >= n_blocks {
            return Err(Error::Precondition(format!(
                "a transition lo < hi < {n_blocks}, got {lo} and {hi}"
            )));
        }
        let w = (hi - lo) as i64;
        let plus = (0..n_blocks)
            .map(|b| {
                if b <= lo {
                    Q::from(0u32)
                } else if b >= hi {
                    Q::from(1u32)
                } else {
                    frac((b - lo) as i64, w)
                }
            })
            .collect();
        Ok(GaugePartition { plus })
    }

    pub fn plus(&self, b: usize) -> &Q {
        &self.plus[b]
    }
    pub fn minus(&self, b: usize) -> Q {
        Q::from(1u32) - &self.plus[b]
    }
    pub fn n_blocks(&self) -> usize {
        self.plus.len()
    }
}

/// `a ↦ ((a, b_j)_M)_j` for a fixed list of fields `b_j`.
struct Evaluator {
    by_cell: Vec<Vec<(usize, Q)>>,
    dim: usize,
}

impl Evaluator {
    fn new(n: usize, mass: &[Q], fields: &[Vec<Q>]) -> Self {
        let mut by_cell = vec![Vec::new(); n];
        for (j, b) in fields.iter().enumerate() {
            for (c, x) in b.iter().enumerate() {
                if *x != 0u32 {
                    by_cell[c].push((j, x * &mass[c]));
                }
            }
        }
        Evaluator { by_cell, dim: fields.len() }
    }

    fn eval(&self, a: &SparseVec) -> Vec<Q> {
        let mut out = zero_vec(self.dim);
        for (c, x) in a {
            for (j, w) in &self.by_cell[*c] {
                out[*j] += x * w;
            }
        }
        out
    }
}

/// How the dimension of a quotient was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionMethod {
    /// Full exact elimination.
    Exact,
    /// Independent images of sampled classes reach the upper bound given
    /// by ranks over a prime field.
    ModularBound,
}

/// Basis of `ker A / im B`, read through a linear map `eval` that vanishes
/// on `im B`.
///
/// Ranks over the prime field bound the dimension from above. Random kernel
/// elements with independent images bound it from below; when the two
/// meet, the kept samples are a basis. Otherwise the quotient is computed
/// by exact elimination.
fn sampled_basis(
    a: &SparseMatrix,
    b: &SparseMatrix,
    target: usize,
    rng: &mut impl Rng,
    mut eval: impl FnMut(&SparseVec) -> Result<Vec<Q>, Error>,
) -> Result<(Vec<SparseVec>, Vec<Vec<Q>>, DimensionMethod), Error> {
    let n = a.ncols();
    if !a.matmul(b).is_zero() {
        return Err(Error::Inclusion("a generator violates the relations".into()));
    }
    let bound = n - rank_mod_p(a.rows(), n)? - rank_mod_p(b.transpose().rows(), n)?;
    let mut rel = Echelon::new(n);
    for r in a.rows() {
        rel.insert(r.clone());
    }
    let free = n - rel.rank();
    let mut seen = Echelon::new(target);
    let (mut reps, mut images) = (Vec::new(), Vec::new());
    let mut attempts = 0;
    while seen.rank() < bound && attempts < bound.min(target) + 6 {
        attempts += 1;
        let vals: Vec<Q> = (0..free)
            .map(|_| if rng.random_range(0..3) == 0 { Q::from(0u32) } else { random_q(rng) })
            .collect();
        let x = rel.kernel_with(&vals);
        let img = eval(&x)?;
        if seen.insert(sparse_from_dense(&img)) {
            reps.push(x);
            images.push(img);
        }
    }
    if seen.rank() == bound {
        return Ok((reps, images, DimensionMethod::ModularBound));
    }
    let q = Quotient::new(a, b)?;
    let reps = q.reps().to_vec();
    let images = reps.iter().map(&mut eval).collect::<Result<Vec<_>, _>>()?;
    Ok((reps, images, DimensionMethod::Exact))
}

/// Source space of a parametrization, possibly a direct sum of two degrees.
struct SourceSpace {
    parts: Vec<(usize, CellSet)>,
    relations: SparseMatrix,
    generators: SparseMatrix,
}

impl SourceSpace {
    fn split(&self, v: &[(usize, Q)]) -> Vec<Vec<Q>> {
        let mut offset = 0;
        let mut out = Vec::new();
        for (_, set) in &self.parts {
            let local: SparseVec = v
                .iter()
                .filter(|(i, _)| *i >= offset && *i < offset + set.len())
                .map(|(i, a)| (i - offset, a.clone()))
                .collect();
            out.push(set.extend(&local));
            offset += set.len();
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParametrizationReport {
    pub fixture: String,
    pub degree: usize,
    pub flavor: Flavor,
    pub spacelike: bool,
    pub source_dim: usize,
    pub solution_dim: usize,
    pub dimension_method: Option<DimensionMethod>,
    pub rank: usize,
    pub matrix: Vec<Vec<String>>,
    pub determinant: Option<String>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeControl {
    /// Rank after appending a redundant observable as an extra row.
    pub appended_rank: usize,
    /// The appended row evaluates to zero on every solution.
    pub appended_row_zero: bool,
    /// Determinant after replacing the last observable by a redundant one.
    pub replaced_row_determinant: Option<String>,
    /// Determinant after replacing the last solution by a gauge-trivial one.
    pub replaced_column_determinant: Option<String>,
    pub detected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityReport {
    pub fixture: String,
    pub degree: usize,
    pub flavor: Flavor,
    pub observable_dim: usize,
    pub solution_dim: usize,
    pub dimension_method: DimensionMethod,
    pub rank: usize,
    pub matrix: Vec<Vec<String>>,
    pub determinant: Option<String>,
    pub checks: Vec<CheckOutcome>,
    pub negative_control: NegativeControl,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LorenzReport {
    pub fixture: String,
    pub degree: usize,
    pub inputs: usize,
    pub residual_rows: usize,
    pub off_shell_rejected: bool,
    pub passed: bool,
    pub witness: Option<String>,
}

fn det_string(m: &DenseMatrix) -> Option<String> {
    m.is_square().then(|| format_q(&m.det()))
}

fn square_invertible(m: &DenseMatrix) -> bool {
    m.is_square() && m.det() != 0u32
}

/// Field theories of one spacetime, sharing its Green solvers.
pub struct Dynamics<'a> {
    l: &'a Lorentzian,
    solvers: &'a [GreenSolver],
    margin: usize,
}

impl<'a> Dynamics<'a> {
    pub fn new(l: &'a Lorentzian, solvers: &'a [GreenSolver]) -> Result<Self, Error> {
        let m = l.spacetime();
        if solvers.len() != m.dim() + 1 {
            return Err(Error::Precondition(format!(
                "Green solvers for degrees 0..={}, got {}",
                m.dim(),
                solvers.len()
            )));
        }
        let margin = l.margin(solvers);
        let n = m.time().n_slices();
        if n < 2 * margin + 5 {
            return Err(Error::Precondition(format!(
                "at least {} slices for margin {margin}, got {n}",
                2 * margin + 5
            )));
        }
        Ok(Dynamics { l, solvers, margin })
    }

    pub fn margin(&self) -> usize {
        self.margin
    }
    pub fn lorentzian(&self) -> &Lorentzian {
        self.l
    }

    fn m(&self) -> &ProductSpacetime {
        self.l.spacetime()
    }

    fn window(&self, k: usize, inset: usize, drop_ends: bool) -> CellSet {
        let m = self.m();
        let nb = m.time().n_slices();
        let (lo, hi) = (self.margin + inset, nb - 1 - self.margin - inset);
        let mask: Vec<bool> = (0..m.count(k))
            .map(|i| (lo..=hi).contains(&m.slice_of(k, i)) && !(drop_ends && m.is_space_end(k, i)))
            .collect();
        CellSet::from_mask(&mask)
    }

    fn obs(&self, k: usize) -> CellSet {
        self.window(k, 0, false)
    }

    fn core(&self, k: usize) -> CellSet {
        self.window(k, 1, true)
    }

    pub fn check_degree(&self, k: usize) -> Result<(), Error> {
        let top = self.m().dim();
        if k < 1 || k + 1 > top {
            return Err(Error::Degree { degree: k, max: top - 1 });
        }
        Ok(())
    }

    /// `δd` in degree k.
    fn lop(&self, k: usize) -> SparseMatrix {
        self.l.delta(k + 1).matmul(self.l.d(k))
    }

    fn causal(&self, k: usize, f: &[Q]) -> Vec<Q> {
        self.solvers[k].causal_vec(f)
    }

    fn inner(&self, k: usize, a: &[Q], b: &[Q]) -> Q {
        self.l.mass().inner(k, a, b)
    }

    /// Solutions of `δdA = 0` modulo `dC^{k−1}` on the window.
    pub fn potential_solutions(&self, k: usize) -> Result<SolutionSpace, Error> {
        self.check_degree(k)?;
        let w = self.obs(k);
        let lk = self.lop(k);
        let rows = complete_rows(self.m(), k, &lk, &w, &w);
        let rel = lk.select(&rows, &w.cells);
        let d = self.l.d(k - 1);
        let gauge = d.select(&w.cells, &rows_meeting(d, &w));
        SolutionSpace::build(k, Flavor::Potential, w.clone(), w, &rel, &gauge)
    }

    /// Solutions of `dF = 0`, `δF = 0` on the window.
    pub fn faraday_solutions(&self, k: usize) -> Result<SolutionSpace, Error> {
        self.check_degree(k)?;
        let w = self.obs(k);
        let rel = self.faraday_relations(k, &w, &w);
        let gauge = SparseMatrix::zeros(w.len(), 0);
        SolutionSpace::build(k, Flavor::Faraday, w.clone(), w, &rel, &gauge)
    }

    /// Complete rows of `d` and `δ` on `window`, restricted to `domain`.
    fn faraday_relations(&self, k: usize, domain: &CellSet, window: &CellSet) -> SparseMatrix {
        let m = self.m();
        let d = self.l.d(k);
        let del = self.l.delta(k);
        let up = self.obs(k + 1);
        let down = self.obs(k - 1);
        let rd = complete_rows(m, k + 1, d, &up, window);
        let rdel = complete_rows(m, k - 1, del, &down, window);
        stack(&[&d.select(&rd, &domain.cells), &del.select(&rdel, &domain.cells)], domain.len())
    }

    pub fn solutions(&self, k: usize, flavor: Flavor) -> Result<SolutionSpace, Error> {
        match flavor {
            Flavor::Potential => self.potential_solutions(k),
            Flavor::Faraday => self.faraday_solutions(k),
        }
    }

    /// `E_A`: δ-closed core cochains modulo `δd` of cochains whose image
    /// stays in the core; `E_F`: core cochains modulo `δ` and `d` images
    /// staying in the core.
    pub fn build_observables(
        &self,
        k: usize,
        flavor: Flavor,
        sol: &SolutionSpace,
        rng: &mut impl Rng,
    ) -> Result<ObservableSpace, Error> {
        self.check_degree(k)?;
        let m = self.m();
        let core = self.core(k);
        let n = m.count(k);
        let (rel, gens) = match flavor {
            Flavor::Potential => {
                let lk = self.lop(k);
                let lt = lk.transpose();
                let inside = columns_inside(&lt, &core.cells, &core);
                let del = self.l.delta(k);
                let rows = rows_meeting(&del.transpose(), &core);
                (del.select(&rows, &core.cells), lk.select(&core.cells, &inside))
            }
            Flavor::Faraday => {
                let d_up = self.l.delta(k + 1);
                let d_dn = self.l.d(k - 1);
                let up: Vec<usize> = (0..m.count(k + 1)).filter(|&c| !m.is_space_end(k + 1, c)).collect();
                let dn: Vec<usize> = (0..m.count(k - 1)).filter(|&c| !m.is_space_end(k - 1, c)).collect();
                let a = columns_inside(&d_up.transpose(), &up, &core);
                let b = columns_inside(&d_dn.transpose(), &dn, &core);
                let ga = d_up.select(&core.cells, &a);
                let gb = d_dn.select(&core.cells, &b);
                let mut t: Vec<(usize, usize, Q)> = ga.triplets().map(|(r, c, x)| (r, c, x.clone())).collect();
                t.extend(gb.triplets().map(|(r, c, x)| (r, c + ga.ncols(), x.clone())));
                (
                    SparseMatrix::zeros(0, core.len()),
                    SparseMatrix::from_triplets(core.len(), ga.ncols() + gb.ncols(), t),
                )
            }
        };
        let pairing = Evaluator::new(n, self.l.mass().diag(k), sol.reps());
        let (local, _, method) = sampled_basis(&rel, &gens, sol.dim(), rng, |x| {
            Ok(pairing.eval(&x.iter().map(|(i, a)| (core.cells[*i], a.clone())).collect()))
        })?;
        let reps: Vec<Vec<Q>> = local.iter().map(|r| core.extend(r)).collect();
        let generators: Vec<SparseVec> = gens
            .transpose()
            .rows()
            .iter()
            .map(|g| g.iter().map(|(i, a)| (core.cells[*i], a.clone())).collect())
            .collect();
        let mut gauge = CheckOutcome::new("gauge_invariance");
        if flavor == Flavor::Potential {
            let dt = self.l.d(k - 1).transpose();
            let mass = self.l.mass().diag(k);
            for (i, r) in reps.iter().enumerate() {
                let mr: Vec<Q> = r.iter().zip(mass).map(|(a, w)| a * w).collect();
                let p = dt.apply(&mr);
                let bad = p.iter().position(|x| *x != 0u32);
                gauge.record(bad.is_none(), || {
                    format!("representative {i} pairs nonzero with the gauge field of cell {}", bad.unwrap())
                });
            }
        }
        debug_assert!(reps.iter().all(|r| r.len() == n));
        Ok(ObservableSpace { degree: k, flavor, method, reps, generators, gauge })
    }

    fn potential_sources(&self, k: usize, support: &CellSet) -> Result<SourceSpace, Error> {
        let lk = self.lop(k);
        let inside = columns_inside(&lk.transpose(), &support.cells, support);
        let del = self.l.delta(k);
        let rows = rows_meeting(&del.transpose(), support);
        let rel = del.select(&rows, &support.cells);
        let generators = lk.select(&support.cells, &inside);
        Ok(SourceSpace { parts: vec![(k, support.clone())], relations: rel, generators })
    }

    /// Pairs `(α, β)` supported on `up` and `dn` with `dα = 0`, `δβ = 0`,
    /// modulo `(dθ, δθ)` for θ with both images inside the supports.
    fn faraday_sources(&self, k: usize, up: &CellSet, dn: &CellSet) -> Result<SourceSpace, Error> {
        let m = self.m();
        let top = m.dim();
        let rel_a = if k + 1 < top {
            let d = self.l.d(k + 1);
            d.select(&rows_meeting(&d.transpose(), up), &up.cells)
        } else {
            SparseMatrix::zeros(0, up.len())
        };
        let rel_b = if k >= 2 {
            let del = self.l.delta(k - 1);
            del.select(&rows_meeting(&del.transpose(), dn), &dn.cells)
        } else {
            SparseMatrix::zeros(0, dn.len())
        };
        let rel = block_diag(&rel_a, &rel_b);
        let d = self.l.d(k);
        let del = self.l.delta(k);
        let (dt, delt) = (d.transpose(), del.transpose());
        let mid: Vec<usize> = (0..m.count(k))
            .filter(|&c| dt.row(c).iter().all(|(i, _)| up.contains(*i)) && delt.row(c).iter().all(|(i, _)| dn.contains(*i)))
            .collect();
        let ga = d.select(&up.cells, &mid);
        let gb = del.select(&dn.cells, &mid);
        let mut t: Vec<(usize, usize, Q)> = ga.triplets().map(|(r, c, x)| (r, c, x.clone())).collect();
        t.extend(gb.triplets().map(|(r, c, x)| (r + up.len(), c, x.clone())));
        let generators = SparseMatrix::from_triplets(up.len() + dn.len(), mid.len(), t);
        Ok(SourceSpace { parts: vec![(k + 1, up.clone()), (k - 1, dn.clone())], relations: rel, generators })
    }

    /// Degree-k input to the propagator for a source vector.
    fn source_field(&self, k: usize, flavor: Flavor, parts: &[Vec<Q>]) -> Vec<Q> {
        match flavor {
            Flavor::Potential => parts[0].clone(),
            Flavor::Faraday => {
                let mut f = self.l.delta(k + 1).apply(&parts[0]);
                add_into(&mut f, &self.l.d(k - 1).apply(&parts[1]));
                f
            }
        }
    }

    fn parametrize(
        &self,
        k: usize,
        flavor: Flavor,
        spacelike: bool,
        src: &SourceSpace,
        sol: &SolutionSpace,
        generator_samples: usize,
        rng: &mut impl Rng,
    ) -> ParametrizationReport {
        let mut checks = Vec::new();
        let mut image = CheckOutcome::new("image_is_solution");
        let basis = sampled_basis(&src.relations, &src.generators, sol.dim(), rng, |x| {
            let f = self.source_field(k, flavor, &src.split(x));
            sol.coordinates(&self.causal(k, &f))
        });
        let (source_dim, method, cols) = match basis {
            Ok((reps, cols, method)) => {
                image.record(true, String::new);
                (reps.len(), Some(method), cols)
            }
            Err(e) => {
                image.record(false, || format!("a source image is not a solution: {e}"));
                (0, None, Vec::new())
            }
        };
        checks.push(image);

        let mut kernel = CheckOutcome::new("trivial_sources_map_to_zero");
        let gens = src.generators.transpose();
        let ng = gens.nrows();
        let mut picks: Vec<SparseVec> = Vec::new();
        for _ in 0..generator_samples.min(ng) {
            picks.push(gens.row(rng.random_range(0..ng)).to_vec());
        }
        if ng > 0 {
            for _ in 0..2 {
                let mut acc = zero_vec(gens.ncols());
                for g in gens.rows() {
                    let s = random_q(rng);
                    for (i, a) in g {
                        acc[*i] += a * &s;
                    }
                }
                picks.push(sparse_from_dense(&acc));
            }
        }
        for (j, g) in picks.iter().enumerate() {
            let f = self.source_field(k, flavor, &src.split(g));
            let res = sol.coordinates(&self.causal(k, &f));
            let ok = matches!(&res, Ok(c) if c.iter().all(|x| *x == 0u32));
            kernel.record(ok, || format!("trivial source sample {j} maps to {res:?}"));
        }
        checks.push(kernel);

        let mat = DenseMatrix::from_columns(sol.dim(), &cols);
        let rank = mat.rank();
        let mut bij = CheckOutcome::new("bijective");
        bij.record(square_invertible(&mat), || {
            format!("{source_dim} source classes, {} solution classes, rank {rank}", sol.dim())
        });
        checks.push(bij);
        let passed = checks.iter().all(|c| c.passed);
        ParametrizationReport {
            fixture: self.m().name().to_string(),
            degree: k,
            flavor,
            spacelike,
            source_dim,
            solution_dim: sol.dim(),
            dimension_method: method,
            rank,
            matrix: mat.to_strings(),
            determinant: det_string(&mat),
            checks,
            passed,
        }
    }

    /// `[ω] ↦ [Gω]` on δ-closed sources modulo `δd` of sources.
    pub fn potential_parametrization(
        &self,
        k: usize,
        generator_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<ParametrizationReport, Error> {
        let sol = self.potential_solutions(k)?;
        let src = self.potential_sources(k, &self.obs(k))?;
        Ok(self.parametrize(k, Flavor::Potential, false, &src, &sol, generator_samples, rng))
    }

    /// `[α ⊕ β] ↦ G(δα + dβ)`.
    pub fn faraday_parametrization(
        &self,
        k: usize,
        generator_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<ParametrizationReport, Error> {
        let sol = self.faraday_solutions(k)?;
        let src = self.faraday_sources(k, &self.obs(k + 1), &self.obs(k - 1))?;
        Ok(self.parametrize(k, Flavor::Faraday, false, &src, &sol, generator_samples, rng))
    }

    /// Evaluation matrix `V_ij = (α_i, A_j)_M` between observables and
    /// solutions, with well-posedness checks and the negative controls.
    pub fn verify_optimality(&self, k: usize, flavor: Flavor, rng: &mut impl Rng) -> Result<OptimalityReport, Error> {
        let sol = self.solutions(k, flavor)?;
        let obs = self.build_observables(k, flavor, &sol, rng)?;
        let n = self.m().count(k);
        let mass = self.l.mass().diag(k);
        let pairing = Evaluator::new(n, mass, sol.reps());
        let eval = |a: &[Q]| pairing.eval(&sparse_from_dense(a));
        let rows: Vec<Vec<Q>> = obs.reps().iter().map(|a| eval(a)).collect();
        let mut v = DenseMatrix::zeros(rows.len(), sol.dim());
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                v.set(i, j, x.clone());
            }
        }
        let mut checks = vec![obs.gauge_check().clone()];

        let mut redundant = CheckOutcome::new("redundant_functionals_vanish");
        for (g, gen) in obs.redundant_generators().iter().enumerate() {
            let vals = pairing.eval(gen);
            let bad = vals.iter().position(|x| *x != 0u32);
            redundant.record(bad.is_none(), || format!("redundant functional {g} is nonzero on solution {}", bad.unwrap()));
        }
        checks.push(redundant);

        let mut resample = CheckOutcome::new("representative_resampling");
        if flavor == Flavor::Potential {
            let wl = self.obs(k - 1);
            for (j, a) in sol.reps().iter().enumerate() {
                let chi = random_on(&wl, rng);
                let mut b = a.clone();
                add_into(&mut b, &self.l.d(k - 1).apply(&chi));
                let window = self.obs(k);
                let mut b_w = zero_vec(n);
                for &c in &window.cells {
                    b_w[c] = b[c].clone();
                }
                let shifted = Evaluator::new(n, mass, std::slice::from_ref(&b_w));
                for (i, r) in obs.reps().iter().enumerate() {
                    let x = shifted.eval(&sparse_from_dense(r)).remove(0);
                    resample.record(x == *v.get(i, j), || {
                        format!("observable {i} changes on a gauge shift of solution {j}")
                    });
                }
            }
        }
        for (i, r) in obs.reps().iter().enumerate() {
            let mut s = r.clone();
            for g in obs.redundant_generators() {
                if rng.random_range(0..4) == 0 {
                    let c = random_q(rng);
                    for (j, y) in g {
                        s[*j] += y * &c;
                    }
                }
            }
            let vals = eval(&s);
            let same = vals.iter().zip(v.row(i)).all(|(a, b)| a == b);
            resample.record(same, || format!("observable {i} changes when a redundant functional is added"));
        }
        checks.push(resample);

        let rank = v.rank();
        let mut inv = CheckOutcome::new("evaluation_invertible");
        inv.record(square_invertible(&v), || {
            let lk = v.transpose().kernel();
            let rk = v.kernel();
            format!(
                "{}x{} evaluation matrix of rank {rank}; {} redundant observables, {} undetected solutions",
                v.rows(),
                v.cols(),
                lk.len(),
                rk.len()
            )
        });
        checks.push(inv);

        let negative_control = self.negative_control(k, flavor, &v, &obs, &sol, rng);
        let mut nc = CheckOutcome::new("negative_control");
        nc.record(negative_control.detected, || "redundant functional not detected".into());
        checks.push(nc);

        let passed = checks.iter().all(|c| c.passed);
        Ok(OptimalityReport {
            fixture: self.m().name().to_string(),
            degree: k,
            flavor,
            observable_dim: obs.dim(),
            dimension_method: obs.method(),
            solution_dim: sol.dim(),
            rank,
            matrix: v.to_strings(),
            determinant: det_string(&v),
            checks,
            negative_control,
            passed,
        })
    }

    fn negative_control(
        &self,
        k: usize,
        flavor: Flavor,
        v: &DenseMatrix,
        obs: &ObservableSpace,
        sol: &SolutionSpace,
        rng: &mut impl Rng,
    ) -> NegativeControl {
        let n = self.m().count(k);
        let gens = obs.redundant_generators();
        let mut extra = zero_vec(n);
        for g in gens {
            if rng.random_range(0..2) == 0 {
                let c = random_q(rng);
                for (j, y) in g {
                    extra[*j] += y * &c;
                }
            }
        }
        if extra.iter().all(|x| *x == 0u32) {
            if let Some(g) = gens.iter().find(|g| !g.is_empty()) {
                extra = crate::linalg::sparse_to_dense(g, n);
            }
        }
        let row: Vec<Q> = sol.reps().iter().map(|b| self.inner(k, &extra, b)).collect();
        let appended_row_zero = row.iter().all(|x| *x == 0u32);
        let appended = v.with_row(row.clone());
        let appended_rank = appended.rank();

        let square = v.is_square() && v.rows() > 0;
        let replaced_row_determinant = square.then(|| {
            let mut r = v.clone();
            for (j, x) in row.iter().enumerate() {
                r.set(v.rows() - 1, j, x.clone());
            }
            format_q(&r.det())
        });
        let replaced_column_determinant = square.then(|| {
            let fake = match flavor {
                Flavor::Potential => {
                    let chi = random_on(&self.obs(k - 1), rng);
                    self.l.d(k - 1).apply(&chi)
                }
                Flavor::Faraday => zero_vec(n),
            };
            let mut r = v.clone();
            for (i, a) in obs.reps().iter().enumerate() {
                r.set(i, v.cols() - 1, self.inner(k, a, &fake));
            }
            format_q(&r.det())
        });
        let zero = |d: &Option<String>| d.as_deref().is_none_or(|s| s == "0/1");
        let detected = appended_row_zero
            && appended_rank == v.rank()
            && zero(&replaced_row_determinant)
            && zero(&replaced_column_determinant);
        NegativeControl {
            appended_rank,
            appended_row_zero,
            replaced_row_determinant,
            replaced_column_determinant,
            detected,
        }
    }

    /// Rows where potential fields must satisfy `δdA = 0`.
    fn onshell_rows(&self, k: usize) -> Vec<usize> {
        let w = self.obs(k);
        complete_rows(self.m(), k, &self.lop(k), &w, &w)
    }

    /// `χ = −δ(G₊(f₊A) + G₋(f₋A))`, so that `A + dχ` is in Lorenz gauge.
    pub fn lorenz_fix(&self, k: usize, a: &[Q], p: &GaugePartition) -> Result<Vec<Q>, Error> {
        self.check_degree(k)?;
        let m = self.m();
        if a.len() != m.count(k) || p.n_blocks() != m.time().n_slices() {
            return Err(Error::Precondition("a degree-k field and a partition over all blocks".into()));
        }
        let lk = self.lop(k);
        if let Some(r) = self.onshell_rows(k).into_iter().find(|&r| lk.apply_row(r, a) != 0u32) {
            let c = m.cell(k, r);
            return Err(Error::OffShell(format!(
                "δdA is {} at cell {r} ({:?} at time {}, Σ-cell {})",
                format_q(&lk.apply_row(r, a)),
                c.ty,
                c.time,
                c.sigma
            )));
        }
        let c = m.time().collar_width();
        if (0..c).any(|b| *p.plus(b) != 0u32) || (m.time().n_slices() - c..m.time().n_slices()).any(|b| *p.plus(b) != 1u32) {
            return Err(Error::Precondition("f₊ vanishing on the early collar and equal to 1 on the late one".into()));
        }
        let mut plus = zero_vec(a.len());
        let mut minus = zero_vec(a.len());
        for i in 0..a.len() {
            if a[i] != 0u32 {
                let b = m.slice_of(k, i);
                plus[i] = &a[i] * p.plus(b);
                minus[i] = &a[i] * p.minus(b);
            }
        }
        let g = &self.solvers[k];
        let mut u = g.solve_forward(&plus);
        add_into(&mut u, &g.solve_backward(&minus));
        Ok(self.l.delta(k).apply(&u).into_iter().map(|x| -x).collect())
    }

    pub fn default_partition(&self) -> GaugePartition {
        let nb = self.m().time().n_slices();
        GaugePartition::ramp(nb, self.margin + 1, nb - 2 - self.margin).expect("window admits a transition")
    }

    /// Lorenz residual after the fix on random on-shell inputs.
    pub fn verify_lorenz(&self, k: usize, samples: usize, p: &GaugePartition, rng: &mut impl Rng) -> Result<LorenzReport, Error> {
        let sol = self.potential_solutions(k)?;
        let n = self.m().count(k);
        let wl = self.obs(k - 1);
        let rows = self.window(k - 1, 1, false);
        let mut inputs: Vec<Vec<Q>> = Vec::new();
        inputs.push(self.l.d(k - 1).apply(&random_on(&wl, rng)));
        let src = self.obs(k);
        let del = self.l.delta(k);
        let mut lorenz = self.causal(k, &self.l.delta(k + 1).apply(&random_on(&self.core(k + 1), rng)));
        for c in 0..n {
            if !src.contains(c) {
                lorenz[c] = Q::from(0u32);
            }
        }
        inputs.push(lorenz);
        while inputs.len() < samples.max(2) {
            let mut a = zero_vec(n);
            for r in sol.reps() {
                if rng.random_range(0..3) != 0 {
                    let s = random_q(rng);
                    for (x, y) in a.iter_mut().zip(r) {
                        if *y != 0u32 {
                            *x += y * &s;
                        }
                    }
                }
            }
            add_into(&mut a, &self.l.d(k - 1).apply(&random_on(&wl, rng)));
            inputs.push(a);
        }
        let mut out = CheckOutcome::new("lorenz_residual");
        for (i, a) in inputs.iter().enumerate() {
            let chi = self.lorenz_fix(k, a, p)?;
            let mut b = a.clone();
            add_into(&mut b, &self.l.d(k - 1).apply(&chi));
            let res = del.apply(&b);
            let bad = rows.cells.iter().copied().find(|&r| res[r] != 0u32);
            out.record(bad.is_none(), || format!("input {i}: δ(A + dχ) is {} at cell {}", format_q(&res[bad.unwrap()]), bad.unwrap()));
        }
        let mut probe = zero_vec(n);
        if let Some(&c) = self.core(k).cells.get(self.core(k).len() / 2) {
            probe[c] = Q::from(1u32);
        }
        let off_shell_rejected = matches!(self.lorenz_fix(k, &probe, p), Err(Error::OffShell(_)));
        Ok(LorenzReport {
            fixture: self.m().name().to_string(),
            degree: k,
            inputs: out.cases,
            residual_rows: rows.len(),
            off_shell_rejected,
            passed: out.passed && off_shell_rejected,
            witness: out.witness,
        })
    }

    /// Spacelike compact analogs: sources on the compact region `Z` of
    /// cells at Σ-distance more than N from the spatial ends, fields on
    /// the window supported in the causal hull of `Z`.
    pub fn sc_solution_spaces(
        &self,
        k: usize,
        flavor: Flavor,
        generator_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<ParametrizationReport, Error> {
        self.check_degree(k)?;
        let m = self.m();
        let sigma = m.sigma();
        if !sigma.has_ends() {
            return Err(Error::Precondition("a Cauchy surface with spatial ends".into()));
        }
        let dist = vertex_distances(sigma);
        let ends: Vec<usize> = (0..sigma.count(0)).filter(|&v| sigma.is_end(0, v)).collect();
        let to_end: Vec<u32> = (0..sigma.count(0)).map(|v| ends.iter().map(|&e| dist[v][e]).min().unwrap_or(u32::MAX)).collect();
        let reach = m.time().n_slices() as u32;
        let region = |j: usize| -> CellSet {
            let w = self.obs(j);
            let cells = w
                .cells
                .iter()
                .copied()
                .filter(|&i| {
                    let c = m.cell(j, i);
                    let verts = match c.ty {
                        CellType::One => &sigma.cell(j, c.sigma).vertices,
                        CellType::Two => &sigma.cell(j - 1, c.sigma).vertices,
                    };
                    verts.iter().all(|&v| to_end[v] > reach)
                })
                .collect();
            CellSet::from_cells(m.count(j), cells)
        };
        let z = region(k);
        if z.len() == 0 {
            return Err(Error::Precondition(format!(
                "cells farther than {reach} steps from the spatial ends"
            )));
        }
        let hull_mask = self.solvers[k].causal_hull(&z.cells);
        let w = self.obs(k);
        let domain = CellSet::from_cells(m.count(k), w.cells.iter().copied().filter(|&c| hull_mask[c]).collect());
        let in_dom = |c: usize| domain.contains(c);
        let (src, sol) = match flavor {
            Flavor::Potential => {
                let src = self.potential_sources(k, &z)?;
                let lk = self.lop(k);
                let rows = complete_rows(m, k, &lk, &w, &w);
                let rel = lk.select(&rows, &domain.cells);
                let d = self.l.d(k - 1);
                let inner_faces = rows_meeting(d, &z);
                let reach_lo = self.solvers[k - 1].causal_hull(&inner_faces);
                let faces: Vec<usize> = rows_meeting(d, &w).into_iter().filter(|&c| reach_lo[c]).collect();
                let outside: Vec<usize> = w.cells.iter().copied().filter(|&c| !in_dom(c)).collect();
                let free = d.select(&outside, &faces).kernel();
                let gauge = SparseMatrix::from_columns(faces.len(), &free);
                let gauge = d.select(&domain.cells, &faces).matmul(&gauge);
                (src, SolutionSpace::build(k, flavor, domain.clone(), w.clone(), &rel, &gauge)?)
            }
            Flavor::Faraday => {
                let up_all = region(k + 1);
                let dn_all = region(k - 1);
                let delt = self.l.delta(k + 1).transpose();
                let dt = self.l.d(k - 1).transpose();
                let up = CellSet::from_cells(
                    m.count(k + 1),
                    up_all.cells.iter().copied().filter(|&c| delt.row(c).iter().all(|(i, _)| z.contains(*i))).collect(),
                );
                let dn = CellSet::from_cells(
                    m.count(k - 1),
                    dn_all.cells.iter().copied().filter(|&c| dt.row(c).iter().all(|(i, _)| z.contains(*i))).collect(),
                );
                let src = self.faraday_sources(k, &up, &dn)?;
                let rel = self.faraday_relations(k, &domain, &w);
                let gauge = SparseMatrix::zeros(domain.len(), 0);
                (src, SolutionSpace::build(k, flavor, domain.clone(), w.clone(), &rel, &gauge)?)
            }
        };
        Ok(self.parametrize(k, flavor, true, &src, &sol, generator_samples, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::MetricData;
    use crate::mesh::{build_sigma_str, TimeAxis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(sigma: &str, n: usize, c: usize) -> (Lorentzian, Vec<GreenSolver>) {
        let m = ProductSpacetime::new(TimeAxis::new(n, c).unwrap(), Arc::new(build_sigma_str(sigma).unwrap()));
        let g = MetricData::unit(m.sigma());
        let l = Lorentzian::new(Arc::new(m), g).unwrap();
        let s = l.green_solvers().unwrap();
        (l, s)
    }

    #[test]
    fn potential_on_small_cylinder() {
        let (l, s) = setup("circle(4)", 12, 2);
        let d = Dynamics::new(&l, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = d.potential_parametrization(1, 4, &mut rng).unwrap();
        assert!(p.passed, "{:?} {} {}", p.checks, p.source_dim, p.solution_dim);
        let o = d.verify_optimality(1, Flavor::Potential, &mut rng).unwrap();
        assert!(o.passed, "{:?} {} {}", o.checks, o.observable_dim, o.solution_dim);
        let r = d.verify_lorenz(1, 5, &d.default_partition(), &mut rng).unwrap();
        assert!(r.passed, "{:?}", r.witness);
    }

    #[test]
    fn faraday_on_small_cylinder() {
        let (l, s) = setup("circle(4)", 12, 2);
        let d = Dynamics::new(&l, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = d.faraday_parametrization(1, 4, &mut rng).unwrap();
        assert!(p.passed, "{:?} {} {}", p.checks, p.source_dim, p.solution_dim);
        let o = d.verify_optimality(1, Flavor::Faraday, &mut rng).unwrap();
        assert!(o.passed, "{:?} {} {}", o.checks, o.observable_dim, o.solution_dim);
    }

    #[test]
    fn degree_range() {
        let (l, s) = setup("circle(4)", 12, 2);
        let d = Dynamics::new(&l, &s).unwrap();
        assert!(d.potential_solutions(0).is_err());
        assert!(d.potential_solutions(2).is_err());
    }
}
