//! Cauchy-surface complexes, discrete time axes and product spacetimes.
//!
//! Surfaces are ordered Δ-complexes: every k-cell lists k+1 strictly
//! increasing global vertex ids and the ids of its k+1 faces, face `i`
//! being the one opposite vertex `i`. Parallel cells are allowed, which
//! lets a two-vertex ring serve as a circle factor inside products.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::cochain::SupportClass;
use crate::error::Error;
use crate::linalg::SparseMatrix;
use crate::outcome::CheckOutcome;
use crate::scalar::{int, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub faces: Vec<usize>,
}

/// Anything carrying a cochain complex the generic operations can act on.
pub trait Complex: Send + Sync {
    fn id(&self) -> u64;
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    /// Number of k-cells; zero above the dimension.
    fn count(&self, k: usize) -> usize;
    /// Coboundary `C^k -> C^{k+1}` as a `count(k+1) x count(k)` matrix.
    fn coboundary(&self, k: usize) -> &SparseMatrix;
    /// Cells on which cochains of the class are forced to vanish.
    fn excluded(&self, k: usize, s: SupportClass) -> Vec<bool>;
    /// Signed top cells.
    fn fundamental_class(&self) -> &[(usize, i8)];
    /// Cup product of coefficient vectors of degrees `p` and `q`.
    fn cup_coeffs(&self, p: usize, a: &[Q], q: usize, b: &[Q]) -> Vec<Q>;
    /// `f` with `∫ a ∪ b = f · b` for every degree-q `b`, where `p + q = dim`.
    fn right_functional(&self, p: usize, a: &[Q]) -> Vec<Q>;
    /// `g` with `∫ a ∪ b = g · a` for every degree-p `a`, where `p + q = dim`.
    fn left_functional(&self, q: usize, b: &[Q]) -> Vec<Q>;
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    name: String,
    dim: usize,
    cells: Vec<Vec<Cell>>,
    orientation: Vec<i8>,
    end: Vec<Vec<bool>>,
    coboundary: Vec<SparseMatrix>,
    cobt: Vec<SparseMatrix>,
    fundamental: Vec<(usize, i8)>,
    n_boundary_faces: usize,
    id: u64,
}

pub(crate) fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

impl CellComplex {
    /// Assembles a complex from explicit cells. The end collar is given by
    /// per-degree masks and must be closed under taking faces.
    pub fn from_cells(
        name: &str,
        cells: Vec<Vec<Cell>>,
        end: Vec<Vec<bool>>,
    ) -> Result<Self, Error> {
        let dim = cells.len() - 1;
        for (k, layer) in cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                let ok = c.vertices.len() == k + 1
                    && c.vertices.windows(2).all(|w| w[0] < w[1])
                    && (k == 0 && c.faces.is_empty() || c.faces.len() == k + 1)
                    && c.faces.iter().all(|f| k > 0 && *f < cells[k - 1].len());
                if !ok {
                    return Err(Error::Precondition(format!("well-formed {k}-cell {i} in {name}")));
                }
                for (j, f) in c.faces.iter().enumerate() {
                    let mut expect = c.vertices.clone();
                    expect.remove(j);
                    if cells[k - 1][*f].vertices != expect {
                        return Err(Error::Precondition(format!(
                            "face {j} of {k}-cell {i} in {name} to match its vertices"
                        )));
                    }
                    if end[k][i] && !end[k - 1][*f] {
                        return Err(Error::Precondition(format!(
                            "end collar of {name} to be a subcomplex"
                        )));
                    }
                }
            }
        }
        let mut coboundary = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut t = Vec::new();
            for (r, c) in cells[k + 1].iter().enumerate() {
                for (i, f) in c.faces.iter().enumerate() {
                    t.push((r, *f, int(if i % 2 == 0 { 1 } else { -1 })));
                }
            }
            coboundary.push(SparseMatrix::from_triplets(cells[k + 1].len(), cells[k].len(), t));
        }
        let (orientation, n_boundary_faces) = orient(name, &cells, &end)?;
        let fundamental = orientation.iter().enumerate().map(|(i, o)| (i, *o)).collect();
        let mut h = fnv1a(name.as_bytes(), FNV_OFFSET);
        for layer in &cells {
            h = fnv1a(&(layer.len() as u64).to_le_bytes(), h);
            for c in layer {
                for v in c.vertices.iter().chain(c.faces.iter()) {
                    h = fnv1a(&(*v as u64).to_le_bytes(), h);
                }
            }
        }
        let cobt = coboundary.iter().map(SparseMatrix::transpose).collect();
        Ok(CellComplex {
            name: name.to_string(),
            dim,
            cells,
            orientation,
            end,
            coboundary,
            cobt,
            fundamental,
            n_boundary_faces,
            id: h,
        })
    }

    /// Simplicial complex generated by the listed top simplices (vertex sets).
    pub fn from_simplices(
        name: &str,
        top: &[Vec<usize>],
        end_top: &[Vec<usize>],
    ) -> Result<Self, Error> {
        let dim = top[0].len() - 1;
        let mut index: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); dim + 1];
        let mut cells: Vec<Vec<Cell>> = vec![Vec::new(); dim + 1];
        let mut all: Vec<Vec<Vec<usize>>> = vec![Vec::new(); dim + 1];
        for s in top {
            let mut s = s.clone();
            s.sort_unstable();
            for sub in subsets(&s) {
                let k = sub.len() - 1;
                all[k].push(sub);
            }
        }
        for (k, layer) in all.iter_mut().enumerate() {
            layer.sort();
            layer.dedup();
            for v in layer.iter() {
                let faces = if k == 0 {
                    Vec::new()
                } else {
                    (0..=k)
                        .map(|i| {
                            let mut f = v.clone();
                            f.remove(i);
                            index[k - 1][&f]
                        })
                        .collect()
                };
                index[k].insert(v.clone(), cells[k].len());
                cells[k].push(Cell { vertices: v.clone(), faces });
            }
        }
        let mut end: Vec<Vec<bool>> = cells.iter().map(|l| vec![false; l.len()]).collect();
        for s in end_top {
            let mut s = s.clone();
            s.sort_unstable();
            for sub in subsets(&s) {
                let k = sub.len() - 1;
                end[k][index[k][&sub]] = true;
            }
        }
        Self::from_cells(name, cells, end)
    }

    /// Product of Δ-complexes, restricted to nondegenerate simplices.
    pub fn product(name: &str, a: &CellComplex, b: &CellComplex) -> Result<Self, Error> {
        let dim = a.dim + b.dim;
        let nb = b.count(0);
        type Key = (usize, usize, usize, usize, Vec<(u8, u8)>);
        let mut index: Vec<HashMap<Key, usize>> = vec![HashMap::new(); dim + 1];
        let mut cells: Vec<Vec<Cell>> = vec![Vec::new(); dim + 1];
        let mut end: Vec<Vec<bool>> = vec![Vec::new(); dim + 1];
        let mut keys: Vec<Vec<Key>> = vec![Vec::new(); dim + 1];
        for n in 0..=dim {
            for p in 0..=a.dim.min(n) {
                for q in 0..=b.dim.min(n) {
                    if p.max(q) > n || p + q < n {
                        continue;
                    }
                    let chains = lattice_chains(p, q, n);
                    for x in 0..a.count(p) {
                        for y in 0..b.count(q) {
                            for ch in &chains {
                                keys[n].push((p, x, q, y, ch.clone()));
                            }
                        }
                    }
                }
            }
        }
        for n in 0..=dim {
            for key in std::mem::take(&mut keys[n]) {
                let (p, x, q, y, ref ch) = key;
                let xv = &a.cells[p][x].vertices;
                let yv = &b.cells[q][y].vertices;
                let vertices: Vec<usize> =
                    ch.iter().map(|(i, j)| xv[*i as usize] * nb + yv[*j as usize]).collect();
                let faces = if n == 0 {
                    Vec::new()
                } else {
                    (0..=n)
                        .map(|i| {
                            let fk = product_face(a, b, &key, i);
                            index[n - 1][&fk]
                        })
                        .collect()
                };
                end[n].push(a.end[p][x] || b.end[q][y]);
                index[n].insert(key, cells[n].len());
                cells[n].push(Cell { vertices, faces });
            }
        }
        Self::from_cells(name, cells, end)
    }

    pub fn cells(&self, k: usize) -> &[Cell] {
        &self.cells[k]
    }
    pub fn cell(&self, k: usize, i: usize) -> &Cell {
        &self.cells[k][i]
    }
    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }
    pub fn is_end(&self, k: usize, i: usize) -> bool {
        self.end[k][i]
    }
    pub fn end_mask(&self, k: usize) -> &[bool] {
        &self.end[k]
    }
    pub fn has_ends(&self) -> bool {
        self.end.iter().any(|l| l.iter().any(|x| *x))
    }
    /// True when no codimension-one cell lies on the boundary.
    pub fn is_closed(&self) -> bool {
        self.n_boundary_faces == 0
    }

    /// Boundary matrix `C_{k+1} -> C_k`, the transpose of the coboundary.
    pub fn incidence(&self, k: usize) -> SparseMatrix {
        self.coboundary[k].transpose()
    }

    /// Face of `cell` spanned by its first `p+1` vertices.
    pub fn front_face(&self, k: usize, cell: usize, p: usize) -> usize {
        let mut c = cell;
        for d in (p + 1..=k).rev() {
            c = self.cells[d][c].faces[d];
        }
        c
    }

    /// Face of `cell` spanned by its last `q+1` vertices.
    pub fn back_face(&self, k: usize, cell: usize, q: usize) -> usize {
        let mut c = cell;
        for d in (q + 1..=k).rev() {
            c = self.cells[d][c].faces[0];
        }
        c
    }

    pub fn describe(&self) -> String {
        let counts: Vec<String> = (0..=self.dim)
            .map(|k| {
                let n = self.count(k);
                let (one, many) = match k {
                    0 => ("vertex", "vertices".to_string()),
                    1 => ("edge", "edges".to_string()),
                    2 => ("triangle", "triangles".to_string()),
                    3 => ("tetrahedron", "tetrahedra".to_string()),
                    _ => ("", format!("{k}-cells")),
                };
                if n == 1 && !one.is_empty() {
                    format!("1 {one}")
                } else {
                    format!("{n} {many}")
                }
            })
            .collect();
        counts.join(", ")
    }

    /// Text dump: one `cell k i v0 v1 ...` line per cell, then one
    /// `incidence k face cell sign` line per face relation.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "complex {} dim {}", self.name, self.dim);
        for (k, layer) in self.cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                let vs: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
                let tag = if self.end[k][i] { " end" } else { "" };
                let _ = writeln!(s, "cell {k} {i} {}{tag}", vs.join(" "));
            }
        }
        for (k, layer) in self.cells.iter().enumerate().skip(1) {
            for (i, c) in layer.iter().enumerate() {
                for (j, f) in c.faces.iter().enumerate() {
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    let _ = writeln!(s, "incidence {k} {f} {i} {sign}");
                }
            }
        }
        s
    }

    fn cup_impl(&self, p: usize, a: &[Q], q: usize, b: &[Q]) -> Vec<Q> {
        let n = p + q;
        if n > self.dim {
            return Vec::new();
        }
        (0..self.count(n))
            .map(|r| {
                let f = self.front_face(n, r, p);
                let g = self.back_face(n, r, q);
                if a[f] == 0u32 || b[g] == 0u32 {
                    Q::from(0u32)
                } else {
                    &a[f] * &b[g]
                }
            })
            .collect()
    }
}

impl Complex for CellComplex {
    fn id(&self) -> u64 {
        self.id
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn count(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }
    fn coboundary(&self, k: usize) -> &SparseMatrix {
        &self.coboundary[k]
    }
    fn excluded(&self, k: usize, s: SupportClass) -> Vec<bool> {
        match s {
            SupportClass::Free | SupportClass::TC => vec![false; self.count(k)],
            SupportClass::SC | SupportClass::Compact => self.end[k].clone(),
        }
    }
    fn fundamental_class(&self) -> &[(usize, i8)] {
        &self.fundamental
    }
    fn cup_coeffs(&self, p: usize, a: &[Q], q: usize, b: &[Q]) -> Vec<Q> {
        self.cup_impl(p, a, q, b)
    }
    fn right_functional(&self, p: usize, a: &[Q]) -> Vec<Q> {
        let q = self.dim - p;
        let mut f = vec![Q::from(0u32); self.count(q)];
        for &(r, o) in &self.fundamental {
            let x = &a[self.front_face(self.dim, r, p)];
            if *x != 0u32 {
                let slot = &mut f[self.back_face(self.dim, r, q)];
                if o > 0 {
                    *slot += x;
                } else {
                    *slot -= x;
                }
            }
        }
        f
    }
    fn left_functional(&self, q: usize, b: &[Q]) -> Vec<Q> {
        let p = self.dim - q;
        let mut g = vec![Q::from(0u32); self.count(p)];
        for &(r, o) in &self.fundamental {
            let y = &b[self.back_face(self.dim, r, q)];
            if *y != 0u32 {
                let slot = &mut g[self.front_face(self.dim, r, p)];
                if o > 0 {
                    *slot += y;
                } else {
                    *slot -= y;
                }
            }
        }
        g
    }
}

fn subsets(s: &[usize]) -> Vec<Vec<usize>> {
    let n = s.len();
    (1u32..(1 << n))
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| s[i]).collect())
        .collect()
}

/// Strictly increasing chains from (0,0) to (p,q) with `n` steps, each step
/// advancing one or both coordinates by one.
fn lattice_chains(p: usize, q: usize, n: usize) -> Vec<Vec<(u8, u8)>> {
    fn rec(
        cur: (usize, usize),
        target: (usize, usize),
        left: usize,
        path: &mut Vec<(u8, u8)>,
        out: &mut Vec<Vec<(u8, u8)>>,
    ) {
        if cur == target {
            if left == 0 {
                out.push(path.clone());
            }
            return;
        }
        if left == 0 {
            return;
        }
        for step in [(1, 0), (0, 1), (1, 1)] {
            let next = (cur.0 + step.0, cur.1 + step.1);
            if next.0 <= target.0 && next.1 <= target.1 {
                path.push((next.0 as u8, next.1 as u8));
                rec(next, target, left - 1, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut path = vec![(0u8, 0u8)];
    rec((0, 0), (p, q), n, &mut path, &mut out);
    out
}

fn product_face(
    a: &CellComplex,
    b: &CellComplex,
    key: &(usize, usize, usize, usize, Vec<(u8, u8)>),
    i: usize,
) -> (usize, usize, usize, usize, Vec<(u8, u8)>) {
    let (p, x, q, y, ch) = key;
    let drop_a = {
        let v = ch[i].0;
        (i == 0 || ch[i - 1].0 != v) && (i + 1 == ch.len() || ch[i + 1].0 != v)
    };
    let drop_b = {
        let v = ch[i].1;
        (i == 0 || ch[i - 1].1 != v) && (i + 1 == ch.len() || ch[i + 1].1 != v)
    };
    let (ai, bi) = ch[i];
    let mut rest: Vec<(u8, u8)> = ch
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, e)| *e)
        .collect();
    let (mut p2, mut x2, mut q2, mut y2) = (*p, *x, *q, *y);
    if drop_a {
        x2 = a.cells[*p][*x].faces[ai as usize];
        p2 -= 1;
        for e in rest.iter_mut() {
            if e.0 > ai {
                e.0 -= 1;
            }
        }
    }
    if drop_b {
        y2 = b.cells[*q][*y].faces[bi as usize];
        q2 -= 1;
        for e in rest.iter_mut() {
            if e.1 > bi {
                e.1 -= 1;
            }
        }
    }
    (p2, x2, q2, y2, rest)
}

/// Consistent orientation of top cells by propagation across shared
/// codimension-one faces. Returns the signs and the number of boundary faces.
fn orient(name: &str, cells: &[Vec<Cell>], end: &[Vec<bool>]) -> Result<(Vec<i8>, usize), Error> {
    let dim = cells.len() - 1;
    let top = &cells[dim];
    if dim == 0 {
        return Ok((vec![1; top.len()], 0));
    }
    let mut cofaces: Vec<Vec<(usize, i8)>> = vec![Vec::new(); cells[dim - 1].len()];
    for (t, c) in top.iter().enumerate() {
        for (i, f) in c.faces.iter().enumerate() {
            cofaces[*f].push((t, if i % 2 == 0 { 1 } else { -1 }));
        }
    }
    let mut boundary = 0;
    for (f, cf) in cofaces.iter().enumerate() {
        match cf.len() {
            2 => {}
            1 => {
                if !end[dim - 1][f] {
                    return Err(Error::Precondition(format!(
                        "boundary face {f} of {name} to lie in the end collar"
                    )));
                }
                boundary += 1;
            }
            0 => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "face {f} of {name} to bound at most two top cells"
                )))
            }
        }
    }
    let mut o = vec![0i8; top.len()];
    for start in 0..top.len() {
        if o[start] != 0 {
            continue;
        }
        o[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for (i, f) in top[t].faces.iter().enumerate() {
                let s = if i % 2 == 0 { 1 } else { -1 };
                for &(u, su) in &cofaces[*f] {
                    if u == t {
                        continue;
                    }
                    // induced orientations on the shared face must cancel
                    let want = -o[t] * s * su;
                    if o[u] == 0 {
                        o[u] = want;
                        queue.push_back(u);
                    } else if o[u] != want {
                        return Err(Error::Precondition(format!("{name} to be orientable")));
                    }
                }
            }
        }
    }
    Ok((o, boundary))
}

/// Internal Δ-circle with `n >= 2` vertices.
pub fn ring(n: usize) -> CellComplex {
    assert!(n >= 2);
    let mut cells = vec![Vec::new(), Vec::new()];
    for v in 0..n {
        cells[0].push(Cell { vertices: vec![v], faces: vec![] });
    }
    for i in 0..n - 1 {
        cells[1].push(Cell { vertices: vec![i, i + 1], faces: vec![i + 1, i] });
    }
    cells[1].push(Cell { vertices: vec![0, n - 1], faces: vec![n - 1, 0] });
    let end = vec![vec![false; n], vec![false; n]];
    CellComplex::from_cells(&format!("ring({n})"), cells, end).expect("ring is well formed")
}

fn path_complex(n: usize) -> CellComplex {
    let mut cells = vec![Vec::new(), Vec::new()];
    for v in 0..n {
        cells[0].push(Cell { vertices: vec![v], faces: vec![] });
    }
    for i in 0..n - 1 {
        cells[1].push(Cell { vertices: vec![i, i + 1], faces: vec![i + 1, i] });
    }
    let mut end = vec![vec![false; n], vec![false; n - 1]];
    end[0][0] = true;
    end[0][n - 1] = true;
    CellComplex::from_cells(&format!("path({n})"), cells, end).expect("path is well formed")
}

/// Parsed catalog entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceDescriptor {
    Circle(usize),
    Path(usize),
    Torus2(usize, usize),
    Sphere2,
    Sphere3,
    Torus3(usize, usize, usize),
    Cylinder(usize, usize),
    Disk(usize),
    LineTimesSphere2(usize),
}

impl SurfaceDescriptor {
    pub fn parse(s: &str) -> Result<Self, Error> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, args) = match t.find('(') {
            Some(i) if t.ends_with(')') => (&t[..i], t[i + 1..t.len() - 1].to_string()),
            Some(_) => return Err(Error::UnknownDescriptor(s.to_string())),
            None => (t.as_str(), String::new()),
        };
        let parts: Vec<&str> = if args.is_empty() { Vec::new() } else { args.split(',').collect() };
        let mut nums = Vec::new();
        let mut flags = Vec::new();
        for p in &parts {
            match p.parse::<usize>() {
                Ok(v) => nums.push(v),
                Err(_) => flags.push(*p),
            }
        }
        let bad = || Error::UnknownDescriptor(s.to_string());
        let want = |k: usize| if nums.len() == k { Ok(()) } else { Err(bad()) };
        // Catalog entries with a boundary always mark it as the end collar.
        if !matches!(flags.as_slice(), [] | ["ends"]) {
            return Err(bad());
        }
        let no_flags = || if flags.is_empty() { Ok(()) } else { Err(bad()) };
        Ok(match head {
            "circle" => {
                want(1)?;
                no_flags()?;
                SurfaceDescriptor::Circle(nums[0])
            }
            "path" => {
                want(1)?;
                SurfaceDescriptor::Path(nums[0])
            }
            "torus2" => {
                want(2)?;
                no_flags()?;
                SurfaceDescriptor::Torus2(nums[0], nums[1])
            }
            "sphere2" => {
                want(0)?;
                no_flags()?;
                SurfaceDescriptor::Sphere2
            }
            "sphere3" => {
                want(0)?;
                no_flags()?;
                SurfaceDescriptor::Sphere3
            }
            "torus3" => {
                want(3)?;
                no_flags()?;
                SurfaceDescriptor::Torus3(nums[0], nums[1], nums[2])
            }
            "cylinder" => {
                want(2)?;
                SurfaceDescriptor::Cylinder(nums[0], nums[1])
            }
            "disk" => {
                want(1)?;
                SurfaceDescriptor::Disk(nums[0])
            }
            "line_times_sphere2" => {
                want(1)?;
                SurfaceDescriptor::LineTimesSphere2(nums[0])
            }
            _ => return Err(bad()),
        })
    }

    pub fn canonical(&self) -> String {
        match self {
            SurfaceDescriptor::Circle(n) => format!("circle({n})"),
            SurfaceDescriptor::Path(n) => format!("path({n})"),
            SurfaceDescriptor::Torus2(p, q) => format!("torus2({p},{q})"),
            SurfaceDescriptor::Sphere2 => "sphere2".into(),
            SurfaceDescriptor::Sphere3 => "sphere3".into(),
            SurfaceDescriptor::Torus3(p, q, r) => format!("torus3({p},{q},{r})"),
            SurfaceDescriptor::Cylinder(n, m) => format!("cylinder({n},{m})"),
            SurfaceDescriptor::Disk(n) => format!("disk({n})"),
            SurfaceDescriptor::LineTimesSphere2(n) => format!("line_times_sphere2({n})"),
        }
    }
}

fn too_small(d: &SurfaceDescriptor, reason: &str) -> Error {
    Error::TooSmall { descriptor: d.canonical(), reason: reason.to_string() }
}

fn octahedron() -> CellComplex {
    // 0=+x 1=-x 2=+y 3=-y 4=+z 5=-z
    let mut top = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for c in [4, 5] {
                top.push(vec![a, b, c]);
            }
        }
    }
    CellComplex::from_simplices("sphere2", &top, &[]).expect("octahedron is well formed")
}

/// Parse a descriptor string and build the surface.
pub fn build_sigma_str(s: &str) -> Result<CellComplex, Error> {
    build_sigma(&SurfaceDescriptor::parse(s)?)
}

pub fn build_sigma(d: &SurfaceDescriptor) -> Result<CellComplex, Error> {
    let name = d.canonical();
    match *d {
        SurfaceDescriptor::Circle(n) => {
            if n < 3 {
                return Err(too_small(d, "a triangulated circle needs at least 3 vertices"));
            }
            let r = ring(n);
            CellComplex::from_cells(&name, r.cells, r.end)
        }
        SurfaceDescriptor::Path(n) => {
            if n < 2 {
                return Err(too_small(d, "a path needs at least 2 vertices"));
            }
            Ok(path_complex(n))
        }
        SurfaceDescriptor::Torus2(p, q) => {
            if p < 2 || q < 2 {
                return Err(too_small(d, "each circle factor needs at least 2 vertices"));
            }
            CellComplex::product(&name, &ring(p), &ring(q))
        }
        SurfaceDescriptor::Sphere2 => Ok(octahedron()),
        SurfaceDescriptor::Sphere3 => {
            let top: Vec<Vec<usize>> =
                (0..5).map(|skip| (0..5).filter(|v| *v != skip).collect()).collect();
            CellComplex::from_simplices(&name, &top, &[])
        }
        SurfaceDescriptor::Torus3(p, q, r) => {
            if p < 2 || q < 2 || r < 2 {
                return Err(too_small(d, "each circle factor needs at least 2 vertices"));
            }
            let t2 = CellComplex::product("t2", &ring(p), &ring(q))?;
            CellComplex::product(&name, &t2, &ring(r))
        }
        SurfaceDescriptor::Cylinder(n, m) => {
            if n < 3 || m < 2 {
                return Err(too_small(d, "needs circle(n>=3) times path(m>=2)"));
            }
            CellComplex::product(&name, &ring(n), &path_complex(m))
        }
        SurfaceDescriptor::Disk(n) => {
            if n < 3 {
                return Err(too_small(d, "the boundary circle needs at least 3 vertices"));
            }
            let mut top = Vec::new();
            let mut rim = Vec::new();
            for i in 1..=n {
                let j = if i == n { 1 } else { i + 1 };
                top.push(vec![0, i, j]);
                rim.push(vec![i, j]);
            }
            CellComplex::from_simplices(&name, &top, &rim)
        }
        SurfaceDescriptor::LineTimesSphere2(n) => {
            if n < 2 {
                return Err(too_small(d, "the line factor needs at least 2 vertices"));
            }
            CellComplex::product(&name, &path_complex(n), &octahedron())
        }
    }
}

/// Discrete time: slices `0..n_slices`, edge `j` joins slices `j` and `j+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeAxis {
    n_slices: usize,
    collar_width: usize,
    base_slice: usize,
}

impl TimeAxis {
    /// The base slice defaults to the middle slice.
    pub fn new(n_slices: usize, collar_width: usize) -> Result<Self, Error> {
        Self::with_base(n_slices, collar_width, n_slices / 2)
    }

    pub fn with_base(n_slices: usize, collar_width: usize, base_slice: usize) -> Result<Self, Error> {
        if n_slices < 3 {
            return Err(Error::TimeAxis(format!("{n_slices} slices, need at least 3")));
        }
        if collar_width < 1 || 2 * collar_width >= n_slices {
            return Err(Error::TimeAxis(format!(
                "collar width {collar_width} does not fit {n_slices} slices"
            )));
        }
        if base_slice < collar_width || base_slice + collar_width >= n_slices {
            return Err(Error::TimeAxis(format!("base slice {base_slice} lies in a collar")));
        }
        Ok(TimeAxis { n_slices, collar_width, base_slice })
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }
    pub fn n_edges(&self) -> usize {
        self.n_slices - 1
    }
    pub fn collar_width(&self) -> usize {
        self.collar_width
    }
    pub fn base_slice(&self) -> usize {
        self.base_slice
    }

    pub fn is_collar_slice(&self, n: usize) -> bool {
        n < self.collar_width || n + self.collar_width >= self.n_slices
    }

    /// An edge is in the collar when both endpoints are.
    pub fn is_collar_edge(&self, j: usize) -> bool {
        j + 1 < self.collar_width || j + self.collar_width >= self.n_slices
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellType {
    /// time vertex ⊗ Σ-cell
    One,
    /// time edge ⊗ Σ-cell
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductCell {
    pub ty: CellType,
    /// Slice index for type one, edge index for type two.
    pub time: usize,
    pub sigma: usize,
}

/// Tensor product of the time path complex with Σ, time factor first.
///
/// Degree-k cells are ordered slice by slice: the type-one cells of slice
/// `n` come first, followed by the type-two cells of edge `n`.
#[derive(Clone, Debug)]
pub struct ProductSpacetime {
    time: TimeAxis,
    sigma: Arc<CellComplex>,
    name: String,
    coboundary: Vec<SparseMatrix>,
    fundamental: Vec<(usize, i8)>,
    id: u64,
}

pub fn build_product(time: TimeAxis, sigma: Arc<CellComplex>) -> ProductSpacetime {
    ProductSpacetime::new(time, sigma)
}

impl ProductSpacetime {
    pub fn new(time: TimeAxis, sigma: Arc<CellComplex>) -> Self {
        let name = format!(
            "time({},collar {})x{}",
            time.n_slices, time.collar_width, sigma.name
        );
        let mut me = ProductSpacetime {
            time,
            sigma,
            name,
            coboundary: Vec::new(),
            fundamental: Vec::new(),
            id: 0,
        };
        let m = me.dim();
        me.coboundary = (0..m).map(|k| me.build_coboundary(k)).collect();
        // Orientation Σ ∧ time, i.e. (−1)^{dim Σ} times the time-first class.
        let sign: i8 = if (m - 1) % 2 == 0 { 1 } else { -1 };
        let top = m - 1;
        me.fundamental = (0..me.time.n_edges())
            .flat_map(|j| {
                let s = &me.sigma;
                (0..s.count(top)).map(move |t| (j, t, s.orientation[t]))
            })
            .map(|(j, t, o)| (me.index_type2(m, j, t), o * sign))
            .collect();
        let mut h = fnv1a(me.name.as_bytes(), me.sigma.id);
        h = fnv1a(&(me.time.base_slice as u64).to_le_bytes(), h);
        me.id = h;
        me
    }

    pub fn time(&self) -> &TimeAxis {
        &self.time
    }
    pub fn sigma(&self) -> &CellComplex {
        &self.sigma
    }
    pub fn sigma_arc(&self) -> Arc<CellComplex> {
        self.sigma.clone()
    }

    /// Same Σ and collar, different base slice.
    pub fn with_base_slice(&self, base: usize) -> Result<Self, Error> {
        let t = TimeAxis::with_base(self.time.n_slices, self.time.collar_width, base)?;
        Ok(ProductSpacetime::new(t, self.sigma.clone()))
    }

    /// Same Σ, different number of slices and collar.
    pub fn with_time(&self, n_slices: usize, collar: usize) -> Result<Self, Error> {
        Ok(ProductSpacetime::new(TimeAxis::new(n_slices, collar)?, self.sigma.clone()))
    }

    fn sc(&self, k: usize) -> usize {
        self.sigma.count(k)
    }
    fn sc_lower(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.sigma.count(k - 1)
        }
    }

    pub fn stride(&self, k: usize) -> usize {
        self.sc(k) + self.sc_lower(k)
    }

    pub fn index_type1(&self, k: usize, n: usize, sigma: usize) -> usize {
        debug_assert!(n < self.time.n_slices && sigma < self.sc(k));
        n * self.stride(k) + sigma
    }

    pub fn index_type2(&self, k: usize, j: usize, sigma: usize) -> usize {
        debug_assert!(j < self.time.n_edges() && sigma < self.sc_lower(k));
        j * self.stride(k) + self.sc(k) + sigma
    }

    pub fn cell(&self, k: usize, idx: usize) -> ProductCell {
        let s = self.stride(k);
        let (t, r) = (idx / s, idx % s);
        if r < self.sc(k) {
            ProductCell { ty: CellType::One, time: t, sigma: r }
        } else {
            ProductCell { ty: CellType::Two, time: t, sigma: r - self.sc(k) }
        }
    }

    pub fn cell_type(&self, k: usize, idx: usize) -> CellType {
        self.cell(k, idx).ty
    }

    /// Slice of the cell in time order: type-two cells report their edge
    /// index, i.e. the earlier endpoint.
    pub fn slice_of(&self, k: usize, idx: usize) -> usize {
        idx / self.stride(k)
    }

    pub fn is_time_collar(&self, k: usize, idx: usize) -> bool {
        let c = self.cell(k, idx);
        match c.ty {
            CellType::One => self.time.is_collar_slice(c.time),
            CellType::Two => self.time.is_collar_edge(c.time),
        }
    }

    pub fn is_space_end(&self, k: usize, idx: usize) -> bool {
        let c = self.cell(k, idx);
        match c.ty {
            CellType::One => self.sigma.is_end(k, c.sigma),
            CellType::Two => self.sigma.is_end(k - 1, c.sigma),
        }
    }

    /// All degree-k cells whose time coordinate lies in `slices` (type one)
    /// or whose edge lies inside it (type two).
    pub fn cells_in_slab(&self, k: usize, first: usize, last: usize) -> Vec<usize> {
        (0..self.count(k))
            .filter(|&i| {
                let c = self.cell(k, i);
                match c.ty {
                    CellType::One => c.time >= first && c.time <= last,
                    CellType::Two => c.time >= first && c.time < last,
                }
            })
            .collect()
    }

    fn build_coboundary(&self, k: usize) -> SparseMatrix {
        let n_s = self.time.n_slices;
        let rows = self.count(k + 1);
        let cols = self.count(k);
        let mut t = Vec::new();
        for n in 0..n_s {
            // type one (n, σ) with σ a k-cell
            for s in 0..self.sc(k) {
                let c = self.index_type1(k, n, s);
                if k < self.sigma.dim {
                    for (r, a) in self.sigma.transposed_coboundary_row(k, s) {
                        t.push((self.index_type1(k + 1, n, r), c, a));
                    }
                }
                if n + 1 < n_s {
                    t.push((self.index_type2(k + 1, n, s), c, int(-1)));
                }
                if n > 0 {
                    t.push((self.index_type2(k + 1, n - 1, s), c, int(1)));
                }
            }
            if n + 1 == n_s || k == 0 {
                continue;
            }
            // type two (n, σ) with σ a (k−1)-cell: −(e_n ⊗ d σ)
            for s in 0..self.sc(k - 1) {
                let c = self.index_type2(k, n, s);
                for (r, a) in self.sigma.transposed_coboundary_row(k - 1, s) {
                    t.push((self.index_type2(k + 1, n, r), c, -a));
                }
            }
        }
        SparseMatrix::from_triplets(rows, cols, t)
    }

    /// Apply the three collar conditions to a mask.
    fn mask(&self, k: usize, time: bool, space: bool) -> Vec<bool> {
        (0..self.count(k))
            .map(|i| (time && self.is_time_collar(k, i)) || (space && self.is_space_end(k, i)))
            .collect()
    }

    /// Cup product on the tensor product; see the module notes.
    fn cup_impl(&self, p: usize, a: &[Q], q: usize, b: &[Q]) -> Vec<Q> {
        let n = p + q;
        let m = self.dim();
        if n > m {
            return Vec::new();
        }
        let s = &self.sigma;
        let mut out = vec![Q::from(0u32); self.count(n)];
        for (idx, slot) in out.iter_mut().enumerate() {
            let c = self.cell(n, idx);
            match c.ty {
                CellType::One => {
                    if p > s.dim || q > s.dim {
                        continue;
                    }
                    let f = s.front_face(n, c.sigma, p);
                    let g = s.back_face(n, c.sigma, q);
                    let x = &a[self.index_type1(p, c.time, f)];
                    let y = &b[self.index_type1(q, c.time, g)];
                    if *x != 0u32 && *y != 0u32 {
                        *slot = x * y;
                    }
                }
                CellType::Two => {
                    let j = c.time;
                    let mut acc = Q::from(0u32);
                    if p >= 1 && q <= s.dim {
                        let f = s.front_face(n - 1, c.sigma, p - 1);
                        let g = s.back_face(n - 1, c.sigma, q);
                        let x = &a[self.index_type2(p, j, f)];
                        let y = &b[self.index_type1(q, j + 1, g)];
                        if *x != 0u32 && *y != 0u32 {
                            acc += x * y;
                        }
                    }
                    if q >= 1 && p <= s.dim {
                        let f = s.front_face(n - 1, c.sigma, p);
                        let g = s.back_face(n - 1, c.sigma, q - 1);
                        let x = &a[self.index_type1(p, j, f)];
                        let y = &b[self.index_type2(q, j, g)];
                        if *x != 0u32 && *y != 0u32 {
                            if p % 2 == 0 {
                                acc += x * y;
                            } else {
                                acc -= x * y;
                            }
                        }
                    }
                    *slot = acc;
                }
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let counts: Vec<String> =
            (0..=self.dim()).map(|k| format!("{}", self.count(k))).collect();
        format!(
            "{}: cells by degree ({}); collar width {}, base slice {}",
            self.name,
            counts.join(", "),
            self.time.collar_width,
            self.time.base_slice
        )
    }
}

impl CellComplex {
    /// Nonzero entries of column `s` of the degree-k coboundary.
    fn transposed_coboundary_row(&self, k: usize, s: usize) -> Vec<(usize, Q)> {
        self.cobt[k].row(s).to_vec()
    }
}

impl Complex for ProductSpacetime {
    fn id(&self) -> u64 {
        self.id
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.sigma.dim + 1
    }
    fn count(&self, k: usize) -> usize {
        if k > self.dim() {
            return 0;
        }
        self.time.n_slices * self.sc(k) + self.time.n_edges() * self.sc_lower(k)
    }
    fn coboundary(&self, k: usize) -> &SparseMatrix {
        &self.coboundary[k]
    }
    fn excluded(&self, k: usize, s: SupportClass) -> Vec<bool> {
        match s {
            SupportClass::Free => vec![false; self.count(k)],
            SupportClass::TC => self.mask(k, true, false),
            SupportClass::SC => self.mask(k, false, true),
            SupportClass::Compact => self.mask(k, true, true),
        }
    }
    fn fundamental_class(&self) -> &[(usize, i8)] {
        &self.fundamental
    }
    fn cup_coeffs(&self, p: usize, a: &[Q], q: usize, b: &[Q]) -> Vec<Q> {
        self.cup_impl(p, a, q, b)
    }
    fn right_functional(&self, p: usize, a: &[Q]) -> Vec<Q> {
        self.functional(p, a, true)
    }
    fn left_functional(&self, q: usize, b: &[Q]) -> Vec<Q> {
        self.functional(q, b, false)
    }
}

impl ProductSpacetime {
    /// Both pairing functionals. Top cells are type two, `(j, σ)`; the cup
    /// splits into `a₂(j, front σ)·b₁(j+1, back σ)` and
    /// `(−1)^p a₁(j, front σ)·b₂(j, back σ)`.
    fn functional(&self, deg: usize, v: &[Q], right: bool) -> Vec<Q> {
        let m = self.dim();
        let (p, q) = if right { (deg, m - deg) } else { (m - deg, deg) };
        let out_deg = if right { q } else { p };
        let s = &self.sigma;
        let top = m - 1;
        let mut f = vec![Q::from(0u32); self.count(out_deg)];
        for &(idx, o) in &self.fundamental {
            let c = self.cell(m, idx);
            let j = c.time;
            let mut terms: Vec<(usize, usize, bool)> = Vec::with_capacity(2);
            if p >= 1 {
                let a_i = self.index_type2(p, j, s.front_face(top, c.sigma, p - 1));
                let b_i = self.index_type1(q, j + 1, s.back_face(top, c.sigma, q));
                terms.push((a_i, b_i, false));
            }
            if q >= 1 {
                let a_i = self.index_type1(p, j, s.front_face(top, c.sigma, p));
                let b_i = self.index_type2(q, j, s.back_face(top, c.sigma, q - 1));
                terms.push((a_i, b_i, p % 2 == 1));
            }
            for (a_i, b_i, neg) in terms {
                let (src, dst) = if right { (a_i, b_i) } else { (b_i, a_i) };
                let x = &v[src];
                if *x == 0u32 {
                    continue;
                }
                if (o > 0) != neg {
                    f[dst] += x;
                } else {
                    f[dst] -= x;
                }
            }
        }
        f
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshReport {
    pub fixture: String,
    pub sigma: String,
    pub sigma_counts: Vec<usize>,
    pub spacetime_counts: Vec<usize>,
    pub top_cells: usize,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn check_dd(x: &dyn Complex, name: &str) -> CheckOutcome {
    let mut c = CheckOutcome::new(name);
    for k in 0..x.dim().saturating_sub(1) {
        let dd = x.coboundary(k + 1).matmul(x.coboundary(k));
        c.record(dd.is_zero(), || format!("degree {k}: composite has {} nonzero entries", dd.nnz()));
    }
    c
}

/// Faces of end cells are end cells; interior codimension-one cells meet
/// exactly two top cells with cancelling induced signs.
fn check_sigma_structure(s: &CellComplex) -> Vec<CheckOutcome> {
    let mut collar = CheckOutcome::new("end_collar_is_subcomplex");
    for k in 1..=s.dim {
        for (i, c) in s.cells[k].iter().enumerate() {
            if s.end[k][i] {
                let bad = c.faces.iter().find(|f| !s.end[k - 1][**f]);
                collar.record(bad.is_none(), || format!("{k}-cell {i} has the non-end face {}", bad.unwrap()));
            }
        }
    }
    let mut orient = CheckOutcome::new("orientation_cancels");
    if s.dim >= 1 {
        let top = s.dim;
        let d = s.coboundary(top - 1).transpose();
        for f in 0..s.count(top - 1) {
            let row = d.row(f);
            let total: i64 = row.iter().map(|(t, a)| if *a > 0u32 { 1 } else { -1 } * s.orientation[*t] as i64).sum();
            let ok = match row.len() {
                2 => total == 0,
                1 => !s.is_closed(),
                _ => false,
            };
            orient.record(ok, || format!("face {f} meets {} top cells with induced sum {total}", row.len()));
        }
    }
    vec![collar, orient]
}

/// Structural checks on a product spacetime and its Cauchy surface.
pub fn verify_mesh(m: &ProductSpacetime) -> Result<MeshReport, Error> {
    let s = m.sigma();
    let mut checks = vec![check_dd(s, "sigma_dd_zero"), check_dd(m, "spacetime_dd_zero")];
    checks.extend(check_sigma_structure(s));
    let n = m.time().n_slices();
    let mut counts = CheckOutcome::new("product_counts");
    for k in 0..=m.dim() {
        let want = n * s.count(k) + if k >= 1 { (n - 1) * s.count(k - 1) } else { 0 };
        counts.record(m.count(k) == want, || format!("degree {k}: {} cells, expected {want}", m.count(k)));
    }
    let top = m.fundamental_class().len();
    counts.record(top == (n - 1) * s.count(s.dim()), || format!("{top} top cells in the fundamental class"));
    checks.push(counts);
    let mut det = CheckOutcome::new("deterministic_build");
    let again = build_sigma_str(s.name())?;
    det.record(again.dump() == s.dump(), || "rebuilding the surface changed its cell list".into());
    let m2 = ProductSpacetime::new(m.time().clone(), Arc::new(again));
    det.record(m2.id() == m.id(), || "rebuilding the spacetime changed its identifier".into());
    checks.push(det);
    Ok(MeshReport {
        fixture: m.name().to_string(),
        sigma: s.name().to_string(),
        sigma_counts: (0..=s.dim()).map(|k| s.count(k)).collect(),
        spacetime_counts: (0..=m.dim()).map(|k| m.count(k)).collect(),
        top_cells: top,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn counts(c: &dyn Complex) -> Vec<usize> {
        (0..=c.dim()).map(|k| c.count(k)).collect()
    }

    fn dd_zero(c: &dyn Complex) -> bool {
        (1..c.dim()).all(|k| c.coboundary(k).matmul(c.coboundary(k - 1)).is_zero())
    }

    #[test]
    fn catalog_counts() {
        let cases = [
            ("circle(3)", vec![3, 3]),
            ("path(4)", vec![4, 3]),
            ("sphere2", vec![6, 12, 8]),
            ("sphere3", vec![5, 10, 10, 5]),
            ("torus2(3,3)", vec![9, 27, 18]),
            ("torus3(2,2,2)", vec![8, 56, 96, 48]),
            ("disk(5)", vec![6, 10, 5]),
            ("cylinder(3,2)", vec![6, 12, 6]),
        ];
        for (d, want) in cases {
            let c = build_sigma_str(d).unwrap();
            assert_eq!(counts(&c), want, "{d}");
            assert!(dd_zero(&c), "{d}");
        }
    }

    #[test]
    fn closed_fixtures_are_closed() {
        for d in ["circle(3)", "sphere2", "sphere3", "torus2(3,3)", "torus3(2,2,2)"] {
            let c = build_sigma_str(d).unwrap();
            assert!(c.is_closed(), "{d}");
            assert!(!c.has_ends(), "{d}");
        }
        let p = build_sigma_str("path(4)").unwrap();
        assert!(!p.is_closed());
        assert_eq!(p.end_mask(0), &[true, false, false, true]);
    }

    #[test]
    fn opposite_induced_orientations() {
        for d in ["sphere3", "torus2(3,3)", "torus3(2,2,2)", "line_times_sphere2(3)"] {
            let c = build_sigma_str(d).unwrap();
            let top = c.dim();
            let mut seen = vec![Vec::new(); c.count(top - 1)];
            for (t, cell) in c.cells(top).iter().enumerate() {
                for (i, f) in cell.faces.iter().enumerate() {
                    let s = if i % 2 == 0 { 1 } else { -1 };
                    seen[*f].push(s * c.orientation()[t]);
                }
            }
            for (f, s) in seen.iter().enumerate() {
                if s.len() == 2 {
                    assert_eq!(s[0] + s[1], 0, "{d} face {f}");
                } else {
                    assert!(c.is_end(top - 1, f), "{d} face {f}");
                }
            }
        }
    }

    #[test]
    fn too_small_and_unknown() {
        assert!(matches!(build_sigma_str("circle(2)"), Err(Error::TooSmall { .. })));
        assert!(matches!(build_sigma_str("klein(3)"), Err(Error::UnknownDescriptor(_))));
        assert!(matches!(build_sigma_str("circle(3"), Err(Error::UnknownDescriptor(_))));
    }

    #[test]
    fn describe_sphere3() {
        let c = build_sigma_str("sphere3").unwrap();
        assert_eq!(c.describe(), "5 vertices, 10 edges, 10 triangles, 5 tetrahedra");
    }

    #[test]
    fn product_spacetime_counts() {
        let m = ProductSpacetime::new(
            TimeAxis::new(8, 2).unwrap(),
            Arc::new(build_sigma_str("circle(3)").unwrap()),
        );
        assert_eq!(counts(&m), vec![24, 45, 21]);
        assert!(dd_zero(&m));
        let m = ProductSpacetime::new(
            TimeAxis::new(3, 1).unwrap(),
            Arc::new(build_sigma_str("path(2)").unwrap()),
        );
        assert_eq!(m.fundamental_class().len(), 2);
    }

    #[test]
    fn product_indexing_round_trip() {
        let m = ProductSpacetime::new(
            TimeAxis::new(5, 1).unwrap(),
            Arc::new(build_sigma_str("torus2(2,3)").unwrap()),
        );
        for k in 0..=m.dim() {
            for i in 0..m.count(k) {
                let c = m.cell(k, i);
                let back = match c.ty {
                    CellType::One => m.index_type1(k, c.time, c.sigma),
                    CellType::Two => m.index_type2(k, c.time, c.sigma),
                };
                assert_eq!(back, i);
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let a = build_sigma_str("torus3(2,2,2)").unwrap();
        let b = build_sigma_str("torus3(2,2,2)").unwrap();
        assert_eq!(a.dump(), b.dump());
        assert_eq!(a.id(), b.id());
        assert!(a.dump().contains("incidence 1 "));
    }

    #[test]
    fn time_axis_rules() {
        assert!(TimeAxis::new(2, 1).is_err());
        assert!(TimeAxis::new(4, 2).is_err());
        assert!(TimeAxis::with_base(8, 2, 1).is_err());
        let t = TimeAxis::new(8, 2).unwrap();
        assert_eq!(t.base_slice(), 4);
        let collar: Vec<usize> = (0..7).filter(|j| t.is_collar_edge(*j)).collect();
        assert_eq!(collar, vec![0, 6]);
    }
}
