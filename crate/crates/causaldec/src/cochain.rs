//! Cochains with support classes, coboundary, cup product and integration.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{sparse_from_dense, SparseVec};
use crate::mesh::{CellType, Complex, ProductSpacetime};
use crate::scalar::{format_q, frac, parse_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SupportClass {
    Free,
    TC,
    SC,
    Compact,
}

impl SupportClass {
    pub const ALL: [SupportClass; 4] =
        [SupportClass::Free, SupportClass::TC, SupportClass::SC, SupportClass::Compact];

    pub fn as_str(self) -> &'static str {
        match self {
            SupportClass::Free => "free",
            SupportClass::TC => "tc",
            SupportClass::SC => "sc",
            SupportClass::Compact => "compact",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "free" => Ok(SupportClass::Free),
            "tc" => Ok(SupportClass::TC),
            "sc" => Ok(SupportClass::SC),
            "compact" => Ok(SupportClass::Compact),
            _ => Err(Error::Parse(format!("unknown support class {s:?}"))),
        }
    }

    fn bits(self) -> u8 {
        match self {
            SupportClass::Free => 0,
            SupportClass::TC => 1,
            SupportClass::SC => 2,
            SupportClass::Compact => 3,
        }
    }

    fn from_bits(b: u8) -> Self {
        match b {
            0 => SupportClass::Free,
            1 => SupportClass::TC,
            2 => SupportClass::SC,
            _ => SupportClass::Compact,
        }
    }

    /// The class imposing both sets of vanishing conditions.
    pub fn join(self, o: SupportClass) -> SupportClass {
        Self::from_bits(self.bits() | o.bits())
    }

    /// Whether every cochain of `self` is also of class `o`.
    pub fn refines(self, o: SupportClass) -> bool {
        self.bits() & o.bits() == o.bits()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    coeffs: Vec<Q>,
    support: SupportClass,
    home: u64,
}

impl Cochain {
    pub fn zero(x: &dyn Complex, k: usize, support: SupportClass) -> Self {
        Cochain { degree: k, coeffs: vec![Q::from(0u32); x.count(k)], support, home: x.id() }
    }

    pub fn from_coeffs(
        x: &dyn Complex,
        k: usize,
        coeffs: Vec<Q>,
        support: SupportClass,
    ) -> Result<Self, Error> {
        if k > x.dim() {
            return Err(Error::Degree { degree: k, max: x.dim() });
        }
        if coeffs.len() != x.count(k) {
            return Err(Error::Precondition(format!(
                "{} coefficients for {} cells",
                coeffs.len(),
                x.count(k)
            )));
        }
        check_support(x, k, &coeffs, support)?;
        Ok(Cochain { degree: k, coeffs, support, home: x.id() })
    }

    pub fn from_sparse(
        x: &dyn Complex,
        k: usize,
        v: &[(usize, Q)],
        support: SupportClass,
    ) -> Result<Self, Error> {
        let mut coeffs = vec![Q::from(0u32); x.count(k)];
        for (i, a) in v {
            coeffs[*i] = a.clone();
        }
        Self::from_coeffs(x, k, coeffs, support)
    }

    /// Indicator of one cell.
    pub fn unit(x: &dyn Complex, k: usize, cell: usize, support: SupportClass) -> Result<Self, Error> {
        Self::from_sparse(x, k, &[(cell, Q::from(1u32))], support)
    }

    /// The constant unit 0-cochain.
    pub fn one(x: &dyn Complex) -> Self {
        Cochain {
            degree: 0,
            coeffs: vec![Q::from(1u32); x.count(0)],
            support: SupportClass::Free,
            home: x.id(),
        }
    }

    /// Caller guarantees the class conditions.
    pub(crate) fn raw(degree: usize, coeffs: Vec<Q>, support: SupportClass, home: u64) -> Self {
        Cochain { degree, coeffs, support, home }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<Q> {
        self.coeffs
    }
    pub fn support(&self) -> SupportClass {
        self.support
    }
    pub fn home(&self) -> u64 {
        self.home
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0u32)
    }
    pub fn to_sparse(&self) -> SparseVec {
        sparse_from_dense(&self.coeffs)
    }

    fn same_home(&self, o: &Cochain) -> Result<(), Error> {
        if self.home != o.home {
            return Err(Error::ComplexMismatch(self.home, o.home));
        }
        if self.degree != o.degree {
            return Err(Error::Precondition(format!(
                "equal degrees, got {} and {}",
                self.degree, o.degree
            )));
        }
        Ok(())
    }

    /// Sum; the result carries the weaker of the two classes.
    pub fn add(&self, o: &Cochain) -> Result<Cochain, Error> {
        self.same_home(o)?;
        Ok(Cochain {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
            support: meet(self.support, o.support),
            home: self.home,
        })
    }

    pub fn sub(&self, o: &Cochain) -> Result<Cochain, Error> {
        self.same_home(o)?;
        Ok(Cochain {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
            support: meet(self.support, o.support),
            home: self.home,
        })
    }

    pub fn scale(&self, s: &Q) -> Cochain {
        Cochain {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
            support: self.support,
            home: self.home,
        }
    }

    /// Re-tag with another class, checking the vanishing conditions.
    pub fn with_support(&self, x: &dyn Complex, s: SupportClass) -> Result<Cochain, Error> {
        check_home(x, self)?;
        check_support(x, self.degree, &self.coeffs, s)?;
        Ok(Cochain { support: s, ..self.clone() })
    }

    /// Line format: a header line, then one `cell p/q` line per nonzero.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "cochain degree {} support {} complex {:016x}\n",
            self.degree,
            self.support.as_str(),
            self.home
        );
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a != 0u32 {
                let _ = writeln!(s, "{i} {}", format_q(a));
            }
        }
        s
    }

    pub fn from_text(x: &dyn Complex, text: &str) -> Result<Cochain, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty cochain text".into()))?;
        let w: Vec<&str> = head.split_whitespace().collect();
        if w.len() != 7 || w[0] != "cochain" || w[1] != "degree" || w[3] != "support" || w[5] != "complex" {
            return Err(Error::Parse(format!("bad cochain header {head:?}")));
        }
        let k: usize = w[2].parse().map_err(|_| Error::Parse(format!("bad degree {:?}", w[2])))?;
        let s = SupportClass::parse(w[4])?;
        let id = u64::from_str_radix(w[6], 16).map_err(|_| Error::Parse("bad complex id".into()))?;
        if id != x.id() {
            return Err(Error::ComplexMismatch(id, x.id()));
        }
        let mut v = Vec::new();
        for l in lines {
            let mut it = l.split_whitespace();
            let (Some(c), Some(q), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("bad cochain line {l:?}")));
            };
            let c: usize = c.parse().map_err(|_| Error::Parse(format!("bad cell id {c:?}")))?;
            if c >= x.count(k) {
                return Err(Error::Parse(format!("cell id {c} out of range")));
            }
            v.push((c, parse_q(q)?));
        }
        v.sort_by_key(|e| e.0);
        Cochain::from_sparse(x, k, &v, s)
    }
}

fn meet(a: SupportClass, b: SupportClass) -> SupportClass {
    SupportClass::from_bits(a.bits() & b.bits())
}

fn check_home(x: &dyn Complex, c: &Cochain) -> Result<(), Error> {
    if c.home != x.id() {
        return Err(Error::ComplexMismatch(c.home, x.id()));
    }
    Ok(())
}

fn check_support(x: &dyn Complex, k: usize, coeffs: &[Q], s: SupportClass) -> Result<(), Error> {
    if s == SupportClass::Free {
        return Ok(());
    }
    let ex = x.excluded(k, s);
    if let Some(i) = (0..coeffs.len()).find(|i| ex[*i] && coeffs[*i] != 0u32) {
        return Err(Error::Support(format!(
            "degree-{k} cochain is nonzero on cell {i}, excluded by class {}",
            s.as_str()
        )));
    }
    Ok(())
}

pub fn coboundary(x: &dyn Complex, c: &Cochain) -> Result<Cochain, Error> {
    check_home(x, c)?;
    if c.degree >= x.dim() {
        return Err(Error::Precondition(format!(
            "degree below {} for the coboundary, got {}",
            x.dim(),
            c.degree
        )));
    }
    let coeffs = x.coboundary(c.degree).apply(&c.coeffs);
    Ok(Cochain { degree: c.degree + 1, coeffs, support: c.support, home: c.home })
}

/// Cup product; the result carries the join of both classes.
pub fn cup(x: &dyn Complex, a: &Cochain, b: &Cochain) -> Result<Cochain, Error> {
    check_home(x, a)?;
    if a.home != b.home {
        return Err(Error::ComplexMismatch(a.home, b.home));
    }
    let n = a.degree + b.degree;
    if n > x.dim() {
        return Err(Error::Degree { degree: n, max: x.dim() });
    }
    let coeffs = x.cup_coeffs(a.degree, &a.coeffs, b.degree, &b.coeffs);
    let support = a.support.join(b.support);
    debug_assert!(check_support(x, n, &coeffs, support).is_ok());
    Ok(Cochain { degree: n, coeffs, support, home: a.home })
}

pub fn integrate(x: &dyn Complex, c: &Cochain) -> Result<Q, Error> {
    check_home(x, c)?;
    if c.degree != x.dim() {
        return Err(Error::Precondition(format!(
            "a top-degree cochain ({}) to integrate, got degree {}",
            x.dim(),
            c.degree
        )));
    }
    let mut s = Q::from(0u32);
    for (i, o) in x.fundamental_class() {
        if *o > 0 {
            s += &c.coeffs[*i];
        } else {
            s -= &c.coeffs[*i];
        }
    }
    Ok(s)
}

/// `⟨a, b⟩ = ∫ a ∪ b`; the two classes together must impose compact support.
pub fn pairing(x: &dyn Complex, a: &Cochain, b: &Cochain) -> Result<Q, Error> {
    if a.degree + b.degree != x.dim() {
        return Err(Error::Pairing(format!(
            "degrees {} + {} do not add up to {}",
            a.degree,
            b.degree,
            x.dim()
        )));
    }
    if a.support.join(b.support) != SupportClass::Compact {
        return Err(Error::Pairing(format!(
            "support pattern ({}, {}) does not make the product compact",
            a.support.as_str(),
            b.support.as_str()
        )));
    }
    integrate(x, &cup(x, a, b)?)
}

/// Split into the type-one and type-two parts.
pub fn decompose_types(m: &ProductSpacetime, c: &Cochain) -> Result<(Cochain, Cochain), Error> {
    check_home(m, c)?;
    let k = c.degree;
    let mut one = c.clone();
    let mut two = c.clone();
    for i in 0..c.coeffs.len() {
        match m.cell_type(k, i) {
            CellType::One => two.coeffs[i] = Q::from(0u32),
            CellType::Two => one.coeffs[i] = Q::from(0u32),
        }
    }
    Ok((one, two))
}

/// Zero the coefficients the class excludes and tag the result.
pub fn support_project(x: &dyn Complex, c: &Cochain, s: SupportClass) -> Result<Cochain, Error> {
    check_home(x, c)?;
    let ex = x.excluded(c.degree, s);
    let coeffs = c
        .coeffs
        .iter()
        .zip(ex)
        .map(|(a, e)| if e { Q::from(0u32) } else { a.clone() })
        .collect();
    Ok(Cochain { degree: c.degree, coeffs, support: s, home: c.home })
}

/// Seeded random cochain of the class: small integers and halves, about
/// one cell in three left at zero.
pub fn random_cochain(x: &dyn Complex, k: usize, s: SupportClass, rng: &mut impl Rng) -> Cochain {
    let ex = x.excluded(k, s);
    let coeffs = ex
        .iter()
        .map(|e| {
            if *e || rng.random_range(0..3) == 0 {
                Q::from(0u32)
            } else {
                frac(rng.random_range(-4..=4), rng.random_range(1..=2))
            }
        })
        .collect();
    Cochain { degree: k, coeffs, support: s, home: x.id() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sigma_str, TimeAxis};
    use crate::scalar::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn cyl() -> ProductSpacetime {
        ProductSpacetime::new(
            TimeAxis::new(8, 2).unwrap(),
            Arc::new(build_sigma_str("circle(3)").unwrap()),
        )
    }

    #[test]
    fn circle_vertex_indicator() {
        let c = build_sigma_str("circle(3)").unwrap();
        let v0 = Cochain::unit(&c, 0, 0, SupportClass::Free).unwrap();
        let d = coboundary(&c, &v0).unwrap();
        // edges: [0,1], [1,2], [0,2] (the edge v2v0 is stored as [0,2])
        assert_eq!(d.coeffs(), &[int(-1), int(0), int(-1)]);
        // oriented v2 -> v0 the stored edge [0,2] enters with sign -1
        assert_eq!(c.orientation()[2], -c.orientation()[0]);
    }

    #[test]
    fn cup_unit_and_front_face() {
        let c = build_sigma_str("circle(3)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_cochain(&c, 1, SupportClass::Free, &mut rng);
        assert_eq!(cup(&c, &Cochain::one(&c), &g).unwrap(), g);
        let v0 = Cochain::unit(&c, 0, 0, SupportClass::Free).unwrap();
        let p = cup(&c, &v0, &g).unwrap();
        assert_eq!(p.coeffs()[0], g.coeffs()[0]);
    }

    #[test]
    fn collar_projection() {
        let m = cyl();
        let one = Cochain::one(&m);
        let p = support_project(&m, &one, SupportClass::Compact).unwrap();
        for i in 0..m.count(0) {
            if m.is_time_collar(0, i) {
                assert_eq!(p.coeffs()[i], 0u32);
            }
        }
        assert_eq!(support_project(&m, &p, SupportClass::Compact).unwrap(), p);
        assert_eq!(support_project(&m, &one, SupportClass::Free).unwrap(), one);
    }

    #[test]
    fn text_round_trip() {
        let m = cyl();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_cochain(&m, 1, SupportClass::TC, &mut rng);
        let back = Cochain::from_text(&m, &c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn pairing_rejects_free_free() {
        let m = cyl();
        let a = Cochain::zero(&m, 1, SupportClass::Free);
        assert!(matches!(pairing(&m, &a, &a), Err(Error::Pairing(_))));
    }

    #[test]
    fn mismatched_complexes() {
        let m = cyl();
        let c = build_sigma_str("circle(3)").unwrap();
        let a = Cochain::one(&c);
        assert!(matches!(coboundary(&m, &a), Err(Error::ComplexMismatch(..))));
    }
}
