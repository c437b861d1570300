//! Pairing matrices on cohomology and their nondegeneracy certificates.

use rand::Rng;
use serde::Serialize;

use crate::cochain::{coboundary, pairing, random_cochain, Cochain, SupportClass};
use crate::cohomology::{cohomology_basis, QuotientBasis};
use crate::error::Error;
use crate::homotopy::{extend_e, pullback_pi, TimeBump};
use crate::linalg::DenseMatrix;
use crate::mesh::{Complex, ProductSpacetime};
use crate::scalar::{format_q, Q};

fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::from(0u32);
    for (x, y) in a.iter().zip(b) {
        if *x != 0u32 && *y != 0u32 {
            s += x * y;
        }
    }
    s
}

/// Entry (i, j) is `⟨aᵢ, bⱼ⟩`. Every representative is first paired
/// against the coboundary generators of the partner class.
pub fn pairing_matrix(
    x: &dyn Complex,
    a: &QuotientBasis,
    b: &QuotientBasis,
) -> Result<DenseMatrix, Error> {
    let (p, q) = (a.degree(), b.degree());
    if p + q != x.dim() {
        return Err(Error::Pairing(format!("degrees {p} + {q} are not complementary")));
    }
    if a.support().join(b.support()) != SupportClass::Compact {
        return Err(Error::Pairing(format!(
            "support pattern ({}, {})",
            a.support().as_str(),
            b.support().as_str()
        )));
    }
    let mut m = DenseMatrix::zeros(a.dim(), b.dim());
    for (i, ra) in a.reps().iter().enumerate() {
        let f = x.right_functional(p, ra.coeffs());
        for (g, gen) in b.coboundary_generators().iter().enumerate() {
            let v: Q = gen.iter().map(|(c, w)| &f[*c] * w).sum();
            if v != 0u32 {
                return Err(Error::Pairing(format!(
                    "representative {i} pairs to {} with coboundary generator {g}",
                    format_q(&v)
                )));
            }
        }
        for (j, rb) in b.reps().iter().enumerate() {
            m.set(i, j, dot(&f, rb.coeffs()));
        }
    }
    for (j, rb) in b.reps().iter().enumerate() {
        let g = x.left_functional(q, rb.coeffs());
        for (h, gen) in a.coboundary_generators().iter().enumerate() {
            let v: Q = gen.iter().map(|(c, w)| &g[*c] * w).sum();
            if v != 0u32 {
                return Err(Error::Pairing(format!(
                    "coboundary generator {h} pairs to {} with representative {j}",
                    format_q(&v)
                )));
            }
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreePairing {
    pub left_degree: usize,
    pub right_degree: usize,
    pub left_dim: usize,
    pub right_dim: usize,
    pub matrix: Vec<Vec<String>>,
    pub determinant: Option<String>,
    pub invertible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub fixture: String,
    pub kind: String,
    pub degrees: Vec<DegreePairing>,
    pub passed: bool,
    pub witness: Option<String>,
}

fn degree_entry(a: &QuotientBasis, b: &QuotientBasis, m: &DenseMatrix) -> DegreePairing {
    let square = m.is_square();
    let det = if square { Some(m.det()) } else { None };
    let invertible = det.as_ref().is_some_and(|d| *d != 0u32);
    DegreePairing {
        left_degree: a.degree(),
        right_degree: b.degree(),
        left_dim: a.dim(),
        right_dim: b.dim(),
        matrix: m.to_strings(),
        determinant: det.as_ref().map(format_q),
        invertible,
    }
}

fn witness_for(m: &DenseMatrix, k: usize) -> String {
    if !m.is_square() {
        return format!("degree {k}: {}x{} pairing matrix", m.rows(), m.cols());
    }
    let ker = m.transpose().kernel();
    let v: Vec<String> = ker.first().map(|v| v.iter().map(format_q).collect()).unwrap_or_default();
    format!("degree {k}: class with coordinates [{}] pairs to zero", v.join(", "))
}

fn verify_pattern(
    x: &dyn Complex,
    kind: &str,
    left: SupportClass,
    right: SupportClass,
) -> Result<DualityReport, Error> {
    let n = x.dim();
    let mut degrees = Vec::new();
    let mut witness = None;
    for k in 0..=n {
        let a = cohomology_basis(x, k, left)?;
        let b = cohomology_basis(x, n - k, right)?;
        let m = pairing_matrix(x, &a, &b)?;
        let e = degree_entry(&a, &b, &m);
        if !e.invertible && witness.is_none() {
            witness = Some(witness_for(&m, k));
        }
        degrees.push(e);
    }
    Ok(DualityReport {
        fixture: x.name().to_string(),
        kind: kind.to_string(),
        passed: witness.is_none(),
        degrees,
        witness,
    })
}

/// `H_c^k × H^{n−k}` for every k.
pub fn verify_classical_duality(x: &dyn Complex) -> Result<DualityReport, Error> {
    verify_pattern(x, "compact-free", SupportClass::Compact, SupportClass::Free)
}

/// `H_sc^k × H_tc^{m−k}` for every k.
pub fn verify_sc_tc_duality(m: &ProductSpacetime) -> Result<DualityReport, Error> {
    verify_pattern(m, "sc-tc", SupportClass::SC, SupportClass::TC)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    pub fixture: String,
    pub basis_pairs: usize,
    pub random_pairs: usize,
    pub failures: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

fn random_class_member(
    x: &dyn Complex,
    h: &QuotientBasis,
    rng: &mut impl Rng,
) -> Result<Cochain, Error> {
    let k = h.degree();
    let s = h.support();
    let mut c = Cochain::zero(x, k, s);
    for r in h.reps() {
        let w: i64 = rng.random_range(-3..=3);
        c = c.add(&r.scale(&Q::from(w)))?;
    }
    if k > 0 {
        let b = random_cochain(x, k - 1, s, rng);
        c = c.add(&coboundary(x, &b)?)?.with_support(x, s)?;
    }
    Ok(c)
}

/// `⟨π*φ, eψ⟩ = ⟨φ, ψ⟩_Σ` on basis pairs and on `n_random` random closed
/// pairs per degree.
pub fn verify_compatibility_lemma(
    m: &ProductSpacetime,
    bump: &TimeBump,
    n_random: usize,
    rng: &mut impl Rng,
) -> Result<CompatibilityReport, Error> {
    let sigma = m.sigma();
    let top = sigma.dim();
    let mut failures = 0;
    let mut basis_pairs = 0;
    let mut random_pairs = 0;
    let mut witness = None;
    let mut check = |k: usize, phi: &Cochain, psi: &Cochain, failures: &mut usize| -> Result<(), Error> {
        let lhs = pairing(m, &pullback_pi(m, phi)?, &extend_e(m, psi, bump)?)?;
        let rhs = pairing(sigma, phi, psi)?;
        if lhs != rhs {
            *failures += 1;
            if witness.is_none() {
                witness = Some(format!(
                    "degree {k}: spacetime side {} against Σ side {}",
                    format_q(&lhs),
                    format_q(&rhs)
                ));
            }
        }
        Ok(())
    };
    for k in 0..=top {
        let hc = cohomology_basis(sigma, k, SupportClass::Compact)?;
        let hf = cohomology_basis(sigma, top - k, SupportClass::Free)?;
        for phi in hc.reps() {
            for psi in hf.reps() {
                check(k, phi, psi, &mut failures)?;
                basis_pairs += 1;
            }
        }
        for _ in 0..n_random {
            let phi = random_class_member(sigma, &hc, rng)?;
            let psi = random_class_member(sigma, &hf, rng)?;
            check(k, &phi, &psi, &mut failures)?;
            random_pairs += 1;
        }
    }
    Ok(CompatibilityReport {
        fixture: m.name().to_string(),
        basis_pairs,
        random_pairs,
        failures,
        passed: failures == 0,
        witness,
    })
}
