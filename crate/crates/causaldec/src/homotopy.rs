//! Slice maps between Σ and the product spacetime, and the two prefix-sum
//! chain homotopies.
//!
//! A type-two cochain `h ⊗ ψ` (time edge coefficient `h`, Σ-cochain `ψ`)
//! corresponds to `(−1)^{|ψ|} (π*ψ) ∧ h dt`, which fixes the signs below.

use rand::Rng;
use serde::Serialize;

use crate::cochain::{random_cochain, Cochain, SupportClass};
use crate::cohomology::{cohomology_basis, induced_map};
use crate::error::Error;
use crate::linalg::DenseMatrix;
use crate::mesh::{CellComplex, CellType, Complex, ProductSpacetime, TimeAxis};
use crate::scalar::{format_q, Q};

/// Time-edge 1-cochain with total weight one, vanishing on collar edges.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeBump {
    a: Vec<Q>,
}

impl TimeBump {
    pub fn new(time: &TimeAxis, a: Vec<Q>) -> Result<Self, Error> {
        if a.len() != time.n_edges() {
            return Err(Error::Bump(format!("{} weights for {} edges", a.len(), time.n_edges())));
        }
        if let Some(j) = (0..a.len()).find(|j| time.is_collar_edge(*j) && a[*j] != 0u32) {
            return Err(Error::Bump(format!("weight on collar edge {j}")));
        }
        let total: Q = a.iter().sum();
        if total != 1u32 {
            return Err(Error::Bump(format!("weights sum to {}", format_q(&total))));
        }
        Ok(TimeBump { a })
    }

    /// Unit weight on a single edge.
    pub fn at_edge(time: &TimeAxis, j: usize) -> Result<Self, Error> {
        if j >= time.n_edges() {
            return Err(Error::Bump(format!("edge {j} outside the axis")));
        }
        let mut a = vec![Q::from(0u32); time.n_edges()];
        a[j] = Q::from(1u32);
        Self::new(time, a)
    }

    /// Unit weight on the edge leaving the base slice.
    pub fn default_for(time: &TimeAxis) -> Self {
        Self::at_edge(time, time.base_slice()).expect("base edge lies off the collar")
    }

    pub fn weights(&self) -> &[Q] {
        &self.a
    }

    /// `Σ_{j<n} a(j)`.
    fn prefix(&self, n: usize) -> Q {
        self.a[..n].iter().sum()
    }
}

fn check_home(x: &dyn Complex, c: &Cochain) -> Result<(), Error> {
    if c.home() != x.id() {
        return Err(Error::ComplexMismatch(c.home(), x.id()));
    }
    Ok(())
}

fn sign(k: usize) -> Q {
    if k % 2 == 0 {
        Q::from(1u32)
    } else {
        Q::from(-1i32)
    }
}

/// `π*φ`: φ copied onto every slice.
pub fn pullback_pi(m: &ProductSpacetime, phi: &Cochain) -> Result<Cochain, Error> {
    check_home(m.sigma(), phi)?;
    let k = phi.degree();
    let mut out = vec![Q::from(0u32); m.count(k)];
    for n in 0..m.time().n_slices() {
        for (s, a) in phi.coeffs().iter().enumerate() {
            out[m.index_type1(k, n, s)] = a.clone();
        }
    }
    let support = match phi.support() {
        SupportClass::SC | SupportClass::Compact => SupportClass::SC,
        _ => SupportClass::Free,
    };
    Cochain::from_coeffs(m, k, out, support)
}

/// `s*c`: the type-one part on the base slice.
pub fn restrict_s(m: &ProductSpacetime, c: &Cochain) -> Result<Cochain, Error> {
    check_home(m, c)?;
    let k = c.degree();
    let sigma = m.sigma();
    if k > sigma.dim() {
        return Err(Error::Degree { degree: k, max: sigma.dim() });
    }
    let n0 = m.time().base_slice();
    let out = (0..sigma.count(k)).map(|s| c.coeffs()[m.index_type1(k, n0, s)].clone()).collect();
    let support = if c.support().refines(SupportClass::SC) {
        SupportClass::Compact
    } else {
        SupportClass::Free
    };
    Cochain::from_coeffs(sigma, k, out, support)
}

fn require(c: &Cochain, s: SupportClass) -> Result<(), Error> {
    if !c.support().refines(s) {
        return Err(Error::Support(format!(
            "input of class {} where {} is required",
            c.support().as_str(),
            s.as_str()
        )));
    }
    Ok(())
}

/// `P`: zero on type one; `h ⊗ ψ ↦ (−1)^{|ψ|} H ⊗ ψ` with `H` the signed
/// prefix sum of `h` from the base slice.
pub fn homotopy_p(m: &ProductSpacetime, c: &Cochain) -> Result<Cochain, Error> {
    check_home(m, c)?;
    require(c, SupportClass::SC)?;
    let k = c.degree();
    if k == 0 {
        return Err(Error::Degree { degree: 0, max: m.dim() });
    }
    let sigma = m.sigma();
    let (ns, n0) = (m.time().n_slices(), m.time().base_slice());
    let sg = sign(k - 1);
    let mut out = vec![Q::from(0u32); m.count(k - 1)];
    for s in 0..sigma.count(k - 1) {
        let h = |j: usize| &c.coeffs()[m.index_type2(k, j, s)];
        let mut acc = Q::from(0u32);
        for n in n0 + 1..ns {
            acc += h(n - 1);
            out[m.index_type1(k - 1, n, s)] = &acc * &sg;
        }
        let mut acc = Q::from(0u32);
        for n in (0..n0).rev() {
            acc -= h(n);
            out[m.index_type1(k - 1, n, s)] = &acc * &sg;
        }
    }
    Cochain::from_coeffs(m, k - 1, out, c.support())
}

/// `i`: type-two coefficients summed over time, with sign `(−1)^{|ψ|}`.
pub fn fiber_integrate_i(m: &ProductSpacetime, c: &Cochain) -> Result<Cochain, Error> {
    check_home(m, c)?;
    require(c, SupportClass::TC)?;
    let k = c.degree();
    if k == 0 {
        return Err(Error::Degree { degree: 0, max: m.dim() });
    }
    let sigma = m.sigma();
    let sg = sign(k - 1);
    let out = (0..sigma.count(k - 1))
        .map(|s| {
            let t: Q = (0..m.time().n_edges()).map(|j| &c.coeffs()[m.index_type2(k, j, s)]).sum();
            t * &sg
        })
        .collect();
    let support = if c.support() == SupportClass::Compact {
        SupportClass::Compact
    } else {
        SupportClass::Free
    };
    Cochain::from_coeffs(sigma, k - 1, out, support)
}

/// `e(ψ) = (π*ψ) ∧ a dt = (−1)^{|ψ|} a ⊗ ψ`.
pub fn extend_e(m: &ProductSpacetime, psi: &Cochain, bump: &TimeBump) -> Result<Cochain, Error> {
    check_home(m.sigma(), psi)?;
    if bump.a.len() != m.time().n_edges() {
        return Err(Error::Bump("bump built for another time axis".into()));
    }
    let k = psi.degree() + 1;
    let sg = sign(psi.degree());
    let mut out = vec![Q::from(0u32); m.count(k)];
    for (j, aj) in bump.a.iter().enumerate() {
        if *aj == 0u32 {
            continue;
        }
        let w = aj * &sg;
        for (s, p) in psi.coeffs().iter().enumerate() {
            if *p != 0u32 {
                out[m.index_type2(k, j, s)] = &w * p;
            }
        }
    }
    let support = if psi.support().refines(SupportClass::SC) {
        SupportClass::Compact
    } else {
        SupportClass::TC
    };
    Cochain::from_coeffs(m, k, out, support)
}

/// `Q`: zero on type one; `h ⊗ ψ ↦ (−1)^{|ψ|} ĥ ⊗ ψ` with
/// `ĥ(n) = Σ_{j<n} h(j) − (Σ h)(Σ_{j<n} a(j))`.
pub fn homotopy_q(m: &ProductSpacetime, c: &Cochain, bump: &TimeBump) -> Result<Cochain, Error> {
    check_home(m, c)?;
    require(c, SupportClass::TC)?;
    let k = c.degree();
    if k == 0 {
        return Err(Error::Degree { degree: 0, max: m.dim() });
    }
    let sigma = m.sigma();
    let ns = m.time().n_slices();
    let sg = sign(k - 1);
    let prefix_a: Vec<Q> = (0..ns).map(|n| bump.prefix(n)).collect();
    let mut out = vec![Q::from(0u32); m.count(k - 1)];
    for s in 0..sigma.count(k - 1) {
        let h: Vec<&Q> = (0..ns - 1).map(|j| &c.coeffs()[m.index_type2(k, j, s)]).collect();
        let total: Q = h.iter().copied().sum();
        let mut acc = Q::from(0u32);
        for n in 0..ns {
            if n > 0 {
                acc += h[n - 1];
            }
            let v = &acc - &total * &prefix_a[n];
            out[m.index_type1(k - 1, n, s)] = v * &sg;
        }
    }
    Cochain::from_coeffs(m, k - 1, out, c.support())
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeIso {
    pub degree: usize,
    pub dim_sigma: usize,
    pub dim_spacetime: usize,
    /// Matrix of the map Σ → spacetime (π* or e).
    pub up: Vec<Vec<String>>,
    /// Matrix of the map spacetime → Σ (s* or i).
    pub down: Vec<Vec<String>>,
    pub mutually_inverse: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub fixture: String,
    pub kind: String,
    pub degrees: Vec<DegreeIso>,
    pub passed: bool,
    pub witness: Option<String>,
}

fn mutually_inverse(up: &DenseMatrix, down: &DenseMatrix) -> bool {
    up.rows() == down.cols()
        && up.cols() == down.rows()
        && down.mul(up).is_identity()
        && up.mul(down).is_identity()
}

/// `π*` and `s*` between `H_c(Σ)` and `H_sc(M)`, degree by degree.
pub fn verify_sc_isomorphism(m: &ProductSpacetime) -> Result<IsoReport, Error> {
    let sigma: &CellComplex = m.sigma();
    let mut degrees = Vec::new();
    let mut witness = None;
    for k in 0..=m.dim() {
        let hm = cohomology_basis(m, k, SupportClass::SC)?;
        let (up, down) = if k <= sigma.dim() {
            let hs = cohomology_basis(sigma, k, SupportClass::Compact)?;
            let up = induced_map(&|c| pullback_pi(m, c), &hs, &hm)?;
            let down = induced_map(&|c| restrict_s(m, c), &hm, &hs)?;
            (up, down)
        } else {
            (DenseMatrix::zeros(hm.dim(), 0), DenseMatrix::zeros(0, hm.dim()))
        };
        let ok = mutually_inverse(&up, &down);
        if !ok && witness.is_none() {
            witness = Some(format!("degree {k}: induced matrices are not mutually inverse"));
        }
        degrees.push(DegreeIso {
            degree: k,
            dim_sigma: up.cols(),
            dim_spacetime: hm.dim(),
            up: up.to_strings(),
            down: down.to_strings(),
            mutually_inverse: ok,
        });
    }
    Ok(IsoReport {
        fixture: m.name().to_string(),
        kind: "sc".into(),
        passed: witness.is_none(),
        degrees,
        witness,
    })
}

/// `e` and `i` between `H^{k−1}(Σ)` and `H^k_tc(M)`, degree by degree.
pub fn verify_tc_isomorphism(m: &ProductSpacetime, bump: &TimeBump) -> Result<IsoReport, Error> {
    let sigma: &CellComplex = m.sigma();
    let mut degrees = Vec::new();
    let mut witness = None;
    for k in 0..=m.dim() {
        let hm = cohomology_basis(m, k, SupportClass::TC)?;
        let (up, down) = if k >= 1 {
            let hs = cohomology_basis(sigma, k - 1, SupportClass::Free)?;
            let up = induced_map(&|c| extend_e(m, c, bump), &hs, &hm)?;
            let down = induced_map(&|c| fiber_integrate_i(m, c), &hm, &hs)?;
            (up, down)
        } else {
            (DenseMatrix::zeros(hm.dim(), 0), DenseMatrix::zeros(0, hm.dim()))
        };
        let ok = mutually_inverse(&up, &down);
        if !ok && witness.is_none() {
            witness = Some(format!("degree {k}: induced matrices are not mutually inverse"));
        }
        degrees.push(DegreeIso {
            degree: k,
            dim_sigma: up.cols(),
            dim_spacetime: hm.dim(),
            up: up.to_strings(),
            down: down.to_strings(),
            mutually_inverse: ok,
        });
    }
    Ok(IsoReport {
        fixture: m.name().to_string(),
        kind: "tc".into(),
        passed: witness.is_none(),
        degrees,
        witness,
    })
}

/// `dP − Pd = (−1)^k (π*s* − id)` on one SC cochain of degree k.
/// Returns the first offending cell, if any.
pub fn check_p_identity(m: &ProductSpacetime, c: &Cochain) -> Result<Option<usize>, Error> {
    let k = c.degree();
    let d = crate::cochain::coboundary;
    let mut lhs = Cochain::zero(m, k, SupportClass::Free);
    if k >= 1 {
        lhs = lhs.add(&d(m, &homotopy_p(m, c)?)?)?;
    }
    if k < m.dim() {
        lhs = lhs.sub(&homotopy_p(m, &d(m, c)?)?)?;
    }
    let rhs = pullback_pi_of_restrict(m, c)?.sub(c)?.scale(&sign(k));
    Ok(first_difference(&lhs, &rhs))
}

fn pullback_pi_of_restrict(m: &ProductSpacetime, c: &Cochain) -> Result<Cochain, Error> {
    if c.degree() > m.sigma().dim() {
        return Ok(Cochain::zero(m, c.degree(), SupportClass::Free));
    }
    pullback_pi(m, &restrict_s(m, c)?)
}

/// `dQ − Qd = (−1)^k (e i − id)` on one TC cochain of degree k.
pub fn check_q_identity(
    m: &ProductSpacetime,
    c: &Cochain,
    bump: &TimeBump,
) -> Result<Option<usize>, Error> {
    let k = c.degree();
    let d = crate::cochain::coboundary;
    let mut lhs = Cochain::zero(m, k, SupportClass::Free);
    if k >= 1 {
        lhs = lhs.add(&d(m, &homotopy_q(m, c, bump)?)?)?;
    }
    if k < m.dim() {
        lhs = lhs.sub(&homotopy_q(m, &d(m, c)?, bump)?)?;
    }
    let ei = if k >= 1 {
        extend_e(m, &fiber_integrate_i(m, c)?, bump)?
    } else {
        Cochain::zero(m, 0, SupportClass::Free)
    };
    let rhs = ei.sub(c)?.scale(&sign(k));
    Ok(first_difference(&lhs, &rhs))
}

fn first_difference(a: &Cochain, b: &Cochain) -> Option<usize> {
    a.coeffs().iter().zip(b.coeffs()).position(|(x, y)| x != y)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub degree: usize,
    pub samples: usize,
    pub failures: usize,
    /// Offending cell and the input cochain, for the first failure.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub fixture: String,
    pub bump: Vec<String>,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// Both homotopy identities on `samples` random cochains per degree: SC
/// inputs for P, TC inputs for Q.
pub fn verify_homotopy_identities(
    m: &ProductSpacetime,
    bump: &TimeBump,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<HomotopyReport, Error> {
    let mut checks = Vec::new();
    for (name, support) in [("P", SupportClass::SC), ("Q", SupportClass::TC)] {
        for k in 0..=m.dim() {
            let mut failures = 0;
            let mut witness = None;
            for _ in 0..samples {
                let c = random_cochain(m, k, support, rng);
                let bad = match name {
                    "P" => check_p_identity(m, &c)?,
                    _ => check_q_identity(m, &c, bump)?,
                };
                if let Some(cell) = bad {
                    failures += 1;
                    if witness.is_none() {
                        witness = Some(format!("cell {cell} for input\n{}", c.to_text()));
                    }
                }
            }
            checks.push(IdentityCheck { identity: name.into(), degree: k, samples, failures, witness });
        }
    }
    Ok(HomotopyReport {
        fixture: m.name().to_string(),
        bump: bump.weights().iter().map(format_q).collect(),
        passed: checks.iter().all(|c| c.failures == 0),
        checks,
    })
}

/// Cells of type two carry the time-edge factor.
pub fn is_type_two(m: &ProductSpacetime, k: usize, i: usize) -> bool {
    m.cell_type(k, i) == CellType::Two
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{coboundary, decompose_types, random_cochain};
    use crate::mesh::build_sigma_str;
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
    fn p_on_single_edge() {
        let m = cyl();
        let n0 = m.time().base_slice();
        let c = Cochain::unit(&m, 1, m.index_type2(1, n0, 1), SupportClass::SC).unwrap();
        let p = homotopy_p(&m, &c).unwrap();
        for n in 0..m.time().n_slices() {
            let want = if n > n0 { 1u32 } else { 0 };
            assert_eq!(p.coeffs()[m.index_type1(0, n, 1)], want, "slice {n}");
        }
    }

    #[test]
    fn p_kills_type_one() {
        let m = cyl();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_cochain(&m, 1, SupportClass::SC, &mut rng);
        let (one, _) = decompose_types(&m, &c).unwrap();
        assert!(homotopy_p(&m, &one).unwrap().is_zero());
    }

    #[test]
    fn homotopy_identities_random() {
        let m = cyl();
        let bump = TimeBump::default_for(m.time());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..=m.dim() {
            for _ in 0..10 {
                let c = random_cochain(&m, k, SupportClass::SC, &mut rng);
                assert_eq!(check_p_identity(&m, &c).unwrap(), None, "P degree {k}");
                let c = random_cochain(&m, k, SupportClass::TC, &mut rng);
                assert_eq!(check_q_identity(&m, &c, &bump).unwrap(), None, "Q degree {k}");
            }
        }
    }

    #[test]
    fn slice_maps_compose() {
        let m = cyl();
        let bump = TimeBump::default_for(m.time());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_cochain(m.sigma(), 1, SupportClass::Free, &mut rng);
        assert_eq!(restrict_s(&m, &pullback_pi(&m, &phi).unwrap()).unwrap().coeffs(), phi.coeffs());
        let psi = random_cochain(m.sigma(), 0, SupportClass::Free, &mut rng);
        let e = extend_e(&m, &psi, &bump).unwrap();
        assert_eq!(fiber_integrate_i(&m, &e).unwrap().coeffs(), psi.coeffs());
        assert!(homotopy_q(&m, &e, &bump).unwrap().is_zero());
        let de = coboundary(&m, &e).unwrap();
        let ed = extend_e(&m, &coboundary(m.sigma(), &psi).unwrap(), &bump).unwrap();
        assert_eq!(de.coeffs(), ed.coeffs());
    }

    #[test]
    fn bump_validation() {
        let t = TimeAxis::new(8, 2).unwrap();
        assert!(TimeBump::at_edge(&t, 0).is_err());
        assert!(TimeBump::new(&t, vec![Q::from(0u32); 7]).is_err());
        assert!(TimeBump::at_edge(&t, 3).is_ok());
    }

    #[test]
    fn isomorphisms_on_cylinder() {
        let m = cyl();
        let r = verify_sc_isomorphism(&m).unwrap();
        assert!(r.passed);
        let dims: Vec<usize> = r.degrees.iter().map(|d| d.dim_spacetime).collect();
        assert_eq!(dims, vec![1, 1, 0]);
        let r = verify_tc_isomorphism(&m, &TimeBump::default_for(m.time())).unwrap();
        assert!(r.passed);
        let dims: Vec<usize> = r.degrees.iter().map(|d| d.dim_spacetime).collect();
        assert_eq!(dims, vec![0, 1, 1]);
    }
}
