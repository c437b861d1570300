//! Runs the configured checks. Work is split into (fixture, suite) jobs on
//! a fixed pool of scoped threads; each job draws from its own generator
//! seeded by the run seed and the job name, so results do not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cochain::SupportClass;
use crate::cohomology::betti_profile;
use crate::config::{Config, FixtureSpec, Selector, Suite, SurfaceSpec, WeightScheme};
use crate::duality::{verify_classical_duality, verify_compatibility_lemma, verify_sc_tc_duality};
use crate::error::Error;
use crate::homotopy::{verify_homotopy_identities, verify_sc_isomorphism, verify_tc_isomorphism, TimeBump};
use crate::lorentz::{verify_green_contract, GreenSolver, Lorentzian, MetricData};
use crate::maxwell::{Dynamics, Flavor, GaugePartition};
use crate::mesh::{build_sigma, fnv1a, CellComplex, Complex, ProductSpacetime};
use crate::outcome::CheckOutcome;
use crate::report::{
    BettiData, DualityData, FieldData, FieldDegree, GreenData, HomotopyData, JobResult, RunReport, SuiteData,
};
use crate::scalar::to_f64;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    /// Also time f64 Green sweeps; the timings go to stderr only.
    pub float_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { workers: default_workers(), float_timing: false }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Worker count from `CAUSALDEC_WORKERS`, falling back to the core count.
pub fn workers_from_env() -> Result<usize, Error> {
    match std::env::var("CAUSALDEC_WORKERS") {
        Err(_) => Ok(default_workers()),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("CAUSALDEC_WORKERS must be a positive integer, got `{s}`"))),
        },
    }
}

type Fields = (Lorentzian, Vec<GreenSolver>);

struct Prepared {
    spec: FixtureSpec,
    m: Arc<ProductSpacetime>,
    fields: OnceLock<Result<Fields, String>>,
}

impl Prepared {
    fn fields(&self) -> Result<&Fields, Error> {
        self.fields
            .get_or_init(|| {
                let sigma = self.m.sigma();
                let g = metric(&self.spec, sigma).map_err(|e| e.to_string())?;
                let l = Lorentzian::new(self.m.clone(), g).map_err(|e| e.to_string())?;
                let s = l.green_solvers().map_err(|e| e.to_string())?;
                Ok((l, s))
            })
            .as_ref()
            .map_err(|e| Error::Precondition(format!("Lorentzian structure: {e}")))
    }

    fn bump(&self) -> Result<TimeBump, Error> {
        match self.spec.bump_edge {
            Some(j) => TimeBump::at_edge(self.m.time(), j),
            None => Ok(TimeBump::default_for(self.m.time())),
        }
    }
}

fn metric(spec: &FixtureSpec, sigma: &CellComplex) -> Result<MetricData, Error> {
    let base = match spec.metric.weights {
        WeightScheme::Unit => MetricData::unit(sigma),
        WeightScheme::Seeded(s) => MetricData::seeded(sigma, s),
    };
    match &spec.metric.dt {
        None => Ok(base),
        Some(dt) => {
            let w = (0..=sigma.dim()).map(|k| (0..sigma.count(k)).map(|i| base.weight(k, i).clone()).collect()).collect();
            MetricData::new(sigma, dt.clone(), w)
        }
    }
}

enum Target {
    Fixture(usize),
    Surface(usize),
}

struct Job {
    target: Target,
    suite: Suite,
    cost: usize,
}

fn job_seed(seed: u64, fixture: &str, suite: Suite) -> u64 {
    let h = fnv1a(&seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
    let h = fnv1a(fixture.as_bytes(), h);
    fnv1a(suite.as_str().as_bytes(), fnv1a(b"/", h))
}

fn total_cells(x: &dyn Complex) -> usize {
    (0..=x.dim()).map(|k| x.count(k)).sum()
}

pub struct Runner<'c> {
    config: &'c Config,
    fixtures: Vec<Prepared>,
    surfaces: Vec<(SurfaceSpec, CellComplex)>,
    options: RunOptions,
}

impl<'c> Runner<'c> {
    pub fn new(config: &'c Config, options: RunOptions) -> Result<Self, Error> {
        let mut fixtures = Vec::new();
        for f in &config.fixtures {
            let sigma = Arc::new(build_sigma(&f.sigma)?);
            let m = Arc::new(ProductSpacetime::new(f.time.clone(), sigma));
            fixtures.push(Prepared { spec: f.clone(), m, fields: OnceLock::new() });
        }
        let mut surfaces = Vec::new();
        for s in &config.surfaces {
            surfaces.push((s.clone(), build_sigma(&s.sigma)?));
        }
        Ok(Runner { config, fixtures, surfaces, options })
    }

    fn jobs(&self, sel: Selector) -> Vec<Job> {
        let on = |s: Suite| sel.includes(s) && (sel != Selector::All || self.config.enabled.contains(&s));
        let mut jobs = Vec::new();
        for (i, p) in self.fixtures.iter().enumerate() {
            let n = total_cells(p.m.as_ref());
            for &s in &p.spec.suites {
                if on(s) {
                    let w = match s {
                        Suite::Maxwell | Suite::Faraday => 40 * n,
                        Suite::Green => 8 * n,
                        _ => n,
                    };
                    jobs.push(Job { target: Target::Fixture(i), suite: s, cost: w });
                }
            }
        }
        for (i, (s, c)) in self.surfaces.iter().enumerate() {
            for &suite in &s.suites {
                if on(suite) {
                    jobs.push(Job { target: Target::Surface(i), suite, cost: total_cells(c) });
                }
            }
        }
        jobs
    }

    pub fn run(&self, sel: Selector) -> RunReport {
        let jobs = self.jobs(sel);
        let mut order: Vec<usize> = (0..jobs.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(jobs[i].cost));
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<JobResult>>> = Mutex::new(vec![None; jobs.len()]);
        let workers = self.options.workers.clamp(1, jobs.len().max(1));
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let t = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&j) = order.get(t) else { break };
                    let r = self.run_job(&jobs[j]);
                    slots.lock().expect("no worker panicked")[j] = Some(r);
                });
            }
        });
        let results = slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every job ran")).collect();
        let label = match sel {
            Selector::All => "all".to_string(),
            Selector::One(s) => s.as_str().to_string(),
        };
        RunReport::new(self.config.seed, label, results)
    }

    fn run_job(&self, job: &Job) -> JobResult {
        let (name, sigma, slices, collar) = match job.target {
            Target::Fixture(i) => {
                let p = &self.fixtures[i];
                let t = p.m.time();
                (p.spec.name.clone(), p.spec.sigma.canonical(), Some(t.n_slices()), Some(t.collar_width()))
            }
            Target::Surface(i) => {
                let s = &self.surfaces[i].0;
                (s.name.clone(), s.sigma.canonical(), None, None)
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(job_seed(self.config.seed, &name, job.suite));
        let out = match job.target {
            Target::Fixture(i) => self.fixture_job(&self.fixtures[i], job.suite, &mut rng),
            Target::Surface(i) => self.surface_job(&self.surfaces[i], job.suite),
        };
        let (passed, error, data) = match out {
            Ok((ok, d)) => (ok, None, Some(d)),
            Err(e) => (false, Some(e.to_string()), None),
        };
        JobResult { fixture: name, sigma, slices, collar, suite: job.suite.as_str().to_string(), passed, error, data }
    }

    fn surface_job(&self, (spec, c): &(SurfaceSpec, CellComplex), suite: Suite) -> Result<(bool, SuiteData), Error> {
        match suite {
            Suite::Betti => {
                let mut profiles = BTreeMap::new();
                for s in [SupportClass::Free, SupportClass::Compact] {
                    profiles.insert(s.as_str().to_string(), betti_profile(c, s)?);
                }
                Ok((true, SuiteData::Betti(BettiData { profiles, expectations: Vec::new() })))
            }
            Suite::Duality => {
                let r = verify_classical_duality(c)?;
                Ok((r.passed, SuiteData::Duality(DualityData { pairing: r, compatibility: None })))
            }
            other => Err(Error::Precondition(format!("suite {} on the bare surface {}", other.as_str(), spec.name))),
        }
    }

    fn fixture_job(&self, p: &Prepared, suite: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, SuiteData), Error> {
        let m = p.m.as_ref();
        let samples = &self.config.samples;
        match suite {
            Suite::Mesh => {
                let r = crate::mesh::verify_mesh(m)?;
                Ok((r.passed, SuiteData::Mesh(r)))
            }
            Suite::Betti => {
                let mut profiles = BTreeMap::new();
                for s in [SupportClass::Free, SupportClass::Compact, SupportClass::SC, SupportClass::TC] {
                    profiles.insert(s.as_str().to_string(), betti_profile(m, s)?);
                }
                let mut expectations = Vec::new();
                for (class, want) in [("sc", &p.spec.expect_sc), ("tc", &p.spec.expect_tc)] {
                    if let Some(want) = want {
                        let got = &profiles[class];
                        let mut c = CheckOutcome::new(&format!("{class}_profile"));
                        c.record(got == want, || format!("expected {want:?}, got {got:?}"));
                        expectations.push(c);
                    }
                }
                let ok = expectations.iter().all(|c| c.passed);
                Ok((ok, SuiteData::Betti(BettiData { profiles, expectations })))
            }
            Suite::Homotopy => {
                let bump = p.bump()?;
                let identities = verify_homotopy_identities(m, &bump, samples.homotopy, rng)?;
                let sc = verify_sc_isomorphism(m)?;
                let tc = verify_tc_isomorphism(m, &bump)?;
                let ok = identities.passed && sc.passed && tc.passed;
                Ok((ok, SuiteData::Homotopy(HomotopyData { identities, sc_isomorphism: sc, tc_isomorphism: tc })))
            }
            Suite::Duality => {
                let pairing = verify_sc_tc_duality(m)?;
                let bump = p.bump()?;
                let lemma = verify_compatibility_lemma(m, &bump, samples.compatibility, rng)?;
                let ok = pairing.passed && lemma.passed;
                Ok((ok, SuiteData::Duality(DualityData { pairing, compatibility: Some(lemma) })))
            }
            Suite::Green => {
                let (l, solvers) = p.fields()?;
                let mut degrees = Vec::new();
                for k in 0..=m.dim() {
                    degrees.push(verify_green_contract(l, solvers, k, samples.green, rng)?);
                }
                if self.options.float_timing {
                    float_timing(&p.spec.name, m, solvers);
                }
                let ok = degrees.iter().all(|r| r.passed);
                Ok((ok, SuiteData::Green(GreenData { margin: l.margin(solvers), degrees })))
            }
            Suite::Maxwell | Suite::Faraday => {
                let flavor = if suite == Suite::Maxwell { Flavor::Potential } else { Flavor::Faraday };
                let (l, solvers) = p.fields()?;
                let spec = p.spec.maxwell.as_ref().ok_or_else(|| Error::Precondition("a maxwell table".into()))?;
                let d = Dynamics::new(l, solvers)?;
                if let Some(want) = spec.margin {
                    if want < d.margin() {
                        return Err(Error::Config(format!(
                            "fixture {}: margin {want} is below the cone margin {}",
                            p.spec.name,
                            d.margin()
                        )));
                    }
                }
                let partition = match spec.transition {
                    Some((lo, hi)) => GaugePartition::ramp(m.time().n_slices(), lo, hi)?,
                    None => d.default_partition(),
                };
                let mut degrees = Vec::new();
                for &k in &spec.degrees {
                    let parametrization = match flavor {
                        _ if !spec.parametrization.contains(&flavor) => None,
                        Flavor::Potential => Some(d.potential_parametrization(k, samples.generators, rng)?),
                        Flavor::Faraday => Some(d.faraday_parametrization(k, samples.generators, rng)?),
                    };
                    let optimality = if spec.optimality.contains(&flavor) { Some(d.verify_optimality(k, flavor, rng)?) } else { None };
                    let lorenz = match flavor {
                        Flavor::Potential => Some(d.verify_lorenz(k, samples.lorenz, &partition, rng)?),
                        Flavor::Faraday => None,
                    };
                    let spacelike = if spec.spacelike {
                        Some(d.sc_solution_spaces(k, flavor, samples.generators, rng)?)
                    } else {
                        None
                    };
                    degrees.push(FieldDegree { degree: k, parametrization, optimality, lorenz, spacelike });
                }
                let ok = degrees.iter().all(|f| {
                    f.parametrization.as_ref().is_none_or(|r| r.passed)
                        && f.optimality.as_ref().is_none_or(|r| r.passed)
                        && f.lorenz.as_ref().is_none_or(|r| r.passed)
                        && f.spacelike.as_ref().is_none_or(|r| r.passed)
                });
                Ok((ok, SuiteData::Field(FieldData { flavor, margin: d.margin(), degrees })))
            }
        }
    }
}

/// Wall-clock comparison of exact and f64 sweeps on one mid-window unit
/// source per degree, printed to stderr.
fn float_timing(name: &str, m: &ProductSpacetime, solvers: &[GreenSolver]) {
    let mid = m.time().n_slices() / 2;
    for g in solvers {
        let k = g.degree();
        let n = m.count(k);
        let Some(c) = (0..n).find(|&i| m.slice_of(k, i) == mid) else { continue };
        let mut f = vec![crate::scalar::zero(); n];
        f[c] = crate::scalar::one();
        let t = Instant::now();
        let exact = g.solve_forward(&f);
        let te = t.elapsed();
        let fl = g.to_float();
        let ff: Vec<f64> = f.iter().map(to_f64).collect();
        let t = Instant::now();
        let approx = fl.solve_forward(&ff);
        let tf = t.elapsed();
        let err = exact.iter().zip(&approx).map(|(a, b)| (to_f64(a) - b).abs()).fold(0.0, f64::max);
        eprintln!("{name} degree {k}: exact sweep {te:?}, f64 sweep {tf:?}, max deviation {err:.3e}");
    }
}
