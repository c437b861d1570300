//! Run configuration: a TOML file listing fixtures, windows, metric data,
//! degrees and suite toggles. Every error names the line it comes from.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::error::Error;
use crate::homotopy::TimeBump;
use crate::maxwell::Flavor;
use crate::mesh::{build_sigma, Complex, SurfaceDescriptor, TimeAxis};
use crate::scalar::{parse_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Mesh,
    Betti,
    Homotopy,
    Duality,
    Green,
    Maxwell,
    Faraday,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Mesh,
        Suite::Betti,
        Suite::Homotopy,
        Suite::Duality,
        Suite::Green,
        Suite::Maxwell,
        Suite::Faraday,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Mesh => "mesh",
            Suite::Betti => "betti",
            Suite::Homotopy => "homotopy",
            Suite::Duality => "duality",
            Suite::Green => "green",
            Suite::Maxwell => "maxwell",
            Suite::Faraday => "faraday",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

/// A single suite or every enabled one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    One(Suite),
    All,
}

impl Selector {
    pub fn parse(s: &str) -> Result<Self, Error> {
        if s == "all" {
            return Ok(Selector::All);
        }
        Suite::parse(s).map(Selector::One).map_err(|_| {
            Error::Parse(format!(
                "unknown suite `{s}`, expected one of mesh, betti, homotopy, duality, green, maxwell, faraday, all"
            ))
        })
    }

    pub fn includes(self, s: Suite) -> bool {
        match self {
            Selector::All => true,
            Selector::One(x) => x == s,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme {
    Unit,
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub dt: Option<Q>,
    pub weights: WeightScheme,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellSpec {
    pub degrees: Vec<usize>,
    pub margin: Option<usize>,
    pub spacelike: bool,
    /// Flavors whose windowed parametrization is checked.
    pub parametrization: Vec<Flavor>,
    /// Flavors whose evaluation pairing is checked.
    pub optimality: Vec<Flavor>,
    pub transition: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSpec {
    pub name: String,
    pub sigma: SurfaceDescriptor,
    pub time: TimeAxis,
    pub bump_edge: Option<usize>,
    pub suites: BTreeSet<Suite>,
    pub expect_sc: Option<Vec<usize>>,
    pub expect_tc: Option<Vec<usize>>,
    pub metric: MetricSpec,
    pub maxwell: Option<MaxwellSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub name: String,
    pub sigma: SurfaceDescriptor,
    pub suites: BTreeSet<Suite>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub homotopy: usize,
    pub compatibility: usize,
    pub green: usize,
    pub lorenz: usize,
    pub generators: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub output: Option<String>,
    pub csv_dir: Option<String>,
    pub samples: Samples,
    pub enabled: BTreeSet<Suite>,
    pub fixtures: Vec<FixtureSpec>,
    pub surfaces: Vec<SurfaceSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    suites: RawToggles,
    #[serde(default, rename = "fixture")]
    fixtures: Vec<RawFixture>,
    #[serde(default, rename = "surface")]
    surfaces: Vec<RawSurface>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    seed: u64,
    output: Option<String>,
    csv_dir: Option<String>,
    #[serde(default = "d_homotopy")]
    homotopy_samples: usize,
    #[serde(default = "d_compat")]
    compatibility_samples: usize,
    #[serde(default = "d_green")]
    green_samples: usize,
    #[serde(default = "d_lorenz")]
    lorenz_inputs: usize,
    #[serde(default = "d_generators")]
    generator_samples: usize,
}

fn d_homotopy() -> usize {
    100
}
fn d_compat() -> usize {
    50
}
fn d_green() -> usize {
    5
}
fn d_lorenz() -> usize {
    20
}
fn d_generators() -> usize {
    8
}

impl Default for RawRun {
    fn default() -> Self {
        RawRun {
            seed: 0,
            output: None,
            csv_dir: None,
            homotopy_samples: d_homotopy(),
            compatibility_samples: d_compat(),
            green_samples: d_green(),
            lorenz_inputs: d_lorenz(),
            generator_samples: d_generators(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToggles {
    #[serde(default = "yes")]
    mesh: bool,
    #[serde(default = "yes")]
    betti: bool,
    #[serde(default = "yes")]
    homotopy: bool,
    #[serde(default = "yes")]
    duality: bool,
    #[serde(default = "yes")]
    green: bool,
    #[serde(default = "yes")]
    maxwell: bool,
    #[serde(default = "yes")]
    faraday: bool,
}

impl Default for RawToggles {
    fn default() -> Self {
        RawToggles { mesh: true, betti: true, homotopy: true, duality: true, green: true, maxwell: true, faraday: true }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixture {
    name: Spanned<String>,
    sigma: Spanned<String>,
    slices: Spanned<usize>,
    collar: usize,
    base_slice: Option<usize>,
    bump_edge: Option<Spanned<usize>>,
    suites: Option<Spanned<Vec<String>>>,
    expect_sc: Option<Vec<usize>>,
    expect_tc: Option<Vec<usize>>,
    #[serde(default)]
    metric: RawMetric,
    maxwell: Option<RawMaxwell>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    dt: Option<Spanned<String>>,
    weights: Option<Spanned<String>>,
    weight_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaxwell {
    degrees: Spanned<Vec<usize>>,
    margin: Option<usize>,
    #[serde(default)]
    spacelike: bool,
    parametrization: Option<Spanned<Vec<String>>>,
    optimality: Option<Spanned<Vec<String>>>,
    transition: Option<Spanned<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    name: Spanned<String>,
    sigma: Spanned<String>,
    suites: Option<Spanned<Vec<String>>>,
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("line {}: {msg}", line_of(self.text, span.start)))
    }

    fn suites(&self, raw: &Option<Spanned<Vec<String>>>, allowed: &[Suite]) -> Result<BTreeSet<Suite>, Error> {
        let Some(list) = raw else {
            return Ok(allowed.iter().copied().collect());
        };
        let mut out = BTreeSet::new();
        for s in list.get_ref() {
            let suite = Suite::parse(s).map_err(|e| self.err(list.span(), e))?;
            if !allowed.contains(&suite) {
                return Err(self.err(list.span(), format!("suite `{s}` does not apply here")));
            }
            out.insert(suite);
        }
        Ok(out)
    }

    fn flavors(&self, raw: &Option<Spanned<Vec<String>>>) -> Result<Vec<Flavor>, Error> {
        let Some(list) = raw else {
            return Ok(vec![Flavor::Potential, Flavor::Faraday]);
        };
        list.get_ref().iter().map(|s| Flavor::parse(s).map_err(|e| self.err(list.span(), e))).collect()
    }

    fn surface(&self, raw: &Spanned<String>) -> Result<SurfaceDescriptor, Error> {
        let d = SurfaceDescriptor::parse(raw.get_ref()).map_err(|e| self.err(raw.span(), e))?;
        build_sigma(&d).map_err(|e| self.err(raw.span(), e))?;
        Ok(d)
    }

    fn fixture(&self, f: &RawFixture) -> Result<FixtureSpec, Error> {
        let sigma = self.surface(&f.sigma)?;
        let base = f.base_slice.unwrap_or(*f.slices.get_ref() / 2);
        let time = TimeAxis::with_base(*f.slices.get_ref(), f.collar, base).map_err(|e| self.err(f.slices.span(), e))?;
        if let Some(j) = &f.bump_edge {
            TimeBump::at_edge(&time, *j.get_ref()).map_err(|e| self.err(j.span(), e))?;
        }
        let top = build_sigma(&sigma).map_err(|e| self.err(f.sigma.span(), e))?.dim() + 1;
        let dt = match &f.metric.dt {
            Some(s) => {
                let q = parse_q(s.get_ref()).map_err(|e| self.err(s.span(), e))?;
                if q <= 0u32 {
                    return Err(self.err(s.span(), "dt must be positive"));
                }
                Some(q)
            }
            None => None,
        };
        let weights = match &f.metric.weights {
            None => WeightScheme::Unit,
            Some(w) => match w.get_ref().as_str() {
                "unit" => WeightScheme::Unit,
                "seeded" => WeightScheme::Seeded(f.metric.weight_seed.unwrap_or(0)),
                other => return Err(self.err(w.span(), format!("weight scheme `{other}`, expected unit or seeded"))),
            },
        };
        let maxwell = match &f.maxwell {
            None => None,
            Some(m) => {
                if m.degrees.get_ref().is_empty() {
                    return Err(self.err(m.degrees.span(), "at least one degree"));
                }
                for &k in m.degrees.get_ref() {
                    if k < 1 || k + 1 > top {
                        return Err(self.err(
                            m.degrees.span(),
                            format!("degree {k} outside 1..={} for a {top}-dimensional spacetime", top - 1),
                        ));
                    }
                }
                let transition = match &m.transition {
                    None => None,
                    Some(t) => match t.get_ref().as_slice() {
                        [lo, hi] if lo < hi => Some((*lo, *hi)),
                        _ => return Err(self.err(t.span(), "transition is a pair [lo, hi] with lo < hi")),
                    },
                };
                Some(MaxwellSpec {
                    degrees: m.degrees.get_ref().clone(),
                    margin: m.margin,
                    spacelike: m.spacelike,
                    parametrization: self.flavors(&m.parametrization)?,
                    optimality: self.flavors(&m.optimality)?,
                    transition,
                })
            }
        };
        let mut suites = self.suites(&f.suites, &Suite::ALL)?;
        if maxwell.is_none() {
            if let Some(list) = &f.suites {
                if suites.contains(&Suite::Maxwell) || suites.contains(&Suite::Faraday) {
                    return Err(self.err(list.span(), "maxwell and faraday suites need a [fixture.maxwell] table"));
                }
            }
            suites.remove(&Suite::Maxwell);
            suites.remove(&Suite::Faraday);
        }
        for (name, e) in [("expect_sc", &f.expect_sc), ("expect_tc", &f.expect_tc)] {
            if let Some(v) = e {
                if v.len() != top + 1 {
                    return Err(self.err(f.name.span(), format!("{name} lists {} entries, expected {}", v.len(), top + 1)));
                }
            }
        }
        Ok(FixtureSpec {
            name: f.name.get_ref().clone(),
            sigma,
            time,
            bump_edge: f.bump_edge.as_ref().map(|j| *j.get_ref()),
            suites,
            expect_sc: f.expect_sc.clone(),
            expect_tc: f.expect_tc.clone(),
            metric: MetricSpec { dt, weights },
            maxwell,
        })
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, Error> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
            Error::Config(format!("line {line}: {}", e.message()))
        })?;
        let ctx = Ctx { text };
        let mut names = BTreeSet::new();
        let mut fixtures = Vec::new();
        for f in &raw.fixtures {
            if !names.insert(f.name.get_ref().clone()) {
                return Err(ctx.err(f.name.span(), format!("duplicate fixture name `{}`", f.name.get_ref())));
            }
            fixtures.push(ctx.fixture(f)?);
        }
        let mut surfaces = Vec::new();
        for s in &raw.surfaces {
            if !names.insert(s.name.get_ref().clone()) {
                return Err(ctx.err(s.name.span(), format!("duplicate fixture name `{}`", s.name.get_ref())));
            }
            surfaces.push(SurfaceSpec {
                name: s.name.get_ref().clone(),
                sigma: ctx.surface(&s.sigma)?,
                suites: ctx.suites(&s.suites, &[Suite::Betti, Suite::Duality])?,
            });
        }
        let t = &raw.suites;
        let enabled = [
            (Suite::Mesh, t.mesh),
            (Suite::Betti, t.betti),
            (Suite::Homotopy, t.homotopy),
            (Suite::Duality, t.duality),
            (Suite::Green, t.green),
            (Suite::Maxwell, t.maxwell),
            (Suite::Faraday, t.faraday),
        ]
        .into_iter()
        .filter(|(_, on)| *on)
        .map(|(s, _)| s)
        .collect();
        let r = &raw.run;
        Ok(Config {
            seed: r.seed,
            output: r.output.clone(),
            csv_dir: r.csv_dir.clone(),
            samples: Samples {
                homotopy: r.homotopy_samples,
                compatibility: r.compatibility_samples,
                green: r.green_samples,
                lorenz: r.lorenz_inputs,
                generators: r.generator_samples,
            },
            enabled,
            fixtures,
            surfaces,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Config, Error> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[run]
seed = 7

[[fixture]]
name = "cyl"
sigma = "circle(3)"
slices = 12
collar = 2

[fixture.maxwell]
degrees = [1]
"#;

    #[test]
    fn parses_defaults() {
        let c = Config::parse(SMALL).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.samples.homotopy, 100);
        assert_eq!(c.fixtures[0].time.base_slice(), 6);
        assert!(c.fixtures[0].suites.contains(&Suite::Faraday));
        assert_eq!(c.enabled.len(), 7);
    }

    #[test]
    fn degree_out_of_range_names_line() {
        let text = SMALL.replace("degrees = [1]", "degrees = [2]");
        let e = Config::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 12"), "{e}");
        assert!(e.contains("degree 2"), "{e}");
    }

    #[test]
    fn small_circle_rejected_with_line() {
        let text = SMALL.replace("circle(3)", "circle(2)");
        let e = Config::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 7"), "{e}");
    }

    #[test]
    fn syntax_error_line() {
        let e = Config::parse("[run]\nseed = 1\nbogus = = 2\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn unknown_key_line() {
        let e = Config::parse("[run]\nseed = 1\n\n[suites]\nmesh = true\nbetty = false\n").unwrap_err().to_string();
        assert!(e.contains("line 6"), "{e}");
    }

    #[test]
    fn selector() {
        assert_eq!(Selector::parse("all").unwrap(), Selector::All);
        assert!(Selector::One(Suite::Green).includes(Suite::Green));
        assert!(Selector::parse("gren").is_err());
    }
}
