//! Run configuration: flag/config-file merging, inline problem definitions,
//! starting points and contraction overrides.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use conefix_core::catalog::{self, make_l1_max_space, make_min_metric_space, make_r2_max_space, DEFAULT_L1_DIM};
use conefix_core::{ContractionSpec, CoordMap, MappingPair, PartialConeMetricSpace, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Keys accepted in a `--config` file. Every key mirrors the flag of the same
/// name (dashes become underscores); flags take precedence.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub entry: Option<String>,
    pub inline: Option<String>,
    pub x0: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub apriori: Option<bool>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub what: Option<String>,
    pub family: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub s: Option<f64>,
    pub r: Option<f64>,
    pub dim: Option<usize>,
    pub k: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn or(self, lower: FileConfig) -> FileConfig {
        FileConfig {
            entry: self.entry.or(lower.entry),
            inline: self.inline.or(lower.inline),
            x0: self.x0.or(lower.x0),
            tol: self.tol.or(lower.tol),
            max_iters: self.max_iters.or(lower.max_iters),
            apriori: self.apriori.or(lower.apriori),
            seed: self.seed.or(lower.seed),
            n: self.n.or(lower.n),
            what: self.what.or(lower.what),
            family: self.family.or(lower.family),
            alpha: self.alpha.or(lower.alpha),
            beta: self.beta.or(lower.beta),
            gamma: self.gamma.or(lower.gamma),
            s: self.s.or(lower.s),
            r: self.r.or(lower.r),
            dim: self.dim.or(lower.dim),
            k: self.k.or(lower.k),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
        }
    }
}

/// A space, a mapping pair and (optionally) the contraction condition they
/// are expected to satisfy.
pub struct Problem {
    pub label: String,
    pub space: PartialConeMetricSpace,
    pub maps: MappingPair,
    pub spec: Option<ContractionSpec>,
}

pub fn resolve_problem(cfg: &FileConfig) -> Result<Problem> {
    let mut problem = match (&cfg.entry, &cfg.inline) {
        (Some(_), Some(_)) => bail!("give either --entry or --inline, not both"),
        (None, None) => bail!("one of --entry or --inline is required"),
        (Some(id), None) => entry_problem(id, cfg.dim, cfg.k)?,
        (None, Some(def)) => parse_inline(def)?,
    };
    problem.spec = resolve_spec(problem.spec, cfg)?;
    Ok(problem)
}

fn entry_problem(id: &str, dim: Option<usize>, k: Option<f64>) -> Result<Problem> {
    let entry = match id {
        "l1-tan-quarter" => catalog::l1_tan_quarter(dim.unwrap_or(DEFAULT_L1_DIM))?,
        "interval-half-sin" => catalog::interval_half_sin(k.unwrap_or(1.0))?,
        "interval-cos-half" => catalog::interval_cos_half(k.unwrap_or(1.0))?,
        other => bail!("unknown entry `{other}` (known: {})", catalog::ENTRY_IDS.join(", ")),
    };
    Ok(Problem { label: entry.id.to_string(), space: entry.space, maps: entry.maps, spec: Some(entry.spec) })
}

/// Parses `<space>[,T=<map>][,S=<map>][,TS=<map>]`.
///
/// Spaces: `interval[:k]`, `l1[:dim]`, `min-metric[:k]`. Maps: `identity`,
/// `zero`, `scale:c`, `tanthird`, `sinthird`, `cosform`; both default to
/// `identity`.
pub fn parse_inline(def: &str) -> Result<Problem> {
    let mut parts = def.split(',').map(str::trim);
    let space_tok = parts.next().filter(|s| !s.is_empty()).ok_or_else(|| anyhow!("empty inline definition"))?;
    let (kind, param) = match space_tok.split_once(':') {
        Some((kind, p)) => (kind, Some(p)),
        None => (space_tok, None),
    };
    let num = |p: Option<&str>, default: f64| -> Result<f64> {
        p.map(|p| p.parse::<f64>().with_context(|| format!("bad parameter `{p}` in `{space_tok}`")))
            .unwrap_or(Ok(default))
    };
    let space = match kind {
        "interval" => make_r2_max_space(num(param, 1.0)?)?,
        "min-metric" => make_min_metric_space(num(param, 1.0)?)?,
        "l1" => {
            let dim = param
                .map(|p| p.parse::<usize>().with_context(|| format!("bad dimension `{p}`")))
                .unwrap_or(Ok(DEFAULT_L1_DIM))?;
            make_l1_max_space(dim)?
        }
        other => bail!("unknown inline space `{other}` (expected interval, l1 or min-metric)"),
    };
    let (mut t, mut s) = (CoordMap::Identity, CoordMap::Identity);
    for part in parts {
        let (key, form) =
            part.split_once('=').ok_or_else(|| anyhow!("expected T=<map>, S=<map> or TS=<map>, got `{part}`"))?;
        let map: CoordMap = form.parse()?;
        match key {
            "T" => t = map,
            "S" => s = map,
            "TS" => (t, s) = (map, map),
            other => bail!("unknown inline key `{other}`"),
        }
    }
    Ok(Problem { label: def.to_string(), space, maps: MappingPair::coordinatewise(t, s), spec: None })
}

/// Applies `--family` and the parameter flags to the problem's own spec.
///
/// With a family, the spec is rebuilt from the given parameters (missing
/// ones are 0; the `-sym` families copy `alpha` into the tied slots). Without
/// one, given parameters overwrite the matching fields of the base spec.
pub fn resolve_spec(base: Option<ContractionSpec>, cfg: &FileConfig) -> Result<Option<ContractionSpec>> {
    let (a, b, g, s, r) = (cfg.alpha, cfg.beta, cfg.gamma, cfg.s, cfg.r);
    let any_param = [a, b, g, s, r].iter().any(Option::is_some);
    let z = |v: Option<f64>| v.unwrap_or(0.0);
    if let Some(family) = &cfg.family {
        let spec = match family.as_str() {
            "kannan" => ContractionSpec::kannan(z(a), z(b)),
            "kannan-sym" => ContractionSpec::kannan_symmetric(z(a)),
            "reich" => ContractionSpec::reich(z(a), z(b), z(g)),
            "reich-sym" => ContractionSpec::reich_symmetric(z(a)),
            "rational" => ContractionSpec::rational(z(a), z(b)),
            "implicit-linear" => ContractionSpec::implicit_linear(z(a), z(b), z(g), z(s), z(r)),
            "max" | "max-type" => ContractionSpec::max_type(z(a)),
            other => bail!("unknown contraction family `{other}`"),
        };
        return Ok(Some(spec));
    }
    match base {
        Some(mut spec) if any_param => {
            spec.alpha = a.unwrap_or(spec.alpha);
            spec.beta = b.unwrap_or(spec.beta);
            spec.gamma = g.unwrap_or(spec.gamma);
            spec.s = s.unwrap_or(spec.s);
            spec.r = r.unwrap_or(spec.r);
            Ok(Some(spec))
        }
        None if any_param => bail!("contraction parameters given without --family"),
        other => Ok(other),
    }
}

/// Parses `--x0`: `max`, `zero`, `rand`, a scalar (broadcast to every
/// coordinate) or a vector literal such as `[0.1,0.2]`.
pub fn parse_x0(text: &str, space: &PartialConeMetricSpace, seed: u64) -> Result<Point> {
    let dom = space.domain();
    let dim = space.point_dimension();
    let coords = match text.trim() {
        "max" => dom.upper().to_vec(),
        "zero" => vec![0.0; dim],
        "rand" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            dom.lower().iter().zip(dom.upper()).map(|(&lo, &hi)| rng.random_range(lo..=hi)).collect()
        }
        other => {
            let inner = other.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(other);
            let vals = inner
                .split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad x0 coordinate `{v}`")))
                .collect::<Result<Vec<_>>>()?;
            match vals.len() {
                1 => vec![vals[0]; dim],
                n if n == dim => vals,
                n => bail!("x0 has {n} coordinates, the space needs {dim}"),
            }
        }
    };
    let point = Point::new(coords)?;
    space.check_point(&point, "x0")?;
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FileConfig {
        FileConfig::default()
    }

    #[test]
    fn inline_definitions() {
        let p = parse_inline("interval:2,T=scale:0.5,S=sinthird").unwrap();
        assert_eq!(p.maps.t_name(), "scale:0.5");
        assert_eq!(p.maps.s_name(), "sinthird");
        assert_eq!(p.space.ambient().dimension(), 2);
        let p = parse_inline("l1:3,TS=zero").unwrap();
        assert_eq!(p.space.point_dimension(), 3);
        assert_eq!(p.maps.t_name(), "zero");
        assert!(parse_inline("min-metric").is_ok());
        assert!(parse_inline("torus").is_err());
        assert!(parse_inline("interval,Q=zero").is_err());
        assert!(parse_inline("interval,T=cube").is_err());
        assert!(parse_inline("").is_err());
    }

    #[test]
    fn entry_and_inline_are_exclusive() {
        let both = FileConfig { entry: Some("interval-cos-half".into()), inline: Some("interval".into()), ..cfg() };
        assert!(resolve_problem(&both).is_err());
        assert!(resolve_problem(&cfg()).is_err());
        let unknown = FileConfig { entry: Some("nope".into()), ..cfg() };
        assert!(resolve_problem(&unknown).is_err());
    }

    #[test]
    fn spec_overrides() {
        let base = Some(ContractionSpec::max_type(2.0 / 3.0));
        let c = FileConfig { alpha: Some(0.5), ..cfg() };
        assert_eq!(resolve_spec(base, &c).unwrap(), Some(ContractionSpec::max_type(0.5)));
        let c = FileConfig { family: Some("kannan-sym".into()), alpha: Some(0.3), ..cfg() };
        assert_eq!(resolve_spec(base, &c).unwrap(), Some(ContractionSpec::kannan(0.3, 0.3)));
        assert_eq!(resolve_spec(base, &cfg()).unwrap(), base);
        assert!(resolve_spec(None, &FileConfig { beta: Some(0.1), ..cfg() }).is_err());
        assert!(resolve_spec(None, &FileConfig { family: Some("banach".into()), ..cfg() }).is_err());
    }

    #[test]
    fn x0_forms() {
        let space = make_l1_max_space(3).unwrap();
        assert_eq!(parse_x0("zero", &space, 0).unwrap().coords(), &[0.0; 3]);
        assert_eq!(parse_x0("max", &space, 0).unwrap().coords(), &[std::f64::consts::FRAC_PI_4; 3]);
        assert_eq!(parse_x0("0.5", &space, 0).unwrap().coords(), &[0.5; 3]);
        assert_eq!(parse_x0("[0.1, 0.2,0.3]", &space, 0).unwrap().coords(), &[0.1, 0.2, 0.3]);
        assert_eq!(parse_x0("rand", &space, 9).unwrap(), parse_x0("rand", &space, 9).unwrap());
        assert!(parse_x0("[0.1,0.2]", &space, 0).is_err());
        assert!(parse_x0("2.0", &space, 0).is_err());
        assert!(parse_x0("abc", &space, 0).is_err());
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("entry = \"x\"\nbogus = 1\n").is_err());
        let c: FileConfig = toml::from_str("entry = \"interval-cos-half\"\nmax_iters = 10\ntol = 1e-6\n").unwrap();
        assert_eq!(c.max_iters, Some(10));
        let merged = FileConfig { tol: Some(1e-3), ..cfg() }.or(c);
        assert_eq!(merged.tol, Some(1e-3));
        assert_eq!(merged.entry.as_deref(), Some("interval-cos-half"));
    }
}
