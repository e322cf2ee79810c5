//! Run-configuration files: `[section]` headers with `key = value` pairs.
//!
//! Every key is validated before any computation; unknown sections or keys
//! and out-of-range values are rejected with the offending line number.

use loglap_core::geometry::{Epigraph, UniformGrid};
use loglap_core::problems::{CoefficientA, NonlinearityF};
use loglap_core::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub domain: Option<DomainCfg>,
    pub grid: Option<GridCfg>,
    pub problem: Option<ProblemCfg>,
    pub solver: SolverCfg,
    pub sweep: Option<SweepCfg>,
    pub operator: OperatorCfg,
}

#[derive(Debug, Clone)]
pub struct DomainCfg {
    pub family: String,
    pub alpha: f64,
    pub r0: f64,
}

impl DomainCfg {
    pub fn epigraph(&self) -> Result<Epigraph> {
        match self.family.as_str() {
            "paraboloid" => Epigraph::paraboloid(self.alpha),
            "cone" => Epigraph::cone(self.alpha),
            "flat_bottom" => Epigraph::flat_bottom(self.alpha, self.r0),
            other => Err(Error::Config(format!("unknown domain family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridCfg {
    pub origin: Vec<f64>,
    pub h: f64,
    pub dims: Vec<usize>,
}

impl GridCfg {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.origin.clone(), self.h, self.dims.clone())
    }
}

#[derive(Debug, Clone)]
pub struct ProblemCfg {
    pub a: CoefficientA,
    pub f: NonlinearityF,
}

#[derive(Debug, Clone)]
pub struct SolverCfg {
    pub tau: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub positivity: bool,
    pub u0_scale: f64,
}

impl Default for SolverCfg {
    fn default() -> Self {
        Self {
            tau: None,
            tol: 1e-8,
            max_iter: 2000,
            positivity: true,
            u0_scale: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCfg {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
}

impl SweepCfg {
    pub fn lambdas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let l = self.lambda_min + k as f64 * self.step;
            if l > self.lambda_max + 1e-12 {
                break;
            }
            out.push(l);
            k += 1;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct OperatorCfg {
    /// When true (the default), points handed to `apply`/`classify` must lie
    /// on grid nodes; when false the nearest node is used.
    pub check_box: bool,
}

impl Default for OperatorCfg {
    fn default() -> Self {
        Self { check_box: true }
    }
}

fn cfg_err(line: usize, msg: impl AsRef<str>) -> Error {
    Error::Config(format!("line {line}: {}", msg.as_ref()))
}

fn parse_f64(line: usize, key: &str, val: &str) -> Result<f64> {
    val.parse()
        .map_err(|_| cfg_err(line, format!("cannot parse `{key} = {val}` as a number")))
}

fn parse_usize(line: usize, key: &str, val: &str) -> Result<usize> {
    val.parse()
        .map_err(|_| cfg_err(line, format!("cannot parse `{key} = {val}` as an integer")))
}

fn parse_bool(line: usize, key: &str, val: &str) -> Result<bool> {
    match val {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(cfg_err(line, format!("`{key}` must be true or false, got `{val}`"))),
    }
}

fn parse_f64_list(line: usize, key: &str, val: &str) -> Result<Vec<f64>> {
    val.split(',')
        .map(|s| parse_f64(line, key, s.trim()))
        .collect()
}

fn parse_usize_list(line: usize, key: &str, val: &str) -> Result<Vec<usize>> {
    val.split(',')
        .map(|s| parse_usize(line, key, s.trim()))
        .collect()
}

/// Parse `family:key=value` forms like `clamped:c=0.5` or `power:p=2`.
fn parse_tagged(line: usize, text: &str) -> Result<(String, Option<(String, f64)>)> {
    match text.split_once(':') {
        None => Ok((text.to_string(), None)),
        Some((name, rest)) => {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected `{name}:key=value`, got `{text}`")))?;
            let v = parse_f64(line, k, v.trim())?;
            Ok((name.to_string(), Some((k.trim().to_string(), v))))
        }
    }
}

fn parse_coefficient(line: usize, text: &str) -> Result<CoefficientA> {
    match parse_tagged(line, text)? {
        (name, None) if name == "shifted_linear" => Ok(CoefficientA::ShiftedLinear),
        (name, Some((k, v))) if name == "clamped" && k == "c" => Ok(CoefficientA::Clamped { c: v }),
        (name, Some((k, v))) if name == "constant" && k == "c0" => {
            Ok(CoefficientA::Constant { c0: v })
        }
        _ => Err(cfg_err(
            line,
            format!("coefficient must be shifted_linear, clamped:c=..., or constant:c0=..., got `{text}`"),
        )),
    }
}

fn parse_nonlinearity(line: usize, text: &str) -> Result<NonlinearityF> {
    match parse_tagged(line, text)? {
        (name, None) if name == "linear" => Ok(NonlinearityF::Linear),
        (name, Some((k, v))) if name == "power" && k == "p" => {
            NonlinearityF::power(v).map_err(|e| cfg_err(line, e.to_string()))
        }
        _ => Err(cfg_err(
            line,
            format!("nonlinearity must be power:p=... or linear, got `{text}`"),
        )),
    }
}

/// Parse and validate a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section: Option<String> = None;

    // raw section stores with defaults applied at the end
    let mut domain: Option<DomainCfg> = None;
    let mut grid_origin: Option<Vec<f64>> = None;
    let mut grid_h: Option<f64> = None;
    let mut grid_dims: Option<Vec<usize>> = None;
    let mut problem_a: Option<CoefficientA> = None;
    let mut problem_f: Option<NonlinearityF> = None;
    let mut sweep_min: Option<f64> = None;
    let mut sweep_max: Option<f64> = None;
    let mut sweep_step: Option<f64> = None;
    let mut saw_domain = false;
    let mut saw_grid = false;
    let mut saw_problem = false;
    let mut saw_sweep = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line_no, "unterminated section header"))?
                .trim();
            match name {
                "domain" => saw_domain = true,
                "grid" => saw_grid = true,
                "problem" => saw_problem = true,
                "solver" | "operator" => {}
                "sweep" => saw_sweep = true,
                other => return Err(cfg_err(line_no, format!("unknown section `[{other}]`"))),
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        let section = section
            .as_deref()
            .ok_or_else(|| cfg_err(line_no, "key outside of any [section]"))?;
        match (section, key) {
            ("domain", "family") => {
                let d = domain.get_or_insert(DomainCfg {
                    family: String::new(),
                    alpha: 1.0,
                    r0: 0.0,
                });
                d.family = value.to_string();
                if !["paraboloid", "cone", "flat_bottom"].contains(&value) {
                    return Err(cfg_err(line_no, format!("unknown domain family `{value}`")));
                }
            }
            ("domain", "alpha") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("alpha must be positive, got {v}")));
                }
                domain
                    .get_or_insert(DomainCfg {
                        family: String::new(),
                        alpha: 1.0,
                        r0: 0.0,
                    })
                    .alpha = v;
            }
            ("domain", "r0") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v >= 0.0) {
                    return Err(cfg_err(line_no, format!("r0 must be nonnegative, got {v}")));
                }
                domain
                    .get_or_insert(DomainCfg {
                        family: String::new(),
                        alpha: 1.0,
                        r0: 0.0,
                    })
                    .r0 = v;
            }
            ("grid", "origin") => grid_origin = Some(parse_f64_list(line_no, key, value)?),
            ("grid", "h") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("h must be positive, got {v}")));
                }
                grid_h = Some(v);
            }
            ("grid", "dims") => {
                let v = parse_usize_list(line_no, key, value)?;
                if v.iter().any(|&d| d == 0) {
                    return Err(cfg_err(line_no, "dims entries must be >= 1"));
                }
                grid_dims = Some(v);
            }
            ("problem", "a") => problem_a = Some(parse_coefficient(line_no, value)?),
            ("problem", "f") => problem_f = Some(parse_nonlinearity(line_no, value)?),
            ("solver", "tau") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("tau must be positive, got {v}")));
                }
                cfg.solver.tau = Some(v);
            }
            ("solver", "tol") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("tol must be positive, got {v}")));
                }
                cfg.solver.tol = v;
            }
            ("solver", "max_iter") => {
                let v = parse_usize(line_no, key, value)?;
                if v == 0 {
                    return Err(cfg_err(line_no, "max_iter must be >= 1"));
                }
                cfg.solver.max_iter = v;
            }
            ("solver", "positivity") => cfg.solver.positivity = parse_bool(line_no, key, value)?,
            ("solver", "u0_scale") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("u0_scale must be positive, got {v}")));
                }
                cfg.solver.u0_scale = v;
            }
            ("sweep", "lambda_min") => sweep_min = Some(parse_f64(line_no, key, value)?),
            ("sweep", "lambda_max") => sweep_max = Some(parse_f64(line_no, key, value)?),
            ("sweep", "step") => {
                let v = parse_f64(line_no, key, value)?;
                if !(v > 0.0) {
                    return Err(cfg_err(line_no, format!("step must be positive, got {v}")));
                }
                sweep_step = Some(v);
            }
            ("operator", "check_box") => cfg.operator.check_box = parse_bool(line_no, key, value)?,
            (section, key) => {
                return Err(cfg_err(
                    line_no,
                    format!("unknown key `{key}` in section [{section}]"),
                ))
            }
        }
    }

    if saw_domain {
        let d = domain.ok_or_else(|| Error::Config("[domain] section needs `family`".into()))?;
        if d.family.is_empty() {
            return Err(Error::Config("[domain] section needs `family`".into()));
        }
        cfg.domain = Some(d);
    }
    if saw_grid {
        let origin = grid_origin.ok_or_else(|| Error::Config("[grid] needs `origin`".into()))?;
        let h = grid_h.ok_or_else(|| Error::Config("[grid] needs `h`".into()))?;
        let dims = grid_dims.ok_or_else(|| Error::Config("[grid] needs `dims`".into()))?;
        if origin.len() != dims.len() {
            return Err(Error::Config(format!(
                "[grid] origin has {} entries but dims has {}",
                origin.len(),
                dims.len()
            )));
        }
        cfg.grid = Some(GridCfg { origin, h, dims });
    }
    if saw_problem {
        let a = problem_a.ok_or_else(|| Error::Config("[problem] needs `a`".into()))?;
        let f = problem_f.ok_or_else(|| Error::Config("[problem] needs `f`".into()))?;
        cfg.problem = Some(ProblemCfg { a, f });
    }
    if saw_sweep {
        let lambda_min = sweep_min.ok_or_else(|| Error::Config("[sweep] needs `lambda_min`".into()))?;
        let lambda_max = sweep_max.ok_or_else(|| Error::Config("[sweep] needs `lambda_max`".into()))?;
        let step = sweep_step.ok_or_else(|| Error::Config("[sweep] needs `step`".into()))?;
        if lambda_max < lambda_min {
            return Err(Error::Config(format!(
                "[sweep] lambda_max {lambda_max} below lambda_min {lambda_min}"
            )));
        }
        cfg.sweep = Some(SweepCfg {
            lambda_min,
            lambda_max,
            step,
        });
    }
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[domain]
family = paraboloid
alpha = 1.0

[grid]
origin = -4,-4
h = 0.1
dims = 81,81
";

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        let e = cfg.domain.unwrap().epigraph().unwrap();
        assert_eq!(e.phi(&[2.0]), 4.0);
        let g = cfg.grid.unwrap().grid().unwrap();
        assert_eq!(g.dims(), &[81, 81]);
        assert!(cfg.operator.check_box);
    }

    #[test]
    fn negative_h_is_out_of_range_with_line() {
        let text = MINIMAL.replace("h = 0.1", "h = -0.1");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");
        assert!(err.contains("positive"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}foo = 1\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn syntax_and_section_errors() {
        assert!(parse_config("[grid\n").is_err());
        assert!(parse_config("[nosuch]\n").is_err());
        assert!(parse_config("key = 1\n").is_err());
        let err = parse_config("[grid]\nnot a pair\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn problem_spellings() {
        let text = "\
[problem]
a = \"clamped:c=1\"
f = power:p=2
";
        let cfg = parse_config(text).unwrap();
        let p = cfg.problem.unwrap();
        assert_eq!(p.a, CoefficientA::Clamped { c: 1.0 });
        assert_eq!(p.f, NonlinearityF::Power { p: 2.0 });
        assert!(parse_config("[problem]\na = bogus\nf = linear\n").is_err());
        assert!(parse_config("[problem]\na = shifted_linear\nf = power:p=0.5\n").is_err());
    }

    #[test]
    fn sweep_lambda_list() {
        let cfg = parse_config("[sweep]\nlambda_min = 0.5\nlambda_max = 1.5\nstep = 0.25\n").unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.lambdas(), vec![0.5, 0.75, 1.0, 1.25, 1.5]);
    }
}
