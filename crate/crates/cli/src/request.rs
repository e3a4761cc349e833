//! Run requests and `key=value` overrides of the solver configuration.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use mood1d::benchmarks::{BenchmarkCase, CaseId};
use mood1d::detectors::SmoothnessRule;
use mood1d::solvers::MapReset;
use mood1d::{Cascade, Method, Mode, SolverConfig};

pub fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "l" => Ok(Method::Linear),
        "nl" => Ok(Method::Newton),
        "tm1" => Ok(Method::Tm1),
        "tm2" => Ok(Method::Tm2),
        _ => Err(format!("unknown solver `{s}` (expected l, nl, tm1 or tm2)")),
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "unlimited" => Ok(Mode::Unlimited),
        "mood" => Ok(Mode::Mood),
        "mood-as" => Ok(Mode::MoodAs),
        _ => Err(format!("unknown mode `{s}` (expected unlimited, mood or mood-as)")),
    }
}

/// One validated solve: the benchmark, its mesh size and the full solver
/// configuration.
pub struct RunRequest {
    pub case: BenchmarkCase,
    pub cells: usize,
    pub method: Method,
    pub mode: Mode,
    pub config: SolverConfig,
}

impl RunRequest {
    pub fn d_max(&self) -> usize {
        self.config.detectors.cascade.max_degree()
    }
}

/// Settings shared by `run` and `convergence`, before validation.
pub struct Settings<'a> {
    pub case: CaseId,
    pub method: Method,
    pub mode: Mode,
    pub d_max: usize,
    pub config_file: Option<&'a Path>,
    pub overrides: &'a [String],
}

impl Settings<'_> {
    /// The case and its configuration: defaults, then the file, then the
    /// `--set` overrides.
    pub fn resolve(&self) -> Result<(BenchmarkCase, SolverConfig)> {
        if self.method == Method::Linear {
            ensure!(self.case.is_advection(), "the l solver only applies to advection cases, not `{}`", self.case);
        }
        let case = self.case.build();
        let mut config = case.solver_config();
        config.detectors.cascade = Cascade::from_max(self.d_max).with_context(|| format!("invalid d_max {}", self.d_max))?;
        let mut pairs = Vec::new();
        if let Some(path) = self.config_file {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if !line.is_empty() {
                    pairs.push((line.to_owned(), format!("{}:{}", path.display(), n + 1)));
                }
            }
        }
        pairs.extend(self.overrides.iter().map(|o| (o.clone(), "--set".to_owned())));
        for (pair, origin) in pairs {
            let (key, value) = pair.split_once('=').with_context(|| format!("{origin}: expected key=value, got `{pair}`"))?;
            apply(&mut config, key.trim(), value.trim()).with_context(|| format!("{origin}: `{pair}`"))?;
        }
        ensure!(
            config.detectors.cascade.max_degree() == self.d_max,
            "the cascade {:?} does not start at d_max = {}",
            config.detectors.cascade.degrees(),
            self.d_max
        );
        Ok((case, config))
    }

    pub fn request(&self, cells: usize) -> Result<RunRequest> {
        ensure!(cells > 0, "the mesh needs at least one cell");
        let (case, config) = self.resolve()?;
        Ok(RunRequest {
            case,
            cells,
            method: self.method,
            mode: self.mode,
            config,
        })
    }
}

fn number<T: std::str::FromStr>(value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    Ok(value.parse::<T>()?)
}

/// Sets one configuration entry by name.
pub fn apply(cfg: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "tolerance" => cfg.tolerance = number(value)?,
        "newton_max_iterations" => cfg.newton_max_iterations = number(value)?,
        "jacobian_step" => cfg.jacobian_step = number(value)?,
        "min_step" => cfg.min_step = number(value)?,
        "cfl" => cfg.cfl = number(value)?,
        "max_time_steps" => cfg.max_time_steps = number(value)?,
        "divergence_ratio" => cfg.divergence_ratio = number(value)?,
        "cfl_halvings" => cfg.cfl_halvings = number(value)?,
        "stall_steps" => cfg.stall_steps = number(value)?,
        "mood_max_iterations" => cfg.mood_max_iterations = Some(number(value)?),
        "as_max_iterations" => cfg.as_max_iterations = number(value)?,
        "p0_switch_tolerance" => cfg.p0_switch_tolerance = number(value)?,
        "tm1_reset" => {
            cfg.tm1_reset = match value {
                "initial" => MapReset::Initial,
                "previous" => MapReset::Previous,
                _ => bail!("expected initial or previous"),
            }
        }
        "conserved_component" => {
            cfg.conserved_component = match value {
                "none" => None,
                v => Some(number(v)?),
            }
        }
        "eps_pd" => {
            cfg.detectors.eps_pd = match value {
                "h" => None,
                v => Some(number(v)?),
            }
        }
        "eps_sd" => cfg.detectors.eps_sd = number(value)?,
        "smoothness" => {
            cfg.detectors.smoothness = match value {
                "ratio" => SmoothnessRule::Ratio,
                "one-minus" => SmoothnessRule::OneMinus,
                _ => bail!("expected ratio or one-minus"),
            }
        }
        "pad" => cfg.detectors.pad_enabled = number(value)?,
        "cascade" => {
            let degrees = value.split(',').map(|d| number(d.trim())).collect::<Result<Vec<usize>>>()?;
            cfg.detectors.cascade = Cascade::new(degrees)?;
        }
        _ => bail!("unknown setting `{key}`"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(case: CaseId, method: Method, overrides: &[String]) -> Settings<'_> {
        Settings {
            case,
            method,
            mode: Mode::Mood,
            d_max: 5,
            config_file: None,
            overrides,
        }
    }

    #[test]
    fn linear_solver_needs_advection() {
        assert!(settings(CaseId::Euler, Method::Linear, &[]).resolve().is_err());
        assert!(settings(CaseId::AdvIrregular, Method::Linear, &[]).resolve().is_ok());
    }

    #[test]
    fn overrides_reach_the_config() {
        let o = ["cfl=0.25".to_owned(), "smoothness=one-minus".to_owned(), "eps_pd=1e-3".to_owned()];
        let (_, cfg) = settings(CaseId::Burgers, Method::Newton, &o).resolve().unwrap();
        assert_eq!(cfg.cfl, 0.25);
        assert_eq!(cfg.detectors.smoothness, SmoothnessRule::OneMinus);
        assert_eq!(cfg.detectors.eps_pd, Some(1e-3));
        assert_eq!(cfg.conserved_component, Some(0));
    }

    #[test]
    fn bad_overrides_are_rejected() {
        for bad in ["cfl", "cfl=fast", "colour=red", "cascade=5,3,4,0", "tm1_reset=sometimes"] {
            let o = [bad.to_owned()];
            assert!(settings(CaseId::Burgers, Method::Newton, &o).resolve().is_err(), "{bad}");
        }
    }

    #[test]
    fn cascade_must_start_at_d_max() {
        let o = ["cascade=3,1,0".to_owned()];
        assert!(settings(CaseId::Burgers, Method::Newton, &o).resolve().is_err());
        let o = ["cascade=5,1,0".to_owned()];
        let (_, cfg) = settings(CaseId::Burgers, Method::Newton, &o).resolve().unwrap();
        assert_eq!(cfg.detectors.cascade.degrees(), &[5, 1, 0]);
    }

    #[test]
    fn method_and_mode_names() {
        for m in [Method::Linear, Method::Newton, Method::Tm1, Method::Tm2] {
            assert_eq!(parse_method(m.name()), Ok(m));
        }
        for m in [Mode::Unlimited, Mode::Mood, Mode::MoodAs] {
            assert_eq!(parse_mode(m.as_str()), Ok(m));
        }
        assert!(parse_method("rk4").is_err());
    }
}
