//! Benchmark acceptance report: one PASS/FAIL line per criterion.
//!
//! The target always exits successfully so that the report can be read
//! next to the rest of the suite; set `MOOD1D_ACCEPTANCE_STRICT=1` to turn
//! any FAIL into a non-zero exit.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use mood1d::benchmarks::{BenchmarkCase, CaseId};
use mood1d::metrics::{convergence_order, error_norms, region_e1, Order};
use mood1d::solvers::solve_steady;
use mood1d::stencil::stencil_size;
use mood1d::{CpdMap, FieldVector, Method, Mesh, Mode, SolveReport};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const RUN_BUDGET: Duration = Duration::from_secs(30);

struct Run {
    mesh: Mesh,
    exact: FieldVector,
    outcome: Result<SolveReport, String>,
    elapsed: Duration,
}

impl Run {
    fn phi(&self) -> Result<&FieldVector, String> {
        self.outcome.as_ref().map(|r| &r.phi).map_err(Clone::clone)
    }

    fn cell_errors(&self) -> Result<Vec<f64>, String> {
        let phi = self.phi()?;
        Ok(self.mesh.cells().map(|i| (phi.get(0, i) - self.exact.get(0, i)).abs()).collect())
    }
}

struct Report {
    cases: HashMap<CaseId, BenchmarkCase>,
    runs: HashMap<(CaseId, usize, Method, Mode), Run>,
    passed: usize,
    failed: usize,
}

fn tag(method: Method, mode: Mode) -> String {
    format!("{}/{}", method.name(), mode.as_str())
}

fn rate(coarse: (f64, usize), fine: (f64, usize)) -> f64 {
    match convergence_order(coarse, fine) {
        Ok(Order::Rate(r)) => r,
        Ok(Order::Exact) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value >= target / factor && value <= target * factor
}

impl Report {
    fn new() -> Self {
        Self {
            cases: CaseId::ALL.into_iter().map(|id| (id, id.build())).collect(),
            runs: HashMap::new(),
            passed: 0,
            failed: 0,
        }
    }

    fn check(&mut self, id: &str, what: &str, pass: bool, detail: impl AsRef<str>) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!("{} [{id}] {what}: {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
    }

    fn fail(&mut self, id: &str, what: &str, err: &str) {
        self.check(id, what, false, format!("no solution ({err})"));
    }

    fn run(&mut self, case: CaseId, n: usize, method: Method, mode: Mode) -> &Run {
        let key = (case, n, method, mode);
        if !self.runs.contains_key(&key) {
            let c = &self.cases[&case];
            let mesh = c.mesh(n).unwrap();
            let start = Instant::now();
            let outcome = solve_steady(&*c.problem, &mesh, &c.solver_config(), method, mode, &c.initial_means(&mesh)).map_err(|e| e.to_string());
            let elapsed = start.elapsed();
            eprintln!("  solved {case} I={n} {} in {:.2} s", tag(method, mode), elapsed.as_secs_f64());
            let exact = c.exact_means(&mesh);
            self.runs.insert(key, Run { mesh, exact, outcome, elapsed });
        }
        &self.runs[&key]
    }

    /// `(E₁, E∞)` of the first component.
    fn norms(&mut self, case: CaseId, n: usize, method: Method, mode: Mode) -> Result<(f64, f64), String> {
        let run = self.run(case, n, method, mode);
        let e = error_norms(run.phi()?, &run.exact, &run.mesh);
        Ok((e.e1[0], e.einf[0]))
    }

    fn regions(&mut self, case: CaseId, n: usize, method: Method, mode: Mode) -> Result<Vec<f64>, String> {
        let regions = self.cases[&case].regions.clone();
        let run = self.run(case, n, method, mode);
        let phi = run.phi()?;
        Ok(regions.iter().map(|&r| region_e1(phi, &run.exact, &run.mesh, r)[0]).collect())
    }

    fn advection_regular_l(&mut self) {
        let meshes = [40, 80, 160];
        let targets = [1.1e-5, 1.7e-7, 2.6e-9];
        let norms: Result<Vec<_>, _> = meshes.iter().map(|&n| self.norms(CaseId::AdvRegular, n, Method::Linear, Mode::Mood)).collect();
        let norms = match norms {
            Ok(v) => v,
            Err(e) => return self.fail("1", "advection regular l/mood", &e),
        };
        for ((&n, &target), &(e1, _)) in meshes.iter().zip(&targets).zip(&norms) {
            self.check("1", &format!("advection regular l/mood E1 at I={n} within x3 of {target:.1e}"), within_factor(e1, target, 3.0), format!("{e1:.3e}"));
        }
        let o1: Vec<f64> = (0..2).map(|k| rate((norms[k].0, meshes[k]), (norms[k + 1].0, meshes[k + 1]))).collect();
        let oinf: Vec<f64> = (0..2).map(|k| rate((norms[k].1, meshes[k]), (norms[k + 1].1, meshes[k + 1]))).collect();
        self.check("1", "advection regular l/mood E1 orders >= 5.7", o1.iter().all(|&o| o >= 5.7), format!("{:.2} {:.2}", o1[0], o1[1]));
        self.check("1", "advection regular l/mood Einf orders >= 5.4", oinf.iter().all(|&o| o >= 5.4), format!("{:.2} {:.2}", oinf[0], oinf[1]));
    }

    fn advection_regular_tm(&mut self) {
        let meshes = [40, 80, 160];
        let mut tables = Vec::new();
        for method in [Method::Tm1, Method::Tm2] {
            let what = format!("advection regular {} E1 orders >= 5.0", tag(method, Mode::Mood));
            let norms: Result<Vec<_>, _> = meshes.iter().map(|&n| self.norms(CaseId::AdvRegular, n, method, Mode::Mood)).collect();
            match norms {
                Ok(v) => {
                    let o: Vec<f64> = (0..2).map(|k| rate((v[k].0, meshes[k]), (v[k + 1].0, meshes[k + 1]))).collect();
                    let e: Vec<String> = v.iter().map(|x| format!("{:.3e}", x.0)).collect();
                    self.check("2", &what, o.iter().all(|&o| o >= 5.0), format!("E1 {} orders {:.2} {:.2}", e.join(" "), o[0], o[1]));
                    tables.push(Some(v));
                }
                Err(e) => {
                    self.fail("2", &what, &e);
                    tables.push(None);
                }
            }
        }
        let what = "advection regular tm1 and tm2 E1 tables agree within 10%";
        match (&tables[0], &tables[1]) {
            (Some(a), Some(b)) => {
                let gaps: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x.0 - y.0).abs() / x.0.max(y.0)).collect();
                let detail = gaps.iter().map(|g| format!("{:.1}%", 100.0 * g)).collect::<Vec<_>>().join(" ");
                self.check("2", what, gaps.iter().all(|&g| g <= 0.1), detail);
            }
            _ => self.check("2", what, false, "a table is incomplete"),
        }
    }

    fn advection_irregular(&mut self) {
        let n = 40;
        let methods = [Method::Linear, Method::Newton, Method::Tm1, Method::Tm2];
        let (lo, hi) = {
            let run = self.run(CaseId::AdvIrregular, n, Method::Linear, Mode::Mood);
            let ex = run.exact.component(0);
            (ex.iter().copied().fold(f64::INFINITY, f64::min) - 1e-3, ex.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1e-3)
        };
        for method in methods {
            for mode in [Mode::Mood, Mode::MoodAs] {
                let what = format!("advection irregular {} I={n} inside [{lo:.4}, {hi:.4}]", tag(method, mode));
                match self.run(CaseId::AdvIrregular, n, method, mode).phi() {
                    Ok(phi) => {
                        let (a, b) = (phi.component(0).iter().copied().fold(f64::INFINITY, f64::min), phi.component(0).iter().copied().fold(f64::NEG_INFINITY, f64::max));
                        self.check("3", &what, a >= lo && b <= hi, format!("range [{a:.4}, {b:.4}]"));
                    }
                    Err(e) => self.fail("3", &what, &e),
                }
            }
        }
        for method in methods {
            let what = format!("advection irregular {} far-cell max error <= 1/10 of {}", tag(method, Mode::MoodAs), tag(method, Mode::Mood));
            let far = |run: &Run| -> Result<f64, String> {
                let h = run.mesh.h();
                let errors = run.cell_errors()?;
                Ok(run
                    .mesh
                    .cells()
                    .filter(|&i| (run.mesh.center(i) - 0.5).abs() > 3.0 * h)
                    .map(|i| errors[i - 1])
                    .fold(0.0, f64::max))
            };
            let mood = far(self.run(CaseId::AdvIrregular, n, method, Mode::Mood));
            let adaptive = far(self.run(CaseId::AdvIrregular, n, method, Mode::MoodAs));
            match (mood, adaptive) {
                (Ok(m), Ok(a)) => self.check("3", &what, a <= m / 10.0, format!("{a:.3e} vs {m:.3e}, ratio {:.3}", a / m)),
                (Err(e), _) | (_, Err(e)) => self.fail("3", &what, &e),
            }
        }
        for mode in [Mode::Mood, Mode::MoodAs] {
            let what = format!("advection irregular {} CPD map equals {}", tag(Method::Tm2, mode), tag(Method::Linear, mode));
            let map = |run: &Run| run.outcome.as_ref().map(|r| r.cpd.clone()).map_err(Clone::clone);
            let tm2 = map(self.run(CaseId::AdvIrregular, n, Method::Tm2, mode));
            let l = map(self.run(CaseId::AdvIrregular, n, Method::Linear, mode));
            match (tm2, l) {
                (Ok(a), Ok(b)) => self.check("3", &what, a == b, format!("{} vs {}", digits(&a), digits(&b))),
                (Err(e), _) | (_, Err(e)) => self.fail("3", &what, &e),
            }
        }
    }

    fn burgers(&mut self) {
        let n = 40;
        let shock = self.cases[&CaseId::Burgers].shock.unwrap();
        let jump = 2.0 * shock.sin();
        let mut smooth = HashMap::new();
        for mode in [Mode::Mood, Mode::MoodAs] {
            let run = self.run(CaseId::Burgers, n, Method::Newton, mode);
            let (errors, phi) = match (run.cell_errors(), run.phi()) {
                (Ok(e), Ok(p)) => (e, p.component(0).to_vec()),
                (Err(e), _) | (_, Err(e)) => {
                    self.fail("4", &format!("burgers {} I={n}", tag(Method::Newton, mode)), &e);
                    continue;
                }
            };
            let mesh = run.mesh;
            let h = mesh.h();
            let offset = |i: usize| (mesh.center(i) - shock).abs();
            let transition: Vec<usize> = mesh.cells().filter(|&i| errors[i - 1] > 0.05 * jump).collect();
            let e1: f64 = mesh.cells().filter(|&i| offset(i) > 2.5 * h).map(|i| errors[i - 1] * h).sum();
            smooth.insert(mode, e1);
            let (a, b) = (phi.iter().copied().fold(f64::INFINITY, f64::min), phi.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            let label = tag(Method::Newton, mode);
            self.check("4", &format!("burgers {label} I={n} inside [-1.05, 1.05]"), a >= -1.05 && b <= 1.05, format!("range [{a:.4}, {b:.4}]"));
            self.check(
                "4",
                &format!("burgers {label} I={n} shock transition <= 2 cells around x*"),
                transition.len() <= 2 && transition.iter().all(|&i| offset(i) < 2.0 * h),
                format!("cells with error > 5% of the jump: {transition:?}"),
            );
        }
        let what = format!("burgers {} smooth-region E1 <= 1/100 of {}", tag(Method::Newton, Mode::MoodAs), tag(Method::Newton, Mode::Mood));
        match (smooth.get(&Mode::MoodAs), smooth.get(&Mode::Mood)) {
            (Some(&a), Some(&m)) => self.check("4", &what, a <= m / 100.0, format!("{a:.3e} vs {m:.3e}, ratio {:.4}", a / m)),
            _ => self.check("4", &what, false, "a solve is missing"),
        }
    }

    fn euler(&mut self) {
        let nl = Method::Newton;
        let targets = [4.1e-5, 2.3e-4];
        let err = |r: &mut Self, n: usize, mode: Mode| -> Option<Vec<f64>> {
            match r.regions(CaseId::Euler, n, nl, mode) {
                Ok(v) => Some(v),
                Err(e) => {
                    r.fail("5", &format!("euler {} I={n}", tag(nl, mode)), &e);
                    None
                }
            }
        };
        let mood40 = err(self, 40, Mode::Mood);
        let mood80 = err(self, 80, Mode::Mood);
        let as40 = err(self, 40, Mode::MoodAs);
        let as80 = err(self, 80, Mode::MoodAs);
        let fmt = |v: &[f64]| format!("[{:.3e}, {:.3e}]", v[0], v[1]);
        if let Some(m) = &mood40 {
            let ok = m.iter().zip(&targets).all(|(&e, &t)| within_factor(e, t, 5.0));
            self.check("5", "euler nl/mood I=40 region E1 within x5 of [4.1e-5, 2.3e-4]", ok, fmt(m));
        }
        if let (Some(a), Some(b)) = (&mood40, &mood80) {
            let o: Vec<f64> = (0..2).map(|k| rate((a[k], 40), (b[k], 80))).collect();
            self.check("5", "euler nl/mood region orders 40 -> 80 >= 3.5", o.iter().all(|&o| o >= 3.5), format!("{:.2} {:.2}", o[0], o[1]));
        }
        for (n, m, a) in [(40, &mood40, &as40), (80, &mood80, &as80)] {
            if let (Some(m), Some(a)) = (m, a) {
                let ok = a.iter().zip(m).all(|(&x, &y)| x <= y * 1e-3);
                self.check("5", &format!("euler nl/mood-as I={n} region E1 >= 1e3 below nl/mood"), ok, format!("{} vs {}", fmt(a), fmt(m)));
            }
        }
        if let (Some(a), Some(b)) = (&as40, &as80) {
            let o = rate((a[0], 40), (b[0], 80));
            self.check("5", "euler nl/mood-as left-region order 40 -> 80 >= 5.5", o >= 5.5, format!("{o:.2}"));
        }
        for (n, base) in [(41, &as40), (81, &as80)] {
            let what = format!("euler nl/mood-as I={n} region E1 within x10 of I={}", n - 1);
            match (self.regions(CaseId::Euler, n, nl, Mode::MoodAs), base) {
                (Ok(v), Some(b)) => {
                    let ok = v.iter().zip(b.iter()).all(|(&x, &y)| within_factor(x, y, 10.0));
                    self.check("6", &what, ok, format!("{} vs {}", fmt(&v), fmt(b)));
                }
                (Err(e), _) => self.fail("6", &what, &e),
                (_, None) => self.check("6", &what, false, format!("I={} solve is missing", n - 1)),
            }
        }
    }

    fn properties(&mut self) {
        let mut rng = StdRng::seed_from_u64(0x6d6f6f64);
        let samples = 500;

        let mut worst = 0.0f64;
        for _ in 0..samples {
            let n = rng.gen_range(12..40);
            let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let d = rng.gen_range(1..=5);
            let i = rng.gen_range(1..=n);
            let cpd = random_map(&mut rng, n);
            let s = stencil_for(i, d, n, rng.gen_bool(0.5).then_some(&cpd));
            worst = worst.max(conservation_defect(&phi, d, i, &s));
        }
        self.check("7", "reconstruction conservation <= 1e-12", worst <= CONSERVATION_TOL, format!("worst {worst:.2e} over {samples} fits"));

        for d in [1, 2, 5] {
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let coeffs: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = rng.gen_range(12..60);
                let i = rng.gen_range(1..=n);
                let cpd = random_map(&mut rng, n);
                let s = stencil_for(i, d, n, rng.gen_bool(0.5).then_some(&cpd));
                worst = worst.max(exactness_defect(&coeffs, n, i, &s));
            }
            self.check("7", &format!("degree-{d} polynomial exactness <= 1e-10"), worst <= EXACTNESS_TOL, format!("worst {worst:.2e}"));
        }

        let mut violation = None;
        for _ in 0..samples {
            let prim = [rng.gen_range(0.1..10.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.1..10.0)];
            if let Err(e) = flux_consistency(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..1.0), prim) {
                violation = Some(e);
                break;
            }
        }
        self.check("7", "flux consistency F_num(u, u) = F(u), exact", violation.is_none(), violation.unwrap_or_else(|| format!("{samples} states per flux")));

        let worst = (0..samples)
            .map(|_| roundtrip_defect([rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)]))
            .fold(0.0, f64::max);
        self.check("7", "euler prim -> cons -> prim roundtrip <= 1e-14", worst <= ROUNDTRIP_TOL, format!("worst {worst:.2e}"));

        let mut violation = None;
        for _ in 0..1000 {
            let n = rng.gen_range(7..50);
            let cpd = random_map(&mut rng, n);
            let size = stencil_size([1, 2, 5][rng.gen_range(0..3)]);
            if let Some(v) = adaptive_stencil_violation(&cpd, size) {
                violation = Some(v);
                break;
            }
        }
        self.check("7", "adaptive stencil size, contiguity, determinism on 1000 maps", violation.is_none(), violation.unwrap_or_else(|| "ok".into()));

        let mut outcome = Ok(0);
        for _ in 0..samples {
            let n = rng.gen_range(8..40);
            let candidate = FieldVector::from_components(vec![(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()]);
            match decrement_fixed_point(&candidate, &random_map(&mut rng, n)) {
                Ok(k) => outcome = outcome.map(|m: usize| m.max(k)),
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            }
        }
        let detail = match &outcome {
            Ok(k) => format!("at most {k} applications"),
            Err(e) => e.clone(),
        };
        self.check("7", "detect_and_decrement monotone, fixed point within |cascade| I", outcome.is_ok(), detail);

        let problems = telescoping_problems();
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let (problem, field) = &problems[rng.gen_range(0..problems.len())];
            let (a, b) = problem.domain();
            let n = rng.gen_range(12..50);
            let mut phi = field(&Mesh::new(a, b, n).unwrap());
            for v in phi.as_mut_slice() {
                *v *= 1.0 + rng.gen_range(-1e-2..1e-2);
            }
            worst = worst.max(telescoping_defect(&**problem, &phi, &random_map(&mut rng, n)));
        }
        self.check("7", "residual telescoping <= 1e-12", worst <= TELESCOPING_TOL, format!("worst {worst:.2e}"));
    }

    fn runtime(&mut self) {
        let (key, slowest) = self
            .runs
            .iter()
            .map(|(k, r)| (*k, r.elapsed))
            .max_by_key(|&(_, t)| t)
            .unwrap();
        self.check(
            "t",
            "every solve under 30 s",
            slowest < RUN_BUDGET,
            format!("slowest {:.2} s ({} I={} {})", slowest.as_secs_f64(), key.0, key.1, tag(key.2, key.3)),
        );
    }
}

fn random_map(rng: &mut StdRng, n: usize) -> CpdMap {
    CpdMap::new((0..n).map(|_| [0, 1, 2, 5][rng.gen_range(0..4)]).collect())
}

fn digits(cpd: &CpdMap) -> String {
    cpd.as_slice().iter().map(|d| d.to_string()).collect()
}

fn main() {
    let mut report = Report::new();
    report.properties();
    report.advection_regular_l();
    report.advection_regular_tm();
    report.advection_irregular();
    report.burgers();
    report.euler();
    report.runtime();
    println!("acceptance: {} passed, {} failed", report.passed, report.failed);
    let strict = std::env::var("MOOD1D_ACCEPTANCE_STRICT").is_ok_and(|v| v != "0");
    if strict && report.failed > 0 {
        std::process::exit(1);
    }
}
