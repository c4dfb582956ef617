//! Invariant suites behind `verify`. Output is a deterministic function of
//! the suite, sample count and seed.

use std::f64::consts::PI;

use clap::ValueEnum;
use rand::Rng;

use crate::bounds::{
    bounds_report, constant_c, constant_d, prop5_ratio, pu_consistent, upper_constant_identity,
    HomotopyClassData,
};
use crate::deformations::{
    deformed_energy, dilation_energy_curve, equator_restriction, quadrature_identity_check,
    retraction_limit_energy, DilationMap, ProjectiveDeformation,
};
use crate::estimators::{area_2d, croke_energy, direct_energy, slice_energy, Domain, EnergyEstimate};
use crate::geometry::quadrature::adaptive_simpson;
use crate::geometry::rng::{derive_seed, stream};
use crate::geometry::{
    gaussian_vector, sample_grassmann, sample_uniform_sphere, sigma, SpherePoint, StereographicChart,
    TangentFrame,
};
use crate::maps::{
    conformal_residual, constant, differential, dilation, graph, identity, inclusion, polar_warp,
    retraction_to_hyperplane, tension_field, DifferentialMode, SmoothMap, FD_STEP, SECOND_FD_STEP,
};
use crate::Result;

pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Constants,
    Geometry,
    Maps,
    Estimators,
    Deformations,
    Bounds,
    All,
}

impl Suite {
    fn tag(self) -> u64 {
        self as u64 + 1
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Constants => "constants",
            Suite::Geometry => "geometry",
            Suite::Maps => "maps",
            Suite::Estimators => "estimators",
            Suite::Deformations => "deformations",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{status} {} {}\n", c.name, c.detail));
        }
        let failed: Vec<&str> = self.failures().map(|c| c.name.as_str()).collect();
        s.push_str(&format!("summary: {} passed, {} failed\n", self.checks.len() - failed.len(), failed.len()));
        if !failed.is_empty() {
            s.push_str(&format!("failed: {}\n", failed.join(", ")));
        }
        s
    }
}

struct Ctx {
    suite: &'static str,
    tag: u64,
    samples: u64,
    seed: u64,
    counter: u64,
    report: VerifyReport,
}

impl Ctx {
    /// Fresh seed for the next check, independent of which suites ran before.
    fn next_seed(&mut self) -> u64 {
        self.counter += 1;
        derive_seed(derive_seed(self.seed, self.tag), self.counter)
    }

    fn check(&mut self, name: &str, f: impl FnOnce(u64) -> Result<(bool, String)>) {
        let seed = self.next_seed();
        let (passed, detail) = match f(seed) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.report.checks.push(CheckResult { name: format!("{}/{name}", self.suite), passed, detail });
    }
}

/// Runs the invariant suite and returns its report.
pub fn run_suite(suite: Suite, samples: u64, seed: u64) -> VerifyReport {
    let order = [Suite::Constants, Suite::Geometry, Suite::Maps, Suite::Estimators, Suite::Deformations, Suite::Bounds];
    let mut report = VerifyReport::default();
    for s in order {
        if suite == Suite::All || suite == s {
            let mut ctx = Ctx { suite: s.name(), tag: s.tag(), samples, seed, counter: 0, report: VerifyReport::default() };
            match s {
                Suite::Constants => constants(&mut ctx),
                Suite::Geometry => geometry(&mut ctx),
                Suite::Maps => maps(&mut ctx),
                Suite::Estimators => estimators(&mut ctx),
                Suite::Deformations => deformations(&mut ctx),
                Suite::Bounds => bounds(&mut ctx),
                Suite::All => unreachable!(),
            }
            report.checks.extend(ctx.report.checks);
        }
    }
    report
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in it {
        worst = worst.max(v?);
    }
    Ok(worst)
}

fn below(value: f64, tol: f64, label: &str) -> (bool, String) {
    (value < tol, format!("{label}={value:.3e} tol={tol:.0e}"))
}

/// `|a - b|` in units of the combined standard error.
fn z_score(a: &EnergyEstimate, b: &EnergyEstimate) -> f64 {
    let diff = (a.value - b.value).abs();
    if diff <= 1e-9 * a.value.abs().max(b.value.abs()).max(1.0) {
        return 0.0;
    }
    diff / a.combined_se(b)
}

fn constants(ctx: &mut Ctx) {
    ctx.check("sigma_closed_forms", |_| {
        let known = [(0, 2.0), (1, 2.0 * PI), (2, 4.0 * PI), (3, 2.0 * PI * PI), (4, 8.0 * PI * PI / 3.0), (5, PI.powi(3))];
        let err = known.iter().map(|&(n, v)| (sigma(n) - v).abs() / v).fold(0.0, f64::max);
        Ok(below(err, 1e-12, "max_rel_err"))
    });
    ctx.check("sigma_recurrence_by_quadrature", |_| {
        // σ(n) = σ(n-1)·∫₀^π sin^{n-1}
        let err = (2..=12)
            .map(|n| {
                let integral = adaptive_simpson(|x: f64| x.sin().powi(n as i32 - 1), 0.0, PI, 1e-14);
                (sigma(n) - sigma(n - 1) * integral).abs() / sigma(n)
            })
            .fold(0.0, f64::max);
        Ok(below(err, 1e-9, "max_rel_err"))
    });
    ctx.check("telescoping_C_D", |_| {
        let err = max_over((3..=12).map(|n| Ok((constant_c(n)? - constant_c(n - 1)? * constant_d(n)?).abs())))?;
        Ok(below(err, 1e-11, "max_abs_err"))
    });
    ctx.check("upper_constant_identity", |_| {
        let err = max_over((3..=12).map(|n| upper_constant_identity(n).map(|(l, r)| (l - r).abs())))?;
        Ok(below(err, 1e-11, "max_abs_err"))
    });
    ctx.check("cosine_quadrature_identity", |_| {
        let err = max_over((3..=12).map(|n| quadrature_identity_check(n).map(|(l, r)| (l - r).abs())))?;
        Ok(below(err, 1e-9, "max_abs_err"))
    });
    ctx.check("limit_factor_matches_hyperplane_constants", |_| {
        let err = max_over((3..=12).map(|n| Ok((sigma(n - 2) / sigma(n - 3) - prop5_ratio(n)? * constant_d(n)?).abs())))?;
        Ok(below(err, 1e-12, "max_abs_err"))
    });
}

fn geometry(ctx: &mut Ctx) {
    ctx.check("chart_round_trip", |seed| {
        let pole = SpherePoint::basis(3, 0);
        let chart = StereographicChart::new(&pole);
        let err = max_over((0..1000).map(|i| {
            let x = sample_uniform_sphere(3, seed, i);
            if chart.is_antipodal(&x) {
                return Ok(0.0);
            }
            Ok((chart.inverse(&chart.forward(&x)?).coords() - x.coords()).norm())
        }))?;
        Ok(below(err, 1e-10, "max_err"))
    });
    ctx.check("uniform_sphere_second_moments", |seed| {
        let (n, m) = (4usize, 20_000u64);
        let mut acc = vec![0.0; n + 1];
        for i in 0..m {
            let x = sample_uniform_sphere(n, seed, i);
            for (a, c) in acc.iter_mut().zip(x.coords().iter()) {
                *a += c * c;
            }
        }
        let err = acc.iter().map(|a| (a / m as f64 - 1.0 / (n + 1) as f64).abs()).fold(0.0, f64::max);
        Ok(below(err, 0.01, "max_moment_err"))
    });
    ctx.check("grassmann_projection_mean", |seed| {
        // RP^k ⊂ RP^n spans a (k+1)-plane of R^{n+1}: E|P_Q u|² = (k+1)/(n+1)
        let (n, k, m) = (5usize, 2usize, 20_000u64);
        let mut u = crate::Vector::zeros(n + 1);
        u[0] = 1.0;
        let mut total = 0.0;
        for i in 0..m {
            total += sample_grassmann(n, k, seed, i)?.projection_norm_squared(&u);
        }
        Ok(below((total / m as f64 - (k + 1) as f64 / (n + 1) as f64).abs(), 0.01, "mean_err"))
    });
}

fn surface_maps() -> Result<Vec<SmoothMap>> {
    Ok(vec![
        identity(2)?,
        constant(2)?,
        inclusion(2, 4)?,
        polar_warp(2, 2.0)?,
        dilation(2, 3.0)?,
        graph(&identity(2)?, 0.1)?,
        graph(&polar_warp(2, 3.0)?, 0.5)?,
    ])
}

fn maps(ctx: &mut Ctx) {
    ctx.check("analytic_vs_finite_difference", |seed| {
        let cases = [
            identity(3)?,
            inclusion(2, 4)?,
            retraction_to_hyperplane(3)?,
            dilation(3, 2.5)?,
            polar_warp(3, 2.0)?,
            graph(&polar_warp(2, 2.0)?, 0.3)?,
            polar_warp(4, 3.0)?.compose(&dilation(4, 1.7)?)?,
        ];
        let err = max_over(cases.iter().flat_map(|f| {
            let fd = f.clone().with_mode(DifferentialMode::FiniteDifference { h: FD_STEP });
            (0..200).map(move |i| {
                let x = sample_uniform_sphere(f.domain_dim(), seed, i);
                let frame = TangentFrame::standard(&x);
                let a = differential(f, &x, &frame)?.matrix;
                let b = differential(&fd, &x, &frame)?.matrix;
                Ok((a - &b).abs().max() / b.abs().max().max(1.0))
            })
        }))?;
        Ok(below(err, 1e-5, "max_rel_err"))
    });
    ctx.check("equivariance_flags", |seed| {
        let cases = vec![identity(3)?, constant(3)?, inclusion(2, 5)?, retraction_to_hyperplane(4)?,
                         polar_warp(3, 2.0)?, graph(&identity(2)?, 0.2)?, graph(&constant(2)?, 0.2)?];
        for f in &cases {
            f.check_equivariance(100, seed)?;
        }
        Ok((true, format!("maps={}", cases.len())))
    });
    ctx.check("area_below_energy_pointwise", |seed| {
        let cases = surface_maps()?;
        let mut worst = f64::INFINITY;
        for f in &cases {
            for i in 0..10_000 {
                let x = sample_uniform_sphere(2, seed, i);
                let d = differential(f, &x, &TangentFrame::standard(&x))?;
                worst = worst.min(d.energy_density() - d.area_density()?);
            }
        }
        Ok((worst >= -1e-8, format!("min_slack={worst:.3e} tol=-1e-8")))
    });
    ctx.check("semiconformal_defect_vanishes", |seed| {
        let cases = [identity(2)?, inclusion(2, 3)?, inclusion(2, 6)?, dilation(2, 5.0)?];
        let err = max_over(cases.iter().flat_map(|f| {
            (0..10_000).map(move |i| {
                let x = sample_uniform_sphere(2, seed, i);
                differential(f, &x, &TangentFrame::standard(&x))?.conformal_defect().map(f64::abs)
            })
        }))?;
        Ok(below(err, 1e-6, "max_defect"))
    });
    ctx.check("tension_of_harmonic_maps", |seed| {
        let cases = [identity(3)?, inclusion(2, 4)?, inclusion(3, 5)?, dilation(2, 2.0)?];
        let err = max_over(cases.iter().flat_map(|f| {
            (0..1000).map(move |i| {
                let x = sample_uniform_sphere(f.domain_dim(), seed, i);
                Ok(tension_field(f, &x, &TangentFrame::standard(&x), SECOND_FD_STEP)?.norm())
            })
        }))?;
        Ok(below(err, 1e-4, "max_tension"))
    });
    ctx.check("conformal_residual_dilation_s3", |seed| {
        let f = dilation(3, 2.0)?;
        let err = max_over((0..1000).map(|i| {
            let x = sample_uniform_sphere(3, seed, i);
            conformal_residual(&f, &x, &TangentFrame::standard(&x))
        }))?;
        Ok(below(err, 1e-3, "max_residual"))
    });
    ctx.check("dilation_s3_is_not_harmonic", |seed| {
        let f = dilation(3, 2.0)?;
        let x = sample_uniform_sphere(3, seed, 0);
        let tau = tension_field(&f, &x, &TangentFrame::standard(&x), SECOND_FD_STEP)?.norm();
        Ok((tau > 1e-2, format!("tension={tau:.3e} min=1e-2")))
    });
}

fn estimator_cases(n: usize) -> Result<Vec<SmoothMap>> {
    Ok(vec![identity(n)?, constant(n)?, inclusion(2, n)?, polar_warp(n, 2.0)?])
}

fn estimators(ctx: &mut Ctx) {
    let samples = ctx.samples;
    for n in 2..=6 {
        ctx.check(&format!("identity_closed_form[n={n}]"), |seed| {
            let e = direct_energy(&identity(n)?, Domain::Projective, samples.min(10_000), seed)?;
            let exact = n as f64 * sigma(n) / 4.0;
            Ok((e.matches(exact, 3.0), format!("value={:.6e} exact={exact:.6e}", e.value)))
        });
    }
    ctx.check("identity_rp2_area", |seed| {
        let a = area_2d(&identity(2)?, Domain::Projective, samples.min(10_000), seed)?;
        Ok((a.matches(2.0 * PI, 3.0), format!("area={:.6e} exact={:.6e}", a.value, 2.0 * PI)))
    });
    for n in 2..=4 {
        for f in estimator_cases(n).unwrap_or_default() {
            let name = format!("agreement[{},n={n}]", f.name());
            ctx.check(&name, |seed| {
                let d = direct_energy(&f, Domain::Projective, samples, seed)?;
                let c = croke_energy(&f, Domain::Projective, samples, seed)?;
                let mut worst = z_score(&d, &c);
                let mut ks: Vec<usize> = vec![1, 2, n - 1];
                ks.retain(|&k| k < f.domain_dim());
                ks.dedup();
                for &k in &ks {
                    let planes = (samples / 100).max(1);
                    let s = slice_energy(&f, k, planes, 100, seed)?;
                    worst = worst.max(z_score(&d, &s)).max(z_score(&c, &s));
                }
                Ok((worst <= 3.0, format!("direct={:.6e} max_z={worst:.3} slices={}", d.value, ks.len())))
            });
        }
    }
}

fn deformations(ctx: &mut Ctx) {
    let samples = ctx.samples;
    ctx.check("dilation_group_law", |seed| {
        let p = SpherePoint::normalize(gaussian_vector(4, &mut stream(seed, 0)))?;
        let (a, b) = (DilationMap::new(3.0, &p)?, DilationMap::new(0.4, &p)?);
        let ab = DilationMap::new(1.2, &p)?;
        let err = (0..1000)
            .map(|i| {
                let x = sample_uniform_sphere(3, seed, i);
                (a.apply(&b.apply(&x)).coords() - ab.apply(&x).coords()).norm()
            })
            .fold(0.0, f64::max);
        Ok(below(err, 1e-9, "max_err"))
    });
    ctx.check("cap_boundary_continuity", |seed| {
        let t = 5.0;
        let theta = ProjectiveDeformation::new(3, t)?;
        let chart = StereographicChart::new(theta.pole());
        let err = (0..1000)
            .map(|i| {
                let v = gaussian_vector(3, &mut stream(seed, i));
                let v = &v / v.norm();
                let inner = chart.inverse(&(&v * (1.0 / t - 1e-6)));
                let outer = chart.inverse(&(&v * (1.0 / t + 1e-6)));
                (theta.apply(&inner).coords() - theta.apply(&outer).coords()).norm()
            })
            .fold(0.0, f64::max);
        Ok(below(err, 1e-4, "max_jump"))
    });
    let grid = [1.0, 2.0, 5.0, 10.0, 100.0];
    ctx.check("dilation_energy_constant_n2", |seed| {
        let curve = dilation_energy_curve(2, &grid, samples, seed)?;
        let worst = curve
            .iter()
            .map(|e| (e.value - 4.0 * PI).abs() / e.std_error.max(1e-300))
            .fold(0.0, f64::max);
        Ok((worst <= 3.0, format!("max_z={worst:.3}")))
    });
    ctx.check("dilation_energy_decays_n3", |seed| {
        let curve = dilation_energy_curve(3, &grid, samples, seed)?;
        let min_gap = curve
            .windows(2)
            .map(|w| (w[0].value - w[1].value) / w[0].combined_se(&w[1]))
            .fold(f64::INFINITY, f64::min);
        let ratio = curve[4].value / curve[0].value;
        Ok((min_gap > 3.0 && ratio < 0.05, format!("min_gap_z={min_gap:.3} ratio={ratio:.4e}")))
    });
    for n in [3usize, 4] {
        ctx.check(&format!("deformation_limit[n={n}]"), |seed| {
            let f = identity(n)?;
            let limit = retraction_limit_energy(&equator_restriction(&f)?, n, samples, seed)?;
            let target = limit.closed_form.value;
            let ts = [5.0, 10.0, 50.0];
            let mut errs = Vec::new();
            for (i, &t) in ts.iter().enumerate() {
                let d = deformed_energy(&f, t, samples, derive_seed(seed, i as u64))?;
                errs.push(((d.total.value - target).abs(), d.total.std_error.hypot(limit.closed_form.std_error)));
            }
            let monotone = errs.windows(2).all(|w| w[1].0 <= w[0].0 + 3.0 * w[0].1.hypot(w[1].1));
            let rel = errs[2].0 / target;
            Ok((monotone && rel < 0.05, format!("rel_err_t50={rel:.4e} monotone={monotone}")))
        });
    }
    for n in [3usize, 4, 5] {
        ctx.check(&format!("retraction_limit_numeric[n={n}]"), |seed| {
            let rl = retraction_limit_energy(&identity(n - 1)?, n, samples, seed)?;
            let z = z_score(&rl.numeric, &rl.closed_form);
            Ok((z <= 3.0, format!("closed={:.6e} numeric={:.6e} z={z:.3}", rl.closed_form.value, rl.numeric.value)))
        });
    }
}

fn bounds(ctx: &mut Ctx) {
    let samples = ctx.samples;
    ctx.check("sandwich_ordering", |seed| {
        let mut rng = stream(seed, 0);
        let mut ok = true;
        for _ in 0..1000 {
            let n = rng.random_range(2..=12);
            let a = rng.random_range(1e-3..1e3);
            let b = rng.random_range(1e-3..1e3);
            let r = bounds_report(&HomotopyClassData { n, area_star: Some(a), length_star: None, beta: Some(b) })?;
            let (lo, hi) = (r.lower_thm1.unwrap_or(0.0), r.upper_thm1.unwrap_or(0.0));
            ok &= lo <= hi && ((lo == hi) == (n == 2));
            if let (Some(l5), Some(u5)) = (r.lower_prop5, r.upper_prop5) {
                ok &= l5 <= u5;
            }
        }
        Ok((ok, "inputs=1000".to_string()))
    });
    ctx.check("pu_consistency_equivalence", |seed| {
        let mut rng = stream(seed, 1);
        let mut mismatches = 0;
        for _ in 0..1000 {
            let n = rng.random_range(2..=12);
            let a: f64 = rng.random_range(0.01..50.0);
            let l: f64 = rng.random_range(0.01..8.0);
            let r = bounds_report(&HomotopyClassData { n, area_star: Some(a), length_star: Some(l), beta: None })?;
            let (lo1, lo2) = (r.lower_thm1.unwrap_or(0.0), r.lower_thm2.unwrap_or(0.0));
            let tie = (lo1 - lo2).abs() <= 1e-6 * lo1.max(lo2);
            if !tie && pu_consistent(a, l) != (lo1 >= lo2) {
                mismatches += 1;
            }
        }
        Ok((mismatches == 0, format!("pairs=1000 mismatches={mismatches}")))
    });
    ctx.check("identity_class_equality_case", |seed| {
        let r = bounds_report(&HomotopyClassData::identity_class(3))?;
        let (lo1, lo2, hi) = (r.lower_thm1.unwrap_or(0.0), r.lower_thm2.unwrap_or(0.0), r.upper_thm1.unwrap_or(0.0));
        let exact = 1.5 * PI * PI;
        let e = direct_energy(&identity(3)?, Domain::Projective, samples.min(10_000), seed)?;
        let ok = (lo1 - exact).abs() < 1e-12
            && (lo2 - exact).abs() < 1e-12
            && e.value >= lo1 - 3.0 * e.std_error - 1e-9
            && e.value <= hi + 3.0 * e.std_error
            && e.matches(lo1, 3.0);
        Ok((ok, format!("lower_thm1={lo1:.12e} lower_thm2={lo2:.12e} measured={:.12e}", e.value)))
    });
}
