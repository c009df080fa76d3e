use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use harmonic_normality::catalog::{builtin_catalog, lookup};
use harmonic_normality::criteria::{
    check_lappan_poly, check_min_spherical, check_thm_y, check_thm_ya, cross_check,
    default_targets, sense_samples, solve_fiber, CriterionReport, HarnessConfig, NonNegPolynomial,
    DEFAULT_SEED_GRID,
};
use harmonic_normality::harmonic::MapRecord;
use harmonic_normality::metrics::lipschitz_quotient_estimate;
use harmonic_normality::normality::{
    estimate_sup_normality, estimate_sup_phi, validate_phi, Functional, Phi, PhiValidation,
    PolarGrid, SupEstimate, TrendVerdict, DEFAULT_A_PROBE, DEFAULT_COMPACT_RADIUS, DEFAULT_R_PROBE,
};
use harmonic_normality::{Error, HarmonicMap};

use crate::complex::{parse_complex_list, parse_real_list};
use crate::report::{to_json, Report};
use crate::{CliError, Command, GridFunctional, MapArgs, Theorem, EXIT_NUMERIC, EXIT_OK};

type CmdResult = Result<i32, CliError>;

fn value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(Error::Io(format!("{}: {e}", path.display())))
}

fn load_map(args: &MapArgs) -> Result<HarmonicMap, CliError> {
    if let Some(spec) = &args.map {
        if let Some(name) = spec.strip_prefix("catalog:") {
            return lookup(name)
                .map(|e| e.map)
                .ok_or_else(|| CliError::Usage(format!("no catalog entry named {name:?}")));
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut rec: MapRecord = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: not a map record: {e}", path.display())))?;
        if rec.label.is_empty() {
            rec.label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        return Ok(HarmonicMap::from_record(&rec)?);
    }
    let h = args.h.as_deref().ok_or_else(|| {
        CliError::Usage("a map is required: give --h (and optionally --g) or --map".into())
    })?;
    let label = match &args.g {
        Some(g) => format!("{h} + conj({g})"),
        None => h.to_string(),
    };
    Ok(HarmonicMap::parse(h, args.g.as_deref(), label)?)
}

fn echo_map(report: &mut Report, f: &HarmonicMap) {
    report.input("map", f.to_record());
}

fn emit(out: &mut dyn Write, report: &Report) -> Result<(), CliError> {
    let mut text = to_json(report);
    text.push('\n');
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Core(Error::Io(e.to_string())))
}

fn parse_targets(text: &str) -> Result<Vec<Complex64>, CliError> {
    let list = parse_complex_list(text).map_err(CliError::Usage)?;
    if list.is_empty() {
        return Err(CliError::Usage("target list is empty".into()));
    }
    Ok(list)
}

fn trend_warning(report: &mut Report, what: &str, est: &SupEstimate) {
    let t = est.trend_analysis();
    if t.verdict == TrendVerdict::Inconclusive {
        report.warnings.push(format!(
            "{what}: trend inconclusive ({} points)",
            t.points_used
        ));
    }
    if est.singular_points > 0 {
        report.warnings.push(format!(
            "{what}: {} singular grid points skipped",
            est.singular_points
        ));
    }
}

fn sup_record(est: &SupEstimate) -> Value {
    json!({ "estimate": est, "trend": est.trend_analysis() })
}

pub fn dispatch(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Analyze {
            map,
            phi,
            k,
            rmax,
            grid,
            refine,
            seed,
            pairs,
        } => analyze(
            out,
            &map,
            phi.as_deref(),
            k,
            rmax,
            grid,
            refine,
            seed,
            pairs,
        ),
        Command::Zalcman { map, alpha, steps } => zalcman(out, &map, alpha, steps),
        Command::Fibers {
            map,
            targets,
            rmax,
            grid,
        } => fibers(out, &map, &targets, rmax, grid),
        Command::Criteria {
            map,
            theorem,
            k,
            e,
            phi,
            p,
            epsilon,
            rmax,
            grid,
            refine,
            klist,
        } => {
            let opts = CriteriaOpts {
                theorem,
                k,
                e,
                phi,
                p,
                epsilon,
                rmax,
                grid,
                refine,
                klist,
            };
            criteria(out, &map, &opts)
        }
        Command::PhiCheck { phi } => phi_check(out, &phi),
        Command::Catalog { out: dir } => catalog(out, dir.as_deref()),
        Command::Grid {
            map,
            functional,
            phi,
            k,
            rmax,
            grid,
            out: path,
        } => grid_csv(out, &map, functional, &phi, k, rmax, grid, path.as_deref()),
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    out: &mut dyn Write,
    map: &MapArgs,
    phi: Option<&str>,
    k: usize,
    rmax: f64,
    grid: usize,
    refine: usize,
    seed: u64,
    pairs: usize,
) -> CmdResult {
    let f = load_map(map)?;
    let mut report = Report::new("analyze");
    echo_map(&mut report, &f);
    report
        .input("rmax", rmax)
        .input("grid", grid)
        .input("refine", refine)
        .input("seed", seed)
        .input("pairs", pairs)
        .input("phi", phi)
        .input("k", k);

    let norm = estimate_sup_normality(&f, rmax, grid, refine)?;
    trend_warning(&mut report, "normality", &norm);
    let phi_part = match phi {
        Some(spec) => {
            let phi = Phi::parse_spec(spec)?;
            let est = estimate_sup_phi(&f, &phi, rmax, grid, refine, k)?;
            trend_warning(&mut report, "phi", &est);
            sup_record(&est)
        }
        None => Value::Null,
    };
    let lip = lipschitz_quotient_estimate(&f, pairs, rmax, seed)?;
    let sense = f.is_sense_preserving(&sense_samples(rmax))?;
    if !sense.preserving {
        report
            .warnings
            .push("map is not sense-preserving on the sample grid".into());
    }
    let canonical = f.check_canonical(Complex64::new(0.0, 0.0))?;
    if !canonical {
        report
            .warnings
            .push("g(0) != 0: decomposition is not normalized at 0".into());
    }
    report.results = json!({
        "normality": sup_record(&norm),
        "phi": phi_part,
        "lipschitz": lip,
        "sense_check": sense,
        "canonical": canonical,
    });
    emit(out, &report)?;
    Ok(EXIT_OK)
}

fn zalcman(out: &mut dyn Write, map: &MapArgs, alpha: f64, steps: usize) -> CmdResult {
    let f = load_map(map)?;
    let mut report = Report::new("zalcman");
    echo_map(&mut report, &f);
    report.input("alpha", alpha).input("steps", steps);
    let seq = harmonic_normality::zalcman::extract_sequence(&f, alpha, steps)?;
    let mut hard_failure = false;
    for fail in &seq.failures {
        hard_failure |= fail.kind != "not-applicable";
        report
            .warnings
            .push(format!("step {}: {}", fail.n, fail.reason));
    }
    for s in seq.steps.iter().filter(|s| s.unreliable) {
        report.warnings.push(format!(
            "step {}: rescaled sup unreliable ({} skipped nodes)",
            s.n, s.skips
        ));
    }
    if !seq.converged_flag {
        report
            .warnings
            .push("sequence does not meet the convergence checks".into());
    }
    report.results = value(&seq);
    emit(out, &report)?;
    Ok(if hard_failure { EXIT_NUMERIC } else { EXIT_OK })
}

fn fibers(out: &mut dyn Write, map: &MapArgs, targets: &str, rmax: f64, grid: usize) -> CmdResult {
    let f = load_map(map)?;
    let targets = parse_targets(targets)?;
    let mut report = Report::new("fibers");
    echo_map(&mut report, &f);
    report
        .input("targets", &targets)
        .input("rmax", rmax)
        .input("grid", grid);
    let mut fibers = Vec::new();
    for a in &targets {
        let fb = solve_fiber(&f, *a, rmax, grid)?;
        if fb.is_empty() {
            report
                .warnings
                .push(format!("no solutions of f(z) = {a} in |z| <= {rmax}"));
        }
        fibers.push(fb);
    }
    report.results = value(&fibers);
    emit(out, &report)?;
    Ok(EXIT_OK)
}

struct CriteriaOpts {
    theorem: Theorem,
    k: usize,
    e: Option<String>,
    phi: String,
    p: String,
    epsilon: f64,
    rmax: f64,
    grid: usize,
    refine: usize,
    klist: String,
}

fn phi_warnings(report: &mut Report, v: &PhiValidation) {
    if !v.growth {
        report.warnings.push(format!(
            "{}: phi(r)(1-r) does not grow without bound",
            v.spec
        ));
    }
    if !v.locally_uniform {
        report.warnings.push(format!(
            "{}: R_a does not approach 1 uniformly on compacts",
            v.spec
        ));
    }
    if !v.convex {
        report
            .warnings
            .push(format!("{}: 1/phi is not discretely convex", v.spec));
    }
}

fn criteria(out: &mut dyn Write, map: &MapArgs, o: &CriteriaOpts) -> CmdResult {
    let mut report = Report::new("criteria");
    let theorem = match o.theorem {
        Theorem::MinSpherical => "1.2",
        Theorem::LappanPoly => "1.3",
        Theorem::Y => "1.5",
        Theorem::Ya => "1.6",
        Theorem::Harness => "harness",
    };
    report.input("theorem", theorem).input("rmax", o.rmax);

    if o.theorem == Theorem::Harness {
        let maps: Vec<HarmonicMap> = if map.h.is_some() || map.map.is_some() {
            vec![load_map(map)?]
        } else {
            builtin_catalog().into_iter().map(|e| e.map).collect()
        };
        let k_list: Vec<usize> = parse_real_list(&o.klist)
            .map_err(CliError::Usage)?
            .into_iter()
            .map(|x| {
                (x >= 1.0 && x.fract() == 0.0)
                    .then_some(x as usize)
                    .ok_or_else(|| {
                        CliError::Usage(format!("k values must be positive integers, got {x}"))
                    })
            })
            .collect::<Result<_, _>>()?;
        let cfg = HarnessConfig {
            r_max: o.rmax,
            grid: o.grid,
            refine_iters: o.refine,
            k_list,
            epsilon: o.epsilon,
            seed_grid: DEFAULT_SEED_GRID,
        };
        let phi = Phi::parse_spec(&o.phi)?;
        report.input("phi", &o.phi).input("config", &cfg);
        report.input(
            "maps",
            maps.iter().map(|m| m.to_record()).collect::<Vec<_>>(),
        );
        let rep = cross_check(&maps, &phi, &cfg)?;
        if rep.phi_rejected {
            phi_warnings(&mut report, &rep.phi_validation);
            report
                .warnings
                .push("phi rejected; no checks were run".into());
        }
        for m in &rep.maps {
            for w in &m.warnings {
                report.warnings.push(format!("{}: {w}", m.label));
            }
        }
        report
            .warnings
            .extend(rep.red_flags.iter().map(|s| format!("red flag: {s}")));
        report.warnings.extend(
            rep.necessary_violations
                .iter()
                .map(|s| format!("necessary condition: {s}")),
        );
        report.warnings.extend(
            rep.inclusion_violations
                .iter()
                .map(|s| format!("inclusion: {s}")),
        );
        report.results = value(&rep);
        emit(out, &report)?;
        return Ok(EXIT_OK);
    }

    let f = load_map(map)?;
    echo_map(&mut report, &f);
    let explicit_e = o.e.as_deref().map(parse_targets).transpose()?;
    let targets = |n: usize| explicit_e.clone().unwrap_or_else(|| default_targets(n));
    let phi_setup = |report: &mut Report| -> Result<Phi, CliError> {
        let phi = Phi::parse_spec(&o.phi)?;
        let v = validate_phi(
            &phi,
            &DEFAULT_R_PROBE,
            DEFAULT_COMPACT_RADIUS,
            &DEFAULT_A_PROBE,
        )?;
        phi_warnings(report, &v);
        report.input("phi", &o.phi);
        Ok(phi.with_convexity(v.convexity_flag()))
    };
    let result: CriterionReport = match o.theorem {
        Theorem::MinSpherical => {
            report.input("epsilon", o.epsilon).input("grid", o.grid);
            check_min_spherical(&f, o.epsilon, o.rmax, o.grid)?
        }
        Theorem::LappanPoly => {
            let phi = phi_setup(&mut report)?;
            let coeffs = parse_real_list(&o.p).map_err(CliError::Usage)?;
            let p = NonNegPolynomial::new(coeffs)?;
            let e = targets(5);
            report.input("P", p.coeffs()).input("E", &e);
            check_lappan_poly(&f, &p, &e, &phi, o.rmax)?
        }
        Theorem::Y | Theorem::Ya => {
            let phi = phi_setup(&mut report)?;
            let n = if o.theorem == Theorem::Y {
                o.k + 4
            } else {
                o.k / 2 + 4
            };
            let e = targets(n);
            report.input("k", o.k).input("E", &e);
            if o.theorem == Theorem::Y {
                check_thm_y(&f, o.k, &e, &phi, o.rmax)?
            } else {
                check_thm_ya(&f, o.k, &e, &phi, o.rmax)?
            }
        }
        Theorem::Harness => unreachable!("handled above"),
    };
    report.warnings.extend(result.caveats.iter().cloned());
    if result.vacuous {
        report
            .warnings
            .push("every nonzero fiber is empty: hypothesis holds vacuously".into());
    }
    report.results = value(&result);
    emit(out, &report)?;
    Ok(EXIT_OK)
}

fn phi_check(out: &mut dyn Write, spec: &str) -> CmdResult {
    let phi = Phi::parse_spec(spec)?;
    let mut report = Report::new("phi-check");
    report
        .input("phi", spec)
        .input("r_probe", DEFAULT_R_PROBE)
        .input("a_probe", DEFAULT_A_PROBE)
        .input("compact_radius", DEFAULT_COMPACT_RADIUS);
    let v = validate_phi(
        &phi,
        &DEFAULT_R_PROBE,
        DEFAULT_COMPACT_RADIUS,
        &DEFAULT_A_PROBE,
    )?;
    phi_warnings(&mut report, &v);
    report.results = value(&v);
    emit(out, &report)?;
    Ok(EXIT_OK)
}

fn catalog(out: &mut dyn Write, dir: Option<&Path>) -> CmdResult {
    let mut report = Report::new("catalog");
    report.input("out", dir.map(|d| d.display().to_string()));
    let entries = builtin_catalog();
    let mut listed = Vec::new();
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    for e in &entries {
        let mut item = json!({ "name": e.name, "map": e.record(), "labels": e.labels });
        if let Some(dir) = dir {
            let map_path = dir.join(format!("{}.json", e.name));
            let label_path = dir.join(format!("{}.labels.json", e.name));
            std::fs::write(&map_path, to_json(&e.record()) + "\n")
                .map_err(|err| io_err(&map_path, err))?;
            std::fs::write(&label_path, to_json(&e.labels) + "\n")
                .map_err(|err| io_err(&label_path, err))?;
            item["files"] = json!([
                map_path.display().to_string(),
                label_path.display().to_string()
            ]);
        }
        listed.push(item);
    }
    report.results = Value::Array(listed);
    emit(out, &report)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn grid_csv(
    out: &mut dyn Write,
    map: &MapArgs,
    which: GridFunctional,
    phi_spec: &str,
    k: usize,
    rmax: f64,
    n: usize,
    path: Option<&Path>,
) -> CmdResult {
    let f = load_map(map)?;
    if !(rmax > 0.0 && rmax < 1.0) {
        return Err(Error::InvalidParameter(format!("r_max must lie in (0,1), got {rmax}")).into());
    }
    if n == 0 {
        return Err(CliError::Usage("grid must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()).into());
    }
    let (name, eval): (
        String,
        Box<dyn Fn(Complex64) -> harmonic_normality::Result<f64>>,
    ) = match which {
        GridFunctional::Normality => {
            let func = Functional::Normality;
            (func.name(), Box::new(move |z| func.eval(&f, z)))
        }
        GridFunctional::Phi => {
            let func = Functional::Phi {
                phi: Phi::parse_spec(phi_spec)?,
                k,
            };
            (
                format!("phi k={k} phi={phi_spec}"),
                Box::new(move |z| func.eval(&f, z)),
            )
        }
        GridFunctional::Esd => (
            format!("esd k={k}"),
            Box::new(move |z| f.extended_spherical_derivative(z, k)),
        ),
    };
    let record = load_map(map)?.to_record();
    let grid = PolarGrid::new(rmax, n);
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# functional={name} h={} g={} rmax={rmax} grid={n} radii={} angles={}",
        record.h,
        record.g.as_deref().unwrap_or("0"),
        grid.radii.len(),
        grid.angles.len()
    );
    csv.push_str("r,theta,z_re,z_im,value\n");
    let mut singular = 0usize;
    for &r in &grid.radii {
        for &theta in &grid.angles {
            let z = Complex64::from_polar(r, theta);
            let v = match eval(z) {
                Ok(v) if v.is_finite() => v,
                Ok(_) | Err(Error::Singularity { .. }) | Err(Error::NonFinite) => {
                    singular += 1;
                    f64::NAN
                }
                Err(e) => return Err(e.into()),
            };
            let _ = writeln!(
                csv,
                "{r:.16e},{theta:.16e},{:.16e},{:.16e},{v:.16e}",
                z.re, z.im
            );
        }
    }
    let rows = grid.radii.len() * grid.angles.len();
    match path {
        Some(p) => {
            std::fs::write(p, &csv).map_err(|e| io_err(p, e))?;
            let mut report = Report::new("grid");
            report
                .input("map", &record)
                .input("functional", &name)
                .input("rmax", rmax)
                .input("grid", n)
                .input("out", p.display().to_string());
            if singular > 0 {
                report
                    .warnings
                    .push(format!("{singular} singular grid points written as NaN"));
            }
            report.results = json!({ "rows": rows, "radii": grid.radii.len(), "angles": grid.angles.len(), "singular": singular });
            emit(out, &report)?;
        }
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Core(Error::Io(e.to_string())))?,
    }
    Ok(EXIT_OK)
}
