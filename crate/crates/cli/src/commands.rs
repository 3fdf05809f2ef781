//! Subcommand implementations. Each returns the report text; `main` routes it.

use std::fs;
use std::io::{self, Read};
use std::path::Path;

use num_traits::One;
use serde::Serialize;
use zerostab_core::grid::regularity;
use zerostab_core::method::{bdf_variable_row, deflate_alpha};
use zerostab_core::operators::{assemble_a, assemble_d, assemble_r};
use zerostab_core::sim::{
    doubling_sequence, quadrature_convergence, run_homogeneous, InitPolicy, GROWTH_TOLERANCE,
};
use zerostab_core::stability::{
    bdf2_exact_ratio_bound, perturbation_matrices, stability_threshold, StabilityReport,
};
use zerostab_core::{Error, Grid, GridFamily, GridMap, MethodSpec, Rational, Scalar};

use crate::cli::{
    AnalyzeArgs, CoeffsArgs, Command, ConvergenceArgs, DeflateArgs, Format, GridArgs, OperatorKind,
    SimulateArgs, SweepArgs, SweepRange,
};
use crate::format::{csv_table, grid_json, sci, sci_vec, write_grid_csv, write_triplets, Sci};
use crate::parallel::sweep_parallel;
use crate::parse::{parse_rational, FamilySpec, RationalList};
use crate::CliError;

const SCHEMA: u32 = 1;

pub fn run(command: &Command) -> Result<(String, Option<&Path>), CliError> {
    let (text, out) = match command {
        Command::Coeffs(a) => (coeffs(a)?, &a.output),
        Command::Deflate(a) => (deflate(a)?, &a.output),
        Command::Analyze(a) => (analyze(a)?, &a.output),
        Command::Simulate(a) => (simulate(a)?, &a.output),
        Command::Sweep(a) => (sweep(a)?, &a.output),
        Command::Convergence(a) => (convergence(a)?, &a.output),
    };
    Ok((text, out.out.as_deref()))
}

fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("report serializes") + "\n"
}

fn exact_strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn to_f64s(xs: &[Rational]) -> Vec<f64> {
    xs.iter().map(Scalar::to_f64_lossy).collect()
}

fn grid_label(grid: &GridArgs) -> String {
    match (&grid.grid, &grid.ratios, &grid.uniform) {
        (Some(f), _, _) => f.to_string(),
        (_, Some(r), _) => format!("ratios:{r}"),
        (_, _, Some(Some(n))) => format!("uniform:n={n}"),
        _ => "uniform".to_string(),
    }
}

/// The grid family behind a sweep-style command, plus a default `N` if the
/// invocation carried one.
fn family_of(grid: &GridArgs) -> Result<(FamilySpec, Option<usize>), CliError> {
    match (&grid.grid, &grid.ratios, &grid.uniform) {
        (Some(f), _, _) => Ok((*f, None)),
        (_, Some(RationalList(r)), _) => match r.as_slice() {
            [ratio] => Ok((FamilySpec::Geometric(ratio.to_f64_lossy()), None)),
            _ => Err(CliError::Usage(
                "grid families take a single constant ratio with --ratios".into(),
            )),
        },
        (_, _, Some(n)) => Ok((FamilySpec::Map(GridMap::Identity), *n)),
        _ => Err(CliError::Usage(
            "one of --grid, --ratios, --uniform is required".into(),
        )),
    }
}

fn sweep_ns(range: &SweepRange, default_nmin: usize) -> Result<Vec<usize>, CliError> {
    let nmin = range.nmin.unwrap_or(default_nmin);
    if nmin == 0 {
        return Err(CliError::Usage("--nmin must be positive".into()));
    }
    match range.nmax {
        Some(nmax) => Ok(std::iter::successors(Some(nmin), |&n| n.checked_mul(2))
            .take_while(|&n| n <= nmax)
            .collect()),
        None => {
            let d = range.doublings.unwrap_or(4);
            if d >= usize::BITS as usize
                || nmin.checked_shl(d as u32).is_none_or(|n| n >> d != nmin)
            {
                return Err(CliError::Usage(
                    "--doublings overflows the step count".into(),
                ));
            }
            Ok(doubling_sequence(nmin, d))
        }
    }
}

#[derive(Serialize)]
struct RowReport {
    index: usize,
    ratios_exact: Option<Vec<String>>,
    alpha_exact: Option<Vec<String>>,
    beta_exact: Option<Vec<String>>,
    ratios: Vec<Sci>,
    alpha: Vec<Sci>,
    beta: Vec<Sci>,
}

#[derive(Serialize)]
struct CoeffsReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    k: usize,
    normalization: &'static str,
    grid: String,
    rows: Vec<RowReport>,
}

fn coeffs(a: &CoeffsArgs) -> Result<String, CliError> {
    let spec = a.method.spec()?;
    let k = spec.steps();
    let exact_row = |ratios: Vec<Rational>| -> Result<RowReport, CliError> {
        let row = bdf_variable_row::<Rational>(&spec, &ratios)?;
        Ok(RowReport {
            index: 0,
            ratios_exact: Some(exact_strings(&ratios)),
            alpha_exact: Some(exact_strings(&row.alpha)),
            beta_exact: Some(exact_strings(&row.beta)),
            ratios: sci_vec(&to_f64s(&ratios)),
            alpha: sci_vec(&to_f64s(&row.alpha)),
            beta: sci_vec(&to_f64s(&row.beta)),
        })
    };
    let rows = match (&a.grid.grid, &a.grid.ratios) {
        (Some(family), _) => {
            let grid = family.grid(a.n)?;
            if grid.len() < k {
                return Err(Error::GridTooShort {
                    n: grid.len(),
                    min: k,
                }
                .into());
            }
            (0..=grid.len() - k)
                .map(|n| {
                    let ratios = &grid.ratios()[n..n + k - 1];
                    let row = bdf_variable_row::<f64>(&spec, ratios)?;
                    Ok(RowReport {
                        index: n,
                        ratios_exact: None,
                        alpha_exact: None,
                        beta_exact: None,
                        ratios: sci_vec(ratios),
                        alpha: sci_vec(&row.alpha),
                        beta: sci_vec(&row.beta),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
        (_, Some(RationalList(r))) => {
            let ratios = match r.as_slice() {
                [one] => vec![one.clone(); k - 1],
                many => many.to_vec(),
            };
            vec![exact_row(ratios)?]
        }
        _ => vec![exact_row(vec![Rational::one(); k - 1])?],
    };
    match a.output.format {
        Format::Json => Ok(to_json(&CoeffsReport {
            schema: SCHEMA,
            command: "coeffs",
            method: "bdf",
            k,
            normalization: spec.normalization().name(),
            grid: grid_label(&a.grid),
            rows,
        })),
        Format::Csv => {
            let mut table = Vec::new();
            for row in &rows {
                let ratios = match &row.ratios_exact {
                    Some(r) => r.join(";"),
                    None => row
                        .ratios
                        .iter()
                        .map(|x| sci(x.0))
                        .collect::<Vec<_>>()
                        .join(";"),
                };
                for j in 0..=k {
                    let (alpha, beta) = match (&row.alpha_exact, &row.beta_exact) {
                        (Some(al), Some(be)) => (al[j].clone(), be[j].clone()),
                        _ => (sci(row.alpha[j].0), sci(row.beta[j].0)),
                    };
                    table.push(vec![
                        row.index.to_string(),
                        j.to_string(),
                        ratios.clone(),
                        alpha,
                        beta,
                    ]);
                }
            }
            Ok(csv_table(&["row", "j", "ratios", "alpha", "beta"], &table))
        }
    }
}

enum AlphaRow {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(io_err)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

/// Rows from a `coeffs` report, preferring the exact fields.
fn rows_from_report(text: &str) -> Result<Vec<AlphaRow>, CliError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("not JSON: {e}")))?;
    let rows = doc
        .get("rows")
        .and_then(|r| r.as_array())
        .ok_or_else(|| CliError::Input("expected a coeffs report with a 'rows' array".into()))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if let Some(exact) = row.get("alpha_exact").and_then(|a| a.as_array()) {
                let alpha = exact
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .ok_or_else(|| format!("row {i}: alpha_exact holds a non-string"))
                            .and_then(parse_rational)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::Input)?;
                return Ok(AlphaRow::Exact(alpha));
            }
            let alpha = row
                .get("alpha")
                .and_then(|a| a.as_array())
                .ok_or_else(|| CliError::Input(format!("row {i}: missing alpha")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| CliError::Input(format!("row {i}: non-numeric alpha")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AlphaRow::Float(alpha))
        })
        .collect()
}

#[derive(Serialize)]
struct DeflatedReport {
    index: usize,
    alpha_exact: Option<Vec<String>>,
    gamma_exact: Option<Vec<String>>,
    alpha: Vec<Sci>,
    gamma: Vec<Sci>,
}

#[derive(Serialize)]
struct DeflateReport {
    schema: u32,
    command: &'static str,
    rows: Vec<DeflatedReport>,
}

fn deflate(a: &DeflateArgs) -> Result<String, CliError> {
    let inputs = match (&a.alpha, &a.input) {
        (Some(RationalList(alpha)), _) => vec![AlphaRow::Exact(alpha.clone())],
        (_, Some(path)) => rows_from_report(&read_input(path)?)?,
        _ => {
            return Err(CliError::Usage(
                "one of --alpha, --input is required".into(),
            ))
        }
    };
    let rows = inputs
        .iter()
        .enumerate()
        .map(|(index, row)| -> Result<DeflatedReport, CliError> {
            Ok(match row {
                AlphaRow::Exact(alpha) => {
                    let gamma = deflate_alpha(alpha)?.gamma;
                    DeflatedReport {
                        index,
                        alpha_exact: Some(exact_strings(alpha)),
                        gamma_exact: Some(exact_strings(&gamma)),
                        alpha: sci_vec(&to_f64s(alpha)),
                        gamma: sci_vec(&to_f64s(&gamma)),
                    }
                }
                AlphaRow::Float(alpha) => DeflatedReport {
                    index,
                    alpha_exact: None,
                    gamma_exact: None,
                    alpha: sci_vec(alpha),
                    gamma: sci_vec(&deflate_alpha(alpha)?.gamma),
                },
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    match a.output.format {
        Format::Json => Ok(to_json(&DeflateReport {
            schema: SCHEMA,
            command: "deflate",
            rows,
        })),
        Format::Csv => {
            let mut table = Vec::new();
            for row in &rows {
                for (j, g) in row.gamma.iter().enumerate() {
                    let value = match &row.gamma_exact {
                        Some(exact) => exact[j].clone(),
                        None => sci(g.0),
                    };
                    table.push(vec![row.index.to_string(), j.to_string(), value]);
                }
            }
            Ok(csv_table(&["row", "j", "gamma"], &table))
        }
    }
}

#[derive(Serialize)]
struct RootReport {
    re: Sci,
    im: Sci,
    modulus: Sci,
}

#[derive(Serialize)]
struct RampReport {
    v_max: Sci,
    v_min: Sci,
    v_min_dominance: Sci,
    n_star: usize,
    interval: [Sci; 2],
}

#[derive(Serialize)]
struct IntervalComparison {
    grigorieff: [Sci; 2],
    ramp_up: Option<[Sci; 2]>,
}

#[derive(Serialize)]
struct WindowReport {
    lower: Sci,
    upper: Sci,
}

#[derive(Serialize)]
struct AnalyzeReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    k: usize,
    normalization: &'static str,
    grid: String,
    regularity: Sci,
    q: Sci,
    roots: Vec<RootReport>,
    root_residual: Sci,
    strongly_stable: bool,
    c0: Sci,
    c0_terms: usize,
    c0_converged: bool,
    k_constant: Sci,
    geometric_bound: Sci,
    m_inf: Vec<Sci>,
    s_norms: Vec<Sci>,
    s_quadratic: Option<Sci>,
    w_max_linear: Sci,
    w_max_quadratic: Option<Sci>,
    w_max: Sci,
    n_star: usize,
    c_phi_reference_w: Sci,
    c_phi_bound: Sci,
    ramp_up: Option<RampReport>,
    reference_interval: Option<IntervalComparison>,
    bdf2_window: Option<WindowReport>,
    verdict: &'static str,
}

fn pair(p: (f64, f64)) -> [Sci; 2] {
    [Sci(p.0), Sci(p.1)]
}

fn analyze_report(spec: &MethodSpec, grid: String, r: &StabilityReport) -> AnalyzeReport {
    AnalyzeReport {
        schema: SCHEMA,
        command: "analyze",
        method: "bdf",
        k: r.k,
        normalization: spec.normalization().name(),
        grid,
        regularity: Sci(r.regularity),
        q: Sci(r.roots.q),
        roots: r
            .roots
            .roots
            .iter()
            .map(|z| RootReport {
                re: Sci(z.re),
                im: Sci(z.im),
                modulus: Sci(z.norm()),
            })
            .collect(),
        root_residual: Sci(r.roots.residual),
        strongly_stable: r.roots.strongly_stable(),
        c0: Sci(r.c0.c0),
        c0_terms: r.c0.terms,
        c0_converged: r.c0.converged,
        k_constant: Sci(r.c0.k_constant),
        geometric_bound: Sci(r.c0.geometric_bound),
        m_inf: sci_vec(&r.m_inf),
        s_norms: sci_vec(&r.s_norms),
        s_quadratic: r.s_quadratic.map(Sci),
        w_max_linear: Sci(r.w_max_linear),
        w_max_quadratic: r.w_max_quadratic.map(Sci),
        w_max: Sci(r.w_max),
        n_star: r.n_star,
        c_phi_reference_w: Sci(r.c_phi_reference_w),
        c_phi_bound: Sci(r.c_phi_bound),
        ramp_up: r.ramp_up.as_ref().map(|ru| RampReport {
            v_max: Sci(ru.v_max),
            v_min: Sci(ru.v_min),
            v_min_dominance: Sci(ru.v_min_dominance),
            n_star: ru.n_star,
            interval: pair(ru.interval),
        }),
        reference_interval: r.reference_interval.map(|g| IntervalComparison {
            grigorieff: pair(g),
            ramp_up: r.ramp_up.as_ref().map(|ru| pair(ru.interval)),
        }),
        bdf2_window: (r.k == 2).then(|| {
            let w = bdf2_exact_ratio_bound();
            WindowReport {
                lower: Sci(w.lower),
                upper: Sci(w.upper),
            }
        }),
        verdict: r.verdict.name(),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<String, CliError> {
    let spec = a.method.spec()?;
    let map = match (&a.grid.grid, &a.grid.ratios) {
        (Some(FamilySpec::Map(m)), _) => *m,
        (Some(FamilySpec::Geometric(_)), _) => {
            return Err(Error::InvalidArgument(
                "analyze needs a smooth grid map; constant-ratio families are not smooth",
            )
            .into())
        }
        (_, Some(r)) if !r.all_one() => {
            return Err(Error::InvalidArgument(
                "analyze needs a smooth grid map; only unit ratios are accepted with --ratios",
            )
            .into())
        }
        _ => GridMap::Identity,
    };
    let reg = regularity(&map, a.sampling)?;
    let pert = perturbation_matrices(&spec)?;
    let report = stability_threshold(&spec, &pert, reg.sup)?;
    let doc = analyze_report(&spec, grid_label(&a.grid), &report);
    match a.output.format {
        Format::Json => Ok(to_json(&doc)),
        Format::Csv => {
            let opt = |x: &Option<Sci>| x.map(|s| sci(s.0)).unwrap_or_default();
            let ramp = doc.ramp_up.as_ref();
            let mut rows = vec![
                ("k", doc.k.to_string()),
                ("normalization", doc.normalization.to_string()),
                ("grid", doc.grid.clone()),
                ("regularity", sci(doc.regularity.0)),
                ("q", sci(doc.q.0)),
                ("root_residual", sci(doc.root_residual.0)),
                ("c0", sci(doc.c0.0)),
                ("k_constant", sci(doc.k_constant.0)),
                ("geometric_bound", sci(doc.geometric_bound.0)),
                ("w_max_linear", sci(doc.w_max_linear.0)),
                ("w_max_quadratic", opt(&doc.w_max_quadratic)),
                ("w_max", sci(doc.w_max.0)),
                ("n_star", doc.n_star.to_string()),
                ("c_phi_reference_w", sci(doc.c_phi_reference_w.0)),
                ("c_phi_bound", sci(doc.c_phi_bound.0)),
                ("ramp_up_v_max", opt(&ramp.map(|r| r.v_max))),
                ("ramp_up_v_min", opt(&ramp.map(|r| r.v_min))),
                (
                    "ramp_up_n_star",
                    ramp.map(|r| r.n_star.to_string()).unwrap_or_default(),
                ),
            ];
            for (j, s) in doc.s_norms.iter().enumerate() {
                rows.push((["s_1", "s_2", "s_3", "s_4", "s_5", "s_6"][j], sci(s.0)));
            }
            if let Some(sq) = doc.s_quadratic {
                rows.push(("s_quadratic", sci(sq.0)));
            }
            rows.push(("verdict", doc.verdict.to_string()));
            let table: Vec<Vec<String>> = rows
                .into_iter()
                .map(|(k, v)| vec![k.to_string(), v])
                .collect();
            Ok(csv_table(&["field", "value"], &table))
        }
    }
}

#[derive(Serialize)]
struct SimulateReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    k: usize,
    normalization: &'static str,
    grid: String,
    n: usize,
    init: Vec<Sci>,
    sup_y: Sci,
    sup_u: Sci,
    growth_rate: Sci,
    initial_norm: Sci,
    u_initial_norm: Sci,
    amplification: Sci,
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    write(&mut buf).map_err(io_err)?;
    fs::write(path, buf).map_err(io_err)
}

fn simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let spec = a.method.spec()?;
    let k = spec.steps();
    let (family, n_default) = family_of(&a.grid)?;
    let n =
        a.n.or(n_default)
            .ok_or_else(|| CliError::Usage("simulate needs --n (or --uniform N)".into()))?;
    let grid: Grid = family.grid(n)?;
    let init = a.init.as_ref().map(|l| l.0.clone()).unwrap_or_else(|| {
        (0..k)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect()
    });
    let run = run_homogeneous(&spec, &grid, &init)?;
    if let Some(path) = &a.grid_out {
        if path.extension().is_some_and(|e| e == "json") {
            let text = grid_json(&grid);
            write_file(path, |buf| {
                buf.extend_from_slice(text.as_bytes());
                Ok(())
            })?;
        } else {
            write_file(path, |buf| {
                write_grid_csv(&grid, buf).map_err(io::Error::from)
            })?;
        }
    }
    if let Some(path) = &a.operator_out {
        let m = match a.operator {
            OperatorKind::R => assemble_r(&spec, &grid)?,
            OperatorKind::A => assemble_a(&spec, &grid)?,
            OperatorKind::D => assemble_d::<f64>(n)?,
        };
        write_file(path, |buf| write_triplets(&m, buf))?;
    }
    match a.output.format {
        Format::Json => Ok(to_json(&SimulateReport {
            schema: SCHEMA,
            command: "simulate",
            method: "bdf",
            k,
            normalization: spec.normalization().name(),
            grid: grid_label(&a.grid),
            n: run.n,
            init: sci_vec(&init),
            sup_y: Sci(run.sup_y),
            sup_u: Sci(run.sup_u),
            growth_rate: Sci(run.growth_rate),
            initial_norm: Sci(run.initial_norm),
            u_initial_norm: Sci(run.u_initial_norm),
            amplification: Sci(run.amplification),
        })),
        Format::Csv => Ok(csv_table(
            &["N", "sup_y", "sup_u", "growth_rate", "amplification"],
            &[vec![
                run.n.to_string(),
                sci(run.sup_y),
                sci(run.sup_u),
                sci(run.growth_rate),
                sci(run.amplification),
            ]],
        )),
    }
}

#[derive(Serialize)]
struct PointReport {
    n: usize,
    sup_y: Sci,
    sup_u: Sci,
    growth_rate: Sci,
    amplification: Sci,
}

#[derive(Serialize)]
struct SweepReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    k: usize,
    normalization: &'static str,
    grid: String,
    seed: u64,
    random_inits: usize,
    ns: Vec<usize>,
    points: Vec<PointReport>,
    growth_tolerance: Sci,
    max_ratio: Sci,
    verdict: &'static str,
    verdict_rule: &'static str,
}

fn sweep(a: &SweepArgs) -> Result<String, CliError> {
    let spec = a.method.spec()?;
    let (family, n_default) = family_of(&a.grid)?;
    let ns = sweep_ns(&a.range, n_default.unwrap_or(50))?;
    let policy = InitPolicy {
        seed: a.seed,
        random: a.random,
        ..InitPolicy::default()
    };
    let jobs = a
        .jobs
        .map(usize::from)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = sweep_parallel(&spec, &family, &ns, &policy, jobs)?;
    let points: Vec<PointReport> = result
        .points
        .iter()
        .map(|p| PointReport {
            n: p.n,
            sup_y: Sci(p.worst.sup_y),
            sup_u: Sci(p.worst.sup_u),
            growth_rate: Sci(p.worst.growth_rate),
            amplification: Sci(p.worst.amplification),
        })
        .collect();
    match a.output.format {
        Format::Json => Ok(to_json(&SweepReport {
            schema: SCHEMA,
            command: "sweep",
            method: "bdf",
            k: spec.steps(),
            normalization: spec.normalization().name(),
            grid: grid_label(&a.grid),
            seed: a.seed,
            random_inits: a.random,
            ns,
            points,
            growth_tolerance: Sci(GROWTH_TOLERANCE),
            max_ratio: Sci(result.max_ratio),
            verdict: result.verdict.name(),
            verdict_rule:
                "heuristic: worst-case amplification grows by at most growth_tolerance per doubling",
        })),
        Format::Csv => {
            eprintln!(
                "verdict: {} (max amplification ratio {}, tolerance {GROWTH_TOLERANCE})",
                result.verdict.name(),
                sci(result.max_ratio)
            );
            let table: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        p.n.to_string(),
                        sci(p.sup_y.0),
                        sci(p.sup_u.0),
                        sci(p.growth_rate.0),
                        sci(p.amplification.0),
                    ]
                })
                .collect();
            Ok(csv_table(
                &["N", "sup_y", "sup_u", "growth_rate", "amplification"],
                &table,
            ))
        }
    }
}

#[derive(Serialize)]
struct ConvergenceReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    k: usize,
    normalization: &'static str,
    grid: String,
    integrand: String,
    ns: Vec<usize>,
    errors: Vec<Sci>,
    orders: Vec<Option<Sci>>,
    fitted_order: Option<Sci>,
}

fn convergence(a: &ConvergenceArgs) -> Result<String, CliError> {
    let spec = a.method.spec()?;
    let (family, n_default) = family_of(&a.grid)?;
    let ns = sweep_ns(&a.range, n_default.unwrap_or(20))?;
    let integrand = a.integrand;
    let result = quadrature_convergence(
        &spec,
        &family,
        |t| integrand.f(t),
        |t| integrand.antiderivative(t),
        &ns,
    )?;
    let orders: Vec<Option<f64>> = (0..ns.len())
        .map(|i| {
            let (e0, e1) = (result.errors.get(i.wrapping_sub(1))?, result.errors[i]);
            (*e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).ln() / (ns[i] as f64 / ns[i - 1] as f64).ln())
        })
        .collect();
    match a.output.format {
        Format::Json => Ok(to_json(&ConvergenceReport {
            schema: SCHEMA,
            command: "convergence",
            method: "bdf",
            k: spec.steps(),
            normalization: spec.normalization().name(),
            grid: grid_label(&a.grid),
            integrand: integrand.to_string(),
            ns: ns.clone(),
            errors: sci_vec(&result.errors),
            orders: orders.iter().map(|o| o.map(Sci)).collect(),
            fitted_order: result.fitted_order.map(Sci),
        })),
        Format::Csv => {
            let table: Vec<Vec<String>> = ns
                .iter()
                .zip(&result.errors)
                .zip(&orders)
                .map(|((n, e), o)| vec![n.to_string(), sci(*e), o.map(sci).unwrap_or_default()])
                .collect();
            Ok(csv_table(&["N", "error", "order"], &table))
        }
    }
}
