//! The subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use paretoc_core::constrained::{analyze_constrained, ConstrainedError, ManifoldMesh};
use paretoc_core::continuation::{
    analyze, AnalysisOptions, ContinuationError, HessianMode, MarkerKind, Order, ParetoComplex, Stratum,
};
use paretoc_core::format::{plot_tables, ComplexFileV1, FormatError, PlotSpace, Provenance};
use paretoc_core::metrics::{hausdorff_sets, MetricsError, SimplexSet, DEFAULT_DENSITY};
use paretoc_core::problems::{
    check_constraint_derivatives, check_derivatives, registry_entries, registry_get, ConstrainedProblem, Problem,
    ProblemError, VectorProblem,
};
use paretoc_core::refinement::{self, history_csv, should_stop, target_strata, RefinementError, RefinementState, Scheme};
use paretoc_core::tessellation::{random_nodes, structured_grid, Tessellation, TessellationError};

use crate::grid::GridSpec;
use crate::{CheckArgs, CliError, DistanceArgs, IterateArgs, PlotArgs, ProblemArgs, RunArgs, SchemeArg, SpaceArg, StrataArg};

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TessellationError> for CliError {
    fn from(e: TessellationError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ContinuationError> for CliError {
    fn from(e: ContinuationError) -> Self {
        match e {
            ContinuationError::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ConstrainedError> for CliError {
    fn from(e: ConstrainedError) -> Self {
        match e {
            ConstrainedError::NonSquareUnsupported { .. } | ConstrainedError::InvalidMesh(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::DimensionMismatch(..) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RefinementError> for CliError {
    fn from(e: RefinementError) -> Self {
        match e {
            RefinementError::Continuation(c) => c.into(),
            RefinementError::Tessellation(t) => t.into(),
            RefinementError::Metrics(m) => m.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(format!("creating {}", dir.display())))?;
    }
    fs::write(path, contents).map_err(io(format!("writing {}", path.display())))
}

fn read_complex(path: &Path) -> Result<ComplexFileV1, CliError> {
    let text = fs::read_to_string(path).map_err(io(format!("reading {}", path.display())))?;
    ComplexFileV1::from_json(&text).map_err(|e: FormatError| CliError::Usage(format!("{}: {e}", path.display())))
}

fn save_complex(path: &Path, c: &ParetoComplex, provenance: Provenance) -> Result<(), CliError> {
    let json = ComplexFileV1::from_complex(c, provenance).to_json().map_err(|e| CliError::Numerical(e.to_string()))?;
    write_file(path, &(json + "\n"))
}

/// A problem with its node set, ready for analysis.
enum Setup {
    Plain { p: Arc<dyn VectorProblem>, tess: Tessellation, options: AnalysisOptions },
    Constrained { cp: ConstrainedProblem, mesh: ManifoldMesh },
}

struct Prepared {
    setup: Setup,
    name: String,
    grid: GridSpec,
}

fn prepare(args: &ProblemArgs) -> Result<Prepared, CliError> {
    let problem = registry_get(&args.problem)?;
    let entry = registry_entries().iter().find(|e| e.name == args.problem).expect("registered problems have entries");
    let grid = match (&args.grid, args.subdiv) {
        (Some(g), _) => g.clone(),
        (None, Some(k)) => GridSpec::Subdiv(k),
        (None, None) => entry.default_grid.parse().map_err(CliError::Usage)?,
    }
    .with_default_seed(args.seed);
    let setup = match problem {
        Problem::Unconstrained(p) => {
            let nodes = match &grid {
                GridSpec::Structured(counts) if counts.len() == p.n() => structured_grid(p.domain(), counts),
                GridSpec::Structured(counts) => {
                    return Err(CliError::Usage(format!(
                        "grid {grid} has {} axes but `{}` has {} variables",
                        counts.len(),
                        args.problem,
                        p.n()
                    )))
                }
                GridSpec::Random { count, seed } => random_nodes(p.domain(), *count, seed.unwrap_or(args.seed)),
                GridSpec::Subdiv(_) => {
                    return Err(CliError::Usage(format!("`{}` is unconstrained; subdiv grids are for sphere problems", args.problem)))
                }
            };
            let order = match args.order {
                Some(1) => Order::First,
                _ => Order::Second,
            };
            let hessians = if args.fd_hessians { HessianMode::FiniteDifference } else { HessianMode::Analytic };
            let tess = Tessellation::build_delaunay(nodes)?;
            Setup::Plain { p, tess, options: AnalysisOptions { order, hessians, threads: None } }
        }
        Problem::Constrained(cp) => {
            let GridSpec::Subdiv(k) = grid else {
                return Err(CliError::Usage(format!("`{}` is constrained and needs a subdiv:K grid", args.problem)));
            };
            if args.order == Some(2) || args.fd_hessians {
                warn!("constrained problems are analyzed to first order only; stability is not classified");
            }
            let mesh = ManifoldMesh::icosphere(k, cp.constraint.as_ref())?;
            Setup::Constrained { cp, mesh }
        }
    };
    Ok(Prepared { setup, name: args.problem.clone(), grid })
}

fn summary(c: &ParetoComplex, nodes: usize) -> String {
    let d = &c.diagnostics;
    let mut s = format!(
        "nodes {nodes}, cells {} ({} with singular set), vertices {}\n",
        d.cells,
        d.cells_with_singular_set,
        c.vertices.len()
    );
    let counts: Vec<String> = Stratum::ALL.iter().map(|&st| format!("{} {}", st.as_str(), c.count_stratum(st))).collect();
    s += &format!("simplices: {}\n", counts.join(", "));
    s += &format!(
        "markers: criticality_boundary {}, cusp {}\n",
        c.count_markers(MarkerKind::CriticalityBoundary),
        c.count_markers(MarkerKind::Cusp)
    );
    s += &format!(
        "diagnostics: skipped faces {}, rank collapse {}, non-critical {}, kernel mismatch {}, transversality warnings {}, degenerate cells {}",
        d.skipped_faces, d.rank_collapse, d.non_critical, d.kernel_mismatch, d.transversality_warnings, d.degenerate_cells
    );
    s
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let prep = prepare(&args.problem)?;
    let (complex, nodes) = match &prep.setup {
        Setup::Plain { p, tess, options } => (analyze(p.as_ref(), tess, options)?.0, tess.nodes().len()),
        Setup::Constrained { cp, mesh } => (analyze_constrained(cp, mesh, None)?, mesh.nodes.len()),
    };
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.json", prep.name)));
    let provenance = Provenance { problem: prep.name.clone(), grid: prep.grid.to_string(), iterations: 1 };
    save_complex(&out, &complex, provenance)?;
    println!("problem {}, grid {}", prep.name, prep.grid);
    println!("{}", summary(&complex, nodes));
    println!("wrote {}", out.display());
    Ok(())
}

fn target_set(c: &ParetoComplex) -> SimplexSet {
    SimplexSet::from_complex(c, target_strata(c))
}

pub fn iterate(args: &IterateArgs) -> Result<(), CliError> {
    let prep = prepare(&args.problem)?;
    let Setup::Plain { p, tess, options } = prep.setup else {
        return Err(CliError::Usage(format!("`{}` is constrained; refinement needs an unconstrained problem", prep.name)));
    };
    let scheme = match args.scheme {
        SchemeArg::Polyline => Scheme::Polyline,
        SchemeArg::Maximin => Scheme::Maximin,
    };
    let reference = match &args.reference {
        Some(path) => Some(target_set(&read_complex(path)?.to_complex())),
        None => None,
    };
    let file_for = |i: usize| args.out_dir.join(format!("iteration_{i:03}.json"));
    let provenance = |i: usize| Provenance { problem: prep.name.clone(), grid: prep.grid.to_string(), iterations: i };

    let mut state = RefinementState::new(p.as_ref(), tess, options, reference)?;
    save_complex(&file_for(1), &state.complex, provenance(1))?;
    let mut history = state.history.clone();
    let mut sets = vec![target_set(&state.complex)];
    for _ in 0..args.iterations {
        if args.tau.is_some_and(|tau| should_stop(&state, tau)) {
            info!("max |omega| {:.3e} below tolerance; stopping", state.last().max_minor);
            break;
        }
        state = match refinement::iterate(p.as_ref(), state, scheme, args.budget) {
            Ok(s) => s,
            Err(RefinementError::NoProgress) => {
                warn!("no candidate passed the spacing guard; stopping after iteration {}", history.len());
                break;
            }
            Err(e) => return Err(e.into()),
        };
        save_complex(&file_for(state.iteration), &state.complex, provenance(state.iteration))?;
        history = state.history.clone();
        sets.push(target_set(&state.complex));
        println!("iteration {}: nodes {}, max |omega| {:.6e}", state.iteration, state.last().nodes, state.last().max_minor);
    }
    if args.against_final {
        let last = sets.last().expect("at least the initial analysis");
        for (h, set) in history.iter_mut().zip(&sets) {
            h.hausdorff_to_ref = Some(hausdorff_sets(set, last, DEFAULT_DENSITY)?.hausdorff);
        }
    }
    let csv_path = args.out_dir.join("history.csv");
    write_file(&csv_path, &history_csv(&history))?;
    println!("wrote {} complexes and {}", history.len(), csv_path.display());
    Ok(())
}

fn strata(arg: StrataArg) -> &'static [Stratum] {
    match arg {
        StrataArg::All => &Stratum::ALL,
        StrataArg::Critical => &[Stratum::CriticalUnstable, Stratum::CriticalStable],
        StrataArg::Stable => &[Stratum::CriticalStable],
    }
}

pub fn distance(args: &DistanceArgs) -> Result<(), CliError> {
    let a = read_complex(&args.a)?.to_complex();
    let b = read_complex(&args.b)?.to_complex();
    let s = strata(args.strata);
    let report = hausdorff_sets(&SimplexSet::from_complex(&a, s), &SimplexSet::from_complex(&b, s), args.density)?;
    println!("{}", report.line());
    Ok(())
}

pub fn plot_data(args: &PlotArgs) -> Result<(), CliError> {
    let c = read_complex(&args.file)?.to_complex();
    if c.simplices.is_empty() {
        warn!("{} has no simplices; writing empty tables", args.file.display());
    }
    let space = match args.space {
        SpaceArg::Input => PlotSpace::Input,
        SpaceArg::Output => PlotSpace::Output,
        SpaceArg::Both => PlotSpace::Both,
    };
    let stem = args.file.file_stem().map_or("complex".into(), |s| s.to_string_lossy().into_owned());
    for (stratum, table) in plot_tables(&c, space, args.stable_only) {
        let path = args.out_dir.join(format!("{stem}_{}.csv", stratum.as_str()));
        write_file(&path, &table)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn list_problems() -> Result<(), CliError> {
    println!("{:<18} {:>2} {:>2} {:<11} {:<18} summary", "name", "n", "m", "constrained", "default grid");
    for e in registry_entries() {
        println!("{:<18} {:>2} {:>2} {:<11} {:<18} {}", e.name, e.n, e.m, e.constrained, e.default_grid, e.summary);
    }
    Ok(())
}

pub fn check_problem_derivatives(args: &CheckArgs) -> Result<(), CliError> {
    let problem = registry_get(&args.problem)?;
    let base = problem.base();
    let h = args.step * base.diagonal();
    let points = paretoc_core::problems::sample_points(base.domain(), args.samples, h, args.seed);
    let report = check_derivatives(base, &points, h);
    let mut passed = report.passed;
    let json = match &problem {
        Problem::Constrained(cp) => {
            let g = check_constraint_derivatives(cp.constraint.as_ref(), &points, h);
            passed &= g.passed;
            serde_json::json!({ "objectives": report, "constraint": g })
        }
        Problem::Unconstrained(_) => serde_json::json!({ "objectives": report }),
    };
    println!("{}", serde_json::to_string_pretty(&json).map_err(|e| CliError::Numerical(e.to_string()))?);
    if passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("derivative check failed for `{}`", args.problem)))
    }
}
