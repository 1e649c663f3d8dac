use crate::svg::{self, Cell, Raster};
use crate::{
    Cli, Command, Done, Failure, FixtureCommand, LoopArgs, MapArgs, MechCommand, Method, OutputKind, PlanCommand,
    PlanSource, PointArgs, RenderCommand, Shape, SingularCommand, TrackArgs, TrackCommand,
};
use kinemap::grid::product_values;
use kinemap::kinematics::singular::{ALGEBRA_TOL, SCAN_TOL};
use kinemap::planning::{canonical_section, h_fixture_gap, PlanGrid};
use kinemap::report::{csv_row, fmt17, fmt6};
use kinemap::tracking::{closed_loop, shrinking_loop_probe, LoopShape, TrackingError};
use kinemap::{
    builtin_plan, measure_instability, singular_scan, singular_test, validate_plan, ChainOutput, ChartFactor,
    KinematicMap, ManipulationPlan, MapSpec, Mechanism, TrackingMethod, TrackingSpec, WorkChart, WorkPath,
};
use std::f64::consts::TAU;
use std::path::Path;

const MAX_RENDER_SAMPLES: usize = 1_000_000;

pub(crate) fn dispatch(cli: &Cli) -> Result<Done, Failure> {
    match &cli.command {
        Command::Mech(m) => mech(m),
        Command::Fk(p) => fk(p, cli.degrees),
        Command::Jac(p) => jac(p, cli.degrees),
        Command::Singular(SingularCommand::Scan { map, grid, tol }) => scan(map, *grid, *tol),
        Command::Track(t) => track(t, cli.degrees),
        Command::Plan(p) => plan(p),
        Command::Fixture(FixtureCommand::HGap { y }) => h_gap(y),
        Command::Render(r) => render(r),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{t}` is not a number"))))
        .collect()
}

fn parse_indices(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("`{t}` is not an index"))))
        .collect()
}

fn load_mechanism(path: &Path) -> Result<Mechanism, Failure> {
    Ok(Mechanism::from_json(&read(path)?)?)
}

fn load_map(a: &MapArgs) -> Result<KinematicMap, Failure> {
    if let Some(name) = &a.map {
        let params = match &a.params {
            Some(p) => parse_list(p)?,
            None => vec![],
        };
        return Ok(KinematicMap::from_spec(MapSpec::by_name(name, &params)?)?);
    }
    let Some(file) = &a.file else {
        return Err(Failure::Usage("give a mechanism file or --map".into()));
    };
    let m = load_mechanism(file)?;
    let output = match a.output {
        OutputKind::Pose => ChainOutput::Pose,
        OutputKind::Position => ChainOutput::Position,
        OutputKind::Orientation => ChainOutput::Orientation,
        OutputKind::Planar => ChainOutput::PlanarPosition,
    };
    Ok(KinematicMap::from_mechanism(&m, a.end.unwrap_or(m.links), output)?)
}

fn parse_config(k: &KinematicMap, s: &str, degrees: bool) -> Result<Vec<f64>, Failure> {
    let mut c = parse_list(s)?;
    if degrees {
        for (v, f) in c.iter_mut().zip(&k.config_chart().factors) {
            if *f == ChartFactor::Circle {
                *v = v.to_radians();
            }
        }
    }
    k.check_config(&c)?;
    Ok(c)
}

fn load_plan(p: &PlanSource) -> Result<ManipulationPlan, Failure> {
    match (&p.builtin, &p.file) {
        (Some(name), _) => Ok(builtin_plan(name)?),
        (None, Some(f)) => Ok(ManipulationPlan::from_json(&read(f)?)?),
        (None, None) => Err(Failure::Usage("give a plan file or --builtin".into())),
    }
}

fn vec6(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| fmt6(*x)).collect::<Vec<_>>().join(", "))
}

fn key_value_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&csv_row(&[k.to_string(), v.clone()]));
    }
    out
}

fn mech(cmd: &MechCommand) -> Result<Done, Failure> {
    match cmd {
        MechCommand::Validate { file } => {
            let m = load_mechanism(file)?;
            let summary = format!("valid: {} ({} moving links, {} joints)", m.name, m.links, m.joint_count());
            Ok(Done::ok(summary, Some(m.to_json())))
        }
        MechCommand::Classify { file } => {
            let m = load_mechanism(file)?;
            let t = format!("{:?}", m.classify()).to_lowercase();
            Ok(Done::ok(format!("topology: {t}"), Some(key_value_csv(&[("name", m.name.clone()), ("topology", t)]))))
        }
        MechCommand::Mobility { file, planar, redundancy } => {
            let m = load_mechanism(file)?;
            let r = m.mobility(*planar, *redundancy);
            let summary = if r.redundancy_override == 0 {
                format!("M={}", r.effective_mobility)
            } else {
                format!("M={} (naive {}, override {})", r.effective_mobility, r.naive_mobility, r.redundancy_override)
            };
            let report = key_value_csv(&[
                ("naive_mobility", r.naive_mobility.to_string()),
                ("redundancy_override", r.redundancy_override.to_string()),
                ("effective_mobility", r.effective_mobility.to_string()),
                ("planar", r.planar.to_string()),
            ]);
            Ok(Done::ok(summary, Some(report)))
        }
    }
}

fn fk(p: &PointArgs, degrees: bool) -> Result<Done, Failure> {
    let k = load_map(&p.map)?;
    let c = parse_config(&k, &p.config, degrees)?;
    let w = k.forward(&c);
    let mut report = String::from("index,value\n");
    for (i, v) in w.iter().enumerate() {
        report.push_str(&csv_row(&[i.to_string(), fmt17(*v)]));
    }
    Ok(Done::ok(format!("w = {}", vec6(&w)), Some(report)))
}

fn jac(p: &PointArgs, degrees: bool) -> Result<Done, Failure> {
    let k = load_map(&p.map)?;
    let c = parse_config(&k, &p.config, degrees)?;
    let j = k.jacobian(&c);
    let t = singular_test(&k, &c, p.tol.unwrap_or(ALGEBRA_TOL))?;
    let mut report = csv_row(&(0..j.ncols()).map(|i| format!("dc{i}")).collect::<Vec<_>>());
    for r in 0..j.nrows() {
        report.push_str(&csv_row(&(0..j.ncols()).map(|c| fmt17(j[(r, c)])).collect::<Vec<_>>()));
    }
    let full = k.config_chart().dim().min(k.work_chart().dim());
    let summary = format!(
        "rank {}/{full}, sigma_min {}, {}",
        t.rank,
        fmt6(t.smallest),
        if t.is_singular { "singular" } else { "regular" }
    );
    Ok(Done::ok(summary, Some(report)))
}

fn scan(map: &MapArgs, grid: usize, tol: Option<f64>) -> Result<Done, Failure> {
    let k = load_map(map)?;
    let r = singular_scan(&k, grid, tol.unwrap_or(SCAN_TOL))?;
    let dims: Vec<String> =
        r.components.iter().map(|c| c.dimension.map_or_else(|| "?".to_string(), |d| format!("{d:.2}"))).collect();
    let summary = format!(
        "{} of {} cells singular ({}), {} components, dimensions [{}]",
        r.singular_cells.len(),
        r.cells.len(),
        fmt6(r.singular_fraction),
        r.components.len(),
        dims.join(", ")
    );
    Ok(Done::ok(summary, Some(r.to_csv())))
}

fn tracking_failure(e: TrackingError) -> Failure {
    match e {
        TrackingError::Lost { .. } => Failure::Analysis(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn tracking_spec(a: &TrackArgs) -> TrackingSpec {
    let mut s = match a.method {
        Method::Damped => TrackingSpec::default(),
        Method::Pseudoinverse => TrackingSpec::pseudoinverse(),
    };
    if let Some(d) = a.damping {
        s.damping = d;
        if d > 0.0 {
            s.method = TrackingMethod::Damped;
        }
    }
    if let Some(g) = a.gain {
        s.gain = g;
    }
    if let Some(n) = a.steps {
        s.steps = n;
    }
    s
}

fn loop_shape(s: Shape) -> LoopShape {
    match s {
        Shape::Circle => LoopShape::Circle,
        Shape::Lollipop => LoopShape::Lollipop,
    }
}

fn branch_section(k: &KinematicMap, branch: &str) -> Result<kinemap::planning::Section, Failure> {
    let spec = k.spec().ok_or_else(|| Failure::Usage("--branch needs a canonical map".into()))?;
    Ok(canonical_section(spec, branch)?)
}

fn track(cmd: &TrackCommand, degrees: bool) -> Result<Done, Failure> {
    match cmd {
        TrackCommand::Lift { map, path, config, tracking } => {
            let k = load_map(map)?;
            let start = parse_config(&k, config, degrees)?;
            let wp = WorkPath::from_csv(&read(path)?).map_err(tracking_failure)?;
            let r = kinemap::lift_path(&k, &tracking_spec(tracking), &start, &wp).map_err(tracking_failure)?;
            let summary = format!(
                "lifted {} samples, max error {}, drift {}, {} singular encounters",
                r.times.len(),
                fmt6(r.max_error),
                fmt6(r.drift),
                r.singular_encounters.len()
            );
            Ok(Done::ok(summary, Some(r.to_csv())))
        }
        TrackCommand::Drift { map, lp, radius, tracking } => {
            let k = load_map(map)?;
            let center = parse_list(&lp.center)?;
            let path = closed_loop(k.work_chart(), &center, *radius, loop_shape(lp.shape)).map_err(tracking_failure)?;
            let start = loop_start(&k, lp, &path.points[0], degrees)?;
            let r = kinemap::lift_path(&k, &tracking_spec(tracking), &start, &path).map_err(tracking_failure)?;
            let summary = format!("drift {}, max error {}", fmt6(r.drift), fmt6(r.max_error));
            Ok(Done::ok(summary, Some(r.to_csv())))
        }
        TrackCommand::Probe { map, lp, radii, tracking } => {
            let k = load_map(map)?;
            let center = parse_list(&lp.center)?;
            let radii = parse_list(radii)?;
            let Some(branch) = &lp.branch else {
                return Err(Failure::Usage("probe needs --branch to start each loop".into()));
            };
            let section = branch_section(&k, branch)?;
            let rows = shrinking_loop_probe(&k, &tracking_spec(tracking), &center, &radii, loop_shape(lp.shape), |w| {
                section.eval(w).ok()
            })
            .map_err(tracking_failure)?;
            let mut report = String::from("radius,drift,max_error\n");
            for r in &rows {
                report.push_str(&csv_row(&[fmt17(r.radius), fmt17(r.drift), fmt17(r.max_error)]));
            }
            let drifts: Vec<f64> = rows.iter().map(|r| r.drift).collect();
            Ok(Done::ok(format!("drifts {}", vec6(&drifts)), Some(report)))
        }
    }
}

fn loop_start(k: &KinematicMap, lp: &LoopArgs, w0: &[f64], degrees: bool) -> Result<Vec<f64>, Failure> {
    match (&lp.config, &lp.branch) {
        (Some(c), _) => parse_config(k, c, degrees),
        (None, Some(b)) => Ok(branch_section(k, b)?.eval(w0)?),
        (None, None) => Err(Failure::Usage("give --config or --branch for the loop start".into())),
    }
}

fn plan(cmd: &PlanCommand) -> Result<Done, Failure> {
    match cmd {
        PlanCommand::Validate { plan, grid, lipschitz } => {
            let p = load_plan(plan)?;
            let r = validate_plan(&p, *grid, *lipschitz)?;
            let failures = r.uncovered
                + r.overlapping
                + r.path_failures
                + r.endpoint_failures
                + r.target_failures
                + r.step_failures
                + r.continuity_failures;
            let summary = format!(
                "{}: {} samples, {} pieces (claimed {}), {} failures, max target error {}, max step {}",
                if r.pass { "pass" } else { "FAIL" },
                r.samples,
                r.pieces,
                r.claimed_pieces,
                failures,
                fmt6(r.max_target_error),
                fmt6(r.max_step)
            );
            Ok(Done { summary, report: Some(r.to_csv()), passed: r.pass })
        }
        PlanCommand::Instability { plan, grid, eps } => {
            let p = load_plan(plan)?;
            let r = measure_instability(&p, *grid, *eps)?;
            let summary = format!(
                "max order {} over {} pieces (eps {}, spacing {})",
                r.max_order,
                r.pieces,
                fmt6(r.eps),
                fmt6(r.spacing)
            );
            Ok(Done::ok(summary, Some(r.summary_csv())))
        }
        PlanCommand::Builtin { name } => {
            let p = builtin_plan(name)?;
            Ok(Done::ok(format!("{name}: {} pieces on {}", p.len(), p.map.name()), Some(p.to_json())))
        }
    }
}

fn h_gap(ys: &[f64]) -> Result<Done, Failure> {
    let ys: Vec<f64> = if ys.is_empty() { (0..=2000).map(|i| i as f64 * 1e-3).collect() } else { ys.to_vec() };
    let mut report = String::from("y,gap\n");
    let mut jumps = Vec::new();
    for &y in &ys {
        let g = h_fixture_gap(y)?;
        if g != 0.0 {
            jumps.push(y);
        }
        report.push_str(&csv_row(&[fmt17(y), fmt17(g)]));
    }
    let summary = format!("{} values, nonzero gap at {}", ys.len(), vec6(&jumps));
    Ok(Done::ok(summary, Some(report)))
}

fn axis_range(f: &ChartFactor) -> (f64, f64) {
    match f {
        ChartFactor::Circle => (0.0, TAU),
        ChartFactor::Interval { lo, hi } => (*lo, *hi),
    }
}

fn render(cmd: &RenderCommand) -> Result<Done, Failure> {
    match cmd {
        RenderCommand::Workspace { map, grid } => {
            let k = load_map(map)?;
            let (ix, iy) = match k.work_chart() {
                WorkChart::RigidMotion => (9, 10),
                WorkChart::Rotation => return Err(Failure::Usage("dimension mismatch: rotations have no plot plane".into())),
                w if w.ambient_dim() < 2 => {
                    return Err(Failure::Usage("dimension mismatch: work space is one-dimensional".into()))
                }
                _ => (0, 1),
            };
            let axes = k.config_chart().grid_axes(*grid);
            let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
            if total.is_none_or(|t| t > MAX_RENDER_SAMPLES) {
                return Err(Failure::Usage(format!("grid {grid} gives more than {MAX_RENDER_SAMPLES} samples")));
            }
            let pts: Vec<[f64; 2]> = product_values(&axes)
                .iter()
                .map(|c| {
                    let w = k.forward(c);
                    [w[ix], w[iy]]
                })
                .collect();
            let title = format!("workspace of {}", k.name());
            let svg = svg::scatter(&title, &format!("w{ix}"), &format!("w{iy}"), &pts);
            Ok(Done::ok(format!("{} workspace samples", pts.len()), Some(svg)))
        }
        RenderCommand::SingularScan { map, grid, tol } => {
            let k = load_map(map)?;
            let chart = k.config_chart();
            if chart.dim() != 2 {
                return Err(Failure::Usage(format!("dimension mismatch: need a 2-D configuration chart, got {}", chart.dim())));
            }
            let r = singular_scan(&k, *grid, tol.unwrap_or(SCAN_TOL))?;
            let cells: Vec<Cell> = r
                .singular_cells
                .iter()
                .map(|&i| Cell { ix: r.cells[i].index[0], iy: r.cells[i].index[1], shade: 3 })
                .collect();
            let raster =
                Raster { x_range: axis_range(&chart.factors[0]), y_range: axis_range(&chart.factors[1]), nx: *grid, ny: *grid };
            let title = format!("singular cells of {}", k.name());
            let legend = format!("{} of {} cells singular", cells.len(), r.cells.len());
            let svg = svg::cell_map(&title, "c0", "c1", &raster, &cells, &legend);
            Ok(Done::ok(legend, Some(svg)))
        }
        RenderCommand::InstabilitySlice { plan, grid, eps, free, at } => {
            let p = load_plan(plan)?;
            let r = measure_instability(&p, *grid, *eps)?;
            let dims = r.shape.len();
            let free = parse_indices(free)?;
            if free.len() != 2 || free[0] == free[1] || free.iter().any(|&a| a >= dims) {
                return Err(Failure::Usage(format!("--free needs two distinct axes below {dims}")));
            }
            let fixed: Vec<usize> = match at {
                Some(s) => parse_indices(s)?,
                None if dims == 2 => vec![],
                None => return Err(Failure::Usage(format!("--at needs {} indices for a {dims}-axis grid", dims - 2))),
            };
            if fixed.len() != dims - 2 {
                return Err(Failure::Usage(format!("--at needs {} indices, got {}", dims - 2, fixed.len())));
            }
            let others: Vec<usize> = (0..dims).filter(|a| !free.contains(a)).collect();
            if let Some((&a, &v)) = others.iter().zip(&fixed).find(|(&a, &v)| v >= r.shape[a]) {
                return Err(Failure::Usage(format!("--at index {v} out of range for axis {a}")));
            }
            let grid_info = PlanGrid::new(&KinematicMap::from_spec(p.map.clone())?, *grid)?;
            let (nx, ny) = (r.shape[free[0]], r.shape[free[1]]);
            let mut idx = vec![0usize; dims];
            for (a, v) in others.iter().zip(&fixed) {
                idx[*a] = *v;
            }
            let mut cells = Vec::new();
            let mut hist = vec![0usize; r.pieces + 1];
            for iy in 0..ny {
                for ix in 0..nx {
                    idx[free[0]] = ix;
                    idx[free[1]] = iy;
                    let lin = grid_info.shape.ravel(&idx);
                    let o = r.order(lin);
                    hist[o.min(r.pieces)] += 1;
                    if o > 1 {
                        cells.push(Cell { ix, iy, shade: (o - 1).min(4) as u8 });
                    }
                }
            }
            let raster = Raster { x_range: (0.0, nx as f64), y_range: (0.0, ny as f64), nx, ny };
            let title = format!("instability orders of {} (eps {})", r.map, fmt6(r.eps));
            let counts: Vec<String> =
                hist.iter().enumerate().skip(1).filter(|(_, &c)| c > 0).map(|(o, c)| format!("order {o}: {c}")).collect();
            let legend = counts.join(", ");
            let svg = svg::cell_map(
                &title,
                &format!("axis {} index", free[0]),
                &format!("axis {} index", free[1]),
                &raster,
                &cells,
                &legend,
            );
            Ok(Done::ok(format!("slice max order {}, {legend}", hist.iter().rposition(|&c| c > 0).unwrap_or(0)), Some(svg)))
        }
    }
}
