//! One runner per subcommand. Each validates its section, computes, and
//! writes CSV artifacts into the output directory.

use fpp_core::geometry::l1_norm;
use fpp_core::lattice::{sample_configuration, write_configuration, BoundedLaw, LatticeBox};
use fpp_core::ld::{
    estimate_probability, exact_probability, subadditive_assembly_check, tilt_for_mean, time_constant, AssemblyParams,
    Deviation, LdEvent, Method, RateEstimate, RateOptions, Slack, Target,
};
use fpp_core::metric::{prescribe_metric, write_field, write_metric, Bounds, GradientField};
use fpp_core::passage::{box_geodesic, continuous_geodesic, crossing_times, growing_ball, passage_matrix};
use fpp_core::rate::{integral_rate, point_point_curve, BoundModel, ElementaryCost, EmpiricalModel, PointPointOptions};
use fpp_core::{ld, rng};

use crate::error::{spec_err, CliResult};
use crate::output::{axis_columns, row, OutputDir};
use crate::spec::{self, check, finite_point, positive_list, DeviationSpec, ModelSpec, SlackSpec, SpecFile};

fn slack(s: SlackSpec) -> Slack {
    match s {
        SlackSpec::None => Slack::None,
        SlackSpec::Interpolation => Slack::Interpolation,
    }
}

fn resolve_tilt(law: &BoundedLaw, tilt: Option<f64>, mean: Option<f64>) -> CliResult<Option<f64>> {
    match (tilt, mean) {
        (Some(_), Some(_)) => spec_err("give either tilt or tilt_mean, not both"),
        (Some(t), None) => {
            check(t.is_finite(), "tilt must be finite")?;
            Ok(Some(t))
        }
        (None, Some(m)) => {
            check(law.a() < m && m < law.b(), format!("tilt_mean {m} must lie strictly inside (a, b)"))?;
            Ok(Some(tilt_for_mean(law, m)?))
        }
        (None, None) => Ok(None),
    }
}

fn lattice(lower: &[i64], upper: &[i64]) -> CliResult<LatticeBox> {
    check(!lower.is_empty() && lower.len() == upper.len(), "lower and upper must have the same non-zero length")?;
    Ok(LatticeBox::new(lower.to_vec(), upper.to_vec())?)
}

fn model(kind: ModelSpec, table: &Option<Vec<[f64; 2]>>, law: &BoundedLaw, dim: usize) -> CliResult<Box<dyn ElementaryCost>> {
    match (kind, table) {
        (ModelSpec::Bound, None) => Ok(Box::new(BoundModel::new(law.clone(), dim)?)),
        (ModelSpec::Bound, Some(_)) => spec_err("the bound model takes no table"),
        (ModelSpec::Empirical, Some(t)) => Ok(Box::new(EmpiricalModel::new(t.iter().map(|r| (r[0], r[1])).collect())?)),
        (ModelSpec::Empirical, None) => spec_err("the empirical model needs a table of [level, rate] rows"),
    }
}

fn bounds(law: &BoundedLaw) -> CliResult<Bounds> {
    Ok(Bounds::new(law.a(), law.b())?)
}

fn estimate_row(e: &RateEstimate) -> String {
    let (method, theta) = match e.method {
        Method::Exact => ("exact", f64::NAN),
        Method::CrudeMonteCarlo => ("crude", 0.0),
        Method::TiltedMonteCarlo { theta } => ("tilted", theta),
    };
    format!(
        "{},{method},{theta},{},{},{},{},{},{},{}",
        e.n, e.hits, e.trials, e.probability, e.ci.0, e.ci.1, e.rate, e.rate_is_lower_bound
    )
}

const ESTIMATE_SCHEMA: &str = "n,method,theta,hits,trials,probability,ci_low,ci_high,rate,rate_is_lower_bound";

pub fn simulate(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.simulate.as_ref().expect("section checked");
    let law = spec.law()?;
    let lat = lattice(&s.lower, &s.upper)?;
    for (i, q) in s.queries.iter().enumerate() {
        finite_point(&format!("queries[{i}]"), q, Some(lat.dim()))?;
        check(lat.contains_point(q), format!("query {q:?} lies outside the box"))?;
    }
    let config = sample_configuration(&lat, &law, seed, 0)?;
    let mut dump = Vec::new();
    write_configuration(&config, &mut dump)?;
    out.write("configuration.txt", &dump)?;

    let d = lat.dim();
    let mut rows = Vec::with_capacity(lat.edge_count());
    for e in lat.edges() {
        let (v, axis) = lat.edge_parts(e);
        rows.push(format!("{},{axis},{}", row(&lat.coords(v)), config.weight(e)));
    }
    out.csv("edges.csv", &format!("{},axis,weight", axis_columns("x", d)), &rows)?;

    if !s.queries.is_empty() {
        let m = passage_matrix(&config, None, &s.queries)?;
        let q = s.queries.len();
        let rows: Vec<String> =
            (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).map(|(i, j)| format!("{i},{j},{}", m[i * q + j])).collect();
        out.csv("passage.csv", "i,j,time", &rows)?;
    }
    Ok(())
}

pub fn geodesic(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.geodesic.as_ref().expect("section checked");
    let law = spec.law()?;
    let lat = lattice(&s.lower, &s.upper)?;
    let d = lat.dim();
    finite_point("from", &s.from, Some(d))?;
    finite_point("to", &s.to, Some(d))?;
    let window = s.window.as_deref().map(spec::window).transpose()?;
    if let Some(w) = &window {
        check(w.dim() == d, "window dimension differs from the box")?;
        check(w.contains(&s.from) && w.contains(&s.to), "both endpoints must lie in the window")?;
    }
    check(lat.contains_point(&s.from) && lat.contains_point(&s.to), "both endpoints must lie in the box")?;
    let config = sample_configuration(&lat, &law, seed, 0)?;
    let path = match &window {
        Some(w) => box_geodesic(&config, w, &s.from, &s.to)?,
        None => continuous_geodesic(&config, &s.from, &s.to)?,
    };
    let rows: Vec<String> =
        path.points.iter().zip(&path.times).enumerate().map(|(k, (p, t))| format!("{k},{},{t}", row(p))).collect();
    out.csv("geodesic.csv", &format!("k,{},time", axis_columns("x", d)), &rows)
}

pub fn crossing(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.crossing.as_ref().expect("section checked");
    let law = spec.law()?;
    check(s.dim > 0 && s.replicas > 0, "dim and replicas must be positive")?;
    positive_list("n", &s.n)?;
    let mut rows = Vec::new();
    for (ni, &n) in s.n.iter().enumerate() {
        let lat = LatticeBox::cube(s.dim, n as i64)?;
        for r in 0..s.replicas {
            let config = sample_configuration(&lat, &law, seed, ((ni as u64) << 32) | r as u64)?;
            for (axis, t) in crossing_times(&config, n)?.into_iter().enumerate() {
                rows.push(format!("{n},{r},{axis},{t}"));
            }
        }
    }
    out.csv("crossing.csv", "n,replica,axis,time", &rows)
}

pub fn ball(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.ball.as_ref().expect("section checked");
    let law = spec.law()?;
    check(s.dim > 0, "dim must be positive")?;
    check(s.mesh > 0.0 && s.mesh.is_finite(), "mesh must be positive")?;
    check(law.a() > 0.0, "the growing ball needs a law with a > 0")?;
    positive_list("n", &s.n)?;
    let mut rows = Vec::new();
    for (ni, &n) in s.n.iter().enumerate() {
        let reach = (n as f64 / law.a()).ceil() as i64;
        let lat = LatticeBox::new(vec![-reach; s.dim], vec![reach; s.dim])?;
        let config = sample_configuration(&lat, &law, seed, ni as u64)?;
        let ball = growing_ball(&config, n, s.mesh)?;
        rows.extend(ball.points.iter().map(|p| format!("{n},{}", row(p))));
    }
    out.csv("ball.csv", &format!("n,{}", axis_columns("x", s.dim)), &rows)
}

pub fn rate_estimate(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.rate_estimate.as_ref().expect("section checked");
    let law = spec.law()?;
    let window = spec::window(&s.window)?;
    let g = spec::seminorm(&s.target)?;
    check(s.n > 0 && s.k > 0, "n and k must be positive")?;
    check(s.eps > 0.0 && s.eps.is_finite(), "eps must be positive")?;
    check(s.exact || s.trials > 0, "trials must be positive unless exact = true")?;
    let tilt = resolve_tilt(&law, s.tilt, s.tilt_mean)?;
    let deviation = match s.deviation {
        DeviationSpec::Lower => Deviation::Lower,
        DeviationSpec::TwoSided => Deviation::TwoSided,
    };
    let event = LdEvent::new(&window, s.n, s.k, Target::Norm(g), s.eps, deviation)?.with_slack(slack(s.slack));
    let est = if s.exact {
        check(law.is_discrete(), "exact = true needs a discrete law")?;
        exact_probability(&event, &law)?
    } else {
        estimate_probability(&event, &law, s.trials, tilt, seed)?
    };
    out.csv("estimate.csv", ESTIMATE_SCHEMA, &[estimate_row(&est)])
}

pub fn elementary_rate(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.elementary_rate.as_ref().expect("section checked");
    let law = spec.law()?;
    let g = spec::seminorm(&s.target)?;
    check(s.dim > 0 && s.k_factor > 0, "dim and k_factor must be positive")?;
    check(s.eps > 0.0 && s.eps.is_finite(), "eps must be positive")?;
    check(s.exact || s.trials > 0, "trials must be positive unless exact = true")?;
    positive_list("n", &s.n)?;
    let opts = RateOptions {
        trials: s.trials,
        tilt: resolve_tilt(&law, s.tilt, s.tilt_mean)?,
        seed,
        k_factor: s.k_factor,
        slack: slack(s.slack),
        exact: s.exact,
    };
    let seq = ld::elementary_rate_sequence(&g, s.dim, s.eps, &s.n, &law, &opts)?;
    let rows: Vec<String> = seq.iter().map(estimate_row).collect();
    out.csv("rates.csv", ESTIMATE_SCHEMA, &rows)
}

pub fn assembly_check(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.assembly_check.as_ref().expect("section checked");
    let law = spec.law()?;
    let g = spec::seminorm(&s.target)?;
    check(s.samples > 0 && s.max_attempts > 0, "samples and max_attempts must be positive")?;
    let tile_tilt = resolve_tilt(&law, None, s.tile_tilt_mean)?;
    let params = AssemblyParams {
        g,
        dim: s.dim,
        eps: s.eps,
        delta: s.delta,
        n: s.n,
        k: s.k,
        samples: s.samples,
        tile_tilt,
        max_attempts: s.max_attempts,
        rate_trials: s.rate_trials,
        seed,
    };
    let rep = subadditive_assembly_check(&law, &params)?;
    let rows: Vec<String> = rep
        .samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let attempts: usize = x.attempts.iter().sum();
            format!(
                "{i},{attempts},{},{},{},{},{},{}",
                x.lower_deviation,
                x.two_sided_deviation,
                x.hypotheses_hold,
                x.certificate_margin,
                x.certificate_violations,
                x.holds
            )
        })
        .collect();
    out.csv(
        "assembly_samples.csv",
        "sample,attempts,lower_deviation,two_sided_deviation,hypotheses_hold,certificate_margin,certificate_violations,holds",
        &rows,
    )?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let summary = format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        rep.m,
        rep.stride,
        rep.gap,
        rep.constant_c,
        rep.tolerance,
        rep.corridor_offset,
        rep.satisfied,
        rep.corridor_edges,
        rep.corridor_cost,
        opt(rep.premise.as_ref().map(|e| e.rate)),
        opt(rep.rate_bound_at_m),
        opt(rep.rate_at_m.as_ref().map(|e| e.rate)),
    );
    out.csv(
        "assembly_summary.csv",
        "m,stride,gap,constant_c,tolerance,corridor_offset,satisfied,corridor_edges,corridor_cost,premise_rate,rate_bound_at_m,rate_at_m",
        &[summary],
    )
}

pub fn functional(spec: &SpecFile, _seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.functional.as_ref().expect("section checked");
    let law = spec.law()?;
    let window = spec::window(&s.window)?;
    let d = window.dim();
    let cells = s.cells.iter().map(|c| spec::seminorm(c)).collect::<CliResult<Vec<_>>>()?;
    check(s.k > 0, "k must be positive")?;
    let cuts = match &s.cuts {
        Some(c) => c.clone(),
        None => {
            let (lo, hi) = window.bounding_box();
            lo.iter().zip(&hi).map(|(l, h)| vec![*l, *h]).collect()
        }
    };
    let b = bounds(&law)?;
    let field = GradientField::new(window, cuts, cells, b)?;
    let model = model(s.model, &s.table, &law, d)?;
    if let Some(r) = s.metric_resolution {
        check(r > 0, "metric_resolution must be positive")?;
    }
    let rate = integral_rate(&field, model.as_ref(), s.k)?;
    let infinite = rate.infinite_cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
    out.csv(
        "functional.csv",
        "model,value,lower,upper,infinite_cells",
        &[format!("{},{},{},{},{infinite}", model.name(), rate.value, rate.lower, rate.upper)],
    )?;
    let mut buf = Vec::new();
    write_field(&field, &mut buf)?;
    out.write("field.txt", &buf)?;
    if let Some(r) = s.metric_resolution {
        let metric = prescribe_metric(&field, r)?;
        let mut buf = Vec::new();
        write_metric(&metric, &[("source", "prescribed".to_string()), ("m", r.to_string())], &mut buf)?;
        out.write("metric.txt", &buf)?;
    }
    Ok(())
}

pub fn point_point(spec: &SpecFile, _seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.point_point.as_ref().expect("section checked");
    let law = spec.law()?;
    finite_point("x", &s.x, None)?;
    check(l1_norm(&s.x) > 0.0, "x must be non-zero")?;
    check(!s.zeta.is_empty() && s.zeta.iter().all(|z| z.is_finite()), "zeta must be a non-empty list of finite numbers")?;
    check(s.zeta.windows(2).all(|w| w[0] <= w[1]), "zeta must be nondecreasing")?;
    check(law.a() > 0.0, "point-point rates need a law with a > 0")?;
    let model = model(s.model, &s.table, &law, s.x.len())?;
    let opts = PointPointOptions {
        tiles: s.tiles,
        resolution: s.resolution,
        max_sweeps: s.max_sweeps,
        bisection_steps: s.bisection_steps,
    };
    let curve = point_point_curve(&s.x, &s.zeta, model.as_ref(), bounds(&law)?, &opts)?;
    let rows: Vec<String> = curve
        .iter()
        .map(|r| format!("{},{},{},{},{},{}", r.zeta, r.value, r.achieved, r.margin, r.trivial_bound, r.sweeps))
        .collect();
    out.csv("point_point.csv", "zeta,value,achieved,margin,trivial_bound,sweeps", &rows)
}

pub fn time_constant_cmd(spec: &SpecFile, seed: u64, out: &mut OutputDir) -> CliResult<()> {
    let s = spec.time_constant.as_ref().expect("section checked");
    let law = spec.law()?;
    finite_point("x", &s.x, None)?;
    check(s.replicas > 0, "replicas must be positive")?;
    positive_list("n", &s.n)?;
    if law.a() == 0.0 {
        check(s.speed_floor.is_some_and(|f| f > 0.0), "a = 0 needs a positive speed_floor")?;
    }
    let pts = time_constant(&law, &s.x, &s.n, s.replicas, rng::derive_seed(seed, 0), s.speed_floor)?;
    let rows: Vec<String> =
        pts.iter().map(|p| format!("{},{},{},{},{},{}", p.n, p.replicas, p.mean, p.variance, p.ci.0, p.ci.1)).collect();
    out.csv("time_constant.csv", "n,replicas,mean,variance,ci_low,ci_high", &rows)
}

