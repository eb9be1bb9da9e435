use std::fs::File;

use corank::finsler::{catlin_metric, disc_upper_bound};
use corank::geodesy::{distance, normal_geodesic, verify_quasi_geodesic, GraphCheck, GraphSpacing};
use corank::hyperbolicity::{
    boundary_divergence_probe, four_point_delta, thin_triangle_delta, write_delta_csv, CatlinOracle, ThinTriangleOptions,
};
use corank::scaling::{
    blowdown_at_infinity, convergence_report, limit_at_infinity, normal_approach, scale_at_point, SequenceMember,
};
use corank::{AmbientPoint, Complex64, CurvePath, DistanceOptions, Error, ModelDomain, Polydisc, TangentVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::args::{Command, DeltaMethodArg, SolverArgs};
use crate::output::{num, Artifact, CsvBody};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json! object literal"),
    }
}

fn solver_options(s: &SolverArgs) -> DistanceOptions {
    let mut o = if s.quick { DistanceOptions::quick() } else { DistanceOptions::default() };
    if let Some(it) = s.iterations {
        o.variational.iterations = it;
    }
    o
}

fn curve_csv(c: &CurvePath) -> CliResult<String> {
    let mut buf = Vec::new();
    c.write_csv(&mut buf, None)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn curve_json(c: &CurvePath) -> Value {
    json!({ "params": c.params(), "points": c.points() })
}

fn poly_rows(n: u64, d: &ModelDomain, extra: &[String]) -> Vec<Vec<String>> {
    d.poly()
        .terms()
        .map(|((j, k), c)| {
            let mut row = vec![n.to_string(), j.to_string(), k.to_string(), num(c.re), num(c.im)];
            row.extend_from_slice(extra);
            row
        })
        .collect()
}

pub fn run(cmd: &Command, d: &ModelDomain, seed: Option<u64>) -> CliResult<Artifact> {
    match cmd {
        Command::EvalMetric { point, vector, disc_samples } => {
            let x = TangentVector::new(vector.0.clone());
            let m = catlin_metric(d, point, &x)?;
            let disc = disc_upper_bound(d, point, &x, *disc_samples)?;
            Ok(Artifact::table(
                &["metric", "disc_upper_bound"],
                vec![vec![num(m), num(disc)]],
                obj(json!({ "point": point, "vector": x, "metric": m, "disc_upper_bound": disc })),
            ))
        }
        Command::Distance { p, q, solver, graph } => {
            let mut opts = solver_options(solver);
            if let Some(g) = graph {
                opts.graph = Some(GraphCheck {
                    spacing: GraphSpacing { log_depth: g[0], tangential: g[1] },
                    log_below: 1.0,
                    log_above: 2.0,
                    tangential_margin: 4.0 * g[1],
                });
            }
            let est = distance(d, p, q, &opts)?;
            let method = format!("{:?}", est.method).to_lowercase();
            Ok(Artifact {
                notes: vec![format!("lower: {:e}", est.lower), format!("upper: {:e}", est.upper), format!("method: {method}")],
                json: obj(json!({ "lower": est.lower, "upper": est.upper, "method": method, "witness": curve_json(&est.witness) })),
                csv: CsvBody::Raw(curve_csv(&est.witness)?),
            })
        }
        Command::Geodesic { point, a, t0, t1, samples } => {
            let c = normal_geodesic(d, point, *a, (*t0, *t1), *samples)?;
            Ok(Artifact { notes: Vec::new(), json: obj(json!({ "curve": curve_json(&c) })), csv: CsvBody::Raw(curve_csv(&c)?) })
        }
        Command::Scale { xi, n, u, limit_out } => {
            let seq_in: Vec<(u64, AmbientPoint)> = match xi {
                Some(xi) => {
                    if n.is_empty() {
                        return Err(CliError::Usage("scale with --xi needs --n <list>".into()));
                    }
                    normal_approach(d, xi, n)?
                }
                None => {
                    if u.is_empty() {
                        return Err(CliError::Usage("scale needs --xi with --n, or one --u per step".into()));
                    }
                    let ns: Vec<u64> = if n.is_empty() {
                        (1..=u.len() as u64).collect()
                    } else if n.len() == u.len() {
                        n.clone()
                    } else {
                        return Err(CliError::Usage(format!("--n has {} entries but --u has {}", n.len(), u.len())));
                    };
                    ns.into_iter().zip(u.iter().cloned()).collect()
                }
            };
            let seq = scale_at_point(d, &seq_in)?;
            if let Some(path) = limit_out {
                seq.limit.save(path)?;
            }
            let rows = seq.steps.iter().flat_map(|s| poly_rows(s.n, &s.scaled, &[num(s.eps), num(s.tau)])).collect();
            let steps: Vec<Value> = seq
                .steps
                .iter()
                .map(|s| {
                    json!({ "n": s.n, "eps": s.eps, "tau": s.tau, "xi": s.xi, "v": s.v, "dilation": s.dilation, "scaled": s.scaled.to_spec() })
                })
                .collect();
            let mut art = Artifact::table(
                &["n", "j", "k", "re", "im", "eps", "tau"],
                rows,
                obj(json!({ "steps": steps, "limit": seq.limit.to_spec(), "limit_kind": seq.limit_kind })),
            );
            art.notes.push(format!("limit ({:?}): {}", seq.limit_kind, serde_json::to_string(&seq.limit.to_spec()).expect("spec serializes")));
            Ok(art)
        }
        Command::Blowdown { n, center, radii, grid, directions } => {
            let center = center.clone().unwrap_or_else(|| AmbientPoint::new(vec![Complex64::new(0.0, 0.0); d.dim()]));
            let radii = if radii.is_empty() { vec![1.0; d.dim()] } else { radii.clone() };
            let region = Polydisc::new(&center, radii)?;
            let limit = limit_at_infinity(d)?;
            let chis: Vec<ModelDomain> = n.iter().map(|&k| blowdown_at_infinity(d, k)).collect::<Result<_, _>>()?;
            let members: Vec<SequenceMember> =
                n.iter().zip(&chis).map(|(&k, chi)| SequenceMember { n: k, eps: None, tau: None, domain: chi }).collect();
            let report = convergence_report(&members, &limit, &region, *grid, *directions)?;
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for (&k, chi) in n.iter().zip(&chis) {
                let r = report.iter().find(|r| r.n == k).expect("one row per member");
                rows.extend(poly_rows(k, chi, &[num(r.sup_r_error), num(r.sup_metric_error)]));
                entries.push(json!({ "n": k, "domain": chi.to_spec(), "sup_r_error": r.sup_r_error, "sup_metric_error": r.sup_metric_error }));
            }
            let mut art = Artifact::table(
                &["n", "j", "k", "re", "im", "sup_r_error", "sup_metric_error"],
                rows,
                obj(json!({ "region": region.describe(), "limit": limit.to_spec(), "blowdowns": entries })),
            );
            art.notes.push(format!("region: {}", region.describe()));
            Ok(art)
        }
        Command::Delta { center, radii, samples, method, solver } => {
            let seed = seed.ok_or_else(|| CliError::Usage("delta samples points: pass --seed <int>".into()))?;
            let region = Polydisc::new(center, radii.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut points = Vec::with_capacity(*samples);
            let mut attempts = 0;
            while points.len() < *samples && attempts < 1000 * samples.max(&1) {
                attempts += 1;
                let z = region.sample(&mut rng);
                if d.contains(&z)? {
                    points.push(z);
                }
            }
            if points.len() < *samples {
                return Err(Error::InvalidArgument(format!("box yields only {} interior points", points.len())).into());
            }
            let opts = solver_options(solver);
            let est = match method {
                DeltaMethodArg::FourPoint => four_point_delta(&points, &CatlinOracle::new(d, opts))?,
                DeltaMethodArg::ThinTriangle => {
                    if points.len() < 3 {
                        return Err(CliError::Usage("thin-triangle needs --samples >= 3".into()));
                    }
                    let o = ThinTriangleOptions { sides: opts, ..Default::default() };
                    thin_triangle_delta(d, &points[0], &points[1], &points[2], &o)?
                }
            };
            let mut buf = Vec::new();
            write_delta_csv(&[(est.clone(), points.len(), Some(seed))], &mut buf, None)?;
            Ok(Artifact {
                notes: vec![format!("caveat: {}", est.caveat)],
                json: obj(json!({
                    "method": est.method.name(),
                    "delta": est.delta,
                    "quadruples": est.quadruples,
                    "witness": est.witness,
                    "points": points,
                    "seed": seed,
                    "caveat": est.caveat,
                })),
                csv: CsvBody::Raw(String::from_utf8(buf).expect("csv is utf-8")),
            })
        }
        Command::ProbeProduct { xi_plus, xi_minus, origin, n_max, solver } => {
            let oracle = CatlinOracle::new(d, solver_options(solver));
            let rows = boundary_divergence_probe(&oracle, xi_plus, xi_minus, origin, *n_max)?;
            let table = rows.iter().map(|r| vec![r.n.to_string(), num(r.product_lower), num(r.product_upper)]).collect();
            Ok(Artifact::table(&["n", "product_lower", "product_upper"], table, obj(json!({ "rows": rows }))))
        }
        Command::VerifyQg { curve, a, b, pairs, solver } => {
            let file = File::open(curve).map_err(|e| CliError::Usage(format!("cannot open curve {}: {e}", curve.display())))?;
            let c = CurvePath::read_csv(file)?;
            let rep = verify_quasi_geodesic(d, &c, *a, *b, *pairs, &solver_options(solver))?;
            Ok(Artifact::table(
                &["a_required", "b_required", "worst_t", "worst_s", "pairs", "pass"],
                vec![vec![
                    num(rep.a_required),
                    num(rep.b_required),
                    num(rep.worst_pair.0),
                    num(rep.worst_pair.1),
                    rep.pairs.to_string(),
                    rep.pass.to_string(),
                ]],
                obj(json!({ "report": rep })),
            ))
        }
        Command::CheckDomain { box_radius, box_samples } => {
            let sub = d.poly().subharmonicity_report(*box_radius, *box_samples);
            let td = d.type_data()?;
            let pass = sub.pass;
            Ok(Artifact::table(
                &["label", "dim", "degree", "vanishing_order", "min_laplacian", "pass"],
                vec![vec![
                    d.label().to_string(),
                    d.dim().to_string(),
                    td.degree_2m.to_string(),
                    td.vanishing_order_at_0.to_string(),
                    num(sub.min_laplacian),
                    pass.to_string(),
                ]],
                obj(json!({
                    "label": d.label(),
                    "dim": d.dim(),
                    "degree": td.degree_2m,
                    "vanishing_order": td.vanishing_order_at_0,
                    "min_laplacian": sub.min_laplacian,
                    "argmin": [sub.argmin.re, sub.argmin.im],
                    "pass": pass,
                })),
            ))
        }
    }
}
