//! One function per experiment kind. Grid points run in parallel; rows come
//! back in grid order.

use rayon::prelude::*;

use dimerchain::baseline::{run_attaching, AttachedSystemSpec};
use dimerchain::engine::global_cache;
use dimerchain::freefermion::{
    spectrum_formula_even, spectrum_formula_odd, spectrum_numeric, AdjacencyMatrix, HoppingChain,
};
use dimerchain::{Error, MeasurementOutcome, Protocol, TStar};

use crate::config::{BaselineVariant, ExperimentConfig, ExperimentKind};
use crate::output::{fmt_g, Row, Table};

pub fn run_experiment(cfg: &ExperimentConfig) -> Table {
    match cfg.kind {
        ExperimentKind::ThetaDeltaMap => theta_delta_map(cfg),
        ExperimentKind::ProjectionCompare => projection_compare(cfg),
        ExperimentKind::BaselineCompareXx | ExperimentKind::BaselineCompareXxz => baseline_compare(cfg),
        ExperimentKind::XxzDeltaScan => xxz_delta_scan(cfg),
        ExperimentKind::FreefermionCheck => freefermion_check(cfg),
        ExperimentKind::SingleRun => single_run(cfg),
    }
}

/// Key cells followed by either value cells or blanks and an error status.
fn row(keys: Vec<String>, values: Result<Vec<String>, Error>, n_values: usize) -> Row {
    match values {
        Ok(mut v) => {
            let mut cells = keys;
            cells.append(&mut v);
            Row {
                cells,
                status: "ok".into(),
                detail: None,
            }
        }
        Err(e) => {
            let mut cells = keys;
            cells.extend(std::iter::repeat_n(String::new(), n_values));
            Row {
                cells,
                status: e.kind().into(),
                detail: Some(e.to_string()),
            }
        }
    }
}

fn protocol(cfg: &ExperimentConfig, n: usize, delta: f64, anisotropy: f64) -> Result<Protocol, Error> {
    let spec = cfg.chain(n, delta, anisotropy)?;
    spec.validate_for_protocol()?;
    Protocol::with_cache(&spec, cfg.policy(), global_cache())
}

fn tstar(
    p: &Result<Protocol, Error>,
    cfg: &ExperimentConfig,
    theta: f64,
    outcome: MeasurementOutcome,
) -> Result<TStar, Error> {
    let p = p.as_ref().map_err(clone_error)?;
    let window = cfg.window(p.spec().n_sites)?;
    p.prepare(cfg.angles(theta), outcome.into())?.find_tstar(window)
}

/// Errors are not `Clone`; a shared failure is re-reported under the same kind.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::Argument(s) => Error::Argument(s.clone()),
        Error::Contract(s) => Error::Contract(s.clone()),
        Error::Capacity { what, requested, limit } => Error::Capacity {
            what,
            requested: *requested,
            limit: *limit,
        },
        Error::Numeric(s) => Error::Numeric(s.clone()),
        Error::SymmetryViolation(x) => Error::SymmetryViolation(*x),
        Error::DegenerateGroundState { e0, e1 } => Error::DegenerateGroundState { e0: *e0, e1: *e1 },
        Error::ZeroProbability(p) => Error::ZeroProbability(*p),
        Error::ProtocolFailure(s) => Error::ProtocolFailure(s.clone()),
    }
}

fn tstar_cells(r: &TStar) -> Vec<String> {
    vec![fmt_g(r.t_star), fmt_g(r.probability), fmt_g(r.concurrence)]
}

fn theta_delta_map(cfg: &ExperimentConfig) -> Table {
    let n = cfg.n_sites_grid[0];
    let outcome = cfg.outcome_values()[0];
    let protocols: Vec<_> = cfg
        .delta_grid
        .par_iter()
        .map(|&d| protocol(cfg, n, d, cfg.anisotropy))
        .collect();
    let points: Vec<(usize, f64)> = (0..cfg.delta_grid.len())
        .flat_map(|i| cfg.theta_grid.iter().map(move |&t| (i, t)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, theta)| {
            let keys = vec![fmt_g(theta), fmt_g(cfg.delta_grid[i])];
            row(
                keys,
                tstar(&protocols[i], cfg, theta, outcome).map(|r| tstar_cells(&r)),
                3,
            )
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec!["theta", "delta", "t_star", "probability", "concurrence", "status"],
        rows,
    }
}

fn projection_compare(cfg: &ExperimentConfig) -> Table {
    let outcomes = cfg.outcome_values();
    let protocols: Vec<_> = cfg
        .n_sites_grid
        .par_iter()
        .map(|&n| protocol(cfg, n, cfg.delta, cfg.anisotropy))
        .collect();
    let points: Vec<(usize, MeasurementOutcome)> = (0..cfg.n_sites_grid.len())
        .flat_map(|i| outcomes.iter().map(move |&o| (i, o)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, o)| {
            let keys = vec![cfg.n_sites_grid[i].to_string(), o.to_string()];
            row(
                keys,
                tstar(&protocols[i], cfg, cfg.theta, o).map(|r| tstar_cells(&r)),
                3,
            )
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec!["n_sites", "outcome", "t_star", "probability", "concurrence", "status"],
        rows,
    }
}

#[derive(Debug, Clone, Copy)]
enum Scheme {
    Rotation,
    Attaching(BaselineVariant),
}

impl Scheme {
    fn name(self) -> &'static str {
        match self {
            Scheme::Rotation => "rotation",
            Scheme::Attaching(BaselineVariant::Dimerized) => "attaching",
            Scheme::Attaching(BaselineVariant::Uniform) => "attaching_uniform",
        }
    }
}

fn baseline_compare(cfg: &ExperimentConfig) -> Table {
    let outcome = cfg.outcome_values()[0];
    let schemes: Vec<Scheme> = std::iter::once(Scheme::Rotation)
        .chain(cfg.baseline_variants.iter().map(|&v| Scheme::Attaching(v)))
        .collect();
    let points: Vec<(usize, Scheme)> = cfg
        .n_sites_grid
        .iter()
        .flat_map(|&n| schemes.iter().map(move |&s| (n, s)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(n, scheme)| {
            let keys = vec![n.to_string(), scheme.name().to_string()];
            let values = match scheme {
                Scheme::Rotation => tstar(&protocol(cfg, n, cfg.delta, cfg.anisotropy), cfg, cfg.theta, outcome)
                    .map(|r| (r.t_star, r.concurrence)),
                Scheme::Attaching(variant) => attaching(cfg, n, variant),
            };
            row(keys, values.map(|(t, c)| vec![fmt_g(t), fmt_g(c)]), 2)
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec!["n_sites", "scheme", "t_star", "concurrence", "status"],
        rows,
    }
}

fn attaching(cfg: &ExperimentConfig, n: usize, variant: BaselineVariant) -> Result<(f64, f64), Error> {
    let chain = cfg.chain(n, cfg.delta, cfg.anisotropy)?;
    let mut spec = match variant {
        BaselineVariant::Dimerized => AttachedSystemSpec::new(chain),
        BaselineVariant::Uniform => AttachedSystemSpec::uniform(chain),
    };
    if let Some(g) = cfg.attach_coupling {
        spec = spec.with_attach_coupling(g);
    }
    let r = run_attaching(&spec, cfg.policy(), cfg.window(n)?)?;
    Ok((r.t_star, r.concurrence))
}

fn xxz_delta_scan(cfg: &ExperimentConfig) -> Table {
    let n = cfg.n_sites_grid[0];
    let outcome = cfg.outcome_values()[0];
    let rows = cfg
        .anisotropy_grid
        .par_iter()
        .map(|&a| {
            let values = tstar(&protocol(cfg, n, cfg.delta, a), cfg, cfg.theta, outcome);
            row(vec![fmt_g(a)], values.map(|r| tstar_cells(&r)), 3)
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec!["anisotropy", "t_star", "probability", "concurrence", "status"],
        rows,
    }
}

fn freefermion_check(cfg: &ExperimentConfig) -> Table {
    let points: Vec<(usize, f64)> = cfg
        .n_sites_grid
        .iter()
        .flat_map(|&n| cfg.delta_grid.iter().map(move |&d| (n, d)))
        .collect();
    let rows: Vec<Vec<Row>> = points
        .par_iter()
        .map(|&(n, d)| {
            let keys = |variant: &str| vec![n.to_string(), fmt_g(d), variant.to_string()];
            let chain = match HoppingChain::new(n, cfg.j_coupling, d) {
                Ok(c) => c,
                Err(e) => return vec![row(keys(""), Err(e), 2)],
            };
            if n % 2 == 1 {
                let dev = spectrum_formula_odd(&chain)
                    .and_then(|f| Ok(f.max_deviation(&spectrum_numeric(&AdjacencyMatrix::dimerized(&chain))?)));
                return vec![row(keys("formula_odd"), dev.map(|x| vec![fmt_g(x), String::new()]), 2)];
            }
            match spectrum_formula_even(&chain) {
                Ok(rep) => {
                    let count = rep.roots.roots.len().to_string();
                    let status = if rep.roots.deficit() > 0 { "root_deficit" } else { "ok" };
                    [
                        ("printed", rep.printed_deviation),
                        ("coefficient_two", rep.coefficient_two_deviation),
                    ]
                    .into_iter()
                    .map(|(variant, dev)| {
                        let mut r = row(keys(variant), Ok(vec![fmt_g(dev), count.clone()]), 2);
                        r.status = status.into();
                        r
                    })
                    .collect()
                }
                Err(e) => vec![
                    row(keys("printed"), Err(clone_error(&e)), 2),
                    row(keys("coefficient_two"), Err(e), 2),
                ],
            }
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec![
            "n_sites",
            "delta",
            "variant",
            "max_abs_deviation",
            "root_count",
            "status",
        ],
        rows: rows.into_iter().flatten().collect(),
    }
}

fn single_run(cfg: &ExperimentConfig) -> Table {
    let outcome = cfg.outcome_values()[0];
    let points: Vec<(usize, f64, f64)> = cfg
        .n_sites_grid
        .iter()
        .flat_map(|&n| {
            cfg.delta_grid
                .iter()
                .flat_map(move |&d| cfg.anisotropy_grid.iter().map(move |&a| (n, d, a)))
        })
        .collect();
    let model = match cfg.model {
        crate::config::ModelName::Xx => "xx",
        crate::config::ModelName::Xxz => "xxz",
    };
    let rows = points
        .par_iter()
        .flat_map_iter(|&(n, d, a)| {
            cfg.theta_grid.iter().map(move |&theta| {
                let keys = vec![
                    n.to_string(),
                    model.to_string(),
                    fmt_g(d),
                    fmt_g(a),
                    fmt_g(theta),
                    fmt_g(cfg.phi),
                    outcome.to_string(),
                ];
                let values = protocol(cfg, n, d, a).and_then(|p| {
                    let r = p.run(cfg.angles(theta), outcome, cfg.window(n)?)?;
                    Ok(vec![
                        fmt_g(r.t_star),
                        fmt_g(r.outcome_probability),
                        fmt_g(r.concurrence),
                        fmt_g(r.werner_p),
                        fmt_g(r.werner_residual),
                    ])
                });
                row(keys, values, 5)
            })
        })
        .collect();
    Table {
        kind: cfg.kind,
        header: vec![
            "n_sites",
            "model",
            "delta",
            "anisotropy",
            "theta",
            "phi",
            "outcome",
            "t_star",
            "probability",
            "concurrence",
            "werner_p",
            "werner_residual",
            "status",
        ],
        rows,
    }
}
