use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use leviflat::bishop::{model_family, validate_adapted, SolveOptions};
use leviflat::continuation::{
    assemble_hypersurface, gauge_leaves, glue, pole_family, DiscFamily, Gauge, Hypersurface, StepControls,
};
use leviflat::disc::DiscGrid;
use leviflat::geometry::{
    check_chart, collar_samples, df_scan, levi_form, levi_form_via_disc, random_unit, COLLAR_BAND,
};
use leviflat::output::fmt_f64;
use leviflat::scenario::{PoleLabel, Scenario, ScenarioKind};
use leviflat::Error;

use crate::config::RunConfig;
use crate::report::{CheckOutcome, Recorder, RunReport, StageError};

/// Leaf parameter at which the families from the two poles meet.
pub const JUNCTION: f64 = 0.5;
/// Adapted radii of the model family evaluated at each pole.
pub const MODEL_RADII: [f64; 3] = [0.25, 0.5, 1.0];
pub const RESIDUAL_LIMIT: f64 = 1e-8;
pub const LEVI_LIMIT: f64 = 1e-2;
pub const LEVI_CROSS_LIMIT: f64 = 1e-4;
pub const LEVI_SAMPLES: usize = 100;
pub const COLLAR_SAMPLES: usize = 200;
pub const DF_A: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
pub const DF_ETA: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn step_controls(config: &RunConfig) -> StepControls {
    StepControls {
        grad_cap: config.grad_cap,
        stop_at: config.stop_at,
        solve: SolveOptions { n_taylor: config.n_taylor, tol: config.newton_tol, ..SolveOptions::default() },
        ..StepControls::default()
    }
}

fn recorder(command: &str, config: &RunConfig, quiet: bool) -> Recorder {
    let out = &config.output_dir;
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("cannot create {}: {e}", out.display());
    }
    Recorder::new(command, Some(config.clone()), out, quiet)
}

/// Writes a file, recording a failed `output` stage if that is impossible.
fn emit(rec: &mut Recorder, name: &str, contents: Result<String, StageError>) {
    let r = contents.and_then(|c| rec.write(name, &c));
    if let Err(e) = r {
        rec.stage::<(), ()>(&format!("output {name}"), || Err(e));
    }
}

fn scenario_stage(rec: &mut Recorder, config: &RunConfig) -> Option<(Scenario, Arc<DiscGrid>)> {
    rec.stage("scenario", || {
        let s = Scenario::build(config.scenario)?;
        let grid = DiscGrid::new(config.n_theta, config.n_rho)?;
        let details = json!({
            "name": s.name(),
            "kind": s.kind,
            "poles": s.poles.iter().map(|p| format!("{:?}", p.label)).collect::<Vec<_>>(),
            "trim": s.trim,
            "n_theta": grid.n_theta(),
            "n_rho": grid.n_rho(),
        });
        Ok(((s, grid), details))
    })
}

fn chart_stage(rec: &mut Recorder, s: &Scenario, seed: u64) {
    if let Some(r) = rec.stage("chart", || {
        let r = check_chart(&s.chart, 64, 8, seed);
        let d = json!({"max_square_defect": r.max_square_defect, "min_taming": r.min_taming});
        Ok((r, d))
    }) {
        rec.check(CheckOutcome::at_most("j_squared_defect", r.max_square_defect, 1e-10));
        rec.check(CheckOutcome::above("taming", r.min_taming, 0.0));
    }
}

fn model_stages(rec: &mut Recorder, s: &Scenario, grid: &Arc<DiscGrid>) {
    rec.stage("models", || {
        let mut rows = Vec::new();
        for pole in &s.poles {
            let model = pole.model(s.chart.structure.clone())?;
            let a = validate_adapted(&model)?;
            rows.push(json!({"pole": format!("{:?}", pole.label), "gamma": pole.gamma, "adaptation": a}));
        }
        Ok(((), rows))
    });
    if let Some(bad) = rec.stage("model_family", || {
        let mut rows = Vec::new();
        let mut bad = 0usize;
        for pole in &s.poles {
            let fam = model_family(grid, pole.gamma, &MODEL_RADII)?;
            bad += fam.iter().filter(|d| d.diagnostics.mu != Some(0)).count();
            rows.push(json!({
                "pole": format!("{:?}", pole.label),
                "r": MODEL_RADII,
                "mu": fam.iter().map(|d| d.diagnostics.mu).collect::<Vec<_>>(),
                "boundary_residual": fam.iter().map(|d| d.diagnostics.boundary_residual).fold(0.0, f64::max),
            }));
        }
        Ok((bad, rows))
    }) {
        rec.check(CheckOutcome::equal("model_winding_nonzero", bad as f64, 0.0));
    }
}

fn leaf_summary(gauge: &Gauge) -> Value {
    gauge
        .leaves
        .iter()
        .map(|l| json!({"length": l.length(), "points": l.points.len(), "start": l.start, "end": l.end}))
        .collect()
}

fn leaf_csv(gauge: &Gauge) -> String {
    let mut s = String::from("leaf,index,arclength,x1,y1,x2,y2\n");
    for (k, l) in gauge.leaves.iter().enumerate() {
        for (i, (p, a)) in l.points.iter().zip(&l.arclength).enumerate() {
            let _ = writeln!(s, "{k},{i},{},{},{},{},{}", fmt_f64(*a), fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]), fmt_f64(p[3]));
        }
    }
    s
}

fn leaves_stage(rec: &mut Recorder, s: &Scenario) -> Option<Gauge> {
    let gauge = rec.stage("leaves", || {
        let g = gauge_leaves(s)?;
        let d = leaf_summary(&g);
        Ok((g, d))
    })?;
    emit(rec, "leaf.csv", Ok(leaf_csv(&gauge)));
    Some(gauge)
}

fn family_summary(f: &DiscFamily) -> Value {
    let d = &f.discs;
    json!({
        "discs": f.len(),
        "t_first": d.first().map(|x| x.t),
        "t_last": d.last().map(|x| x.t),
        "max_iterations": d.iter().map(|x| x.diagnostics.iterations).max(),
        "max_cr_residual": d.iter().map(|x| x.diagnostics.cr_residual).fold(0.0, f64::max),
        "max_boundary_residual": d.iter().map(|x| x.diagnostics.boundary_residual).fold(0.0, f64::max),
        "min_boundary_separation": if f.len() > 1 { Some(f.min_boundary_separation()) } else { None },
    })
}

fn family_stage(
    rec: &mut Recorder,
    name: &str,
    s: &Scenario,
    label: PoleLabel,
    gauge: &Gauge,
    grid: &Arc<DiscGrid>,
    controls: &StepControls,
) -> Option<DiscFamily> {
    rec.stage(name, || {
        let f = pole_family(s, label, gauge, grid, controls)?;
        let d = family_summary(&f);
        Ok((f, d))
    })
}

fn cloud_csv(h: &Hypersurface) -> String {
    let mut s = String::with_capacity(h.points.len() * 170 + 32);
    s.push_str("t,rho,theta,x1,y1,x2,y2\n");
    for p in &h.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.rho),
            fmt_f64(p.theta),
            fmt_f64(p.x[0]),
            fmt_f64(p.x[1]),
            fmt_f64(p.x[2]),
            fmt_f64(p.x[3])
        );
    }
    s
}

fn family_checks(rec: &mut Recorder, f: &DiscFamily) {
    let r = &f.reports;
    let d = &f.discs;
    rec.check(CheckOutcome::equal("winding_nonzero", r.iter().filter(|x| x.mu != 0).count() as f64, 0.0));
    if let Some(bound) = r.first().and_then(|x| x.area_bound) {
        rec.check(CheckOutcome::at_most("area_bound", r.iter().map(|x| x.area).fold(0.0, f64::max), bound + 1e-6));
    }
    if r.iter().any(|x| x.crossings.is_some()) {
        let off = r.iter().filter(|x| x.crossings != Some(1)).count();
        rec.check(CheckOutcome::equal("leaf_crossings_not_one", off as f64, 0.0));
    }
    rec.check(CheckOutcome::above("hopf_a_min", r.iter().map(|x| x.a_min).fold(f64::INFINITY, f64::min), 0.0));
    rec.check(CheckOutcome::above("collar_c", r.iter().map(|x| x.collar_c).fold(f64::INFINITY, f64::min), 0.0));
    let cr = d.iter().map(|x| x.diagnostics.cr_residual).fold(0.0, f64::max);
    rec.check(CheckOutcome::at_most("cr_residual", cr, RESIDUAL_LIMIT));
    let br = d.iter().map(|x| x.diagnostics.boundary_residual).fold(0.0, f64::max);
    rec.check(CheckOutcome::at_most("boundary_residual", br, RESIDUAL_LIMIT));

    let rows = d
        .iter()
        .zip(r.iter().map(Some).chain(std::iter::repeat(None)))
        .map(|(disc, m)| {
            let g = &disc.diagnostics;
            json!({
                "t": disc.t,
                "mu": g.mu,
                "area": g.area,
                "a_min": g.a_min,
                "max_grad": g.max_grad,
                "crossings": g.crossings,
                "collar_c": m.map(|m| m.collar_c),
                "cr_residual": g.cr_residual,
                "boundary_residual": g.boundary_residual,
                "iterations": g.iterations,
            })
        })
        .collect();
    rec.diagnostics(rows);
}

/// The full pipeline: chart and model checks, leaves, both families, gluing,
/// the assembled hypersurface and all output files.
pub fn run_scenario(config: &RunConfig, quiet: bool) -> RunReport {
    let mut rec = recorder("run", config, quiet);
    let Some((s, grid)) = scenario_stage(&mut rec, config) else {
        return rec.finish();
    };
    chart_stage(&mut rec, &s, config.seed);
    model_stages(&mut rec, &s, &grid);
    let Some(gauge) = leaves_stage(&mut rec, &s) else {
        return rec.finish();
    };
    let controls = step_controls(config);
    let mut glue_report = None;
    let family = if s.is_global() {
        let at = |stop: f64| StepControls { stop_at: Some(stop), ..controls.clone() };
        let p = family_stage(&mut rec, "family_p", &s, PoleLabel::P, &gauge, &grid, &at(JUNCTION));
        let q = family_stage(&mut rec, "family_q", &s, PoleLabel::Q, &gauge, &grid, &at(1.0 - JUNCTION));
        let (Some(p), Some(q)) = (p, q) else {
            return rec.finish();
        };
        let Some(g) = rec.stage("glue", || {
            let g = glue(&s, &p, &q, config.glue_tol)?;
            let r = g.report.clone();
            Ok((g, r))
        }) else {
            return rec.finish();
        };
        rec.check(CheckOutcome::at_most("glue_distance", g.report.hausdorff, config.glue_tol));
        glue_report = Some(g.report);
        g.family
    } else {
        let Some(f) = family_stage(&mut rec, "family_p", &s, PoleLabel::P, &gauge, &grid, &controls) else {
            return rec.finish();
        };
        f
    };
    family_checks(&mut rec, &family);
    emit(
        &mut rec,
        "family.json",
        leviflat::output::to_json_string(&json!({
            "scenario": s.name(),
            "kind": s.kind,
            "seed_pole": family.seed_pole,
            "glue": glue_report,
            "discs": family.discs.iter().map(|d| d.record()).collect::<Vec<_>>(),
            "monitor": family.reports,
        }))
        .map_err(StageError::from),
    );

    let Some(h) = rec.stage("hypersurface", || {
        let h = assemble_hypersurface(&family, &s)?;
        let d = json!({
            "points": h.points.len(),
            "max_levi": h.max_levi,
            "levi_samples": h.levi_samples,
            "degenerate": h.degenerate,
            "boundary_residual": h.boundary_residual,
        });
        Ok((h, d))
    }) else {
        return rec.finish();
    };
    if h.degenerate {
        rec.fail_last("fewer than two parameter values".into());
    }
    if let Some(l) = h.max_levi {
        rec.check(CheckOutcome::at_most("levi_flatness", l, LEVI_LIMIT));
    }
    emit(&mut rec, "gamma_cloud.csv", Ok(cloud_csv(&h)));
    rec.finish()
}

/// Characteristic leaves only: `leaf.csv` plus the report.
pub fn dump_leaves(config: &RunConfig, quiet: bool) -> RunReport {
    let mut rec = recorder("leaf", config, quiet);
    if let Some((s, _)) = scenario_stage(&mut rec, config) {
        leaves_stage(&mut rec, &s);
    }
    rec.finish()
}

/// Levi form cross-check on random chart samples and the Diederich-Fornaess
/// scan on collar samples: `levi.csv`, `df_scan.csv` and the report.
pub fn dump_levi(config: &RunConfig, quiet: bool) -> RunReport {
    let mut rec = recorder("levi", config, quiet);
    let Some((s, _)) = scenario_stage(&mut rec, config) else {
        return rec.finish();
    };
    let cross = rec.stage("levi_cross_check", || {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut csv = String::from("sample,x1,y1,x2,y2,t1,t2,t3,t4,levi,levi_disc\n");
        let mut worst: f64 = 0.0;
        for k in 0..LEVI_SAMPLES {
            let p = s.chart.sample_point(&mut rng);
            let t = random_unit(&mut rng);
            let a = levi_form(&s.chart, s.chart.r.as_ref(), &p, &t)?;
            let b = levi_form_via_disc(&s.chart, s.chart.r.as_ref(), &p, &t)?;
            worst = worst.max((a - b).abs());
            let cols: Vec<String> = p.iter().chain(t.iter()).chain([a, b].iter()).map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(csv, "{k},{}", cols.join(","));
        }
        Ok(((csv, worst), json!({"samples": LEVI_SAMPLES, "max_discrepancy": worst})))
    });
    if let Some((csv, worst)) = cross {
        rec.check(CheckOutcome::at_most("levi_cross_oracle", worst, LEVI_CROSS_LIMIT));
        emit(&mut rec, "levi.csv", Ok(csv));
    }
    let scan = rec.stage("df_scan", || {
        let samples = match collar_samples(&s.chart, COLLAR_BAND, COLLAR_SAMPLES, config.seed) {
            Ok(v) => v,
            Err(Error::Precondition(why)) => return Ok((None, json!({"skipped": why}))),
            Err(e) => return Err(e.into()),
        };
        let scan = match df_scan(&s.chart, &DF_A, &DF_ETA, &samples) {
            Ok(v) => v,
            Err(Error::Precondition(why)) => return Ok((None, json!({"skipped": why}))),
            Err(e) => return Err(e.into()),
        };
        let mut csv = String::from("a,eta,min_value,positive_fraction,pass,error\n");
        for e in &scan {
            let (m, f, err) = match &e.outcome {
                Ok(r) => (fmt_f64(r.min_value), fmt_f64(r.positive_fraction), String::new()),
                Err(x) => (String::new(), String::new(), format!("\"{x}\"")),
            };
            let _ = writeln!(csv, "{},{},{m},{f},{},{err}", fmt_f64(e.a), fmt_f64(e.eta), e.pass());
        }
        let passing: Vec<[f64; 2]> = scan.iter().filter(|e| e.pass()).map(|e| [e.a, e.eta]).collect();
        let d = json!({"band": [COLLAR_BAND.0, COLLAR_BAND.1], "samples": samples.len(), "pairs": scan.len(), "passing": passing});
        Ok((Some((csv, passing.len())), d))
    });
    if let Some(Some((csv, passing))) = scan {
        rec.check(CheckOutcome::above("df_passing_pairs", passing as f64, 0.0));
        emit(&mut rec, "df_scan.csv", Ok(csv));
    }
    rec.finish()
}

/// Chart and normal-form invariants of every compiled-in scenario with default parameters.
pub fn check_scenarios(out: &Path, seed: u64, quiet: bool) -> RunReport {
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("cannot create {}: {e}", out.display());
    }
    let mut rec = Recorder::new("check", None, out, quiet);
    let kinds = [
        ScenarioKind::Ball,
        ScenarioKind::PerturbedBall { epsilon: 0.05 },
        ScenarioKind::WeakM { m: 2 },
        ScenarioKind::ModelQuadric { gamma: 0.3 },
    ];
    let grid = DiscGrid::default_grid();
    for kind in kinds {
        let Some(s) = rec.stage(&format!("{} build", kind.name()), || Ok((Scenario::build(kind)?, kind))) else {
            continue;
        };
        let name = s.name();
        if let Some(r) = rec.stage(&format!("{name} chart"), || {
            let r = check_chart(&s.chart, 64, 8, seed);
            let d = json!({"max_square_defect": r.max_square_defect, "min_taming": r.min_taming});
            Ok((r, d))
        }) {
            rec.check(CheckOutcome::at_most(&format!("{name} j_squared_defect"), r.max_square_defect, 1e-10));
            rec.check(CheckOutcome::above(&format!("{name} taming"), r.min_taming, 0.0));
        }
        rec.stage(&format!("{name} models"), || {
            let mut rows = Vec::new();
            for pole in &s.poles {
                let a = validate_adapted(&pole.model(s.chart.structure.clone())?)?;
                let fam = model_family(&grid, pole.gamma, &MODEL_RADII)?;
                if fam.iter().any(|d| d.diagnostics.mu != Some(0)) {
                    return Err(StageError::Diagnostic(format!("model family at {:?} has mu != 0", pole.label)));
                }
                rows.push(json!({"pole": format!("{:?}", pole.label), "adaptation": a}));
            }
            Ok(((), rows))
        });
    }
    rec.finish()
}
