use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use zlb_core::attention::{attention_existence_scan, AttentionParams};
use zlb_core::continuous::{find_rpe_continuous, h};
use zlb_core::equilibrium::{
    cutoff_components, enumerate_equilibria, ih_rpe_residual, lee_solution, regime_determinant,
    solve_candidate, verify_ih_rpe_equivalence, CandidateSolution, Concept, Regime,
};
use zlb_core::estability::{classify, verdicts};
use zlb_core::guidance::{
    fg_effect_learning, impact_series, puzzle_predicate, FgConfig, FgLearningKind,
};
use zlb_core::learning::{default_divergence_bound, simulate, BeliefKind, BeliefState, SimConfig};
use zlb_core::model_core::{delta, ergodic_weight};
use zlb_core::{MarkovShock, ModelParams};

use crate::config::{FgSection, IhSection, Point, RunConfig, SimulationSection, MODEL_VARIABLES};
use crate::output::{fmt_f64, fmt_opt, write_json, Table};
use crate::CliError;

const SCAN_CONCEPTS: [Concept; 4] = [Concept::REE, Concept::RPE, Concept::BRE, Concept::BRRPE];

fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// Cartesian product of the axes, first axis outermost.
fn cells(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in &cfg.grid {
        let vals = axis.values();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect();
    }
    out
}

fn point_at(cfg: &RunConfig, values: &[f64]) -> Result<Point, CliError> {
    let mut pt = cfg.point();
    for (axis, &v) in cfg.grid.iter().zip(values) {
        pt.set(&axis.variable, v)?;
    }
    Ok(pt)
}

fn axis_header(cfg: &RunConfig) -> Vec<String> {
    cfg.grid.iter().map(|a| a.variable.clone()).collect()
}

fn no_lee(concepts: &[Concept]) -> Result<(), CliError> {
    if concepts.contains(&Concept::LEE) {
        return Err(CliError::Config(
            "LEE has no analytic cutoff and cannot be scanned".into(),
        ));
    }
    Ok(())
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        Value::Null
    } else {
        Value::String(fmt_f64(v))
    }
}

fn candidate_json(c: &CandidateSolution) -> Value {
    json!({
        "regime": c.regime,
        "consistent": c.consistent,
        "degenerate": c.degenerate,
        "x": [num(c.y1.x), num(c.y2.x)],
        "pi": [num(c.y1.pi), num(c.y2.pi)],
        "i": [num(c.y1.i), num(c.y2.i)],
    })
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let pt = cfg.point();
    let params = pt.params()?;
    let shock = pt.shock()?;
    let mut reports = Vec::new();
    for concept in cfg.concepts_or(&SCAN_CONCEPTS) {
        if concept == Concept::LEE {
            let sol = lee_solution(&params, &shock)?;
            reports.push(json!({ "concept": concept, "solution": candidate_json(&sol) }));
            continue;
        }
        let cutoff = cutoff_components(concept, &params, &shock)?;
        let mut equilibria = Vec::new();
        let mut stable = Vec::new();
        for (cand, v) in verdicts(concept, &params, &shock)? {
            let mut entry = candidate_json(&cand);
            entry["estable"] = json!(v.estable);
            entry["max_real_part"] = num(v.max_real_part);
            entry["boundary"] = json!(v.boundary);
            if v.estable {
                stable.push(cand.regime);
            }
            equilibria.push(entry);
        }
        let (selected, selection_error) = match classify(concept, &params, &shock) {
            Ok((c, _)) => (json!(c.regime), Value::Null),
            Err(e) => (Value::Null, json!(e.to_string())),
        };
        reports.push(json!({
            "concept": concept,
            "cutoff": {
                "eps_bar": num(cutoff.eps_bar),
                "eps_pp": num(cutoff.eps_pp),
                "eps_zp2": num(cutoff.eps_zp2),
                "branch": cutoff.branch.label(),
            },
            "equilibria": equilibria,
            "estable": stable,
            "selected": selected,
            "selection_error": selection_error,
        }));
    }
    let report = json!({
        "delta": num(delta(&params)),
        "qbar": num(ergodic_weight(&shock).unwrap_or(f64::NAN)),
        "concepts": reports,
    });
    write_json(out, &report)?;
    Ok(vec![out.to_path_buf()])
}

pub fn region_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.checked_grid(&MODEL_VARIABLES, 1..=2)?;
    let concepts = cfg.concepts_or(&SCAN_CONCEPTS);
    no_lee(&concepts)?;
    let rows: Vec<Vec<(f64, bool, bool)>> = cells(cfg)
        .par_iter()
        .map(|vals| {
            let pt = point_at(cfg, vals)?;
            let params = pt.params()?;
            let shock = pt.shock()?;
            concepts
                .iter()
                .map(|&c| {
                    let eps_bar = cutoff_components(c, &params, &shock)?.eps_bar;
                    let oracle = !enumerate_equilibria(c, &params, &shock)?.is_empty();
                    Ok((eps_bar, shock.eps1 > eps_bar, oracle))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;

    let mut header = axis_header(cfg);
    for c in &concepts {
        header.extend([
            format!("{c}_eps_bar"),
            format!("{c}_exists"),
            format!("{c}_oracle"),
        ]);
    }
    let mut table = Table::new(header);
    let mut agree = 0usize;
    for (vals, row) in cells(cfg).iter().zip(&rows) {
        let mut rec: Vec<String> = vals.iter().map(|&v| fmt_f64(v)).collect();
        for &(eps_bar, analytic, oracle) in row {
            agree += usize::from(analytic == oracle);
            rec.extend([fmt_f64(eps_bar), flag(analytic), flag(oracle)]);
        }
        table.push(rec);
    }
    let total = rows.len() * concepts.len();
    info!("analytic and enumerated existence agree on {agree} of {total} cell-concept pairs");
    table.write(out)?;
    Ok(vec![out.to_path_buf()])
}

/// ZP inequality margins at persistence `p`, each multiplied by the system
/// determinant so that they stay continuous through poles of the solution,
/// followed by the determinant itself. Where the determinant is nonzero the
/// low state binds when `m0 / det >= 0` and the high state is slack when
/// `m1 / det > 0`.
fn zp_margins(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
    p: f64,
) -> Option<[f64; 3]> {
    let s = MarkovShock::new(shock.eps1, shock.eps2, p, shock.q).ok()?;
    let c = solve_candidate(concept, Regime::ZP, params, &s).ok()?;
    let det = regime_determinant(concept, Regime::ZP, params, &s).ok()?;
    let m = [
        det * (-params.mu - params.psi * c.y1.pi),
        det * (params.psi * c.y2.pi + params.mu),
        det,
    ];
    m.iter().all(|v| v.is_finite()).then_some(m)
}

fn zp_exists(concept: Concept, params: &ModelParams, shock: &MarkovShock, p: f64) -> bool {
    MarkovShock::new(shock.eps1, shock.eps2, p, shock.q)
        .and_then(|s| solve_candidate(concept, Regime::ZP, params, &s))
        .map(|c| c.consistent)
        .unwrap_or(false)
}

/// Search grid for `p`: steps of 1e-3, plus expected durations spaced evenly
/// in logs up to 1e6 so that long traps are not skipped.
fn persistence_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
    grid.extend((1..=300).map(|k| 1.0 - 10f64.powf(-3.0 - 3.0 * k as f64 / 300.0)));
    grid
}

/// Both ends of the last bracket around a sign change of one margin.
fn crossing(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Option<f64>) -> [f64; 2] {
    let lo_pos = f(lo).is_some_and(|v| v >= 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid).is_some_and(|v| v >= 0.0) == lo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    [lo, hi]
}

/// Largest `p` with a consistent ZP solution. The ZP set in `p` can be a
/// band far narrower than any grid step, so each grid interval is searched
/// at the sign changes of the two inequality margins, located by bisection.
fn max_persistence(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
    grid: &[f64],
) -> Option<f64> {
    if let Some(&top) = grid.last() {
        if zp_exists(concept, params, shock, top) {
            return Some(top);
        }
    }
    let margin = |p: f64| zp_margins(concept, params, shock, p);
    for w in grid.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        let (ma, mb) = (margin(a), margin(b));
        let mut points = vec![a];
        for which in 0..3 {
            let side = |m: Option<[f64; 3]>| m.map(|m| m[which] >= 0.0);
            if side(ma) != side(mb) {
                points.extend(crossing(a, b, |p| margin(p).map(|m| m[which])));
            }
        }
        let best = points
            .into_iter()
            .filter(|&p| zp_exists(concept, params, shock, p))
            .fold(None, |acc: Option<f64>, p| {
                Some(acc.map_or(p, |q| q.max(p)))
            });
        if best.is_some() {
            return best;
        }
    }
    None
}

pub fn duration_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.checked_grid(&["eps1"], 1..=1)?;
    let concepts = cfg.concepts_or(&[Concept::REE, Concept::RPE]);
    if concepts.contains(&Concept::LEE) {
        return Err(CliError::Config(
            "duration-scan does not support LEE".into(),
        ));
    }
    let grid = cells(cfg);
    // Validate the fixed part of the calibration once, with a placeholder p.
    let mut probe = point_at(cfg, &grid[0])?;
    probe.p = Some(0.5);
    let params = probe.params()?;
    probe.shock()?;
    let coarse = persistence_grid();
    let rows: Vec<Vec<Option<f64>>> = grid
        .par_iter()
        .map(|vals| {
            let mut pt = point_at(cfg, vals)?;
            pt.p = Some(0.5);
            let shock = pt.shock()?;
            Ok(concepts
                .iter()
                .map(|&c| max_persistence(c, &params, &shock, &coarse))
                .collect())
        })
        .collect::<Result<_, CliError>>()?;
    let mut header = vec!["eps1".to_string()];
    for c in &concepts {
        header.extend([format!("{c}_p_max"), format!("{c}_duration")]);
    }
    let mut table = Table::new(header);
    for (vals, row) in grid.iter().zip(&rows) {
        let mut rec = vec![fmt_f64(vals[0])];
        for p in row {
            rec.extend([fmt_opt(*p), fmt_opt(p.map(|p| 1.0 / (1.0 - p)))]);
        }
        table.push(rec);
    }
    table.write(out)?;
    Ok(vec![out.to_path_buf()])
}

pub fn simulate_cmd(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let pt = cfg.point();
    let params = pt.params()?;
    let shock = pt.shock()?;
    let sim: SimulationSection = cfg
        .simulation
        .clone()
        .ok_or_else(|| CliError::Config("simulate needs a 'simulation' section".into()))?;
    if sim.initial_count == 0 {
        return Err(CliError::Config("initial_count must be at least 1".into()));
    }
    let mut init = BeliefState::at_rpe(sim.beliefs, &params, &shock, sim.gain, sim.info_lag)?;
    init.t = sim.initial_count;
    let bound = sim
        .divergence_bound
        .unwrap_or_else(|| default_divergence_bound(&params, &shock));
    let mut sc = SimConfig::new(sim.horizon, cfg.seed.unwrap_or(0), bound);
    sc.record_every = sim.record_every;
    sc.initial_state = sim.initial_state;
    let path = simulate(&params, &shock, &init, &sc)?;
    if let Some(t) = path.diverged_at {
        warn!("beliefs diverged at period {t}");
    }

    let (xe, pie): (Vec<usize>, Vec<usize>) = match sim.beliefs {
        BeliefKind::RpeMean => (vec![0], vec![1]),
        BeliefKind::MsvStateContingent => (vec![0, 2], vec![1, 3]),
    };
    let mut header: Vec<String> = ["t", "state", "x", "pi", "i"].map(String::from).to_vec();
    let suffix = |k: usize| {
        if xe.len() == 1 {
            String::new()
        } else {
            (k + 1).to_string()
        }
    };
    header.extend((0..xe.len()).map(|k| format!("xe{}", suffix(k))));
    header.extend((0..pie.len()).map(|k| format!("pie{}", suffix(k))));
    header.push("diverged".into());
    let mut table = Table::new(header);
    for k in 0..path.periods.len() {
        let o = path.outcomes[k];
        let b = &path.beliefs[k];
        let mut rec = vec![
            path.periods[k].to_string(),
            path.shocks[k].to_string(),
            fmt_f64(o.x),
            fmt_f64(o.pi),
            fmt_f64(o.i),
        ];
        rec.extend(xe.iter().chain(&pie).map(|&j| fmt_f64(b[j])));
        rec.push(flag(path.diverged_at == Some(path.periods[k])));
        table.push(rec);
    }
    table.write(out)?;
    Ok(vec![out.to_path_buf()])
}

fn sibling(out: &Path, tag: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_{tag}{ext}"))
}

pub fn continuous_rpe(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut allowed = MODEL_VARIABLES.to_vec();
    allowed.extend(["rho_c", "sigma_v"]);
    cfg.checked_grid(&allowed, 0..=2)?;
    let section = cfg
        .continuous
        .as_ref()
        .ok_or_else(|| CliError::Config("continuous-rpe needs a 'continuous' section".into()))?;
    let curve = match &section.curve {
        Some(ax) if ax.steps >= 2 && ax.min < ax.max => Some(ax.values()),
        Some(_) => {
            return Err(CliError::Config(
                "the curve needs steps >= 2 and min < max".into(),
            ))
        }
        None => None,
    };
    let grid = cells(cfg);
    let results: Vec<_> = grid
        .par_iter()
        .map(|vals| {
            let pt = point_at(cfg, vals)?;
            let params = pt.params()?;
            let cs = pt.continuous_shock()?;
            let res = find_rpe_continuous(&params, &cs)?;
            let curve_vals: Vec<(f64, f64)> = curve
                .iter()
                .flatten()
                .map(|&a| (a, h(a, &params, &cs) - a))
                .collect();
            Ok((cs, res, curve_vals))
        })
        .collect::<Result<_, CliError>>()?;

    let axes: Vec<usize> = (0..cfg.grid.len())
        .filter(|&k| !["rho_c", "sigma_v"].contains(&cfg.grid[k].variable.as_str()))
        .collect();
    let mut header: Vec<String> = axes.iter().map(|&k| cfg.grid[k].variable.clone()).collect();
    let mut curve_header = header.clone();
    header.extend(
        [
            "rho_c",
            "sigma_v",
            "a_star",
            "h_star_minus_star",
            "exists",
            "a_low",
            "a_high",
            "pr_bind_low",
            "pr_bind_high",
        ]
        .map(String::from),
    );
    curve_header.extend(["rho_c", "sigma_v", "a", "h_minus_a"].map(String::from));
    let mut table = Table::new(header);
    let mut curve_table = Table::new(curve_header);
    for (vals, (cs, res, curve_vals)) in grid.iter().zip(&results) {
        let prefix: Vec<String> = axes.iter().map(|&k| fmt_f64(vals[k])).collect();
        let mut rec = prefix.clone();
        rec.extend([
            fmt_f64(cs.rho_c),
            fmt_f64(cs.sigma_v),
            fmt_f64(res.a_star),
            fmt_f64(res.h_at_star_minus_star),
        ]);
        rec.push(flag(!res.fixed_points.is_empty()));
        rec.extend([0, 1].map(|k| fmt_opt(res.fixed_points.get(k).copied())));
        rec.extend([0, 1].map(|k| fmt_opt(res.regime_probabilities.get(k).copied())));
        table.push(rec);
        for &(a, g) in curve_vals {
            let mut c = prefix.clone();
            c.extend([
                fmt_f64(cs.rho_c),
                fmt_f64(cs.sigma_v),
                fmt_f64(a),
                fmt_f64(g),
            ]);
            curve_table.push(c);
        }
    }
    table.write(out)?;
    let mut written = vec![out.to_path_buf()];
    if curve.is_some() {
        let path = sibling(out, "curve");
        curve_table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn forward_guidance(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.point().params()?;
    let section = cfg
        .forward_guidance
        .clone()
        .unwrap_or(FgSection { t_max: 200 });
    info!(
        "forward guidance puzzle under cognitive discounting: {}",
        puzzle_predicate(&params)
    );
    let mut table = Table::new(["kind", "T", "dpi0_diT", "dx0_diT", "log10_abs_dpi0"]);
    for (kind, p) in [("bre", params), ("re", params.rational())] {
        for pt in impact_series(&p, section.t_max) {
            table.push(vec![
                kind.into(),
                pt.t.to_string(),
                fmt_f64(pt.dpi0_dit),
                fmt_f64(pt.dx0_dit),
                fmt_f64(pt.log10_abs_dpi0),
            ]);
        }
    }
    for kind in [
        FgLearningKind::EulerLearning,
        FgLearningKind::IhCredible,
        FgLearningKind::IhNotCredible,
    ] {
        for t in 0..=section.t_max {
            // The derivatives do not depend on the size of the announced cut.
            let (dx, dpi) = fg_effect_learning(kind, &params, &FgConfig::new(t, -0.01)?);
            table.push(vec![
                kind.label().into(),
                t.to_string(),
                fmt_f64(dpi),
                fmt_f64(dx),
                fmt_f64(dpi.abs().log10()),
            ]);
        }
    }
    table.write(out)?;
    Ok(vec![out.to_path_buf()])
}

pub fn attention_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.checked_grid(&["eps1"], 1..=1)?;
    let section = cfg.attention.clone().unwrap_or_default();
    let pt = cfg.point();
    let params = pt.params()?;
    let mut base = pt;
    base.eps1 = Some(cfg.grid[0].min);
    let shock = base.shock()?;
    let mut attn = AttentionParams::benchmark(&params)?;
    if let Some(v) = section.xi_c {
        attn.xi_c = v;
    }
    if let Some(v) = section.xi_f {
        attn.xi_f = v;
    }
    if let Some(v) = section.m_default {
        (attn.m_d1, attn.m_d2, attn.m_df1, attn.m_df2) = (v, v, v, v);
    }
    if let Some(v) = section.theta {
        attn.theta = v;
    }
    if let Some(v) = section.phi_labor {
        attn.phi_labor = v;
    }
    attn.validate()?;
    let regimes = section.regimes.clone().unwrap_or(Regime::ALL.to_vec());
    let grid = cfg.grid[0].values();
    let points: Vec<_> = grid
        .par_iter()
        .map(|&e| attention_existence_scan(&regimes, &params, &shock, &attn, &[e]))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new([
        "eps1", "regime", "exists", "m1", "m2", "mf1", "mf2", "M1", "M2", "Mf1", "Mf2", "x1", "pi1",
    ]);
    for point in points.iter().flatten() {
        let mut rec = vec![
            fmt_f64(point.eps1),
            point.regime.to_string(),
            flag(point.exists),
        ];
        match point.representative() {
            Some(s) => rec.extend(
                [
                    s.m1,
                    s.m2,
                    s.mf1,
                    s.mf2,
                    s.big_m1,
                    s.big_m2,
                    s.big_mf1,
                    s.big_mf2,
                    s.outcomes[0].x,
                    s.outcomes[0].pi,
                ]
                .map(fmt_f64),
            ),
            None => rec.extend(std::iter::repeat_n(String::new(), 10)),
        }
        table.push(rec);
    }
    table.write(out)?;
    Ok(vec![out.to_path_buf()])
}

/// Random calibration with psi in (1, 3], q < 1 and eps2 >= 0.
fn draw(rng: &mut ChaCha8Rng) -> Result<(ModelParams, MarkovShock), CliError> {
    let params = ModelParams::new(
        rng.random_range(0.9..0.995),
        rng.random_range(0.2..2.0),
        rng.random_range(0.005..0.1),
        1.0 + rng.random_range(0.01..=2.0),
        rng.random_range(0.002..0.03),
    )?;
    let shock = MarkovShock::new(
        rng.random_range(-0.05..0.0),
        rng.random_range(0.0..0.02),
        rng.random_range(0.05..0.98),
        rng.random_range(0.05..0.995),
    )?;
    Ok((params, shock))
}

/// Checks the configured point, when it has a shock, and then `draws`
/// random calibrations.
pub fn ih_check(cfg: &RunConfig, out: &Path) -> Result<(Vec<PathBuf>, bool), CliError> {
    let section = cfg.ih_check.clone().unwrap_or(IhSection { draws: 50 });
    let pt = cfg.point();
    let mut cases = Vec::new();
    let params = pt.params()?;
    if pt.eps1.is_some() || pt.p.is_some() {
        cases.push((params, pt.shock()?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    for _ in 0..section.draws {
        cases.push(draw(&mut rng)?);
    }
    let rows: Vec<(usize, f64, bool)> = cases
        .par_iter()
        .map(|(params, shock)| {
            let rational = params.rational();
            let eqs = enumerate_equilibria(Concept::RPE, &rational, shock)?;
            let mut worst = 0.0f64;
            for c in &eqs {
                worst = worst.max(ih_rpe_residual(&rational, shock, c)?);
            }
            Ok((eqs.len(), worst, verify_ih_rpe_equivalence(params, shock)?))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new([
        "draw",
        "beta",
        "sigma",
        "lambda",
        "psi",
        "mu",
        "eps1",
        "eps2",
        "p",
        "q",
        "n_equilibria",
        "max_residual",
        "holds",
    ]);
    for (k, ((params, shock), (n, worst, holds))) in cases.iter().zip(&rows).enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(
            [
                params.beta,
                params.sigma,
                params.lambda,
                params.psi,
                params.mu,
                shock.eps1,
                shock.eps2,
                shock.p,
                shock.q,
            ]
            .map(fmt_f64),
        );
        rec.extend([n.to_string(), fmt_f64(*worst), flag(*holds)]);
        table.push(rec);
    }
    table.write(out)?;
    let all = rows.iter().all(|r| r.2);
    info!(
        "{} of {} cases satisfy the infinite-horizon fixed point",
        rows.iter().filter(|r| r.2).count(),
        rows.len()
    );
    Ok((vec![out.to_path_buf()], all))
}
