use std::fs;

use rand::Rng as _;
use vacant_core::chain::{
    burn_in_length, gambler_ruin, mixing_time_bound, DenseChain, LazyChain, LevelChain,
    ReturnProfile, EXACT_LIMIT,
};
use vacant_core::estimate::{
    contraction_check, stationarized_contraction_check, survival_curve, which_vertex_freq,
    WhichVertexPlan,
};
use vacant_core::properties::{check_all, PropertyOptions};
use vacant_core::rng::stream_rng;
use vacant_core::vacant::{median, scan_trials, ScanPlan};
use vacant_core::{Graph, VertexSet};

use crate::args::*;
use crate::config::Provenance;
use crate::error::CliError;
use crate::output::{emit, num, Table};
use crate::svg::{line_chart, Series};

/// Largest graph on which the stationarized contraction check is run.
const STATIONARIZED_LIMIT: usize = 256;

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Scan(a) => scan(a),
        Command::Rv(a) => rv(a),
        Command::Mixing(a) => mixing(a),
        Command::Firstvisit(a) => firstvisit(a),
        Command::Whichvertex(a) => whichvertex(a),
        Command::Contract(a) => contract(a),
        Command::Properties(a) => properties(a),
        Command::Ruin(a) => ruin(a),
    }
}

fn finish(table: &Table, prov: &Provenance, common: &Common) -> Result<(), CliError> {
    emit(&table.render(prov)?, common.out.as_deref())
}

fn write_svg(common: &Common, svg: String) -> Result<(), CliError> {
    if let Some(path) = &common.svg {
        fs::write(path, svg)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Mixing time and R_v: the level chain on hypercubes, dense powers otherwise.
fn return_profile(g: &Graph, v: u32) -> Result<ReturnProfile, CliError> {
    if v as usize >= g.n() {
        return Err(CliError::Usage(format!("vertex {v} out of range")));
    }
    Ok(if g.is_hypercube() {
        ReturnProfile::hypercube(g.d())?
    } else {
        ReturnProfile::dense(g, v)?
    })
}

fn scan(a: &ScanArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("scan");
    let g = a.common.graph(10, &mut prov)?;
    let eps = a.common.eps(0.3)?;
    let trials = a.common.trials(20)?;
    let mut multipliers: Vec<f64> = parse_list("multipliers", &a.multipliers)?;
    multipliers.sort_by(f64::total_cmp);
    multipliers.dedup();
    let mut plan = ScanPlan::new(eps, multipliers.clone(), a.mode.into());
    plan.start = a.start;
    plan.window_start = a.window_start;
    plan.validate(&g)?;
    for (k, v) in [
        ("eps", num(eps)),
        ("trials", trials.to_string()),
        ("seed", a.common.seed.to_string()),
        (
            "multipliers",
            multipliers
                .iter()
                .map(|m| num(*m))
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("mode", plan.mode.to_string()),
        ("start", a.start.to_string()),
        ("window-start", a.window_start.to_string()),
    ] {
        prov.set(k, v);
    }

    let runs = scan_trials(&g, &plan, a.common.seed, trials)?;
    let mut table = Table::new(&[
        "d",
        "n",
        "multiplier",
        "trial",
        "vacant_size",
        "L1",
        "num_components",
        "bad_count",
        "seed",
    ]);
    for (trial, snaps) in runs.iter().enumerate() {
        for s in snaps {
            table.push(vec![
                g.d().to_string(),
                g.n().to_string(),
                num(s.multiplier),
                trial.to_string(),
                s.vacant_size.to_string(),
                s.census.largest().to_string(),
                s.census.count().to_string(),
                s.bad_count.to_string(),
                a.common.seed.to_string(),
            ]);
        }
    }
    if a.common.svg.is_some() {
        let points: Vec<(f64, f64)> = multipliers
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let l1: Vec<f64> = runs.iter().map(|r| r[i].census.largest() as f64).collect();
                (m, median(&l1).unwrap_or(0.0))
            })
            .collect();
        let chart = line_chart(
            &format!(
                "largest vacant component, {} d={} n={}",
                g.kind(),
                g.d(),
                g.n()
            ),
            "t / t*",
            "median L1",
            &[Series {
                name: "median L1".into(),
                points,
            }],
        );
        write_svg(&a.common, chart)?;
    }
    finish(&table, &prov, &a.common)
}

fn rv(a: &RvArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("rv");
    let g = a.common.graph(10, &mut prov)?;
    let vertex = if g.is_hypercube() { 0 } else { a.vertex };
    prov.set("vertex", vertex);
    let profile = return_profile(&g, vertex)?;
    let mut table = Table::new(&[
        "graph",
        "d",
        "n",
        "vertex",
        "T",
        "R_v",
        "p_v",
        "p_v_lower",
        "p_v_upper",
        "reference_2_plus_2_over_d",
    ]);
    table.push(vec![
        g.kind().to_string(),
        g.d().to_string(),
        g.n().to_string(),
        vertex.to_string(),
        profile.t_mix.to_string(),
        num(profile.r_v),
        num(profile.rate.p_v),
        num(profile.rate.lower()),
        num(profile.rate.upper()),
        num(2.0 + 2.0 / g.d() as f64),
    ]);
    finish(&table, &prov, &a.common)
}

fn mixing(a: &MixingArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("mixing");
    let g = a.common.graph(10, &mut prov)?;
    let (gap, t_mix) = if g.is_hypercube() {
        let level = LevelChain::new(g.d())?;
        (level.spectral_gap()?, level.mixing_time()?)
    } else {
        let dense = DenseChain::from_graph(&g)?;
        (dense.spectral_gap()?, dense.mixing_time(g.n())?)
    };
    let bound = mixing_time_bound(gap, g.n())?;
    let mut table = Table::new(&["graph", "d", "n", "gap", "lambda", "T", "T_bound"]);
    table.push(vec![
        g.kind().to_string(),
        g.d().to_string(),
        g.n().to_string(),
        num(gap),
        num(1.0 - gap),
        t_mix.to_string(),
        bound.to_string(),
    ]);
    finish(&table, &prov, &a.common)
}

fn firstvisit(a: &FirstVisitArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("firstvisit");
    let g = a.common.graph(10, &mut prov)?;
    let trials = a.common.trials(10_000)?;
    let target = a.target.unwrap_or(g.n() as u32 - 1);
    if a.start as usize >= g.n() || target as usize >= g.n() {
        return Err(CliError::Usage("start or target out of range".into()));
    }
    let profile = return_profile(&g, target)?;
    let burn_in = burn_in_length(a.common.k_const, profile.t_mix, g.n());
    let tmax = a.tmax.unwrap_or(burn_in + 8 * g.n() as u64);
    for (k, v) in [
        ("trials", trials.to_string()),
        ("seed", a.common.seed.to_string()),
        ("k-const", num(a.common.k_const)),
        ("start", a.start.to_string()),
        ("target", target.to_string()),
        ("tmax", tmax.to_string()),
    ] {
        prov.set(k, v);
    }
    let curve = survival_curve(&g, a.start, target, burn_in, tmax, trials, a.common.seed)?;
    let fit = curve.fit_decay(burn_in)?;
    let predicted = profile.rate.decay_rate();
    let mut table = Table::new(&[
        "graph",
        "d",
        "n",
        "T",
        "L",
        "tmax",
        "R_v",
        "p_v",
        "predicted_rate",
        "fitted_rate",
        "rel_error",
        "fit_points",
        "trials",
        "seed",
    ]);
    table.push(vec![
        g.kind().to_string(),
        g.d().to_string(),
        g.n().to_string(),
        profile.t_mix.to_string(),
        burn_in.to_string(),
        tmax.to_string(),
        num(profile.r_v),
        num(profile.rate.p_v),
        num(predicted),
        num(fit.rate),
        num((fit.rate - predicted).abs() / predicted),
        fit.points.to_string(),
        trials.to_string(),
        a.common.seed.to_string(),
    ]);
    if let Some(path) = &a.curve {
        let mut points = Table::new(&["t", "survival", "se"]);
        for (t, s, se) in curve.points() {
            points.push(vec![t.to_string(), num(s), num(se)]);
        }
        emit(&points.render(&prov)?, Some(path))?;
    }
    if a.common.svg.is_some() {
        let stride = ((tmax - burn_in) / 400).max(1) as usize;
        let empirical: Vec<(f64, f64)> = curve
            .points()
            .step_by(stride)
            .map(|(t, s, _)| (t as f64, s))
            .collect();
        let geometric: Vec<(f64, f64)> = curve
            .points()
            .step_by(stride)
            .map(|(t, _, _)| (t as f64, (-predicted * (t - burn_in) as f64).exp()))
            .collect();
        let chart = line_chart(
            &format!("first visit to {target}, {} d={}", g.kind(), g.d()),
            "lazy step t",
            "Pr(no visit in [L, t])",
            &[
                Series {
                    name: "empirical".into(),
                    points: empirical,
                },
                Series {
                    name: "(1 - p_v)^(t - L)".into(),
                    points: geometric,
                },
            ],
        );
        write_svg(&a.common, chart)?;
    }
    finish(&table, &prov, &a.common)
}

fn whichvertex(a: &WhichVertexArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("whichvertex");
    let g = a.common.graph(10, &mut prov)?;
    let trials = a.common.trials(10_000)?;
    let members: Vec<u32> = parse_list("members", &a.members)?;
    let profile = return_profile(&g, members[0].min(g.n() as u32 - 1))?;
    let burn_in = burn_in_length(a.common.k_const, profile.t_mix, g.n());
    let mut plan = WhichVertexPlan::with_default_horizon(g.n(), a.start, burn_in, burn_in);
    if let Some(h) = a.horizon {
        plan.horizon = h;
    }
    for (k, v) in [
        ("trials", trials.to_string()),
        ("seed", a.common.seed.to_string()),
        ("k-const", num(a.common.k_const)),
        (
            "members",
            members
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("start", a.start.to_string()),
        ("horizon", plan.horizon.to_string()),
    ] {
        prov.set(k, v);
    }
    let report = which_vertex_freq(&g, &members, &plan, trials, a.common.seed)?;
    let exact: Option<Vec<f64>> = if g.n() <= EXACT_LIMIT {
        let split = LazyChain::from_graph(&g)?.first_hit_split(
            &members,
            plan.start,
            plan.burn_in,
            plan.horizon,
        )?;
        let total: f64 = split.iter().sum();
        Some(split.iter().map(|p| p / total).collect())
    } else {
        None
    };
    let mut table = Table::new(&[
        "member",
        "count",
        "frequency",
        "se",
        "exact",
        "hits",
        "censored",
        "trials",
        "xi",
        "seed",
    ]);
    for (i, &m) in members.iter().enumerate() {
        table.push(vec![
            m.to_string(),
            report.counts[i].to_string(),
            num(report.frequency(i)),
            num(report.standard_error(i)),
            exact.as_ref().map(|e| num(e[i])).unwrap_or_default(),
            report.hits.to_string(),
            report.censored.to_string(),
            trials.to_string(),
            num(report.xi),
            a.common.seed.to_string(),
        ]);
    }
    finish(&table, &prov, &a.common)
}

fn contract(a: &ContractArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("contract");
    let g = a.common.graph(6, &mut prov)?;
    if a.set_size == 0 || a.set_size >= g.n() {
        return Err(CliError::Usage(format!(
            "--set-size must lie in 1..{}, got {}",
            g.n(),
            a.set_size
        )));
    }
    for (k, v) in [
        ("seed", a.common.seed.to_string()),
        ("set-size", a.set_size.to_string()),
        ("instances", a.instances.to_string()),
        ("t", a.t.to_string()),
        ("window", a.window.to_string()),
    ] {
        prov.set(k, v);
    }
    let mut table = Table::new(&[
        "instance",
        "variant",
        "n",
        "set_size",
        "start",
        "burn_in",
        "t",
        "prob_h",
        "prob_gamma",
        "difference",
        "tolerance",
        "within",
    ]);
    for instance in 0..a.instances {
        let mut rng = stream_rng(a.common.seed, instance);
        let mut set = VertexSet::empty(g.n());
        while set.len() < a.set_size {
            set.insert(rng.random_range(0..g.n() as u32));
        }
        let start = loop {
            let v = rng.random_range(0..g.n() as u32);
            if !set.contains(v) {
                break v;
            }
        };
        let mut rows = vec![(
            "start-specific",
            contraction_check(&g, &set, start, 0, a.t)?,
            1e-10,
        )];
        if g.n() <= STATIONARIZED_LIMIT {
            let (report, tol) = stationarized_contraction_check(&g, &set, start, a.window)?;
            rows.push(("stationarized", report, tol));
        }
        for (variant, report, tol) in rows {
            table.push(vec![
                instance.to_string(),
                variant.to_string(),
                g.n().to_string(),
                set.len().to_string(),
                start.to_string(),
                report.burn_in.to_string(),
                report.t.to_string(),
                num(report.prob_h),
                num(report.prob_gamma),
                num(report.difference),
                num(tol),
                (report.difference <= tol).to_string(),
            ]);
        }
    }
    finish(&table, &prov, &a.common)
}

fn properties(a: &PropertiesArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("properties");
    let g = a.common.graph(12, &mut prov)?;
    let eps = a.common.eps(0.3)?;
    let mut opts = PropertyOptions::for_graph(&g, eps, a.common.seed);
    opts.rho1 = a.rho1;
    opts.p1_constant = a.p1_constant;
    opts.rho2 = a.rho2;
    opts.p2_exponent = a.p2_exponent.into();
    opts.p3_sources = a.p3_sources;
    opts.p4_samples = a.p4_samples;
    for (k, v) in [
        ("eps", num(eps)),
        ("seed", a.common.seed.to_string()),
        ("rho1", num(a.rho1)),
        ("p1-constant", num(a.p1_constant)),
        ("rho2", num(a.rho2)),
        ("p2-exponent", num(opts.p2_exponent.value())),
        ("p3-sources", a.p3_sources.to_string()),
        ("p4-samples", a.p4_samples.to_string()),
    ] {
        prov.set(k, v);
    }
    let report = check_all(&g, &opts)?;
    let mut table = Table::new(&[
        "property",
        "verdict",
        "measured",
        "threshold",
        "evidence",
        "witness",
        "note",
    ]);
    for c in &report.checks {
        table.push(vec![
            c.property.to_string(),
            c.verdict.to_string(),
            num(c.measured),
            num(c.threshold),
            c.evidence.to_string(),
            c.witness
                .as_ref()
                .map(|w| w.to_string())
                .unwrap_or_default(),
            c.note.clone(),
        ]);
    }
    finish(&table, &prov, &a.common)
}

fn ruin(a: &RuinArgs) -> Result<(), CliError> {
    let mut prov = Provenance::new("ruin");
    prov.set("p", num(a.p));
    prov.set("q", num(a.q));
    prov.set("ell", a.ell);
    if let Some(j) = a.j {
        prov.set("j", j);
    }
    let starts: Vec<u32> = match a.j {
        Some(j) => vec![j],
        None => (0..=a.ell).collect(),
    };
    let xi = a.q / a.p;
    let mut table = Table::new(&["p", "q", "ell", "j", "xi", "pi_j", "two_xi_pow_j"]);
    for j in starts {
        let pi = gambler_ruin(a.p, a.q, a.ell, j)?;
        table.push(vec![
            num(a.p),
            num(a.q),
            a.ell.to_string(),
            j.to_string(),
            num(xi),
            num(pi),
            num(2.0 * xi.powi(j as i32)),
        ]);
    }
    finish(&table, &prov, &a.common)
}
