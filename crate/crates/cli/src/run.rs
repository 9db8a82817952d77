//! Executes one resolved subcommand and writes its artifacts.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use ssahm::asymptotics::{
    fit_exponential_decay, predicted_t, recover_kappa_minus, AsymptoticConstants, DEFAULT_MIN_N,
};
use ssahm::blackhole::{bh_profile, find_horizons, recover_parameters, RNdSParams};
use ssahm::cam::{cam_scan, default_search_box, find_zeros_al3, zero_lattice_fit, ComplexGrid, ZBox};
use ssahm::inverse::{transmission_experiment_with, uniqueness_experiment_with};
use ssahm::jost::{JostOptions, Side};
use ssahm::profile::{bulk_fit_window, fit_asymptotic_constants, load_table, make_analytic_profile, Family, PotentialProfile};
use ssahm::scattering::{Scatterer, ScatteringOptions};

use crate::config::{
    parse_n_range, AsymArgs, BhArgs, CamArgs, ForwardArgs, SolverArgs, TransmissionArgs, UniqArgs,
    ZerosArgs,
};
use crate::output::{self, num, Sink};
use crate::AppError;

fn config_err(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}

fn positive(field: &str, v: f64) -> Result<f64, AppError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("field `{field}`: {v} must be positive")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, AppError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("field `{field}`: {v} is not finite")))
    }
}

/// Fills solver defaults in place and returns the corresponding options.
pub fn solver_options(s: &mut SolverArgs) -> Result<ScatteringOptions, AppError> {
    let d = ScatteringOptions::default();
    let rtol = positive("rtol", *s.rtol.get_or_insert(d.jost.rtol))?;
    let tail_tol = positive("tail_tol", *s.tail_tol.get_or_insert(d.jost.tail_tol))?;
    let match_tol = positive("match_tol", *s.match_tol.get_or_insert(d.match_tol))?;
    let liouville_tol = positive("liouville_tol", *s.liouville_tol.get_or_insert(d.liouville_tol))?;
    Ok(ScatteringOptions {
        jost: JostOptions {
            rtol,
            tail_tol,
            ..d.jost
        },
        match_tol,
        liouville_tol,
    })
}

pub fn build_profile(
    field: &str,
    kind: &str,
    params: &[f64],
    table: Option<&Path>,
) -> Result<PotentialProfile, AppError> {
    let bad = |e: ssahm::Error| config_err(format!("field `{field}`: {e}"));
    match kind {
        "table" => {
            let path = table.ok_or_else(|| config_err(format!("field `{field}`: 'table' needs a table path")))?;
            load_table(path).map_err(bad)
        }
        "rnds" => {
            if params.len() != 3 && params.len() != 4 {
                return Err(config_err(format!("field `{field}`: rnds takes M,Q,Lambda[,c]")));
            }
            let p = RNdSParams::new(params[0], params[1], params[2]);
            bh_profile(p, params.get(3).copied()).map_err(bad)
        }
        family => {
            let f = Family::from_str(family).map_err(bad)?;
            make_analytic_profile(f, params).map_err(bad)
        }
    }
}

fn unit_profile(
    profile: &mut Option<String>,
    params: &mut Option<Vec<f64>>,
    table: &Option<std::path::PathBuf>,
) -> Result<PotentialProfile, AppError> {
    let kind = profile.get_or_insert_with(|| "sech".into()).clone();
    let params = params.get_or_insert_with(Vec::new).clone();
    build_profile("profile", &kind, &params, table.as_deref())
}

fn second_profile(
    first: &PotentialProfile,
    other: &Option<String>,
    other_params: &mut Option<Vec<f64>>,
    other_table: &Option<std::path::PathBuf>,
    shift: &mut Option<f64>,
) -> Result<PotentialProfile, AppError> {
    let base = match other {
        Some(kind) => {
            let params = other_params.get_or_insert_with(Vec::new).clone();
            build_profile("other", kind, &params, other_table.as_deref())?
        }
        None => first.clone(),
    };
    let c = finite("shift", *shift.get_or_insert(0.0))?;
    Ok(if c == 0.0 { base } else { base.translate(c) })
}

fn numerical(e: ssahm::Error) -> AppError {
    AppError::Numerical(e.to_string())
}

fn zbox(field: &str, v: &[f64]) -> Result<ZBox, AppError> {
    if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(format!("field `{field}`: expected re_min,im_min,re_max,im_max")));
    }
    ZBox::new(v[0], v[1], v[2], v[3]).map_err(|e| config_err(format!("field `{field}`: {e}")))
}

pub fn forward(a: &mut ForwardArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let p = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    let ns = parse_n_range(a.n.get_or_insert_with(|| "1..20".into()))?;
    let s = Scatterer::with_options(&p, opts).map_err(numerical)?;
    let entries = s.scattering_entries(lambda, &ns).map_err(numerical)?;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                num(lambda),
                num(e.pt.z.re),
                num(e.t.re),
                num(e.t.im),
                num(e.l.re),
                num(e.l.im),
                num(e.r.re),
                num(e.r.im),
                num(e.unitarity_residual()),
            ]
        })
        .collect();
    sink.table("forward.csv", output::FORWARD_SCHEMA, &rows)
}

pub fn cam(a: &mut CamArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let p = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    let bounds = zbox("box", a.bounds.get_or_insert_with(|| vec![0.0, 0.0, 5.0, 5.0]))?;
    let res = a.resolution.get_or_insert_with(|| vec![51, 51]).clone();
    if res.len() != 2 || res.contains(&0) {
        return Err(config_err("field `resolution`: expected two positive counts"));
    }
    let s = Scatterer::with_options(&p, opts).map_err(numerical)?;
    let grid = ComplexGrid {
        bounds,
        n_re: res[0],
        n_im: res[1],
    };
    let samples = cam_scan(&s, lambda, &grid).map_err(numerical)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|c| vec![num(c.z.re), num(c.z.im), num(c.ln_abs_entry(3) / std::f64::consts::LN_10)])
        .collect();
    sink.table("cam.csv", output::CAM_SCHEMA, &rows)?;
    let worst = samples
        .iter()
        .map(|c| c.bound_ratio(s.total_width()))
        .fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Summary {
        width: f64,
        max_bound_ratio: f64,
        nodes: usize,
    }
    sink.json(
        "cam.json",
        &Summary {
            width: s.total_width(),
            max_bound_ratio: worst,
            nodes: samples.len(),
        },
    )
}

pub fn zeros(a: &mut ZerosArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let p = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    let s = Scatterer::with_options(&p, opts).map_err(numerical)?;
    let bounds = match &a.bounds {
        Some(v) => zbox("box", v)?,
        None => {
            let strip = a.strip.get_or_insert_with(|| vec![0.5, 10.5]).clone();
            if strip.len() != 2 {
                return Err(config_err("field `strip`: expected lo,hi"));
            }
            let b = default_search_box(&s, lambda, strip[0], strip[1])
                .map_err(|e| config_err(format!("field `strip`: {e}")))?;
            a.bounds = Some(vec![b.re_min, b.im_min, b.re_max, b.im_max]);
            b
        }
    };
    let set = find_zeros_al3(&s, lambda, bounds).map_err(numerical)?;
    let rows: Vec<Vec<String>> = set
        .zeros
        .iter()
        .map(|z| vec![num(z.z.re), num(z.z.im), num(z.residual)])
        .collect();
    sink.table("zeros.csv", output::ZEROS_SCHEMA, &rows)?;
    let zs: Vec<Complex64> = set.zeros.iter().map(|z| z.z).collect();
    let lattice = zero_lattice_fit(&zs, s.total_width(), p.kappa_minus(), p.kappa_plus(), lambda).ok();
    #[derive(Serialize)]
    struct Report<'a> {
        zero_set: &'a ssahm::cam::ZeroSet,
        lattice: Option<ssahm::cam::LatticeFit>,
    }
    sink.json(
        "zeros.json",
        &Report {
            zero_set: &set,
            lattice,
        },
    )
}

pub fn asym(a: &mut AsymArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let p = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    let ns = parse_n_range(a.n.get_or_insert_with(|| "6..30".into()))?;
    let s = Scatterer::with_options(&p, opts).map_err(numerical)?;
    let entries = s.scattering_entries(lambda, &ns).map_err(numerical)?;
    let consts = AsymptoticConstants::from_scatterer(&s, lambda);
    let mut rows = Vec::with_capacity(entries.len());
    for e in &entries {
        let pred = predicted_t(&consts, e.pt.z).map_err(numerical)?;
        rows.push(vec![
            num(e.pt.z.re),
            num(e.t.norm()),
            num(e.l.arg()),
            num((e.t / pred).norm()),
        ]);
    }
    sink.table("asym.csv", output::ASYM_SCHEMA, &rows)?;
    let hi = ns.iter().copied().fold(0.0, f64::max);
    let mags: Vec<(f64, f64)> = entries.iter().map(|e| (e.pt.z.re, e.t.norm())).collect();
    #[derive(Serialize)]
    struct Report {
        width: f64,
        transmission_decay: Option<ssahm::asymptotics::DecayFit>,
        kappa: Option<ssahm::asymptotics::KappaFit>,
        notes: Vec<String>,
    }
    let mut notes = Vec::new();
    let transmission_decay = fit_exponential_decay(&mags, (DEFAULT_MIN_N, hi))
        .map_err(|e| notes.push(format!("decay fit: {e}")))
        .ok();
    let usable: Vec<_> = entries.iter().filter(|e| e.pt.z.re >= DEFAULT_MIN_N).cloned().collect();
    let kappa = recover_kappa_minus(&usable)
        .map_err(|e| notes.push(format!("κ₋ fit: {e}")))
        .ok();
    sink.json(
        "asym.json",
        &Report {
            width: s.total_width(),
            transmission_decay,
            kappa,
            notes,
        },
    )
}

pub fn uniq(a: &mut UniqArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let pa = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let pb = second_profile(&pa, &a.other, &mut a.other_params, &a.other_table, &mut a.shift)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    if lambda == 0.0 {
        return Err(config_err("field `lambda`: must be nonzero for uniqueness experiments"));
    }
    let n_max = *a.n_max.get_or_insert(20);
    if n_max == 0 {
        return Err(config_err("field `n_max`: must be at least 1"));
    }
    let side = match a.side.get_or_insert_with(|| "left".into()).as_str() {
        "left" => Side::Left,
        "right" => Side::Right,
        other => return Err(config_err(format!("field `side`: '{other}' is not left or right"))),
    };
    let r = uniqueness_experiment_with(&pa, &pb, lambda, n_max, side, opts).map_err(numerical)?;
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|s| vec![num(s.n), num(s.ln_abs_difference), s.kept.to_string()])
        .collect();
    sink.table("uniq.csv", output::UNIQ_SCHEMA, &rows)?;
    sink.json("uniq.json", &r)
}

pub fn transmission(a: &mut TransmissionArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let pa = unit_profile(&mut a.profile, &mut a.params, &a.table)?;
    let pb = second_profile(&pa, &a.other, &mut a.other_params, &a.other_table, &mut a.shift)?;
    let lambda = finite("lambda", *a.lambda.get_or_insert(1.0))?;
    if lambda == 0.0 {
        return Err(config_err("field `lambda`: must be nonzero for transmission experiments"));
    }
    let n_max = *a.n_max.get_or_insert(16);
    if n_max == 0 {
        return Err(config_err("field `n_max`: must be at least 1"));
    }
    let l_agreement = *a.l_agreement.get_or_insert(ssahm::inverse::DEFAULT_L_AGREEMENT);
    let r = transmission_experiment_with(&pa, &pb, lambda, n_max, l_agreement, opts).map_err(numerical)?;
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|s| {
            vec![
                num(s.n),
                num(s.abs_t_a),
                num(s.abs_t_b),
                num(s.abs_t_difference),
                num(s.abs_l_difference),
                num(s.sigma),
            ]
        })
        .collect();
    sink.table("transmission.csv", output::TRANSMISSION_SCHEMA, &rows)?;
    sink.json("transmission.json", &r)
}

pub fn bh(a: &mut BhArgs, opts: ScatteringOptions, sink: &mut Sink) -> Result<(), AppError> {
    let mass = positive("M", *a.mass.get_or_insert(1.0))?;
    let charge = finite("Q", *a.charge.get_or_insert(0.5))?;
    let lambda = positive("Lambda", *a.cosmological.get_or_insert(0.05))?;
    let params = RNdSParams::new(mass, charge, lambda);
    let h = find_horizons(params).map_err(|e| config_err(format!("fields `M`, `Q`, `Lambda`: {e}")))?;
    let rows: Vec<Vec<String>> = h
        .roots()
        .iter()
        .map(|(name, r, kappa)| vec![name.to_string(), num(*r), num(*kappa)])
        .collect();
    sink.table("horizons.csv", output::BH_SCHEMA, &rows)?;
    if !*a.recover.get_or_insert(false) {
        return Ok(());
    }
    let p = bh_profile(params, a.c).map_err(numerical)?;
    let s = Scatterer::with_options(&p, opts).map_err(numerical)?;
    // Both tails inside the bulk, where the profile is the exact one.
    let window = bulk_fit_window(&p);
    let fit = fit_asymptotic_constants(&p, window).map_err(numerical)?;
    let t = fit.tails;
    let rec = recover_parameters(s.total_width(), t.kappa_minus, t.kappa_plus, t.a_minus, t.a_plus)
        .map_err(numerical)?;
    let rel = |truth: f64, got: f64| ((got - truth) / truth).abs();
    let rows = vec![
        vec!["M".into(), num(mass), num(rec.params.mass), num(rel(mass, rec.params.mass))],
        vec!["Q".into(), num(charge), num(rec.params.charge), num(rel(charge, rec.params.charge))],
        vec![
            "Lambda".into(),
            num(lambda),
            num(rec.params.lambda),
            num(rel(lambda, rec.params.lambda)),
        ],
    ];
    sink.table("recovery.csv", output::RECOVERY_SCHEMA, &rows)?;
    #[derive(Serialize)]
    struct Report {
        width: f64,
        fit_window: (f64, f64),
        fitted: ssahm::profile::AsymptoticFit,
        recovery: ssahm::blackhole::Recovery,
    }
    sink.json(
        "bh.json",
        &Report {
            width: s.total_width(),
            fit_window: window,
            fitted: fit,
            recovery: rec,
        },
    )
}
