//! Experiments behind the CLI subcommands. Each builds a [`Report`].

use crate::calculus::StepFunction1D;
use crate::error::{Error, Result};
use crate::geometry::{dyadic_cover, validate_whitney, whitney, Cube, OpenSet};
use crate::marcinkiewicz::{adaptive_level_sum, Level};
use crate::maximal::{maximal_lp_power, MaximalProfile};
use crate::singular::{cf_ratio, HilbertMode};
use crate::sparse::{cz_sparse, sparse_form, verify_sparse};
use crate::weights::{
    cpsi_certify, dilated_menu, hole_ratio, km_adversarial_menu, tail_functional, CertifyMode, PsiFunction, Weight,
};

use super::corpus::{cf_corpus, random_menu, random_open_set_1d, random_step, rng};
use super::{Cell, ExperimentConfig, Report, RowBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Km,
    Tail,
    Certify,
    Whitney,
    Sparse,
    Marcinkiewicz,
    Cf,
    Maximal,
    Suite,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::Km => "km",
            Command::Tail => "tail",
            Command::Certify => "certify",
            Command::Whitney => "whitney",
            Command::Sparse => "sparse",
            Command::Marcinkiewicz => "marcinkiewicz",
            Command::Cf => "cf",
            Command::Maximal => "maximal",
            Command::Suite => "suite",
        }
    }
}

pub fn execute(cmd: Command, config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    if cmd == Command::Suite {
        return super::run_suite(config);
    }
    let mut report = Report::new(config);
    let w = config.weight.build()?;
    match cmd {
        Command::Km => km(config, &w, &mut report)?,
        Command::Tail => tail(config, &w, &mut report)?,
        Command::Certify => certify(config, &w, &mut report)?,
        Command::Whitney => whitney_sets(config, &mut report)?,
        Command::Sparse => sparse(config, &mut report)?,
        Command::Marcinkiewicz => marcinkiewicz(config, &w, &mut report)?,
        Command::Cf => cf(config, &w, &mut report)?,
        Command::Maximal => maximal(config, &w, &mut report)?,
        Command::Suite => unreachable!(),
    }
    report.summary.insert("rows".into(), Cell::from(report.rows.len()));
    Ok(report)
}

fn require_1d(w: &Weight) -> Result<()> {
    if w.dim() != 1 {
        return Err(Error::Config(format!("this subcommand needs a 1D weight, got {}", w.label())));
    }
    Ok(())
}

/// Configured functions, or a seeded corpus of `menu.count` functions.
fn functions(config: &ExperimentConfig) -> Result<Vec<StepFunction1D>> {
    if !config.functions.is_empty() {
        return Ok(config.functions.clone());
    }
    let mut r = rng(config.seed);
    (0..config.menu.count).map(|_| random_step(&mut r, 4, -4.0, 4.0)).collect()
}

fn km(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    let Weight::Km1d(k) = w else {
        return Err(Error::Config("km needs a one-dimensional KM weight".into()));
    };
    let psi = config.psi.build();
    for i in -config.k_max..=config.k_max {
        let Some(hole) = k.hole(i) else { continue };
        let t = tail_functional(&hole, w, &psi)?;
        let r = hole_ratio(&hole, w, &psi)?;
        let (_, ell, h) = k.holes().iter().copied().find(|x| x.0 == i).unwrap_or((i, f64::NAN, f64::NAN));
        report.rows.push(
            RowBuilder::new()
                .set("k", i)
                .set("ell", ell)
                .set("height", h)
                .cert("tail", t)
                .set("hole_ratio", r.as_f64())
                .build(),
        );
    }
    Ok(())
}

fn tail(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    require_1d(w)?;
    let psi = config.psi.build();
    let menu = random_menu(&mut rng(config.seed), config.menu.count, config.menu.scale_min, config.menu.scale_max)?;
    for q in menu {
        let (a, b) = q.endpoints();
        let row = RowBuilder::new().set("a", a).set("b", b);
        let row = match tail_functional(&q, w, &psi) {
            Ok(t) => row.cert("tail", t).set("hole_ratio", hole_ratio(&q, w, &psi)?.as_f64()),
            Err(Error::Infinite(_)) => row.set("tail", f64::INFINITY).set("tail_err", 0.0).set("hole_ratio", f64::NAN),
            Err(e) => return Err(e),
        };
        report.rows.push(row.build());
    }
    Ok(())
}

fn certify(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    require_1d(w)?;
    let psi = config.psi.build();
    let menu = match w {
        Weight::Km1d(_) => {
            let ks: Vec<i64> = (-config.k_max..=config.k_max).collect();
            km_adversarial_menu(w, &ks)?
        }
        _ => dilated_menu(&Cube::interval(0.0, 1.0)?, 12)?,
    };
    for (label, mode) in [("all", CertifyMode::All), ("dyadic", CertifyMode::Dyadic), ("dilated3", CertifyMode::Dilated { gamma: 3.0 })] {
        let res = cpsi_certify(w, &psi, config.eps, &menu, mode)?;
        report.rows.push(
            RowBuilder::new()
                .set("mode", label)
                .set("c_star", res.c_star)
                .set("argmax", res.argmax.map_or(-1, |i| i as i64))
                .set("pairs", menu.len())
                .build(),
        );
    }
    Ok(())
}

fn whitney_sets(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sets: Vec<OpenSet> = if config.open_sets.is_empty() {
        let mut r = rng(config.seed);
        (0..config.menu.count).map(|_| random_open_set_1d(&mut r)).collect::<Result<_>>()?
    } else {
        config.open_sets.iter().map(|s| OpenSet::intervals(&s.iter().map(|[a, b]| (*a, *b)).collect::<Vec<_>>())).collect::<Result<_>>()?
    };
    for (i, omega) in sets.iter().enumerate() {
        let omega = omega.clone();
        let cubes = whitney(&omega, config.whitney_r)?;
        let rep = validate_whitney(&omega, config.whitney_r, &cubes)?;
        report.rows.push(
            RowBuilder::new()
                .set("set", i)
                .set("measure", omega.measure())
                .set("cubes", rep.cubes)
                .set("min_ratio", rep.min_ratio)
                .set("max_ratio", rep.max_ratio)
                .set("coverage_error", rep.coverage_error)
                .set("max_overlap", rep.max_overlap)
                .set("passed", rep.passes(1e-12))
                .build(),
        );
    }
    Ok(())
}

fn sparse(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    for (i, f) in functions(config)?.iter().enumerate() {
        let Some((a, b)) = f.support() else { continue };
        let s = cz_sparse(f, &dyadic_cover(&Cube::interval(a, b)?), 2.0)?;
        let chk = verify_sparse(&s, 0.5)?;
        let form = sparse_form(&s, f, f, config.s, config.theta)?;
        report.rows.push(
            RowBuilder::new()
                .set("function", i)
                .set("cubes", s.len())
                .set("worst_ratio", chk.worst_ratio)
                .set("disjoint", chk.disjoint)
                .set("sparse", chk.ok)
                .set("form", form)
                .build(),
        );
    }
    Ok(())
}

fn marcinkiewicz(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    require_1d(w)?;
    let f = functions(config)?.into_iter().next().unwrap_or(StepFunction1D::indicator(0.0, 1.0, 1.0)?);
    let (p, q) = (config.p, config.q);
    let psi = PsiFunction::Power(q);
    let term = |l: &Level| {
        let s: crate::calculus::CertifiedValue = l.cubes.iter().map(|c| tail_functional(c, w, &psi)).sum::<Result<_>>()?;
        Ok(s.scale((l.k as f64 * p).exp2()))
    };
    let (dec, sum) = adaptive_level_sum(&f, config.whitney_r, &term)?;
    for (l, (_, t)) in dec.levels.iter().zip(&sum.terms) {
        report.rows.push(
            RowBuilder::new()
                .set("k", l.k as i64)
                .set("omega_measure", l.omega.measure())
                .set("cubes", l.cubes.len())
                .cert("integral", *t)
                .build(),
        );
    }
    report.summary.insert("mpq".into(), Cell::from(sum.value.value));
    report.summary.insert("mpq_err".into(), Cell::from(sum.value.error_bound));
    Ok(())
}

fn cf(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    require_1d(w)?;
    let fs = if config.functions.is_empty() { cf_corpus() } else { config.functions.clone() };
    for (i, f) in fs.iter().enumerate() {
        let row = cf_ratio(f, w, config.p, HilbertMode::Pv)?;
        report.rows.push(
            RowBuilder::new().set("function", i).cert("h_norm", row.h_norm).cert("m_norm", row.m_norm).set("ratio", row.ratio).build(),
        );
    }
    Ok(())
}

const MAXIMAL_GRID: usize = 33;

fn maximal(config: &ExperimentConfig, w: &Weight, report: &mut Report) -> Result<()> {
    require_1d(w)?;
    for (i, f) in functions(config)?.iter().enumerate() {
        let prof = MaximalProfile::new(f)?;
        let points = if config.points.is_empty() {
            let (a, b) = f.support().unwrap_or((0.0, 1.0));
            let (lo, hi) = (a - 1.0, b + 1.0);
            (0..MAXIMAL_GRID).map(|j| lo + (hi - lo) * j as f64 / (MAXIMAL_GRID - 1) as f64).collect()
        } else {
            config.points.clone()
        };
        for x in points {
            report.rows.push(RowBuilder::new().set("function", i).set("x", x).set("f", f.eval(x)).set("value", prof.eval(x)).build());
        }
        report.summary.insert(format!("lp_power_{i}"), Cell::from(maximal_lp_power(f, config.p, w)?.value));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{report_json, WeightSpec};

    fn small() -> ExperimentConfig {
        ExperimentConfig { menu: super::super::MenuSpec { count: 3, ..Default::default() }, k_max: 3, ..Default::default() }
    }

    #[test]
    fn every_command_runs() {
        for cmd in [Command::Km, Command::Tail, Command::Certify, Command::Whitney, Command::Sparse, Command::Marcinkiewicz, Command::Maximal] {
            let r = execute(cmd, &small()).unwrap();
            assert!(!r.rows.is_empty(), "{}", cmd.label());
        }
        let mut c = small();
        c.functions = vec![StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap()];
        assert_eq!(execute(Command::Cf, &c).unwrap().rows.len(), 1);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = report_json(&execute(Command::Tail, &small()).unwrap()).unwrap();
        let b = report_json(&execute(Command::Tail, &small()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn km_needs_km_weight() {
        let c = ExperimentConfig { weight: WeightSpec::Constant { value: 1.0 }, ..small() };
        assert!(matches!(execute(Command::Km, &c), Err(Error::Config(_))));
    }

    #[test]
    fn configured_sets_and_points() {
        let c = ExperimentConfig { open_sets: vec![vec![[0.0, 1.0], [3.0, 5.0]]], ..small() };
        let r = execute(Command::Whitney, &c).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0]["passed"], Cell::Bool(true));
        let c = ExperimentConfig {
            functions: vec![StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap()],
            points: vec![0.5, 2.0],
            weight: WeightSpec::Constant { value: 1.0 },
            ..small()
        };
        let r = execute(Command::Maximal, &c).unwrap();
        assert_eq!(r.rows[1]["value"], Cell::Num(0.5));
        let bad = ExperimentConfig { open_sets: vec![vec![[1.0, 0.0]]], ..small() };
        assert!(matches!(execute(Command::Whitney, &bad), Err(Error::Config(_))));
    }
}
