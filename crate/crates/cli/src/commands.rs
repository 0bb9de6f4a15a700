use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use majorant_lab::entropy::{
    dual_sudakov_rhs, greedy_packing_cover, levy_mean, sample_unit_ball, volume_bound_check, NormKind, NormOracle,
};
use majorant_lab::expsum::{as_even_exponent, norm_auto, CoefficientSeq, DomainTag, FrequencySet, GridSpec};
use majorant_lab::extremal::{ascend, sign_pattern_search, PhaseAlphabet, SearchParams};
use majorant_lab::probtools::{
    centered_square_ratio_empirical, centered_square_ratio_exact, ldt_empirical, mgf_inequality_check,
    moment_bound_check, salem_zygmund_check, sz2_perturbed_ap,
};
use majorant_lab::scaling::{run_experiment, ExperimentConfig, Family, Statistic, CROSSOVER_GAP};
use majorant_lab::setgen::{read_set, write_set, ModelKind, RandomSetModel, Seed};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::output::Report;
use crate::*;

fn config_of<T: Serialize>(command: &str, args: &T) -> Map<String, Value> {
    let mut map = match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    map.retain(|_, v| !v.is_null());
    map.insert("command".into(), command.into());
    map
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required for this model"))
}

pub fn set_model(m: &ModelArgs) -> Result<RandomSetModel> {
    use ModelName::*;
    let name = m.model.context("--model is required when no --set file is given")?;
    let model = match name {
        Bernoulli => {
            let n = need(m.n, "n")?;
            match (m.tau, m.delta) {
                (Some(tau), None) => RandomSetModel::bernoulli(n, tau)?,
                (None, Some(delta)) => RandomSetModel::bernoulli_delta(n, delta)?,
                _ => bail!("bernoulli needs exactly one of --tau and --delta"),
            }
        }
        Critical => bail!("--model critical is only available for scaling"),
        Doubling => RandomSetModel::new(need(m.n, "n")?, ModelKind::Doubling { k: need(m.k, "k")? })?,
        PowerSelector => RandomSetModel::new(
            need(m.n, "n")?,
            ModelKind::PowerSelector {
                exponent: need(m.exponent, "exponent")?,
                tau: need(m.tau, "tau")?,
            },
        )?,
        PerturbedAp => {
            let (s, a, len) = (need(m.s, "s")?, need(m.a, "a")?, need(m.len, "len")?);
            let b = m.b.unwrap_or(s + 1);
            RandomSetModel::new(m.n.unwrap_or(a * len), ModelKind::PerturbedAp { b, a, len, s })?
        }
        Squares => RandomSetModel::new(need(m.n, "n")?, ModelKind::Squares)?,
        Ap => {
            let (b, a) = (m.b.unwrap_or(1), m.a.unwrap_or(1));
            let len = match (m.len, m.n) {
                (Some(len), _) => len,
                (None, Some(n)) if n >= b => (n - b) / a + 1,
                _ => bail!("ap needs --len or --n"),
            };
            let n = m.n.unwrap_or(b + a * len.saturating_sub(1));
            RandomSetModel::new(n, ModelKind::Ap { b, a, len })?
        }
        Ap2d => {
            let (b, a1) = (m.b.unwrap_or(1), m.a1.unwrap_or(1));
            let (len1, a2, len2) = (need(m.len1, "len1")?, need(m.a2, "a2")?, need(m.len2, "len2")?);
            let n = m.n.unwrap_or(b + a1 * len1.saturating_sub(1) + a2 * len2.saturating_sub(1));
            RandomSetModel::new(n, ModelKind::Ap2d { b, a1, len1, a2, len2 })?
        }
        Full => {
            let n = need(m.n, "n")?;
            RandomSetModel::new(n, ModelKind::Ap { b: 1, a: 1, len: n })?
        }
    };
    Ok(model)
}

fn load_set(file: Option<&Path>, model: &ModelArgs, seed: u64) -> Result<(FrequencySet, String)> {
    match file {
        Some(path) => {
            let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let (set, _) = read_set(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
            Ok((set, path.display().to_string()))
        }
        None => {
            let m = set_model(model)?;
            Ok((m.sample(Seed::new(seed))?, m.tag()))
        }
    }
}

pub fn gen(a: &GenArgs, out: Option<&Path>) -> Result<()> {
    let model = set_model(&a.model)?;
    let seed = Seed::new(a.seed);
    let set = model.sample(seed)?;
    match out {
        Some(path) => {
            let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_set(std::io::BufWriter::new(f), &set, &model.tag(), seed)?;
            eprintln!("wrote {} elements of [1, {}] to {}", set.len(), set.ambient_size(), path.display());
        }
        None => write_set(std::io::stdout().lock(), &set, &model.tag(), seed)?,
    }
    Ok(())
}

pub fn norm(a: &NormArgs) -> Result<Report> {
    let (set, source) = load_set(a.set.as_deref(), &a.model, a.seed)?;
    let grid = GridSpec::for_ambient(set.ambient_size(), a.oversample)?;
    let v = norm_auto(&CoefficientSeq::<f64>::indicator(set.clone()), a.p, &grid)?;
    let method = format!("{:?}", v.method).to_lowercase();
    Ok(Report {
        command: "norm",
        seed: a.set.is_none().then_some(a.seed),
        config: config_of("norm", a),
        result: json!({
            "source": source,
            "p": a.p,
            "norm": v.value,
            "method": method,
            "grid_points": v.points,
            "set_size": set.len(),
            "ambient": set.ambient_size(),
        }),
        header: vec!["p", "norm", "method", "grid_points", "set_size", "ambient"],
        rows: vec![vec![
            a.p.to_string(),
            v.value.to_string(),
            method.clone(),
            v.points.to_string(),
            set.len().to_string(),
            set.ambient_size().to_string(),
        ]],
        failures: vec![],
        summary: format!("‖D_A‖_{} = {} ({method}, grid {})", a.p, v.value, v.points),
    })
}

pub fn extremal(a: &ExtremalArgs) -> Result<Report> {
    let (set, source) = load_set(a.set.as_deref(), &a.model, a.seed)?;
    let grid = GridSpec::for_ambient(set.ambient_size(), a.oversample)?;
    let params = SearchParams {
        restarts: a.restarts,
        max_iter: a.max_iter,
        tol: a.tol,
        seed: Seed::new(a.seed),
    };
    let domain = match a.domain {
        Ball::Linf => DomainTag::LinfBall,
        Ball::L2 => DomainTag::L2Ball,
    };
    let res = ascend(&set, a.p, domain, &grid, &params)?;

    let mut failures = Vec::new();
    let scale = res.traces.iter().flatten().fold(1.0f64, |m, &v| m.max(v));
    if res.worst_decrease() > 1e-9 * scale {
        failures.push(format!("objective decreased by {:e}", res.worst_decrease()));
    }
    if domain == DomainTag::LinfBall && as_even_exponent(a.p).is_some() && !(1.0 - 1e-9..=1.0 + 1e-8).contains(&res.ratio) {
        failures.push(format!("even p = {} but ratio = {}", a.p, res.ratio));
    }
    let mut sign = Value::Null;
    if let Some(alpha) = a.sign_search {
        let alphabet = match alpha {
            Alphabet::Real => PhaseAlphabet::Real,
            Alphabet::Quarter => PhaseAlphabet::Quarter,
        };
        let s = sign_pattern_search::<f64>(&set, a.p, &grid, alphabet)?;
        if res.best_norm < s.best_norm * (1.0 - 1e-6) {
            failures.push(format!("ascent {} below phase search {}", res.best_norm, s.best_norm));
        }
        sign = json!({ "best_norm": s.best_norm, "patterns": s.patterns });
    }

    let rows = res
        .traces
        .iter()
        .enumerate()
        .map(|(i, tr)| {
            vec![
                i.to_string(),
                tr.len().saturating_sub(1).to_string(),
                tr.last().copied().unwrap_or(0.0).to_string(),
            ]
        })
        .collect();
    let coeffs: Vec<[f64; 2]> = res.best_coeffs.values().iter().map(|z| [z.re, z.im]).collect();
    Ok(Report {
        command: "extremal",
        seed: Some(a.seed),
        config: config_of("extremal", a),
        result: json!({
            "source": source,
            "p": a.p,
            "ratio": res.ratio,
            "best_norm": res.best_norm,
            "gamma_estimate": res.gamma_estimate(set.ambient_size()),
            "iterations_used": res.iterations_used,
            "best_restart": res.best_restart,
            "converged": res.converged,
            "worst_decrease": res.worst_decrease(),
            "frequencies": set.elems(),
            "coefficients": coeffs,
            "sign_search": sign,
        }),
        header: vec!["restart", "iterations", "objective"],
        rows,
        failures,
        summary: format!(
            "ratio {} (best norm {}, restart {}, {} iterations{})",
            res.ratio,
            res.best_norm,
            res.best_restart,
            res.iterations_used,
            if res.converged { "" } else { ", not converged" }
        ),
    })
}

/// `lo:hi` doubles from `lo` to `hi`; otherwise a comma list.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once(':') {
        let lo: usize = lo.trim().parse().context("bad lower size")?;
        let hi: usize = hi.trim().parse().context("bad upper size")?;
        if lo == 0 || hi < lo {
            bail!("size range {spec:?} is empty");
        }
        let mut v = vec![];
        let mut n = lo;
        while n <= hi {
            v.push(n);
            n *= 2;
        }
        return Ok(v);
    }
    spec.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad size {t:?}")))
        .collect()
}

fn parse_floats(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?}")))
        .collect()
}

pub fn scaling(a: &ScalingArgs) -> Result<Report> {
    use ModelName::*;
    let m = &a.model;
    let family = match m.model.context("--model is required")? {
        Bernoulli => match (m.tau, m.delta) {
            (Some(tau), None) => Family::BernoulliTau { tau },
            (None, Some(delta)) => Family::Bernoulli { delta },
            _ => bail!("bernoulli needs exactly one of --tau and --delta"),
        },
        Critical => Family::BernoulliCritical,
        Doubling => Family::Doubling { k: need(m.k, "k")? },
        PowerSelector => Family::PowerSelector {
            exponent: need(m.exponent, "exponent")?,
            tau: need(m.tau, "tau")?,
        },
        PerturbedAp => Family::PerturbedAp {
            beta: a.beta,
            a_factor: a.a_factor,
        },
        Ap => Family::Ap { step: m.a.unwrap_or(1) },
        Squares => Family::Squares,
        Full => Family::Full,
        Ap2d => bail!("ap2d has no size sweep; use norm"),
    };
    let statistic = match a.statistic {
        StatName::DirichletNormP => Statistic::DirichletNormP,
        StatName::MajorantRatio => Statistic::MajorantRatio,
        StatName::KpConstant => Statistic::KpConstant,
        StatName::StarRatio => Statistic::StarRatio,
    };
    let mut cfg = ExperimentConfig::new(family, parse_sizes(&a.sizes)?, a.p, a.trials, Seed::new(a.seed), statistic);
    cfg.oversample = a.oversample;
    cfg.fit_min_size = a.fit_min_size;
    if a.restarts.is_some() || a.max_iter.is_some() {
        let d = SearchParams::default();
        cfg.search = Some(SearchParams {
            restarts: a.restarts.unwrap_or(d.restarts),
            max_iter: a.max_iter.unwrap_or(d.max_iter),
            ..d
        });
    }
    let report = run_experiment(&cfg)?;

    let mut failures = Vec::new();
    for r in report.rows.iter().filter(|r| !r.valid) {
        failures.push(format!("size {}: {} of {} draws excluded", r.size, r.excluded, cfg.trials));
    }
    if let Some(pred) = report.prediction {
        if pred.gap() == 0.0 || pred.gap() >= CROSSOVER_GAP {
            match report.slope() {
                Some(s) if (s - pred.exponent).abs() <= a.slope_tol => {}
                Some(s) => failures.push(format!("slope {s:.4} vs predicted {:.4} (tolerance {})", pred.exponent, a.slope_tol)),
                None => failures.push(format!("fewer than two valid sizes ≥ {} to fit", cfg.fit_min_size)),
            }
        }
    }
    if statistic == Statistic::MajorantRatio && as_even_exponent(a.p).is_some() {
        for r in &report.rows {
            if r.trials > 0 && (r.min < 1.0 - 1e-9 || r.max > 1.0 + 1e-8) {
                failures.push(format!("size {}: even-p ratio outside [1−1e−9, 1+1e−8]", r.size));
            }
        }
    }
    let rows = report
        .rows
        .iter()
        .map(|r| vec![r.size.to_string(), r.mean.to_string(), r.std.to_string(), r.trials.to_string(), r.excluded.to_string()])
        .collect();
    let summary = match (report.slope(), report.predicted()) {
        (Some(s), Some(p)) => format!("fitted slope {s:.4}, predicted {p:.4}"),
        (Some(s), None) => format!("fitted slope {s:.4}"),
        _ => "no fit".to_string(),
    };
    Ok(Report {
        command: "scaling",
        seed: Some(a.seed),
        config: config_of("scaling", a),
        result: report.summary_json(),
        header: vec!["size", "stat_mean", "stat_std", "trials", "excluded"],
        rows,
        failures,
        summary,
    })
}

pub fn probcheck(a: &ProbArgs) -> Result<Report> {
    let seed = Seed::new(a.seed);
    let mut failures = Vec::new();
    let (result, header, rows, summary): (Value, Vec<&'static str>, Vec<Vec<String>>, String) = match a.check {
        Check::Ldt => {
            let n = a.n.unwrap_or(1000);
            let tau = a.tau.unwrap_or(0.3);
            let ones = vec![Complex64::new(1.0, 0.0); n];
            let r = ldt_empirical(&ones, tau, &parse_floats(&a.lambdas)?, a.trials.unwrap_or(100_000), seed)?;
            for i in r.violations() {
                failures.push(format!("λ = {}: frequency {} above bound {}", r.lambda_grid[i], r.exceed_freq[i], r.bound[i]));
            }
            let rows = (0..r.lambda_grid.len())
                .map(|i| {
                    vec![
                        r.lambda_grid[i].to_string(),
                        r.exceed_freq[i].to_string(),
                        r.bound[i].to_string(),
                        r.condition_ok[i].to_string(),
                    ]
                })
                .collect();
            let s = format!("ldt: {} λ values, {} violations", r.lambda_grid.len(), r.violations().len());
            (serde_json::to_value(&r)?, vec!["lambda", "exceed_freq", "bound", "condition_ok"], rows, s)
        }
        Check::Mgf => {
            let taus: Vec<f64> = match a.tau {
                Some(t) => vec![t],
                None => (1..=99).map(|i| i as f64 / 100.0).collect(),
            };
            let xs: Vec<f64> = (-1000..=1000).map(|i| i as f64 / 1000.0).collect();
            let r = mgf_inequality_check(&taus, &xs)?;
            for g in r.grid_failures.iter().take(10) {
                failures.push(format!("τ = {}, x = {}: lhs {} > rhs {}", g.tau, g.x, g.lhs, g.rhs));
            }
            let rows = r
                .probes
                .iter()
                .map(|p| vec![p.tau.to_string(), p.x.to_string(), p.lhs.to_string(), p.rhs.to_string(), p.holds.to_string()])
                .collect();
            let held = r.probes.iter().filter(|p| p.holds).count();
            let s = format!(
                "mgf: {} grid points {}; probe x = τ^(-1/2) holds at {held} of {} τ values",
                r.points_checked,
                if r.grid_ok() { "pass" } else { "FAIL" },
                r.probes.len()
            );
            (serde_json::to_value(&r)?, vec!["tau", "x", "lhs", "rhs", "holds"], rows, s)
        }
        Check::Moments => {
            let taus = match a.tau {
                Some(t) => vec![t],
                None => vec![0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99],
            };
            let mut rows = Vec::new();
            let mut worst = f64::NEG_INFINITY;
            for n in 1..=a.n.unwrap_or(100) as u64 {
                for q in 1..=a.q {
                    for &tau in &taus {
                        let m = moment_bound_check(n, tau, q)?;
                        worst = worst.max(m.log_exact - m.log_bound);
                        if !m.ok {
                            failures.push(format!("n = {n}, τ = {tau}, q = {q}: {} > {}", m.exact, m.bound));
                        }
                        rows.push(vec![n.to_string(), tau.to_string(), q.to_string(), m.exact.to_string(), m.bound.to_string(), m.ok.to_string()]);
                    }
                }
            }
            let s = format!("moments: {} cases, max log(exact/bound) = {worst:.4}", rows.len());
            let v = json!({ "cases": rows.len(), "max_log_ratio": worst });
            (v, vec!["n", "tau", "q", "exact", "bound", "ok"], rows, s)
        }
        Check::Salem => {
            let n = a.n.unwrap_or(4096);
            let tau = a.tau.unwrap_or(0.5);
            let ones = vec![Complex64::new(1.0, 0.0); n];
            let r = salem_zygmund_check(n, tau, &ones, a.trials.unwrap_or(1000), seed)?;
            if r.violations > 0 {
                failures.push(format!("{} of {} trials above the threshold", r.violations, r.trials));
            }
            let row = vec![n.to_string(), tau.to_string(), r.trials.to_string(), r.violations.to_string(), r.max_normalized.to_string()];
            let s = match &r.skipped {
                Some(why) => format!("salem-zygmund skipped: {why}"),
                None => format!("salem-zygmund: {} violations, max sup/(σ√log N) = {:.3}", r.violations, r.max_normalized),
            };
            (serde_json::to_value(&r)?, vec!["n", "tau", "trials", "violations", "max_normalized"], vec![row], s)
        }
        Check::Sz2 => {
            let r = sz2_perturbed_ap(a.len, a.s, a.a, a.trials.unwrap_or(200), seed)?;
            let row = vec![a.len.to_string(), a.s.to_string(), r.trials.to_string(), r.normalized_max.to_string(), r.normalized_mean.to_string()];
            let s = format!("sz2: measured constant {:.3} (mean {:.3})", r.normalized_max, r.normalized_mean);
            (serde_json::to_value(&r)?, vec!["len", "s", "trials", "normalized_max", "normalized_mean"], vec![row], s)
        }
        Check::Centered => {
            let taus = match a.tau {
                Some(t) => vec![t],
                None => vec![0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95],
            };
            let mut rows = Vec::new();
            let mut out = Vec::new();
            for (i, &tau) in taus.iter().enumerate() {
                let e = centered_square_ratio_empirical(tau, a.trials.unwrap_or(200_000), seed.child(i as u64))?;
                let x = centered_square_ratio_exact(tau);
                if (e - x).abs() > 0.02 {
                    failures.push(format!("τ = {tau}: empirical {e} vs exact {x}"));
                }
                rows.push(vec![tau.to_string(), x.to_string(), e.to_string()]);
                out.push(json!({ "tau": tau, "exact": x, "empirical": e }));
            }
            let s = format!("centered square: {} τ values", taus.len());
            (Value::Array(out), vec!["tau", "exact", "empirical"], rows, s)
        }
    };
    Ok(Report {
        command: "probcheck",
        seed: Some(a.seed),
        config: config_of("probcheck", a),
        result,
        header,
        rows,
        failures,
        summary,
    })
}

pub fn entropy(a: &EntropyArgs) -> Result<Report> {
    let oracle = match a.norm {
        NormName::L1 => NormOracle::l1(a.dim)?,
        NormName::Linf => NormOracle::linf(a.dim)?,
        NormName::L2 => NormOracle::l2(a.dim)?,
        NormName::TrigLq => NormOracle::trig_lq(a.dim, a.q)?,
    };
    let seed = Seed::new(a.seed);
    let mut failures = Vec::new();
    let (result, header, rows, summary): (Value, Vec<&'static str>, Vec<Vec<String>>, String) = match a.task {
        EntropyTask::Levy => {
            let e = levy_mean(&oracle, a.samples, seed)?;
            let rhs = dual_sudakov_rhs(e.mean, a.dim, a.t, a.constant)?;
            let exact = match oracle.kind() {
                NormKind::L1 => Some(e.alpha_n * 2.0 * a.dim as f64 / (2.0 * std::f64::consts::PI).sqrt()),
                NormKind::L2 => Some(1.0),
                _ => None,
            };
            if let Some(x) = exact {
                if (e.mean - x).abs() > 4.0 * e.std_error + 1e-12 {
                    failures.push(format!("Lévy mean {} vs closed form {x} (4 SE = {})", e.mean, 4.0 * e.std_error));
                }
            }
            let row = vec![oracle.name(), a.dim.to_string(), e.mean.to_string(), e.std_error.to_string(), e.alpha_n.to_string(), rhs.to_string()];
            let s = format!("M_X = {:.6} ± {:.2e} ({}, n = {})", e.mean, e.std_error, oracle.name(), a.dim);
            let v = json!({ "estimate": e, "closed_form": exact, "log_entropy_bound": rhs, "t": a.t, "constant": a.constant });
            (v, vec!["norm", "dim", "mean", "std_error", "alpha_n", "log_entropy_bound"], vec![row], s)
        }
        EntropyTask::Chain => {
            let mut rows = Vec::new();
            for i in 0..a.instances {
                let pts = sample_unit_ball(&oracle, a.points, seed.child(i as u64));
                let at = greedy_packing_cover(&pts, &oracle, a.t)?;
                let at2 = greedy_packing_cover(&pts, &oracle, 2.0 * a.t)?;
                let ok = at.packing_size >= at.greedy_cover_size && at.greedy_cover_size >= at2.packing_size;
                if !ok {
                    failures.push(format!(
                        "instance {i}: D(t) = {}, cover(t) = {}, D(2t) = {}",
                        at.packing_size, at.greedy_cover_size, at2.packing_size
                    ));
                }
                rows.push(vec![
                    i.to_string(),
                    at.packing_size.to_string(),
                    at.greedy_cover_size.to_string(),
                    at2.packing_size.to_string(),
                    ok.to_string(),
                ]);
            }
            let s = format!("chain D(t) ≥ cover(t) ≥ D(2t): {} of {} instances hold", a.instances - failures.len(), a.instances);
            let v = json!({ "instances": a.instances, "points": a.points, "t": a.t, "violations": failures.len() });
            (v, vec!["instance", "packing_t", "cover_t", "packing_2t", "ok"], rows, s)
        }
        EntropyTask::Volume => {
            let r = volume_bound_check(&oracle, a.t, a.samples, seed)?;
            if !r.ok {
                failures.push(format!("packing {} exceeds (4/t)^n = {}", r.measured_packing, r.bound));
            }
            let row = vec![oracle.name(), a.dim.to_string(), a.t.to_string(), r.measured_packing.to_string(), r.bound.to_string()];
            let s = format!("packing {} ≤ {:.3}", r.measured_packing, r.bound);
            (serde_json::to_value(r)?, vec!["norm", "dim", "t", "packing", "bound"], vec![row], s)
        }
    };
    Ok(Report {
        command: "entropy",
        seed: Some(a.seed),
        config: config_of("entropy", a),
        result,
        header,
        rows,
        failures,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_specs() {
        assert_eq!(parse_sizes("256:2048").unwrap(), vec![256, 512, 1024, 2048]);
        assert_eq!(parse_sizes("10, 20,40").unwrap(), vec![10, 20, 40]);
        assert!(parse_sizes("8:4").is_err());
        assert!(parse_sizes("a,b").is_err());
    }
}
