use cuspflow_core::bump::{truncation_radius, BumpV};
use cuspflow_core::group::{compose, iwasawa_decompose, FactorKind, GroupPoint, Mat2};
use cuspflow_core::quad::Rule;
use cuspflow_core::rng::uniform_range;
use cuspflow_core::spectral::{
    default_weight_tol, mf_surrogate, mf_with_weights, operator_identity_check, pm_series, weight_norms,
};
use cuspflow_core::special::{numeric_residue, scattering_gaussian, scattering_modular};
use cuspflow_core::test_function::TestFunction;
use cuspflow_core::{Complex64, Result as CoreResult};
use rand_chacha::ChaCha8Rng;

use super::stream_block;
use crate::config::{LatticeName, RunConfig};
use crate::error::CliResult;
use crate::io::Report;
use crate::runner::task_rng;

/// `|C(½ + ir)|` on a grid, the residue at `s = 1` and `C(s)` on `(½, 1)`.
pub fn scattering_scan(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let (c, c0): (fn(Complex64) -> CoreResult<Complex64>, f64) = match cfg.lattice {
        LatticeName::Zi => (scattering_gaussian, cfg.lattice.spec()?.c0),
        _ => (scattering_modular, cfg.lattice.spec()?.c0),
    };
    let mut rep = Report::default();
    let (r_max, r_step) = (p.r_max.expect("r_max"), p.r_step.expect("r_step"));
    let steps = (r_max / r_step).floor() as usize;
    let mut worst = 0.0f64;
    for i in 1..=steps {
        let r = i as f64 * r_step;
        let v = c(Complex64::new(0.5, r))?.norm();
        rep.push(cfg.seed, format!("r={r}"), "abs_c_on_line", v, None);
        worst = worst.max((v - 1.0).abs());
    }
    rep.set("max_unitarity_defect", worst);
    let res = numeric_residue(c)?;
    rep.push(cfg.seed, "s=1", "numeric_residue", res, None);
    rep.push(cfg.seed, "s=1", "c0", c0, None);
    rep.set("numeric_residue", res);
    let mut min_abs_inv = f64::INFINITY;
    for &s in p.s.as_ref().expect("s") {
        let v = c(Complex64::new(s, 0.0))?;
        rep.push(cfg.seed, format!("s={s}"), "c_real", v.re, None);
        rep.push(cfg.seed, format!("s={s}"), "inv_c_real", 1.0 / v.re, None);
        min_abs_inv = min_abs_inv.min((1.0 / v).norm());
    }
    rep.set("min_abs_inv_c_on_grid", min_abs_inv);
    Ok(rep)
}

/// `P_m(s)` for one factor kind, and `M_f(s)` for the `f^{(λ)}` family
/// normalized by `λ^{2ε}`; at `s = 1` also the surrogate normalized by
/// `λ^{2ε} log λ`.
pub fn pm_table(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let kind = cfg.lattice.factor_kind();
    let mu = kind.mu_f64();
    let s_list = p.s.as_ref().expect("s");
    let (m_max, eps) = (p.m_max.expect("m_max"), p.eps.expect("eps"));
    let mut rep = Report::default();
    for &s in s_list {
        let series = pm_series(m_max, Complex64::new(s, 0.0), kind)?;
        for (m, v) in series.iter().enumerate() {
            let key = format!("s={s};m={m}");
            rep.push(cfg.seed, &key, "pm", v.re, None);
            rep.push(cfg.seed, &key, "pm_scaled", v.re * ((m + 1) as f64).powf(mu * (2.0 * s - 1.0)), None);
        }
    }
    for &lambda in p.lambda.as_ref().expect("lambda") {
        let f = match kind {
            FactorKind::Real => TestFunction::real_family(lambda, eps)?,
            FactorKind::Complex => TestFunction::complex_family(lambda, eps)?,
        };
        let w = weight_norms(&f, default_weight_tol(&f))?;
        let norm = lambda.powf(2.0 * eps);
        for &s in s_list {
            let key = format!("lambda={lambda};s={s}");
            let v = mf_with_weights(&f, &w, s)?;
            rep.push(cfg.seed, &key, "mf", v.value, None);
            rep.push(cfg.seed, &key, "mf_over_lambda_2eps", v.value / norm, None);
            if s == 1.0 {
                let sur = mf_surrogate(&f, &w, s);
                rep.push(cfg.seed, &key, "mf_surrogate", sur, None);
                rep.push(cfg.seed, &key, "mf_surrogate_over_lambda_2eps_log_lambda", sur / (norm * lambda.ln()), None);
            }
        }
        rep.push(cfg.seed, format!("lambda={lambda}"), "weights_m_max", w.m_max() as f64, None);
    }
    Ok(rep)
}

fn random_sl2r(rng: &mut ChaCha8Rng) -> Mat2<f64> {
    let a = uniform_range(rng, 0.2, 3.0) * if uniform_range(rng, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
    let (b, c) = (uniform_range(rng, -3.0, 3.0), uniform_range(rng, -3.0, 3.0));
    Mat2::new(a, b, c, (1.0 + b * c) / a)
}

fn random_sl2c(rng: &mut ChaCha8Rng) -> Mat2<Complex64> {
    let mut z = || Complex64::new(uniform_range(rng, -3.0, 3.0), uniform_range(rng, -3.0, 3.0));
    let (mut a, b, c) = (z(), z(), z());
    if a.norm() < 0.2 {
        a += Complex64::new(1.0, 0.0);
    }
    Mat2::new(a, b, c, (Complex64::new(1.0, 0.0) + b * c) / a)
}

/// Raising/lowering identities (both factor kinds), the Plancherel step for
/// `v_λ`, and Iwasawa round trips.
pub fn identity_check(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let mut rep = Report::default();
    let mut rng = task_rng(cfg.seed, stream_block(0));
    let (m_max, points) = (p.m_max.expect("m_max"), p.points.expect("points"));
    let s_list = p.s.as_ref().expect("s");
    let mut worst_real = 0.0f64;
    let mut worst_spread = 0.0f64;
    for m in 0..=m_max as i64 {
        let mut kappas = Vec::new();
        for &s in s_list {
            let key = format!("s={s};m={m}");
            let s = Complex64::new(s, 0.0);
            let r = operator_identity_check(s, m, FactorKind::Real, points, 1e-3, &mut rng)?;
            rep.push(cfg.seed, &key, "real_raising_residual", r.raising_residual, None);
            rep.push(cfg.seed, &key, "real_lowering_residual", r.lowering_residual, None);
            worst_real = worst_real.max(r.raising_residual).max(r.lowering_residual);
            let c = operator_identity_check(s, m, FactorKind::Complex, points, 1e-3, &mut rng)?;
            rep.push(cfg.seed, &key, "complex_kappa_re", c.kappa.re, None);
            rep.push(cfg.seed, &key, "complex_kappa_spread", c.kappa_spread, None);
            rep.push(cfg.seed, &key, "complex_casimir_re", c.casimir.re, None);
            worst_spread = worst_spread.max(c.kappa_spread);
            kappas.push(c.kappa);
        }
        let mean = kappas.iter().sum::<Complex64>() / kappas.len() as f64;
        let across = kappas.iter().map(|k| (k - mean).norm() / mean.norm()).fold(0.0, f64::max);
        rep.push(cfg.seed, format!("m={m}"), "complex_kappa_spread_across_s", across, None);
        worst_spread = worst_spread.max(across);
    }
    rep.set("max_real_residual", worst_real);
    rep.set("max_kappa_spread", worst_spread);

    let mut worst_plancherel = 0.0f64;
    for &lambda in p.lambda.as_ref().expect("lambda") {
        let v = BumpV::new(lambda, p.eps.expect("eps"), FactorKind::Real)?;
        let r = truncation_radius(&v, 1e-12);
        let tab = v.vhat_table(0.5, r);
        let line = Rule::new(20).integrate(-r, r, (4.0 * r).ceil() as usize, |x| tab.eval(x).norm_sqr());
        let direct = v.l2_weighted();
        let rel = (line - direct).abs() / direct;
        let key = format!("lambda={lambda}");
        rep.push(cfg.seed, &key, "plancherel_line", line, None);
        rep.push(cfg.seed, &key, "plancherel_direct", direct, None);
        rep.push(cfg.seed, &key, "plancherel_rel_err", rel, None);
        worst_plancherel = worst_plancherel.max(rel);
    }
    rep.set("max_plancherel_rel_err", worst_plancherel);

    let n = p.samples.expect("samples");
    let mut rng = task_rng(cfg.seed, stream_block(1));
    let (mut er, mut ec) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let g = GroupPoint::real(random_sl2r(&mut rng))?;
        er = er.max(g.max_abs_diff(&compose(&iwasawa_decompose(&g))));
        let g = GroupPoint::complex(random_sl2c(&mut rng))?;
        ec = ec.max(g.max_abs_diff(&compose(&iwasawa_decompose(&g))));
    }
    rep.push(cfg.seed, format!("n={n}"), "iwasawa_max_err_real", er, None);
    rep.push(cfg.seed, format!("n={n}"), "iwasawa_max_err_complex", ec, None);
    rep.set("iwasawa_max_err", [er, ec]);
    Ok(rep)
}
