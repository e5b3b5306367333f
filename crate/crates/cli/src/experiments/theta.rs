use cuspflow_core::special::ScatteringEvaluator;
use cuspflow_core::spectral::spectral_theta_norm;
use cuspflow_core::theta::{direct_theta_norm_acc, siegel_acc, siegel_target, subgroup_acc, SubgroupComparison};
use serde_json::json;

use super::{function_list, runner, stream_block, test_function};
use crate::config::{Method, RunConfig};
use crate::error::CliResult;
use crate::io::Report;

/// `‖Θ_f‖²` by unfolded Monte Carlo and/or the spectral expression; on
/// `gamma0-N`, the subgroup inequality against `SL2(Z)` instead.
pub fn theta_norm(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let l = cfg.lattice.spec()?;
    let kind = cfg.lattice.factor_kind();
    let method = p.method.expect("method");
    let n = p.samples.expect("samples");
    let mut rep = Report::default();
    let mut breakdown = serde_json::Map::new();
    for (j, (key, lambda)) in function_list(cfg).into_iter().enumerate() {
        let f = test_function(cfg, kind, lambda)?;
        let (l2, l1) = (f.l2_norm_sq(), f.l1_norm());
        let bound = l2 + l1 * l1;
        rep.push(cfg.seed, &key, "l2_norm_sq", l2, None);
        rep.push(cfg.seed, &key, "l1_norm", l1, None);
        if cfg.lattice.is_congruence() {
            let acc = runner(cfg).accumulate(stream_block(j), n, |m, rng| Ok(subgroup_acc(&f, &l, m, rng)?))?;
            let factor = (l.cusp_index as f64).powi(2) / l.index as f64;
            let c = SubgroupComparison::from_acc(&acc, factor, cfg.seed);
            rep.push(cfg.seed, &key, "subgroup_norm", c.lhs.mean, Some(c.lhs.std_error));
            rep.push(cfg.seed, &key, "scaled_parent_norm", c.rhs.mean, Some(c.rhs.std_error));
            rep.push(cfg.seed, &key, "parent_minus_subgroup", acc.diff.mean, Some(c.diff_se));
            rep.push(cfg.seed, &key, "index_factor", factor, None);
            rep.push(cfg.seed, &key, "inequality_holds", if c.pass { 1.0 } else { 0.0 }, None);
            breakdown.insert(key, serde_json::to_value(c)?);
            continue;
        }
        let mut entry = serde_json::Map::new();
        let direct = if matches!(method, Method::Direct | Method::Both) {
            let acc = runner(cfg).accumulate(stream_block(j), n, |m, rng| Ok(direct_theta_norm_acc(&f, &l, m, rng)?))?;
            let e = acc.estimate(cfg.seed);
            rep.push(cfg.seed, &key, "direct", e.mean, Some(e.std_error));
            rep.push(cfg.seed, &key, "bound", bound, None);
            rep.push(cfg.seed, &key, "direct_over_bound", e.mean / bound, Some(e.std_error / bound));
            entry.insert("direct".into(), serde_json::to_value(e)?);
            Some(e)
        } else {
            None
        };
        if matches!(method, Method::Spectral | Method::Both) {
            let s = spectral_theta_norm(&f, &ScatteringEvaluator::modular(), &l)?;
            rep.push(cfg.seed, &key, "spectral", s.total, None);
            rep.push(cfg.seed, &key, "spectral_l2_term", s.l2_term, None);
            rep.push(cfg.seed, &key, "spectral_cross_term", s.cross_term.re, None);
            for t in &s.pole_terms {
                rep.push(cfg.seed, &key, &format!("spectral_pole_term_s={}", t.s), t.contribution, None);
            }
            if let Some(d) = direct {
                let diff = (d.mean - s.total).abs();
                rep.push(cfg.seed, &key, "abs_diff_over_spectral", diff / s.total, Some(d.std_error / s.total));
                entry.insert("abs_diff_over_spectral".into(), json!(diff / s.total));
            }
            entry.insert("spectral".into(), serde_json::to_value(&s)?);
        }
        breakdown.insert(key, serde_json::Value::Object(entry));
    }
    rep.set("per_function", breakdown);
    Ok(rep)
}

/// Haar mean of `Θ_f` against `c0 ∫ f`.
pub fn siegel(cfg: &RunConfig) -> CliResult<Report> {
    let l = cfg.lattice.spec()?;
    let kind = cfg.lattice.factor_kind();
    let n = cfg.params.samples.expect("samples");
    let mut rep = Report::default();
    let mut z_scores = Vec::new();
    for (j, (key, lambda)) in function_list(cfg).into_iter().enumerate() {
        let f = test_function(cfg, kind, lambda)?;
        let e = runner(cfg)
            .accumulate(stream_block(j), n, |m, rng| Ok(siegel_acc(&f, &l, m, rng)?))?
            .estimate(cfg.seed);
        let target = siegel_target(&f, &l);
        let z = (e.mean - target) / e.std_error;
        rep.push(cfg.seed, &key, "theta_mean", e.mean, Some(e.std_error));
        rep.push(cfg.seed, &key, "target", target, None);
        rep.push(cfg.seed, &key, "z_score", z, None);
        z_scores.push((key, z));
    }
    rep.set("z_scores", z_scores);
    Ok(rep)
}
