use cuspflow_core::dynamics::{measure_dk_acc, measure_ydk_acc, DkSpec, TargetSchedule};
use cuspflow_core::stats::linear_fit;

use super::{runner, stream_block};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::Report;

fn specs(cfg: &RunConfig) -> CliResult<Vec<DkSpec>> {
    let p = &cfg.params;
    let sched = TargetSchedule::with_window(p.eps.expect("eps"), p.sign.expect("sign"), p.p_mult.expect("p_mult"))?;
    let l = cfg.lattice.spec()?;
    p.k.as_ref()
        .expect("k")
        .iter()
        .map(|&k| Ok(DkSpec::new(k, sched, l.clone())?))
        .collect()
}

/// Importance-sampled `|D_k|` under `e^{-t_n} dt_n dk`, next to the window
/// mass `Σ_{ℓ=k}^{p(k)} e^{-r_ℓ}`.
pub fn dk_measure(cfg: &RunConfig) -> CliResult<Report> {
    let n = cfg.params.samples.expect("samples");
    let mut rep = Report::default();
    let mut means = Vec::new();
    for (j, spec) in specs(cfg)?.iter().enumerate() {
        let acc = runner(cfg).accumulate(stream_block(j), n, |m, rng| Ok(measure_dk_acc(spec, m, rng)))?;
        acc.check()?;
        let e = acc.acc.estimate(cfg.seed);
        let key = format!("k={}", spec.k);
        let mass = spec.schedule.window_mass(spec.k);
        rep.push(cfg.seed, &key, "dk_measure", e.mean, Some(e.std_error));
        rep.push(cfg.seed, &key, "window_mass", mass, None);
        rep.push(cfg.seed, &key, "dk_over_window_mass", e.mean / mass, Some(e.std_error / mass));
        rep.push(cfg.seed, &key, "effective_samples", acc.ess(), None);
        means.push((spec.k, e.mean, e.std_error));
    }
    let increasing = means.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        b.1 - a.1 > 3.0 * (a.2 * a.2 + b.2 * b.2).sqrt()
    });
    rep.set("estimates", &means);
    rep.set("increasing_beyond_3se", increasing);
    Ok(rep)
}

/// Haar probability of `Y_{D_k}` and a weighted slope against `log k`.
pub fn ydk_measure(cfg: &RunConfig) -> CliResult<Report> {
    let n = cfg.params.samples.expect("samples");
    let mut rep = Report::default();
    let (mut x, mut y, mut se) = (Vec::new(), Vec::new(), Vec::new());
    for (j, spec) in specs(cfg)?.iter().enumerate() {
        let e = runner(cfg)
            .accumulate(stream_block(j), n, |m, rng| Ok(measure_ydk_acc(spec, m, rng)?))?
            .estimate(cfg.seed);
        rep.push(cfg.seed, format!("k={}", spec.k), "ydk_measure", e.mean, Some(e.std_error));
        x.push((spec.k as f64).ln());
        y.push(e.mean);
        se.push(e.std_error.max(1e-12));
    }
    if x.len() >= 2 {
        let (_, slope, slope_se) = linear_fit(&x, &y, Some(&se));
        rep.push(cfg.seed, "fit", "slope_vs_log_k", slope, Some(slope_se));
        rep.set("slope_vs_log_k", [slope, slope_se]);
    }
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    rep.push(cfg.seed, "all", "min_ydk_measure", min, None);
    rep.set("min_ydk_measure", min);
    Ok(rep)
}
