use cuspflow_core::dynamics::{for_each_orbit_delta, shrinking_target_count, tail_counts, TargetSchedule, RATIO_START};
use cuspflow_core::group::FlowDirection;
use cuspflow_core::lattice::haar_sample;
use cuspflow_core::stats::median;

use super::{runner, stream_block};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::Report;

/// Per orbit from a Haar-random start: `max Δ/log s` over `[ratio_start, T]`
/// (the lim sup proxy), the same over `[10, T]`, and `max Δ / log T`.
pub fn loglaw(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let l = cfg.lattice.spec()?;
    let (horizon, orbits) = (p.horizon.expect("horizon"), p.orbits.expect("orbits"));
    let s_min = p.ratio_start.expect("ratio_start");
    let flow = FlowDirection::ones(1);
    let per_orbit = runner(cfg).map(0, orbits, |_, rng| {
        let x0 = haar_sample(&l, rng)?;
        let (mut tail, mut early, mut top) = (0.0f64, 0.0f64, 0.0f64);
        for_each_orbit_delta(&x0, &l, &flow, horizon, 1.0, |s, d| {
            if s >= RATIO_START {
                let r = d / s.ln();
                early = early.max(r);
                if s >= s_min {
                    tail = tail.max(r);
                }
            }
            top = top.max(d);
        })?;
        Ok((tail, early, top / horizon.ln()))
    })?;
    let mut rep = Report::default();
    let t = format!("T={horizon}");
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for (i, &(a, b, c)) in per_orbit.iter().enumerate() {
        let key = format!("{t};orbit={i}");
        rep.push(cfg.seed, &key, "running_max_ratio", a, None);
        rep.push(cfg.seed, &key, "ratio_from_10", b, None);
        rep.push(cfg.seed, &key, "max_delta_over_log_t", c, None);
        cols[0].push(a);
        cols[1].push(b);
        cols[2].push(c);
    }
    let names = ["median_running_max_ratio", "median_ratio_from_10", "median_max_delta_over_log_t"];
    for (name, col) in names.iter().zip(cols.iter_mut()) {
        let m = median(col);
        rep.push(cfg.seed, &t, name, m, None);
        rep.set(name, m);
    }
    rep.set("ratio_window", [s_min, horizon]);
    Ok(rep)
}

/// Hits of `Δ(x u_ℓ) ≥ r_ℓ` along Haar-random orbits, and optionally the
/// empirical target measures `σ{Δ > r}`.
pub fn shrink(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let l = cfg.lattice.spec()?;
    let sched = TargetSchedule::new(p.eps.expect("eps"), p.sign.expect("sign"))?;
    let (l_max, beyond) = (p.l_max.expect("l_max"), p.beyond.expect("beyond"));
    let checkpoints: Vec<u64> = p
        .checkpoints
        .as_ref()
        .expect("checkpoints")
        .iter()
        .copied()
        .filter(|&c| c <= l_max)
        .collect();
    let flow = FlowDirection::ones(1);
    let hits = runner(cfg).map(0, p.orbits.expect("orbits"), |_, rng| {
        let x0 = haar_sample(&l, rng)?;
        Ok(shrinking_target_count(&x0, &l, &flow, &sched, l_max)?)
    })?;
    let mut rep = Report::default();
    let lm = format!("L_max={l_max}");
    let mut few_beyond = 0usize;
    let mut upto: Vec<Vec<f64>> = vec![Vec::new(); checkpoints.len()];
    for (i, h) in hits.iter().enumerate() {
        let key = format!("{lm};orbit={i}");
        let nb = h.iter().filter(|&&x| x > beyond).count();
        rep.push(cfg.seed, &key, "hits_total", h.len() as f64, None);
        rep.push(cfg.seed, &key, &format!("hits_beyond_{beyond}"), nb as f64, None);
        if nb <= 2 {
            few_beyond += 1;
        }
        for (j, &c) in checkpoints.iter().enumerate() {
            let n = h.iter().filter(|&&x| x <= c).count() as f64;
            rep.push(cfg.seed, &key, &format!("hits_upto_{c}"), n, None);
            upto[j].push(n);
        }
    }
    let frac = few_beyond as f64 / hits.len() as f64;
    rep.push(cfg.seed, &lm, "fraction_at_most_2_beyond", frac, None);
    rep.set("fraction_at_most_2_beyond", frac);
    let mut medians = Vec::new();
    for (c, col) in checkpoints.iter().zip(upto.iter_mut()) {
        let m = median(col);
        rep.push(cfg.seed, format!("L_max={c}"), "median_hits", m, None);
        medians.push((c, m));
    }
    rep.set("median_hits", medians);
    rep.set("schedule", sched);

    let radii = p.radii.as_ref().expect("radii");
    let n = p.samples.expect("samples");
    if !radii.is_empty() && n > 0 {
        let counts = runner(cfg).accumulate(stream_block(1), n, |m, rng| Ok(tail_counts(&l, radii, m, rng)?))?;
        let mut scaled = Vec::new();
        for (&r, &c) in radii.iter().zip(&counts) {
            let q = c as f64 / n as f64;
            let se = (q * (1.0 - q) / n as f64).sqrt();
            let key = format!("r={r}");
            rep.push(cfg.seed, &key, "tail_measure", q, Some(se));
            rep.push(cfg.seed, &key, "tail_measure_scaled", q * r.exp(), Some(se * r.exp()));
            scaled.push(q * r.exp());
        }
        rep.set("tail_measure_scaled", scaled);
    }
    Ok(rep)
}
