//! One function per subcommand. Each takes a resolved [`RunConfig`] and
//! returns a [`Report`]; writing files is left to the caller.

mod dk;
mod orbits;
mod tables;
mod theta;

pub use dk::{dk_measure, ydk_measure};
pub use orbits::{loglaw, shrink};
pub use tables::{identity_check, pm_table, scattering_scan};
pub use theta::{siegel, theta_norm};

use cuspflow_core::group::FactorKind;
use cuspflow_core::test_function::TestFunction;

use crate::config::{CommandName, FunctionShape, RunConfig};
use crate::error::CliResult;
use crate::io::Report;
use crate::runner::Runner;

/// Streams `block << 40 ..` belong to the `block`-th sub-experiment.
pub(crate) fn stream_block(block: usize) -> u64 {
    (block as u64) << 40
}

pub(crate) fn runner(cfg: &RunConfig) -> Runner {
    Runner::new(cfg.seed, cfg.workers, cfg.chunk)
}

/// `f` for a run: the family member at `lambda`, or the spherical bump.
pub(crate) fn test_function(cfg: &RunConfig, kind: FactorKind, lambda: f64) -> CliResult<TestFunction> {
    let p = &cfg.params;
    let eps = p.eps.expect("eps resolved");
    Ok(match p.function.expect("function resolved") {
        FunctionShape::Family => match kind {
            FactorKind::Real => TestFunction::real_family(lambda, eps)?,
            FactorKind::Complex => TestFunction::complex_family(lambda, eps)?,
        },
        FunctionShape::Spherical => {
            let s = p.support.as_ref().expect("support resolved");
            TestFunction::spherical(s[0], s[1], kind)?
        }
    })
}

/// Labels and `λ` values of the test functions in a run.
pub(crate) fn function_list(cfg: &RunConfig) -> Vec<(String, f64)> {
    let p = &cfg.params;
    match p.function.expect("function resolved") {
        FunctionShape::Family => p
            .lambda
            .as_ref()
            .expect("lambda resolved")
            .iter()
            .map(|&l| (format!("lambda={l}"), l))
            .collect(),
        FunctionShape::Spherical => {
            let s = p.support.as_ref().expect("support resolved");
            vec![(format!("support={};{}", s[0], s[1]), 1.0)]
        }
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    match cfg.command {
        CommandName::Loglaw => loglaw(cfg),
        CommandName::Shrink => shrink(cfg),
        CommandName::ThetaNorm => theta_norm(cfg),
        CommandName::Siegel => siegel(cfg),
        CommandName::DkMeasure => dk_measure(cfg),
        CommandName::YdkMeasure => ydk_measure(cfg),
        CommandName::ScatteringScan => scattering_scan(cfg),
        CommandName::PmTable => pm_table(cfg),
        CommandName::IdentityCheck => identity_check(cfg),
    }
}
