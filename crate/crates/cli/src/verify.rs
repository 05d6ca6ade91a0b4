//! `rbki verify`: the acceptance criteria.

use rbki::acceptance::{run_suite, SuiteOptions, CRITERIA};

use crate::config::VerifyArgs;
use crate::exit::Failure;
use crate::output::Context;

pub fn run(ctx: &Context, args: VerifyArgs) -> Result<(), Failure> {
    if args.list {
        for c in CRITERIA {
            println!("{:>3}  {}", c.id, c.title);
        }
        return Ok(());
    }
    let calibration = args.calibration_c.unwrap_or(1.0);
    if !(calibration > 0.0 && calibration.is_finite()) {
        return Err(Failure::config("--calibration-c must be positive and finite"));
    }
    let opts = SuiteOptions {
        seed: ctx.common.seed,
        calibration,
        exec: ctx.exec,
    };
    let outcomes = run_suite(&opts, args.only.as_deref())?;
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical(format!("criteria failed: {}", failed.join(", "))))
    }
}
