use std::path::Path;

use figscan_core::augment::{leave_one_out_configs, Transform};

use super::write;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::run_manifest::Outcome;

/// Writes `without_<transform>.toml` for each of the nine transforms. Each
/// file is a complete config usable with `--config`.
pub fn run(cfg: &RunConfig, out: &Path, o: &mut Outcome) -> Result<(), CliError> {
    let variants = leave_one_out_configs(&cfg.augment).map_err(CliError::bad_input)?;
    o.seeds.insert("base".into(), cfg.augment.seed.0);
    for (t, augment) in Transform::ALL.into_iter().zip(variants) {
        debug_assert!(!augment.is_enabled(t));
        let file = RunConfig {
            augment,
            ..cfg.clone()
        };
        write(
            &out.join(format!("without_{}.toml", t.key())),
            file.to_toml()?,
        )?;
        o.counts.processed += 1;
        o.counts.succeeded += 1;
    }
    o.summary = Some(format!(
        "wrote {} leave-one-out configs",
        o.counts.succeeded
    ));
    Ok(())
}
