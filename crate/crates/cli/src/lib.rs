//! Configuration, orchestration and CSV export behind the `simulate` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_with, ConfigError, Mode, ScenarioConfig};
pub use run::{run, Outcome, RunError};

/// Mode and preset listing shown by `--help`.
pub fn catalog_help() -> String {
    use nlse_core::{GaugePreset, InitialPreset};
    let mut s = String::from("Modes:\n");
    for (_, name, about) in Mode::ALL {
        s.push_str(&format!("  {name:<22} {about}\n"));
    }
    s.push_str("\nPotential kinds ([potential] kind):\n");
    for (_, name, about) in config::PotentialKind::ALL {
        s.push_str(&format!("  {name:<22} {about}\n"));
    }
    s.push_str("\nGeneric densities ([potential] density):\n");
    for name in nlse_core::potentials::CATALOG {
        s.push_str(&format!("  {name}\n"));
    }
    s.push_str("\nInitial presets ([initial] preset):\n");
    for (name, about) in InitialPreset::NAMES {
        s.push_str(&format!("  {name:<22} {about}\n"));
    }
    s.push_str("\nGauge presets ([gauge] preset):\n");
    for (name, about) in GaugePreset::NAMES {
        s.push_str(&format!("  {name:<22} {about}\n"));
    }
    s.push_str(
        "\nExit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error,\n\
         3 runtime abort (non-finite values, density floor).\n\
         Log verbosity: SIMULATE_LOG=error|warn|info|debug|trace.",
    );
    s
}
