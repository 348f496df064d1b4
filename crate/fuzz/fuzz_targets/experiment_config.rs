#![no_main]

use libfuzzer_sys::fuzz_target;
use lpcs::experiments::{BoundConfig, CrosscheckConfig, RwpProbabilityConfig, TrialGrid, WidthScalingConfig};
use lpcs::format::parse_config;
use lpcs::solver::SolverConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_config::<TrialGrid>(text) {
        let _ = g.validate();
    }
    let _ = parse_config::<BoundConfig>(text);
    let _ = parse_config::<WidthScalingConfig>(text);
    let _ = parse_config::<RwpProbabilityConfig>(text);
    let _ = parse_config::<CrosscheckConfig>(text);
    if let Ok(s) = parse_config::<SolverConfig>(text) {
        let _ = s.validate();
    }
});
