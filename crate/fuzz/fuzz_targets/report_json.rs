#![no_main]

use libfuzzer_sys::fuzz_target;
use lpcs::format::{report_from_json, report_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(report) = report_from_json(text) else { return };
    let json = report_to_json(&report, None);
    assert_eq!(report_from_json(&json).expect("written reports parse"), report);
});
