#![no_main]

use libfuzzer_sys::fuzz_target;
use lpcs::format::{report_from_csv, report_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(report) = report_from_csv(text, "fuzz", 0) else { return };
    let csv = report_to_csv(&report).expect("parsed reports serialize");
    assert_eq!(report_from_csv(&csv, "fuzz", 0).expect("written reports parse"), report);
});
