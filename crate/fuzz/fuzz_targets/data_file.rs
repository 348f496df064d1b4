#![no_main]

use libfuzzer_sys::fuzz_target;
use lpcs::format::{parse_data_file, KIND_MATRIX};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_data_file(text) else { return };
    let again = parse_data_file(&file.to_json()).expect("written files parse");
    assert_eq!(file, again);
    if file.kind == KIND_MATRIX {
        let _ = file.into_matrix();
    } else {
        let _ = file.into_vector();
    }
});
