#![no_main]

use libfuzzer_sys::fuzz_target;
use lpcs::properties::RipMode;
use lpcs::sensing::MagnitudeModel;
use lpcs::PExponent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<PExponent>() {
        assert!(p.validate().is_ok());
        assert_eq!(p.to_string().parse::<PExponent>().unwrap(), p);
    }
    if let Ok(mode) = text.parse::<RipMode>() {
        assert_eq!(mode.to_string().parse::<RipMode>().unwrap(), mode);
    }
    let _ = text.parse::<MagnitudeModel>();
});
