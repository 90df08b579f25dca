#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = text.parse::<glct_core::LctParams>() {
            let _ = glct_core::decompose_params(&p);
        }
    }
});
