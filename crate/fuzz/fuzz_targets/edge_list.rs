#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = glct_core::io::parse_edge_list_with_limit(text, 256) {
            let again =
                glct_core::io::parse_edge_list(&glct_core::io::write_edge_list(&g)).unwrap();
            assert_eq!(again.n(), g.n());
        }
    }
});
