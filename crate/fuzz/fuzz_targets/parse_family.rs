#![no_main]

use libfuzzer_sys::fuzz_target;

// The parser must reject malformed input with an error, never panic or hang.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = framelab::io::parse_family_json(text);
    }
});
