#![no_main]

use libfuzzer_sys::fuzz_target;
use tis_core::io::{read_ppm, write_ppm};

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = read_ppm(data) {
        let again = read_ppm(&write_ppm(&img)).expect("rewritten image parses");
        assert_eq!(again.pixels(), img.pixels());
    }
});
