#![no_main]

use libfuzzer_sys::fuzz_target;
use tis_core::io::{read_flo, write_flo};

fuzz_target!(|data: &[u8]| {
    if let Ok(flow) = read_flo(data) {
        // Accepted input is canonical: no trailing bytes, finite values.
        assert_eq!(write_flo(&flow), data);
    }
});
