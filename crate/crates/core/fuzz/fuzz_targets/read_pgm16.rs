#![no_main]

use libfuzzer_sys::fuzz_target;
use tis_core::io::{read_pgm16, write_pgm16};

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = read_pgm16(data) {
        let bytes = write_pgm16(&labels).expect("parsed ids fit in 16 bits");
        assert_eq!(read_pgm16(&bytes).expect("rewritten map parses").ids(), labels.ids());
    }
});
