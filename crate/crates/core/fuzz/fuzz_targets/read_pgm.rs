#![no_main]

use libfuzzer_sys::fuzz_target;
use tis_core::io::{read_mask, read_pgm, read_saliency, write_pgm};

fuzz_target!(|data: &[u8]| {
    let img = read_pgm(data);
    assert_eq!(read_mask(data).is_ok(), img.is_ok());
    assert_eq!(read_saliency(data).is_ok(), img.is_ok());
    if let Ok(img) = img {
        let again = read_pgm(&write_pgm(&img)).expect("rewritten image parses");
        assert_eq!(again, img);
    }
});
