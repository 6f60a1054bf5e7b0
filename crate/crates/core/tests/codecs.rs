use proptest::prelude::*;
use tis_core::io::{
    read_flo, read_mask, read_pgm, read_pgm16, read_ppm, write_flo, write_mask, write_pgm, write_pgm16, write_ppm,
    Gray8,
};
use tis_core::{BinaryMask, FlowField, LabelMap, RgbImage};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..12, 1usize..12)
}

fn flow() -> impl Strategy<Value = FlowField> {
    dims().prop_flat_map(|(w, h)| {
        let n = w * h;
        (
            prop::collection::vec(prop::num::f32::NORMAL | prop::num::f32::ZERO, n),
            prop::collection::vec(prop::num::f32::NORMAL | prop::num::f32::SUBNORMAL, n),
        )
            .prop_map(move |(u, v)| FlowField::new(w, h, u, v).unwrap())
    })
}

proptest! {
    #[test]
    fn flo_round_trip(f in flow()) {
        let bytes = write_flo(&f);
        let back = read_flo(&bytes).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(write_flo(&back), bytes);
    }

    #[test]
    fn pgm_round_trip((w, h) in dims(), seed in prop::collection::vec(any::<u8>(), 144)) {
        let g = Gray8 { width: w, height: h, maxval: 255, data: seed[..w * h].to_vec() };
        let bytes = write_pgm(&g);
        prop_assert_eq!(read_pgm(&bytes).unwrap(), g);
    }

    #[test]
    fn mask_round_trip((w, h) in dims(), bits in prop::collection::vec(0u8..2, 144)) {
        let m = BinaryMask::new(w, h, bits[..w * h].to_vec()).unwrap();
        let bytes = write_mask(&m);
        prop_assert_eq!(read_mask(&bytes).unwrap(), m);
        prop_assert_eq!(write_mask(&read_mask(&bytes).unwrap()), bytes);
    }

    #[test]
    fn pgm16_round_trip((w, h) in dims(), ids in prop::collection::vec(0u32..65536, 144)) {
        let l = LabelMap::new(w, h, ids[..w * h].to_vec()).unwrap();
        let bytes = write_pgm16(&l).unwrap();
        prop_assert_eq!(read_pgm16(&bytes).unwrap(), l);
    }

    #[test]
    fn ppm_round_trip((w, h) in dims(), px in prop::collection::vec(any::<[u8; 3]>(), 144)) {
        let img = RgbImage::new(w, h, px[..w * h].to_vec()).unwrap();
        let bytes = write_ppm(&img);
        prop_assert_eq!(read_ppm(&bytes).unwrap(), img);
    }

    /// Readers never accept a payload that disagrees with the header.
    #[test]
    fn wrong_length_is_rejected(f in flow(), cut in 1usize..8, extra in 1usize..8) {
        let bytes = write_flo(&f);
        prop_assert!(read_flo(&bytes[..bytes.len() - cut]).is_err());
        let mut longer = bytes.clone();
        longer.extend(std::iter::repeat_n(0, extra));
        prop_assert!(read_flo(&longer).is_err());

        let img = RgbImage::filled(f.width(), f.height(), [1, 2, 3]);
        let bytes = write_ppm(&img);
        prop_assert!(read_ppm(&bytes[..bytes.len() - cut.min(bytes.len() - 12)]).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = read_flo(&bytes);
        let _ = read_pgm(&bytes);
        let _ = read_pgm16(&bytes);
        let _ = read_ppm(&bytes);
    }
}
