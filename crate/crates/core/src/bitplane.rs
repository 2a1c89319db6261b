//! Bit-level transforms on 8-bit images.
//!
//! Bit index `k = 0` is the most significant bit, so a pixel is
//! `sum_k bit_k * 2^(7 - k)`. All shifts happen in 8-bit registers: bits pushed
//! past either end are discarded.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::keystream::{Key, KeystreamSpec, Nonce};

/// Key material and plane count for selective encryption.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncryptionParams {
    pub key: Key,
    pub nonce: Nonce,
    planes: u8,
}

impl EncryptionParams {
    pub fn new(key: Key, nonce: Nonce, planes: u8) -> Result<Self> {
        check_planes(planes)?;
        Ok(Self { key, nonce, planes })
    }

    /// Number of most significant planes encrypted.
    pub fn planes(&self) -> u8 {
        self.planes
    }

    pub fn keystream(&self) -> KeystreamSpec {
        KeystreamSpec::new(self.key, self.nonce)
    }
}

pub(crate) fn check_planes(s: u8) -> Result<()> {
    if s > 8 {
        return Err(Error::InvalidArgument(format!(
            "plane count must be in 0..=8, got {s}"
        )));
    }
    Ok(())
}

/// XORs bit planes `0..s` with the keystream. The stream is laid out plane-major:
/// all bits for plane 0 in raster order, then plane 1, and so on.
pub fn encrypt_planes(img: &GrayImage, params: &EncryptionParams) -> GrayImage {
    let s = params.planes as usize;
    let count = img.pixels().len();
    if s == 0 || count == 0 {
        return img.clone();
    }
    let mut stream = vec![0u8; (s * count).div_ceil(8)];
    params.keystream().fill(0, &mut stream);

    let mut pixels = img.pixels().to_vec();
    for k in 0..s {
        let mask = 0x80u8 >> k;
        let base = k * count;
        for (pos, px) in pixels.iter_mut().enumerate() {
            let t = base + pos;
            if (stream[t >> 3] >> (7 - (t & 7))) & 1 == 1 {
                *px ^= mask;
            }
        }
    }
    GrayImage::new(img.width(), img.height(), pixels).expect("dimensions preserved")
}

/// Clears the `s` most significant planes: `(p << s) >> s`, i.e. `p & (0xFF >> s)`.
pub fn zero_planes(img: &GrayImage, s: u8) -> Result<GrayImage> {
    check_planes(s)?;
    let mask = low_mask(s);
    Ok(img.map(|p| p & mask))
}

/// Moves the clear planes to the top: `(p << s) mod 256`.
pub fn shift_planes(img: &GrayImage, s: u8) -> Result<GrayImage> {
    check_planes(s)?;
    Ok(img.map(|p| shl8(p, s)))
}

#[inline]
pub(crate) fn low_mask(s: u8) -> u8 {
    if s >= 8 {
        0
    } else {
        0xFF >> s
    }
}

#[inline]
fn shl8(p: u8, s: u8) -> u8 {
    if s >= 8 {
        0
    } else {
        p << s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::keystream_bits;
    use proptest::prelude::*;

    fn params(s: u8) -> EncryptionParams {
        EncryptionParams::new(Key([3; 32]), Nonce::from_index(11), s).unwrap()
    }

    /// Per-bit reference: bit t of the stream hits plane t / count, pixel t % count.
    fn encrypt_reference(img: &GrayImage, p: &EncryptionParams) -> GrayImage {
        let count = img.pixels().len();
        let bits = keystream_bits(&p.keystream(), p.planes() as usize * count);
        let mut px = img.pixels().to_vec();
        for (t, bit) in bits.into_iter().enumerate() {
            if bit {
                px[t % count] ^= 0x80 >> (t / count);
            }
        }
        GrayImage::new(img.width(), img.height(), px).unwrap()
    }

    fn arb_image() -> impl Strategy<Value = GrayImage> {
        (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
        })
    }

    #[test]
    fn s_zero_is_identity() {
        let img = GrayImage::from_fn(7, 5, |i, j| (i * 31 + j * 17) as u8);
        assert_eq!(encrypt_planes(&img, &params(0)), img);
        assert_eq!(zero_planes(&img, 0).unwrap(), img);
        assert_eq!(shift_planes(&img, 0).unwrap(), img);
    }

    #[test]
    fn xor_on_top_two_planes() {
        // First keystream byte for this key/nonce decides b^0 for pixel 0; find a
        // nonce whose first bits across planes are (1, 0).
        let img = GrayImage::new(1, 1, vec![0b1011_0101]).unwrap();
        for index in 0..64u128 {
            let p = EncryptionParams::new(Key([0; 32]), Nonce::from_index(index), 2).unwrap();
            let bits = keystream_bits(&p.keystream(), 2);
            if bits == [true, false] {
                assert_eq!(encrypt_planes(&img, &p).get(0, 0), 0b0011_0101);
                return;
            }
        }
        panic!("no nonce produced bits (1, 0)");
    }

    #[test]
    fn mask_and_shift_examples() {
        let img = GrayImage::new(2, 1, vec![0xFF, 0b0001_0101]).unwrap();
        assert_eq!(zero_planes(&img, 3).unwrap().get(0, 0), 0x1F);
        assert!(zero_planes(&img, 8)
            .unwrap()
            .pixels()
            .iter()
            .all(|&p| p == 0));
        assert_eq!(shift_planes(&img, 3).unwrap().get(0, 1), 0b1010_1000);
        assert!(shift_planes(&img, 8)
            .unwrap()
            .pixels()
            .iter()
            .all(|&p| p == 0));
    }

    #[test]
    fn out_of_range_plane_count() {
        let img = GrayImage::filled(2, 2, 1);
        assert!(matches!(
            zero_planes(&img, 9),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            shift_planes(&img, 9),
            Err(Error::InvalidArgument(_))
        ));
        assert!(EncryptionParams::new(Key([0; 32]), Nonce::from_index(0), 9).is_err());
    }

    #[test]
    fn zero_matches_shift_formulation_for_all_bytes() {
        for s in 0..=8u8 {
            for p in 0..=255u8 {
                let wide = ((p as u16) << s) as u8;
                let shifted = if s == 8 { 0 } else { wide >> s };
                assert_eq!(p & low_mask(s), shifted);
            }
        }
    }

    proptest! {
        #[test]
        fn matches_bitwise_reference(img in arb_image(), s in 0u8..=8) {
            let p = params(s);
            prop_assert_eq!(encrypt_planes(&img, &p), encrypt_reference(&img, &p));
        }

        #[test]
        fn involution(img in arb_image(), s in 0u8..=8) {
            let p = params(s);
            prop_assert_eq!(encrypt_planes(&encrypt_planes(&img, &p), &p), img);
        }

        #[test]
        fn zeroing_commutes_with_encryption(img in arb_image(), s in 0u8..=8) {
            let p = params(s);
            prop_assert_eq!(
                zero_planes(&encrypt_planes(&img, &p), s).unwrap(),
                zero_planes(&img, s).unwrap()
            );
        }

        #[test]
        fn nested_zeroing(img in arb_image(), a in 0u8..=8, b in 0u8..=8) {
            let (s1, s2) = (a.min(b), a.max(b));
            prop_assert_eq!(
                zero_planes(&zero_planes(&img, s2).unwrap(), s1).unwrap(),
                zero_planes(&img, s2).unwrap()
            );
        }

        #[test]
        fn shift_discards_zeroed_planes(img in arb_image(), s in 0u8..=8) {
            prop_assert_eq!(
                shift_planes(&zero_planes(&img, s).unwrap(), s).unwrap(),
                shift_planes(&img, s).unwrap()
            );
        }
    }
}
