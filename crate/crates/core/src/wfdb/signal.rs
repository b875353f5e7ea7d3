//! Format 212: pairs of 12-bit two's-complement samples packed into three bytes.
//!
//! ```text
//! byte0 = s0[7:0]
//! byte1 = s1[11:8] << 4 | s0[11:8]
//! byte2 = s1[7:0]
//! ```

use crate::error::{Error, Result};

fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decodes channel-interleaved format-212 bytes into `num_samples` frames of
/// `num_signals` ADC values (`out[frame][channel]`).
pub fn decode_format212(
    bytes: &[u8],
    num_signals: usize,
    num_samples: usize,
) -> Result<Vec<Vec<i16>>> {
    if num_signals == 0 {
        return Err(Error::Format212("num_signals must be at least 1".into()));
    }
    let total = num_signals
        .checked_mul(num_samples)
        .ok_or_else(|| Error::Format212("sample count overflow".into()))?;
    let needed = (total * 3).div_ceil(2);
    // An odd final sample may be written as a full 3-byte group.
    let padded = total.div_ceil(2) * 3;
    if bytes.len() < needed {
        return Err(Error::Format212(format!(
            "truncated: {} bytes for {total} samples (need {needed})",
            bytes.len()
        )));
    }
    if bytes.len() > padded {
        return Err(Error::Format212(format!(
            "{} trailing bytes beyond the last sample group",
            bytes.len() - padded
        )));
    }

    let mut flat = Vec::with_capacity(total);
    for group in bytes.chunks(3) {
        if flat.len() == total {
            break;
        }
        let b0 = u16::from(group[0]);
        let b1 = u16::from(group[1]);
        flat.push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
        if flat.len() < total {
            let b2 = u16::from(group[2]);
            flat.push(sign_extend_12(b2 | ((b1 & 0xF0) << 4)));
        }
    }
    Ok(flat.chunks(num_signals).map(<[i16]>::to_vec).collect())
}

/// Packs interleaved 12-bit samples into format-212 bytes.
///
/// Used for writing fixtures; values are clamped to the 12-bit range.
pub fn encode_format212(samples: &[i16]) -> Vec<u8> {
    let mut out = Vec::with_capacity((samples.len() * 3).div_ceil(2));
    for pair in samples.chunks(2) {
        let s0 = (pair[0].clamp(-2048, 2047) as u16) & 0x0FFF;
        out.push((s0 & 0xFF) as u8);
        match pair.get(1) {
            Some(&s1) => {
                let s1 = (s1.clamp(-2048, 2047) as u16) & 0x0FFF;
                out.push((((s1 >> 8) << 4) | (s0 >> 8)) as u8);
                out.push((s1 & 0xFF) as u8);
            }
            None => out.push((s0 >> 8) as u8),
        }
    }
    out
}

/// WFDB checksum: sum of raw samples modulo 2^16, read as signed.
pub fn checksum(samples: impl IntoIterator<Item = i16>) -> i16 {
    samples
        .into_iter()
        .fold(0u16, |acc, s| acc.wrapping_add(s as u16)) as i16
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_group() {
        assert_eq!(
            decode_format212(&[0, 0, 0], 2, 1).unwrap(),
            vec![vec![0, 0]]
        );
    }

    #[test]
    fn minus_one_then_zero() {
        assert_eq!(
            decode_format212(&[0xFF, 0x0F, 0x00], 2, 1).unwrap(),
            vec![vec![-1, 0]]
        );
    }

    #[test]
    fn high_nibble_goes_to_second_sample() {
        // s1 = 0x800 -> -2048, s0 = 0x7FF -> 2047
        let d = decode_format212(&[0xFF, 0x87, 0x00], 1, 2).unwrap();
        assert_eq!(d, vec![vec![2047], vec![-2048]]);
    }

    #[test]
    fn truncated_and_trailing() {
        assert!(decode_format212(&[0, 0], 2, 1).is_err());
        assert!(decode_format212(&[0, 0, 0, 0], 2, 1).is_err());
        // odd count: 2 bytes is exact, 3 is a padded group
        assert_eq!(decode_format212(&[5, 0], 1, 1).unwrap(), vec![vec![5]]);
        assert_eq!(decode_format212(&[5, 0, 0], 1, 1).unwrap(), vec![vec![5]]);
    }

    #[test]
    fn checksum_wraps() {
        assert_eq!(checksum([i16::MAX, 1]), i16::MIN);
        assert_eq!(checksum([-1, -1]), -2);
        assert_eq!(checksum(std::iter::empty()), 0);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(v in prop::collection::vec(-2048i16..=2047, 0..200)) {
            let mut v = v;
            if v.len() % 2 == 1 { v.pop(); }
            let bytes = encode_format212(&v);
            prop_assert_eq!(bytes.len(), v.len() * 3 / 2);
            let frames = decode_format212(&bytes, 1, v.len()).unwrap();
            let flat: Vec<i16> = frames.into_iter().flatten().collect();
            prop_assert_eq!(flat, v);
        }
    }
}
