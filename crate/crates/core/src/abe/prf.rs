//! `F_gamma: row index -> Z_p`, HMAC-SHA256 with rejection sampling.

use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use sha2::Sha256;

use crate::galois::{Fe, Field};

const DOMAIN: &[u8] = b"lsss/abe/contraction-key/v1";

/// Uniform element of `field` derived from `seed` and `index`.
///
/// Candidates are HMAC outputs truncated to the bit length of `p`; those
/// `>= p` are rejected and the next counter value is tried.
pub fn derive(seed: &[u8; 32], index: u64, field: &Field) -> Fe {
    let p = field.modulus();
    let bits = p.bits();
    let bytes = bits.div_ceil(8) as usize;
    let blocks = bytes.div_ceil(32);
    let excess = (bytes as u64) * 8 - bits;
    for counter in 0u64.. {
        let mut buf = Vec::with_capacity(blocks * 32);
        for block in 0..blocks as u64 {
            let mut mac = Hmac::<Sha256>::new_from_slice(seed).expect("any key length");
            mac.update(DOMAIN);
            mac.update(&index.to_le_bytes());
            mac.update(&counter.to_le_bytes());
            mac.update(&block.to_le_bytes());
            buf.extend_from_slice(&mac.finalize().into_bytes());
        }
        buf.truncate(bytes);
        if let Some(last) = buf.last_mut() {
            *last &= 0xffu8 >> excess;
        }
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < p {
            return field.elem_big(&candidate);
        }
    }
    unreachable!("counter space exhausted")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_index_separated() {
        let f = Field::from_decimal(crate::abe::P160).unwrap();
        let seed = [7u8; 32];
        assert_eq!(derive(&seed, 3, &f), derive(&seed, 3, &f));
        assert_ne!(derive(&seed, 3, &f), derive(&seed, 4, &f));
        assert_ne!(derive(&seed, 3, &f), derive(&[8u8; 32], 3, &f));
    }

    #[test]
    fn small_field_roughly_uniform() {
        let f = Field::new(5).unwrap();
        let seed = [1u8; 32];
        let mut counts = [0usize; 5];
        for i in 0..5000 {
            counts[derive(&seed, i, &f).to_u64().unwrap() as usize] += 1;
        }
        for c in counts {
            assert!((850..1150).contains(&c), "{counts:?}");
        }
    }
}
