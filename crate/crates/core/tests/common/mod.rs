//! Test corpus and brute-force oracles shared by the integration tests.
//!
//! The oracles only use field arithmetic and exhaustive enumeration, never
//! the library's elimination routines, so they can check them.
#![allow(dead_code)]

use lsss_core::access::ParticipantSet;
use lsss_core::galois::{Fe, Field};
use lsss_core::Msp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_c0de;

/// Random ideal span programs with a connected realized structure over
/// F_2, F_3 and F_5, `2 <= d <= n <= 6`. Deterministic.
pub fn corpus(size: usize) -> Vec<Msp> {
    corpus_over(&[2, 3, 5], 6, size, CORPUS_SEED)
}

pub fn corpus_over(primes: &[u64], max_n: usize, size: usize, seed: u64) -> Vec<Msp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<Field> = primes.iter().map(|&p| Field::new(p).unwrap()).collect();
    let mut shapes = Vec::new();
    for f in &fields {
        for n in 2..=max_n {
            for d in 2..=n {
                shapes.push((f.clone(), n, d));
            }
        }
    }
    let mut out = Vec::with_capacity(size);
    let mut i = 0usize;
    let mut misses = 0usize;
    while out.len() < size {
        let (f, n, d) = &shapes[i % shapes.len()];
        i += 1;
        match Msp::sample_connected_ideal(f, *n, *d, 200, &mut rng) {
            Some(m) => out.push(m),
            None => {
                misses += 1;
                assert!(misses < 10 * size, "sampler keeps failing");
            }
        }
    }
    out
}

/// Every vector of `F_p^len` for a small `p`.
pub fn all_vectors(field: &Field, len: usize) -> Vec<Vec<Fe>> {
    let p = field.modulus_u64().expect("small field");
    let total = p.pow(len as u32);
    (0..total)
        .map(|mut k| {
            (0..len)
                .map(|_| {
                    let digit = k % p;
                    k /= p;
                    field.elem(digit)
                })
                .collect()
        })
        .collect()
}

/// `A` is unauthorized iff some sharing vector with secret 1 gives `A`
/// only zero shares.
pub fn authorized_bf(msp: &Msp, a: ParticipantSet) -> bool {
    let f = msp.field();
    let rows: Vec<usize> = (0..msp.len()).filter(|&r| a.contains(msp.psi()[r])).collect();
    let tails = all_vectors(f, msp.dim() - 1);
    !tails.iter().any(|tail| {
        let mut x = vec![f.one()];
        x.extend(tail.iter().cloned());
        rows.iter().all(|&r| f.is_zero(&f.dot(msp.matrix().row(r), &x)))
    })
}

/// Authorization of every subset, indexed by bitmask.
pub fn family_bf(msp: &Msp) -> Vec<bool> {
    (0..1u64 << msp.n())
        .map(|bits| authorized_bf(msp, ParticipantSet::from_bits(bits)))
        .collect()
}

/// `{A ⊆ P \ Q : A ∪ Q authorized}` relabelled through `reindex`
/// (new index -> old index), straight from the definition.
pub fn contract_family(family: &[bool], q: ParticipantSet, reindex: &[usize]) -> Vec<bool> {
    (0..1u64 << reindex.len())
        .map(|bits| {
            let old = ParticipantSet::from_bits(bits).remap(|i| reindex[i]);
            family[old.union(q).bits() as usize]
        })
        .collect()
}

pub fn random_vector<R: Rng>(field: &Field, len: usize, rng: &mut R) -> Vec<Fe> {
    (0..len).map(|_| field.sample(rng)).collect()
}

/// All nonempty unauthorized subsets, by the library's span test.
pub fn unauthorized_sets(msp: &Msp) -> Vec<ParticipantSet> {
    (1..1u64 << msp.n())
        .map(ParticipantSet::from_bits)
        .filter(|&q| !msp.authorizes(q).unwrap())
        .collect()
}
