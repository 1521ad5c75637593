//! Bilinear pairing interface and an exact, insecure instantiation.

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};
use crate::galois::{Fe, Field};

/// Order of the pairing group used in the benchmarks: `2^159 + 162259276829213363391578010288129`.
pub const P160: &str = "730750818665451621361119245571504901405976559617";

/// A symmetric pairing `e: G x G -> G_T` on groups of prime order `p`.
///
/// Exponents are elements of the scalar field `Z_p`.
pub trait PairingBackend: Clone + Debug {
    type G: Clone + PartialEq + Eq + Debug;
    type Gt: Clone + PartialEq + Eq + Debug;

    /// Short name embedded in serialized keys and ciphertexts.
    fn id(&self) -> &'static str;
    fn scalars(&self) -> &Field;

    fn generator(&self) -> Self::G;
    fn g_mul(&self, a: &Self::G, b: &Self::G) -> Self::G;
    fn g_pow(&self, a: &Self::G, e: &Fe) -> Self::G;
    fn g_inv(&self, a: &Self::G) -> Self::G;
    /// A uniformly random element of `G`.
    fn g_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::G;

    fn gt_one(&self) -> Self::Gt;
    fn gt_mul(&self, a: &Self::Gt, b: &Self::Gt) -> Self::Gt;
    fn gt_pow(&self, a: &Self::Gt, e: &Fe) -> Self::Gt;
    fn gt_inv(&self, a: &Self::Gt) -> Self::Gt;

    fn pair(&self, a: &Self::G, b: &Self::G) -> Self::Gt;

    fn encode_g(&self, a: &Self::G) -> String;
    fn decode_g(&self, s: &str) -> Result<Self::G>;
    fn encode_gt(&self, a: &Self::Gt) -> String;
    fn decode_gt(&self, s: &str) -> Result<Self::Gt>;

    /// A random scalar in `Z_p`.
    fn scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        self.scalars().sample(rng)
    }
}

/// INSECURE. Every group element is stored as its discrete logarithm, so
/// `g^x` is just `x`, multiplication is addition and `e(g^x, g^y)` is the
/// target element with logarithm `x*y`.
///
/// Useful only for checking the algebra exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebugPairing {
    field: Field,
}

impl DebugPairing {
    pub const ID: &'static str = "debug-insecure";

    pub fn new(field: Field) -> Self {
        DebugPairing { field }
    }

    /// The 160-bit group order used for benchmarks.
    pub fn p160() -> Self {
        DebugPairing::new(Field::from_decimal(P160).expect("P160 is prime"))
    }

    /// The logarithm of `a` to base `g`. Trivial here, which is the point.
    pub fn dlog(&self, a: &Fe) -> Fe {
        a.clone()
    }
}

impl PairingBackend for DebugPairing {
    type G = Fe;
    type Gt = Fe;

    fn id(&self) -> &'static str {
        Self::ID
    }

    fn scalars(&self) -> &Field {
        &self.field
    }

    fn generator(&self) -> Fe {
        self.field.one()
    }

    fn g_mul(&self, a: &Fe, b: &Fe) -> Fe {
        self.field.add(a, b)
    }

    fn g_pow(&self, a: &Fe, e: &Fe) -> Fe {
        self.field.mul(a, e)
    }

    fn g_inv(&self, a: &Fe) -> Fe {
        self.field.neg(a)
    }

    fn g_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        self.field.sample(rng)
    }

    fn gt_one(&self) -> Fe {
        self.field.zero()
    }

    fn gt_mul(&self, a: &Fe, b: &Fe) -> Fe {
        self.field.add(a, b)
    }

    fn gt_pow(&self, a: &Fe, e: &Fe) -> Fe {
        self.field.mul(a, e)
    }

    fn gt_inv(&self, a: &Fe) -> Fe {
        self.field.neg(a)
    }

    fn pair(&self, a: &Fe, b: &Fe) -> Fe {
        self.field.mul(a, b)
    }

    fn encode_g(&self, a: &Fe) -> String {
        a.to_string()
    }

    fn decode_g(&self, s: &str) -> Result<Fe> {
        self.field.parse_elem(s)
    }

    fn encode_gt(&self, a: &Fe) -> String {
        a.to_string()
    }

    fn decode_gt(&self, s: &str) -> Result<Fe> {
        self.field.parse_elem(s)
    }
}

/// Checks that a serialized object was produced for `backend`.
pub(crate) fn check_backend<B: PairingBackend>(backend: &B, id: &str, modulus: &str) -> Result<()> {
    if id != backend.id() {
        return Err(Error::invalid(format!(
            "object was written by backend `{id}`, expected `{}`",
            backend.id()
        )));
    }
    if modulus != backend.scalars().modulus().to_string() {
        return Err(Error::invalid(format!("object uses group order {modulus}")));
    }
    Ok(())
}
