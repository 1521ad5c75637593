//! Waters ciphertext-policy ABE with ciphertext contraction.
//!
//! A policy is an MSP whose participant `j` is the attribute
//! `attributes[j]` of the universe `0..|U|`. Removing an attribute set `Q`
//! from a policy (contraction) can be done three ways:
//!
//! * [`contract_sct`]: rewrite the `C_i` components with the contraction key
//!   entries of `Q`'s rows; the result is a smaller ciphertext for `Γ_{·Q}`.
//! * [`contract_ect`]: append those entries to the ciphertext unchanged.
//! * [`contract_re`]: decrypt with an authorized key and encrypt again.
//!
//! Everything is generic over a [`PairingBackend`]; the only backend shipped
//! is [`DebugPairing`], which is **insecure** and exists to check the algebra.

mod pairing;
pub mod prf;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::access::ParticipantSet;
use crate::error::{Error, Result};
use crate::galois::{Fe, Field};
use crate::msp::{Msp, MspDoc, MAX_ENUMERATION};

pub use pairing::{DebugPairing, PairingBackend, P160};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey<B: PairingBackend> {
    pub g: B::G,
    pub g_a: B::G,
    pub e_gg_beta: B::Gt,
    /// `T_x` for every attribute of the universe.
    pub t: Vec<B::G>,
}

impl<B: PairingBackend> PublicKey<B> {
    pub fn universe(&self) -> usize {
        self.t.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterKey<B: PairingBackend> {
    pub g_beta: B::G,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey<B: PairingBackend> {
    /// Sorted, without duplicates.
    pub attributes: Vec<usize>,
    pub k: B::G,
    pub l: B::G,
    /// `K_x`, aligned with `attributes`.
    pub kx: Vec<B::G>,
}

impl<B: PairingBackend> SecretKey<B> {
    pub fn component(&self, attribute: usize) -> Option<&B::G> {
        self.attributes
            .binary_search(&attribute)
            .ok()
            .map(|i| &self.kx[i])
    }

    /// `e(K, g) = e(g,g)^β · e(g^a, L)`
    pub fn is_consistent(&self, backend: &B, pk: &PublicKey<B>) -> bool {
        backend.pair(&self.k, &pk.g)
            == backend.gt_mul(&pk.e_gg_beta, &backend.pair(&pk.g_a, &self.l))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbeCiphertext<B: PairingBackend> {
    pub msp: Msp,
    /// Policy participant -> attribute.
    pub attributes: Vec<usize>,
    /// Current row -> row index at encryption time (keys the contraction key).
    pub row_labels: Vec<usize>,
    pub c: B::Gt,
    pub c_prime: B::G,
    /// `(C_i, D_i)` per row.
    pub rows: Vec<(B::G, B::G)>,
    /// Contraction key entries appended by [`contract_ect`], by row label.
    pub appended: BTreeMap<usize, Fe>,
}

impl<B: PairingBackend> AbeCiphertext<B> {
    fn participant_of_attribute(&self, attribute: usize) -> Option<usize> {
        self.attributes.iter().position(|&a| a == attribute)
    }

    /// Policy participants for a list of attributes; every one must occur.
    pub fn participants(&self, attributes: &[usize]) -> Result<ParticipantSet> {
        attributes
            .iter()
            .map(|&a| {
                self.participant_of_attribute(a).ok_or_else(|| {
                    Error::invalid(format!("attribute {} does not occur in the policy", a + 1))
                })
            })
            .collect()
    }

    /// Attributes whose rows are unblinded by appended key entries.
    pub fn appended_attributes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.rows.len())
            .filter(|&i| self.appended.contains_key(&self.row_labels[i]))
            .map(|i| self.attributes[self.msp.psi()[i]])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn attribute_of_row(&self, row: usize) -> usize {
        self.attributes[self.msp.psi()[row]]
    }
}

/// Per-row randomness `r_i` of an encryption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionKey {
    /// `r_i` by row label.
    Explicit(BTreeMap<usize, Fe>),
    /// `r_i = F_γ(i)` for rows `0..rows`.
    Prf { seed: [u8; 32], rows: usize },
}

impl ContractionKey {
    pub fn get(&self, row: usize, field: &Field) -> Option<Fe> {
        match self {
            ContractionKey::Explicit(m) => m.get(&row).cloned(),
            ContractionKey::Prf { seed, rows } => {
                (row < *rows).then(|| prf::derive(seed, row as u64, field))
            }
        }
    }

    /// Number of scalars needed to write the key out explicitly.
    pub fn len(&self) -> usize {
        match self {
            ContractionKey::Explicit(m) => m.len(),
            ContractionKey::Prf { rows, .. } => *rows,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_explicit(&self, field: &Field) -> ContractionKey {
        match self {
            ContractionKey::Explicit(_) => self.clone(),
            ContractionKey::Prf { rows, .. } => {
                self.restrict_rows(&(0..*rows).collect::<Vec<_>>(), field)
            }
        }
    }

    /// The entries for the given row labels that this key knows.
    pub fn restrict_rows(&self, rows: &[usize], field: &Field) -> ContractionKey {
        ContractionKey::Explicit(
            rows.iter()
                .filter_map(|&r| self.get(r, field).map(|v| (r, v)))
                .collect(),
        )
    }

    /// `CK_Q`: the entries for the rows of the attributes `q` in `ct`.
    pub fn restrict<B: PairingBackend>(
        &self,
        ct: &AbeCiphertext<B>,
        q: &[usize],
        field: &Field,
    ) -> Result<ContractionKey> {
        let qs = ct.participants(q)?;
        let labels: Vec<usize> = ct.msp.rows_of(qs).iter().map(|&i| ct.row_labels[i]).collect();
        let out = self.restrict_rows(&labels, field);
        if let Some(&missing) = labels.iter().find(|&&l| out.get(l, field).is_none()) {
            return Err(Error::MissingKey(missing + 1));
        }
        Ok(out)
    }
}

/// Element counts of a ciphertext, independent of any encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CiphertextSize {
    /// Target-group elements (`C`).
    pub gt: usize,
    /// Source-group elements (`C'`, every `C_i` and `D_i`).
    pub g: usize,
    pub matrix_scalars: usize,
    pub map_entries: usize,
    /// Appended contraction key entries.
    pub ck_scalars: usize,
}

impl CiphertextSize {
    /// `C`, `C'` and the `(C_i, D_i)` pairs.
    pub fn group_elements(&self) -> usize {
        self.gt + self.g
    }

    pub fn total(&self) -> usize {
        self.gt + self.g + self.matrix_scalars + self.map_entries + self.ck_scalars
    }
}

pub fn ciphertext_size<B: PairingBackend>(ct: &AbeCiphertext<B>) -> CiphertextSize {
    CiphertextSize {
        gt: 1,
        g: 1 + 2 * ct.rows.len(),
        matrix_scalars: ct.msp.len() * ct.msp.dim(),
        map_entries: ct.msp.len(),
        ck_scalars: ct.appended.len(),
    }
}

pub fn setup<B: PairingBackend, R: Rng + ?Sized>(
    backend: &B,
    universe: usize,
    rng: &mut R,
) -> Result<(PublicKey<B>, MasterKey<B>)> {
    if universe == 0 {
        return Err(Error::invalid("attribute universe must be nonempty"));
    }
    let g = backend.generator();
    let beta = backend.scalar(rng);
    let a = backend.scalar(rng);
    let g_beta = backend.g_pow(&g, &beta);
    let pk = PublicKey {
        g_a: backend.g_pow(&g, &a),
        e_gg_beta: backend.pair(&g, &g_beta),
        t: (0..universe).map(|_| backend.g_random(rng)).collect(),
        g,
    };
    Ok((pk, MasterKey { g_beta }))
}

pub fn keygen<B: PairingBackend, R: Rng + ?Sized>(
    backend: &B,
    pk: &PublicKey<B>,
    msk: &MasterKey<B>,
    attributes: &[usize],
    rng: &mut R,
) -> Result<SecretKey<B>> {
    let mut attrs = attributes.to_vec();
    attrs.sort_unstable();
    attrs.dedup();
    if let Some(&bad) = attrs.iter().find(|&&x| x >= pk.universe()) {
        return Err(Error::invalid(format!(
            "attribute {} outside the universe 1..={}",
            bad + 1,
            pk.universe()
        )));
    }
    let tau = backend.scalar(rng);
    let k = backend.g_mul(&msk.g_beta, &backend.g_pow(&pk.g_a, &tau));
    let l = backend.g_pow(&pk.g, &tau);
    let kx = attrs.iter().map(|&x| backend.g_pow(&pk.t[x], &tau)).collect();
    Ok(SecretKey {
        attributes: attrs,
        k,
        l,
        kx,
    })
}

fn check_policy<B: PairingBackend>(
    backend: &B,
    pk: &PublicKey<B>,
    msp: &Msp,
    attributes: &[usize],
) -> Result<()> {
    if msp.field().modulus() != backend.scalars().modulus() {
        return Err(Error::invalid("policy field differs from the group order"));
    }
    if attributes.len() != msp.n() {
        return Err(Error::Dimension(format!(
            "{} attributes for {} policy participants",
            attributes.len(),
            msp.n()
        )));
    }
    let mut seen = attributes.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != attributes.len() {
        return Err(Error::invalid("policy attributes must be distinct"));
    }
    if let Some(&bad) = attributes.iter().find(|&&a| a >= pk.universe()) {
        return Err(Error::invalid(format!("attribute {} outside the universe", bad + 1)));
    }
    Ok(())
}

/// Deterministic encryption with sharing vector `v = (s, v_2, ..)` and the
/// per-row randomness taken from `ck`.
pub fn encrypt_with<B: PairingBackend>(
    backend: &B,
    pk: &PublicKey<B>,
    message: &B::Gt,
    msp: &Msp,
    attributes: &[usize],
    v: &[Fe],
    ck: &ContractionKey,
) -> Result<AbeCiphertext<B>> {
    check_policy(backend, pk, msp, attributes)?;
    if v.len() != msp.dim() {
        return Err(Error::Dimension(format!(
            "sharing vector of length {} for {} columns",
            v.len(),
            msp.dim()
        )));
    }
    let field = backend.scalars();
    let shares = msp.matrix().mul_vec(v)?;
    let s = &v[0];
    let rows = shares
        .iter()
        .enumerate()
        .map(|(i, si)| {
            let r = ck.get(i, field).ok_or(Error::MissingKey(i + 1))?;
            let tx = &pk.t[attributes[msp.psi()[i]]];
            let ci = backend.g_mul(
                &backend.g_pow(&pk.g_a, si),
                &backend.g_inv(&backend.g_pow(tx, &r)),
            );
            Ok((ci, backend.g_pow(&pk.g, &r)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AbeCiphertext {
        msp: msp.clone(),
        attributes: attributes.to_vec(),
        row_labels: (0..msp.len()).collect(),
        c: backend.gt_mul(message, &backend.gt_pow(&pk.e_gg_beta, s)),
        c_prime: backend.g_pow(&pk.g, s),
        rows,
        appended: BTreeMap::new(),
    })
}

/// Encrypts under `msp` with participant `j` standing for attribute
/// `attributes[j]`. The contraction key is PRF-derived from a fresh seed.
pub fn encrypt_star_for<B: PairingBackend, R: Rng + ?Sized>(
    backend: &B,
    pk: &PublicKey<B>,
    message: &B::Gt,
    msp: &Msp,
    attributes: &[usize],
    rng: &mut R,
) -> Result<(AbeCiphertext<B>, ContractionKey)> {
    let v: Vec<Fe> = (0..msp.dim()).map(|_| backend.scalar(rng)).collect();
    let ck = ContractionKey::Prf {
        seed: rng.gen(),
        rows: msp.len(),
    };
    let ct = encrypt_with(backend, pk, message, msp, attributes, &v, &ck)?;
    Ok((ct, ck))
}

/// [`encrypt_star_for`] with participant `j` as attribute `j`.
pub fn encrypt_star<B: PairingBackend, R: Rng + ?Sized>(
    backend: &B,
    pk: &PublicKey<B>,
    message: &B::Gt,
    msp: &Msp,
    rng: &mut R,
) -> Result<(AbeCiphertext<B>, ContractionKey)> {
    let attributes: Vec<usize> = (0..msp.n()).collect();
    encrypt_star_for(backend, pk, message, msp, &attributes, rng)
}

pub fn decrypt<B: PairingBackend>(
    backend: &B,
    pk: &PublicKey<B>,
    sk: &SecretKey<B>,
    ct: &AbeCiphertext<B>,
) -> Result<B::Gt> {
    let usable: Vec<usize> = (0..ct.rows.len())
        .filter(|&i| {
            ct.appended.contains_key(&ct.row_labels[i])
                || sk.component(ct.attribute_of_row(i)).is_some()
        })
        .collect();
    let alpha = ct
        .msp
        .matrix()
        .select_rows(&usable)
        .solve_in_span(&ct.msp.target())?
        .ok_or(Error::UnauthorizedAttributes)?;
    let field = backend.scalars();
    let mut denom = backend.gt_one();
    for (&i, a) in usable.iter().zip(&alpha) {
        if field.is_zero(a) {
            continue;
        }
        let (ci, di) = &ct.rows[i];
        let x = ct.attribute_of_row(i);
        // Both branches give e(g,g)^{a s_i τ}.
        let term = match ct.appended.get(&ct.row_labels[i]) {
            Some(r) => backend.pair(&backend.g_mul(ci, &backend.g_pow(&pk.t[x], r)), &sk.l),
            None => {
                let kx = sk.component(x).expect("usable row");
                backend.gt_mul(&backend.pair(ci, &sk.l), &backend.pair(di, kx))
            }
        };
        denom = backend.gt_mul(&denom, &backend.gt_pow(&term, a));
    }
    let blind = backend.gt_mul(&backend.pair(&ct.c_prime, &sk.k), &backend.gt_inv(&denom));
    Ok(backend.gt_mul(&ct.c, &backend.gt_inv(&blind)))
}

/// Rewrites the ciphertext for the policy contracted at the attributes `q`.
///
/// For a single attribute `y` with row `ℓ` and pivot column `k`,
/// `C'_i = C_i (C_ℓ T_y^{r_ℓ})^{-h_ik/h_ℓk}`. For several, the same update
/// is applied with the coefficients `(h_i)_K U^{-1}` of the contraction
/// certificate against each unblinded `C_w T^{r_w}`, `w ∈ W`.
pub fn contract_sct<B: PairingBackend>(
    backend: &B,
    pk: &PublicKey<B>,
    ct: &AbeCiphertext<B>,
    q: &[usize],
    ck_q: &ContractionKey,
) -> Result<AbeCiphertext<B>> {
    if !ct.appended.is_empty() {
        return Err(Error::invalid(
            "sct contraction of a ciphertext that carries appended key entries",
        ));
    }
    let field = backend.scalars();
    let qs = ct.participants(q)?;
    if qs.is_empty() {
        return Err(Error::invalid("nothing to contract"));
    }
    let row_of = |p: usize| ct.msp.rows_of(ParticipantSet::singleton(p))[0];
    let (msp, reindex, w, coefficients): (Msp, Vec<usize>, Vec<usize>, Vec<Vec<Fe>>) =
        if qs.len() == 1 {
            let y = qs.iter().next().expect("one member");
            let c = ct.msp.contract_single(y)?;
            let pivot_inv = field
                .inv(&ct.msp.matrix().row(row_of(y))[c.k])
                .expect("pivot is nonzero");
            let coeffs = c
                .reindex
                .iter()
                .map(|&p| vec![field.mul(&ct.msp.matrix().row(row_of(p))[c.k], &pivot_inv)])
                .collect();
            (c.msp, c.reindex, vec![y], coeffs)
        } else {
            let c = ct.msp.contract_multi(qs)?;
            let coeffs = c
                .reindex
                .iter()
                .map(|&p| c.certificate.coefficients(ct.msp.matrix().row(row_of(p))))
                .collect();
            (c.msp, c.reindex, c.certificate.w.clone(), coeffs)
        };
    // g^{a s_w} for w in W.
    let unblinded = w
        .iter()
        .map(|&p| {
            let row = row_of(p);
            let label = ct.row_labels[row];
            let r = ck_q.get(label, field).ok_or(Error::MissingKey(label + 1))?;
            let tx = &pk.t[ct.attributes[p]];
            Ok(backend.g_mul(&ct.rows[row].0, &backend.g_pow(tx, &r)))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = reindex
        .iter()
        .zip(&coefficients)
        .map(|(&p, coeffs)| {
            let (ci, di) = &ct.rows[row_of(p)];
            let ci = coeffs.iter().zip(&unblinded).fold(ci.clone(), |acc, (c, u)| {
                backend.g_mul(&acc, &backend.g_inv(&backend.g_pow(u, c)))
            });
            (ci, di.clone())
        })
        .collect();
    Ok(AbeCiphertext {
        msp,
        attributes: reindex.iter().map(|&p| ct.attributes[p]).collect(),
        row_labels: reindex.iter().map(|&p| ct.row_labels[row_of(p)]).collect(),
        c: ct.c.clone(),
        c_prime: ct.c_prime.clone(),
        rows,
        appended: BTreeMap::new(),
    })
}

/// Appends `CK_Q` to the ciphertext. Rows of `q` become usable by anyone,
/// so decryption needs only an attribute set authorized for `Γ_{·Q}`.
pub fn contract_ect<B: PairingBackend>(
    backend: &B,
    ct: &AbeCiphertext<B>,
    q: &[usize],
    ck_q: &ContractionKey,
) -> Result<AbeCiphertext<B>> {
    let field = backend.scalars();
    let qs = ct.participants(q)?;
    let removed = qs.union(ct.participants(&ct.appended_attributes())?);
    if ct.msp.authorizes(removed)? {
        return Err(Error::AuthorizedContraction);
    }
    let mut out = ct.clone();
    for row in ct.msp.rows_of(qs) {
        let label = ct.row_labels[row];
        let r = ck_q.get(label, field).ok_or(Error::MissingKey(label + 1))?;
        out.appended.insert(label, r);
    }
    Ok(out)
}

/// Decrypts with `sk` and encrypts the message again under a fresh policy
/// for `Γ_{·Q}` (where `Q` also covers attributes removed earlier by
/// [`contract_ect`]). Threshold policies get a Shamir scheme; other ideal
/// policies use the contracted span program.
pub fn contract_re<B: PairingBackend, R: Rng + ?Sized>(
    backend: &B,
    pk: &PublicKey<B>,
    sk: &SecretKey<B>,
    ct: &AbeCiphertext<B>,
    q: &[usize],
    rng: &mut R,
) -> Result<(AbeCiphertext<B>, ContractionKey)> {
    let message = decrypt(backend, pk, sk, ct)?;
    let removed = ct
        .participants(q)?
        .union(ct.participants(&ct.appended_attributes())?);
    if ct.msp.authorizes(removed)? {
        return Err(Error::AuthorizedContraction);
    }
    let n = ct.msp.n();
    let remaining: Vec<usize> = (0..n).filter(|&p| !removed.contains(p)).collect();
    let threshold = if n <= MAX_ENUMERATION {
        ct.msp.realized_structure()?.threshold_of()
    } else {
        None
    };
    let msp = match threshold {
        Some(t) => Msp::shamir(t - removed.len(), n - removed.len(), backend.scalars(), None)?,
        None => ct.msp.contract_multi(removed)?.msp,
    };
    let attributes: Vec<usize> = remaining.iter().map(|&p| ct.attributes[p]).collect();
    encrypt_star_for(backend, pk, &message, &msp, &attributes, rng)
}

// ---------------------------------------------------------------------------
// Serialization. Every document names the backend and the group order.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeyDoc {
    pub backend: String,
    pub modulus: String,
    pub g: String,
    pub g_a: String,
    pub e_gg_beta: String,
    pub t: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterKeyDoc {
    pub backend: String,
    pub modulus: String,
    pub g_beta: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKeyDoc {
    pub backend: String,
    pub modulus: String,
    /// 1-based.
    pub attributes: Vec<usize>,
    pub k: String,
    pub l: String,
    pub kx: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntryDoc {
    /// 1-based row label.
    pub row: usize,
    pub r: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiphertextDoc {
    pub backend: String,
    pub modulus: String,
    pub policy: MspDoc,
    /// 1-based attribute of each policy participant.
    pub attributes: Vec<usize>,
    /// 1-based.
    pub row_labels: Vec<usize>,
    pub c: String,
    pub c_prime: String,
    /// `[C_i, D_i]`
    pub rows: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub appended: Vec<KeyEntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ContractionKeyDoc {
    Explicit { modulus: String, entries: Vec<KeyEntryDoc> },
    Prf { modulus: String, seed: String, rows: usize },
}

fn modulus_of<B: PairingBackend>(backend: &B) -> String {
    backend.scalars().modulus().to_string()
}

fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn zero_based(v: &[usize], what: &str) -> Result<Vec<usize>> {
    v.iter()
        .map(|&x| {
            x.checked_sub(1)
                .ok_or_else(|| Error::invalid(format!("{what} labels are 1-based")))
        })
        .collect()
}

impl<B: PairingBackend> PublicKey<B> {
    pub fn to_json(&self, backend: &B) -> String {
        to_json(&PublicKeyDoc {
            backend: backend.id().into(),
            modulus: modulus_of(backend),
            g: backend.encode_g(&self.g),
            g_a: backend.encode_g(&self.g_a),
            e_gg_beta: backend.encode_gt(&self.e_gg_beta),
            t: self.t.iter().map(|x| backend.encode_g(x)).collect(),
        })
    }

    pub fn from_json(backend: &B, s: &str) -> Result<Self> {
        let doc: PublicKeyDoc = serde_json::from_str(s)?;
        pairing::check_backend(backend, &doc.backend, &doc.modulus)?;
        Ok(PublicKey {
            g: backend.decode_g(&doc.g)?,
            g_a: backend.decode_g(&doc.g_a)?,
            e_gg_beta: backend.decode_gt(&doc.e_gg_beta)?,
            t: doc.t.iter().map(|x| backend.decode_g(x)).collect::<Result<_>>()?,
        })
    }
}

impl<B: PairingBackend> MasterKey<B> {
    pub fn to_json(&self, backend: &B) -> String {
        to_json(&MasterKeyDoc {
            backend: backend.id().into(),
            modulus: modulus_of(backend),
            g_beta: backend.encode_g(&self.g_beta),
        })
    }

    pub fn from_json(backend: &B, s: &str) -> Result<Self> {
        let doc: MasterKeyDoc = serde_json::from_str(s)?;
        pairing::check_backend(backend, &doc.backend, &doc.modulus)?;
        Ok(MasterKey {
            g_beta: backend.decode_g(&doc.g_beta)?,
        })
    }
}

impl<B: PairingBackend> SecretKey<B> {
    pub fn to_json(&self, backend: &B) -> String {
        to_json(&SecretKeyDoc {
            backend: backend.id().into(),
            modulus: modulus_of(backend),
            attributes: one_based(&self.attributes),
            k: backend.encode_g(&self.k),
            l: backend.encode_g(&self.l),
            kx: self.kx.iter().map(|x| backend.encode_g(x)).collect(),
        })
    }

    pub fn from_json(backend: &B, s: &str) -> Result<Self> {
        let doc: SecretKeyDoc = serde_json::from_str(s)?;
        pairing::check_backend(backend, &doc.backend, &doc.modulus)?;
        let attributes = zero_based(&doc.attributes, "attribute")?;
        if attributes.len() != doc.kx.len() || attributes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("key attributes must be strictly increasing, one K_x each"));
        }
        Ok(SecretKey {
            attributes,
            k: backend.decode_g(&doc.k)?,
            l: backend.decode_g(&doc.l)?,
            kx: doc.kx.iter().map(|x| backend.decode_g(x)).collect::<Result<_>>()?,
        })
    }
}

impl<B: PairingBackend> AbeCiphertext<B> {
    pub fn to_json(&self, backend: &B) -> String {
        to_json(&CiphertextDoc {
            backend: backend.id().into(),
            modulus: modulus_of(backend),
            policy: self.msp.to_doc(),
            attributes: one_based(&self.attributes),
            row_labels: one_based(&self.row_labels),
            c: backend.encode_gt(&self.c),
            c_prime: backend.encode_g(&self.c_prime),
            rows: self
                .rows
                .iter()
                .map(|(c, d)| [backend.encode_g(c), backend.encode_g(d)])
                .collect(),
            appended: self
                .appended
                .iter()
                .map(|(&row, r)| KeyEntryDoc {
                    row: row + 1,
                    r: r.to_string(),
                })
                .collect(),
        })
    }

    pub fn from_json(backend: &B, s: &str) -> Result<Self> {
        let doc: CiphertextDoc = serde_json::from_str(s)?;
        pairing::check_backend(backend, &doc.backend, &doc.modulus)?;
        let msp = Msp::from_doc(&doc.policy)?;
        if doc.attributes.len() != msp.n() || doc.row_labels.len() != msp.len() || doc.rows.len() != msp.len() {
            return Err(Error::Dimension("ciphertext components disagree with the policy".into()));
        }
        let field = backend.scalars();
        Ok(AbeCiphertext {
            msp,
            attributes: zero_based(&doc.attributes, "attribute")?,
            row_labels: zero_based(&doc.row_labels, "row")?,
            c: backend.decode_gt(&doc.c)?,
            c_prime: backend.decode_g(&doc.c_prime)?,
            rows: doc
                .rows
                .iter()
                .map(|[c, d]| Ok((backend.decode_g(c)?, backend.decode_g(d)?)))
                .collect::<Result<_>>()?,
            appended: doc
                .appended
                .iter()
                .map(|e| Ok((zero_based(&[e.row], "row")?[0], field.parse_elem(&e.r)?)))
                .collect::<Result<_>>()?,
        })
    }
}

impl ContractionKey {
    pub fn to_json(&self, field: &Field) -> String {
        let modulus = field.modulus().to_string();
        to_json(&match self {
            ContractionKey::Explicit(m) => ContractionKeyDoc::Explicit {
                modulus,
                entries: m
                    .iter()
                    .map(|(&row, r)| KeyEntryDoc {
                        row: row + 1,
                        r: r.to_string(),
                    })
                    .collect(),
            },
            ContractionKey::Prf { seed, rows } => ContractionKeyDoc::Prf {
                modulus,
                seed: hex::encode(seed),
                rows: *rows,
            },
        })
    }

    pub fn from_json(field: &Field, s: &str) -> Result<Self> {
        let doc: ContractionKeyDoc = serde_json::from_str(s)?;
        let modulus = match &doc {
            ContractionKeyDoc::Explicit { modulus, .. } | ContractionKeyDoc::Prf { modulus, .. } => modulus,
        };
        if *modulus != field.modulus().to_string() {
            return Err(Error::invalid(format!("contraction key uses modulus {modulus}")));
        }
        match doc {
            ContractionKeyDoc::Explicit { entries, .. } => Ok(ContractionKey::Explicit(
                entries
                    .iter()
                    .map(|e| Ok((zero_based(&[e.row], "row")?[0], field.parse_elem(&e.r)?)))
                    .collect::<Result<_>>()?,
            )),
            ContractionKeyDoc::Prf { seed, rows, .. } => {
                let bytes = hex::decode(&seed)
                    .ok()
                    .filter(|b| b.len() == 32)
                    .ok_or_else(|| Error::invalid("PRF seed must be 64 hex digits"))?;
                Ok(ContractionKey::Prf {
                    seed: bytes.try_into().expect("length checked"),
                    rows,
                })
            }
        }
    }
}
