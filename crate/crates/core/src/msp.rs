//! Monotone span programs (linear secret sharing schemes).
//!
//! An [`Msp`] is a matrix `H` over `F_p` whose rows are assigned to
//! participants by `psi`, with the fixed target vector `(1, 0, ..., 0)`.
//! A secret `s` is shared as `H · (s, r_2, ..., r_d)`; a set `A` can recover
//! it iff the target lies in the span of the rows assigned to `A`.
//!
//! Contraction at an unauthorized set `Q` rewrites the rows of the remaining
//! participants so that the resulting ideal scheme realizes the contracted
//! structure; [`Msp::contract_single`] handles `|Q| = 1`,
//! [`Msp::contract_multi`] any size through an invertible `r x r` submatrix
//! of `Q`'s rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::access::{AccessStructure, ParticipantSet};
use crate::error::{Error, Result};
use crate::galois::{Fe, Field, FieldMatrix};

/// Largest participant count accepted by [`Msp::realized_structure`].
pub const MAX_ENUMERATION: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Msp {
    h: FieldMatrix,
    psi: Vec<usize>,
    n: usize,
}

/// Shares grouped by participant; `None` marks a participant whose shares
/// are not available (partial vectors for reconstruction).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareVector {
    shares: Vec<Option<Vec<Fe>>>,
}

impl ShareVector {
    pub fn new(shares: Vec<Vec<Fe>>) -> Self {
        ShareVector {
            shares: shares.into_iter().map(Some).collect(),
        }
    }

    /// One element per participant (ideal schemes).
    pub fn from_ideal(values: Vec<Fe>) -> Self {
        Self::new(values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn participants(&self) -> usize {
        self.shares.len()
    }

    pub fn get(&self, participant: usize) -> Option<&[Fe]> {
        self.shares.get(participant)?.as_deref()
    }

    /// Keeps only the shares of `a`.
    pub fn restrict(&self, a: ParticipantSet) -> Self {
        ShareVector {
            shares: self
                .shares
                .iter()
                .enumerate()
                .map(|(i, s)| if a.contains(i) { s.clone() } else { None })
                .collect(),
        }
    }

    /// The single share of each participant, if every participant holds
    /// exactly one.
    pub fn ideal_values(&self) -> Option<Vec<Fe>> {
        self.shares
            .iter()
            .map(|s| match s.as_deref() {
                Some([v]) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<&[Fe]>> {
        self.shares.iter().map(|s| s.as_deref())
    }
}

/// Output of [`Msp::share`]: the shares and the random tail `(r_2..r_d)` of
/// the sharing vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sharing {
    pub shares: ShareVector,
    pub randomness: Vec<Fe>,
}

/// The `(W, K, U^{-1})` triple used by a multi-participant contraction.
/// `w` holds original participant indices in ascending order, `k` column
/// indices (never 0); `u_inverse` is indexed in those orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionCertificate {
    pub w: Vec<usize>,
    pub k: Vec<usize>,
    pub u_inverse: FieldMatrix,
}

impl ContractionCertificate {
    /// `(h)_K · U^{-1}`: the coefficients, aligned with `w`, subtracted from
    /// a row (or share) to contract it.
    pub fn coefficients(&self, row: &[Fe]) -> Vec<Fe> {
        let restricted: Vec<Fe> = self.k.iter().map(|&c| row[c].clone()).collect();
        if restricted.is_empty() {
            return Vec::new();
        }
        self.u_inverse
            .vec_mul(&restricted)
            .expect("certificate dimensions agree")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub msp: Msp,
    /// New participant index -> original participant index.
    pub reindex: Vec<usize>,
    pub certificate: ContractionCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleContraction {
    pub msp: Msp,
    pub reindex: Vec<usize>,
    /// The pivot column chosen in `q`'s row.
    pub k: usize,
}

impl Msp {
    pub fn new(h: FieldMatrix, psi: Vec<usize>, n: usize) -> Result<Self> {
        if h.cols() == 0 {
            return Err(Error::invalid("share matrix needs at least one column"));
        }
        if psi.len() != h.rows() {
            return Err(Error::Dimension(format!(
                "psi has {} entries for {} rows",
                psi.len(),
                h.rows()
            )));
        }
        if n > crate::access::MAX_PARTICIPANTS {
            return Err(Error::TooLarge(n));
        }
        let mut seen = vec![false; n];
        for &p in &psi {
            if p >= n {
                return Err(Error::ParticipantOutOfRange { index: p, n });
            }
            seen[p] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!(
                "psi is not surjective: participant {} has no row",
                missing + 1
            )));
        }
        Ok(Msp { h, psi, n })
    }

    /// Ideal scheme with row `i` assigned to participant `i`.
    pub fn ideal(h: FieldMatrix) -> Result<Self> {
        let n = h.rows();
        Self::new(h, (0..n).collect(), n)
    }

    /// Shamir's `(t, n)` scheme: row `i` is `(x_i^0, ..., x_i^{t-1})`.
    /// Evaluation points default to `1..=n`.
    pub fn shamir(t: usize, n: usize, field: &Field, xs: Option<&[u64]>) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::invalid(format!("threshold ({t},{n}) needs 1 <= t <= n")));
        }
        if field.modulus() <= num_bigint::BigUint::from(n) {
            return Err(Error::invalid(format!(
                "modulus {} must exceed n = {n}",
                field.modulus()
            )));
        }
        let points: Vec<Fe> = match xs {
            Some(xs) if xs.len() != n => {
                return Err(Error::invalid(format!("{} evaluation points for n = {n}", xs.len())))
            }
            Some(xs) => field.elems(xs),
            None => (1..=n as u64).map(|x| field.elem(x)).collect(),
        };
        for (i, x) in points.iter().enumerate() {
            if field.is_zero(x) {
                return Err(Error::invalid("evaluation points must be nonzero"));
            }
            if points[..i].contains(x) {
                return Err(Error::invalid("evaluation points must be distinct"));
            }
        }
        let rows = points
            .iter()
            .map(|x| (0..t as u64).map(|e| field.pow_u64(x, e)).collect())
            .collect();
        Self::ideal(FieldMatrix::from_rows(field, t, rows)?)
    }

    pub fn field(&self) -> &Field {
        self.h.field()
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.h
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row count `l`.
    pub fn len(&self) -> usize {
        self.h.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.h.rows() == 0
    }

    /// Column count `d`.
    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    /// One row per participant with `psi` a bijection.
    pub fn is_ideal(&self) -> bool {
        self.h.rows() == self.n
    }

    pub fn target(&self) -> Vec<Fe> {
        let f = self.field();
        let mut t = vec![f.zero(); self.dim()];
        t[0] = f.one();
        t
    }

    fn check_set(&self, a: ParticipantSet) -> Result<()> {
        if a.is_subset(ParticipantSet::full(self.n)) {
            Ok(())
        } else {
            Err(Error::ParticipantOutOfRange {
                index: a.bound() - 1,
                n: self.n,
            })
        }
    }

    /// Row indices assigned to members of `a`, ascending.
    pub fn rows_of(&self, a: ParticipantSet) -> Vec<usize> {
        (0..self.len()).filter(|&r| a.contains(self.psi[r])).collect()
    }

    /// Row of an ideal scheme's participant.
    fn row_of_participant(&self, p: usize) -> usize {
        self.psi.iter().position(|&x| x == p).expect("psi is surjective")
    }

    /// Span test: can `a` recover the secret?
    pub fn authorizes(&self, a: ParticipantSet) -> Result<bool> {
        self.check_set(a)?;
        self.h.select_rows(&self.rows_of(a)).spans(&self.target())
    }

    /// Shares with explicit randomness `(r_2, ..., r_d)`.
    pub fn share_with(&self, secret: &Fe, randomness: &[Fe]) -> Result<ShareVector> {
        if randomness.len() + 1 != self.dim() {
            return Err(Error::Dimension(format!(
                "{} random elements for dimension {}",
                randomness.len(),
                self.dim()
            )));
        }
        let mut v = Vec::with_capacity(self.dim());
        v.push(secret.clone());
        v.extend_from_slice(randomness);
        let values = self.h.mul_vec(&v)?;
        let mut grouped = vec![Vec::new(); self.n];
        for (r, value) in values.into_iter().enumerate() {
            grouped[self.psi[r]].push(value);
        }
        Ok(ShareVector::new(grouped))
    }

    pub fn share<R: Rng + ?Sized>(&self, secret: &Fe, rng: &mut R) -> Result<Sharing> {
        let randomness: Vec<Fe> = (1..self.dim()).map(|_| self.field().sample(rng)).collect();
        let shares = self.share_with(secret, &randomness)?;
        Ok(Sharing { shares, randomness })
    }

    /// Recovers the secret from the shares of `a`.
    pub fn reconstruct(&self, a: ParticipantSet, shares: &ShareVector) -> Result<Fe> {
        self.check_set(a)?;
        let rows = self.rows_of(a);
        let alpha = self
            .h
            .select_rows(&rows)
            .solve_in_span(&self.target())?
            .ok_or(Error::Unauthorized)?;
        // Row r is the k-th row of its participant, in ascending row order.
        let mut values = Vec::with_capacity(rows.len());
        for p in a.iter() {
            let held = shares.get(p).ok_or_else(|| {
                Error::invalid(format!("shares of participant {} are missing", p + 1))
            })?;
            let expected = self.psi.iter().filter(|&&x| x == p).count();
            if held.len() != expected {
                return Err(Error::Dimension(format!(
                    "participant {} holds {} shares, expected {expected}",
                    p + 1,
                    held.len()
                )));
            }
        }
        let mut cursor = vec![0usize; self.n];
        for &r in &rows {
            let p = self.psi[r];
            values.push(shares.get(p).expect("checked above")[cursor[p]].clone());
            cursor[p] += 1;
        }
        Ok(self.field().dot(&alpha, &values))
    }

    /// Enumerates every subset to recover the access structure this scheme
    /// realizes.
    pub fn realized_structure(&self) -> Result<AccessStructure> {
        if self.n > MAX_ENUMERATION {
            return Err(Error::TooLarge(self.n));
        }
        let target = self.target();
        let total = 1usize << self.n;
        let mut authorized = vec![false; total];
        for (bits, slot) in authorized.iter_mut().enumerate() {
            let a = ParticipantSet::from_bits(bits as u64);
            *slot = self.h.select_rows(&self.rows_of(a)).spans(&target)?;
        }
        let basis = (0..total).filter(|&bits| {
            authorized[bits]
                && ParticipantSet::from_bits(bits as u64)
                    .iter()
                    .all(|i| !authorized[bits & !(1 << i)])
        });
        AccessStructure::new(self.n, basis.map(|b| ParticipantSet::from_bits(b as u64)))
    }

    fn require_contractible(&self, q: ParticipantSet) -> Result<()> {
        if !self.is_ideal() {
            return Err(Error::NotIdeal);
        }
        self.check_set(q)?;
        if self.authorizes(q)? {
            return Err(Error::AuthorizedContraction);
        }
        Ok(())
    }

    fn remaining(&self, q: ParticipantSet) -> Vec<usize> {
        (0..self.n).filter(|&i| !q.contains(i)).collect()
    }

    /// Contraction at the single participant `q` (pivot `k` is the first
    /// nonzero column of `q`'s row after the target column).
    pub fn contract_single(&self, q: usize) -> Result<SingleContraction> {
        let qs = ParticipantSet::singleton(q);
        if q >= self.n {
            return Err(Error::ParticipantOutOfRange { index: q, n: self.n });
        }
        self.require_contractible(qs)?;
        let f = self.field();
        let hq = self.h.row(self.row_of_participant(q));
        let k = (1..self.dim())
            .find(|&c| !f.is_zero(&hq[c]))
            .ok_or(Error::NotUnauthorizedConsistent)?;
        let pivot_inv = f.inv(&hq[k]).expect("pivot is nonzero");
        let reindex = self.remaining(qs);
        let rows = reindex
            .iter()
            .map(|&p| {
                let hi = self.h.row(self.row_of_participant(p));
                let factor = f.mul(&hi[k], &pivot_inv);
                hi.iter()
                    .zip(hq)
                    .map(|(a, b)| f.sub(a, &f.mul(&factor, b)))
                    .collect()
            })
            .collect();
        let msp = Msp::ideal(FieldMatrix::from_rows(f, self.dim(), rows)?)?;
        Ok(SingleContraction { msp, reindex, k })
    }

    /// Contraction at any unauthorized `q`.
    pub fn contract_multi(&self, q: ParticipantSet) -> Result<Contraction> {
        self.require_contractible(q)?;
        let f = self.field();
        let q_members = q.to_vec();
        let q_rows: Vec<usize> = q_members.iter().map(|&p| self.row_of_participant(p)).collect();
        let hq = self.h.select_rows(&q_rows);
        let sub = hq.find_invertible_submatrix(0)?;
        let certificate = ContractionCertificate {
            w: sub.rows.iter().map(|&i| q_members[i]).collect(),
            k: sub.cols,
            u_inverse: sub.inverse,
        };
        let hw = hq.select_rows(&sub.rows);
        let reindex = self.remaining(q);
        let rows = reindex
            .iter()
            .map(|&p| {
                let hi = self.h.row(self.row_of_participant(p));
                let coeffs = certificate.coefficients(hi);
                if coeffs.is_empty() {
                    return hi.to_vec();
                }
                let correction = hw.vec_mul(&coeffs).expect("dimensions agree");
                hi.iter().zip(&correction).map(|(a, b)| f.sub(a, b)).collect()
            })
            .collect();
        let msp = Msp::ideal(FieldMatrix::from_rows(f, self.dim(), rows)?)?;
        Ok(Contraction {
            msp,
            reindex,
            certificate,
        })
    }

    /// Samples an ideal scheme over `field` with `n` participants and `d`
    /// columns whose realized structure is connected and nonempty, with no
    /// zero rows. Gives up after `attempts` rejections.
    pub fn sample_connected_ideal<R: Rng + ?Sized>(
        field: &Field,
        n: usize,
        d: usize,
        attempts: usize,
        rng: &mut R,
    ) -> Option<Msp> {
        for _ in 0..attempts {
            let entries = (0..n * d).map(|_| field.sample(rng)).collect();
            let h = FieldMatrix::new(field, n, d, entries).ok()?;
            if (0..n).any(|r| h.row(r).iter().all(|x| field.is_zero(x))) {
                continue;
            }
            let msp = Msp::ideal(h).ok()?;
            if !msp.authorizes(ParticipantSet::full(n)).ok()? {
                continue;
            }
            if msp.realized_structure().ok()?.is_connected() {
                return Some(msp);
            }
        }
        None
    }

    pub fn to_doc(&self) -> MspDoc {
        MspDoc {
            modulus: self.field().modulus().to_string(),
            participants: self.n,
            rows: self
                .h
                .row_vecs()
                .iter()
                .map(|r| r.iter().map(Fe::to_string).collect())
                .collect(),
            psi: self.psi.iter().map(|p| p + 1).collect(),
        }
    }

    pub fn from_doc(doc: &MspDoc) -> Result<Self> {
        let field = Field::from_decimal(&doc.modulus)?;
        let cols = doc.rows.first().map_or(0, Vec::len);
        let rows = doc
            .rows
            .iter()
            .map(|r| r.iter().map(|v| field.parse_elem(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let h = FieldMatrix::from_rows(&field, cols, rows)?;
        let psi = doc
            .psi
            .iter()
            .map(|&p| {
                p.checked_sub(1)
                    .ok_or_else(|| Error::invalid("psi labels are 1-based"))
            })
            .collect::<Result<Vec<_>>>()?;
        Msp::new(h, psi, doc.participants)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }
}

/// On-disk form of an [`Msp`]. Elements are decimal strings; `psi` labels
/// are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MspDoc {
    pub modulus: String,
    pub participants: usize,
    pub rows: Vec<Vec<String>>,
    pub psi: Vec<usize>,
}

/// On-disk form of a [`Sharing`] (randomness kept for audit).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharesDoc {
    pub modulus: String,
    pub shares: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub randomness: Vec<String>,
}

impl SharesDoc {
    pub fn from_sharing(field: &Field, sharing: &Sharing) -> Self {
        SharesDoc {
            modulus: field.modulus().to_string(),
            shares: sharing
                .shares
                .iter()
                .map(|s| s.unwrap_or(&[]).iter().map(Fe::to_string).collect())
                .collect(),
            randomness: sharing.randomness.iter().map(Fe::to_string).collect(),
        }
    }

    pub fn to_share_vector(&self, field: &Field) -> Result<ShareVector> {
        if Field::from_decimal(&self.modulus)? != *field {
            return Err(Error::invalid("shares were produced over a different modulus"));
        }
        let shares = self
            .shares
            .iter()
            .map(|s| s.iter().map(|v| field.parse_elem(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ShareVector::new(shares))
    }
}
