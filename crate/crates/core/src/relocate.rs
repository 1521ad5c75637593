//! Share relocation when an unauthorized set of servers is removed.
//!
//! Four methods are supported:
//!
//! * `lc`: every remaining server linearly combines its share with the
//!   removed servers' shares using the contraction certificate, so storage
//!   shrinks and the scheme stays ideal.
//! * `ps`: removed shares move to a public store readable by everyone.
//! * `is`: every remaining server stores a full copy of the removed shares.
//! * `cs`: each removed share is replicated on just enough servers that
//!   every authorized set of the contracted structure holds a copy.
//!
//! Relocation is expressed on a [`Layout`]: the list of stored items, each a
//! row vector relative to the original sharing vector plus the site holding
//! it. A [`RelocationPlan`] maps old items to new ones linearly, so the same
//! plan applies to any number of secrets shared under the same layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::access::{AccessStructure, ParticipantSet};
use crate::error::{Error, Result};
use crate::galois::{Fe, Field, FieldMatrix};
use crate::msp::{ContractionCertificate, Msp, ShareVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lc,
    Ps,
    Is,
    Cs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ps, Method::Is, Method::Cs, Method::Lc];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lc => "lc",
            Method::Ps => "ps",
            Method::Is => "is",
            Method::Cs => "cs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lc" => Ok(Method::Lc),
            "ps" => Ok(Method::Ps),
            "is" => Ok(Method::Is),
            "cs" => Ok(Method::Cs),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected lc, ps, is or cs)"
            ))),
        }
    }
}

/// Where a stored item lives. Servers are named by their original index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Holder {
    Server(usize),
    Public,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredItem {
    pub row: Vec<Fe>,
    pub holder: Holder,
}

/// What every site stores for one secret, as rows against the original
/// sharing vector `(s, r_2, ..., r_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    field: Field,
    dim: usize,
    live: Vec<usize>,
    items: Vec<StoredItem>,
}

impl Layout {
    /// The layout of a freshly dealt scheme: row `r` on server `psi(r)`.
    pub fn from_msp(msp: &Msp) -> Self {
        let items = (0..msp.len())
            .map(|r| StoredItem {
                row: msp.matrix().row(r).to_vec(),
                holder: Holder::Server(msp.psi()[r]),
            })
            .collect();
        Layout {
            field: msp.field().clone(),
            dim: msp.dim(),
            live: (0..msp.n()).collect(),
            items,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Original indices of the servers still in the system, ascending.
    pub fn live(&self) -> &[usize] {
        &self.live
    }

    pub fn items(&self) -> &[StoredItem] {
        &self.items
    }

    pub fn element_count(&self) -> usize {
        self.items.len()
    }

    pub fn public_count(&self) -> usize {
        self.items.iter().filter(|i| i.holder == Holder::Public).count()
    }

    pub fn server_load(&self, server: usize) -> usize {
        self.items
            .iter()
            .filter(|i| i.holder == Holder::Server(server))
            .count()
    }

    /// Largest number of elements held by a single server; public storage
    /// is not a server.
    pub fn max_server_load(&self) -> usize {
        self.live.iter().map(|&s| self.server_load(s)).max().unwrap_or(0)
    }

    /// Translates live positions to original server indices.
    pub fn labels_of(&self, positions: ParticipantSet) -> ParticipantSet {
        positions.remap(|i| self.live[i])
    }

    /// Translates original server indices to live positions.
    pub fn positions_of(&self, labels: ParticipantSet) -> Result<ParticipantSet> {
        labels
            .iter()
            .map(|l| {
                self.live
                    .iter()
                    .position(|&x| x == l)
                    .ok_or_else(|| Error::invalid(format!("server {} is not live", l + 1)))
            })
            .collect()
    }

    /// Items readable by the servers `labels` (their own plus public ones).
    pub fn items_reachable(&self, labels: ParticipantSet) -> Vec<usize> {
        (0..self.items.len())
            .filter(|&i| match self.items[i].holder {
                Holder::Server(s) => labels.contains(s),
                Holder::Public => true,
            })
            .collect()
    }

    fn reachable_matrix(&self, idx: &[usize]) -> FieldMatrix {
        let rows = idx.iter().map(|&i| self.items[i].row.clone()).collect();
        FieldMatrix::from_rows(&self.field, self.dim, rows).expect("rows share the layout width")
    }

    fn target(&self) -> Vec<Fe> {
        let mut t = vec![self.field.zero(); self.dim];
        t[0] = self.field.one();
        t
    }

    /// Span test for the servers `labels` (original indices).
    pub fn authorizes(&self, labels: ParticipantSet) -> bool {
        let idx = self.items_reachable(labels);
        self.reachable_matrix(&idx)
            .spans(&self.target())
            .expect("target matches layout width")
    }

    /// Recovers a secret from item values reachable by `labels`.
    pub fn recover(&self, labels: ParticipantSet, values: &[Fe]) -> Result<Fe> {
        if values.len() != self.items.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} stored items",
                values.len(),
                self.items.len()
            )));
        }
        let idx = self.items_reachable(labels);
        let alpha = self
            .reachable_matrix(&idx)
            .solve_in_span(&self.target())?
            .ok_or(Error::Unauthorized)?;
        let vals: Vec<Fe> = idx.iter().map(|&i| values[i].clone()).collect();
        Ok(self.field.dot(&alpha, &vals))
    }

    /// The scheme formed by server-held rows, participants numbered by live
    /// position. Public items are left out.
    pub fn server_msp(&self) -> Result<Msp> {
        let mut rows = Vec::new();
        let mut psi = Vec::new();
        for item in &self.items {
            if let Holder::Server(s) = item.holder {
                rows.push(item.row.clone());
                psi.push(self.live.iter().position(|&x| x == s).expect("holder is live"));
            }
        }
        Msp::new(FieldMatrix::from_rows(&self.field, self.dim, rows)?, psi, self.live.len())
    }

    /// Values of each item for a sharing vector `v`.
    pub fn evaluate(&self, v: &[Fe]) -> Vec<Fe> {
        self.items.iter().map(|i| self.field.dot(&i.row, v)).collect()
    }
}

/// A linear map from the items of one layout to the items of the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelocationPlan {
    pub method: Method,
    /// Removed servers, original indices.
    pub removed: ParticipantSet,
    pub after: Layout,
    /// For each new item, the old items (and coefficients) it is built from.
    pub sources: Vec<Vec<(usize, Fe)>>,
    /// Field elements transferred between sites for one secret.
    pub elements_moved: u64,
    pub certificate: Option<ContractionCertificate>,
}

impl RelocationPlan {
    pub fn apply(&self, values: &[Fe]) -> Vec<Fe> {
        let f = self.after.field();
        self.sources
            .iter()
            .map(|src| {
                src.iter()
                    .fold(f.zero(), |acc, (i, c)| f.add(&acc, &f.mul(c, &values[*i])))
            })
            .collect()
    }
}

fn copy_of(i: usize, f: &Field) -> Vec<(usize, Fe)> {
    vec![(i, f.one())]
}

/// Plans the removal of `removed` (original server indices) from `layout`.
///
/// `structure` is the access structure currently realized by the layout,
/// over live positions; only `cs` needs it. Authorization of `removed` is
/// decided by the span test on what those servers can read.
pub fn plan_relocation(
    layout: &Layout,
    structure: Option<&AccessStructure>,
    removed: ParticipantSet,
    method: Method,
) -> Result<RelocationPlan> {
    let q_pos = layout.positions_of(removed)?;
    if let Some(s) = structure {
        if s.n() != layout.live.len() {
            return Err(Error::Dimension(format!(
                "structure on {} participants for {} live servers",
                s.n(),
                layout.live.len()
            )));
        }
    }
    if layout.authorizes(removed) {
        return Err(Error::AuthorizedContraction);
    }
    let f = layout.field.clone();
    let live: Vec<usize> = layout.live.iter().copied().filter(|s| !removed.contains(*s)).collect();
    let held_by_removed = |item: &StoredItem| matches!(item.holder, Holder::Server(s) if removed.contains(s));
    let kept: Vec<usize> = (0..layout.items.len()).filter(|&i| !held_by_removed(&layout.items[i])).collect();
    let moved: Vec<usize> = (0..layout.items.len()).filter(|&i| held_by_removed(&layout.items[i])).collect();

    let mut items: Vec<StoredItem> = kept.iter().map(|&i| layout.items[i].clone()).collect();
    let mut sources: Vec<Vec<(usize, Fe)>> = kept.iter().map(|&i| copy_of(i, &f)).collect();
    let mut certificate = None;
    let remaining = live.len() as u64;

    let elements_moved = match method {
        Method::Ps => {
            for &i in &moved {
                items.push(StoredItem {
                    row: layout.items[i].row.clone(),
                    holder: Holder::Public,
                });
                sources.push(copy_of(i, &f));
            }
            moved.len() as u64
        }
        Method::Is => {
            for &server in &live {
                for &i in &moved {
                    items.push(StoredItem {
                        row: layout.items[i].row.clone(),
                        holder: Holder::Server(server),
                    });
                    sources.push(copy_of(i, &f));
                }
            }
            moved.len() as u64 * remaining
        }
        Method::Cs => {
            let structure = structure
                .ok_or_else(|| Error::invalid("collective storage needs the current access structure"))?;
            let contracted = structure.contract(q_pos)?;
            let placement = replica_sets(&contracted.structure, moved.len());
            let mut placed = 0u64;
            for (&i, targets) in moved.iter().zip(&placement) {
                for &pos in targets {
                    items.push(StoredItem {
                        row: layout.items[i].row.clone(),
                        holder: Holder::Server(live[pos]),
                    });
                    sources.push(copy_of(i, &f));
                    placed += 1;
                }
            }
            placed
        }
        Method::Lc => {
            if layout.public_count() > 0
                || layout.items.len() != layout.live.len()
                || layout.live.iter().any(|&s| layout.server_load(s) != 1)
            {
                return Err(Error::NotIdeal);
            }
            let msp = layout.server_msp()?;
            let contraction = msp.contract_multi(q_pos)?;
            let item_of = |label: usize| {
                layout
                    .items
                    .iter()
                    .position(|it| it.holder == Holder::Server(label))
                    .expect("ideal layout holds one item per server")
            };
            items.clear();
            sources.clear();
            for (new, &old_pos) in contraction.reindex.iter().enumerate() {
                let label = layout.live[old_pos];
                let own = item_of(label);
                let coeffs = contraction.certificate.coefficients(&layout.items[own].row);
                let mut src = copy_of(own, &f);
                for (w, c) in contraction.certificate.w.iter().zip(&coeffs) {
                    if !f.is_zero(c) {
                        src.push((item_of(layout.live[*w]), f.neg(c)));
                    }
                }
                items.push(StoredItem {
                    row: contraction.msp.matrix().row(new).to_vec(),
                    holder: Holder::Server(label),
                });
                sources.push(src);
            }
            let mut cert = contraction.certificate;
            cert.w = cert.w.iter().map(|&p| layout.live[p]).collect();
            certificate = Some(cert);
            moved.len() as u64 * remaining
        }
    };

    Ok(RelocationPlan {
        method,
        removed,
        after: Layout {
            field: f,
            dim: layout.dim,
            live,
            items,
        },
        sources,
        elements_moved,
        certificate,
    })
}

/// For each of `count` removed items, the live positions (in the contracted
/// numbering) that receive a copy.
///
/// Threshold structures `(t', n')` need `n' - t' + 1` copies per item; these
/// are dealt round-robin so loads differ by at most one. Other structures
/// get a greedy hitting set of the basis, shared by all items.
fn replica_sets(contracted: &AccessStructure, count: usize) -> Vec<Vec<usize>> {
    let n = contracted.n();
    if n == 0 || count == 0 {
        return vec![Vec::new(); count];
    }
    if let Some(t) = contracted.threshold_of() {
        let copies = n - t + 1;
        let mut cursor = 0;
        return (0..count)
            .map(|_| {
                let set = (0..copies).map(|j| (cursor + j) % n).collect();
                cursor = (cursor + copies) % n;
                set
            })
            .collect();
    }
    let mut uncovered: Vec<ParticipantSet> = contracted.basis().to_vec();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let best = (0..n)
            .max_by_key(|&s| {
                let hits = uncovered.iter().filter(|b| b.contains(s)).count();
                // ties go to the smallest index
                (hits, std::cmp::Reverse(s))
            })
            .expect("n > 0");
        chosen.push(best);
        uncovered.retain(|b| !b.contains(best));
    }
    chosen.sort_unstable();
    vec![chosen; count]
}

/// The state after relocating one sharing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelocationOutcome {
    pub method: Method,
    pub layout: Layout,
    /// Values aligned with `layout.items()`.
    pub values: Vec<Fe>,
    /// Remaining server position -> original index.
    pub reindex: Vec<usize>,
    pub certificate: Option<ContractionCertificate>,
    pub elements_moved: u64,
}

impl RelocationOutcome {
    /// Shares held by the remaining server at position `server`.
    pub fn server_shares(&self, server: usize) -> Vec<Fe> {
        let label = self.reindex[server];
        self.layout
            .items()
            .iter()
            .zip(&self.values)
            .filter(|(it, _)| it.holder == Holder::Server(label))
            .map(|(_, v)| v.clone())
            .collect()
    }

    pub fn public_shares(&self) -> Vec<Fe> {
        self.layout
            .items()
            .iter()
            .zip(&self.values)
            .filter(|(it, _)| it.holder == Holder::Public)
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// The scheme formed by server-held rows (for `lc`, the contracted MSP).
    pub fn scheme(&self) -> Result<Msp> {
        self.layout.server_msp()
    }

    /// Span test for remaining servers `a` (positions), public storage
    /// included.
    pub fn authorizes(&self, a: ParticipantSet) -> bool {
        self.layout.authorizes(self.layout.labels_of(a))
    }

    /// Recovers the secret from what the remaining servers `a` (positions)
    /// can read.
    pub fn reconstruct(&self, a: ParticipantSet) -> Result<Fe> {
        self.layout.recover(self.layout.labels_of(a), &self.values)
    }
}

fn item_values(msp: &Msp, shares: &ShareVector) -> Result<Vec<Fe>> {
    let mut cursor = vec![0usize; msp.n()];
    msp.psi()
        .iter()
        .map(|&p| {
            let held = shares
                .get(p)
                .ok_or_else(|| Error::invalid(format!("shares of participant {} missing", p + 1)))?;
            let v = held
                .get(cursor[p])
                .cloned()
                .ok_or_else(|| Error::Dimension(format!("participant {} holds too few shares", p + 1)))?;
            cursor[p] += 1;
            Ok(v)
        })
        .collect()
}

fn relocate_with(
    msp: &Msp,
    q: ParticipantSet,
    shares: &ShareVector,
    method: Method,
    structure: Option<&AccessStructure>,
) -> Result<RelocationOutcome> {
    if shares.participants() != msp.n() {
        return Err(Error::Dimension(format!(
            "{} share lists for {} participants",
            shares.participants(),
            msp.n()
        )));
    }
    let layout = Layout::from_msp(msp);
    let values = item_values(msp, shares)?;
    let plan = plan_relocation(&layout, structure, q, method)?;
    Ok(RelocationOutcome {
        method,
        values: plan.apply(&values),
        reindex: plan.after.live().to_vec(),
        layout: plan.after,
        certificate: plan.certificate,
        elements_moved: plan.elements_moved,
    })
}

/// Linear-combination relocation: `s'_i = s_i - (h_i)_K U^{-1} s_W`.
pub fn relocate_lc(msp: &Msp, q: ParticipantSet, shares: &ShareVector) -> Result<RelocationOutcome> {
    relocate_with(msp, q, shares, Method::Lc, None)
}

/// Public-storage relocation.
pub fn relocate_ps(msp: &Msp, q: ParticipantSet, shares: &ShareVector) -> Result<RelocationOutcome> {
    relocate_with(msp, q, shares, Method::Ps, None)
}

/// Individual-storage relocation: every remaining server copies all of
/// `q`'s shares.
pub fn relocate_is(msp: &Msp, q: ParticipantSet, shares: &ShareVector) -> Result<RelocationOutcome> {
    relocate_with(msp, q, shares, Method::Is, None)
}

/// Collective-storage relocation; `gamma` is the structure `msp` realizes.
pub fn relocate_cs(
    msp: &Msp,
    q: ParticipantSet,
    shares: &ShareVector,
    gamma: &AccessStructure,
) -> Result<RelocationOutcome> {
    if gamma.n() != msp.n() {
        return Err(Error::Dimension(format!(
            "structure on {} participants for a scheme on {}",
            gamma.n(),
            msp.n()
        )));
    }
    relocate_with(msp, q, shares, Method::Cs, Some(gamma))
}

/// Dispatches on `method`; `gamma` is only needed for `cs` and is computed
/// by enumeration when absent.
pub fn relocate(
    msp: &Msp,
    q: ParticipantSet,
    shares: &ShareVector,
    method: Method,
    gamma: Option<&AccessStructure>,
) -> Result<RelocationOutcome> {
    match method {
        Method::Lc => relocate_lc(msp, q, shares),
        Method::Ps => relocate_ps(msp, q, shares),
        Method::Is => relocate_is(msp, q, shares),
        Method::Cs => match gamma {
            Some(g) => relocate_cs(msp, q, shares, g),
            None => relocate_cs(msp, q, shares, &msp.realized_structure()?),
        },
    }
}

/// Linear-combination relocation computed the other way round: find a
/// sharing vector `v' = (0, v'_K)` consistent with `q`'s shares and
/// subtract `h_i · v'` from every remaining share.
///
/// `K` is found by exhaustive search for the first column set (in
/// lexicographic order) on which `q`'s rows keep their rank; `v'_K` is the
/// unique solution on those columns. No contraction certificate is used.
pub fn relocate_lc_oracle(msp: &Msp, q: ParticipantSet, shares: &ShareVector) -> Result<RelocationOutcome> {
    if !msp.is_ideal() {
        return Err(Error::NotIdeal);
    }
    if msp.authorizes(q)? {
        return Err(Error::AuthorizedContraction);
    }
    let f = msp.field().clone();
    let d = msp.dim();
    let row_of = |p: usize| msp.psi().iter().position(|&x| x == p).expect("ideal");
    let q_members = q.to_vec();
    let hq = msp.matrix().select_rows(&q_members.iter().map(|&p| row_of(p)).collect::<Vec<_>>());
    let rank = hq.rank();
    let k = first_full_rank_columns(&hq, rank, d).ok_or(Error::NotUnauthorizedConsistent)?;
    let hq_k = hq.select_cols(&k).transpose();

    // v'_K for a given vector of q's shares.
    let solve = |sq: &[Fe]| -> Result<Vec<Fe>> {
        let x = hq_k
            .solve_in_span(sq)?
            .ok_or_else(|| Error::Internal("removed shares are inconsistent with the scheme".into()))?;
        let mut v = vec![f.zero(); d];
        for (c, val) in k.iter().zip(x) {
            v[*c] = val;
        }
        Ok(v)
    };

    let values = item_values(msp, shares)?;
    let sq: Vec<Fe> = q_members.iter().map(|&p| values[row_of(p)].clone()).collect();
    let v_prime = solve(&sq)?;

    // Rows of the new scheme: the same correction applied to every unit
    // sharing vector.
    let unit_corrections = (0..d)
        .map(|j| {
            let sq: Vec<Fe> = q_members
                .iter()
                .map(|&p| msp.matrix().get(row_of(p), j).clone())
                .collect();
            solve(&sq)
        })
        .collect::<Result<Vec<_>>>()?;

    let reindex: Vec<usize> = (0..msp.n()).filter(|i| !q.contains(*i)).collect();
    let mut items = Vec::new();
    let mut new_values = Vec::new();
    for &p in &reindex {
        let hi = msp.matrix().row(row_of(p));
        let row = (0..d)
            .map(|j| f.sub(&hi[j], &f.dot(hi, &unit_corrections[j])))
            .collect();
        items.push(StoredItem {
            row,
            holder: Holder::Server(p),
        });
        new_values.push(f.sub(&values[row_of(p)], &f.dot(hi, &v_prime)));
    }
    Ok(RelocationOutcome {
        method: Method::Lc,
        layout: Layout {
            field: f,
            dim: d,
            live: reindex.clone(),
            items,
        },
        values: new_values,
        reindex: reindex.clone(),
        certificate: None,
        elements_moved: (q_members.len() * reindex.len()) as u64,
    })
}

fn first_full_rank_columns(m: &FieldMatrix, rank: usize, d: usize) -> Option<Vec<usize>> {
    let mut combo: Vec<usize> = (1..=rank).collect();
    if rank == 0 {
        return Some(Vec::new());
    }
    if rank > d - 1 {
        return None;
    }
    loop {
        if m.select_cols(&combo).rank() == rank {
            return Some(combo);
        }
        // next combination of {1..d-1}
        let mut i = rank;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if combo[i] < d - rank + i {
                combo[i] += 1;
                for j in i + 1..rank {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Storage totals for one relocation outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StorageMetrics {
    /// Total bits across servers and public storage for `z` secrets.
    pub total_bits: u128,
    /// Largest per-server element count per secret; `rho = 1 / rho_inverse`.
    pub rho_inverse: u64,
    pub share_bits: u64,
    pub z: u64,
}

impl StorageMetrics {
    pub fn rho(&self) -> f64 {
        1.0 / self.rho_inverse as f64
    }

    pub fn total_mib(&self) -> f64 {
        self.total_bits as f64 / 8.0 / (1u64 << 20) as f64
    }
}

/// Measures a layout: every stored element (public ones included) counts
/// toward `L`; `rho` uses the busiest server only.
pub fn layout_metrics(layout: &Layout, share_bits: u64, z: u64) -> StorageMetrics {
    StorageMetrics {
        total_bits: layout.element_count() as u128 * share_bits as u128 * z as u128,
        rho_inverse: layout.max_server_load().max(1) as u64,
        share_bits,
        z,
    }
}

pub fn metrics(outcome: &RelocationOutcome, share_bits: u64, z: u64) -> StorageMetrics {
    layout_metrics(&outcome.layout, share_bits, z)
}

pub const METRICS_CSV_HEADER: &str = "method,n,t,m,share_bits,z,L_bits,rho";

/// One metrics CSV row: `method,n,t,m,share_bits,z,L_bits,rho`.
pub fn metrics_csv_row(method: Method, n: usize, t: usize, m: usize, metrics: &StorageMetrics) -> String {
    format!(
        "{method},{n},{t},{m},{},{},{},{:.6}",
        metrics.share_bits,
        metrics.z,
        metrics.total_bits,
        metrics.rho()
    )
}
