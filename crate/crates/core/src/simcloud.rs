//! Deterministic multi-cloud storage simulator.
//!
//! A [`Scenario`] deals `z` secrets to `n` servers, removes unauthorized
//! server sets under a chosen relocation method, replays reconstructions
//! and records storage metrics.
//!
//! Every secret and its sharing randomness is derived from `(seed, index)`,
//! so a single secret can be regenerated on demand. In analytic mode only
//! the relocation plans are kept and storage is scaled by `z`; material
//! mode stores every share of every secret. Both modes report identical
//! metrics and reconstruction results.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::access::{AccessStructure, ParticipantSet};
use crate::error::{Error, Result};
use crate::galois::{Fe, Field};
use crate::msp::{Msp, MspDoc};
use crate::relocate::{layout_metrics, plan_relocation, Layout, Method, RelocationPlan, StorageMetrics};

/// `2^16 - 15`
pub const DEFAULT_MODULUS: u64 = 65521;
pub const DEFAULT_SHARE_BITS: u64 = 16;
pub const DEFAULT_SECRET_COUNT: u64 = 1_000_000;

fn default_modulus() -> String {
    DEFAULT_MODULUS.to_string()
}

fn default_share_bits() -> u64 {
    DEFAULT_SHARE_BITS
}

fn default_z() -> u64 {
    DEFAULT_SECRET_COUNT
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Material,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeSpec {
    /// Shamir `(t, n)` with evaluation points `1..=n`.
    Threshold {
        t: usize,
        n: usize,
        #[serde(default = "default_modulus")]
        modulus: String,
    },
    /// Any MSP; the structure (textual form) defaults to the one the MSP
    /// realizes.
    Explicit {
        msp: MspDoc,
        #[serde(default)]
        structure: Option<String>,
    },
}

/// Server lists are 1-based in scenario files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    Distribute,
    Remove {
        servers: Vec<usize>,
        method: Method,
    },
    Reconstruct {
        servers: Vec<usize>,
        #[serde(default)]
        secret: u64,
    },
    Snapshot,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub scheme: SchemeSpec,
    #[serde(default = "default_share_bits")]
    pub share_bits: u64,
    #[serde(default = "default_z")]
    pub z: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Shamir `(t, n)` over `2^16 - 15` with the default share size.
    pub fn threshold(t: usize, n: usize, z: u64, seed: u64, events: Vec<Event>) -> Self {
        Scenario {
            scheme: SchemeSpec::Threshold {
                t,
                n,
                modulus: default_modulus(),
            },
            share_bits: DEFAULT_SHARE_BITS,
            z,
            seed,
            mode: Mode::Analytic,
            events,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub event: usize,
    /// 1-based labels of live servers.
    pub live: Vec<usize>,
    pub metrics: StorageMetrics,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferRecord {
    pub event: usize,
    pub method: Method,
    pub removed: Vec<usize>,
    pub elements_per_secret: u64,
    pub bits_moved: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReconstructionResult {
    Recovered(Fe),
    Refused(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionRecord {
    pub event: usize,
    pub servers: Vec<usize>,
    pub secret_index: u64,
    pub expected: Fe,
    pub result: ReconstructionResult,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SimReport {
    pub snapshots: Vec<SnapshotRecord>,
    pub transfers: Vec<TransferRecord>,
    pub reconstructions: Vec<ReconstructionRecord>,
}

pub const REPORT_CSV_HEADER: &str = "record,event,method,servers,secret,expected,value,L_bits,L_MiB,rho,elements_moved,bits_moved";

fn labels(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

impl SimReport {
    /// Flat CSV, one line per record, in event order.
    pub fn to_csv(&self) -> String {
        let mut lines: Vec<(usize, usize, String)> = Vec::new();
        for s in &self.snapshots {
            lines.push((
                s.event,
                2,
                format!(
                    "snapshot,{},,{},,,,{},{:.4},{:.6},,",
                    s.event,
                    labels(&s.live),
                    s.metrics.total_bits,
                    s.metrics.total_mib(),
                    s.metrics.rho()
                ),
            ));
        }
        for t in &self.transfers {
            lines.push((
                t.event,
                0,
                format!(
                    "remove,{},{},{},,,,,,,{},{}",
                    t.event,
                    t.method,
                    labels(&t.removed),
                    t.elements_per_secret,
                    t.bits_moved
                ),
            ));
        }
        for r in &self.reconstructions {
            let value = match &r.result {
                ReconstructionResult::Recovered(v) => v.to_string(),
                ReconstructionResult::Refused(why) => format!("refused: {why}"),
            };
            lines.push((
                r.event,
                1,
                format!(
                    "reconstruct,{},,{},{},{},{},,,,,",
                    r.event,
                    labels(&r.servers),
                    r.secret_index,
                    r.expected,
                    value
                ),
            ));
        }
        lines.sort_by_key(|(e, k, _)| (*e, *k));
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for (_, _, l) in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}

struct Setup {
    msp: Msp,
    structure: AccessStructure,
}

fn build_scheme(spec: &SchemeSpec) -> Result<Setup> {
    match spec {
        SchemeSpec::Threshold { t, n, modulus } => {
            let field = Field::from_decimal(modulus)?;
            Ok(Setup {
                msp: Msp::shamir(*t, *n, &field, None)?,
                structure: AccessStructure::threshold(*t, *n)?,
            })
        }
        SchemeSpec::Explicit { msp, structure } => {
            let msp = Msp::from_doc(msp)?;
            let structure = match structure {
                Some(text) => text.parse()?,
                None => msp.realized_structure()?,
            };
            if structure.n() != msp.n() {
                return Err(Error::Scenario(format!(
                    "structure has {} participants, scheme has {}",
                    structure.n(),
                    msp.n()
                )));
            }
            Ok(Setup { msp, structure })
        }
    }
}

fn to_set(servers: &[usize], n: usize) -> Result<ParticipantSet> {
    let mut set = ParticipantSet::EMPTY;
    for &s in servers {
        if s == 0 || s > n {
            return Err(Error::Scenario(format!("server {s} outside 1..={n}")));
        }
        set.insert(s - 1);
    }
    Ok(set)
}

/// Checks ordering and authorization constraints before anything runs.
fn validate(scenario: &Scenario, setup: &Setup) -> Result<()> {
    let n = setup.msp.n();
    if scenario.z == 0 {
        return Err(Error::Scenario("secret count z must be positive".into()));
    }
    let mut distributed = false;
    let mut removed = ParticipantSet::EMPTY;
    let mut ideal = setup.msp.is_ideal();
    for (i, event) in scenario.events.iter().enumerate() {
        let at = |msg: String| Error::Scenario(format!("event {i}: {msg}"));
        match event {
            Event::Distribute => {
                if distributed {
                    return Err(at("secrets were already distributed".into()));
                }
                distributed = true;
            }
            _ if !distributed => return Err(at("no secrets distributed yet".into())),
            Event::Remove { servers, method } => {
                let q = to_set(servers, n).map_err(|e| at(e.to_string()))?;
                if q.is_empty() {
                    return Err(at("empty removal".into()));
                }
                if !q.is_disjoint(removed) {
                    return Err(at("server already removed".into()));
                }
                removed = removed.union(q);
                if setup.structure.is_authorized(removed)? {
                    return Err(at(format!("cumulative removal {removed} is authorized")));
                }
                if *method == Method::Lc && !ideal {
                    return Err(at("lc needs an ideal layout".into()));
                }
                ideal &= *method == Method::Lc;
            }
            Event::Reconstruct { servers, secret } => {
                let a = to_set(servers, n).map_err(|e| at(e.to_string()))?;
                if !a.is_disjoint(removed) {
                    return Err(at("reconstruction by a removed server".into()));
                }
                if *secret >= scenario.z {
                    return Err(at(format!("secret index {secret} >= z = {}", scenario.z)));
                }
            }
            Event::Snapshot => {}
        }
    }
    Ok(())
}

/// The secret and sharing vector for index `k`.
fn sharing_vector(field: &Field, dim: usize, seed: u64, k: u64) -> Vec<Fe> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(k);
    (0..dim).map(|_| field.sample(&mut rng)).collect()
}

struct State {
    layout: Layout,
    structure: AccessStructure,
    plans: Vec<RelocationPlan>,
    initial: Layout,
    /// Material mode only: current item values per secret.
    values: Option<Vec<Vec<Fe>>>,
}

impl State {
    fn values_of(&self, field: &Field, seed: u64, k: u64) -> Vec<Fe> {
        if let Some(values) = &self.values {
            return values[k as usize].clone();
        }
        let v = sharing_vector(field, self.initial.dim(), seed, k);
        let mut vals = self.initial.evaluate(&v);
        for plan in &self.plans {
            vals = plan.apply(&vals);
        }
        vals
    }

    fn metrics(&self, share_bits: u64, z: u64) -> StorageMetrics {
        match &self.values {
            None => layout_metrics(&self.layout, share_bits, z),
            Some(values) => {
                let stored: u128 = values.iter().map(|v| v.len() as u128).sum();
                StorageMetrics {
                    total_bits: stored * share_bits as u128,
                    rho_inverse: self.layout.max_server_load().max(1) as u64,
                    share_bits,
                    z,
                }
            }
        }
    }
}

/// Runs a scenario. Invalid scenarios fail before any event executes;
/// refused reconstructions are recorded, not raised.
pub fn run(scenario: &Scenario) -> Result<SimReport> {
    let setup = build_scheme(&scenario.scheme)?;
    validate(scenario, &setup)?;
    let field = setup.msp.field().clone();
    let n = setup.msp.n();
    let initial = Layout::from_msp(&setup.msp);
    let mut state = State {
        layout: initial.clone(),
        structure: setup.structure.clone(),
        plans: Vec::new(),
        initial,
        values: None,
    };
    let mut report = SimReport::default();

    for (i, event) in scenario.events.iter().enumerate() {
        match event {
            Event::Distribute => {
                if scenario.mode == Mode::Material {
                    let dim = state.initial.dim();
                    state.values = Some(
                        (0..scenario.z)
                            .map(|k| state.initial.evaluate(&sharing_vector(&field, dim, scenario.seed, k)))
                            .collect(),
                    );
                }
            }
            Event::Remove { servers, method } => {
                let q = to_set(servers, n)?;
                let plan = plan_relocation(&state.layout, Some(&state.structure), q, *method)?;
                let q_pos = state.layout.positions_of(q)?;
                state.structure = state.structure.contract(q_pos)?.structure;
                if let Some(values) = &mut state.values {
                    for v in values.iter_mut() {
                        *v = plan.apply(v);
                    }
                }
                report.transfers.push(TransferRecord {
                    event: i,
                    method: *method,
                    removed: servers.clone(),
                    elements_per_secret: plan.elements_moved,
                    bits_moved: plan.elements_moved as u128 * scenario.share_bits as u128 * scenario.z as u128,
                });
                state.layout = plan.after.clone();
                state.plans.push(plan);
            }
            Event::Reconstruct { servers, secret } => {
                let a = to_set(servers, n)?;
                let v = sharing_vector(&field, state.initial.dim(), scenario.seed, *secret);
                let values = state.values_of(&field, scenario.seed, *secret);
                let result = match state.layout.recover(a, &values) {
                    Ok(s) => ReconstructionResult::Recovered(s),
                    Err(Error::Unauthorized) => {
                        ReconstructionResult::Refused("target not in span of reachable shares".into())
                    }
                    Err(e) => return Err(e),
                };
                report.reconstructions.push(ReconstructionRecord {
                    event: i,
                    servers: servers.clone(),
                    secret_index: *secret,
                    expected: v[0].clone(),
                    result,
                });
            }
            Event::Snapshot => {
                report.snapshots.push(SnapshotRecord {
                    event: i,
                    live: state.layout.live().iter().map(|s| s + 1).collect(),
                    metrics: state.metrics(scenario.share_bits, scenario.z),
                });
            }
        }
    }
    Ok(report)
}

/// One row of the storage / information-rate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub m: usize,
    pub metrics: StorageMetrics,
}

pub const SWEEP_CSV_HEADER: &str = "method,m,L_bits,L_MiB,rho";

/// For `m = 0..t`, removes the last `m` servers of a Shamir `(t, n)` scheme
/// under each method and snapshots storage.
pub fn sweep(n: usize, t: usize, share_bits: u64, z: u64, mode: Mode) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for method in Method::ALL {
        for m in 0..t {
            let mut events = vec![Event::Distribute];
            if m > 0 {
                events.push(Event::Remove {
                    servers: (n - m + 1..=n).collect(),
                    method,
                });
            }
            events.push(Event::Snapshot);
            let scenario = Scenario {
                share_bits,
                mode,
                ..Scenario::threshold(t, n, z, 0, events)
            };
            let report = run(&scenario)?;
            rows.push(SweepRow {
                method,
                m,
                metrics: report.snapshots[0].metrics,
            });
        }
    }
    Ok(rows)
}

/// Analytic sweep for the storage and information-rate comparison.
pub fn sweep_fig1(n: usize, t: usize, share_bits: u64, z: u64) -> Result<Vec<SweepRow>> {
    sweep(n, t, share_bits, z, Mode::Analytic)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.6}\n",
            r.method,
            r.m,
            r.metrics.total_bits,
            r.metrics.total_mib(),
            r.metrics.rho()
        ));
    }
    out
}

/// Gnuplot data: two blocks (storage in MiB, information rate) separated by
/// blank lines, one column per method in `Method::ALL` order.
pub fn sweep_plot_data(rows: &[SweepRow]) -> String {
    let max_m = rows.iter().map(|r| r.m).max().unwrap_or(0);
    let cell = |method: Method, m: usize| rows.iter().find(|r| r.method == method && r.m == m);
    let header: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
    let mut out = String::new();
    for (title, pick) in [
        ("storage_MiB", (|s: &StorageMetrics| format!("{:.4}", s.total_mib())) as fn(&StorageMetrics) -> String),
        ("information_rate", |s: &StorageMetrics| format!("{:.6}", s.rho())),
    ] {
        out.push_str(&format!("# {title}\n# m {}\n", header.join(" ")));
        for m in 0..=max_m {
            let cols: Vec<String> = Method::ALL
                .iter()
                .map(|&meth| cell(meth, m).map_or_else(|| "?".into(), |r| pick(&r.metrics)))
                .collect();
            out.push_str(&format!("{m} {}\n", cols.join(" ")));
        }
        out.push_str("\n\n");
    }
    out
}
