//! `lsss`: share, contract, relocate, simulate and benchmark from the shell.
//!
//! Files are JSON with field elements as decimal strings and participant /
//! attribute labels 1-based. Exit status is 0 on success, 2 for invalid
//! input and 3 when an operation is refused for lack of authorization.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use lsss_core::abe::{
    self, AbeCiphertext, ContractionKey, DebugPairing, MasterKey, PairingBackend, PublicKey, SecretKey,
};
use lsss_core::access::{parse_participant_list, AccessStructure, ParticipantSet};
use lsss_core::msp::SharesDoc;
use lsss_core::relocate::{self, Method, METRICS_CSV_HEADER};
use lsss_core::simcloud::{self, Mode, Scenario, SweepRow};
use lsss_core::{Error, Fe, Field, Msp};

#[derive(Parser)]
#[command(name = "lsss", version, about = "Linear secret sharing with access-structure contraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the span program of Shamir's (t, n) scheme.
    Shamir {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "65521")]
        modulus: String,
        #[command(flatten)]
        out: Output,
    },
    /// Share a secret under a span program.
    Share {
        #[arg(long)]
        msp: PathBuf,
        #[arg(long)]
        secret: String,
        /// Explicit randomness `r_2,...,r_d` instead of sampling.
        #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
        randomness: Option<Vec<String>>,
        #[arg(long, required_unless_present = "randomness")]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Recover the secret from the shares of a participant set.
    Reconstruct {
        #[arg(long)]
        msp: PathBuf,
        #[arg(long)]
        shares: PathBuf,
        /// Participants, e.g. `1,2,4`.
        #[arg(long)]
        set: String,
    },
    /// Contract a span program at `Q`; the certificate goes to stderr.
    Contract {
        #[arg(long)]
        msp: PathBuf,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        out: Output,
    },
    /// Relocate shares away from the removed servers `Q`.
    Relocate {
        #[arg(long)]
        msp: PathBuf,
        #[arg(long)]
        shares: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Access structure for `cs`, e.g. `n=4; basis={1,2},{3,4}`;
        /// enumerated from the span program when absent.
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Run a scenario file and print the report as CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Storage and information rate of every method for m = 0..t-1.
    Bench {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        t: usize,
        #[arg(long, default_value_t = simcloud::DEFAULT_SHARE_BITS)]
        share_bits: u64,
        #[arg(long, default_value_t = simcloud::DEFAULT_SECRET_COUNT)]
        z: u64,
        #[arg(long, value_enum, default_value_t = BenchFormat::Csv)]
        format: BenchFormat,
        /// Materialize every share instead of counting analytically.
        #[arg(long)]
        material: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Operations on explicit access structures.
    #[command(subcommand)]
    Structure(StructureCommand),
    /// Attribute-based encryption with ciphertext contraction (insecure
    /// debug pairing).
    #[command(subcommand)]
    Abe(AbeCommand),
}

#[derive(Subcommand)]
enum StructureCommand {
    /// Print `Γ_{·Q}` and the new-to-old participant map.
    Contract {
        /// e.g. `n=4; basis={1,2,4},{1,3,4}`
        #[arg(long)]
        structure: String,
        #[arg(long)]
        q: String,
    },
    /// Print the structure a span program realizes.
    Of {
        #[arg(long)]
        msp: PathBuf,
    },
}

#[derive(Args)]
struct AbeGroup {
    /// Group order.
    #[arg(long, default_value = abe::P160)]
    modulus: String,
}

#[derive(Subcommand)]
enum AbeCommand {
    Setup {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msk: PathBuf,
    },
    Keygen {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msk: PathBuf,
        /// e.g. `1,2,5`
        #[arg(long)]
        attributes: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Encrypt a target-group message; participant j of the policy is
    /// attribute j.
    Encrypt {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msp: PathBuf,
        #[arg(long)]
        message: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        ct: PathBuf,
        /// Where to keep the contraction key (owner secret).
        #[arg(long)]
        ck: PathBuf,
    },
    RestrictCk {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        ck: PathBuf,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        out: Output,
    },
    ContractSct {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        q: String,
        /// Contraction key restricted to `Q`.
        #[arg(long)]
        ck: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    ContractEct {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long)]
        ck: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    ContractRe {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        pk: PathBuf,
        /// A key that can decrypt the input.
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: Output,
        /// Where to write the new contraction key.
        #[arg(long)]
        ck_out: Option<PathBuf>,
    },
    /// Print the decrypted message.
    Decrypt {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
    },
    /// Element counts of a ciphertext.
    Size {
        #[command(flatten)]
        group: AbeGroup,
        #[arg(long)]
        ct: PathBuf,
    },
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl Output {
    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => write_file(p, text),
            None => {
                print!("{text}");
                if !text.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFormat {
    /// `method,m,L_bits,L_MiB,rho`
    Csv,
    /// One row per point with the scheme parameters.
    Metrics,
    /// Aligned, human-readable.
    Table,
    /// Gnuplot data blocks.
    PlotData,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_file(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn write_file(p: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
}

fn load_msp(p: &Path) -> anyhow::Result<Msp> {
    Msp::from_json(&read_file(p)?).with_context(|| format!("in {}", p.display()))
}

fn participants(s: &str) -> anyhow::Result<ParticipantSet> {
    Ok(parse_participant_list(s)?)
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn fmt_row(row: &[Fe]) -> String {
    let cells: Vec<String> = row.iter().map(Fe::to_string).collect();
    format!("[{}]", cells.join(","))
}

fn one_based(set: &[usize]) -> String {
    let v: Vec<String> = set.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let refused = e
                .downcast_ref::<Error>()
                .is_some_and(Error::is_authorization_failure);
            ExitCode::from(if refused { 3 } else { 2 })
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Shamir { t, n, modulus, out } => {
            let field = Field::from_decimal(&modulus)?;
            out.write(&Msp::shamir(t, n, &field, None)?.to_json())
        }
        Command::Share {
            msp,
            secret,
            randomness,
            seed,
            out,
        } => {
            let msp = load_msp(&msp)?;
            let field = msp.field().clone();
            let secret = field.parse_elem(&secret).context("secret")?;
            let sharing = match (randomness, seed) {
                (Some(r), _) => {
                    let r = r.iter().map(|x| field.parse_elem(x)).collect::<Result<Vec<_>, _>>()?;
                    let shares = msp.share_with(&secret, &r)?;
                    lsss_core::msp::Sharing {
                        shares,
                        randomness: r,
                    }
                }
                (None, Some(seed)) => msp.share(&secret, &mut rng(seed))?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let doc = SharesDoc::from_sharing(&field, &sharing);
            out.write(&serde_json::to_string_pretty(&doc)?)
        }
        Command::Reconstruct { msp, shares, set } => {
            let msp = load_msp(&msp)?;
            let doc: SharesDoc = serde_json::from_str(&read_file(&shares)?).map_err(Error::from)?;
            let shares = doc.to_share_vector(msp.field())?;
            println!("{}", msp.reconstruct(participants(&set)?, &shares)?);
            Ok(())
        }
        Command::Contract { msp, q, out } => {
            let msp = load_msp(&msp)?;
            let q = participants(&q)?;
            let (contracted, reindex) = if q.len() == 1 {
                let c = msp.contract_single(q.iter().next().expect("one member"))?;
                eprintln!("k = {}", c.k + 1);
                (c.msp, c.reindex)
            } else {
                let c = msp.contract_multi(q)?;
                let cert = &c.certificate;
                eprintln!("W = {}", one_based(&cert.w));
                eprintln!("K = {}", one_based(&cert.k));
                let rows: Vec<String> = cert.u_inverse.row_vecs().iter().map(|r| fmt_row(r)).collect();
                eprintln!("U^-1 = [{}]", rows.join(","));
                (c.msp, c.reindex)
            };
            eprintln!("participants = {}", one_based(&reindex));
            out.write(&contracted.to_json())
        }
        Command::Relocate {
            msp,
            shares,
            q,
            method,
            structure,
            out,
        } => {
            let msp = load_msp(&msp)?;
            let doc: SharesDoc = serde_json::from_str(&read_file(&shares)?).map_err(Error::from)?;
            let shares = doc.to_share_vector(msp.field())?;
            let gamma = structure.map(|s| s.parse::<AccessStructure>()).transpose()?;
            let outcome = relocate::relocate(&msp, participants(&q)?, &shares, method, gamma.as_ref())?;
            let servers: Vec<_> = (0..outcome.reindex.len())
                .map(|i| {
                    json!({
                        "server": outcome.reindex[i] + 1,
                        "shares": outcome.server_shares(i).iter().map(Fe::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut report = json!({
                "method": method,
                "modulus": msp.field().modulus().to_string(),
                "servers": servers,
                "public": outcome.public_shares().iter().map(Fe::to_string).collect::<Vec<_>>(),
                "elements_moved": outcome.elements_moved,
            });
            if method == Method::Lc {
                report["scheme"] = serde_json::to_value(outcome.scheme()?.to_doc())?;
            }
            out.write(&serde_json::to_string_pretty(&report)?)
        }
        Command::Simulate { scenario, out } => {
            let scenario = Scenario::from_json(&read_file(&scenario)?)?;
            out.write(&simcloud::run(&scenario)?.to_csv())
        }
        Command::Bench {
            n,
            t,
            share_bits,
            z,
            format,
            material,
            out,
        } => {
            let mode = if material { Mode::Material } else { Mode::Analytic };
            let rows = simcloud::sweep(n, t, share_bits, z, mode)?;
            out.write(&match format {
                BenchFormat::Csv => simcloud::sweep_csv(&rows),
                BenchFormat::Metrics => metrics_csv(&rows, n, t),
                BenchFormat::Table => table(&rows),
                BenchFormat::PlotData => simcloud::sweep_plot_data(&rows),
            })
        }
        Command::Structure(StructureCommand::Contract { structure, q }) => {
            let gamma: AccessStructure = structure.parse()?;
            let c = gamma.contract(participants(&q)?)?;
            println!("{}", c.structure);
            println!("participants = {}", one_based(&c.reindex));
            Ok(())
        }
        Command::Structure(StructureCommand::Of { msp }) => {
            println!("{}", load_msp(&msp)?.realized_structure()?);
            Ok(())
        }
        Command::Abe(cmd) => run_abe(cmd),
    }
}

fn metrics_csv(rows: &[SweepRow], n: usize, t: usize) -> String {
    let mut s = format!("{METRICS_CSV_HEADER}\n");
    for r in rows {
        s.push_str(&relocate::metrics_csv_row(r.method, n, t, r.m, &r.metrics));
        s.push('\n');
    }
    s
}

fn table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:<6} {:>3} {:>14} {:>10} {:>8}\n", "method", "m", "L (bits)", "L (MiB)", "rho");
    for r in rows {
        s.push_str(&format!(
            "{:<6} {:>3} {:>14} {:>10.4} {:>8}\n",
            r.method.as_str(),
            r.m,
            r.metrics.total_bits,
            r.metrics.total_mib(),
            format!("1/{}", r.metrics.rho_inverse)
        ));
    }
    s
}

fn backend(group: &AbeGroup) -> anyhow::Result<DebugPairing> {
    Ok(DebugPairing::new(Field::from_decimal(&group.modulus)?))
}

fn attributes(s: &str) -> anyhow::Result<Vec<usize>> {
    Ok(participants(s)?.to_vec())
}

fn run_abe(cmd: AbeCommand) -> anyhow::Result<()> {
    match cmd {
        AbeCommand::Setup {
            group,
            universe,
            seed,
            pk,
            msk,
        } => {
            let b = backend(&group)?;
            let (p, m) = abe::setup(&b, universe, &mut rng(seed))?;
            write_file(&pk, &p.to_json(&b))?;
            write_file(&msk, &m.to_json(&b))
        }
        AbeCommand::Keygen {
            group,
            pk,
            msk,
            attributes: attrs,
            seed,
            out,
        } => {
            let b = backend(&group)?;
            let pk = PublicKey::from_json(&b, &read_file(&pk)?)?;
            let msk = MasterKey::from_json(&b, &read_file(&msk)?)?;
            let sk = abe::keygen(&b, &pk, &msk, &attributes(&attrs)?, &mut rng(seed))?;
            out.write(&sk.to_json(&b))
        }
        AbeCommand::Encrypt {
            group,
            pk,
            msp,
            message,
            seed,
            ct,
            ck,
        } => {
            let b = backend(&group)?;
            let pk = PublicKey::from_json(&b, &read_file(&pk)?)?;
            let msp = load_msp(&msp)?;
            let message = b.scalars().parse_elem(&message).context("message")?;
            let (c, k) = abe::encrypt_star(&b, &pk, &message, &msp, &mut rng(seed))?;
            write_file(&ct, &c.to_json(&b))?;
            write_file(&ck, &k.to_json(b.scalars()))
        }
        AbeCommand::RestrictCk { group, ct, ck, q, out } => {
            let b = backend(&group)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            let ck = ContractionKey::from_json(b.scalars(), &read_file(&ck)?)?;
            let restricted = ck.restrict(&ct, &attributes(&q)?, b.scalars())?;
            out.write(&restricted.to_json(b.scalars()))
        }
        AbeCommand::ContractSct {
            group,
            pk,
            ct,
            q,
            ck,
            out,
        } => {
            let b = backend(&group)?;
            let pk = PublicKey::from_json(&b, &read_file(&pk)?)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            let ck = ContractionKey::from_json(b.scalars(), &read_file(&ck)?)?;
            let res = abe::contract_sct(&b, &pk, &ct, &attributes(&q)?, &ck)?;
            out.write(&res.to_json(&b))
        }
        AbeCommand::ContractEct { group, ct, q, ck, out } => {
            let b = backend(&group)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            let ck = ContractionKey::from_json(b.scalars(), &read_file(&ck)?)?;
            let res = abe::contract_ect(&b, &ct, &attributes(&q)?, &ck)?;
            out.write(&res.to_json(&b))
        }
        AbeCommand::ContractRe {
            group,
            pk,
            sk,
            ct,
            q,
            seed,
            out,
            ck_out,
        } => {
            let b = backend(&group)?;
            let pk = PublicKey::from_json(&b, &read_file(&pk)?)?;
            let sk = SecretKey::from_json(&b, &read_file(&sk)?)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            let (res, ck) = abe::contract_re(&b, &pk, &sk, &ct, &attributes(&q)?, &mut rng(seed))?;
            if let Some(p) = ck_out {
                write_file(&p, &ck.to_json(b.scalars()))?;
            }
            out.write(&res.to_json(&b))
        }
        AbeCommand::Decrypt { group, pk, sk, ct } => {
            let b = backend(&group)?;
            let pk = PublicKey::from_json(&b, &read_file(&pk)?)?;
            let sk = SecretKey::from_json(&b, &read_file(&sk)?)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            println!("{}", abe::decrypt(&b, &pk, &sk, &ct)?);
            Ok(())
        }
        AbeCommand::Size { group, ct } => {
            let b = backend(&group)?;
            let ct = AbeCiphertext::from_json(&b, &read_file(&ct)?)?;
            let s = abe::ciphertext_size(&ct);
            println!("{}", serde_json::to_string(&s)?);
            Ok(())
        }
    }
}
