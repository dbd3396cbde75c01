use std::fs;
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use aag_core::aag::{
    gen_private_with, run_local, LocalSession, PrivateKey, PublicParams, SessionConfig, Side,
};
use aag_core::attack::{recover_key, solve_simultaneous, AttackError, AttackInstance, AttackOptions, AttackReport};
use aag_core::error::ProtocolError;
use aag_core::platforms::parse_platform_config;
use aag_core::rng::SplitMix64;
use aag_core::transcript::Transcript;
use aag_core::wire::{run_exchange, ExchangeOptions, Role, WireError};
use aag_core::{ContractionBudget, DecodeError, Element, GroupError, Platform, PlatformSpec, SignedIndex};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Automaton-group key agreement: platforms, sessions, wire endpoints and the
/// conjugacy attack harness.
#[derive(Parser)]
#[command(name = "aag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered platforms.
    Platforms,
    /// Reduce a word, decide triviality and summarize its canonical portrait.
    Eval {
        platform: String,
        /// Word over the platform generators, e.g. "b c d" or "a b^-1".
        word: String,
    },
    /// Draw a private word for one side.
    Keygen {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, value_parser = parse_side, default_value = "alice")]
        side: Side,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a whole session.
    Exchange {
        /// Both sides in this process (the only supported mode).
        #[arg(long, required = true)]
        local: bool,
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 1)]
        seed_a: u64,
        #[arg(long, default_value_t = 2)]
        seed_b: u64,
        /// Write the session transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Wait for one connection and run the responder (Bob) side.
    Host {
        #[arg(long, default_value = "127.0.0.1:7420")]
        listen: String,
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        /// Accept the initiator's public parameters.
        #[arg(long)]
        adopt_params: bool,
    },
    /// Connect and run the initiator (Alice) side.
    Join {
        #[arg(long, default_value = "127.0.0.1:7420")]
        connect: String,
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Recover the shared key by brute-force conjugacy search.
    Attack {
        /// Build the session from seeds.
        #[arg(long, conflicts_with = "from_transcript")]
        from_seeds: bool,
        /// Attack a recorded transcript.
        #[arg(long)]
        from_transcript: Option<PathBuf>,
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 1)]
        seed_a: u64,
        #[arg(long, default_value_t = 2)]
        seed_b: u64,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 5_000_000)]
        max_nodes: u64,
        /// Skip candidates equal to an earlier one as group elements.
        #[arg(long)]
        dedup: bool,
        #[arg(long)]
        parallel: bool,
        /// Also print the tab-separated measurement record.
        #[arg(long)]
        record: bool,
    },
    /// Time the word problem and whole sessions.
    Bench {
        #[arg(long, default_value = "grigorchuk")]
        platform: String,
        #[arg(long, default_value_t = 20)]
        sessions: u64,
    },
}

#[derive(Args, Clone)]
struct Setup {
    /// Platform name: grigorchuk, gomega[:ω], basilica, universal, hanoi[:k], affine.
    #[arg(long, default_value = "grigorchuk")]
    platform: String,
    /// Platform config file; overrides --platform.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    #[arg(long, default_value_t = 10)]
    t: usize,
    /// Letters per public generator word.
    #[arg(long, default_value_t = 5)]
    gen_len: usize,
    #[arg(long, default_value_t = 0)]
    params_seed: u64,
    /// Private words use only positive letters.
    #[arg(long)]
    positive_only: bool,
}

impl Setup {
    fn platform(&self, budget: ContractionBudget) -> Result<Platform> {
        let spec = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_platform_config(&text)?
            }
            None => PlatformSpec::parse(&self.platform)?,
        };
        let p = Platform::build(spec, budget)?;
        warn_if_unsuitable(&p);
        Ok(p)
    }

    fn config(&self) -> SessionConfig {
        SessionConfig {
            n: self.n,
            m: self.m,
            s: self.s,
            t: self.t,
            generator_length: self.gen_len,
            positive_only: self.positive_only,
        }
    }

    fn params(&self, budget: ContractionBudget) -> Result<PublicParams> {
        let p = self.platform(budget)?;
        if !p.supports_elements() {
            bail!(GroupError::NoNucleus);
        }
        Ok(PublicParams::random(p, self.n, self.m, self.gen_len, self.params_seed)?)
    }

    fn key(&self, params: &PublicParams, side: Side, seed: u64) -> Result<PrivateKey> {
        let len = match side {
            Side::Alice => self.s,
            Side::Bob => self.t,
        };
        Ok(gen_private_with(params, side, len, seed, self.positive_only)?)
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s.to_ascii_lowercase().as_str() {
        "alice" | "a" => Ok(Side::Alice),
        "bob" | "b" => Ok(Side::Bob),
        _ => Err(format!("unknown side `{s}`")),
    }
}

/// Automaton platforms without a nucleus (Hanoi towers on four or more pegs)
/// can still evaluate words but are unsuitable for sessions.
fn warn_if_unsuitable(p: &Platform) {
    if p.automaton_group().is_some() && !p.is_contracting() {
        eprintln!(
            "warning: {} is not contracting: the word problem is not known to be polynomial and elements have no canonical form for key use",
            p.name()
        );
    }
}

fn budget() -> Result<ContractionBudget> {
    Ok(ContractionBudget::from_env()?)
}

fn format_index_word(prefix: &str, word: &[SignedIndex]) -> String {
    if word.is_empty() {
        return "ε".into();
    }
    word.iter()
        .map(|x| format!("{prefix}{}{}", x.index + 1, if x.inverse { "⁻¹" } else { "" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn format_private(params: &PublicParams, key: &PrivateKey) -> String {
    let prefix = match key.side() {
        Side::Alice => "a",
        Side::Bob => "b",
    };
    format!("{}  (over {} generators)", format_index_word(prefix, key.word()), params.generators(key.side()).len())
}

fn cmd_platforms() -> Result<()> {
    let b = budget()?;
    for name in ["grigorchuk", "gomega", "basilica", "universal", "hanoi:3", "hanoi:4", "affine"] {
        let p = Platform::by_name(name, b)?;
        let detail = match p.automaton_group() {
            Some(g) => {
                let nucleus = match g.nucleus() {
                    Ok(n) => format!("nucleus {}", n.len()),
                    Err(_) => "no nucleus".into(),
                };
                format!("alphabet {}, {nucleus}", g.alphabet_size())
            }
            None => format!("dimension {}", p.affine_group().map_or(0, |g| g.dimension())),
        };
        println!(
            "0x{:02x}  {:<12} generators {:<16} {}{}",
            p.id(),
            p.name(),
            p.generator_names().join(","),
            detail,
            if p.supports_elements() { "" } else { " (word problem only)" }
        );
    }
    Ok(())
}

fn cmd_eval(platform: &str, word: &str) -> Result<()> {
    let b = budget()?;
    let p = Platform::by_name(platform, b)?;
    warn_if_unsuitable(&p);
    if let Some(g) = p.automaton_group() {
        let w = g.parse_word(word)?;
        println!("reduced: {}", g.format_word(&w));
        let trivial = g.is_trivial(&w, b)?;
        println!("{}", if trivial { "trivial" } else { "nontrivial" });
        println!("root permutation: {}", g.root_perm(&w)?);
        if g.has_nucleus() {
            let portrait = g.canonical_portrait(&w, b)?;
            let (branches, leaves) = portrait.node_counts();
            let bytes = portrait.to_bytes();
            println!("portrait: depth {}, {branches} branches, {leaves} leaves, {} bytes", portrait.depth(), bytes.len());
            if bytes.len() <= 64 {
                println!("bytes: {}", hex::encode(&bytes));
            }
        }
    } else {
        let w: Vec<SignedIndex> = p.parse_generator_word(word)?;
        let Element::Affine(x) = p.evaluate(&w)? else { unreachable!() };
        println!("{}", if x.is_identity() { "trivial" } else { "nontrivial" });
        let n = x.dimension();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| x.entry(i, j).to_string()).collect();
            println!("[{}] + {}", row.join(" "), x.translation()[i]);
        }
    }
    Ok(())
}

fn print_session(s: &LocalSession) {
    println!("alice: {}", hex::encode(s.alice_shared.bytes));
    println!("bob:   {}", hex::encode(s.bob_shared.bytes));
    println!("{}", if s.agreed() { "keys agree" } else { "KEYS DIFFER" });
}

fn cmd_exchange(setup: &Setup, seed_a: u64, seed_b: u64, transcript: Option<&PathBuf>) -> Result<u8> {
    let params = setup.params(budget()?)?;
    let s = run_local(&params, &setup.config(), seed_a, seed_b)?;
    print_session(&s);
    if let Some(path) = transcript {
        fs::write(path, Transcript::from_session(&params, &s).to_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if s.agreed() { 0 } else { 1 })
}

fn cmd_endpoint(role: Role, addr: &str, setup: &Setup, seed: u64, adopt: bool) -> Result<()> {
    let params = setup.params(budget()?)?;
    let key = setup.key(&params, role.side(), seed)?;
    let mut stream = match role {
        Role::Responder => {
            let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            listener.accept()?.0
        }
        Role::Initiator => TcpStream::connect(addr).with_context(|| format!("connecting to {addr}"))?,
    };
    let out = run_exchange(&mut stream, role, &params, &key, ExchangeOptions { adopt_params: adopt })?;
    println!("{}", hex::encode(out.shared.bytes));
    println!("confirmed");
    Ok(())
}

fn cmd_attack(
    transcript: Option<&PathBuf>,
    setup: &Setup,
    seed_a: u64,
    seed_b: u64,
    options: AttackOptions,
    record: bool,
) -> Result<u8> {
    let b = budget()?;
    let (params, alice_sent, bob_sent, honest, s, t) = match transcript {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let tr = Transcript::from_bytes(&bytes, b)?;
            (tr.params, tr.alice_sent, tr.bob_sent, tr.alice_digest, 0, 0)
        }
        None => {
            let params = setup.params(b)?;
            let sess = run_local(&params, &setup.config(), seed_a, seed_b)?;
            (params, sess.alice_sent, sess.bob_sent, sess.alice_shared.bytes, setup.s, setup.t)
        }
    };
    let start = Instant::now();
    let mut nodes = 0;
    let mut solve = |target| -> Result<Option<Vec<SignedIndex>>> {
        let inst = AttackInstance::new(params.clone(), target)?;
        let r = solve_simultaneous(&inst, &options)?;
        nodes += r.nodes;
        Ok(r.solution().map(<[_]>::to_vec))
    };
    let sol_a = solve(alice_sent)?;
    let sol_b = solve(bob_sent)?;
    let found = sol_a.is_some() && sol_b.is_some();
    let report = AttackReport {
        platform: params.platform().name(),
        n: params.n(),
        m: params.m(),
        s,
        t,
        max_length: options.max_length,
        found,
        nodes,
        millis: start.elapsed().as_millis(),
    };
    println!("{report}");
    if record {
        println!("{}", report.record());
    }
    let recovered = match (&sol_a, &sol_b) {
        (Some(a), Some(bw)) => {
            println!("A = {}", format_index_word("a", a));
            println!("B = {}", format_index_word("b", bw));
            recover_key(&params, a, bw)? == honest
        }
        _ => false,
    };
    println!("key recovered: {recovered}");
    Ok(if recovered { 0 } else { 1 })
}

fn cmd_bench(platform: &str, sessions: u64) -> Result<()> {
    let b = budget()?;
    let p = Platform::by_name(platform, b)?;
    warn_if_unsuitable(&p);
    if let Some(g) = p.automaton_group() {
        let mut rng = SplitMix64::new(7);
        for len in [50usize, 100, 200, 400] {
            let word = p.random_word(len, &mut rng);
            let letters: Vec<_> = word
                .iter()
                .map(|x| aag_core::Letter::new(g.generators()[x.index as usize], x.inverse))
                .collect();
            let w = g.word(letters)?;
            let start = Instant::now();
            let trivial = g.is_trivial(&w, b)?;
            println!("word problem  len {len:>4}: {:>10.3} ms  trivial={trivial}", start.elapsed().as_secs_f64() * 1e3);
        }
    }
    if p.supports_elements() {
        let cfg = SessionConfig::default();
        let start = Instant::now();
        let mut agreed = 0;
        for i in 0..sessions {
            let params = PublicParams::random(p.clone(), cfg.n, cfg.m, cfg.generator_length, i)?;
            if run_local(&params, &cfg, 2 * i + 1, 2 * i + 2)?.agreed() {
                agreed += 1;
            }
        }
        let total = start.elapsed().as_secs_f64() * 1e3;
        println!("sessions: {agreed}/{sessions} agreed, {:.3} ms each", total / sessions.max(1) as f64);
    }
    Ok(())
}

/// Exit status per error class; usage errors exit with 2 through clap.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<WireError>() {
        return 100u8.saturating_add(e.code().min(99));
    }
    if err.downcast_ref::<AttackError>().is_some() {
        return 6;
    }
    if err.downcast_ref::<DecodeError>().is_some() {
        return 5;
    }
    if err.downcast_ref::<ProtocolError>().is_some() {
        return 4;
    }
    if err.downcast_ref::<GroupError>().is_some() {
        return 3;
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 7;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Platforms => cmd_platforms().map(|_| 0),
        Command::Eval { platform, word } => cmd_eval(platform, word).map(|_| 0),
        Command::Keygen { setup, side, seed } => (|| {
            let params = setup.params(budget()?)?;
            let key = setup.key(&params, *side, *seed)?;
            println!("{}", format_private(&params, &key));
            Ok(0)
        })(),
        Command::Exchange { setup, seed_a, seed_b, transcript, .. } => cmd_exchange(setup, *seed_a, *seed_b, transcript.as_ref()),
        Command::Host { listen, setup, seed, adopt_params } => {
            cmd_endpoint(Role::Responder, listen, setup, *seed, *adopt_params).map(|_| 0)
        }
        Command::Join { connect, setup, seed } => cmd_endpoint(Role::Initiator, connect, setup, *seed, false).map(|_| 0),
        Command::Attack { from_seeds, from_transcript, setup, seed_a, seed_b, max_len, max_nodes, dedup, parallel, record } => {
            if !from_seeds && from_transcript.is_none() {
                eprintln!("error: attack needs --from-seeds or --from-transcript <FILE>");
                return ExitCode::from(2);
            }
            let options = AttackOptions { max_length: *max_len, max_nodes: *max_nodes, dedup: *dedup, parallel: *parallel };
            cmd_attack(from_transcript.as_ref(), setup, *seed_a, *seed_b, options, *record)
        }
        Command::Bench { platform, sessions } => cmd_bench(platform, *sessions).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
