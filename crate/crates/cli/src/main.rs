use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mofs_core::constructions::{
    bachelor_square, complete_from_hadamard, five_max, hadamard, orthogonal_mate, seventeen,
    seventeen_plan,
};
use mofs_core::data::{self, sha256_hex, DATASETS};
use mofs_core::designs::{complete_mofs_possible, design_from_complete, verify_design, CompleteVerdict};
use mofs_core::embeddings::{two_imofs, Imofs};
use mofs_core::fsq::{
    parse_fsq, superposition_profile, verify_mofs, write_fsq, write_fsq_decimal, MofsSet,
};
use mofs_core::relations::{certify_maximal, construct_small_k, find_relation};
use mofs_core::search::{
    block_circulant_search, census, cliques_at_least, mate_graph, mates, CensusConfig, SearchError,
};
use mofs_core::trades::{switch_trade, validate_basic_trade, Cell, TradeSpec};

/// Exit status 1: the input is well formed but fails the requested property.
/// Exit status 2: the input could not be read or parsed.
enum Failure {
    Domain(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

fn domain(e: impl ToString) -> Failure {
    Failure::Domain(e.to_string())
}

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "mofs", version, about = "Binary mutually orthogonal frequency squares")]
struct Cli {
    /// Worker threads for the parallel searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized internals.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a file holds a set of mutually orthogonal squares.
    Verify {
        /// FSQ file, or the name of a bundled dataset.
        path: String,
        /// Look for a full relation.
        #[arg(long)]
        relations: bool,
        /// Try to certify maximality from a full relation.
        #[arg(long)]
        certify: bool,
        /// Print the superposition profile.
        #[arg(long)]
        profile: bool,
    },
    /// Build a set and write it after checking it.
    Construct {
        kind: ConstructKind,
        #[command(flatten)]
        params: ConstructParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive searches.
    Search {
        #[command(subcommand)]
        kind: SearchKind,
    },
    /// Validate or switch a basic trade.
    Trade {
        /// The set the trade lives in.
        #[arg(long = "in")]
        input: String,
        /// Common cell set, 1-based: `r,c r,c ...`.
        #[arg(long, conflicts_with = "trade")]
        cells: Option<String>,
        /// Trade file to switch.
        #[arg(long)]
        trade: Option<PathBuf>,
        /// Write the switched set instead of the trade.
        #[arg(long)]
        switch: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Resolvable design of a complete set, or the existence verdict for an order.
    Design {
        #[arg(long = "in", conflicts_with = "possible")]
        input: Option<String>,
        /// Report whether complete sets of this order can exist.
        #[arg(long)]
        possible: Option<usize>,
    },
    /// Bundled datasets.
    Data {
        #[command(subcommand)]
        action: DataAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    Hadamard,
    Complete,
    Bachelor,
    Mate,
    FiveMax,
    Seventeen,
    SmallKRelation,
    TwoImofs,
}

#[derive(Args)]
struct ConstructParams {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Input square for `mate`.
    #[arg(long = "in")]
    input: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write sets as decimal superpositions.
    #[arg(long)]
    decimal: bool,
}

#[derive(Subcommand)]
enum SearchKind {
    /// Every square orthogonal to all squares of the input.
    Mates {
        #[arg(long = "in")]
        input: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Large cliques in the mate graph of an orthogonal pair of order 6.
    Clique {
        /// File or dataset holding the pair.
        #[arg(long)]
        pair: String,
        /// 1-based squares to take from a larger set, e.g. `1,2`.
        #[arg(long)]
        squares: Option<String>,
        /// Smallest clique size reported.
        #[arg(long)]
        min: usize,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sets of block-circulant squares of order up to 10.
    BlockCirculant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Keep only sets with a full relation of this signature, `a,b`.
        #[arg(long)]
        relation: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Resumable mate-graph census over pairs taken from the input sets.
    Census {
        /// Sets to draw pairs from; by default the first two squares of each.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<String>,
        /// Use every pair of squares of every input set.
        #[arg(long)]
        all_pairs: bool,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 15)]
        min: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Subcommand)]
enum DataAction {
    /// Names and checksums.
    List,
    /// Print a dataset.
    Show { name: String },
    /// Load and verify every dataset.
    Check,
}

static SEED: OnceLock<u64> = OnceLock::new();

struct Provenance {
    lines: Vec<String>,
}

impl Provenance {
    fn new(inputs: &[&str]) -> Self {
        let cmd: Vec<String> = std::env::args().collect();
        let mut lines = vec![
            format!("mofs {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", cmd.join(" ")),
            format!("seed: {}", SEED.get().copied().unwrap_or(0)),
        ];
        if inputs.is_empty() {
            lines.push("input-sha256: -".into());
        }
        for text in inputs {
            lines.push(format!("input-sha256: {}", sha256_hex(text.as_bytes())));
        }
        Provenance { lines }
    }

    fn with(mut self, line: String) -> Self {
        self.lines.push(line);
        self
    }

    fn header(&self) -> String {
        self.lines.iter().map(|l| format!("# {l}\n")).collect()
    }
}

/// Reads a file, or a bundled dataset named by the file stem.
fn read_source(spec: &str) -> Result<String, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| input(format!("{spec}: {e}")));
    }
    let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or(spec);
    match data::dataset_text(stem) {
        Ok(text) => Ok(text.into_owned()),
        Err(data::DataError::Unknown(_)) => Err(input(format!("{spec}: no such file or dataset"))),
        Err(e) => Err(input(e)),
    }
}

fn read_set(spec: &str) -> Result<(MofsSet, String), Failure> {
    let text = read_source(spec)?;
    let set = parse_fsq(&text).map_err(|e| input(format!("{spec}: {e}")))?;
    Ok((set, text))
}

fn emit(output: &OutputArgs, body: &str) -> Outcome {
    match &output.out {
        Some(path) => std::fs::write(path, body).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn set_text(set: &MofsSet, decimal: bool) -> String {
    if decimal {
        write_fsq_decimal(set)
    } else {
        write_fsq(set)
    }
}

fn emit_set(output: &OutputArgs, prov: &Provenance, set: &MofsSet) -> Outcome {
    let report = verify_mofs(set);
    if !report.is_valid() {
        return Err(domain(format!("self-check failed: {report}")));
    }
    emit(output, &format!("{}{}", prov.header(), set_text(set, output.decimal)))
}

fn need(v: Option<usize>, name: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| input(format!("--{name} is required")))
}

fn parse_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| input(format!("bad number `{t}` in `{s}`"))))
        .collect()
}

fn cmd_verify(path: &str, relations: bool, certify: bool, profile: bool) -> Outcome {
    let (set, text) = read_set(path)?;
    println!("# input-sha256: {}", sha256_hex(text.as_bytes()));
    let report = verify_mofs(&set);
    if !report.is_valid() {
        println!("invalid {}-set of order {}", set.len(), set.order());
        print!("{report}");
        return Err(Failure::Domain(String::new()));
    }
    println!("valid {}-MOFS({})", set.len(), set.order());
    if relations {
        match find_relation(&set, true) {
            Ok(Some(rel)) => println!("{rel}"),
            Ok(None) => println!("no full relation"),
            Err(e) => println!("relation scan skipped: {e}"),
        }
    }
    if certify {
        let cert = certify_maximal(&set);
        if cert.is_certified() {
            println!("certified maximal");
        } else {
            println!("no maximality certificate");
        }
    }
    if profile {
        let p = superposition_profile(&set);
        let counts: Vec<String> = p.counts.iter().map(ToString::to_string).collect();
        println!("profile {}", counts.join(" "));
        println!("profile identities {}", if p.identities_hold() { "hold" } else { "fail" });
    }
    Ok(())
}

fn cmd_construct(kind: ConstructKind, p: &ConstructParams, output: &OutputArgs) -> Outcome {
    match kind {
        ConstructKind::Hadamard => {
            let n = need(p.n, "n")?;
            let h = hadamard(n).map_err(domain)?;
            if !h.is_hadamard() {
                return Err(domain("self-check failed"));
            }
            emit(output, &format!("{}{}", Provenance::new(&[]).header(), h.to_text()))
        }
        ConstructKind::Complete => {
            let n = need(p.n, "n")?;
            let set = hadamard(n).and_then(|h| complete_from_hadamard(&h)).map_err(domain)?;
            emit_set(output, &Provenance::new(&[]), &set)
        }
        ConstructKind::Bachelor => {
            let n = need(p.n, "n")?;
            let sq = bachelor_square(n).map_err(domain)?;
            let set = MofsSet::from_squares(vec![sq]).map_err(domain)?;
            emit_set(output, &Provenance::new(&[]), &set)
        }
        ConstructKind::Mate => {
            let spec = p.input.as_deref().ok_or_else(|| input("--in is required"))?;
            let (set, text) = read_set(spec)?;
            if set.len() != 1 {
                return Err(input(format!("{spec}: expected a single square, found {}", set.len())));
            }
            let base = mofs_core::fsq::FrequencySquare::new(set.square(0).clone()).map_err(domain)?;
            let mate = orthogonal_mate(&base).map_err(domain)?;
            let pair = MofsSet::from_squares(vec![base, mate]).map_err(domain)?;
            emit_set(output, &Provenance::new(&[&text]), &pair)
        }
        ConstructKind::FiveMax => {
            let n = need(p.n, "n")?;
            let set = five_max(n).map_err(domain)?;
            emit_set(output, &Provenance::new(&[]), &set)
        }
        ConstructKind::Seventeen => {
            let n = need(p.n, "n")?;
            let plan = seventeen_plan(n).map_err(domain)?;
            let set = seventeen(n).map_err(domain)?;
            emit_set(output, &Provenance::new(&[]).with(format!("plan: {plan}")), &set)
        }
        ConstructKind::SmallKRelation => {
            let n = need(p.n, "n")?;
            if n % 2 != 0 {
                return Err(domain(format!("order {n} is odd")));
            }
            let set = construct_small_k(need(p.k, "k")?, n / 2, need(p.a, "a")?, need(p.b, "b")?)
                .map_err(domain)?;
            emit_set(output, &Provenance::new(&[]), &set)
        }
        ConstructKind::TwoImofs => {
            let n = need(p.n, "n")?;
            let imofs: Imofs = two_imofs(n).map_err(domain)?;
            imofs.validate().map_err(domain)?;
            emit(output, &format!("{}{}", Provenance::new(&[]).header(), imofs.to_text()))
        }
    }
}

fn search_error(e: SearchError) -> Failure {
    match e {
        SearchError::Io(e) => input(e),
        other => domain(other),
    }
}

fn cmd_search(kind: &SearchKind) -> Outcome {
    match kind {
        SearchKind::Mates { input: spec, output } => {
            let (set, text) = read_set(spec)?;
            let found = mates(&set).map_err(search_error)?;
            let mut body = Provenance::new(&[&text]).header();
            writeln!(body, "mates {}", found.len()).unwrap();
            for m in found {
                let single = MofsSet::from_squares(vec![m]).map_err(domain)?;
                body.push('\n');
                body.push_str(&set_text(&single, output.decimal));
            }
            emit(output, &body)
        }
        SearchKind::Clique {
            pair,
            squares,
            min,
            budget,
            output,
        } => {
            let (set, text) = read_set(pair)?;
            let pair = match squares {
                Some(list) => {
                    let idx: Vec<usize> = parse_list(list)?.into_iter().map(|i| i.wrapping_sub(1)).collect();
                    set.subset(&idx).map_err(domain)?
                }
                None => set,
            };
            let g = mate_graph(&pair).map_err(search_error)?;
            let t = *min;
            let (cliques, timed_out) = match cliques_at_least(&g.graph, t, *budget) {
                Ok(c) => (c, false),
                Err(SearchError::Timeout { partial, .. }) => (partial, true),
                Err(e) => return Err(search_error(e)),
            };
            let mut report = Provenance::new(&[&text]).header();
            writeln!(report, "mates {} min-degree {}", g.vertices.len(), g.graph.min_degree()).unwrap();
            writeln!(report, "cliques {} (size >= {t}){}", cliques.len(), if timed_out { " budget exhausted" } else { "" }).unwrap();
            for c in &cliques {
                let ids: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
                writeln!(report, "clique {}: {}", c.len(), ids.join(" ")).unwrap();
            }
            let largest = cliques.iter().max_by_key(|c| c.len());
            match (&output.out, largest) {
                (Some(_), Some(c)) => {
                    print!("{report}");
                    let set = g.extend(&pair, c).map_err(search_error)?;
                    emit_set(output, &Provenance::new(&[&text]), &set)?;
                }
                _ => print!("{report}"),
            }
            if timed_out {
                return Err(domain("node budget exhausted"));
            }
            Ok(())
        }
        SearchKind::BlockCirculant {
            n,
            k,
            relation,
            budget,
            output,
        } => {
            let relation = match relation {
                Some(r) => match parse_list(r)?[..] {
                    [a, b] => Some((a, b)),
                    _ => return Err(input("--relation takes `a,b`")),
                },
                None => None,
            };
            let sets = block_circulant_search(*n, *k, relation, *budget).map_err(search_error)?;
            let mut body = Provenance::new(&[]).header();
            writeln!(body, "sets {}", sets.len()).unwrap();
            for s in &sets {
                if !verify_mofs(s).is_valid() {
                    return Err(domain("self-check failed"));
                }
                body.push('\n');
                body.push_str(&set_text(s, output.decimal));
            }
            emit(output, &body)
        }
        SearchKind::Census {
            inputs,
            all_pairs,
            checkpoint,
            min,
            budget,
        } => {
            let mut pairs = Vec::new();
            for spec in inputs {
                let (set, _) = read_set(spec)?;
                if set.len() < 2 {
                    return Err(input(format!("{spec}: needs at least two squares")));
                }
                if *all_pairs {
                    for i in 0..set.len() {
                        for j in i + 1..set.len() {
                            pairs.push(set.subset(&[i, j]).map_err(domain)?);
                        }
                    }
                } else {
                    pairs.push(set.subset(&[0, 1]).map_err(domain)?);
                }
            }
            let cfg = CensusConfig {
                min_clique: *min,
                node_budget: *budget,
            };
            let records = census(&pairs, &cfg, checkpoint).map_err(search_error)?;
            for r in &records {
                println!(
                    "pair {} mates {} min-degree {} triangles {} cliques {} largest {}{}",
                    r.pair,
                    r.mates,
                    r.min_degree,
                    if r.triangles { "yes" } else { "no" },
                    r.cliques,
                    r.largest,
                    if r.timed_out { " (budget exhausted)" } else { "" }
                );
            }
            Ok(())
        }
    }
}

fn parse_cells(s: &str) -> Result<Vec<Cell>, Failure> {
    s.split_whitespace()
        .map(|tok| {
            let t = tok.trim_start_matches('(').trim_end_matches(')');
            match parse_list(t)?[..] {
                [r, c] if r >= 1 && c >= 1 => Ok((r - 1, c - 1)),
                _ => Err(input(format!("bad cell `{tok}`"))),
            }
        })
        .collect()
}

fn cmd_trade(
    spec: &str,
    cells: Option<&str>,
    trade: Option<&Path>,
    switch: bool,
    output: &OutputArgs,
) -> Outcome {
    let (set, text) = read_set(spec)?;
    let t = match (cells, trade) {
        (Some(c), _) => validate_basic_trade(&set, &parse_cells(c)?).map_err(domain)?,
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            TradeSpec::parse(&body).map_err(input)?
        }
        (None, None) => return Err(input("give --cells or --trade")),
    };
    let prov = Provenance::new(&[&text]);
    if switch {
        let out = switch_trade(&set, &t).map_err(domain)?;
        emit_set(output, &prov, &out)
    } else {
        emit(output, &format!("{}{}", prov.header(), t.to_text()))
    }
}

fn cmd_design(spec: Option<&str>, possible: Option<usize>) -> Outcome {
    if let Some(n) = possible {
        match complete_mofs_possible(n).map_err(domain)? {
            CompleteVerdict::Impossible(why) => {
                println!("impossible: {why}");
                return Err(Failure::Domain(String::new()));
            }
            CompleteVerdict::IfHadamard { witness } => {
                println!(
                    "possible if a Hadamard matrix of order {n} exists; built-in witness: {}",
                    if witness { "yes" } else { "no" }
                );
            }
        }
        return Ok(());
    }
    let spec = spec.ok_or_else(|| input("give --in or --possible"))?;
    let (set, text) = read_set(spec)?;
    let d = design_from_complete(&set).map_err(domain)?;
    let report = verify_design(&d);
    if !report.is_valid() {
        return Err(domain(report));
    }
    print!("{}{}", Provenance::new(&[&text]).header(), d.to_text());
    Ok(())
}

fn cmd_data(action: &DataAction) -> Outcome {
    match action {
        DataAction::List => {
            for d in DATASETS {
                println!("{} {}", d.name, d.sha256);
            }
            Ok(())
        }
        DataAction::Show { name } => {
            print!("{}", data::dataset_text(name).map_err(input)?);
            Ok(())
        }
        DataAction::Check => {
            for d in DATASETS {
                if d.name.ends_with(".fsq") {
                    let set = data::load(d.name).map_err(domain)?;
                    println!("{} ok {}-MOFS({})", d.name, set.len(), set.order());
                } else {
                    let rows = data::circulant_rows(d.name).map_err(domain)?;
                    println!("{} ok {} squares", d.name, rows.squares);
                }
            }
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(input)?;
    }
    match &cli.command {
        Command::Verify {
            path,
            relations,
            certify,
            profile,
        } => cmd_verify(path, *relations, *certify, *profile),
        Command::Construct { kind, params, output } => cmd_construct(*kind, params, output),
        Command::Search { kind } => cmd_search(kind),
        Command::Trade {
            input: spec,
            cells,
            trade,
            switch,
            output,
        } => cmd_trade(spec, cells.as_deref(), trade.as_deref(), *switch, output),
        Command::Design { input: spec, possible } => cmd_design(spec.as_deref(), *possible),
        Command::Data { action } => cmd_data(action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    SEED.set(cli.seed).expect("set once");
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            match f {
                Failure::Domain(m) | Failure::Input(m) if !m.is_empty() => eprintln!("error: {m}"),
                _ => {}
            }
            ExitCode::from(code)
        }
    }
}
