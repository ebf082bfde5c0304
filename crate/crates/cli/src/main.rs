//! Command-line frontend for the phased-graph-state simulator.
//!
//! Subcommands cover strong and weak circuit simulation, reduction to the
//! phased-adjacency form, standalone LDL factorization, tree decomposition,
//! LC-equivalence of graphs, the graph-state learning demo, a cross-oracle
//! self-test, and a scaling benchmark. Every run is deterministic given its
//! flags; all randomness flows from `--seed` through per-purpose streams.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use pgsim::gf2::{BitMatrix, BitVector};
use pgsim::pgs::{self, PhasedAdjacency};
use pgsim::sim::{self, AlphaRule, CounterRng, SampleSpec, SampleStrategy, WeakSamples};
use pgsim::treedec::{self, Graph, Strategy, TreeDecomposition};
use pgsim::zx::{self, CliffordCircuit, Gate};
use pgsim::{analysis, ldl, oracle};

#[derive(Parser)]
#[command(name = "pgsim", version, about = "Exact Clifford and Clifford+T simulation via GF(2) LDL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute exact output amplitudes of a circuit.
    Strong {
        /// Circuit file (line-oriented gate text).
        #[arg(long)]
        circuit: String,
        /// File of query bitstrings, one per line; defaults to the all-zero
        /// string.
        #[arg(long)]
        xs: Option<String>,
        /// Refuse circuits containing T gates.
        #[arg(long)]
        no_t: bool,
        /// Largest admissible T count.
        #[arg(long, default_value_t = zx::DEFAULT_T_CAP)]
        t_cap: usize,
        /// Also print each amplitude as a complex float.
        #[arg(long)]
        float: bool,
    },
    /// Draw outcome samples from a Clifford circuit.
    Sample {
        #[arg(long)]
        circuit: String,
        /// Number of samples.
        #[arg(long, short = 'k', default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Kernel strategy override.
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },
    /// Reduce a Clifford circuit to its phased-adjacency instance.
    Reduce {
        #[arg(long)]
        circuit: String,
        /// Write the phased-adjacency text here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Write the instance sidecar (fixed vertices, labels, outputs,
        /// offsets, scalar) here.
        #[arg(long)]
        sidecar: Option<String>,
    },
    /// Factor a symmetric GF(2) matrix and report its block profile.
    Ldl {
        /// Matrix in edge-list text; a self-loop `e v v` sets a diagonal bit.
        #[arg(long)]
        matrix: String,
        /// Factor along this tree decomposition instead of densely.
        #[arg(long)]
        td: Option<String>,
    },
    /// Compute or check a tree decomposition of a graph.
    Treedec {
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum, default_value_t = HeuristicArg::MinDeg)]
        strategy: HeuristicArg,
        /// Write the decomposition in PACE format.
        #[arg(long)]
        out: Option<String>,
        /// Validate this PACE file against the graph instead of computing.
        #[arg(long)]
        check: Option<String>,
    },
    /// Decide labeled LC-equivalence of two graphs.
    Lc {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Run the low-rank graph-state learning protocol on random graphs.
    LearnDemo {
        #[arg(long, short = 'n', default_value_t = 8)]
        vertices: usize,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-check the LDL pipeline against the brute-force oracles.
    Selftest {
        /// Run the reduced-size subset.
        #[arg(long)]
        quick: bool,
        /// Deliberately break the amplitude scalar rule; the strong-vs-dense
        /// suite must then fail.
        #[arg(long)]
        inject_wrong_alpha: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time prepare/strong/sample over a circuit grid.
    Bench {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Direct,
    ExplicitBasis,
}

impl From<StrategyArg> for SampleStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => SampleStrategy::Auto,
            StrategyArg::Direct => SampleStrategy::Direct,
            StrategyArg::ExplicitBasis => SampleStrategy::ExplicitBasis,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicArg {
    MinDeg,
    MinFill,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Dispatch one subcommand. `Ok(false)` marks a clean run whose checks
/// failed (self-test mismatches, invalid decompositions), which must still
/// exit nonzero.
fn run(command: Command) -> Result<bool, String> {
    match command {
        Command::Strong { circuit, xs, no_t, t_cap, float } => {
            cmd_strong(&circuit, xs.as_deref(), no_t, t_cap, float)
        }
        Command::Sample { circuit, count, seed, strategy } => {
            cmd_sample(&circuit, count, seed, strategy.into())
        }
        Command::Reduce { circuit, out, sidecar } => {
            cmd_reduce(&circuit, out.as_deref(), sidecar.as_deref())
        }
        Command::Ldl { matrix, td } => cmd_ldl(&matrix, td.as_deref()),
        Command::Treedec { graph, strategy, out, check } => {
            cmd_treedec(&graph, strategy, out.as_deref(), check.as_deref())
        }
        Command::Lc { left, right } => cmd_lc(&left, &right),
        Command::LearnDemo { vertices, delta, trials, seed } => {
            cmd_learn_demo(vertices, delta, trials, seed)
        }
        Command::Selftest { quick, inject_wrong_alpha, seed } => {
            Ok(cmd_selftest(quick, inject_wrong_alpha, seed))
        }
        Command::Bench { quick, seed } => {
            cmd_bench(quick, seed);
            Ok(true)
        }
    }
}

fn read_file(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

fn write_file(path: &str, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{path}: {e}"))
}

fn parse_circuit_file(path: &str) -> Result<CliffordCircuit, String> {
    zx::parse_circuit(&read_file(path)?).map_err(|e| format!("{path}: {e}"))
}

/// Render an exact ring element: `zero`, `(s, m)` for `2^{s/2} omega^m`, or
/// four dyadic omega-power coefficients when no phase form exists.
fn render_exact(a: &pgs::ExactAmplitude) -> String {
    if a.is_zero() {
        return "zero".to_owned();
    }
    if let Some((s, m)) = a.to_phase_form() {
        return format!("({s}, {m})");
    }
    let (c, d) = a.parts();
    format!("[{} {} {} {}]/2^{d}", c[0], c[1], c[2], c[3])
}

fn render_float(a: &pgs::ExactAmplitude) -> String {
    let z = a.to_complex();
    format!("{:+.12}{:+.12}i", z.re, z.im)
}

fn render_bits(x: &BitVector) -> String {
    if x.len() == 0 {
        return "-".to_owned();
    }
    (0..x.len()).map(|q| if x.get(q) { '1' } else { '0' }).collect()
}

fn bits_of_word(w: u64, n: usize) -> BitVector {
    let mut x = BitVector::zeros(n);
    for q in 0..n {
        if w >> q & 1 == 1 {
            x.set(q, true);
        }
    }
    x
}

fn parse_bits(line: &str, n: usize) -> Result<BitVector, String> {
    let line = line.trim();
    if line == "-" && n == 0 {
        return Ok(BitVector::zeros(0));
    }
    if line.len() != n {
        return Err(format!("bitstring {line:?} has length {}, expected {n}", line.len()));
    }
    let mut x = BitVector::zeros(n);
    for (q, ch) in line.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => x.set(q, true),
            _ => return Err(format!("bitstring {line:?} has a character other than 0/1")),
        }
    }
    Ok(x)
}

fn cmd_strong(
    circuit: &str,
    xs_path: Option<&str>,
    no_t: bool,
    t_cap: usize,
    float: bool,
) -> Result<bool, String> {
    let c = parse_circuit_file(circuit)?;
    if no_t && c.t_count() > 0 {
        return Err(format!("circuit has {} T gates and --no-t was given", c.t_count()));
    }
    let xs: Vec<BitVector> = match xs_path {
        Some(p) => read_file(p)?
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_owned())
            .filter(|l| !l.is_empty())
            .map(|l| parse_bits(&l, c.n))
            .collect::<Result<_, _>>()?,
        None => vec![BitVector::zeros(c.n)],
    };
    let amps = if c.is_clifford() {
        let inst = zx::reduce_to_pgs(&c).expect("clifford circuit reduces");
        inst.amplitudes(&xs)
    } else {
        zx::clifford_t_strong_with(&c, &xs, t_cap, true).map_err(|e| e.to_string())?
    };
    for (x, a) in xs.iter().zip(&amps) {
        if float {
            println!("{} {} {}", render_bits(x), render_exact(a), render_float(a));
        } else {
            println!("{} {}", render_bits(x), render_exact(a));
        }
    }
    Ok(true)
}

fn cmd_sample(
    circuit: &str,
    count: usize,
    seed: u64,
    strategy: SampleStrategy,
) -> Result<bool, String> {
    let c = parse_circuit_file(circuit)?;
    if !c.is_clifford() {
        return Err("sampling requires a Clifford-only circuit".to_owned());
    }
    let inst = zx::reduce_to_pgs(&c).expect("clifford circuit reduces");
    let n = inst.a.n();
    let ctx = sim::prepare(&inst.a, inst.td.as_ref()).map_err(|e| e.to_string())?;
    // Condition every non-output vertex on its instance label; the output
    // bits of a full sampled word are read off relative to those offsets.
    let base = inst.assemble_label(&BitVector::zeros(c.n));
    let spec = SampleSpec { s: inst.s.clone(), y: base.clone(), seed, count };
    match sim::weak_sample(&ctx, &spec, strategy) {
        WeakSamples::Empty => Err("conditioned support is empty; the reduction is inconsistent"
            .to_owned()),
        WeakSamples::Samples(words) => {
            for w in words {
                assert_eq!(w.len(), n, "sampled word has the wrong length");
                let mut x = BitVector::zeros(c.n);
                for (q, &v) in inst.output_map.iter().enumerate() {
                    if w.get(v) ^ base.get(v) {
                        x.set(q, true);
                    }
                }
                println!("{}", render_bits(&x));
            }
            Ok(true)
        }
    }
}

fn cmd_reduce(
    circuit: &str,
    out: Option<&str>,
    sidecar: Option<&str>,
) -> Result<bool, String> {
    let c = parse_circuit_file(circuit)?;
    let inst = zx::reduce_to_pgs(&c).map_err(|e| e.to_string())?;
    let text = pgs::write_pgs(&inst.a);
    match out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    let mut side = String::new();
    let join = |vs: &[usize]| {
        vs.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(" ")
    };
    writeln!(side, "fixed {}", join(&inst.s)).unwrap();
    writeln!(side, "labels {}", render_bits(&inst.y)).unwrap();
    writeln!(side, "outputs {}", join(&inst.output_map)).unwrap();
    let base = inst.assemble_label(&BitVector::zeros(c.n));
    let mut offsets = BitVector::zeros(c.n);
    for (q, &v) in inst.output_map.iter().enumerate() {
        if base.get(v) {
            offsets.set(q, true);
        }
    }
    writeln!(side, "offsets {}", render_bits(&offsets)).unwrap();
    writeln!(side, "scalar {}", render_exact(&inst.scalar)).unwrap();
    match sidecar {
        Some(p) => write_file(p, &side)?,
        None => print!("{side}"),
    }
    Ok(true)
}

/// Parse a symmetric GF(2) matrix in edge-list text, where a self-loop
/// marks a diagonal one.
fn read_symmetric(text: &str) -> Result<BitMatrix, String> {
    let mut m: Option<BitMatrix> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() || body.starts_with('c') {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            ["p", n, _m] => {
                let n: usize = n.parse().map_err(|_| format!("line {line}: bad size"))?;
                m = Some(BitMatrix::zeros(n, n));
            }
            ["e", u, v] => {
                let mat = m.as_mut().ok_or(format!("line {line}: edge before header"))?;
                let u: usize = u.parse().map_err(|_| format!("line {line}: bad vertex"))?;
                let v: usize = v.parse().map_err(|_| format!("line {line}: bad vertex"))?;
                if u == 0 || v == 0 || u > mat.rows() || v > mat.rows() {
                    return Err(format!("line {line}: vertex out of range"));
                }
                mat.set(u - 1, v - 1, true);
                mat.set(v - 1, u - 1, true);
            }
            _ => return Err(format!("line {line}: unrecognized line {body:?}")),
        }
    }
    m.ok_or("missing `p <n> <m>` header".to_owned())
}

fn cmd_ldl(matrix: &str, td_path: Option<&str>) -> Result<bool, String> {
    let a = read_symmetric(&read_file(matrix)?)?;
    let n = a.rows();
    let fact = match td_path {
        Some(p) => {
            let td = treedec::read_td(&read_file(p)?).map_err(|e| e.to_string())?;
            let implicit = ldl::ldl_tree(&a, &td).map_err(|e| e.to_string())?;
            println!("mode tree width {}", td.width());
            implicit.expand()
        }
        None => {
            println!("mode dense");
            ldl::ldl_dense(&a)
        }
    };
    let mut ones = 0usize;
    let mut antis = 0usize;
    let mut zeros = 0usize;
    for b in &fact.d {
        match b {
            ldl::DBlock::One => ones += 1,
            ldl::DBlock::AntiDiag2 => antis += 1,
            ldl::DBlock::Zero => zeros += 1,
        }
    }
    println!("n {n}");
    println!("rank {}", fact.rank);
    println!("blocks one {ones} anti {antis} zero {zeros}");
    let ok = fact.reconstruct() == a;
    println!("reconstruction {}", if ok { "ok" } else { "MISMATCH" });
    Ok(ok)
}

fn cmd_treedec(
    graph: &str,
    strategy: HeuristicArg,
    out: Option<&str>,
    check: Option<&str>,
) -> Result<bool, String> {
    let g = treedec::read_graph(&read_file(graph)?).map_err(|e| e.to_string())?;
    if let Some(p) = check {
        let td = treedec::read_td(&read_file(p)?).map_err(|e| e.to_string())?;
        return match td.validate(&g) {
            Ok(w) => {
                println!("valid width {w} bags {}", td.bags.len());
                Ok(true)
            }
            Err(e) => {
                println!("invalid: {e}");
                Ok(false)
            }
        };
    }
    let s = match strategy {
        HeuristicArg::MinDeg => Strategy::MinDegree,
        HeuristicArg::MinFill => Strategy::MinFill,
    };
    let td = treedec::heuristic_decompose(&g, s);
    let w = td.validate(&g).map_err(|e| format!("heuristic produced an invalid tree: {e}"))?;
    println!("width {w} bags {}", td.bags.len());
    if let Some(p) = out {
        write_file(p, &treedec::write_td(&td, g.n()))?;
    }
    Ok(true)
}

fn cmd_lc(left: &str, right: &str) -> Result<bool, String> {
    let a = treedec::read_graph(&read_file(left)?).map_err(|e| e.to_string())?;
    let b = treedec::read_graph(&read_file(right)?).map_err(|e| e.to_string())?;
    let eq = analysis::lc_equivalent(&a, &b).map_err(|e| e.to_string())?;
    if let Some(w) = &eq.witness {
        println!("equivalent k {}", w.k);
        println!("pi_a {}", w.pi_a.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        println!("pi_b {}", w.pi_b.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        println!("u {}", render_bits(&w.u));
        println!("v {}", render_bits(&w.v));
    } else {
        println!("not equivalent");
    }
    Ok(true)
}

fn random_graph(n: usize, rng: &mut CounterRng) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.bit() {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn cmd_learn_demo(n: usize, delta: f64, trials: usize, seed: u64) -> Result<bool, String> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err("delta must lie strictly between 0 and 1".to_owned());
    }
    let s = (1.0 / delta).log2().ceil().max(1.0) as usize;
    let mut failures = 0usize;
    let mut worst = 0usize;
    for t in 0..trials {
        let mut rng = CounterRng::new(seed, 100 + t as u64);
        let g = random_graph(n, &mut rng);
        let res = analysis::learn_graph_state(&g, delta, rng.next_u64());
        let bound = 2 * (res.r + 1) * s;
        worst = worst.max(res.measurements);
        if !res.success {
            failures += 1;
        }
        println!(
            "trial {t} rank {} measurements {} bound {bound} gates {} {}",
            res.r,
            res.measurements,
            res.gates.len(),
            if res.success { "ok" } else { "FAIL" }
        );
    }
    println!("trials {trials} failures {failures} worst_measurements {worst}");
    Ok(true)
}

fn random_clifford(n: usize, m: usize, rng: &mut CounterRng) -> CliffordCircuit {
    let mut gates = Vec::with_capacity(m);
    for _ in 0..m {
        let q = rng.below(n as u64) as usize;
        gates.push(match rng.below(if n > 1 { 7 } else { 5 }) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::Sdg(q),
            3 => Gate::Z(q),
            4 => Gate::X(q),
            kind => {
                let mut p = rng.below(n as u64 - 1) as usize;
                if p >= q {
                    p += 1;
                }
                let (a, b) = (q.min(p), q.max(p));
                if kind == 5 {
                    Gate::Cz(a, b)
                } else {
                    Gate::Cnot(a, b)
                }
            }
        });
    }
    CliffordCircuit { n, gates }
}

fn random_pgs(n: usize, rng: &mut CounterRng) -> PhasedAdjacency {
    let mut a = PhasedAdjacency::new(n);
    for u in 0..n {
        a.set_diag(u, rng.below(4) as u8);
        for v in u + 1..n {
            if rng.bit() {
                a.set_edge(u, v, true);
            }
        }
    }
    a
}

struct SuiteReport {
    any_failed: bool,
}

impl SuiteReport {
    fn record(&mut self, name: &str, passed: usize, total: usize) {
        println!("suite {name}: {passed}/{total}");
        if passed != total {
            self.any_failed = true;
        }
    }
}

/// Desk-scale cross-oracle checks. Returns whether everything passed.
fn cmd_selftest(quick: bool, inject_wrong_alpha: bool, seed: u64) -> bool {
    let reps = if quick { 10 } else { 40 };
    let mut report = SuiteReport { any_failed: false };
    let rule = if inject_wrong_alpha { AlphaRule::SumCarries } else { AlphaRule::PivotCount };

    // Strong amplitudes of random Clifford circuits against the dense
    // statevector, through the full reduce/prepare/eval pipeline.
    let mut rng = CounterRng::new(seed, 1);
    let mut pass = 0;
    for _ in 0..reps {
        let n = 1 + rng.below(5) as usize;
        let m = 1 + rng.below(30) as usize;
        let c = random_clifford(n, m, &mut rng);
        let inst = zx::reduce_to_pgs(&c).expect("clifford circuit reduces");
        let ctx = match sim::prepare_with_rule(&inst.a, inst.td.as_ref(), rule) {
            Ok(ctx) => ctx,
            Err(_) => continue,
        };
        let xs: Vec<BitVector> =
            (0..1u64 << n).map(|w| bits_of_word(w, n)).collect();
        let labels: Vec<BitVector> = xs.iter().map(|x| inst.assemble_label(x)).collect();
        let amps = sim::strong_eval(&ctx, &labels);
        let dense = oracle::statevector(&c);
        let ok = xs.iter().zip(&amps).all(|(x, a)| {
            let exact = a.mul(&inst.scalar).to_complex();
            (exact - dense.amplitude(x)).norm() < 1e-9
        });
        pass += usize::from(ok);
    }
    report.record("strong-vs-dense", pass, reps);

    // Factored evaluation against the brute-force amplitude sum.
    let mut rng = CounterRng::new(seed, 2);
    let mut pass = 0;
    for _ in 0..reps {
        let n = 1 + rng.below(7) as usize;
        let a = random_pgs(n, &mut rng);
        let ctx = sim::prepare(&a, None).expect("trivial decomposition is valid");
        let xs: Vec<BitVector> =
            (0..1u64 << n).map(|w| bits_of_word(w, n)).collect();
        let amps = sim::strong_eval(&ctx, &xs);
        let ok = xs
            .iter()
            .zip(&amps)
            .all(|(x, got)| *got == oracle::pgs_brute_amplitude(&a, x));
        pass += usize::from(ok);
    }
    report.record("pgs-brute", pass, reps);

    // LDL reconstruction and rank on random symmetric matrices.
    let mut rng = CounterRng::new(seed, 3);
    let mut pass = 0;
    for _ in 0..reps {
        let n = 1 + rng.below(48) as usize;
        let mut a = BitMatrix::zeros(n, n);
        for i in 0..n {
            if rng.bit() {
                a.set(i, i, true);
            }
            for j in i + 1..n {
                if rng.bit() {
                    a.set(i, j, true);
                    a.set(j, i, true);
                }
            }
        }
        let fact = ldl::ldl_dense(&a);
        let ok = fact.reconstruct() == a && fact.rank == a.rank();
        pass += usize::from(ok);
    }
    report.record("ldl-identities", pass, reps);

    // Tableau stabilizers annihilate the dense state, and the extracted
    // graph state rebuilds it up to global phase.
    let mut rng = CounterRng::new(seed, 4);
    let mut pass = 0;
    for _ in 0..reps {
        let n = 1 + rng.below(5) as usize;
        let c = random_clifford(n, 1 + rng.below(25) as usize, &mut rng);
        let t = oracle::tableau_run(&c);
        let dense = oracle::statevector(&c);
        pass += usize::from(
            t.validate() && stabilizers_fix(&t, &dense) && graph_rebuild_matches(&t, &dense),
        );
    }
    report.record("tableau", pass, reps);

    // Vertex and edge complementation as local-gate records on the dense
    // oracle.
    let mut rng = CounterRng::new(seed, 5);
    let mut pass = 0;
    for _ in 0..reps {
        let n = 2 + rng.below(5) as usize;
        let g = random_graph(n, &mut rng);
        let v = rng.below(n as u64) as usize;
        let (vg, vrec) = pgs::vertex_complement(&g, v);
        let mut left = oracle::DenseState::from_graph(&g);
        left.apply_record(&vrec);
        let vertex_ok = left.equal_up_to_phase(&oracle::DenseState::from_graph(&vg), 1e-9);
        // Edge complementation is defined along an existing edge.
        let edge_ok = if g.edges().is_empty() {
            true
        } else {
            let (a, b) = g.edges()[rng.below(g.edges().len() as u64) as usize];
            let (eg, erec) = pgs::edge_complement(&g, a, b);
            let mut left = oracle::DenseState::from_graph(&g);
            left.apply_record(&erec);
            left.equal_up_to_phase(&oracle::DenseState::from_graph(&eg), 1e-9)
        };
        pass += usize::from(vertex_ok && edge_ok);
    }
    report.record("complementation", pass, reps);

    // Clifford+T strong simulation against the dense oracle.
    let mut rng = CounterRng::new(seed, 6);
    let treps = if quick { 6 } else { 15 };
    let mut pass = 0;
    for _ in 0..treps {
        let n = 1 + rng.below(3) as usize;
        let mut c = random_clifford(n, 1 + rng.below(15) as usize, &mut rng);
        for _ in 0..=rng.below(4) {
            let at = rng.below(c.gates.len() as u64 + 1) as usize;
            let q = rng.below(n as u64) as usize;
            c.gates.insert(at, if rng.bit() { Gate::T(q) } else { Gate::Tdg(q) });
        }
        let xs: Vec<BitVector> =
            (0..1u64 << n).map(|w| bits_of_word(w, n)).collect();
        let amps = zx::clifford_t_strong(&c, &xs).expect("under the default cap");
        let dense = oracle::statevector(&c);
        let ok = xs
            .iter()
            .zip(&amps)
            .all(|(x, a)| (a.to_complex() - dense.amplitude(x)).norm() < 1e-9);
        pass += usize::from(ok);
    }
    report.record("clifford-t", pass, treps);

    // LC-equivalence: complementation orbits agree with witness search.
    let mut rng = CounterRng::new(seed, 7);
    let lreps = if quick { 6 } else { 15 };
    let mut pass = 0;
    for _ in 0..lreps {
        let n = 2 + rng.below(3) as usize;
        let g = random_graph(n, &mut rng);
        let mut h = g.clone();
        for _ in 0..3 {
            let v = rng.below(n as u64) as usize;
            h = pgs::vertex_complement(&h, v).0;
        }
        let eq = analysis::lc_equivalent(&g, &h).expect("size is under the orbit cap");
        let ok = eq.equivalent
            && eq.witness.as_ref().is_some_and(|w| analysis::lc_verify_witness(&g, &h, w));
        pass += usize::from(ok);
    }
    report.record("lc-equivalence", pass, lreps);

    // Weak samples stay inside the amplitude support and rerun identically.
    let mut rng = CounterRng::new(seed, 8);
    let sreps = if quick { 6 } else { 15 };
    let mut pass = 0;
    for _ in 0..sreps {
        let n = 1 + rng.below(5) as usize;
        let a = random_pgs(n, &mut rng);
        let ctx = sim::prepare(&a, None).expect("trivial decomposition is valid");
        let spec =
            SampleSpec { s: Vec::new(), y: BitVector::zeros(n), seed: rng.next_u64(), count: 32 };
        let first = sim::weak_sample(&ctx, &spec, SampleStrategy::Direct);
        let second = sim::weak_sample(&ctx, &spec, SampleStrategy::ExplicitBasis);
        let ok = match (&first, &second) {
            (WeakSamples::Empty, WeakSamples::Empty) => true,
            (WeakSamples::Samples(xs), WeakSamples::Samples(ys)) => {
                xs.iter().zip(ys).all(|(x, y)| x == y)
                    && sim::strong_eval(&ctx, xs).iter().all(|amp| !amp.is_zero())
            }
            _ => false,
        };
        pass += usize::from(ok);
    }
    report.record("weak-sampler", pass, sreps);

    !report.any_failed
}

/// Whether every stabilizer row of `t` fixes the state, phases included.
fn stabilizers_fix(t: &oracle::Tableau, st: &oracle::DenseState) -> bool {
    let n = t.n;
    for i in 0..n {
        let mut acted = st.clone();
        let mut quarter_turns = 0u32;
        for q in 0..n {
            match (t.zt.get(i, q), t.xt.get(i, q)) {
                (false, false) => {}
                (false, true) => acted.apply_x(q),
                (true, true) => {
                    acted.apply_z(q);
                    acted.apply_x(q);
                    quarter_turns += 1;
                }
                (true, false) => acted.apply_z(q),
            }
        }
        // acted carries the row's Pauli word without its scalar; fold the
        // i^{#Y} and sign factors into the reference side instead.
        let mut phase = num_complex::Complex64::new(1.0, 0.0);
        for _ in 0..quarter_turns % 4 {
            phase *= num_complex::Complex64::new(0.0, -1.0);
        }
        if t.r.get(i) {
            phase = -phase;
        }
        let ok = acted
            .amps()
            .iter()
            .zip(st.amps())
            .all(|(got, want)| (got - want * phase).norm() < 1e-9);
        if !ok {
            return false;
        }
    }
    true
}

fn graph_rebuild_matches(t: &oracle::Tableau, st: &oracle::DenseState) -> bool {
    let (g, a, b, c) = oracle::stabilizers_to_graph(t);
    let mut rebuilt = oracle::DenseState::from_graph(&g);
    for q in 0..t.n {
        if c.get(q) {
            rebuilt.apply_z(q);
        }
        if b.get(q) {
            rebuilt.apply_sdg(q);
        }
        if a.get(q) {
            rebuilt.apply_h(q);
        }
    }
    rebuilt.equal_up_to_phase(st, 1e-9)
}

fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn cmd_bench(quick: bool, seed: u64) {
    println!("# n m width k prepare_ms strong_ms sample_ms explicit_per_sample_ms tableau_ms");
    let grid: &[(usize, usize)] = if quick {
        &[(8, 64), (8, 128)]
    } else {
        &[(8, 128), (8, 256), (8, 512), (16, 256), (16, 512), (16, 1024)]
    };
    let k = 16usize;
    for &(n, m) in grid {
        let mut rng = CounterRng::new(seed, 9);
        let c = random_clifford(n, m, &mut rng);
        let inst = zx::reduce_to_pgs(&c).expect("clifford circuit reduces");
        let width = inst.td.as_ref().map_or(0, TreeDecomposition::width);
        let t0 = Instant::now();
        let ctx = sim::prepare(&inst.a, inst.td.as_ref()).expect("slice decomposition is valid");
        let prepare_ms = millis(t0.elapsed());
        let xs: Vec<BitVector> = (0..k)
            .map(|_| bits_of_word(rng.next_u64(), n))
            .collect();
        let labels: Vec<BitVector> = xs.iter().map(|x| inst.assemble_label(x)).collect();
        let t0 = Instant::now();
        let amps = sim::strong_eval(&ctx, &labels);
        assert_eq!(amps.len(), k, "one amplitude per query");
        let strong_ms = millis(t0.elapsed());
        let base = inst.assemble_label(&BitVector::zeros(n));
        let spec = SampleSpec { s: inst.s.clone(), y: base, seed: rng.next_u64(), count: k };
        let t0 = Instant::now();
        let got = sim::weak_sample(&ctx, &spec, SampleStrategy::Auto);
        assert!(matches!(got, WeakSamples::Samples(_)), "circuit support is nonempty");
        let sample_ms = millis(t0.elapsed());
        // Marginal explicit-basis cost: time k and 2k draws, difference per
        // extra sample.
        let spec_k = SampleSpec { count: k, ..spec.clone() };
        let spec_2k = SampleSpec { count: 2 * k, ..spec.clone() };
        let t0 = Instant::now();
        let _ = sim::weak_sample(&ctx, &spec_k, SampleStrategy::ExplicitBasis);
        let tk = millis(t0.elapsed());
        let t0 = Instant::now();
        let _ = sim::weak_sample(&ctx, &spec_2k, SampleStrategy::ExplicitBasis);
        let t2k = millis(t0.elapsed());
        let explicit_per_sample = (t2k - tk).max(0.0) / k as f64;
        let t0 = Instant::now();
        let tab = oracle::tableau_run(&c);
        assert_eq!(tab.n, n, "tableau covers every qubit");
        let tableau_ms = millis(t0.elapsed());
        println!(
            "{n} {m} {width} {k} {prepare_ms:.3} {strong_ms:.3} {sample_ms:.3} \
             {explicit_per_sample:.4} {tableau_ms:.3}"
        );
    }
}
