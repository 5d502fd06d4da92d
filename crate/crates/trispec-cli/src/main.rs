use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use trispec_core::certifier::{
    default_exclusions, default_region, rho5_certificate, Bounded, CertOptions, CertReport,
    Exclusion, Rho5Expr, TypeTuple, Verdict, VertexMode,
};
use trispec_core::combinatorics::{build_star_ball, rho_star_in, MAX_STAR_RADIUS};
use trispec_core::forms::{
    big_delta, contact_data, cos_params, head_formulas, l_table, l_table_alternative, side_coshes,
};
use trispec_core::group::MAX_WORD_CAP;
use trispec_core::spectrum::{
    brute_force_head, compare_heads, cross_validate, grid, predicted_head, BruteOptions, Check,
    CheckStatus, Exactness, SpectrumHead, ValidateOptions,
};
use trispec_core::{Error, Order, Signature};

mod config;

const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "trispec",
    version,
    about = "Length spectra of hyperbolic triangle groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct SigArgs {
    r: u32,
    p: u32,
    /// an integer or `inf`
    q: String,
}

#[derive(Args, Debug, Clone, Default)]
struct OracleArgs {
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    max_word: Option<usize>,
    #[arg(long)]
    conj_depth: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Predicted spectrum head, optionally checked against the oracle
    Head {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        brute: bool,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Cross-validate predicted and oracle heads over a grid
    Validate {
        #[arg(long, default_value_t = 3)]
        rmin: u32,
        #[arg(long, default_value_t = 8)]
        rmax: u32,
        #[arg(long, default_value_t = 8)]
        qmax: u32,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Closed-form quantities
    Forms {
        #[command(subcommand)]
        what: FormsCmd,
    },
    /// Star-graph quantities
    Graph {
        #[command(subcommand)]
        what: GraphCmd,
    },
    /// Interval certificates
    Certify {
        #[command(subcommand)]
        what: CertifyCmd,
    },
}

#[derive(Subcommand, Debug)]
enum FormsCmd {
    /// X, Y, Z, Δ, side coshes, contact data and the L-table
    Table {
        #[command(flatten)]
        sig: SigArgs,
    },
}

#[derive(Subcommand, Debug)]
enum GraphCmd {
    /// ρ*(2..=n)
    RhoStar {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// ball radius (defaults to n)
        #[arg(long)]
        ball: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Geodesic,
    Generic,
}

#[derive(Subcommand, Debug)]
enum CertifyCmd {
    /// ρ*(5) > C*(l3) by type over the parameter box
    Rho5 {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Geodesic)]
        mode: Mode,
        /// random points per Positive verdict for a soundness check
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCap { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

/// Effective settings after merging the config file and flags.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct RunConfig {
    format: Format,
    cutoff: Option<f64>,
    max_word: usize,
    conj_depth: usize,
    ball: Option<usize>,
    eps: f64,
    depth: usize,
    jobs: Option<usize>,
    seed: u64,
}

impl RunConfig {
    fn load(common: &Common) -> Result<Self, Failure> {
        let file = match &common.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?;
                config::parse(&text).map_err(Failure::usage)?
            }
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k).map(String::as_str);
        let num = |k: &str| -> Result<Option<f64>, Failure> {
            get(k)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Failure::usage(format!("config {k}: bad number {v}")))
                })
                .transpose()
        };
        let int = |k: &str| -> Result<Option<usize>, Failure> {
            get(k)
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| Failure::usage(format!("config {k}: bad integer {v}")))
                })
                .transpose()
        };
        let format = match get("format") {
            None => Format::Text,
            Some("text") => Format::Text,
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(v) => return Err(Failure::usage(format!("config format: unknown {v}"))),
        };
        Ok(RunConfig {
            format: common.format.unwrap_or(format),
            cutoff: num("cutoff")?,
            max_word: int("max_word")?.unwrap_or(12),
            conj_depth: int("conj_depth")?.unwrap_or(10),
            ball: int("ball")?,
            eps: num("eps")?.unwrap_or(1e-3),
            depth: int("depth")?.unwrap_or(40),
            jobs: common.jobs.or(int("jobs")?),
            seed: int("seed")?.unwrap_or(0) as u64,
        })
    }

    fn apply_oracle(&mut self, o: &OracleArgs) -> Result<(), Failure> {
        if let Some(c) = o.cutoff {
            self.cutoff = Some(c);
        }
        if let Some(m) = o.max_word {
            self.max_word = m;
        }
        if let Some(d) = o.conj_depth {
            self.conj_depth = d;
        }
        if self.max_word > MAX_WORD_CAP {
            return Err(Error::ResourceCap {
                what: "max_word",
                requested: self.max_word,
                cap: MAX_WORD_CAP,
                estimate: 0,
            }
            .into());
        }
        Ok(())
    }
}

fn parse_sig(s: &SigArgs) -> Result<Signature, Failure> {
    let q: Order =
        s.q.parse()
            .map_err(|_| Failure::usage(format!("bad order q = {}", s.q)))?;
    Ok(Signature::new(s.r, s.p, q)?)
}

/// 12 significant digits.
fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct SigJson {
    r: u32,
    p: u32,
    /// a number, or "inf"
    q: serde_json::Value,
}

impl SigJson {
    fn of(s: &Signature) -> Self {
        SigJson {
            r: s.r,
            p: s.p,
            q: match s.q {
                Order::Finite(q) => serde_json::json!(q),
                Order::Infinite => serde_json::json!("inf"),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct EntryJson {
    label: String,
    length: f64,
    multiplicity: usize,
    exactness: String,
    source: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct CheckJson {
    name: String,
    status: String,
    details: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct Meta {
    version: String,
    config: RunConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct HeadReport {
    signature: SigJson,
    head: Vec<EntryJson>,
    checks: Vec<CheckJson>,
    meta: Meta,
}

fn exactness_str(e: Exactness) -> &'static str {
    match e {
        Exactness::Exact => "exact",
        Exactness::AtLeast => "at_least",
    }
}

fn entries_json(h: &SpectrumHead, source: &str) -> Vec<EntryJson> {
    h.entries
        .iter()
        .map(|e| EntryJson {
            label: e.label.clone(),
            length: sig12(e.length),
            multiplicity: e.multiplicity,
            exactness: exactness_str(e.exactness).into(),
            source: source.into(),
        })
        .collect()
}

fn checks_json(c: &[Check]) -> Vec<CheckJson> {
    c.iter()
        .map(|c| CheckJson {
            name: c.name.clone(),
            status: match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "fail",
                CheckStatus::Info => "info",
            }
            .into(),
            details: c.details.clone(),
        })
        .collect()
}

fn meta(cfg: &RunConfig) -> Meta {
    Meta {
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_rows(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn fmt_mult(m: usize, e: Exactness) -> String {
    match e {
        Exactness::Exact => format!("{m}"),
        Exactness::AtLeast => format!(">={m}"),
    }
}

fn cmd_head(sig: &Signature, brute: bool, cfg: &RunConfig) -> Result<(String, u8), Failure> {
    let pred = predicted_head(sig)?;
    let mut checks = Vec::new();
    let oracle = if brute {
        let cutoff = cfg.cutoff.unwrap_or(pred.cutoff + 1e-6);
        let b = brute_force_head(
            sig,
            &BruteOptions::new(cutoff, cfg.max_word, cfg.conj_depth),
        )?;
        compare_heads(&pred, &b, &mut checks);
        Some(b)
    } else {
        None
    };
    let out = match cfg.format {
        Format::Json => {
            let mut head = entries_json(&pred, "predicted");
            if let Some(b) = &oracle {
                head.extend(entries_json(b, "brute-force"));
            }
            json(&HeadReport {
                signature: SigJson::of(sig),
                head,
                checks: checks_json(&checks),
                meta: meta(cfg),
            })
        }
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = pred
                .entries
                .iter()
                .map(|e| {
                    vec![
                        "predicted".into(),
                        e.label.clone(),
                        format!("{:.12}", e.length),
                        e.multiplicity.to_string(),
                        exactness_str(e.exactness).into(),
                    ]
                })
                .collect();
            if let Some(b) = &oracle {
                rows.extend(b.entries.iter().map(|e| {
                    vec![
                        "brute-force".into(),
                        e.representatives.join(" "),
                        format!("{:.12}", e.length),
                        e.multiplicity.to_string(),
                        exactness_str(e.exactness).into(),
                    ]
                }));
            }
            csv_rows(
                &["source", "label", "length", "multiplicity", "exactness"],
                rows,
            )
        }
        Format::Text => {
            let mut s = format!("Lsp head of {sig}\n");
            for e in &pred.entries {
                let gap = if e.open_before {
                    "  (values may precede)"
                } else {
                    ""
                };
                let m = oracle.as_ref().and_then(|b| b.find(e.length));
                let col = match (&oracle, m) {
                    (None, _) => String::new(),
                    (Some(_), Some(b)) => format!("   oracle x{}", b.multiplicity),
                    (Some(b), None) if e.length > b.cutoff => "   oracle: beyond cutoff".into(),
                    (Some(_), None) => "   oracle: not found".into(),
                };
                s += &format!(
                    "  {:<10} {:.7}  x{:<4}{col}{gap}\n",
                    e.label,
                    e.length,
                    fmt_mult(e.multiplicity, e.exactness)
                );
            }
            if !pred.completeness_note.is_empty() {
                s += &format!("  ... {}\n", pred.completeness_note);
            }
            if let Some(b) = &oracle {
                s += &format!(
                    "oracle head (cutoff {:.7}): {}\n",
                    b.cutoff, b.completeness_note
                );
                for e in &b.entries {
                    s += &format!(
                        "  {:.7}  x{:<3} {}\n",
                        e.length,
                        e.multiplicity,
                        e.representatives.join(" ")
                    );
                }
                for c in &checks {
                    s += &format!("  [{:?}] {}: {}\n", c.status, c.name, c.details);
                }
            }
            s
        }
    };
    Ok((out, 0))
}

#[derive(Serialize)]
struct ValidateJson {
    signature: SigJson,
    head: Vec<EntryJson>,
    checks: Vec<CheckJson>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct ValidateReportJson {
    reports: Vec<ValidateJson>,
    mismatches: usize,
    meta: Meta,
}

fn cmd_validate(rmin: u32, rmax: u32, qmax: u32, cfg: &RunConfig) -> Result<(String, u8), Failure> {
    if rmin < 2 || rmin > rmax || rmax > qmax {
        return Err(Failure::usage(format!(
            "malformed range: need 2 <= rmin <= rmax <= qmax, got {rmin}, {rmax}, {qmax}"
        )));
    }
    let opts = ValidateOptions {
        cutoff: cfg.cutoff,
        max_word: cfg.max_word,
        conj_depth: cfg.conj_depth,
        ..ValidateOptions::default()
    };
    let mut reports = Vec::new();
    for s in grid(rmin, rmax, qmax) {
        reports.push(cross_validate(&s, &opts)?);
    }
    let mismatches: usize = reports.iter().map(|r| r.exact_mismatches()).sum();
    let out = match cfg.format {
        Format::Json => json(&ValidateReportJson {
            reports: reports
                .iter()
                .map(|r| {
                    let mut head = entries_json(&r.predicted, "predicted");
                    if let Some(b) = &r.brute {
                        head.extend(entries_json(b, "brute-force"));
                    }
                    ValidateJson {
                        signature: SigJson::of(&r.sig),
                        head,
                        checks: checks_json(&r.checks),
                        notes: r.notes.clone(),
                    }
                })
                .collect(),
            mismatches,
            meta: meta(cfg),
        }),
        Format::Csv => {
            let rows = reports
                .iter()
                .flat_map(|r| {
                    r.checks.iter().map(move |c| {
                        vec![
                            r.sig.to_string(),
                            c.name.clone(),
                            checks_json(std::slice::from_ref(c))[0].status.clone(),
                            c.details.clone(),
                        ]
                    })
                })
                .collect();
            csv_rows(&["signature", "check", "status", "details"], rows)
        }
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                s += &format!(
                    "{} {}\n",
                    r.sig,
                    if r.exact_mismatches() == 0 {
                        "ok"
                    } else {
                        "MISMATCH"
                    }
                );
                for c in r.checks.iter().filter(|c| c.status != CheckStatus::Pass) {
                    s += &format!("  [{:?}] {}: {}\n", c.status, c.name, c.details);
                }
                for n in &r.notes {
                    s += &format!("  note: {n}\n");
                }
            }
            s += &format!(
                "{} signatures, {mismatches} head mismatches\n",
                reports.len()
            );
            s
        }
    };
    Ok((out, if mismatches > 0 { EXIT_MISMATCH } else { 0 }))
}

fn cmd_forms(sig: &Signature, cfg: &RunConfig) -> Result<(String, u8), Failure> {
    let c = cos_params(sig);
    let sides = side_coshes(sig);
    let cd = contact_data(sig);
    let h = head_formulas(sig);
    let lt = l_table(sig);
    let alt = l_table_alternative(sig);
    let mut rows: Vec<(String, f64, Option<f64>)> = vec![
        ("X".into(), c.x, None),
        ("Y".into(), c.y, None),
        ("Z".into(), c.z, None),
        ("Delta".into(), big_delta(sig), None),
        ("cosh_a".into(), sides.cosh_a, None),
        ("cosh_b".into(), sides.cosh_b, None),
        ("cosh_c".into(), sides.cosh_c, None),
        ("sinh2_dr".into(), cd.sinh2_dr, None),
        ("sinh2_dp".into(), cd.sinh2_dp, None),
        ("sinh2_dq".into(), cd.sinh2_dq, None),
        ("cosh_pq_star".into(), cd.cosh_pq_star, None),
        ("cosh_rp_star".into(), cd.cosh_rp_star, None),
        ("cosh_qr_star".into(), cd.cosh_qr_star, None),
        ("cosh_c_star".into(), cd.cosh_c_star, None),
        ("l1".into(), h.l1, None),
        ("l2".into(), h.l2, None),
        ("l3".into(), h.l3, None),
        ("l2_prime".into(), h.l2_prime, None),
    ];
    for i in 0..14 {
        rows.push((format!("L{i}"), lt.get(i), alt[i]));
    }
    let out = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                name: String,
                value: serde_json::Value,
                delta_form: Option<f64>,
            }
            #[derive(Serialize)]
            struct FormsJson {
                signature: SigJson,
                forms: Vec<Row>,
                meta: Meta,
            }
            let num = |v: f64| {
                if v.is_finite() {
                    serde_json::json!(sig12(v))
                } else {
                    serde_json::json!("inf")
                }
            };
            json(&FormsJson {
                signature: SigJson::of(sig),
                forms: rows
                    .iter()
                    .map(|(n, v, a)| Row {
                        name: n.clone(),
                        value: num(*v),
                        delta_form: a.map(sig12),
                    })
                    .collect(),
                meta: meta(cfg),
            })
        }
        Format::Csv => csv_rows(
            &["name", "value", "delta_form"],
            rows.iter()
                .map(|(n, v, a)| vec![n.clone(), fmt7(*v), a.map(fmt7).unwrap_or_default()])
                .collect(),
        ),
        Format::Text => {
            let mut s = format!("closed forms for {sig}\n");
            for (n, v, a) in &rows {
                s += &format!("  {n:<13} {}", fmt7(*v));
                if let Some(a) = a {
                    s += &format!("   (delta form {})", fmt7(*a));
                }
                s.push('\n');
            }
            s
        }
    };
    Ok((out, 0))
}

fn fmt7(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.7}")
    } else {
        "inf".into()
    }
}

fn cmd_graph(
    sig: &Signature,
    n: usize,
    svg: Option<&PathBuf>,
    cfg: &RunConfig,
) -> Result<(String, u8), Failure> {
    let radius = cfg.ball.unwrap_or(n);
    if radius > MAX_STAR_RADIUS {
        return Err(Error::ResourceCap {
            what: "ball radius",
            requested: radius,
            cap: MAX_STAR_RADIUS,
            estimate: 0,
        }
        .into());
    }
    if n < 2 || n > radius {
        return Err(Failure::usage(format!(
            "need 2 <= n <= ball radius, got n = {n}, ball = {radius}"
        )));
    }
    let ball = build_star_ball(sig, radius)?;
    if let Some(path) = svg {
        fs::write(path, ball.to_svg())
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let rho: Vec<_> = (2..=n).filter_map(|k| rho_star_in(&ball, k)).collect();
    let out = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                cosh: f64,
                distance: f64,
                witness: String,
            }
            #[derive(Serialize)]
            struct GraphJson {
                signature: SigJson,
                ball_radius: usize,
                nodes: usize,
                rho_star: Vec<Row>,
                meta: Meta,
            }
            json(&GraphJson {
                signature: SigJson::of(sig),
                ball_radius: radius,
                nodes: ball.nodes.len(),
                rho_star: rho
                    .iter()
                    .map(|r| Row {
                        n: r.n,
                        cosh: sig12(r.cosh),
                        distance: sig12(r.distance),
                        witness: r.witness.to_string(),
                    })
                    .collect(),
                meta: meta(cfg),
            })
        }
        Format::Csv => csv_rows(
            &["n", "cosh", "distance", "witness"],
            rho.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt7(r.cosh),
                        fmt7(r.distance),
                        r.witness.to_string(),
                    ]
                })
                .collect(),
        ),
        Format::Text => {
            let mut s = format!(
                "rho* for {sig} (ball radius {radius}, {} nodes)\n",
                ball.nodes.len()
            );
            for r in &rho {
                s += &format!(
                    "  n={}  cosh = {:.7}  rho = {:.7}  witness {}\n",
                    r.n, r.cosh, r.distance, r.witness
                );
            }
            s
        }
    };
    Ok((out, 0))
}

#[derive(Serialize)]
struct SoundnessJson {
    seed: u64,
    samples_per_type: usize,
    checked: usize,
    below_bound: usize,
}

fn soundness(rep: &CertReport, mode: VertexMode, samples: usize, seed: u64) -> SoundnessJson {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut below = 0;
    for t in rep.types.iter().filter(|t| t.outcome.verdict.is_positive()) {
        let f = Rho5Expr::new(TypeTuple::parse(&t.studied).expect("type"), mode);
        for _ in 0..samples {
            let b = &rep.region;
            let mut p = [
                rng.gen_range(b.x.lo..=b.x.hi),
                rng.gen_range(b.y.lo..=b.y.hi),
                rng.gen_range(b.z.lo..=b.z.hi),
            ];
            p.sort_by(f64::total_cmp);
            let inside = rep.exclusions.iter().any(|e| match e {
                Exclusion::Point(q) => (0..3).all(|i| (p[i] - q[i]).abs() <= rep.eps),
                Exclusion::Plane { .. } => false,
            });
            if inside || !b.contains(p) {
                continue;
            }
            checked += 1;
            if f.at(p).is_some_and(|v| v < t.outcome.min_lower_bound) {
                below += 1;
            }
        }
    }
    SoundnessJson {
        seed,
        samples_per_type: samples,
        checked,
        below_bound: below,
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Positive => "Positive".into(),
        Verdict::FailsAt { point, value } => format!(
            "FailsAt X={:.7} Y={:.7} Z={:.7} (value {:.3e})",
            point[0], point[1], point[2], value
        ),
        Verdict::Inconclusive { depth } => format!("Inconclusive (depth {depth})"),
    }
}

fn cmd_certify(
    eps: Option<f64>,
    depth: Option<usize>,
    mode: Mode,
    samples: usize,
    seed: Option<u64>,
    cfg: &mut RunConfig,
) -> Result<(String, u8), Failure> {
    if let Some(e) = eps {
        cfg.eps = e;
    }
    if let Some(d) = depth {
        cfg.depth = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if !(cfg.eps > 0.0 && cfg.eps < 0.25) {
        return Err(Failure::usage(format!(
            "eps must lie in (0, 0.25), got {}",
            cfg.eps
        )));
    }
    let opts = CertOptions {
        eps: cfg.eps,
        max_depth: cfg.depth,
        ..CertOptions::default()
    };
    let vm = match mode {
        Mode::Geodesic => VertexMode::Geodesic,
        Mode::Generic => VertexMode::Generic,
    };
    let rep = rho5_certificate(&default_region(cfg.eps), vm, &default_exclusions(), &opts);
    let sound = (samples > 0).then(|| soundness(&rep, vm, samples, cfg.seed));
    let out = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct CertJson<'a> {
                report: &'a CertReport,
                all_positive: bool,
                soundness: Option<SoundnessJson>,
                meta: Meta,
            }
            json(&CertJson {
                report: &rep,
                all_positive: rep.all_positive(),
                soundness: sound,
                meta: meta(cfg),
            })
        }
        Format::Csv => csv_rows(
            &[
                "studied",
                "associated",
                "verdict",
                "leaves",
                "min_lower_bound",
            ],
            rep.types
                .iter()
                .map(|t| {
                    vec![
                        t.studied.clone(),
                        t.associated.clone().unwrap_or_default(),
                        verdict_text(&t.outcome.verdict),
                        t.outcome.leaves.to_string(),
                        format!("{:e}", t.outcome.min_lower_bound),
                    ]
                })
                .collect(),
        ),
        Format::Text => {
            let mut s = format!(
                "cosh rho*(5) - cosh C*(l3) by type ({:?} vertices), eps {}, depth {}\n",
                vm, cfg.eps, cfg.depth
            );
            for t in &rep.types {
                s += &format!(
                    "  {} [{}]: {}  ({} leaves)\n",
                    t.studied,
                    t.associated.as_deref().unwrap_or("-"),
                    verdict_text(&t.outcome.verdict),
                    t.outcome.leaves
                );
            }
            s += &format!(
                "{} of {} types Positive\n",
                rep.types
                    .iter()
                    .filter(|t| t.outcome.verdict.is_positive())
                    .count(),
                rep.types.len()
            );
            if let Some(so) = sound {
                s += &format!(
                    "soundness: {} of {} sampled points below their bound (seed {})\n",
                    so.below_bound, so.checked, so.seed
                );
            }
            s
        }
    };
    Ok((out, 0))
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    let mut cfg = RunConfig::load(&cli.common)?;
    if let Some(j) = cfg.jobs {
        // best effort: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global();
    }
    match &cli.cmd {
        Cmd::Head { sig, brute, oracle } => {
            cfg.apply_oracle(oracle)?;
            cmd_head(&parse_sig(sig)?, *brute, &cfg)
        }
        Cmd::Validate {
            rmin,
            rmax,
            qmax,
            oracle,
        } => {
            cfg.apply_oracle(oracle)?;
            cmd_validate(*rmin, *rmax, *qmax, &cfg)
        }
        Cmd::Forms {
            what: FormsCmd::Table { sig },
        } => cmd_forms(&parse_sig(sig)?, &cfg),
        Cmd::Graph {
            what: GraphCmd::RhoStar { sig, n, ball, svg },
        } => {
            if ball.is_some() {
                cfg.ball = *ball;
            }
            cmd_graph(&parse_sig(sig)?, *n, svg.as_ref(), &cfg)
        }
        Cmd::Certify {
            what:
                CertifyCmd::Rho5 {
                    eps,
                    depth,
                    mode,
                    samples,
                    seed,
                },
        } => cmd_certify(*eps, *depth, *mode, *samples, *seed, &mut cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.common.out.clone();
    match run(cli) {
        Ok((text, code)) => {
            let written = match &out_path {
                Some(p) => fs::write(p, text.as_bytes()),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("trispec: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("trispec: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
