use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mutfan::fan::{check_fan, fan_by_separation, projection_csv, projection_svg, FanTruncation};
use mutfan::formats::{self, RaysDoc};
use mutfan::rational::format_rat;
use mutfan::surface::{
    annulus_rays, annulus_shear, flip_walk, presets, resolve, walk_shear, AnnulusCurve,
    AnnulusFamily,
};
use mutfan::tangle::{
    disorder_by_separation, null_check_in, one_sign_in, refutation_campaign,
};
use mutfan::{
    eta, find_separating_sequence, is_b_coherent_up_to_depth, ExchangeMatrix, SequenceTree,
    ShearVector,
};

#[derive(Parser)]
#[command(name = "mutfan", version, about = "Exact mutation maps, coherence searches, fans and shear coordinates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Args)]
struct Common {
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Exit with status 1 when the verdict is refuted.
    #[arg(long, global = true)]
    expect_holds: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mutate an exchange matrix along a sequence.
    Mutate {
        #[arg(long)]
        matrix: PathBuf,
        /// 1-based indices in application order, e.g. `2,1`.
        #[arg(long, default_value = "")]
        seq: String,
        #[command(flatten)]
        common: Common,
    },
    /// Apply the mutation maps to a vector, or to every line of a CSV file.
    Eta {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "")]
        seq: String,
        #[arg(long = "vec", allow_hyphen_values = true, required_unless_present = "batch")]
        vector: Option<String>,
        /// CSV file with one vector per line.
        #[arg(long, conflicts_with = "vector")]
        batch: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a sequence giving two vectors strictly opposite signs.
    Separate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check a weighted family for a coherent linear relation.
    Coherent {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Build and check a truncated fan, or plot one.
    #[command(args_conflicts_with_subcommands = true)]
    Fan {
        #[command(subcommand)]
        plot: Option<FanCmd>,
        #[command(flatten)]
        build: FanBuild,
        #[command(flatten)]
        common: Common,
    },
    /// Shear coordinates of a curve, optionally after a sequence of flips.
    Shear {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// 1-based arcs to flip, in order.
        #[arg(long, default_value = "")]
        flips: String,
        #[command(flatten)]
        common: Common,
    },
    /// Allowable curves of the annulus and their shear coordinates.
    Annulus {
        #[arg(long, required_unless_present = "rays")]
        family: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        n: i64,
        /// Emit the ray list of all curves with spiral parameter up to this bound.
        #[arg(long, conflicts_with = "family")]
        rays: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Refute a tangle being null, or run a seeded refutation campaign.
    Nulltangle {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, required_unless_present = "campaign")]
        tangle: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Number of random annulus tangles to generate instead of reading one.
        #[arg(long, conflicts_with = "tangle")]
        campaign: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spiral bound of the curves used by the campaign.
        #[arg(long, default_value_t = 4)]
        bound: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Project a rank-3 fan: SVG or CSV of projected rays.
    Plot {
        #[command(flatten)]
        args: PlotArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum FanCmd {
    Plot {
        #[command(flatten)]
        args: PlotArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct FanBuild {
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, required_unless_present = "annulus")]
    rays: Option<PathBuf>,
    /// Use the annulus rays up to this spiral bound and the annulus matrix.
    #[arg(long, conflicts_with_all = ["rays", "matrix"])]
    annulus: Option<usize>,
    #[arg(long, default_value_t = 8)]
    depth: usize,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    fan: PathBuf,
    /// SVG output path; implies `--format svg`.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// CSV output path for the projected ray coordinates.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Input errors, reported with exit status 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!(InputError(e)))
}

fn read(path: &Path) -> Result<String> {
    input(fs::read_to_string(path).with_context(|| format!("reading {}", path.display())))
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> mutfan::Result<T>) -> Result<T> {
    let s = read(path)?;
    input(f(&s).with_context(|| format!("in {}", path.display())))
}

fn annulus_matrix() -> ExchangeMatrix {
    presets::annulus()
        .signed_adjacency()
        .expect("reference annulus")
}

fn matrix_or_annulus(path: &Option<PathBuf>) -> Result<ExchangeMatrix> {
    match path {
        Some(p) => parse(p, formats::read_matrix),
        None => Ok(annulus_matrix()),
    }
}

fn vector_arg(name: &str, s: &str, rank: usize) -> Result<ShearVector> {
    let v = input(formats::parse_vector_list(s).with_context(|| format!("--{name}")))?;
    if v.dim() != rank {
        return input(Err(anyhow!(
            "--{name} has {} entries but the matrix has rank {rank}",
            v.dim()
        )));
    }
    Ok(v)
}

fn seq_arg(s: &str, rank: usize) -> Result<mutfan::MutationSequence> {
    let seq = input(formats::parse_sequence_list(s).context("--seq"))?;
    input(seq.validate(rank).context("--seq"))?;
    Ok(seq)
}

fn emit(common: &Common, body: &str) -> Result<()> {
    match &common.out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn only_formats(common: &Common, allowed: &[Format]) -> Result<()> {
    if !allowed.contains(&common.format) {
        return input(Err(anyhow!(
            "--format {:?} is not available here",
            common.format
        )));
    }
    Ok(())
}

fn csv_row(v: &ShearVector) -> String {
    v.as_slice().iter().map(format_rat).collect::<Vec<_>>().join(",")
}

/// Whether the command succeeded on its own terms; `false` maps to exit 1
/// under `--expect-holds`.
type Holds = bool;

fn run(cmd: Cmd) -> Result<(Holds, bool)> {
    match cmd {
        Cmd::Mutate { matrix, seq, common } => {
            only_formats(&common, &[Format::Json])?;
            let b = parse(&matrix, formats::read_matrix)?;
            let seq = seq_arg(&seq, b.rank())?;
            let mut m = b;
            for &k in seq.steps() {
                m = m.mutate(k)?;
            }
            emit(&common, &formats::to_string(&formats::matrix_value(&m)))?;
            Ok((true, common.expect_holds))
        }
        Cmd::Eta {
            matrix,
            seq,
            vector,
            batch,
            common,
        } => {
            only_formats(&common, &[Format::Json, Format::Csv])?;
            let b = parse(&matrix, formats::read_matrix)?;
            let seq = seq_arg(&seq, b.rank())?;
            let inputs = match (vector, batch) {
                (Some(v), None) => vec![vector_arg("vec", &v, b.rank())?],
                (None, Some(path)) => read_batch(&path, b.rank())?,
                _ => unreachable!("clap enforces exactly one input"),
            };
            let images = inputs
                .iter()
                .map(|a| eta(&b, &seq, a))
                .collect::<mutfan::Result<Vec<_>>>()?;
            let body = match common.format {
                Format::Csv => images.iter().map(|v| csv_row(v) + "\n").collect(),
                _ if images.len() == 1 => formats::to_string(&json!({
                    "seq": seq.one_based(),
                    "image": formats::vector_to_wire(&images[0]),
                })),
                _ => formats::to_string(&json!({
                    "seq": seq.one_based(),
                    "images": images.iter().map(formats::vector_to_wire).collect::<Vec<_>>(),
                })),
            };
            emit(&common, &body)?;
            Ok((true, common.expect_holds))
        }
        Cmd::Separate {
            matrix,
            a,
            b: bvec,
            depth,
            common,
        } => {
            only_formats(&common, &[Format::Json])?;
            let b = parse(&matrix, formats::read_matrix)?;
            let x = vector_arg("a", &a, b.rank())?;
            let y = vector_arg("b", &bvec, b.rank())?;
            let cert = find_separating_sequence(&b, &x, &y, depth)?;
            emit(
                &common,
                &formats::to_string(&formats::certificate_value(cert.as_ref(), depth)),
            )?;
            Ok((cert.is_none(), common.expect_holds))
        }
        Cmd::Coherent {
            matrix,
            family,
            depth,
            common,
        } => {
            only_formats(&common, &[Format::Json])?;
            let b = parse(&matrix, formats::read_matrix)?;
            let fam = parse(&family, formats::read_family)?;
            let v = input(is_b_coherent_up_to_depth(&b, &fam, depth).map_err(Into::into))?;
            emit(&common, &formats::to_string(&formats::verdict_value(&v)))?;
            Ok((v.holds_to_depth(), common.expect_holds))
        }
        Cmd::Fan {
            plot: Some(FanCmd::Plot { args, common }),
            ..
        }
        | Cmd::Plot { args, common } => plot(args, &common),
        Cmd::Fan {
            plot: None,
            build,
            common,
        } => {
            only_formats(&common, &[Format::Json])?;
            let (b, doc) = match build.annulus {
                Some(n) => (
                    annulus_matrix(),
                    RaysDoc {
                        rays: annulus_rays(n),
                        truncation: Some(n),
                    },
                ),
                None => {
                    let path = build.rays.as_ref().expect("clap requires --rays");
                    (matrix_or_annulus(&build.matrix)?, parse(path, formats::read_rays)?)
                }
            };
            let mut fan = input(fan_by_separation(&b, &doc.rays, build.depth).map_err(Into::into))?;
            fan.truncation = doc.truncation;
            let report = check_fan(&fan);
            emit(
                &common,
                &formats::to_string(&formats::fan_value(&fan, Some(&report))),
            )?;
            Ok((report.pass, common.expect_holds))
        }
        Cmd::Shear {
            tri,
            curve,
            flips,
            common,
        } => {
            only_formats(&common, &[Format::Json, Format::Csv])?;
            let t = parse(&tri, formats::read_triangulation)?;
            let text = read(&curve)?;
            let c = input(
                formats::read_curve(&text, &t)
                    .map_err(anyhow::Error::from)
                    .with_context(|| format!("in {}", curve.display())),
            )?;
            let flips = input(formats::parse_sequence_list(&flips).context("--flips"))?;
            input(flips.validate(t.arc_count()).context("--flips"))?;
            let mut walk = input(resolve(&t, &c).map_err(Into::into))?;
            let mut t = t;
            for &k in flips.steps() {
                let (nt, nw) = flip_walk(&t, &walk, k)?;
                t = nt;
                walk = nw;
            }
            let shear = walk_shear(&t, &walk)?;
            let body = match common.format {
                Format::Csv => csv_row(&shear) + "\n",
                _ => formats::to_string(&json!({
                    "flips": flips.one_based(),
                    "shear": shear.to_i64().expect("integral shear"),
                })),
            };
            emit(&common, &body)?;
            Ok((true, common.expect_holds))
        }
        Cmd::Annulus {
            family,
            n,
            rays,
            common,
        } => {
            if let Some(bound) = rays {
                only_formats(&common, &[Format::Json])?;
                let doc = RaysDoc {
                    rays: annulus_rays(bound),
                    truncation: Some(bound),
                };
                emit(&common, &formats::to_string(&doc))?;
                return Ok((true, common.expect_holds));
            }
            only_formats(&common, &[Format::Json, Format::Csv])?;
            let fam = input(
                AnnulusFamily::parse(family.as_deref().expect("clap requires --family"))
                    .map_err(Into::into),
            )?;
            let c = input(AnnulusCurve::new(fam, n).map_err(Into::into))?;
            let v = annulus_shear(&c);
            let body = match common.format {
                Format::Csv => csv_row(&v) + "\n",
                _ => formats::to_string(&json!({
                    "curve": c,
                    "id": c.id(),
                    "shear": v.to_i64().expect("integral shear"),
                })),
            };
            emit(&common, &body)?;
            Ok((true, common.expect_holds))
        }
        Cmd::Nulltangle {
            matrix,
            tangle,
            depth,
            campaign,
            seed,
            bound,
            common,
        } => {
            only_formats(&common, &[Format::Json])?;
            let b = matrix_or_annulus(&matrix)?;
            if let Some(count) = campaign {
                let curves = mutfan::surface::annulus_allowable_curves(bound);
                let entries =
                    input(refutation_campaign(&b, &curves, seed, count, depth).map_err(Into::into))?;
                let held: Vec<Value> = entries
                    .iter()
                    .filter(|e| e.verdict.holds_to_depth())
                    .map(|e| json!({"index": e.index, "tangle": formats::tangle_value(&e.tangle)}))
                    .collect();
                let longest = entries
                    .iter()
                    .filter_map(|e| e.verdict.witness.as_ref().map(|w| w.seq.len()))
                    .max();
                let out = json!({
                    "seed": seed,
                    "count": count,
                    "depth": depth,
                    "bound": bound,
                    "refuted": entries.iter().filter(|e| !e.verdict.holds_to_depth()).count(),
                    "replayed": entries.iter().filter(|e| e.replays).count(),
                    "longest_certificate": longest,
                    "not_refuted": held,
                });
                emit(&common, &formats::to_string(&out))?;
                return Ok((held.is_empty(), common.expect_holds));
            }
            let path = tangle.expect("clap requires --tangle");
            let t = parse(&path, formats::read_tangle)?;
            for it in t.items() {
                let d = it.curve.reference_shear().dim();
                if d != b.rank() {
                    return input(Err(anyhow!(
                        "tangle curve {} has dimension {d}, matrix rank is {}",
                        it.curve.label(),
                        b.rank()
                    )));
                }
            }
            let tree = SequenceTree::new(&b, depth)?;
            let v = input(null_check_in(&tree, &t).map_err(Into::into))?;
            let isolated: Vec<Value> = one_sign_in(&tree, &t)
                .iter()
                .map(|i| {
                    json!({
                        "curve": i.curve,
                        "seq": i.seq.one_based(),
                        "coord": i.coord + 1,
                        "sign": i.sign,
                    })
                })
                .collect();
            let mut out = formats::verdict_value(&v);
            out["one_sign"] = json!(isolated);
            if t.support().len() <= mutfan::tangle::MAX_DISORDER_SUPPORT {
                out["disorder"] = json!(disorder_by_separation(&tree, &t)?);
            }
            emit(&common, &formats::to_string(&out))?;
            // a refutation is the expected outcome: null tangles are trivial
            Ok((v.holds_to_depth(), common.expect_holds))
        }
    }
}

fn read_batch(path: &Path, rank: usize) -> Result<Vec<ShearVector>> {
    let text = read(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = input(rec.with_context(|| format!("{} record {}", path.display(), i + 1)))?;
        let line = rec.iter().collect::<Vec<_>>().join(",");
        out.push(vector_arg(&format!("batch line {}", i + 1), &line, rank)?);
    }
    Ok(out)
}

fn plot(args: PlotArgs, common: &Common) -> Result<(Holds, bool)> {
    let fan: FanTruncation = parse(&args.fan, formats::read_fan)?;
    if fan.rank != 3 {
        return input(Err(anyhow!("plots need a rank-3 fan, got rank {}", fan.rank)));
    }
    let svg = input(projection_svg(&fan).map_err(Into::into))?;
    let csv = input(projection_csv(&fan).map_err(Into::into))?;
    let mut wrote = false;
    if let Some(p) = &args.svg {
        fs::write(p, &svg).with_context(|| format!("writing {}", p.display()))?;
        wrote = true;
    }
    if let Some(p) = &args.csv {
        fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
        wrote = true;
    }
    if !wrote || common.out.is_some() {
        match common.format {
            Format::Svg => emit(common, &svg)?,
            Format::Csv => emit(common, &csv)?,
            Format::Json => bail!(InputError(anyhow!(
                "plot writes svg or csv; pass --svg, --csv or --format"
            ))),
        }
    }
    Ok((true, common.expect_holds))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok((holds, expect)) => ExitCode::from(if expect && !holds { 1 } else { 0 }),
        Err(e) => {
            eprintln!("error: {e:#}");
            // bad inputs and library errors are 2; failing to write output is 3
            let bad_input = e.is::<InputError>() || e.chain().any(|c| c.is::<mutfan::Error>());
            ExitCode::from(if bad_input { 2 } else { 3 })
        }
    }
}
