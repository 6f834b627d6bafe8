//! `twistorlab` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain failure (a machine-readable
//! witness is printed to stdout), 2 on input or parse errors.

mod plot;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use twistorlab::betti::betti_map;
use twistorlab::kms::{parabolic_weight, residue_eigenvalue};
use twistorlab::preferred_section::{
    assemble_with, standard_cover, verify_cocycle, weight_graded_dims, AssembleOptions, ChartDisk, SectionAtlas,
    SurfaceData, DEFAULT_SEED,
};
use twistorlab::rank1_dh::{kernel_of_restriction, section_from_kms, sigma_action, split_at};
use twistorlab::residual_groupoid::normalize;
use twistorlab::scalar::{parse_complex, serde_complex, serde_scalar};
use twistorlab::twistor_bundle::{
    check_mixed_twistor, splitting_type, FilteredBundle, LaurentMatrix, LaurentMatrixJson,
};
use twistorlab::{
    Chart, Error, GeneratorWord, GroupoidElement, KmsElement, LambdaPoint, NormalForm, Rational, ResidualPoint, Scalar,
};

#[derive(Parser)]
#[command(
    name = "twistorlab",
    version,
    about = "KMS flows, Hecke-gauge groupoids, splitting types and preferred sections"
)]
struct Cli {
    /// Output format; each command accepts a subset.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChartArg {
    Zero,
    Infinity,
}

impl From<ChartArg> for Chart {
    fn from(c: ChartArg) -> Self {
        match c {
            ChartArg::Zero => Chart::Zero,
            ChartArg::Infinity => Chart::Infinity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Weight p(λ) and eigenvalue e(λ) of a KMS element.
    KmsFlow {
        /// KMS element as "a,re,im".
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        /// λ as "re,im".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        exact: bool,
    },
    /// Normal form (eps, k, m) of a word such as "h,h_inv,p".
    GroupoidNormalize {
        #[arg(long)]
        word: String,
    },
    /// Applies a groupoid element to a residual point (λ, a, b).
    GroupoidApply {
        /// Word over h, h_inv, p (rightmost letter acts first).
        #[arg(long, conflicts_with = "nf", required_unless_present = "nf")]
        word: Option<String>,
        /// Normal form as "eps,k,m".
        #[arg(long, allow_hyphen_values = true)]
        nf: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        exact: bool,
    },
    /// Monodromy eigenvalues exp(2πi a/λ), exp(2πi b/λ).
    BettiMap {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Splitting type of the bundle glued by a Laurent matrix.
    SplittingType {
        /// JSON file {"n": .., "terms": [{"exp": .., "re": [[..]], "im": [[..]]}]}.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Purity of each graded piece of a block upper-triangular bundle.
    CheckMixedTwistor {
        #[arg(long)]
        matrix: PathBuf,
        /// Block sizes, e.g. "1,2,1".
        #[arg(long)]
        blocks: String,
        /// Declared weights per block, e.g. "0,1,2".
        #[arg(long, allow_hyphen_values = true)]
        weights: String,
        #[arg(long)]
        exact: bool,
    },
    /// The σ-invariant O(2) section of a KMS element and its fiber data at κ.
    Rank1Section {
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        /// κ as "re,im" in the chosen chart.
        #[arg(long, allow_hyphen_values = true)]
        kappa: String,
        #[arg(long, value_enum, default_value = "zero")]
        chart: ChartArg,
        #[arg(long)]
        exact: bool,
    },
    /// Classifies a cover and assembles the local choices and cocycle.
    AssembleSection {
        /// SurfaceData JSON.
        #[arg(long)]
        data: PathBuf,
        /// JSON list of disks; defaults to the refined standard cover.
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Reverses the ordering on a disk, as "index:puncture". Repeatable.
        #[arg(long)]
        flip: Vec<String>,
    },
    /// Samples overlaps of an atlas and checks the cocycle conditions.
    VerifyCocycle {
        /// Atlas JSON as produced by assemble-section.
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        atlas: Option<PathBuf>,
        /// SurfaceData JSON; assembled on the standard cover first.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Weight-graded dimensions for genus g and n punctures.
    GradedDims {
        #[arg(long)]
        genus: i64,
        #[arg(long)]
        punctures: i64,
    },
    /// Collision lines and resonance points in a window of the λ-plane.
    PlotLoci {
        #[arg(long)]
        data: PathBuf,
        /// "xmin,xmax,ymin,ymax".
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3,-3,3")]
        window: String,
        /// JSON list of disks whose boundaries are drawn.
        #[arg(long, conflicts_with = "standard_cover")]
        disks: Option<PathBuf>,
        /// Draws the boundaries of the refined standard cover.
        #[arg(long)]
        standard_cover: bool,
        /// Grid size per axis for --format csv.
        #[arg(long, default_value_t = 61)]
        grid: usize,
        #[arg(long)]
        exact: bool,
    },
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Domain { message: String, witness: Value },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DiskTooLarge(_) | Error::InconsistentOverlap(..) => {
                Failure::Domain { message: e.to_string(), witness: json!({ "error": e.to_string() }) }
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub enum Output {
    Json(Value),
    Text(String),
}

type Outcome = Result<Output, Failure>;

fn to_json<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("domain objects serialize")
}

fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_list<N: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<N>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Failure::Input(format!("bad {what} entry {s:?} in {text:?}"))))
        .collect()
}

fn require_format(format: Option<Format>, allowed: &[Format], default: Format) -> Result<Format, Failure> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Input("this command does not support the requested --format".into()))
    }
}

#[derive(Serialize)]
#[serde(bound = "T: Scalar")]
struct FlowReport<T: Scalar> {
    u: KmsElement<T>,
    #[serde(with = "serde_complex")]
    lambda: Complex<T>,
    #[serde(with = "serde_scalar")]
    p: T,
    #[serde(with = "serde_complex")]
    e: Complex<T>,
}

fn kms_flow<T: Scalar>(u: &str, lambda: &str, format: Format) -> Outcome {
    let u = KmsElement::<T>::parse(u)?;
    let lambda = parse_complex::<T>(lambda)?;
    let p = parabolic_weight(&u, &lambda);
    let e = residue_eigenvalue(&u, &lambda);
    if format == Format::Csv {
        let cell = |v: &T| match v.to_json() {
            Value::String(s) => s,
            other => other.to_string(),
        };
        return Ok(Output::Text(format!("p,e_re,e_im\n{},{},{}\n", cell(&p), cell(&e.re), cell(&e.im))));
    }
    Ok(Output::Json(to_json(&FlowReport { u, lambda, p, e })))
}

fn groupoid_apply<T: Scalar>(word: Option<&str>, nf: Option<&str>, lambda: &str, a: &str, b: &str) -> Outcome {
    let g = match (word, nf) {
        (Some(w), _) => GroupoidElement::from_word(&GeneratorWord::parse(w)?),
        (None, Some(n)) => {
            let v: Vec<i64> = parse_list(n, "normal form")?;
            let [eps, k, m] = v[..] else {
                return Err(Failure::Input(format!("expected \"eps,k,m\", got {n:?}")));
            };
            let eps = u8::try_from(eps).map_err(|_| Failure::Input(format!("eps must be 0 or 1, got {eps}")))?;
            GroupoidElement::canonical(NormalForm::new(eps, k, m)?)
        }
        (None, None) => return Err(Failure::Input("one of --word or --nf is required".into())),
    };
    let pt = ResidualPoint::new(parse_complex::<T>(lambda)?, parse_complex::<T>(a)?, parse_complex::<T>(b)?);
    if (pt.lambda.re.clone().abs() + pt.lambda.im.clone().abs()).is_negligible() {
        return Err(Error::ZeroLambda.into());
    }
    match g.apply(&pt) {
        Some(img) => Ok(Output::Json(to_json(&img))),
        None => {
            let c = g.domain.violated_by(&pt);
            Err(Failure::Domain {
                message: format!("{} is not defined at this point", g.nf),
                witness: json!({
                    "error": "outside-domain",
                    "element": to_json(&g),
                    "point": to_json(&pt),
                    "b_minus_a_over_lambda": c,
                }),
            })
        }
    }
}

fn splitting<T: Scalar>(path: &Path) -> Outcome {
    let json: LaurentMatrixJson = read_json(path)?;
    let t = LaurentMatrix::<T>::from_json(&json)?;
    Ok(Output::Json(json!({ "splitting": splitting_type(&t)?.degrees })))
}

fn mixed_twistor<T: Scalar>(path: &Path, blocks: &str, weights: &str) -> Outcome {
    let json: LaurentMatrixJson = read_json(path)?;
    let bundle = FilteredBundle::new(LaurentMatrix::<T>::from_json(&json)?, parse_list(blocks, "block size")?)?;
    let report = check_mixed_twistor(&bundle, &parse_list::<i32>(weights, "weight")?)?;
    if report.pass {
        Ok(Output::Json(to_json(&report)))
    } else {
        Err(Failure::Domain {
            message: "a graded piece is not pure of its declared weight".into(),
            witness: to_json(&report),
        })
    }
}

#[derive(Serialize)]
#[serde(bound = "T: Scalar")]
struct Coefficient<T: Scalar>(#[serde(with = "serde_complex")] Complex<T>);

fn rank1_section<T: Scalar>(u: &str, kappa: &str, chart: Chart) -> Outcome {
    let s = section_from_kms(&KmsElement::<T>::parse(u)?);
    let kappa = LambdaPoint { chart, coord: parse_complex::<T>(kappa)? };
    let coefficients = s.coefficients();
    let fixed = sigma_action(&coefficients) == coefficients;
    Ok(Output::Json(json!({
        "section": to_json(&s),
        "coefficients": to_json(&coefficients.clone().map(Coefficient)),
        "sigma_fixed": fixed,
        "split": to_json(&split_at(&s, &kappa)),
        "kernel": to_json(&kernel_of_restriction(&kappa)),
    })))
}

fn parse_flips(flips: &[String]) -> Result<AssembleOptions, Failure> {
    let mut set = BTreeSet::new();
    for f in flips {
        let (i, y) =
            f.split_once(':').ok_or_else(|| Failure::Input(format!("expected \"index:puncture\", got {f:?}")))?;
        let i = i.trim().parse().map_err(|_| Failure::Input(format!("bad disk index in {f:?}")))?;
        set.insert((i, y.trim().to_string()));
    }
    Ok(AssembleOptions { flips: set })
}

fn assemble_atlas(data: &SurfaceData<f64>, cover: Option<&Path>, flips: &[String]) -> Result<SectionAtlas, Failure> {
    let disks: Vec<ChartDisk> = match cover {
        Some(p) => read_json(p)?,
        None => standard_cover(data)?,
    };
    Ok(assemble_with(data, &disks, &parse_flips(flips)?)?)
}

fn run(cli: Cli) -> Outcome {
    let json_only = |f| require_format(f, &[Format::Json], Format::Json);
    match cli.command {
        Command::KmsFlow { u, lambda, exact } => {
            let format = require_format(cli.format, &[Format::Json, Format::Csv], Format::Json)?;
            if exact {
                kms_flow::<Rational>(&u, &lambda, format)
            } else {
                kms_flow::<f64>(&u, &lambda, format)
            }
        }
        Command::GroupoidNormalize { word } => {
            json_only(cli.format)?;
            Ok(Output::Json(to_json(&normalize(&GeneratorWord::parse(&word)?))))
        }
        Command::GroupoidApply { word, nf, lambda, a, b, exact } => {
            json_only(cli.format)?;
            if exact {
                groupoid_apply::<Rational>(word.as_deref(), nf.as_deref(), &lambda, &a, &b)
            } else {
                groupoid_apply::<f64>(word.as_deref(), nf.as_deref(), &lambda, &a, &b)
            }
        }
        Command::BettiMap { lambda, a, b } => {
            json_only(cli.format)?;
            let pt = ResidualPoint::new(parse_complex::<f64>(&lambda)?, parse_complex(&a)?, parse_complex(&b)?);
            Ok(Output::Json(to_json(&betti_map(&pt)?)))
        }
        Command::SplittingType { matrix, exact } => {
            json_only(cli.format)?;
            if exact {
                splitting::<Rational>(&matrix)
            } else {
                splitting::<f64>(&matrix)
            }
        }
        Command::CheckMixedTwistor { matrix, blocks, weights, exact } => {
            json_only(cli.format)?;
            if exact {
                mixed_twistor::<Rational>(&matrix, &blocks, &weights)
            } else {
                mixed_twistor::<f64>(&matrix, &blocks, &weights)
            }
        }
        Command::Rank1Section { u, kappa, chart, exact } => {
            json_only(cli.format)?;
            if exact {
                rank1_section::<Rational>(&u, &kappa, chart.into())
            } else {
                rank1_section::<f64>(&u, &kappa, chart.into())
            }
        }
        Command::AssembleSection { data, cover, flip } => {
            json_only(cli.format)?;
            let data: SurfaceData<f64> = read_json(&data)?;
            Ok(Output::Json(to_json(&assemble_atlas(&data, cover.as_deref(), &flip)?)))
        }
        Command::VerifyCocycle { atlas, data, samples, seed } => {
            json_only(cli.format)?;
            let atlas: SectionAtlas = match (atlas, data) {
                (Some(p), _) => read_json(&p)?,
                (None, Some(p)) => assemble_atlas(&read_json(&p)?, None, &[])?,
                (None, None) => return Err(Failure::Input("one of --atlas or --data is required".into())),
            };
            let report = verify_cocycle(&atlas, samples, seed);
            if report.ok {
                Ok(Output::Json(to_json(&report)))
            } else {
                Err(Failure::Domain { message: "cocycle check failed".into(), witness: to_json(&report) })
            }
        }
        Command::GradedDims { genus, punctures } => {
            json_only(cli.format)?;
            Ok(Output::Json(to_json(&weight_graded_dims(genus, punctures)?)))
        }
        Command::PlotLoci { data, window, disks, standard_cover: std_cover, grid, exact } => {
            let format = require_format(cli.format, &[Format::Svg, Format::Json, Format::Csv], Format::Svg)?;
            let text =
                std::fs::read_to_string(&data).map_err(|e| Failure::Input(format!("{}: {e}", data.display())))?;
            let req = plot::Request { window: &window, grid, format };
            let disks: Vec<ChartDisk> = match disks {
                Some(p) => read_json(&p)?,
                None => Vec::new(),
            };
            if exact {
                plot::run::<Rational>(&text, &req, disks, std_cover)
            } else {
                plot::run::<f64>(&text, &req, disks, std_cover)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Output::Json(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain { message, witness }) => {
            println!("{}", serde_json::to_string_pretty(&witness).expect("json values serialize"));
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
