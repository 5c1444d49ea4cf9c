//! `bivmap`: scripted access to recommendations, binning, rendering and the
//! rule tables. Exit codes: 0 success, 1 validation error, 2 I/O error.

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use bivmap::casestudy;
use bivmap::data_model::{load_dataset, AttributeTable, BinningScheme, Dataset};
use bivmap::knowledge_base::{KnowledgeBase, TableId};
use bivmap::recommender::{recommend, DesignRequest, RankingWeights};
use bivmap::renderer::{design_ensemble, render_ensemble, RenderConfig, RenderRequest};

#[derive(Parser)]
#[command(
    name = "bivmap",
    version,
    about = "Design bivariate estimate + uncertainty maps"
)]
struct Cli {
    /// Optional TOML config with [palette], [canvas] and [service] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use this rule-table file instead of the bundled one.
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter and rank pairings for a design request.
    Recommend {
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep pairings whose separability class is marked uncertain.
        #[arg(long)]
        include_uncertain: bool,
        /// Ranking weights: intuitiveness,performance,preference.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Classify one attribute of a dataset.
    Bin {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        attribute: String,
        /// `threshold:837,2204`, `quantile:5` or `continuous`.
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one map (and optionally its legend) from a render request.
    Render {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        data: OptionalDataArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        legend: Option<PathBuf>,
    },
    /// Render every accepted pairing under each binning scheme of a request.
    Ensemble {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Dump the rule tables: canonical TOML, or one table as JSON.
    Tables {
        #[arg(long)]
        table: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the sediment case study on the bundled fixture (or `--data`).
    Casestudy {
        #[arg(long)]
        outdir: PathBuf,
        /// GeoJSON with `subcatchment`, `TSS_mean` and `TSS_sd` properties.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<IpAddr>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// GeoJSON feature collection.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    extra: DataExtras,
}

#[derive(Args)]
struct OptionalDataArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    extra: DataExtras,
}

#[derive(Args)]
struct DataExtras {
    /// CSV attribute table joined on `--join-key`.
    #[arg(long)]
    attributes: Option<PathBuf>,
    #[arg(long)]
    join_key: Option<String>,
    /// Derive a coefficient of variation: `NAME=MEAN/SD`.
    #[arg(long)]
    cv: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ServiceConfig {
    port: Option<u16>,
    bind: Option<IpAddr>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct FileConfig {
    #[serde(flatten)]
    render: RenderConfig,
    service: ServiceConfig,
}

enum CliError {
    Validation(String),
    Io(String),
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_scheme(text: &str) -> Result<BinningScheme> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let scheme = match kind.to_ascii_lowercase().as_str() {
        "continuous" => BinningScheme::Continuous,
        "quantile" => BinningScheme::Quantile {
            k: arg
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad quantile count `{arg}`")))?,
        },
        "threshold" => BinningScheme::Threshold {
            edges: arg
                .split(',')
                .map(|e| e.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid(format!("bad threshold edges `{arg}`")))?,
        },
        _ => return Err(invalid(format!("unknown scheme `{text}`"))),
    };
    scheme.validate().map_err(invalid)?;
    Ok(scheme)
}

fn parse_weights(text: &str) -> Result<RankingWeights> {
    let w: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| invalid(format!("--weights: expected three numbers, got `{text}`")))?;
    match w.as_slice() {
        [a, b, c] => {
            let weights = RankingWeights::new(*a, *b, *c);
            weights.validate().map_err(invalid)?;
            Ok(weights)
        }
        _ => Err(invalid(format!(
            "--weights: expected three numbers, got `{text}`"
        ))),
    }
}

fn load_data(path: &Path, extra: &DataExtras) -> Result<Dataset> {
    let geojson = read(path)?;
    let table = match &extra.attributes {
        Some(p) => Some(AttributeTable::from_csv(&read(p)?).map_err(invalid)?),
        None => None,
    };
    let mut dataset =
        load_dataset(&geojson, table.as_ref(), extra.join_key.as_deref()).map_err(invalid)?;
    if let Some(spec) = &extra.cv {
        let (name, rest) = spec
            .split_once('=')
            .ok_or_else(|| invalid(format!("--cv: expected NAME=MEAN/SD, got `{spec}`")))?;
        let (mean, sd) = rest
            .split_once('/')
            .ok_or_else(|| invalid(format!("--cv: expected NAME=MEAN/SD, got `{spec}`")))?;
        dataset = dataset
            .with_coefficient_of_variation(name, mean, sd)
            .map_err(invalid)?;
    }
    Ok(dataset)
}

struct Context {
    kb: KnowledgeBase,
    config: FileConfig,
}

fn context(cli: &Cli) -> Result<Context> {
    let kb = match &cli.rules {
        Some(path) => KnowledgeBase::from_toml_str(&read(path)?).map_err(invalid)?,
        None => KnowledgeBase::bundled().clone(),
    };
    let config = match &cli.config {
        Some(path) => {
            toml::from_str(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    Ok(Context { kb, config })
}

fn run(cli: Cli) -> Result<()> {
    let ctx = context(&cli)?;
    let kb = &ctx.kb;
    match cli.command {
        Command::Recommend {
            request,
            out,
            include_uncertain,
            weights,
        } => {
            let mut request = DesignRequest::from_json(&read(&request)?).map_err(invalid)?;
            if include_uncertain {
                request.constraints.include_uncertain_classifications = true;
            }
            if let Some(w) = weights {
                request.ranking_weights = parse_weights(&w)?;
            }
            let report = recommend(kb, &request).map_err(invalid)?;
            print!("{}", report.summary());
            match out {
                Some(path) => write(&path, &(report.to_json() + "\n"))?,
                None => println!("{}", report.to_json()),
            }
        }
        Command::Bin {
            data,
            attribute,
            scheme,
            out,
        } => {
            let dataset = load_data(&data.data, &data.extra)?;
            let scheme = parse_scheme(&scheme)?;
            let binned = dataset.classify(&attribute, &scheme).map_err(invalid)?;
            let json = serde_json::to_string_pretty(&binned).expect("classes serialize") + "\n";
            match out {
                Some(path) => write(&path, &json)?,
                None => print!("{json}"),
            }
        }
        Command::Render {
            spec,
            data,
            out,
            legend,
        } => {
            let mut request = RenderRequest::from_json(&read(&spec)?).map_err(invalid)?;
            if cli.config.is_some() {
                request.config = ctx.config.render.clone();
            }
            let dataset = match (&data.data, &request.dataset) {
                (Some(path), _) => load_data(path, &data.extra)?,
                (None, Some(bivmap::renderer::DatasetRef::Inline(inline))) => {
                    inline.load().map_err(invalid)?
                }
                (None, Some(bivmap::renderer::DatasetRef::Id(id))) => {
                    return Err(invalid(format!(
                        "dataset `{id}` is a service upload id; pass the file with --data"
                    )))
                }
                (None, None) => {
                    return Err(invalid("no dataset: pass --data or inline one in the spec"))
                }
            };
            let rendered = request.render_map(kb, &dataset).map_err(invalid)?;
            write(&out, rendered.document.as_str())?;
            if let Some(path) = legend {
                write(
                    &path,
                    bivmap::renderer::render_legend(&rendered.style).as_str(),
                )?;
            }
        }
        Command::Ensemble {
            data,
            request,
            outdir,
        } => {
            let dataset = load_data(&data.data, &data.extra)?;
            let request = DesignRequest::from_json(&read(&request)?).map_err(invalid)?;
            let members =
                design_ensemble(kb, &dataset, &request, &ctx.config.render).map_err(invalid)?;
            if members.is_empty() {
                for scheme in request.schemes() {
                    let report = recommend(kb, &request.with_binning(&scheme)).map_err(invalid)?;
                    eprint!("[{}] {}", scheme.label, report.summary());
                }
                return Err(invalid("no pairing is accepted under any binning scheme"));
            }
            let (maps, manifest) = render_ensemble(&dataset, &members).map_err(invalid)?;
            for m in &maps {
                write(&outdir.join(&m.file_name), m.document.as_str())?;
                println!("{}", m.file_name);
            }
            let manifest =
                serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
            write(&outdir.join("manifest.json"), &manifest)?;
        }
        Command::Tables { table, out } => {
            let text = match table {
                None => kb.to_canonical_toml(),
                Some(id) => {
                    let id: TableId = id.parse().map_err(invalid)?;
                    serde_json::to_string_pretty(&kb.table(id)).expect("table serializes") + "\n"
                }
            };
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Casestudy { outdir, data } => {
            let dataset = match data {
                Some(path) => casestudy::load_fixture(&read(&path)?).map_err(invalid)?,
                None => casestudy::fixture(),
            };
            let bundle = casestudy::run(kb, &dataset, &ctx.config.render).map_err(invalid)?;
            fs::create_dir_all(&outdir)
                .map_err(|e| CliError::Io(format!("{}: {e}", outdir.display())))?;
            write(
                &outdir.join("request.json"),
                &(casestudy::request().to_json() + "\n"),
            )?;
            write(
                &outdir.join("report.json"),
                &(bundle.report.to_json() + "\n"),
            )?;
            for (label, report) in &bundle.scheme_reports {
                write(
                    &outdir.join(format!("report-{label}.json")),
                    &(report.to_json() + "\n"),
                )?;
            }
            for m in &bundle.maps {
                write(&outdir.join(&m.file_name), m.document.as_str())?;
            }
            let manifest =
                serde_json::to_string_pretty(&bundle.manifest).expect("manifest serializes") + "\n";
            write(&outdir.join("manifest.json"), &manifest)?;
            let p = &bundle.report.profile;
            let names = |s: &std::collections::BTreeSet<_>| {
                s.iter()
                    .map(|r: &bivmap::knowledge_base::PerceptionRequirement| r.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            println!("thematic requirements: {{{}}}", names(&p.thematic));
            println!("uncertainty requirements: {{{}}}", names(&p.uncertainty));
            println!("pairing requirements: {{{}}}", names(&p.pairing));
            print!("{}", bundle.report.summary());
            println!("wrote {} maps to {}", bundle.maps.len(), outdir.display());
        }
        Command::Serve { port, bind } => {
            let port = port
                .or(ctx.config.service.port)
                .unwrap_or(bivmap_service::DEFAULT_PORT);
            let bind = bind
                .or(ctx.config.service.bind)
                .unwrap_or(IpAddr::from([127, 0, 0, 1]));
            let addr = SocketAddr::new(bind, port);
            let state =
                bivmap_service::AppState::new(ctx.kb, bivmap_service::DEFAULT_CAPACITY_BYTES);
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            eprintln!("listening on http://{addr}");
            runtime
                .block_on(bivmap_service::serve(addr, state))
                .map_err(|e| CliError::Io(format!("{addr}: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
