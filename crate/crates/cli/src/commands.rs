use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use infoextract::datasets::{
    complementary_noise, format_csv, generate, load_csv, read_text, write_text, CsvOptions,
    GeneratorSpec,
};
use infoextract::decoupling::{
    cross_dependence, decouple, dependence_report, symmetric_extract, ConditioningMode,
    DecoupleConfig, DependenceReport,
};
use infoextract::extraction::{
    fit_extraction, ExtractionConfig, LayerStack, MethodChoice, NormalizationRecord,
};
use infoextract::format::{g17, to_json_string};
use infoextract::granger::{
    analyze_pair, multivariate_granger, GrangerConfig, PairAnalysis, PcaTarget, ResidueMode,
    ResidueOptions,
};
use infoextract::hcr::RegressionOptions;
use infoextract::infoflow::{
    conditional_mi_reference, direct_mutual_information, mutual_information_binned,
    mutual_information_hcr, DirectMiConfig,
};
use infoextract::normalization::{normalize_table, QuantileMap};
use infoextract::{Error, Result, SampleTable};

use crate::args::*;
use crate::plot::{render_svg, scatter_pair_svg, Panel, Series};

/// Files produced by a run; nothing is written until every path has been
/// checked against the overwrite policy.
pub struct Outputs {
    force: bool,
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn new(force: bool) -> Self {
        Self {
            force,
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, content: String) {
        self.files.push((path.into(), content));
    }

    pub fn commit(self) -> Result<()> {
        if !self.force {
            if let Some((p, _)) = self.files.iter().find(|(p, _)| p.exists()) {
                return Err(Error::RefusedOverwrite(p.clone()));
            }
        }
        for (p, text) in &self.files {
            write_text(p, text)?;
        }
        Ok(())
    }
}

/// `<path>.<suffix>`, keeping the full original file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

pub struct Context {
    pub units: Units,
    pub force: bool,
    pub config_json: String,
}

impl Context {
    fn outputs(&self, primary: &Path) -> Outputs {
        let mut out = Outputs::new(self.force);
        out.add(sibling(primary, "config.json"), self.config_json.clone());
        out
    }

    fn info(&self, nats: f64) -> f64 {
        self.units.convert(nats)
    }
}

fn load(input: &InputArgs) -> Result<SampleTable> {
    if !input.delimiter.is_ascii() {
        return Err(Error::InvalidInput(format!(
            "delimiter '{}' must be a single ASCII character",
            input.delimiter
        )));
    }
    load_csv(
        &input.input,
        &CsvOptions {
            delimiter: input.delimiter as u8,
            drop_missing: input.drop_missing,
        },
    )
}

fn prepare(table: SampleTable, normalized: bool) -> Result<(SampleTable, Option<NormalizationRecord>)> {
    if normalized {
        table.ensure_unit_interval()?;
        Ok((table, None))
    } else {
        let (norm, maps) = normalize_table(&table)?;
        let record = NormalizationRecord {
            columns: table.names().to_vec(),
            maps,
        };
        Ok((norm, Some(record)))
    }
}

fn extraction_config(m: &ModelArgs) -> ExtractionConfig {
    ExtractionConfig {
        method: match m.method {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::JointSlice => MethodChoice::JointSlice,
            MethodArg::MomentRegression => MethodChoice::MomentRegression,
        },
        degree: m.degree,
        grid_size: m.grid,
        floor: m.floor,
        regression: RegressionOptions {
            ridge: m.ridge,
            pairwise_products: m.pairwise_products,
        },
        ..ExtractionConfig::default()
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    to_json_string(value)
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

pub fn synth(ctx: &Context, a: &SynthArgs) -> Result<()> {
    let spec = match (&a.spec, a.kind) {
        (Some(path), _) => GeneratorSpec::from_json(&read_text(path)?)?,
        (None, Some(kind)) => {
            let t = a.t.unwrap_or(a.n);
            let noise = a.noise.unwrap_or_else(|| complementary_noise(a.coupling));
            match kind {
                KindArg::GaussianCopula => GeneratorSpec::GaussianCopula {
                    rho: a.rho,
                    n: a.n,
                    dims: a.dims,
                    seed: a.seed,
                },
                KindArg::MarkovChain => GeneratorSpec::MarkovChain {
                    n: a.n,
                    alpha: a.alpha,
                    beta: a.beta,
                    noise_z: a.noise_z,
                    noise_y: a.noise_y,
                    seed: a.seed,
                },
                KindArg::LaggedPair => GeneratorSpec::LaggedPair {
                    t,
                    delay: a.delay,
                    coupling: a.coupling,
                    noise,
                    seed: a.seed,
                },
                KindArg::LaggedChain => GeneratorSpec::LaggedChain {
                    t,
                    delay_xy: a.delay_xy,
                    delay_yz: a.delay_yz,
                    coupling: a.coupling,
                    noise,
                    seed: a.seed,
                },
                KindArg::Independent => GeneratorSpec::Independent {
                    n: a.n,
                    dims: a.dims,
                    seed: a.seed,
                },
            }
        }
        (None, None) => return Err(Error::InvalidInput("either --kind or --spec is required".into())),
    };
    let mut table = generate(&spec)?;
    if a.normalized {
        table = normalize_table(&table)?.0;
    }
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, format_csv(&table)?);
    out.add(sibling(&a.output, "spec.json"), spec.to_json()?);
    out.commit()
}

pub fn normalize(ctx: &Context, a: &NormalizeArgs) -> Result<()> {
    let mut table = load(&a.input)?;
    if !a.columns.is_empty() {
        table = table.select(&a.columns)?;
    }
    let (norm, maps) = normalize_table(&table)?;
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, format_csv(&norm)?);
    if let Some(p) = &a.maps {
        let record = NormalizationRecord {
            columns: table.names().to_vec(),
            maps,
        };
        out.add(p, json(&record)?);
    }
    out.commit()
}

#[derive(Serialize)]
struct IterationMi {
    iteration: usize,
    /// Information between the target and each given column.
    mi: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct ExtractSummary {
    target: String,
    given: Vec<String>,
    units: &'static str,
    iterations: Vec<IterationMi>,
}

pub fn extract(ctx: &Context, a: &ExtractArgs) -> Result<String> {
    if a.iterations == 0 {
        return Err(Error::InvalidInput("--iterations must be at least 1".into()));
    }
    let (table, record) = prepare(load(&a.input)?, a.normalized)?;
    let config = extraction_config(&a.model);
    let mi_row = |t: &SampleTable, iteration: usize| -> Result<IterationMi> {
        let target = t.column(&a.target)?;
        let mi = a
            .given
            .iter()
            .map(|g| {
                let v = mutual_information_binned(target, t.column(g)?, a.bins)?.value;
                Ok((g.clone(), ctx.info(v)))
            })
            .collect::<Result<_>>()?;
        Ok(IterationMi { iteration, mi })
    };
    let mut current = table.clone();
    let mut layers = Vec::with_capacity(a.iterations);
    let mut history = vec![mi_row(&current, 0)?];
    for it in 1..=a.iterations {
        let layer = fit_extraction(&current, &a.target, &a.given, &config)
            .map_err(|e| e.context(format!("iteration {it}")))?;
        current = layer.apply(&current)?;
        layers.push(layer);
        history.push(mi_row(&current, it)?);
    }
    let stack = LayerStack {
        normalization: record,
        layers,
        invertible: true,
    };
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, format_csv(&current)?);
    out.add(&a.layers, stack.to_json()?);
    if let Some(p) = &a.plot {
        let g = a.given.first().ok_or_else(|| {
            Error::InvalidInput("--plot needs at least one --given column".into())
        })?;
        let svg = scatter_pair_svg(
            &a.target,
            g,
            pairs(table.column(&a.target)?, table.column(g)?),
            pairs(current.column(&a.target)?, current.column(g)?),
        )?;
        out.add(p, svg);
    }
    let summary = json(&ExtractSummary {
        target: a.target.clone(),
        given: a.given.clone(),
        units: ctx.units.name(),
        iterations: history,
    })?;
    out.add(sibling(&a.output, "summary.json"), summary.clone());
    out.commit()?;
    Ok(summary)
}

#[derive(Serialize)]
struct ReportOut {
    units: &'static str,
    bins: usize,
    invertible: bool,
    columns: Vec<String>,
    spearman: Vec<Vec<f64>>,
    mi: Vec<Vec<f64>>,
    /// Decoupled column (row) against original column (entry).
    cross_mi: Option<Vec<Vec<f64>>>,
    history: Vec<HistoryOut>,
}

#[derive(Serialize)]
struct HistoryOut {
    sweep: usize,
    max_abs_spearman: f64,
    max_mi: f64,
}

fn report_out(ctx: &Context, r: &DependenceReport) -> ReportOut {
    let conv = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        m.iter()
            .map(|row| row.iter().map(|v| ctx.info(*v)).collect())
            .collect()
    };
    ReportOut {
        units: ctx.units.name(),
        bins: r.bins,
        invertible: r.invertible,
        columns: r.columns.clone(),
        spearman: r.spearman.clone(),
        mi: conv(&r.mi),
        cross_mi: r.cross_mi.as_ref().map(|c| conv(&c.mi)),
        history: r
            .history
            .iter()
            .map(|h| HistoryOut {
                sweep: h.sweep,
                max_abs_spearman: h.max_abs_spearman,
                max_mi: ctx.info(h.max_mi),
            })
            .collect(),
    }
}

pub fn decouple_cmd(ctx: &Context, a: &DecoupleArgs) -> Result<()> {
    let (table, record) = prepare(load(&a.input)?, a.normalized)?;
    let extraction = extraction_config(&a.model);
    let (result, mut stack, report) = if a.symmetric {
        let s = symmetric_extract(&table, &extraction)?;
        let mut report = dependence_report(&s.result, a.bins)?;
        report.invertible = false;
        report.cross_mi = Some(cross_dependence(&s.result, &table, a.bins)?);
        let stack = LayerStack {
            normalization: None,
            layers: s.layers,
            invertible: false,
        };
        (s.result, stack, report)
    } else {
        let config = DecoupleConfig {
            extraction,
            sweeps: a.sweeps,
            order: (!a.order.is_empty()).then(|| a.order.clone()),
            conditioning: if a.experimental_sweep_start {
                ConditioningMode::SweepStart
            } else {
                ConditioningMode::Current
            },
            bins: a.bins,
        };
        let d = decouple(&table, &config)?;
        let report = d.report(&table, a.bins)?;
        (d.result.clone(), d.layer_stack(), report)
    };
    stack.normalization = record;
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, format_csv(&result)?);
    out.add(&a.layers, stack.to_json()?);
    if let Some(p) = &a.report {
        out.add(p, json(&report_out(ctx, &report))?);
    }
    if let Some(p) = &a.plot {
        let hist = &report.history;
        let svg = if hist.is_empty() {
            return Err(Error::InvalidInput(
                "--plot needs a sweep history (not available with --symmetric)".into(),
            ));
        } else {
            let sp = hist.iter().map(|h| (h.sweep as f64, h.max_abs_spearman)).collect();
            let mi = hist.iter().map(|h| (h.sweep as f64, ctx.info(h.max_mi))).collect();
            render_svg(&[
                Panel::line("max |Spearman|", vec![Series::new("max |Spearman|", sp)])
                    .labels("sweep", "|Spearman|"),
                Panel::line("max MI", vec![Series::new("max MI", mi)])
                    .labels("sweep", ctx.units.name()),
            ])?
        };
        out.add(p, svg);
    }
    out.commit()
}

pub fn reconstruct(ctx: &Context, a: &ReconstructArgs) -> Result<()> {
    let table = load(&a.input)?;
    let stack = LayerStack::read(&a.layers)?;
    let mut back = stack.invert(&table)?;
    if a.denormalize {
        let record = stack.normalization.as_ref().ok_or_else(|| {
            Error::InvalidInput("layer stack has no stored normalization to undo".into())
        })?;
        for (name, map) in record.columns.iter().zip(&record.maps) {
            let raw = denormalize_column(map, back.column(name)?)?;
            back.set_column(name, raw)?;
        }
    }
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, format_csv(&back)?);
    out.commit()
}

fn denormalize_column(map: &QuantileMap, values: &[f64]) -> Result<Vec<f64>> {
    map.inverse_all(values)
}

#[derive(Serialize)]
struct MiOut {
    x: String,
    y: String,
    method: &'static str,
    units: &'static str,
    n: usize,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadratic: Option<f64>,
}

pub fn mi(ctx: &Context, a: &MiArgs) -> Result<String> {
    let (table, _) = prepare(load(&a.input)?, a.normalized)?;
    let (u, v) = (table.column(&a.x)?, table.column(&a.y)?);
    let record = match a.method {
        MiMethodArg::Binned => {
            let e = mutual_information_binned(u, v, a.bins)?;
            MiOut {
                x: a.x.clone(),
                y: a.y.clone(),
                method: "binned",
                units: ctx.units.name(),
                n: e.n,
                value: ctx.info(e.value),
                bins: Some(a.bins),
                degree: None,
                quadratic: None,
            }
        }
        MiMethodArg::Hcr => {
            let e = mutual_information_hcr(u, v, a.degree)?;
            MiOut {
                x: a.x.clone(),
                y: a.y.clone(),
                method: "hcr-plugin",
                units: ctx.units.name(),
                n: e.plugin.n,
                value: ctx.info(e.plugin.value),
                bins: None,
                degree: Some(a.degree),
                quadratic: Some(ctx.info(e.quadratic.value)),
            }
        }
    };
    let text = json(&record)?;
    if let Some(p) = &a.output {
        let mut out = ctx.outputs(p);
        out.add(p, text.clone());
        out.commit()?;
    }
    Ok(text)
}

#[derive(Serialize)]
struct DmiRecord {
    pair: [String; 2],
    z: Vec<String>,
    #[serde(rename = "I")]
    i: f64,
    #[serde(rename = "I_d")]
    i_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    units: &'static str,
}

pub fn dmi(ctx: &Context, a: &DmiArgs) -> Result<String> {
    let (table, _) = prepare(load(&a.input)?, a.normalized)?;
    let config = DirectMiConfig {
        extraction: extraction_config(&a.model),
        bins: a.bins,
    };
    let record = |x: &str, y: &str, z: &[String]| -> Result<DmiRecord> {
        let d = direct_mutual_information(&table, x, y, z, &config)
            .map_err(|e| e.context(format!("pair ({x}, {y})")))?;
        let reference = if a.reference {
            Some(ctx.info(conditional_mi_reference(&table, x, y, z, a.reference_bins)?.value))
        } else {
            None
        };
        Ok(DmiRecord {
            pair: [x.to_string(), y.to_string()],
            z: z.to_vec(),
            i: ctx.info(d.mutual_information.value),
            i_d: ctx.info(d.direct.value),
            reference,
            units: ctx.units.name(),
        })
    };
    let mut out = Outputs::new(ctx.force);
    let text = match (&a.x, &a.y) {
        (Some(x), Some(y)) => {
            if a.matrix.is_some() {
                return Err(Error::InvalidInput("--matrix applies only to a full scan".into()));
            }
            json(&record(x, y, &a.z)?)?
        }
        _ => {
            let names = table.names().to_vec();
            let n = names.len();
            let mut matrix = vec![vec![0.0; n]; n];
            let mut records = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let z: Vec<String> = if a.z.is_empty() {
                        names
                            .iter()
                            .filter(|c| **c != names[i] && **c != names[j])
                            .cloned()
                            .collect()
                    } else {
                        a.z.iter()
                            .filter(|c| **c != names[i] && **c != names[j])
                            .cloned()
                            .collect()
                    };
                    let r = record(&names[i], &names[j], &z)?;
                    matrix[i][j] = r.i_d;
                    matrix[j][i] = r.i_d;
                    records.push(r);
                }
            }
            if let Some(p) = &a.matrix {
                let mut csv = format!("column,{}\n", names.join(","));
                for (name, row) in names.iter().zip(&matrix) {
                    let cells: Vec<String> = row.iter().map(|v| g17(*v)).collect();
                    let _ = writeln!(csv, "{name},{}", cells.join(","));
                }
                out.add(p, csv);
            }
            json(&records)?
        }
    };
    if let Some(p) = &a.output {
        out.add(sibling(p, "config.json"), ctx.config_json.clone());
        out.add(p, text.clone());
    }
    out.commit()?;
    Ok(text)
}

fn profile_csv(ctx: &Context, p: &PairAnalysis) -> String {
    let mut s = String::from("delay,correlation,mi\n");
    for ((d, c), m) in p.profile.delays.iter().zip(&p.profile.correlation).zip(&p.profile.mi) {
        let _ = writeln!(s, "{d},{},{}", g17(*c), g17(ctx.info(*m)));
    }
    s
}

fn coefficients_csv(p: &PairAnalysis) -> String {
    let f = &p.field;
    let mut s = String::from("delay,j,k,a\n");
    for (di, d) in f.delays.iter().enumerate() {
        for j in 0..=f.degree {
            for k in 0..=f.degree {
                let _ = writeln!(s, "{d},{j},{k},{}", g17(f.coeff(di, j, k)));
            }
        }
    }
    s
}

fn spectrum_csv(p: &PairAnalysis) -> String {
    let mut s = String::from("frequency,magnitude\n");
    for pt in &p.spectrum {
        let _ = writeln!(s, "{},{}", g17(pt.frequency), g17(pt.magnitude));
    }
    s
}

#[derive(Serialize)]
struct DecompositionOut<'a> {
    source: &'a str,
    target: &'a str,
    argmax_delay: usize,
    peak_abs_correlation: f64,
    delays: &'a [usize],
    rank: usize,
    index: &'a [(usize, usize)],
    directions: &'a [Vec<f64>],
    scores: &'a [Vec<f64>],
    eigenvalues: &'a [f64],
    variance_fraction: f64,
    mean: &'a Option<Vec<f64>>,
}

fn pair_svg(ctx: &Context, p: &PairAnalysis) -> Result<String> {
    let delays: Vec<f64> = p.profile.delays.iter().map(|d| *d as f64).collect();
    let corr = Series::new("correlation", pairs(&delays, &p.profile.correlation));
    let mi: Vec<f64> = p.profile.mi.iter().map(|m| ctx.info(*m)).collect();
    let mut left = Panel::line(
        format!("{} -> {}", p.source, p.target),
        vec![corr, Series::new(format!("MI ({})", ctx.units.name()), pairs(&delays, &mi))],
    )
    .labels("delay", "dependence");
    left.marker = Some((
        p.profile.argmax_delay as f64,
        format!("argmax delay = {}", p.profile.argmax_delay),
    ));
    let scores = p
        .decomposition
        .scores
        .iter()
        .enumerate()
        .map(|(i, s)| Series::new(format!("a{}", i + 1), pairs(&delays, s)))
        .collect();
    let right = Panel::line("principal scores", scores).labels("delay", "score");
    render_svg(&[left, right])
}

fn add_pair_files(ctx: &Context, out: &mut Outputs, prefix: &Path, p: &PairAnalysis) -> Result<()> {
    out.add(sibling(prefix, "profile.csv"), profile_csv(ctx, p));
    out.add(sibling(prefix, "coefficients.csv"), coefficients_csv(p));
    out.add(sibling(prefix, "spectrum.csv"), spectrum_csv(p));
    let d = &p.decomposition;
    out.add(
        sibling(prefix, "decomposition.json"),
        json(&DecompositionOut {
            source: &p.source,
            target: &p.target,
            argmax_delay: p.profile.argmax_delay,
            peak_abs_correlation: p.peak_abs_correlation,
            delays: &p.profile.delays,
            rank: d.rank,
            index: &d.index,
            directions: &d.directions,
            scores: &d.scores,
            eigenvalues: &d.eigenvalues,
            variance_fraction: d.variance_fraction,
            mean: &d.mean,
        })?,
    );
    Ok(())
}

#[derive(Serialize)]
struct RankedPair<'a> {
    source: &'a str,
    target: &'a str,
    peak_abs_correlation: f64,
    argmax_delay: usize,
}

pub fn granger(ctx: &Context, a: &GrangerArgs) -> Result<String> {
    let table = load(&a.input)?;
    let config = GrangerConfig {
        residue: ResidueOptions {
            lags: a.lags,
            mode: match a.mode {
                ResidueModeArg::Distribution => ResidueMode::Distribution,
                ResidueModeArg::Linear => ResidueMode::Linear,
            },
            iterations: a.iterations,
            extraction: ExtractionConfig {
                degree: a.degree,
                ..ExtractionConfig::default()
            },
        },
        max_delay: a.max_delay,
        degree: a.degree,
        bins: a.bins,
        pca: match a.pca_rank {
            Some(r) => PcaTarget::Rank(r),
            None => PcaTarget::Variance(a.pca_variance),
        },
        center_pca: a.center_pca,
        decouple_first: !a.no_decouple,
        decouple: DecoupleConfig {
            bins: a.bins,
            ..DecoupleConfig::default()
        },
    };
    let mut out = ctx.outputs(&a.output);
    let ranked: Vec<PairAnalysis> = match (&a.source, &a.target) {
        (Some(source), Some(target)) => {
            let (mut data, _) = normalize_table(&table)?;
            if config.decouple_first && data.n_cols() > 2 {
                data = decouple(&data, &config.decouple)
                    .map_err(|e| e.context("panel decoupling"))?
                    .result;
            }
            let p = analyze_pair(&data, source, target, &config)?;
            add_pair_files(ctx, &mut out, &a.output, &p)?;
            if let Some(plot) = &a.plot {
                out.add(plot, pair_svg(ctx, &p)?);
            }
            vec![p]
        }
        _ => {
            let report = multivariate_granger(&table, &config)?;
            for p in &report.pairs {
                let prefix = sibling(&a.output, &format!("{}-{}", p.source, p.target));
                add_pair_files(ctx, &mut out, &prefix, p)?;
            }
            if let (Some(plot), Some(top)) = (&a.plot, report.pairs.first()) {
                out.add(plot, pair_svg(ctx, top)?);
            }
            report.pairs
        }
    };
    let summary = json(
        &ranked
            .iter()
            .map(|p| RankedPair {
                source: &p.source,
                target: &p.target,
                peak_abs_correlation: p.peak_abs_correlation,
                argmax_delay: p.profile.argmax_delay,
            })
            .collect::<Vec<_>>(),
    )?;
    out.add(sibling(&a.output, "report.json"), summary.clone());
    out.commit()?;
    Ok(summary)
}

pub fn report(ctx: &Context, a: &ReportArgs) -> Result<()> {
    let (table, _) = prepare(load(&a.input)?, a.normalized)?;
    let before = match &a.before {
        Some(p) => {
            let t = load_csv(
                p,
                &CsvOptions {
                    delimiter: a.input.delimiter as u8,
                    drop_missing: a.input.drop_missing,
                },
            )?;
            Some(prepare(t, a.normalized)?.0)
        }
        None => None,
    };
    let mut r = dependence_report(&table, a.bins)?;
    if let Some(b) = &before {
        r.cross_mi = Some(cross_dependence(&table, b, a.bins)?);
    }
    let mut out = ctx.outputs(&a.output);
    out.add(&a.output, json(&report_out(ctx, &r))?);
    if let (Some(p), Some(x), Some(y)) = (&a.plot, &a.x, &a.y) {
        let after = pairs(table.column(x)?, table.column(y)?);
        let svg = match &before {
            Some(b) => scatter_pair_svg(x, y, pairs(b.column(x)?, b.column(y)?), after)?,
            None => render_svg(&[Panel::scatter(format!("{x} vs {y}"), vec![Series::new(
                "data", after,
            )])
            .labels(x.as_str(), y.as_str())])?,
        };
        out.add(p, svg);
    }
    out.commit()
}
