//! The five subcommands. Each takes a validated [`RunConfig`] and writes to a sink.

use std::f64::consts::{FRAC_PI_4, LN_2};
use std::io::Write;

use clap::ValueEnum;
use qmeasure_core::analytics::{
    bures_norm_constant, bures_unnormalized, entanglement_density_n2, joint_density_at,
    radial_density_n2_gap, schmidt_angle_density, uniform_rescale_density_n2, EntanglementKind,
    N2Measure,
};
use qmeasure_core::ensembles::MeasureSpec;
use qmeasure_core::special::log_gamma;
use qmeasure_core::stats::{mc_collect, mc_estimate, ternary_histogram, Functional, TernaryHistogram};
use qmeasure_core::Result as CoreResult;
use rand::seq::SliceRandom;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::battery::{run_battery, BatteryConfig};
use crate::config::{measure_label, Command, Format, Law, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_num, json_num, json_opt, open_sink, write_row};

/// Runs the configured command against its output path (or standard output).
pub fn run(config: &RunConfig) -> CliResult<()> {
    let mut sink = open_sink(config.out.as_deref())?;
    let outcome = match config.command {
        Command::Sample => cmd_sample(config, &mut *sink),
        Command::Estimate => cmd_estimate(config, &mut *sink),
        Command::Density => cmd_density(config, &mut *sink),
        Command::Ternary => cmd_ternary(config, &mut *sink),
        Command::Verify => cmd_verify(config, &mut *sink),
    };
    sink.flush()?;
    outcome
}

fn measure_of(config: &RunConfig) -> CliResult<MeasureSpec> {
    config
        .measure
        .ok_or_else(|| CliError::Config("command needs a measure".into()))
}

#[derive(Serialize)]
struct SampleDump {
    measure: String,
    seed: u64,
    workers: usize,
    columns: Vec<String>,
    rows: Vec<Vec<Box<RawValue>>>,
}

/// One sample per row: descending spectra, or full matrices with `matrices`.
pub fn cmd_sample(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let measure = measure_of(config)?;
    let n = measure.n();
    let (columns, rows): (Vec<String>, Vec<Vec<f64>>) = if config.matrices {
        let columns = (1..=n)
            .flat_map(|i| (1..=n).flat_map(move |j| [format!("re_{i}_{j}"), format!("im_{i}_{j}")]))
            .collect();
        let rows = mc_collect(config.samples, config.workers, config.seed, |s| {
            Ok(measure.sample_density_matrix(s)?.matrix().interleaved())
        })?;
        (columns, rows)
    } else {
        let columns = (1..=n).map(|i| format!("lambda_{i}")).collect();
        let rows = mc_collect(config.samples, config.workers, config.seed, |s| {
            Ok(measure.sample_spectrum(s)?.into_values())
        })?;
        (columns, rows)
    };
    match config.format {
        Format::Csv => {
            write_row(out, &columns)?;
            for row in &rows {
                write_row(out, row.iter().map(|&x| fmt_num(x)))?;
            }
        }
        Format::Json => {
            let dump = SampleDump {
                measure: measure_label(&measure),
                seed: config.seed,
                workers: config.workers,
                columns,
                rows: rows.iter().map(|r| r.iter().map(|&x| json_num(x)).collect()).collect(),
            };
            serde_json::to_writer(&mut *out, &dump).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Record written by `estimate`; field names are part of the output contract.
#[derive(Serialize)]
pub struct EstimateRecord {
    pub measure: String,
    pub functional: String,
    pub mean: Box<RawValue>,
    pub stderr: Box<RawValue>,
    pub count: u64,
    pub exact: Option<Box<RawValue>>,
    pub z_score: Option<Box<RawValue>>,
    pub seed: u64,
    pub workers: usize,
    /// `⟨1/Tr ϱ²⟩` for the participation functional.
    pub mean_inverse_purity: Option<Box<RawValue>>,
    pub mean_inverse_purity_stderr: Option<Box<RawValue>>,
    pub units: &'static str,
}

const ESTIMATE_COLUMNS: [&str; 12] = [
    "measure",
    "functional",
    "mean",
    "stderr",
    "count",
    "exact",
    "z_score",
    "seed",
    "workers",
    "mean_inverse_purity",
    "mean_inverse_purity_stderr",
    "units",
];

pub fn estimate_record(config: &RunConfig) -> CliResult<EstimateRecord> {
    let measure = measure_of(config)?;
    let functional = config
        .functional
        .ok_or_else(|| CliError::Config("estimate needs --functional".into()))?;
    let est = mc_estimate(&measure, functional, config.samples, config.workers, config.seed)?;
    let exact = functional.exact_value(&measure);
    let z = exact.map(|e| (est.mean - e) / est.stderr);
    let (scale, units) = match (functional, config.bits) {
        (Functional::Entropy, true) => (1.0 / LN_2, "bits"),
        (Functional::Entropy, false) => (1.0, "nats"),
        _ => (1.0, "none"),
    };
    Ok(EstimateRecord {
        measure: measure_label(&measure),
        functional: functional.label(),
        mean: json_num(est.mean * scale),
        stderr: json_num(est.stderr * scale),
        count: est.count,
        exact: json_opt(exact.map(|e| e * scale)),
        z_score: json_opt(z),
        seed: config.seed,
        workers: config.workers,
        mean_inverse_purity: json_opt(est.mean_inverse_purity.map(|m| m.mean)),
        mean_inverse_purity_stderr: json_opt(est.mean_inverse_purity.map(|m| m.stderr)),
        units,
    })
}

/// Monte Carlo mean with standard error, exact value and z-score.
pub fn cmd_estimate(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let record = estimate_record(config)?;
    match config.format {
        Format::Json => {
            serde_json::to_writer(&mut *out, &record).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Format::Csv => {
            let opt = |v: &Option<Box<RawValue>>| v.as_ref().map(|r| r.get().to_owned()).unwrap_or_default();
            write_row(out, ESTIMATE_COLUMNS)?;
            write_row(
                out,
                [
                    record.measure.clone(),
                    record.functional.clone(),
                    record.mean.get().to_owned(),
                    record.stderr.get().to_owned(),
                    record.count.to_string(),
                    opt(&record.exact),
                    opt(&record.z_score),
                    record.seed.to_string(),
                    record.workers.to_string(),
                    opt(&record.mean_inverse_purity),
                    opt(&record.mean_inverse_purity_stderr),
                    record.units.to_owned(),
                ],
            )?;
        }
    }
    Ok(())
}

fn law_name(law: Law) -> String {
    law.to_possible_value().expect("no skipped variants").get_name().to_owned()
}

type GapLaw = Box<dyn Fn(f64, f64) -> CoreResult<f64>>;

/// Support `[lo, hi]` and density `f(x, hi - x)` of a tabulated law.
fn law_density(measure: &MeasureSpec, law: Law) -> CliResult<(f64, f64, GapLaw)> {
    Ok(match law {
        Law::Radial => {
            let m = N2Measure::from_spec(measure)
                .ok_or_else(|| CliError::Config("measure has no radial law".into()))?;
            (0.0, 0.5, Box::new(move |r, gap| radial_density_n2_gap(m, r, gap)))
        }
        Law::Eigenvalue => {
            let f: GapLaw = match *measure {
                MeasureSpec::Induced { n: 2, k, beta } => {
                    Box::new(move |x, gap| joint_density_at(&[x, gap], k, beta.value()))
                }
                MeasureSpec::ProductDirichlet { n: 2, s } => {
                    let log_beta = 2.0 * log_gamma(s)? - log_gamma(2.0 * s)?;
                    Box::new(move |x, gap| Ok(((s - 1.0) * (x.ln() + gap.ln()) - log_beta).exp()))
                }
                MeasureSpec::Bures { n: 2 } => {
                    let c = bures_norm_constant(2)?.value;
                    Box::new(move |x, gap| Ok(c * bures_unnormalized(&[x, gap])?))
                }
                _ => return Err(CliError::Config("eigenvalue law needs --n 2".into())),
            };
            (0.0, 1.0, f)
        }
        Law::Tangle => (
            0.0,
            1.0,
            Box::new(|x, _| entanglement_density_n2(EntanglementKind::Tangle, x)),
        ),
        Law::Concurrence => (
            0.0,
            1.0,
            Box::new(|x, _| entanglement_density_n2(EntanglementKind::Concurrence, x)),
        ),
        Law::SchmidtAngle => (0.0, FRAC_PI_4, Box::new(|x, _| schmidt_angle_density(x))),
        Law::Rescale => (0.0, 1.0, Box::new(|x, _| uniform_rescale_density_n2(x))),
    })
}

/// `(x, density)` at `x_i = lo + (hi - lo) i / bins`, `i = 0..=bins`.
///
/// Points where the law is undefined or infinite (open endpoints, integrable
/// singularities) are left out.
pub fn tabulate_density(measure: &MeasureSpec, law: Law, bins: usize) -> CliResult<Vec<(f64, f64)>> {
    let (lo, hi, f) = law_density(measure, law)?;
    let width = hi - lo;
    Ok((0..=bins)
        .filter_map(|i| {
            let x = lo + width * i as f64 / bins as f64;
            let gap = width * (bins - i) as f64 / bins as f64;
            f(x, gap).ok().filter(|d| d.is_finite()).map(|d| (x, d))
        })
        .collect())
}

#[derive(Serialize)]
struct DensityDump {
    law: String,
    measure: String,
    points: Vec<[Box<RawValue>; 2]>,
}

pub fn cmd_density(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let measure = measure_of(config)?;
    let law = config.law.ok_or_else(|| CliError::Config("density needs --law".into()))?;
    let points = tabulate_density(&measure, law, config.bins)?;
    match config.format {
        Format::Csv => {
            write_row(out, ["x", "density"])?;
            for (x, d) in points {
                write_row(out, [fmt_num(x), fmt_num(d)])?;
            }
        }
        Format::Json => {
            let dump = DensityDump {
                law: law_name(law),
                measure: measure_label(&measure),
                points: points.into_iter().map(|(x, d)| [json_num(x), json_num(d)]).collect(),
            };
            serde_json::to_writer(&mut *out, &dump).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Histogram of `N = 3` spectra in random coordinate order, so the plot
/// covers the whole simplex rather than its ordered sixth.
pub fn ternary_counts(config: &RunConfig) -> CliResult<TernaryHistogram> {
    let measure = measure_of(config)?;
    let spectra = mc_collect(config.samples, config.workers, config.seed, |s| {
        let mut v = measure.sample_spectrum(s)?.into_values();
        v.shuffle(s);
        Ok(v)
    })?;
    Ok(ternary_histogram(&spectra, config.resolution)?)
}

#[derive(Serialize)]
struct TernaryDump {
    measure: String,
    resolution: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    cells: Vec<(usize, usize, u64)>,
}

pub fn cmd_ternary(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let hist = ternary_counts(config)?;
    match config.format {
        Format::Csv => {
            write_row(out, ["bin_i", "bin_j", "count"])?;
            for (i, j, c) in hist.cells() {
                write_row(out, [i.to_string(), j.to_string(), c.to_string()])?;
            }
        }
        Format::Json => {
            let dump = TernaryDump {
                measure: measure_label(&measure_of(config)?),
                resolution: hist.resolution(),
                samples: config.samples,
                seed: config.seed,
                workers: config.workers,
                cells: hist.cells().collect(),
            };
            serde_json::to_writer(&mut *out, &dump).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Runs the acceptance battery, writes its JSON report and fails on any miss.
pub fn cmd_verify(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let battery = BatteryConfig {
        samples: config.samples,
        seed: config.seed,
        workers: config.workers,
        quick: config.quick,
    };
    let report = run_battery(&battery);
    serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: report.criteria.len(),
        });
    }
    Ok(())
}
