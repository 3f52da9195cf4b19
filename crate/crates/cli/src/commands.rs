use std::io::Write;
use std::path::Path;
use std::time::Instant;

use convnorm::bounds::Timings;
use convnorm::gradcheck::GradcheckReport;
use convnorm::kernels::{delta, gap_kernel, gaussian, uniform};
use convnorm::oracle::exact_spectral_norm;
use convnorm::{
    bound_report, build_dense_jacobian, circular_exact_norm, conv_operator, power_method_norm,
    BoundReport, ConvConfig, DenseTensor, HopmConfig, LinearOperator, OracleRequest, Padding,
    PowerSettings,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::kernel_file::{read_kernel, write_kernel, KernelFormat};
use crate::manifest::RunManifest;
use crate::{
    format_shape, parse_shape, BenchArgs, BoundArgs, Distribution, GenArgs, GradcheckArgs,
    OracleArgs, OracleMethod, TableArgs,
};

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Input size used when none is given: at least 32 and every kernel size,
/// rounded up to a multiple of the stride.
fn default_input_size(shape: &[usize], stride: usize) -> usize {
    let kmax = shape.iter().skip(2).copied().max().unwrap_or(1);
    32usize.max(kmax).div_ceil(stride) * stride
}

pub fn gen(args: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let needs = |min: usize| {
        if args.dims.len() < min || args.dims.contains(&0) {
            Err(CliError::Usage(format!(
                "{:?} needs at least {min} positive dims, got {:?}",
                args.dist, args.dims
            )))
        } else {
            Ok(())
        }
    };
    let k = match args.dist {
        Distribution::Gap => gap_kernel(),
        Distribution::Gaussian => {
            needs(1)?;
            gaussian(&args.dims, args.seed)
        }
        Distribution::Uniform => {
            needs(1)?;
            uniform(&args.dims, args.seed)
        }
        Distribution::Delta => {
            needs(2)?;
            delta(&args.dims)
        }
    };
    let format = args
        .format
        .unwrap_or_else(|| KernelFormat::from_path(&args.out));
    write_kernel(&args.out, &k, format)?;
    writeln!(
        out,
        "wrote {} kernel {} to {}",
        format_shape(k.shape()),
        match format {
            KernelFormat::Kten => "(kten)",
            KernelFormat::Json => "(json)",
        },
        args.out.display()
    )?;
    Ok(())
}

fn load(path: &Path) -> CliResult<DenseTensor> {
    read_kernel(path)
}

#[derive(Serialize)]
struct BoundJson<'a> {
    manifest: RunManifest,
    kernel_shape: &'a [usize],
    lower_sigma: f64,
    tn_upper: f64,
    f4_upper: Option<f64>,
    oracle_norm: Option<f64>,
    oracle_iterations: Option<usize>,
    ratio_tn: Option<f64>,
    ratio_f4: Option<f64>,
    hopm_iterations: usize,
    hopm_converged: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

pub fn bound(args: &BoundArgs, out: &mut dyn Write) -> CliResult<()> {
    let k = load(&args.kernel)?;
    if args.stride > 1 && k.ndim() != 4 {
        return Err(CliError::Usage(format!(
            "--stride {} needs a 4-axis kernel, got shape {:?}",
            args.stride,
            k.shape()
        )));
    }
    let n = args
        .oracle
        .unwrap_or_else(|| default_input_size(k.shape(), args.stride));
    let config = ConvConfig::same(k.shape(), args.padding.into(), args.stride, n);
    let hopm = args.hopm.config();
    let power = PowerSettings {
        iters: args.power.power_iters,
        tol: args.power.power_tol,
        seed: args.hopm.seed,
    };
    let request = args.oracle.map(|_| OracleRequest { settings: power });
    let r = bound_report(&k, &config, &hopm, request.as_ref())?;

    if args.json {
        let mut manifest = RunManifest::new("bound", args.hopm.seed);
        manifest.config = Some(config);
        manifest.hopm = Some(hopm);
        manifest.power = request.map(|q| q.settings);
        manifest.timings = args.timings.then(|| r.timings.clone());
        return json_line(
            out,
            &BoundJson {
                manifest,
                kernel_shape: k.shape(),
                lower_sigma: r.lower_sigma,
                tn_upper: r.tn_upper,
                f4_upper: r.f4_upper,
                oracle_norm: r.oracle_norm,
                oracle_iterations: r.oracle_iterations,
                ratio_tn: r.ratio_tn(),
                ratio_f4: r.ratio_f4(),
                hopm_iterations: r.hopm.iterations_used,
                hopm_converged: r.hopm.converged,
            },
        );
    }
    write_bound_text(out, &r)
}

fn write_bound_text(out: &mut dyn Write, r: &BoundReport) -> CliResult<()> {
    let c = &r.config;
    writeln!(out, "kernel    {}", format_shape(&r.kernel_shape))?;
    writeln!(
        out,
        "padding   {}  stride {}  n {}",
        c.padding, c.stride, c.input_size
    )?;
    writeln!(out, "lower     {:.6}", r.lower_sigma)?;
    writeln!(out, "tn        {:.6}", r.tn_upper)?;
    writeln!(out, "f4        {}", fmt_opt(r.f4_upper))?;
    if let Some(o) = r.oracle_norm {
        writeln!(
            out,
            "oracle    {o:.6}  ({} power iterations)",
            r.oracle_iterations.unwrap_or(0)
        )?;
        writeln!(out, "ratio_tn  {}", fmt_opt(r.ratio_tn()))?;
        writeln!(out, "ratio_f4  {}", fmt_opt(r.ratio_f4()))?;
    }
    let t = &r.timings;
    writeln!(
        out,
        "time      tn {:.1} ms  f4 {:.1} ms{}",
        t.tn_ms,
        t.f4_ms,
        t.oracle_ms
            .map_or(String::new(), |ms| format!("  oracle {ms:.1} ms"))
    )?;
    Ok(())
}

/// Table description, from flags or a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub shapes: Vec<Vec<usize>>,
    #[serde(default = "default_strides")]
    pub strides: Vec<usize>,
    #[serde(default = "default_padding")]
    pub padding: Padding,
    #[serde(default)]
    pub oracle: Option<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

fn default_strides() -> Vec<usize> {
    vec![1]
}

fn default_padding() -> Padding {
    Padding::Zero
}

fn default_seeds() -> usize {
    1
}

impl TableSpec {
    fn from_args(args: &TableArgs) -> CliResult<Self> {
        let mut spec = match &args.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad table spec: {e}")))?
            }
            None => TableSpec {
                shapes: args
                    .shape
                    .iter()
                    .map(|s| parse_shape(s))
                    .collect::<CliResult<_>>()?,
                strides: if args.strides.is_empty() {
                    default_strides()
                } else {
                    args.strides.clone()
                },
                padding: default_padding(),
                oracle: None,
                seeds: default_seeds(),
            },
        };
        if let Some(p) = args.padding {
            spec.padding = p.into();
        }
        if args.oracle.is_some() {
            spec.oracle = args.oracle;
        }
        if let Some(s) = args.seeds {
            spec.seeds = s;
        }
        if spec.shapes.is_empty() || spec.strides.is_empty() {
            return Err(CliError::Usage(
                "table needs at least one shape and one stride".into(),
            ));
        }
        if spec.seeds == 0 {
            return Err(CliError::Usage("--seeds must be at least 1".into()));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default)]
struct Stat {
    values: Vec<f64>,
}

impl Stat {
    fn push(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.values.push(v);
        }
    }
    fn mean(&self) -> Option<f64> {
        (!self.values.is_empty())
            .then(|| self.values.iter().sum::<f64>() / self.values.len() as f64)
    }
    fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }
    fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, Default)]
struct RowStats {
    lower: Stat,
    tn: Stat,
    f4: Stat,
    oracle: Stat,
    ratio_tn: Stat,
    ratio_f4: Stat,
    tn_ms: Stat,
    f4_ms: Stat,
    oracle_ms: Stat,
}

struct Row {
    shape: Vec<usize>,
    stride: usize,
    n: usize,
    outcome: CliResult<RowStats>,
}

fn table_row(
    shape: &[usize],
    stride: usize,
    spec: &TableSpec,
    args: &TableArgs,
) -> (usize, CliResult<RowStats>) {
    let n = spec
        .oracle
        .unwrap_or_else(|| default_input_size(shape, stride));
    let run = || -> CliResult<RowStats> {
        let config = ConvConfig::same(shape, spec.padding, stride, n);
        let mut stats = RowStats::default();
        for seed in args.hopm.seed..args.hopm.seed + spec.seeds as u64 {
            let k = gaussian(shape, seed);
            let hopm = HopmConfig {
                seed,
                ..args.hopm.config()
            };
            let request = spec.oracle.map(|_| OracleRequest {
                settings: PowerSettings {
                    iters: args.power_iters,
                    tol: args.power_tol,
                    seed,
                },
            });
            let r = bound_report(&k, &config, &hopm, request.as_ref())?;
            stats.lower.push(Some(r.lower_sigma));
            stats.tn.push(Some(r.tn_upper));
            stats.f4.push(r.f4_upper);
            stats.oracle.push(r.oracle_norm);
            stats.ratio_tn.push(r.ratio_tn());
            stats.ratio_f4.push(r.ratio_f4());
            let Timings {
                tn_ms,
                f4_ms,
                oracle_ms,
            } = r.timings;
            stats.tn_ms.push(Some(tn_ms));
            stats.f4_ms.push(Some(f4_ms));
            stats.oracle_ms.push(oracle_ms);
        }
        Ok(stats)
    };
    (n, run())
}

const CSV_HEADER: [&str; 19] = [
    "shape",
    "stride",
    "padding",
    "n",
    "lower",
    "tn",
    "f4",
    "oracle",
    "ratio_tn",
    "ratio_f4",
    "time_tn_ms",
    "time_f4_ms",
    "time_oracle_ms",
    "seeds",
    "ratio_tn_min",
    "ratio_tn_max",
    "ratio_f4_min",
    "ratio_f4_max",
    "error",
];

fn csv_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn table(args: &TableArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = TableSpec::from_args(args)?;
    let jobs: Vec<(Vec<usize>, usize)> = spec
        .shapes
        .iter()
        .flat_map(|s| spec.strides.iter().map(move |&st| (s.clone(), st)))
        .collect();
    // rows run concurrently; collect keeps input order
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|(shape, stride)| {
            let (n, outcome) = table_row(shape, *stride, &spec, args);
            Row {
                shape: shape.clone(),
                stride: *stride,
                n,
                outcome,
            }
        })
        .collect();

    if args.csv {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(CSV_HEADER)?;
        for row in &rows {
            let mut rec = vec![
                format_shape(&row.shape),
                row.stride.to_string(),
                spec.padding.to_string(),
                row.n.to_string(),
            ];
            match &row.outcome {
                Ok(s) => {
                    let time = |st: &Stat| {
                        if args.timings {
                            csv_num(st.mean())
                        } else {
                            String::new()
                        }
                    };
                    rec.extend([
                        csv_num(s.lower.mean()),
                        csv_num(s.tn.mean()),
                        csv_num(s.f4.mean()),
                        csv_num(s.oracle.mean()),
                        csv_num(s.ratio_tn.mean()),
                        csv_num(s.ratio_f4.mean()),
                        time(&s.tn_ms),
                        time(&s.f4_ms),
                        time(&s.oracle_ms),
                        spec.seeds.to_string(),
                        csv_num(s.ratio_tn.min()),
                        csv_num(s.ratio_tn.max()),
                        csv_num(s.ratio_f4.min()),
                        csv_num(s.ratio_f4.max()),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    rec.extend(std::iter::repeat_n(String::new(), 9));
                    rec.push(spec.seeds.to_string());
                    rec.extend(std::iter::repeat_n(String::new(), 4));
                    rec.push(e.to_string());
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    } else {
        writeln!(
            out,
            "{:<14} {:>6} {:>4} {:>12} {:>12} {:>12} {:>12} {:>9} {:>9} {:>10} {:>10} {:>11}",
            "shape",
            "stride",
            "n",
            "lower",
            "tn",
            "f4",
            "oracle",
            "ratio_tn",
            "ratio_f4",
            "tn_ms",
            "f4_ms",
            "oracle_ms"
        )?;
        let cell =
            |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.p$}"));
        for row in &rows {
            match &row.outcome {
                Ok(s) => writeln!(
                    out,
                    "{:<14} {:>6} {:>4} {:>12} {:>12} {:>12} {:>12} {:>9} {:>9} {:>10} {:>10} {:>11}",
                    format_shape(&row.shape),
                    row.stride,
                    row.n,
                    cell(s.lower.mean(), 4),
                    cell(s.tn.mean(), 4),
                    cell(s.f4.mean(), 4),
                    cell(s.oracle.mean(), 4),
                    cell(s.ratio_tn.mean(), 4),
                    cell(s.ratio_f4.mean(), 4),
                    cell(s.tn_ms.mean(), 1),
                    cell(s.f4_ms.mean(), 1),
                    cell(s.oracle_ms.mean(), 1),
                )?,
                Err(e) => writeln!(
                    out,
                    "{:<14} {:>6} {:>4} error: {e}",
                    format_shape(&row.shape),
                    row.stride,
                    row.n
                )?,
            }
        }
        writeln!(
            out,
            "padding {}, {} seed(s) per row",
            spec.padding, spec.seeds
        )?;
    }
    // the first failure decides the exit code
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    match rows.iter().find_map(|r| r.outcome.as_ref().err()) {
        None => Ok(()),
        Some(first) => {
            let msg = format!("{failed} table row(s) failed");
            Err(match first {
                CliError::Usage(_) => CliError::Usage(msg),
                CliError::Io(_) => CliError::Io(msg),
                CliError::Undefined(_) => CliError::Undefined(msg),
                CliError::Numerical(_) => CliError::Numerical(msg),
            })
        }
    }
}

#[derive(Serialize)]
struct GradcheckJson<'a> {
    manifest: RunManifest,
    #[serde(flatten)]
    report: &'a GradcheckReport,
}

pub fn gradcheck(args: &GradcheckArgs, out: &mut dyn Write) -> CliResult<()> {
    let k = load(&args.kernel)?;
    let hopm = args.hopm.config();
    let report = match convnorm::gradcheck::gradcheck(args.which, &k, &hopm, args.step, args.tol) {
        Ok(r) => r,
        Err(convnorm::Error::Undefined(msg)) => {
            writeln!(out, "{}: undefined ({msg})", args.which)?;
            return Err(CliError::Undefined(msg.to_string()));
        }
        Err(e) => return Err(e.into()),
    };
    if args.json {
        let mut manifest = RunManifest::new("gradcheck", args.hopm.seed);
        manifest.hopm = Some(hopm);
        json_line(
            out,
            &GradcheckJson {
                manifest,
                report: &report,
            },
        )?;
    } else {
        writeln!(out, "regularizer     {}", report.which)?;
        writeln!(out, "value           {:.10}", report.value)?;
        writeln!(out, "step            {:e}", report.step)?;
        writeln!(out, "max rel error   {:.3e}", report.max_rel_error)?;
        writeln!(out, "max abs error   {:.3e}", report.max_abs_error)?;
        writeln!(out, "gradient norm   {:.6e}", report.gradient_norm)?;
        writeln!(out, "<grad, K>       {:.3e}", report.inner_with_kernel)?;
        writeln!(
            out,
            "result          {} (tolerance {:e})",
            if report.passed { "PASS" } else { "FAIL" },
            args.tol
        )?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "gradient mismatch: max relative error {:.3e} > {:e}",
            report.max_rel_error, args.tol
        )))
    }
}

#[derive(Serialize)]
struct OracleJson {
    manifest: RunManifest,
    method: &'static str,
    norm: f64,
    iterations: Option<usize>,
    converged: Option<bool>,
    matrix: Option<(usize, usize)>,
}

pub fn oracle(args: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let k = load(&args.kernel)?;
    let config = ConvConfig::same(k.shape(), args.padding.into(), args.stride, args.n);
    config.validate(k.shape())?;
    let mut manifest = RunManifest::new("oracle", args.seed);
    let mut result = OracleJson {
        manifest: RunManifest::new("oracle", args.seed),
        method: "",
        norm: 0.0,
        iterations: None,
        converged: None,
        matrix: None,
    };
    match args.method {
        OracleMethod::Power => {
            let settings = PowerSettings {
                iters: args.power.power_iters,
                tol: args.power.power_tol,
                seed: args.seed,
            };
            let op = conv_operator(&k, &config)?;
            let est = power_method_norm(&op, &settings);
            manifest.power = Some(settings);
            result.method = "power";
            result.norm = est.norm;
            result.iterations = Some(est.iterations);
            result.converged = Some(est.converged);
            result.matrix = Some((op.output_len(), op.input_len()));
        }
        OracleMethod::Dense => {
            let t = build_dense_jacobian(&k, &config)?;
            result.method = "dense";
            result.norm = exact_spectral_norm(&t);
            result.matrix = Some((t.rows(), t.cols()));
        }
        OracleMethod::CircularExact => {
            if config.padding != Padding::Circular || config.stride != 1 {
                return Err(CliError::Usage(
                    "circular-exact needs --padding circular and --stride 1".into(),
                ));
            }
            result.method = "circular-exact";
            result.norm = circular_exact_norm(&k, args.n, &config.offsets)?;
        }
    }
    manifest.config = Some(config);
    result.manifest = manifest;
    if args.json {
        return json_line(out, &result);
    }
    writeln!(out, "norm        {:.10}", result.norm)?;
    writeln!(out, "method      {}", result.method)?;
    if let Some((r, c)) = result.matrix {
        writeln!(out, "jacobian    {r} x {c}")?;
    }
    if let (Some(it), Some(conv)) = (result.iterations, result.converged) {
        writeln!(
            out,
            "iterations  {it} ({})",
            if conv { "converged" } else { "hit cap" }
        )?;
    }
    Ok(())
}

pub fn bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    if args.ns.is_empty() {
        return Err(CliError::Usage("--ns needs at least one size".into()));
    }
    let shape = parse_shape(&args.shape)?;
    let k = gaussian(&shape, args.seed);
    let hopm = HopmConfig::default().with_seed(args.seed);
    let fixed = PowerSettings {
        iters: args.power_iters,
        tol: 0.0,
        seed: args.seed,
    };
    let mut rows = Vec::new();
    for &n in &args.ns {
        let config = ConvConfig::same(&shape, Padding::Zero, 1, n);
        let op = conv_operator(&k, &config)?;
        let (mut tn, mut f4, mut power) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for _ in 0..args.repeat {
            let r = bound_report(&k, &config, &hopm, None)?;
            tn = tn.min(r.timings.tn_ms);
            f4 = f4.min(r.timings.f4_ms);
            let start = Instant::now();
            power_method_norm(&op, &fixed);
            power = power.min(start.elapsed().as_secs_f64() * 1e3);
        }
        rows.push((n, tn, f4, power));
    }
    let base = rows[0].3;
    if args.csv {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["n", "tn_ms", "f4_ms", "power_ms", "power_vs_first"])?;
        for (n, tn, f4, p) in &rows {
            w.write_record([
                n.to_string(),
                tn.to_string(),
                f4.to_string(),
                p.to_string(),
                (p / base).to_string(),
            ])?;
        }
        w.flush()?;
    } else {
        writeln!(
            out,
            "kernel {}  (min of {} runs, power method {} iterations)",
            format_shape(&shape),
            args.repeat,
            args.power_iters
        )?;
        writeln!(
            out,
            "{:>5} {:>10} {:>10} {:>11} {:>9}",
            "n", "tn_ms", "f4_ms", "power_ms", "power_x"
        )?;
        for (n, tn, f4, p) in &rows {
            writeln!(
                out,
                "{n:>5} {tn:>10.2} {f4:>10.2} {p:>11.2} {:>9.2}",
                p / base
            )?;
        }
    }
    Ok(())
}
