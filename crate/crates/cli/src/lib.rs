//! Command-line front end for the `navbound` library.
//!
//! [`run`] parses arguments, writes data to standard output (or `--output`)
//! and diagnostics to standard error, and returns the process exit code:
//! 0 on success, 1 for degenerate or inadmissible geometry and numerical
//! failures, 2 for usage, parse and I/O errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use navbound::orbits::{parse_rinex_nav, EphemerisSet, OrbitSource, SiteLocation, TabulatedOrbits, DEFAULT_UTC_OFFSET};
use navbound::scan::{self, PairPolicy, ScanConfig, SeriesRow};
use navbound::signal_model::{
    generate_ca_code, generate_noise, ml_delay_estimate, orthogonal_interference, perturbation_experiment,
    random_interference, sample_waveform, sample_waveform_jet, worst_interference, DelayWindow, DerivativeOrder,
    NoiseConfig, SignalError, WaveformSpec,
};
use navbound::track_geometry::{
    determinant_d, directional_cosines, frenet_frame, magnification_s, magnification_uv, CurvatureSide,
    DirectionCosines, Vector3, DEGENERACY_THRESHOLD,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Output was produced but the geometry admits no bound.
    #[error("{0}")]
    Rejected(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Rejected(_) | CliError::Numerical(_) => 1,
            CliError::Usage(_) | CliError::Input(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::UnsupportedPrn(_) | SignalError::NonPositivePower(_) | SignalError::NegativeSigma(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InterferenceMode {
    /// Parallel to the waveform derivative at the estimate.
    Worst,
    /// Uniformly random direction.
    Random,
    /// Random direction orthogonal to the waveform derivative.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    BestPair,
    AllPairs,
}

#[derive(Debug, Parser)]
#[command(name = "navbound", version, about = "Bias-error bounds for satellite navigation")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the C/A code chips of one PRN.
    Code {
        #[arg(long)]
        prn: u8,
    },
    /// Sample the smoothed waveform or one of its delay derivatives.
    Waveform {
        #[arg(long)]
        prn: u8,
        /// Delay in chips.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delay: f64,
        /// 0 for the waveform, 1 or 2 for its derivatives in delay.
        #[arg(long, default_value_t = 0)]
        derivative: u8,
    },
    /// Delay bias from an interference of bounded power: M_tau, the bound and
    /// the simulated shift.
    Interference {
        #[arg(long)]
        prn: u8,
        /// Squared norm of the interference.
        #[arg(long)]
        power: f64,
        /// Per-component noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// True delay in chips.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delay: f64,
        #[arg(long, value_enum, default_value = "worst")]
        mode: InterferenceMode,
    },
    /// Magnification coefficients of a satellite geometry file.
    Track {
        #[arg(long)]
        geometry: PathBuf,
    },
    /// Sweep M_s over a day of broadcast ephemerides.
    Scan {
        /// RINEX 2 GPS navigation file.
        #[arg(long, required_unless_present = "orbits", conflicts_with = "orbits")]
        nav: Option<PathBuf>,
        /// CSV of ECEF positions: sat_id,week,sow,x_m,y_m,z_m.
        #[arg(long)]
        orbits: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        height: f64,
        /// Track azimuth, degrees clockwise from north.
        #[arg(long, default_value_t = 90.0)]
        azimuth: f64,
        /// Elevation mask, degrees.
        #[arg(long, default_value_t = 15.0)]
        mask: f64,
        /// Epoch spacing, seconds.
        #[arg(long, default_value_t = 60.0)]
        step: f64,
        /// UTC day to scan; defaults to the day of the ephemerides.
        #[arg(long)]
        date: Option<NaiveDate>,
        /// GPS minus UTC, seconds; defaults to the file's leap seconds, else 16.
        #[arg(long)]
        utc_offset: Option<f64>,
        #[arg(long, value_enum, default_value = "best-pair")]
        policy: Policy,
    },
    /// Relative-frequency histogram of a scan time series.
    Hist {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = scan::DEFAULT_BIN_WIDTH)]
        bin_width: f64,
        #[arg(long, default_value_t = scan::DEFAULT_HISTOGRAM_RANGE.0)]
        min: f64,
        #[arg(long, default_value_t = scan::DEFAULT_HISTOGRAM_RANGE.1)]
        max: f64,
    },
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut data = Vec::new();
    let result = dispatch(&cli, &mut data, stderr);
    if let Err(e) = emit(&cli, &data, stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, data: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    if data.is_empty() {
        return Ok(());
    }
    match &cli.output {
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            let mut file = BufWriter::new(File::create(path).map_err(io)?);
            file.write_all(data).map_err(io)?;
            file.flush().map_err(io)
        }
        None => stdout.write_all(data).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Code { prn } => code(*prn, cli.format, out),
        Command::Waveform { prn, delay, derivative } => waveform(*prn, *delay, *derivative, cli.format, out),
        Command::Interference {
            prn,
            power,
            sigma,
            seed,
            delay,
            mode,
        } => interference(*prn, *power, *sigma, *seed, *delay, *mode, cli.format, out),
        Command::Track { geometry } => track(geometry, cli.format, out),
        Command::Scan {
            nav,
            orbits,
            lat,
            lon,
            height,
            azimuth,
            mask,
            step,
            date,
            utc_offset,
            policy,
        } => {
            let site = SiteLocation::new(*lat, *lon, *height).map_err(|e| CliError::Usage(e.to_string()))?;
            let args = ScanArgs {
                site,
                azimuth: *azimuth,
                mask: *mask,
                step: *step,
                date: *date,
                utc_offset: *utc_offset,
                policy: *policy,
            };
            scan_cmd(nav.as_deref(), orbits.as_deref(), &args, cli.format, out, err)
        }
        Command::Hist {
            series,
            bin_width,
            min,
            max,
        } => hist(series, *bin_width, (*min, *max), cli.format, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut Vec<u8>) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Numerical(e.to_string()))?;
    out.push(b'\n');
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn code(prn: u8, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let code = generate_ca_code(prn)?;
    match format {
        Format::Csv => {
            out.extend_from_slice(b"index,chip\n");
            for (i, c) in code.chips().iter().enumerate() {
                out.extend_from_slice(format!("{i},{c}\n").as_bytes());
            }
        }
        Format::Json => write_json(&serde_json::json!({ "prn": prn, "chips": code.chips() }), out)?,
    }
    Ok(())
}

fn waveform(prn: u8, delay_chips: f64, derivative: u8, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let order = DerivativeOrder::try_from(derivative).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = WaveformSpec::default_for(generate_ca_code(prn)?);
    let signal = sample_waveform(&spec, delay_chips * spec.chip_duration(), order)?;
    match format {
        Format::Csv => signal.write_csv(&mut *out).map_err(|source| CliError::Io {
            path: "<buffer>".into(),
            source,
        })?,
        Format::Json => {
            let samples: Vec<[f64; 2]> = signal.samples().iter().map(|s| [s.re, s.im]).collect();
            write_json(
                &serde_json::json!({ "sampling_period": signal.sampling_period(), "samples": samples }),
                out,
            )?
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct InterferenceReport {
    prn: u8,
    mode: InterferenceMode,
    power: f64,
    sigma: f64,
    seed: u64,
    tau0: f64,
    m_tau: f64,
    bound: f64,
    empirical: Option<f64>,
    /// `|empirical| / bound`.
    ratio: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn interference(
    prn: u8,
    power: f64,
    sigma: f64,
    seed: u64,
    delay_chips: f64,
    mode: InterferenceMode,
    format: Format,
    out: &mut Vec<u8>,
) -> Result<(), CliError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(CliError::Usage(format!("--power must be positive, got {power}")));
    }
    let spec = WaveformSpec::default_for(generate_ca_code(prn)?);
    let tau_true = delay_chips * spec.chip_duration();
    let noise = NoiseConfig { sigma, seed };
    let norm = power.sqrt();
    let dy = match mode {
        InterferenceMode::Random => {
            random_interference(spec.num_samples, spec.sampling_period, norm, seed.wrapping_add(1))?
        }
        InterferenceMode::Worst | InterferenceMode::Orthogonal => {
            // The direction depends on w' at the unperturbed estimate.
            let z = sample_waveform_jet(&spec, tau_true)?.value.add(&generate_noise(
                spec.num_samples,
                spec.sampling_period,
                noise,
            )?)?;
            let tau0 = ml_delay_estimate(&z, &spec, DelayWindow::around(tau_true, 2.5, &spec))?.tau0;
            let w1 = sample_waveform_jet(&spec, tau0)?.first;
            match mode {
                InterferenceMode::Worst => worst_interference(&w1, power)?,
                _ => orthogonal_interference(&w1, norm, seed.wrapping_add(1))?,
            }
        }
    };
    let p = perturbation_experiment(&spec, tau_true, noise, &dy)?;
    let report = InterferenceReport {
        prn,
        mode,
        power,
        sigma,
        seed,
        tau0: p.tau0,
        m_tau: p.m_tau,
        bound: p.delta_tau_bound,
        empirical: p.delta_tau_empirical,
        ratio: p.delta_tau_empirical.map(|d| d.abs() / p.delta_tau_bound),
    };
    match format {
        Format::Csv => {
            out.extend_from_slice(b"prn,mode,power,sigma,seed,tau0,m_tau,bound,empirical,ratio\n");
            let mode = serde_json::to_value(mode)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            out.extend_from_slice(
                format!(
                    "{prn},{mode},{power:?},{sigma:?},{seed},{:?},{:?},{:?},{},{}\n",
                    report.tau0,
                    report.m_tau,
                    report.bound,
                    opt(report.empirical),
                    opt(report.ratio)
                )
                .as_bytes(),
            );
        }
        Format::Json => write_json(&report, out)?,
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SatEntry {
    Cosines {
        sat_id: String,
        f: f64,
        h: f64,
    },
    Sky {
        sat_id: String,
        elevation: f64,
        azimuth: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GeometryFile {
    Described {
        track_azimuth_deg: Option<f64>,
        #[serde(default)]
        curvature: Option<CurvatureSide>,
        satellites: Vec<SatEntry>,
    },
    Bare(Vec<SatEntry>),
}

#[derive(Debug, Serialize)]
struct TrackReport {
    kind: &'static str,
    status: &'static str,
    determinant: Option<f64>,
    /// Satellite ids in the order that satisfies the sign condition.
    permutation: Option<Vec<String>>,
    m_u: Option<f64>,
    m_v: Option<f64>,
    m_s: Option<f64>,
}

fn resolve_cosines(file: GeometryFile) -> Result<Vec<(String, DirectionCosines)>, CliError> {
    let (azimuth, side, sats) = match file {
        GeometryFile::Described {
            track_azimuth_deg,
            curvature,
            satellites,
        } => (
            track_azimuth_deg,
            curvature.unwrap_or(CurvatureSide::Straight),
            satellites,
        ),
        GeometryFile::Bare(satellites) => (None, CurvatureSide::Straight, satellites),
    };
    let mut out = Vec::with_capacity(sats.len());
    for entry in sats {
        match entry {
            SatEntry::Cosines { sat_id, f, h } => {
                if !(f.is_finite() && h.is_finite()) || f * f + h * h > 1.0 + 1e-12 {
                    return Err(CliError::Input(format!(
                        "{sat_id}: cosines ({f}, {h}) outside the unit disc"
                    )));
                }
                out.push((sat_id, DirectionCosines::new(f, h)));
            }
            SatEntry::Sky {
                sat_id,
                elevation,
                azimuth: sat_az,
            } => {
                let track_az = azimuth.ok_or_else(|| {
                    CliError::Input(format!("{sat_id}: elevation/azimuth entries need track_azimuth_deg"))
                })?;
                let radius = if side == CurvatureSide::Straight {
                    f64::INFINITY
                } else {
                    1.0
                };
                let frame = frenet_frame(Vector3::zeros(), track_az.to_radians(), side, radius)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let (el, az) = (elevation.to_radians(), sat_az.to_radians());
                let dir = Vector3::new(el.cos() * az.sin(), el.cos() * az.cos(), el.sin());
                let sat = directional_cosines(&[(sat_id, dir)], &frame).map_err(|e| CliError::Input(e.to_string()))?;
                let sat = sat.into_iter().next().expect("one satellite in, one out");
                let c = sat.cosines();
                out.push((sat.sat_id, c));
            }
        }
    }
    Ok(out)
}

fn track(path: &Path, format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let file: GeometryFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let sats = resolve_cosines(file)?;
    let ids: Vec<String> = sats.iter().map(|s| s.0.clone()).collect();
    let report = match sats.as_slice() {
        [(_, a), (_, b)] => {
            let m = magnification_s(*a, *b);
            let gap = b.f - a.f;
            let status = if gap.abs() <= DEGENERACY_THRESHOLD {
                "degenerate"
            } else if m.admissible {
                "admissible"
            } else {
                "inadmissible"
            };
            TrackReport {
                kind: "two-sat",
                status,
                determinant: Some(gap),
                permutation: m.permutation.map(|p| p.iter().map(|&i| ids[i].clone()).collect()),
                m_u: None,
                m_v: None,
                m_s: m.m_s,
            }
        }
        [(_, a), (_, b), (_, c)] => {
            let triple = [*a, *b, *c];
            let d = determinant_d(&triple);
            let m = magnification_uv(&triple);
            let status = if d.abs() <= DEGENERACY_THRESHOLD {
                "degenerate"
            } else if m.admissible {
                "admissible"
            } else {
                "inadmissible"
            };
            TrackReport {
                kind: "three-sat",
                status,
                determinant: Some(d),
                permutation: m.permutation.map(|p| p.iter().map(|&i| ids[i].clone()).collect()),
                m_u: m.m_u,
                m_v: m.m_v,
                m_s: None,
            }
        }
        other => {
            return Err(CliError::Input(format!(
                "geometry needs 2 or 3 satellites, got {}",
                other.len()
            )))
        }
    };
    match format {
        Format::Csv => {
            out.extend_from_slice(b"kind,status,determinant,permutation,m_u,m_v,m_s\n");
            let perm = report.permutation.as_ref().map(|p| p.join(" ")).unwrap_or_default();
            out.extend_from_slice(
                format!(
                    "{},{},{},{perm},{},{},{}\n",
                    report.kind,
                    report.status,
                    opt(report.determinant),
                    opt(report.m_u),
                    opt(report.m_v),
                    opt(report.m_s)
                )
                .as_bytes(),
            );
        }
        Format::Json => write_json(&report, out)?,
    }
    if report.status != "admissible" {
        return Err(CliError::Rejected(format!("no bound: geometry is {}", report.status)));
    }
    Ok(())
}

struct ScanArgs {
    site: SiteLocation,
    azimuth: f64,
    mask: f64,
    step: f64,
    date: Option<NaiveDate>,
    utc_offset: Option<f64>,
    policy: Policy,
}

fn scan_cmd(
    nav: Option<&Path>,
    orbits: Option<&Path>,
    args: &ScanArgs,
    format: Format,
    out: &mut Vec<u8>,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let (source, default_date, leap): (Box<dyn OrbitSource>, Option<NaiveDate>, Option<i32>) = match (nav, orbits) {
        (Some(path), _) => {
            let parsed =
                parse_rinex_nav(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            for d in &parsed.diagnostics {
                let _ = writeln!(err, "{}:{}: skipped record: {}", path.display(), d.line, d.message);
            }
            let mut tocs: Vec<_> = parsed.records.iter().map(|r| r.toc).collect();
            tocs.sort();
            let date = tocs.get(tocs.len() / 2).map(|t| t.date());
            (Box::new(EphemerisSet::new(parsed.records)), date, parsed.leap_seconds)
        }
        (None, Some(path)) => {
            let file = File::open(path).map_err(|source| CliError::Io {
                path: path.to_owned(),
                source,
            })?;
            let tab =
                TabulatedOrbits::from_csv(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let date = tab.coverage().map(|(lo, _)| lo.date());
            (Box::new(tab), date, None)
        }
        (None, None) => return Err(CliError::Usage("one of --nav or --orbits is required".into())),
    };
    let date = args
        .date
        .or(default_date)
        .ok_or_else(|| CliError::Input("no ephemerides to infer the scan date from; pass --date".into()))?;
    let offset = args.utc_offset.or(leap.map(f64::from)).unwrap_or(DEFAULT_UTC_OFFSET);
    let config = ScanConfig {
        track_azimuth: args.azimuth,
        mask: args.mask,
        step: args.step,
        pair_policy: match args.policy {
            Policy::BestPair => PairPolicy::BestPair,
            Policy::AllPairs => PairPolicy::AllPairs,
        },
        ..ScanConfig::utc_day(args.site, date, offset).map_err(|e| CliError::Usage(e.to_string()))?
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let results = scan::scan_ms(&config, source.as_ref()).map_err(|e| CliError::Input(e.to_string()))?;
    let present = results.iter().filter(|r| r.best_m_s.is_some()).count();
    let _ = writeln!(
        err,
        "scanned {date} (GPS-UTC {offset} s): {} epochs, {present} with an admissible pair",
        results.len()
    );
    match (format, config.pair_policy) {
        (Format::Csv, PairPolicy::BestPair) => scan::write_series_csv(&results, &mut *out),
        (Format::Csv, PairPolicy::AllPairs) => scan::write_pairs_csv(&results, &mut *out),
        (Format::Json, PairPolicy::BestPair) => {
            let rows: Vec<SeriesRow> = results.iter().map(SeriesRow::from).collect();
            return write_json(&rows, out);
        }
        (Format::Json, PairPolicy::AllPairs) => return write_json(&results, out),
    }
    .map_err(|e| CliError::Numerical(e.to_string()))
}

fn hist(path: &Path, bin_width: f64, range: (f64, f64), format: Format, out: &mut Vec<u8>) -> Result<(), CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let rows = scan::read_series_csv(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let values: Vec<f64> = rows.iter().filter_map(|r| r.best_m_s).collect();
    let h = scan::histogram_values(&values, bin_width, range).map_err(|e| match e {
        scan::ScanError::NoPresentValues => CliError::Input(format!("{}: no present best_m_s values", path.display())),
        other => CliError::Usage(other.to_string()),
    })?;
    match format {
        Format::Csv => scan::write_histogram_csv(&h, &mut *out).map_err(|e| CliError::Numerical(e.to_string())),
        Format::Json => write_json(&h, out),
    }
}
