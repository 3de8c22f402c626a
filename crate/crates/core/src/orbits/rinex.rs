use serde::{Deserialize, Serialize};

use super::{EphemerisRecord, GpsTime, OrbitError, DEFAULT_VALIDITY_WINDOW};

const LINES_PER_RECORD: usize = 8;
const FIELD_WIDTH: usize = 19;

/// A skipped record or other non-fatal problem, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavFile {
    pub version: f64,
    /// GPS-UTC from the `LEAP SECONDS` header line, if present.
    pub leap_seconds: Option<i32>,
    pub records: Vec<EphemerisRecord>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

fn header_label(line: &str) -> &str {
    line.get(60..).unwrap_or("").trim()
}

/// Parses RINEX 2 GPS navigation text.
///
/// Malformed or implausible records are skipped and reported in
/// [`NavFile::diagnostics`]; only an unusable header is fatal.
pub fn parse_rinex_nav(text: &str) -> Result<NavFile, OrbitError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let first = lines.first().ok_or(OrbitError::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    if !first.contains("RINEX VERSION / TYPE") {
        return Err(OrbitError::Parse {
            line: 1,
            message: "missing RINEX VERSION / TYPE header line".into(),
        });
    }
    let version: f64 = first
        .get(..9)
        .and_then(|s| s.trim().parse().ok())
        .ok_or(OrbitError::Parse {
            line: 1,
            message: "unreadable RINEX version".into(),
        })?;
    if !(2.0..3.0).contains(&version) {
        return Err(OrbitError::Parse {
            line: 1,
            message: format!("unsupported RINEX version {version}"),
        });
    }
    if first.get(20..21) != Some("N") {
        return Err(OrbitError::Parse {
            line: 1,
            message: "not a GPS navigation file".into(),
        });
    }

    let mut leap_seconds = None;
    let mut body_start = None;
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.contains("END OF HEADER") {
            body_start = Some(i + 1);
            break;
        }
        if header_label(line) == "LEAP SECONDS" {
            leap_seconds = line.get(..6).and_then(|s| s.trim().parse().ok());
        }
    }
    let body_start = body_start.ok_or(OrbitError::Parse {
        line: lines.len(),
        message: "missing END OF HEADER".into(),
    })?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut i = body_start;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        if !is_record_start(lines[i]) {
            diagnostics.push(ParseDiagnostic {
                line: i + 1,
                message: "continuation line outside a record".into(),
            });
            i += 1;
            continue;
        }
        let end = (i + 1..lines.len())
            .take(LINES_PER_RECORD - 1)
            .find(|&j| is_record_start(lines[j]) || lines[j].trim().is_empty())
            .unwrap_or((i + LINES_PER_RECORD).min(lines.len()));
        if end - i < LINES_PER_RECORD {
            diagnostics.push(ParseDiagnostic {
                line: i + 1,
                message: format!("record has {} of {LINES_PER_RECORD} lines", end - i),
            });
            i = end;
            continue;
        }
        match parse_record(&lines[i..end]).and_then(|r| r.validate().map(|_| r)) {
            Ok(rec) => records.push(rec),
            Err(message) => diagnostics.push(ParseDiagnostic { line: i + 1, message }),
        }
        i = end;
    }
    Ok(NavFile {
        version,
        leap_seconds,
        records,
        diagnostics,
    })
}

fn is_record_start(line: &str) -> bool {
    line.get(..2).is_some_and(|s| !s.trim().is_empty())
}

fn parse_float(field: &str) -> Result<Option<f64>, String> {
    let s = field.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.replace(['D', 'd'], "E")
        .parse()
        .map(Some)
        .map_err(|_| format!("unreadable number {s:?}"))
}

/// Four 19-column fields starting at `offset`; missing trailing fields are `None`.
fn fields(line: &str, offset: usize) -> Result<[Option<f64>; 4], String> {
    let mut out = [None; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let start = offset + k * FIELD_WIDTH;
        if let Some(text) = line.get(start..(start + FIELD_WIDTH).min(line.len())) {
            *slot = parse_float(text)?;
        }
    }
    Ok(out)
}

fn required(values: [Option<f64>; 4], count: usize, line: usize) -> Result<[f64; 4], String> {
    if values[..count].iter().any(Option::is_none) {
        return Err(format!("record line {line} has fewer than {count} fields"));
    }
    Ok(values.map(|v| v.unwrap_or(0.0)))
}

fn parse_int(line: &str, range: std::ops::Range<usize>, what: &str) -> Result<u32, String> {
    line.get(range)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| format!("unreadable {what}"))
}

fn parse_record(lines: &[&str]) -> Result<EphemerisRecord, String> {
    let head = lines[0];
    let prn = parse_int(head, 0..2, "PRN")?;
    if !(1..=63).contains(&prn) {
        return Err(format!("PRN {prn} out of range"));
    }
    let yy = parse_int(head, 3..5, "year")? as i32;
    let year = if yy >= 80 { 1900 + yy } else { 2000 + yy };
    let month = parse_int(head, 6..8, "month")?;
    let day = parse_int(head, 9..11, "day")?;
    let hour = parse_int(head, 12..14, "hour")?;
    let minute = parse_int(head, 15..17, "minute")?;
    let second = head
        .get(17..22)
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or("unreadable second")?;
    let toc = GpsTime::from_calendar(year, month, day, hour, minute, second).map_err(|e| e.to_string())?;
    let [af0, af1, af2, _] = required(fields(head, 22)?, 3, 0)?;
    let [iode, crs, delta_n, m0] = required(fields(lines[1], 3)?, 4, 1)?;
    let [cuc, e, cus, sqrt_a] = required(fields(lines[2], 3)?, 4, 2)?;
    let [toe_sow, cic, omega0, cis] = required(fields(lines[3], 3)?, 4, 3)?;
    let [i0, crc, w_arg, omega_dot] = required(fields(lines[4], 3)?, 4, 4)?;
    let l5 = fields(lines[5], 3)?;
    if l5[0].is_none() || l5[2].is_none() {
        return Err("record line 5 lacks IDOT or week".into());
    }
    let [idot, _, week, _] = l5.map(|v| v.unwrap_or(0.0));
    let [_, health, tgd, iodc] = fields(lines[6], 3)?.map(|v| v.unwrap_or(0.0));
    let [_, fit_interval, _, _] = fields(lines[7], 3)?.map(|v| v.unwrap_or(0.0));
    if !(0.0..1e5).contains(&week) || week.fract() != 0.0 {
        return Err(format!("invalid GPS week {week}"));
    }
    let toe = GpsTime::normalized(week as i64, toe_sow).map_err(|e| e.to_string())?;
    Ok(EphemerisRecord {
        sat_id: format!("G{prn:02}"),
        prn: prn as u8,
        toc,
        clock_bias: af0,
        clock_drift: af1,
        clock_drift_rate: af2,
        iode,
        crs,
        delta_n,
        m0,
        cuc,
        e,
        cus,
        sqrt_a,
        toe,
        cic,
        omega0,
        cis,
        i0,
        crc,
        w_arg,
        omega_dot,
        idot,
        health,
        tgd,
        iodc,
        fit_interval,
        validity_window: DEFAULT_VALIDITY_WINDOW,
    })
}
