//! CSV serialization with fixed schemas.
//!
//! All files are UTF-8 with LF line endings and a mandatory header row;
//! values are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly. Readers enforce the schema and
//! report failures with their line number; timestamp ordering is the
//! scheduler's contract and is checked where the streams are consumed.

use std::io::Write;
use std::path::Path;

use erkf::models::{GpsSample, ImuSample};
use erkf::nav::{EstimateRecord, Source};

use crate::compare::CompareRow;
use crate::synth::TruthRecord;

/// Header of an IMU stream file.
pub const IMU_HEADER: &str = "t,gx,gy,gz,ax,ay,az,phi,theta,psi";
/// Header of a GPS stream file.
pub const GPS_HEADER: &str = "t,lat,lon,alt,yaw";
/// Header of a ground-truth stream file.
pub const TRUTH_HEADER: &str = "t,phi,theta,psi,lat,lon,alt,vn,ve,vd";
/// Header of an estimates file.
pub const ESTIMATES_HEADER: &str = "t,phi,theta,psi,lat,lon,alt,vn,ve,vd,source";
/// Header of a backend-comparison file.
pub const COMPARE_HEADER: &str = "t,system,smax_givens,smax_inv,smin_givens,smin_inv,dmax,dmin";

/// Errors raised while reading a CSV file.
#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    /// The file could not be read or written.
    #[error("csv: {0}")]
    Io(#[from] std::io::Error),
    /// A line failed to parse against the schema.
    #[error("csv line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One value with 17 significant digits; parses back to the same bits.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field(field: &str, line: usize, name: &str) -> Result<f64, CsvError> {
    let v: f64 = field.trim().parse().map_err(|_| CsvError::Parse {
        line,
        msg: format!("field {name}: expected a number, got {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(CsvError::Parse {
            line,
            msg: format!("field {name}: value is not finite"),
        });
    }
    Ok(v)
}

/// Split a data line and check the column count against the header.
fn fields<'a>(
    raw: &'a str,
    count: usize,
    line: usize,
) -> Result<Vec<&'a str>, CsvError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != count {
        return Err(CsvError::Parse {
            line,
            msg: format!("expected {count} fields, got {}", parts.len()),
        });
    }
    Ok(parts)
}

fn check_header(text: &str, expected: &str) -> Result<(), CsvError> {
    match text.lines().next() {
        Some(h) if h == expected => Ok(()),
        Some(h) => Err(CsvError::Parse {
            line: 1,
            msg: format!("expected header {expected:?}, got {h:?}"),
        }),
        None => Err(CsvError::Parse {
            line: 1,
            msg: "empty file; header row is mandatory".into(),
        }),
    }
}

/// Render an IMU stream.
pub fn render_imu_csv(samples: &[ImuSample]) -> String {
    let mut out = String::from(IMU_HEADER);
    out.push('\n');
    for s in samples {
        let row = [
            s.t,
            s.gyro[0],
            s.gyro[1],
            s.gyro[2],
            s.accel[0],
            s.accel[1],
            s.accel[2],
            s.angles_imu[0],
            s.angles_imu[1],
            s.angles_imu[2],
        ];
        out.push_str(&row.map(fmt).join(","));
        out.push('\n');
    }
    out
}

/// Parse an IMU stream.
pub fn parse_imu_csv(text: &str) -> Result<Vec<ImuSample>, CsvError> {
    check_header(text, IMU_HEADER)?;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(1) {
        let line = idx + 1;
        let f = fields(raw, 10, line)?;
        let v: Vec<f64> = f
            .iter()
            .zip(IMU_HEADER.split(','))
            .map(|(field, name)| parse_field(field, line, name))
            .collect::<Result<_, _>>()?;
        samples.push(ImuSample {
            t: v[0],
            gyro: [v[1], v[2], v[3]],
            accel: [v[4], v[5], v[6]],
            angles_imu: [v[7], v[8], v[9]],
        });
    }
    Ok(samples)
}

/// Render a GPS stream.
pub fn render_gps_csv(samples: &[GpsSample]) -> String {
    let mut out = String::from(GPS_HEADER);
    out.push('\n');
    for s in samples {
        let row = [s.t, s.pos_lla[0], s.pos_lla[1], s.pos_lla[2], s.yaw_gps];
        out.push_str(&row.map(fmt).join(","));
        out.push('\n');
    }
    out
}

/// Parse a GPS stream.
pub fn parse_gps_csv(text: &str) -> Result<Vec<GpsSample>, CsvError> {
    check_header(text, GPS_HEADER)?;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(1) {
        let line = idx + 1;
        let f = fields(raw, 5, line)?;
        let v: Vec<f64> = f
            .iter()
            .zip(GPS_HEADER.split(','))
            .map(|(field, name)| parse_field(field, line, name))
            .collect::<Result<_, _>>()?;
        samples.push(GpsSample {
            t: v[0],
            pos_lla: [v[1], v[2], v[3]],
            yaw_gps: v[4],
        });
    }
    Ok(samples)
}

/// Render a ground-truth stream.
pub fn render_truth_csv(records: &[TruthRecord]) -> String {
    let mut out = String::from(TRUTH_HEADER);
    out.push('\n');
    for r in records {
        let row = [
            r.t,
            r.attitude[0],
            r.attitude[1],
            r.attitude[2],
            r.position[0],
            r.position[1],
            r.position[2],
            r.velocity[0],
            r.velocity[1],
            r.velocity[2],
        ];
        out.push_str(&row.map(fmt).join(","));
        out.push('\n');
    }
    out
}

/// Parse a ground-truth stream.
pub fn parse_truth_csv(text: &str) -> Result<Vec<TruthRecord>, CsvError> {
    check_header(text, TRUTH_HEADER)?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(1) {
        let line = idx + 1;
        let f = fields(raw, 10, line)?;
        let v: Vec<f64> = f
            .iter()
            .zip(TRUTH_HEADER.split(','))
            .map(|(field, name)| parse_field(field, line, name))
            .collect::<Result<_, _>>()?;
        records.push(TruthRecord {
            t: v[0],
            attitude: [v[1], v[2], v[3]],
            position: [v[4], v[5], v[6]],
            velocity: [v[7], v[8], v[9]],
        });
    }
    Ok(records)
}

/// Render an estimates stream.
pub fn render_estimates_csv(records: &[EstimateRecord]) -> String {
    let mut out = String::from(ESTIMATES_HEADER);
    out.push('\n');
    for r in records {
        let row = [
            r.t,
            r.attitude[0],
            r.attitude[1],
            r.attitude[2],
            r.position[0],
            r.position[1],
            r.position[2],
            r.velocity[0],
            r.velocity[1],
            r.velocity[2],
        ];
        out.push_str(&row.map(fmt).join(","));
        out.push(',');
        out.push_str(r.source.as_str());
        out.push('\n');
    }
    out
}

/// Parse an estimates stream.
pub fn parse_estimates_csv(text: &str) -> Result<Vec<EstimateRecord>, CsvError> {
    check_header(text, ESTIMATES_HEADER)?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(1) {
        let line = idx + 1;
        let f = fields(raw, 11, line)?;
        let v: Vec<f64> = f[..10]
            .iter()
            .zip(ESTIMATES_HEADER.split(','))
            .map(|(field, name)| parse_field(field, line, name))
            .collect::<Result<_, _>>()?;
        let source = match f[10] {
            "ERKF_UPDATE" => Source::ErkfUpdate,
            "INS_PROPAGATED" => Source::InsPropagated,
            other => {
                return Err(CsvError::Parse {
                    line,
                    msg: format!("unknown source tag {other:?}"),
                })
            }
        };
        records.push(EstimateRecord {
            t: v[0],
            attitude: [v[1], v[2], v[3]],
            position: [v[4], v[5], v[6]],
            velocity: [v[7], v[8], v[9]],
            source,
        });
    }
    Ok(records)
}

/// Render a backend-comparison table.
pub fn render_compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&fmt(r.t));
        out.push(',');
        out.push_str(r.system);
        for v in [
            r.smax_givens,
            r.smax_inv,
            r.smin_givens,
            r.smin_inv,
            r.dmax,
            r.dmin,
        ] {
            out.push(',');
            out.push_str(&fmt(v));
        }
        out.push('\n');
    }
    out
}

/// Write a file atomically: a temporary sibling is written, flushed, and
/// renamed over the destination, so readers never observe a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), std::io::Error> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Read and parse an IMU stream file.
pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>, CsvError> {
    parse_imu_csv(&std::fs::read_to_string(path)?)
}

/// Read and parse a GPS stream file.
pub fn read_gps_csv(path: &Path) -> Result<Vec<GpsSample>, CsvError> {
    parse_gps_csv(&std::fs::read_to_string(path)?)
}

/// Read and parse a ground-truth stream file.
pub fn read_truth_csv(path: &Path) -> Result<Vec<TruthRecord>, CsvError> {
    parse_truth_csv(&std::fs::read_to_string(path)?)
}
