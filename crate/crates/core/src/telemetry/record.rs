//! One telemetry row and its CSV form.

use serde::{Deserialize, Serialize};

use super::TelemetryError;
use crate::fsm::FlightPhase;
use crate::{EulerAngles, PidTerms, Quaternion, Vec3};

/// Column names, in file order.
pub const HEADER: [&str; 30] = [
    "t_s",
    "phase",
    "gyro_x_rps",
    "gyro_y_rps",
    "gyro_z_rps",
    "q_w",
    "q_x",
    "q_y",
    "q_z",
    "yaw_deg",
    "pitch_deg",
    "roll_deg",
    "tilt_deg",
    "gimbal_pitch_deg",
    "gimbal_yaw_deg",
    "servo_pitch_deg",
    "servo_yaw_deg",
    "thrust_n",
    "pitch_p",
    "pitch_i",
    "pitch_d",
    "yaw_p",
    "yaw_i",
    "yaw_d",
    "pos_x_m",
    "pos_y_m",
    "pos_z_m",
    "vel_x_mps",
    "vel_y_mps",
    "vel_z_mps",
];

/// Decimal places written for every real column.
pub const DECIMALS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t_s: f64,
    pub phase: FlightPhase,
    /// Raw gyro reading, bias and noise included.
    pub gyro_rps: Vec3,
    pub attitude: Quaternion,
    pub euler: EulerAngles,
    pub tilt_deg: f64,
    pub gimbal_pitch_deg: f64,
    pub gimbal_yaw_deg: f64,
    pub servo_pitch_deg: f64,
    pub servo_yaw_deg: f64,
    pub thrust_n: f64,
    pub pitch_terms: PidTerms,
    pub yaw_terms: PidTerms,
    pub position_m: Vec3,
    pub velocity_mps: Vec3,
}

impl LogRecord {
    fn reals(&self) -> [f64; 29] {
        let (g, q, e) = (self.gyro_rps, self.attitude, self.euler);
        let (p, y) = (self.pitch_terms, self.yaw_terms);
        let (r, v) = (self.position_m, self.velocity_mps);
        [
            self.t_s,
            g.x,
            g.y,
            g.z,
            q.w,
            q.x,
            q.y,
            q.z,
            e.yaw_deg,
            e.pitch_deg,
            e.roll_deg,
            self.tilt_deg,
            self.gimbal_pitch_deg,
            self.gimbal_yaw_deg,
            self.servo_pitch_deg,
            self.servo_yaw_deg,
            self.thrust_n,
            p.p,
            p.i,
            p.d,
            y.p,
            y.i,
            y.d,
            r.x,
            r.y,
            r.z,
            v.x,
            v.y,
            v.z,
        ]
    }

    fn from_reals(phase: FlightPhase, f: [f64; 29]) -> Self {
        Self {
            t_s: f[0],
            phase,
            gyro_rps: Vec3::new(f[1], f[2], f[3]),
            attitude: Quaternion::new(f[4], f[5], f[6], f[7]),
            euler: EulerAngles::new(f[8], f[9], f[10]),
            tilt_deg: f[11],
            gimbal_pitch_deg: f[12],
            gimbal_yaw_deg: f[13],
            servo_pitch_deg: f[14],
            servo_yaw_deg: f[15],
            thrust_n: f[16],
            pitch_terms: PidTerms {
                p: f[17],
                i: f[18],
                d: f[19],
            },
            yaw_terms: PidTerms {
                p: f[20],
                i: f[21],
                d: f[22],
            },
            position_m: Vec3::new(f[23], f[24], f[25]),
            velocity_mps: Vec3::new(f[26], f[27], f[28]),
        }
    }

    /// Value of a column by header name.
    pub fn column(&self, name: &str) -> Option<f64> {
        match HEADER.iter().position(|h| *h == name)? {
            0 => Some(self.t_s),
            1 => None,
            i => Some(self.reals()[i - 1]),
        }
    }
}

pub fn header_line() -> String {
    HEADER.join(",")
}

pub fn format_record(rec: &LogRecord) -> String {
    let reals = rec.reals();
    let mut out = format!("{:.*},{}", DECIMALS, reals[0], rec.phase.name());
    for v in &reals[1..] {
        out.push(',');
        out.push_str(&format!("{:.*}", DECIMALS, v));
    }
    out
}

/// Parses one data line; `line` is the 1-based line number used in errors.
pub fn parse_record(text: &str, line: usize) -> Result<LogRecord, TelemetryError> {
    let fields: Vec<&str> = text.trim_end_matches(['\r', '\n']).split(',').collect();
    if fields.len() != HEADER.len() {
        return Err(TelemetryError::ColumnCountMismatch {
            line,
            expected: HEADER.len(),
            found: fields.len(),
        });
    }
    let phase = fields[1]
        .trim()
        .parse::<FlightPhase>()
        .map_err(|_| TelemetryError::UnparsableField {
            line,
            column: HEADER[1],
        })?;
    let mut reals = [0.0; 29];
    for (k, slot) in reals.iter_mut().enumerate() {
        let col = if k == 0 { 0 } else { k + 1 };
        *slot = fields[col]
            .trim()
            .parse::<f64>()
            .map_err(|_| TelemetryError::UnparsableField {
                line,
                column: HEADER[col],
            })?;
    }
    Ok(LogRecord::from_reals(phase, reals))
}

/// Checks a header line against [`HEADER`].
pub fn check_header(text: &str) -> Result<(), TelemetryError> {
    let names: Vec<&str> = text.trim_end_matches(['\r', '\n']).split(',').collect();
    if names.len() != HEADER.len() {
        return Err(TelemetryError::ColumnCountMismatch {
            line: 1,
            expected: HEADER.len(),
            found: names.len(),
        });
    }
    match names.iter().zip(HEADER).position(|(a, b)| a.trim() != b) {
        Some(i) => Err(TelemetryError::HeaderMismatch {
            column: i + 1,
            found: names[i].to_string(),
        }),
        None => Ok(()),
    }
}

/// An ordered list of records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlightLog {
    pub records: Vec<LogRecord>,
}

impl FlightLog {
    /// Appends a record; time must strictly increase.
    pub fn push(&mut self, rec: LogRecord) -> Result<(), TelemetryError> {
        if let Some(last) = self.records.last() {
            if !(rec.t_s > last.t_s) {
                return Err(TelemetryError::NonMonotonicTime {
                    line: self.records.len() + 2,
                    t_s: rec.t_s,
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = header_line();
        out.push('\n');
        for r in &self.records {
            out.push_str(&format_record(r));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, TelemetryError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(TelemetryError::MissingHeader)?;
        check_header(header)?;
        let mut log = FlightLog::default();
        for (i, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let rec = parse_record(l, i + 1)?;
            if let Some(last) = log.records.last() {
                if !(rec.t_s > last.t_s) {
                    return Err(TelemetryError::NonMonotonicTime {
                        line: i + 1,
                        t_s: rec.t_s,
                    });
                }
            }
            log.records.push(rec);
        }
        Ok(log)
    }

    /// The log as it reads back from disk.
    pub fn quantized(&self) -> Self {
        Self::parse_csv(&self.to_csv()).expect("formatted log parses")
    }
}
