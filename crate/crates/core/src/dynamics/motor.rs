//! RASP `.eng` motor files and piecewise-linear thrust curves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotorError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: malformed thrust point")]
    MalformedPoint { line: usize },
    #[error("line {line}: time {t_s} does not increase")]
    NonMonotonicTime { line: usize, t_s: f64 },
    #[error("line {line}: negative thrust {thrust_n}")]
    NegativeThrust { line: usize, thrust_n: f64 },
    #[error("thrust curve does not end at zero thrust")]
    MissingZeroTerminator,
    #[error("motor file has no header")]
    Empty,
    #[error("invalid motor masses: {0}")]
    InvalidMass(String),
}

/// Time-ordered `(t_s, thrust_N)` samples, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustCurve {
    samples: Vec<(f64, f64)>,
}

impl ThrustCurve {
    /// Validates strictly increasing times, non-negative thrust and a zero final sample.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, MotorError> {
        Self::checked(samples.into_iter().enumerate().map(|(i, p)| (i + 1, p)))
    }

    fn checked(points: impl Iterator<Item = (usize, (f64, f64))>) -> Result<Self, MotorError> {
        let mut samples: Vec<(f64, f64)> = Vec::new();
        for (line, (t, f)) in points {
            if !t.is_finite() || !f.is_finite() {
                return Err(MotorError::MalformedPoint { line });
            }
            if samples.last().is_some_and(|&(prev, _)| t <= prev) || t < 0.0 {
                return Err(MotorError::NonMonotonicTime { line, t_s: t });
            }
            if f < 0.0 {
                return Err(MotorError::NegativeThrust { line, thrust_n: f });
            }
            samples.push((t, f));
        }
        match samples.last() {
            Some(&(_, 0.0)) => Ok(Self { samples }),
            _ => Err(MotorError::MissingZeroTerminator),
        }
    }

    /// Constant thrust for `duration_s`, then zero. Not a physical motor; used for test rigs.
    pub fn constant(thrust_n: f64, duration_s: f64) -> Self {
        Self {
            samples: vec![(0.0, thrust_n), (duration_s, thrust_n), (duration_s + 1e-3, 0.0)],
        }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Interpolation nodes including the implicit `(0, 0)` origin.
    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let origin = (self.samples[0].0 > 0.0).then_some((0.0, 0.0));
        origin.into_iter().chain(self.samples.iter().copied())
    }

    pub fn thrust_at(&self, t_s: f64) -> f64 {
        if t_s < 0.0 {
            return 0.0;
        }
        let mut prev: Option<(f64, f64)> = None;
        for (t, f) in self.nodes() {
            if t_s <= t {
                return match prev {
                    Some((t0, f0)) => f0 + (f - f0) * (t_s - t0) / (t - t0),
                    None => f,
                };
            }
            prev = Some((t, f));
        }
        0.0
    }

    /// Exact integral of the interpolant over `[0, t_s]` (trapezoid per segment).
    pub fn impulse_until(&self, t_s: f64) -> f64 {
        let mut total = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (t, f) in self.nodes() {
            if let Some((t0, f0)) = prev {
                if t_s <= t0 {
                    break;
                }
                if t_s < t {
                    let f_end = f0 + (f - f0) * (t_s - t0) / (t - t0);
                    return total + 0.5 * (f0 + f_end) * (t_s - t0);
                }
                total += 0.5 * (f0 + f) * (t - t0);
            }
            prev = Some((t, f));
        }
        total
    }

    pub fn total_impulse(&self) -> f64 {
        self.impulse_until(self.burn_time_s())
    }

    pub fn burn_time_s(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }

    pub fn peak_thrust_n(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.1))
    }

    /// Time of the first sample at peak thrust.
    pub fn peak_time_s(&self) -> f64 {
        let peak = self.peak_thrust_n();
        self.samples
            .iter()
            .find(|s| s.1 == peak)
            .map_or(0.0, |s| s.0)
    }

    pub fn average_thrust_n(&self) -> f64 {
        let burn = self.burn_time_s();
        if burn > 0.0 {
            self.total_impulse() / burn
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorModel {
    pub designation: String,
    pub diameter_mm: f64,
    pub length_mm: f64,
    /// Ejection delays, seconds; empty for plugged motors.
    pub delays: Vec<u32>,
    pub propellant_mass_kg: f64,
    pub total_mass_kg: f64,
    pub manufacturer: String,
    pub curve: ThrustCurve,
}

impl MotorModel {
    pub fn thrust_at(&self, t_s: f64) -> f64 {
        self.curve.thrust_at(t_s)
    }

    /// Fraction of total impulse delivered by `t_s`, in [0, 1].
    pub fn burned_fraction(&self, t_s: f64) -> f64 {
        let total = self.curve.total_impulse();
        if total > 0.0 {
            (self.curve.impulse_until(t_s) / total).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Motor mass with propellant consumed in proportion to delivered impulse.
    pub fn mass_at(&self, t_s: f64) -> f64 {
        self.total_mass_kg - self.propellant_mass_kg * self.burned_fraction(t_s)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split(';').next().unwrap_or("").trim()
}

fn parse_delays(field: &str, line: usize) -> Result<Vec<u32>, MotorError> {
    // "P" marks a plugged motor
    if field.eq_ignore_ascii_case("p") {
        return Ok(Vec::new());
    }
    field
        .split('-')
        .map(|d| {
            d.parse::<u32>().map_err(|_| MotorError::MalformedHeader {
                line,
                reason: format!("bad delay list {field:?}"),
            })
        })
        .collect()
}

/// Parses a RASP `.eng` motor file.
///
/// Lines beginning with `;` are comments. The first other line is the header
/// `name diameter_mm length_mm delays prop_mass_kg total_mass_kg manufacturer`; every
/// following line is a `t thrust` pair.
pub fn parse_eng(text: &str) -> Result<MotorModel, MotorError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(MotorError::Empty)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 7 {
        return Err(MotorError::MalformedHeader {
            line: hline,
            reason: format!("expected 7 fields, found {}", fields.len()),
        });
    }
    let num = |i: usize, what: &str| -> Result<f64, MotorError> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| MotorError::MalformedHeader {
                line: hline,
                reason: format!("bad {what} {:?}", fields[i]),
            })
    };
    let diameter_mm = num(1, "diameter")?;
    let length_mm = num(2, "length")?;
    let delays = parse_delays(fields[3], hline)?;
    let propellant_mass_kg = num(4, "propellant mass")?;
    let total_mass_kg = num(5, "total mass")?;
    let manufacturer = fields[6..].join(" ");

    let mut points = Vec::new();
    for (line, l) in lines {
        let mut it = l.split_whitespace().map(str::parse::<f64>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(t)), Some(Ok(f)), None) => points.push((line, (t, f))),
            _ => return Err(MotorError::MalformedPoint { line }),
        }
    }
    let curve = ThrustCurve::checked(points.into_iter())?;

    if !(propellant_mass_kg > 0.0 && total_mass_kg > 0.0) {
        return Err(MotorError::InvalidMass("masses must be positive".into()));
    }
    if propellant_mass_kg > total_mass_kg {
        return Err(MotorError::InvalidMass(
            "propellant mass exceeds total mass".into(),
        ));
    }
    Ok(MotorModel {
        designation: fields[0].to_string(),
        diameter_mm,
        length_mm,
        delays,
        propellant_mass_kg,
        total_mass_kg,
        manufacturer,
        curve,
    })
}

/// Writes a motor back out in `.eng` form.
pub fn format_eng(m: &MotorModel) -> String {
    let delays = if m.delays.is_empty() {
        "P".to_string()
    } else {
        m.delays
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join("-")
    };
    let mut out = format!(
        "{} {} {} {} {} {} {}\n",
        m.designation,
        m.diameter_mm,
        m.length_mm,
        delays,
        m.propellant_mass_kg,
        m.total_mass_kg,
        m.manufacturer
    );
    for (t, f) in m.curve.samples() {
        out.push_str(&format!("{t} {f}\n"));
    }
    out
}
