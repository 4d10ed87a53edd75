//! Run configuration: parsing of curve/germ specifications, hole-size
//! sweeps, and output format selection for the command-line surface.

use crate::error::{Error, Result};
use crate::geometry::{ClosedCurve, CurveSpec};
use crate::poly::{AnalyticGerm, GermSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Accepts `circle:R`, `ellipse:A:B`, inline JSON, or a path to a JSON file.
pub fn parse_curve_arg(arg: &str) -> Result<ClosedCurve> {
    let trimmed = arg.trim();
    if let Some(rest) = trimmed.strip_prefix("circle:") {
        let r: f64 = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad circle radius {rest:?}")))?;
        return ClosedCurve::circle(r);
    }
    if let Some(rest) = trimmed.strip_prefix("ellipse:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Config("ellipse spec needs ellipse:A:B".into()));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad semi-axis {:?}", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad semi-axis {:?}", parts[1])))?;
        return ClosedCurve::ellipse(a, b);
    }
    let json = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(Path::new(trimmed))?
    };
    let spec: CurveSpec = serde_json::from_str(&json)?;
    ClosedCurve::from_spec(&spec)
}

/// Accepts inline germ JSON (`{"degree": D, "coeffs": [[h, j, value], ...]}`)
/// or a path to a JSON file.
pub fn parse_germ_arg(arg: &str) -> Result<AnalyticGerm> {
    let trimmed = arg.trim();
    let json = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(Path::new(trimmed))?
    };
    let spec: GermSpec = serde_json::from_str(&json)?;
    AnalyticGerm::from_spec(&spec)
}

/// Accepts a comma list `1e-2,1e-3` or a dyadic sweep `dyadic:START:COUNT`
/// (START, START/2, ..., COUNT values).
pub fn parse_eps_arg(arg: &str) -> Result<Vec<f64>> {
    let trimmed = arg.trim();
    if trimmed.is_empty() {
        return Err(Error::Config("empty hole-size list".into()));
    }
    let mut out = Vec::new();
    if let Some(rest) = trimmed.strip_prefix("dyadic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Config(
                "dyadic sweep needs dyadic:START:COUNT".into(),
            ));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep start {:?}", parts[0])))?;
        let count: usize = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep count {:?}", parts[1])))?;
        if !(start > 0.0) || count == 0 {
            return Err(Error::Config(
                "dyadic sweep needs positive start and count".into(),
            ));
        }
        for j in 0..count {
            out.push(start * 0.5f64.powi(j as i32));
        }
    } else {
        for piece in trimmed.split(',') {
            let v: f64 = piece
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad hole size {piece:?}")))?;
            out.push(v);
        }
    }
    if out.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Config("hole sizes must be positive".into()));
    }
    Ok(out)
}

/// Parse an `x,y` point.
pub fn parse_point_arg(arg: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = arg.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("point must be x,y, got {arg:?}")));
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad coordinate {:?}", parts[0])))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad coordinate {:?}", parts[1])))?;
    Ok([x, y])
}

/// Configuration of a capacity sweep.
pub struct CapacityConfig {
    pub omega: ClosedCurve,
    pub hole: ClosedCurve,
    pub germ_a: AnalyticGerm,
    pub germ_b: AnalyticGerm,
    pub eps: Vec<f64>,
    pub nodes: usize,
    pub order: usize,
}

/// Configuration of a splitting prediction.
pub struct PredictConfig {
    pub index: usize,
    /// Alternative mode selection by `K:N:cos|sin` triple.
    pub mode: Option<String>,
    pub hole: ClosedCurve,
    pub x0: [f64; 2],
    pub eps: Vec<f64>,
    pub nodes: usize,
    /// Germ degree used on the eigenfunction side.
    pub degree: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_curve_shortcuts_and_json() {
        assert!(parse_curve_arg("circle:1.0").is_ok());
        assert!(parse_curve_arg("ellipse:1.5:0.7").is_ok());
        let c = parse_curve_arg(r#"{"shape":"circle","radius":2.0}"#).unwrap();
        match c.shape() {
            crate::geometry::ShapeInfo::Circle { radius, .. } => assert_eq!(*radius, 2.0),
            _ => panic!(),
        }
        assert!(parse_curve_arg("circle:-1").is_err());
    }

    #[test]
    fn parses_germs() {
        let g = parse_germ_arg(r#"{"degree":2,"coeffs":[[0,0,1.0],[1,0,0.5]]}"#).unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.value_at_origin(), 1.0);
        assert!(parse_germ_arg(r#"{"degree":1,"coeffs":[[3,0,1.0]]}"#).is_err());
    }

    #[test]
    fn parses_eps_lists() {
        assert_eq!(parse_eps_arg("1e-2, 1e-3").unwrap(), vec![1e-2, 1e-3]);
        let d = parse_eps_arg("dyadic:0.1:3").unwrap();
        assert_eq!(d, vec![0.1, 0.05, 0.025]);
        assert!(parse_eps_arg("").is_err());
        assert!(parse_eps_arg("0,-1").is_err());
    }
}
