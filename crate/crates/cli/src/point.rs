//! Parsing of point arguments.
//!
//! Accepted forms:
//! - `NAME`, a special point of the model such as `origin`;
//! - `CHART:c1,c2,...`, coordinates in a chart;
//! - `chart:CHART;x=c1,c2,...`, the same in long form;
//! - `c1,c2,...` with no chart, a point of the ambient space.
//!
//! Coordinates of complex charts may be written `0.1+0.2i`.

use num_complex::Complex64;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum PointSpec {
    Named(String),
    Chart { chart: String, coords: Vec<String> },
    Ambient(Vec<String>),
}

fn split_coords(s: &str) -> Vec<String> {
    s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()
}

pub fn parse_point(s: &str) -> Result<PointSpec, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CliError::parse("empty point argument"));
    }
    if let Some(rest) = s.strip_prefix("chart:") {
        let (chart, coords) = rest
            .split_once(";x=")
            .ok_or_else(|| CliError::parse(format!("expected chart:NAME;x=COORDS, got {s:?}")))?;
        return Ok(PointSpec::Chart { chart: chart.trim().to_string(), coords: split_coords(coords) });
    }
    if let Some((chart, coords)) = s.split_once(':') {
        return Ok(PointSpec::Chart { chart: chart.trim().to_string(), coords: split_coords(coords) });
    }
    let coords = split_coords(s);
    if coords.iter().all(|c| parse_complex(c).is_ok()) {
        return Ok(PointSpec::Ambient(coords));
    }
    Ok(PointSpec::Named(s.to_string()))
}

pub fn parse_real(s: &str) -> Result<f64, CliError> {
    s.parse::<f64>().map_err(|_| CliError::parse(format!("not a real number: {s:?}")))
}

pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(Complex64::new(v, 0.0));
    }
    s.parse::<Complex64>().map_err(|_| CliError::parse(format!("not a complex number: {s:?}")))
}

pub fn parse_reals(coords: &[String]) -> Result<Vec<f64>, CliError> {
    coords.iter().map(|c| parse_real(c)).collect()
}

pub fn parse_complexes(coords: &[String]) -> Result<Vec<Complex64>, CliError> {
    coords.iter().map(|c| parse_complex(c)).collect()
}

pub fn parse_exponents(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| CliError::parse(format!("bad exponent {t:?} in {s:?}"))))
        .collect()
}
