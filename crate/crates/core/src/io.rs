//! JSON and CSV formats.

use serde::{Deserialize, Serialize};

use crate::battery::BatteryScenario;
use crate::error::{Error, Result};
use crate::instance::{QrapNcInstance, RawInstance, Solution};

pub fn parse_instance(text: &str) -> Result<QrapNcInstance> {
    let raw: RawInstance = serde_json::from_str(text)?;
    QrapNcInstance::validate(&raw)
}

pub fn instance_to_json(inst: &QrapNcInstance) -> Result<String> {
    Ok(serde_json::to_string(&inst.to_raw())?)
}

pub fn parse_scenario(text: &str) -> Result<BatteryScenario> {
    let scn: BatteryScenario = serde_json::from_str(text)?;
    scn.validate()?;
    Ok(scn)
}

/// Wire form of a solution. Multipliers are present when the solver kept a
/// trace; the instance is embedded so that a solution can be verified alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub x: Vec<f64>,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<RawInstance>,
}

impl SolutionDoc {
    pub fn new(sol: &Solution, with_trace: bool, inst: Option<&QrapNcInstance>) -> Self {
        let trace = sol.trace.as_ref().filter(|_| with_trace);
        SolutionDoc {
            x: sol.x.clone(),
            objective: sol.objective,
            kappa: trace.map(|t| t.kappa.clone()),
            lambda: trace.map(|t| t.lambda.clone()),
            chi: trace.map(|t| t.chi.clone()),
            instance: inst.map(QrapNcInstance::to_raw),
        }
    }

    /// The embedded instance, validated.
    pub fn instance(&self) -> Result<Option<QrapNcInstance>> {
        self.instance.as_ref().map(QrapNcInstance::validate).transpose()
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionDoc> {
    let doc: SolutionDoc = serde_json::from_str(text)?;
    if let Some(i) = doc.x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format(format!("x[{i}] not finite")));
    }
    Ok(doc)
}

/// One power value per line. A first line that is not a number is taken as a
/// header; blank lines are skipped.
pub fn parse_profile(text: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(k + 1, |p| p.line() as usize);
        if row.len() != 1 {
            return Err(Error::Format(format!("profile line {line}: expected one value, got {}", row.len())));
        }
        let field = row[0].trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(Error::Format(format!("profile line {line}: value not finite"))),
            Err(_) if k == 0 => {}
            Err(_) => return Err(Error::Format(format!("profile line {line}: {field:?} is not a number"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Format("profile has no values".into()));
    }
    Ok(out)
}
