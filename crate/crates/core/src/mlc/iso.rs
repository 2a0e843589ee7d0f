//! Vibration severity zones by machine class.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Velocity RMS rows of the severity chart, mm/s.
pub const SEVERITY_CHART_MM_S: [f64; 12] = [
    0.28, 0.45, 0.71, 1.12, 1.80, 2.80, 4.50, 7.71, 11.20, 18.00, 28.00, 45.90,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Good,
    Satisfactory,
    Unsatisfactory,
    Unacceptable,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Good,
        Severity::Satisfactory,
        Severity::Unsatisfactory,
        Severity::Unacceptable,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Good => "Good",
            Severity::Satisfactory => "Satisfactory",
            Severity::Unsatisfactory => "Unsatisfactory",
            Severity::Unacceptable => "Unacceptable",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = Error;

    /// Accepts the plain name, optionally wrapped in single or double quotes.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_matches(|c| c == '\'' || c == '"');
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownSeverity(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MachineClass {
    I,
    II,
    III,
    IV,
}

impl MachineClass {
    pub const ALL: [MachineClass; 4] = [
        MachineClass::I,
        MachineClass::II,
        MachineClass::III,
        MachineClass::IV,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for MachineClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(MachineClass::I),
            "II" | "2" => Ok(MachineClass::II),
            "III" | "3" => Ok(MachineClass::III),
            "IV" | "4" => Ok(MachineClass::IV),
            other => Err(Error::invalid(format!("unknown machine class `{other}`"))),
        }
    }
}

/// Chart rows plus, per machine class, the rows where Satisfactory,
/// Unsatisfactory and Unacceptable begin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityChart {
    pub rows_mm_s: Vec<f64>,
    pub zone_starts: [[usize; 3]; 4],
}

impl Default for SeverityChart {
    /// Class I zones start at 1.80, 4.50 and 11.20 mm/s; each larger class
    /// moves all three boundaries one row further up.
    fn default() -> Self {
        Self {
            rows_mm_s: SEVERITY_CHART_MM_S.to_vec(),
            zone_starts: [[4, 6, 8], [5, 7, 9], [6, 8, 10], [7, 9, 11]],
        }
    }
}

impl SeverityChart {
    pub fn validate(&self) -> Result<()> {
        if self.rows_mm_s.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(
                "severity chart rows must be strictly increasing",
            ));
        }
        for starts in &self.zone_starts {
            if starts.iter().any(|&r| r >= self.rows_mm_s.len())
                || !(starts[0] < starts[1] && starts[1] < starts[2])
            {
                return Err(Error::invalid("zone starts must be increasing row indices"));
            }
        }
        Ok(())
    }

    /// Lower boundaries (inclusive) of Satisfactory, Unsatisfactory and Unacceptable.
    pub fn boundaries(&self, class: MachineClass) -> [f64; 3] {
        self.zone_starts[class.index()].map(|r| self.rows_mm_s[r])
    }

    pub fn lookup(&self, v_rms_mm_s: f64, class: MachineClass) -> Result<Severity> {
        if !(v_rms_mm_s >= 0.0) || !v_rms_mm_s.is_finite() {
            return Err(Error::invalid(format!(
                "velocity must be finite and >= 0, got {v_rms_mm_s}"
            )));
        }
        let [s, u, x] = self.boundaries(class);
        Ok(if v_rms_mm_s >= x {
            Severity::Unacceptable
        } else if v_rms_mm_s >= u {
            Severity::Unsatisfactory
        } else if v_rms_mm_s >= s {
            Severity::Satisfactory
        } else {
            Severity::Good
        })
    }
}

/// Severity zone of a velocity RMS value under the default chart.
pub fn iso_severity_lookup(v_rms_mm_s: f64, class: MachineClass) -> Result<Severity> {
    SeverityChart::default().lookup(v_rms_mm_s, class)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_one_zones() {
        assert_eq!(
            iso_severity_lookup(1.0, MachineClass::I).unwrap(),
            Severity::Good
        );
        assert_eq!(
            iso_severity_lookup(1.80, MachineClass::I).unwrap(),
            Severity::Satisfactory
        );
        assert_eq!(
            iso_severity_lookup(4.50, MachineClass::I).unwrap(),
            Severity::Unsatisfactory
        );
        assert_eq!(
            iso_severity_lookup(4.49, MachineClass::I).unwrap(),
            Severity::Satisfactory
        );
        assert_eq!(
            iso_severity_lookup(11.20, MachineClass::I).unwrap(),
            Severity::Unacceptable
        );
    }

    #[test]
    fn zero_is_good_everywhere() {
        for c in MachineClass::ALL {
            assert_eq!(iso_severity_lookup(0.0, c).unwrap(), Severity::Good);
        }
    }

    #[test]
    fn larger_classes_shift_up() {
        let chart = SeverityChart::default();
        assert_eq!(chart.boundaries(MachineClass::II), [2.80, 7.71, 18.00]);
        assert_eq!(chart.boundaries(MachineClass::IV), [7.71, 18.00, 45.90]);
        assert_eq!(
            iso_severity_lookup(2.0, MachineClass::II).unwrap(),
            Severity::Good
        );
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(iso_severity_lookup(-0.1, MachineClass::I).is_err());
        assert!(iso_severity_lookup(f64::NAN, MachineClass::I).is_err());
    }

    #[test]
    fn parse_severity_text() {
        assert_eq!("Good".parse::<Severity>().unwrap(), Severity::Good);
        assert_eq!("'Good'".parse::<Severity>().unwrap(), Severity::Good);
        assert_eq!(
            "unacceptable".parse::<Severity>().unwrap(),
            Severity::Unacceptable
        );
        assert!(matches!(
            "Fine".parse::<Severity>(),
            Err(Error::UnknownSeverity(_))
        ));
    }
}
