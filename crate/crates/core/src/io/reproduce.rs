//! Verifier comparing the simulator's output for the built-in scenario
//! against the published step-by-step values.

use serde::{Deserialize, Serialize};

use crate::scenario::paper_scenario;
use crate::tipping::detect_flips;
use crate::Result;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// (position, from label, to label).
pub type FlipTriple = (usize, String, String);

/// One scalar comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub tolerance: f64,
    pub checks: Vec<ValueCheck>,
    pub expected_sequence: Vec<String>,
    pub actual_sequence: Vec<String>,
    pub sequence_ok: bool,
    pub expected_flips: Vec<FlipTriple>,
    pub actual_flips: Vec<FlipTriple>,
    pub flips_ok: bool,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.sequence_ok && self.flips_ok
    }

    /// Human-readable per-value diff table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "reproduction check (tolerance {:e})\n",
            self.tolerance
        ));
        out.push_str(&format!(
            "{:<26} {:>12} {:>12} {:>10}  result\n",
            "quantity", "expected", "actual", "|diff|"
        ));
        for check in &self.checks {
            out.push_str(&format!(
                "{:<26} {:>12.6} {:>12.6} {:>10.2e}  {}\n",
                check.name,
                check.expected,
                check.actual,
                (check.expected - check.actual).abs(),
                if check.pass { "ok" } else { "MISMATCH" }
            ));
        }
        out.push_str(&format!(
            "emitted sequence: expected {}, got {} -> {}\n",
            self.expected_sequence.join(","),
            self.actual_sequence.join(","),
            if self.sequence_ok { "ok" } else { "MISMATCH" }
        ));
        let fmt_flips = |flips: &[FlipTriple]| {
            flips
                .iter()
                .map(|(p, f, t)| format!("({p}, {f}->{t})"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!(
            "tipping points: expected {}, got {} -> {}\n",
            fmt_flips(&self.expected_flips),
            fmt_flips(&self.actual_flips),
            if self.flips_ok { "ok" } else { "MISMATCH" }
        ));
        out.push_str(if self.passed() {
            "RESULT: PASS\n"
        } else {
            "RESULT: FAIL\n"
        });
        out
    }
}

// Published per-step values for the built-in scenario: (step name,
// record index, context components, reported projections).
type ExpectedStep = (&'static str, usize, [f64; 3], &'static [(&'static str, f64)]);

const EXPECTED_STEPS: [ExpectedStep; 4] = [
    (
        "step1",
        0,
        [0.140256, -0.256709, 0.0],
        &[("A", 0.133115), ("B", 0.112205)],
    ),
    (
        "step2",
        1,
        [0.197635, -0.266273, 0.0],
        &[("A", 0.158936), ("B", 0.158108)],
    ),
    (
        "step3",
        2,
        [0.234251, -0.272375, 0.0],
        &[("A", 0.175413), ("B", 0.187401)],
    ),
    (
        "step4",
        8,
        [0.589815, -0.107221, 0.0],
        &[("B", 0.471852), ("D", 0.477223)],
    ),
];

const EXPECTED_SEQUENCE: [&str; 12] = [
    "A", "A", "B", "B", "B", "B", "B", "B", "D", "D", "D", "D",
];

/// Runs the built-in scenario and compares every published figure within
/// `tolerance`. Self-contained: no input files, no randomness.
pub fn reproduce_paper(tolerance: f64) -> Result<ReproductionReport> {
    let scenario = paper_scenario();
    let trajectory = scenario.run()?;

    let mut checks = Vec::new();
    for (step, record_idx, context, projections) in EXPECTED_STEPS {
        let record = &trajectory.records[record_idx];
        for (axis, &expected) in context.iter().enumerate() {
            let actual = record.context.components()[axis];
            checks.push(ValueCheck {
                name: format!("{step} context[{axis}]"),
                expected,
                actual,
                pass: (expected - actual).abs() <= tolerance,
            });
        }
        for &(label, expected) in projections {
            let actual = record
                .projections_onto
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, p)| *p)
                .expect("label present in projections");
            checks.push(ValueCheck {
                name: format!("{step} N.S_{label}"),
                expected,
                actual,
                pass: (expected - actual).abs() <= tolerance,
            });
        }
    }

    let actual_sequence: Vec<String> =
        trajectory.emitted().iter().map(|s| s.to_string()).collect();
    let expected_sequence: Vec<String> =
        EXPECTED_SEQUENCE.iter().map(|s| s.to_string()).collect();
    let sequence_ok = actual_sequence == expected_sequence;

    let expected_flips = vec![
        (7usize, "A".to_string(), "B".to_string()),
        (13usize, "B".to_string(), "D".to_string()),
    ];
    let actual_flips: Vec<FlipTriple> = detect_flips(&trajectory)?
        .into_iter()
        .map(|f| (f.position, f.from_label, f.to_label))
        .collect();
    let flips_ok = actual_flips == expected_flips;

    Ok(ReproductionReport {
        tolerance,
        checks,
        expected_sequence,
        actual_sequence,
        sequence_ok,
        expected_flips,
        actual_flips,
        flips_ok,
    })
}
