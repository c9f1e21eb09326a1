//! Serialized reports produced by the `cmetric` binary.

use serde::{Deserialize, Serialize};

use crate::contraction::{ContractionCertificate, NestingReport};
use crate::domains::CPoint;
use crate::fixed_point::FixedPointResult;

/// Header of [`emit_csv`].
pub const CSV_HEADER: &str = "config,r,M,k,max_violation,pairs";

/// Shortest decimal that round-trips to the same `f64` (at most 17
/// significant digits).
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config: String,
    /// Radii of the inner domain's coordinate disks.
    pub r: Vec<f64>,
    #[serde(rename = "M")]
    pub m: f64,
    pub k: f64,
    pub max_violation: f64,
    pub pairs: usize,
}

/// Every report carries the seed and sample count it was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Distance {
        seed: u64,
        samples: usize,
        domain: String,
        x: CPoint,
        y: CPoint,
        value: f64,
    },
    Diameter {
        seed: u64,
        samples: usize,
        certificate: ContractionCertificate,
    },
    VerifyNesting {
        seed: u64,
        samples: usize,
        certificate: ContractionCertificate,
        report: NestingReport,
    },
    Solve {
        seed: u64,
        samples: usize,
        certificate: ContractionCertificate,
        result: FixedPointResult,
    },
    Sweep {
        seed: u64,
        samples: usize,
        rows: Vec<SweepRow>,
    },
}

pub fn emit_json(report: &Report) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("reports contain only finite reals");
    out.push(b'\n');
    out
}

/// CSV rendering of sweep rows: LF line endings, reals via [`fmt_real`],
/// radii joined with `;`.
pub fn emit_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let radii: Vec<String> = row.r.iter().map(|&r| fmt_real(r)).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.config,
            radii.join(";"),
            fmt_real(row.m),
            fmt_real(row.k),
            fmt_real(row.max_violation),
            row.pairs
        ));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(config: &str, r: f64, m: f64, k: f64) -> SweepRow {
        SweepRow {
            config: config.into(),
            r: vec![r],
            m,
            k,
            max_violation: -0.25,
            pairs: 100,
        }
    }

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(emit_csv(&[]), b"config,r,M,k,max_violation,pairs\n");
    }

    #[test]
    fn single_row_formatting() {
        let m = crate::contraction::diameter(
            &crate::Domain::UnitDisk,
            &crate::Domain::scaled_disk(0.5).unwrap(),
            &crate::contraction::DiameterMethod::ClosedForm,
            &Default::default(),
        )
        .unwrap()
        .m;
        let text = String::from_utf8(emit_csv(&[row("r0.5", 0.5, m, 0.8)])).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "r0.5,0.5,1.0986122886681098,0.8,-0.25,100");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![row("a", 0.1, 0.2, 0.19), row("b", 0.3, 0.6, 0.5)];
        assert_eq!(emit_csv(&rows), emit_csv(&rows));
    }

    #[test]
    fn fmt_real_roundtrips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.8] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.chars().filter(char::is_ascii_digit).count();
            assert!(digits <= 17 + 3, "{s}");
        }
    }
}
