//! Frozen-layout check for the aligned text table. The fixture under
//! `golden/` was produced from the pinned rows below and reviewed by eye
//! once; any layout drift is a deliberate, visible change to this file.

use overlap_cli::emit_report;
use overlap_core::analysis::{OverlapCurve, PartitionReport};

fn pinned_reports() -> Vec<PartitionReport> {
    vec![
        // A full row: both subsets populated, test significant.
        PartitionReport {
            model_name: "alpha".to_string(),
            cutoff: 0.0,
            overlap_size: 53,
            nonoverlap_size: 220,
            overlap_acc: Some(0.7924528301886793),
            nonoverlap_acc: Some(0.6954545454545454),
            overall_acc: 0.7142857142857143,
            perf_diff: Some(0.09699828473413391),
            chi2: Some(5.333333333333333),
            p_value: Some(0.020921335337794226),
            significant: Some(true),
        },
        // A row with a borderline, non-significant test.
        PartitionReport {
            model_name: "alpha".to_string(),
            cutoff: 25.0,
            overlap_size: 12,
            nonoverlap_size: 261,
            overlap_acc: Some(0.5),
            nonoverlap_acc: Some(0.7203065134099617),
            overall_acc: 0.7106227106227107,
            perf_diff: Some(-0.2203065134099617),
            chi2: Some(2.25),
            p_value: Some(0.13361440253771617),
            significant: Some(false),
        },
        // An empty overlapping subset: no accuracy, no test.
        PartitionReport {
            model_name: "alpha".to_string(),
            cutoff: 35.0,
            overlap_size: 0,
            nonoverlap_size: 273,
            overlap_acc: None,
            nonoverlap_acc: Some(0.7142857142857143),
            overall_acc: 0.7142857142857143,
            perf_diff: None,
            chi2: None,
            p_value: None,
            significant: None,
        },
        // A long model name stretches the first column.
        PartitionReport {
            model_name: "baseline-uncased-large".to_string(),
            cutoff: 0.0,
            overlap_size: 200,
            nonoverlap_size: 73,
            overlap_acc: Some(1.0),
            nonoverlap_acc: Some(0.0),
            overall_acc: 0.7326007326007326,
            perf_diff: Some(1.0),
            chi2: Some(273.0),
            p_value: Some(0.0),
            significant: Some(true),
        },
    ]
}

#[test]
fn aligned_table_layout_is_frozen() {
    let curve = OverlapCurve {
        points: vec![(0.0, 0.194), (25.0, 0.044), (35.0, 0.0)],
    };
    let dir = tempfile::tempdir().unwrap();
    emit_report(&pinned_reports(), &curve, dir.path()).unwrap();
    let got = std::fs::read_to_string(dir.path().join("tables.txt")).unwrap();
    let want = include_str!("golden/tables.txt");
    assert_eq!(
        got, want,
        "tables.txt layout drifted from the frozen fixture"
    );
}
