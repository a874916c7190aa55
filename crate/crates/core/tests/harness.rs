use proptest::prelude::*;
use rankpa::figures::{reproduce, FigureId, FigureRequest};
use rankpa::harness::{
    classify_hub, compare, detect_jump, diagnose, estimate_limit, DiagnosisSettings, HubClass,
    LimitEstimate,
};
use rankpa::model::{uniform_grid, CheckpointSchedule};
use rankpa::phase::{analysis_grid, condensation_predict};
use rankpa::roots::BranchClass;
use rankpa::{run, ChoiceVector, ModelConfig};

fn mid3() -> ChoiceVector {
    ChoiceVector::basis(2, 3).unwrap()
}

proptest! {
    #[test]
    fn jump_detection_is_shift_equivariant(cell in 20usize..150, shift in 0usize..40, height in 0.15f64..0.8) {
        let grid = uniform_grid(201);
        let curve = |at: usize| -> Vec<f64> {
            (0..201).map(|j| (1.0 - height) * grid[j] + if j >= at { height } else { 0.0 }).collect()
        };
        let base = LimitEstimate::from_curve(0.0, mid3(), grid.clone(), curve(cell));
        let moved = LimitEstimate::from_curve(0.0, mid3(), grid.clone(), curve(cell + shift));
        let a = detect_jump(&base, 0.1).unwrap();
        let b = detect_jump(&moved, 0.1).unwrap();
        prop_assert_eq!(b.cell, a.cell + shift);
        prop_assert_eq!(b.location, grid[cell + shift]);
    }

    #[test]
    fn short_trajectories_are_undecided(steps in 0u64..40, seed in 0u64..100) {
        let mut c = ModelConfig::new(mid3(), -0.8, steps, seed);
        c.checkpoints = CheckpointSchedule::Explicit(vec![]);
        let t = run(&c).unwrap();
        prop_assert!(t.rows.len() < 6);
        let settings = DiagnosisSettings::default();
        let jump = rankpa::harness::Jump { location: 0.5, size: 0.5, cell: 100 };
        prop_assert_eq!(classify_hub(&t, Some(&jump), &settings), HubClass::Undecided);
    }
}

#[test]
fn comparison_never_assigns_unstable_branches() {
    let alpha = -0.75;
    let report = condensation_predict(alpha, &mid3(), &analysis_grid(1000)).unwrap();
    let unstable: Vec<&str> = report
        .branches
        .iter()
        .filter(|b| b.class == BranchClass::Unstable)
        .map(|b| b.label.as_str())
        .collect();
    let t = run(&ModelConfig::new(mid3(), alpha, 50_000, 8)).unwrap();
    let c = compare(&estimate_limit(&t).unwrap(), &report).unwrap();
    for p in &c.points {
        if let Some(label) = &p.branch {
            assert!(!unstable.contains(&label.as_str()));
        }
    }
}

#[test]
fn diagnosis_invariants() {
    let settings = DiagnosisSettings::default();
    for (alpha, seed) in [(0.0, 1), (-0.75, 2), (-0.9, 3)] {
        let t = run(&ModelConfig::new(mid3(), alpha, 40_000, seed)).unwrap();
        let d = diagnose(&t, None, &settings).unwrap();
        assert!((0.0..=1.0).contains(&d.jump_size));
        if !d.jump_detected {
            assert_ne!(d.hub, HubClass::PersistentHub);
            assert!(d.jumps.is_empty());
        }
    }
}

#[test]
fn figures_write_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let roots = reproduce(&FigureRequest::new(FigureId::Mid3Roots), &dir.path().join("roots")).unwrap();
    let lo = roots.thresholds["window_lo"];
    assert!((lo - (9.0 - 6f64.sqrt()) / 18.0).abs() < 1e-12);
    let mut branches = csv::Reader::from_path(dir.path().join("roots/branches.csv")).unwrap();
    let psi2 = branches
        .records()
        .map(|r| r.unwrap())
        .find(|r| &r[0] == "psi2")
        .unwrap();
    let start: f64 = psi2[2].parse().unwrap();
    let end: f64 = psi2[3].parse().unwrap();
    assert!((start - (9.0 - 6f64.sqrt()) / 18.0).abs() < 1e-8);
    assert!((end - (9.0 + 6f64.sqrt()) / 18.0).abs() < 1e-8);

    let eigen = reproduce(&FigureRequest::new(FigureId::EigenPlot), &dir.path().join("eigen")).unwrap();
    assert_eq!(eigen.files.len(), 3);
    assert!(eigen.runs.is_empty());

    let mut sims = FigureRequest::new(FigureId::Sec6At85);
    sims.steps = 5_000;
    sims.seeds = vec![1, 2];
    let m = reproduce(&sims, &dir.path().join("sims")).unwrap();
    assert_eq!(m.runs.len(), 2);
    assert!(dir.path().join("sims/trajectory_seed2.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("sims/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["figure"], "sec6-85");
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 2);
}
