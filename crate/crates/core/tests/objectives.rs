mod common;

use proptest::prelude::*;
use tartarus_core::mol::parse_smiles;
use tartarus_core::objectives::{
    all_tasks, calibrate, evaluate_task, fit_outlier_envelope, open_circuit_voltage, required_properties,
    scharber_pce, DeviceMode, FrontierEnergies, GapMode, PropertyMap, Quantity, ScharberConfig, Spectrum,
    TaskContext, TaskKind, PENALTY_FITNESS,
};
use tartarus_core::pattern::TpsaMode;

use common::gaussian_points;

fn cfg() -> ScharberConfig {
    ScharberConfig::new(46.0, 2.53, 100.04)
}

fn energies() -> impl Strategy<Value = FrontierEnergies> {
    (-9.0f64..-3.0, 0.2f64..6.0).prop_map(|(homo, gap)| FrontierEnergies::new(homo, homo + gap, 0.0))
}

fn device() -> impl Strategy<Value = DeviceMode> {
    prop_oneof![Just(DeviceMode::DonorPcbm), Just(DeviceMode::AcceptorPcdtbt)]
}

fn props(pairs: &[(&str, f64)]) -> PropertyMap {
    pairs
        .iter()
        .map(|&(n, v)| (n.to_string(), Quantity::catalogued(n, v).unwrap()))
        .collect()
}

/// A molecule that satisfies each task's structural bank.
fn feasible_smiles(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::ReactivityActivation
        | TaskKind::ReactivityReaction
        | TaskKind::ReactivitySum
        | TaskKind::ReactivityDifference => "C1C2C34C5C=CC(C5)C3(C4)C(C2)C1",
        _ => "c1ccc2ccccc2c1",
    }
}

fn feasible_props(task_props: &[&str], draw: &[f64; 8]) -> PropertyMap {
    let mut out = Vec::new();
    for &p in task_props {
        let v = match p {
            "homo_ev" => -5.0 - draw[0],
            "lumo_ev" => -2.5 - draw[1],
            "st_gap_ev" => draw[2],
            "osc_strength" => draw[3],
            "vee_ev" => 1.0 + 4.0 * draw[4],
            "sascore" => 1.0 + 3.4 * draw[5],
            "qed" => 0.31 + 0.69 * draw[6],
            "logp" => 4.9 * draw[7] - 2.0,
            "tpsa" => 141.0 + 60.0 * draw[0],
            "alerts_pass" => 1.0,
            "dE_act_kcal" => 60.0 * draw[1],
            "dE_rxn_kcal" => 80.0 * draw[2] - 40.0,
            _ => -20.0 * draw[3],
        };
        out.push((p, v));
    }
    props(&out)
}

#[test]
fn envelope_flags_about_the_contamination_fraction() {
    let pts = gaussian_points(10_000, 3);
    for c in [0.005, 0.01, 0.05] {
        let env = fit_outlier_envelope(&pts, c).unwrap();
        let flagged = pts.iter().filter(|&&p| env.is_outlier(p)).count() as f64 / pts.len() as f64;
        let sigma = (c * (1.0 - c) / pts.len() as f64).sqrt();
        assert!(flagged <= 2.0 * c + 3.0 * sigma, "c = {c}: {flagged}");
        assert!(!env.is_outlier(env.center));
    }
}

#[test]
fn jsc_integral_falls_with_the_gap() {
    let w: Vec<f64> = (0..=744).map(|i| 280.0 + i as f64 * 5.0).collect();
    let irr: Vec<f64> = w.iter().map(|l| (-(l - 600.0f64).powi(2) / 2.0e5).exp()).collect();
    let s = Spectrum::new(w, irr).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..=300 {
        let j = s.jsc_integral(1.0 + 0.01 * k as f64, 0.65);
        assert!(j <= last && j >= 0.0);
        last = j;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pce_is_never_negative(e in energies(), mode in device(), interface in any::<bool>()) {
        let mut c = cfg();
        if interface {
            c.gap_mode = GapMode::Interface;
        }
        let pce = scharber_pce(&e, mode, &c);
        prop_assert!(pce >= 0.0);
        if open_circuit_voltage(&e, mode, &c) == 0.0 {
            prop_assert_eq!(pce, 0.0);
        }
    }

    #[test]
    fn pce_is_monotone_in_voltage_and_current(e in energies(), mode in device(), d in 0.0f64..0.5, k in 1.0f64..3.0) {
        let c = cfg();
        // Less overpotential means more voltage at unchanged current.
        let mut more_v = c;
        more_v.overpotential_ev -= d;
        prop_assert!(open_circuit_voltage(&e, mode, &more_v) >= open_circuit_voltage(&e, mode, &c));
        prop_assert!(scharber_pce(&e, mode, &more_v) >= scharber_pce(&e, mode, &c));
        let mut more_j = c;
        more_j.a *= k;
        prop_assert!(scharber_pce(&e, mode, &more_j) >= scharber_pce(&e, mode, &c));
    }

    #[test]
    fn calibration_is_affine(x in -12.0f64..0.0, y in -12.0f64..0.0, t in 0.0f64..1.0) {
        let c = cfg();
        let mix = FrontierEnergies::new(t * x + (1.0 - t) * y, t * y + (1.0 - t) * x, 0.0);
        let cx = calibrate(&FrontierEnergies::new(x, y, 0.0), &c);
        let cy = calibrate(&FrontierEnergies::new(y, x, 0.0), &c);
        let cm = calibrate(&mix, &c);
        prop_assert!((cm.homo_ev - (t * cx.homo_ev + (1.0 - t) * cy.homo_ev)).abs() < 1e-12);
        prop_assert!((cm.lumo_ev - (t * cx.lumo_ev + (1.0 - t) * cy.lumo_ev)).abs() < 1e-12);
        prop_assert!((cx.homo_ev - cy.homo_ev - c.calib_homo.0 * (x - y)).abs() < 1e-12);
    }

    #[test]
    fn penalty_is_below_every_feasible_fitness(task in 0usize..12, draw in prop::array::uniform8(0.0f64..1.0)) {
        let task = &all_tasks()[task];
        let ctx = TaskContext::new(cfg(), None, TpsaMode::AsWritten);
        let m = parse_smiles(feasible_smiles(task.kind)).unwrap();
        let p = feasible_props(&required_properties(task), &draw);
        let f = evaluate_task(&m, task, &p, &ctx).unwrap();
        prop_assert!(f > PENALTY_FITNESS, "{}: {}", task.name, f);
    }

    #[test]
    fn minimized_quantities_flip_sign(scores in prop::collection::vec(-20.0f64..0.0, 2..30)) {
        let ctx = TaskContext::new(cfg(), None, TpsaMode::AsWritten);
        let task = all_tasks().into_iter().find(|t| t.kind == TaskKind::Docking1syh).unwrap();
        let m = parse_smiles(feasible_smiles(task.kind)).unwrap();
        let draw = [0.5; 8];
        let fitness: Vec<f64> = scores
            .iter()
            .map(|&s| {
                let mut p = feasible_props(&required_properties(&task), &draw);
                p.insert("docking_1syh".into(), Quantity::catalogued("docking_1syh", s).unwrap());
                evaluate_task(&m, &task, &p, &ctx).unwrap()
            })
            .collect();
        let argmax = (0..fitness.len()).max_by(|&a, &b| fitness[a].total_cmp(&fitness[b])).unwrap();
        let argmin = (0..scores.len()).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        prop_assert_eq!(scores[argmax], scores[argmin]);
    }
}
