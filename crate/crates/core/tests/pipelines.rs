use symred::catalog;
use symred::numcheck::{characteristic_residual, convergence_study, pde_residual, separability_defect};
use symred::reduce::{
    characteristics_solution_tau1, preset, tau0_solution, GridSolution, GridSpec, InitialProfile, PipelineOptions,
    Preset,
};
use symred::Result;

fn build(id: &str, grid: &GridSpec, constant: Option<f64>) -> Result<GridSolution> {
    let entry = catalog::find(id).unwrap();
    let (pde, op) = entry.concrete()?;
    let preset = preset(id).unwrap();
    let opts = PipelineOptions {
        params: preset.params().clone(),
        entry_id: id.into(),
        ..Default::default()
    };
    match preset {
        Preset::Tau1 { profile, .. } => {
            let profile = constant.map(InitialProfile::Constant).unwrap_or(profile);
            characteristics_solution_tau1(&pde, &op.xi(), op.eta(), &profile, grid, &opts)
        }
        Preset::Tau0 { anchor, v0, .. } => tau0_solution(&pde, op.eta(), anchor, v0, grid, &opts),
    }
}

#[test]
fn pipelines_meet_residual_and_order() {
    for id in ["thm2.case4", "thm2.case5+", "tau0.item5", "tau0.item6"] {
        let entry = catalog::find(id).unwrap();
        let (pde, op) = entry.concrete().unwrap();
        let grid = *preset(id).unwrap().grid();
        let levels = grid.levels_ending_here(3).unwrap();
        let study = convergence_study(|g| build(id, g, None), &levels, &pde, &op).unwrap();
        let order = study.fitted_order.unwrap();
        assert!((order - 2.0).abs() <= 0.3, "{id}: order {order}");
        assert!(!study.non_monotone && !study.floor_reached, "{id}");
        for w in study.levels.windows(2) {
            let ratio = w[0].pde.linf / w[1].pde.linf;
            assert!((3.0..=5.0).contains(&ratio), "{id}: refinement ratio {ratio}");
        }
        let finest = study.levels.last().unwrap();
        assert!(finest.characteristic.linf <= 1e-3, "{id}");
        assert!(finest.pde.linf <= 1e-4, "{id}");
    }
}

#[test]
fn constant_profile_control() {
    let id = "thm2.case4";
    let entry = catalog::find(id).unwrap();
    let (pde, op) = entry.concrete().unwrap();
    let grid = *preset(id).unwrap().grid();
    let sol = build(id, &grid, Some(0.3)).unwrap();
    let r = pde_residual(&sol, &pde).unwrap();
    let c = characteristic_residual(&sol, &op).unwrap();
    assert!(r.linf >= 0.1);
    // The constant profile still lies on the invariant surface.
    assert!(c.linf < 1e-10);
}

#[test]
fn item5_separability() {
    let grid = *preset("tau0.item5").unwrap().grid();
    let sol = build("tau0.item5", &grid, None).unwrap();
    let d = separability_defect(&sol);
    assert!(d < 1e-10);
}
