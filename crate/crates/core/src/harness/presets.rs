//! Built-in convergence studies.
//!
//! Every study comes as a desk-scale variant and a `-full` variant with much
//! finer references; the latter are far beyond desk budgets.

use super::spec::{Axis, DataCase, Expectation, ExperimentSpec, Levels, Norm};

const CENTER: [f64; 2] = [0.5, 0.5];

fn window(norm: Norm, lo: f64, hi: f64) -> Expectation {
    Expectation {
        norm,
        order: 0.5 * (lo + hi),
        tolerance: 0.5 * (hi - lo),
    }
}

fn around(norm: Norm, order: f64, tolerance: f64) -> Expectation {
    Expectation {
        norm,
        order,
        tolerance,
    }
}

struct Study {
    name: &'static str,
    description: &'static str,
    data: DataCase,
    regularity: f64,
    axis: Axis,
    norms: &'static [Norm],
    expectations: Vec<Expectation>,
    desk_ladder: Vec<u32>,
    full_ladder: Vec<u32>,
    budget_seconds: f64,
}

impl Study {
    fn variants(self) -> [ExperimentSpec; 2] {
        let dimension = self.data.dimension();
        let (desk_ref, full_ref) = match dimension {
            1 => (Levels { h: 8, tau: 13 }, Levels { h: 10, tau: 18 }),
            _ => (Levels { h: 7, tau: 10 }, Levels { h: 8, tau: 12 }),
        };
        let fixed = |r: Levels| match self.axis {
            Axis::H => r.tau,
            Axis::Tau => r.h,
        };
        let base = ExperimentSpec {
            name: self.name.to_string(),
            description: self.description.to_string(),
            desk: true,
            dimension,
            alpha: 0.4,
            horizon: 1.0,
            data: self.data,
            regularity: self.regularity,
            axis: self.axis,
            ladder: self.desk_ladder,
            fixed: fixed(desk_ref),
            reference: desk_ref,
            norms: self.norms.to_vec(),
            expectations: self.expectations,
            budget_seconds: Some(self.budget_seconds),
        };
        let full = ExperimentSpec {
            name: format!("{}-full", self.name),
            desk: false,
            ladder: self.full_ladder,
            fixed: fixed(full_ref),
            reference: full_ref,
            budget_seconds: None,
            ..base.clone()
        };
        [base, full]
    }
}

/// All built-in studies, desk variants first.
pub fn preset_registry() -> Vec<ExperimentSpec> {
    let smooth = DataCase::PowerSource {
        x_power: -0.49,
        t_power: -0.49,
    };
    let rough = DataCase::PowerSource {
        x_power: -0.99,
        t_power: -0.49,
    };
    let singular_u0 = DataCase::PowerInitial { x_power: -0.49 };
    let dirac_f = DataCase::DiracSource {
        t_power: -0.49,
        point: CENTER,
    };
    let dirac_u0 = DataCase::DiracInitial { point: CENTER };
    let both = &[Norm::E1, Norm::E2];
    let e1 = &[Norm::E1];

    let studies = vec![
        Study {
            name: "exp1-f-smooth-tau",
            description: "Temporal convergence, u0 = 0, f = x^-0.49 t^-0.49 in one dimension.",
            data: smooth.clone(),
            regularity: 0.0,
            axis: Axis::Tau,
            norms: both,
            expectations: vec![around(Norm::E1, 1.0, 0.2), window(Norm::E2, 0.35, 0.7)],
            desk_ladder: vec![8, 9, 10, 11],
            full_ladder: (11..=16).collect(),
            budget_seconds: 300.0,
        },
        Study {
            name: "exp1-f-smooth-h",
            description: "Spatial convergence, u0 = 0, f = x^-0.49 t^-0.49 in one dimension.",
            data: smooth,
            regularity: 0.0,
            axis: Axis::H,
            norms: both,
            expectations: vec![around(Norm::E1, 2.0, 0.2), around(Norm::E2, 1.0, 0.15)],
            desk_ladder: vec![3, 4, 5, 6],
            full_ladder: vec![4, 5, 6, 7],
            budget_seconds: 600.0,
        },
        Study {
            name: "exp1-f-rough-tau",
            description: "Temporal convergence, u0 = 0, f = x^-0.99 t^-0.49 in one dimension.",
            data: rough.clone(),
            regularity: 0.5,
            axis: Axis::Tau,
            norms: both,
            expectations: vec![around(Norm::E1, 0.9, 0.2), around(Norm::E2, 0.45, 0.15)],
            desk_ladder: vec![8, 9, 10, 11],
            full_ladder: (9..=15).collect(),
            budget_seconds: 300.0,
        },
        Study {
            name: "exp1-f-rough-h",
            description: "Spatial convergence, u0 = 0, f = x^-0.99 t^-0.49 in one dimension.",
            data: rough,
            regularity: 0.5,
            axis: Axis::H,
            norms: both,
            expectations: vec![window(Norm::E1, 1.35, 1.7), window(Norm::E2, 0.4, 0.7)],
            desk_ladder: vec![3, 4, 5, 6],
            full_ladder: vec![4, 5, 6, 7],
            budget_seconds: 600.0,
        },
        Study {
            name: "exp1-u0-tau",
            description: "Temporal convergence, u0 = x^-0.49, f = 0 in one dimension.",
            data: singular_u0.clone(),
            regularity: 0.0,
            axis: Axis::Tau,
            norms: e1,
            expectations: vec![window(Norm::E1, 0.4, 0.75)],
            desk_ladder: vec![6, 7, 8, 9],
            full_ladder: vec![9, 10, 11, 12],
            budget_seconds: 300.0,
        },
        Study {
            name: "exp1-u0-h",
            description: "Spatial convergence, u0 = x^-0.49, f = 0 in one dimension.",
            data: singular_u0,
            regularity: 0.0,
            axis: Axis::H,
            norms: e1,
            expectations: vec![around(Norm::E1, 1.9, 0.2)],
            desk_ladder: vec![3, 4, 5, 6],
            full_ladder: vec![4, 5, 6, 7],
            budget_seconds: 600.0,
        },
        Study {
            name: "exp2-dirac-f-h",
            description:
                "Spatial convergence, u0 = 0, f = t^-0.49 delta at (0.5, 0.5) on the unit square.",
            data: dirac_f.clone(),
            regularity: 1.0,
            axis: Axis::H,
            norms: e1,
            expectations: vec![around(Norm::E1, 1.0, 0.15)],
            desk_ladder: vec![2, 3, 4, 5],
            full_ladder: vec![3, 4, 5, 6],
            budget_seconds: 900.0,
        },
        Study {
            name: "exp2-dirac-f-tau",
            description:
                "Temporal convergence, u0 = 0, f = t^-0.49 delta at (0.5, 0.5) on the unit square.",
            data: dirac_f,
            regularity: 1.0,
            axis: Axis::Tau,
            norms: e1,
            expectations: vec![around(Norm::E1, 0.55, 0.2)],
            desk_ladder: vec![3, 4, 5, 6],
            full_ladder: vec![3, 4, 5, 6],
            budget_seconds: 900.0,
        },
        Study {
            name: "exp2-dirac-u0-h",
            description: "Spatial convergence, u0 = delta at (0.5, 0.5), f = 0 on the unit square.",
            data: dirac_u0.clone(),
            regularity: 1.0,
            axis: Axis::H,
            norms: e1,
            expectations: vec![around(Norm::E1, 1.0, 0.15)],
            desk_ladder: vec![2, 3, 4, 5],
            full_ladder: vec![3, 4, 5, 6],
            budget_seconds: 900.0,
        },
        Study {
            name: "exp2-dirac-u0-tau",
            description:
                "Temporal convergence, u0 = delta at (0.5, 0.5), f = 0 on the unit square.",
            data: dirac_u0,
            regularity: 1.0,
            axis: Axis::Tau,
            norms: e1,
            expectations: vec![window(Norm::E1, 0.35, 0.75)],
            desk_ladder: vec![4, 5, 6, 7],
            full_ladder: vec![7, 8, 9, 10],
            budget_seconds: 900.0,
        },
    ];
    let (desk, full): (Vec<_>, Vec<_>) = studies
        .into_iter()
        .map(Study::variants)
        .map(|[d, p]| (d, p))
        .unzip();
    desk.into_iter().chain(full).collect()
}

/// Looks a preset up by name.
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    preset_registry().into_iter().find(|p| p.name == name)
}
