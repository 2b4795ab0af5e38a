use dpflab_core::format::{parse_controller, parse_delay_mask, parse_plant, parse_sls, write_controller, write_delay_mask, write_plant, write_sls};
use dpflab_core::numerics::{dare_residual, solve_dare, solve_filter_dare, spectral_radius};
use dpflab_core::sim::{impulse_response, simulate};
use dpflab_core::sls::{make_sls_controller, synthesize, DelayMask};
use dpflab_core::stabilizability::is_stabilizable_without_dpf;
use dpflab_core::{
    delay_chain_plant, make_fc, make_of, scalar_delay_gains, ControllerArtifact, DelaySpec, Error, LabeledPlant,
    Matrix, Noise, SignalRole, StateSpace,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn s(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

fn matrix(rows: usize, cols: usize, range: std::ops::Range<f64>) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(range, rows * cols).prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

fn state_feedback(a: Matrix, b: Matrix) -> StateSpace {
    let n = a.nrows();
    StateSpace::new(a, b, Matrix::identity(n, n), Matrix::identity(n, n), Matrix::zeros(n, n)).unwrap()
}

fn role() -> impl Strategy<Value = SignalRole> {
    prop_oneof![
        Just(SignalRole::External),
        Just(SignalRole::InternalDelay),
        Just(SignalRole::InternalWire)
    ]
}

fn labeled_plant() -> impl Strategy<Value = LabeledPlant> {
    (1usize..4, 1usize..3, 1usize..3).prop_flat_map(|(n, m, p)| {
        (
            matrix(n, n, -3.0..3.0),
            matrix(n, m, -3.0..3.0),
            matrix(p, n, -3.0..3.0),
            matrix(n, n, -1.0..1.0),
            matrix(p, p, -1.0..1.0),
            prop::collection::vec(role(), n),
            prop::collection::vec(role(), m),
        )
            .prop_map(|(a, b, c, gw, gv, state_roles, input_roles)| LabeledPlant {
                plant: StateSpace::new(a, b, c, &gw * gw.transpose(), &gv * gv.transpose()).unwrap(),
                state_roles,
                input_roles,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plant_files_round_trip(lp in labeled_plant()) {
        let back = parse_plant(&write_plant(&lp)).unwrap();
        prop_assert_eq!(back, lp);
    }

    #[test]
    fn delay_mask_files_round_trip(n in 1usize..4, m in 1usize..3, seed in prop::collection::vec(0usize..5, 20)) {
        let mask = DelayMask {
            state_delay: DMatrix::from_fn(n, n, |i, j| if i == j { 0 } else { seed[i * 3 + j] }),
            input_delay: DMatrix::from_fn(m, n, |i, j| seed[10 + i * 3 + j]),
        };
        prop_assert_eq!(parse_delay_mask(&write_delay_mask(&mask)).unwrap(), mask);
    }

    #[test]
    fn sls_files_round_trip(a in -2.0f64..2.0, t in 1usize..6, delay in 0usize..3) {
        let p = state_feedback(s(a), s(1.0));
        let mask = DelayMask::uniform_input(1, 1, delay);
        let Ok(resp) = synthesize(&p, t, &s(1.0), &s(1.0), Some(&mask)) else { return Ok(()) };
        prop_assert_eq!(parse_sls(&write_sls(&resp)).unwrap(), resp);
    }

    #[test]
    fn dare_solution_is_stabilizing(a in matrix(2, 2, -1.5..1.5), b in matrix(2, 1, -1.0..1.0)) {
        // keep (A, B) comfortably controllable
        let ctrb = DMatrix::from_columns(&[b.column(0).into_owned(), (&a * &b).column(0).into_owned()]);
        prop_assume!(ctrb.determinant().abs() > 0.1);
        let (q, r) = (Matrix::identity(2, 2), s(1.0));
        let sol = solve_dare(&a, &b, &q, &r).unwrap();
        prop_assert!(dare_residual(&a, &b, &q, &r, &sol.p).unwrap() <= 1e-9 * sol.p.amax().max(1.0));
        prop_assert!(spectral_radius(&(&a - &b * &sol.gain)).unwrap() < 1.0);
    }

    #[test]
    fn closed_form_gains_match_iteration(a in -2.5f64..2.5, sw in 0.05f64..10.0, sv in 0.05f64..10.0) {
        prop_assume!(a.abs() > 1e-3);
        let g = scalar_delay_gains(a, sw, sv).unwrap();
        let lp = delay_chain_plant(&DelaySpec::new(1, a, sw, sv)).unwrap();
        let p = &lp.plant;
        let f = solve_filter_dare(&p.a, &p.c, &p.w, &p.v).unwrap();
        prop_assert!((g.l1 - f.gain[(0, 0)]).abs() <= 1e-8);
        prop_assert!((g.l2 - f.gain[(1, 0)]).abs() <= 1e-8);
        prop_assert!((g.l1 - a * g.l2).abs() <= 1e-12 * g.l1.abs().max(1.0));
    }

    #[test]
    fn one_step_boundary_is_two(a in 0.0f64..4.0) {
        prop_assume!((a - 2.0).abs() > 1e-3);
        let check = is_stabilizable_without_dpf(a, 1).unwrap();
        prop_assert_eq!(check.stabilizable, a < 2.0);
    }

    /// Any disturbance sequence: x(t) = sum_k Phi_x(k) w(t-k), likewise for u.
    #[test]
    fn sls_closed_loop_is_a_convolution(
        a in matrix(2, 2, -1.5..1.5),
        t in 1usize..6,
        seed in any::<u64>(),
    ) {
        let p = state_feedback(a, Matrix::identity(2, 2));
        let resp = synthesize(&p, t, &Matrix::identity(2, 2), &Matrix::identity(2, 2), None).unwrap();
        let ctrl = make_sls_controller(&resp).unwrap();
        let tr = simulate(&p, &ctrl, 100, Noise::gaussian(seed)).unwrap();
        let w: Vec<_> = (0..99).map(|k| &tr.x[k + 1] - &p.a * &tr.x[k] - &p.b * &tr.u[k]).collect();
        for step in 1..100 {
            let mut x = nalgebra::DVector::zeros(2);
            let mut u = nalgebra::DVector::zeros(2);
            for k in 1..=t.min(step) {
                x += &resp.phi_x[k - 1] * &w[step - k];
                u += &resp.phi_u[k - 1] * &w[step - k];
            }
            prop_assert!((&tr.x[step] - x).amax() <= 1e-8, "x at {}", step);
            prop_assert!((&tr.u[step] - u).amax() <= 1e-8, "u at {}", step);
        }
    }

    #[test]
    fn impulse_energy_matches_objective(a in matrix(2, 2, -1.5..1.5), t in 1usize..8, qd in 0.5f64..3.0) {
        let p = state_feedback(a, Matrix::identity(2, 2));
        let q = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![qd, 1.0]));
        let r = Matrix::identity(2, 2) * 0.7;
        let resp = synthesize(&p, t, &q, &r, None).unwrap();
        let ctrl = make_sls_controller(&resp).unwrap();
        let costs = resp.column_costs(&q, &r);
        for (j, tr) in impulse_response(&p, &ctrl, t + 5).unwrap().iter().enumerate() {
            let energy: f64 = tr.x.iter().zip(&tr.u).map(|(x, u)| x.dot(&(&q * x)) + u.dot(&(&r * u))).sum();
            prop_assert!((energy - costs[j]).abs() <= 1e-6, "column {}: {} vs {}", j, energy, costs[j]);
        }
    }

    #[test]
    fn masked_entries_stay_zero(
        a in matrix(2, 2, -1.5..1.5),
        delays in prop::collection::vec(0usize..3, 6),
        t in 1usize..6,
    ) {
        let p = state_feedback(a, Matrix::identity(2, 2));
        let mask = DelayMask {
            state_delay: DMatrix::from_fn(2, 2, |i, j| if i == j { 0 } else { delays[i + j] }),
            input_delay: DMatrix::from_fn(2, 2, |i, j| delays[2 + 2 * i + j]),
        };
        match synthesize(&p, t, &Matrix::identity(2, 2), &Matrix::identity(2, 2), Some(&mask)) {
            Ok(resp) => {
                let (mx, mu) = mask.component_masks(t);
                for k in 0..t {
                    for (v, &m) in resp.phi_x[k].iter().zip(mx[k].iter()) {
                        prop_assert!(!m || *v == 0.0);
                    }
                    for (v, &m) in resp.phi_u[k].iter().zip(mu[k].iter()) {
                        prop_assert!(!m || *v == 0.0);
                    }
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::Infeasible { .. }), "{}", e),
        }
    }
}

#[test]
fn of_impulse_decays_at_the_slowest_separated_rate() {
    for (a, sw, sv) in [(1.2, 1.0, 1.0), (0.9, 2.0, 0.5), (-1.5, 0.5, 2.0)] {
        let p = StateSpace::new(s(a), s(1.0), s(1.0), s(sw * sw), s(sv * sv)).unwrap();
        let ctrl = make_of(&p, &s(1.0), &s(0.3)).unwrap();
        let dpflab_core::ControllerParams::Observer { k, l, .. } = ctrl.params() else { unreachable!() };
        let rate = (a - k[(0, 0)]).abs().max((a - l[(0, 0)]).abs());
        let tr = &impulse_response(&p, &ctrl, 60).unwrap()[0];
        let norm = |t: usize| (tr.x[t].norm_squared() + tr.internal[t].iter().map(|v| v * v).sum::<f64>()).sqrt();
        let measured = (norm(50) / norm(40)).powf(0.1);
        assert!((measured - rate).abs() < 1e-3 * rate.max(1e-3), "a={a}: {measured} vs {rate}");
    }
}

#[test]
fn controller_files_round_trip_and_rebuild() {
    let lp = delay_chain_plant(&DelaySpec::new(2, 1.3, 1.0, 0.7)).unwrap();
    let (q, r) = lp.default_weights();
    for ctrl in [make_fc(&lp).unwrap(), make_of(&lp.plant, &q, &r).unwrap()] {
        let art = ControllerArtifact {
            plant: lp.clone(),
            q: q.clone(),
            r: r.clone(),
            controller: ctrl,
        };
        let back = parse_controller(&write_controller(&art)).unwrap();
        assert_eq!(back.controller.params(), art.controller.params());
        assert_eq!(back.controller.wiring(), art.controller.wiring());
        assert_eq!(back.plant, art.plant);
    }
}
