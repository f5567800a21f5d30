mod common;

use idec::mesh::{compute_dual_metrics, DualMetrics, Point3, SimplicialSurface};
use idec::solver::{
    field_energy, gauss_residuals, Boundary, Current, FieldState, ImplicitStepper, LinearSolver, MaterialParams,
    Mode, SolverError, SourceSpec, StepperOptions,
};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{mesh, random_vec};

fn direct(boundary: Boundary) -> StepperOptions {
    StepperOptions {
        solver: LinearSolver::Direct,
        boundary,
        ..StepperOptions::default()
    }
}

fn run(
    stepper: &ImplicitStepper,
    mut state: FieldState,
    sources: &[SourceSpec],
    steps: usize,
) -> FieldState {
    for _ in 0..steps {
        state = stepper.step(&state, sources).unwrap();
    }
    state
}

fn random_state(mode: Mode, s: &SimplicialSurface, seed: u64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = FieldState::zeros(mode, s);
    *st.edge_field_mut() = random_vec(&mut rng, s.n_edges());
    *st.face_field_mut() = random_vec(&mut rng, s.n_faces());
    st
}

fn setup(name: &str) -> (SimplicialSurface, DualMetrics) {
    let s = mesh(name);
    let m = compute_dual_metrics(&s, false).unwrap();
    (s, m)
}

#[test]
fn tm_is_te_with_roles_swapped() {
    // TM(E_face, H_edge) evolves like TE(H_face, −E_edge) once ε↔μ and
    // σ↔σ_m are exchanged and the currents are remapped.
    for (name, boundary) in [("icosphere_1", Boundary::Pec), ("strip", Boundary::Natural)] {
        let (s, m) = setup(name);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (nf, ne) = (s.n_faces(), s.n_edges());
        let mut draw = |n: usize, lo: f64, hi: f64| (0..n).map(|_| rng.gen_range(lo..hi)).collect::<Vec<f64>>();
        let tm_mat = MaterialParams {
            mode: Mode::Tm,
            eps: draw(nf, 1.0, 3.0),
            mu: draw(ne, 1.0, 3.0),
            sigma: draw(nf, 0.0, 0.5),
            sigma_m: draw(ne, 0.0, 0.5),
            ..MaterialParams::uniform(Mode::Tm, &s, 1.0, 1.0, 0.0, 0.0)
        };
        let te_mat = MaterialParams {
            mode: Mode::Te,
            eps: tm_mat.mu.clone(),
            mu: tm_mat.eps.clone(),
            sigma: tm_mat.sigma_m.clone(),
            sigma_m: tm_mat.sigma.clone(),
            ..tm_mat.clone()
        };
        let dt = 0.05;
        let tm = ImplicitStepper::assemble(Mode::Tm, &s, &m, &tm_mat, dt, direct(boundary)).unwrap();
        let te = ImplicitStepper::assemble(Mode::Te, &s, &m, &te_mat, dt, direct(Boundary::Natural)).unwrap();

        let tm0 = random_state(Mode::Tm, &s, 11);
        let te0 = FieldState {
            mode: Mode::Te,
            e: tm0.h.iter().map(|v| -v).collect(),
            h: tm0.e.clone(),
            n: 0,
            t: 0.0,
        };
        let tm_src = [
            SourceSpec::gaussian(Current::Electric, 0.7, 0.2, 0.1, vec![0, 3]),
            SourceSpec::gaussian(Current::Magnetic, -0.4, 0.3, 0.15, vec![1, 5]),
        ];
        let te_src = [
            SourceSpec::gaussian(Current::Magnetic, 0.7, 0.2, 0.1, vec![0, 3]),
            SourceSpec::gaussian(Current::Electric, 0.4, 0.3, 0.15, vec![1, 5]),
        ];
        let a = run(&tm, tm0, &tm_src, 20);
        let b = run(&te, te0, &te_src, 20);
        for (x, y) in a.e.iter().zip(&b.h) {
            assert!((x - y).abs() < 1e-12, "{name}: {x} vs {y}");
        }
        for (x, y) in a.h.iter().zip(&b.e) {
            assert!((x + y).abs() < 1e-12, "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn conductivity_orders_the_energy_decay() {
    let (s, m) = setup("icosphere_1");
    let dt = 0.05;
    let energies: Vec<f64> = [0.0, 0.1, 1.0, 10.0]
        .iter()
        .map(|&sigma| {
            let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, sigma, 0.0);
            let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, dt, StepperOptions::default()).unwrap();
            let end = run(&st, random_state(Mode::Te, &s, 3), &[], 40);
            field_energy(&end, &mat, &m)
        })
        .collect();
    assert!(energies.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
}

#[test]
fn energy_never_grows_across_five_decades_of_dt() {
    let (s, m) = setup("icosphere_2");
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.0, 0.0);
    let cfl = m.min_dual_edge_len() / mat.max_wave_speed(&s);
    for factor in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, factor * cfl, StepperOptions::default()).unwrap();
        let mut state = random_state(Mode::Te, &s, 5);
        let mut prev = field_energy(&state, &mat, &m);
        for _ in 0..100 {
            state = st.step(&state, &[]).unwrap();
            let e = field_energy(&state, &mat, &m);
            assert!(e <= prev * (1.0 + 1e-9), "dt factor {factor}: {e} > {prev}");
            prev = e;
        }
    }
}

#[test]
fn lossless_small_step_nearly_conserves_energy() {
    // the scheme is dissipative at O(Δt); with a tiny step the loss is tiny
    let (s, m) = setup("icosphere_1");
    let mat = MaterialParams::uniform(Mode::Tm, &s, 1.0, 1.0, 0.0, 0.0);
    let st = ImplicitStepper::assemble(Mode::Tm, &s, &m, &mat, 1e-4, direct(Boundary::Pec)).unwrap();
    let start = random_state(Mode::Tm, &s, 9);
    let e0 = field_energy(&start, &mat, &m);
    let e1 = field_energy(&run(&st, start, &[], 10), &mat, &m);
    assert!(e1 <= e0 && e1 > e0 * (1.0 - 1e-2), "{e0} -> {e1}");
}

fn divergence_free_te_state(s: &SimplicialSurface, seed: u64) -> FieldState {
    // zero edge field, arbitrary face field: the vertex constraint starts at 0
    let mut st = FieldState::zeros(Mode::Te, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    *st.face_field_mut() = random_vec(&mut rng, s.n_faces());
    st
}

#[test]
fn gauss_law_is_preserved_without_sources() {
    let (s, m) = setup("icosphere_2");
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.3, 0.2);
    let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, 0.05, direct(Boundary::Pec)).unwrap();
    let end = run(&st, divergence_free_te_state(&s, 1), &[], 100);
    let res = gauss_residuals(&end, &s, &m, &mat, None);
    let norm = field_energy(&end, &mat, &m).sqrt();
    assert!(res.max_abs() <= 1e-11 * norm, "{} vs {norm}", res.max_abs());
    assert!(res.magnetic.iter().all(|&v| v == 0.0));
}

#[test]
fn gauss_law_holds_at_interior_vertices_of_a_pec_cavity() {
    let (s, m) = setup("cavity_8");
    let mat = MaterialParams::uniform(Mode::Tm, &s, 1.0, 1.0, 0.0, 0.0);
    let st = ImplicitStepper::assemble(Mode::Tm, &s, &m, &mat, 0.02, direct(Boundary::Pec)).unwrap();
    let mut start = FieldState::zeros(Mode::Tm, &s);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    *start.face_field_mut() = random_vec(&mut rng, s.n_faces());
    let end = run(&st, start, &[], 50);
    let res = gauss_residuals(&end, &s, &m, &mat, None);
    let norm = field_energy(&end, &mat, &m).sqrt();
    assert!(res.max_abs_interior(&s) <= 1e-11 * norm);
}

#[test]
fn edge_current_without_charge_breaks_gauss_law() {
    let (s, m) = setup("icosphere_2");
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.0, 0.0);
    let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, 0.05, direct(Boundary::Pec)).unwrap();
    let src = [SourceSpec::gaussian(Current::Electric, 1.0, 0.5, 0.3, vec![10])];
    let mut state = divergence_free_te_state(&s, 1);
    let mut residuals = Vec::new();
    for _ in 0..20 {
        state = st.step(&state, &src).unwrap();
        residuals.push(gauss_residuals(&state, &s, &m, &mat, None).max_abs());
    }
    assert!(residuals[19] > 1e-3, "{residuals:?}");
    assert!(residuals[19] > 100.0 * residuals[0].max(1e-16) || residuals[0] > 1e-6);
}

#[test]
fn schur_complement_is_spd_on_small_mesh() {
    let (s, m) = setup("strip");
    assert!(s.n_faces() <= 30);
    for (mode, boundary) in [(Mode::Te, Boundary::Pec), (Mode::Te, Boundary::Natural), (Mode::Tm, Boundary::Pec)] {
        let mat = MaterialParams::uniform(mode, &s, 2.0, 0.5, 0.1, 0.3);
        let st = ImplicitStepper::assemble(mode, &s, &m, &mat, 0.3, StepperOptions { boundary, ..Default::default() })
            .unwrap();
        let a = st.schur_dense();
        assert!((&a - a.transpose()).amax() <= 1e-14 * a.amax());
        let eig = SymmetricEigen::new(a);
        assert!(eig.eigenvalues.min() > 0.0, "{mode:?} {boundary:?}");
    }
}

#[test]
fn obtuse_pair_needs_explicit_opt_in() {
    // the flat top triangle's circumcenter lies far below the shared edge,
    // making its dual length negative
    let s = SimplicialSurface::from_triangles(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(1.0, 0.2, 0.0),
            Point3::new(1.0, -1.5, 0.0),
        ],
        vec![[0, 1, 2], [0, 3, 1]],
    )
    .unwrap();
    assert!(compute_dual_metrics(&s, false).is_err());
    let m = compute_dual_metrics(&s, true).unwrap();
    assert!(m.dual_edge_len[s.edge_between(0, 1).unwrap()] < 0.0);
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.0, 0.0);
    let opts = StepperOptions {
        boundary: Boundary::Natural,
        ..Default::default()
    };
    let err = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, 0.1, opts).unwrap_err();
    assert!(matches!(err, SolverError::Indefinite { .. }), "{err}");
    let st = ImplicitStepper::assemble(
        Mode::Te,
        &s,
        &m,
        &mat,
        0.1,
        StepperOptions {
            allow_indefinite: true,
            solver: LinearSolver::Direct,
            ..opts
        },
    )
    .unwrap();
    assert!(st.is_indefinite());
}

#[test]
fn iterative_and_direct_agree() {
    let (s, m) = setup("icosphere_2");
    let mat = MaterialParams::uniform(Mode::Tm, &s, 1.0, 2.0, 0.1, 0.0);
    let it = ImplicitStepper::assemble(Mode::Tm, &s, &m, &mat, 0.1, StepperOptions::default()).unwrap();
    let dr = ImplicitStepper::assemble(Mode::Tm, &s, &m, &mat, 0.1, direct(Boundary::Pec)).unwrap();
    let a = run(&it, random_state(Mode::Tm, &s, 4), &[], 10);
    let b = run(&dr, random_state(Mode::Tm, &s, 4), &[], 10);
    let diff = a.e.iter().zip(&b.e).chain(a.h.iter().zip(&b.h)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn cg_iteration_cap_is_reported() {
    let (s, m) = setup("icosphere_2");
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.0, 0.0);
    let opts = StepperOptions {
        solver: LinearSolver::Iterative {
            tolerance: 1e-14,
            max_iters: Some(1),
        },
        ..Default::default()
    };
    let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, 10.0, opts).unwrap();
    let err = st.step(&random_state(Mode::Te, &s, 1), &[]).unwrap_err();
    assert!(err.to_string().contains("residual"), "{err}");
}

#[test]
fn uniform_face_field_on_closed_surface_is_stationary() {
    // every edge of a closed surface sees its two faces with opposite signs,
    // so a constant face field has no curl
    let (s, m) = setup("icosphere_1");
    let mat = MaterialParams::uniform(Mode::Te, &s, 1.0, 1.0, 0.0, 0.0);
    let st = ImplicitStepper::assemble(Mode::Te, &s, &m, &mat, 0.3, StepperOptions::default()).unwrap();
    let mut start = FieldState::zeros(Mode::Te, &s);
    start.h = vec![1.25; s.n_faces()];
    let next = st.step(&start, &[]).unwrap();
    assert!(next.h.iter().all(|&v| (v - 1.25).abs() < 1e-14));
    assert!(next.e.iter().all(|&v| v.abs() < 1e-14));
}
