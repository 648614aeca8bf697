"""End-to-end smoke tests for the python bindings.

Numerics are cross-checked against numpy/scipy; the heavy property
campaigns live in the C++ suite, so everything here stays small.
"""

import numpy as np
import pytest
import scipy.linalg

import gnnctrl as gc


def as_array(m):
    return np.array(m, copy=True)


def random_system(seed=0, n=16, k=4, a_norm=0.995, b_norm=1.0):
    # Redraw on a fresh stream until the graph is connected.
    for attempt in range(32):
        rng = gc.RngStream(seed, 0x100 + attempt)
        g = gc.generate_geometric_graph(n, k, rng)
        if gc.is_connected(g):
            return gc.generate_system(g, a_norm, b_norm, rng)
    raise AssertionError("no connected graph found")


def test_matrix_buffer_round_trip():
    a = np.random.default_rng(1).normal(size=(5, 3))
    m = gc.Matrix(a)
    assert m.rows == 5 and m.cols == 3
    back = as_array(m)
    assert back.dtype == np.float64
    assert np.array_equal(back, a)
    # Writes through the buffer land in the same storage.
    mv = np.asarray(m)
    mv[2, 1] = 42.0
    assert m[2, 1] == 42.0


def test_norms_match_numpy():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a = rng.normal(size=(7, 4))
        m = gc.Matrix(a)
        assert gc.spectral_norm(m) == pytest.approx(
            np.linalg.norm(a, 2), rel=1e-10)
        assert gc.inf_norm(m) == pytest.approx(
            np.linalg.norm(a, np.inf), rel=1e-12)
        assert gc.l21_norm(m) == pytest.approx(
            np.linalg.norm(a, axis=0).sum(), rel=1e-12)
        assert m.frobenius_norm() == pytest.approx(
            np.linalg.norm(a), rel=1e-12)


def test_sym_eig_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6))
    sym = (a + a.T) / 2
    values, vectors = gc.sym_eig(gc.Matrix(sym))
    assert np.allclose(values, np.linalg.eigvalsh(sym), atol=1e-10)
    v = as_array(vectors)
    assert np.allclose(v @ np.diag(values) @ v.T, sym, atol=1e-10)


def test_solve_linear_matches_numpy():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=(5, 2))
    x = as_array(gc.solve_linear(gc.Matrix(a), gc.Matrix(b)))
    assert np.allclose(x, np.linalg.solve(a, b), atol=1e-10)


def test_dare_matches_scipy():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a = rng.normal(size=(6, 6))
        a *= 0.9 / np.linalg.norm(a, 2)
        b = rng.normal(size=(6, 3))
        q = np.eye(6)
        r = np.eye(3)
        sol = gc.solve_dare(gc.Matrix(a), gc.Matrix(b), gc.Matrix(q),
                            gc.Matrix(r))
        expected = scipy.linalg.solve_discrete_are(a, b, q, r)
        assert np.allclose(as_array(sol.p_mat), expected, atol=1e-8)
        assert sol.residual < 1e-9


def test_optimal_controller_contracts():
    d = random_system(seed=11)
    cost = gc.make_cost_spec(gc.Matrix.identity(d.f_dim),
                             gc.Matrix.identity(d.g_dim))
    ctrl = gc.optimal_controller(d, cost)
    rng = gc.RngStream(11, 0x300)
    x0 = gc.sample_initial_states(1, d.n_nodes, d.f_dim, rng)[0]
    rec = gc.rollout(d, ctrl, x0, 40, cost)
    assert rec.stable
    assert gc.classify_stable(rec)
    assert rec.state_sizes[-1] < 0.5 * rec.state_sizes[0]
    # Open loop at the same spectral radius decays far slower.
    open_rec = gc.rollout(d, gc.open_loop_controller(d.g_dim), x0, 40, cost)
    assert rec.total_cost < open_rec.total_cost


def test_stability_report_recomposes():
    d = random_system(seed=12)
    rng = gc.RngStream(12, 0x400)
    interval = gc.default_interval([d.support])
    ctrl = gc.gnn_controller([(1, 2, 2), (2, 1, 1)], interval, "tanh", rng)
    rep = gc.stability_constant(d, ctrl)
    a_part = gc.spectral_norm(d.sys_graph) * gc.inf_norm(d.sys_feat)
    b_part = gc.spectral_norm(d.ctrl_graph) * gc.inf_norm(d.ctrl_feat)
    assert rep.xi == pytest.approx(a_part + rep.c_phi * b_part, rel=1e-12)
    assert rep.is_sufficiently_stable == (rep.xi < 1.0)


def test_controller_json_round_trip():
    d = random_system(seed=13)
    rng = gc.RngStream(13, 0x400)
    interval = gc.default_interval([d.support])
    ctrl = gc.gnn_controller([(1, 3, 2), (3, 1, 0)], interval, "tanh", rng)
    text = gc.controller_to_json_string(ctrl)
    clone = gc.controller_from_json_string(text)
    assert clone.kind() == ctrl.kind()
    x = gc.sample_initial_states(1, d.n_nodes, d.f_dim, rng)[0]
    a = as_array(ctrl.evaluate(x, d.support))
    b = as_array(clone.evaluate(x, d.support))
    assert np.array_equal(a, b)


def test_training_reduces_cost(tmp_path):
    d = random_system(seed=14, n=12, k=3)
    cost = gc.make_cost_spec(gc.Matrix.identity(1), gc.Matrix.identity(1))
    rng = gc.RngStream(14, 0x400)
    interval = gc.default_interval([d.support])
    ctrl = gc.gnn_controller([(1, 4, 2), (4, 1, 0)], interval, "tanh", rng)
    before = ctrl.clone()

    cfg = gc.TrainConfig()
    cfg.train_size = 12
    cfg.valid_size = 4
    cfg.batch_size = 4
    cfg.epochs = 8
    cfg.validate_every = 2
    cfg.horizon = 12
    cfg.learning_rate = 0.01
    cfg.seed = 14
    result = gc.train(ctrl, d, cost, cfg)
    assert result.n_updates == 8 * 3
    assert 0 < result.best_raw_cost < np.inf

    test_rng = gc.RngStream(14, 0x300)
    states = gc.sample_initial_states(16, d.n_nodes, d.f_dim, test_rng)
    trained = gc.evaluate(ctrl, d, cost, states, 12)
    initial = gc.evaluate(before, d, cost, states, 12)
    assert trained.mean < initial.mean


def test_iss_check_holds():
    d = random_system(seed=15, a_norm=0.3)
    rng = gc.RngStream(15, 0x400)
    interval = gc.default_interval([d.support])
    ctrl = gc.gnn_controller([(1, 2, 1), (2, 1, 0)], interval, "tanh", rng)
    # Small init keeps the loop contractive at this plant gain.
    ctrl.set_parameters([0.05 * p for p in ctrl.parameters()])
    x0 = gc.sample_initial_states(1, d.n_nodes, d.f_dim, rng)[0]
    horizon = 30
    noise = np.random.default_rng(15).normal(size=(horizon, d.n_nodes, 1))
    dist = [gc.Matrix(0.02 * e) for e in noise]
    res = gc.iss_check(d, ctrl, x0, dist, horizon)
    assert res.xi < 1.0
    assert res.holds
    assert res.lhs <= res.rhs


def test_verify_campaigns_all_pass():
    results = gc.run_verify_campaigns(seed=7)
    assert len(results) == 13
    for c in results:
        assert c.passed, f"{c.name}: {c.failures}/{c.instances} failed"


def test_config_hash_tracks_semantics(tmp_path):
    base = [("experiment", "exp3"), ("n_nodes", "12")]
    h = gc.config_hash(base)
    assert h == gc.config_hash(list(base))
    assert h != gc.config_hash(base + [("a_norm", "0.9")])
    # Output location and worker count do not change what gets computed.
    assert h == gc.config_hash(base + [("out_dir", str(tmp_path)),
                                       ("workers", "4")])


def test_run_experiment_writes_outputs(tmp_path):
    pairs = [
        ("experiment", "exp3"),
        ("out_dir", str(tmp_path)),
        ("workers", "1"),
        ("n_nodes", "12"),
        ("knn_k", "3"),
        ("horizon", "10"),
        ("n_realizations", "1"),
        ("test_size", "4"),
        ("train_size", "6"),
        ("valid_size", "2"),
        ("batch_size", "3"),
        ("epochs", "2"),
        ("validate_every", "2"),
        ("a_norm_grid", "0.95"),
        ("classify_horizon", "50"),
        ("save_models", "0"),
        ("seed", "3"),
    ]
    assert gc.run_experiment(pairs) == 0
    summary = tmp_path / "exp3_realizations.csv"
    assert summary.exists()
    header = summary.read_text().splitlines()
    assert any(line.startswith("# config_hash=") for line in header)
