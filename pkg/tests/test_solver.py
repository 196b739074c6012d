import numpy as np
import pytest
import scipy.sparse as sp

from phasefem import kernels as kn
from phasefem import mechanics as mech
from phasefem.mesh import Mesh, generate_structured
from phasefem.solver import (
    Constraints,
    CouplingSchedule,
    DirichletBC,
    Field,
    FracturePhysics,
    HeatPhysics,
    IncrementError,
    MechanicsPhysics,
    NeumannBC,
    Problem,
    ScalarKernelPhysics,
    SingularMatrixError,
    apply_dirichlet,
    linear_solve,
    load_checkpoint,
    newton_solve,
    run_transient,
    save_checkpoint,
    step_increment,
)

UNIT_HEAT = kn.HeatParams(rho=1.0, c_T=1.0, k0=1.0)


# ----------------------------------------------------------------- linear


def test_linear_solve_examples():
    assert np.allclose(linear_solve(sp.eye(3), [1.0, 2.0, 3.0]), [1, 2, 3])
    assert np.allclose(linear_solve(sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]]), [3.0, 3.0]), [1, 1], atol=1e-15)
    with pytest.raises(SingularMatrixError):
        linear_solve(sp.csr_matrix([[1.0, 0.0], [0.0, 0.0]]), [1.0, 1.0])


def test_linear_solve_residual_bound(rng):
    A = sp.random(200, 200, density=0.05, random_state=3) + 10 * sp.eye(200)
    b = rng.normal(size=200)
    x = linear_solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_apply_dirichlet_examples():
    K = sp.csr_matrix(np.array([[4.0, -1, 0], [-1, 4, -1], [0, -1, 4]]))
    r = np.array([1.0, 2, 3])
    Kc, b = apply_dirichlet(K, r, np.array([], dtype=int), np.array([]))
    assert (Kc != K).nnz == 0 and np.array_equal(b, r)
    Kc, b = apply_dirichlet(K, r, np.arange(3), np.array([5.0, 6, 7]))
    assert np.array_equal(Kc.toarray(), np.eye(3)) and np.array_equal(b, [5, 6, 7])
    Kc, b = apply_dirichlet(K, r, np.array([1]), np.array([2.0]))
    assert np.array_equal(Kc.toarray()[1], [0, 1, 0])
    assert np.array_equal(Kc.toarray()[:, 1], [0, 1, 0])
    x = linear_solve(Kc, b)
    assert x[1] == 2.0
    # free rows still satisfy the original equations
    assert np.allclose((K @ x - r)[[0, 2]], 0, atol=1e-14)


def test_conflicting_constraints():
    with pytest.raises(ValueError, match="dof 3"):
        Constraints.build([np.array([3]), np.array([3])], [np.array([1.0]), np.array([2.0])])
    c = Constraints.build([np.array([3]), np.array([3])], [np.array([1.0]), np.array([1.0])])
    assert list(c.dofs) == [3]


# ----------------------------------------------------------------- newton


def test_newton_linear_one_iteration():
    A = sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]])
    x, rep = newton_solve(lambda x: (A, A @ x - np.array([3.0, 3.0])), np.zeros(2))
    assert rep.converged and rep.iterations == 1
    assert np.allclose(x, 1.0)


def test_newton_quadratic_rate():
    def assemble(x):
        return sp.csr_matrix([[3 * x[0] ** 2 + 1.0]]), np.array([x[0] ** 3 + x[0] - 10.0])

    x, rep = newton_solve(assemble, np.array([3.0]), tol_rel=1e-15, tol_abs=1e-14)
    assert rep.converged and x[0] == pytest.approx(2.0, rel=1e-14)
    rates = rep.rates()
    assert rates.size and rates[: max(len(rates) - 1, 1)].max() >= 1.9


def test_newton_rejects_zero_iterations():
    with pytest.raises(ValueError):
        newton_solve(lambda x: (sp.eye(1), x), np.zeros(1), max_iter=0)


def test_newton_reports_failure():
    def assemble(x):
        return sp.csr_matrix([[1.0]]), np.array([np.arctan(x[0]) * 50 + 1e3])

    _, rep = newton_solve(assemble, np.array([0.0]), max_iter=3)
    assert not rep.converged and len(rep.residual_norms) == 4


# ----------------------------------------------------------------- assembly


def heat_problem(mesh, values=None, dirichlet=(), neumann=(), params=UNIT_HEAT):
    f = Field("T", "scalar", mesh.n_nodes, values=values, dirichlet=list(dirichlet), neumann=list(neumann))
    return Problem(mesh, [f], [HeatPhysics(params, "T")])


def test_uniform_temperature_is_steady():
    mesh = generate_structured([(0, 1), (0, 1)], [3, 3], "quad4")
    p = heat_problem(mesh, values=np.full(mesh.n_nodes, 42.0))
    _, R = p.physics["T"].assemble(p, 1.0, 1.0)
    assert np.abs(R).max() < 1e-12


def test_rod_linear_steady_profile():
    mesh = generate_structured([(0, 1), (0, 0.1)], [10, 1], "quad4")
    p = heat_problem(mesh, dirichlet=[DirichletBC(mesh.nodes_in("left"), 0, 0.0),
                                      DirichletBC(mesh.nodes_in("right"), 0, 1.0)])
    res = run_transient(p, CouplingSchedule([["T"]], dt=1e13, t_end=1e13, tol_abs=1e-14))
    assert res.completed
    assert np.abs(p.fields["T"].values - mesh.nodes[:, 0]).max() < 1e-10


def test_fracture_zero_history_zero_residual():
    mesh = generate_structured([(0, 1), (0, 1)], [2, 2], "quad4")
    f = Field("phi", "phase", mesh.n_nodes)
    p = Problem(mesh, [f], [FracturePhysics(kn.FractureParams(G_c=1.0, ell=0.1))])
    _, R = p.physics["phi"].assemble(p, 1.0, 1.0)
    assert np.abs(R).max() == 0.0


def mech_problem(mesh, dirichlet=(), neumann=(), props=mech.ElasticProps(E=100.0, nu=0.25), split="none"):
    u = Field("u", "displacement", mesh.n_nodes, n_comp=mesh.dim, dirichlet=list(dirichlet), neumann=list(neumann))
    return Problem(mesh, [u], [MechanicsPhysics(props, "u", split=split)])


def test_zero_displacement_zero_residual():
    mesh = generate_structured([(0, 1), (0, 1)], [2, 2], "quad4")
    p = mech_problem(mesh)
    K, R = p.physics["u"].assemble(p, 0.0, 1.0)
    assert np.abs(R).max() == 0.0


@pytest.mark.parametrize("kind", ["quad4", "quad8", "tri3"])
def test_patch_test_uniform_strain(kind, rng):
    base = generate_structured([(0, 1), (0, 1)], [3, 3], kind)
    x = base.nodes.copy()
    inner = ~(np.isclose(x, 0) | np.isclose(x, 1)).any(axis=1)
    x[inner] += rng.uniform(-0.08, 0.08, (inner.sum(), 2))
    if kind == "quad8":
        corners, mids = base.elements[:, :4], base.elements[:, 4:]
        for e in range(base.n_elements):
            for k in range(4):
                x[mids[e, k]] = 0.5 * (x[corners[e, k]] + x[corners[e, (k + 1) % 4]])
    mesh = Mesh(x, base.elements, kind, node_sets=base.node_sets, facet_sets=base.facet_sets)
    G = np.array([[1e-3, 4e-4], [-2e-4, 5e-4]])
    exact = x @ G.T
    bnd = np.unique(np.concatenate([mesh.nodes_in(s) for s in ("left", "right", "top", "bottom")]))
    bcs = [DirichletBC(bnd, c, exact[bnd, c]) for c in range(2)]
    p = mech_problem(mesh, dirichlet=bcs)
    res = run_transient(p, CouplingSchedule([["u"]], dt=1.0, t_end=1.0, tol_abs=1e-14, tol_rel=1e-12))
    assert res.completed
    u = p.fields["u"].nodal()
    assert np.abs(u - exact).max() < 1e-12
    _, R = p.physics["u"].assemble(p, 1.0, 1.0)
    free = np.setdiff1d(np.arange(mesh.n_nodes), bnd)
    assert np.abs(R.reshape(-1, 2)[free]).max() < 1e-9
    sig = p.physics["u"].stress(p)
    assert np.ptp(sig[:, 0, 0]) < 1e-9 * np.abs(sig[:, 0, 0]).max()


@pytest.mark.parametrize("split", ["none", "no_tension"])
def test_tangent_symmetry(split, rng):
    mesh = generate_structured([(0, 1), (0, 1)], [3, 2], "quad4")
    p = mech_problem(mesh, split=split)
    p.fields["u"].values[:] = rng.normal(0, 1e-3, p.fields["u"].values.shape)
    K, _ = p.physics["u"].assemble(p, 0.0, 1.0)
    asym = abs(K - K.T).max()
    assert asym <= 1e-10 * abs(K).max()


def test_reaction_balances_applied_traction():
    mesh = generate_structured([(0, 4), (0, 1)], [8, 2], "quad4")
    left = mesh.nodes_in("left")
    corner = left[np.argmin(mesh.nodes[left, 1])]
    bcs = [DirichletBC(left, 0, 0.0), DirichletBC(np.array([corner]), 1, 0.0)]
    p = mech_problem(mesh, dirichlet=bcs, neumann=[NeumannBC("right", 3.0, component=0)])
    res = run_transient(p, CouplingSchedule([["u"]], dt=1.0, t_end=1.0, tol_abs=1e-13, tol_rel=1e-12))
    assert res.completed
    applied = 3.0 * 1.0
    reaction = p.physics["u"].reaction(p, left, 0)
    assert reaction + applied == pytest.approx(0.0, abs=1e-8 * applied)


# ----------------------------------------------------------------- transient


def sine_bar(n=20):
    mesh = generate_structured([(0, 1), (0, 0.05)], [n, 1], "quad4")
    T0 = np.sin(np.pi * mesh.nodes[:, 0])
    ends = np.concatenate([mesh.nodes_in("left"), mesh.nodes_in("right")])
    return heat_problem(mesh, values=T0, dirichlet=[DirichletBC(ends, 0, 0.0)])


def test_backward_euler_first_order():
    def endpoint(dt):
        p = sine_bar()
        run_transient(p, CouplingSchedule([["T"]], dt=dt, t_end=0.1, tol_abs=1e-14, tol_rel=1e-12))
        return p.fields["T"].values.copy()

    dt = 0.02
    ref = endpoint(dt / 16)
    errs = [np.linalg.norm(endpoint(d) - ref) for d in (dt, dt / 2, dt / 4)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 0.8) & (orders < 1.3)), orders


def test_zero_increments_return_initial_state():
    p = sine_bar()
    before = p.fields["T"].values.copy()
    res = run_transient(p, CouplingSchedule([["T"]], dt=0.1, t_end=0.0))
    assert res.completed and res.times == [] and np.array_equal(p.fields["T"].values, before)


def test_maximum_principle_after_source_removed():
    mesh = generate_structured([(0, 1), (0, 1)], [12, 12], "quad4")
    r = np.hypot(*(mesh.nodes - 0.5).T)
    p = heat_problem(mesh, values=np.where(r < 0.15, 100.0, 0.0))
    res = run_transient(p, CouplingSchedule([["T"]], dt=2e-3, t_end=0.1, tol_abs=1e-12),
                        observers=[lambda pr, t: {"T_max": pr.fields["T"].values.max()}])
    tmax = np.array(res.records["T_max"])
    assert np.all(np.diff(tmax) <= 1e-12 * tmax[0])


def coupled_pair(mesh, k=0.8):
    """Two heat-like fields coupled only through sources: ``a`` is fed by ``b`` and vice versa."""
    ends = np.concatenate([mesh.nodes_in("left"), mesh.nodes_in("right")])

    def kernel(own, other, src):
        def f(problem, ctx):
            return kn.heat_kernel(ctx.kernel_input(), UNIT_HEAT, None, src + k * problem.ip(other))
        return ScalarKernelPhysics(own, f)

    fa = Field("a", "scalar", mesh.n_nodes, dirichlet=[DirichletBC(ends, 0, 0.0)])
    fb = Field("b", "scalar", mesh.n_nodes, dirichlet=[DirichletBC(ends, 0, 0.0)])
    return Problem(mesh, [fa, fb], [kernel("a", "b", 1.0), kernel("b", "a", 0.0)])


def test_decoupled_fields_single_and_multi_pass_agree():
    mesh = generate_structured([(0, 1), (0, 0.2)], [6, 1], "quad4")
    out = []
    for passes in (1, 5):
        p = coupled_pair(mesh, k=0.0)
        run_transient(p, CouplingSchedule([["a"], ["b"]], dt=0.1, t_end=0.5, passes=passes, tol_abs=1e-14))
        out.append(np.concatenate([p.fields["a"].values, p.fields["b"].values]))
    assert np.abs(out[0] - out[1]).max() <= 1e-12


def test_staggered_passes_approach_simultaneous_solve():
    mesh = generate_structured([(0, 1), (0, 0.5)], [2, 1], "quad4")
    mono = coupled_pair(mesh)
    step_increment(mono, CouplingSchedule([["a", "b"]], dt=1.0, t_end=1.0, tol_abs=1e-15, tol_rel=1e-14,
                                          max_iter=200), 1.0, 1.0)
    ref = np.concatenate([mono.fields["a"].values, mono.fields["b"].values])
    diffs = []
    for passes in (1, 2, 4, 8):
        p = coupled_pair(mesh)
        step_increment(p, CouplingSchedule([["a"], ["b"]], dt=1.0, t_end=1.0, passes=passes, pass_tol=0.0,
                                           tol_abs=1e-15, tol_rel=1e-14), 1.0, 1.0)
        diffs.append(np.abs(np.concatenate([p.fields["a"].values, p.fields["b"].values]) - ref).max())
    assert np.all(np.diff(diffs) < 0) and diffs[-1] < 1e-3 * diffs[0]


def fracture_bar():
    mesh = generate_structured([(0, 1), (0, 0.1)], [20, 2], "quad4")
    left, right = mesh.nodes_in("left"), mesh.nodes_in("right")
    u = Field("u", "displacement", mesh.n_nodes, n_comp=2, dirichlet=[
        DirichletBC(left, 0, 0.0), DirichletBC(left, 1, 0.0), DirichletBC(right, 0, lambda t: 4e-3 * t)])
    phi = Field("phi", "phase", mesh.n_nodes)
    physics = [MechanicsPhysics(mech.ElasticProps(E=1000.0, nu=0.2), "u", split="no_tension", phase="phi",
                                k_res=1e-6),
               FracturePhysics(kn.FractureParams(G_c=1e-3, ell=0.1), "phi")]
    return Problem(mesh, [u, phi], physics)


def _state(p):
    return ({k: f.values.copy() for k, f in p.fields.items()}, {k: v.copy() for k, v in p.state.items()})


def _same(a, b):
    return all(np.array_equal(a[0][k], b[0][k]) for k in a[0]) and all(np.array_equal(a[1][k], b[1][k]) for k in a[1])


def test_failed_attempt_leaves_no_history():
    good = CouplingSchedule([["u"], ["phi"]], dt=1.0, t_end=1.0, passes=3)
    starved = CouplingSchedule([["u"], ["phi"]], dt=1.0, t_end=1.0, passes=3, max_iter=1, tol_rel=1e-14,
                               tol_abs=1e-20)
    fresh, retried = fracture_bar(), fracture_bar()
    step_increment(fresh, good, 1.0, 1.0)
    with pytest.raises(IncrementError):
        step_increment(retried, starved, 1.0, 1.0)
    assert retried.t == 0.0 and retried.increment == 0
    step_increment(retried, good, 1.0, 1.0)
    assert _same(_state(fresh), _state(retried))
    assert fresh.state["H"].max() > 0


def test_rerun_is_bitwise_deterministic():
    runs = []
    for _ in range(2):
        p = fracture_bar()
        run_transient(p, CouplingSchedule([["u"], ["phi"]], dt=0.5, t_end=2.0, passes=2))
        runs.append(_state(p))
    assert _same(*runs)


def test_checkpoint_round_trip(tmp_path):
    p = fracture_bar()
    sched = CouplingSchedule([["u"], ["phi"]], dt=0.5, t_end=1.0)
    run_transient(p, sched)
    path = tmp_path / "state.npz"
    save_checkpoint(p, path)
    q = fracture_bar()
    load_checkpoint(q, path)
    assert q.t == p.t and q.increment == p.increment and _same(_state(p), _state(q))
    run_transient(p, CouplingSchedule([["u"], ["phi"]], dt=0.5, t_end=1.0))
    run_transient(q, CouplingSchedule([["u"], ["phi"]], dt=0.5, t_end=1.0))
    assert _same(_state(p), _state(q))


def test_bisection_recovers_from_failed_step():
    calls = {"n": 0}
    mesh = generate_structured([(0, 1), (0, 0.1)], [4, 1], "quad4")

    def kernel(problem, ctx):
        calls["n"] += 1
        if ctx.dt > 0.3:
            raise FloatingPointError("step too large")
        return kn.heat_kernel(ctx.kernel_input(), UNIT_HEAT)

    f = Field("T", "scalar", mesh.n_nodes, values=np.ones(mesh.n_nodes))
    p = Problem(mesh, [f], [ScalarKernelPhysics("T", kernel)])
    res = run_transient(p, CouplingSchedule([["T"]], dt=1.0, t_end=1.0))
    assert res.completed and len(res.times) == 4 and res.times[-1] == 1.0


def test_failure_below_minimum_step_is_reported():
    mesh = generate_structured([(0, 1), (0, 0.1)], [4, 1], "quad4")

    def kernel(problem, ctx):
        raise FloatingPointError("always")

    f = Field("T", "scalar", mesh.n_nodes)
    p = Problem(mesh, [f], [ScalarKernelPhysics("T", kernel)])
    res = run_transient(p, CouplingSchedule([["T"]], dt=1.0, t_end=1.0))
    assert not res.completed and "t=" in res.message


def test_schedule_validation():
    with pytest.raises(ValueError):
        CouplingSchedule([["a"], ["a"]], dt=1.0, t_end=1.0)
    with pytest.raises(ValueError):
        CouplingSchedule([["a"]], dt=1.0, t_end=1.0, passes=0)
    mesh = generate_structured([(0, 1), (0, 1)], [1, 1], "quad4")
    p = heat_problem(mesh)
    with pytest.raises(KeyError):
        run_transient(p, CouplingSchedule([["missing"]], dt=1.0, t_end=1.0))
