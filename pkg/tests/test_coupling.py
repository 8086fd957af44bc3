from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
import scipy.optimize
import scipy.sparse
import scipy.stats

from mixlimit.coupling import (
    CouplingProblem,
    corollary_sum_experiment,
    solve_coupling,
    verify_prop1_suite,
)
from mixlimit.probcore import FiniteJointDistribution
from mixlimit.processes import ProcessSpec


def exact_vertex_oracle(pmf_fractions, atoms, two_eps):
    """Enumerate every LP vertex in exact rational arithmetic (2x2 scale)."""
    nx = len(pmf_fractions)
    nz = len(pmf_fractions[0])
    px = [sum(row) for row in pmf_fractions]
    pz = [sum(pmf_fractions[i][k] for i in range(nx)) for k in range(nz)]
    nvar = nx * nz * nx
    vid = lambda i, k, j: (i * nz + k) * nx + j
    rows, rhs = [], []
    for i in range(nx):
        for k in range(nz):
            r = [Fraction(0)] * nvar
            for j in range(nx):
                r[vid(i, k, j)] = Fraction(1)
            rows.append(r)
            rhs.append(pmf_fractions[i][k])
    for k in range(nz):
        for j in range(nx):
            r = [Fraction(0)] * nvar
            for i in range(nx):
                r[vid(i, k, j)] = Fraction(1)
            rows.append(r)
            rhs.append(pz[k] * px[j])
    cost = [
        Fraction(1) if abs(atoms[i] - atoms[j]) > two_eps else Fraction(0)
        for i in range(nx) for k in range(nz) for j in range(nx)
    ]
    m = len(rows)

    def eliminate(mat, ncols):
        piv = 0
        pivcols = []
        for c in range(ncols):
            p = next((r for r in range(piv, len(mat)) if mat[r][c] != 0), None)
            if p is None:
                continue
            mat[piv], mat[p] = mat[p], mat[piv]
            pv = mat[piv][c]
            mat[piv] = [v / pv for v in mat[piv]]
            for r in range(len(mat)):
                if r != piv and mat[r][c] != 0:
                    f = mat[r][c]
                    mat[r] = [a - f * b for a, b in zip(mat[r], mat[piv])]
            pivcols.append(c)
            piv += 1
        return piv, pivcols

    rank, _ = eliminate([row[:] for row in rows], nvar)

    def solve_basis(cols):
        mat = [[rows[r][c] for c in cols] + [rhs[r]] for r in range(m)]
        piv, pivcols = eliminate(mat, len(cols))
        if piv < len(cols):
            return None
        for r in range(piv, m):
            if mat[r][-1] != 0:
                return None
        sol = [mat[pivcols.index(c)][-1] if c in pivcols else Fraction(0)
               for c in range(len(cols))]
        if any(v < 0 for v in sol):
            return None
        return sol

    best = None
    for cols in combinations(range(nvar), rank):
        sol = solve_basis(list(cols))
        if sol is None:
            continue
        obj = sum(c * v for c, v in zip([cost[c] for c in cols], sol))
        if best is None or obj < best:
            best = obj
    return best


def duality_certificate(joint, epsilon, triple_objective):
    """Verify LP optimality by exhibiting a feasible dual with equal value."""
    ax = joint.atoms_x
    nx, nz = joint.pmf.shape
    nvar = nx * nz * nx
    vid = lambda i, k, j: (i * nz + k) * nx + j
    miss = np.abs(ax[:, None, 0] - ax[None, :, 0]) > 2 * epsilon
    cost = np.zeros(nvar)
    rows_a, cols_a, rhs = [], [], []
    r = 0
    for i in range(nx):
        for k in range(nz):
            for j in range(nx):
                rows_a.append(r)
                cols_a.append(vid(i, k, j))
                if miss[i, j]:
                    cost[vid(i, k, j)] = 1.0
            rhs.append(joint.pmf[i, k])
            r += 1
    px, pz = joint.margin_x, joint.margin_z
    for k in range(nz):
        for j in range(nx):
            for i in range(nx):
                rows_a.append(r)
                cols_a.append(vid(i, k, j))
            rhs.append(pz[k] * px[j])
            r += 1
    A = scipy.sparse.csr_matrix((np.ones(len(rows_a)), (rows_a, cols_a)), shape=(r, nvar))
    res = scipy.optimize.linprog(cost, A_eq=A, b_eq=np.asarray(rhs), bounds=(0, None),
                                 method="highs")
    y = res.eqlin.marginals
    reduced = cost - A.T @ y
    assert np.all(reduced >= -1e-9), "dual infeasibility"
    dual_value = float(np.asarray(rhs) @ y)
    assert dual_value == pytest.approx(triple_objective, abs=1e-9)


def joint_2x2(pmf):
    return FiniteJointDistribution([0.0, 1.0], [0.0, 1.0], pmf)


# ---------------------------------------------------------------- solve

def test_independent_joint_objective_zero():
    j = joint_2x2([[0.35, 0.35], [0.15, 0.15]])   # product of (0.7, 0.3) x (0.5, 0.5)
    prob = CouplingProblem(joint=j, epsilon=0.4, net=[0.0, 1.0], delta=0.0)
    sol = solve_coupling(prob)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)
    assert sol.alpha == pytest.approx(0.0, abs=1e-12)


def test_fair_bit_fully_dependent():
    j = joint_2x2([[0.5, 0.0], [0.0, 0.5]])
    prob = CouplingProblem(joint=j, epsilon=0.4, net=[0.0, 1.0], delta=0.0)
    sol = solve_coupling(prob)
    assert sol.objective == pytest.approx(0.5, abs=1e-9)
    assert sol.bound == pytest.approx(4 * np.sqrt(2) * 0.25, abs=1e-12)
    assert sol.objective <= sol.bound
    oracle = exact_vertex_oracle(
        [[Fraction(1, 2), Fraction(0)], [Fraction(0), Fraction(1, 2)]], [0.0, 1.0], Fraction(4, 5)
    )
    assert float(oracle) == 0.5


def test_weakly_dependent_2x2_vertex_oracle():
    pmf = [[0.3, 0.2], [0.2, 0.3]]
    j = joint_2x2(pmf)
    prob = CouplingProblem(joint=j, epsilon=0.4, net=[0.0, 1.0], delta=0.0)
    sol = solve_coupling(prob)
    oracle = exact_vertex_oracle(
        [[Fraction(3, 10), Fraction(2, 10)], [Fraction(2, 10), Fraction(3, 10)]],
        [0.0, 1.0], Fraction(4, 5),
    )
    assert float(oracle) == pytest.approx(0.1, abs=1e-15)   # frozen before the build
    assert sol.objective == pytest.approx(float(oracle), abs=1e-9)
    assert sol.alpha == pytest.approx(0.05, abs=1e-12)
    assert sol.objective <= sol.bound
    duality_certificate(j, 0.4, sol.objective)


def test_solution_invariants():
    j = joint_2x2([[0.4, 0.1], [0.2, 0.3]])
    sol = solve_coupling(CouplingProblem(joint=j, epsilon=0.4, net=[0.0, 1.0], delta=0.0))
    t = sol.triple_pmf
    assert np.allclose(t.sum(axis=2), j.pmf, atol=1e-9)                # (X, Z) marginal
    indep = np.einsum("ikj->kj", t)
    assert np.allclose(indep, np.outer(j.margin_z, j.margin_x), atol=1e-9)
    assert sol.residual_marginal < 1e-9 and sol.residual_independence < 1e-9


def test_objective_monotone_in_epsilon():
    rng = np.random.default_rng(5)
    atoms = np.array([0.0, 0.7, 1.8])
    pmf = rng.random((3, 3))
    pmf /= pmf.sum()
    j = FiniteJointDistribution(atoms, atoms, pmf)
    objs = []
    for eps in (0.2, 0.5, 1.0):
        prob = CouplingProblem(joint=j, epsilon=eps, net=atoms, delta=0.0)
        objs.append(solve_coupling(prob).objective)
    assert objs[0] >= objs[1] - 1e-12 >= objs[2] - 2e-12


def test_objective_below_product_baseline():
    rng = np.random.default_rng(6)
    pmf = rng.random((3, 3))
    pmf /= pmf.sum()
    atoms = np.array([0.0, 1.0, 2.0])
    j = FiniteJointDistribution(atoms, atoms, pmf)
    sol = solve_coupling(CouplingProblem(joint=j, epsilon=0.4, net=atoms, delta=0.0))
    px = j.margin_x
    miss = np.abs(atoms[:, None] - atoms[None, :]) > 0.8
    product_obj = float(px @ miss @ px)   # feasible baseline: Y independent copy
    assert sol.objective <= product_obj + 1e-9


def test_relabeling_atoms_preserves_objective():
    pmf = np.array([[0.25, 0.15, 0.05], [0.1, 0.2, 0.05], [0.05, 0.05, 0.1]])
    atoms = np.array([0.0, 1.0, 2.0])
    j1 = FiniteJointDistribution(atoms, atoms, pmf)
    perm = [2, 0, 1]
    j2 = FiniteJointDistribution(atoms[perm], atoms, pmf[perm])
    s1 = solve_coupling(CouplingProblem(joint=j1, epsilon=0.4, net=atoms, delta=0.0))
    s2 = solve_coupling(CouplingProblem(joint=j2, epsilon=0.4, net=atoms, delta=0.0))
    assert s1.objective == pytest.approx(s2.objective, abs=1e-9)


def test_degenerate_single_atom_pair():
    j = FiniteJointDistribution([0.0, 1.0], [0.0, 1.0], [[1.0, 0.0], [0.0, 0.0]])
    sol = solve_coupling(CouplingProblem(joint=j, epsilon=0.1, net=[0.0], delta=0.0))
    assert sol.objective == pytest.approx(0.0, abs=1e-12)


def test_problem_validation():
    j = joint_2x2([[0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(ValueError, match="covers only"):
        CouplingProblem(joint=j, epsilon=0.1, net=[0.0], delta=0.0)  # atom 1 uncovered
    CouplingProblem(joint=j, epsilon=0.1, net=[0.0], delta=0.5)      # allowed: delta soaks it
    with pytest.raises(ValueError, match="delta"):
        CouplingProblem(joint=j, epsilon=0.1, net=[0.0, 1.0], delta=1.0)
    with pytest.raises(ValueError, match="epsilon"):
        CouplingProblem(joint=j, epsilon=0.0, net=[0.0, 1.0], delta=0.0)


def test_size_limit():
    n = 21
    pmf = np.eye(n) / n
    j = FiniteJointDistribution(np.arange(n), np.arange(n), pmf)
    with pytest.raises(ValueError, match="limit"):
        solve_coupling(CouplingProblem(joint=j, epsilon=0.4, net=np.arange(n), delta=0.0))


def test_suite_randomized_3x3_bound_and_residuals():
    rng = np.random.default_rng(7)
    atoms = np.array([0.0, 1.0, 2.0])
    cases = []
    for _ in range(10):
        pmf = rng.random((3, 3))
        pmf /= pmf.sum()
        j = FiniteJointDistribution(atoms, atoms, pmf)
        cases.append(CouplingProblem(joint=j, epsilon=0.4, net=atoms, delta=0.0))
    report = verify_prop1_suite(cases)
    assert report["all_pass"]
    for row in report["cases"]:
        assert row["objective"] <= row["bound"] + 1e-9
        assert row["residual_marginal"] < 1e-9
        assert row["residual_independence"] < 1e-9
        assert set(row) == {"case_id", "objective", "bound", "alpha", "N", "delta",
                            "residual_marginal", "residual_independence", "pass"}


# ---------------------------------------------------------------- corollary

def test_independent_normals_fit_convolution():
    rep = corollary_sum_experiment(
        ProcessSpec(family="iid"), ProcessSpec(family="iid"),
        mode="independent", n=256, replications=100_000, seed=8,
    )
    assert rep["rows"][0]["ks"] < 0.02


def test_negative_control_misses_convolution():
    # X = Z: the sum is N(0,4); its KS distance to N(0,2) has the
    # closed-form value sup_x |Phi(x/2) - Phi(x/sqrt(2))|
    res = scipy.optimize.minimize_scalar(
        lambda x: -abs(scipy.stats.norm.cdf(x / 2) - scipy.stats.norm.cdf(x / np.sqrt(2))),
        bounds=(0.1, 5.0), method="bounded",
    )
    oracle = -res.fun
    assert oracle == pytest.approx(0.08303, abs=1e-5)
    rep = corollary_sum_experiment(
        ProcessSpec(family="iid"), mode="duplicate", n=256,
        replications=100_000, seed=9,
    )
    ks = rep["rows"][0]["ks"]
    assert ks == pytest.approx(oracle, abs=0.01)
    assert ks > 0.05


def test_lagged_blocks_decay_toward_independence():
    rep = corollary_sum_experiment(
        ProcessSpec(family="ar1", phi=0.5), mode="lagged_blocks",
        lags=(0, 2, 4, 8, 16), replications=100_000, seed=10, block_length=4,
    )
    ks = {r["grid"]: r["ks"] for r in rep["rows"]}
    assert ks[16] < 0.012
    assert ks[0] > 2.0 * ks[16]
    bounds = {r["grid"]: r["alpha_bound"] for r in rep["rows"]}
    assert bounds[16] < bounds[0]
