"""Brute-force bounds used to check that the closed-form regions are sharp.

Nothing here calls the closed-form region code. Nonresponse bounds come from
enumerating the corners of the box of unobservable quantities. Misclassification
bounds come from extremising ``P(y = 1)`` over every joint distribution of
true and reported values consistent with the observed shares and the error
bound. That feasible set is a polytope with at most nine coordinates, so all
of its vertices are enumerated directly.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ValidationError
from .regions import (
    ErrorBound,
    MisclassAllScenario,
    MisclassSkipScenario,
    NonresponseAllScenario,
    NonresponseSkipScenario,
    UnitInterval,
)

FEAS_TOL = 1e-9
_DET_TOL = 1e-12


def polytope_vertices(a_eq, b_eq, a_ub, b_ub, tol=FEAS_TOL):
    """All vertices of ``{x : a_eq x = b_eq, a_ub x <= b_ub}``.

    Each vertex is the solution of the equalities plus ``n - m`` active
    inequalities, with ``n`` variables and ``m`` independent equality rows.
    Returns an array of shape ``(k, n)``; empty if the set is infeasible.
    """
    a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float)
    a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_ub = np.asarray(b_ub, dtype=float)
    n = a_eq.shape[1]
    m = np.linalg.matrix_rank(a_eq)
    if m < a_eq.shape[0]:
        raise ValueError("equality rows must be linearly independent")
    combos = np.array(list(itertools.combinations(range(a_ub.shape[0]), n - m)), dtype=int)
    if combos.size == 0:
        combos = combos.reshape(1, 0)
    k = len(combos)
    mats = np.empty((k, n, n))
    rhs = np.empty((k, n))
    mats[:, :m, :] = a_eq
    rhs[:, :m] = b_eq
    mats[:, m:, :] = a_ub[combos]
    rhs[:, m:] = b_ub[combos]
    keep = np.abs(np.linalg.det(mats)) > _DET_TOL
    if not keep.any():
        return np.empty((0, n))
    xs = np.linalg.solve(mats[keep], rhs[keep][..., None])[..., 0]
    ok = np.all(a_ub @ xs.T <= b_ub[:, None] + tol, axis=0)
    ok &= np.all(np.abs(a_eq @ xs.T - b_eq[:, None]) <= tol, axis=0)
    return xs[ok]


def lp_range(objective, a_eq, b_eq, a_ub, b_ub):
    """(min, max) of a linear objective over a bounded polytope."""
    verts = polytope_vertices(a_eq, b_eq, a_ub, b_ub)
    if len(verts) == 0:
        raise ValidationError("observables are infeasible under the stated assumption",
                              "scenario")
    vals = verts @ np.asarray(objective, dtype=float)
    return float(vals.min()), float(vals.max())


def _to_interval(lo, hi):
    return UnitInterval(min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0))


# Nonresponse: corners of the box of unobserved means and masses.

def _nr_all_oracle(s: NonresponseAllScenario):
    vals = [s.mean_resp * (1.0 - s.p_nonresp) + u * s.p_nonresp for u in (0.0, 1.0)]
    return _to_interval(min(vals), max(vals))


def _nr_skip_oracle(s: NonresponseSkipScenario):
    # Unknowns: mean of g(y) among asked-but-silent, mean among x=1 opening
    # nonrespondents, and the mass of x=1 among opening nonrespondents. x=0
    # forces y=0, so the rest of the opening nonrespondents contribute nothing.
    known = s.mean_resp * s.p_y_resp
    vals = [
        known + u_follow * s.p_x_resp_y_nonresp + u_open * mass
        for u_follow, u_open, mass in itertools.product((0.0, 1.0), (0.0, 1.0),
                                                        (0.0, s.p_x_nonresp))
    ]
    return _to_interval(min(vals), max(vals))


# Misclassification: joint distributions of (true, reported) cells.

def _correctness_rows(cells, n_true, n_rep, variant, lam):
    """Inequality rows ``-(...) <= -(...)`` encoding the error bound."""
    rows, rhs = [], []
    size = n_true * n_rep
    idx = {(t, r): t * n_rep + r for t in range(n_true) for r in range(n_rep)}
    if variant is ErrorBound.JOINT:
        row = np.zeros(size)
        for c in cells:
            row[idx[c, c]] = -1.0
        rows.append(row)
        rhs.append(-(1.0 - lam))
    else:
        # P(report = c | true = c) >= 1 - lam, cleared of the denominator.
        for c in cells:
            row = np.zeros(size)
            for r in range(n_rep):
                row[idx[c, r]] += 1.0 - lam
            row[idx[c, c]] -= 1.0
            rows.append(row)
            rhs.append(0.0)
    return rows, rhs


def _mc_oracle(reported_shares, true_one_cells, assumption):
    """Range of P(y=1) given reported-cell shares over a common cell lattice."""
    n = len(reported_shares)
    size = n * n
    a_eq = np.zeros((n, size))
    for r in range(n):
        for t in range(n):
            a_eq[r, t * n + r] = 1.0
    a_ub = [-np.eye(size)[i] for i in range(size)]
    b_ub = [0.0] * size
    rows, rhs = _correctness_rows(range(n), n, n, assumption.variant, assumption.lam)
    a_ub += rows
    b_ub += rhs
    objective = np.zeros(size)
    for t in true_one_cells:
        objective[t * n:(t + 1) * n] = 1.0
    lo, hi = lp_range(objective, a_eq, np.asarray(reported_shares), np.array(a_ub),
                      np.array(b_ub))
    return _to_interval(lo, hi)


def _mc_all_oracle(s: MisclassAllScenario):
    # Cells: 0 -> y=0, 1 -> y=1.
    return _mc_oracle([1.0 - s.p_report, s.p_report], [1], s.assumption)


def _mc_skip_oracle(s: MisclassSkipScenario):
    # Cells: 0 -> (x,y)=(0,0), 1 -> (1,0), 2 -> (1,1). The (0,1) cell is
    # excluded for both true and reported values by skip logic.
    shares = [1.0 - s.p_x_report, s.p_x_report - s.p_report, s.p_report]
    if min(shares) < -FEAS_TOL:
        raise ValidationError("reported shares violate skip logic", "p_report")
    return _mc_oracle([max(v, 0.0) for v in shares], [2], s.assumption)


def sharpness_oracle(scenario) -> UnitInterval:
    """Bounds on the target parameter found by brute-force extremisation."""
    if isinstance(scenario, NonresponseAllScenario):
        return _nr_all_oracle(scenario)
    if isinstance(scenario, NonresponseSkipScenario):
        return _nr_skip_oracle(scenario)
    if isinstance(scenario, MisclassAllScenario):
        return _mc_all_oracle(scenario)
    if isinstance(scenario, MisclassSkipScenario):
        return _mc_skip_oracle(scenario)
    raise ValidationError(f"unsupported scenario type {type(scenario).__name__}", "scenario")
