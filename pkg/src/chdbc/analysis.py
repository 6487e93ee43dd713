"""Discrete norms, convergence orders, and physical diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import assembly
from .integrator import Trajectory
from .mesh import Mesh2D, mesh_size
from .problems import ProblemSpec


@dataclass(frozen=True)
class ErrorReport:
    """Final-time errors of one run in the combined bulk+surface norms."""

    h: float
    tau: float
    nodes: int
    err_L2: float
    err_H1: float
    err_w_L2: float
    err_w_H1: float


def l2_norm(M, e: np.ndarray) -> float:
    """Discrete L2 norm sqrt(e^T M e) over bulk and surface together."""
    e = np.asarray(e, dtype=float)
    if e.shape != (M.shape[0],):
        raise ValueError(f"vector length {e.shape} does not match {M.shape[0]}")
    q = float(e @ (M @ e))
    if q < -1e-12 * max(1.0, float(e @ e)):
        raise ValueError(f"quadratic form is negative ({q}); M is not SPD")
    return math.sqrt(max(q, 0.0))


def h1_norm(M, A, e: np.ndarray) -> float:
    """Discrete H1 norm sqrt(e^T (A + M) e)."""
    e = np.asarray(e, dtype=float)
    if e.shape != (M.shape[0],):
        raise ValueError(f"vector length {e.shape} does not match {M.shape[0]}")
    q = float(e @ (A @ e)) + float(e @ (M @ e))
    if q < -1e-12 * max(1.0, float(e @ e)):
        raise ValueError(f"quadratic form is negative ({q})")
    return math.sqrt(max(q, 0.0))


def final_error(trajectory: Trajectory, problem: ProblemSpec,
                mesh: Mesh2D) -> ErrorReport:
    """Errors at the final time against the interpolated exact solution.

    The comparison target is the nodal interpolant, whose own L2 error is
    O(h^2) and therefore does not pollute the measured second order.
    """
    if not problem.has_exact_solution:
        raise ValueError("final_error needs a problem with exact solutions")
    M = assembly.assemble_mass(mesh)
    A = assembly.assemble_stiffness(mesh)
    T = float(trajectory.times[-1])
    eu = trajectory.u_final - assembly.nodal_interpolate(problem.exact_u, mesh, T)
    ew = trajectory.w_final - assembly.nodal_interpolate(problem.exact_w, mesh, T)
    tau = float(trajectory.times[1] - trajectory.times[0]) if len(trajectory.times) > 1 else 0.0
    return ErrorReport(
        h=mesh_size(mesh),
        tau=tau,
        nodes=mesh.node_count,
        err_L2=l2_norm(M, eu),
        err_H1=h1_norm(M, A, eu),
        err_w_L2=l2_norm(M, ew),
        err_w_H1=h1_norm(M, A, ew),
    )


def eoc(errors: Sequence[float], hs: Sequence[float]) -> List[Optional[float]]:
    """Experimental orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}).

    A zero error makes the order undefined; those entries are None rather
    than +/-inf so downstream tables can print a sentinel.
    """
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need equally long error/h lists with >= 2 entries")
    if any(e < 0 for e in errors) or any(h <= 0 for h in hs):
        raise ValueError("errors must be nonnegative and hs positive")
    if any(h1 <= h2 for h1, h2 in zip(hs, hs[1:])):
        raise ValueError("hs must be strictly decreasing")
    orders: List[Optional[float]] = []
    for e1, e2, h1, h2 in zip(errors, errors[1:], hs, hs[1:]):
        if e1 == 0.0 or e2 == 0.0:
            orders.append(None)
        else:
            orders.append(math.log(e1 / e2) / math.log(h1 / h2))
    return orders


def total_mass(M, u: np.ndarray) -> float:
    """The conserved scalar 1^T M u (bulk plus boundary content)."""
    u = np.asarray(u, dtype=float)
    return float(np.sum(M @ u))


def gl_energy(A, M, W: Callable, u: np.ndarray) -> float:
    """Discrete Ginzburg-Landau energy (1/2) u^T A u + 1^T M W(u).

    The potential is interpolated at the nodes before integration, matching
    the assembly convention for nonlinear terms.
    """
    u = np.asarray(u, dtype=float)
    vals = np.asarray(W(u), dtype=float)
    return float(0.5 * (u @ (A @ u)) + np.sum(M @ vals))
