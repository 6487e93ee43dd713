"""BDF time stepping for the coupled bulk/surface system.

Classical k-step BDF for linear problems; for nonlinear problems the
linearly implicit variant evaluates the nonlinearity at the extrapolated
value built from the k previous steps, so every step solves one constant
linear saddle system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse.linalg as spla

from . import assembly
from .mesh import Mesh2D
from .problems import ProblemSpec
from .saddle import StepMatrix, build_step_matrix

MAX_ORDER = 6
BOOTSTRAP_SUBSTEP_CAP = 1000


def _delta_fractions(k: int) -> List[Fraction]:
    # delta(xi) = sum_{l=1..k} (1/l) (1 - xi)^l, expanded exactly
    co = [Fraction(0)] * (k + 1)
    for l in range(1, k + 1):
        for j in range(l + 1):
            co[j] += Fraction(1, l) * comb(l, j) * (-1) ** j
    return co

def _gamma_fractions(k: int) -> List[Fraction]:
    # gamma(xi) = (1 - (1 - xi)^k) / xi via synthetic division
    num = [Fraction(0)] * (k + 1)
    num[0] = Fraction(1)
    for j in range(k + 1):
        num[j] -= comb(k, j) * (-1) ** j
    assert num[0] == 0
    return num[1:]


def _check_order(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_ORDER:
        raise ValueError(f"BDF order k must be an integer in [1, {MAX_ORDER}], got {k}")


def bdf_coefficients(k: int) -> np.ndarray:
    """Coefficients (delta_0, ..., delta_k) of the k-step BDF method."""
    _check_order(k)
    return np.array([float(c) for c in _delta_fractions(k)])


def extrapolation_coefficients(k: int) -> np.ndarray:
    """Coefficients (gamma_0, ..., gamma_{k-1}) of the BDF extrapolant."""
    _check_order(k)
    return np.array([float(c) for c in _gamma_fractions(k)])


@dataclass(frozen=True)
class BDFScheme:
    """Step count with method and extrapolation coefficients."""

    k: int
    delta: np.ndarray
    gamma: np.ndarray


def bdf_scheme(k: int) -> BDFScheme:
    return BDFScheme(k=k, delta=bdf_coefficients(k),
                     gamma=extrapolation_coefficients(k))


@dataclass
class Trajectory:
    """Time-indexed nodal solution vectors plus per-step diagnostics."""

    times: np.ndarray
    u_history: List[np.ndarray]
    w_history: List[np.ndarray]
    mass: np.ndarray
    energy: Optional[np.ndarray] = None

    @property
    def u_final(self) -> np.ndarray:
        return self.u_history[-1]

    @property
    def w_final(self) -> np.ndarray:
        return self.w_history[-1]


def _history_combination(coeffs, u_history):
    acc = coeffs[0] * u_history[0]
    for c, u in zip(coeffs[1:], u_history[1:]):
        acc = acc + c * u
    return acc


def step_linear(scheme: BDFScheme, K: StepMatrix, M, u_history: Sequence[np.ndarray],
                b1: np.ndarray, b2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One k-step BDF step of the linear system.

    u_history holds the k previous values, newest first. The first block of
    the right-hand side is b1 - (1/tau) M sum_j delta_j u^{n-j}; 1/tau is
    recovered from the scalar delta0/tau stored in the step matrix.
    """
    k = scheme.k
    if len(u_history) != k:
        raise ValueError(f"history must hold exactly {k} vectors, got {len(u_history)}")
    inv_tau = K.delta0_over_tau / scheme.delta[0]
    tail = _history_combination(scheme.delta[1:], u_history)
    rhs = np.concatenate([b1 - inv_tau * (M @ tail), b2])
    sol = K.solve(rhs)
    n = K.block_dim
    return sol[:n], sol[n:]


def step_nonlinear(scheme: BDFScheme, K: StepMatrix, M, u_history: Sequence[np.ndarray],
                   b1: np.ndarray, b2: np.ndarray,
                   F: Callable) -> Tuple[np.ndarray, np.ndarray]:
    """Linearly implicit step: b2 gains the extrapolated nonlinearity.

    The extrapolant sum_j gamma_j u^{n-j-1} reuses the same newest-first
    history; the step matrix is unchanged, so no nonlinear solve happens.
    """
    k = scheme.k
    if len(u_history) != k:
        raise ValueError(f"history must hold exactly {k} vectors, got {len(u_history)}")
    u_pred = _history_combination(scheme.gamma, u_history)
    b2_eff = b2 + assembly.nonlinearity_vector(M, F, u_pred)
    return step_linear(scheme, K, M, u_history, b1, b2_eff)


class _Operators:
    """Assembled matrices and load evaluation for one problem on one mesh."""

    def __init__(self, problem: ProblemSpec, mesh: Mesh2D):
        self.problem = problem
        self.mesh = mesh
        self.M_bulk = assembly.assemble_bulk_mass(mesh)
        self.M_surf = assembly.assemble_surface_mass(mesh)
        self.M = self.M_bulk + self.M_surf
        self.A = assembly.assemble_stiffness(mesh)
        self._mass_weights = np.asarray(self.M.sum(axis=0)).ravel()
        self._M_lu = None

    def loads(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        # Forcing pairs live on (bulk, surface), so each load combines the
        # bulk mass applied to the bulk part with the surface mass applied
        # to the surface part.
        p, mesh = self.problem, self.mesh
        b1 = assembly.load_vector(
            self.M_bulk, assembly.nodal_interpolate(p.f1_bulk, mesh, t)
        ) + assembly.load_vector(
            self.M_surf, assembly.nodal_interpolate(p.f1_surf, mesh, t)
        )
        b2 = assembly.load_vector(
            self.M_bulk, assembly.nodal_interpolate(p.f2_bulk, mesh, t)
        ) + assembly.load_vector(
            self.M_surf, assembly.nodal_interpolate(p.f2_surf, mesh, t)
        )
        return b1, b2

    def recover_w(self, u: np.ndarray, t: float) -> np.ndarray:
        # Second block equation: M w = A u + b2 (+ nonlinear term).
        _, b2 = self.loads(t)
        rhs = self.A @ u + b2
        if self.problem.kind == "nonlinear":
            rhs = rhs + assembly.nonlinearity_vector(
                self.M, self.problem.nonlinearity, u
            )
        if self._M_lu is None:
            self._M_lu = spla.splu(self.M.tocsc())
        return self._M_lu.solve(rhs)

    def mass_of(self, u: np.ndarray) -> float:
        return float(self._mass_weights @ u)

    def energy_of(self, u: np.ndarray) -> float:
        W = self.problem.potential
        return float(0.5 * (u @ (self.A @ u)) + self._mass_weights @ W(u))


def _bootstrap_substeps(tau: float, k: int) -> int:
    return min(BOOTSTRAP_SUBSTEP_CAP, max(1, ceil(tau ** (-(k - 1) / k))))


def _starting_values(ops: _Operators, tau: float, k: int, mode: str,
                     t_start: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    problem, mesh = ops.problem, ops.mesh
    if mode == "exact":
        if not problem.has_exact_solution:
            raise ValueError("start mode 'exact' needs exact solutions")
        return [
            (
                assembly.nodal_interpolate(problem.exact_u, mesh, t_start + j * tau),
                assembly.nodal_interpolate(problem.exact_w, mesh, t_start + j * tau),
            )
            for j in range(k)
        ]
    if mode != "bootstrap":
        raise ValueError(f"start mode must be 'exact' or 'bootstrap', got {mode!r}")

    u = assembly.nodal_interpolate(problem.u0, mesh, t_start)
    pairs = [(u, ops.recover_w(u, t_start))]
    if k == 1:
        return pairs

    # Advance the remaining k-1 coarse steps with graded BDF1 substeps so the
    # starting segment itself is accurate to the method order.
    m = _bootstrap_substeps(tau, k)
    sub = tau / m
    one = bdf_scheme(1)
    K1 = build_step_matrix(ops.M, ops.A, one.delta[0] / sub)
    for j in range(1, k):
        t = t_start + (j - 1) * tau
        for s in range(1, m + 1):
            ts = t + s * sub
            b1, b2 = ops.loads(ts)
            if problem.kind == "nonlinear":
                u, w = step_nonlinear(one, K1, ops.M, [u], b1, b2,
                                      problem.nonlinearity)
            else:
                u, w = step_linear(one, K1, ops.M, [u], b1, b2)
        pairs.append((u, w))
    return pairs


def starting_values(problem: ProblemSpec, mesh: Mesh2D, tau: float, k: int,
                    mode: str) -> List[Tuple[np.ndarray, np.ndarray]]:
    """k starting pairs (u^j, w^j) at t = 0, tau, ..., (k-1) tau.

    mode 'exact' interpolates the stated exact solution; 'bootstrap' takes
    u^0 from the initial data, recovers w^0 from the algebraic constraint,
    and integrates the remaining starts with BDF1 substeps.
    """
    _check_order(k)
    return _starting_values(_Operators(problem, mesh), tau, k, mode, 0.0)


def run(problem: ProblemSpec, mesh: Mesh2D, tau: float, T: float,
        scheme: Optional[BDFScheme] = None, start_mode: str = "auto",
        t_start: float = 0.0,
        starting_pairs: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None,
        ) -> Trajectory:
    """Advance the problem from t_start to T and record the trajectory.

    start_mode 'auto' picks 'exact' when the problem has an exact solution
    and 'bootstrap' otherwise. `starting_pairs` overrides both with caller
    supplied (u, w) pairs (newest last), which the self-convergence
    harness uses to seed runs from a reference trajectory.
    """
    if scheme is None:
        scheme = bdf_scheme(3)
    if not (tau > 0):
        raise ValueError(f"tau must be positive, got {tau}")
    span = T - t_start
    n_steps = round(span / tau)
    if n_steps < scheme.k - 1 or abs(n_steps * tau - span) > 1e-12 * max(1.0, abs(span)):
        raise ValueError(f"tau={tau} does not divide the time span {span}")

    ops = _Operators(problem, mesh)
    if starting_pairs is not None:
        if len(starting_pairs) != scheme.k:
            raise ValueError(
                f"need {scheme.k} starting pairs, got {len(starting_pairs)}"
            )
        pairs = [(np.asarray(u, dtype=float), np.asarray(w, dtype=float))
                 for u, w in starting_pairs]
    else:
        if start_mode == "auto":
            start_mode = "exact" if problem.has_exact_solution else "bootstrap"
        pairs = _starting_values(ops, tau, scheme.k, start_mode, t_start)

    K = build_step_matrix(ops.M, ops.A, scheme.delta[0] / tau)

    u_hist = [u for u, _ in pairs]
    w_hist = [w for _, w in pairs]
    recent = list(reversed(u_hist))  # newest first for the step functions

    nonlinear = problem.kind == "nonlinear"
    for n in range(scheme.k, n_steps + 1):
        t = t_start + n * tau
        b1, b2 = ops.loads(t)
        try:
            if nonlinear:
                u, w = step_nonlinear(scheme, K, ops.M, recent, b1, b2,
                                      problem.nonlinearity)
            else:
                u, w = step_linear(scheme, K, ops.M, recent, b1, b2)
        except ValueError as exc:
            raise RuntimeError(f"aborted at step {n} (t = {t}): {exc}") from exc
        if not np.isfinite(u).all():
            raise RuntimeError(
                f"non-finite solution at step {n} (t = {t}); the "
                f"extrapolated scheme is likely outside its stability region"
            )
        u_hist.append(u)
        w_hist.append(w)
        recent.insert(0, u)
        recent.pop()

    times = t_start + tau * np.arange(n_steps + 1)
    mass = np.array([ops.mass_of(u) for u in u_hist])
    energy = None
    if problem.potential is not None:
        energy = np.array([ops.energy_of(u) for u in u_hist])
    return Trajectory(times=times, u_history=u_hist, w_history=w_hist,
                      mass=mass, energy=energy)
