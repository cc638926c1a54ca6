"""Semi-implicit BDF projection integrators.

Exchange and DMI are implicit through the linear operator
``Lx = eps lap x - kappa curl x``; the cross products use the extrapolated
magnetization ``m_hat = 2 m^n - m^{n-1}`` (not normalised) and everything
else enters through the extrapolated explicit field
``h_tilde = 2 hhat^n - hhat^{n-1}``.  Each step solves one nonsymmetric
linear system matrix-free with GMRES and then normalises cell-wise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from chiralmag.grid import MagnetizationField, normalize
from chiralmag.operators import energy_data, linear_field, skyrmion_number
from chiralmag.physics import hhat_data, time_to_dimensionless

log = logging.getLogger(__name__)

LL = "ll"
HEAT = "heat"


class SolverFailure(RuntimeError):
    def __init__(self, message, residual=None, step=None):
        self.residual = residual
        self.step = step
        super().__init__(message)


class StateError(RuntimeError):
    pass


@dataclass(frozen=True)
class KrylovConfig:
    rtol: float = 1e-8
    maxiter: int = 500
    restart: int = 50

    def __post_init__(self):
        if not 0.0 < self.rtol < 1.0:
            raise ValueError("rtol must be in (0, 1)")
        if self.maxiter < 1:
            raise ValueError("maxiter must be >= 1")


@dataclass
class SolverState:
    """Two-level history of one integrator.

    ``m_prev`` and ``hhat_prev`` are ``None`` until the first (BDF1) step.
    Physical time is always ``step * dt_ps``.
    """

    grid: object
    m_curr: np.ndarray
    dt_ps: float
    kind: str = LL
    m_prev: np.ndarray | None = None
    hhat_curr: np.ndarray | None = None
    hhat_prev: np.ndarray | None = None
    step: int = 0
    energies: list = field(default_factory=list)

    def __post_init__(self):
        if not self.dt_ps > 0:
            raise ValueError("dt_ps must be > 0")
        if self.kind not in (LL, HEAT):
            raise ValueError(f"unknown dynamics kind {self.kind!r}")

    @property
    def t_ps(self):
        return self.step * self.dt_ps

    @property
    def field(self):
        return MagnetizationField(self.grid, self.m_curr)

    @property
    def has_history(self):
        return self.m_prev is not None


def new_state(field_, params, drive=None, dt_ps=1.0, kind=LL):
    """Fresh state at ``t = 0``; ``hhat^0`` is evaluated on ``m^0``."""
    m0 = np.array(field_.data, dtype=float)
    return SolverState(field_.grid, m0, dt_ps, kind,
                       hhat_curr=hhat_data(m0, field_.grid, params, drive, 0.0))


def extrapolate(state):
    if not state.has_history:
        raise StateError("two history levels required; take a BDF1 step first")
    return 2.0 * state.m_curr - state.m_prev, 2.0 * state.hhat_curr - state.hhat_prev


def _cross(a, b):
    return np.cross(a, b, axis=0)


def apply_operator(x, m_hat, params, dt, kind, grid, coeff=1.5):
    """Left-hand side of the semi-implicit step applied to ``x``.

    ``coeff / dt * x + m_hat x Lx + alpha m_hat x (m_hat x Lx)`` for LL, and
    ``coeff / dt * x + m_hat x (m_hat x Lx)`` for heat flow.  ``coeff`` is
    3/2 for BDF2 and 1 for BDF1.
    """
    Lx = linear_field(x, grid, params)
    mxL = _cross(m_hat, Lx)
    if kind == LL:
        return coeff / dt * x + mxL + params.alpha * _cross(m_hat, mxL)
    return coeff / dt * x + _cross(m_hat, mxL)


def _rhs(m_hat, h_tilde, base, params, kind):
    mxh = _cross(m_hat, h_tilde)
    if kind == LL:
        return base - mxh - params.alpha * _cross(m_hat, mxh)
    return base - _cross(m_hat, mxh)


def _solve(m_hat, rhs, params, dt, kind, grid, coeff, krylov, x0, step):
    shape = rhs.shape
    n = rhs.size
    scale = dt / coeff

    def matvec(v):
        return scale * apply_operator(v.reshape(shape), m_hat, params, dt, kind, grid, coeff).ravel()

    A = LinearOperator((n, n), matvec=matvec, dtype=float)
    b = scale * rhs.ravel()
    x, info = gmres(A, b, x0=x0.ravel(), rtol=krylov.rtol, atol=0.0,
                    restart=krylov.restart, maxiter=krylov.maxiter)
    res = np.linalg.norm(b - matvec(x)) / max(np.linalg.norm(b), 1e-300)
    if info != 0 and res > krylov.rtol:
        raise SolverFailure(f"GMRES did not converge at step {step}: relative residual {res:.3e}",
                            residual=res, step=step)
    return x.reshape(shape)


def _advance(state, params, drive, m_hat, h_tilde, base, coeff, krylov):
    grid = state.grid
    dt = time_to_dimensionless(state.dt_ps, params)
    rhs = _rhs(m_hat, h_tilde, base, params, state.kind)
    m_tilde = _solve(m_hat, rhs, params, dt, state.kind, grid, coeff, krylov, m_hat, state.step + 1)
    m_new = normalize(m_tilde)
    t_new = (state.step + 1) * state.dt_ps
    return replace(
        state,
        m_prev=state.m_curr,
        m_curr=m_new,
        hhat_prev=state.hhat_curr,
        hhat_curr=hhat_data(m_new, grid, params, drive, t_new),
        step=state.step + 1,
    )


def _explicit_levels(state, params, drive):
    """``hhat`` at levels n and n-1 with drives evaluated at ``t^{n+1}``."""
    t_next = (state.step + 1) * state.dt_ps
    grid = state.grid
    if drive is None or drive.is_static():
        return state.hhat_curr, state.hhat_prev
    h_n = hhat_data(state.m_curr, grid, params, drive, t_next)
    h_p = None if state.m_prev is None else hhat_data(state.m_prev, grid, params, drive, t_next)
    return h_n, h_p


def bdf1_step(state, params, drive=None, krylov=KrylovConfig()):
    """First-order start-up step: ``m_hat = m^n``, ``h_tilde = hhat^n``."""
    h_n, _ = _explicit_levels(state, params, drive)
    dt = time_to_dimensionless(state.dt_ps, params)
    return _advance(state, params, drive, state.m_curr, h_n, state.m_curr / dt, 1.0, krylov)


def bdf2_step(state, params, drive=None, krylov=KrylovConfig()):
    if not state.has_history:
        raise StateError("BDF2 needs two history levels; take a BDF1 step first")
    h_n, h_p = _explicit_levels(state, params, drive)
    m_hat = 2.0 * state.m_curr - state.m_prev
    h_tilde = 2.0 * h_n - h_p
    dt = time_to_dimensionless(state.dt_ps, params)
    base = (4.0 * state.m_curr - state.m_prev) / (2.0 * dt)
    return _advance(state, params, drive, m_hat, h_tilde, base, 1.5, krylov)


def _check_kind(state, kind):
    if state.kind != kind:
        raise StateError(f"state integrates {state.kind!r}, not {kind!r}")


def bdf1_ll_step(state, params, drive=None, krylov=KrylovConfig()):
    _check_kind(state, LL)
    return bdf1_step(state, params, drive, krylov)


def bdf2_ll_step(state, params, drive=None, krylov=KrylovConfig()):
    _check_kind(state, LL)
    return bdf2_step(state, params, drive, krylov)


def bdf1_heatflow_step(state, params, drive=None, krylov=KrylovConfig()):
    _check_kind(state, HEAT)
    return bdf1_step(state, params, drive, krylov)


def bdf2_heatflow_step(state, params, drive=None, krylov=KrylovConfig()):
    _check_kind(state, HEAT)
    return bdf2_step(state, params, drive, krylov)


def step(state, params, drive=None, krylov=KrylovConfig()):
    """BDF1 when only ``m^0`` is known, BDF2 afterwards."""
    if state.has_history:
        return bdf2_step(state, params, drive, krylov)
    return bdf1_step(state, params, drive, krylov)


@dataclass
class TraceRecord:
    step: int
    t_ps: float
    energy: float
    energy_J: float
    m_avg: tuple
    Q: float

    COLUMNS = ("step", "t_ps", "energy", "energy_J", "m1_avg", "m2_avg", "m3_avg", "Q")

    def row(self):
        return (self.step, self.t_ps, self.energy, self.energy_J, *self.m_avg, self.Q)


def record(state, params, drive=None, energy=None):
    m = state.m_curr
    if energy is None:
        energy = energy_data(m, state.grid, params, drive)
    avg = tuple(float(v) for v in m.reshape(3, -1).mean(axis=1))
    return TraceRecord(state.step, state.t_ps, energy, energy * params.energy_scale, avg,
                       skyrmion_number(state.field))


def steady(e_prev, e_curr, rtol=1e-9, atol=1e-18):
    """Relative energy change below ``rtol`` (absolute ``atol`` when ``I`` is ~0)."""
    change = abs(e_curr - e_prev)
    if abs(e_prev) <= atol:
        return change < atol
    return change / abs(e_prev) < rtol


@dataclass
class RunResult:
    state: SolverState
    trace: list
    converged: bool

    @property
    def field(self):
        return self.state.field


def run_to_steady(state, params, drive=None, max_steps=100000, stride=10,
                  rtol=1e-9, krylov=KrylovConfig(), callback=None):
    """Step until the relative energy change per step drops below ``rtol``.

    Returns a :class:`RunResult`; ``converged`` is False when ``max_steps``
    ran out.  ``state.energies`` receives the energy after every step.
    """
    e_prev = energy_data(state.m_curr, state.grid, params, drive)
    if not state.energies:
        state.energies.append(e_prev)
    trace = [record(state, params, drive, e_prev)]
    converged = False
    for _ in range(max_steps):
        state = step(state, params, drive, krylov)
        e = energy_data(state.m_curr, state.grid, params, drive)
        state.energies.append(e)
        done = steady(e_prev, e, rtol)
        if state.step % stride == 0 or done:
            trace.append(record(state, params, drive, e))
        if callback is not None:
            callback(state, e)
        if done:
            converged = True
            break
        e_prev = e
    if not converged:
        log.warning("no steady state after %d steps", max_steps)
    return RunResult(state, trace, converged)


def run_steps(state, params, drive=None, n_steps=1, stride=10, krylov=KrylovConfig(), callback=None):
    """Take exactly ``n_steps`` steps and record the trace every ``stride`` steps."""
    e = energy_data(state.m_curr, state.grid, params, drive)
    if not state.energies:
        state.energies.append(e)
    trace = [record(state, params, drive, e)]
    for _ in range(n_steps):
        state = step(state, params, drive, krylov)
        e = energy_data(state.m_curr, state.grid, params, drive)
        state.energies.append(e)
        if state.step % stride == 0:
            trace.append(record(state, params, drive, e))
        if callback is not None:
            callback(state, e)
    return RunResult(state, trace, False)
