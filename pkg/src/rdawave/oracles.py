"""Independent reference solutions for the linear regime.

A single discrete-Laplacian eigenmode reduces the linear system (f = 0) to a
2x2 ODE for the modal coefficients.  The unforced case is solved exactly by a
matrix exponential; the smoothly forced case by a high-order adaptive
integrator at tight tolerance.  Neither shares code with the time stepper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .grid import Field, Grid, inner
from .model import Model
from .paths import FrozenPath
from .solver import SolveSpec, StateUV, evolve

__all__ = [
    "eigenmode",
    "modal_matrix",
    "exact_unforced_modal",
    "exact_forced_modal",
    "modal_error",
    "observed_orders",
    "ConvergenceStudy",
    "run_convergence_study",
]


def eigenmode(grid: Grid, k: int):
    """k-th discrete sine eigenvector of the 1-D Dirichlet Laplacian and its
    eigenvalue -(4/h^2) sin^2(k pi / (2(n+1)))."""
    if grid.dim != 1:
        raise ValueError("eigenmode oracle is 1-D")
    n, h = grid.n, grid.spacing
    j = np.arange(1, n + 1)
    vec = np.sin(k * math.pi * j / (n + 1))
    mu = -(4.0 / h ** 2) * math.sin(k * math.pi / (2.0 * (n + 1))) ** 2
    return Field(grid, vec), mu


def modal_matrix(model: Model, mu: float) -> np.ndarray:
    """Linear generator of (u_c, v_c)' for one Laplacian eigenvalue mu (<= 0)."""
    return np.array([
        [-model.delta, 1.0],
        [mu - model.lam_prime, -(model.alpha - model.delta)],
    ])


def exact_unforced_modal(model: Model, mu: float, x0, ts: Sequence[float]) -> np.ndarray:
    B = modal_matrix(model, mu)
    return np.array([expm(B * t) @ np.asarray(x0, dtype=float) for t in ts])


def exact_forced_modal(model: Model, mu: float, h_c: float,
                       omega: Callable[[float], float], x0,
                       ts: Sequence[float]) -> np.ndarray:
    """Tight-tolerance reference for the modal system driven by h_c * omega(t)."""
    B = modal_matrix(model, mu)
    da = model.delta - model.alpha

    def rhs(t, x):
        w = omega(t)
        return B @ x + np.array([h_c * w, da * h_c * w])

    sol = solve_ivp(rhs, (ts[0], ts[-1]), np.asarray(x0, dtype=float),
                    t_eval=np.asarray(ts), method="DOP853",
                    rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise ArithmeticError(f"reference integrator failed: {sol.message}")
    return sol.y.T


class _ModalObserver:
    def __init__(self, mode: Field):
        self.mode = mode
        self.norm_sq = inner(mode, mode)
        self.ts = []
        self.coeffs = []

    def __call__(self, state: StateUV) -> None:
        self.ts.append(state.t)
        self.coeffs.append([inner(state.u, self.mode) / self.norm_sq,
                            inner(state.v, self.mode) / self.norm_sq])


def modal_error(model: Model, mode: Field, mu: float, dt: float, scheme: str,
                t_end: float, x0=(1.0, 0.0),
                omega: Callable[[float], float] = None,
                h_c: float = 0.0) -> float:
    """Max modal-coefficient error of one solver run against the reference."""
    # the modal reduction needs f = 0, g = 0, and h along the mode
    if model.nonlin.a != 0.0 or model.nonlin.b != 0.0:
        raise ValueError("modal oracle requires the linear regime (a = b = 0)")
    zero = Field(model.grid, np.zeros(model.grid.shape))
    model = type(model)(grid=model.grid, alpha=model.alpha, lam=model.lam,
                        nonlin=model.nonlin, delta=model.delta,
                        sigma=model.sigma, g=zero,
                        h=Field(model.grid, h_c * mode.values))

    path = FrozenPath(omega) if omega is not None else FrozenPath(lambda t: 0.0)
    u0 = Field(model.grid, x0[0] * mode.values)
    v0 = Field(model.grid, x0[1] * mode.values)
    spec = SolveSpec(dt=dt, scheme=scheme, record_every=max(1, round(0.5 / dt)))
    obs = _ModalObserver(mode)
    evolve(StateUV(u0, v0, 0.0), 0.0, t_end, path, model, spec, observers=[obs])

    ts = np.array(obs.ts)
    numeric = np.array(obs.coeffs)
    if omega is None or h_c == 0.0:
        exact = exact_unforced_modal(model, mu, x0, ts)
    else:
        exact = exact_forced_modal(model, mu, h_c, omega, x0, ts)
    return float(np.max(np.linalg.norm(numeric - exact, axis=1)))


def observed_orders(errors: Sequence[float]) -> list:
    """log2 error ratios for a dt-halving sequence."""
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


@dataclass
class ConvergenceStudy:
    dts: list
    semi_implicit_errors: list
    semi_implicit_orders: list
    crank_nicolson_errors: list
    crank_nicolson_orders: list

    def to_jsonable(self) -> dict:
        return {
            "dts": self.dts,
            "semi_implicit": {"errors": self.semi_implicit_errors,
                              "observed_orders": self.semi_implicit_orders},
            "crank_nicolson_linear": {"errors": self.crank_nicolson_errors,
                                      "observed_orders": self.crank_nicolson_orders},
        }


def run_convergence_study(model: Model, mode_index: int = 3,
                          dts: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
                          t_end: float = 10.0) -> ConvergenceStudy:
    """Eigenmode study: semi-implicit unforced vs matrix exponential;
    Crank-Nicolson with frozen omega(t) = sin t vs the adaptive reference."""
    mode, mu = eigenmode(model.grid, mode_index)
    dts = list(dts)
    semi = [modal_error(model, mode, mu, dt, "semi_implicit", t_end) for dt in dts]
    cn = [modal_error(model, mode, mu, dt, "crank_nicolson_linear", t_end,
                      omega=math.sin, h_c=1.0) for dt in dts]
    return ConvergenceStudy(
        dts=dts,
        semi_implicit_errors=semi,
        semi_implicit_orders=observed_orders(semi),
        crank_nicolson_errors=cn,
        crank_nicolson_orders=observed_orders(cn),
    )
