"""Energy functional E, production functional Psi, tail energy, identity audit.

Along exact solutions dE/dt + 4*sigma*E = Psi; discretely the residual of that
identity converges to zero at the scheme's order, which is what the audit
measures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .grid import Field, grad_inner, grad_sq, inner, norm_l2, tail_weighted_norms
from .model import Model
from .paths import PathLike
from .solver import StateUV

__all__ = [
    "EnergyRecord",
    "energy_E",
    "psi",
    "PSI_TERM_NAMES",
    "energy_identity_residual",
    "ResidualSeries",
    "tail_energy",
    "EnergyObserver",
]

PSI_TERM_NAMES = (
    "damp_v",        # -2(alpha-delta-2sigma)||v||^2
    "damp_u",        # -2(delta-2sigma) lam' ||u||^2
    "damp_grad",     # -2(delta-2sigma)||grad u||^2
    "potential",     # +8 sigma int F
    "dissipation",   # -2 delta int f(u) u
    "noise_u",       # +2 lam' (u,h) w(t)
    "noise_grad",    # +2 (grad u, grad h) w(t)
    "noise_f",       # +2 w(t) int f(u) h
    "forcing",       # +2 (g,v)
    "noise_v",       # +2 (delta-alpha)(v,h) w(t)
)


@dataclass
class EnergyRecord:
    t: float
    E: float
    Psi: float
    terms: Dict[str, float]
    tail: Optional[Dict[float, float]] = None


def _int_F(u: Field, model: Model) -> float:
    return float(np.sum(model.nonlin.F(u.values)) * u.grid.cell_volume)


def energy_E(state: StateUV, model: Model) -> float:
    """E = ||v||^2 + lam'||u||^2 + ||grad u||^2 + 2 int F(u)."""
    return (norm_l2(state.v) ** 2
            + model.lam_prime * norm_l2(state.u) ** 2
            + grad_sq(state.u)
            + 2.0 * _int_F(state.u, model))


def psi(state: StateUV, t: float, path: PathLike, model: Model):
    """The ten-term production functional; returns (total, breakdown)."""
    u, v = state.u, state.v
    w = path.evaluate(t)
    lp = model.lam_prime
    sig, dl, al = model.sigma, model.delta, model.alpha
    vol = u.grid.cell_volume
    fu = model.nonlin.f(u.values)

    terms = {
        "damp_v": -2.0 * (al - dl - 2.0 * sig) * norm_l2(v) ** 2,
        "damp_u": -2.0 * (dl - 2.0 * sig) * lp * norm_l2(u) ** 2,
        "damp_grad": -2.0 * (dl - 2.0 * sig) * grad_sq(u),
        "potential": 8.0 * sig * _int_F(u, model),
        "dissipation": -2.0 * dl * float(np.sum(fu * u.values) * vol),
        "noise_u": 2.0 * lp * inner(u, model.h) * w,
        "noise_grad": 2.0 * grad_inner(u, model.h) * w,
        "noise_f": 2.0 * w * float(np.sum(fu * model.h.values) * vol),
        "forcing": 2.0 * inner(model.g, v),
        "noise_v": 2.0 * (dl - al) * inner(v, model.h) * w,
    }
    return sum(terms.values()), terms


@dataclass
class ResidualSeries:
    times: np.ndarray          # record times
    residual_diff: np.ndarray  # len n-1, midpoint form on each interval
    residual_int: np.ndarray   # len n, integral form vs the first record (entry 0 is 0)

    @property
    def max_diff(self) -> float:
        return float(np.max(np.abs(self.residual_diff)))

    @property
    def max_int(self) -> float:
        return float(np.max(np.abs(self.residual_int)))


def energy_identity_residual(records: Sequence[EnergyRecord], sigma: float) -> ResidualSeries:
    """Differential and integral residuals of dE/dt + 4 sigma E = Psi.

    Differential form uses midpoint averaging on each recording interval;
    integral form compares E(t) with the exponential-weighted Psi integral
    (trapezoidal) from the first record.  Records must be equally spaced.
    """
    if len(records) < 2:
        raise ValueError("need at least 2 energy records")
    ts = np.array([r.t for r in records])
    Es = np.array([r.E for r in records])
    Ps = np.array([r.Psi for r in records])
    dts = np.diff(ts)
    dt = dts[0]
    if np.max(np.abs(dts - dt)) > 1e-9 * max(abs(dt), 1e-30):
        raise ValueError("energy records are not equally spaced in t")

    r_diff = (Es[1:] - Es[:-1]) / dt + 4.0 * sigma * 0.5 * (Es[1:] + Es[:-1]) \
        - 0.5 * (Ps[1:] + Ps[:-1])

    r_int = np.zeros(len(records))
    weighted = np.exp(4.0 * sigma * ts) * Ps
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (weighted[1:] + weighted[:-1]) * dt)))
    for i in range(1, len(records)):
        integral = math.exp(-4.0 * sigma * ts[i]) * cum[i]
        r_int[i] = Es[i] - math.exp(-4.0 * sigma * (ts[i] - ts[0])) * Es[0] - integral
    return ResidualSeries(times=ts, residual_diff=r_diff, residual_int=r_int)


def tail_energy(state: StateUV, k: float, model: Model) -> float:
    """Energy density weighted by rho(|x|^2/k^2): the mass beyond radius ~k."""
    tw = tail_weighted_norms(state.u, state.v, k)
    from .grid import _node_weights  # same nodal quadrature as the L2 inner products

    w = _node_weights(state.u.grid, float(k))
    f_tail = float(np.sum(w * model.nonlin.F(state.u.values)) * state.u.grid.cell_volume)
    return (tw.v_l2_sq + model.lam_prime * tw.u_l2_sq + tw.grad_u_sq + 2.0 * f_tail)


class EnergyObserver:
    """Trajectory observer collecting EnergyRecord entries (optionally with tails)."""

    def __init__(self, path: PathLike, model: Model, k_list: Sequence[float] = ()):
        self.path = path
        self.model = model
        self.k_list = tuple(k_list)
        self.records: List[EnergyRecord] = []

    def __call__(self, state: StateUV) -> None:
        total, terms = psi(state, state.t, self.path, self.model)
        tail = None
        if self.k_list:
            tail = {k: tail_energy(state, k, self.model) for k in self.k_list}
        self.records.append(EnergyRecord(
            t=state.t, E=energy_E(state, self.model), Psi=total,
            terms=terms, tail=tail))
