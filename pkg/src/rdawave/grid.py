"""Truncated spatial domain: uniform Dirichlet grid, Laplacian, norms, cutoff weights.

The domain is the box [-L, L]^dim with homogeneous Dirichlet boundary; only
interior nodes are stored.  The forward-difference gradient convention is
chosen so that -(lap f, f) equals the squared discrete gradient norm exactly
(summation by parts).
"""
from __future__ import annotations

import functools
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Grid",
    "Field",
    "zeros",
    "field_from_values",
    "field_from_profile",
    "laplacian",
    "laplacian_matrix",
    "inner",
    "norm_l2",
    "norm_h1",
    "grad_sq",
    "grad_inner",
    "cutoff_rho",
    "cutoff_rho_prime",
    "tail_weighted_norms",
    "TailNorms",
]


@dataclass(frozen=True)
class Grid:
    dim: int
    half_width: float
    n: int  # interior nodes per axis

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if self.n < 3:
            raise ValueError("need at least 3 interior nodes per axis")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n + 1)

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis_coords(self) -> np.ndarray:
        """Interior node coordinates along one axis."""
        h = self.spacing
        return -self.half_width + h * np.arange(1, self.n + 1)

    def radius_sq(self) -> np.ndarray:
        return _radius_sq(self)

    def laplacian_max_eig(self) -> float:
        """Upper bound on the largest |eigenvalue| of the discrete Laplacian."""
        return 4.0 * self.dim / self.spacing ** 2


@dataclass(eq=False)
class Field:
    """Real values on interior nodes; treated as immutable (ops return new fields)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def zeros(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def field_from_values(grid: Grid, values) -> Field:
    return Field(grid, np.array(values, dtype=float))


def field_from_profile(grid: Grid, profile) -> Field:
    """Evaluate a radial closed-form profile (see model.FieldProfile) on the grid."""
    xs = grid.axis_coords()
    axes = list(np.meshgrid(*([xs] * grid.dim), indexing="ij"))
    axes[0] = axes[0] - getattr(profile, "center", 0.0)
    r_sq = sum(a ** 2 for a in axes)
    return Field(grid, profile.evaluate_r_sq(r_sq))


def _check_same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")


def laplacian(f: Field) -> Field:
    """Second-order central-difference Laplacian with zero Dirichlet ghosts."""
    g = f.grid
    h2 = g.spacing ** 2
    out = np.zeros(g.shape)
    v = f.values
    for ax in range(g.dim):
        padded = np.pad(v, [(1, 1) if a == ax else (0, 0) for a in range(g.dim)])
        sl_lo = tuple(slice(0, -2) if a == ax else slice(None) for a in range(g.dim))
        sl_hi = tuple(slice(2, None) if a == ax else slice(None) for a in range(g.dim))
        out += (padded[sl_lo] - 2.0 * v + padded[sl_hi]) / h2
    return Field(g, out)


@functools.lru_cache(maxsize=16)
def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Sparse matrix of the discrete Laplacian (negative semidefinite)."""
    n = grid.n
    h2 = grid.spacing ** 2
    one_d = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / h2
    eye = sp.identity(n, format="csr")
    if grid.dim == 1:
        mat = one_d
    elif grid.dim == 2:
        mat = sp.kron(one_d, eye) + sp.kron(eye, one_d)
    else:
        mat = (sp.kron(sp.kron(one_d, eye), eye)
               + sp.kron(sp.kron(eye, one_d), eye)
               + sp.kron(sp.kron(eye, eye), one_d))
    return mat.tocsr()


def inner(f: Field, g: Field) -> float:
    _check_same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def norm_l2(f: Field) -> float:
    return float(np.sqrt(np.sum(f.values ** 2) * f.grid.cell_volume))


def _axis_diffs(f: Field, ax: int) -> np.ndarray:
    """Forward differences along `ax` including both boundary-facing gaps."""
    g = f.grid
    padded = np.pad(f.values, [(1, 1) if a == ax else (0, 0) for a in range(g.dim)])
    return np.diff(padded, axis=ax) / g.spacing


def grad_sq(f: Field) -> float:
    """Squared discrete gradient norm; equals -(lap f, f) exactly."""
    g = f.grid
    total = 0.0
    for ax in range(g.dim):
        d = _axis_diffs(f, ax)
        total += float(np.sum(d ** 2))
    return total * g.cell_volume


def grad_inner(f: Field, g: Field) -> float:
    _check_same_grid(f, g)
    total = 0.0
    for ax in range(f.grid.dim):
        total += float(np.sum(_axis_diffs(f, ax) * _axis_diffs(g, ax)))
    return total * f.grid.cell_volume


def norm_h1(f: Field) -> float:
    return float(np.sqrt(norm_l2(f) ** 2 + grad_sq(f)))


def cutoff_rho(s):
    """C^1 cutoff: 0 on |s|<=1, 1 on |s|>=2, smoothstep in between; |rho'| <= 1.5."""
    a = np.abs(np.asarray(s, dtype=float))
    t = np.clip(a - 1.0, 0.0, 1.0)
    out = t * t * (3.0 - 2.0 * t)
    return float(out) if np.isscalar(s) else out


def cutoff_rho_prime(s):
    a = np.abs(np.asarray(s, dtype=float))
    t = a - 1.0
    inside = (t > 0.0) & (t < 1.0)
    out = np.where(inside, 6.0 * t * (1.0 - t), 0.0) * np.sign(np.asarray(s, dtype=float))
    return float(out) if np.isscalar(s) else out


@functools.lru_cache(maxsize=32)
def _radius_sq(grid: Grid) -> np.ndarray:
    xs = grid.axis_coords()
    axes = np.meshgrid(*([xs] * grid.dim), indexing="ij")
    return sum(a ** 2 for a in axes)


@functools.lru_cache(maxsize=128)
def _node_weights(grid: Grid, k: float) -> np.ndarray:
    return cutoff_rho(_radius_sq(grid) / k ** 2)


@functools.lru_cache(maxsize=128)
def _gap_weights(grid: Grid, k: float, ax: int) -> np.ndarray:
    """rho(|x|^2/k^2) at gap midpoints along `ax` (n+1 gaps per grid line)."""
    xs = grid.axis_coords()
    h = grid.spacing
    mids = np.concatenate(([xs[0] - 0.5 * h], xs + 0.5 * h))
    coords = [mids if a == ax else xs for a in range(grid.dim)]
    axes = np.meshgrid(*coords, indexing="ij")
    r_sq = sum(a ** 2 for a in axes)
    return cutoff_rho(r_sq / k ** 2)


TailNorms = namedtuple("TailNorms", ["u_l2_sq", "grad_u_sq", "v_l2_sq", "truncated"])


def tail_weighted_norms(u: Field, v: Field, k: float) -> TailNorms:
    """Discrete integrals of |u|^2, |grad u|^2, |v|^2 weighted by rho(|x|^2/k^2).

    Meaningful only when sqrt(2)*k < L; otherwise the weight is clipped by the
    box and the result carries a truncation flag.
    """
    _check_same_grid(u, v)
    if k <= 0.0:
        raise ValueError("k must be positive")
    g = u.grid
    truncated = bool(np.sqrt(2.0) * k >= g.half_width)
    w = _node_weights(g, float(k))
    vol = g.cell_volume
    u_sq = float(np.sum(w * u.values ** 2) * vol)
    v_sq = float(np.sum(w * v.values ** 2) * vol)
    grad = 0.0
    for ax in range(g.dim):
        d = _axis_diffs(u, ax)
        grad += float(np.sum(_gap_weights(g, float(k), ax) * d ** 2))
    grad *= vol
    return TailNorms(u_l2_sq=u_sq, grad_u_sq=grad, v_l2_sq=v_sq, truncated=truncated)
