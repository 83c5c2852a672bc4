"""Uniform interval grid, nodal fields, and the discrete weak-form operators.

A Field stores interior nodal values only; the homogeneous Dirichlet values at
both endpoints are implicit. Operators return lumped-mass dual vectors (the P1
load vector divided by h), so that inner_l2(Au, w) realizes the duality
pairing <Au, w> and equals the weak form a(u, w). Zeroth-order terms use the
trapezoid rule, under which an L2 function is its own dual vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._tridiag import thomas_solve

# Serialization format shared by every CSV writer in the package:
# 17 significant digits round-trips IEEE doubles exactly.
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0, length) with n_interior free nodes.

    The mesh width is h = length / (n_interior + 1); node i sits at x = i*h
    for i = 1 .. n_interior.
    """

    length: float = math.pi
    n_interior: int = 199

    def __post_init__(self) -> None:
        if not (isinstance(self.n_interior, int) and self.n_interior >= 3):
            raise ValueError(f"n_interior must be an integer >= 3, got {self.n_interior}")
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"length must be positive and finite, got {self.length}")

    @property
    def h(self) -> float:
        return self.length / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates, shape (n_interior,)."""
        x = self.h * np.arange(1, self.n_interior + 1)
        x.setflags(write=False)
        return x

    @property
    def full_nodes(self) -> np.ndarray:
        """All node coordinates including both boundary points."""
        x = self.h * np.arange(0, self.n_interior + 2)
        x.setflags(write=False)
        return x


@dataclass(frozen=True, eq=False)
class Field:
    """Interior nodal values of a piecewise-linear function vanishing at 0 and length."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_interior,):
            raise ValueError(
                f"value array of shape {vals.shape} does not match grid with "
                f"{self.grid.n_interior} interior nodes")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n_interior))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, np.asarray([fn(x) for x in grid.nodes], dtype=float))

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


@dataclass(frozen=True)
class NormReport:
    l2: float
    h10: float
    w1p: float


def _check_same_grid(u: Field, w: Field) -> None:
    if u.grid != w.grid:
        raise ValueError("fields live on different grids")


def element_gradients(u: Field) -> np.ndarray:
    """Constant gradient on each of the n_interior+1 elements, boundary values zero."""
    ext = np.concatenate(([0.0], u.values, [0.0]))
    return np.diff(ext) / u.grid.h


def pos_neg_parts(u: Field) -> tuple[Field, Field]:
    """Split u into (u_plus, u_minus), both nonnegative, with u = u_plus - u_minus."""
    return (Field(u.grid, np.maximum(u.values, 0.0)),
            Field(u.grid, np.maximum(-u.values, 0.0)))


def apply_laplacian(u: Field) -> Field:
    """Dual vector of the Dirichlet Laplacian: (2u_i - u_{i-1} - u_{i+1}) / h^2."""
    h = u.grid.h
    v = u.values
    out = 2.0 * v
    out[:-1] -= v[1:]
    out[1:] -= v[:-1]
    return Field(u.grid, out / (h * h))


def laplacian_solve(f: Field) -> Field:
    """Inverse of apply_laplacian: solve the discrete Poisson problem."""
    out = laplacian_solve_values(f.grid, f.values)
    return Field(f.grid, out)


def laplacian_solve_values(grid: Grid, rhs: np.ndarray) -> np.ndarray:
    n = grid.n_interior
    h2 = grid.h * grid.h
    diag = np.full(n, 2.0 / h2)
    off = np.full(n - 1, -1.0 / h2)
    return thomas_solve(off, diag, off, rhs)


def apply_p_laplacian(u: Field, p: float) -> Field:
    """Dual vector of the p-Laplacian with elementwise-constant gradients.

    The flux on each element is |g|^(p-2) g, written as sign(g)|g|^(p-1) so the
    value at g = 0 is 0 for every p > 1.
    """
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    g = element_gradients(u)
    flux = np.sign(g) * np.abs(g) ** (p - 1.0)
    return Field(u.grid, -np.diff(flux) / u.grid.h)


def inner_l2(u: Field, w: Field) -> float:
    """Trapezoid-rule L2 inner product; exact duality pairing for dual vectors."""
    _check_same_grid(u, w)
    return u.grid.h * float(np.dot(u.values, w.values))


def norms(u: Field, p: float) -> NormReport:
    """L2, H^1_0 seminorm, and W^{1,p} seminorm of the P1 interpolant."""
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    h = u.grid.h
    g = element_gradients(u)
    l2 = math.sqrt(h * float(np.dot(u.values, u.values)))
    h10 = math.sqrt(h * float(np.dot(g, g)))
    w1p = (h * float(np.sum(np.abs(g) ** p))) ** (1.0 / p)
    return NormReport(l2=l2, h10=h10, w1p=w1p)


def l2_norm(u: Field) -> float:
    return math.sqrt(u.grid.h * float(np.dot(u.values, u.values)))


def h10_norm(u: Field) -> float:
    g = element_gradients(u)
    return math.sqrt(u.grid.h * float(np.dot(g, g)))


def dual_norm(r: Field) -> float:
    """Norm of a dual vector over the discrete test space: sup <r, w> / ||w||_{1,2}."""
    z = laplacian_solve_values(r.grid, r.values)
    return math.sqrt(max(r.grid.h * float(np.dot(r.values, z)), 0.0))


def write_field_csv(u: Field, path) -> None:
    """Write x,value rows for all nodes; boundary rows carry value 0."""
    lines = ["x,value"]
    x = u.grid.full_nodes
    full = np.concatenate(([0.0], u.values, [0.0]))
    for xi, vi in zip(x, full):
        lines.append(f"{FLOAT_FORMAT % xi},{FLOAT_FORMAT % vi}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> Field:
    """Read a field written by write_field_csv, reconstructing its grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    x, vals = data[:, 0], data[:, 1]
    if x.size < 5:
        raise ValueError("field file too short")
    widths = np.diff(x)
    if not np.allclose(widths, widths[0], rtol=1e-12, atol=0.0):
        raise ValueError("field file is not on a uniform grid")
    if abs(vals[0]) > 0.0 or abs(vals[-1]) > 0.0:
        raise ValueError("boundary rows must carry value 0")
    grid = Grid(length=float(x[-1]), n_interior=int(x.size - 2))
    return Field(grid, vals[1:-1])
