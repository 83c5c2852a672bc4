"""Residuals, Jacobians, and the infinity transform for the (p,2)-Laplacian problem.

The equation -Delta_p u - Delta u - gamma*u^- = lambda*u is handled in its
original variable for p > 2 and, for 1 < p < 2, also in the rescaled variable
v = u / ||u||_{1,2}^(2 - p/2), where the p-term picks up the coefficient
||v||_{1,2}^(4-p) and the problem bifurcates from zero instead of infinity.

All residuals are lumped-mass dual vectors (see grid module); pairing a
residual with a test field via inner_l2 gives the weak form exactly, so the
strong nodal statement and the weak one coincide by construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._tridiag import thomas_solve
from .grid import (Field, Grid, apply_laplacian, dual_norm, element_gradients,
                   h10_norm, inner_l2)

logger = logging.getLogger("fucik_branch.quasilinear")


@dataclass(frozen=True)
class ProblemParams:
    """Exponent, negative-part weight, spectral parameter, gradient regularization.

    p = 2 is excluded: that case is the linear half-eigenvalue problem handled
    in closed form elsewhere. lam - gamma <= 0 is legal (the negative-part
    coefficient has crossed sign) and only logged.
    """

    p: float
    gamma: float
    lam: float
    eps_reg: float = 0.0

    def __post_init__(self) -> None:
        if not (self.p > 1.0 and self.p != 2.0):
            raise ValueError(f"p must lie in (1,2) or (2,inf), got {self.p}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.eps_reg < 0.0:
            raise ValueError(f"eps_reg must be nonnegative, got {self.eps_reg}")
        if not (math.isfinite(self.p) and math.isfinite(self.gamma)
                and math.isfinite(self.lam)):
            raise ValueError("parameters must be finite")
        if self.lam - self.gamma <= 0.0:
            logger.debug("lambda_minus = lam - gamma = %.6g is nonpositive",
                         self.lam - self.gamma)


@dataclass(frozen=True, eq=False)
class TransformedField:
    """Rescaled field with its current p-term coefficient ||v||_{1,2}^(4-p)."""

    v: Field
    coeff: float


class Jacobian:
    """Symmetric tridiagonal operator plus an optional rank-one correction.

    The tridiagonal part collects the weighted gradient stiffness and the
    nodal zeroth-order terms; the rank-one part (a * <b, w>_2) appears only
    for the transformed problem, where the norm coefficient depends on v.
    """

    def __init__(self, grid: Grid, diag: np.ndarray, off: np.ndarray,
                 rank_one: tuple[np.ndarray, np.ndarray] | None = None):
        self.grid = grid
        self.diag = diag
        self.off = off
        self.rank_one = rank_one

    def apply(self, w: Field) -> Field:
        x = w.values
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        if self.rank_one is not None:
            a, b = self.rank_one
            y = y + a * (self.grid.h * float(np.dot(b, x)))
        return Field(self.grid, y)

    def apply_values(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        if self.rank_one is not None:
            a, b = self.rank_one
            y = y + a * (self.grid.h * float(np.dot(b, x)))
        return y

    def solve_values(self, rhs: np.ndarray) -> np.ndarray:
        if self.rank_one is None:
            return thomas_solve(self.off, self.diag, self.off, rhs)
        # Sherman-Morrison on top of two tridiagonal solves
        a, b = self.rank_one
        t1 = thomas_solve(self.off, self.diag, self.off, rhs)
        t2 = thomas_solve(self.off, self.diag, self.off, a)
        denom = 1.0 + self.grid.h * float(np.dot(b, t2))
        if denom == 0.0:
            raise ValueError("singular rank-one update")
        return t1 - t2 * (self.grid.h * float(np.dot(b, t1)) / denom)

    def as_matrix(self) -> np.ndarray:
        n = self.diag.size
        m = np.zeros((n, n))
        np.fill_diagonal(m, self.diag)
        idx = np.arange(n - 1)
        m[idx, idx + 1] = self.off
        m[idx + 1, idx] = self.off
        if self.rank_one is not None:
            a, b = self.rank_one
            m = m + np.outer(a, b) * self.grid.h
        return m


def _p_flux(g: np.ndarray, p: float, eps: float) -> np.ndarray:
    # sign(g)|g|^(p-1) at eps = 0 avoids 0^(negative) for 1 < p < 2
    if eps == 0.0:
        return np.sign(g) * np.abs(g) ** (p - 1.0)
    return (g * g + eps * eps) ** (0.5 * (p - 2.0)) * g


def _p_flux_derivative(g: np.ndarray, p: float, eps: float) -> np.ndarray:
    # exact derivative of _p_flux so finite differences of the residual match
    if eps == 0.0:
        if p < 2.0 and np.any(g == 0.0):
            raise ValueError(
                "eps_reg = 0 with 1 < p < 2 and a vanishing element gradient: "
                "the flux derivative is singular; pass eps_reg > 0")
        return (p - 1.0) * np.abs(g) ** (p - 2.0)
    return (g * g + eps * eps) ** (0.5 * (p - 4.0)) * ((p - 1.0) * g * g + eps * eps)


def residual_original(u: Field, params: ProblemParams) -> Field:
    """Dual vector of -Delta_p u - Delta u - gamma*u^- - lam*u."""
    g = element_gradients(u)
    flux = _p_flux(g, params.p, params.eps_reg) + g
    vals = -np.diff(flux) / u.grid.h \
        - params.gamma * np.maximum(-u.values, 0.0) \
        - params.lam * u.values
    return Field(u.grid, vals)


def residual_weak(u: Field, lambda_plus: float, lambda_minus: float,
                  p: float) -> float:
    """Dual norm of -Delta_p u - Delta u - lambda_plus*u^+ + lambda_minus*u^-."""
    if not u.values.any():
        raise ValueError("the weak residual is only defined for nonzero fields")
    g = element_gradients(u)
    flux = _p_flux(g, p, 0.0) + g
    vals = -np.diff(flux) / u.grid.h \
        - lambda_plus * np.maximum(u.values, 0.0) \
        + lambda_minus * np.maximum(-u.values, 0.0)
    return dual_norm(Field(u.grid, vals))


def energy(u: Field, params: ProblemParams) -> float:
    """Discrete energy whose gradient (dual vector) is residual_original.

    The negative-part term enters with +gamma/2 ||u^-||_2^2: differentiating
    (u^-)^2 = min(u,0)^2 gives -2u^- on {u<0}, which produces the operator's
    -gamma*u^- term.
    """
    h = u.grid.h
    g = element_gradients(u)
    p, eps = params.p, params.eps_reg
    if eps == 0.0:
        e_p = h * float(np.sum(np.abs(g) ** p)) / p
    else:
        e_p = h * float(np.sum((g * g + eps * eps) ** (0.5 * p))) / p
    e_2 = 0.5 * h * float(np.dot(g, g))
    neg = np.maximum(-u.values, 0.0)
    e_gamma = 0.5 * params.gamma * h * float(np.dot(neg, neg))
    e_lam = 0.5 * params.lam * h * float(np.dot(u.values, u.values))
    return e_p + e_2 + e_gamma - e_lam


def _weighted_stiffness(grid: Grid, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h2 = grid.h * grid.h
    diag = (weights[:-1] + weights[1:]) / h2
    off = -weights[1:-1] / h2
    return diag, off


def jacobian_original(u: Field, params: ProblemParams) -> Jacobian:
    """Generalized Jacobian of residual_original at u.

    Gradient stiffness with elementwise weights d/dg[flux](g) + 1, plus the
    diagonal gamma*1[u_i<0] - lam: the slope of -gamma*max(-t,0) on t < 0 is
    +gamma, with zero nodes assigned to the positive part.
    """
    g = element_gradients(u)
    w = _p_flux_derivative(g, params.p, params.eps_reg) + 1.0
    diag, off = _weighted_stiffness(u.grid, w)
    diag = diag + params.gamma * (u.values < 0.0) - params.lam
    return Jacobian(u.grid, diag, off)


def transform_coefficient(v: Field, p: float) -> float:
    return h10_norm(v) ** (4.0 - p)


def residual_transformed(v: Field, params: ProblemParams) -> Field:
    """Dual vector of -||v||^{4-p} Delta_p v - Delta v - gamma*v^- - lam*v (1 < p < 2)."""
    _require_singular_range(params.p)
    g = element_gradients(v)
    coeff = transform_coefficient(v, params.p)
    flux = coeff * _p_flux(g, params.p, params.eps_reg) + g
    vals = -np.diff(flux) / v.grid.h \
        - params.gamma * np.maximum(-v.values, 0.0) \
        - params.lam * v.values
    return Field(v.grid, vals)


def jacobian_transformed(v: Field, params: ProblemParams) -> Jacobian:
    """Generalized Jacobian of residual_transformed at v.

    The norm coefficient is recomputed from v at every evaluation, so its
    derivative contributes the rank-one term
    (4-p) ||v||_{1,2}^{2-p} * (Delta_p v dual) <Laplacian v dual, .>_2.
    """
    _require_singular_range(params.p)
    p, eps = params.p, params.eps_reg
    g = element_gradients(v)
    coeff = transform_coefficient(v, p)
    w = coeff * _p_flux_derivative(g, p, eps) + 1.0
    diag, off = _weighted_stiffness(v.grid, w)
    diag = diag + params.gamma * (v.values < 0.0) - params.lam
    nrm = h10_norm(v)
    if nrm == 0.0:
        return Jacobian(v.grid, diag, off)
    a = -np.diff(_p_flux(g, p, eps)) / v.grid.h
    b = (4.0 - p) * nrm ** (2.0 - p) * apply_laplacian(v).values
    return Jacobian(v.grid, diag, off, rank_one=(a, b))


def _require_singular_range(p: float) -> None:
    if not (1.0 < p < 2.0):
        raise ValueError(f"transform is defined for 1 < p < 2, got p={p}")


def to_infinity_variable(u: Field, p: float) -> TransformedField:
    """Rescale u so the large-norm regime maps to a neighborhood of zero."""
    _require_singular_range(p)
    nrm = h10_norm(u)
    if nrm == 0.0:
        raise ValueError("zero field: the norm power in the transform is undefined")
    v = Field(u.grid, u.values / nrm ** (2.0 - 0.5 * p))
    return TransformedField(v=v, coeff=transform_coefficient(v, p))


def from_infinity_variable(v: Field, p: float) -> Field:
    """Invert to_infinity_variable: u = v * ||v||^{-(2-p/2)/(1-p/2)}."""
    _require_singular_range(p)
    nrm = h10_norm(v)
    if nrm == 0.0:
        raise ValueError("zero field: the norm power in the transform is undefined")
    scale = nrm ** (-(2.0 - 0.5 * p) / (1.0 - 0.5 * p))
    return Field(v.grid, v.values * scale)


def original_h10_norm(v: Field, p: float) -> float:
    """Back-transformed ||u||_{1,2} of the field represented by v."""
    _require_singular_range(p)
    nrm = h10_norm(v)
    if nrm == 0.0:
        raise ValueError("zero field has no back-transformed norm")
    return nrm ** (-1.0 / (1.0 - 0.5 * p))
