"""Metrics on the d-fold Cartesian power of a hyperbolic surface: product
hyperbolic volume density, the canonical volume-form density ratio in both a
literal antisymmetrized-expansion form and a determinant fast path, the
product Bergman kernel, and the closed-form ratio bound.

The two ratio paths compute the same number.  With
H[a][b] = y_a y_b sum_j f_j(z_a) conj(f_j(z_b)) the full sum over index
tuples and permutation pairs collapses to d! * det H, which turns an
O(g^d (d!)^2) evaluation into an O(d^3) one; the literal expansion is kept
as the oracle and is guarded at d <= 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product as iproduct
from typing import Optional, Sequence

import numpy as np

from .errors import DataValidationError, PermutationPathTooLargeError
from .fuchsian import SurfaceGeometry
from .hplane import HPoint
from .modforms import CuspFormBasis, FundamentalCellDecomposition

_PERM_PATH_MAX_D = 4


@dataclass(frozen=True)
class ProductPoint:
    """Ordered d-tuple of upper-half-plane points."""

    points: tuple[HPoint, ...]
    gonality: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise DataValidationError("a product point needs at least one factor")
        if self.gonality is not None and not self.d < self.gonality:
            raise DataValidationError(
                f"d = {self.d} must be smaller than the gonality {self.gonality}"
            )

    @property
    def d(self) -> int:
        return len(self.points)

    def permuted(self, order: Sequence[int]) -> "ProductPoint":
        return ProductPoint(tuple(self.points[i] for i in order), self.gonality)


@dataclass(frozen=True)
class KernelMatrix:
    """H[a][b] = y_a y_b sum_j f_j(z_a) conj(f_j(z_b)); Hermitian PSD with
    the Bergman kernel values on the diagonal."""

    entries: np.ndarray
    point: ProductPoint


def _basis_values(basis: CuspFormBasis, p: ProductPoint) -> np.ndarray:
    """V[j, a] = f_j(z_a) for the orthonormal basis, shape (g, d)."""
    return np.stack([basis.evaluate_all(z) for z in p.points], axis=1)


def product_hyp_density(p: ProductPoint, geom: SurfaceGeometry) -> float:
    """Density of the unit-volume product hyperbolic form against
    prod dx_k dy_k: (1/vol^d) prod 1/y_k^2."""
    if geom.hyp_volume is None:
        raise DataValidationError("surface volume required")
    dens = 1.0
    for z in p.points:
        dens /= z.y * z.y
    return dens / geom.hyp_volume ** p.d


def kernel_matrix(basis: CuspFormBasis, p: ProductPoint) -> KernelMatrix:
    v = _basis_values(basis, p)
    ys = np.array([z.y for z in p.points])
    h = (v.conj().T @ v) * np.outer(ys, ys)
    h = 0.5 * (h + h.conj().T)
    return KernelMatrix(h, p)


def canonical_volume_ratio_det(
    basis: CuspFormBasis, geom: SurfaceGeometry, p: ProductPoint
) -> float:
    """|canonical density / rescaled-hyperbolic density| via the determinant
    identity: (vol^d d! / g^{d^2}) |det H|."""
    if geom.hyp_volume is None:
        raise DataValidationError("surface volume required")
    h = kernel_matrix(basis, p).entries
    d, g = p.d, basis.genus
    det = np.linalg.det(h)
    return float(
        geom.hyp_volume ** d
        * math.factorial(d)
        / float(g) ** (d * d)
        * abs(det)
    )


def canonical_volume_ratio_perm(
    basis: CuspFormBasis, geom: SurfaceGeometry, p: ProductPoint
) -> float:
    """Literal antisymmetrized expansion over index tuples and permutation
    pairs; factorially expensive, kept as the oracle for the fast path."""
    if geom.hyp_volume is None:
        raise DataValidationError("surface volume required")
    d, g = p.d, basis.genus
    if d > _PERM_PATH_MAX_D:
        raise PermutationPathTooLargeError(
            f"d = {d} too large for the literal expansion (max {_PERM_PATH_MAX_D})"
        )
    v = _basis_values(basis, p)
    perms = list(permutations(range(d)))
    signs = {}
    for sigma in perms:
        sgn = 1
        for i in range(d):
            for j in range(i + 1, d):
                if sigma[i] > sigma[j]:
                    sgn = -sgn
        signs[sigma] = sgn
    total = 0.0 + 0.0j
    for js in iproduct(range(g), repeat=d):
        for sigma in perms:
            for tau in perms:
                term = signs[sigma] * signs[tau]
                val = complex(term)
                for k in range(d):
                    val *= v[js[k], sigma[k]] * np.conj(v[js[k], tau[k]])
                total += val
    ysq = 1.0
    for z in p.points:
        ysq *= z.y * z.y
    return float(geom.hyp_volume ** d / float(g) ** (d * d) * abs(ysq * total))


def volume_ratio_bound(d: int, geom: SurfaceGeometry, kernel_bound: float) -> float:
    """(d!)^2 (vol * B / g^{d-1})^d for a uniform kernel bound B."""
    if d < 1:
        raise DataValidationError("d must be at least 1")
    if not kernel_bound > 0:
        raise DataValidationError("kernel bound must be positive")
    if geom.hyp_volume is None or geom.genus is None:
        raise DataValidationError("surface volume and genus required")
    return (
        math.factorial(d) ** 2
        * (geom.hyp_volume * kernel_bound / float(geom.genus) ** (d - 1)) ** d
    )


def product_bergman(basis: CuspFormBasis, p: ProductPoint) -> float:
    """Product Bergman kernel, the product of the factor kernels."""
    v = _basis_values(basis, p)
    out = 1.0
    for a, z in enumerate(p.points):
        out *= z.y * z.y * float(np.sum(np.abs(v[:, a]) ** 2))
    return out


def sample_points(
    cells: FundamentalCellDecomposition,
    rng: np.random.Generator,
    count: int,
    d: int,
    gonality: Optional[int] = None,
) -> list[ProductPoint]:
    """Reproducible points spread over the cell decomposition, drawn
    uniformly against the hyperbolic measure within each mapped cell."""
    reps = cells.coset_reps
    out = []
    for _ in range(count):
        pts = []
        for _ in range(d):
            a, b, c, dd = reps[rng.integers(0, len(reps))]
            x = rng.uniform(-0.5, 0.5)
            u = rng.uniform(0.0, 1.0) / math.sqrt(1.0 - x * x)
            if u < 1e-9:
                u = 1e-9
            w = complex(x, 1.0 / u)
            z = (a * w + b) / (c * w + dd)
            pts.append(HPoint(z.real, z.imag))
        out.append(ProductPoint(tuple(pts), gonality))
    return out
