"""Weight-2 cusp forms on Gamma_0(N) for prime N: q-expansion evaluation
with point reduction, Petersson inner products by quadrature over a coset
cell decomposition, orthonormalization, and the Bergman kernel

    B(z) = sum_j y^2 |f_j(z)|^2

over a Petersson-orthonormal basis.

Point reduction exploits that prime level leaves exactly two cusps, so
translations z -> z + 1, the lower-circle elements [a, b; N, d], and the
involution z -> -1/(Nz) suffice to push any point up to a representative
where the q-series converges fast.  The involution acts on an eigenform by

    f(-1/(Nz)) = -eps * N z^2 f(z)

with eps the stored +-1 eigenvalue, so evaluation tracks a geometric factor
together with the parity of involution uses.  Weight-2 covariance makes
y |f(z)| invariant under every move, hence the accumulated factor has
magnitude y_reduced / y_original exactly and error estimates transport
cleanly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DataValidationError,
    GenusTooSmallError,
    GramNotPositiveDefiniteError,
    QuadratureNonconvergentError,
    ReductionFailedError,
    TruncationInsufficientError,
)
from .fuchsian import SurfaceGeometry, gamma0_coset_reps
from .hplane import HPoint
from .numutil import divisor_counts, gauss_legendre_panels, is_prime, qexp_tail_bound

_GAIN_TOL = 1e-12
_MAX_MOVES = 200
_EVAL_TOL_DEFAULT = 1e-10


@dataclass(frozen=True)
class QExpansion:
    """Newform embedding data: a_1..a_M plus the involution eigenvalue."""

    level: int
    coefficients: np.ndarray  # complex, index n-1 holds a_n
    embedding_id: str
    atkin_lehner: int
    truncation: int = 0

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.complex128)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "truncation", len(coeffs))
        if self.atkin_lehner not in (1, -1):
            raise DataValidationError(
                f"{self.embedding_id}: involution eigenvalue must be +-1"
            )
        if abs(coeffs[0] - 1.0) > 1e-9:
            raise DataValidationError(f"{self.embedding_id}: a_1 = {coeffs[0]}, expected 1")
        m = len(coeffs)
        dn = divisor_counts(m)[1:]
        bound = dn * np.sqrt(np.arange(1, m + 1)) + 1e-6
        bad = np.nonzero(np.abs(coeffs) > bound)[0]
        if bad.size:
            n = int(bad[0]) + 1
            raise DataValidationError(
                f"{self.embedding_id}: |a_{n}| = {abs(coeffs[n - 1])} violates the "
                f"coefficient growth bound {bound[n - 1]}"
            )


def reduce_point(
    z: complex, level: int, y_min: Optional[float] = None
) -> tuple[complex, complex, int]:
    """Push z up its orbit under translations, lower-circle maps and the
    level involution until Im z >= y_min or no move raises it further.

    Returns (z_red, factor, inv_count) with
    f(z) = factor * eps^inv_count * f(z_red) for any eigenform f of the level.
    """
    n = level
    if y_min is None:
        y_min = 0.5 / math.sqrt(n)
    factor = complex(1.0, 0.0)
    inv_count = 0
    for _ in range(_MAX_MOVES):
        k = round(z.real)
        if k:
            z = complex(z.real - k, z.imag)
        if z.imag >= y_min:
            return z, factor, inv_count
        # candidate moves, each valid while its denominator has modulus < 1
        gain_circle = 0.0
        d_star = -round(n * z.real)
        if d_star % n:
            wc = n * z + d_star
            nc = wc.real * wc.real + wc.imag * wc.imag
            if nc < 1.0 - _GAIN_TOL:
                gain_circle = 1.0 / nc
        zsq = z.real * z.real + z.imag * z.imag
        gain_inv = 1.0 / (n * zsq) if n * zsq < 1.0 - _GAIN_TOL else 0.0
        if gain_circle <= 1.0 and gain_inv <= 1.0:
            return z, factor, inv_count
        if gain_circle >= gain_inv:
            a0 = pow(d_star % n, -1, n)
            a = a0 - n if a0 > n // 2 else a0
            b = (a * d_star - 1) // n
            w = n * z + d_star
            factor /= w * w
            z = (a * z + b) / w
        else:
            factor /= -n * z * z
            inv_count += 1
            z = -1.0 / (n * z)
    raise ReductionFailedError(f"reduction did not terminate near {z}")


def _qsum(coefficients: np.ndarray, z: complex) -> complex:
    m = len(coefficients)
    phases = np.exp(2j * np.pi * np.arange(1, m + 1) * z)
    return complex(np.dot(coefficients, phases))


def evaluate_form_with_error(f: QExpansion, z: HPoint) -> tuple[complex, float]:
    """Form value and a rigorous truncation-error estimate."""
    z_red, factor, inv_count = reduce_point(z.z, f.level)
    tail = qexp_tail_bound(f.truncation, z_red.imag)
    err = abs(factor) * tail
    sign = f.atkin_lehner if inv_count % 2 else 1
    return factor * sign * _qsum(f.coefficients, z_red), err


def evaluate_form(f: QExpansion, z: HPoint, tol: float = _EVAL_TOL_DEFAULT) -> complex:
    val, err = evaluate_form_with_error(f, z)
    if err > tol:
        raise TruncationInsufficientError(
            f"tail estimate {err} exceeds tolerance {tol} at {z}; "
            f"more coefficients needed"
        )
    return val


# ---------------------------------------------------------------------------
# cell decomposition and quadrature


_T_EDGES = (0.0, 0.75, 1.5, 3.0, 6.0, 12.0, 30.0)


@dataclass
class FundamentalCellDecomposition:
    """Quadrature for Gamma_0(N)\\H, prime N.

    One cell per coset of Gamma_0(N) in SL(2, Z): the standard modular
    fundamental domain F mapped by each coset representative.  On F the
    hyperbolic measure dx dy / y^2 equals du dx under u = 1/y; the cusp
    leaves an essential singularity at u = 0 (integrands decay like
    exp(-c/u) with c as small as 4 pi / N), so u is further substituted as
    u = U(x) exp(-t) with U(x) = 1/sqrt(1 - x^2).  That moves the
    singularity to t = infinity where truncating at t = 30 costs under
    1e-13 relative; panelized Gauss-Legendre on graded t-segments then
    converges spectrally.  Reductions of every mapped node are precomputed
    once.
    """

    level: int
    x_panels: int = 2
    x_order: int = 12
    u_panels: int = 1
    u_order: int = 10

    def __post_init__(self):
        n = self.level
        if not is_prime(n):
            raise DataValidationError(f"level {n} is not prime")
        reps = gamma0_coset_reps(n)
        self.coset_reps = tuple(reps)
        xs, wxs = gauss_legendre_panels(-0.5, 0.5, self.x_panels, self.x_order)
        ts = []
        wts = []
        for lo, hi in zip(_T_EDGES[:-1], _T_EDGES[1:]):
            seg_t, seg_w = gauss_legendre_panels(lo, hi, self.u_panels, self.u_order)
            ts.append(seg_t)
            wts.append(seg_w)
        ts = np.concatenate(ts)
        wts = np.concatenate(wts)
        base_pts = []
        base_wts = []
        for x, wx in zip(xs, wxs):
            u_top = 1.0 / math.sqrt(1.0 - x * x)
            for t, wt in zip(ts, wts):
                u = u_top * math.exp(-t)
                base_pts.append(complex(x, 1.0 / u))
                base_wts.append(wx * wt * u)
        base_pts = np.array(base_pts)
        base_wts = np.array(base_wts)
        nodes = []
        cell_index = []
        for j, (a, b, c, d) in enumerate(reps):
            w = base_pts
            nodes.append((a * w + b) / (c * w + d))
            cell_index.append(np.full(len(w), j))
        self.nodes = np.concatenate(nodes)
        self.weights = np.tile(base_wts, len(reps))
        self.cell_index = np.concatenate(cell_index)
        red = [reduce_point(z, n) for z in self.nodes]
        self.reduced_nodes = np.array([r[0] for r in red])
        self.reduced_factors = np.array([r[1] for r in red])
        self.inv_counts = np.array([r[2] for r in red], dtype=np.int64)
        self._raw_cache: dict[tuple[int, ...], np.ndarray] = {}

    @property
    def node_points(self) -> np.ndarray:
        return self.nodes

    def refined(self) -> "FundamentalCellDecomposition":
        return FundamentalCellDecomposition(
            self.level,
            x_panels=2 * self.x_panels,
            x_order=self.x_order,
            u_panels=2 * self.u_panels,
            u_order=self.u_order,
        )

    def integrate(self, values: np.ndarray):
        """Integral against the hyperbolic measure of a cell-invariant
        integrand sampled at the nodes."""
        return np.dot(self.weights, values)

    def raw_form_values(self, forms: Sequence[QExpansion], tol: float = 1e-9) -> np.ndarray:
        """Matrix of f_i(node) for the raw (pre-mixing) forms, shape (nf, nodes)."""
        key = tuple(id(f) for f in forms)
        cached = self._raw_cache.get(key)
        if cached is not None:
            return cached
        m = forms[0].truncation
        coeffs = np.stack([f.coefficients for f in forms])
        eps = np.array([f.atkin_lehner for f in forms])
        y_red = self.reduced_nodes.imag
        worst = float(np.max(np.abs(self.reduced_factors) * np.array([qexp_tail_bound(m, y) for y in y_red])))
        if worst > tol:
            raise TruncationInsufficientError(
                f"level {self.level}: worst node tail estimate {worst} > {tol}"
            )
        ns = np.arange(1, m + 1)
        out = np.empty((len(forms), len(self.nodes)), dtype=np.complex128)
        for lo in range(0, len(self.nodes), 512):
            sl = slice(lo, lo + 512)
            phases = np.exp(2j * np.pi * np.outer(ns, self.reduced_nodes[sl]))
            block = coeffs @ phases
            odd = (self.inv_counts[sl] % 2).astype(bool)
            signs = np.where(odd[None, :] & (eps == -1)[:, None], -1.0, 1.0)
            out[:, sl] = block * signs * self.reduced_factors[sl][None, :]
        self._raw_cache[key] = out
        return out


@dataclass(frozen=True)
class PeterssonGram:
    matrix: np.ndarray
    errors: np.ndarray
    level: int
    node_count: int


def petersson_gram(
    forms: Sequence[QExpansion],
    cells: FundamentalCellDecomposition,
    tol: float = 1e-9,
    max_refine: int = 2,
) -> PeterssonGram:
    """Numerical Petersson pairings <f, h> = int f conj(h) y^2 dmu_hyp.

    The integrand is the invariant combination f conj(h) y^2; entries carry
    error estimates from one panel refinement and the quadrature refines
    until every estimate clears ``tol``.
    """

    def gram_on(c: FundamentalCellDecomposition) -> np.ndarray:
        v = c.raw_form_values(forms, tol=tol)
        y2 = c.nodes.imag ** 2
        g = (v * (c.weights * y2)[None, :]) @ v.conj().T
        return 0.5 * (g + g.conj().T)

    coarse = cells
    g1 = gram_on(coarse)
    for _ in range(max_refine):
        fine = coarse.refined()
        g2 = gram_on(fine)
        err = np.abs(g2 - g1)
        if float(err.max()) <= tol:
            return PeterssonGram(g2, err, cells.level, len(fine.nodes))
        coarse, g1 = fine, g2
    raise QuadratureNonconvergentError(
        f"level {cells.level}: Gram error {float(err.max())} above {tol} "
        f"after {max_refine} refinements"
    )


@dataclass
class CuspFormBasis:
    """Petersson-orthonormal basis stored as a lower-triangular mixing of the
    raw newform embeddings, so each raw form keeps its own involution
    eigenvalue during evaluation."""

    level: int
    raw_forms: tuple[QExpansion, ...]
    mixing: np.ndarray
    gram_log: dict = field(default_factory=dict)

    @property
    def genus(self) -> int:
        return len(self.raw_forms)

    def evaluate_all(self, z: HPoint) -> np.ndarray:
        z_red, factor, inv_count = reduce_point(z.z, self.level)
        vals = np.empty(len(self.raw_forms), dtype=np.complex128)
        for i, f in enumerate(self.raw_forms):
            tail = qexp_tail_bound(f.truncation, z_red.imag)
            if abs(factor) * tail > _EVAL_TOL_DEFAULT:
                raise TruncationInsufficientError(
                    f"tail estimate {abs(factor) * tail} at {z}"
                )
            sign = f.atkin_lehner if inv_count % 2 else 1
            vals[i] = factor * sign * _qsum(f.coefficients, z_red)
        return self.mixing @ vals

    def values_on_cells(self, cells: FundamentalCellDecomposition) -> np.ndarray:
        return self.mixing @ cells.raw_form_values(self.raw_forms)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "level": self.level,
            "genus": self.genus,
            "embeddings": [
                {
                    "embedding_id": f.embedding_id,
                    "atkin_lehner": f.atkin_lehner,
                    "truncation": f.truncation,
                    "coefficients_real": [repr(float(c.real)) for c in f.coefficients],
                    "coefficients_imag": [repr(float(c.imag)) for c in f.coefficients],
                }
                for f in self.raw_forms
            ],
            "mixing_real": [[repr(float(v.real)) for v in row] for row in self.mixing],
            "mixing_imag": [[repr(float(v.imag)) for v in row] for row in self.mixing],
            "gram_log": {
                k: np.asarray(v).tolist() if not isinstance(v, (int, float, str)) else v
                for k, v in self.gram_log.items()
                if k in ("gram_abs", "max_error", "node_count")
            },
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "CuspFormBasis":
        forms = tuple(
            QExpansion(
                level=doc["level"],
                coefficients=np.array(
                    [float(re) for re in e["coefficients_real"]], dtype=np.complex128
                )
                + 1j * np.array([float(im) for im in e["coefficients_imag"]]),
                embedding_id=e["embedding_id"],
                atkin_lehner=e["atkin_lehner"],
            )
            for e in doc["embeddings"]
        )
        mixing = np.array(
            [[float(v) for v in row] for row in doc["mixing_real"]]
        ) + 1j * np.array([[float(v) for v in row] for row in doc["mixing_imag"]])
        return CuspFormBasis(doc["level"], forms, mixing, {"restored": True})

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @staticmethod
    def load(path) -> "CuspFormBasis":
        with open(path) as fh:
            return CuspFormBasis.from_json_dict(json.load(fh))


def orthonormalize(
    forms: Sequence[QExpansion], gram: PeterssonGram | np.ndarray
) -> CuspFormBasis:
    """Lower-triangular (Cholesky) change of basis making the Gram identity."""
    if isinstance(gram, PeterssonGram):
        matrix = gram.matrix
        log = {
            "gram_abs": np.abs(matrix),
            "max_error": float(gram.errors.max()),
            "node_count": gram.node_count,
        }
    else:
        matrix = np.asarray(gram)
        log = {"gram_abs": np.abs(matrix)}
    try:
        chol = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise GramNotPositiveDefiniteError(
            "Gram matrix not positive definite: quadrature failure or "
            "dependent inputs"
        ) from exc
    mixing = np.linalg.solve(chol, np.eye(len(forms), dtype=np.complex128))
    level = forms[0].level
    return CuspFormBasis(level, tuple(forms), mixing, log)


def build_basis(
    forms: Sequence[QExpansion],
    cells: Optional[FundamentalCellDecomposition] = None,
    tol: float = 1e-9,
) -> tuple[CuspFormBasis, FundamentalCellDecomposition]:
    """Full pipeline: quadrature Gram, then orthonormalization."""
    if len(forms) < 2:
        raise GenusTooSmallError(
            f"{len(forms)} form(s); the comparison needs genus >= 2"
        )
    if len({f.level for f in forms}) != 1:
        raise DataValidationError("forms must share a level")
    if cells is None:
        cells = FundamentalCellDecomposition(forms[0].level)
    gram = petersson_gram(forms, cells, tol=tol)
    return orthonormalize(forms, gram), cells


# ---------------------------------------------------------------------------
# kernel and densities


def bergman_kernel(basis: CuspFormBasis, z: HPoint) -> float:
    """B(z) = y^2 sum |f_j(z)|^2 over the orthonormal basis; invariant under
    the group because weight-2 covariance cancels the y^2 factor."""
    vals = basis.evaluate_all(z)
    return z.y * z.y * float(np.sum(np.abs(vals) ** 2))


def bergman_on_cells(
    basis: CuspFormBasis, cells: FundamentalCellDecomposition
) -> np.ndarray:
    vals = basis.values_on_cells(cells)
    return (cells.nodes.imag ** 2) * np.sum(np.abs(vals) ** 2, axis=0)


def canonical_density_ratio(
    basis: CuspFormBasis, geom: SurfaceGeometry, z: HPoint
) -> float:
    """Density of the canonical volume form against the unit-volume rescaled
    hyperbolic form: vol(X) * B(z) / g."""
    if geom.hyp_volume is None:
        raise DataValidationError("surface volume required for density ratio")
    return geom.hyp_volume * bergman_kernel(basis, z) / basis.genus


def hyperbolic_area(cells: FundamentalCellDecomposition) -> float:
    return float(cells.integrate(np.ones(len(cells.nodes))))


def canonical_mass(basis: CuspFormBasis, cells: FundamentalCellDecomposition) -> float:
    """Total canonical volume: should be 1 for an orthonormal basis."""
    return float(cells.integrate(bergman_on_cells(basis, cells))) / basis.genus
