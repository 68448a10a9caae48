"""Fuchsian groups from finite generator presentations, orbit-ball
enumeration, the orbit counting function, and the systole / injectivity
radius.

Two enumeration strategies back ``enumerate_ball``:

* generic groups: breadth-first word expansion over the generators with a
  triangle-inequality pruning certificate.  A word is expanded only while
  its displacement stays within ``radius + 2 * maxgen_displacement``; when
  the generator set contains the side pairings of a Dirichlet domain of the
  base point this over-approximation guarantees the returned ball is
  complete.
* congruence groups Gamma_0(N): direct integer enumeration.  With
  sigma_z = [[sqrt(y), x/sqrt(y)], [0, 1/sqrt(y)]] one has
  cosh d(z1, g z2) = ||sigma_{z1}^{-1} g sigma_{z2}||_F^2 / 2, so entry
  bounds on the conjugated matrix give finite integer ranges for all four
  entries of g.  The enumeration is exhaustive, hence complete by
  construction, and does not touch the generator set at all.
"""

from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    DataValidationError,
    InvalidTransformError,
    NoHyperbolicElementError,
    ThresholdExceedsRadiusError,
    UncertifiedSystoleError,
    UsageError,
)
from .hplane import (
    HPoint,
    MobiusTransform,
    compose,
    hyp_distance,
    identity,
    inverse,
    mobius_apply,
)
from .numutil import acosh1p, genus_x0_prime, is_prime

_QUANTUM = 1e-9          # dedup grid for matrix entries
_MATCH_TOL = 1e-11       # exact-ish comparison on key collision
_RADIUS_SLACK = 1e-9
_TRACE_PARABOLIC_TOL = 1e-8


@dataclass(frozen=True)
class FuchsianGroup:
    """Finitely generated discrete subgroup of PSL(2, R).

    ``generators`` is closed under inverses (synthesized on load).  For the
    congruence kind, ``level`` enables the exact integer enumeration and
    ``parabolic_generators`` flags the generator indices with |trace| = 2.
    """

    kind: str
    generators: tuple[MobiusTransform, ...]
    generator_labels: tuple[str, ...]
    name: str = "custom"
    level: Optional[int] = None
    genus: Optional[int] = None
    hyp_volume: Optional[float] = None
    # radius of a ball around the base orbit guaranteed to meet the axis of
    # every closed geodesic; None means systole certification is unavailable
    orbit_covering_radius: Optional[float] = None
    parabolic_generators: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("surface-group", "congruence", "cyclic-test"):
            raise DataValidationError(f"unknown group kind: {self.kind!r}")
        if self.kind != "congruence":
            for g, lbl in zip(self.generators, self.generator_labels):
                if abs(abs(g.trace) - 2.0) <= _TRACE_PARABOLIC_TOL:
                    raise InvalidTransformError(
                        f"generator {lbl} is parabolic (|trace| = 2); only "
                        f"congruence groups may carry parabolic generators"
                    )


@dataclass(frozen=True)
class OrbitRecord:
    transform: MobiusTransform
    rho: float
    word: str


@dataclass(frozen=True)
class OrbitBall:
    """All group elements moving z2 within ``radius`` of z1 (when complete)."""

    z1: HPoint
    z2: HPoint
    radius: float
    records: tuple[OrbitRecord, ...]
    complete: bool

    def rhos(self) -> list[float]:
        return [r.rho for r in self.records]


@dataclass(frozen=True)
class CountProfile:
    """Values of the orbit counting function at a set of thresholds.

    ``rhos`` retains the full sorted displacement multiset so that atomic
    Stieltjes sums against the counting measure can be evaluated exactly.
    """

    thresholds: tuple[float, ...]
    counts: tuple[int, ...]
    rhos: tuple[float, ...]
    complete_through: float

    def stieltjes_sum(self, f, upto: float) -> float:
        """sum f(rho_i) over displacements <= upto (atomic measure)."""
        if upto > self.complete_through + _RADIUS_SLACK:
            raise ThresholdExceedsRadiusError(
                f"sum requested to {upto}, profile complete to {self.complete_through}"
            )
        return sum(f(r) for r in self.rhos if r <= upto + 1e-12)


@dataclass(frozen=True)
class SurfaceGeometry:
    systole: float
    injectivity_radius: float
    genus: Optional[int]
    hyp_volume: Optional[float]
    certified: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.systole > 0:
            raise DataValidationError("systole must be positive")
        if self.hyp_volume is not None and not self.hyp_volume > 0:
            raise DataValidationError("hyperbolic volume must be positive")


# ---------------------------------------------------------------------------
# built-in group library


def cyclic_test_group() -> FuchsianGroup:
    """<diag(2, 1/2)>: translation length 2 ln 2 along the imaginary axis."""
    g = MobiusTransform(2.0, 0.0, 0.0, 0.5)
    return FuchsianGroup(
        kind="cyclic-test",
        generators=(g, inverse(g)),
        generator_labels=("t", "t^-1"),
        name="cyclic-test",
        orbit_covering_radius=0.0,  # base point i lies on the axis
    )


def bolza_group() -> FuchsianGroup:
    """Genus-2 regular-octagon surface group.

    The four standard generators are hyperbolic boosts through i with
    translation length 2 arccosh(1 + sqrt 2) along axes at angles k pi/4;
    together with their inverses they pair the sides of the regular
    hyperbolic octagon centered at i, whose circumradius is
    arccosh(1 + sqrt 2).
    """
    alpha = 1.0 + math.sqrt(2.0)
    beta = math.sqrt(2.0 + 2.0 * math.sqrt(2.0))
    gens: list[MobiusTransform] = []
    labels: list[str] = []
    for k in range(4):
        phi = k * math.pi / 4.0
        bc, bs = beta * math.cos(phi), beta * math.sin(phi)
        gens.append(MobiusTransform(alpha + bc, bs, bs, alpha - bc))
        labels.append(f"a{k}")
    for k in range(4):
        gens.append(inverse(gens[k]))
        labels.append(f"a{k}^-1")
    return FuchsianGroup(
        kind="surface-group",
        generators=tuple(gens),
        generator_labels=tuple(labels),
        name="bolza",
        genus=2,
        hyp_volume=4.0 * math.pi,
        orbit_covering_radius=math.acosh(1.0 + math.sqrt(2.0)),
    )


def _p1_index(c: int, d: int, n: int) -> int:
    """Index of (c : d) in P^1(Z/nZ) for prime n: 0 for (0:1), 1+j for (1:j)."""
    c %= n
    d %= n
    if c == 0:
        if d == 0:
            raise ValueError("(0:0) is not a projective point")
        return 0
    return 1 + (d * pow(c, -1, n)) % n


def gamma0_coset_reps(n: int) -> list[tuple[int, int, int, int]]:
    """Coset representatives of Gamma_0(n) in SL(2, Z), prime n: one per
    point of P^1(Z/nZ), in the index order of ``_p1_index``."""
    reps = [(1, 0, 0, 1)]
    for j in range(n):
        # smallest-magnitude representative of the translation part
        jj = j if j <= n // 2 else j - n
        reps.append((0, -1, 1, jj))
    return reps


def _imul(m1, m2):
    a, b, c, d = m1
    e, f, g, h = m2
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _iinv(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def _icanon(m):
    for v in m[:3]:
        if v != 0:
            return m if v > 0 else tuple(-x for x in m)
    return m


def gamma0_group(n: int) -> FuchsianGroup:
    """Gamma_0(N) for prime N, with Schreier generators from the coset action.

    For each coset representative r and each of S, T the product r*g falls in
    some coset with representative r'; then r*g*r'^{-1} lies in Gamma_0(N).
    The nontrivial ones generate the group.
    """
    if not is_prime(n):
        raise DataValidationError(f"level {n} is not prime")
    reps = gamma0_coset_reps(n)
    s = (0, -1, 1, 0)
    t = (1, 1, 0, 1)
    seen: set[tuple[int, int, int, int]] = set()
    gens: list[MobiusTransform] = []
    labels: list[str] = []
    parabolic: list[int] = []
    for r in reps:
        for g in (s, t):
            m = _imul(r, g)
            j = _p1_index(m[2], m[3], n)
            gamma = _icanon(_imul(m, _iinv(reps[j])))
            if gamma == (1, 0, 0, 1) or gamma in seen:
                continue
            seen.add(gamma)
            for mat in (gamma, _icanon(_iinv(gamma))):
                if mat in seen and mat != gamma:
                    continue
                seen.add(mat)
                if abs(mat[0] + mat[3]) == 2:
                    parabolic.append(len(gens))
                gens.append(MobiusTransform(*(float(x) for x in mat)))
                labels.append(f"g{len(gens)}")
    return FuchsianGroup(
        kind="congruence",
        generators=tuple(gens),
        generator_labels=tuple(labels),
        name=f"gamma0-{n}",
        level=n,
        genus=genus_x0_prime(n),
        hyp_volume=(n + 1) * math.pi / 3.0,
        parabolic_generators=tuple(parabolic),
    )


_BUILTIN_RE = re.compile(r"^gamma0-(\d+)$")


def builtin_group(name: str) -> FuchsianGroup:
    if name == "cyclic-test":
        return cyclic_test_group()
    if name == "bolza":
        return bolza_group()
    m = _BUILTIN_RE.match(name)
    if m:
        return gamma0_group(int(m.group(1)))
    raise UsageError(f"unknown built-in group {name!r}")


def group_from_json(doc: str | dict) -> FuchsianGroup:
    """Load {"kind": ..., "generators": [[a,b,c,d], ...], "labels": [...]}.

    Inverses are synthesized when missing.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        kind = doc["kind"]
        raw = doc["generators"]
    except (KeyError, TypeError) as exc:
        raise DataValidationError(f"malformed group document: {exc}") from exc
    labels = doc.get("labels") or [f"g{i}" for i in range(len(raw))]
    if len(labels) != len(raw):
        raise DataValidationError("labels do not match generators")
    gens = [MobiusTransform(*map(float, row)) for row in raw]
    out_gens = list(gens)
    out_labels = list(labels)
    for g, lbl in zip(gens, labels):
        ginv = inverse(g)
        if not any(ginv.approx_eq(h, 1e-12) for h in out_gens):
            out_gens.append(ginv)
            out_labels.append(f"{lbl}^-1")
    parabolic = tuple(
        i for i, g in enumerate(out_gens) if abs(abs(g.trace) - 2.0) <= _TRACE_PARABOLIC_TOL
    )
    return FuchsianGroup(
        kind=kind,
        generators=tuple(out_gens),
        generator_labels=tuple(out_labels),
        name=doc.get("name", "custom"),
        level=doc.get("level"),
        parabolic_generators=parabolic,
    )


# ---------------------------------------------------------------------------
# ball enumeration


class _DedupSet:
    """Hash set of PSL(2,R) matrices keyed on a 1e-9 quantization.

    Keys are the rounded entry tuples; lookups probe the neighbor bucket for
    any entry sitting close to a rounding boundary, so arithmetic drift
    cannot split one element into two states.  Key collisions fall back to
    entrywise comparison at 1e-11.
    """

    def __init__(self):
        self._buckets: dict[tuple[int, int, int, int], list[tuple]] = {}

    @staticmethod
    def _canon(m: tuple) -> tuple:
        for v in m[:3]:
            if abs(v) > _QUANTUM:
                return m if v > 0 else (-m[0], -m[1], -m[2], -m[3])
        return m

    @staticmethod
    def _candidate_keys(m: tuple):
        per_entry = []
        for v in m:
            f = v / _QUANTUM
            r = round(f)
            opts = [r]
            if abs(f - r) > 0.5 - 1e-3:
                opts.append(r + 1 if f > r else r - 1)
            per_entry.append(opts)
        keys = [()]
        for opts in per_entry:
            keys = [k + (o,) for k in keys for o in opts]
        return keys

    def add(self, m: tuple) -> bool:
        """Insert canonicalized matrix; returns False when already present."""
        m = self._canon(m)
        keys = self._candidate_keys(m)
        for k in keys:
            for other in self._buckets.get(k, ()):
                if max(abs(p - q) for p, q in zip(m, other)) <= _MATCH_TOL:
                    return False
        self._buckets.setdefault(keys[0], []).append(m)
        return True


def _bfs_ball(
    group: FuchsianGroup,
    z1: HPoint,
    z2: HPoint,
    radius: float,
    budget: int,
) -> OrbitBall:
    gens = [(g, lbl, (g.a, g.b, g.c, g.d)) for g, lbl in zip(group.generators, group.generator_labels)]
    maxdisp = max(hyp_distance(z2, mobius_apply(g, z2)) for g, _, _ in gens)
    prune_limit = radius + 2.0 * maxdisp
    x2, y2 = z2.x, z2.y

    def displacement(mat: tuple) -> float:
        a, b, c, d = mat
        w = complex(c * x2 + d, c * y2)
        nsq = w.real * w.real + w.imag * w.imag
        num = complex(a * x2 + b, a * y2)
        gx = (num.real * w.real + num.imag * w.imag) / nsq
        gy = y2 / nsq
        dx = gx - z1.x
        dy = gy - z1.y
        return acosh1p((dx * dx + dy * dy) / (2.0 * z1.y * gy))

    seen = _DedupSet()
    ident = (1.0, 0.0, 0.0, 1.0)
    seen.add(ident)
    frontier: deque[tuple] = deque([ident])
    found: list[tuple[float, str, tuple]] = []
    rho0 = hyp_distance(z1, z2)
    if rho0 <= radius + _RADIUS_SLACK:
        found.append((rho0, "", ident))
    words: dict[tuple, str] = {ident: ""}
    visited = 1
    complete = True
    while frontier:
        mat = frontier.popleft()
        word = words[mat]
        a, b, c, d = mat
        for g, lbl, (e, f, gg, h) in gens:
            nmat = (a * e + b * gg, a * f + b * h, c * e + d * gg, c * f + d * h)
            nmat = _DedupSet._canon(nmat)
            if not seen.add(nmat):
                continue
            rho = displacement(nmat)
            if rho > prune_limit:
                continue
            visited += 1
            if visited > budget:
                complete = False
                frontier.clear()
                break
            nword = f"{word}.{lbl}" if word else lbl
            words[nmat] = nword
            frontier.append(nmat)
            if rho <= radius + _RADIUS_SLACK:
                found.append((rho, nword, nmat))
        if not complete:
            break
    records = tuple(
        OrbitRecord(MobiusTransform(*m), rho, word)
        for rho, word, m in sorted(found, key=lambda t: (t[0], t[1]))
    )
    return OrbitBall(z1, z2, radius, records, complete)


def _congruence_ball(
    group: FuchsianGroup,
    z1: HPoint,
    z2: HPoint,
    radius: float,
    budget: int,
) -> OrbitBall:
    n = group.level
    x1, y1 = z1.x, z1.y
    x2, y2 = z2.x, z2.y
    k_bound = math.sqrt(2.0 * math.cosh(radius) + 1e-9)
    eps = 1e-9
    c_max = k_bound / math.sqrt(y1 * y2) + eps
    d_half = k_bound * math.sqrt(y2 / y1) + eps
    a_half = k_bound * math.sqrt(y1 / y2) + eps
    b_half = k_bound * math.sqrt(y1 * y2) + eps
    cosh_cap = math.cosh(radius) + 1e-9

    found: list[tuple[float, str, tuple]] = []
    complete = True

    def consider(mat: tuple[int, int, int, int]) -> bool:
        nonlocal complete
        a, b, c, d = mat
        w = complex(c * x2 + d, c * y2)
        nsq = w.real * w.real + w.imag * w.imag
        num = complex(a * x2 + b, a * y2)
        gx = (num.real * w.real + num.imag * w.imag) / nsq
        gy = y2 / nsq
        dx, dy = gx - x1, gy - y1
        ch = 1.0 + (dx * dx + dy * dy) / (2.0 * y1 * gy)
        if ch > cosh_cap:
            return True
        rho = acosh1p(ch - 1.0)
        if rho > radius + _RADIUS_SLACK:
            return True
        if len(found) >= budget:
            complete = False
            return False
        found.append((rho, f"[{a},{b};{c},{d}]", mat))
        return True

    # c = 0: the translation family +-[1, b; 0, 1]
    b_lo = math.ceil(x1 - x2 - b_half)
    b_hi = math.floor(x1 - x2 + b_half)
    for b in range(b_lo, b_hi + 1):
        if not consider((1, b, 0, 1)):
            break
    c_lim = math.floor(c_max / n)
    for cp in range(-c_lim, c_lim + 1):
        if cp == 0 or not complete:
            continue
        c = n * cp
        d_lo = math.ceil(-c * x2 - d_half)
        d_hi = math.floor(-c * x2 + d_half)
        a_lo = math.ceil(x1 * c - a_half)
        a_hi = math.floor(x1 * c + a_half)
        for d in range(d_lo, d_hi + 1):
            for a in range(a_lo, a_hi + 1):
                ad1 = a * d - 1
                if ad1 % c:
                    continue
                if not consider(_icanon((a, ad1 // c, c, d))):
                    break
            if not complete:
                break
        if not complete:
            break

    records = tuple(
        OrbitRecord(MobiusTransform(*(float(x) for x in m)), rho, word)
        for rho, word, m in sorted(found, key=lambda t: (t[0], t[1]))
    )
    return OrbitBall(z1, z2, radius, records, complete)


def enumerate_ball(
    group: FuchsianGroup,
    z1: HPoint,
    z2: HPoint,
    radius: float,
    budget: int = 500_000,
) -> OrbitBall:
    """Enumerate {gamma : d(z1, gamma z2) <= radius}.

    Returns a partial ball with ``complete=False`` when the element budget is
    exhausted.  Completeness of the generic path additionally assumes the
    generators contain the side pairings of a Dirichlet domain of z2 (true
    for the built-in groups).
    """
    if radius < 0:
        raise DataValidationError("radius must be nonnegative")
    if budget <= 0:
        raise DataValidationError("budget must be positive")
    if group.kind == "congruence" and group.level is not None:
        return _congruence_ball(group, z1, z2, radius, budget)
    return _bfs_ball(group, z1, z2, radius, budget)


def restrict_ball(master: OrbitBall, z: HPoint, radius: float) -> OrbitBall:
    """Complete ball at (z, z) filtered out of a master ball at its base point.

    Valid because d(b, gamma b) <= d(b, z) + d(z, gamma z) + d(gamma z, gamma b)
    = radius + 2 d(b, z); the master must have been enumerated at least that far.
    """
    if master.z1 != master.z2:
        raise DataValidationError("master ball must be centered (z1 = z2)")
    if not master.complete:
        raise DataValidationError("master ball must be complete")
    shift = hyp_distance(master.z1, z)
    if master.radius < radius + 2.0 * shift - 1e-12:
        raise ThresholdExceedsRadiusError(
            f"master radius {master.radius} < {radius} + 2*{shift}"
        )
    recs = []
    for rec in master.records:
        rho = hyp_distance(z, mobius_apply(rec.transform, z))
        if rho <= radius + _RADIUS_SLACK:
            recs.append(OrbitRecord(rec.transform, rho, rec.word))
    recs.sort(key=lambda r: (r.rho, r.word))
    return OrbitBall(z, z, radius, tuple(recs), True)


def count_profile(ball: OrbitBall, thresholds: Optional[Sequence[float]] = None) -> CountProfile:
    """Counting function of the ball.  Default thresholds are the jump points."""
    rhos = sorted(ball.rhos())
    if thresholds is None:
        thresholds = []
        for r in rhos:
            if not thresholds or r > thresholds[-1] + 1e-9:
                thresholds.append(r)
    else:
        thresholds = sorted(float(t) for t in thresholds)
    for t in thresholds:
        if t > ball.radius + _RADIUS_SLACK:
            raise ThresholdExceedsRadiusError(
                f"threshold {t} beyond enumerated radius {ball.radius}"
                + ("" if ball.complete else " (ball incomplete)")
            )
    counts = []
    i = 0
    for t in thresholds:
        while i < len(rhos) and rhos[i] <= t + 1e-12:
            i += 1
        counts.append(i)
    return CountProfile(
        thresholds=tuple(thresholds),
        counts=tuple(counts),
        rhos=tuple(rhos),
        complete_through=ball.radius if ball.complete else 0.0,
    )


# ---------------------------------------------------------------------------
# systole


def _trace_length(tr: float) -> float:
    return 2.0 * acosh1p(abs(tr) / 2.0 - 1.0)


def _min_congruence_trace(n: int) -> int:
    """Smallest t >= 3 with t^2 - 4 a square mod prime n.

    t is realizable in Gamma_0(n) iff a^2 - t a + 1 = 0 is solvable mod n,
    i.e. iff the discriminant t^2 - 4 is a quadratic residue (or zero); for
    any solution a one checks [a, (a(t-a)-1)/n; n, t-a] is an actual element.
    All hyperbolic traces are integers with |t| >= 3, so this is an exact
    lower-bound certificate for the systole.
    """
    t = 3
    while True:
        disc = (t * t - 4) % n
        if disc == 0 or pow(disc, (n - 1) // 2, n) == 1:
            return t
        t += 1


def systole(
    group: FuchsianGroup,
    search_radius: Optional[float] = None,
    base: Optional[HPoint] = None,
    require_certified: bool = False,
) -> SurfaceGeometry:
    """Minimal translation length over hyperbolic elements found in a ball.

    Certification: for congruence groups the integer-trace argument above is
    exact.  Otherwise the ball certifies no shorter geodesic exists when
    ``l_min <= radius - 2 * orbit_covering_radius``: every conjugacy class of
    length l has a representative moving the base point at most
    l + 2 * covering_radius.
    """
    base = base or HPoint(0.0, 1.0)
    if group.kind == "congruence" and group.level is not None:
        t_star = _min_congruence_trace(group.level)
        target = _trace_length(float(t_star))
        radius = search_radius if search_radius is not None else max(8.0, target + 0.5)
        attempts = 0
        while True:
            ball = enumerate_ball(group, base, base, radius)
            traces = [
                abs(r.transform.trace)
                for r in ball.records
                if abs(r.transform.trace) > 2.0 + _TRACE_PARABOLIC_TOL
            ]
            if traces:
                l_min = _trace_length(min(traces))
                certified = ball.complete and abs(l_min - target) <= 1e-9
                if certified or attempts >= 3 or search_radius is not None:
                    break
            elif attempts >= 3 or search_radius is not None:
                if not traces:
                    raise NoHyperbolicElementError(
                        f"no hyperbolic element within radius {radius}"
                    )
                break
            attempts += 1
            radius *= 1.3
        if require_certified and not certified:
            raise UncertifiedSystoleError(
                f"found length {l_min}, certified minimum is {target}"
            )
        return SurfaceGeometry(
            systole=l_min,
            injectivity_radius=l_min,
            genus=group.genus,
            hyp_volume=group.hyp_volume,
            certified=certified,
            meta={
                "group": group.name,
                "kind": group.kind,
                "level": group.level,
                "min_trace": min(traces),
                "certificate": "integer-trace residue argument",
                "search_radius": radius,
            },
        )

    if search_radius is None:
        raise DataValidationError("search_radius required for non-congruence groups")
    ball = enumerate_ball(group, base, base, search_radius)
    traces = [
        abs(r.transform.trace)
        for r in ball.records
        if abs(r.transform.trace) > 2.0 + _TRACE_PARABOLIC_TOL
    ]
    if not traces:
        raise NoHyperbolicElementError(
            f"no hyperbolic element within radius {search_radius}"
        )
    l_min = _trace_length(min(traces))
    certified = False
    if ball.complete and group.orbit_covering_radius is not None:
        certified = l_min <= search_radius - 2.0 * group.orbit_covering_radius + 1e-12
    if require_certified and not certified:
        raise UncertifiedSystoleError(
            f"ball radius {search_radius} too small to certify length {l_min}"
        )
    return SurfaceGeometry(
        systole=l_min,
        injectivity_radius=l_min,
        genus=group.genus,
        hyp_volume=group.hyp_volume,
        certified=certified,
        meta={
            "group": group.name,
            "kind": group.kind,
            "min_trace": min(traces),
            "certificate": "covering-radius rule" if certified else "none",
            "search_radius": search_radius,
        },
    )


def injectivity_radius(geom: SurfaceGeometry) -> float:
    """The convention here sets the injectivity radius equal to the systole."""
    return geom.systole
