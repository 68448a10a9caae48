"""Newform coefficient ingestion: vendored fixtures, an on-disk cache, and
an opt-in HTTP client for the external modular-forms database.

Fixtures for levels 23, 29, 31 and 37 ship inside the package so every
downstream computation runs offline and bit-identically across machines.
Nothing from disk or network is trusted blindly: record counts are checked
against the independent dimension formula and coefficients against the
divisor growth bound.  Coefficients travel as decimal strings and are parsed
to floats only at load time, which keeps cache files stable under
re-serialization.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DataValidationError,
    GenusTooSmallError,
    NetworkUnavailableError,
    SchemaMismatchError,
)
from .modforms import QExpansion
from .numutil import divisor_counts, genus_x0_prime, is_prime

MIN_COEFFICIENTS_DEFAULT = 500
_CACHE_ENV = "HYPERBERGMAN_CACHE"
DEFAULT_ENDPOINT = "https://www.lmfdb.org/api/hyperbergman_newforms"


@dataclass(frozen=True)
class NewformRecord:
    level: int
    label: str
    embedding_index: int
    atkin_lehner: int
    coefficients: np.ndarray  # complex, a_1..a_M
    source: str
    retrieved_at: str

    @property
    def truncation(self) -> int:
        return len(self.coefficients)

    def to_qexpansion(self) -> QExpansion:
        return QExpansion(
            level=self.level,
            coefficients=self.coefficients,
            embedding_id=self.label,
            atkin_lehner=self.atkin_lehner,
        )


def cache_dir(override: Optional[str] = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(_CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hyperbergman"


def _fixture_files(level: int) -> list:
    root = resources.files("hyperbergman") / "fixtures" / f"level{level}"
    if not root.is_dir():
        return []
    return sorted((p for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


def _parse_record(doc: dict, source: str) -> NewformRecord:
    try:
        level = int(doc["level"])
        label = str(doc["label"])
        emb = int(doc["embedding_index"])
        al = int(doc["atkin_lehner"])
        re_parts = [float(s) for s in doc["coefficients"]]
        im_raw = doc.get("coefficients_imag")
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatchError(f"malformed newform record ({source}): {exc}") from exc
    coeffs = np.array(re_parts, dtype=np.complex128)
    if im_raw is not None:
        coeffs = coeffs + 1j * np.array([float(s) for s in im_raw])
    return NewformRecord(
        level=level,
        label=label,
        embedding_index=emb,
        atkin_lehner=al,
        coefficients=coeffs,
        source=source,
        retrieved_at=str(doc.get("retrieved_at", "")),
    )


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_dir(path: Path, source: str) -> list[NewformRecord]:
    records = []
    for p in sorted(path.glob("*.json")):
        with open(p, "rb") as fh:
            records.append(_parse_record(json.loads(fh.read()), source))
    return records


def _fetch_network(level: int, min_coefficients: int, endpoint: str, timeout: float):
    import requests

    try:
        resp = requests.get(
            endpoint,
            params={"level": level, "weight": 2, "min_coefficients": min_coefficients},
            timeout=timeout,
        )
        resp.raise_for_status()
        payload = resp.json()
    except Exception as exc:  # noqa: BLE001 - network failures collapse to one signal
        raise NetworkUnavailableError(f"network fetch failed for level {level}: {exc}") from exc
    if not isinstance(payload, dict) or "data" not in payload:
        raise SchemaMismatchError("network response missing 'data'")
    return [_parse_record(doc, "network") for doc in payload["data"]]


def fetch_level(
    level: int,
    min_coefficients: int = MIN_COEFFICIENTS_DEFAULT,
    cache: Optional[str] = None,
    allow_network: bool = False,
    endpoint: str = DEFAULT_ENDPOINT,
    timeout: float = 30.0,
) -> list[NewformRecord]:
    """All weight-2 newform embeddings at a prime level.

    Resolution order: disk cache, vendored fixtures (copied byte-for-byte
    into the cache), then the network when explicitly allowed.  The returned
    count must equal the independently computed cusp-form dimension.
    """
    if not is_prime(level):
        raise DataValidationError(f"level {level} is not prime")
    dim = genus_x0_prime(level)
    if dim < 2:
        raise GenusTooSmallError(
            f"dim S_2 at level {level} is {dim}; need genus >= 2"
        )
    cdir = cache_dir(cache) / f"level{level}"
    if cdir.is_dir():
        records = _load_dir(cdir, "cache")
        if records and all(r.truncation >= min_coefficients for r in records):
            _check_records(records, level, dim, min_coefficients)
            return records
    fixture_files = _fixture_files(level)
    if fixture_files:
        records = []
        for p in fixture_files:
            raw = p.read_bytes()
            _atomic_write(cdir / p.name, raw)
            records.append(_parse_record(json.loads(raw), "fixture"))
        _check_records(records, level, dim, min_coefficients)
        return records
    if not allow_network:
        raise NetworkUnavailableError(
            f"no cache or fixture for level {level} and network fetch disabled"
        )
    records = _fetch_network(level, min_coefficients, endpoint, timeout)
    _check_records(records, level, dim, min_coefficients)
    for r in records:
        doc = {
            "schema_version": 1,
            "level": r.level,
            "weight": 2,
            "label": r.label,
            "embedding_index": r.embedding_index,
            "atkin_lehner": r.atkin_lehner,
            "coefficients": [repr(float(c.real)) for c in r.coefficients],
            "coefficients_imag": None
            if not np.any(r.coefficients.imag)
            else [repr(float(c.imag)) for c in r.coefficients],
            "truncation": r.truncation,
            "source": "network",
            "retrieved_at": r.retrieved_at,
        }
        _atomic_write(cdir / f"{r.label}.json", json.dumps(doc, sort_keys=True).encode())
    return records


def _check_records(
    records: Sequence[NewformRecord], level: int, dim: int, min_coefficients: int
) -> None:
    if len(records) != dim:
        raise DataValidationError(
            f"level {level}: {len(records)} embeddings loaded, dimension formula says {dim}"
        )
    report = validate_records(records, min_coefficients=min_coefficients)
    if report.violations:
        raise DataValidationError(
            f"level {level} records failed validation: {report.violations}"
        )


@dataclass(frozen=True)
class AuditReport:
    violations: tuple[str, ...]

    @property
    def clean(self) -> bool:
        return not self.violations


def validate_records(
    records: Sequence[NewformRecord],
    min_coefficients: int = MIN_COEFFICIENTS_DEFAULT,
) -> AuditReport:
    """Report-only audit: normalization, growth bound, counts, level sanity."""
    problems: list[str] = []
    if not records:
        return AuditReport(("no records",))
    levels = {r.level for r in records}
    if len(levels) != 1:
        problems.append(f"mixed levels {sorted(levels)}")
    for r in records:
        if not is_prime(r.level):
            problems.append(f"{r.label}: level {r.level} not prime")
        if r.truncation < min_coefficients:
            problems.append(
                f"{r.label}: only {r.truncation} coefficients, need {min_coefficients}"
            )
        if abs(r.coefficients[0] - 1.0) > 1e-9:
            problems.append(f"{r.label}: a_1 = {r.coefficients[0]} not normalized")
        if r.atkin_lehner not in (1, -1):
            problems.append(f"{r.label}: involution eigenvalue {r.atkin_lehner}")
        m = r.truncation
        dn = divisor_counts(m)[1:]
        bound = dn * np.sqrt(np.arange(1, m + 1)) + 1e-6
        bad = np.nonzero(np.abs(r.coefficients) > bound)[0]
        if bad.size:
            n = int(bad[0]) + 1
            problems.append(f"{r.label}: |a_{n}| violates the growth bound")
    lvl = records[0].level
    if is_prime(lvl):
        dim = genus_x0_prime(lvl)
        if len(records) != dim:
            problems.append(f"{len(records)} records but dim S_2 = {dim}")
    return AuditReport(tuple(problems))


def qexpansions_for_level(
    level: int,
    min_coefficients: int = MIN_COEFFICIENTS_DEFAULT,
    cache: Optional[str] = None,
    allow_network: bool = False,
) -> list[QExpansion]:
    records = fetch_level(
        level, min_coefficients=min_coefficients, cache=cache, allow_network=allow_network
    )
    return [r.to_qexpansion() for r in sorted(records, key=lambda r: r.label)]
