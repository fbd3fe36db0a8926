"""Dataset generation and CSV ingestion.

A dataset spec is a compact one-line string that fully determines a dataset,
so traces can echo it and replays can rebuild the exact same points:

* ``uniform:n=1000,d=4,seed=7`` - i.i.d. uniform points in the unit box
* ``gaussian_mixture:n=1000,d=4,components=5,sigma=0.05,seed=7`` - component
  means uniform in [0.2, 0.8]^d, points are a uniformly chosen mean plus
  N(0, sigma^2 I) noise, clipped per coordinate to [0, 1] (``mixture:`` is
  accepted as an alias)
* ``csv:path=data.csv,normalize=1,header=0`` - rows of a comma-separated
  file, optionally min-max scaled per coordinate
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .sampling import RandomStream

__all__ = [
    "GenSpec",
    "parse_gen_spec",
    "generate_synthetic",
    "ingest_csv",
    "csv_spec",
    "load_dataset",
]

_KINDS = ("uniform", "gaussian_mixture")


@dataclass(frozen=True)
class GenSpec:
    """Fully seeded recipe for a synthetic dataset."""

    kind: str
    n: int
    d: int
    components: int = 1
    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ContractViolation(f"unknown dataset kind {self.kind!r}; expected {_KINDS}")
        if self.n < 1 or self.d < 1 or self.components < 1:
            raise ContractViolation("n, d and components must be positive")
        if self.sigma < 0:
            raise ContractViolation("sigma must be non-negative")

    def render(self) -> str:
        """Canonical spec string, round-trips through parse_gen_spec."""
        if self.kind == "uniform":
            return f"uniform:n={self.n},d={self.d},seed={self.seed}"
        return (
            f"gaussian_mixture:n={self.n},d={self.d},components={self.components},"
            f"sigma={self.sigma!r},seed={self.seed}"
        )


def _parse_kv(body: str, what: str) -> dict:
    out = {}
    if not body:
        return out
    for item in body.split(","):
        if "=" not in item:
            raise ContractViolation(f"bad {what} entry {item!r}; expected key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_gen_spec(text: str) -> GenSpec:
    """Parse a ``kind:key=value,...`` generator spec string."""
    if ":" not in text:
        raise ContractViolation(f"bad dataset spec {text!r}; expected kind:key=value,...")
    kind, body = text.split(":", 1)
    kind = kind.strip()
    if kind == "mixture":
        kind = "gaussian_mixture"
    fields = _parse_kv(body, "dataset spec")
    known = {"n", "d", "components", "sigma", "seed"}
    unknown = set(fields) - known
    if unknown:
        raise ContractViolation(f"unknown dataset spec keys {sorted(unknown)}")
    if "n" not in fields or "d" not in fields:
        raise ContractViolation("dataset spec needs at least n= and d=")
    try:
        return GenSpec(
            kind=kind,
            n=int(fields["n"]),
            d=int(fields["d"]),
            components=int(fields.get("components", 1)),
            sigma=float(fields.get("sigma", 0.05)),
            seed=int(fields.get("seed", 0)),
        )
    except ValueError as exc:
        raise ContractViolation(f"bad dataset spec value: {exc}") from None


def generate_synthetic(spec, rng: Optional[RandomStream] = None) -> np.ndarray:
    """Materialize a GenSpec (or spec string) into an (n, d) array in [0, 1]^d.

    Fully determined by ``GenSpec.seed``: means are drawn first, then the
    per-point component choices, then the noise.
    """
    if isinstance(spec, str):
        spec = parse_gen_spec(spec)
    if rng is None:
        rng = RandomStream(spec.seed)
    if spec.kind == "uniform":
        return rng.random(size=(spec.n, spec.d))
    means = 0.2 + 0.6 * rng.random(size=(spec.components, spec.d))
    comp = rng.integers(spec.components, size=spec.n)
    noise = spec.sigma * rng.normal(size=(spec.n, spec.d))
    return np.clip(means[np.asarray(comp, dtype=np.int64)] + noise, 0.0, 1.0)


def ingest_csv(path, normalize: bool = False, header: bool = False) -> np.ndarray:
    """Load points from a comma-separated file.

    Each non-blank line is one point with '.' as the decimal mark. With
    ``header=True`` the first line is skipped. With ``normalize=True`` each
    coordinate is min-max scaled to [0, 1] and constant coordinates map to
    0.5; without it, any value outside [0, 1] is an error.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if header and lineno == 1:
                continue
            text = line.strip()
            if not text:
                continue
            cells = text.split(",")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                raise ContractViolation(
                    f"{path}: non-numeric value on line {lineno}"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ContractViolation(
                    f"{path}: ragged row on line {lineno}; expected {width} values, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ContractViolation(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ContractViolation(f"{path}: non-finite value in data")
    if normalize:
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        span = hi - lo
        flat = span == 0
        span = np.where(flat, 1.0, span)
        X = (X - lo) / span
        X[:, flat] = 0.5
    elif X.min() < 0.0 or X.max() > 1.0:
        raise ContractViolation(
            f"{path}: values outside [0, 1]; pass normalize=True to min-max scale"
        )
    return X


def csv_spec(path, normalize: bool = False, header: bool = False) -> str:
    """Dataset spec string for a CSV source (echoed into traces)."""
    return f"csv:path={path},normalize={int(bool(normalize))},header={int(bool(header))}"


def load_dataset(spec: str) -> np.ndarray:
    """Materialize any dataset spec string (generator or csv)."""
    if spec.startswith(("uniform:", "gaussian_mixture:", "mixture:")):
        return generate_synthetic(spec)
    if spec.startswith("csv:"):
        fields = _parse_kv(spec.split(":", 1)[1], "csv spec")
        if "path" not in fields:
            raise ContractViolation("csv dataset spec needs path=")
        return ingest_csv(
            fields["path"],
            normalize=fields.get("normalize", "0") in ("1", "true", "True"),
            header=fields.get("header", "0") in ("1", "true", "True"),
        )
    raise ContractViolation(f"unknown dataset spec {spec!r}")
