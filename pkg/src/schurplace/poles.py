"""Target spectrum: validation, conjugate pairing and grouping.

A :class:`PoleSpec` is an ordered list of :class:`PoleGroup` objects, one
per distinct pole value. Complex groups store the member with positive
imaginary part and stand for ``multiplicity`` copies of both ``lambda`` and
its conjugate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateSplitGroup, NotConjugateClosed, ValidationError


class Order(str, Enum):
    ASCENDING = "ascending"
    AS_GIVEN = "given"


class Kind(str, Enum):
    REAL = "real"
    COMPLEX_PAIR = "complex"


@dataclass(frozen=True)
class Pole:
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValidationError(f"pole {self.re}+{self.im}j is not finite")

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class PoleGroup:
    value: Pole
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValidationError("multiplicity must be >= 1")
        if self.value.im < 0:
            raise ValidationError("complex groups store the member with Im > 0")

    @property
    def kind(self) -> Kind:
        return Kind.REAL if self.value.im == 0 else Kind.COMPLEX_PAIR

    @property
    def is_real(self) -> bool:
        return self.value.im == 0

    @property
    def dimension(self) -> int:
        return self.multiplicity if self.is_real else 2 * self.multiplicity

    def expanded(self) -> list[complex]:
        lam = self.value.value
        if self.is_real:
            return [lam] * self.multiplicity
        return [lam, lam.conjugate()] * self.multiplicity


@dataclass(frozen=True)
class PoleSpec:
    groups: tuple[PoleGroup, ...]

    @property
    def total_real_dimension(self) -> int:
        return sum(g.dimension for g in self.groups)

    def expanded(self) -> list[complex]:
        out: list[complex] = []
        for g in self.groups:
            out.extend(g.expanded())
        return out

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)


def _ascending_key(item):
    (re, im), mult = item
    return (re, abs(im), -mult)


def build_pole_spec(raw: Iterable[Sequence[float]], imag_tol: float = 0.0,
                    order: Order | str = Order.ASCENDING,
                    conjugate_pairs: bool = False) -> PoleSpec:
    """Validate and group a raw list of ``(re, im, mult)`` triples.

    Parameters
    ----------
    raw : iterable of (re, im, mult)
        ``mult`` may be omitted and defaults to 1.
    imag_tol : float
        Entries with ``|im| <= imag_tol`` are snapped to the real axis.
    order : {"ascending", "given"}
        Ascending sorts groups by real part, then ``|im|``. ``"given"`` keeps
        first-appearance order and rejects equal poles split by another value.
    conjugate_pairs : bool
        If true, each non-real entry stands for itself and its conjugate.

    Raises
    ------
    NotConjugateClosed, DuplicateSplitGroup, ValidationError
    """
    order = Order(order)
    counts: dict[tuple[float, float], int] = {}
    sequence: list[tuple[float, float]] = []
    for entry in raw:
        entry = tuple(entry)
        if len(entry) == 2:
            re, im = entry
            mult = 1
        elif len(entry) == 3:
            re, im, mult = entry
        else:
            raise ValidationError(f"pole entry must be (re, im[, mult]), got {entry!r}")
        re, im = float(re), float(im)
        if int(mult) != mult or mult < 1:
            raise ValidationError(f"multiplicity must be a positive integer, got {mult!r}")
        Pole(re, im)  # finiteness check
        if abs(im) <= imag_tol:
            im = 0.0
        if conjugate_pairs and im != 0.0:
            im = abs(im)
            counts[(re, im)] = counts.get((re, im), 0) + int(mult)
            counts[(re, -im)] = counts.get((re, -im), 0) + int(mult)
        else:
            counts[(re, im)] = counts.get((re, im), 0) + int(mult)
        sequence.append((re, abs(im)))
    if not sequence:
        raise ValidationError("empty pole list")

    merged: dict[tuple[float, float], int] = {}
    for (re, im), mult in counts.items():
        if im < 0:
            continue
        if im > 0:
            other = counts.get((re, -im), 0)
            if other != mult:
                raise NotConjugateClosed(
                    f"pole {re}+{im}j has multiplicity {mult} but its conjugate has {other}")
        merged[(re, im)] = mult
    for (re, im), mult in counts.items():
        if im < 0 and (re, -im) not in merged:
            raise NotConjugateClosed(f"pole {re}{im}j has no conjugate")

    if order is Order.AS_GIVEN:
        keys: list[tuple[float, float]] = []
        for key in sequence:
            if keys and keys[-1] == key:
                continue
            if key in keys:
                raise DuplicateSplitGroup(f"pole {key[0]}+{key[1]}j appears in separate runs")
            keys.append(key)
        items = [(k, merged[k]) for k in keys]
    else:
        items = sorted(merged.items(), key=_ascending_key)

    return PoleSpec(tuple(PoleGroup(Pole(re, im), mult) for (re, im), mult in items))


def spec_from_values(values: Iterable[complex], imag_tol: float = 0.0,
                     order: Order | str = Order.ASCENDING) -> PoleSpec:
    """Build a spec from an explicit multiset of (complex) poles."""
    return build_pole_spec(((complex(v).real, complex(v).imag, 1) for v in values),
                           imag_tol=imag_tol, order=order)


def load_pole_file(path: str | Path, imag_tol: float = 0.0,
                   order: Order | str = Order.ASCENDING) -> PoleSpec:
    """Read a pole file.

    Accepted layouts are a bare JSON array of ``{"re", "im", "mult"}`` objects,
    or an object ``{"conjugate_pairs": bool, "poles": [...]}``.
    """
    data = json.loads(Path(path).read_text())
    return pole_spec_from_json(data, imag_tol=imag_tol, order=order)


def pole_spec_from_json(data, imag_tol: float = 0.0,
                        order: Order | str = Order.ASCENDING) -> PoleSpec:
    pairs = False
    if isinstance(data, dict):
        pairs = bool(data.get("conjugate_pairs", False))
        data = data.get("poles")
    if not isinstance(data, list):
        raise ValidationError("pole file must hold a list of poles")
    raw = []
    for obj in data:
        if not isinstance(obj, dict) or "re" not in obj:
            raise ValidationError(f"bad pole entry {obj!r}")
        raw.append((obj["re"], obj.get("im", 0.0), obj.get("mult", 1)))
    return build_pole_spec(raw, imag_tol=imag_tol, order=order, conjugate_pairs=pairs)


def pole_spec_to_json(spec: PoleSpec) -> dict:
    return {
        "conjugate_pairs": True,
        "poles": [{"re": g.value.re, "im": g.value.im, "mult": g.multiplicity}
                  for g in spec.groups],
    }
