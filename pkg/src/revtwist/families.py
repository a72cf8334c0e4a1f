"""Finitely supported perturbation coefficient families.

A family collects the nonzero coefficients a_{i,j} of the perturbation
generator atilde(xi, eta) = sum a_{i,j} xi^i eta^j with i+j > 2s.  The
optional Hermitian flag enforces a_{j,i} = conj(a_{i,j}), which is exactly
the condition making atilde real on the slice eta = conj(xi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .series import Jet


@dataclass(frozen=True)
class CoefficientFamily:
    """Sparse map (i,j) -> a_{i,j} with i+j > 2s and |a_{i,j}| <= 1."""

    entries: dict[tuple[int, int], complex]
    s: int
    hermitian: bool = False
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        ent = {}
        for (i, j), v in self.entries.items():
            i, j = int(i), int(j)
            v = complex(v)
            if v == 0:
                continue
            ent[(i, j)] = v
        if self.hermitian:
            for (i, j), v in list(ent.items()):
                mirror = ent.get((j, i))
                if mirror is None:
                    ent[(j, i)] = np.conj(v)
                elif abs(mirror - np.conj(v)) > 0:
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) break Hermitian symmetry")
        if self._validate:
            if self.s < 1:
                raise ValueError("s must be a positive integer")
            for (i, j), v in ent.items():
                if i < 0 or j < 0:
                    raise ValueError(f"negative index ({i},{j})")
                if i + j <= 2 * self.s:
                    raise ValueError(f"entry ({i},{j}) has total degree <= 2s = {2 * self.s}")
                if abs(v) > 1.0 + 1e-12:
                    raise ValueError(f"entry ({i},{j}) has modulus {abs(v)} > 1")
        object.__setattr__(self, "entries", ent)

    @staticmethod
    def empty(s: int) -> "CoefficientFamily":
        return CoefficientFamily({}, s)

    def scaled(self, t: complex) -> "CoefficientFamily":
        """Family with every entry multiplied by t (skips Sigma validation)."""
        return CoefficientFamily(
            {k: t * v for k, v in self.entries.items()}, self.s, False, _validate=False
        )

    def conjugated(self) -> "CoefficientFamily":
        """Family of conj(a_{i,j}): the rho-conjugate perturbation data."""
        return CoefficientFamily(
            {k: np.conj(v) for k, v in self.entries.items()}, self.s, False, _validate=False
        )

    def max_modulus(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def max_degree(self) -> int:
        return max((i + j for i, j in self.entries), default=0)

    def eval(self, xi, eta):
        """atilde(xi, eta); accepts scalars or numpy arrays."""
        xi = np.asarray(xi, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        out = np.zeros(np.broadcast(xi, eta).shape, dtype=complex)
        for (i, j), v in self.entries.items():
            term = np.full_like(out, v)
            if i:
                term = term * xi**i
            if j:
                term = term * eta**j
            out = out + term
        return out

    def to_jet(self, order: int) -> Jet:
        ent = {k: v for k, v in self.entries.items() if k[0] + k[1] <= order}
        return Jet.from_entries(ent, order)


def _parse_line(line: str, lineno: int) -> tuple[tuple[int, int], complex] | None:
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    if len(parts) != 4:
        raise ValueError(f"line {lineno}: expected 'i j re im', got {line.rstrip()!r}")
    try:
        i, j = int(parts[0]), int(parts[1])
        re, im = float(parts[2]), float(parts[3])
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from exc
    return (i, j), complex(re, im)


def load_family(path: str | Path, s: int, hermitian: bool = False) -> CoefficientFamily:
    """Read a family from the text format: one 'i j re im' entry per line."""
    entries: dict[tuple[int, int], complex] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        parsed = _parse_line(line, lineno)
        if parsed is None:
            continue
        key, value = parsed
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate entry for {key}")
        entries[key] = value
    return CoefficientFamily(entries, s, hermitian)


def save_family(path: str | Path, family: CoefficientFamily) -> None:
    lines = ["# coefficient family: i j re im"]
    for (i, j) in sorted(family.entries):
        v = family.entries[(i, j)]
        lines.append(f"{i} {j} {v.real:.17g} {v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
