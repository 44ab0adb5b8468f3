"""Canonical binary operations on the rationals and exact preservation checks.

Every operation is described only by the weak order it induces on pairs.  We
realise that order by an integer *key*: ``op(p) < op(q)`` iff
``key(p) < key(q)``.  Keys are computed on numpy arrays so the same code
serves single comparisons and the batched preservation kernel.

``ll`` and ``pp`` depend on where 0 sits among the first-argument values.
That position is passed as an explicit marker value ``z`` and enumerated
during preservation checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ContractError
from .order import TemporalRelation, WeakOrder, enumerate_weak_orders, orbit_of, weak_order_index

BASE_OPS = ("min", "mi", "mx", "mix", "lex", "ll", "pp", "proj1", "proj2")
MARKER_OPS = ("ll", "pp")
# keys of these never compare a first-argument value with a second-argument one
NON_CROSSING = ("lex", "ll", "pp", "proj1", "proj2")

_DUAL_NAMES = {"dll": "ll", "dpp": "pp", "dlex": "lex"}


@dataclass(frozen=True)
class OpSpec:
    name: str
    dual: bool = False

    def __post_init__(self):
        if self.name not in BASE_OPS:
            raise ContractError(f"unknown operation {self.name!r}")

    @property
    def needs_marker(self) -> bool:
        return self.name in MARKER_OPS

    @property
    def markers(self) -> frozenset[str]:
        return frozenset({"threshold-on-first-argument"}) if self.needs_marker else frozenset()

    @property
    def label(self) -> str:
        if not self.dual:
            return self.name
        for short, base in _DUAL_NAMES.items():
            if base == self.name:
                return short
        return f"dual-{self.name}"

    def __str__(self) -> str:
        return self.label


def op(label: str) -> OpSpec:
    """``OpSpec`` from a label such as ``mi``, ``dual-min`` or ``dll``."""
    if label in _DUAL_NAMES:
        return OpSpec(_DUAL_NAMES[label], True)
    if label.startswith("dual-"):
        return OpSpec(label[5:], True)
    return OpSpec(label)


def _base_key(name: str, x, y, z, B: int):
    """Integer key of ``name(x, y)``; all inputs lie in ``[0, B)``."""
    lo = np.minimum(x, y)
    if name == "min":
        return lo
    if name == "mi":
        # equal < first larger < second larger
        return 3 * lo + np.where(x == y, 0, np.where(x > y, 1, 2))
    if name == "mx":
        return 2 * lo + (x == y)
    if name == "mix":
        # gamma(y) for x > y, alpha(x) for x < y, beta(x) for x = y
        return 3 * lo + np.where(x > y, 0, np.where(x < y, 1, 2))
    if name == "lex":
        return x * B + y
    if name == "ll":
        return np.where(x <= z, x * B + y, B * B + y * B + x)
    if name == "pp":
        return np.where(x <= z, x, B + y)
    if name == "proj1":
        return x + 0 * y
    if name == "proj2":
        return y + 0 * x
    raise ContractError(f"unknown operation {name!r}")


def keys(spec: OpSpec, x, y, z=None, B: int | None = None):
    """Keys for value arrays ``x``, ``y`` (and marker ``z``), all non-negative."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    zz = np.asarray(-1 if z is None else z, dtype=np.int64)
    if B is None:
        B = int(max(x.max(initial=0), y.max(initial=0), zz.max(initial=0))) + 2
    if spec.dual:
        # -f(-x, -y), with the marker reflected too
        return -_base_key(spec.name, B - 2 - x, B - 2 - y, B - 2 - zz, B)
    return _base_key(spec.name, x, y, zz, B)


def compare(spec: OpSpec, p: Sequence[int], q: Sequence[int], marker_rank: int | None = None) -> str:
    """Order of ``spec(p)`` and ``spec(q)`` as one of ``'<'``, ``'='``, ``'>'``."""
    if spec.needs_marker and marker_rank is None:
        raise ContractError(f"{spec.label} needs the position of 0 as a marker")
    if not spec.needs_marker and marker_rank is not None:
        raise ContractError(f"{spec.label} takes no marker")
    values = [p[0], p[1], q[0], q[1]] + ([marker_rank] if marker_rank is not None else [])
    shift = -min(values)
    xs = np.array([p[0], q[0]]) + shift
    ys = np.array([p[1], q[1]]) + shift
    z = None if marker_rank is None else marker_rank + shift
    a, b = keys(spec, xs, ys, z)
    return "<" if a < b else "=" if a == b else ">"


def _check_interleaving(spec: OpSpec, s: WeakOrder, t: WeakOrder, interleaving) -> None:
    if len(s) != len(t):
        raise ContractError("orbits of different lengths")
    k, m = max(s) + 1, max(t) + 1
    extra = 1 if spec.needs_marker else 0
    if len(interleaving) != k + m + extra:
        raise ContractError(f"interleaving must rank {k} + {m} blocks" + (" and a marker" if extra else ""))
    if orbit_of(interleaving[:k]) != tuple(range(k)) or orbit_of(interleaving[k:k + m]) != tuple(range(m)):
        raise ContractError("interleaving does not restrict to the block orders of s and t")


def apply_binary(spec: OpSpec, s: WeakOrder, t: WeakOrder, interleaving: Sequence[int]) -> WeakOrder:
    """Orbit of ``spec(a, b)`` for ``a`` in orbit ``s`` and ``b`` in orbit ``t``.

    ``interleaving`` ranks the blocks of ``s``, then the blocks of ``t``, then
    (for ``ll``/``pp``) the position of 0, on one common line.
    """
    s, t = tuple(s), tuple(t)
    _check_interleaving(spec, s, t, interleaving)
    k, m = max(s) + 1, max(t) + 1
    iv = np.asarray(interleaving, dtype=np.int64)
    x = iv[list(s)]
    y = iv[[k + r for r in t]]
    z = iv[k + m] if spec.needs_marker else None
    return orbit_of(keys(spec, x, y, z).tolist())


@lru_cache(maxsize=None)
def merges(k: int, m: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """All ways to place a chain of ``k`` blocks and a chain of ``m`` blocks on one line.

    Each entry gives the ranks of the ``k`` blocks and of the ``m`` blocks.
    The count is the Delannoy number ``D(k, m)``.
    """
    if k == 0:
        return (((), tuple(range(m))),)
    if m == 0:
        return ((tuple(range(k)), ()),)
    out = []
    # the lowest rank is taken by the first s block, the first t block, or both
    for a, b in ((1, 0), (0, 1), (1, 1)):
        for rest_s, rest_t in merges(k - a, m - b):
            out.append((
                (0,) * a + tuple(r + 1 for r in rest_s),
                (0,) * b + tuple(r + 1 for r in rest_t),
            ))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _merge_arrays(k: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    ms = merges(k, m)
    sv = np.array([a for a, _ in ms], dtype=np.int64).reshape(len(ms), k)
    tv = np.array([b for _, b in ms], dtype=np.int64).reshape(len(ms), m)
    return sv, tv


def _sign_codes(key_arr: np.ndarray) -> np.ndarray:
    """Encode the weak order of each row (last axis) as an integer."""
    n = key_arr.shape[-1]
    code = np.zeros(key_arr.shape[:-1], dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            code = code * 3 + (np.sign(key_arr[..., i] - key_arr[..., j]) + 1)
    return code


@lru_cache(maxsize=None)
def _orbit_codes(n: int) -> np.ndarray:
    return _sign_codes(np.array(enumerate_weak_orders(n), dtype=np.int64).reshape(-1, n))


def _placements(spec: OpSpec, s: WeakOrder, t_group: list[WeakOrder], full: bool):
    """Yield value arrays ``(x, y, z, interleavings)`` covering all placements.

    ``x`` has shape (P, n), ``y`` shape (P, T, n), ``z`` shape (P,) or None,
    where P enumerates the admissible interleavings for this s and t-group.
    """
    k = max(s) + 1
    m = max(t_group[0]) + 1
    T = np.array(t_group, dtype=np.int64)
    s_arr = np.array(s, dtype=np.int64)
    if spec.name in NON_CROSSING and not full:
        sv = np.arange(k, dtype=np.int64)[None, :]
        tv = np.arange(m, dtype=np.int64)[None, :] + k
    else:
        sv, tv = _merge_arrays(k, m)
    if spec.needs_marker:
        # double the values so the marker can sit on a block or strictly between
        sv2, tv2 = 2 * sv + 1, 2 * tv + 1
        top = int(max(sv2.max(), tv2.max())) + 1
        zs = list(range(0, top + 1))
        P = len(sv2)
        sv = np.repeat(sv2, len(zs), axis=0)
        tv = np.repeat(tv2, len(zs), axis=0)
        z = np.tile(np.array(zs, dtype=np.int64), P)
    else:
        z = None
    x = sv[:, s_arr]
    y = tv[:, T]
    return x, y, z, sv, tv


def _group_by_blocks(orbits) -> dict[int, list[WeakOrder]]:
    groups: dict[int, list[WeakOrder]] = {}
    for o in sorted(orbits):
        groups.setdefault(max(o) + 1, []).append(o)
    return groups


def _images(spec: OpSpec, s: WeakOrder, group: list[WeakOrder], full: bool):
    x, y, z, sv, tv = _placements(spec, s, group, full)
    B = int(max(x.max(), y.max(), 0 if z is None else z.max())) + 2
    zb = None if z is None else z[:, None, None]
    key_arr = keys(spec, x[:, None, :], y, zb, B)
    key_arr = np.broadcast_to(key_arr, y.shape)
    return _sign_codes(key_arr), sv, tv, z


def find_violation(spec: OpSpec, rel: TemporalRelation, full: bool = False):
    """A witness ``(s, t, interleaving, image)`` with image outside ``rel``, or None.

    ``full`` disables the single-interleaving shortcut for operations whose
    keys never compare values across the two arguments.
    """
    n = rel.arity
    if not rel.orbits:
        return None
    codes = _orbit_codes(n)
    index = weak_order_index(n)
    allowed = np.array(sorted(codes[index[o]] for o in rel.orbits), dtype=np.int64)
    groups = _group_by_blocks(rel.orbits)
    for s in sorted(rel.orbits):
        for m, group in sorted(groups.items()):
            img, sv, tv, z = _images(spec, s, group, full)
            bad = ~np.isin(img, allowed)
            if bad.any():
                p, ti = map(int, np.argwhere(bad)[0])
                t = group[ti]
                line = sv[p].tolist() + tv[p].tolist() + ([int(z[p])] if z is not None else [])
                interleaving = orbit_of(line)
                return s, t, interleaving, apply_binary(spec, s, t, interleaving)
    return None


def preserves(spec: OpSpec | str, rel: TemporalRelation, full: bool = False) -> bool:
    """Whether the operation maps every pair of tuples of ``rel`` into ``rel``."""
    if isinstance(spec, str):
        spec = op(spec)
    return find_violation(spec, rel, full) is None


def preserves_structure(spec: OpSpec | str, relations) -> bool:
    return all(preserves(spec, r) for r in relations)


@lru_cache(maxsize=None)
def image_table(spec: OpSpec, n: int) -> tuple[tuple[int, ...], ...]:
    """``table[i][j]``: bitmask of orbits reachable as ``spec(s_i, t_j)``."""
    orders = enumerate_weak_orders(n)
    index = {int(c): i for i, c in enumerate(_orbit_codes(n))}
    groups = _group_by_blocks(orders)
    table = []
    for s in orders:
        row = [0] * len(orders)
        for group in groups.values():
            img, _, _, _ = _images(spec, s, group, full=False)
            for ti, t in enumerate(group):
                mask = 0
                for c in np.unique(img[:, ti]):
                    mask |= 1 << index[int(c)]
                row[weak_order_index(n)[t]] = mask
        table.append(tuple(row))
    return tuple(table)


def preserved_masks(spec: OpSpec, n: int, masks: np.ndarray) -> np.ndarray:
    """Vectorised preservation for many relations given as orbit bitmasks."""
    table = image_table(spec, n)
    masks = np.asarray(masks, dtype=np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    size = len(table)
    for i in range(size):
        has_i = (masks >> i) & 1 == 1
        for j in range(size):
            has_j = (masks >> j) & 1 == 1
            escapes = (np.int64(table[i][j]) & ~masks) != 0
            ok &= ~(has_i & has_j & escapes)
    return ok


class ConcreteMixTable:
    """``mix`` on non-negative integers with gamma(x)=3x, alpha(x)=3x+1, beta(x)=3x+2."""

    def __call__(self, x: int, y: int) -> int:
        if x < 0 or y < 0:
            raise ContractError("the concrete mix table is defined on non-negative integers")
        if x < y:
            return 3 * x + 1
        if x == y:
            return 3 * x + 2
        return 3 * y

    def grid(self, size: int = 4) -> dict[tuple[int, int], int]:
        return {(x, y): self(x, y) for x in range(size) for y in range(size)}


def mi_from_mix_grid_check(size: int = 4) -> bool:
    """``mix(mix(x, y), 3y)`` orders the grid exactly as ``mi`` does."""
    mix = ConcreteMixTable()
    mi = OpSpec("mi")
    points = [(x, y) for x in range(size) for y in range(size)]
    for p in points:
        for q in points:
            fp, fq = mix(mix(*p), 3 * p[1]), mix(mix(*q), 3 * q[1])
            got = "<" if fp < fq else "=" if fp == fq else ">"
            if got != compare(mi, p, q):
                return False
    return True


def monotone_on_lt(spec: OpSpec) -> bool:
    """Every interleaving of two increasing pairs yields an increasing pair."""
    extra = 1 if spec.needs_marker else 0
    for line in enumerate_weak_orders(4 + extra):
        if orbit_of(line[:2]) != (0, 1) or orbit_of(line[2:4]) != (0, 1):
            continue
        if apply_binary(spec, (0, 1), (0, 1), line) != (0, 1):
            return False
    return True
