"""Covering sets for space splitting and covering codes over choice vectors.

Both constructions are greedy set cover over an exhaustively enumerated space.
Binary points are integers whose bit i is the value of x_{i+1}; choice words
are tuples over {1..k}.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAX_BLOCK_BITS = 24
MAX_CHOICE_POINTS = 10**7


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class BinarySpace:
    n: int

    @property
    def size(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class ChoiceSpace:
    k: int
    t: int

    @property
    def size(self) -> int:
        return self.k**self.t


@dataclass
class CoverSet:
    block_length: int
    radius: int
    centers: list[tuple[int, ...]]
    block_param: int
    block_sizes: tuple[int, ...] = ()
    block_radii: tuple[int, ...] = ()
    block_covers: list[list[int]] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.centers)


@dataclass
class ChoiceCode:
    arity: int
    word_length: int
    radius: int
    words: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.words)


def as_fraction(rho) -> Fraction:
    if isinstance(rho, Fraction):
        return rho
    if isinstance(rho, str):
        return Fraction(rho)
    return Fraction(rho).limit_denominator(10**6)


def entropy2(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


# ---------------------------------------------------------------- greedy core


def _greedy(num_points: int, ball) -> list[int]:
    """Lazy greedy set cover where every point is a candidate center.

    ``ball(c)`` returns an index array of the points within the radius of c.
    Ties go to the smallest center index, which keeps covers reproducible.
    """
    covered = np.zeros(num_points, dtype=bool)
    remaining = num_points
    full = len(ball(0))
    heap = [(-full, c) for c in range(num_points)]
    heapq.heapify(heap)
    chosen = []
    while remaining:
        neg_gain, c = heapq.heappop(heap)
        pts = ball(c)
        gain = int(np.count_nonzero(~covered[pts]))
        if gain == -neg_gain:
            if gain == 0:
                break
            chosen.append(c)
            covered[pts] = True
            remaining -= gain
        elif gain > 0:
            heapq.heappush(heap, (-gain, c))
    return sorted(chosen)


def _error_patterns(bits: int, radius: int) -> np.ndarray:
    pats = [0]
    for w in range(1, radius + 1):
        for pos in itertools.combinations(range(bits), w):
            pats.append(sum(1 << p for p in pos))
    return np.array(pats, dtype=np.int64)


def greedy_binary_cover(bits: int, radius: int) -> list[int]:
    if bits > MAX_BLOCK_BITS:
        raise CoverError(f"block of {bits} bits exceeds the {MAX_BLOCK_BITS}-bit greedy limit")
    if radius <= 0:
        return list(range(1 << bits))
    if radius >= bits:
        return [0]
    pats = _error_patterns(bits, radius)
    return _greedy(1 << bits, lambda c: c ^ pats)


def block_sizes(n: int, d: int) -> list[int]:
    """Split n into blocks of ceil(n/d) bits; the last block takes the remainder."""
    if d < 1:
        raise CoverError("d must be >= 1")
    b = -(-n // d)
    sizes = []
    left = n
    while left > 0:
        sizes.append(min(b, left))
        left -= sizes[-1]
    return sizes


def build_binary_cover(n: int, rho, d: int = 1, use_cache: bool = True) -> CoverSet:
    rho = as_fraction(rho)
    if not (0 <= rho < Fraction(1, 2)):
        raise CoverError(f"rho must lie in [0, 1/2), got {rho}")
    if n < 1:
        raise CoverError("n must be >= 1")
    sizes = block_sizes(n, d)
    radii = [math.floor(rho * b) for b in sizes]
    if use_cache:
        cached = load_cached(n, rho, d)
        if cached is not None:
            return cached
    t0 = time.perf_counter()
    covers = {}
    per_block = []
    for b, r in zip(sizes, radii):
        if (b, r) not in covers:
            covers[(b, r)] = greedy_binary_cover(b, r)
        per_block.append(covers[(b, r)])
    centers = [_join_blocks(parts, sizes) for parts in itertools.product(*per_block)]
    cover = CoverSet(n, sum(radii), centers, d, tuple(sizes), tuple(radii), per_block)
    if rho > 0:
        bound = 2 ** ((1 - entropy2(float(rho))) * n)
        log.info("cover n=%d rho=%s d=%d: %d centers, %.3f x 2^((1-h(rho))n), built in %.3fs",
                 n, rho, d, len(centers), len(centers) / bound, time.perf_counter() - t0)
    if use_cache:
        store_cached(cover, rho)
    return cover


def _join_blocks(parts, sizes) -> tuple[int, ...]:
    bits = []
    for value, b in zip(parts, sizes):
        bits.extend((value >> i) & 1 for i in range(b))
    return tuple(bits)


# --------------------------------------------------------------- choice codes


def _choice_digits(k: int, t: int) -> np.ndarray:
    """Row w holds the base-k digits of w, most significant first."""
    idx = np.arange(k**t, dtype=np.int64)
    digits = np.empty((k**t, t), dtype=np.int64)
    for pos in range(t - 1, -1, -1):
        digits[:, pos] = idx % k
        idx //= k
    return digits


def _shift_patterns(k: int, t: int, radius: int) -> np.ndarray:
    pats = [np.zeros(t, dtype=np.int64)]
    for w in range(1, radius + 1):
        for pos in itertools.combinations(range(t), w):
            for shifts in itertools.product(range(1, k), repeat=w):
                p = np.zeros(t, dtype=np.int64)
                p[list(pos)] = shifts
                pats.append(p)
    return np.array(pats)


def build_choice_cover(k: int, t: int) -> ChoiceCode:
    if k < 2 or t < 1:
        raise CoverError("need k >= 2 and t >= 1")
    if k**t > MAX_CHOICE_POINTS:
        raise CoverError(f"{k}^{t} words exceed the exhaustive limit {MAX_CHOICE_POINTS}")
    radius = t // k
    digits = _choice_digits(k, t)
    weights = k ** np.arange(t - 1, -1, -1, dtype=np.int64)
    pats = _shift_patterns(k, t, radius)

    def ball(c):
        return ((digits[c] + pats) % k) @ weights

    chosen = _greedy(k**t, ball) if radius > 0 else list(range(k**t))
    words = [tuple(int(x) + 1 for x in digits[c]) for c in chosen]
    code = ChoiceCode(k, t, radius, words)
    if not verify_cover(words, radius, ChoiceSpace(k, t)):
        raise CoverError("greedy choice code failed coverage check")
    return code


# ------------------------------------------------------------------ checking


def verify_cover(centers, radius: int, space) -> bool:
    """Exhaustive coverage scan of ``space`` by radius balls around ``centers``."""
    if isinstance(space, BinarySpace):
        if space.n > MAX_BLOCK_BITS:
            raise CoverError(f"{{0,1}}^{space.n} too large for an exhaustive scan")
        covered = np.zeros(space.size, dtype=bool)
        if radius >= space.n:
            return len(centers) > 0
        pats = _error_patterns(space.n, max(radius, 0))
        for c in centers:
            if not isinstance(c, (int, np.integer)):
                c = sum(b << i for i, b in enumerate(c))
            covered[c ^ pats] = True
        return bool(covered.all())
    if isinstance(space, ChoiceSpace):
        k, t = space.k, space.t
        if space.size > MAX_CHOICE_POINTS:
            raise CoverError(f"{k}^{t} words too large for an exhaustive scan")
        if not centers:
            return False
        digits = _choice_digits(k, t)
        best = np.full(space.size, t + 1, dtype=np.int64)
        for w in centers:
            cw = np.array(w, dtype=np.int64) - 1
            np.minimum(best, (digits != cw).sum(axis=1), out=best)
        return bool((best <= radius).all())
    raise CoverError(f"unknown space {space!r}")


def covering_radius_binary(centers, n: int) -> int:
    """Largest distance from a point of {0,1}^n to its nearest center (n <= 20)."""
    pts = np.arange(1 << n, dtype=np.int64)
    best = np.full(1 << n, n + 1, dtype=np.int64)
    for c in centers:
        ci = sum(b << i for i, b in enumerate(c))
        x = pts ^ ci
        pop = np.zeros_like(x)
        for i in range(n):
            pop += (x >> i) & 1
        np.minimum(best, pop, out=best)
    return int(best.max())


# -------------------------------------------------------------- serialization


def dump_cover(cover: CoverSet, rho=None) -> str:
    head = [f"# cover n={cover.block_length} radius={cover.radius} d={cover.block_param}"]
    if rho is not None:
        head.append(f"# rho={as_fraction(rho)}")
    head.append("# blocks=" + ",".join(f"{b}:{r}" for b, r in zip(cover.block_sizes, cover.block_radii)))
    lines = ["".join(str(b) for b in c) for c in cover.centers]
    return "\n".join(head + lines) + "\n"


def parse_cover(text: str) -> CoverSet:
    meta = {}
    centers = []
    blocks = ()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    meta[key] = val
            continue
        if not set(line) <= {"0", "1"}:
            raise CoverError(f"bad center line {line!r}")
        centers.append(tuple(int(ch) for ch in line))
    if "blocks" in meta and meta["blocks"]:
        blocks = tuple(tuple(int(x) for x in part.split(":")) for part in meta["blocks"].split(","))
    n = int(meta["n"])
    if any(len(c) != n for c in centers):
        raise CoverError("center length does not match n")
    return CoverSet(
        block_length=n,
        radius=int(meta["radius"]),
        centers=centers,
        block_param=int(meta["d"]),
        block_sizes=tuple(b for b, _ in blocks),
        block_radii=tuple(r for _, r in blocks),
    )


def cache_dir() -> Path | None:
    path = os.environ.get("HYBRIDSAT_CACHE")
    return Path(path) if path else None


def _cache_path(n: int, rho: Fraction, d: int) -> Path | None:
    root = cache_dir()
    if root is None:
        return None
    return root / f"cover_n{n}_rho{rho.numerator}-{rho.denominator}_d{d}.txt"


def load_cached(n: int, rho, d: int) -> CoverSet | None:
    path = _cache_path(n, as_fraction(rho), d)
    if path is None or not path.exists():
        return None
    try:
        return parse_cover(path.read_text())
    except (CoverError, KeyError, ValueError):
        log.warning("ignoring unreadable cover cache %s", path)
        return None


def store_cached(cover: CoverSet, rho) -> None:
    path = _cache_path(cover.block_length, as_fraction(rho), cover.block_param)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_cover(cover, rho))
