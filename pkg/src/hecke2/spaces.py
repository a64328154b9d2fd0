"""The spaces V, M(odd), N1, N2 and W as finite chunks.

A chunk is a finite, degree-saturated set of labelled series: every
generator whose leading exponent is at most the cutoff is present.  Chunk
series are computed at ``2 * max(S) * (cutoff + 1)`` coefficients, so the
image of any generator under ``T_p`` (``p`` in ``S``) is known well past the
cutoff and decompositions are checked on all known coefficients.

Module-basis labels ``(i, j)`` denote ``F^i G^j`` with ``i + j`` odd and
``i`` below ``MODULE_TOP[level]``; these are the ``Z/2[G^2]``-translates of
the basis ``{G, F, F^2 G, F^3, ...}``.  Only the top translate ``F^{top-1}
G^{2m}`` has nonzero trace, namely ``G^{2m+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .action import HeckeModule
from .fps2 import (
    BitSeries,
    InsufficientPrecision,
    SeriesError,
    agree_up_to,
    compose_xk,
    drop_multiples,
    keep_multiples,
    laurent_div,
    mul,
    power,
    theta_F,
    truncate,
)
from .hecke import PrimeSet, apply_Tp
from .linalg2 import BitMatrix, SpanBasis, echelonize, kernel_basis, solve
from .report import Finding

__all__ = [
    "LevelContext",
    "SpaceChunk",
    "ClosedChunk",
    "SpaceError",
    "NotInSpan",
    "KernelMismatch",
    "ChunkOverflow",
    "SanityCheckFailed",
    "MODULE_TOP",
    "build_context",
    "chunk_prec",
    "v_chunk",
    "n1_chunk",
    "n2_chunk",
    "w_chunk",
    "module_chunk",
    "modd_chunk",
    "modd_generators",
    "hecke_module",
    "hecke_closure",
    "operator_matrix",
    "zg2_decompose",
    "trace",
    "conjugate_trace",
    "filtration_check",
    "pr_to_w",
    "kernel_subchunk",
    "embedding_check",
    "split_w",
    "crossing_check",
    "preimage_check",
    "stabilises",
]

MODULE_TOP = {3: 4, 5: 6}


class SpaceError(SeriesError):
    pass


class NotInSpan(SpaceError):
    def __init__(self, message: str, valuation: int | None = None):
        super().__init__(message)
        self.valuation = valuation


class KernelMismatch(SpaceError):
    pass


class ChunkOverflow(SpaceError):
    def __init__(self, message: str, labels: Sequence = ()):
        super().__init__(message)
        self.labels = tuple(labels)


class SanityCheckFailed(RuntimeError):
    pass


def _mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True, eq=False)
class LevelContext:
    level: int
    N: int
    F: BitSeries
    G: BitSeries | None
    D: BitSeries | None
    primes: PrimeSet
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ell(self) -> int:
        return self.level

    @property
    def max_prime(self) -> int:
        return max(self.primes.primes)

    def cached(self, key: Hashable, build: Callable):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def theta(self, prec: int) -> BitSeries:
        if prec > self.N:
            raise InsufficientPrecision(f"{prec} coefficients requested, context has N = {self.N}")
        return truncate(self.F, prec)

    def g_series(self, prec: int) -> BitSeries:
        return truncate(compose_xk(self.theta(-(-prec // self.level)), self.level), prec)


def build_context(level: int, N: int, check: bool = True, F: BitSeries | None = None) -> LevelContext:
    """``F``, ``G = F(x^l)`` and ``D = pr(F)`` to ``N`` coefficients.

    A precomputed ``F`` (e.g. from the cache) may be supplied; the level-3
    identity ``G = D^3`` is then checked eagerly unless ``check`` is off.
    """
    if N < 64:
        raise ValueError("base precision must be at least 64")
    primes = PrimeSet.for_level(level)
    if F is None:
        F = theta_F(N)
    elif F.prec < N:
        raise InsufficientPrecision(f"supplied F has {F.prec} < {N} coefficients")
    else:
        F = truncate(F, N)
    if level == 1:
        return LevelContext(1, N, F, None, None, primes)
    G = truncate(compose_xk(F, level), N)
    D = drop_multiples(F, level)
    if check and level == 3 and not agree_up_to(power(D, 3), G, N):
        raise SanityCheckFailed("G = D^3 fails: the theta series or the kernel is broken")
    return LevelContext(level, N, F, G, D, primes)


def chunk_prec(ctx: LevelContext, cutoff: int) -> int:
    """Coefficients kept per chunk series; raises if the context is too short."""
    prec = 2 * ctx.max_prime * (cutoff + 1)
    if prec > ctx.N:
        raise InsufficientPrecision(
            f"chunk with cutoff {cutoff} needs N >= {prec}, context has {ctx.N}"
        )
    return prec


@dataclass(eq=False)
class SpaceChunk:
    """Labelled generators with distinct-or-echelon-certified leading terms."""

    tag: str
    level: int
    labels: tuple
    cutoff: int
    series: tuple[BitSeries, ...]
    leading: tuple[int, ...]
    greedy: bool
    _spans: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (len(self.labels) == len(self.series) == len(self.leading)):
            raise ValueError("labels, series and leading degrees differ in length")
        for lab, f, lead in zip(self.labels, self.series, self.leading):
            if f.valuation() != lead:
                raise SpaceError(f"generator {lab} leads with x^{f.valuation()}, expected x^{lead}")
        if self.greedy and len(set(self.leading)) != len(self.leading):
            raise SpaceError(f"{self.tag} chunk has colliding leading degrees")
        if not self.greedy and self.series:
            # independence certified by the echelon form
            self._span(self.prec)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._by_lead = {lead: i for i, lead in enumerate(self.leading)}

    @property
    def prec(self) -> int:
        return min((f.prec for f in self.series), default=self.cutoff + 1)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self._index[label]

    def _span(self, n: int) -> SpanBasis:
        if n not in self._spans:
            span = SpanBasis()
            mask = _mask(n)
            for lab, f in zip(self.labels, self.series):
                if not span.add(f.bits & mask):
                    raise SpaceError(f"{self.tag} generator {lab} is dependent below x^{n}")
            self._spans[n] = span
        return self._spans[n]

    def _check_prec(self, f: BitSeries) -> int:
        if f.prec < self.cutoff + 1:
            raise InsufficientPrecision(
                f"need {self.cutoff + 1} coefficients to decompose in the {self.tag} chunk, got {f.prec}"
            )
        return min(f.prec, self.prec)

    def coordinates(self, f: BitSeries) -> int:
        """Bit vector over ``labels`` with ``f = sum`` of the selected generators."""
        n = self._check_prec(f)
        mask = _mask(n)
        r = f.bits & mask
        if self.greedy:
            coords = 0
            while r:
                v = (r & -r).bit_length() - 1
                i = self._by_lead.get(v)
                if i is None:
                    raise NotInSpan(f"residual x^{v} has no {self.tag} generator", v)
                r ^= self.series[i].bits & mask
                coords |= 1 << i
            return coords
        res, combo = self._span(n).reduce(r)
        if res:
            v = (res & -res).bit_length() - 1
            raise NotInSpan(f"residual with valuation {v} outside the {self.tag} chunk", v)
        return combo

    def decompose(self, f: BitSeries) -> dict:
        """Support map ``label -> 1`` of the coordinates."""
        c = self.coordinates(f)
        return {lab: 1 for i, lab in enumerate(self.labels) if (c >> i) & 1}

    def contains(self, f: BitSeries) -> bool:
        try:
            self.coordinates(f)
        except NotInSpan:
            return False
        return True

    def combine(self, coords: int) -> BitSeries:
        out = BitSeries.zero(self.prec)
        for i, f in enumerate(self.series):
            if (coords >> i) & 1:
                out = out + f
        return out

    def sub(self, tag: str, keep: Callable[[object], bool]) -> SpaceChunk:
        idx = [i for i, lab in enumerate(self.labels) if keep(lab)]
        return SpaceChunk(
            tag,
            self.level,
            tuple(self.labels[i] for i in idx),
            self.cutoff,
            tuple(self.series[i] for i in idx),
            tuple(self.leading[i] for i in idx),
            self.greedy,
        )


def _powers(base: BitSeries, exponents: Iterable[int], prec: int) -> dict[int, BitSeries]:
    """``base^k`` for ascending ``k`` by repeated multiplication (exact below ``prec``)."""
    out = {}
    cur, k0 = None, 0
    for k in sorted(set(exponents)):
        if cur is None:
            cur = truncate(power(base, k), prec)
        else:
            cur = truncate(mul(cur, truncate(power(base, k - k0), prec)), prec)
        out[k] = cur
        k0 = k
    return out


def v_chunk(ctx: LevelContext, K: int, prec: int | None = None) -> SpaceChunk:
    """``F^k``, ``k`` odd, ``k <= K``."""
    prec = chunk_prec(ctx, K) if prec is None else prec

    def build():
        ks = list(range(1, K + 1, 2))
        pw = _powers(ctx.theta(prec), ks, prec)
        return SpaceChunk("V", ctx.level, tuple(ks), K, tuple(pw[k] for k in ks), tuple(ks), True)

    return ctx.cached(("V", K, prec), build)


def n1_chunk(ctx: LevelContext, K: int, prec: int | None = None) -> SpaceChunk:
    """``G^k``, ``k`` odd, leading exponent ``l k <= K``."""
    _need_level(ctx)
    prec = chunk_prec(ctx, K) if prec is None else prec
    ell = ctx.level

    def build():
        ks = list(range(1, K // ell + 1, 2))
        pw = _powers(ctx.g_series(prec), ks, prec)
        return SpaceChunk("N1", ell, tuple(ks), K, tuple(pw[k] for k in ks), tuple(ell * k for k in ks), True)

    return ctx.cached(("N1", K, prec), build)


def _need_level(ctx: LevelContext) -> None:
    if ctx.level == 1:
        raise ValueError("this space is only defined at levels 3 and 5")


def _module_labels(ell: int, K: int, top: int) -> list[tuple[int, int]]:
    labels = [(i, j) for j in range(K // ell + 1) for i in range(top) if (i + j) % 2 and i + ell * j <= K]
    return sorted(labels, key=lambda ij: (ij[0] + ell * ij[1], ij))


def _fg_products(ctx: LevelContext, labels: Sequence[tuple[int, int]], prec: int) -> dict:
    F = ctx.theta(prec)
    G = ctx.g_series(prec)
    fpow = _powers(F, {i for i, _ in labels} | {0}, prec) if labels else {}
    gpow = _powers(G, {j for _, j in labels} | {0}, prec) if labels else {}
    out = {}
    for i, j in labels:
        out[(i, j)] = truncate(mul(fpow[i], gpow[j]), prec)
    return out


def module_chunk(ctx: LevelContext, K: int, prec: int | None = None, tag: str = "Modd") -> SpaceChunk:
    """Translates ``F^i G^j`` of the module basis with ``i + l j <= K``."""
    _need_level(ctx)
    prec = chunk_prec(ctx, K) if prec is None else prec
    ell = ctx.level
    top = MODULE_TOP[ell] - (1 if tag == "N2" else 0)

    def build():
        labels = _module_labels(ell, K, top)
        prods = _fg_products(ctx, labels, prec)
        lead = tuple(i + ell * j for i, j in labels)
        greedy = len(set(lead)) == len(lead)
        return SpaceChunk(tag, ell, tuple(labels), K, tuple(prods[l] for l in labels), lead, greedy)

    return ctx.cached((tag, K, prec), build)


def n2_chunk(ctx: LevelContext, K: int, prec: int | None = None) -> SpaceChunk:
    """The module-basis translates with zero trace."""
    return module_chunk(ctx, K, prec, tag="N2")


def w_chunk(ctx: LevelContext, K: int, prec: int | None = None) -> SpaceChunk:
    """Level 3: ``D^k``, ``k = 1, 5 mod 6``.  Level 5: ``D_k``, ``k`` prime to 10."""
    _need_level(ctx)
    prec = chunk_prec(ctx, K) if prec is None else prec
    ell = ctx.level

    def build():
        if ell == 3:
            ks = [k for k in range(1, K + 1) if k % 6 in (1, 5)]
            D = drop_multiples(ctx.theta(prec), 3)
            pw = _powers(D, ks, prec)
            series = [pw[k] for k in ks]
        else:
            ks = [k for k in range(1, K + 1, 2) if k % 5]
            # D^8 / G loses val(G) = 5 coefficients
            wide = prec + 8
            F = truncate(ctx.F, wide) if ctx.N >= wide else theta_F(wide)
            D = drop_multiples(F, 5)
            G = truncate(compose_xk(truncate(F, -(-wide // 5)), 5), wide)
            base = {
                1: D,
                3: laurent_div(power(D, 8), G),
                7: mul(power(D, 2), G),
                9: mul(power(D, 4), G),
            }
            base = {r: truncate(f, prec) for r, f in base.items()}
            G2 = truncate(power(G, 2), prec)
            series = []
            for k in ks:
                f = base[k % 10]
                for _ in range(k // 10):
                    f = truncate(mul(f, G2), prec)
                series.append(f)
        return SpaceChunk("W", ell, tuple(ks), K, tuple(series), tuple(ks), True)

    return ctx.cached(("W", K, prec), build)


def operator_matrix(chunk: SpaceChunk, p: int) -> tuple[BitMatrix, list]:
    """Matrix of ``T_p`` on the chunk (columns = image coordinates).

    Returns ``(matrix, overflow)``; overflowing generators (image not in the
    chunk span) get a zero column and are listed by label.
    """
    cols, overflow = [], []
    for lab, f in zip(chunk.labels, chunk.series):
        try:
            cols.append(chunk.coordinates(apply_Tp(f, p)))
        except NotInSpan:
            cols.append(0)
            overflow.append(lab)
    return BitMatrix.from_columns(len(chunk), cols), overflow


def hecke_module(chunk: SpaceChunk, primes: Iterable[int]) -> HeckeModule:
    """The ``T_p`` as matrices on a Hecke-stable chunk; raises on overflow."""
    mats = {}
    for p in primes:
        m, overflow = operator_matrix(chunk, p)
        if overflow:
            raise ChunkOverflow(f"T_{p} leaves the {chunk.tag} chunk on {overflow[:5]}", overflow)
        mats[p] = m
    return HeckeModule(mats)


@dataclass(eq=False)
class ClosedChunk:
    """Hecke closure of a set of generators inside an ambient labelled chunk.

    ``basis`` holds ambient coordinate vectors; the module acts on
    coordinates with respect to ``basis``.
    """

    tag: str
    ambient: SpaceChunk
    generator_labels: tuple
    generator_coords: tuple[int, ...]
    basis: tuple[int, ...]
    module: HeckeModule
    _span: SpanBasis = field(repr=False, default=None)

    def __post_init__(self):
        if self._span is None:
            span = SpanBasis()
            for v in self.basis:
                span.add(v)
            self._span = span

    @property
    def dim(self) -> int:
        return len(self.basis)

    def local(self, ambient_vec: int) -> int:
        res, combo = self._span.reduce(ambient_vec)
        if res:
            raise NotInSpan("vector outside the closed chunk")
        return combo

    def generator_vectors(self) -> list[int]:
        return [self.local(v) for v in self.generator_coords]

    def series_of(self, local_vec: int) -> BitSeries:
        amb = 0
        for i, v in enumerate(self.basis):
            if (local_vec >> i) & 1:
                amb ^= v
        return self.ambient.combine(amb)


def hecke_closure(
    ambient: SpaceChunk,
    generators: Sequence[tuple[object, BitSeries]],
    primes: Sequence[int],
    tag: str,
    extra_primes: Sequence[int] = (),
) -> ClosedChunk:
    """Smallest subspace containing the generators and stable under ``T_p``, ``p`` in ``primes``.

    Images of ambient generators are decomposed once; those leaving the
    ambient span are marked as overflow and only matter if the closure
    reaches them, in which case :class:`ChunkOverflow` is raised.  Matrices
    for ``extra_primes`` are built on the same closure when it is stable
    under them too.
    """
    images: dict[int, list[int | None]] = {}
    for p in list(primes) + list(extra_primes):
        row = []
        for f in ambient.series:
            try:
                row.append(ambient.coordinates(apply_Tp(f, p)))
            except NotInSpan:
                row.append(None)
        images[p] = row

    def act(p: int, v: int) -> int:
        out = 0
        while v:
            low = v & -v
            i = low.bit_length() - 1
            img = images[p][i]
            if img is None:
                raise ChunkOverflow(
                    f"closure needs T_{p} of {ambient.labels[i]} beyond the ambient cutoff {ambient.cutoff}",
                    [ambient.labels[i]],
                )
            out ^= img
            v ^= low
        return out

    gen_labels = tuple(lab for lab, _ in generators)
    gen_coords = tuple(ambient.coordinates(f) for _, f in generators)
    span = SpanBasis()
    basis: list[int] = []
    queue = list(gen_coords)
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        if span.add(v):
            basis.append(v)
            for p in primes:
                queue.append(act(p, v))
    mats = {}
    for p in list(primes) + list(extra_primes):
        cols = []
        for v in basis:
            res, combo = span.reduce(act(p, v))
            if res:
                raise ChunkOverflow(f"T_{p} leaves the closure")
            cols.append(combo)
        mats[p] = BitMatrix.from_columns(len(basis), cols)
    module = HeckeModule(mats)
    return ClosedChunk(tag, ambient, gen_labels, gen_coords, tuple(basis), module, span)


def modd_generators(ctx: LevelContext, K: int, prec: int) -> list[tuple[tuple[int, int], BitSeries]]:
    """``F^i G^j`` with ``i + j`` odd and ``i + l j <= K`` (every ``i``, not only reduced ones)."""
    ell = ctx.level
    labels = sorted(
        ((i, j) for j in range(K // ell + 1) for i in range(K - ell * j + 1) if (i + j) % 2),
        key=lambda ij: (ij[0] + ell * ij[1], ij),
    )
    prods = _fg_products(ctx, labels, prec)
    return [(lab, prods[lab]) for lab in labels]


def modd_chunk(
    ctx: LevelContext,
    K: int,
    primes: Sequence[int] | None = None,
    extra_primes: Sequence[int] = (),
    ambient_cutoff: int | None = None,
    max_ambient: int | None = None,
) -> ClosedChunk:
    """Hecke closure of all ``F^i G^j`` with leading exponent ``<= K``.

    These generators are not reduced to the module basis: ``F^4 G`` for
    example needs ``G^5`` once rewritten.  Coordinates live in a module-basis
    chunk of cutoff ``(l + 2) K``, doubled until the closure fits.
    """
    _need_level(ctx)
    primes = tuple(ctx.primes.primes if primes is None else primes)
    ell = ctx.level
    amb = (ell + 2) * K if ambient_cutoff is None else ambient_cutoff
    limit = max_ambient if max_ambient is not None else (ctx.N // (2 * ctx.max_prime)) - 1
    key = ("ModdClosure", K, primes, tuple(extra_primes))
    if key in ctx._cache:
        return ctx._cache[key]
    top_prime = max(primes + tuple(extra_primes))
    while True:
        # images under T_p keep prec / p coefficients, which must still separate the ambient labels
        prec = 2 * top_prime * (amb + 1)
        if prec > ctx.N:
            raise InsufficientPrecision(f"closure with ambient cutoff {amb} needs N >= {prec}")
        ambient = module_chunk(ctx, amb, prec=prec)
        gens = modd_generators(ctx, K, ambient.prec)
        try:
            out = hecke_closure(ambient, gens, primes, "Modd", extra_primes)
        except (ChunkOverflow, NotInSpan) as exc:
            if 2 * amb > limit:
                raise ChunkOverflow(f"closure of cutoff {K} does not fit an ambient of cutoff {amb}: {exc}") from exc
            amb *= 2
            continue
        ctx._cache[key] = out
        return out


def zg2_decompose(ctx: LevelContext, f: BitSeries, cutoff: int | None = None) -> dict[int, tuple[int, ...]]:
    """Coordinates of ``f`` over ``Z/2[G^2]`` on the module basis.

    Returns ``{i: (m, ...)}`` meaning ``f = sum_i (sum_m G^{2m}) b_i`` with
    ``b_i = F^i G^{(i+1) mod 2}``; verified by re-expansion below ``f.prec``.
    Only translates leading below ``cutoff`` (default ``f.prec // 2``) are
    used: there are more labels than odd coefficients below ``f.prec``, so
    uniqueness needs the margin, and the chunk certifies it by rank.
    """
    cutoff = f.prec // 2 - 1 if cutoff is None else cutoff
    chunk = module_chunk(ctx, cutoff, prec=f.prec)
    coords = chunk.coordinates(f)
    out: dict[int, list[int]] = {}
    for k, (i, j) in enumerate(chunk.labels):
        if (coords >> k) & 1:
            out.setdefault(i, []).append(j // 2)
    if not agree_up_to(chunk.combine(coords), f):
        raise NotInSpan("re-expansion does not reproduce the input")
    return {i: tuple(ms) for i, ms in sorted(out.items())}


def trace(ctx: LevelContext, f: BitSeries) -> BitSeries:
    """``Z/2[G^2]``-linear trace: only ``F^{top-1} G^{2m}`` survives, as ``G^{2m+1}``."""
    top = MODULE_TOP[ctx.level] - 1
    coords = zg2_decompose(ctx, f)
    G = ctx.g_series(f.prec)
    out = BitSeries.zero(f.prec)
    for m in coords.get(top, ()):
        out = out + truncate(power(G, 2 * m + 1), f.prec)
    return out


def conjugate_trace(ctx: LevelContext, f: BitSeries) -> BitSeries:
    """``f(x^{l^2}) + keep_l(f)``; agrees with the trace on polynomials in ``F``."""
    ell = ctx.level
    return compose_xk(f, ell * ell) + keep_multiples(f, ell)


def filtration_check(ctx: LevelContext, f: BitSeries) -> str:
    """``"N1"``, ``"N2"`` (in N2 but not N1) or ``"outside"`` (nonzero trace)."""
    if not trace(ctx, f).is_zero():
        return "outside"
    return "N1" if n1_chunk(ctx, f.prec - 1, prec=f.prec).contains(f) else "N2"


def pr_to_w(ctx: LevelContext, f: BitSeries) -> BitSeries:
    """``pr(f)`` for ``f`` in N2, checked to decompose in W and to vanish exactly on N1."""
    pos = filtration_check(ctx, f)
    if pos == "outside":
        raise NotInSpan("pr_to_w needs an element of N2 (trace is nonzero)")
    r = drop_multiples(f, ctx.level)
    if (pos == "N1") != r.is_zero():
        raise KernelMismatch(f"element classified {pos} but pr(f) {'=' if r.is_zero() else '!='} 0")
    if not r.is_zero():
        w_chunk(ctx, f.prec - 1, prec=f.prec).coordinates(r)
    return r


def kernel_subchunk(chunk: SpaceChunk, p: int, tag: str | None = None) -> SpaceChunk:
    """Echelon basis of the kernel of ``T_p`` on the chunk span."""
    if tag is None:
        tag = "Vstar0" if chunk.level == 5 else "V0star"
    m, overflow = operator_matrix(chunk, p)
    if overflow:
        raise ChunkOverflow(f"T_{p} leaves the {chunk.tag} chunk", overflow)
    ker = kernel_basis(m)
    rows = echelonize(BitMatrix(len(ker), len(chunk), ker)).reduced.rows if ker else ()
    labels, series, lead = [], [], []
    for r in rows:
        if not r:
            continue
        support = tuple(chunk.labels[i] for i in range(len(chunk)) if (r >> i) & 1)
        f = chunk.combine(r)
        labels.append(support)
        series.append(f)
        lead.append(f.valuation())
    return SpaceChunk(tag, chunk.level, tuple(labels), chunk.cutoff, tuple(series), tuple(lead), True)


def embedding_check(ctx: LevelContext, kchunk: SpaceChunk) -> Finding:
    """Kernel elements sit in N2, map into W under ``pr``, and ``pr`` commutes with ``T_p``."""
    _need_level(ctx)
    details = {"elements": len(kchunk), "primes": list(ctx.primes.primes)}
    F = ctx.theta(kchunk.prec)
    if not agree_up_to(drop_multiples(F, ctx.level), truncate(ctx.D, F.prec)):
        return Finding(False, details, {"map": "F does not go to D"})
    for lab, f in zip(kchunk.labels, kchunk.series):
        try:
            pos = filtration_check(ctx, f)
            if pos == "outside":
                return Finding(False, details, {"element": list(lab), "reason": "nonzero trace"})
            w = pr_to_w(ctx, f)
        except SpaceError as exc:
            return Finding(False, details, {"element": list(lab), "reason": str(exc)})
        for p in ctx.primes:
            lhs = drop_multiples(apply_Tp(f, p), ctx.level)
            rhs = apply_Tp(w, p)
            if not agree_up_to(lhs, rhs):
                return Finding(False, details, {"element": list(lab), "prime": p, "reason": "pr o T_p != T_p o pr"})
    return Finding(True, details)


def stabilises(level: int, p: int) -> bool:
    """Whether ``T_p`` preserves each half of the W splitting."""
    if level == 3:
        return p % 6 == 1
    return p % 20 in (1, 3, 7, 9)


def _w_part(level: int, k: int) -> int:
    if level == 3:
        return 0 if k % 6 == 1 else 1
    return 0 if k % 20 in (1, 3, 7, 9) else 1


def split_w(chunk: SpaceChunk) -> tuple[SpaceChunk, SpaceChunk]:
    names = ("W1", "W5") if chunk.level == 3 else ("Wa", "Wb")
    a = chunk.sub(names[0], lambda k: _w_part(chunk.level, k) == 0)
    b = chunk.sub(names[1], lambda k: _w_part(chunk.level, k) == 1)
    return a, b


def crossing_check(chunk: SpaceChunk, p: int) -> Finding:
    """Each ``T_p`` image lies wholly in the half predicted by ``p``'s residue."""
    keep = stabilises(chunk.level, p)
    details = {"prime": p, "stabilises": keep, "generators": len(chunk)}
    for k, f in zip(chunk.labels, chunk.series):
        try:
            support = chunk.decompose(apply_Tp(f, p))
        except NotInSpan as exc:
            return Finding(False, details, {"label": k, "reason": str(exc)})
        want = _w_part(chunk.level, k) if keep else 1 - _w_part(chunk.level, k)
        bad = [j for j in support if _w_part(chunk.level, j) != want]
        if bad:
            return Finding(False, details, {"label": k, "image_support": sorted(support), "wrong_part": bad})
    return Finding(True, details)


def preimage_check(small: SpaceChunk, big: SpaceChunk, p: int) -> Finding:
    """Every generator of ``small`` is ``T_p`` of something in the span of ``big``.

    ``big`` is the same kind of chunk with a larger cutoff, so each target
    is one of its own generators.
    """
    details = {"prime": p, "targets": len(small), "enlarged_cutoff": big.cutoff}
    m, overflow = operator_matrix(big, p)
    if overflow:
        return Finding(False, details, {"overflow": [str(x) for x in overflow[:5]]})
    for lab in small.labels:
        if solve(m, 1 << big.index(lab)) is None:
            return Finding(False, details, {"label": lab})
    return Finding(True, details)
