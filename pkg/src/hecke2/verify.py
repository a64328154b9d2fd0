"""The catalogue of verification checks.

Each check takes a :class:`Session` (the run configuration plus lazily
built contexts, chunks and modules) and returns a :class:`Finding`.
Checks that do not apply at a level are reported as skipped.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

from . import __version__
from .action import HeckeModule
from .cache import SeriesCache
from .fps2 import (
    BitSeries,
    InsufficientPrecision,
    agree_up_to,
    compose_xk,
    drop_multiples,
    laurent_div,
    mul,
    power,
    theta_F,
    truncate,
)
from .hecke import LEVEL_PRIMES, apply_Tp, apply_tseries, apply_U
from .report import FAIL, PASS, SKIPPED, Finding
from .spaces import (
    MODULE_TOP,
    LevelContext,
    build_context,
    chunk_prec,
    conjugate_trace,
    crossing_check,
    embedding_check,
    hecke_module,
    kernel_subchunk,
    module_chunk,
    modd_chunk,
    n1_chunk,
    n2_chunk,
    operator_matrix,
    preimage_check,
    trace,
    v_chunk,
    w_chunk,
)
from .theta_algebra import (
    EXPECTED_FORMS,
    IdealChunk,
    annihilator,
    check_ideal_structure as ideal_structure_of,
    epsilon,
    epsilon_squared_kills,
    linear_form,
    module_nilpotency,
    solve_lambda,
    solve_u,
    witness_generator,
)
from .tseries import TSeries

__all__ = ["RunConfig", "ConfigError", "Session", "CHECKS", "MADIC_CHECKS", "run_checks", "build_report"]

KERNEL_PREC = 4096
# level-1 table: p -> primes in the leading monomial of u
LEVEL1_TABLE = {11: (3,), 13: (5,), 7: (3, 5)}
# V viewed over Z/2[[t_a, t_b]] at levels 3 and 5: p -> leading monomial
V_PAIR = {3: ((11, 13), {5: (13,), 7: (11, 13)}), 5: ((11, 13), {3: (11,), 7: (11, 13)})}
EXTRA_PRIMES = (17, 19, 23)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    level: int = 3
    prec: int | None = None
    mdeg: int = 3
    chunk: int = 63
    checks: tuple[str, ...] | None = None
    cache_dir: str | None = None
    format: str = "text"
    deep: bool = False
    jobs: int = 1
    timings: bool = False

    @property
    def max_prime(self) -> int:
        return max(LEVEL_PRIMES[self.level])

    @property
    def kernel_prec(self) -> int:
        return self.prec if self.prec is not None else KERNEL_PREC

    @property
    def madic_prec(self) -> int:
        if self.prec is not None:
            return self.prec
        n = self.chunk * self.max_prime ** self.mdeg
        return -(-n // 64) * 64

    def selected(self) -> list[str]:
        return sorted(self.checks) if self.checks else sorted(CHECKS)

    def validate(self) -> None:
        if self.level not in LEVEL_PRIMES:
            raise ConfigError(f"level must be 1, 3 or 5, got {self.level}")
        if self.chunk < 1:
            raise ConfigError("chunk cutoff must be positive")
        if self.mdeg < 1:
            raise ConfigError("m-adic degree must be at least 1")
        if self.mdeg > 3 and not self.deep:
            raise ConfigError("mdeg > 3 needs --deep (precision grows as 13^d)")
        if self.format not in ("text", "json"):
            raise ConfigError(f"unknown format {self.format}")
        if self.prec is not None and self.prec < 64:
            raise ConfigError("precision must be at least 64")
        if self.chunk > self.madic_prec:
            raise ConfigError(f"chunk cutoff {self.chunk} exceeds the precision {self.madic_prec}")
        unknown = set(self.checks or ()) - set(CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(sorted(unknown))}")
        need = self.chunk * self.max_prime ** self.mdeg
        if any(c in MADIC_CHECKS for c in self.selected()) and self.madic_prec < need:
            raise ConfigError(
                f"m-adic checks need N >= K * max(S)^d = {need}, got {self.madic_prec}"
            )

    def echo(self) -> dict:
        out = asdict(self)
        out["checks"] = self.selected()
        out["kernel_prec"] = self.kernel_prec
        out["madic_prec"] = self.madic_prec
        return out


@dataclass
class Session:
    """Lazily built shared state for one run."""

    config: RunConfig
    cache: SeriesCache | None = None
    theta_override: BitSeries | None = None
    _memo: dict = field(default_factory=dict)

    def memo(self, key, build: Callable):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    def theta(self) -> BitSeries:
        n = max(self.config.kernel_prec, self.config.madic_prec)

        def build():
            if self.theta_override is not None:
                return self.theta_override
            if self.cache is not None:
                return self.cache.get("theta_F", n, lambda: theta_F(n))
            return theta_F(n)

        return self.memo("theta", build)

    def context(self, N: int, level: int | None = None) -> LevelContext:
        level = self.config.level if level is None else level
        # the eager G = D^3 check is left to the kernel_identities check so a
        # bad theta series shows up as a failed check, not a crash
        return self.memo(("ctx", level, N), lambda: build_context(level, N, check=False, F=self.theta()))

    @property
    def kctx(self) -> LevelContext:
        return self.context(self.config.kernel_prec)

    @property
    def mctx(self) -> LevelContext:
        return self.context(self.config.madic_prec)

    @property
    def S(self) -> tuple[int, ...]:
        return LEVEL_PRIMES[self.config.level]

    def v_module(self) -> HeckeModule:
        return self.memo("Vmod", lambda: hecke_module(v_chunk(self.mctx, self.config.chunk), self.S))

    def w_module(self) -> HeckeModule:
        return self.memo("Wmod", lambda: hecke_module(w_chunk(self.mctx, self.config.chunk), self.S))

    def modd(self):
        return modd_chunk(self.mctx, self.config.chunk)

    def kernel_chunk(self):
        p = 5 if self.config.level == 5 else 3
        return self.memo("ker", lambda: kernel_subchunk(v_chunk(self.mctx, self.config.chunk), p))

    def ideal_structure(self):
        def build():
            mo = self.modd()
            return ideal_structure_of(
                self.config.level,
                self.config.mdeg,
                self.v_module(),
                self.w_module(),
                mo.module,
                mo.generator_vectors(),
                hecke_module(self.kernel_chunk(), self.S),
                {"K": self.config.chunk, "N": self.config.madic_prec},
            )

        return self.memo("ideal", build)


def _levels(*levels):
    def deco(fn):
        fn.levels = levels
        return fn

    return deco


@_levels(3, 5)
def check_kernel_identities(s: Session) -> Finding:
    ctx = s.kctx
    N = ctx.N
    F, G, D = ctx.F, ctx.G, ctx.D
    parts = {}
    e = 4 if ctx.level == 3 else 6
    lhs = power(F + G, e)
    parts[f"(F+G)^{e}=FG"] = _agree(lhs, mul(F, G), N)
    if ctx.level == 3:
        parts["G=D^3"] = _agree(power(D, 3), G, N)
    else:
        n = N // 2
        lhs = laurent_div(power(D, 8), G)
        rhs = drop_multiples(mul(F, power(F + G, 2)), 5)
        parts["D^8/G=pr(F(F+G)^2)"] = _agree(lhs, rhs, n)
    return Finding.combine(parts)


def _agree(a: BitSeries, b: BitSeries, n: int) -> Finding:
    n = min(n, a.prec, b.prec)
    diff = (a.bits ^ b.bits) & ((1 << n) - 1)
    if diff:
        v = (diff & -diff).bit_length() - 1
        return Finding(False, {"compared": n}, {"first_difference": v})
    return Finding(True, {"compared": n})


TRACE_PREC = 512


@_levels(3, 5)
def check_trace_table(s: Session) -> Finding:
    ctx = s.kctx
    ell = ctx.level
    top = MODULE_TOP[ell]
    P = TRACE_PREC
    F, G = ctx.theta(P), ctx.g_series(P)
    G2 = truncate(power(G, 2), P)
    table = {}
    for i in range(top):
        b = truncate(mul(power(F, i), power(G, (i + 1) % 2)), P)
        for m in range(3):
            f = truncate(mul(b, power(G2, m)), P) if m else b
            want = truncate(power(G, 2 * m + 1), P) if i == top - 1 else BitSeries.zero(P)
            got = trace(ctx, f)
            name = f"F^{i}G^{(i + 1) % 2 + 2 * m}"
            table[name] = _agree(got, want, P)
    return Finding.combine(table)


@_levels(3, 5)
def check_conjugate_sum(s: Session) -> Finding:
    ctx = s.kctx
    P = TRACE_PREC
    F = ctx.theta(P)
    parts = {}
    for k in range(1, 26, 2):
        f = truncate(power(F, k), P)
        parts[f"F^{k}"] = _agree(trace(ctx, f), conjugate_trace(ctx, f), P)
    return Finding.combine(parts)


COMPOSITE_PREC = 1024


@_levels(3, 5)
def check_composite_isomorphism(s: Session) -> Finding:
    ctx = s.kctx
    ell = ctx.level
    P = COMPOSITE_PREC
    F = ctx.theta(P)
    parts = {}
    for k in range(1, 50, 2):
        f = truncate(power(F, k), P)
        lhs = apply_U(trace(ctx, f), ell)
        rhs = apply_Tp(f, ell)
        parts[f"F^{k}"] = _agree(lhs, rhs, min(lhs.prec, rhs.prec))
    out = Finding.combine(parts)
    out.details = {"compared": min(d["compared"] for d in out.details.values()), "k_max": 49}
    return out


@_levels(3, 5)
def check_filtration_stability(s: Session) -> Finding:
    """``T_p`` keeps N2 inside the trace kernel and N1 inside ``Z/2[G]``.

    Images are read off in module-basis coordinates of the M(odd) closure,
    where the trace is the ``F^{top-1}`` component.
    """
    ctx = s.mctx
    K = s.config.chunk
    mo = s.modd()
    amb = mo.ambient
    top = MODULE_TOP[ctx.level] - 1
    top_mask = sum(1 << k for k, (i, _) in enumerate(amb.labels) if i == top)
    n1_mask = sum(1 << k for k, (i, _) in enumerate(amb.labels) if i == 0)

    def image(lab, p):
        w = mo.module.act(p, mo.local(1 << amb.index(lab)))
        out = 0
        for k, b in enumerate(mo.basis):
            if (w >> k) & 1:
                out ^= b
        return out

    n2 = n2_chunk(ctx, K)
    n1 = n1_chunk(ctx, K)
    for lab in n2.labels:
        for p in s.S:
            if image(lab, p) & top_mask:
                return Finding(False, {}, {"generator": list(lab), "prime": p, "reason": "trace of the image is nonzero"})
    for k in n1.labels:
        for p in s.S:
            if image((0, k), p) & ~n1_mask:
                return Finding(False, {}, {"N1_generator": k, "prime": p})
    # series-level spot check: the trace vanishes on N2 generators themselves
    P = TRACE_PREC
    for lab, f in list(zip(n2.labels, n2.series))[:8]:
        if not trace(ctx, truncate(f, P)).is_zero():
            return Finding(False, {}, {"generator": list(lab), "reason": "N2 generator has nonzero trace"})
    return Finding(True, {"N2_generators": len(n2), "N1_generators": len(n1), "primes": list(s.S)})


@_levels(3, 5)
def check_w_splitting(s: Session) -> Finding:
    ctx = s.mctx
    W = w_chunk(ctx, s.config.chunk)
    parts = {f"T{p}": crossing_check(W, p) for p in s.S}
    idx = {k: f for k, f in zip(W.labels, W.series)}
    if ctx.level == 3:
        d5 = idx[5]
        t5 = apply_Tp(d5, 5)
        parts["T5(D^5)=D"] = Finding(W.decompose(t5) == {1: 1}, {"support": sorted(W.decompose(t5))})
        parts["T11(D^5)=0"] = Finding(apply_Tp(d5, 11).is_zero())
    else:
        d11 = idx[11]
        parts["T13(D_11)=0"] = Finding(apply_Tp(d11, 13).is_zero())
        img = apply_Tp(d11, 11)
        parts["T11(D_11)=x+..."] = Finding(img.valuation() == 1, {"valuation": img.valuation()})
    return Finding.combine(parts)


@_levels(3, 5)
def check_embedding(s: Session) -> Finding:
    ker = s.kernel_chunk()
    out = embedding_check(s.mctx, ker)
    out.details["kernel_leading"] = list(ker.leading)
    return out


@_levels(1, 3, 5)
def check_nilpotence_sweep(s: Session) -> Finding:
    K = s.config.chunk
    if s.config.level == 1:
        mod = s.v_module()
        gens = [1 << i for i in range(mod.dim)]
        labels = list(v_chunk(s.mctx, K).labels)
    else:
        mo = s.modd()
        mod = mo.module
        gens = mo.generator_vectors()
        labels = [list(l) for l in mo.generator_labels]
    worst = {}
    for p in s.S:
        e_max = 0
        for lab, g in zip(labels, gens):
            e = module_nilpotency(mod, g, p)
            if e > 2 * K:
                return Finding(False, {}, {"generator": lab, "prime": p, "exponent": e})
            e_max = max(e_max, e)
        worst[str(p)] = e_max
    return Finding(True, {"generators": len(gens), "max_exponent": worst, "bound": 2 * K})


def tp_matrix(s: Session, builder, p: int):
    """Matrix of ``T_p`` on a chunk kept to enough coefficients for ``p``."""
    K = s.config.chunk
    prec = max(chunk_prec(s.mctx, K), p * (K + 1))
    m, overflow = operator_matrix(builder(s.mctx, K, prec=prec), p)
    if overflow:
        raise InsufficientPrecision(f"T_{p} leaves the chunk at {overflow[:3]}")
    return m


def _leading_is(u: TSeries, primes: tuple[int, ...]) -> bool:
    lf = u.leading_form()
    want = TSeries.from_exponents(u.primes, u.degree, {p: 1 for p in primes})
    return lf == want


def _series_recheck(s: Session, chunk_builder, module: HeckeModule, u: TSeries, p: int) -> Finding:
    """Re-verify ``T_p f = u f`` on series for generators with ``m^d f = 0``."""
    d = u.degree
    K = s.config.chunk
    prec = (K + 1) * s.config.max_prime ** max(d - 1, 1) * 2
    if prec > s.mctx.N:
        return Finding(True, {"rechecked": 0, "reason": "precision below the recheck requirement"})
    chunk = chunk_builder(prec)
    count = 0
    for i, f in enumerate(chunk.series):
        if module.depth(1 << i) > d:
            continue
        lhs = apply_Tp(f, p)
        rhs = apply_tseries(f, u)
        n = min(lhs.prec, rhs.prec)
        if n < K + 1 or not agree_up_to(lhs, rhs, n):
            return Finding(False, {}, {"generator": chunk.labels[i], "prime": p})
        count += 1
    return Finding(True, {"rechecked": count})


@_levels(1, 3, 5)
def check_solve_u(s: Session) -> Finding:
    d = s.config.mdeg
    ctx = s.mctx
    K = s.config.chunk
    parts = {}
    vmod = s.v_module()
    for p in s.S:
        # the solver's representative may differ from t_p by an annihilating element
        u = solve_u(vmod, vmod.mats[p], d)
        ok = vmod.annihilates(u + TSeries.var(p, s.S, d))
        parts[f"V:T{p}"] = Finding(ok, {"u": str(u)}, None if ok else {"u - t_p kills V": False})
    if s.config.level == 1:
        for p, lead in LEVEL1_TABLE.items():
            u = solve_u(vmod, tp_matrix(s, v_chunk, p), d)
            ok = _leading_is(u, lead)
            recheck = _series_recheck(s, lambda P: v_chunk(ctx, K, prec=P), vmod, u, p)
            parts[f"V:T{p}"] = Finding(ok and recheck.ok, {"u": str(u), "leading_form": str(u.leading_form()), **recheck.details},
                                       None if ok else {"expected_leading": lead})
        return Finding.combine(parts)

    pair, table = V_PAIR[s.config.level]
    sub = vmod.restrict(pair)
    for p, lead in table.items():
        u = solve_u(sub, vmod.mats[p], d)
        parts[f"V/{pair}:T{p}"] = Finding(_leading_is(u, lead), {"u": str(u), "leading_form": str(u.leading_form())})

    st = s.ideal_structure()
    wmod = s.w_module()
    mo = modd_chunk(ctx, K, extra_primes=EXTRA_PRIMES)
    total = st.IV + st.IW
    over_s = mo.module.restrict(s.S)
    for p in s.S:
        u = solve_u(over_s, mo.module.mats[p], d)
        ok = over_s.annihilates(u + TSeries.var(p, s.S, d))
        parts[f"Modd:T{p}"] = Finding(ok, {"u": str(u)}, None if ok else {"u - t_p kills M(odd)": False})
    for p in EXTRA_PRIMES:
        u_v = solve_u(vmod, tp_matrix(s, v_chunk, p), d)
        u_w = solve_u(wmod, tp_matrix(s, w_chunk, p), d)
        u_m = solve_u(over_s, mo.module.mats[p], d)
        consistent = total.contains(u_v + u_w)
        on_v = st.IV.contains(u_m + u_v)
        on_w = st.IW.contains(u_m + u_w)
        recheck = _series_recheck(s, lambda P: v_chunk(ctx, K, prec=P), vmod, u_v, p)
        parts[f"Modd:T{p}"] = Finding(
            consistent and on_v and on_w and recheck.ok,
            {"u": str(u_m), "u_V": str(u_v), "u_W": str(u_w), "V_recheck": recheck.details},
            None if consistent and on_v and on_w else {"uV-uW in I(V)+I(W)": consistent, "u-uV in I(V)": on_v, "u-uW in I(W)": on_w},
        )
    return Finding.combine(parts)


@_levels(3, 5)
def check_lambda_epsilon(s: Session) -> Finding:
    d = s.config.mdeg
    level = s.config.level
    exp = EXPECTED_FORMS[level]
    wmod = s.w_module()
    q, pair = exp["q"], exp["lambda"]
    lam_d, lam = solve_lambda(wmod, q, pair, d)
    eps = epsilon(q, lam, s.S, d)
    want_lam = linear_form(pair, d, pair)
    want_eps = linear_form(s.S, d, exp["A"])
    parts = {
        "lambda_leading": Finding(lam_d.leading_form() == want_lam, {"lambda": str(lam_d), "leading_form": str(lam_d.leading_form())}),
        "epsilon_leading": Finding(eps.leading_form() == want_eps, {"epsilon": str(eps), "leading_form": str(eps.leading_form())}),
        "epsilon^2_kills_W": Finding(epsilon_squared_kills(wmod, q, lam), {"exact_degree": lam.degree}),
    }
    D = truncate(s.mctx.D, 2 * s.config.max_prime ** 2 * 64)
    e2 = eps.square()
    lam2 = lam_d.square()
    qq = apply_Tp(apply_Tp(D, q), q)
    parts["epsilon^2(D)=0"] = Finding(apply_tseries(D, e2).is_zero())
    parts["lambda^2(D)=T_q^2(D)"] = Finding(agree_up_to(apply_tseries(D, lam2), qq, 64))
    return Finding.combine(parts)


@_levels(1, 3, 5)
def check_annihilator_forms(s: Session) -> Finding:
    level = s.config.level
    d = s.config.mdeg
    vmod = s.v_module()
    if level == 1:
        ann = annihilator(vmod, d)
        return Finding(ann.dim == 0, {"dim": ann.dim, "statement": "O acts faithfully on the V chunk"},
                       None if ann.dim == 0 else {"annihilator": ann.describe()})
    exp = EXPECTED_FORMS[level]
    wmod = s.w_module()
    IV2, IW2 = annihilator(vmod, 2), annihilator(wmod, 2)
    want_v = IdealChunk.from_elements(s.S, 2, [linear_form(s.S, 2, exp["A"]), linear_form(s.S, 2, exp["B"])])
    got_v = IdealChunk.from_elements(s.S, 2, IV2.order_part(1))
    c = linear_form(s.S, 2, exp["C"])
    pair = exp["lambda"]
    faithful = annihilator(wmod.restrict(pair), d)
    parts = {
        "I(V) linear forms": Finding(got_v.same_span(want_v), {"basis": IV2.describe()}),
        "I(W) contains C form": Finding(IW2.linear_forms_contain(c), {"basis": IW2.describe()}),
        f"W faithful over t{pair[0]},t{pair[1]}": Finding(faithful.dim == 0, {"dim": faithful.dim}),
        "C non-unit": _c_non_unit(s, exp["C"]),
    }
    return Finding.combine(parts)


def _c_non_unit(s: Session, c_primes: tuple[int, ...]) -> Finding:
    """``I(W)`` has an element ``t_c + v t_q``, ``v`` in ``m``, with the witness pair on W."""
    d = s.config.mdeg
    IW = annihilator(s.w_module(), d)
    elem = IW.element_with_linear_part(linear_form(s.S, d, c_primes))
    W = w_chunk(s.mctx, s.config.chunk)
    idx = dict(zip(W.labels, W.series))
    if s.config.level == 3:
        w, kill, move = idx[5], 11, 5
    else:
        w, kill, move = idx[11], 13, 11
    killed = apply_Tp(w, kill).is_zero()
    moved = not apply_Tp(w, move).is_zero()
    ok = elem is not None and killed and moved
    details = {"element": str(elem), f"T{kill} kills": killed, f"T{move} does not": moved}
    return Finding(ok, details, None if ok else details)


@_levels(3, 5)
def check_ideal_structure(s: Session) -> Finding:
    st = s.ideal_structure()
    out = Finding.combine(st.findings)
    out.details = {
        "A": str(st.A),
        "B": str(st.B),
        "C": str(st.C),
        "epsilon": str(st.eps),
        "I": st.I.describe(),
        "clauses": {k: f.ok for k, f in st.findings.items()},
    }
    return out


@_levels(1, 3, 5)
def check_surjectivity(s: Session) -> Finding:
    ctx = s.mctx
    K = s.config.chunk
    big_K = s.config.max_prime * K + 6
    p_v = 5 if s.config.level == 5 else 3
    parts = {f"T{p_v}(V)=V": preimage_check(v_chunk(ctx, K), v_chunk(ctx, big_K), p_v)}
    if s.config.level != 1:
        parts["T7(W)=W"] = preimage_check(w_chunk(ctx, K), w_chunk(ctx, big_K), 7)
    return Finding.combine(parts)


@_levels(3, 5)
def check_negative_control(s: Session) -> Finding:
    st = s.ideal_structure()
    mo = s.modd()
    t7 = TSeries.var(7, s.S, s.config.mdeg)
    bad = st.A + t7
    products = {"A'^2": bad * bad, "A'*C": bad * st.C, "B*C": st.B * st.C}
    caught = {n: not mo.module.annihilates(u) for n, u in products.items()}
    gen = None
    if caught["A'^2"]:
        idx = witness_generator(mo.module, products["A'^2"], mo.generator_vectors())
        gen = list(mo.generator_labels[idx]) if idx is not None else None
    perturbed = Finding(any(caught.values()), {"A'": str(bad), "detected": caught, "failing_generator": gen})
    # a theta series with one flipped coefficient must break the kernel identities
    F = s.kctx.F
    flip = 1 << (F.prec // 2 + 1)
    broken = BitSeries(F.bits ^ flip, F.prec)
    sess = Session(s.config, theta_override=broken)
    corrupted = check_kernel_identities(sess)
    theta = Finding(not corrupted.ok, {"flipped_exponent": F.prec // 2 + 1, "kernel_identities": corrupted.ok})
    return Finding.combine({"perturbed_A": perturbed, "corrupted_theta": theta})


CHECKS: dict[str, Callable[[Session], Finding]] = {
    "annihilator_forms": check_annihilator_forms,
    "composite_isomorphism": check_composite_isomorphism,
    "conjugate_sum": check_conjugate_sum,
    "embedding": check_embedding,
    "filtration_stability": check_filtration_stability,
    "ideal_structure": check_ideal_structure,
    "kernel_identities": check_kernel_identities,
    "lambda_epsilon": check_lambda_epsilon,
    "negative_control": check_negative_control,
    "nilpotence_sweep": check_nilpotence_sweep,
    "solve_u": check_solve_u,
    "surjectivity": check_surjectivity,
    "trace_table": check_trace_table,
    "w_splitting": check_w_splitting,
}

MADIC_CHECKS = frozenset(
    {"annihilator_forms", "ideal_structure", "lambda_epsilon", "negative_control", "solve_u"}
)


@dataclass
class CheckRecord:
    name: str
    status: str
    parameters: dict
    details: dict
    witness: dict | None
    wall_time: float | None
    precision_error: bool = False


def run_one(session: Session, name: str) -> CheckRecord:
    fn = CHECKS[name]
    cfg = session.config
    params = {"level": cfg.level, "K": cfg.chunk, "d": cfg.mdeg}
    params["N"] = cfg.madic_prec if name in MADIC_CHECKS else cfg.kernel_prec
    if cfg.level not in fn.levels:
        return CheckRecord(name, SKIPPED, params, {"reason": f"not applicable at level {cfg.level}"}, None, None)
    t0 = time.perf_counter()
    precision_error = False
    try:
        f = fn(session)
    except InsufficientPrecision as exc:
        f = Finding(False, {}, {"error": type(exc).__name__, "message": str(exc)})
        precision_error = True
    except (ValueError, ArithmeticError, RuntimeError, KeyError) as exc:
        f = Finding(False, {}, {"error": type(exc).__name__, "message": str(exc)})
    dt = time.perf_counter() - t0
    return CheckRecord(name, PASS if f.ok else FAIL, params, f.details, f.witness, dt, precision_error)


def _run_in_worker(args):
    config, name, cache_dir = args
    session = Session(config, SeriesCache(cache_dir) if cache_dir else None)
    return run_one(session, name)


def run_checks(session: Session) -> list[CheckRecord]:
    names = session.config.selected()
    if session.config.jobs > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        if session.cache is not None:
            session.theta()  # populate the cache once before fanning out
        cache_dir = str(session.cache.root) if session.cache is not None else None
        with ProcessPoolExecutor(max_workers=session.config.jobs) as pool:
            records = list(pool.map(_run_in_worker, [(session.config, n, cache_dir) for n in names]))
    else:
        records = [run_one(session, n) for n in names]
    return sorted(records, key=lambda r: r.name)


def build_report(config: RunConfig, records: list[CheckRecord]) -> dict:
    checks = []
    for r in records:
        rec = {
            "name": r.name,
            "status": r.status,
            "parameters": r.parameters,
            "details": r.details,
            "witness": r.witness,
            "wall_time": round(r.wall_time, 6) if (config.timings and r.wall_time is not None) else None,
        }
        checks.append(rec)
    summary = {k: sum(1 for r in records if r.status == k) for k in (PASS, FAIL, SKIPPED)}
    return {"version": __version__, "config": config.echo(), "checks": checks, "summary": summary}
