"""Exact evaluators for hard-core partition functions.

Everything here returns exact rationals (or exact cubic-extension scalars for
the 2-spin model); the only approximate object is the verified enclosure
produced by the trigonometric closed form for paths, and that is a two-sided
bound, not a float.

Evaluators:

  * z_bruteforce -- enumerate independent sets by branching over the vertex
    list with a forbidden-mask prune; capped by vertex count.
  * z_tree       -- leaf-to-root in/out dynamic program, linear in the tree.
  * z_exact      -- the general workhorse: iteratively folds degree-1 vertices
    into (in, out) weight pairs on their neighbors, then enumerates each
    remaining 2-core component exactly.  Handles trees of any size and the
    cyclic gadget assemblies whose cycles are small and disjoint.
  * z_twospin    -- brute force over spin assignments, exact in Q(t).

Path specialists: the two-term recurrence, the endpoint occupation ratio, a
scaled-integer stream of path values for long scans, and the verified
trigonometric closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (CapacityError, DomainError, UndefinedRatioError,
                     ZeroDenominatorError)
from .graphs import ActivityVector, Graph, coerce_activities
from .numerics import (ApproxReal, CubicNumber, acos_lambda, sin_enclosure,
                       sqrt_interval, working_precision)

BRUTE_FORCE_CAP = 30
TWOSPIN_CAP = 20

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class SplitValue:
    """Partition function split at a marked vertex: Z = z_in + z_out."""

    z_in: Fraction
    z_out: Fraction

    @property
    def total(self):
        return self.z_in + self.z_out

    def ratio(self) -> Fraction:
        if self.z_out == 0:
            raise ZeroDenominatorError("Z_out vanishes; the terminal ratio is undefined")
        return self.z_in / self.z_out


# ---------------------------------------------------------------------------
# Brute force
# ---------------------------------------------------------------------------

def z_bruteforce(g: Graph, acts, marked: int | None = None,
                 cap: int = BRUTE_FORCE_CAP) -> SplitValue:
    """Exact enumeration of all independent sets.

    With no marked vertex the convention is z_in = 0, z_out = Z.  The cap is
    on the vertex count; the work is proportional to the number of
    independent sets.
    """
    if g.n > cap:
        raise CapacityError(f"{g.n} vertices exceed the brute-force cap {cap}")
    if marked is not None and not (0 <= marked < g.n):
        raise DomainError(f"marked vertex {marked} out of range")
    vals = coerce_activities(g, acts)
    n = g.n
    nbr = [0] * n
    for u, v in g.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u

    totals = [_ZERO, _ZERO]  # [out, in] with respect to the marked vertex

    def rec(i, forbidden, weight, has_marked):
        if i == n:
            totals[1 if has_marked else 0] += weight
            return
        rec(i + 1, forbidden, weight, has_marked)
        if not (forbidden >> i) & 1:
            rec(i + 1, forbidden | nbr[i], weight * vals[i],
                has_marked or i == marked)

    rec(0, 0, _ONE, False)
    return SplitValue(totals[1], totals[0])


# ---------------------------------------------------------------------------
# Tree dynamic program
# ---------------------------------------------------------------------------

def z_tree(t: Graph, root: int, acts) -> SplitValue:
    """Exact (Z_in, Z_out) at the root of a tree, leaf-to-root.

    For each vertex: in = activity * prod(children out), out = prod(children
    in + out).  Iterative, so trees with very long spines are fine.
    """
    if not t.is_tree():
        raise DomainError("z_tree requires a connected acyclic graph")
    if not (0 <= root < t.n):
        raise DomainError(f"root {root} out of range")
    vals = coerce_activities(t, acts)

    order = [root]
    parent = [-1] * t.n
    parent[root] = root
    for u in order:
        for w in t.adjacency[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)

    z_in = [None] * t.n
    z_out = [None] * t.n
    for u in reversed(order):
        pin, pout = vals[u], _ONE
        for w in t.adjacency[u]:
            if w == u or parent[w] != u:
                continue
            pin *= z_out[w]
            pout *= z_in[w] + z_out[w]
        z_in[u] = pin
        z_out[u] = pout
    return SplitValue(z_in[root], z_out[root])


# ---------------------------------------------------------------------------
# General exact evaluator: leaf folding + path contraction + core enumeration
# ---------------------------------------------------------------------------
#
# All folding works on integer triples (an, bn, d) per vertex meaning the
# weight pair (in, out) = (an/d, bn/d); no gcd is taken until the very end.
# Folding a leaf u into its neighbor p:
#
#   an_p' = an_p * bn_u,  bn_p' = bn_p * (an_u + bn_u),  d_p' = d_p * d_u
#
# which, viewed as a map on the vector (an_u, bn_u), is multiplication by the
# 2x2 matrix [[0, an_p], [bn_p, bn_p]].  Long induced paths are therefore
# contracted by balanced products of such matrices, turning the naive
# quadratic bignum cost of folding a huge spine into a near-linear one.

_PARK_BITS = 1 << 15  # stop sequential folds once denominators outgrow this


def _balanced_matrix_chain(mats, lo, hi):
    """Product mats[hi-1] @ ... @ mats[lo] of 2x2 integer matrices."""
    if hi - lo == 1:
        return mats[lo]
    mid = (lo + hi) // 2
    x00, x01, x10, x11 = _balanced_matrix_chain(mats, mid, hi)
    y00, y01, y10, y11 = _balanced_matrix_chain(mats, lo, mid)
    return (x00 * y00 + x01 * y10, x00 * y01 + x01 * y11,
            x10 * y00 + x11 * y10, x10 * y01 + x11 * y11)


def _balanced_product(vals, lo, hi):
    if hi - lo == 1:
        return vals[lo]
    mid = (lo + hi) // 2
    return _balanced_product(vals, lo, mid) * _balanced_product(vals, mid, hi)


def _chain_accumulate(chain, an, bn, d):
    """Accumulated (A, B, D) after folding chain[0], chain[1], ... in order.

    (A/D, B/D) is the weight pair the next vertex beyond chain[-1] would
    absorb; the chain must be an induced path.
    """
    head = chain[0]
    vec = (an[head], bn[head])
    rest = chain[1:]
    if rest:
        mats = [(0, an[v], bn[v], bn[v]) for v in rest]
        m00, m01, m10, m11 = _balanced_matrix_chain(mats, 0, len(mats))
        vec = (m00 * vec[0] + m01 * vec[1], m10 * vec[0] + m11 * vec[1])
    dens = [d[v] for v in chain]
    return vec[0], vec[1], _balanced_product(dens, 0, len(dens))


def _core_enumerate(core, alive_neighbors, an, bn, marked):
    """Pair-weight independent-set enumeration over a small residual core."""
    idx = {v: i for i, v in enumerate(core)}
    k = len(core)
    nbr = [0] * k
    for v in core:
        for w in alive_neighbors(v):
            nbr[idx[v]] |= 1 << idx[w]
    totals = [0, 0]

    def rec(i, forbidden, weight, has_marked):
        if i == k:
            totals[1 if has_marked else 0] += weight
            return
        v = core[i]
        rec(i + 1, forbidden, weight * bn[v], has_marked)
        if not (forbidden >> i) & 1:
            rec(i + 1, forbidden | nbr[i], weight * an[v],
                has_marked or v == marked)

    rec(0, 0, 1, False)
    return totals[1], totals[0]


def _path_component_triple(order, has_marked, marked, an, bn, d):
    """Contract an induced-path component given in end-to-end order."""
    if not has_marked:
        return _chain_accumulate(order, an, bn, d)
    if order[0] == marked:
        order = list(reversed(order))
    if order[-1] == marked:
        A, B, D = _chain_accumulate(order[:-1], an, bn, d)
        return (an[marked] * B, bn[marked] * (A + B), d[marked] * D)
    j = order.index(marked)
    la, lb, ld = _chain_accumulate(order[:j], an, bn, d)
    ra, rb, rd = _chain_accumulate(list(reversed(order[j + 1:])), an, bn, d)
    return (an[marked] * lb * rb,
            bn[marked] * (la + lb) * (ra + rb),
            d[marked] * ld * rd)


def _z_exact_triples(g: Graph, acts, marked, core_cap):
    """Shared core: returns (marked_triple_or_None, scalar_num, scalar_den)."""
    vals = coerce_activities(g, acts)
    an = [v.numerator for v in vals]
    bn = [v.denominator for v in vals]
    d = [v.denominator for v in vals]
    alive = bytearray(b"\x01") * g.n
    adj = g.adjacency
    deg = [len(a_) for a_ in adj]

    def alive_neighbors(v):
        return [w for w in adj[v] if alive[w]]

    # Phase 1: sequential leaf folding while the accumulated numbers are small.
    stack = [v for v in range(g.n) if deg[v] == 1 and v != marked]
    while stack:
        u = stack.pop()
        if not alive[u] or deg[u] != 1 or u == marked:
            continue
        (p,) = alive_neighbors(u)
        if d[u].bit_length() > _PARK_BITS or d[p].bit_length() > _PARK_BITS:
            continue
        an[p] *= bn[u]
        bn[p] *= an[u] + bn[u]
        d[p] *= d[u]
        alive[u] = 0
        deg[p] -= 1
        deg[u] = 0
        if deg[p] == 1 and p != marked:
            stack.append(p)

    # Phase 2: per-component assembly.
    scalar_num, scalar_den = 1, 1
    marked_triple = None
    seen = bytearray(g.n)
    for s in range(g.n):
        if not alive[s] or seen[s]:
            continue
        comp = [s]
        seen[s] = 1
        qi = 0
        while qi < len(comp):
            u = comp[qi]
            qi += 1
            for w in adj[u]:
                if alive[w] and not seen[w]:
                    seen[w] = 1
                    comp.append(w)
        has_marked = marked is not None and comp.__contains__(marked)
        ends = [v for v in comp if deg[v] <= 1]
        maxdeg = max(deg[v] for v in comp)

        if len(comp) == 1:
            v = comp[0]
            triple = (an[v], bn[v], d[v])
        elif maxdeg <= 2 and ends:
            start = ends[0]
            order = [start]
            prev = -1
            while True:
                nxts = [w for w in adj[order[-1]] if alive[w] and w != prev]
                if not nxts:
                    break
                prev = order[-1]
                order.append(nxts[0])
            if len(order) != len(comp):
                raise CapacityError("residual component is not an induced path")
            triple = _path_component_triple(order, has_marked, marked, an, bn, d)
        else:
            if len(comp) > core_cap:
                raise CapacityError(
                    f"residual core with {len(comp)} vertices exceeds cap {core_cap}")
            comp.sort()
            cin, cout = _core_enumerate(comp, alive_neighbors, an, bn,
                                        marked if has_marked else None)
            cden = 1
            for v in comp:
                cden *= d[v]
            triple = (cin, cout, cden)

        if has_marked:
            marked_triple = triple
        else:
            scalar_num *= triple[0] + triple[1]
            scalar_den *= triple[2]
    return marked_triple, scalar_num, scalar_den


def z_exact(g: Graph, acts, marked: int | None = None,
            core_cap: int = BRUTE_FORCE_CAP) -> SplitValue:
    """Exact evaluation for graphs whose cycles live in small residual cores.

    Degree-1 vertices are folded into their neighbors' weight pairs; residual
    induced paths are contracted with balanced matrix products; whatever
    remains per component is either a single vertex, a contracted path, or a
    small 2-core enumerated exactly.  Trees of any size are handled; the
    capacity limit applies only to cyclic residual components.
    """
    if marked is not None and not (0 <= marked < g.n):
        raise DomainError(f"marked vertex {marked} out of range")
    if g.n == 0:
        return SplitValue(_ZERO, _ONE)
    triple, snum, sden = _z_exact_triples(g, acts, marked, core_cap)
    if marked is None:
        return SplitValue(_ZERO, Fraction(snum, sden))
    tin, tout, tden = triple
    den = tden * sden
    return SplitValue(Fraction(tin * snum, den), Fraction(tout * snum, den))


def z_exact_ratio_check(g: Graph, acts, marked: int, ratio: Fraction,
                        core_cap: int = BRUTE_FORCE_CAP):
    """Exactly test Z_in/Z_out == ratio at the marked vertex without reducing.

    Returns (matches, z_out_nonzero).  Works on the unreduced integer triple,
    so huge gadgets are checked by cross-multiplication instead of giant gcds.
    """
    if g.n == 0:
        raise DomainError("cannot mark a vertex of the empty graph")
    triple, snum, _ = _z_exact_triples(g, acts, marked, core_cap)
    tin, tout, _ = triple
    if tout == 0 or snum == 0:
        return False, False
    return tin * ratio.denominator == ratio.numerator * tout, True


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

def z_path_recurrence(n: int, lam) -> Fraction:
    """Exact path partition value from x_k = x_{k-1} + lam * x_{k-2}, x_{-1}=x_0=1."""
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    prev, cur = _ONE, _ONE  # x_{-1}, x_0
    for _ in range(n):
        prev, cur = cur, cur + lam * prev
    return cur


def path_partition_polynomial(n: int):
    """Coefficients (ascending) of the path partition value as a polynomial in the activity."""
    if n < 1:
        raise DomainError("paths have at least one vertex")
    prev, cur = [1], [1]  # x_{-1}, x_0
    for _ in range(n):
        nxt = list(cur) + [0] * (len(prev) + 1 - len(cur))
        for i, coef in enumerate(prev):
            nxt[i + 1] += coef
        prev, cur = cur, nxt
    return cur


def scaled_path_values(lam):
    """Yield (n, a_n) with Z_{P_n}(lam) = a_n / q^n for lam = p/q, n = 0, 1, 2, ...

    Integer-only stream meant for long scans; a_0 = 1.
    """
    lam = Fraction(lam)
    p, q = lam.numerator, lam.denominator
    a_prev, a_cur = 1, q + p  # n = 0, 1
    yield 0, 1
    yield 1, a_cur
    n = 1
    while True:
        a_prev, a_cur = a_cur, q * a_cur + p * q * a_prev
        n += 1
        yield n, a_cur


def scaled_path_pair(lam, n: int):
    """(a_{n-2}, a_{n-1}) of the scaled stream, by 2x2 matrix power.

    Near-linear in the answer size, so single huge indices are reachable
    without streaming through every smaller one.
    """
    if n < 2:
        raise DomainError("defined for n >= 2")
    lam = Fraction(lam)
    p, q = lam.numerator, lam.denominator
    if n == 2:
        return 1, q + p
    # (a_k, a_{k-1}) = [[q, p*q], [1, 0]] applied to (a_{k-1}, a_{k-2}).
    m = (q, p * q, 1, 0)
    acc = (1, 0, 0, 1)
    e = n - 2
    while e:
        if e & 1:
            acc = (acc[0] * m[0] + acc[1] * m[2], acc[0] * m[1] + acc[1] * m[3],
                   acc[2] * m[0] + acc[3] * m[2], acc[2] * m[1] + acc[3] * m[3])
        m = (m[0] * m[0] + m[1] * m[2], m[0] * m[1] + m[1] * m[3],
             m[2] * m[0] + m[3] * m[2], m[2] * m[1] + m[3] * m[3])
        e >>= 1
    a_n1 = acc[0] * (q + p) + acc[1]
    a_n2 = acc[2] * (q + p) + acc[3]
    return a_n2, a_n1


def path_ratio(n: int, lam) -> Fraction:
    """Exact endpoint ratio Z_in/Z_out of the n-vertex path: lam * Z_{P_{n-2}} / Z_{P_{n-1}}."""
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    if n == 1:
        return lam
    x2 = z_path_recurrence(n - 2, lam) if n >= 3 else _ONE
    x1 = z_path_recurrence(n - 1, lam)
    if x1 == 0:
        raise ZeroDenominatorError(
            f"Z of the {n - 1}-vertex path vanishes at {lam}: the ratio sequence is periodic")
    return lam * x2 / x1


def z_path_closed(n: int, lam, precision: int | None = None) -> ApproxReal:
    """Verified enclosure of sin((n+2)theta) / (2^n cos^n(theta) sin(2theta)).

    Valid for lam < -1/4; precision doubles until the enclosure is narrower
    than 2^-64 (absolute) or escalation runs out.  The result must contain the
    exact recurrence value, which the tests assert.
    """
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    if lam >= Fraction(-1, 4):
        raise DomainError("the trigonometric closed form requires lambda < -1/4")
    bits = precision or working_precision()
    target = Fraction(1, 1 << 64)
    last = None
    for _ in range(12):
        theta = acos_lambda(lam, bits)
        cos_enc = sqrt_interval(Fraction(-1) / (4 * lam), bits)
        sin_top = sin_enclosure(theta * (n + 2), bits)
        sin_bot = sin_enclosure(theta * 2, bits)
        denom = (cos_enc.pow_int(n) * sin_bot) * Fraction(1 << n)
        if denom.lo <= 0 <= denom.hi:
            bits *= 2
            continue
        enc = sin_top / denom
        if enc.width <= target:
            return enc
        last = enc
        bits *= 2
    if last is None:
        raise DomainError("closed-form enclosure did not separate from zero")
    return last


def path_ratio_trig(n: int, lam, precision: int | None = None) -> ApproxReal:
    """Enclosure of the endpoint ratio via -sin(n theta) / (2 cos theta sin((n+1) theta))."""
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    bits = precision or working_precision()
    for _ in range(12):
        theta = acos_lambda(lam, bits)
        cos_enc = sqrt_interval(Fraction(-1) / (4 * lam), bits)
        top = sin_enclosure(theta * n, bits)
        bot = sin_enclosure(theta * (n + 1), bits) * cos_enc * 2
        if bot.lo <= 0 <= bot.hi:
            bits *= 2
            continue
        return -(top / bot)
    raise ZeroDenominatorError(
        f"sin((n+1)theta) enclosure stayed near zero for n={n}, lambda={lam}")


# ---------------------------------------------------------------------------
# Occupation ratio
# ---------------------------------------------------------------------------

def ratio_R(g: Graph, v: int, acts, cap: int = BRUTE_FORCE_CAP) -> Fraction:
    """Exact occupation ratio R = Z_out(v) / Z; trees use the tree DP."""
    if g.is_tree():
        split = z_tree(g, v, acts)
    else:
        split = z_bruteforce(g, acts, marked=v, cap=cap)
    total = split.total
    if total == 0:
        raise UndefinedRatioError("Z = 0: the occupation ratio is undefined")
    return split.z_out / total


# ---------------------------------------------------------------------------
# Two-spin systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoSpinParams:
    """Edge interaction parameters (beta, gamma) in Q(t); matrix [[beta,1],[1,gamma]]."""

    beta: CubicNumber
    gamma: CubicNumber

    def __post_init__(self):
        if self.beta.radicand != self.gamma.radicand:
            raise DomainError("beta and gamma must live in the same extension")
        if self.beta * self.gamma == CubicNumber.of(1, self.beta.radicand):
            raise DomainError("beta*gamma = 1 is the degenerate product measure")

    @staticmethod
    def from_rationals(beta, gamma, radicand=1) -> "TwoSpinParams":
        return TwoSpinParams(CubicNumber.of(beta, radicand),
                             CubicNumber.of(gamma, radicand))

    def to_json(self):
        return {"beta": self.beta.to_json(), "gamma": self.gamma.to_json()}


def z_twospin(h: Graph, params: TwoSpinParams, cap: int = TWOSPIN_CAP) -> CubicNumber:
    """Exact 2-spin partition function: sum over assignments of prod of edge entries.

    An edge with both endpoints 0 contributes beta, both 1 contributes gamma,
    mixed contributes 1; so each assignment's weight is beta^e00 * gamma^e11.
    """
    if h.n > cap:
        raise CapacityError(f"{h.n} vertices exceed the 2-spin cap {cap}")
    m = len(h.edges)
    one = CubicNumber.of(1, params.beta.radicand)
    beta_pow = [one]
    gamma_pow = [one]
    for _ in range(m):
        beta_pow.append(beta_pow[-1] * params.beta)
        gamma_pow.append(gamma_pow[-1] * params.gamma)
    edges = list(h.edges)
    total = CubicNumber.of(0, params.beta.radicand)
    for sigma in range(1 << h.n):
        e00 = e11 = 0
        for u, v in edges:
            su = (sigma >> u) & 1
            sv = (sigma >> v) & 1
            if su == 0 and sv == 0:
                e00 += 1
            elif su == 1 and sv == 1:
                e11 += 1
        total = total + beta_pow[e00] * gamma_pow[e11]
    return total
