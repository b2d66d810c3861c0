"""Activity-implementing constructions.

Given a degree bound Delta >= 3 and a rational activity lambda below the
Shearer threshold -(Delta-1)^(Delta-1)/Delta^Delta, these builders produce
bipartite max-degree-Delta gadgets whose terminal ratio Z_in/Z_out hits any
rational target either exactly or within a requested accuracy:

  * paths              -- below -1/4 the endpoint ratio of the n-vertex path
                          is dense in the reals, unless the ratio sequence is
                          periodic (rational activities -1, -1/2, -1/3);
  * zero trees         -- a tree whose partition function vanishes yields an
                          exact -1 gadget (any leaf works after trimming), and
                          a 9-vertex two-branch template upgrades -1 to +1;
  * ping-pong          -- composing f+(x) = 1/(1+x) and f-(x) = 1/(1-x)
                          reaches every rational from 0, and a caterpillar of
                          +-1 gadgets realizes the walk graph-theoretically,
                          implementing lambda*z exactly for every rational z;
  * boosting           -- for lambda in [-1/4, threshold) a (Delta-1)-ary tree
                          iterates x -> 1/(1 - A x^d) past (1/A)^(1/d),
                          manufacturing an effective activity below -1/4 that
                          path constructions can then consume.

Every returned Gadget is re-certified by an independent exact evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (CertificateError, DomainError, InternalError,
                     SearchExhaustedError, ZeroDenominatorError)
from .graphs import (ActivityVector, Gadget, Graph, add_pendant, attach_at,
                     dary_tree, disjoint_union, is_bipartite, path,
                     validate_gadget)
from .numerics import ApproxReal, format_rational
from .partition import (SplitValue, path_partition_polynomial, path_ratio,
                        path_ratio_trig, scaled_path_pair, scaled_path_values,
                        z_bruteforce, z_exact, z_path_recurrence, z_tree)

BOOST_ITERATION_CAP = 10 ** 6
DEFAULT_SCAN_CAP = 10 ** 6

_ZERO = Fraction(0)
_ONE = Fraction(1)
_QUARTER = Fraction(-1, 4)

# Rational activities below -1/4 whose path-ratio sequence is periodic, with
# the vertex count of the shortest zero path.  Classification: if the path
# angle theta is a rational multiple of pi and (2cos(theta))^2 = -1/lambda is
# rational, then 2cos(2theta) = (2cos(theta))^2 - 2 is both rational and an
# algebraic integer, hence an integer in {0,+-1,+-2}; on lambda < -1/4 that
# forces -1/lambda in {1,2,3}.  The scan oracle below confirms independently.
PERIODIC_ZERO_PATH = {
    Fraction(-1): 1,
    Fraction(-1, 2): 2,
    Fraction(-1, 3): 4,
}


def shearer_threshold(delta: int) -> Fraction:
    """(Delta-1)^(Delta-1) / Delta^Delta, the positivity threshold scale."""
    if delta < 2:
        raise DomainError("degree bound must be at least 2")
    return Fraction((delta - 1) ** (delta - 1), delta ** delta)


# ---------------------------------------------------------------------------
# The periodic set and its independent oracle
# ---------------------------------------------------------------------------

def bad_set_member(lam) -> bool:
    """Is the path-ratio sequence at this rational activity periodic?"""
    lam = Fraction(lam)
    if lam >= _QUARTER:
        raise DomainError(f"periodicity is only defined for activities below -1/4, got {lam}")
    return lam in PERIODIC_ZERO_PATH


def rational_path_zeros(q_max: int = 200):
    """All rational activities below -1/4 at which some path P_n, n <= q_max - 2,
    has partition value exactly zero.

    Independent of the classification above: for each n the candidates come
    from the rational root theorem (the constant coefficient is 1 and the
    leading coefficient counts maximum independent sets), and every candidate
    is confirmed by exact evaluation.
    """
    found = set()
    for n in range(1, q_max - 1):
        coeffs = path_partition_polynomial(n)
        lead = abs(coeffs[-1])
        divisors = {d for d in range(1, lead + 1) if lead % d == 0}
        for d in divisors:
            for cand in (Fraction(1, d), Fraction(-1, d)):
                if cand >= _QUARTER:
                    continue
                if z_path_recurrence(n, cand) == 0:
                    found.add(cand)
    return sorted(found)


# ---------------------------------------------------------------------------
# Zero trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroTree:
    """A tree whose partition value at the given activity is exactly zero."""

    tree: Graph
    lam: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lam", Fraction(self.lam))
        if not self.tree.is_tree():
            raise DomainError("zero-tree witness must be a tree")
        if self.witness() != 0:
            raise DomainError(
                f"partition value is {self.witness()}, not zero, at {self.lam}")

    def witness(self) -> Fraction:
        return z_tree(self.tree, 0, ActivityVector.uniform(self.tree.n, self.lam)).total

    @property
    def max_degree(self) -> int:
        return self.tree.max_degree()


def zero_path(lam) -> ZeroTree:
    """The shortest path with vanishing partition value at a periodic activity."""
    lam = Fraction(lam)
    if not bad_set_member(lam):
        raise DomainError(f"{lam} has no zero path (ratio sequence not periodic)")
    return ZeroTree(path(PERIODIC_ZERO_PATH[lam]), lam)


def _delete_vertex(g: Graph, u: int) -> Graph:
    remap = lambda w: w if w < u else w - 1
    edges = [(remap(a), remap(b)) for a, b in g.edges if a != u and b != u]
    return Graph(g.n - 1, edges)


def minimalize_zero_tree(zt: ZeroTree, lam=None) -> ZeroTree:
    """Greedily delete leaves whose removal keeps the partition value zero.

    At the fixed point every leaf u has Z_out(u) = Z(tree without u) nonzero,
    which is exactly what the -1 construction needs.  Never deletes down to
    the empty graph.
    """
    lam = Fraction(lam) if lam is not None else zt.lam
    tree = zt.tree
    changed = True
    while changed and tree.n >= 2:
        changed = False
        for u in range(tree.n):
            if tree.degree(u) != 1:
                continue
            smaller = _delete_vertex(tree, u)
            if z_tree(smaller, 0, ActivityVector.uniform(smaller.n, lam)).total == 0:
                tree = smaller
                changed = True
                break
    return ZeroTree(tree, lam)


# ---------------------------------------------------------------------------
# The -1 and +1 gadgets
# ---------------------------------------------------------------------------

def implement_minus_one(delta: int, lam, zt: ZeroTree | None = None) -> Gadget:
    """Exact -1 gadget: a trimmed zero tree with a leaf terminal.

    At lambda = -1 the 4-vertex path is used directly (its one-vertex zero
    path has a degree-0 vertex, unusable as a terminal); there Z_out = -1 and
    Z_in = 1 at an endpoint.
    """
    if delta < 3:
        raise DomainError("degree bound must be at least 3")
    lam = Fraction(lam)
    if lam == -1:
        gadget = Gadget(path(4), 0, Fraction(-1), lam)
    else:
        if zt is None:
            raise DomainError("a zero tree is required unless lambda = -1")
        if zt.max_degree > delta:
            raise DomainError(
                f"zero tree has degree {zt.max_degree} > bound {delta}")
        trimmed = minimalize_zero_tree(zt, lam)
        terminal = min(v for v in range(trimmed.tree.n) if trimmed.tree.degree(v) == 1)
        split = z_tree(trimmed.tree, terminal,
                       ActivityVector.uniform(trimmed.tree.n, lam))
        if split.total != 0 or split.z_out == 0:
            raise InternalError("trimmed zero tree lost its defining property")
        gadget = Gadget(trimmed.tree, terminal, Fraction(-1), lam)
    if not validate_gadget(gadget):
        raise InternalError("-1 gadget failed validation")
    return gadget


def plus_one_template():
    """The 9-vertex two-branch template whose nonuniform split is (-lam^2, -lam^2).

    Vertex 0 is the terminal; vertices carry the ambient activity except the
    five marked sites which carry -1.  Returns (graph, minus_sites).
    """
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 8), (3, 6), (6, 7), (7, 8)]
    return Graph(9, edges), (1, 2, 5, 6, 8)


def attach_implementations(base: Graph, acts, gadgets_by_activity: dict, lam):
    """Replace non-ambient vertex activities by attaching implementing gadgets.

    Every vertex whose activity differs from the ambient lambda gets a fresh
    copy of the gadget for that activity, terminal identified with the vertex
    (so the vertex gains exactly one edge).  Returns the uniform-activity
    graph and per-activity attachment counts; base vertex ids are preserved.
    """
    lam = Fraction(lam)
    vals = acts.values if isinstance(acts, ActivityVector) else tuple(Fraction(a) for a in acts)
    if len(vals) != base.n:
        raise DomainError("activity vector length mismatch")
    g = base
    counts = {}
    for v in range(base.n):
        val = vals[v]
        if val == lam:
            continue
        try:
            gadget = gadgets_by_activity[val]
        except KeyError:
            raise DomainError(f"no implementing gadget supplied for activity {val}")
        if gadget.ratio != val or gadget.lam != lam:
            raise DomainError("gadget does not implement the requested activity")
        g = attach_at(g, v, gadget.graph, gadget.terminal)
        counts[val] = counts.get(val, 0) + 1
    return g, counts


def implement_plus_one(delta: int, lam, minus_one: Gadget) -> Gadget:
    """Exact +1 gadget: the two-branch template with -1 sites filled in.

    The template's nonuniform evaluation gives Z_in = Z_out = -lam^2 at the
    terminal for every lambda; attaching certified -1 gadgets at the five
    marked sites preserves the ratio exactly and keeps degrees <= Delta.
    """
    if delta < 3:
        raise DomainError("degree bound must be at least 3")
    lam = Fraction(lam)
    if minus_one.ratio != -1 or minus_one.lam != lam:
        raise DomainError("need a certified -1 gadget at the same activity")
    template, minus_sites = plus_one_template()
    acts = [Fraction(-1) if v in minus_sites else lam for v in range(template.n)]
    tsplit = z_bruteforce(template, acts, marked=0)
    if not (tsplit.z_in == -lam * lam == tsplit.z_out):
        raise InternalError("template split is not (-lam^2, -lam^2)")
    g, counts = attach_implementations(template, acts, {Fraction(-1): minus_one}, lam)
    expected = sum(1 for v in minus_sites if acts[v] != lam)
    if counts.get(Fraction(-1), 0) != expected:
        raise InternalError("unexpected attachment counts")
    if g.max_degree() > delta:
        raise InternalError("degree bound exceeded while assembling +1 gadget")
    gadget = Gadget(g, 0, Fraction(1), lam)
    if not validate_gadget(gadget):
        raise InternalError("+1 gadget failed validation")
    return gadget


# ---------------------------------------------------------------------------
# Ping-pong: every rational from 0 via f+ and f-
# ---------------------------------------------------------------------------

def f_plus(x) -> Fraction:
    x = Fraction(x)
    if x == -1:
        raise CertificateError("f+ pole at -1")
    return 1 / (1 + x)


def f_minus(x) -> Fraction:
    x = Fraction(x)
    if x == 1:
        raise CertificateError("f- pole at +1")
    return 1 / (1 - x)


_BASE_CERTIFICATES = {
    Fraction(0): (),
    Fraction(1): ("plus",),
    Fraction(1, 2): ("plus", "plus"),
    Fraction(2): ("plus", "plus", "minus"),
    Fraction(-1): ("plus", "plus", "minus", "minus"),
}

# Elementary forward-step expansions of the inverse maps:
#   f-^{-1}(x) = (x-1)/x   = f-(f-(x))
#   f+^{-1}(x) = (1-x)/x   = f-(f-(f+(f-(f-(x)))))
_INVERSE_EXPANSION = {
    "minus": ("minus", "minus"),
    "plus": ("minus", "minus", "plus", "minus", "minus"),
}


@dataclass(frozen=True)
class PingPongCertificate:
    """A {plus, minus} word replaying from 0 to target without hitting a pole."""

    steps: tuple
    target: Fraction

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "target", Fraction(self.target))
        if any(s not in ("plus", "minus") for s in self.steps):
            raise CertificateError("steps must be 'plus' or 'minus'")

    def replay(self) -> Fraction:
        x = _ZERO
        for s in self.steps:
            x = f_plus(x) if s == "plus" else f_minus(x)
        if x != self.target:
            raise CertificateError(f"certificate replays to {x}, not {self.target}")
        return x

    def to_json(self):
        return {"steps": list(self.steps), "target": format_rational(self.target)}


def pingpong_certificate(rho) -> PingPongCertificate:
    """A certificate reaching any rational rho from 0.

    Outside the hardcoded base set the walk is found backwards: descend from
    rho to -1 by sign flips (f-(f-(f+(x))) = -x) and subtractive-Euclid
    reductions on |p| + |q|, then invert the descent step by step using the
    forward expansions of the inverse maps.
    """
    rho = Fraction(rho)
    if rho in _BASE_CERTIFICATES:
        cert = PingPongCertificate(_BASE_CERTIFICATES[rho], rho)
        cert.replay()
        return cert

    descent = []
    v = rho
    guard = 0
    while v not in _BASE_CERTIFICATES:
        guard += 1
        if guard > 10_000_000:
            raise InternalError("ping-pong descent did not terminate")  # pragma: no cover
        if v < 0:
            descent += ["plus", "minus", "minus"]
            v = -v
        else:
            p, q = v.numerator, v.denominator
            if p > q:
                descent += ["minus", "plus", "minus", "minus"]
                v = Fraction(q, p - q)
            else:
                descent += ["minus", "minus", "plus", "minus", "minus"]
                v = Fraction(q - p, p)
    if v == Fraction(2):
        descent += ["minus"]
    elif v == Fraction(1, 2):
        descent += ["minus", "minus"]
    elif v != Fraction(-1):
        raise InternalError(f"descent reached {v}, which is impossible from {rho}")

    steps = list(_BASE_CERTIFICATES[Fraction(-1)])
    for d in reversed(descent):
        steps.extend(_INVERSE_EXPANSION[d])
    cert = PingPongCertificate(tuple(steps), rho)
    cert.replay()
    return cert


def implement_rational_multiple(delta: int, lam, z, minus_one: Gadget,
                                plus_one: Gadget,
                                certificate: PingPongCertificate | None = None) -> Gadget:
    """Exact gadget with ratio lambda*z for any rational z, as a caterpillar.

    The spine starts at a pendant on the -1 gadget (occupation ratio 0); each
    certificate step wires a fresh +-1 gadget's terminal to the current head
    by an edge, mapping the ratio through f+ or f-; a final pendant turns the
    occupation ratio r into the terminal ratio lambda*r.  Any valid
    certificate for z may be supplied; the canonical one is the default.
    """
    if delta < 3:
        raise DomainError("degree bound must be at least 3")
    lam = Fraction(lam)
    z = Fraction(z)
    for g_, want in ((minus_one, Fraction(-1)), (plus_one, Fraction(1))):
        if g_.ratio != want or g_.lam != lam:
            raise DomainError("need certified -1 and +1 gadgets at the same activity")
    cert = certificate if certificate is not None else pingpong_certificate(z)
    if cert.target != z:
        raise CertificateError(f"certificate targets {cert.target}, not {z}")

    g, head = add_pendant(minus_one.graph, minus_one.terminal)
    x = _ZERO
    for step in cert.steps:
        x = f_plus(x) if step == "plus" else f_minus(x)
        src = plus_one if step == "plus" else minus_one
        g, offset = disjoint_union(g, src.graph)
        new_head = offset + src.terminal
        g = Graph(g.n, list(g.edges) + [(head, new_head)], g.labels)
        head = new_head
    if x != z:
        raise CertificateError(f"replay reached {x}, wanted {z}")
    if g.degree(head) > 2:
        raise InternalError("spine head degree exceeded 2")
    g, terminal = add_pendant(g, head)
    if g.max_degree() > delta:
        raise InternalError("degree bound exceeded while assembling caterpillar")
    gadget = Gadget(g, terminal, lam * z, lam)
    if not validate_gadget(gadget):
        raise InternalError("caterpillar gadget failed validation")
    return gadget


# ---------------------------------------------------------------------------
# Path search
# ---------------------------------------------------------------------------

def _within_eps_scaled(num, den, u, v, e, f) -> bool:
    """Exact test |num/den - u/v| <= e/f using only integer arithmetic."""
    if den == 0:
        return False
    lhs = f * abs(num * v - u * den)
    return lhs <= e * v * abs(den)


def find_path_activity(lam, target, eps, n_max: int = DEFAULT_SCAN_CAP):
    """Smallest n with |path endpoint ratio - target| <= eps, plus the exact ratio.

    Defined for non-periodic rational activities below -1/4, where the ratio
    sequence is dense.  The scan runs the scaled-integer recurrence and tests
    every n with exact cross-multiplied comparisons, so the returned n is the
    true minimum and the ratio is exact.
    """
    lam, target, eps = Fraction(lam), Fraction(target), Fraction(eps)
    if lam >= _QUARTER:
        raise DomainError("path search needs an activity below -1/4")
    if bad_set_member(lam):
        raise DomainError(f"{lam} has a periodic ratio sequence; paths cannot scan")
    if eps < 0:
        raise DomainError("accuracy must be non-negative")

    p = lam.numerator
    u, v = target.numerator, target.denominator
    e, f = eps.numerator, eps.denominator

    if abs(lam - target) <= eps:
        return 1, lam
    gen = scaled_path_values(lam)
    next(gen)  # n = 0
    _, a_prev = next(gen)  # a_1
    a_pprev = 1  # a_0; the pair is (a_{n-2}, a_{n-1}) when testing n
    for n in range(2, n_max + 1):
        # ratio_n = lam * Z_{P_{n-2}} / Z_{P_{n-1}} = p * a_{n-2} / a_{n-1}
        if _within_eps_scaled(p * a_pprev, a_prev, u, v, e, f):
            return n, Fraction(p * a_pprev, a_prev)
        _, a_next = next(gen)
        a_pprev, a_prev = a_prev, a_next
    raise SearchExhaustedError(
        f"no path of at most {n_max} vertices lands within {eps} of {target} at {lam}",
        resume={"next_n": n_max + 1, "lambda": str(lam), "target": str(target),
                "eps": str(eps)})


# ---------------------------------------------------------------------------
# Boosting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostResult:
    """First iterate of x -> 1/(1 - A x^d) at or above (1/A)^(1/d), with its tree."""

    height: int
    x_h: Fraction
    lambda_hat: Fraction
    tree: Graph
    root: int
    trajectory: tuple

    def to_json(self):
        return {
            "height": self.height,
            "x_h": format_rational(self.x_h),
            "lambda_hat": format_rational(self.lambda_hat),
            "trajectory": [format_rational(x) for x in self.trajectory],
        }


def boost(delta: int, lam) -> BoostResult:
    """Iterate the occupation ratio of complete (Delta-1)-ary trees exactly.

    Requires -1/4 <= lambda < -threshold(Delta).  Writes A = -lambda and
    d = Delta - 1; starting from x_0 = 1/(1-A) the iterates strictly increase
    until x_h^d >= 1/A (exact rational comparisons), and the boosted activity
    lambda * x_h^(d-1) is then strictly below -1/4.
    """
    if delta < 3:
        raise DomainError("degree bound must be at least 3")
    lam = Fraction(lam)
    thr = shearer_threshold(delta)
    if not (_QUARTER <= lam < -thr):
        raise DomainError(
            f"boost regime is -1/4 <= lambda < {-thr}; got {lam}")
    d = delta - 1
    a = -lam
    x = 1 / (1 - a)
    traj = [x]
    h = 0
    while x ** d < 1 / a:
        nxt = 1 / (1 - a * x ** d)
        if nxt <= x:
            raise InternalError("boost iterates failed to increase")  # pragma: no cover
        x = nxt
        traj.append(x)
        h += 1
        if h > BOOST_ITERATION_CAP:
            raise InternalError("boost iteration cap exceeded")  # pragma: no cover
    lam_hat = lam * x ** (d - 1)
    if not lam_hat < _QUARTER:
        raise InternalError("boosted activity is not below -1/4")  # pragma: no cover
    tree, root = dary_tree(d, h)
    return BoostResult(h, x, lam_hat, tree, root, tuple(traj))


def path_split(n: int, lam) -> SplitValue:
    """Exact (Z_in, Z_out) at an endpoint of the n-vertex path."""
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    z_out = z_path_recurrence(n - 1, lam) if n >= 2 else _ONE
    z_in = lam * (z_path_recurrence(n - 2, lam) if n >= 3 else _ONE)
    return SplitValue(z_in, z_out)


@dataclass(frozen=True)
class DecoratedPath:
    """A path with d-1 boosted trees hanging from every vertex, plus a pendant twin."""

    g_n: Graph
    v: int
    g_n_prime: Graph
    v_prime: int


def decorated_path(delta: int, lam, br: BoostResult, n: int,
                   check: bool | None = None) -> DecoratedPath:
    """Attach d-1 copies of the boost tree to every vertex of the n-path.

    The result simulates the path at the boosted activity: each split value of
    the bare path at lambda_hat equals the corresponding split of the
    decorated tree at lambda divided by Z(tree)^((d-1)n).  The identity is
    verified exactly here for n <= 10 (and on demand via check=True).
    """
    if n < 1:
        raise DomainError("paths have at least one vertex")
    lam = Fraction(lam)
    d = delta - 1
    tree, root = br.tree, br.root
    edges = [(i, i + 1) for i in range(n - 1)]
    next_id = n
    for w in range(n):
        for _ in range(d - 1):
            offset = next_id
            edges.extend((a + offset, b + offset) for a, b in tree.edges)
            edges.append((w, offset + root))
            next_id += tree.n
    g_n = Graph(next_id, edges)
    g_np, v_prime = add_pendant(g_n, 0)

    if check is None:
        check = n <= 10
    if check:
        acts = ActivityVector.uniform(g_n.n, lam)
        got = z_tree(g_n, 0, acts)
        want = path_split(n, br.lambda_hat)
        scale = z_tree(tree, root, ActivityVector.uniform(tree.n, lam)).total ** ((d - 1) * n)
        if not (got.z_in == want.z_in * scale and got.z_out == want.z_out * scale):
            raise InternalError("decorated path does not simulate the boosted path")
        interior = [w for w in range(1, n - 1)]
        if any(g_n.degree(w) != delta for w in interior):
            raise InternalError("interior decorated vertices must have full degree")
        if g_np.max_degree() > delta:
            raise InternalError("decorated path exceeded the degree bound")
    return DecoratedPath(g_n, 0, g_np, v_prime)


# ---------------------------------------------------------------------------
# Top-level dispatcher
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Implementation:
    """A certified gadget plus the machine-checkable recipe that produced it."""

    gadget: Gadget
    trace: dict = field(default_factory=dict)


def _implement_via_zero_tree(delta, lam, zt, target, eps, trace) -> Implementation:
    minus = implement_minus_one(delta, lam, zt)
    plus = implement_plus_one(delta, lam, minus)
    z = target / lam
    gadget = implement_rational_multiple(delta, lam, z, minus, plus)
    trace.update({
        "z": format_rational(z),
        "certificate": list(pingpong_certificate(z).steps),
        "minus_one_vertices": minus.graph.n,
        "plus_one_vertices": plus.graph.n,
        "achieved_ratio": format_rational(gadget.ratio),
    })
    return Implementation(gadget, trace)


def _trig_decide(m, lam, lam_hat, target, eps):
    """Rigorously decide |lam/(1 + rho_m(lambda_hat)) - target| <= eps, or None.

    Uses the verified trigonometric enclosure of the path ratio; an enclosure
    entirely inside (outside) the tolerance band decides the inequality, and a
    boundary-straddling one escalates precision before giving up with None.
    """
    bits = max(256, 2 * m.bit_length() + 96)
    for _ in range(4):
        try:
            rho = path_ratio_trig(m, lam_hat, bits)
        except ZeroDenominatorError:
            return None
        den = rho + 1
        if den.lo <= 0 <= den.hi:
            return None
        diff = ApproxReal.exactly(lam) / den - target
        if diff.lo >= -eps and diff.hi <= eps:
            return True
        if diff.lo > eps or diff.hi < -eps:
            return False
        bits *= 2
    return None


def _scan_decorated(delta, lam, br, target, eps, n_max):
    """Some n with |lam / (1 + rho_n(lambda_hat)) - target| <= eps, exactly.

    rho_n is the endpoint ratio of the bare n-path at the boosted activity; in
    scaled integers rho_n = hp * a_{n-2} / a_{n-1}, so the decorated terminal
    ratio is lp * a_{n-1} / (lq * (a_{n-1} + hp * a_{n-2})).  Spine lengths
    can reach 10^5 and beyond, so a float shadow of the recurrence proposes
    candidates, a verified trigonometric enclosure accepts or rejects each
    rigorously in O(1) bignum work, and only the accepted candidate pays for
    its exact scaled-integer pair.  Floats never affect correctness.
    """
    lam_hat = br.lambda_hat
    hp = lam_hat.numerator
    lp, lq = lam.numerator, lam.denominator
    u, v = target.numerator, target.denominator
    e, f = eps.numerator, eps.denominator

    def exact_at(n):
        a2, a1 = scaled_path_pair(lam_hat, n)
        den = lq * (a1 + hp * a2)
        num = lp * a1
        if _within_eps_scaled(num, den, u, v, e, f):
            return Fraction(num, den)
        return None

    if 1 + lam_hat != 0:
        ratio1 = lam / (1 + lam_hat)
        if abs(ratio1 - target) <= eps:
            return 1, ratio1

    lam_f, lh_f, target_f = float(lam), float(lam_hat), float(target)
    screen = 2.0 * float(eps) + 1e-9
    rho_f = lh_f
    checked = set()
    for n in range(2, n_max + 1):
        den_f = 1.0 + rho_f
        rho_f = lh_f / den_f if den_f != 0.0 else float("inf")
        rden = 1.0 + rho_f
        ratio_f = lam_f / rden if rden != 0.0 else float("inf")
        if abs(ratio_f - target_f) <= screen:
            for m in (n, n - 1, n + 1):
                if m >= 2 and m not in checked:
                    checked.add(m)
                    verdict = _trig_decide(m, lam, lam_hat, target, eps)
                    if verdict is False:
                        continue
                    got = exact_at(m)
                    if verdict is True and got is None:  # pragma: no cover
                        raise InternalError("verified enclosure contradicted exact check")
                    if got is not None:
                        return m, got
    raise SearchExhaustedError(
        f"no decorated path of at most {n_max} spine vertices lands within {eps} "
        f"of {target}",
        resume={"next_n": n_max + 1, "lambda_hat": str(lam_hat)})


def implement_activity(delta: int, lam, target, eps,
                       n_max: int = DEFAULT_SCAN_CAP) -> Implementation:
    """Certified bipartite max-degree-Delta gadget with |ratio - target| <= eps.

    Dispatch on the activity regime:
      (a) lambda < -1/4, ratio sequence aperiodic: bare path scan;
      (b) lambda < -1/4, periodic: zero path -> exact +-1 gadgets -> ping-pong
          caterpillar hitting lambda*(target/lambda) exactly;
      (c) -1/4 <= lambda < -threshold(Delta): boost on (Delta-1)-ary trees,
          then either the decorated-path scan (aperiodic boosted activity) or
          the zero-tree machinery on the decorated zero path (periodic one).

    eps = 0 is honored exactly on the ping-pong routes and rejected otherwise.
    """
    if delta < 3:
        raise DomainError("degree bound must be at least 3")
    lam, target, eps = Fraction(lam), Fraction(target), Fraction(eps)
    if eps < 0:
        raise DomainError("accuracy must be non-negative")
    thr = shearer_threshold(delta)
    if not lam < -thr:
        raise DomainError(
            f"activities are only implementable below -{thr}; got {lam}")
    trace = {"delta": delta, "lambda": format_rational(lam),
             "target": format_rational(target), "eps": format_rational(eps)}

    if lam < _QUARTER:
        if bad_set_member(lam):
            trace["route"] = "pingpong"
            zt = zero_path(lam)
            trace["zero_path_vertices"] = zt.tree.n
            return _implement_via_zero_tree(delta, lam, zt, target, eps, trace)
        if eps == 0:
            raise DomainError(
                "exact targets need the ping-pong route; this activity only scans")
        n, ratio = find_path_activity(lam, target, eps, n_max)
        trace.update({"route": "path", "path_vertices": n,
                      "achieved_ratio": format_rational(ratio)})
        gadget = Gadget(path(n), 0, ratio, lam)
        if not validate_gadget(gadget):
            raise InternalError("path gadget failed validation")  # pragma: no cover
        return Implementation(gadget, trace)

    br = boost(delta, lam)
    trace.update({"route": "boosted_path", "boost_height": br.height,
                  "x_h": format_rational(br.x_h),
                  "lambda_hat": format_rational(br.lambda_hat)})
    if bad_set_member(br.lambda_hat):
        n0 = PERIODIC_ZERO_PATH[br.lambda_hat]
        dp = decorated_path(delta, lam, br, n0, check=True)
        zt = ZeroTree(dp.g_n, lam)
        trace["route"] = "boosted_pingpong"
        trace["zero_tree_vertices"] = zt.tree.n
        return _implement_via_zero_tree(delta, lam, zt, target, eps, trace)
    if eps == 0:
        raise DomainError(
            "exact targets need the ping-pong route; the boosted activity only scans")
    n, ratio = _scan_decorated(delta, lam, br, target, eps, n_max)
    dp = decorated_path(delta, lam, br, n)
    trace.update({"path_vertices": n, "achieved_ratio": format_rational(ratio)})
    gadget = Gadget(dp.g_n_prime, dp.v_prime, ratio, lam)
    if not validate_gadget(gadget):
        raise InternalError("decorated path gadget failed validation")
    return Implementation(gadget, trace)
