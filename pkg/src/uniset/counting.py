"""Exact closed-form counts and the inequality battery.

Everything here is integer or `fractions.Fraction` arithmetic: no value is
ever rounded, and any formula whose result must be an integer is checked
for exact divisibility instead of trusting the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .errors import DomainError, NonIntegerResult
from .core import universe_count

Scalar = int | Fraction

LEMMA_IDS = (
    "6.1i", "6.1ii",
    "6.2i", "6.2ii",
    "6.3i", "6.3ii", "6.3iii", "6.3iv",
    "6.4i", "6.4ii", "6.4iii",
)


def theta(c: int, k: int, z: int) -> int:
    """Partitions containing a fixed set of z disjoint c-blocks.

    theta(c,k,z) = (1/(k-z)!) * prod_{i=z}^{k-1} C((k-i)c, c).
    """
    if c < 1 or k < 1:
        raise DomainError(f"need c,k >= 1, got c={c}, k={k}")
    if not 1 <= z <= k:
        raise DomainError(f"z must satisfy 1 <= z <= k={k}, got {z}")
    prod = 1
    for i in range(z, k):
        prod *= comb((k - i) * c, c)
    q, r = divmod(prod, factorial(k - z))
    if r:
        raise NonIntegerResult("theta product is not divisible by (k-z)!")
    return q


def g_bound(c: int, k: int, t: int, z: int) -> int:
    """g(c,k,t,z) = theta(c,k,z) * C(z,t) * prod_{j=1}^{z-t} (k-(t+j-1))."""
    if not 1 <= t <= z <= k:
        raise DomainError(f"need 1 <= t <= z <= k, got t={t}, z={z}, k={k}")
    value = theta(c, k, z) * comb(z, t)
    for j in range(1, z - t + 1):
        value *= k - (t + j - 1)
    return value


def pair_product_bound(c: int, k: int, t: int, tau_f: int, tau_g: int) -> int:
    """Upper bound on |F| for a cross-t-intersecting pair with the given
    covering numbers: theta(c,k,tau_g) * C(tau_f,t) * prod (k-(t+j-1))."""
    if not (1 <= t <= tau_f <= k and t <= tau_g <= k):
        raise DomainError(
            f"need t <= tau_f, tau_g <= k, got t={t}, tau_f={tau_f}, tau_g={tau_g}, k={k}"
        )
    value = theta(c, k, tau_g) * comb(tau_f, t)
    for j in range(1, tau_g - t + 1):
        value *= k - (t + j - 1)
    return value


def _theta_or_total(c: int, k: int, z: int) -> int:
    # theta extended with z=0 (empty constraint -> the whole universe);
    # keeps the binomial inversion below uniform.
    return universe_count(c, k) if z == 0 else theta(c, k, z)


def n_class_counts(c: int, k: int) -> list[int]:
    """|N_i(C)| = #{A : |A cap C| = i} for i = 0..k, for any fixed partition C.

    Obtained by inverting C(k,j) * theta(c,k,j) = sum_{i>=j} C(i,j) * |N_i|;
    the counts do not depend on the choice of C.
    """
    if c < 1 or k < 1:
        raise DomainError(f"need c,k >= 1, got c={c}, k={k}")
    counts = []
    for j in range(k + 1):
        total = 0
        for i in range(j, k + 1):
            total += (-1) ** (i - j) * comb(i, j) * comb(k, i) * _theta_or_total(c, k, i)
        counts.append(total)
    if sum(counts) != universe_count(c, k):
        raise NonIntegerResult("class counts do not sum to the universe size")
    return counts


def verify_theta_class_identity(c: int, k: int, i: int) -> bool:
    """Exact check of theta(c,k,i) = sum_{j=i}^{k-2} [C(k-i,j-i)/C(k,j)]*|N_j| + 1."""
    if not 1 <= i <= k - 1:
        raise DomainError(f"identity needs 1 <= i <= k-1, got i={i}, k={k}")
    counts = n_class_counts(c, k)
    total = Fraction(1)
    for j in range(i, k - 1):
        total += Fraction(comb(k - i, j - i), comb(k, j)) * counts[j]
    return total == theta(c, k, i)


def f0(c: int, k: int, t: int) -> int:
    """f0 = (k-t-1)*theta(c,k,t+1) - C(k-t-1,2)*theta(c,k,t+2)."""
    if k < t + 2:
        raise DomainError(f"f0 needs k >= t+2, got k={k}, t={t}")
    return (k - t - 1) * theta(c, k, t + 1) - comb(k - t - 1, 2) * theta(c, k, t + 2)


def layer_counts(c: int, k: int, t: int) -> list[int]:
    """|L_j| = C(k-t-1, j-t) * theta(c,k,j) for j = t..k-1.

    L_j counts pairs (I, F) with T <= I <= M, |I| = j, I <= F for a fixed
    t-set T inside a fixed (k-1)-set M of blocks.
    """
    if not 1 <= t <= k - 1:
        raise DomainError(f"need 1 <= t <= k-1, got t={t}, k={k}")
    return [comb(k - t - 1, j - t) * theta(c, k, j) for j in range(t, k)]


def exact_overlap_counts(c: int, k: int, t: int) -> list[int]:
    """|A_i| = #{F : T <= F, |M cap F| = i} for i = t..k-1, by inversion.

    Inverts |L_j| = sum_{i>=j} C(i-t, j-t) * |A_i| over the layer counts.
    """
    layers = layer_counts(c, k, t)
    m = len(layers)  # indices shifted by t
    out = [0] * m
    for i in range(m):
        total = 0
        for j in range(i, m):
            total += (-1) ** (j - i) * comb(j, i) * layers[j]
        out[i] = total
    return out


def f1(c: int, k: int, t: int) -> int:
    """Size of the first non-trivial construction:
    sum_{i=t+1}^{k-1} |A_i| + t*(theta(c,k,k-2) - 1)."""
    if k < t + 2:
        raise DomainError(f"f1 needs k >= t+2, got k={k}, t={t}")
    overlaps = exact_overlap_counts(c, k, t)
    return sum(overlaps[1:]) + t * (theta(c, k, k - 2) - 1)


def f2(c: int, k: int, t: int) -> int:
    """Size of the (t+2)-frame construction, via the exact rational form
    theta(c,k,t+1) * [(t+2) - (t+1)(k-t-1)/C((k-t-1)c, c)]."""
    if k < t + 2:
        raise DomainError(f"f2 needs k >= t+2, got k={k}, t={t}")
    bracket = Fraction(t + 2) - Fraction((t + 1) * (k - t - 1), comb((k - t - 1) * c, c))
    value = theta(c, k, t + 1) * bracket
    if value.denominator != 1:
        raise NonIntegerResult(f"f2({c},{k},{t}) is not an integer: {value}")
    return int(value)


def f2_by_inclusion_exclusion(c: int, k: int, t: int) -> int:
    """Independent route: count F with >= t+1 blocks inside a (t+2)-frame.

    C(t+2,t+1)*theta(t+1) counts each F once per contained (t+1)-subset;
    F containing the whole frame is counted t+2 times, so subtract t+1.
    """
    if k < t + 2:
        raise DomainError(f"f2 needs k >= t+2, got k={k}, t={t}")
    return (t + 2) * theta(c, k, t + 1) - (t + 1) * theta(c, k, t + 2)


def h_bounds(c: int, k: int, t: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """The four auxiliary upper bounds, exact, each a rational multiple of
    theta(c,k,t+1)^2. Negative powers of (k-t-1) are kept as fractions."""
    if k < t + 3:
        raise DomainError(f"h bounds need k >= t+3, got k={k}, t={t}")
    th = theta(c, k, t + 1)
    th2 = Fraction(th * th)
    eps = Fraction(3 * (t + 1), 2) / Fraction(k - t - 1) ** (c - 3)
    h1 = ((t + 1) * (k - t - 1) + eps) * (1 + eps) * th2
    h2 = ((k - 1) + eps) * (2 + eps) * th2
    h3 = ((k - t - 1) + eps) * ((k - t - 2) + eps) * th2
    h4 = (
        (t + 2) ** 2
        - 1
        + Fraction(12 * (t + 1) * (k - t - 1) ** 3, comb((k - t - 1) * c, c))
        + Fraction(9 * (t + 1) ** 2, 4) / Fraction(k - t - 1) ** (2 * c - 6)
    ) * th2
    return h1, h2, h3, h4


# ---------------------------------------------------------------------------
# the inequality battery


@dataclass(frozen=True)
class IneqReport:
    """Outcome of one inequality instance, exact on both sides.

    holds means lhs < rhs (lhs <= rhs for the one non-strict case, 6.4iii,
    whose equality cases are reported via `equality`).  hypothesis_ok
    records whether the parameters satisfy the statement's hypotheses;
    out-of-scope points are still evaluated but flagged exploratory.
    """

    lemma_id: str
    c: int
    k: int
    t: int
    s: int | None
    holds: bool
    lhs: Scalar
    rhs: Scalar
    margin: Scalar
    hypothesis_ok: bool
    equality: bool = False

    def to_json_dict(self) -> dict:
        d = {
            "lemma": self.lemma_id,
            "c": self.c,
            "k": self.k,
            "t": self.t,
            "holds": self.holds,
            "lhs": format_scalar(self.lhs),
            "rhs": format_scalar(self.rhs),
            "margin": format_scalar(self.margin),
            "hypothesis_ok": self.hypothesis_ok,
            "equality": self.equality,
        }
        if self.s is not None:
            d["s"] = self.s
        return d


def format_scalar(x: Scalar) -> str:
    """Decimal string; rationals as 'p/q' in lowest terms."""
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(int(x))


def _side_condition_weak(c: int, k: int, t: int) -> bool:
    # c >= 3 + 2*log2(t)  <=>  2^(c-3) >= t^2, checked in integers
    return (c >= 3 and 2 ** (c - 3) >= t * t) or k >= 2 * t + 2


def _side_condition_strong(c: int, k: int, t: int) -> bool:
    # c >= 7 + 4*log2(t)  <=>  2^(c-7) >= t^4
    return (c >= 7 and 2 ** (c - 7) >= t ** 4) or k >= 2 * t + 3


def _hyp_61(c, k, t, s=None):
    ok = c >= 3 and k >= t + 2 and t >= 1 and _side_condition_weak(c, k, t)
    if s is not None:
        ok = ok and t <= s <= k - 2
    return ok


def _hyp_63_64(c, k, t):
    return c >= 6 and k >= t + 3 and t >= 1 and _side_condition_strong(c, k, t)


def check_inequality(lemma_id: str, c: int, k: int, t: int, s: int | None = None) -> IneqReport:
    """Evaluate one inequality instance with exact arithmetic.

    Parameters outside the statement's hypotheses are evaluated anyway and
    returned with hypothesis_ok=False, so exploratory scans stay possible.
    """
    if lemma_id not in LEMMA_IDS:
        raise DomainError(f"unknown lemma id {lemma_id!r}; known: {', '.join(LEMMA_IDS)}")
    if lemma_id == "6.1i":
        if s is None:
            raise DomainError("6.1i needs the step position s")
        hyp = _hyp_61(c, k, t, s)
        lhs, rhs = g_bound(c, k, t, s + 1), g_bound(c, k, t, s)
    elif lemma_id == "6.1ii":
        hyp = _hyp_61(c, k, t)
        lhs, rhs = g_bound(c, k, t, k), g_bound(c, k, t, k - 2)
    elif lemma_id == "6.2i":
        hyp = _hyp_63_64(c, k, t)
        lhs = g_bound(c, k, t, t + 1) * g_bound(c, k, t, t + 2)
        rhs = f0(c, k, t) ** 2
    elif lemma_id == "6.2ii":
        hyp = _hyp_63_64(c, k, t) and k == t + 3
        lhs = g_bound(c, k, t, t + 1) * g_bound(c, k, t, t + 3)
        rhs = f0(c, k, t) ** 2
    elif lemma_id in ("6.3i", "6.3ii", "6.3iii", "6.3iv"):
        hyp = _hyp_63_64(c, k, t)
        h1, h2, h3, h4 = h_bounds(c, k, t)
        f0sq = f0(c, k, t) ** 2
        f2sq = f2(c, k, t) ** 2
        if lemma_id == "6.3i":
            lhs, rhs = h1, max(f0sq, f2sq)
        elif lemma_id == "6.3ii":
            lhs, rhs = h2, max(f0sq, f2sq)
        elif lemma_id == "6.3iii":
            lhs, rhs = h3, f0sq
        else:
            lhs, rhs = h4, f2sq
    elif lemma_id == "6.4i":
        hyp = _hyp_63_64(c, k, t)
        lhs, rhs = f0(c, k, t), f1(c, k, t)
    elif lemma_id == "6.4ii":
        hyp = _hyp_63_64(c, k, t) and k >= 2 * t + 4
        lhs, rhs = f2(c, k, t), f1(c, k, t)
    else:  # 6.4iii: f1 <= f2, equality exactly at k = t+3 and (k,t) = (5,1)
        hyp = _hyp_63_64(c, k, t) and k <= 2 * t + 3
        lhs, rhs = f1(c, k, t), f2(c, k, t)
        return IneqReport(
            lemma_id, c, k, t, None,
            holds=lhs <= rhs, lhs=lhs, rhs=rhs, margin=rhs - lhs,
            hypothesis_ok=hyp, equality=lhs == rhs,
        )
    return IneqReport(
        lemma_id, c, k, t, s if lemma_id == "6.1i" else None,
        holds=lhs < rhs, lhs=lhs, rhs=rhs, margin=rhs - lhs,
        hypothesis_ok=hyp, equality=lhs == rhs,
    )


def hypothesis_grid(lemma_id: str, c_max: int = 12, t_max: int = 8, k_slack: int = 8):
    """All in-hypothesis parameter points of one lemma with c <= c_max,
    t <= t_max, k <= 3t + k_slack, yielded as (c, k, t, s) tuples."""
    for t in range(1, t_max + 1):
        for c in range(2, c_max + 1):
            for k in range(t + 2, 3 * t + k_slack + 1):
                if lemma_id in ("6.1i", "6.1ii"):
                    if not _hyp_61(c, k, t):
                        continue
                    if lemma_id == "6.1i":
                        for s in range(t, k - 1):
                            yield c, k, t, s
                    else:
                        yield c, k, t, None
                else:
                    base = _hyp_63_64(c, k, t)
                    if lemma_id == "6.2ii":
                        base = base and k == t + 3
                    elif lemma_id == "6.4ii":
                        base = base and k >= 2 * t + 4
                    elif lemma_id == "6.4iii":
                        base = base and k <= 2 * t + 3
                    if base:
                        yield c, k, t, None


def verify_inequality_grid(
    lemma_ids=LEMMA_IDS, c_max: int = 12, t_max: int = 8, k_slack: int = 8, threads: int = 1
) -> list[IneqReport]:
    """Evaluate the whole battery on its hypothesis grids; sorted output."""
    points = []
    for lemma_id in lemma_ids:
        for c, k, t, s in hypothesis_grid(lemma_id, c_max, t_max, k_slack):
            points.append((lemma_id, c, k, t, s))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda p: check_inequality(*p), points))
    else:
        reports = [check_inequality(*p) for p in points]
    reports.sort(key=lambda r: (r.lemma_id, r.c, r.k, r.t, r.s if r.s is not None else -1))
    return reports
