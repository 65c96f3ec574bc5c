"""Effective sample size, regime cases and the protocol's resolution choice.

Case boundaries use base-2 logarithms (they count bits); ``K0`` and the
``log^2 N`` factors use natural logarithms.
"""

from dataclasses import dataclass
import enum
import math

from .wavelet import HAAR


class RegimeCase(enum.IntEnum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4
    CASE5 = 5


DEFAULT_C3 = 4.0


@dataclass(frozen=True)
class RegimeParams:
    m: int
    n: int
    l: int
    r: float

    def __post_init__(self):
        for name in ("m", "n", "l"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")

    @property
    def N(self):
        return self.m * self.n

    def require_protocol_range(self):
        if self.l < 4:
            raise ValueError(f"the protocol assumes l >= 4, got l={self.l}")
        if not 0.5 < self.r < 1.0:
            raise ValueError(f"the Haar protocol needs r in (1/2, 1), got r={self.r}")


@dataclass(frozen=True)
class RegimePlan:
    case_id: RegimeCase
    n_ess: float
    H: int
    K: int
    K0: float
    c3: float


def _terms(p):
    """log2 of the five candidate terms of the effective sample size."""
    r = p.r
    lm, ln_, ll = math.log2(p.m), math.log2(p.n), math.log2(p.l)
    a = (2 * r + 1) / (2 * r + 2)
    return (
        a * (p.l + lm + ln_),  # (2^l m n)^{(2r+1)/(2r+2)}
        ll + lm,  # l m
        (2 * r + 1) * (ll + lm),  # (l m)^{2r+1}
        a * (ll + lm + ln_),  # (l m n)^{(2r+1)/(2r+2)}
        lm + ln_,  # m n
    )


def log2_n_ess(p):
    A, B, C, D, E = _terms(p)
    return min(max(min(A, B), min(C, D)), E)


def n_ess(p):
    """{[(2^l mn)^a ∧ lm] ∨ [(lm)^{2r+1} ∧ (lmn)^a]} ∧ mn with a = (2r+1)/(2r+2)."""
    return 2.0 ** log2_n_ess(p)


def log2_n_ess_piecewise(p):
    """The same quantity through its four (m, n) regimes."""
    A, B, C, D, E = _terms(p)
    r, m, n = p.r, p.m, p.n
    if m >= n ** (2 * r + 1):
        return min(A, B, E)
    if n ** (2 * r) < m and n <= m ** (2 * r + 1):
        return min(max(D, B), E)
    if m <= n ** (2 * r) and n <= m ** (2 * r + 1):
        return min(D, E)
    return min(C, D, E)


def n_ess_piecewise(p):
    return 2.0 ** log2_n_ess_piecewise(p)


def attaining_case(p):
    """Case whose term realises the effective sample size.

    Follows the min/max structure of the formula, so a term that merely
    ties the result in value without being selected is not reported.  Exact
    ties inside a comparison go to the lower case number.
    """
    A, B, C, D, E = _terms(p)
    left = (A, RegimeCase.CASE1) if A <= B else (B, RegimeCase.CASE2)
    right = (C, RegimeCase.CASE3) if C <= D else (D, RegimeCase.CASE4)
    if left[0] > right[0] or (left[0] == right[0] and left[1] < right[1]):
        best = left
    else:
        best = right
    return best[1] if best[0] <= E else RegimeCase.CASE5


def listed_cases(p):
    """All cases whose stated parameter conditions hold, in listed order."""
    r, m, n, l = p.r, p.m, p.n, p.l
    q = 2 * r + 1
    out = []
    if m >= n**q and 1 <= l <= math.log2(m / n**q) / q:
        out.append(RegimeCase.CASE1)
    if m > n ** (2 * r) and max(math.log2(m / n**q) / q, n**q / m) <= l <= n:
        out.append(RegimeCase.CASE2)
    if n > m**q and 1 <= l <= n ** (1 / q) / m:
        out.append(RegimeCase.CASE3)
    if m < n**q and max(n ** (1 / q) / m, 1) <= l <= min(n**q / m, (m * n) ** (1 / q)):
        out.append(RegimeCase.CASE4)
    if l >= min(n, (m * n) ** (1 / q)):
        out.append(RegimeCase.CASE5)
    return out


def classify_listed(p):
    """First case in listed order whose stated conditions hold.

    The stated conditions omit logarithmic factors at the boundaries, so
    this can disagree with :func:`attaining_case` near a boundary; tuples
    matching no condition fall back to the attaining case.
    """
    cases = listed_cases(p)
    return cases[0] if cases else attaining_case(p)


def classify(p):
    """Regime case of ``p``: the term that attains the effective sample size."""
    return attaining_case(p)


def _target_log2(case, p, theory_constants, c_inner):
    r, m, n, l = p.r, p.m, p.n, p.l
    N = max(m * n, 2)
    inner = math.log2(2000 * math.log(N) ** 2) if theory_constants else math.log2(c_inner)
    if case is RegimeCase.CASE1:
        return (l + math.log2(m * n)) / (2 * r + 2)
    if case is RegimeCase.CASE2:
        return math.log2(l * m) / (2 * r + 1)
    if case is RegimeCase.CASE3:
        return math.log2(l * m) - inner
    if case is RegimeCase.CASE4:
        return math.log2(l * m * n) / (2 * r + 2) - inner
    # extra bits are discarded: Case-4 target with l replaced by n ∧ (mn)^{1/(2r+1)}
    l_star = min(n, (m * n) ** (1 / (2 * r + 1)))
    return math.log2(l_star * m * n) / (2 * r + 2) - inner


def choose_resolution(p, case=None, family=HAAR, theory_constants=False, c_inner=1.0):
    """Smallest H >= 0 with 2^{2S+2} 2^H >= target(case)."""
    case = classify(p) if case is None else RegimeCase(case)
    target = _target_log2(case, p, theory_constants, c_inner)
    H = max(0, math.ceil(target - family.slots - 1e-12))
    return H, 1 << H


def k0(K, N, c3=DEFAULT_C3):
    """Truncation level c3 sqrt(K) ln N."""
    if N < 2:
        raise ValueError("K0 needs N >= 2")
    return c3 * math.sqrt(K) * math.log(N)


def c3_lower_bound(c2, r):
    """Threshold 400 (r + 1) c2 that c3 must exceed given a sub-exponential constant c2."""
    return 400.0 * (r + 1.0) * c2


def plan(p, c3=DEFAULT_C3, family=HAAR, theory_constants=False, c_inner=1.0):
    case = classify(p)
    H, K = choose_resolution(p, case, family, theory_constants, c_inner)
    # N = 1 would give K0 = 0; clamp to N = 2
    return RegimePlan(case, n_ess(p), H, K, k0(K, max(p.N, 2), c3), c3)
