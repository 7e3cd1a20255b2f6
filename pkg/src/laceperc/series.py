"""Exact truncated power series for the 1/(2d) expansion of the threshold.

Everything here is fractions.Fraction arithmetic; no floats. A TruncatedSeries
carries a variable tag ("t" for 1/(2d), "s" for 1/(2d-1) = 1/sigma) and dense
coefficients through its order M; coefficients beyond M are never fabricated.
BivariatePoly holds polynomials in (q, t) with q = 2d * p, and the fixed-point
solver turns the expansion coefficients' leading polynomials into the q-series
q = 1/(1 + t * Pi(q, t)), whose truncation gives the threshold series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class TagMismatchError(ValueError):
    """Operands carry different variable tags."""


class NonInvertibleError(ValueError):
    """Series has zero constant term, so no multiplicative inverse exists."""


class NoConvergenceError(RuntimeError):
    """Fixed-point iteration failed to stabilize within its round budget."""


Rational = Fraction


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact series arithmetic")
    return Fraction(x)


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series known exactly through order len(coeffs) - 1."""

    var: str
    coeffs: tuple

    def __post_init__(self):
        if self.var not in ("t", "s"):
            raise ValueError("variable tag must be 't' or 's'")
        if len(self.coeffs) == 0:
            raise ValueError("series needs at least the constant term")
        object.__setattr__(self, "coeffs", tuple(_frac(c) for c in self.coeffs))

    @classmethod
    def make(cls, var, coeffs, order=None) -> "TruncatedSeries":
        cs = [_frac(c) for c in coeffs]
        if order is not None:
            if order + 1 < len(cs):
                raise ValueError("more coefficients than the stated order")
            cs += [Fraction(0)] * (order + 1 - len(cs))
        return cls(var, tuple(cs))

    @classmethod
    def constant(cls, var, value, order) -> "TruncatedSeries":
        return cls.make(var, [value], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def _check_tag(self, other: "TruncatedSeries"):
        if self.var != other.var:
            raise TagMismatchError(
                f"cannot combine series in {self.var!r} with series in {other.var!r}"
            )

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot extend a series beyond its known order")
        return TruncatedSeries(self.var, self.coeffs[: order + 1])

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            cs = list(self.coeffs)
            cs[0] += _frac(other)
            return TruncatedSeries(self.var, tuple(cs))
        self._check_tag(other)
        m = min(self.order, other.order)
        return TruncatedSeries(
            self.var, tuple(self.coeffs[k] + other.coeffs[k] for k in range(m + 1))
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.var, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-_frac(other))
        return self + (-other)

    def scale(self, c) -> "TruncatedSeries":
        c = _frac(c)
        return TruncatedSeries(self.var, tuple(c * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check_tag(other)
        m = min(self.order, other.order)
        out = [Fraction(0)] * (m + 1)
        for i, a in enumerate(self.coeffs[: m + 1]):
            if a == 0:
                continue
            for j in range(m + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return TruncatedSeries(self.var, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        a = self.coeffs
        if a[0] == 0:
            raise NonInvertibleError("constant term is zero")
        b = [Fraction(1) / a[0]]
        for k in range(1, self.order + 1):
            acc = Fraction(0)
            for j in range(1, k + 1):
                acc += a[j] * b[k - j]
            b.append(-acc / a[0])
        return TruncatedSeries(self.var, tuple(b))

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner); inner must have zero constant term."""
        if inner.coeffs[0] != 0:
            raise ValueError("inner series must have zero constant term")
        m = min(self.order, inner.order)
        res = TruncatedSeries.constant(inner.var, self.coeffs[m], m)
        for k in range(m - 1, -1, -1):
            res = res * inner.truncate(m) + self.coeffs[k]
        return res

    def shift_up(self) -> "TruncatedSeries":
        """Multiply by the variable; the order grows by one, exactly."""
        return TruncatedSeries(self.var, (Fraction(0),) + self.coeffs)

    def evaluate(self, value: Fraction) -> Fraction:
        value = _frac(value)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def to_json_dict(self) -> dict:
        return {
            "variable": self.var,
            "order": self.order,
            "coefficients": [[c.numerator, c.denominator] for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TruncatedSeries":
        coeffs = [Fraction(int(n), int(d)) for n, d in obj["coefficients"]]
        return cls.make(obj["variable"], coeffs, order=int(obj["order"]))

    def __str__(self):
        def fmt(c: Fraction) -> str:
            return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"

        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0 and not (k == 0 and self.order == 0):
                continue
            if k == 0:
                parts.append(fmt(c))
            elif k == 1:
                parts.append(f"{fmt(c)}*{self.var}")
            else:
                parts.append(f"{fmt(c)}*{self.var}^{k}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O({self.var}^{self.order + 1})"


def geometric_shift(var_out: str, order: int, sign: int) -> TruncatedSeries:
    """x/(1 - sign*x) as a series in var_out through the given order."""
    coeffs = [Fraction(0)] + [Fraction(sign ** (k - 1)) for k in range(1, order + 1)]
    return TruncatedSeries.make(var_out, coeffs)


def substitute_sigma_to_2d(a: TruncatedSeries) -> TruncatedSeries:
    """Rewrite a series in s = 1/(2d-1) as a series in t = 1/(2d).

    Uses s = t/(1-t) exactly; requires zero constant term so the truncation
    error O(s^{M+1}) stays O(t^{M+1}).
    """
    if a.var != "s":
        raise TagMismatchError("expected a series in s")
    if a.coeffs[0] != 0:
        raise ValueError("series must have zero constant term")
    return a.compose(geometric_shift("t", a.order, +1))


def substitute_2d_to_sigma(a: TruncatedSeries) -> TruncatedSeries:
    """Inverse change of variables, t = s/(1+s)."""
    if a.var != "t":
        raise TagMismatchError("expected a series in t")
    if a.coeffs[0] != 0:
        raise ValueError("series must have zero constant term")
    return a.compose(geometric_shift("s", a.order, -1))


@dataclass(frozen=True)
class BivariatePoly:
    """Sparse exact polynomial in (q, t) with a declared error order in t.

    terms maps (q_power, t_power) -> coefficient. The declared error order k
    means the polynomial represents its target only up to O(t^{k+1}) once
    q = q(t) is substituted, which bounds how far a solver may trust it.
    """

    terms: dict
    error_order: int

    def __post_init__(self):
        if self.error_order < 0:
            raise ValueError("error order must be >= 0")
        clean = {}
        for (a, b), c in self.terms.items():
            if a < 0 or b < 0:
                raise ValueError("powers must be nonnegative")
            c = _frac(c)
            if c != 0:
                clean[(int(a), int(b))] = c
        object.__setattr__(self, "terms", clean)

    def substitute(self, q: TruncatedSeries) -> TruncatedSeries:
        """Evaluate at q = q(t), truncated to q's order."""
        if q.var != "t":
            raise TagMismatchError("q must be a series in t")
        m = q.order
        out = TruncatedSeries.constant("t", 0, m)
        max_q = max((a for a, _ in self.terms), default=0)
        powers = [TruncatedSeries.constant("t", 1, m)]
        for _ in range(max_q):
            powers.append(powers[-1] * q)
        for (a, b), c in sorted(self.terms.items()):
            if b > m:
                continue
            piece = powers[a].scale(c)
            shifted = (Fraction(0),) * b + piece.coeffs[: m + 1 - b]
            out = out + TruncatedSeries("t", shifted)
        return out


@dataclass(frozen=True)
class FixedPointResult:
    q_series: TruncatedSeries
    pc_series: TruncatedSeries
    rounds: int


def solve_pc_fixed_point(pi_terms, M: int) -> FixedPointResult:
    """Iterate q <- 1/(1 + t*Pi(q, t)) to its exact order-M fixed point.

    pi_terms is a list of (sign, BivariatePoly) contributions to Pi. M must not
    exceed the smallest declared error order, since the q coefficients are only
    trusted that far. The iteration gains one exact order per round from q = 1,
    so it must stabilize within M+2 rounds; anything else means inconsistent
    inputs.
    """
    if M < 0:
        raise ValueError("order must be >= 0")
    for sign, _ in pi_terms:
        if sign not in (1, -1):
            raise ValueError("signs must be +1 or -1")
    if pi_terms:
        trust = min(p.error_order for _, p in pi_terms)
        if M > trust:
            raise ValueError(
                f"order {M} exceeds the declared validity {trust} of the inputs"
            )
    one = TruncatedSeries.constant("t", 1, M)
    q = one
    for rounds in range(1, M + 3):
        pi = TruncatedSeries.constant("t", 0, M)
        for sign, poly in pi_terms:
            pi = pi + poly.substitute(q).scale(sign)
        new_q = (one + pi.shift_up().truncate(M)).inverse()
        if new_q == q:
            pc = q.shift_up()
            return FixedPointResult(q_series=q, pc_series=pc, rounds=rounds)
        q = new_q
    raise NoConvergenceError(
        f"fixed point did not stabilize within {M + 2} rounds; inputs inconsistent"
    )


def evaluate_series(a: TruncatedSeries, d: int) -> Fraction:
    """Evaluate a t-series at t = 1/(2d), exactly."""
    if a.var != "t":
        raise TagMismatchError("expected a series in t")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return a.evaluate(Fraction(1, 2 * d))


def pi_hat_polynomials():
    """Leading (q, t) polynomials of the first three expansion coefficients.

    Signs follow the alternating sum Pi = Pi0 - Pi1 + Pi2; each polynomial is
    exact through t^2 once q(t) is substituted (declared error order 2).
    """
    pi0 = BivariatePoly({(2, 0): Fraction(1, 2), (0, 1): Fraction(5, 2)}, error_order=2)
    pi1 = BivariatePoly(
        {(1, 0): Fraction(1), (2, 0): Fraction(2), (0, 1): Fraction(4)}, error_order=2
    )
    pi2 = BivariatePoly({(0, 1): Fraction(10)}, error_order=2)
    return [(+1, pi0), (-1, pi1), (+1, pi2)]


def expansion(order: int) -> FixedPointResult:
    """The threshold expansion from the built-in coefficient polynomials."""
    return solve_pc_fixed_point(pi_hat_polynomials(), order)


# Reference threshold expansions in s = 1/(2d-1), zero constant term.
SITE_PC_IN_SIGMA = TruncatedSeries.make(
    "s",
    [
        0,
        1,
        Fraction(3, 2),
        Fraction(15, 4),
        Fraction(83, 4),
        Fraction(6577, 48),
        Fraction(119077, 96),
    ],
)

BOND_PC_IN_SIGMA = TruncatedSeries.make(
    "s",
    [0, 1, 0, Fraction(5, 2), Fraction(15, 2), 57, Fraction(4855, 12)],
)
