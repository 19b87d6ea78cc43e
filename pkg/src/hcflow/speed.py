"""Speed functions phi(H) given as expressions in the single variable H.

Grammar (whitespace-insensitive):

    expr   = term { ("+" | "-") term }
    term   = factor { ("*" | "/") factor }
    factor = base [ "^" number ]
    base   = "H" | number | ident "(" expr ")" | "(" expr ")"
    ident  = "exp" | "log" | "sqrt" | "sinh" | "cosh"

Evaluation runs on second-order dual numbers, so phi, phi' and phi'' come out
of a single pass with no finite differencing.  Admissibility of a speed for
the flow is judged on a sample grid; the report is numerical evidence, not a
proof, and says so.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np


class SpeedParseError(ValueError):
    """Syntax error in a speed expression; carries the source position."""

    def __init__(self, message: str, source: str, pos: int):
        self.pos = pos
        self.source = source
        super().__init__(f"{message} at position {pos}: {source!r}")


class SpeedDomainError(ValueError):
    """Evaluation left the domain (log of nonpositive value, etc.);
    carries the offending curvature value."""

    def __init__(self, message: str, alpha):
        self.alpha = alpha
        super().__init__(f"{message} at H = {alpha!r}")


# ---------------------------------------------------------------------------
# second-order dual numbers


@dataclass
class Dual2:
    """Value together with first and second derivative; payloads may be
    floats or same-shape numpy arrays."""

    a: object
    b: object
    c: object

    def __add__(self, o):
        return Dual2(self.a + o.a, self.b + o.b, self.c + o.c)

    def __sub__(self, o):
        return Dual2(self.a - o.a, self.b - o.b, self.c - o.c)

    def __mul__(self, o):
        return Dual2(self.a * o.a,
                     self.b * o.a + self.a * o.b,
                     self.c * o.a + 2.0 * self.b * o.b + self.a * o.c)

    def __truediv__(self, o):
        v = self.a / o.a
        d1 = (self.b - v * o.b) / o.a
        d2 = (self.c - 2.0 * d1 * o.b - v * o.c) / o.a
        return Dual2(v, d1, d2)

    def chain(self, f, df, d2f):
        """Apply a scalar function given its value and two derivatives at self.a."""
        return Dual2(f, df * self.b, d2f * self.b * self.b + df * self.c)


def _const(x, like):
    if isinstance(like, np.ndarray):
        z = np.zeros_like(like)
        return Dual2(np.full_like(like, x), z, z.copy())
    return Dual2(float(x), 0.0, 0.0)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: float


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|([A-Za-z_][A-Za-z_0-9]*)|([-+*/^()]))")

_FUNCTIONS = ("exp", "log", "sqrt", "sinh", "cosh")


def _tokenize(src: str):
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            raise SpeedParseError(f"unexpected character {stripped[0]!r}", src,
                                  len(src) - len(stripped))
        num, ident, sym = m.groups()
        tokpos = m.start(1) if num else m.start(2) if ident else m.start(3)
        if num:
            out.append(("num", float(num), tokpos))
        elif ident:
            out.append(("ident", ident, tokpos))
        else:
            out.append(("sym", sym, tokpos))
        pos = m.end()
    out.append(("end", None, len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_sym(self, s):
        kind, val, pos = self.take()
        if kind != "sym" or val != s:
            raise SpeedParseError(f"expected {s!r}", self.src, pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise SpeedParseError(f"unexpected trailing input {val!r}", self.src, pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "+-":
                self.take()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "*/":
                self.take()
                node = BinOp(val, node, self.factor())
            else:
                return node

    def factor(self):
        node = self.base()
        kind, val, _ = self.peek()
        if kind == "sym" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num":
                raise SpeedParseError("exponent must be a number literal", self.src, pos)
            node = Pow(node, float(val))
        return node

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val == "H":
                return Var()
            if val in _FUNCTIONS:
                self.expect_sym("(")
                inner = self.expr()
                self.expect_sym(")")
                return Call(val, inner)
            raise SpeedParseError(f"unknown identifier {val!r}", self.src, pos)
        if kind == "sym" and val == "(":
            inner = self.expr()
            self.expect_sym(")")
            return inner
        raise SpeedParseError("expected 'H', a number, a function call or '('",
                              self.src, pos)


def _first_bad(alpha, mask):
    """First offending alpha under a boolean violation mask (scalar or array)."""
    if isinstance(alpha, np.ndarray):
        idx = int(np.argmax(mask))
        return float(np.ravel(alpha)[idx]) if np.ndim(alpha) else float(alpha)
    return float(alpha)


def _eval(node, x: Dual2, alpha):
    if isinstance(node, Num):
        return _const(node.value, x.a)
    if isinstance(node, Var):
        return Dual2(x.a, x.b, x.c)
    if isinstance(node, BinOp):
        l = _eval(node.left, x, alpha)
        r = _eval(node.right, x, alpha)
        if node.op == "+":
            return l + r
        if node.op == "-":
            return l - r
        if node.op == "*":
            return l * r
        if np.any(r.a == 0):
            raise SpeedDomainError("division by zero", _first_bad(alpha, r.a == 0))
        return l / r
    if isinstance(node, Pow):
        b = _eval(node.base, x, alpha)
        p = node.exponent
        neg = b.a < 0 if not isinstance(b.a, np.ndarray) else np.any(b.a < 0)
        if neg and p != round(p):
            raise SpeedDomainError("fractional power of a negative value",
                                   _first_bad(alpha, np.asarray(b.a) < 0))
        zero = b.a == 0 if not isinstance(b.a, np.ndarray) else np.any(b.a == 0)
        if zero and p < 0:
            raise SpeedDomainError("negative power of zero", _first_bad(alpha, np.asarray(b.a) == 0))
        v = b.a ** p
        return b.chain(v, p * b.a ** (p - 1.0), p * (p - 1.0) * b.a ** (p - 2.0))
    if isinstance(node, Call):
        g = _eval(node.arg, x, alpha)
        if node.name == "exp":
            e = np.exp(g.a)
            return g.chain(e, e, e)
        if node.name == "log":
            if np.any(np.asarray(g.a) <= 0):
                raise SpeedDomainError("log of a nonpositive value",
                                       _first_bad(alpha, np.asarray(g.a) <= 0))
            return g.chain(np.log(g.a), 1.0 / g.a, -1.0 / (g.a * g.a))
        if node.name == "sqrt":
            if np.any(np.asarray(g.a) < 0):
                raise SpeedDomainError("sqrt of a negative value",
                                       _first_bad(alpha, np.asarray(g.a) < 0))
            r = np.sqrt(g.a)
            return g.chain(r, 0.5 / r, -0.25 / (r * g.a))
        if node.name == "sinh":
            return g.chain(np.sinh(g.a), np.cosh(g.a), np.sinh(g.a))
        if node.name == "cosh":
            return g.chain(np.cosh(g.a), np.sinh(g.a), np.cosh(g.a))
    raise TypeError(f"unknown node {node!r}")


@dataclass(frozen=True)
class SpeedFunction:
    """Parsed speed expression; evaluates phi with two derivatives."""

    source: str
    ast: object

    @classmethod
    def parse(cls, source: str) -> "SpeedFunction":
        return cls(source=source, ast=_Parser(source).parse())

    def eval(self, alpha):
        """Return (phi, phi', phi'') at alpha (scalar or ndarray)."""
        arr = isinstance(alpha, np.ndarray)
        if arr:
            x = Dual2(alpha.astype(float), np.ones_like(alpha, dtype=float),
                      np.zeros_like(alpha, dtype=float))
        else:
            x = Dual2(float(alpha), 1.0, 0.0)
        out = _eval(self.ast, x, alpha)
        return out.a, out.b, out.c

    def __call__(self, alpha):
        return self.eval(alpha)[0]


def parse_speed(source: str) -> SpeedFunction:
    """Parse an expression in H into a SpeedFunction."""
    return SpeedFunction.parse(source)


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class ConditionVerdict:
    status: str                 # "pass" | "fail" | "inconclusive"
    witness: float | None = None
    value: float | None = None
    note: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    """Grid-sampled evidence for the four speed conditions.

    i)   phi > 0 and phi' > 0 on (0, inf)
    ii)  phi -> inf
    iii) phi' alpha^2 / phi -> inf
    iv)  phi'' alpha >= -2 phi'

    Verdicts are per-condition pass/fail/inconclusive with numeric witnesses;
    a convex speed promotes ii)-iv) (they follow from convexity and i)).
    """

    expr: str
    alpha_min: float
    alpha_max: float
    points: int
    conditions: dict = field(default_factory=dict)
    convex: bool = False
    notes: tuple = ()

    @property
    def admissible(self) -> bool:
        return all(v.status == "pass" for v in self.conditions.values())

    def summary(self) -> str:
        lines = [f"speed: {self.expr}",
                 f"grid:  [{self.alpha_min:g}, {self.alpha_max:g}] x {self.points} (log-spaced)"]
        label = {
            "i": "i   phi > 0, phi' > 0",
            "ii": "ii  phi -> inf",
            "iii": "iii phi'*H^2/phi -> inf",
            "iv": "iv  phi''*H + 2 phi' >= 0",
        }
        for key in ("i", "ii", "iii", "iv"):
            v = self.conditions[key]
            extra = ""
            if v.witness is not None:
                extra = f"  [H = {v.witness:.6g}, value = {v.value:.6g}]"
            if v.note:
                extra += f"  ({v.note})"
            lines.append(f"  condition {label[key]:28s} {v.status}{extra}")
        lines.append(f"  convex speed: {'yes' if self.convex else 'no'}")
        lines.append(f"  admissible (sampled evidence, not a proof): "
                     f"{'yes' if self.admissible else 'no'}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "expr": self.expr,
            "grid": {"alpha_min": self.alpha_min, "alpha_max": self.alpha_max,
                     "points": self.points},
            "conditions": {k: {"status": v.status, "witness": v.witness,
                               "value": v.value, "note": v.note}
                           for k, v in self.conditions.items()},
            "convex": self.convex,
            "admissible": self.admissible,
            "notes": list(self.notes),
        }


def _tail_verdict(alpha, q, threshold, what):
    """Judge a 'quantity must diverge' condition from its tail behaviour."""
    k = int(0.9 * len(alpha))
    tail = q[k:]
    at = alpha[k:]
    if not np.all(np.isfinite(tail)):
        # overflow to +inf still witnesses divergence; NaN does not
        if np.any(np.isnan(tail)):
            return ConditionVerdict("inconclusive", note=f"{what} not finite on the tail grid")
        tail = tail[np.isfinite(tail) | (tail == np.inf)]
        if tail.size and np.max(tail) == np.inf:
            return ConditionVerdict("pass", note=f"{what} overflows to inf on the grid")
    drops = np.nonzero(np.diff(tail) < -1e-12 * np.maximum(np.abs(tail[:-1]), 1.0))[0]
    if drops.size:
        j = k + int(drops[0]) + 1
        return ConditionVerdict("fail", witness=float(alpha[j]), value=float(q[j]),
                                note=f"{what} decreases on the tail grid")
    top = float(tail[-1])
    if top >= threshold:
        return ConditionVerdict("pass", witness=float(at[-1]), value=top)
    growth = (top - float(tail[0])) / max(abs(top), 1e-300)
    if growth < 1e-3:
        return ConditionVerdict("fail", witness=float(at[-1]), value=top,
                                note=f"{what} plateaus below the threshold {threshold:g}")
    return ConditionVerdict("inconclusive", witness=float(at[-1]), value=top,
                            note=f"{what} still below the threshold {threshold:g} at the grid end")


def convexity_shortcut(speed: SpeedFunction, alpha_min: float = 1e-6,
                       alpha_max: float = 1e13, points: int = 241) -> bool:
    """True when phi'' >= 0 and phi, phi' > 0 on the sample grid; convexity
    plus condition i) implies conditions ii)-iv)."""
    alpha = np.geomspace(alpha_min, alpha_max, points)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            phi, d1, d2 = speed.eval(alpha)
        except SpeedDomainError:
            return False
    tol = 1e-12 * np.maximum(np.abs(d2), 1.0)
    ok = (phi > 0) & (d1 > 0) & (d2 >= -tol)
    return bool(np.all(ok | np.isinf(phi)))


def check_admissibility(speed: SpeedFunction | str, alpha_min: float = 1e-6,
                        alpha_max: float = 1e13, points: int = 241,
                        phi_threshold: float = 1e3, ratio_threshold: float = 1e3,
                        attest_limits: bool = False) -> AdmissibilityReport:
    """Sample the four speed conditions on a log grid and report verdicts.

    The grid must span at least [1e-6, 1e6]; the default reaches further so
    slowly growing powers clear the divergence thresholds.  The asymptotic
    conditions ii) and iii) pass when the quantity is nondecreasing on the
    top decile and reaches the threshold; a plateau is reported as a fail
    with a witness, anything else as inconclusive.  Inconclusive asymptotic
    verdicts are promoted by convexity or by attest_limits=True.
    """
    if isinstance(speed, str):
        speed = parse_speed(speed)
    if not (0 < alpha_min < alpha_max) or alpha_min > 1e-6 or alpha_max < 1e6:
        raise ValueError("grid must span at least [1e-6, 1e6]")
    if points < 200:
        raise ValueError("grid needs at least 200 points")

    alpha = np.geomspace(alpha_min, alpha_max, points)
    notes = ["verdicts are sampled numerical evidence on the stated grid, not a proof"]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            phi, d1, d2 = speed.eval(alpha)
        except SpeedDomainError as e:
            bad = ConditionVerdict("fail", witness=float(e.alpha), note=str(e))
            conds = {k: bad for k in ("i", "ii", "iii", "iv")}
            return AdmissibilityReport(speed.source, alpha_min, alpha_max, points,
                                       conditions=conds, convex=False, notes=tuple(notes))
        phi = np.broadcast_to(np.asarray(phi, dtype=float), alpha.shape).copy()
        d1 = np.broadcast_to(np.asarray(d1, dtype=float), alpha.shape).copy()
        d2 = np.broadcast_to(np.asarray(d2, dtype=float), alpha.shape).copy()

        # i) positivity of phi and phi'
        viol = ~((phi > 0) & (d1 > 0))
        if np.any(viol):
            j = int(np.argmax(viol))
            cond_i = ConditionVerdict("fail", witness=float(alpha[j]),
                                      value=float(phi[j] if not phi[j] > 0 else d1[j]),
                                      note="phi <= 0" if not phi[j] > 0 else "phi' <= 0")
        else:
            cond_i = ConditionVerdict("pass")

        # iv) phi'' alpha + 2 phi' >= 0 up to roundoff
        margin = d2 * alpha + 2.0 * d1
        tol = 1e-12 * (np.abs(d2 * alpha) + np.abs(2.0 * d1) + 1.0)
        bad_iv = (margin < -tol) | np.isnan(margin)
        if np.any(bad_iv):
            j = int(np.argmax(bad_iv))
            cond_iv = ConditionVerdict("fail", witness=float(alpha[j]), value=float(margin[j]))
        else:
            cond_iv = ConditionVerdict("pass")

        cond_ii = _tail_verdict(alpha, phi, phi_threshold, "phi")
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ratio = d1 * alpha * alpha / phi
        cond_iii = _tail_verdict(alpha, ratio, ratio_threshold, "phi'*H^2/phi")

    convex = convexity_shortcut(speed, alpha_min, alpha_max, points)
    conds = {"i": cond_i, "ii": cond_ii, "iii": cond_iii, "iv": cond_iv}
    if convex and cond_i.status == "pass":
        for key in ("ii", "iii", "iv"):
            if conds[key].status != "pass":
                conds[key] = ConditionVerdict("pass", note="promoted: convex speed with phi' > 0")
    if attest_limits:
        for key in ("ii", "iii"):
            if conds[key].status == "inconclusive":
                conds[key] = ConditionVerdict("pass", note="promoted: user attested the limit")
                notes.append(f"condition {key} accepted on user attestation")

    return AdmissibilityReport(speed.source, alpha_min, alpha_max, points,
                               conditions=conds, convex=convex, notes=tuple(notes))
