"""Powell's direction-set minimizer with Brent line searches.

Derivative-free and fully deterministic. The stopping rules and the
direction-replacement test follow the classic formulation used by common
scientific libraries, so run statistics are comparable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

GOLDEN = 1.618033988749895
CGOLD = 0.3819660112501051  # 2 - golden ratio
_MINTOL = 1.0e-11
_TINY = 1.0e-21


@dataclass(frozen=True)
class OptimizerConfig:
    xtol: float = 1e-4
    ftol: float = 1e-4
    max_iterations: int | None = None  # default 1000 * n_params
    max_evaluations: int | None = None  # default 1000 * n_params

    def __post_init__(self):
        if not (self.xtol > 0 and self.ftol > 0):
            raise ValueError("tolerances must be positive")
        for name in ("max_iterations", "max_evaluations"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class OptimizerResult:
    x_best: np.ndarray
    f_best: float
    n_evaluations: int
    n_iterations: int
    converged: bool
    termination_reason: str  # xtol | ftol | max_iter | max_eval | nonfinite
    history: list = field(default_factory=list)


class InvalidBracket(ValueError):
    pass


class _Stop(Exception):
    def __init__(self, reason):
        self.reason = reason


class _Objective:
    """Counts calls, remembers the best point, enforces the budget."""

    def __init__(self, f, max_evaluations):
        self.f = f
        self.max_evaluations = max_evaluations
        self.n = 0
        self.x_best = None
        self.f_best = np.inf

    def __call__(self, x):
        if self.n >= self.max_evaluations:
            raise _Stop("max_eval")
        self.n += 1
        val = float(self.f(x))
        if not np.isfinite(val):
            raise _Stop("nonfinite")
        if val < self.f_best:
            self.f_best = val
            self.x_best = np.array(x, dtype=float)
        return val


def bracket_minimum(phi: Callable[[float], float], xa=0.0, xb=1.0, grow_limit=110.0, maxiter=1000):
    """Expand downhill from (xa, xb) until a bracketing triple is found.

    Golden-ratio steps with parabolic extrapolation. Returns
    (xa, xb, xc, fa, fb, fc) with fb <= fa and fb <= fc.
    """
    fa, fb = phi(xa), phi(xb)
    if fa < fb:
        xa, xb, fa, fb = xb, xa, fb, fa
    xc = xb + GOLDEN * (xb - xa)
    fc = phi(xc)
    it = 0
    while fc < fb:
        tmp1 = (xb - xa) * (fb - fc)
        tmp2 = (xb - xc) * (fb - fa)
        val = tmp2 - tmp1
        denom = 2.0 * (_TINY if abs(val) < _TINY else val)
        w = xb - ((xb - xc) * tmp2 - (xb - xa) * tmp1) / denom
        wlim = xb + grow_limit * (xc - xb)
        it += 1
        if it > maxiter:
            raise RuntimeError("too many iterations while bracketing a minimum")
        if (w - xc) * (xb - w) > 0.0:
            fw = phi(w)
            if fw < fc:
                return xb, w, xc, fb, fw, fc
            if fw > fb:
                return xa, xb, w, fa, fb, fw
            w = xc + GOLDEN * (xc - xb)
            fw = phi(w)
        elif (w - wlim) * (wlim - xc) >= 0.0:
            w = wlim
            fw = phi(w)
        elif (w - wlim) * (xc - w) > 0.0:
            fw = phi(w)
            if fw < fc:
                xb, xc, w = xc, w, w + GOLDEN * (w - xc)
                fb, fc, fw = fc, fw, phi(w)
        else:
            w = xc + GOLDEN * (xc - xb)
            fw = phi(w)
        xa, xb, xc = xb, xc, w
        fa, fb, fc = fb, fc, fw
    return xa, xb, xc, fa, fb, fc


def brent_minimize(phi: Callable[[float], float], bracket, tol: float = 1.48e-8, maxiter: int = 500, fvals=None):
    """Minimize a scalar function inside a bracket (a, b, c).

    ``b`` must lie strictly between ``a`` and ``c`` with phi(b) no larger
    than phi at either end. ``fvals`` may carry the three known values to
    save evaluations. Golden-section steps, accelerated by parabolic
    interpolation when it is safe. Returns (t_min, phi_min).
    """
    a, b, c = (float(t) for t in bracket)
    fa, fb, fc = fvals if fvals is not None else (phi(a), phi(b), phi(c))
    if not (min(a, c) < b < max(a, c)):
        raise InvalidBracket(f"middle point {b} is not inside ({a}, {c})")
    if not (fb <= fa and fb <= fc):
        raise InvalidBracket("phi(b) must not exceed phi(a) or phi(c)")

    lo, hi = min(a, c), max(a, c)
    x = w = v = b
    fx = fw = fv = fb
    deltax = 0.0
    rat = 0.0
    for _ in range(maxiter):
        tol1 = tol * abs(x) + _MINTOL
        tol2 = 2.0 * tol1
        xmid = 0.5 * (lo + hi)
        if abs(x - xmid) < tol2 - 0.5 * (hi - lo):
            break
        if abs(deltax) <= tol1:
            deltax = lo - x if x >= xmid else hi - x
            rat = CGOLD * deltax
        else:
            tmp1 = (x - w) * (fx - fv)
            tmp2 = (x - v) * (fx - fw)
            p = (x - v) * tmp2 - (x - w) * tmp1
            tmp2 = 2.0 * (tmp2 - tmp1)
            if tmp2 > 0.0:
                p = -p
            tmp2 = abs(tmp2)
            dx_prev = deltax
            deltax = rat
            if tmp2 * (lo - x) < p < tmp2 * (hi - x) and abs(p) < abs(0.5 * tmp2 * dx_prev):
                rat = p / tmp2
                u = x + rat
                if (u - lo) < tol2 or (hi - u) < tol2:
                    rat = tol1 if xmid >= x else -tol1
            else:
                deltax = lo - x if x >= xmid else hi - x
                rat = CGOLD * deltax
        u = x + rat if abs(rat) >= tol1 else x + (tol1 if rat >= 0 else -tol1)
        fu = phi(u)
        if fu < fx:
            if u >= x:
                lo = x
            else:
                hi = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            # ties do not move the incumbent, so a flat function returns b
            if u < x:
                lo = u
            else:
                hi = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def _line_search(obj: _Objective, x, fx, direction, tol):
    def phi(t):
        return obj(x + t * direction)

    xa, xb, xc, fa, fb, fc = bracket_minimum(phi, 0.0, 1.0)
    if fb > fx:  # pragma: no cover - bracket always contains t=0 or better
        return fx, x, np.zeros_like(direction)
    t, ft = brent_minimize(phi, (xa, xb, xc), tol=tol, fvals=(fa, fb, fc))
    step = t * direction
    return ft, x + step, step


def minimize_powell(f: Callable[[np.ndarray], float], x0, config: OptimizerConfig | None = None) -> OptimizerResult:
    """Minimize ``f`` from ``x0`` with Powell's conjugate-direction method.

    Each outer iteration line-minimizes along every direction in the set,
    then tries the net displacement of the sweep; when Powell's test
    accepts it, that displacement replaces the direction of largest
    decrease. Stops when the sweep's relative decrease in f is below
    ``ftol``, its relative move in x is below ``xtol``, or a budget runs out.
    """
    config = config or OptimizerConfig()
    x = np.array(x0, dtype=float).ravel()
    n = x.size
    max_iter = config.max_iterations or 1000 * n
    max_eval = config.max_evaluations or 1000 * n
    obj = _Objective(f, max_eval)
    direc = np.eye(n)
    line_tol = config.xtol * 100
    history = []
    iterations = 0
    reason = "max_iter"

    try:
        fval = obj(x)
        x1 = x.copy()
        while True:
            fx = fval
            bigind = 0
            delta = 0.0
            for i in range(n):
                fx2 = fval
                fval, x, step = _line_search(obj, x, fval, direc[i], line_tol)
                if fx2 - fval > delta:
                    delta = fx2 - fval
                    bigind = i
            iterations += 1
            history.append(obj.f_best)
            if 2.0 * (fx - fval) <= config.ftol * (abs(fx) + abs(fval)) + 1e-20:
                reason = "ftol"
                break
            if np.max(np.abs(x - x1)) <= config.xtol * (np.max(np.abs(x1)) + config.xtol):
                reason = "xtol"
                break
            if obj.n >= max_eval:
                reason = "max_eval"
                break
            if iterations >= max_iter:
                reason = "max_iter"
                break

            direc1 = x - x1
            x2 = x + direc1
            x1 = x.copy()
            fx2 = obj(x2)
            if fx > fx2:
                t = 2.0 * (fx + fx2 - 2.0 * fval)
                temp = fx - fval - delta
                t *= temp * temp
                temp = fx - fx2
                t -= delta * temp * temp
                if t < 0.0:
                    fval, x, step = _line_search(obj, x, fval, direc1, line_tol)
                    if np.any(step):
                        direc[bigind] = direc[-1]
                        direc[-1] = step
    except _Stop as stop:
        reason = stop.reason

    return OptimizerResult(
        x_best=obj.x_best if obj.x_best is not None else np.array(x0, dtype=float),
        f_best=obj.f_best,
        n_evaluations=obj.n,
        n_iterations=iterations,
        converged=reason in ("ftol", "xtol"),
        termination_reason=reason,
        history=history,
    )
