"""Density function, resonant neighborhoods and overlap statistics.

``density`` computes D_F(eps): the plain area of {F < eps} for bounded
bodies, and the normalized area of the integer-periodized sublevel set
over the unit square for rational skeletons (identical to the value over
the fundamental rectangle by Z^2-periodicity).  Closed forms are
registered for the box and hyperbola shapes; everything else goes through
adaptive quadrature or stratified Monte Carlo.

``resonant_membership`` decides x in B_q(F, eps) by minimizing
F(x - p/q) over a candidate lattice set: a central box around round(q*x)
plus segments along each skeleton direction out to the arc distance where
the (safety-doubled) fitted tube width drops below the candidate's
perpendicular offset.  For q <= q_exhaustive it falls back to a full
window enumeration; the two paths agree exactly whenever both run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad as _scipy_quad

from .errors import IrrationalSkeleton, NonConvergent, SkeletonMismatch
from .sampling import indicator_estimate
from .starbody import (Abs, Expr, GeoMean, HalfLine, Max, Scale,
                       LineGeometry, body_geometry, extract_skeleton,
                       fundamental_rectangle)

# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    epsilon: float
    value: float
    method: str  # analytic | quadrature | montecarlo
    stderr: float = 0.0


@dataclass(frozen=True)
class ResonantSpec:
    """B_q(F, eps); restricted adds gcd(p1*r_hat, q) = gcd(p2*s_hat, q) = 1."""

    q: int
    epsilon: float
    restricted: bool = False

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class ResonantHit:
    x: tuple
    q: int
    p: tuple
    value: float


# ---------------------------------------------------------------------------
# Analytic density registry
# ---------------------------------------------------------------------------


def _axis_coef(e: Expr):
    """|a| if e is Abs(a, 0), |b| if Abs(0, b), tagged by axis; else None."""
    if not isinstance(e, Abs):
        return None
    a, b = e.form.floats()
    if b == 0.0:
        return ("x", abs(a))
    if a == 0.0:
        return ("y", abs(b))
    return None


def analytic_density_info(f: Expr):
    """Detect a registered closed-form shape.

    Returns (kind, coef) with kind 'box' (F = max(a|x1|, b|x2|), coef = a*b)
    or 'hyperbola' (F = sqrt(a b |x1 x2|), coef = a*b), or None.  Scale
    nodes fold into the coefficients.
    """
    scale = 1.0
    while isinstance(f, Scale):
        scale *= float(f.factor)
        f = f.child
    if isinstance(f, (Max, GeoMean)) and len(f.children) == 2:
        tags = [_axis_coef(c) for c in f.children]
        if None not in tags and {tags[0][0], tags[1][0]} == {"x", "y"}:
            coef = tags[0][1] * tags[1][1] * scale * scale
            return ("box" if isinstance(f, Max) else "hyperbola", coef)
    return None


def _analytic_density(kind: str, coef: float, eps: float) -> float:
    if kind == "box":
        # bounded: |{max(a|x1|, b|x2|) < eps}| = 4 eps^2 / (a b)
        return 4.0 * eps * eps / coef
    # periodized hyperbola: per unit square, with c = eps^2/(a b),
    # 4*(c + c*log(1/(4c))) until the strips merge at c = 1/4
    c = eps * eps / coef
    if c >= 0.25:
        return 1.0
    return 4.0 * c * (1.0 + math.log(1.0 / (4.0 * c)))


# ---------------------------------------------------------------------------
# Membership kernel
# ---------------------------------------------------------------------------

_BATCH_K_CAP = 64      # tube steps per direction in vectorized hit tests
_SCALAR_K_CAP = 4096   # tube steps in exact single-point minimization
_WINDOW_CAP = 600
_IRR_STEP = 0.5


class _Kernel:
    """Candidate generation and evaluation for one (F, q, eps) problem."""

    def __init__(self, f: Expr, q: int, eps: float, restricted: bool = False):
        self.f = f
        self.q = q
        self.eps = eps
        self.eps_s = q * eps
        self.geo = body_geometry(f)
        self.restricted = restricted
        if restricted:
            if not self.geo.skeleton.rational_only:
                raise IrrationalSkeleton(
                    "restricted resonant sets need a rational skeleton")
            rect = fundamental_rectangle(self.geo.skeleton)
            self.r_hat, self.s_hat = rect.r_hat, rect.s_hat

    # -- shared helpers ----------------------------------------------------

    def _allowed(self, p: np.ndarray) -> np.ndarray:
        if not self.restricted:
            return np.ones(len(p), dtype=bool)
        pi = p.astype(np.int64)
        g1 = np.gcd(np.abs(pi[:, 0] * self.r_hat) % self.q, self.q)
        g2 = np.gcd(np.abs(pi[:, 1] * self.s_hat) % self.q, self.q)
        return (g1 == 1) & (g2 == 1)

    def _box_radius(self, tau: float) -> int:
        c = max(self.geo.offline_min, 1e-12)
        return int(max(1, min(64, math.ceil(tau / c) + 1)))

    # -- exact single-point minimization ------------------------------------

    def minimize(self, x) -> tuple[float, tuple[int, int]]:
        """Minimum of F(q*x - p) over the candidate lattice set (raw scale)."""
        y = self.q * np.asarray(x, dtype=float)
        p0 = np.round(y)
        z0 = y - p0
        v0 = float(self.f.eval_xy(z0[0], z0[1]))
        tau = min(v0, self.eps_s) * (1.0 + 1e-9) + 1e-300
        cands = [self._box_points(p0, tau)]
        for lg in self.geo.lines:
            cands.append(self._tube_points(lg, y, p0, tau, _SCALAR_K_CAP))
        p = np.unique(np.concatenate(cands, axis=0), axis=0)
        ok = self._allowed(p)
        if not ok.any():
            return math.inf, (0, 0)
        p = p[ok]
        z1 = y[0] - p[:, 0]
        z2 = y[1] - p[:, 1]
        vals = self.f.eval_xy(z1, z2)
        i = _pick_minimizer(vals, z1, z2, p)
        return float(vals[i]), (int(p[i, 0]), int(p[i, 1]))

    def minimize_exhaustive(self, x) -> tuple[float, tuple[int, int]]:
        """Same minimum through a full window enumeration (small q)."""
        y = self.q * np.asarray(x, dtype=float)
        p0 = np.round(y)
        z0 = y - p0
        v0 = float(self.f.eval_xy(z0[0], z0[1]))
        tau = min(v0, self.eps_s) * (1.0 + 1e-9) + 1e-300
        reach = 0.0
        for lg in self.geo.lines:
            if lg.half.rational:
                L = math.hypot(*lg.half.int_direction())
                reach = max(reach, lg.reach(tau, 0.5 / L, cap=_WINDOW_CAP))
            else:
                reach = max(reach, min(_WINDOW_CAP, _IRR_STEP * _SCALAR_K_CAP))
        w = int(max(self.q / 2 + 1, min(reach, _WINDOW_CAP) + 2))
        span = np.arange(-w, w + 1)
        gx, gy = np.meshgrid(p0[0] + span, p0[1] + span, indexing="ij")
        p = np.column_stack([gx.ravel(), gy.ravel()]).astype(float)
        p = p[np.lexsort((p[:, 1], p[:, 0]))]
        ok = self._allowed(p)
        if not ok.any():
            return math.inf, (0, 0)
        p = p[ok]
        z1 = y[0] - p[:, 0]
        z2 = y[1] - p[:, 1]
        vals = self.f.eval_xy(z1, z2)
        i = _pick_minimizer(vals, z1, z2, p)
        return float(vals[i]), (int(p[i, 0]), int(p[i, 1]))

    def _box_points(self, p0, tau) -> np.ndarray:
        b = self._box_radius(tau)
        span = np.arange(-b, b + 1)
        gx, gy = np.meshgrid(p0[0] + span, p0[1] + span, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def _tube_points(self, lg: LineGeometry, y, p0, tau, k_cap) -> np.ndarray:
        if lg.half.rational:
            return self._tube_points_rational(lg, y, p0, tau, k_cap)
        return self._tube_points_irrational(lg, y, tau, k_cap)

    def _tube_points_rational(self, lg, y, p0, tau, k_cap) -> np.ndarray:
        r, s = lg.half.int_direction()
        L = math.hypot(r, s)
        # Bezout vector v with v1*s - v2*r = 1 steps across lattice lines
        g, v1, v2 = _xgcd(s, -r)
        v = np.array([v1, v2], dtype=float)
        d = np.array([r, s], dtype=float)
        z0 = y - p0
        c0 = z0[0] * s - z0[1] * r          # cross(z0, d): offset index units
        a0 = z0[0] * r + z0[1] * s          # dot(z0, d)
        u_max = min(1.0, 2.0 * float(lg.width(1.0, max(tau, 1e-300))))
        pts = []
        j_lo = math.floor(c0 - u_max * L)
        j_hi = math.ceil(c0 + u_max * L)
        for j in range(j_lo, j_hi + 1):
            u = abs(c0 - j) / L
            reach = lg.reach(max(tau, 1e-300), u, cap=k_cap * L)
            kw = int(min(k_cap, max(1, math.ceil(reach / L)) ))
            arc0 = (a0 - j * (v[0] * r + v[1] * s)) / L
            kc = round(arc0 / L)
            ks = np.arange(kc - kw, kc + kw + 1)
            base = p0 + j * v
            pts.append(np.column_stack([base[0] + ks * d[0], base[1] + ks * d[1]]))
        return np.concatenate(pts, axis=0) if pts else np.empty((0, 2))

    def _tube_points_irrational(self, lg, y, tau, k_cap) -> np.ndarray:
        u = lg.half.unit_direction()
        reach = lg.reach(max(tau, 1e-300), 1e-6, cap=k_cap * _IRR_STEP)
        ks = np.arange(1, int(min(k_cap, reach / _IRR_STEP)) + 1)
        if len(ks) == 0:
            return np.empty((0, 2))
        ts = ks * _IRR_STEP
        pts = [np.round(np.column_stack([y[0] - ts * u[0], y[1] - ts * u[1]])),
               np.round(np.column_stack([y[0] + ts * u[0], y[1] + ts * u[1]]))]
        return np.concatenate(pts, axis=0)

    # -- vectorized hit decisions -------------------------------------------

    def hits(self, xs: np.ndarray) -> np.ndarray:
        """Boolean hit array for points xs of shape (m, 2)."""
        y = self.q * np.asarray(xs, dtype=float)
        p0 = np.round(y)
        if self.geo.axis_monotone and not self.restricted:
            # coordinatewise-monotone body: the wrap is the exact minimizer
            z = y - p0
            return self.f.eval_xy(z[:, 0], z[:, 1]) < self.eps_s
        hit = np.zeros(len(y), dtype=bool)
        self._box_hits(y, p0, hit)
        for lg in self.geo.lines:
            if hit.all():
                break
            if lg.half.rational:
                self._tube_hits_rational(lg, y, p0, hit)
            else:
                self._tube_hits_irrational(lg, y, hit)
        return hit

    def _try(self, y, p, hit, mask=None):
        """Mark samples whose candidate p satisfies F(y - p) < q*eps."""
        alive = ~hit if mask is None else (~hit & mask)
        if not alive.any():
            return
        idx = np.flatnonzero(alive)
        pa = p[idx] if p.ndim == 2 else np.broadcast_to(p, (len(idx), 2))
        if self.restricted:
            ok = self._allowed(pa)
            idx, pa = idx[ok], pa[ok]
            if len(idx) == 0:
                return
        vals = self.f.eval_xy(y[idx, 0] - pa[:, 0], y[idx, 1] - pa[:, 1])
        hit[idx[vals < self.eps_s]] = True

    def _box_hits(self, y, p0, hit):
        b = self._box_radius(self.eps_s)
        self._try(y, p0, hit)  # wrapped point first: settles the saturated case
        alive = np.flatnonzero(~hit)
        if alive.size == 0:
            return
        span = np.arange(-b, b + 1, dtype=float)
        ox, oy = np.meshgrid(span, span, indexing="ij")
        offs = np.column_stack([ox.ravel(), oy.ravel()])
        ya, pa0 = y[alive], p0[alive]
        for chunk in np.array_split(offs, max(1, len(offs) // 512)):
            p1 = pa0[:, 0][:, None] + chunk[:, 0][None, :]
            p2 = pa0[:, 1][:, None] + chunk[:, 1][None, :]
            z1 = ya[:, 0][:, None] - p1
            z2 = ya[:, 1][:, None] - p2
            vals = self.f.eval_xy(z1, z2)
            if self.restricted:
                g1 = np.gcd(np.abs(p1.astype(np.int64) * self.r_hat) % self.q, self.q)
                g2 = np.gcd(np.abs(p2.astype(np.int64) * self.s_hat) % self.q, self.q)
                vals = np.where((g1 == 1) & (g2 == 1), vals, np.inf)
            hit[alive[np.any(vals < self.eps_s, axis=1)]] = True
            alive2 = ~hit[alive]
            if not alive2.any():
                return
        return

    def _tube_hits_rational(self, lg, y, p0, hit):
        r, s = lg.half.int_direction()
        L = math.hypot(r, s)
        g, v1, v2 = _xgcd(s, -r)
        v = np.array([v1, v2], dtype=float)
        d = np.array([r, s], dtype=float)
        z0 = y - p0
        c0 = z0[:, 0] * s - z0[:, 1] * r
        a0 = z0[:, 0] * r + z0[:, 1] * s
        u_max = min(1.0, 2.0 * float(lg.width(1.0, self.eps_s)))
        j_lo = math.floor(float(c0.min()) - u_max * L)
        j_hi = math.ceil(float(c0.max()) + u_max * L)
        for j in range(j_lo, j_hi + 1):
            u = np.abs(c0 - j) / L
            if lg.width_exp <= 1e-9:
                kw = np.full(len(y), _BATCH_K_CAP)
            else:
                rho = (2.0 * lg.width_coef * self.eps_s / np.maximum(u, 1e-15)
                       ) ** (1.0 / lg.width_exp)
                kw = np.minimum(_BATCH_K_CAP, np.ceil(self.eps_s * rho / L))
            kw = np.maximum(kw, 1)
            arc0 = (a0 - j * (v[0] * r + v[1] * s)) / L
            kc = np.round(arc0 / L)
            base = p0 + j * v
            for dk in range(-_BATCH_K_CAP, _BATCH_K_CAP + 1):
                mask = np.abs(dk) <= kw
                if not mask.any():
                    continue
                k = kc + dk
                p = np.column_stack([base[:, 0] + k * d[0], base[:, 1] + k * d[1]])
                self._try(y, p, hit, mask)
                if hit.all():
                    return

    def _tube_hits_irrational(self, lg, y, hit):
        u = lg.half.unit_direction()
        reach = lg.reach(self.eps_s, 1e-6, cap=_BATCH_K_CAP * _IRR_STEP)
        kmax = int(min(_BATCH_K_CAP, reach / _IRR_STEP))
        for k in range(1, kmax + 1):
            for sgn in (1.0, -1.0):
                t = sgn * k * _IRR_STEP
                p = np.round(np.column_stack([y[:, 0] - t * u[0],
                                              y[:, 1] - t * u[1]]))
                self._try(y, p, hit)
                if hit.all():
                    return


def _pick_minimizer(vals, z1, z2, p) -> int:
    """Deterministic, window-independent argmin: break value ties by the
    nearest z (so a tie along a vanishing lattice line does not depend on
    the enumeration window), then lexicographically by p."""
    zinf = np.maximum(np.abs(z1), np.abs(z2))
    return int(np.lexsort((p[:, 1], p[:, 0], zinf, vals))[0])


def _xgcd(a: int, b: int):
    """g, x, y with a*x + b*y = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------------------
# Public membership / measure operations
# ---------------------------------------------------------------------------


def resonant_membership(f: Expr, x, spec: ResonantSpec,
                        q_exhaustive: int = 64) -> Optional[ResonantHit]:
    """Minimizing p for F(x - p/q); a ResonantHit when the minimum is < eps.

    Falls back to full window enumeration for q <= q_exhaustive; the fast
    candidate search agrees exactly with that enumeration whenever both run.
    Value ties are broken toward the nearest q*x - p, then lexicographically
    in p, so the reported minimizer does not depend on the search window.
    """
    kern = _Kernel(f, spec.q, spec.epsilon, spec.restricted)
    if spec.q <= q_exhaustive:
        raw, p = kern.minimize_exhaustive(x)
    else:
        raw, p = kern.minimize(x)
    if raw < kern.eps_s:
        return ResonantHit(x=(float(x[0]), float(x[1])), q=spec.q, p=p,
                           value=raw / spec.q)
    return None


def batch_hits(f: Expr, xs: np.ndarray, q: int, eps: float,
               restricted: bool = False) -> np.ndarray:
    """Vectorized membership decisions for an (m, 2) array of torus points."""
    return _Kernel(f, q, eps, restricted).hits(np.asarray(xs, dtype=float))


def resonant_measure(f: Expr, spec: ResonantSpec, samples: int = 10_000,
                     seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of |B_q| (or |B*_q|) with its standard error."""
    kern = _Kernel(f, spec.q, spec.epsilon, spec.restricted)
    return indicator_estimate(kern.hits, samples, seed)


def overlap_estimate(f: Expr, spec_a: ResonantSpec, spec_b: ResonantSpec,
                     samples: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of |B*_q ∩ B*_q'| on a common sample stream."""
    ka = _Kernel(f, spec_a.q, spec_a.epsilon, spec_a.restricted)
    kb = _Kernel(f, spec_b.q, spec_b.epsilon, spec_b.restricted)
    return indicator_estimate(lambda pts: ka.hits(pts) & kb.hits(pts),
                              samples, seed)


def _spec_record(spec: ResonantSpec):
    return {"q": spec.q, "epsilon": spec.epsilon, "restricted": spec.restricted}


def resonant_record(f: Expr, spec: ResonantSpec, samples: int = 10_000,
                    seed: int = 0) -> dict:
    """JSON-able record of a resonant-measure estimate; bit-exact given seed."""
    value, stderr = resonant_measure(f, spec, samples=samples, seed=seed)
    return {"kind": "resonant_measure", "spec": _spec_record(spec),
            "value": value, "stderr": stderr, "samples": samples, "seed": seed}


def overlap_record(f: Expr, spec_a: ResonantSpec, spec_b: ResonantSpec,
                   samples: int = 10_000, seed: int = 0) -> dict:
    """JSON-able record of an overlap estimate; bit-exact given seed."""
    value, stderr = overlap_estimate(f, spec_a, spec_b, samples=samples,
                                     seed=seed)
    return {"kind": "overlap", "spec_a": _spec_record(spec_a),
            "spec_b": _spec_record(spec_b), "value": value,
            "stderr": stderr, "samples": samples, "seed": seed}


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


def _bounded_area_unit(f: Expr) -> float:
    """Area of {F < 1} for a bounded body, by radial quadrature."""
    def integrand(theta):
        v = f.eval_xy(math.cos(theta), math.sin(theta))
        return 1.0 / (v * v)
    val, err = _scipy_quad(integrand, 0.0, 2.0 * math.pi, limit=400)
    if err > 1e-8 * max(1.0, abs(val)):
        raise NonConvergent(f"radial quadrature error {err:.3g}")
    return 0.5 * val


def _section_length(kern: _Kernel, x2: float, grid: int = 1024) -> float:
    """Measure of {x1 in [0,1] : (x1, x2) in B_1(F, eps)}."""
    x1 = np.linspace(0.0, 1.0, grid + 1)
    pts = np.column_stack([x1, np.full(grid + 1, x2)])
    h = kern.hits(pts)
    if h.all():
        return 1.0
    if not h.any():
        return 0.0
    # refine every transition edge by bisection, all edges in lockstep
    edges = np.flatnonzero(h[:-1] != h[1:])
    lo, hi = x1[edges].copy(), x1[edges + 1].copy()
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        hm = kern.hits(np.column_stack([mid, np.full(len(mid), x2)]))
        same_as_left = hm == h[edges]
        lo = np.where(same_as_left, mid, lo)
        hi = np.where(same_as_left, hi, mid)
    cross = 0.5 * (lo + hi)
    # walk runs of True cells using refined boundaries
    total = 0.0
    start = 0.0 if h[0] else None
    for e, c in zip(edges, cross):
        if h[e]:       # True -> False
            total += c - (start if start is not None else 0.0)
            start = None
        else:          # False -> True
            start = c
    if start is not None:
        total += 1.0 - start
    return total


def _periodized_quadrature(f: Expr, eps: float, tol: float = 1e-7,
                           budget: int = 20_000) -> float:
    kern = _Kernel(f, 1, eps)
    evals = [0]

    def g(x2):
        evals[0] += 1
        if evals[0] > budget:
            raise NonConvergent("quadrature evaluation budget exhausted")
        return _section_length(kern, x2)

    def simpson(a, fa, m, fm, b, fb):
        return (b - a) * (fa + 4.0 * fm + fb) / 6.0

    def adapt(a, fa, m, fm, b, fb, whole, tol, depth):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = simpson(a, fa, lm, flm, m, fm)
        right = simpson(m, fm, rm, frm, b, fb)
        if depth <= 0:
            return left + right
        if abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (adapt(a, fa, lm, flm, m, fm, left, tol / 2.0, depth - 1)
                + adapt(m, fm, rm, frm, b, fb, right, tol / 2.0, depth - 1))

    a, b = 0.0, 1.0
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)
    whole = simpson(a, fa, m, fm, b, fb)
    return adapt(a, fa, m, fm, b, fb, whole, tol, depth=48)


def density(f: Expr, epsilon: float, method: str = "auto",
            samples: int = 100_000, seed: int = 0) -> DensityResult:
    """D_F(epsilon): bounded-body area, or periodized measure per unit square.

    method: 'analytic' (registered closed forms only), 'quadrature',
    'montecarlo', or 'auto' (analytic when registered, else quadrature).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    skel = extract_skeleton(f)
    bounded = not skel.lines
    if not bounded and not skel.rational_only and method != "montecarlo":
        raise IrrationalSkeleton(
            "periodized density needs a rational skeleton (or method='montecarlo')")
    info = analytic_density_info(f)

    if method in ("analytic", "auto") and info is not None:
        return DensityResult(epsilon, _analytic_density(*info, epsilon), "analytic")
    if method == "analytic":
        raise ValueError("no analytic density registered for this expression")

    if method in ("quadrature", "auto"):
        if bounded:
            value = epsilon * epsilon * _bounded_area_unit(f)
        else:
            value = _periodized_quadrature(f, epsilon)
        return DensityResult(epsilon, value, "quadrature")

    if method == "montecarlo":
        if bounded:
            geo = body_geometry(f)
            r = 1.0 / max(geo.circle_min, 1e-12) * 1.01

            def worker(pts):
                box = (pts - 0.5) * (2.0 * r)
                return f.eval_xy(box[:, 0], box[:, 1]) < 1.0

            p, se = indicator_estimate(worker, samples, seed, stratified=True)
            area = (2.0 * r) ** 2
            return DensityResult(epsilon, epsilon * epsilon * p * area,
                                 "montecarlo", epsilon * epsilon * se * area)
        kern = _Kernel(f, 1, epsilon)
        p, se = indicator_estimate(kern.hits, samples, seed, stratified=True)
        return DensityResult(epsilon, p, "montecarlo", se)

    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Overlap monotonicity probe
# ---------------------------------------------------------------------------


def overlap_monotonicity_probe(f1: Expr, f2: Expr, delta1: float, delta2: float,
                               line: HalfLine, t1s, t2s,
                               samples: int = 10_000, seed: int = 0):
    """Monte Carlo table of f(t1, t2) = |{F1 < d1} ∩ ({F2 < d2} - t1 v - t2 v_perp)|
    with both sets clipped to the fundamental rectangle of the common line.

    Uses one coupled sample stream across the whole grid so monotonicity
    comparisons share their randomness.  Returns (values, stderrs).
    """
    s1, s2 = extract_skeleton(f1), extract_skeleton(f2)
    if len(s1.full_lines()) != 1 or len(s2.full_lines()) != 1:
        raise SkeletonMismatch("both bodies must have a single skeleton line")
    k1, k2 = s1.lines[0], s2.lines[0]
    if (k1.rational, k1.slope_num, k1.slope_den, k1.slope_value) != \
       (k2.rational, k2.slope_num, k2.slope_den, k2.slope_value):
        raise SkeletonMismatch("the two skeletons differ")
    rect = fundamental_rectangle(s1)
    v = line.unit_direction()
    vp = line.normal()
    t1s = np.asarray(t1s, dtype=float)
    t2s = np.asarray(t2s, dtype=float)

    area = float(rect.s_hat * rect.r_hat)
    values = np.zeros((len(t1s), len(t2s)))
    errs = np.zeros_like(values)
    from .sampling import CHUNK, map_chunks, uniform_chunk
    n_chunks = math.ceil(samples / CHUNK)

    def work(c):
        size = min(CHUNK, samples - c * CHUNK)
        pts = uniform_chunk(seed, c, size) * np.array([rect.s_hat, rect.r_hat])
        in1 = f1.eval_xy(pts[:, 0], pts[:, 1]) < delta1
        counts = np.zeros((len(t1s), len(t2s)), dtype=np.int64)
        for i, t1 in enumerate(t1s):
            for j, t2 in enumerate(t2s):
                sx = pts[:, 0] + t1 * v[0] + t2 * vp[0]
                sy = pts[:, 1] + t1 * v[1] + t2 * vp[1]
                counts[i, j] = np.count_nonzero(in1 & (f2.eval_xy(sx, sy) < delta2))
        return counts

    total = sum(map_chunks(work, n_chunks))
    phat = total / samples
    values = area * phat
    errs = area * np.sqrt(np.maximum(phat * (1 - phat), 0.0) / samples)
    return values, errs
