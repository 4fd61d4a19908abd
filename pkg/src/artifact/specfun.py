"""Self-contained special functions used everywhere else in the package.

Lambert W on arbitrary branches, complete and incomplete elliptic integrals,
Jacobi elliptic functions, the complex (complementary) error function with its
scaled Faddeeva form, and parabolic-cylinder functions D_{-n} of non-positive
integer order.  Conventions:

* Elliptic quantities use the MODULUS p, i.e. K(p) = int_0^{pi/2}
  dtheta / sqrt(1 - p^2 sin^2 theta) and sn(u, p) etc.
* Lambert branches follow the standard convention: W_0 has its cut on
  (-inf, -1/e], every other branch on (-inf, 0]; W_{-1} <= -1 on its real
  window [-1/e, 0).

Everything is plain python/numpy scalar arithmetic; no external special
function libraries are consumed.
"""

from __future__ import annotations

import cmath
import math
import warnings

import numpy as np

from .errors import AccuracyWarning, NumericsError

__all__ = [
    "lambert_w",
    "lambert_w_asymptotic",
    "elliptic_K",
    "elliptic_E",
    "elliptic_E_incomplete",
    "jacobi_sn_cn_dn",
    "faddeeva_erfc",
    "faddeeva_w",
    "parabolic_cylinder_D",
    "dscaled_ladder",
    "ladder_array",
]

_INV_E = math.exp(-1.0)
_SQRT2 = math.sqrt(2.0)
_SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_I_OVER_SQRT_PI = 1j / math.sqrt(math.pi)


# =====================================================================
# Lambert W
# =====================================================================

def _w0_by_arc(z: complex) -> complex:
    """Principal-branch value at moderate |z| by continuation.

    Newton on the positive real axis gives W_0(|z|); following the circular
    arc |z| e^{i theta} inward keeps every intermediate inside the principal
    branch's Halley basin, which direct seeding does not guarantee in the
    annulus 0.25 <= |z| <= 4.
    """
    r = abs(z)
    theta = cmath.phase(z)
    w = math.log(1.0 + r)
    for _ in range(40):
        ew = math.exp(w)
        step = (w * ew - r) / ((1.0 + w) * ew)
        w -= step
        if abs(step) < 1e-15 * (1.0 + abs(w)):
            break
    wc = complex(w)
    steps = 16 if (0.25 < r < 0.5 and abs(theta) > 2.5) else 8
    for j in range(1, steps + 1):
        zj = r * cmath.exp(1j * theta * j / steps)
        wc = _halley(zj, wc, 50)
    return wc


def _lambert_seed(branch: int, z: complex) -> complex:
    """Starting point for the Halley iteration on w e^w = z."""
    if branch == 0:
        q = 2.0 * (math.e * z + 1.0)
        if abs(q) < 0.4:
            # square-root series around the branch point -1/e
            p = cmath.sqrt(q)
            return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
        if abs(z) < 0.25:
            return z * (1.0 + z * (-1.0 + z * 1.5))
        if abs(z) <= 4.0:
            return _w0_by_arc(z)
        L = cmath.log(z)
        return L - cmath.log(L)
    if branch == -1 and z.imag == 0.0 and -_INV_E <= z.real < 0.0:
        q = 2.0 * (math.e * z.real + 1.0)
        if q < 0.16:
            p = -math.sqrt(max(q, 0.0))
            return complex(-1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0))))
        Lr = math.log(-z.real)
        return complex(Lr - math.log(-Lr))
    if abs(branch) == 1:
        # branch point series also feeds W_{+-1} on the adjacent half-planes
        q = 2.0 * (math.e * z + 1.0)
        if abs(q) < 0.16 and (
            (branch == -1 and z.imag <= 0.0) or (branch == 1 and z.imag > 0.0)
        ):
            p = -cmath.sqrt(q)
            return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
    L = cmath.log(z) + 2j * math.pi * branch
    return L - cmath.log(L)


def _halley(z: complex, w: complex, maxiter: int) -> complex:
    for _ in range(maxiter):
        ew = cmath.exp(w)
        f = w * ew - z
        if f == 0.0:
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            wp1 = complex(1e-300)
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w = w - step
        if abs(step) <= 1e-16 * (2.0 + abs(w)):
            break
    return w


def lambert_w(branch: int, z: complex, tol: float = 1e-13, maxiter: int = 100) -> complex:
    """Branch `branch` of the Lambert W function at z.

    Halley iteration from a branch-aware seed; the relative residual
    |w e^w - z| / max(1, |z|) is verified to be <= tol before returning.

    Raises
    ------
    ValueError
        if z == 0 on a branch with the logarithmic singularity there.
    NumericsError
        if the iteration cap is hit without meeting the residual contract.
    """
    n = int(branch)
    z = complex(z)
    if z == 0.0:
        if n == 0:
            return 0.0 + 0.0j
        raise ValueError("W_n(0) diverges for n != 0")
    w = _halley(z, _lambert_seed(n, z), maxiter)
    res = abs(w * cmath.exp(w) - z) / max(1.0, abs(z))
    if res > tol or res != res:
        # one re-seed from the raw log form before giving up
        L = cmath.log(z) + 2j * math.pi * n
        w2 = L if abs(L) < 1e-12 else L - cmath.log(L)
        for _ in range(30):
            if w2 == 0.0:
                break
            w2 = L - cmath.log(w2)
        w2 = _halley(z, w2, maxiter)
        res2 = abs(w2 * cmath.exp(w2) - z) / max(1.0, abs(z))
        if res2 < res or res != res:
            w, res = w2, res2
    if res > tol or res != res:
        raise NumericsError(
            f"lambert_w branch {n} failed to converge at z={z!r}",
            residual=res if res == res else float("nan"),
        )
    return w


def lambert_w_asymptotic(branch: int, z: complex) -> complex:
    """Two-term large-|z| form Log z + 2 pi i n - Log(Log z + 2 pi i n).

    Cross-check / seed only; documented validity |z| > 10.
    """
    L = cmath.log(complex(z)) + 2j * math.pi * int(branch)
    return L - cmath.log(L)


# =====================================================================
# Elliptic integrals and Jacobi functions (modulus convention)
# =====================================================================

def _agm_KE(p: float):
    """Complete integrals K(p), E(p) by the arithmetic-geometric mean."""
    a, b = 1.0, math.sqrt((1.0 - p) * (1.0 + p))
    c = p
    s = 0.5 * c * c
    twopow = 0.5
    for _ in range(60):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        twopow *= 2.0
        s += twopow * c * c
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - s)


def elliptic_K(p: float) -> float:
    """Complete elliptic integral of the first kind, modulus p in [0, 1)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"modulus out of range: {p}")
    if p == 1.0:
        raise ValueError("K(1) diverges")
    return _agm_KE(p)[0]


def elliptic_E(p: float) -> float:
    """Complete elliptic integral of the second kind, modulus p in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"modulus out of range: {p}")
    if p == 1.0:
        return 1.0
    return _agm_KE(p)[1]


def _elliptic_K_comp(comp_sq: float) -> float:
    """K at modulus sqrt(1 - comp_sq), keyed on the complement.

    Near p = 1 the complement 1 - p^2 carries the information; deriving
    it from a rounded p quantizes it at ~1e-16/(1 - p^2) relative, while
    the AGM itself only ever needs b0 = sqrt(comp_sq).
    """
    if not 0.0 < comp_sq <= 1.0:
        raise ValueError(f"complementary parameter out of range: {comp_sq}")
    a, b = 1.0, math.sqrt(comp_sq)
    for _ in range(60):
        if abs(a - b) <= 1e-17 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def _carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_F by duplication."""
    for _ in range(200):
        lam = math.sqrt(x) * math.sqrt(y) + math.sqrt(y) * math.sqrt(z) + math.sqrt(z) * math.sqrt(x)
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + z) / 3.0
        if max(abs(x - mu), abs(y - mu), abs(z - mu)) <= 1e-4 * mu:
            break
    mu = (x + y + z) / 3.0
    dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
    e2 = dx * dy + dy * dz + dz * dx
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / math.sqrt(mu)


def _carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_D by duplication."""
    acc = 0.0
    fac = 1.0
    for _ in range(200):
        lam = math.sqrt(x) * math.sqrt(y) + math.sqrt(y) * math.sqrt(z) + math.sqrt(z) * math.sqrt(x)
        acc += fac / (math.sqrt(z) * (z + lam))
        fac *= 0.25
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + 3.0 * z) / 5.0
        if max(abs(x - mu), abs(y - mu), abs(z - mu)) <= 1e-4 * mu:
            break
    mu = (x + y + 3.0 * z) / 5.0
    dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + 2.0 * ec
    series = (
        1.0
        + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee)
        + dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + 3.0 / 26.0 * dz * ea))
    )
    return 3.0 * acc + fac * series / (mu * math.sqrt(mu))


def elliptic_E_incomplete(s: float, p: float) -> float:
    """Incomplete second-kind integral E(arcsin s, p), |s| <= 1.

    Evaluated through the Carlson forms; odd in s.
    """
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"sine amplitude out of range: {s}")
    if s == 0.0:
        return 0.0
    if s < 0.0:
        return -elliptic_E_incomplete(-s, p)
    s2 = s * s
    c2 = max(0.0, 1.0 - s2)
    d2 = 1.0 - p * p * s2
    return s * _carlson_rf(c2, d2, 1.0) - (p * p) * s2 * s / 3.0 * _carlson_rd(c2, d2, 1.0)


def jacobi_sn_cn_dn(u: float, p: float):
    """Jacobi sn, cn, dn by the descending-Landen / AGM phase recursion.

    dn is recovered from dn^2 = cn^2 + (1-p)(1+p) sn^2 (dn > 0 for real u,
    p < 1), which is exact, avoids the 0/0 of the phase-ratio form at u = K,
    and keeps full precision at p near 1 where 1 - p^2 sn^2 would cancel.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"modulus out of range: {p}")
    if p == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if p == 1.0:
        se = 1.0 / math.cosh(u)
        return math.tanh(u), se, se
    K = elliptic_K(p)
    u = u - 4.0 * K * math.floor(u / (4.0 * K) + 0.5)
    a_list = [1.0]
    c_list = [p]
    a, b = 1.0, math.sqrt((1.0 - p) * (1.0 + p))
    for _ in range(60):
        if abs(c_list[-1]) <= 1e-17 * a_list[-1]:
            break
        c_new = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        a_list.append(a)
        c_list.append(c_new)
    N = len(a_list) - 1
    phi = (2.0 ** N) * a_list[N] * u
    for n in range(N, 0, -1):
        t = c_list[n] / a_list[n] * math.sin(phi)
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, t))))
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(cn * cn + (1.0 - p) * (1.0 + p) * sn * sn)
    return sn, cn, dn


def jacobi_epsilon(u: float, p: float) -> float:
    """Jacobi epsilon function, integral of dn^2(w, p) over w in (0, u).

    Quasi-periodic piece split off through eps(u + 2K) = eps(u) + 2E; the
    remaining incomplete second-kind integral is handed to the Carlson forms
    with arguments cn^2 and dn^2 taken straight from the phase recursion.
    Nothing is reconstructed as 1 - sn^2, so absolute precision survives
    moduli within ~1e-8 of 1, where small mass integrals are later assembled
    from order-one pieces.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"modulus out of range: {p}")
    if p == 0.0:
        return u
    if p == 1.0:
        return math.tanh(u)
    K = elliptic_K(p)
    n = math.floor(u / (2.0 * K) + 0.5)
    ur = u - 2.0 * K * n
    sn, cn, dn = jacobi_sn_cn_dn(ur, p)
    c2, d2 = cn * cn, dn * dn
    inc = sn * _carlson_rf(c2, d2, 1.0) \
        - (p * p) * sn ** 3 / 3.0 * _carlson_rd(c2, d2, 1.0)
    return 2.0 * n * elliptic_E(p) + inc


# =====================================================================
# Complex error function / Faddeeva
# =====================================================================

def _erf_taylor(z: complex) -> complex:
    # Maclaurin series of erf; adequate for |z| <= 2.5.
    z2 = z * z
    term = complex(z)
    total = complex(z)
    for n in range(1, 80):
        term *= -z2 / n
        contrib = term / (2 * n + 1)
        total += contrib
        if abs(contrib) <= 1e-18 * abs(total):
            break
    return _TWO_OVER_SQRT_PI * total


def _erfc_poisson(z: complex) -> complex:
    # Strip expansion around the real axis (trapezoidal/Poisson summation of
    # the Gaussian, spacing 1/2) on top of the real-line erfc; aliasing error
    # ~ e^{-4 pi^2} relative to the correction scale.
    x, y = z.real, z.imag
    ex2 = math.exp(-x * x)
    if x == 0.0:
        head = 1j * y / math.pi
    else:
        head = (ex2 / (2.0 * math.pi * x)) * complex(1.0 - math.cos(2.0 * x * y), math.sin(2.0 * x * y))
    total = complex(math.erfc(x)) - head
    kmax = 2 * int(abs(y)) + 16
    acc = 0.0 + 0.0j
    for k in range(1, kmax + 1):
        decay = math.exp(-0.25 * k * k) / (k * k + 4.0 * x * x)
        if decay == 0.0:
            break
        coshky = math.cosh(k * y)
        sinhky = math.sinh(k * y)
        c2xy = math.cos(2.0 * x * y)
        s2xy = math.sin(2.0 * x * y)
        fk = 2.0 * x - 2.0 * x * coshky * c2xy + k * sinhky * s2xy
        gk = 2.0 * x * coshky * s2xy + k * sinhky * c2xy
        acc += decay * complex(fk, gk)
    return total - (2.0 / math.pi) * ex2 * acc


def _w_cf(zeta: complex, depth: int = 64) -> complex:
    # Laplace continued fraction for the Faddeeva function, Im zeta > 0.
    r = 0.0 + 0.0j
    for k in range(depth, 0, -1):
        r = (0.5 * k) / (zeta - r)
    return _I_OVER_SQRT_PI / (zeta - r)


def _erfc_right(z: complex) -> complex:
    # Re z >= 0 assumed.
    az = abs(z)
    if az <= 2.5:
        return 1.0 - _erf_taylor(z)
    if az < 6.0:
        if z.imag >= 0.0:
            return _erfc_poisson(z)
        return (_erfc_poisson(z.conjugate())).conjugate()
    # e^{-z^2} w(iz); w argument has Im >= 0 exactly when Re z >= 0
    return cmath.exp(-z * z) * _w_cf(1j * z)


def faddeeva_erfc(z: complex) -> complex:
    """Complementary error function for complex argument.

    Reflection erfc(-z) = 2 - erfc(z) maps everything to Re z >= 0, where a
    Maclaurin series (|z| <= 2.5), a Poisson-summation strip expansion
    (|z| < 6) and the Laplace continued fraction (|z| >= 6) cover the plane.
    The true value overflows double range near the imaginary axis once
    Im(z)^2 - Re(z)^2 > ~709; callers needing that regime should work with
    the scaled form faddeeva_w instead.
    """
    z = complex(z)
    if z.real < 0.0:
        return 2.0 - faddeeva_erfc(-z)
    return _erfc_right(z)


def faddeeva_w(zeta: complex) -> complex:
    """Scaled complex error function w(zeta) = e^{-zeta^2} erfc(-i zeta).

    Bounded on Im zeta >= 0 (the regime used internally); the lower
    half-plane goes through w(zeta) = 2 e^{-zeta^2} - w(-zeta), which may
    legitimately overflow.
    """
    zeta = complex(zeta)
    if zeta.imag < 0.0:
        return 2.0 * cmath.exp(-zeta * zeta) - faddeeva_w(-zeta)
    if abs(zeta) >= 6.0:
        return _w_cf(zeta)
    # exchange: -i zeta has Re >= 0 here, and |zeta| < 6 keeps e^{-zeta^2}
    # comfortably inside double range
    return cmath.exp(-zeta * zeta) * _erfc_right(-1j * zeta)


# =====================================================================
# Parabolic cylinder functions of non-positive integer order
# =====================================================================

def _exact_E1(z):
    out = np.empty(z.shape, dtype=complex)
    flat = z.ravel()
    res = out.ravel()
    for i in range(flat.size):
        res[i] = _SQRT_PI_OVER_2 * faddeeva_w(1j * flat[i] / _SQRT2)
    return out


def ladder_array(nmax: int, z, rtol: float = 1e-11):
    """Scaled parabolic-cylinder ladder over an array of arguments.

    Returns (E, degraded) with E[n, ...] = e^{z^2/4} D_{-n}(z), n = 0..nmax.
    E_0 = 1 and E_1 = sqrt(pi/2) w(i z / sqrt 2) are closed forms; the rest
    come from the three-term recurrence in n.  Working with the scaled E_n
    (which stay O(|z|^{-n}) for Re z > 0) avoids the Gaussian over/underflow
    of the raw D_{-n}.

    Route per argument:
      * forward sweep where it is provably stable (small |z|, or Re z < 0
        with no oscillatory stretch m < |z|^2 to traverse);
      * backward Miller descent for Re z >= 0, validated by running two
        trial depths and checking the n=1 row against the closed form;
      * the integral representation E_n = Gamma(n)^{-1} int_0^inf
        t^{n-1} e^{-t^2/2 - z t} dt everywhere else, and as the fallback
        when Miller cannot be certified (near-imaginary z, where neither
        recurrence direction separates the two solutions).
    degraded=True marks a column whose result could not be certified.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    flat = z.ravel()
    M = flat.size
    E = np.zeros((nmax + 1, M), dtype=complex)
    E[0] = 1.0
    degraded = np.zeros(M, dtype=bool)
    if nmax == 0:
        return E.reshape((1,) + shape), degraded.reshape(shape)
    E1 = _exact_E1(flat)
    E[1] = E1
    if nmax == 1:
        return E.reshape((2,) + shape), degraded.reshape(shape)

    absf = np.abs(flat)
    forward = ((absf <= 0.5) & ((flat.real <= 0.0) | (nmax <= 30))) | (
        (flat.real < 0.0) & (absf <= 1.2)
    )
    to_int = (flat.real < 0.0) & (absf > 1.2)
    to_back = ~forward & ~to_int

    fwd = np.nonzero(forward)[0]
    if fwd.size:
        zc = flat[fwd]
        for n in range(2, nmax + 1):
            E[n, fwd] = (zc * E[n - 1, fwd] - E[n - 2, fwd]) / (1.0 - n)

    todo = np.nonzero(to_back)[0]
    buffer = 16
    while todo.size:
        zc = flat[todo]
        cols_a = _miller_descent(nmax, zc, buffer)
        cols_b = _miller_descent(nmax, zc, 2 * buffer)
        # two trial depths must agree everywhere, and the n=1 row must match
        # the closed form; otherwise the contamination is not damped yet
        denom = np.abs(cols_b) + 1e-300
        run_diff = np.max(np.abs(cols_a - cols_b) / denom, axis=0)
        anchor = np.abs(cols_b[1] - E1[todo]) / (np.abs(E1[todo]) + 1e-300)
        bad = (run_diff > rtol) | (anchor > rtol) | ~np.isfinite(run_diff)
        good = ~bad
        done = todo[good]
        E[:, done] = cols_b[:, good]
        todo = todo[bad]
        if todo.size == 0:
            break
        if buffer >= 256:
            to_int = to_int.copy()
            to_int[todo] = True
            break
        buffer *= 2

    for i in np.nonzero(to_int)[0]:
        col, ok = _ladder_integral(nmax, complex(flat[i]))
        E[:, i] = col
        # the n=1 entry doubles as an accuracy probe against the closed form
        ok = ok and abs(col[1] - E1[i]) <= 1e-9 * (abs(E1[i]) + 1e-300)
        E[1, i] = E1[i]
        degraded[i] = not ok
    return E.reshape((nmax + 1,) + shape), degraded.reshape(shape)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _ladder_integral(nmax: int, z: complex):
    """E_n for one argument via the real-line integral representation.

    The integrand t^{n-1} e^{-t^2/2 - z t} is rescaled by its own saddle
    value so the exponent's real part stays <= 0; Gauss-Legendre panels are
    sized to keep ~10 nodes per oscillation of e^{-i Im(z) t}.
    """
    x = z.real
    t_top = 0.5 * (-x + math.sqrt(x * x + 4.0 * max(nmax - 1, 1)))
    T = t_top + 14.0
    width = min(18.0 / (abs(z.imag) + 1.0), 2.0)
    panels = max(8, int(math.ceil(T / width)))
    edges = np.linspace(0.0, T, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    logt = np.log(t)
    base = -0.5 * t * t - z * t
    col = np.empty(nmax + 1, dtype=complex)
    col[0] = 1.0
    ok = True
    for n in range(1, nmax + 1):
        m = n - 1.0
        if m > 0.0:
            ts = 0.5 * (-x + math.sqrt(x * x + 4.0 * m))
            s = m * math.log(ts) - 0.5 * ts * ts - x * ts
        else:
            s = 0.5 * x * x if x < 0.0 else 0.0
        val = np.sum(w * np.exp(m * logt + base - s))
        expo = s - math.lgamma(n)
        if expo > 709.0 or not np.isfinite(val):
            col[n] = complex(np.inf, np.inf)
            ok = False
        else:
            col[n] = val * math.exp(expo)
    return col, ok


def _miller_descent(nmax: int, zc, buffer: int):
    """One backward-recurrence pass, normalized to E_0 = 1."""
    cols = np.zeros((nmax + 1, zc.size), dtype=complex)
    x2 = np.zeros(zc.size, dtype=complex)            # trial E_m
    x1 = np.full(zc.size, 1e-250, dtype=complex)     # trial E_{m-1}
    for m in range(nmax + buffer + 1, 1, -1):
        x0 = zc * x1 + (m - 1) * x2
        x2, x1 = x1, x0
        idx = m - 2
        if idx <= nmax:
            cols[idx] = x0
        big = np.abs(x1) > 1e220
        if big.any():
            x1[big] *= 1e-220
            x2[big] *= 1e-220
            cols[:, big] *= 1e-220
    t0 = cols[0].copy()
    t0[t0 == 0.0] = np.nan
    cols /= t0
    cols[0] = 1.0
    return cols


def dscaled_ladder(nmax: int, z: complex, rtol: float = 1e-11):
    """Scalar convenience wrapper around ladder_array."""
    E, degraded = ladder_array(nmax, np.asarray([complex(z)]), rtol)
    return E[:, 0], bool(degraded[0])


def parabolic_cylinder_D(order: int, z: complex, rtol: float = 1e-11) -> complex:
    """Parabolic cylinder D_order(z) for integer order <= 0.

    Closed forms at orders 0 and -1, three-term recurrence (through the
    scaled ladder) below that.  Warns with AccuracyWarning when the ladder's
    anchor validation fails, i.e. the recurrence could not be stabilized.
    """
    if order > 0 or int(order) != order:
        raise ValueError("only non-positive integer orders are supported")
    n = -int(order)
    z = complex(z)
    E, degraded = dscaled_ladder(n, z, rtol)
    if degraded:
        warnings.warn(
            f"D_{order} recurrence failed its anchor validation at z={z!r}",
            AccuracyWarning,
            stacklevel=2,
        )
    return cmath.exp(-z * z / 4.0) * E[n]
