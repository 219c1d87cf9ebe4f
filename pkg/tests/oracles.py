"""High-precision reference implementations built on mpmath.

These are written from the defining integrals and series, not from the
package's evaluation strategy, so agreement is a genuine cross-check.
"""

import mpmath as mp

mp.mp.dps = 30


def bessel_k(nu, x):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    x = mp.mpf(x)
    return float(mp.quad(lambda t: mp.exp(-x * mp.cosh(t)) * mp.cosh(nu * t), [0, 1, 5, mp.inf]))


def log_bessel_k(nu, x):
    return float(mp.log(mp.besselk(nu, mp.mpf(x))))


def ei(x):
    """Ei(x) for x < 0 from the convergent ascending series."""
    x = mp.mpf(x)
    terms = mp.nsum(lambda k: x**k / (k * mp.factorial(k)), [1, mp.inf])
    return float(mp.euler + mp.log(-x) + terms)


def e1_scaled(s):
    s = mp.mpf(s)
    return float(mp.exp(s) * mp.e1(s))


def g(s):
    s = mp.mpf(s)
    return s * mp.exp(s) * (mp.e * mp.ei(-1 - s) - 3 * mp.ei(-s))


def h0(s):
    s = mp.mpf(s)
    return 2 * mp.log(s) - mp.log(1 + s) - g(s)


def vdfap_pdf(d, u, lam, r):
    au, lam, r = abs(mp.mpf(u)), mp.mpf(lam), mp.mpf(r)
    nu = mp.mpf(d + 1) / 2
    rho = au * mp.sqrt(r * r + lam * lam)
    return 2 * lam * (au / mp.sqrt(2 * mp.pi)) ** (d + 1) * mp.exp(lam * au) * mp.besselk(nu, rho) / rho**nu


def entropy_2d(u, lam):
    """-int f log f over the plane by radial quadrature."""

    def integrand(r):
        f = vdfap_pdf(2, u, lam, r)
        return -2 * mp.pi * r * f * mp.log(f)

    lam = mp.mpf(lam)
    scale = max(lam, 1 / abs(mp.mpf(u)))
    return float(mp.quad(integrand, [0, lam, scale, 10 * scale, 100 * scale, mp.inf]))


def bounds_identity(u, lam, sig_min, sigma):
    """Lower and upper bound evaluated with mpmath throughout."""
    au, lam = abs(mp.mpf(u)), mp.mpf(lam)
    s = au * lam
    lower = h0(s + au * au * sig_min) - h0(s)
    m = mp.matrix(sigma) / lam**2 + mp.eye(2) / (lam * au)
    upper = mp.log(mp.det(m)) / 2 + mp.log(1 + s) + g(s) - 2
    return float(lower), float(upper)
