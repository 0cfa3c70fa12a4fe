"""Independent reference values for the frozen test fixtures.

Uses mpmath / scipy only; shares no code with the C++ library.
Run: python3 tests/oracles/fixtures.py
"""
import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

mp.mp.dps = 40
GAIN, CENTER, SIGMA = 8.0, 0.5, 1.0


def f(x):
    return 0.5 + mp.atan(GAIN * (x - CENTER)) / mp.pi


def fp(x):
    return GAIN / mp.pi / (1 + (GAIN * (x - CENTER)) ** 2)


def root(lo, hi):
    g = lambda x: f(x) - x
    for _ in range(200):
        mid = (lo + hi) / 2
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


a1 = root(mp.mpf(-0.5), mp.mpf(0.4))
a2 = root(mp.mpf(0.6), mp.mpf(1.5))
a = mp.mpf(CENTER)
H = lambda u: mp.quad(lambda s: s - f(s), [a1, u])
print("a1 =", mp.nstr(a1, 17))
print("a2 =", mp.nstr(a2, 17))
print("H(a) =", mp.nstr(H(a), 17))
print("H(a2) =", mp.nstr(H(a2), 5))
mu_plus = mp.sqrt(1 - fp(a2)) / SIGMA
print("mu_plus =", mp.nstr(mu_plus, 17))

# Profile on x >= 0 by the second-order ODE sigma^2 u'' = u - f(u), with the
# running integrals of u'^2, u'^2 f'(u) appended to the state.
ff = lambda x: 0.5 + np.arctan(GAIN * (x - CENTER)) / np.pi
ffp = lambda x: GAIN / np.pi / (1 + (GAIN * (x - CENTER)) ** 2)


def rhs(x, y):
    u, up, _, _ = y
    return [up, (u - ff(u)) / SIGMA**2, up * up, up * up * ffp(u)]


y0 = [CENTER, float(mp.sqrt(2 * H(a)) / SIGMA), 0.0, 0.0]
xs = 13.0
sol = solve_ivp(rhs, [0, xs], y0, method="DOP853", rtol=1e-13, atol=1e-16, dense_output=True)
u_end, up_end, I1, I2 = sol.y[:, -1]
mu = float(mu_plus)
# analytic tail: a2 - u ~ C e^{-mu x}, u' = mu C e^{-mu x}
I1 += up_end**2 / (2 * mu)
I2 += up_end**2 / (2 * mu) * float(fp(a2))
num = I1           # int_R u'^2 f(u) = int_0^inf u'^2 (f(u(x)) + f(u(-x))) = int_0^inf u'^2
den = 2 * I2
print("rho2 (sigma formula) =", repr(num / den))
print("phase variance rate num/den^2 =", repr(num / den**2))
print("den =", repr(den), "num =", repr(num))

# literal double-integral form of the numerator on a fine grid as a cross-check
h = 0.002
x = np.arange(0, 30 + h / 2, h)
u = np.where(x <= xs, sol.sol(np.minimum(x, xs))[0], float(a2) - (float(a2) - u_end) * np.exp(-mu * (x - xs)))
upv = np.where(x <= xs, sol.sol(np.minimum(x, xs))[1], up_end * np.exp(-mu * (x - xs)))
X = np.concatenate([-x[:0:-1], x])
U = np.concatenate([1.0 - u[:0:-1], u])
UP = np.concatenate([upv[:0:-1], upv])
g = UP * ffp(U)
# W*g at every node: trapezoid with exact kernel, O(n^2) in chunks
conv = np.empty_like(X)
for k in range(0, len(X), 2000):
    d = X[k:k + 2000, None] - X[None, :]
    conv[k:k + 2000] = np.trapz(np.exp(-np.abs(d) / SIGMA) / (2 * SIGMA) * g[None, :], X, axis=1)
lit = np.trapz(conv**2 * ff(U), X) / np.trapz(UP**2 * ffp(U), X)
print("rho2 literal (h=0.002) =", repr(lit))
print("sup|W*(f'u')-u'| =", np.max(np.abs(conv - UP)[np.abs(X) < 20]))

# ramp initial condition distance fixture: eps=0.02, beta=0.75
eps, beta = 0.02, 0.75
ell = eps ** (-beta)
N = int(np.floor(ell / eps))
xi = eps * np.arange(-N, N + 1)
A1, A2 = float(a1), float(a2)
ramp = np.clip(A1 + (A2 - A1) / (2 * ell) * (xi + ell), A1, A2)


def prof(xq):
    ax = np.abs(xq)
    inside = ax <= xs
    val = np.where(inside, sol.sol(np.minimum(ax, xs))[0], A2 - (A2 - u_end) * np.exp(-mu * (ax - xs)))
    return np.where(xq >= 0, val, 1.0 - val)


edge = eps * N + eps / 2


def dist2(psi):
    bulk = eps * np.sum((ramp - prof(xi - psi)) ** 2)
    t = np.linspace(edge, edge + 60, 60001)
    right = np.trapz((A2 - prof(t - psi)) ** 2, t)
    left = np.trapz((A1 - prof(-t - psi)) ** 2, t)
    return bulk + right + left


res = minimize_scalar(dist2, bracket=(-1, 0, 1), tol=1e-12)
print("ramp eps=0.02 beta=0.75: N =", N, "psi_min =", res.x, "dist =", repr(np.sqrt(res.fun)))
