"""Gate functions: activations composed with argument parameterizations.

A gate is g(x) = activation(theta(x)) with value in [0, 1]. Supported
activations: sigmoid, gaussian, bump (compactly supported) and bump_tanh
(bump composed with tanh, which keeps the argument inside the bump support).

Argument parameterizations and their flat parameter layouts:

  mlp             [mlp params(, amp)]     theta = MLP(x); bump_tanh gates carry an
                                          output amplitude e*sigmoid(amp)
  radial          [c (d), r~, s~]         theta = s * (r - ||x - c||)
  ellipsoid       [c (d), a~ (d), s~, b]  theta = s * (1 - sum a_i (x-c)_i^2) + b
  shell           [c (d), r1~, gap~, s~]  theta from normalized radius t(x)
  fourier_shell   [c (2), (r1~,) s~, a0, a1, b1, ..., aK, bK]
  harmonic_shell  [c (d), s~, monomial coefficients up to degree L]

Quantities marked ~ are stored unconstrained and mapped through
softplus(.) + RHO_MIN so radii, gaps and sharpness stay positive under
unconstrained optimization; direction-dependent radii are additionally
clamped from below at RHO_MIN.

Shell-family gates use the normalized radial coordinate
t(x) = (||x - c|| - r1(n)) / (r2(n) - r1(n)) with n = (x - c)/||x - c||
(n := e_1 at x = c). The activation argument is s*(2t - 1) for bump and
gaussian activations (a smooth indicator of the shell region) and s*(1 - t)
for the sigmoid (a monotone, ball-like acceptance).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, ShapeError
from .numeric import (
    MlpShape,
    dsoftplus,
    make_rng,
    mlp_backward,
    mlp_forward,
    mlp_init,
    softplus,
    softplus_inv,
)

RHO_MIN = 1e-3

ACTIVATIONS = ("sigmoid", "gaussian", "bump", "bump_tanh")
PARAMETERIZATIONS = ("mlp", "radial", "ellipsoid", "shell",
                     "fourier_shell", "harmonic_shell")


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

def _bump(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    v = np.zeros_like(t)
    dv = np.zeros_like(t)
    ti = t[inside]
    w = 1.0 - ti * ti
    vi = np.exp(-1.0 / w)
    v[inside] = vi
    dv[inside] = vi * (-2.0 * ti / (w * w))
    return v, dv


def activation_eval(kind: str, t):
    """Evaluate an activation and its derivative; value is always in [0, 1]."""
    t = np.asarray(t, dtype=float)
    if kind == "sigmoid":
        v = expit(t)
        return v, v * (1.0 - v)
    if kind == "gaussian":
        v = np.exp(-t * t)
        return v, -2.0 * t * v
    if kind == "bump":
        return _bump(t)
    if kind == "bump_tanh":
        u = np.tanh(t)
        v, dv = _bump(u)
        return v, dv * (1.0 - u * u)
    raise ConfigError(f"unknown activation {kind!r}")


# ---------------------------------------------------------------------------
# Gate specification
# ---------------------------------------------------------------------------

@dataclass
class GateSpec:
    activation: str
    kind: str
    dim: int
    params: np.ndarray
    meta: dict = field(default_factory=dict)

    def copy(self) -> "GateSpec":
        return GateSpec(self.activation, self.kind, self.dim,
                        self.params.copy(), dict(self.meta))


def gate_param_count(spec: GateSpec) -> int:
    """Number of trainable scalars in the gate."""
    return int(spec.params.size)


def _mlp_shape(spec: GateSpec) -> MlpShape:
    return MlpShape((spec.dim, *spec.meta["hidden"], 1))


def _mlp_scaled(spec: GateSpec) -> bool:
    # bump_tanh MLP gates carry a trainable output amplitude (one extra scalar).
    return spec.kind == "mlp" and bool(
        spec.meta.get("scaled", spec.activation == "bump_tanh"))


def harmonic_monomials(dim: int, degree: int):
    """Monomial exponent tuples of the unit direction, total degree <= degree."""
    monos = [()]
    if degree >= 1:
        monos += [(i,) for i in range(dim)]
    if degree >= 2:
        monos += [(i, j) for i in range(dim) for j in range(i, dim)]
    if degree > 2:
        raise ConfigError("harmonic degree > 2 not supported")
    return monos


def harmonic_coeff_count(dim: int, degree: int) -> int:
    return len(harmonic_monomials(dim, degree))


# ---------------------------------------------------------------------------
# Direction-dependent radii
# ---------------------------------------------------------------------------

def fourier_radius(coeffs: np.ndarray, angle):
    """a0 + sum_k (a_k cos k@ + b_k sin k@), clamped from below at RHO_MIN."""
    angle = np.asarray(angle, dtype=float)
    n_terms = (len(coeffs) - 1) // 2
    r = np.full_like(angle, coeffs[0], dtype=float)
    for k in range(1, n_terms + 1):
        r = r + coeffs[2 * k - 1] * np.cos(k * angle) + coeffs[2 * k] * np.sin(k * angle)
    return np.maximum(r, RHO_MIN)


def harmonic_radius(coeffs: np.ndarray, degree: int, direction):
    """Polynomial in the unit-direction components, clamped at RHO_MIN."""
    nhat = np.atleast_2d(np.asarray(direction, dtype=float))
    monos = harmonic_monomials(nhat.shape[1], degree)
    if len(coeffs) != len(monos):
        raise ShapeError(f"expected {len(monos)} coefficients, got {len(coeffs)}")
    basis = _monomial_basis(nhat, monos)
    r = basis @ np.asarray(coeffs, dtype=float)
    return np.maximum(r, RHO_MIN)


def _monomial_basis(nhat: np.ndarray, monos) -> np.ndarray:
    cols = []
    for m in monos:
        col = np.ones(nhat.shape[0])
        for i in m:
            col = col * nhat[:, i]
        cols.append(col)
    return np.stack(cols, axis=1)


def _monomial_basis_grad(nhat: np.ndarray, monos) -> np.ndarray:
    """(n, n_monos, d) array of d(mono)/d(nhat)."""
    n, d = nhat.shape
    out = np.zeros((n, len(monos), d))
    for mi, m in enumerate(monos):
        if len(m) == 1:
            out[:, mi, m[0]] += 1.0
        elif len(m) == 2:
            i, j = m
            out[:, mi, i] += nhat[:, j]
            out[:, mi, j] += nhat[:, i]
    return out


# ---------------------------------------------------------------------------
# Argument evaluation and gradients (batched over x)
# ---------------------------------------------------------------------------

def _delta_rho_nhat(spec: GateSpec, x: np.ndarray):
    c = spec.params[:spec.dim]
    delta = x - c
    rho = np.linalg.norm(delta, axis=1)
    nhat = np.zeros_like(delta)
    nz = rho > 0.0
    nhat[nz] = delta[nz] / rho[nz, None]
    nhat[~nz, 0] = 1.0  # direction undefined at the center; pick e_1
    return delta, rho, nhat


def _shell_u(spec: GateSpec, t, s):
    """Map normalized radius to activation argument (see module docstring)."""
    if spec.activation == "sigmoid":
        return s * (1.0 - t), -s
    return s * (2.0 * t - 1.0), 2.0 * s


def _arg_eval(spec: GateSpec, x: np.ndarray):
    p = spec.params
    d = spec.dim
    if spec.kind == "mlp":
        shape = _mlp_shape(spec)
        npar = shape.param_count()
        out, acts = mlp_forward(shape, p[:npar], x)
        theta = out[:, 0]
        return theta, (acts, theta)

    if spec.kind == "radial":
        delta, rho, _ = _delta_rho_nhat(spec, x)
        r = softplus(p[d]) + RHO_MIN
        s = softplus(p[d + 1]) + RHO_MIN
        return s * (r - rho), (delta, rho, r, s)

    if spec.kind == "ellipsoid":
        c = p[:d]
        delta = x - c
        a = softplus(p[d:2 * d]) + RHO_MIN
        s = softplus(p[2 * d]) + RHO_MIN
        b = p[2 * d + 1]
        q = (delta * delta) @ a
        return s * (1.0 - q) + b, (delta, a, s, q)

    if spec.kind == "shell":
        delta, rho, _ = _delta_rho_nhat(spec, x)
        r1 = softplus(p[d]) + RHO_MIN
        gap = softplus(p[d + 1]) + RHO_MIN
        s = softplus(p[d + 2]) + RHO_MIN
        t = (rho - r1) / gap
        u, dudt = _shell_u(spec, t, s)
        return u, (delta, rho, r1, gap, s, t, dudt)

    if spec.kind == "fourier_shell":
        delta, rho, _ = _delta_rho_nhat(spec, x)
        inner = spec.meta.get("include_inner", True)
        pos = d
        r1 = softplus(p[pos]) + RHO_MIN if inner else 0.0
        pos += 1 if inner else 0
        s = softplus(p[pos]) + RHO_MIN
        coeffs = p[pos + 1:]
        angle = np.arctan2(delta[:, 1], delta[:, 0])
        gap = fourier_radius(coeffs, angle)
        t = (rho - r1) / gap
        u, dudt = _shell_u(spec, t, s)
        return u, (delta, rho, r1, s, coeffs, angle, gap, t, dudt)

    if spec.kind == "harmonic_shell":
        delta, rho, nhat = _delta_rho_nhat(spec, x)
        s = softplus(p[d]) + RHO_MIN
        coeffs = p[d + 1:]
        degree = spec.meta["degree"]
        r2 = harmonic_radius(coeffs, degree, nhat)
        t = rho / r2
        u, dudt = _shell_u(spec, t, s)
        return u, (delta, rho, nhat, s, coeffs, r2, t, dudt)

    raise ConfigError(f"unknown gate parameterization {spec.kind!r}")


def _arg_grad(spec: GateSpec, x: np.ndarray, cache, upstream: np.ndarray) -> np.ndarray:
    """Accumulated gradient of sum(upstream * theta(x)) w.r.t. spec.params."""
    p = spec.params
    d = spec.dim
    g = np.zeros_like(p)
    up = np.asarray(upstream, dtype=float)

    if spec.kind == "mlp":
        shape = _mlp_shape(spec)
        npar = shape.param_count()
        acts, theta = cache
        gm, _ = mlp_backward(shape, p[:npar], acts, up[:, None])
        g[:npar] = gm
        return g

    if spec.kind == "radial":
        delta, rho, r, s = cache
        safe = rho > 0.0
        dc = np.zeros_like(delta)
        dc[safe] = (s / rho[safe, None]) * delta[safe]
        g[:d] = up @ dc
        g[d] = float(np.sum(up) * s * dsoftplus(p[d]))
        g[d + 1] = float(up @ (r - rho) * dsoftplus(p[d + 1]))
        return g

    if spec.kind == "ellipsoid":
        delta, a, s, q = cache
        g[:d] = (up * 2.0 * s) @ (delta * a)
        g[d:2 * d] = (-s) * (up @ (delta * delta)) * dsoftplus(p[d:2 * d])
        g[2 * d] = float(up @ (1.0 - q)) * dsoftplus(p[2 * d])
        g[2 * d + 1] = float(np.sum(up))
        return g

    if spec.kind == "shell":
        delta, rho, r1, gap, s, t, dudt = cache
        ut = up * dudt  # d/dt of the objective
        safe = rho > 0.0
        dtdc = np.zeros_like(delta)
        dtdc[safe] = -delta[safe] / (rho[safe, None] * gap)
        g[:d] = ut @ dtdc
        g[d] = float(np.sum(ut) * (-1.0 / gap) * dsoftplus(p[d]))
        g[d + 1] = float(ut @ (-(rho - r1) / gap ** 2) * dsoftplus(p[d + 1]))
        u_over_s = _shell_u(spec, t, 1.0)[0]
        g[d + 2] = float(up @ u_over_s) * dsoftplus(p[d + 2])
        return g

    if spec.kind == "fourier_shell":
        delta, rho, r1, s, coeffs, angle, gap, t, dudt = cache
        inner = spec.meta.get("include_inner", True)
        ut = up * dudt
        active = gap > RHO_MIN  # clamp region gets zero radius gradients
        n_terms = (len(coeffs) - 1) // 2
        basis = np.ones((x.shape[0], len(coeffs)))
        dgap_dangle = np.zeros(x.shape[0])
        for k in range(1, n_terms + 1):
            ck, sk = np.cos(k * angle), np.sin(k * angle)
            basis[:, 2 * k - 1] = ck
            basis[:, 2 * k] = sk
            dgap_dangle += k * (-coeffs[2 * k - 1] * sk + coeffs[2 * k] * ck)
        dgap_dangle[~active] = 0.0
        rho2 = rho * rho
        safe = rho > 0.0
        # d(angle)/dc = (delta_2, -delta_1) / rho^2 ; d(rho)/dc = -delta/rho
        dtdc = np.zeros_like(delta)
        dtdc[safe, 0] = (-delta[safe, 0] / rho[safe]) / gap[safe] \
            - (t[safe] / gap[safe]) * dgap_dangle[safe] * (delta[safe, 1] / rho2[safe])
        dtdc[safe, 1] = (-delta[safe, 1] / rho[safe]) / gap[safe] \
            - (t[safe] / gap[safe]) * dgap_dangle[safe] * (-delta[safe, 0] / rho2[safe])
        g[:d] = ut @ dtdc
        pos = d
        if inner:
            g[pos] = float(np.sum(ut * (-1.0 / gap)) * dsoftplus(p[pos]))
            pos += 1
        u_over_s = _shell_u(spec, t, 1.0)[0]
        g[pos] = float(up @ u_over_s) * dsoftplus(p[pos])
        dtdcoef = np.where(active, -t / gap, 0.0)[:, None] * basis
        g[pos + 1:] = ut @ dtdcoef
        return g

    if spec.kind == "harmonic_shell":
        delta, rho, nhat, s, coeffs, r2, t, dudt = cache
        degree = spec.meta["degree"]
        monos = harmonic_monomials(d, degree)
        ut = up * dudt
        active = r2 > RHO_MIN
        basis = _monomial_basis(nhat, monos)
        grad_r2 = np.einsum("m,nmd->nd", coeffs, _monomial_basis_grad(nhat, monos))
        grad_r2[~active] = 0.0
        safe = rho > 0.0
        ndot = np.sum(grad_r2 * nhat, axis=1)
        # dt/dc = -nhat/r2 + (grad_r2 - nhat (nhat . grad_r2)) / r2^2
        dtdc = np.zeros_like(delta)
        dtdc[safe] = (-nhat[safe] / r2[safe, None]
                      + (grad_r2[safe] - nhat[safe] * ndot[safe, None]) / (r2[safe, None] ** 2))
        g[:d] = ut @ dtdc
        u_over_s = _shell_u(spec, t, 1.0)[0]
        g[d] = float(up @ u_over_s) * dsoftplus(p[d])
        dtdcoef = np.where(active, -t / r2, 0.0)[:, None] * basis
        g[d + 1:] = ut @ dtdcoef
        return g

    raise ConfigError(f"unknown gate parameterization {spec.kind!r}")


# ---------------------------------------------------------------------------
# Public gate interface
# ---------------------------------------------------------------------------

def gate_eval(spec: GateSpec, x: np.ndarray):
    """Evaluate the gate on a batch (n, d); returns (g in [0,1] (n,), cache)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != spec.dim:
        raise ShapeError(f"input dim {x.shape[1]} != gate dim {spec.dim}")
    theta, argcache = _arg_eval(spec, x)
    v, dv = activation_eval(spec.activation, theta)
    if _mlp_scaled(spec):
        # trainable output amplitude e*sigmoid(a): lets the bump (peak e^-1)
        # reach full acceptance while keeping g < 1
        lam = np.e * expit(spec.params[-1])
        return lam * v, (dv, argcache, v, lam)
    return v, (dv, argcache)


def gate_grad(spec: GateSpec, x: np.ndarray, cache, upstream) -> np.ndarray:
    """Gradient of sum(upstream * g(x)) w.r.t. the gate's flat parameters."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if _mlp_scaled(spec):
        dv, argcache, v, lam = cache
        up = np.broadcast_to(np.asarray(upstream, dtype=float), dv.shape)
        grad = _arg_grad(spec, x, argcache, up * dv * lam)
        sig = lam / np.e
        grad[-1] = float(up @ v) * np.e * sig * (1.0 - sig)
        return grad
    dv, argcache = cache
    up = np.broadcast_to(np.asarray(upstream, dtype=float), dv.shape)
    return _arg_grad(spec, x, argcache, up * dv)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def mlp_gate(dim: int, hidden, activation: str = "sigmoid",
             rng: np.random.Generator | None = None) -> GateSpec:
    rng = rng if rng is not None else make_rng(0)
    shape = MlpShape((dim, *hidden, 1))
    flat = mlp_init(shape, rng)
    scaled = activation == "bump_tanh"
    if scaled:
        # amplitude e*sigmoid(a) = 1 at init, matching the unscaled bump
        flat = np.concatenate([flat, [-np.log(np.e - 1.0)]])
    return GateSpec(activation, "mlp", dim, flat,
                    {"hidden": list(hidden), "scaled": scaled})


def radial_gate(center, radius: float, sharpness: float,
                activation: str = "sigmoid") -> GateSpec:
    c = np.asarray(center, dtype=float)
    params = np.concatenate([c, [softplus_inv(radius - RHO_MIN),
                                 softplus_inv(sharpness - RHO_MIN)]])
    return GateSpec(activation, "radial", c.size, params)


def ellipsoid_gate(center, axes, sharpness: float = 1.0, bias: float = 0.0,
                   activation: str = "sigmoid") -> GateSpec:
    c = np.asarray(center, dtype=float)
    a = np.asarray(axes, dtype=float)
    params = np.concatenate([c, softplus_inv(a - RHO_MIN),
                             [softplus_inv(sharpness - RHO_MIN), bias]])
    return GateSpec(activation, "ellipsoid", c.size, params)


def shell_gate(center, r1: float, r2: float, sharpness: float = 1.0,
               activation: str = "bump") -> GateSpec:
    if not r2 > r1 >= 0:
        raise ConfigError("shell requires r2 > r1 >= 0")
    c = np.asarray(center, dtype=float)
    r1_eff = max(r1, 2 * RHO_MIN)
    gap = max(r2 - r1_eff, 2 * RHO_MIN)
    params = np.concatenate([c, [softplus_inv(r1_eff - RHO_MIN),
                                 softplus_inv(gap - RHO_MIN),
                                 softplus_inv(sharpness - RHO_MIN)]])
    return GateSpec(activation, "shell", c.size, params)


def fourier_shell_gate(center, r1: float, outer_coeffs, sharpness: float = 1.0,
                       include_inner: bool = True,
                       activation: str = "bump") -> GateSpec:
    c = np.asarray(center, dtype=float)
    if c.size != 2:
        raise ConfigError("fourier_shell is two-dimensional only")
    coeffs = np.asarray(outer_coeffs, dtype=float)
    if coeffs.size % 2 != 1:
        raise ConfigError("fourier coefficients must be [a0, a1, b1, ...]")
    parts = [c]
    if include_inner:
        parts.append([softplus_inv(max(r1, 2 * RHO_MIN) - RHO_MIN)])
    parts.append([softplus_inv(sharpness - RHO_MIN)])
    parts.append(coeffs)
    return GateSpec(activation, "fourier_shell", 2, np.concatenate(parts),
                    {"include_inner": include_inner,
                     "n_terms": (coeffs.size - 1) // 2})


def harmonic_shell_gate(center, degree: int, coeffs=None, radius: float = 1.0,
                        sharpness: float = 1.0,
                        activation: str = "sigmoid") -> GateSpec:
    c = np.asarray(center, dtype=float)
    n_coeff = harmonic_coeff_count(c.size, degree)
    if coeffs is None:
        coeffs = np.zeros(n_coeff)
        coeffs[0] = radius
    coeffs = np.asarray(coeffs, dtype=float)
    params = np.concatenate([c, [softplus_inv(sharpness - RHO_MIN)], coeffs])
    return GateSpec(activation, "harmonic_shell", c.size, params,
                    {"degree": int(degree)})


def random_gate(kind: str, dim: int, rng: np.random.Generator,
                activation: str | None = None) -> GateSpec:
    """A random well-formed gate; used by property and acceptance tests."""
    if activation is None:
        activation = ACTIVATIONS[rng.integers(len(ACTIVATIONS))]
    center = rng.normal(size=dim)
    if kind == "mlp":
        return mlp_gate(dim, [int(rng.integers(2, 9))], activation, rng)
    if kind == "radial":
        return radial_gate(center, rng.uniform(0.3, 2.0), rng.uniform(0.5, 3.0),
                           activation)
    if kind == "ellipsoid":
        return ellipsoid_gate(center, rng.uniform(0.2, 2.0, size=dim),
                              rng.uniform(0.5, 3.0), rng.normal(), activation)
    if kind == "shell":
        r1 = rng.uniform(0.05, 0.8)
        return shell_gate(center, r1, r1 + rng.uniform(0.3, 1.5),
                          rng.uniform(0.5, 3.0), activation)
    if kind == "fourier_shell":
        n_terms = int(rng.integers(1, 4))
        coeffs = np.concatenate([[rng.uniform(0.8, 2.0)],
                                 rng.uniform(-0.15, 0.15, size=2 * n_terms)])
        return fourier_shell_gate(center[:2], rng.uniform(0.05, 0.5), coeffs,
                                  rng.uniform(0.5, 3.0), activation=activation)
    if kind == "harmonic_shell":
        degree = int(rng.integers(0, 3))
        coeffs = np.zeros(harmonic_coeff_count(dim, degree))
        coeffs[0] = rng.uniform(0.8, 2.0)
        if coeffs.size > 1:
            coeffs[1:] = rng.uniform(-0.1, 0.1, size=coeffs.size - 1)
        return harmonic_shell_gate(center, degree, coeffs,
                                   sharpness=rng.uniform(0.5, 3.0),
                                   activation=activation)
    raise ConfigError(f"unknown gate parameterization {kind!r}")
