#
# This file is part of pyncvd
#
# https://github.com/pyncvd/pyncvd.git
#
# Copyright (c) 2024 pyncvd developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""
Analytic test cases of the variable-density natural convection system in
sigma form (sigma = sqrt(rho)):

    sigma_t + div(sigma u) = g2
    sigma (sigma u)_t - mu lap u + rho (u.grad) u + u div(rho u) / 2
        + grad p = f,    div u = 0
    sigma (sigma theta)_t - kappa lap theta + rho u.grad theta
        + theta div(rho u) / 2 = g

The forcings f, g and g2 of a case are computed from the analytic
derivatives of its exact fields; `residual_oracle` checks them against
finite differences of the exact fields.
"""
__all__ = ['ExactSolution', 'ManufacturedCase2D', 'ManufacturedCase3D',
           'ZeroCase', 'StabilityCase', 'build_case_2d', 'build_case_3d',
           'residuals', 'residual_oracle', 'sample_grid']

import numpy as np

# - global parameters ------------------------------
FD_STEP = 1e-5
FD_STEP_2ND = 1e-4


# - local functions --------------------------------
def _cubic(s):
    """Return s^2 (1 - s)."""
    return s * s * (1 - s)


def _cubic_d(s):
    return 2 * s - 3 * s * s


def _cubic_dd(s):
    return 2 - 6 * s


# - class ExactSolution ----------------------------
class ExactSolution:
    """Space-time fields of a test case with derived forcings.

    All evaluators take points of shape (..., dim) and a time t. Vector
    fields return shape (..., dim), gradients of vector fields shape
    (..., dim, dim) with entry [i, j] the derivative of component i in
    direction j.

    Parameters
    ----------
    mu :  float
       Viscosity the forcings are derived under
    kappa :  float
       Thermal conductivity the forcings are derived under
    f_shift :  float
       Constant added to every component of f (debugging aid)
    """
    name = 'exact'
    dim = 2
    has_exact = True

    def __init__(self, mu=0.1, kappa=0.1, f_shift=0.) -> None:
        if mu <= 0 or kappa <= 0:
            raise ValueError('mu and kappa should be positive')
        self.mu = mu
        self.kappa = kappa
        self.f_shift = f_shift

    def __repr__(self) -> str:
        class_name = type(self).__name__
        return f'{class_name}(mu={self.mu}, kappa={self.kappa})'

    # ---------- exact fields ----------
    def sigma(self, pts, t):
        raise NotImplementedError

    def sigma_t(self, pts, t):
        raise NotImplementedError

    def sigma_grad(self, pts, t):
        raise NotImplementedError

    def u(self, pts, t):
        raise NotImplementedError

    def u_t(self, pts, t):
        raise NotImplementedError

    def u_grad(self, pts, t):
        raise NotImplementedError

    def u_lap(self, pts, t):
        raise NotImplementedError

    def p(self, pts, t):
        raise NotImplementedError

    def p_grad(self, pts, t):
        raise NotImplementedError

    def theta(self, pts, t):
        raise NotImplementedError

    def theta_t(self, pts, t):
        raise NotImplementedError

    def theta_grad(self, pts, t):
        raise NotImplementedError

    def theta_lap(self, pts, t):
        raise NotImplementedError

    def rho(self, pts, t):
        """Return the density sigma^2.
        """
        return self.sigma(pts, t) ** 2

    def u_div(self, pts, t):
        """Return the divergence of the velocity.
        """
        return np.trace(self.u_grad(pts, t), axis1=-2, axis2=-1)

    def _rho_flux_div(self, pts, t):
        """Return div(rho u) = 2 sigma grad(sigma).u + rho div u.
        """
        sig = self.sigma(pts, t)
        vel = self.u(pts, t)
        return (2 * sig * np.sum(self.sigma_grad(pts, t) * vel, axis=-1)
                + sig * sig * self.u_div(pts, t))

    # ---------- forcings ----------
    def g2_eval(self, pts, t):
        """Return the source of the sigma equation.
        """
        return (self.sigma_t(pts, t)
                + np.sum(self.sigma_grad(pts, t) * self.u(pts, t), axis=-1)
                + self.sigma(pts, t) * self.u_div(pts, t))

    def f_eval(self, pts, t):
        """Return the momentum forcing.
        """
        sig = self.sigma(pts, t)[..., None]
        vel = self.u(pts, t)
        advect = np.einsum('...ij,...j->...i', self.u_grad(pts, t), vel)
        return (sig * self.sigma_t(pts, t)[..., None] * vel
                + sig * sig * self.u_t(pts, t)
                - self.mu * self.u_lap(pts, t)
                + sig * sig * advect
                + 0.5 * vel * self._rho_flux_div(pts, t)[..., None]
                + self.p_grad(pts, t) + self.f_shift)

    def g_eval(self, pts, t):
        """Return the heat source.
        """
        sig = self.sigma(pts, t)
        temp = self.theta(pts, t)
        advect = np.sum(self.u(pts, t) * self.theta_grad(pts, t), axis=-1)
        return (sig * self.sigma_t(pts, t) * temp
                + sig * sig * self.theta_t(pts, t)
                - self.kappa * self.theta_lap(pts, t)
                + sig * sig * advect
                + 0.5 * temp * self._rho_flux_div(pts, t))


# - class ManufacturedCase2D -----------------------
class ManufacturedCase2D(ExactSolution):
    """Smooth exact solution on the unit square.

    sigma = 2 + x(1-x) cos(sin t) + y(1-y) sin(sin t),
    u = t^3 (y^2(1-y), x^2(1-x)), p = t x + y - (t+1)/2,
    theta = t^3 (x^2(1-x) + y^2(1-y)).
    """
    name = 'mms2d'

    @staticmethod
    def _time_factors(t):
        return (np.cos(np.sin(t)), np.sin(np.sin(t)),
                -np.sin(np.sin(t)) * np.cos(t), np.cos(np.sin(t)) * np.cos(t))

    def sigma(self, pts, t):
        xx, yy = pts[..., 0], pts[..., 1]
        aa, bb, _, _ = self._time_factors(t)
        return 2 + xx * (1 - xx) * aa + yy * (1 - yy) * bb

    def sigma_t(self, pts, t):
        xx, yy = pts[..., 0], pts[..., 1]
        _, _, da, db = self._time_factors(t)
        return xx * (1 - xx) * da + yy * (1 - yy) * db

    def sigma_grad(self, pts, t):
        xx, yy = pts[..., 0], pts[..., 1]
        aa, bb, _, _ = self._time_factors(t)
        return np.stack([(1 - 2 * xx) * aa, (1 - 2 * yy) * bb], axis=-1)

    def u(self, pts, t):
        return t**3 * np.stack([_cubic(pts[..., 1]), _cubic(pts[..., 0])],
                               axis=-1)

    def u_t(self, pts, t):
        return 3 * t**2 * np.stack([_cubic(pts[..., 1]),
                                    _cubic(pts[..., 0])], axis=-1)

    def u_grad(self, pts, t):
        res = np.zeros(pts.shape[:-1] + (2, 2))
        res[..., 0, 1] = t**3 * _cubic_d(pts[..., 1])
        res[..., 1, 0] = t**3 * _cubic_d(pts[..., 0])
        return res

    def u_lap(self, pts, t):
        return t**3 * np.stack([_cubic_dd(pts[..., 1]),
                                _cubic_dd(pts[..., 0])], axis=-1)

    def p(self, pts, t):
        return t * pts[..., 0] + pts[..., 1] - (t + 1) / 2

    def p_grad(self, pts, t):
        res = np.ones(pts.shape)
        res[..., 0] = t
        return res

    def theta(self, pts, t):
        return t**3 * (_cubic(pts[..., 0]) + _cubic(pts[..., 1]))

    def theta_t(self, pts, t):
        return 3 * t**2 * (_cubic(pts[..., 0]) + _cubic(pts[..., 1]))

    def theta_grad(self, pts, t):
        return t**3 * np.stack([_cubic_d(pts[..., 0]),
                                _cubic_d(pts[..., 1])], axis=-1)

    def theta_lap(self, pts, t):
        return t**3 * (_cubic_dd(pts[..., 0]) + _cubic_dd(pts[..., 1]))


# - class ManufacturedCase3D -----------------------
class ManufacturedCase3D(ManufacturedCase2D):
    """Smooth exact solution on the unit cube (evaluators only).

    sigma = 2 + x(1-x) cos(sin t) + (y(1-y) + z(1-z)) sin(sin t),
    u = t^3 (y^2(1-y), z^2(1-z), x^2(1-x)),
    p = (2x-1)(2y-1)(2z-1) exp(-t),
    theta = t^3 (x^2(1-x) + y^2(1-y) + z^2(1-z)).
    """
    name = 'mms3d'
    dim = 3

    def sigma(self, pts, t):
        zz = pts[..., 2]
        _, bb, _, _ = self._time_factors(t)
        return super().sigma(pts, t) + zz * (1 - zz) * bb

    def sigma_t(self, pts, t):
        zz = pts[..., 2]
        _, _, _, db = self._time_factors(t)
        return super().sigma_t(pts, t) + zz * (1 - zz) * db

    def sigma_grad(self, pts, t):
        _, bb, _, _ = self._time_factors(t)
        return np.concatenate([super().sigma_grad(pts, t),
                               ((1 - 2 * pts[..., 2]) * bb)[..., None]],
                              axis=-1)

    @staticmethod
    def _rotated(func, pts):
        return np.stack([func(pts[..., 1]), func(pts[..., 2]),
                         func(pts[..., 0])], axis=-1)

    def u(self, pts, t):
        return t**3 * self._rotated(_cubic, pts)

    def u_t(self, pts, t):
        return 3 * t**2 * self._rotated(_cubic, pts)

    def u_grad(self, pts, t):
        res = np.zeros(pts.shape[:-1] + (3, 3))
        res[..., 0, 1] = t**3 * _cubic_d(pts[..., 1])
        res[..., 1, 2] = t**3 * _cubic_d(pts[..., 2])
        res[..., 2, 0] = t**3 * _cubic_d(pts[..., 0])
        return res

    def u_lap(self, pts, t):
        return t**3 * self._rotated(_cubic_dd, pts)

    def p(self, pts, t):
        return np.prod(2 * pts - 1, axis=-1) * np.exp(-t)

    def p_grad(self, pts, t):
        lin = 2 * pts - 1
        return 2 * np.exp(-t) * np.stack(
            [lin[..., 1] * lin[..., 2], lin[..., 0] * lin[..., 2],
             lin[..., 0] * lin[..., 1]], axis=-1)

    def theta(self, pts, t):
        return t**3 * np.sum(_cubic(pts), axis=-1)

    def theta_t(self, pts, t):
        return 3 * t**2 * np.sum(_cubic(pts), axis=-1)

    def theta_grad(self, pts, t):
        return t**3 * _cubic_d(pts)

    def theta_lap(self, pts, t):
        return t**3 * np.sum(_cubic_dd(pts), axis=-1)


# - class ZeroCase ---------------------------------
class ZeroCase(ExactSolution):
    """Fluid at rest: sigma = 1, all other fields and sources zero.
    """
    name = 'zero'

    def _zeros(self, pts, shape=()):
        return np.zeros(pts.shape[:-1] + shape)

    def sigma(self, pts, t):
        return np.ones(pts.shape[:-1])

    def sigma_t(self, pts, t):
        return self._zeros(pts)

    def sigma_grad(self, pts, t):
        return self._zeros(pts, (self.dim,))

    def u(self, pts, t):
        return self._zeros(pts, (self.dim,))

    u_t = u
    u_lap = u
    p_grad = u

    def u_grad(self, pts, t):
        return self._zeros(pts, (self.dim, self.dim))

    def p(self, pts, t):
        return self._zeros(pts)

    theta = p
    theta_t = p
    theta_lap = p
    theta_grad = sigma_grad


# - class StabilityCase ----------------------------
class StabilityCase(ExactSolution):
    """Initial data of a source-free run without exact solution.

    sigma_0 = 2 + x(1-x), u_0 = curl of x^2(1-x)^2 y^2(1-y)^2,
    theta_0 = sin(pi x) sin(pi y); the velocity vanishes on the boundary.
    """
    name = 'stability'
    has_exact = False

    def sigma(self, pts, t):
        xx = pts[..., 0]
        return 2 + xx * (1 - xx)

    def u(self, pts, t):
        xx, yy = pts[..., 0], pts[..., 1]
        sx = xx * xx * (1 - xx) ** 2
        sy = yy * yy * (1 - yy) ** 2
        dsx = 2 * xx * (1 - xx) * (1 - 2 * xx)
        dsy = 2 * yy * (1 - yy) * (1 - 2 * yy)
        return np.stack([sx * dsy, -dsx * sy], axis=-1)

    def theta(self, pts, t):
        return np.sin(np.pi * pts[..., 0]) * np.sin(np.pi * pts[..., 1])

    def g2_eval(self, pts, t):
        return np.zeros(pts.shape[:-1])

    def f_eval(self, pts, t):
        return np.zeros(pts.shape)

    g_eval = g2_eval


# - main functions ---------------------------------
def build_case_2d(mu=0.1, kappa=0.1, f_shift=0.) -> ManufacturedCase2D:
    """Return the two-dimensional manufactured case.
    """
    return ManufacturedCase2D(mu, kappa, f_shift)


def build_case_3d(mu=0.1, kappa=0.1, f_shift=0.) -> ManufacturedCase3D:
    """Return the three-dimensional manufactured case (no solver).
    """
    return ManufacturedCase3D(mu, kappa, f_shift)


def sample_grid(dim=2, n_pts=10, t_final=1.) -> np.ndarray:
    """Return cell-centred space-time sample points, shape (n^(dim+1), dim+1).
    """
    coords = (np.arange(n_pts) + 0.5) / n_pts
    axes = [coords] * dim + [t_final * coords]
    grid = np.meshgrid(*axes, indexing='ij')
    return np.stack([x.reshape(-1) for x in grid], axis=1)


def _fd_grad(func, pts, t, step=FD_STEP):
    """Central differences of func in every space direction, axis -1.
    """
    res = []
    for j in range(pts.shape[-1]):
        shift = np.zeros(pts.shape[-1])
        shift[j] = step
        res.append((func(pts + shift, t) - func(pts - shift, t)) / (2 * step))
    return np.stack(res, axis=-1)


def _fd_lap(func, pts, t, step=FD_STEP_2ND):
    """Central second differences summed over the space directions.
    """
    center = func(pts, t)
    res = 0.
    for j in range(pts.shape[-1]):
        shift = np.zeros(pts.shape[-1])
        shift[j] = step
        res = res + (func(pts + shift, t) - 2 * center
                     + func(pts - shift, t)) / step**2
    return res


def _fd_dt(func, pts, t, step=FD_STEP):
    return (func(pts, t + step) - func(pts, t - step)) / (2 * step)


def residuals(case: ExactSolution, sample_points) -> np.ndarray:
    """Return the PDE residuals of a case by finite differences.

    Parameters
    ----------
    case :  ExactSolution
    sample_points :  array_like, shape (npts, dim + 1)
       Space-time points (x, y[, z], t)

    Returns
    -------
    ndarray, shape (npts, 4)
       Absolute residual of the sigma, momentum (max over components),
       divergence and temperature equations
    """
    samples = np.atleast_2d(np.asarray(sample_points, dtype=float))
    res = np.empty((samples.shape[0], 4))
    for ii, sample in enumerate(samples):
        pts, t = sample[None, :-1], sample[-1]

        def sigma_u(x, s):
            return case.sigma(x, s)[..., None] * case.u(x, s)

        def rho_u(x, s):
            return case.rho(x, s)[..., None] * case.u(x, s)

        def sigma_theta(x, s):
            return case.sigma(x, s) * case.theta(x, s)

        sig = case.sigma(pts, t)
        rho = sig * sig
        vel = case.u(pts, t)
        temp = case.theta(pts, t)
        grad_u = _fd_grad(case.u, pts, t)
        div_rho_u = np.trace(_fd_grad(rho_u, pts, t), axis1=-2, axis2=-1)

        mass = (_fd_dt(case.sigma, pts, t)
                + np.trace(_fd_grad(sigma_u, pts, t), axis1=-2, axis2=-1)
                - case.g2_eval(pts, t))
        momentum = (sig[..., None] * _fd_dt(sigma_u, pts, t)
                    - case.mu * _fd_lap(case.u, pts, t)
                    + rho[..., None] * np.einsum('...ij,...j->...i',
                                                 grad_u, vel)
                    + 0.5 * vel * div_rho_u[..., None]
                    + _fd_grad(case.p, pts, t)
                    - case.f_eval(pts, t))
        energy = (sig * _fd_dt(sigma_theta, pts, t)
                  - case.kappa * _fd_lap(case.theta, pts, t)
                  + rho * np.sum(vel * _fd_grad(case.theta, pts, t), axis=-1)
                  + 0.5 * temp * div_rho_u
                  - case.g_eval(pts, t))
        res[ii] = [np.abs(mass).max(), np.abs(momentum).max(),
                   np.abs(np.trace(grad_u, axis1=-2, axis2=-1)).max(),
                   np.abs(energy).max()]
    return res


def residual_oracle(case: ExactSolution, sample_points) -> float:
    """Return the maximum absolute residual of a case.

    Derivatives of the exact fields are replaced by central finite
    differences (step 1e-5, 1e-4 for second derivatives) and the analytic
    forcings are subtracted.
    """
    return float(residuals(case, sample_points).max())
