"""Linear PDE problems as collocation stencils plus manufactured data.

A problem couples an interior operator stencil (conditions applied at every
interior point), one boundary stencil per group of boundary segments, and
optional pointwise pins (e.g. fixing the pressure at one corner).  When an
exact solution with closed-form derivatives is attached, forcing and
boundary data are generated by applying the stencils to it, so the same
machinery serves manufactured-solution verification and real data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Domain, Hole, box, disk, interval


# ----------------------------------------------------------------------
# stencils
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One addend c(x) * D^alpha u_comp contributing to condition ``row``."""

    row: int
    comp: int
    alpha: tuple[int, ...]
    coeff: float | Callable

    def coeff_at(self, points: np.ndarray, normals: np.ndarray | None = None) -> np.ndarray:
        if callable(self.coeff):
            got = self.coeff(points) if normals is None else self.coeff(points, normals)
            return np.asarray(got, float)
        return np.full(len(points), float(self.coeff))


@dataclass(frozen=True)
class OperatorStencil:
    """Interior conditions: n_rows linear combinations of derivatives."""

    terms: tuple[Term, ...]
    n_rows: int
    n_components: int
    dim: int

    def __post_init__(self) -> None:
        for t in self.terms:
            if len(t.alpha) != self.dim or sum(t.alpha) > 2:
                raise ValueError("operator terms must have |alpha| <= 2 in dim %d" % self.dim)
            if not (0 <= t.row < self.n_rows and 0 <= t.comp < self.n_components):
                raise ValueError("term indices out of range")

    def alphas_for(self, comp: int) -> list[tuple[int, ...]]:
        return sorted({t.alpha for t in self.terms if t.comp == comp})

    def apply_to_exact(self, exact: "ManufacturedSolution", points: np.ndarray) -> np.ndarray:
        out = np.zeros((len(points), self.n_rows))
        for t in self.terms:
            out[:, t.row] += t.coeff_at(points) * exact.deriv(t.comp, points, t.alpha)
        return out


@dataclass(frozen=True)
class BoundaryStencil:
    """Boundary conditions on a group of segment tags (|alpha| <= 1)."""

    tags: tuple[str, ...]
    terms: tuple[Term, ...]
    n_rows: int
    n_components: int
    dim: int

    def __post_init__(self) -> None:
        for t in self.terms:
            if len(t.alpha) != self.dim or sum(t.alpha) > 1:
                raise ValueError("boundary terms must have |alpha| <= 1")
            if not (0 <= t.row < self.n_rows and 0 <= t.comp < self.n_components):
                raise ValueError("term indices out of range")

    def alphas_for(self, comp: int) -> list[tuple[int, ...]]:
        return sorted({t.alpha for t in self.terms if t.comp == comp})

    def apply_to_exact(
        self, exact: "ManufacturedSolution", points: np.ndarray, normals: np.ndarray
    ) -> np.ndarray:
        out = np.zeros((len(points), self.n_rows))
        for t in self.terms:
            out[:, t.row] += t.coeff_at(points, normals) * exact.deriv(t.comp, points, t.alpha)
        return out


# ----------------------------------------------------------------------
# manufactured solutions
# ----------------------------------------------------------------------


class ManufacturedSolution:
    """Closed-form solution with derivatives up to second order."""

    n_components: int = 1

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        zero = (0,) * points.shape[1]
        return np.column_stack(
            [self.deriv(c, points, zero) for c in range(self.n_components)]
        )


@dataclass(frozen=True)
class CosineSum:
    """sum_j amp_j cos(freq_j t + phase_j); derivatives shift the phase."""

    amps: tuple[float, ...]
    freqs: tuple[float, ...]
    phases: tuple[float, ...]

    def __call__(self, t: np.ndarray, order: int = 0) -> np.ndarray:
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        for a, w, p in zip(self.amps, self.freqs, self.phases):
            out += a * w**order * np.cos(w * t + p + order * np.pi / 2.0)
        return out


class WaveProduct1D(ManufacturedSolution):
    """Product of two wave packets plus a constant shift."""

    def __init__(self, f1: CosineSum, f2: CosineSum, const: float = 0.0):
        self.f1, self.f2, self.const = f1, f2, const

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        x = np.atleast_2d(points)[:, 0]
        m = alpha[0]
        from math import comb

        out = sum(
            comb(m, j) * self.f1(x, j) * self.f2(x, m - j) for j in range(m + 1)
        )
        if m == 0:
            out = out + self.const
        return out


class ToneSum1D(ManufacturedSolution):
    """Sum of fixed-frequency tones plus a constant shift."""

    def __init__(self, tones: CosineSum, const: float = 0.0):
        self.tones, self.const = tones, const

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        x = np.atleast_2d(points)[:, 0]
        out = self.tones(x, alpha[0])
        if alpha[0] == 0:
            out = out + self.const
        return out


class TensorWaves2D(ManufacturedSolution):
    """sum_i scale_i * gx_i(x) * gy_i(y) with separable derivatives."""

    def __init__(self, parts: list[tuple[float, CosineSum, CosineSum]]):
        self.parts = parts

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        return sum(s * gx(x, alpha[0]) * gy(y, alpha[1]) for s, gx, gy in self.parts)


def wave_product_1d() -> WaveProduct1D:
    """sin(3 pi x + 3 pi/20) cos(2 pi x + pi/10) + 2."""
    f1 = CosineSum((1.0,), (3 * np.pi,), (3 * np.pi / 20 - np.pi / 2,))
    f2 = CosineSum((1.0,), (2 * np.pi,), (np.pi / 10,))
    return WaveProduct1D(f1, f2, const=2.0)


def four_tones_1d() -> ToneSum1D:
    """Four incommensurate tones (frequencies 4, sqrt5, sqrt3, 1) plus 2."""
    s5, s3 = np.sqrt(5.0), np.sqrt(3.0)
    tones = CosineSum(
        amps=(4.0, 5.0, 2.0, 3.0),
        freqs=(4.0, s5, s3, 1.0),
        phases=(0.6, s5 * 0.35 - np.pi / 2, s3 * 0.05 - np.pi / 2, 0.85 - np.pi / 2),
    )
    return ToneSum1D(tones, const=2.0)


def two_band_2d(a_low: float = 1.0, b_high: float = 0.0) -> TensorWaves2D:
    """Separable waves with a low band (freq pi, 2pi) and a doubled band."""
    g1 = CosineSum((1.5, 2.0), (np.pi, 2 * np.pi), (2 * np.pi / 5, -np.pi / 5))
    g2 = CosineSum((1.5, 2.0), (2 * np.pi, 4 * np.pi), (4 * np.pi / 5, -2 * np.pi / 5))
    parts = []
    if a_low:
        parts.append((-a_low, g1, g1))
    if b_high:
        parts.append((-b_high, g2, g2))
    return TensorWaves2D(parts)


class BeamSolution(ManufacturedSolution):
    """Cantilever beam under end shear (plane stress), displacement (u, v)."""

    n_components = 2

    def __init__(self, length=10.0, depth=10.0, load=1000.0, e=3e7, nu=0.3):
        self.length, self.depth, self.load = length, depth, load
        self.e, self.nu = e, nu
        self.inertia = depth**3 / 12.0

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        L, D, nu = self.length, self.depth, self.nu
        c = self.load / (6.0 * self.e * self.inertia)
        if comp == 0:
            if alpha == (0, 0):
                return -c * y * ((6 * L - 3 * x) * x + (2 + nu) * (y * y - D * D / 4))
            if alpha == (1, 0):
                return -c * y * (6 * L - 6 * x)
            if alpha == (0, 1):
                return -c * ((6 * L - 3 * x) * x + (2 + nu) * (3 * y * y - D * D / 4))
            if alpha == (2, 0):
                return 6 * c * y
            if alpha == (0, 2):
                return -6 * c * (2 + nu) * y
            if alpha == (1, 1):
                return -c * (6 * L - 6 * x)
        else:
            if alpha == (0, 0):
                return c * (3 * nu * y * y * (L - x) + (4 + 5 * nu) * D * D * x / 4
                            + (3 * L - x) * x * x)
            if alpha == (1, 0):
                return c * (-3 * nu * y * y + (4 + 5 * nu) * D * D / 4 + 6 * L * x - 3 * x * x)
            if alpha == (0, 1):
                return 6 * c * nu * y * (L - x)
            if alpha == (2, 0):
                return c * (6 * L - 6 * x)
            if alpha == (0, 2):
                return 6 * c * nu * (L - x)
            if alpha == (1, 1):
                return -6 * c * nu * y
        raise ValueError("beam solution derivatives stop at order 2")


class PlateSolution(ManufacturedSolution):
    """Smooth 2D displacement field used on the holed-plate geometry."""

    n_components = 2

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        if comp == 0:
            # u = y ((x+10) sin y + (y+5) cos x) / 10
            if alpha == (0, 0):
                return 0.1 * y * ((x + 10) * np.sin(y) + (y + 5) * np.cos(x))
            if alpha == (1, 0):
                return 0.1 * y * (np.sin(y) - (y + 5) * np.sin(x))
            if alpha == (0, 1):
                return 0.1 * ((x + 10) * (np.sin(y) + y * np.cos(y)) + (2 * y + 5) * np.cos(x))
            if alpha == (2, 0):
                return -0.1 * y * (y + 5) * np.cos(x)
            if alpha == (0, 2):
                return 0.1 * ((x + 10) * (2 * np.cos(y) - y * np.sin(y)) + 2 * np.cos(x))
            if alpha == (1, 1):
                return 0.1 * (np.sin(y) + y * np.cos(y) - (2 * y + 5) * np.sin(x))
        else:
            # v = y ((30 + 5x sin 5x)(4 + e^{-5y}) - 100) / 60
            w = 30.0 + 5.0 * x * np.sin(5 * x)
            wp = 5.0 * np.sin(5 * x) + 25.0 * x * np.cos(5 * x)
            wpp = 50.0 * np.cos(5 * x) - 125.0 * x * np.sin(5 * x)
            q = 4.0 + np.exp(-5 * y)
            qp = -5.0 * np.exp(-5 * y)
            qpp = 25.0 * np.exp(-5 * y)
            if alpha == (0, 0):
                return (y * w * q - 100.0 * y) / 60.0
            if alpha == (1, 0):
                return y * wp * q / 60.0
            if alpha == (0, 1):
                return (w * q + y * w * qp - 100.0) / 60.0
            if alpha == (2, 0):
                return y * wpp * q / 60.0
            if alpha == (0, 2):
                return (2.0 * w * qp + y * w * qpp) / 60.0
            if alpha == (1, 1):
                return (wp * q + y * wp * qp) / 60.0
        raise ValueError("plate solution derivatives stop at order 2")


class StokesPolySolution(ManufacturedSolution):
    """Divergence-free polynomial velocity with a cubic pressure."""

    n_components = 3

    def deriv(self, comp: int, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        if comp == 0:
            # u = x + x^2 - 2xy + x^3 - 3xy^2 + x^2 y
            if alpha == (0, 0):
                return x + x * x - 2 * x * y + x**3 - 3 * x * y * y + x * x * y
            if alpha == (1, 0):
                return 1 + 2 * x - 2 * y + 3 * x * x - 3 * y * y + 2 * x * y
            if alpha == (0, 1):
                return -2 * x - 6 * x * y + x * x
            if alpha == (2, 0):
                return 2 + 6 * x + 2 * y
            if alpha == (0, 2):
                return -6 * x
            if alpha == (1, 1):
                return -2 - 6 * y + 2 * x
        elif comp == 1:
            # v = -y - 2xy + y^2 - 3x^2 y + y^3 - xy^2
            if alpha == (0, 0):
                return -y - 2 * x * y + y * y - 3 * x * x * y + y**3 - x * y * y
            if alpha == (1, 0):
                return -2 * y - 6 * x * y - y * y
            if alpha == (0, 1):
                return -1 - 2 * x + 2 * y - 3 * x * x + 3 * y * y - 2 * x * y
            if alpha == (2, 0):
                return -6 * y
            if alpha == (0, 2):
                return 2 + 6 * y - 2 * x
            if alpha == (1, 1):
                return -2 - 6 * x - 2 * y
        else:
            # p = xy + x + y + x^3 y^2 - 4/3
            if alpha == (0, 0):
                return x * y + x + y + x**3 * y * y - 4.0 / 3.0
            if alpha == (1, 0):
                return y + 1 + 3 * x * x * y * y
            if alpha == (0, 1):
                return x + 1 + 2 * x**3 * y
            if alpha == (2, 0):
                return 6 * x * y * y
            if alpha == (0, 2):
                return 2 * x**3
            if alpha == (1, 1):
                return 1 + 6 * x * x * y
        raise ValueError("velocity/pressure derivatives stop at order 2")


# ----------------------------------------------------------------------
# material constants and coefficient fields
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ElasticityConstants:
    """Plane-stress material: sigma = E/(1-nu^2) [(1-nu) eps + nu tr(eps) I]."""

    e: float = 3e7
    nu: float = 0.3

    @property
    def stiffness(self) -> float:
        return self.e / (1.0 - self.nu**2)

    @property
    def shear_factor(self) -> float:
        return (1.0 - self.nu) / 2.0

    def stress(self, ux, uy, vx, vy) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.stiffness
        sx = c * (ux + self.nu * vy)
        sy = c * (vy + self.nu * ux)
        txy = c * self.shear_factor * (uy + vx)
        return sx, sy, txy


def exact_stress(
    constants: ElasticityConstants, exact: ManufacturedSolution, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Plane-stress stresses of a manufactured displacement field."""
    ux = exact.deriv(0, points, (1, 0))
    uy = exact.deriv(0, points, (0, 1))
    vx = exact.deriv(1, points, (1, 0))
    vy = exact.deriv(1, points, (0, 1))
    return constants.stress(ux, uy, vx, vy)


@dataclass(frozen=True)
class HomogenizationCoefficient:
    """a(x) = exp(h(x)) with h a truncated random Fourier series.

    Wavevectors run over the integer lattice with |k| <= bound; amplitudes
    are i.i.d. U[-amp, amp] drawn from a counter-based stream, so a seed
    pins the whole field.
    """

    seed: int = 0
    bound: int = 6
    amp: float = 0.3

    def _series(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ks = [
            (k1, k2)
            for k1 in range(-self.bound, self.bound + 1)
            for k2 in range(-self.bound, self.bound + 1)
            if k1 * k1 + k2 * k2 <= self.bound * self.bound
        ]
        lattice = np.asarray(ks, float)
        rng = np.random.Generator(
            np.random.Philox(key=np.array([self.seed, 0x636F6566], dtype=np.uint64))
        )
        a = rng.uniform(-self.amp, self.amp, len(lattice))
        b = rng.uniform(-self.amp, self.amp, len(lattice))
        return lattice, a, b

    def h(self, points: np.ndarray) -> np.ndarray:
        lattice, a, b = self._series()
        phase = 2.0 * np.pi * np.atleast_2d(points) @ lattice.T
        return np.sin(phase) @ a + np.cos(phase) @ b

    def value(self, points: np.ndarray) -> np.ndarray:
        return np.exp(self.h(points))

    def grad(self, points: np.ndarray) -> np.ndarray:
        lattice, a, b = self._series()
        pts = np.atleast_2d(points)
        phase = 2.0 * np.pi * pts @ lattice.T
        dh = np.empty_like(pts)
        for axis in range(2):
            w = 2.0 * np.pi * lattice[:, axis]
            dh[:, axis] = np.cos(phase) @ (w * a) - np.sin(phase) @ (w * b)
        return np.exp(self.h(pts))[:, None] * dh


# ----------------------------------------------------------------------
# problems
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PdeProblem:
    """A fully specified collocation problem on one domain."""

    name: str
    domain: Domain
    operator: OperatorStencil
    boundary: tuple[BoundaryStencil, ...]
    n_components: int
    exact: ManufacturedSolution | None = None
    forcing: Callable | None = None
    boundary_data: Callable | None = None
    extra_point_conditions: tuple[tuple[tuple[float, ...], int, float], ...] = ()
    constants: ElasticityConstants | None = None
    coefficient: HomogenizationCoefficient | None = None

    def __post_init__(self) -> None:
        covered: list[str] = []
        for st in self.boundary:
            covered.extend(st.tags)
        tags = self.domain.boundary_tags()
        if sorted(covered) != sorted(set(covered)) or set(covered) != set(tags):
            raise ValueError(
                "boundary stencils must cover every segment tag exactly once "
                "(domain has %s, stencils cover %s)" % (tags, covered)
            )
        rows = {st.n_rows for st in self.boundary}
        if len(rows) != 1:
            raise ValueError("all boundary stencils must share a row count")
        if self.exact is None and (self.forcing is None or self.boundary_data is None):
            raise ValueError("need either an exact solution or explicit data")
        if self.exact is not None and self.exact.n_components != self.n_components:
            raise ValueError("exact solution component count mismatch")

    @property
    def k_interior(self) -> int:
        return self.operator.n_rows

    @property
    def k_boundary(self) -> int:
        return self.boundary[0].n_rows

    def stencil_for_tag(self, tag: str) -> BoundaryStencil:
        for st in self.boundary:
            if tag in st.tags:
                return st
        raise KeyError("no boundary stencil covers tag %r" % tag)

    def forcing_values(self, points: np.ndarray) -> np.ndarray:
        if self.forcing is not None:
            return np.asarray(self.forcing(points), float).reshape(len(points), self.k_interior)
        return self.operator.apply_to_exact(self.exact, points)

    def boundary_values(
        self, points: np.ndarray, normals: np.ndarray, tags: list[str]
    ) -> np.ndarray:
        if self.boundary_data is not None:
            got = self.boundary_data(points, normals, tags)
            return np.asarray(got, float).reshape(len(points), self.k_boundary)
        out = np.zeros((len(points), self.k_boundary))
        tag_arr = np.asarray(tags)
        for st in self.boundary:
            mask = np.isin(tag_arr, st.tags)
            if mask.any():
                out[mask] = st.apply_to_exact(self.exact, points[mask], normals[mask])
        return out


# ----------------------------------------------------------------------
# factories
# ----------------------------------------------------------------------


def _dirichlet_stencil(tags, n_components, dim, comps=None) -> BoundaryStencil:
    comps = range(n_components) if comps is None else comps
    terms = tuple(
        Term(row, comp, (0,) * dim, 1.0) for row, comp in enumerate(comps)
    )
    return BoundaryStencil(tuple(tags), terms, len(terms), n_components, dim)


def make_helmholtz_1d(
    lam: float = 4.0,
    exact: ManufacturedSolution | None = None,
    domain: Domain | None = None,
) -> PdeProblem:
    """u'' - lam*u = f on an interval, Dirichlet at both endpoints."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    domain = domain or interval(0.0, 8.0)
    exact = exact or wave_product_1d()
    op = OperatorStencil(
        (Term(0, 0, (2,), 1.0), Term(0, 0, (0,), -lam)), 1, 1, 1
    )
    bc = _dirichlet_stencil(("left", "right"), 1, 1)
    return PdeProblem("helmholtz_1d", domain, op, (bc,), 1, exact=exact)


def make_poisson_2d(
    exact: ManufacturedSolution | None = None,
    domain: Domain | None = None,
) -> PdeProblem:
    """u_xx + u_yy = f on a box, Dirichlet on all four edges."""
    domain = domain or box((0.0, 0.0), (1.0, 1.0))
    exact = exact or two_band_2d()
    op = OperatorStencil(
        (Term(0, 0, (2, 0), 1.0), Term(0, 0, (0, 2), 1.0)), 1, 1, 2
    )
    bc = _dirichlet_stencil(domain.boundary_tags(), 1, 2)
    return PdeProblem("poisson_2d", domain, op, (bc,), 1, exact=exact)


def _traction_stencil(tags, constants: ElasticityConstants) -> BoundaryStencil:
    c = constants.stiffness
    g = constants.shear_factor
    nu = constants.nu

    def nx(points, normals):
        return normals[:, 0]

    def ny(points, normals):
        return normals[:, 1]

    terms = (
        # t_x = sigma_x n_x + tau n_y
        Term(0, 0, (1, 0), lambda p, n: c * n[:, 0]),
        Term(0, 1, (0, 1), lambda p, n: c * nu * n[:, 0]),
        Term(0, 0, (0, 1), lambda p, n: c * g * n[:, 1]),
        Term(0, 1, (1, 0), lambda p, n: c * g * n[:, 1]),
        # t_y = tau n_x + sigma_y n_y
        Term(1, 0, (0, 1), lambda p, n: c * g * n[:, 0]),
        Term(1, 1, (1, 0), lambda p, n: c * g * n[:, 0]),
        Term(1, 1, (0, 1), lambda p, n: c * n[:, 1]),
        Term(1, 0, (1, 0), lambda p, n: c * nu * n[:, 1]),
    )
    return BoundaryStencil(tuple(tags), terms, 2, 2, 2)


def make_elasticity_2d(
    domain: Domain,
    constants: ElasticityConstants,
    dirichlet_tags: tuple[str, ...],
    neumann_tags: tuple[str, ...],
    exact: ManufacturedSolution | None = None,
    body_force: Callable | None = None,
    boundary_data: Callable | None = None,
    name: str = "elasticity_2d",
) -> PdeProblem:
    """-div sigma(u) = B in plane stress; displacement on Gamma_D, traction on Gamma_N."""
    c = constants.stiffness
    g = constants.shear_factor
    mixed = c * (constants.nu + g)
    op = OperatorStencil(
        (
            Term(0, 0, (2, 0), -c),
            Term(0, 0, (0, 2), -c * g),
            Term(0, 1, (1, 1), -mixed),
            Term(1, 1, (0, 2), -c),
            Term(1, 1, (2, 0), -c * g),
            Term(1, 0, (1, 1), -mixed),
        ),
        2, 2, 2,
    )
    stencils = []
    if dirichlet_tags:
        stencils.append(_dirichlet_stencil(dirichlet_tags, 2, 2))
    if neumann_tags:
        stencils.append(_traction_stencil(neumann_tags, constants))
    return PdeProblem(
        name, domain, op, tuple(stencils), 2,
        exact=exact, forcing=body_force, boundary_data=boundary_data,
        constants=constants,
    )


def make_beam_problem(constants: ElasticityConstants | None = None) -> PdeProblem:
    """Cantilever beam: exact end-shear solution, displacement fixed at x=0."""
    constants = constants or ElasticityConstants()
    sol = BeamSolution(e=constants.e, nu=constants.nu)
    domain = box((0.0, 0.0), (sol.length, sol.depth))
    return make_elasticity_2d(
        domain, constants,
        dirichlet_tags=("left",),
        neumann_tags=("right", "bottom", "top"),
        exact=sol, name="beam_2d",
    )


DEFAULT_PLATE_HOLES = (
    Hole((1.6, 1.6), 0.45),
    Hole((6.2, 2.0), 0.55),
    Hole((2.3, 6.1), 0.5),
    Hole((5.9, 6.3), 0.4),
)


def make_plate_problem(
    holes: tuple[Hole, ...] = DEFAULT_PLATE_HOLES,
    constants: ElasticityConstants | None = None,
) -> PdeProblem:
    """Holed square plate with a smooth manufactured displacement field.

    Displacement is prescribed on the bottom edge, tractions everywhere
    else including the hole rims.
    """
    constants = constants or ElasticityConstants()
    domain = box((0.0, 0.0), (8.0, 8.0), holes=holes)
    neumann = tuple(t for t in domain.boundary_tags() if t != "bottom")
    return make_elasticity_2d(
        domain, constants,
        dirichlet_tags=("bottom",),
        neumann_tags=neumann,
        exact=PlateSolution(), name="plate_2d",
    )


def make_stokes_2d(
    domain: Domain,
    exact: ManufacturedSolution | None = None,
    boundary_velocity: Callable | None = None,
    pin_point: tuple[float, float] = (0.0, 0.0),
    pin_value: float | None = None,
    name: str = "stokes_2d",
) -> PdeProblem:
    """Steady Stokes flow: -Lap u + grad p = f, div u = 0, velocity Dirichlet.

    The pressure is only determined up to a constant by the PDE, so one
    extra condition pins it at ``pin_point`` (to the exact value for a
    manufactured run, or to the given value).
    """
    op = OperatorStencil(
        (
            Term(0, 0, (2, 0), -1.0),
            Term(0, 0, (0, 2), -1.0),
            Term(0, 2, (1, 0), 1.0),
            Term(1, 1, (2, 0), -1.0),
            Term(1, 1, (0, 2), -1.0),
            Term(1, 2, (0, 1), 1.0),
            Term(2, 0, (1, 0), 1.0),
            Term(2, 1, (0, 1), 1.0),
        ),
        3, 3, 2,
    )
    bc = _dirichlet_stencil(domain.boundary_tags(), 3, 2, comps=(0, 1))
    if pin_value is None:
        if exact is None:
            raise ValueError("flow runs must give an explicit pin value")
        pin_value = float(exact.deriv(2, np.array([pin_point]), (0, 0))[0])
    forcing = None
    boundary_data = None
    if boundary_velocity is not None:
        def forcing(points):
            return np.zeros((len(points), 3))

        boundary_data = boundary_velocity
    return PdeProblem(
        name, domain, op, (bc,), 3,
        exact=exact, forcing=forcing, boundary_data=boundary_data,
        extra_point_conditions=((tuple(pin_point), 2, pin_value),),
    )


DEFAULT_STOKES_HOLES = (
    Hole((0.5, 0.2), 0.1),
    Hole((0.2, 0.8), 0.1),
    Hole((0.8, 0.8), 0.1),
)


def make_stokes_manufactured(holes: tuple[Hole, ...] = DEFAULT_STOKES_HOLES) -> PdeProblem:
    domain = box((0.0, 0.0), (1.0, 1.0), holes=holes)
    return make_stokes_2d(domain, exact=StokesPolySolution(), name="stokes_poly_2d")


def make_channel_flow(holes: tuple[Hole, ...] = DEFAULT_STOKES_HOLES) -> PdeProblem:
    """Pressure-free channel: parabolic inflow/outflow at x=0 and x=1."""
    domain = box((0.0, 0.0), (1.0, 1.0), holes=holes)

    def profile(points, normals, tags):
        out = np.zeros((len(points), 2))
        on_ends = np.isin(np.asarray(tags), ("left", "right"))
        y = points[on_ends, 1]
        out[on_ends, 0] = y * (1.0 - y)
        return out

    return make_stokes_2d(
        domain, boundary_velocity=profile, pin_value=0.0, name="channel_flow_2d"
    )


def make_varcoef_elliptic(
    coef: HomogenizationCoefficient,
    forcing_value: float = 1.0,
    domain: Domain | None = None,
) -> PdeProblem:
    """-div(a grad u) = f on the unit disk, homogeneous Dirichlet."""
    domain = domain or disk((0.0, 0.0), 1.0)

    def neg_a(points):
        return -coef.value(points)

    def neg_ax(points):
        return -coef.grad(points)[:, 0]

    def neg_ay(points):
        return -coef.grad(points)[:, 1]

    op = OperatorStencil(
        (
            Term(0, 0, (2, 0), neg_a),
            Term(0, 0, (0, 2), neg_a),
            Term(0, 0, (1, 0), neg_ax),
            Term(0, 0, (0, 1), neg_ay),
        ),
        1, 1, 2,
    )
    bc = _dirichlet_stencil(domain.boundary_tags(), 1, 2)

    def forcing(points):
        return np.full((len(points), 1), float(forcing_value))

    def boundary_data(points, normals, tags):
        return np.zeros((len(points), 1))

    return PdeProblem(
        "varcoef_disk", domain, op, (bc,), 1,
        forcing=forcing, boundary_data=boundary_data, coefficient=coef,
    )
