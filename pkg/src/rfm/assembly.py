"""Collocation system assembly.

Rows are grouped as interior conditions, boundary conditions, patch
interface continuity conditions, then pointwise pins; within each group
points run in collocation order with the condition rows of one point kept
adjacent.  Columns follow the model's layout (component-major, patches in
construction order, global features last within each component).

The matrix is stored unweighted; per-row rescale factors live alongside it
so rescaling is exactly reproducible and can be recomputed at any time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import RfmModel, feature_block
from .geometry import CollocationSet
from .problems import BoundaryStencil, OperatorStencil, PdeProblem


@dataclass(frozen=True)
class RowMeta:
    """Provenance of one matrix row (which condition at which point)."""

    kind: str  # "interior" | "boundary" | "interface" | "pin"
    row: int  # condition row within the point's block
    point: tuple[float, ...]
    tag: str = ""


@dataclass
class WeightedSystem:
    """A @ u ~ b with per-row rescale weights kept separate from A."""

    matrix: np.ndarray
    rhs: np.ndarray
    weights: np.ndarray
    meta: list[RowMeta]
    model: RfmModel
    problem: PdeProblem
    n_interior_rows: int
    n_boundary_rows: int
    n_interface_rows: int
    n_pin_rows: int
    zero_rows: np.ndarray = field(default_factory=lambda: np.empty(0, int))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def n_collocation(self) -> int:
        """Number of distinct collocation points behind the rows."""
        meta_pts = {(m.kind, m.point) for m in self.meta}
        return len(meta_pts)

    def weighted_matrix(self) -> np.ndarray:
        return self.weights[:, None] * self.matrix

    def weighted_rhs(self) -> np.ndarray:
        return self.weights * self.rhs

    def rescale(self, scale: float = 100.0) -> "WeightedSystem":
        """Set each row's weight to scale / max_j |A_ij| (1 for zero rows).

        Weights are always computed from the raw matrix, so calling this
        twice is the same as calling it once.
        """
        rowmax = np.abs(self.matrix).max(axis=1)
        zero = rowmax == 0.0
        w = np.ones_like(rowmax)
        np.divide(scale, rowmax, out=w, where=~zero)
        self.weights = w
        self.zero_rows = np.flatnonzero(zero)
        return self

    def residual(self, coefficients: np.ndarray) -> np.ndarray:
        return self.matrix @ coefficients - self.rhs

    def loss(self, coefficients: np.ndarray) -> float:
        """Norm of the weighted residual, the quantity least squares minimizes."""
        return float(np.linalg.norm(self.weights * self.residual(coefficients)))

    def dump(self, path) -> None:
        """Raw binary dump: int64 header (rows, cols, interior-condition count),
        then the matrix row-major, the right-hand side, and the weights."""
        n, m = self.matrix.shape
        with open(path, "wb") as fh:
            fh.write(np.asarray([n, m, self.problem.k_interior], np.int64).tobytes())
            fh.write(np.ascontiguousarray(self.matrix, np.float64).tobytes())
            fh.write(np.asarray(self.rhs, np.float64).tobytes())
            fh.write(np.asarray(self.weights, np.float64).tobytes())


def load_system_dump(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Read back a dump(): (matrix, rhs, weights, interior-condition count)."""
    raw = np.fromfile(path, np.uint8)
    n, m, k = np.frombuffer(raw[:24].tobytes(), np.int64)
    body = np.frombuffer(raw[24:].tobytes(), np.float64)
    a = body[: n * m].reshape(n, m)
    b = body[n * m : n * m + n]
    w = body[n * m + n :]
    return a, b, w, int(k)


# ----------------------------------------------------------------------
# row construction
# ----------------------------------------------------------------------


def _fill_stencil_rows(
    a: np.ndarray,
    start: int,
    model: RfmModel,
    points: np.ndarray,
    stencil: OperatorStencil | BoundaryStencil,
    normals: np.ndarray | None = None,
) -> None:
    """Scatter one stencil's conditions for a batch of points into ``a``.

    Row index of condition ``row`` at point ``p`` is start + p*n_rows + row.
    """
    n_rows = stencil.n_rows
    base = start + np.arange(len(points)) * n_rows
    comps = sorted({t.comp for t in stencil.terms})
    for comp in comps:
        terms = [t for t in stencil.terms if t.comp == comp]
        alphas = stencil.alphas_for(comp)
        for n in range(len(model.patches)):
            mask = model.support_mask(n, points)
            if not mask.any():
                continue
            blocks = model.basis_block(n, comp, points[mask], alphas)
            cols = model.col_slice(comp, n)
            sub_n = None if normals is None else normals[mask]
            for t in terms:
                coeff = t.coeff_at(points[mask], sub_n)
                a[base[mask] + t.row, cols] += coeff[:, None] * blocks[t.alpha]
        if model.global_patch is not None:
            blocks = feature_block(model.global_patch, comp, points, alphas)
            cols = model.global_col_slice(comp)
            for t in terms:
                coeff = t.coeff_at(points, normals)
                a[base + t.row, cols] += coeff[:, None] * blocks[t.alpha]


def _fill_interface_rows(
    a: np.ndarray, start: int, model: RfmModel, colloc: CollocationSet
) -> None:
    """Continuity of value and normal first derivative across patch facets.

    Each interface point contributes, per component, a value row and a
    derivative row; the lower patch enters with +, the upper with -.  Only
    the two adjacent local feature blocks are involved: any global
    expansion is smooth across the facet, so its columns cancel.
    """
    iface = colloc.interface
    pts = iface.points
    axes = np.argmax(np.abs(iface.normals), axis=1)
    block = 2 * model.n_components
    for (m, n, axis) in {
        (int(p[0]), int(p[1]), int(ax)) for p, ax in zip(iface.pairs, axes)
    }:
        sel = np.flatnonzero(
            (iface.pairs[:, 0] == m) & (iface.pairs[:, 1] == n) & (axes == axis)
        )
        sub = pts[sel]
        alpha0 = (0,) * model.dim
        alpha1 = tuple(1 if ax == axis else 0 for ax in range(model.dim))
        base = start + sel * block
        for comp in range(model.n_components):
            lo = feature_block(model.patches[m], comp, sub, [alpha0, alpha1])
            hi = feature_block(model.patches[n], comp, sub, [alpha0, alpha1])
            for k, alpha in enumerate((alpha0, alpha1)):
                rows = base + 2 * comp + k
                a[rows, model.col_slice(comp, m)] += lo[alpha]
                a[rows, model.col_slice(comp, n)] -= hi[alpha]


def assemble(
    problem: PdeProblem, model: RfmModel, colloc: CollocationSet
) -> WeightedSystem:
    """Build the full collocation system for a problem/model pair."""
    if model.dim != problem.domain.dim or model.n_components != problem.n_components:
        raise ValueError("model does not match the problem layout")

    k_i, k_b = problem.k_interior, problem.k_boundary
    n_int = colloc.n_interior * k_i
    n_bnd = colloc.n_boundary * k_b
    n_ifc = colloc.n_interface * 2 * model.n_components
    pins = problem.extra_point_conditions
    n_rows = n_int + n_bnd + n_ifc + len(pins)
    a = np.zeros((n_rows, model.n_columns))
    b = np.zeros(n_rows)
    meta: list[RowMeta] = []

    # interior conditions
    _fill_stencil_rows(a, 0, model, colloc.interior, problem.operator)
    b[:n_int] = problem.forcing_values(colloc.interior).ravel()
    for p in colloc.interior:
        meta.extend(RowMeta("interior", k, tuple(p)) for k in range(k_i))

    # boundary conditions, grouped per stencil but kept in collocation order
    tags = np.asarray(colloc.boundary_tags)
    start = n_int
    order = np.arange(colloc.n_boundary)
    for st in problem.boundary:
        sel = order[np.isin(tags, st.tags)]
        if len(sel) == 0:
            continue
        _fill_stencil_rows(
            a,
            start,
            model,
            colloc.boundary_points[sel],
            st,
            colloc.boundary_normals[sel],
        )
        vals = problem.boundary_values(
            colloc.boundary_points[sel],
            colloc.boundary_normals[sel],
            [colloc.boundary_tags[i] for i in sel],
        )
        b[start : start + len(sel) * k_b] = vals.ravel()
        for i in sel:
            meta.extend(
                RowMeta("boundary", k, tuple(colloc.boundary_points[i]), colloc.boundary_tags[i])
                for k in range(k_b)
            )
        start += len(sel) * k_b

    # interface continuity (right-hand side stays zero)
    if colloc.n_interface:
        _fill_interface_rows(a, start, model, colloc)
        for p, pair in zip(colloc.interface.points, colloc.interface.pairs):
            tag = "%d|%d" % (pair[0], pair[1])
            for comp in range(model.n_components):
                meta.append(RowMeta("interface", 2 * comp, tuple(p), tag))
                meta.append(RowMeta("interface", 2 * comp + 1, tuple(p), tag))
        start += n_ifc

    # pointwise pins
    for j, (point, comp, value) in enumerate(pins):
        pt = np.asarray([point], float)
        for n in range(len(model.patches)):
            if model.support_mask(n, pt)[0]:
                blk = model.basis_block(n, comp, pt, [(0,) * model.dim])
                a[start + j, model.col_slice(comp, n)] += blk[(0,) * model.dim][0]
        if model.global_patch is not None:
            blk = feature_block(model.global_patch, comp, pt, [(0,) * model.dim])
            a[start + j, model.global_col_slice(comp)] += blk[(0,) * model.dim][0]
        b[start + j] = value
        meta.append(RowMeta("pin", comp, tuple(point)))

    return WeightedSystem(
        matrix=a,
        rhs=b,
        weights=np.ones(n_rows),
        meta=meta,
        model=model,
        problem=problem,
        n_interior_rows=n_int,
        n_boundary_rows=n_bnd,
        n_interface_rows=n_ifc,
        n_pin_rows=len(pins),
    )
