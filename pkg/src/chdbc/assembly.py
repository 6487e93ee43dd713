"""P1 finite element assembly on a disk mesh with boundary coupling.

The inner product and the energy bilinear form both have a bulk part
(integrals over the triangles) and a surface part (integrals along the
boundary polygon, where the tangential gradient of a P1 function reduces to
the along-edge difference quotient). All integrands are polynomial, so the
element matrices are exact closed forms and no quadrature error enters.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh2D

# Reference P1 mass matrix on a triangle, to be scaled by area/12.
_TRI_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
# Reference P1 mass matrix on a segment, to be scaled by length/6.
_SEG_MASS = np.array([[2.0, 1.0], [1.0, 2.0]])
_SEG_STIFF = np.array([[1.0, -1.0], [-1.0, 1.0]])


def _tri_geometry(mesh: Mesh2D):
    p = mesh.nodes[mesh.triangles]  # (t, 3, 2)
    # b_i = y_j - y_k and c_i = x_k - x_j for cyclic (i, j, k)
    b = p[:, [1, 2, 0], 1] - p[:, [2, 0, 1], 1]
    c = p[:, [2, 0, 1], 0] - p[:, [1, 2, 0], 0]
    area = 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    return b, c, area


def _scatter(n, conn, blocks) -> sp.csr_matrix:
    # COO duplicates are summed in a deterministic order by the CSR
    # conversion, so repeated assembly is bit-identical.
    w = conn.shape[1]
    rows = np.repeat(conn, w, axis=1).ravel()
    cols = np.tile(conn, (1, w)).ravel()
    mat = sp.csr_matrix((blocks.reshape(-1), (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    return mat


def assemble_bulk_mass(mesh: Mesh2D) -> sp.csr_matrix:
    """Triangle part of the mass matrix (no boundary contribution)."""
    _, _, area = _tri_geometry(mesh)
    blocks = area[:, None, None] / 12.0 * _TRI_MASS
    return _scatter(mesh.node_count, mesh.triangles, blocks)


def assemble_surface_mass(mesh: Mesh2D) -> sp.csr_matrix:
    """Boundary-segment part of the mass matrix."""
    d = mesh.nodes[mesh.boundary_edges[:, 1]] - mesh.nodes[mesh.boundary_edges[:, 0]]
    length = np.sqrt((d * d).sum(axis=1))
    blocks = length[:, None, None] / 6.0 * _SEG_MASS
    return _scatter(mesh.node_count, mesh.boundary_edges, blocks)


def assemble_mass(mesh: Mesh2D) -> sp.csr_matrix:
    """Full mass matrix: bulk triangle mass plus boundary segment mass."""
    return assemble_bulk_mass(mesh) + assemble_surface_mass(mesh)


def assemble_bulk_stiffness(mesh: Mesh2D) -> sp.csr_matrix:
    """Triangle part of the stiffness matrix (gradient inner products)."""
    b, c, area = _tri_geometry(mesh)
    blocks = (
        b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]
    ) / (4.0 * area)[:, None, None]
    return _scatter(mesh.node_count, mesh.triangles, blocks)


def assemble_surface_stiffness(mesh: Mesh2D) -> sp.csr_matrix:
    """Boundary part: tangential-gradient products, (1/L)[[1,-1],[-1,1]]."""
    d = mesh.nodes[mesh.boundary_edges[:, 1]] - mesh.nodes[mesh.boundary_edges[:, 0]]
    length = np.sqrt((d * d).sum(axis=1))
    blocks = 1.0 / length[:, None, None] * _SEG_STIFF
    return _scatter(mesh.node_count, mesh.boundary_edges, blocks)


def assemble_stiffness(mesh: Mesh2D) -> sp.csr_matrix:
    """Full stiffness matrix: bulk gradients plus boundary tangential part."""
    return assemble_bulk_stiffness(mesh) + assemble_surface_stiffness(mesh)


def _apply_pointwise(f: Callable, x, y, t: float) -> np.ndarray:
    """Evaluate a scalar field at node coordinates, vectorized when possible."""
    try:
        out = np.asarray(f(x, y, t), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(xi), float(yi), t)) for xi, yi in zip(x, y)])


def nodal_interpolate(f: Callable, mesh: Mesh2D, t: float) -> np.ndarray:
    """Nodal interpolation: entry i is f(x_i, y_i, t).

    Raises ValueError naming the first node at which f is non-finite.
    """
    vals = _apply_pointwise(f, mesh.nodes[:, 0], mesh.nodes[:, 1], t)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(
            f"field evaluated to {vals[i]} at node {i} "
            f"({mesh.nodes[i, 0]}, {mesh.nodes[i, 1]}), t={t}"
        )
    return vals


def load_vector(M: sp.spmatrix, f_nodes: np.ndarray) -> np.ndarray:
    """Load vector of an interpolated source: exactly M @ f_nodes."""
    f_nodes = np.asarray(f_nodes, dtype=float)
    if f_nodes.shape != (M.shape[0],):
        raise ValueError(
            f"vector length {f_nodes.shape} does not match matrix "
            f"dimension {M.shape[0]}"
        )
    return M @ f_nodes


def _apply_scalar_map(F: Callable, u: np.ndarray) -> np.ndarray:
    # overflow to inf is fine here: non-finite outputs get reported by the
    # caller with the offending node index
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(F(u), dtype=float)
        if out.shape == u.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(F(float(v))) for v in u])


def nonlinearity_vector(M: sp.spmatrix, F: Callable, u_nodes: np.ndarray) -> np.ndarray:
    """Nonlinear load M @ F(u_nodes), F applied entrywise.

    The nonlinearity is interpolated at the nodes before integration, the
    same treatment the plain load vector gets.
    """
    u_nodes = np.asarray(u_nodes, dtype=float)
    if u_nodes.shape != (M.shape[0],):
        raise ValueError(
            f"vector length {u_nodes.shape} does not match matrix "
            f"dimension {M.shape[0]}"
        )
    vals = _apply_scalar_map(F, u_nodes)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(f"nonlinearity returned {vals[i]} at node {i}")
    return M @ vals


def dump_matrix(matrix: sp.spmatrix) -> str:
    """Coordinate text dump 'i j value', sorted by (i, j), one per line."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [
        f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}"
        for k in order
    ]
    return "\n".join(lines) + ("\n" if lines else "")
