"""Energy, weak gradient and tangent matrix of the discrete functional sum(area * f(grad w))."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from fhm_lab.errors import NumericalError
from fhm_lab.geometry.mesher import Mesh
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.fields import ScalarField, triangle_gradients


def _flux(F: Integrand, g: np.ndarray) -> np.ndarray:
    # grad f extends continuously by 0 at eta = 0 for every p > 1
    if F.epsilon == 0.0 and F.p < 2.0:
        out = np.zeros_like(g)
        nz = np.any(g != 0.0, axis=1)
        if nz.any():
            out[nz] = F.gradient(g[nz])
        return out
    return F.gradient(g)


def energy_density(m: Mesh, values: np.ndarray, F: Integrand) -> np.ndarray:
    return m.areas * F.value(triangle_gradients(m, values))


def discrete_energy(m: Mesh, values: np.ndarray, F: Integrand) -> float:
    e = float(energy_density(m, values, F).sum())
    if not np.isfinite(e):
        raise NumericalError("energy is not finite")
    return e


def weak_gradient(m: Mesh, values: np.ndarray, F: Integrand) -> np.ndarray:
    """dE/du_i = sum_T area <grad f(grad w_T), grad phi_i>, shape (N,)."""
    flux = _flux(F, triangle_gradients(m, values))
    local = m.areas[:, None] * np.einsum("mk,mik->mi", flux, m.basis_gradients)
    return np.bincount(m.triangles.ravel(), weights=local.ravel(), minlength=m.n_vertices)


def tangent_matrix(m: Mesh, values: np.ndarray, F: Integrand) -> sp.csr_matrix:
    """Sparse second variation: area * B_i^T D^2 f B_j per triangle."""
    H = F.hessian(triangle_gradients(m, values))
    B = m.basis_gradients
    local = m.areas[:, None, None] * np.einsum("mik,mkl,mjl->mij", B, H, B)
    rows = np.repeat(m.triangles, 3, axis=1).ravel()
    cols = np.tile(m.triangles, (1, 3)).ravel()
    n = m.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def energy(w: ScalarField, F: Integrand) -> float:
    return discrete_energy(w.mesh, w.values, F)


def residual(u: ScalarField, F: Integrand) -> float:
    """Euclidean norm of the weak-form vector over interior test functions."""
    g = weak_gradient(u.mesh, u.values, F)
    return float(np.linalg.norm(g[u.mesh.interior_nodes]))
