"""Expectation values, reduced densities, entropy, purity and occupations."""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .errors import NumericalError
from .spin_algebra import ComplexMatrix, HalfInteger, RealArray, build_spin_matrices, format_m

logger = logging.getLogger(__name__)

NEGATIVE_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class SiteObservables:
    """Spin expectation values (units of hbar) and entropy (bits) of one site."""

    site: int
    sx: float
    sy: float
    sz: float
    entropy: float

    @property
    def vector(self) -> RealArray:
        return np.array([self.sx, self.sy, self.sz])

    @property
    def length(self) -> float:
        return spin_length(self)


def expectation(state: ComplexMatrix, op: ComplexMatrix) -> complex:
    """<psi|op|psi> for a state vector, Tr(rho op) for a density matrix.

    Raises:
        ValueError: On a dimension mismatch
    """
    dim = state.shape[0]
    if op.shape != (dim, dim):
        raise ValueError(f"Operator shape {op.shape} does not match state dimension {dim}")
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    if state.shape != op.shape:
        raise ValueError(f"Density shape {state.shape} does not match operator {op.shape}")
    return complex(np.einsum("ij,ji->", state, op))


def _site_split(site: int, n_sites: int, dim_site: int, dim: int) -> Tuple[int, int, int]:
    if not 1 <= site <= n_sites:
        raise ValueError(f"Site {site} out of range 1..{n_sites}")
    if dim != dim_site**n_sites:
        raise ValueError(f"Dimension {dim} is not {dim_site}^{n_sites}")
    return dim_site ** (site - 1), dim_site, dim_site ** (n_sites - site)


def reduced_density(rho: ComplexMatrix, site: int, n_sites: int, dim_site: int) -> ComplexMatrix:
    """Partial trace over every site except `site` (1-based).

    The density is viewed, not copied, as a (left, site, right) tensor in the
    site-major Kronecker layout.

    Raises:
        ValueError: On a dimension mismatch or an out-of-range site
    """
    left, d, right = _site_split(site, n_sites, dim_site, rho.shape[0])
    if rho.shape != (rho.shape[0], rho.shape[0]):
        raise ValueError(f"Density must be square, got {rho.shape}")
    tensor = rho.reshape(left, d, right, left, d, right)
    result: ComplexMatrix = np.einsum("aibajb->ij", tensor)
    return result


def reduced_density_from_state(
    psi: ComplexMatrix, site: int, n_sites: int, dim_site: int
) -> ComplexMatrix:
    """Reduced density of one site directly from a pure state."""
    left, d, right = _site_split(site, n_sites, dim_site, psi.shape[0])
    tensor = psi.reshape(left, d, right)
    result: ComplexMatrix = np.einsum("aib,ajb->ij", tensor, tensor.conj())
    return result


def _clamped_spectrum(rho: ComplexMatrix) -> RealArray:
    eigenvalues = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if eigenvalues[0] < -NEGATIVE_EIGENVALUE_TOL:
        raise NumericalError(f"Density matrix has negative eigenvalue {eigenvalues[0]:.3e}")
    clamped: RealArray = np.clip(eigenvalues, 0.0, None)
    return clamped


def von_neumann_entropy(rho: ComplexMatrix) -> float:
    """-Tr(rho log2 rho) in bits; 0 log 0 = 0.

    Raises:
        NumericalError: If an eigenvalue is below -1e-10
    """
    p = _clamped_spectrum(rho)
    p = p[p > 0.0]
    entropy = float(-np.sum(p * np.log2(p)))
    return max(0.0, entropy)


def purity(rho: ComplexMatrix) -> float:
    """Tr(rho^2)."""
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def spin_length(site: SiteObservables) -> float:
    """|<S>| of one site."""
    return float(np.linalg.norm([site.sx, site.sy, site.sz]))


def site_observables(psi: ComplexMatrix, n_sites: int, spin: HalfInteger) -> List[SiteObservables]:
    """Spin expectations and entanglement entropy for every site of a pure state."""
    matrices = build_spin_matrices(spin)
    sites: List[SiteObservables] = []
    for n in range(1, n_sites + 1):
        rho_n = reduced_density_from_state(psi, n, n_sites, matrices.dim)
        sx, sy, sz = (float(np.real(expectation(rho_n, s))) for s in matrices.components)
        sites.append(SiteObservables(site=n, sx=sx, sy=sy, sz=sz, entropy=von_neumann_entropy(rho_n)))
    return sites


def _site_label(twice_m: int, spin: HalfInteger) -> str:
    if spin.twice_value == 1:
        return "u" if twice_m > 0 else "d"
    return format_m(twice_m)


def basis_twice_m(n_sites: int, spin: HalfInteger) -> List[List[int]]:
    """2m of every site for each product basis state, in Kronecker order."""
    per_site = [spin.twice_value - 2 * i for i in range(spin.dimension)]
    return [list(combo) for combo in itertools.product(per_site, repeat=n_sites)]


def basis_labels(n_sites: int, spin: HalfInteger) -> List[str]:
    """Labels like "uud" (S = 1/2) or "+1_0_-1" (S >= 1) in Kronecker order."""
    separator = "" if spin.twice_value == 1 else "_"
    return [
        separator.join(_site_label(m, spin) for m in combo)
        for combo in basis_twice_m(n_sites, spin)
    ]


def basis_occupations(psi: ComplexMatrix, n_sites: int, spin: HalfInteger) -> Dict[str, float]:
    """|<m1 m2 ... | psi>|^2 for every product basis state."""
    labels = basis_labels(n_sites, spin)
    if psi.shape != (len(labels),):
        raise ValueError(f"State shape {psi.shape} does not match {len(labels)} basis states")
    probabilities = np.abs(psi) ** 2
    return {label: float(p) for label, p in zip(labels, probabilities)}


def magnetization_class_labels(n_sites: int, spin: HalfInteger) -> List[str]:
    """Total-m class labels from +NS down to -NS."""
    top = n_sites * spin.twice_value
    return [format_m(m) for m in range(top, -top - 1, -2)]


def magnetization_classes(psi: ComplexMatrix, n_sites: int, spin: HalfInteger) -> Dict[str, float]:
    """Occupation summed over basis states of equal total m."""
    totals = [sum(combo) for combo in basis_twice_m(n_sites, spin)]
    probabilities = np.abs(psi) ** 2
    classes = {label: 0.0 for label in magnetization_class_labels(n_sites, spin)}
    for total, p in zip(totals, probabilities):
        classes[format_m(total)] += float(p)
    return classes
