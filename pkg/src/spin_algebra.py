"""Spin operators, multi-site embedding and the multivector expansion.

Conventions: hbar = 1, per-site basis ordered m = S, S-1, ..., -S, and the
multi-site Hilbert space is the Kronecker product with site 1 leftmost.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
RealArray = NDArray[np.float64]

AXES = ("x", "y", "z")


def _frozen(matrix: NDArray[np.complex128]) -> ComplexMatrix:
    """Mark an operator read-only so cached instances cannot be mutated."""
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, order=True)
class HalfInteger:
    """Spin quantum number stored exactly as twice its value."""

    twice_value: int

    def __post_init__(self) -> None:
        if self.twice_value < 0:
            raise ValueError(f"Spin must be non-negative, got 2S={self.twice_value}")

    @classmethod
    def parse(cls, value: Union[str, int, float, Fraction, "HalfInteger"]) -> "HalfInteger":
        """Build from "1/2", "1", 1.5, Fraction(3, 2) or another HalfInteger.

        Raises:
            ValueError: If the value is not a non-negative half-integer
        """
        if isinstance(value, HalfInteger):
            return value
        try:
            frac = Fraction(str(value).strip()) if isinstance(value, str) else Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Cannot parse spin value {value!r}: {e}") from e
        twice = frac * 2
        if twice.denominator != 1:
            raise ValueError(f"Spin must be a multiple of 1/2, got {value!r}")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2.0

    @property
    def dimension(self) -> int:
        """Single-site Hilbert space dimension 2S+1."""
        return self.twice_value + 1

    @property
    def casimir(self) -> float:
        """S(S+1)."""
        return self.value * (self.value + 1.0)

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


def format_m(twice_m: int) -> str:
    """Signed label for a magnetic quantum number given as 2m."""
    sign = "+" if twice_m > 0 else ("-" if twice_m < 0 else "")
    magnitude = abs(twice_m)
    if magnitude % 2 == 0:
        return f"{sign}{magnitude // 2}"
    return f"{sign}{magnitude}/2"


@dataclass(frozen=True)
class SpinMatrixSet:
    """The three spin component matrices of one site plus the identity."""

    spin: HalfInteger
    sx: ComplexMatrix = field(repr=False)
    sy: ComplexMatrix = field(repr=False)
    sz: ComplexMatrix = field(repr=False)
    identity: ComplexMatrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.spin.dimension

    @property
    def components(self) -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
        return (self.sx, self.sy, self.sz)

    @property
    def n_s(self) -> float:
        """Normalization trace Tr(S_a S_a) = S(S+1)(2S+1)/3."""
        return self.spin.casimir * self.spin.dimension / 3.0


@dataclass(frozen=True)
class BivectorSet:
    """Symmetric rank-2 operators S_ml = 1/2{S_m, S_l} - S(S+1)/3 delta_ml."""

    spin: HalfInteger
    s_ml: NDArray[np.complex128] = field(repr=False)  # shape (3, 3, dim, dim)

    def __getitem__(self, index: Tuple[int, int]) -> ComplexMatrix:
        m, l = index
        matrix: ComplexMatrix = self.s_ml[m, l]
        return matrix


@lru_cache(maxsize=None)
def _spin_matrices(twice_value: int) -> SpinMatrixSet:
    spin = HalfInteger(twice_value)
    s = spin.value
    dim = spin.dimension
    m = s - np.arange(dim, dtype=float)

    # S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, i.e. column i+1 feeds row i.
    splus = np.zeros((dim, dim), dtype=complex)
    lower = m[1:]
    splus[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(spin.casimir - lower * (lower + 1.0))
    sminus = splus.conj().T

    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(m).astype(complex)
    return SpinMatrixSet(
        spin=spin,
        sx=_frozen(sx),
        sy=_frozen(sy),
        sz=_frozen(sz),
        identity=_frozen(np.eye(dim, dtype=complex)),
    )


def build_spin_matrices(spin: HalfInteger) -> SpinMatrixSet:
    """Construct Sx, Sy, Sz for spin S by the ladder-operator construction.

    Args:
        spin: Spin quantum number (S >= 1/2)

    Returns:
        SpinMatrixSet with sz = diag(S, S-1, ..., -S)

    Raises:
        ValueError: If S = 0
    """
    if spin.twice_value < 1:
        raise ValueError("Spin matrices need S >= 1/2")
    return _spin_matrices(spin.twice_value)


def bivector_set(matrices: SpinMatrixSet) -> BivectorSet:
    """Build the bivector operators of one site."""
    comps = matrices.components
    shift = matrices.spin.casimir / 3.0
    s_ml = np.empty((3, 3, matrices.dim, matrices.dim), dtype=complex)
    for a in range(3):
        for b in range(3):
            s_ml[a, b] = 0.5 * (comps[a] @ comps[b] + comps[b] @ comps[a])
            if a == b:
                s_ml[a, b] -= shift * matrices.identity
    return BivectorSet(spin=matrices.spin, s_ml=_frozen(s_ml))


def embed_site_operator(
    n_sites: int, site: int, op: ComplexMatrix, dim_site: int
) -> ComplexMatrix:
    """Place a single-site operator at slot `site` (1-based) of an N-site space.

    Raises:
        ValueError: On an out-of-range site or a dimension mismatch
    """
    if n_sites < 1 or not 1 <= site <= n_sites:
        raise ValueError(f"Site {site} out of range 1..{n_sites}")
    if op.shape != (dim_site, dim_site):
        raise ValueError(f"Operator shape {op.shape} does not match site dimension {dim_site}")

    left = np.eye(dim_site ** (site - 1), dtype=complex)
    right = np.eye(dim_site ** (n_sites - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


@lru_cache(maxsize=32)
def _site_spin_operators(n_sites: int, twice_value: int) -> Tuple[Tuple[ComplexMatrix, ...], ...]:
    matrices = _spin_matrices(twice_value)
    dim = matrices.dim
    return tuple(
        tuple(_frozen(embed_site_operator(n_sites, n, comp, dim)) for comp in matrices.components)
        for n in range(1, n_sites + 1)
    )


def site_spin_operators(n_sites: int, spin: HalfInteger) -> Tuple[Tuple[ComplexMatrix, ...], ...]:
    """Embedded (Sx, Sy, Sz) for every site; index [n-1][axis]."""
    build_spin_matrices(spin)
    return _site_spin_operators(n_sites, spin.twice_value)


def _symmetric_traceless_basis() -> List[RealArray]:
    """Frobenius-orthonormal basis of real symmetric traceless 3x3 matrices."""
    basis: List[RealArray] = []
    for a, b in ((0, 1), (1, 2), (0, 2)):
        e = np.zeros((3, 3))
        e[a, b] = e[b, a] = 1.0 / np.sqrt(2.0)
        basis.append(e)
    basis.append(np.diag([1.0, -1.0, 0.0]) / np.sqrt(2.0))
    basis.append(np.diag([-1.0, -1.0, 2.0]) / np.sqrt(6.0))
    return basis


def rank2_tensor_family(matrices: SpinMatrixSet) -> List[ComplexMatrix]:
    """Five mutually trace-orthogonal rank-2 operators of one site."""
    biv = bivector_set(matrices)
    return [np.einsum("ml,mlij->ij", e, biv.s_ml) for e in _symmetric_traceless_basis()]


def bivector_normalization(matrices: SpinMatrixSet) -> float:
    """n_2S: frame constant of the bivector family, computed by tracing.

    Sum_ml Tr(X S_ml) S_ml = n_2S X for every rank-2 operator X, so the
    bivector term of the expansion is (1/n_2S) Sum_ml <S_ml> S_ml.
    """
    biv = bivector_set(matrices)
    reference = biv[2, 2]
    norm = float(np.real(np.trace(reference @ reference)))
    if norm == 0.0:
        return 0.0
    overlaps = np.real(np.einsum("ij,mlji->ml", reference, biv.s_ml))
    return float(np.sum(overlaps**2) / norm)


def multivector_moments(spin: HalfInteger, rho: ComplexMatrix) -> Tuple[RealArray, RealArray]:
    """Vector moments <S_m> and bivector moments <S_ml> of a one-site density."""
    matrices = build_spin_matrices(spin)
    if rho.shape != (matrices.dim, matrices.dim):
        raise ValueError(f"Density shape {rho.shape} does not match spin {spin}")
    vector = np.array([np.real(np.trace(rho @ s)) for s in matrices.components])
    biv = bivector_set(matrices)
    bivector = np.real(np.einsum("ij,mlji->ml", rho, biv.s_ml))
    return vector, bivector


def reconstruct_density(
    spin: HalfInteger,
    vector_moments: RealArray,
    bivector_moments: Optional[RealArray] = None,
) -> ComplexMatrix:
    """Rebuild a one-site density from its multivector moments.

    rho = 1/(2S+1) + (1/n_S) Sum_m <S_m> S_m [+ (1/n_2S) Sum_ml <S_ml> S_ml]

    Args:
        spin: S = 1/2 or S = 1
        vector_moments: (<Sx>, <Sy>, <Sz>)
        bivector_moments: 3x3 matrix <S_ml>; ignored for S = 1/2

    Raises:
        ValueError: If S > 1
    """
    if spin.twice_value > 2:
        raise ValueError(f"Multivector reconstruction is implemented for S <= 1, got S={spin}")
    matrices = build_spin_matrices(spin)
    moments = np.asarray(vector_moments, dtype=float)
    rho = matrices.identity / matrices.dim
    rho = rho + sum(moments[a] * matrices.components[a] for a in range(3)) / matrices.n_s

    if bivector_moments is not None and spin.twice_value == 2:
        biv = bivector_set(matrices)
        weights = np.asarray(bivector_moments, dtype=float)
        rho = rho + np.einsum("ml,mlij->ij", weights, biv.s_ml) / bivector_normalization(matrices)
    return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class OrthogonalityReport:
    """Outcome of the trace-orthogonality check of the tensor families."""

    spin: HalfInteger
    max_violation: float
    normalizations: Dict[int, float]


def trace_orthogonality_check(spin: HalfInteger, k_max: int) -> OrthogonalityReport:
    """Check Tr(T^k_a T^k'_b) = n_{S_k} delta_ab delta_kk' for ranks 0..k_max.

    Rank 0 is the identity, rank 1 the spin components, rank 2 the
    trace-orthogonal bivector family.

    Raises:
        ValueError: If k_max exceeds 2S or the implemented rank 2
    """
    if not 1 <= k_max <= min(2, spin.twice_value):
        raise ValueError(f"k_max must be in 1..min(2, 2S), got {k_max} for S={spin}")
    matrices = build_spin_matrices(spin)
    families: Dict[int, List[ComplexMatrix]] = {
        0: [matrices.identity],
        1: list(matrices.components),
    }
    if k_max >= 2:
        families[2] = rank2_tensor_family(matrices)

    normalizations: Dict[int, float] = {}
    violation = 0.0
    for k, ops_k in families.items():
        diag = [float(np.real(np.trace(a @ a))) for a in ops_k]
        normalizations[k] = diag[0]
        violation = max(violation, max(abs(d - diag[0]) for d in diag))
        for kp, ops_kp in families.items():
            for i, a in enumerate(ops_k):
                for j, b in enumerate(ops_kp):
                    if k == kp and i == j:
                        continue
                    violation = max(violation, abs(np.trace(a @ b)))

    logger.debug(f"Trace orthogonality S={spin}, k_max={k_max}: max violation {violation:.3e}")
    return OrthogonalityReport(spin=spin, max_violation=float(violation), normalizations=normalizations)
