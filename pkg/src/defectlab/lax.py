"""Operator constructors: R-matrix, defect Lax operators, scattering and
transmission matrices, monodromy and transfer matrices.

Conventions.  The auxiliary space is rank-dimensional and always the leftmost
Kronecker factor.  The rational R-matrix is R(lambda) = lambda + i P with P
the permutation.  The defect carries a truncated Fock space with rank-1
oscillator species; the Lax operator puts the spectral parameter only in the
(1,1) auxiliary entry,

    L(lambda) = e_11 (x) (lambda + i c + i N) + i sum_{j>=2} e_jj (x) 1
                + i sum_{j>=2} (e_1j (x) a^(j-1) + e_j1 (x) adag^(j-1)),

with N the number operator in the configured ordering and c the configured
constant.  Shifting c or reordering N translates the spectral parameter, so
exchange relations hold for every convention; the shipped default
(normal ordering, c = 1) is the one whose reference state satisfies
N|vacuum> = 0 with the (1,1) vacuum weight lambda + i.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .special import (
    DEFAULT_POLE_GUARD,
    gamma_ratio,
    guard_nonzero,
)
from .tensor import (
    COMPLEX,
    FockSpace,
    as_matrix,
    embed_pair,
    kron,
    matrix_unit,
    partial_trace,
    partial_transpose,
    permutation_op,
    reversal_op,
)

DIMENSION_CAP = 20_000

VARIANT_L = "L"
VARIANT_LHAT = "Lhat"

NORMAL = "normal"
ANTINORMAL = "antinormal"


@dataclass(frozen=True)
class LaxSpec:
    """Convention choices for the defect Lax operator."""

    rank: int
    variant: str = VARIANT_L
    ordering: str = NORMAL
    shift: float = 1.0
    rapidity: complex = 0j

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be >= 2")
        if self.variant not in (VARIANT_L, VARIANT_LHAT):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.ordering not in (NORMAL, ANTINORMAL):
            raise ValueError(f"unknown ordering {self.ordering!r}")

    def effective_shift(self) -> float:
        """Shift after rewriting antinormal ordering in normal terms."""
        extra = (self.rank - 1) if self.ordering == ANTINORMAL else 0
        return self.shift + extra


@dataclass(frozen=True)
class ChainSpec:
    """An inhomogeneous chain: ``sites`` bulk fundamental sites plus one
    defect, the defect occupying slot ``defect_site`` in 1..sites+1."""

    rank: int
    sites: int
    fock_cutoff: int
    defect_site: int = 1
    theta: complex = 0j
    lax: LaxSpec | None = None

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be >= 2")
        if self.sites < 0:
            raise ValueError("sites must be >= 0")
        if not (1 <= self.defect_site <= self.sites + 1):
            raise ValueError(
                f"defect_site {self.defect_site} outside 1..{self.sites + 1}"
            )
        if self.lax is None:
            object.__setattr__(self, "lax", LaxSpec(self.rank))
        elif self.lax.rank != self.rank:
            raise ValueError("lax.rank disagrees with chain rank")

    def fock(self) -> FockSpace:
        return FockSpace(self.rank - 1, self.fock_cutoff)


def r_matrix(rank: int, lam) -> np.ndarray:
    """R(lambda) = lambda + i P on the rank^2-dimensional double space."""
    if rank < 2:
        raise ValueError("rank must be >= 2")
    n2 = rank * rank
    return complex(lam) * np.eye(n2, dtype=COMPLEX) + 1j * permutation_op(rank)


def _check_fock(spec: LaxSpec, fock: FockSpace):
    if fock.species != spec.rank - 1:
        raise ValueError(
            f"Fock space has {fock.species} species, rank {spec.rank} needs "
            f"{spec.rank - 1}"
        )


def l_matrix(spec: LaxSpec, fock: FockSpace, lam) -> np.ndarray:
    """Defect Lax operator on auxiliary (x) Fock."""
    _check_fock(spec, fock)
    n = spec.rank
    lam = complex(lam)
    eye_f = np.eye(fock.dim, dtype=COMPLEX)
    num = fock.number_op(spec.ordering)
    out = kron(matrix_unit(n, 1, 1), lam * eye_f + 1j * spec.shift * eye_f + 1j * num)
    for j in range(2, n + 1):
        a = fock.annihilator(j - 1)
        out += 1j * kron(matrix_unit(n, j, j), eye_f)
        out += 1j * (
            kron(matrix_unit(n, 1, j), a) + kron(matrix_unit(n, j, 1), a.conj().T)
        )
    return out


def l_hat_matrix(spec: LaxSpec, fock: FockSpace, lam) -> np.ndarray:
    """Conjugate defect Lax operator, written out explicitly.

    Index j maps to its reversal jbar = rank+1-j; the spectral entry sits at
    (rank, rank) with argument -lambda - i rank/2.  Must agree with
    :func:`crossed_l_matrix` identically; the independent construction is the
    point of keeping both.
    """
    _check_fock(spec, fock)
    n = spec.rank
    lam = complex(lam)
    eye_f = np.eye(fock.dim, dtype=COMPLEX)
    num = fock.number_op(spec.ordering)
    head = (-lam - 1j * n / 2) * eye_f + 1j * spec.shift * eye_f + 1j * num
    out = kron(matrix_unit(n, n, n), head)
    for j in range(2, n + 1):
        jbar = n + 1 - j
        a = fock.annihilator(j - 1)
        out += 1j * kron(matrix_unit(n, jbar, jbar), eye_f)
        out += 1j * (
            kron(matrix_unit(n, jbar, n), a) + kron(matrix_unit(n, n, jbar), a.conj().T)
        )
    return out


def crossed_l_matrix(spec: LaxSpec, fock: FockSpace, lam) -> np.ndarray:
    """V_1 L^{t_1}(-lambda - i rank/2) V_1, the crossing transform of L."""
    n = spec.rank
    raw = l_matrix(spec, fock, -complex(lam) - 1j * n / 2)
    v1 = kron(reversal_op(n), np.eye(fock.dim, dtype=COMPLEX))
    return v1 @ partial_transpose(raw, (n, fock.dim), 0) @ v1


def defect_lax(spec: LaxSpec, fock: FockSpace, lam) -> np.ndarray:
    """Dispatch on the variant: L itself or the conjugate operator."""
    if spec.variant == VARIANT_L:
        return l_matrix(spec, fock, lam)
    return l_hat_matrix(spec, fock, lam)


# ---------------------------------------------------------------------------
# scattering and transmission amplitudes


def s_amplitude(rank: int, lam, guard: float = DEFAULT_POLE_GUARD) -> complex:
    """Scalar soliton-soliton amplitude, a ratio of four Gamma functions."""
    z = 1j * complex(lam) / rank
    return gamma_ratio(
        [z + 1, -z + 1 - 1 / rank],
        [-z + 1, z + 1 - 1 / rank],
        guard=guard,
    )


def s_matrix(rank: int, lam, guard: float = DEFAULT_POLE_GUARD) -> np.ndarray:
    """Full two-particle S-matrix S(lambda)/(i lambda + 1) (i lambda + P)."""
    lam = complex(lam)
    guard_nonzero(1j * lam + 1, guard, what="S-matrix prefactor i*lambda + 1")
    scalar = s_amplitude(rank, lam, guard) / (1j * lam + 1)
    return scalar * (
        1j * lam * np.eye(rank * rank, dtype=COMPLEX) + permutation_op(rank)
    )


def transmission_amplitude(
    rank: int, sign: str, lam, guard: float = DEFAULT_POLE_GUARD
) -> complex:
    """Closed-form transmission amplitude T^+ or T^-.

    T^+(lambda) = Gamma(-i lambda/n + 1/(2n)) / Gamma(-i lambda/n - 1/(2n) + 1)
    T^-(lambda) = Gamma(i lambda/n + 1/(2n) + 1/2) / Gamma(i lambda/n - 1/(2n) + 1/2)
    """
    lam = complex(lam)
    n = rank
    if sign == "+":
        return gamma_ratio(
            [-1j * lam / n + 1 / (2 * n)],
            [-1j * lam / n - 1 / (2 * n) + 1],
            guard=guard,
        )
    if sign == "-":
        return gamma_ratio(
            [1j * lam / n + 1 / (2 * n) + 0.5],
            [1j * lam / n - 1 / (2 * n) + 0.5],
            guard=guard,
        )
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def nbar_op(fock: FockSpace, rank: int, ordering: str = ANTINORMAL) -> np.ndarray:
    """Shifted number operator entering the transmission matrices.

    The antinormal reading realizes sum_j a_j adag_j + rank/2 - 3/2 on the
    diagonal; the normal reading drops the species count.  Either choice is a
    spectral-parameter translation of the other, so the exchange and crossing
    checks hold for both; antinormal is the default.
    """
    base = fock.number_op(NORMAL)
    shift = rank / 2 - 1.5
    if ordering == ANTINORMAL:
        shift += fock.species
    elif ordering != NORMAL:
        raise ValueError(f"unknown ordering {ordering!r}")
    return base + shift * np.eye(fock.dim, dtype=COMPLEX)


def transmission_matrix(
    rank: int,
    fock: FockSpace,
    lam,
    nbar_ordering: str = ANTINORMAL,
    include_prefactor: bool = True,
    guard: float = DEFAULT_POLE_GUARD,
) -> np.ndarray:
    """Transmission matrix for right-movers on auxiliary (x) Fock."""
    if fock.species != rank - 1:
        raise ValueError("Fock species count must be rank - 1")
    lam = complex(lam)
    n = rank
    eye_f = np.eye(fock.dim, dtype=COMPLEX)
    nbar = nbar_op(fock, rank, nbar_ordering)
    out = kron(matrix_unit(n, 1, 1), 1j * lam * eye_f + eye_f + nbar)
    for j in range(2, n + 1):
        a = fock.annihilator(j - 1)
        out += kron(matrix_unit(n, j, j), eye_f)
        out += kron(matrix_unit(n, 1, j), a) + kron(matrix_unit(n, j, 1), a.conj().T)
    if include_prefactor:
        denom = guard_nonzero(
            1j * lam + n / 2 - 0.5, guard, what="transmission prefactor denominator"
        )
        out = (transmission_amplitude(rank, "-", lam, guard) / denom) * out
    return out


def conjugate_transmission_matrix(
    rank: int,
    fock: FockSpace,
    lam,
    nbar_ordering: str = ANTINORMAL,
    include_prefactor: bool = True,
    guard: float = DEFAULT_POLE_GUARD,
) -> np.ndarray:
    """Transmission matrix for left-movers; reversed auxiliary indices."""
    if fock.species != rank - 1:
        raise ValueError("Fock species count must be rank - 1")
    lam = complex(lam)
    n = rank
    eye_f = np.eye(fock.dim, dtype=COMPLEX)
    nbar = nbar_op(fock, rank, nbar_ordering)
    head = (-1j * lam - n / 2 + 1) * eye_f + nbar
    out = kron(matrix_unit(n, n, n), head)
    for j in range(2, n + 1):
        jbar = n + 1 - j
        a = fock.annihilator(j - 1)
        out += kron(matrix_unit(n, jbar, jbar), eye_f)
        out += kron(matrix_unit(n, jbar, n), a) + kron(
            matrix_unit(n, n, jbar), a.conj().T
        )
    if include_prefactor:
        out = transmission_amplitude(rank, "+", lam, guard) * out
    return out


def crossed_transmission_matrix(
    rank: int,
    fock: FockSpace,
    lam,
    nbar_ordering: str = ANTINORMAL,
    include_prefactor: bool = True,
    guard: float = DEFAULT_POLE_GUARD,
) -> np.ndarray:
    """V_1 T^{t_1}(-lambda + i rank/2) V_1; equals the conjugate matrix up to
    a constant that the crossing check measures rather than assumes."""
    n = rank
    raw = transmission_matrix(
        rank, fock, -complex(lam) + 1j * n / 2, nbar_ordering, include_prefactor, guard
    )
    v1 = kron(reversal_op(n), np.eye(fock.dim, dtype=COMPLEX))
    return v1 @ partial_transpose(raw, (n, fock.dim), 0) @ v1


# ---------------------------------------------------------------------------
# monodromy


def monodromy(chain: ChainSpec, lam, cap: int = DIMENSION_CAP) -> np.ndarray:
    """Ordered product over slots sites+1 down to 1; the defect slot carries
    the Lax operator at lambda - theta, every bulk slot the R-matrix at
    lambda.  Acts on auxiliary (x) slot_1 (x) ... (x) slot_{sites+1}."""
    n = chain.rank
    fock = chain.fock()
    site_dims = [
        fock.dim if p == chain.defect_site else n for p in range(1, chain.sites + 2)
    ]
    quantum = int(np.prod(site_dims, dtype=np.int64))
    if n * quantum > cap:
        raise ValueError(
            f"total dimension {n * quantum} exceeds cap {cap}; "
            "reduce sites or the Fock cutoff"
        )
    out = np.eye(n * quantum, dtype=COMPLEX)
    for p in range(chain.sites + 1, 0, -1):
        if p == chain.defect_site:
            factor = defect_lax(chain.lax, fock, complex(lam) - chain.theta)
        else:
            factor = r_matrix(n, lam)
        out = out @ embed_pair(factor, n, site_dims, p)
    return out


def transfer_matrix(chain: ChainSpec, lam, cap: int = DIMENSION_CAP) -> np.ndarray:
    """Partial trace of the monodromy over the auxiliary space."""
    n = chain.rank
    t = monodromy(chain, lam, cap)
    quantum = t.shape[0] // n
    return partial_trace(t, (n, quantum), 0)


def monodromy_aux_block(t: np.ndarray, rank: int, k: int, l: int) -> np.ndarray:
    """Auxiliary (k,l) block of a monodromy matrix, 1-based indices."""
    quantum = t.shape[0] // rank
    return t[(k - 1) * quantum : k * quantum, (l - 1) * quantum : l * quantum]


def chain_vacuum(chain: ChainSpec) -> np.ndarray:
    """Tensor product of site highest-weight vectors and the Fock vacuum."""
    n = chain.rank
    fock = chain.fock()
    vecs = []
    for p in range(1, chain.sites + 2):
        if p == chain.defect_site:
            vecs.append(fock.vacuum())
        else:
            e1 = np.zeros(n, dtype=COMPLEX)
            e1[0] = 1.0
            vecs.append(e1)
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return out


def rescale(spec: LaxSpec, **kwargs) -> LaxSpec:
    return replace(spec, **kwargs)
