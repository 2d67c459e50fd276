import math

import numpy as np
import pytest

from defectlab.tensor import (
    FockSpace,
    aux_block_indices,
    dagger,
    embed_pair,
    kron,
    matrix_unit,
    partial_trace,
    partial_transpose,
    permutation_op,
    restrict,
    reversal_op,
)


def test_kron_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    c = rng.normal(size=(2, 2))
    assert np.allclose(kron(a, b, c), np.kron(np.kron(a, b), c))


def test_matrix_unit_entries():
    e = matrix_unit(3, 2, 3)
    expected = np.zeros((3, 3))
    expected[1, 2] = 1.0
    assert np.array_equal(e, expected)
    with pytest.raises(ValueError):
        matrix_unit(3, 0, 1)
    with pytest.raises(ValueError):
        matrix_unit(3, 1, 4)


def test_permutation_swaps_simple_tensors():
    n = 3
    p = permutation_op(n)
    rng = np.random.default_rng(1)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=n)
    assert np.allclose(p @ np.kron(v, w), np.kron(w, v))
    assert np.allclose(p @ p, np.eye(n * n))


def test_reversal_op():
    v = reversal_op(4)
    assert np.allclose(v @ v, np.eye(4))
    e = np.zeros(4)
    e[0] = 1.0
    assert np.allclose(v @ e, np.eye(4)[:, 3])


def test_partial_transpose_factors():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = np.kron(a, b)
    assert np.allclose(partial_transpose(m, (2, 3), 0), np.kron(a.T, b))
    assert np.allclose(partial_transpose(m, (2, 3), 1), np.kron(a, b.T))
    # involution
    assert np.allclose(partial_transpose(partial_transpose(m, (2, 3), 0), (2, 3), 0), m)


def test_partial_trace_factors():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = np.kron(a, b)
    assert np.allclose(partial_trace(m, (2, 3), 0), np.trace(a) * b)
    assert np.allclose(partial_trace(m, (2, 3), 1), np.trace(b) * a)


def test_dagger():
    m = np.array([[1 + 2j, 3], [4j, 5]])
    assert np.allclose(dagger(m), m.conj().T)


# ---------------------------------------------------------------------------
# embedding


def _embed_reference(op, aux_dim, site_dims, slot):
    """Independent construction: einsum over explicit tensor legs."""
    dims = [aux_dim] + list(site_dims)
    k = len(site_dims)
    d = site_dims[slot - 1]
    op_t = op.reshape(aux_dim, d, aux_dim, d)
    total = int(np.prod(dims))
    out = np.zeros((total, total), dtype=complex)
    # loop over all basis pairs; slow but unambiguous
    idx = np.array(np.meshgrid(*[np.arange(x) for x in dims], indexing="ij"))
    idx = idx.reshape(len(dims), -1).T
    strides = np.cumprod([1] + dims[::-1][:-1])[::-1]
    for row in idx:
        r = int(row @ strides)
        for a2 in range(aux_dim):
            for s2 in range(d):
                col_vec = row.copy()
                col_vec[0] = a2
                col_vec[slot] = s2
                c = int(col_vec @ strides)
                out[r, c] = op_t[row[0], row[slot], a2, s2]
    return out


def test_embed_pair_against_reference():
    rng = np.random.default_rng(4)
    aux, dims = 2, [3, 2]
    for slot in (1, 2):
        d = dims[slot - 1]
        op = rng.normal(size=(aux * d, aux * d)) + 1j * rng.normal(size=(aux * d, aux * d))
        got = embed_pair(op, aux, dims, slot)
        ref = _embed_reference(op, aux, dims, slot)
        assert np.allclose(got, ref)


def test_embed_pair_identity_passthrough():
    aux, dims = 3, [2, 4, 2]
    eye = np.eye(aux * dims[1])
    assert np.allclose(embed_pair(eye, aux, dims, 2), np.eye(aux * 16))


def test_embed_pair_slot_range():
    with pytest.raises(ValueError):
        embed_pair(np.eye(4), 2, [2], 2)
    with pytest.raises(ValueError):
        embed_pair(np.eye(5), 2, [2], 1)


# ---------------------------------------------------------------------------
# Fock space


def test_fock_dimension_is_binomial():
    for species in (1, 2, 3):
        for cutoff in (1, 2, 4):
            f = FockSpace(species, cutoff)
            assert f.dim == math.comb(cutoff + species, species)


def test_fock_basis_graded_and_vacuum_first():
    f = FockSpace(2, 3)
    occs = f.basis
    assert occs[0] == (0, 0)
    totals = [sum(o) for o in occs]
    assert totals == sorted(totals)
    assert len(set(occs)) == f.dim
    v = f.vacuum()
    assert v[0] == 1.0 and np.sum(np.abs(v)) == 1.0


def test_ladder_matrix_elements_single_species():
    f = FockSpace(1, 4)
    a = f.annihilator(1)
    # a |n> = sqrt(n) |n-1>
    for n in range(1, 5):
        col = np.zeros(f.dim)
        col[f.index[(n,)]] = 1.0
        out = a @ col
        expected = np.zeros(f.dim)
        expected[f.index[(n - 1,)]] = math.sqrt(n)
        assert np.allclose(out, expected)
    assert np.allclose(f.creator(1), a.conj().T)


def test_ladder_commutators_on_subblock():
    f = FockSpace(2, 4)
    sub = f.sub_cutoff_indices(1)
    for i in (1, 2):
        for j in (1, 2):
            ai, adj = f.annihilator(i), f.creator(j)
            comm = ai @ adj - adj @ ai
            target = np.eye(f.dim) if i == j else np.zeros((f.dim, f.dim))
            assert np.max(np.abs(restrict(comm - target, sub))) < 1e-13


def test_number_operator_both_orderings():
    f = FockSpace(2, 3)
    n_norm = f.number_op("normal")
    diag = np.array([sum(o) for o in f.basis], dtype=float)
    assert np.allclose(np.diag(n_norm), diag)
    n_anti = f.number_op("antinormal")
    assert np.allclose(n_anti, n_norm + f.species * np.eye(f.dim))
    # [N, a_j] = -a_j exactly on the full truncated space
    for j in (1, 2):
        a = f.annihilator(j)
        assert np.max(np.abs(n_norm @ a - a @ n_norm + a)) < 1e-13
        ad = f.creator(j)
        assert np.max(np.abs(n_norm @ ad - ad @ n_norm - ad)) < 1e-13


def test_sub_cutoff_indices():
    f = FockSpace(2, 3)
    sub = f.sub_cutoff_indices(1)
    assert all(sum(f.basis[i]) <= 2 for i in sub)
    assert len(sub) == math.comb(2 + 2, 2)


def test_aux_block_indices():
    f = FockSpace(1, 2)
    idx = aux_block_indices(2, [0, 1], f.dim)
    assert list(idx) == [0, 1, 3, 4]
