import itertools
import math

import numpy as np
import pytest

from sparse_unitary import to_dense
from sparse_unitary.models import (hook_length_dimension, partitions, standard_tableaux,
                                   symrep_check, symrep_generator)
from sparse_unitary.models.symrep import axial_distance, check_partition

ALL = [lam for n in range(1, 7) for lam in partitions(n)]


def count_fillings(lam):
    """Brute force: permutations of 1..n placed row by row that are increasing in rows and columns."""
    n = sum(lam)
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        rows, k = [], 0
        for length in lam:
            rows.append(perm[k:k + length])
            k += length
        ok = all(r[j] < r[j + 1] for r in rows for j in range(len(r) - 1))
        ok = ok and all(rows[i][j] < rows[i + 1][j] for i in range(len(rows) - 1)
                        for j in range(len(rows[i + 1])))
        count += ok
    return count


def rep_of_permutation(lam, perm):
    """Matrix of ``perm`` (tuple image of 0..n-1) as a product of adjacent transpositions."""
    n = len(perm)
    gens = {j: to_dense(symrep_generator(lam, j)) for j in range(1, n)}
    out = np.eye(len(standard_tableaux(lam)))
    p = list(perm)
    # bubble sort, recording the transpositions that undo perm
    word = []
    for i in range(n):
        for j in range(n - 1 - i):
            if p[j] > p[j + 1]:
                p[j], p[j + 1] = p[j + 1], p[j]
                word.append(j + 1)
    for j in reversed(word):
        out = out @ gens[j]
    return out


def test_partitions_count():
    assert [len(list(partitions(n))) for n in range(1, 9)] == [1, 2, 3, 5, 7, 11, 15, 22]


def test_trivial_and_sign():
    for n in range(2, 6):
        for j in range(1, n):
            np.testing.assert_array_equal(to_dense(symrep_generator((n,), j)), [[1]])
            np.testing.assert_array_equal(to_dense(symrep_generator((1,) * n, j)), [[-1]])


def test_two_one():
    s1 = to_dense(symrep_generator((2, 1), 1))
    s2 = to_dense(symrep_generator((2, 1), 2))
    np.testing.assert_allclose(s1, np.diag([1, -1]), atol=1e-15)
    c = math.sqrt(3) / 2
    np.testing.assert_allclose(s2, [[-0.5, c], [c, 0.5]], atol=1e-15)
    assert standard_tableaux((2, 1)) == (((1, 2), (3,)), ((1, 3), (2,)))


def test_two_two():
    rep = symrep_check((2, 2))
    assert rep.ok and rep.dim == 2


@pytest.mark.parametrize("lam", ALL, ids=str)
def test_all_relations(lam):
    rep = symrep_check(lam, 1e-10)
    assert rep.ok, rep.failures
    assert rep.dim == hook_length_dimension(lam) == count_fillings(lam)
    for j in range(1, sum(lam)):
        assert symrep_generator(lam, j).row_counts().max() <= 2


@pytest.mark.parametrize("lam", [(3, 1), (2, 1, 1), (2, 2), (3, 2), (2, 2, 1)], ids=str)
def test_irreducible_by_characters(lam):
    # <chi, chi> = 1 over the whole group and the rep is a homomorphism
    n = sum(lam)
    perms = list(itertools.permutations(range(n)))
    mats = {p: rep_of_permutation(lam, p) for p in perms}
    chi = np.array([np.trace(m) for m in mats.values()])
    assert np.dot(chi, chi) / len(perms) == pytest.approx(1.0, abs=1e-10)
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = (perms[i] for i in rng.integers(len(perms), size=2))
        ab = tuple(a[b[k]] for k in range(n))
        np.testing.assert_allclose(mats[a] @ mats[b], mats[ab], atol=1e-10)


def test_regular_representation_multiplicity():
    # S3's regular rep contains the (2,1) irrep dim = 2 times
    perms = list(itertools.permutations(range(3)))
    chi = [np.trace(rep_of_permutation((2, 1), p)) for p in perms]
    regular = [6 if p == (0, 1, 2) else 0 for p in perms]
    assert np.dot(chi, regular) / 6 == pytest.approx(2.0)


def test_axial_distance():
    t = ((1, 2), (3,))
    assert axial_distance(t, 1) == 1
    assert axial_distance(t, 2) == -2


@pytest.mark.parametrize("bad", [(), (1, 2), (0,), (2, -1)])
def test_bad_partition(bad):
    with pytest.raises(ValueError):
        check_partition(bad)


def test_bad_generator_index():
    with pytest.raises(ValueError):
        symrep_generator((2, 1), 3)
    with pytest.raises(ValueError):
        symrep_generator((2, 1), 0)
