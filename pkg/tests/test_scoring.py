import numpy as np
import pytest

from app.apis.base import TiePolicy
from app.apis.relation import make_relation
from app.apis.scoring import aggregated_scores, rank_table, score_relation, standard
from tests.conftest import oracle_scores, random_values


class TestFixtures:
    def test_three_points(self, three_points):
        _, sv = score_relation(three_points)
        np.testing.assert_allclose(sv.scores, [1.0, 4 / 3, 2 / 3], atol=1e-12)
        assert standard(sv) == 1

    def test_six_points(self, six_points):
        rk, sv = score_relation(six_points)
        np.testing.assert_allclose(sv.scores, [2.0, 8 / 3, 17 / 6, 3.0, 8 / 3, 11 / 6], atol=1e-12)
        np.testing.assert_allclose(sv.scores, oracle_scores(six_points.values.tolist()), atol=1e-12)
        assert standard(sv) == 3

    def test_rank_rows_are_permutations(self, six_points):
        rk = rank_table(six_points)
        for row in rk.ranks:
            assert sorted(row.tolist()) == list(range(1, 7))
        np.testing.assert_array_equal(np.diag(rk.ranks), np.ones(6))

    def test_index_ties(self, six_points):
        rk = rank_table(six_points)
        # from point 1, points 0 and 2 are both at distance 1
        assert rk.ranks[1, 0] == 2
        assert rk.ranks[1, 2] == 3

    def test_single_object(self):
        _, sv = score_relation(make_relation([[0]]))
        assert sv.scores.tolist() == [0.0]
        assert standard(sv) == 0

    def test_tied_standard_takes_smallest_index(self):
        _, sv = score_relation(make_relation([[0, 1], [1, 0]]))
        assert sv.argmax_set == [0, 1]
        assert standard(sv) == 0


class TestMidrank:
    EQUAL = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]

    def test_ties_share_the_mean_rank(self):
        rk = rank_table(make_relation(self.EQUAL), TiePolicy.MIDRANK)
        np.testing.assert_array_equal(rk.ranks[0], [1.0, 2.5, 2.5])

    def test_symmetric_ties_give_equal_scores(self):
        _, sv = score_relation(make_relation(self.EQUAL), TiePolicy.MIDRANK)
        np.testing.assert_allclose(sv.scores, [1.0, 1.0, 1.0])

    def test_index_policy_breaks_the_same_ties(self):
        _, sv = score_relation(make_relation(self.EQUAL), TiePolicy.INDEX)
        np.testing.assert_allclose(sv.scores, [4 / 3, 1.0, 2 / 3])

    def test_agrees_with_index_policy_without_ties(self, random_relations):
        for relation in random_relations[:20]:
            _, by_index = score_relation(relation, TiePolicy.INDEX)
            _, by_midrank = score_relation(relation, TiePolicy.MIDRANK)
            np.testing.assert_allclose(by_index.scores, by_midrank.scores)


class TestScoreProperties:
    def test_mass_is_conserved(self, random_relations):
        """Scores sum to n(n-1)/2 and each lies in [0, n-1]."""
        for relation in random_relations:
            n = relation.n
            _, sv = score_relation(relation)
            assert sv.scores.sum() == pytest.approx(n * (n - 1) / 2, abs=1e-9)
            assert sv.scores.min() >= 0
            assert sv.scores.max() <= n - 1

    def test_mass_is_conserved_with_midrank(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            values = rng.integers(1, 4, size=(n, n)).astype(float)
            np.fill_diagonal(values, 0)
            _, sv = score_relation(make_relation(values), TiePolicy.MIDRANK)
            assert sv.scores.sum() == pytest.approx(n * (n - 1) / 2, abs=1e-9)

    @pytest.mark.parametrize("transform", [np.square, np.log1p], ids=["square", "log1p"])
    def test_monotone_transform_invariance(self, random_relations, transform):
        for relation in random_relations[:50]:
            rk, sv = score_relation(relation)
            rk2, sv2 = score_relation(make_relation(transform(relation.values)))
            np.testing.assert_array_equal(rk.ranks, rk2.ranks)
            np.testing.assert_array_equal(sv.scores, sv2.scores)
            assert standard(sv) == standard(sv2)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            values = random_values(rng, n)
            perm = rng.permutation(n)
            _, sv = score_relation(make_relation(values))
            _, permuted = score_relation(make_relation(values[np.ix_(perm, perm)]))
            np.testing.assert_allclose(permuted.scores, sv.scores[perm], atol=1e-12)

    def test_matches_oracle(self, random_relations):
        for relation in random_relations[:30]:
            _, sv = score_relation(relation)
            np.testing.assert_allclose(sv.scores, oracle_scores(relation.values.tolist()), atol=1e-9)

    def test_scores_from_ranks(self, six_points):
        rk = rank_table(six_points)
        sv = aggregated_scores(rk)
        np.testing.assert_allclose(sv.scores, (6 - rk.ranks).mean(axis=0))
