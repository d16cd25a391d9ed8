import numpy as np
import pytest

from app.apis.base import DomainError, InputError, PublicationRecord, TiePolicy
from app.apis.builders import (
    coauthor_relation,
    euclidean_relation,
    hausdorff_relation,
    load_pbm,
    load_points,
    load_publications,
    make_image,
    make_point_cloud,
    write_adjacency,
)
from app.apis.network import load_adjacency
from app.apis.relation import validate_relation
from app.apis.scoring import score_relation


def pixel(label, row, column, shape=(6, 6)):
    bits = np.zeros(shape, dtype=int)
    bits[row, column] = 1
    return make_image(label, bits)


class TestEuclidean:
    def test_line(self):
        relation = euclidean_relation(make_point_cloud([[0], [1], [3]]))
        np.testing.assert_array_equal(relation.values, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])

    def test_three_four_five(self):
        relation = euclidean_relation(make_point_cloud([[0, 0], [3, 4]]))
        assert relation.values[0, 1] == 5.0

    def test_single_point(self):
        relation = euclidean_relation(make_point_cloud([[2.5, 1.0]]))
        np.testing.assert_array_equal(relation.values, [[0.0]])

    def test_symmetric_and_valid(self):
        rng = np.random.default_rng(3)
        relation = euclidean_relation(make_point_cloud(rng.normal(size=(30, 3))))
        report = validate_relation(relation.values)
        assert report.valid and report.is_symmetric

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            make_point_cloud([[0, 1], [2]])

    def test_load_labeled_points(self, write_file):
        cloud = load_points(write_file("p.csv", "a,0,0\nb,3,4\n"), labeled=True)
        assert cloud.labels == ["a", "b"]
        assert cloud.dim == 2

    def test_load_ragged_points(self, write_file):
        with pytest.raises(DomainError):
            load_points(write_file("p.csv", "0,0\n3\n"))


class TestHausdorff:
    def test_identical_images(self):
        bits = np.eye(4, dtype=int)
        relation = hausdorff_relation([make_image("a", bits), make_image("b", bits)])
        np.testing.assert_array_equal(relation.values, np.zeros((2, 2)))

    def test_subset_is_asymmetric(self):
        small = np.zeros((4, 4), dtype=int)
        small[0, 0] = 1
        large = small.copy()
        large[3, 3] = 1
        relation = hausdorff_relation([make_image("small", small), make_image("large", large)])
        assert relation.values[0, 1] == 0
        assert relation.values[1, 0] == pytest.approx(np.hypot(3, 3))
        assert not validate_relation(relation.values).is_symmetric

    def test_three_four_five(self):
        relation = hausdorff_relation([pixel("a", 0, 0), pixel("b", 3, 4)])
        assert relation.values[0, 1] == 5.0
        assert relation.values[1, 0] == 5.0

    def test_empty_foreground_names_the_image(self):
        with pytest.raises(DomainError, match="blank"):
            hausdorff_relation([pixel("a", 0, 0), make_image("blank", np.zeros((3, 3)))])

    def test_random_images_are_valid_relations(self):
        rng = np.random.default_rng(8)
        images = [make_image(str(i), rng.random((8, 8)) < 0.3) for i in range(6)]
        images = [image for image in images if len(image.foreground)]
        relation = hausdorff_relation(images)
        assert validate_relation(relation.values).valid
        assert relation.labels == [image.label for image in images]

    def test_load_pbm(self, write_file):
        path = write_file("shape.pbm", "P1\n# a comment\n3 2\n0 1 0\n101\n")
        image = load_pbm(path)
        assert image.label == "shape"
        assert (image.width, image.height) == (3, 2)
        assert image.foreground.tolist() == [[0, 1], [1, 0], [1, 2]]

    def test_load_pbm_wrong_size(self, write_file):
        with pytest.raises(InputError):
            load_pbm(write_file("bad.pbm", "P1\n2 2\n1 0 1\n"))

    def test_load_pbm_magic(self, write_file):
        with pytest.raises(InputError):
            load_pbm(write_file("bad.pbm", "P4\n1 1\n1\n"))


def alice_and_bob():
    pubs = [PublicationRecord(id="shared", authors=["Alice", "Bob", "Carol"])]
    pubs += [PublicationRecord(id=f"a{i}", authors=["Alice"]) for i in range(4)]
    pubs += [PublicationRecord(id=f"b{i}", authors=["Bob"]) for i in range(3)]
    pubs += [PublicationRecord(id="d0", authors=["Dave"])]
    return pubs


class TestCoauthor:
    def test_affinities(self):
        result = coauthor_relation(alice_and_bob())
        alice, bob, carol, dave = (result.relation.labels.index(name) for name in ["Alice", "Bob", "Carol", "Dave"])
        assert result.affinity[alice, bob] == 15
        assert result.affinity[bob, alice] == 12
        assert result.affinity[carol, alice] == 3
        assert result.affinity[alice, dave] == 0

    def test_costs(self):
        result = coauthor_relation(alice_and_bob())
        values = result.relation.values
        # labels are sorted: Alice, Bob, Carol, Dave; the top affinity is 15
        assert values[0, 1] == 1
        assert values[1, 0] == 4
        assert values[0, 3] == 17
        assert values[3, 0] == 17
        np.testing.assert_array_equal(np.diag(values), np.zeros(4))

    def test_adjacency(self):
        result = coauthor_relation(alice_and_bob())
        assert result.adjacency == [[1, 2], [0, 2], [0, 1], []]
        linked = np.zeros((4, 4), dtype=bool)
        for a, neighbors in enumerate(result.adjacency):
            linked[a, neighbors] = True
        np.testing.assert_array_equal(linked, result.affinity > 0)
        np.testing.assert_array_equal(linked, linked.T)

    def test_common_count(self):
        pubs = alice_and_bob() + [PublicationRecord(id="again", authors=["Alice", "Bob"])]
        result = coauthor_relation(pubs, common_count=True)
        # shared publications of sizes 3 and 2, two of them in common
        assert result.affinity[0, 1] == (3 + 2) * 2

    def test_needs_records(self):
        with pytest.raises(DomainError):
            coauthor_relation([])

    def test_relabeling_keeps_scores(self):
        rng = np.random.default_rng(12)
        names = [f"author{i:02d}" for i in range(12)]
        pubs = []
        for i in range(30):
            size = int(rng.integers(1, 5))
            pubs.append(PublicationRecord(id=str(i), authors=list(rng.choice(names, size=size, replace=False))))

        _, sv = score_relation(coauthor_relation(pubs).relation, TiePolicy.MIDRANK)
        baseline = dict(zip(sorted({a for p in pubs for a in p.authors}), sv.scores))

        for _ in range(10):
            rename = dict(zip(names, rng.permutation(names)))
            renamed = [PublicationRecord(id=p.id, authors=[rename[a] for a in p.authors]) for p in pubs]
            result = coauthor_relation(renamed)
            _, permuted = score_relation(result.relation, TiePolicy.MIDRANK)
            scores = dict(zip(result.relation.labels, permuted.scores))
            for name, score in baseline.items():
                assert scores[rename[name]] == pytest.approx(score, abs=1e-12)

    def test_adjacency_file_round_trip(self, write_file):
        result = coauthor_relation(alice_and_bob())
        labels = result.relation.labels
        text = write_adjacency(result.adjacency, labels)
        assert text.splitlines()[0] == "Alice: Bob,Carol"
        assert load_adjacency(write_file("adj.txt", text), labels) == result.adjacency

    def test_load_publications(self, write_file):
        path = write_file("pubs.jsonl", '{"id": "p1", "authors": ["A", "B"]}\n\n{"id": "p2", "authors": ["B"]}\n')
        records = load_publications(path)
        assert [r.id for r in records] == ["p1", "p2"]

    @pytest.mark.parametrize(
        "line",
        ['{"id": "p1", "authors": []}', '{"id": "p1", "authors": ["A", "A"]}', "not json"],
        ids=["no-authors", "repeated-author", "malformed"],
    )
    def test_bad_publications(self, write_file, line):
        with pytest.raises(InputError):
            load_publications(write_file("pubs.jsonl", line + "\n"))
