"""Tests for TSV corpus handling, statistics, and stratified splitting."""

import random

import numpy as np
import pytest

from chargram.corpus import (
    Dataset,
    Document,
    dataset_stats,
    escape_field,
    load_dataset,
    save_dataset,
    split_stratified,
    unescape_field,
)


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return path


TOY = (
    "id\ttext\ttask1\ttask2\n"
    "a1\thello world\tNOT\tNONE\n"
    "a2\tsecond doc\tHOF\tHATE\n"
    "a3\tthird doc\tNOT\tNONE\n"
    "a4\t\tHOF\tPRFN\n"
)


class TestEscaping:
    def test_escape_specials(self):
        assert escape_field("a\tb\nc\rd\\e") == "a\\tb\\nc\\rd\\\\e"

    def test_unescape_inverts_escape(self):
        rng = random.Random(0)
        alphabet = "ab\t\n\r\\é😀 "
        for _ in range(300):
            s = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30)))
            assert unescape_field(escape_field(s)) == s

    def test_unknown_escape_rejected(self):
        with pytest.raises(ValueError, match="unknown escape"):
            unescape_field("a\\x")

    def test_dangling_backslash_rejected(self):
        with pytest.raises(ValueError, match="dangling"):
            unescape_field("a\\")


class TestLoadDataset:
    def test_loads_documents_and_classes(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        assert len(ds) == 4
        assert ds.problems == ["task1", "task2"]
        assert ds.classes["task1"] == ["HOF", "NOT"]
        assert ds.classes["task2"] == ["HATE", "NONE", "PRFN"]
        assert ds.documents[0].id == "a1"
        assert ds.documents[0].text == "hello world"
        assert ds.labels("task1") == ["NOT", "HOF", "NOT", "HOF"]

    def test_empty_text_tolerated(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        assert ds.documents[3].text == ""

    def test_escaped_text_round_trips(self, tmp_path):
        content = "id\ttext\ttask1\nx\tline\\none\\ttab\\\\slash\\rcr\tNOT\ny\tplain\tHOF\n"
        ds = load_dataset(write(tmp_path, "d.tsv", content))
        assert ds.documents[0].text == "line\none\ttab\\slash\rcr"

    def test_field_count_error_names_line(self, tmp_path):
        bad = "id\ttext\ttask1\na1\thello\tNOT\na2\tonly-two-fields\n"
        with pytest.raises(ValueError, match=r":3:"):
            load_dataset(write(tmp_path, "d.tsv", bad))

    def test_duplicate_id_rejected(self, tmp_path):
        bad = "id\ttext\ttask1\na1\tx\tNOT\na1\ty\tHOF\n"
        with pytest.raises(ValueError, match="duplicate id 'a1'"):
            load_dataset(write(tmp_path, "d.tsv", bad))

    def test_empty_label_rejected(self, tmp_path):
        bad = "id\ttext\ttask1\na1\tx\t\n"
        with pytest.raises(ValueError, match="empty label"):
            load_dataset(write(tmp_path, "d.tsv", bad))

    def test_bad_header_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="header"):
            load_dataset(write(tmp_path, "d.tsv", "text\tid\na\tb\n"))

    def test_empty_file_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty file"):
            load_dataset(write(tmp_path, "d.tsv", ""))

    def test_class_order_override(self, tmp_path):
        ds = load_dataset(
            write(tmp_path, "d.tsv", TOY), class_order={"task1": ["NOT", "HOF"]}
        )
        assert ds.classes["task1"] == ["NOT", "HOF"]
        assert ds.classes["task2"] == ["HATE", "NONE", "PRFN"]

    def test_class_order_missing_label_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="missing from declared"):
            load_dataset(write(tmp_path, "d.tsv", TOY), class_order={"task1": ["NOT"]})

    def test_class_order_unknown_problem_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown problems"):
            load_dataset(write(tmp_path, "d.tsv", TOY), class_order={"task9": ["A", "B"]})

    def test_unknown_problem_label_access(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        with pytest.raises(ValueError, match="unknown problem"):
            ds.labels("task9")


class TestSaveDataset:
    def test_round_trip_is_byte_stable(self, tmp_path):
        src = write(tmp_path, "d.tsv", TOY)
        ds = load_dataset(src)
        out = tmp_path / "copy.tsv"
        save_dataset(ds, out)
        assert out.read_bytes() == src.read_bytes()
        # once more through a second load/save cycle
        save_dataset(load_dataset(out), tmp_path / "copy2.tsv")
        assert (tmp_path / "copy2.tsv").read_bytes() == src.read_bytes()

    def test_specials_survive_save_and_load(self, tmp_path):
        docs = [Document("x", "tab\there\nand\\more\r", {"p": "A"}),
                Document("y", "", {"p": "B"})]
        ds = Dataset(docs, {"p": ["A", "B"]})
        path = tmp_path / "s.tsv"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.documents[0].text == "tab\there\nand\\more\r"
        assert back.documents[1].text == ""

    def test_missing_label_rejected(self, tmp_path):
        ds = Dataset([Document("x", "t", {})], {"p": ["A"]})
        with pytest.raises(ValueError, match="lacks labels"):
            save_dataset(ds, tmp_path / "s.tsv")


class TestSubset:
    def test_subset_keeps_classes_and_order(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        sub = ds.subset([2, 0])
        assert [d.id for d in sub.documents] == ["a3", "a1"]
        assert sub.classes == ds.classes


class TestStats:
    def test_counts_and_percentages(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        rep = dataset_stats(ds)
        assert rep.n_documents == 4
        assert rep.n_empty_texts == 1
        assert rep.counts["task1"] == {"HOF": 2, "NOT": 2}
        assert rep.percentages["task1"]["HOF"] == pytest.approx(50.0)
        # mean over raw character lengths
        expected_mean = (11 + 10 + 9 + 0) / 4
        assert rep.mean_text_length == pytest.approx(expected_mean)

    def test_percentages_sum_to_100(self):
        rng = random.Random(3)
        for _ in range(20):
            n = rng.randint(1, 200)
            docs = [
                Document(str(i), "t", {"p": rng.choice("ABC")}) for i in range(n)
            ]
            ds = Dataset(docs, {"p": ["A", "B", "C"]})
            rep = dataset_stats(ds)
            total = sum(rep.percentages["p"].values())
            assert total == pytest.approx(100.0, abs=0.1)

    def test_imbalanced_shares_round_as_expected(self):
        # 1342 of 3843 is 34.9% and 2501 is 65.1% at one decimal
        docs = [Document(f"n{i}", "t", {"p": "NOT"}) for i in range(1342)]
        docs += [Document(f"h{i}", "t", {"p": "HOF"}) for i in range(2501)]
        ds = Dataset(docs, {"p": ["HOF", "NOT"]})
        rep = dataset_stats(ds)
        assert round(rep.percentages["p"]["NOT"], 1) == 34.9
        assert round(rep.percentages["p"]["HOF"], 1) == 65.1

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            dataset_stats(Dataset([], {}))

    def test_text_and_json_renderings(self, tmp_path):
        ds = load_dataset(write(tmp_path, "d.tsv", TOY))
        rep = dataset_stats(ds)
        text = rep.to_text()
        assert "documents" in text and "task1" in text and "50.0%" in text
        obj = rep.to_json()
        assert obj["n_documents"] == 4
        assert obj["problems"]["task2"]["counts"]["NONE"] == 2


def balanced_dataset(sizes: dict[str, int]) -> Dataset:
    docs = []
    for c, n in sizes.items():
        docs += [Document(f"{c}{i}", "t", {"p": c}) for i in range(n)]
    return Dataset(docs, {"p": sorted(sizes)})


class TestSplitStratified:
    def test_one_of_each_class_per_fold(self):
        ds = balanced_dataset({"A": 3, "B": 3, "C": 3})
        folds = split_stratified(ds, 3, "p", seed=0)
        for f in range(3):
            labels = [ds.documents[i].labels["p"] for i in folds.test_indices(f)]
            assert sorted(labels) == ["A", "B", "C"]

    def test_seventy_thirty_fold_sizes(self):
        # 70/30 split over k=3 by round-robin dealing:
        # majority per fold in {23, 24}, minority exactly 10
        ds = balanced_dataset({"A": 70, "B": 30})
        folds = split_stratified(ds, 3, "p", seed=42)
        for f in range(3):
            test = folds.test_indices(f)
            a = sum(1 for i in test if ds.documents[i].labels["p"] == "A")
            b = len(test) - a
            assert a in (23, 24)
            assert b == 10

    def test_partition_property(self):
        rng = random.Random(9)
        for _ in range(25):
            sizes = {c: rng.randint(4, 40) for c in "ABCD"[: rng.randint(2, 4)]}
            ds = balanced_dataset(sizes)
            k = rng.randint(2, 4)
            folds = split_stratified(ds, k, "p", seed=rng.randint(0, 99))
            all_test = sorted(i for f in range(k) for i in folds.test_indices(f))
            assert all_test == list(range(len(ds)))
            for f in range(k):
                test = set(folds.test_indices(f))
                train = set(folds.train_indices(f))
                assert test.isdisjoint(train)
                assert test | train == set(range(len(ds)))
                assert test, "every fold must be non-empty"

    def test_per_class_counts_differ_by_at_most_one(self):
        rng = random.Random(10)
        for _ in range(25):
            sizes = {c: rng.randint(5, 60) for c in "ABC"}
            ds = balanced_dataset(sizes)
            k = rng.randint(2, 5)
            folds = split_stratified(ds, k, "p", seed=rng.randint(0, 99))
            for c in sizes:
                per_fold = [
                    sum(
                        1
                        for i in folds.test_indices(f)
                        if ds.documents[i].labels["p"] == c
                    )
                    for f in range(k)
                ]
                assert max(per_fold) - min(per_fold) <= 1
                assert sum(per_fold) == sizes[c]

    def test_same_seed_reproduces_assignment(self):
        ds = balanced_dataset({"A": 20, "B": 10})
        a = split_stratified(ds, 3, "p", seed=5).assignment
        b = split_stratified(ds, 3, "p", seed=5).assignment
        assert a == b

    def test_different_seed_changes_assignment(self):
        ds = balanced_dataset({"A": 40, "B": 40})
        a = split_stratified(ds, 4, "p", seed=1).assignment
        b = split_stratified(ds, 4, "p", seed=2).assignment
        assert a != b

    def test_small_class_rejected_by_name(self):
        ds = balanced_dataset({"A": 10, "B": 2})
        with pytest.raises(ValueError, match="'B'"):
            split_stratified(ds, 3, "p")

    def test_k_below_two_rejected(self):
        ds = balanced_dataset({"A": 5, "B": 5})
        with pytest.raises(ValueError, match="k must be"):
            split_stratified(ds, 1, "p")
