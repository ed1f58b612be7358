import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from reference_impl import ref_sample_from_words, ref_u64_iter
from saltkit.featstore import (
    FeatureFileError,
    PoolManifest,
    build_pool,
    features_from_bytes,
    features_to_bytes,
    load_pool,
    pool_from_members,
    read_features,
    read_manifest,
    save_pool,
    write_features,
    write_manifest,
)

finite_f32 = st.floats(width=32, allow_nan=False, allow_infinity=False)
matrices = arrays(
    dtype=np.float32,
    shape=array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=24),
    elements=finite_f32,
)


GOLDEN = (
    b"SALTFEAT"  # magic
    b"\x01\x00\x00\x00"  # version 1
    b"\x02\x00\x00\x00"  # dims 2
    b"\x01\x00\x00\x00\x00\x00\x00\x00"  # frames 1
    b"\x00\x00\x80\x3f"  # 1.0
    b"\x00\x00\x00\xc0"  # -2.0
)


class TestFeatureBytes:
    def test_golden_bytes(self):
        assert features_to_bytes(np.array([[1.0, -2.0]], dtype=np.float32)) == GOLDEN
        assert features_from_bytes(GOLDEN).tolist() == [[1.0, -2.0]]

    @given(matrices)
    def test_round_trip_exact(self, mat):
        back = features_from_bytes(features_to_bytes(mat))
        assert back.dtype == np.float32
        assert np.array_equal(back, mat)

    def test_zero_frames_allowed(self):
        empty = np.zeros((0, 5), dtype=np.float32)
        assert features_from_bytes(features_to_bytes(empty)).shape == (0, 5)

    def test_rejects_wrong_magic(self):
        with pytest.raises(FeatureFileError, match="not a feature file"):
            features_from_bytes(b"NOTMAGIC" + GOLDEN[8:])

    def test_rejects_future_version(self):
        bad = GOLDEN[:8] + b"\x02\x00\x00\x00" + GOLDEN[12:]
        with pytest.raises(FeatureFileError, match="version mismatch"):
            features_from_bytes(bad)

    def test_rejects_truncation(self):
        with pytest.raises(FeatureFileError, match="corrupt length"):
            features_from_bytes(GOLDEN[:-2])
        with pytest.raises(FeatureFileError, match="corrupt length"):
            features_from_bytes(GOLDEN + b"\x00")

    def test_rejects_non_finite_payload(self):
        nan = np.array([[np.float32("nan")]], dtype=np.float32)
        with pytest.raises(ValueError):
            features_to_bytes(nan)
        # and on the read side, bytes crafted around the writer's check
        blob = bytearray(features_to_bytes(np.zeros((1, 1), dtype=np.float32)))
        blob[-4:] = np.float32("inf").tobytes()
        with pytest.raises(FeatureFileError, match="non-finite"):
            features_from_bytes(bytes(blob))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            features_to_bytes(np.zeros(4, dtype=np.float32))
        with pytest.raises(ValueError):
            features_to_bytes(np.zeros((3, 0), dtype=np.float32))

    def test_file_round_trip(self, tmp_path):
        mat = np.arange(12, dtype=np.float32).reshape(3, 4)
        write_features(mat, tmp_path / "x.saltfeat")
        assert np.array_equal(read_features(tmp_path / "x.saltfeat"), mat)


class TestManifest:
    def test_round_trip_and_relative_paths(self, tmp_path):
        manifest = PoolManifest(
            entries=[("alice", ["a/1.saltfeat", "a/2.saltfeat"]), ("bob", ["b/1.saltfeat"])],
            n_speakers=2,
            n_utterances=1,
            seed=99,
        )
        write_manifest(manifest, tmp_path / "m.tsv")
        back = read_manifest(tmp_path / "m.tsv")
        assert back.n_speakers == 2
        assert back.n_utterances == 1
        assert back.seed == 99
        assert back.speaker_ids() == ["alice", "bob"]
        # relative paths resolve against the manifest directory
        assert back.entries[0][1][0] == str(tmp_path / "a/1.saltfeat")

    def test_error_carries_line_number(self, tmp_path):
        (tmp_path / "bad.tsv").write_text("alice\tok.saltfeat\njunk-line\n")
        with pytest.raises(ValueError, match=":2:"):
            read_manifest(tmp_path / "bad.tsv")

    def test_unknown_header_rejected(self, tmp_path):
        (tmp_path / "bad.tsv").write_text("#frobnicate\t3\n")
        with pytest.raises(ValueError, match="frobnicate"):
            read_manifest(tmp_path / "bad.tsv")


def _write_corpus(tmp_path, n_speakers, n_utts, dims=3):
    """Tiny deterministic corpus; feature values encode (speaker, utterance)
    so tests can recognize exactly which files a pool selected."""
    entries = []
    for s in range(n_speakers):
        paths = []
        for u in range(n_utts):
            mat = np.full((2, dims), 10.0 * s + u, dtype=np.float32)
            name = f"s{s}_u{u}.saltfeat"
            write_features(mat, tmp_path / name)
            paths.append(str(tmp_path / name))
        entries.append((f"spk{s}", paths))
    return PoolManifest(entries=entries, n_speakers=n_speakers, n_utterances=n_utts, seed=0)


class TestBuildPool:
    def test_selection_matches_reference_sampler(self, tmp_path):
        # One continued stream drives speaker picks then utterance picks,
        # in selection order; replicated here with the standalone sampler.
        manifest = _write_corpus(tmp_path, n_speakers=10, n_utts=4)
        manifest.n_speakers, manifest.n_utterances, manifest.seed = 3, 2, 5

        pool = build_pool(manifest)

        words = ref_u64_iter(5)
        expected_speakers = ref_sample_from_words(words, 10, 3)
        for slot, pick in enumerate(expected_speakers):
            utts = ref_sample_from_words(words, 4, 2)
            assert pool.speaker_ids[slot] == f"spk{pick}"
            expected = np.concatenate(
                [np.full((2, 3), 10.0 * pick + u, dtype=np.float32) for u in utts]
            )
            assert np.array_equal(pool.features[slot], expected)

    def test_same_seed_same_pool(self, tmp_path):
        manifest = _write_corpus(tmp_path, 6, 3)
        manifest.n_speakers, manifest.n_utterances, manifest.seed = 4, 2, 123
        a, b = build_pool(manifest), build_pool(manifest)
        assert a.speaker_ids == b.speaker_ids
        for ma, mb in zip(a.features, b.features):
            assert np.array_equal(ma, mb)

    def test_insufficient_speakers(self, tmp_path):
        manifest = _write_corpus(tmp_path, 4, 2)
        manifest.n_speakers = 50
        with pytest.raises(ValueError, match="insufficient speakers: need 50, manifest has 4"):
            build_pool(manifest)

    def test_insufficient_utterances(self, tmp_path):
        manifest = _write_corpus(tmp_path, 4, 2)
        manifest.n_speakers, manifest.n_utterances = 4, 3
        with pytest.raises(ValueError, match="insufficient utterances"):
            build_pool(manifest)

    def test_dims_mismatch_names_both_files(self, tmp_path):
        manifest = _write_corpus(tmp_path, 3, 1)
        write_features(np.zeros((2, 7), dtype=np.float32), tmp_path / "s1_u0.saltfeat")
        manifest.n_speakers, manifest.n_utterances = 3, 1
        with pytest.raises(ValueError, match="dims mismatch"):
            build_pool(manifest)


class TestPoolArchive:
    def test_round_trip(self, tmp_path):
        pool = pool_from_members(
            ["x", "émile"],  # non-ascii ids must survive the archive
            [np.ones((3, 2), dtype=np.float32), np.full((2, 2), 7, dtype=np.float32)],
        )
        save_pool(pool, tmp_path / "p.saltpool")
        back = load_pool(tmp_path / "p.saltpool")
        assert back.speaker_ids == pool.speaker_ids
        assert back.dims == 2
        for ma, mb in zip(back.features, pool.features):
            assert np.array_equal(ma, mb)

    def test_save_is_deterministic(self, tmp_path):
        pool = pool_from_members(["a"], [np.ones((2, 2), dtype=np.float32)])
        save_pool(pool, tmp_path / "one.saltpool")
        save_pool(pool, tmp_path / "two.saltpool")
        assert (tmp_path / "one.saltpool").read_bytes() == (tmp_path / "two.saltpool").read_bytes()

    def test_rejects_wrong_magic(self, tmp_path):
        (tmp_path / "junk.saltpool").write_bytes(b"JUNKJUNK" + b"\x00" * 12)
        with pytest.raises(FeatureFileError, match="not a pool file"):
            load_pool(tmp_path / "junk.saltpool")

    def test_rejects_truncated_member(self, tmp_path):
        pool = pool_from_members(["a"], [np.ones((4, 2), dtype=np.float32)])
        save_pool(pool, tmp_path / "p.saltpool")
        blob = (tmp_path / "p.saltpool").read_bytes()
        (tmp_path / "cut.saltpool").write_bytes(blob[:-8])
        with pytest.raises(FeatureFileError, match="corrupt length"):
            load_pool(tmp_path / "cut.saltpool")


class TestSpeakerPool:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            pool_from_members(["a", "a"], [np.ones((1, 2), dtype=np.float32)] * 2)

    def test_unit_rows_zero_row_stays_zero(self):
        mat = np.array([[3.0, 4.0], [0.0, 0.0]], dtype=np.float32)
        pool = pool_from_members(["a"], [mat])
        unit = pool.unit_rows(0)
        np.testing.assert_allclose(unit[0], [0.6, 0.8], atol=1e-12)
        assert np.array_equal(unit[1], [0.0, 0.0])

    @settings(max_examples=30)
    @given(matrices)
    def test_unit_rows_norms(self, mat):
        pool = pool_from_members(["a"], [mat])
        norms = np.linalg.norm(pool.unit_rows(0), axis=1)
        zero = np.linalg.norm(mat.astype(np.float64), axis=1) == 0.0
        assert np.allclose(norms[~zero], 1.0, atol=1e-9)
        assert np.all(norms[zero] == 0.0)
