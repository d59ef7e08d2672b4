import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misodetect.corpus import (
    CorpusError,
    MemeSample,
    TextSample,
    apply_ocr_corrections,
    contains_devanagari,
    filter_devanagari,
    load_meme_dataset,
    load_text_dataset,
    make_manifest,
    read_correction_overlay,
    save_manifest,
    write_correction_overlay,
)

from .conftest import make_png, write_jsonl


def text_record(i, label="non_offensive", sublabels=(), text=None):
    return {
        "id": f"t{i}",
        "text": text or f"sample text {i}",
        "binary_label": label,
        "sublabels": list(sublabels),
    }


class TestTextLoading:
    def test_basic_load_and_counts(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(
            path,
            [
                text_record(0),
                text_record(1, "misogynistic", ["derogatory_language"]),
                text_record(2, "misogynistic", ["slut_shaming", "stereotyping"]),
            ],
        )
        manifest, errors = load_text_dataset(path)
        assert not errors
        assert manifest.class_counts == {"non_offensive": 1, "misogynistic": 2}
        assert manifest.sublabel_counts["slut_shaming"] == 1
        assert len(manifest) == 3

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        manifest, errors = load_text_dataset(path)
        assert len(manifest) == 0
        assert all(v == 0 for v in manifest.class_counts.values())
        assert not errors

    def test_unknown_sublabel_reported_with_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(
            path,
            [
                text_record(0),
                text_record(1, "misogynistic", ["derogatory_language"]),
                text_record(2, "misogynistic", ["sarcasm"]),
            ],
        )
        manifest, errors = load_text_dataset(path)
        assert len(manifest) == 2
        assert len(errors) == 1
        assert errors[0].line == 3
        assert "sarcasm" in errors[0].message

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_text_dataset(tmp_path / "nope.jsonl")

    def test_malformed_json_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text(json.dumps(text_record(0)) + "\n{not json\n")
        manifest, errors = load_text_dataset(path)
        assert len(manifest) == 1
        assert errors[0].line == 2

    def test_schema_remap(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [{"id": "x", "body": "hello there", "binary_label": "non_offensive"}])
        manifest, errors = load_text_dataset(path, schema={"text": "body"})
        assert not errors
        assert manifest.samples[0].text == "hello there"

    def test_empty_text_rejected(self):
        with pytest.raises(CorpusError, match="empty"):
            TextSample(id="a", text="   ", binary_label="non_offensive")

    def test_sublabels_required_iff_misogynistic(self):
        with pytest.raises(CorpusError):
            TextSample(id="a", text="x", binary_label="non_offensive",
                       sublabels=frozenset({"stereotyping"}))
        with pytest.raises(CorpusError):
            TextSample(id="a", text="x", binary_label="misogynistic")


class TestMemeLoading:
    def test_load_with_images(self, tmp_path):
        import numpy as np

        root = tmp_path / "imgs"
        root.mkdir()
        rng = np.random.default_rng(0)
        records = []
        for i in range(5):
            (root / f"{i}.png").write_bytes(make_png(rng))
            records.append(
                {
                    "id": f"m{i}",
                    "image_ref": f"{i}.png",
                    "ocr_text": f"text {i}",
                    "binary_label": "misogynistic" if i < 2 else "normal",
                    "sublabels": ["objectification"] if i < 2 else [],
                }
            )
        path = tmp_path / "m.jsonl"
        write_jsonl(path, records)
        manifest, errors = load_meme_dataset(path, root)
        assert not errors
        assert manifest.class_counts == {"normal": 3, "misogynistic": 2}
        assert manifest.sublabel_counts == {"objectification": 2, "prejudice": 0, "humiliation": 0}

    def test_missing_image_is_record_error(self, tmp_path):
        import numpy as np

        root = tmp_path / "imgs"
        root.mkdir()
        (root / "ok.png").write_bytes(make_png(np.random.default_rng(0)))
        path = tmp_path / "m.jsonl"
        write_jsonl(
            path,
            [
                {"id": "a", "image_ref": "ok.png", "ocr_text": "", "binary_label": "normal"},
                {"id": "b", "image_ref": "gone.png", "ocr_text": "", "binary_label": "normal"},
            ],
        )
        manifest, errors = load_meme_dataset(path, root)
        assert [s.id for s in manifest.samples] == ["a"]
        assert len(errors) == 1 and "not found" in errors[0].message

    def test_undecodable_image(self, tmp_path):
        root = tmp_path / "imgs"
        root.mkdir()
        (root / "bad.png").write_bytes(b"this is not a png")
        path = tmp_path / "m.jsonl"
        write_jsonl(
            path, [{"id": "a", "image_ref": "bad.png", "ocr_text": "", "binary_label": "normal"}]
        )
        _, errors = load_meme_dataset(path, root)
        assert len(errors) == 1 and "undecodable" in errors[0].message


class TestDevanagariFilter:
    def test_hand_fixture(self):
        samples = [
            TextSample(id="a", text="नमस्ते world", binary_label="non_offensive"),
            TextSample(id="b", text="hello world", binary_label="non_offensive"),
        ]
        manifest = make_manifest("text", samples)
        kept, removed = filter_devanagari(manifest)
        assert [s.id for s in removed.samples] == ["a"]
        assert [s.id for s in kept.samples] == ["b"]

    def test_all_ascii_removes_nothing(self):
        samples = [
            TextSample(id=str(i), text=f"plain ascii {i}", binary_label="non_offensive")
            for i in range(10)
        ]
        kept, removed = filter_devanagari(make_manifest("text", samples))
        assert len(removed) == 0 and len(kept) == 10

    @settings(max_examples=200)
    @given(
        st.lists(
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=40
            ).filter(lambda s: s.strip()),
            min_size=1,
            max_size=20,
        )
    )
    def test_partition_property(self, texts):
        samples = [
            TextSample(id=str(i), text=t, binary_label="non_offensive")
            for i, t in enumerate(texts)
        ]
        manifest = make_manifest("text", samples)
        kept, removed = filter_devanagari(manifest)
        assert len(kept) + len(removed) == len(manifest)
        assert {s.id for s in kept.samples} | {s.id for s in removed.samples} == {
            s.id for s in manifest.samples
        }
        assert all(contains_devanagari(s.text) for s in removed.samples)
        assert not any(contains_devanagari(s.text) for s in kept.samples)

    def test_effective_text_drives_meme_filter(self, tmp_path):
        import numpy as np

        root = tmp_path
        (root / "x.png").write_bytes(make_png(np.random.default_rng(0)))
        latin = MemeSample(
            id="a", image_ref="x.png", ocr_text="देवनागरी", binary_label="normal",
            corrected_text="romanized now",
        )
        manifest = make_manifest("meme", [latin], image_root=root)
        kept, removed = filter_devanagari(manifest)
        # correction overrides the raw OCR, so the sample stays
        assert len(kept) == 1 and len(removed) == 0


class TestOcrCorrections:
    def _manifest(self, tmp_path, n=2):
        import numpy as np

        rng = np.random.default_rng(0)
        samples = []
        for i in range(n):
            (tmp_path / f"{i}.png").write_bytes(make_png(rng))
            samples.append(
                MemeSample(
                    id=f"m{i}", image_ref=f"{i}.png", ocr_text=f"raw {i}", binary_label="normal"
                )
            )
        return make_manifest("meme", samples, image_root=tmp_path)

    def test_overlay_hit_and_preservation(self, tmp_path):
        manifest = self._manifest(tmp_path)
        result, warnings = apply_ocr_corrections(manifest, {"m1": "fixed"})
        assert not warnings
        assert result.samples[1].effective_text == "fixed"
        assert result.samples[1].ocr_text == "raw 1"
        assert result.samples[0].effective_text == "raw 0"

    def test_empty_overlay_identity(self, tmp_path):
        manifest = self._manifest(tmp_path)
        result, warnings = apply_ocr_corrections(manifest, {})
        assert result == manifest and not warnings

    def test_unknown_id_warns(self, tmp_path):
        manifest = self._manifest(tmp_path)
        result, warnings = apply_ocr_corrections(manifest, {"ghost": "boo"})
        assert result == manifest
        assert len(warnings) == 1 and "ghost" in warnings[0]

    def test_idempotent(self, tmp_path):
        manifest = self._manifest(tmp_path)
        overlay = {"m0": "once"}
        once, _ = apply_ocr_corrections(manifest, overlay)
        twice, _ = apply_ocr_corrections(once, overlay)
        assert once == twice

    def test_overlay_csv_round_trip(self, tmp_path):
        overlay = {"m0": 'quoted, "text"', "m1": "नमस्ते"}
        path = tmp_path / "overlay.csv"
        write_correction_overlay(overlay, path)
        assert read_correction_overlay(path) == overlay


class TestSplit:
    def test_stratified_partition(self, text_fixture_manifest):
        from misodetect.corpus import split_manifest

        train, val, test = split_manifest(text_fixture_manifest, (0.8, 0.1, 0.1), seed=3)
        all_ids = {s.id for s in text_fixture_manifest.samples}
        got = [{s.id for s in part.samples} for part in (train, val, test)]
        assert got[0] | got[1] | got[2] == all_ids
        assert not (got[0] & got[1] or got[0] & got[2] or got[1] & got[2])
        # stratification: 16/16 fixture splits each class 13/1.6/1.6-ish
        assert train.class_counts["misogynistic"] == train.class_counts["non_offensive"]

    def test_deterministic(self, text_fixture_manifest):
        from misodetect.corpus import split_manifest

        a = split_manifest(text_fixture_manifest, seed=7)
        b = split_manifest(text_fixture_manifest, seed=7)
        assert a == b

    def test_bad_ratios(self, text_fixture_manifest):
        from misodetect.corpus import split_manifest

        with pytest.raises(CorpusError, match="ratios"):
            split_manifest(text_fixture_manifest, (0.5, 0.1, 0.1))


class TestRoundTrip:
    def test_text_serialize_reload_deep_equal(self, tmp_path, text_fixture_manifest):
        path = tmp_path / "out.jsonl"
        save_manifest(text_fixture_manifest, path)
        reloaded, errors = load_text_dataset(path)
        assert not errors
        assert reloaded == text_fixture_manifest

    def test_meme_serialize_reload_deep_equal(self, tmp_path, meme_fixture):
        _, image_root, manifest = meme_fixture
        path = tmp_path / "again.jsonl"
        save_manifest(manifest, path)
        reloaded, errors = load_meme_dataset(path, image_root)
        assert not errors
        assert reloaded == manifest

    def test_counts_always_recomputable(self, text_fixture_manifest):
        m = text_fixture_manifest
        from misodetect.corpus import tally_binary, tally_sublabels

        assert dict(m.class_counts) == tally_binary("text", m.samples)
        assert dict(m.sublabel_counts) == tally_sublabels("text", m.samples)

    def test_tampered_counts_rejected(self, text_fixture_manifest):
        from misodetect.corpus import DatasetManifest

        with pytest.raises(CorpusError, match="tally"):
            DatasetManifest(
                modality="text",
                samples=text_fixture_manifest.samples,
                class_counts={"non_offensive": 99, "misogynistic": 0},
                sublabel_counts=text_fixture_manifest.sublabel_counts,
            )
