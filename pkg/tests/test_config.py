import pytest

from glyphforge.config import ENV_VAR, WorkbenchConfig, load_config, parse_config_text


SAMPLE = """
# workbench settings
seed = 7
output_dir = "run1"

[segmenter]
split_factor = 1.6
min_component_pixels = 5

[train]
max_epochs = 2
learning_rate = 0.01
shuffle_val = true

[augment]
rotate_probability = 0.5
"""


class TestParse:
    def test_sections_and_types(self):
        s = parse_config_text(SAMPLE)
        assert s[""]["seed"] == 7
        assert s[""]["output_dir"] == "run1"
        assert s["segmenter"]["split_factor"] == 1.6
        assert s["train"]["shuffle_val"] is True

    def test_comments_and_blanks(self):
        s = parse_config_text("# only a comment\n\nkey = 1  # trailing\n")
        assert s[""]["key"] == 1

    def test_bad_line(self):
        with pytest.raises(ValueError):
            parse_config_text("no equals sign here")


class TestLoad:
    def test_defaults_without_file(self, monkeypatch):
        monkeypatch.delenv(ENV_VAR, raising=False)
        cfg = load_config()
        assert cfg == WorkbenchConfig()

    def test_file_overrides(self, tmp_path):
        p = tmp_path / "wb.toml"
        p.write_text(SAMPLE)
        cfg = load_config(p)
        assert cfg.seed == 7
        assert cfg.output_dir == "run1"
        assert cfg.segmenter.split_factor == 1.6
        assert cfg.segmenter.min_component_pixels == 5
        assert cfg.segmenter.glyph_size == 40  # untouched default
        assert cfg.train.max_epochs == 2
        assert cfg.augment.rotate_probability == 0.5

    def test_env_var_fallback(self, tmp_path, monkeypatch):
        p = tmp_path / "wb.toml"
        p.write_text("[train]\nseed = 9\n")
        monkeypatch.setenv(ENV_VAR, str(p))
        assert load_config().train.seed == 9

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "wb.toml"
        p.write_text("[segmenter]\nnot_a_knob = 1\n")
        with pytest.raises(ValueError):
            load_config(p)

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "wb.toml"
        p.write_text("[mystery]\nx = 1\n")
        with pytest.raises(ValueError):
            load_config(p)
