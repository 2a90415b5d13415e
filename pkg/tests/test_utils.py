import pytest

from hspg_ops.utils import config_digest, make_run_id, to_dir_run_id


def test_run_id_format():
    assert make_run_id("synth", "synth-N2000", "hspg(eps=0.05)", 3) == "synth:synth-N2000:hspg(eps=0.05):seed3"


@pytest.mark.parametrize("parts", [("", "d", "s"), ("e", "a:b", "s"), ("e", "d", "")])
def test_run_id_rejects_bad_components(parts):
    with pytest.raises(ValueError, match="Invalid run id"):
        make_run_id(*parts, 0)


def test_dir_run_id_is_filesystem_safe():
    assert to_dir_run_id("synth:N2000:hspg(eps=0.05):seed0") == "synth__N2000__hspg_eps=0.05___seed0"
    assert to_dir_run_id("logreg:a9a:prox_sg*:seed0") == "logreg__a9a__prox_sg___seed0"


def test_config_digest_ignores_key_order():
    assert config_digest({"a": 1, "b": [1, 2]}) == config_digest({"b": [1, 2], "a": 1})
    assert config_digest({"a": 1}) != config_digest({"a": 2})
