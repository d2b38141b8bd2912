import math

import pytest
from hypothesis import given, settings, strategies as st

from irsoutage.config import ConfigError, RunConfig, dump_config, parse_config
from irsoutage.model import (DirectLink, IrsSpec, OutageQuery, PhaseShifts, SystemModel,
                             ValidationError, preset)

MINIMAL = """
rate = 2.0
snr_db = 10.0
[direct]
alpha_sd = 1.0
kappa_sd = 3.0
"""


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.model.K == 0
    assert cfg.model.direct == DirectLink(1.0, 3.0, 0.0)
    assert cfg.query.rate == 2.0 and cfg.query.snr_db == pytest.approx(10.0)
    assert cfg.sweep is None and cfg.theta is None


def test_negative_kappa_names_field():
    with pytest.raises(ValidationError) as e:
        parse_config(MINIMAL.replace("kappa_sd = 3.0", "kappa_sd = -1.0"))
    assert any("kappa_sd" in v for v in e.value.violations)


def test_irs_field_path():
    text = MINIMAL + "[[irs]]\nn_elements = 2\nalpha_sr = 1.0\nalpha_rd = 1.0\n"
    with pytest.raises(ConfigError, match=r"irs\[0\]\.kappa_rd"):
        parse_config(text)


@pytest.mark.parametrize("text, match", [
    ("rate = [", "parse error"),
    ("rate = 1.0\nsnr_db = 1.0", "direct"),
    ("schema_version = 2\n" + MINIMAL, "schema_version"),
    ('preset = "fig9"', "fig2"),
    (MINIMAL.replace("rate = 2.0", 'rate = "x"'), "rate"),
    (MINIMAL + "[montecarlo]\nsamples = 10\n", "montecarlo.samples"),
    (MINIMAL + "[series]\nrel_tol = 0.1\n", "series"),
    (MINIMAL + '[sweep]\naxis = "bogus"\nvalues = [1.0]\noutputs = ["analytic"]\n', "sweep.axis"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


@pytest.mark.parametrize("name", ["fig2", "fig3a", "fig3b", "fig4"])
def test_preset_alias(name):
    sc = preset(name)
    cfg = parse_config(f'preset = "{name}"')
    assert cfg.model == sc.model
    assert cfg.query == sc.query
    assert cfg.sweep == sc.sweep


def test_preset_override():
    cfg = parse_config('preset = "fig2"\nsnr_db = 20.0\n')
    assert cfg.model == preset("fig2").model
    assert cfg.query.snr == pytest.approx(100.0)


@pytest.mark.parametrize("name", ["fig2", "fig3a", "fig3b", "fig4"])
def test_round_trip_presets(name):
    sc = preset(name)
    cfg = RunConfig(sc.model, sc.query, sweep=sc.sweep)
    back = parse_config(dump_config(cfg))
    assert back.model == cfg.model
    assert back.sweep == cfg.sweep
    assert back.query.rate == cfg.query.rate
    assert back.query.snr == pytest.approx(cfg.query.snr, rel=1e-14)
    assert dump_config(back) == dump_config(cfg)


finite = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False)
phase = st.floats(min_value=0.0, max_value=6.28, allow_nan=False)


@st.composite
def models(draw):
    irss = []
    for _ in range(draw(st.integers(0, 3))):
        n = draw(st.integers(1, 3))
        irss.append(IrsSpec(n, draw(finite), draw(finite), draw(st.floats(0, 50)),
                            draw(st.lists(phase, min_size=n, max_size=n)),
                            draw(st.lists(phase, min_size=n, max_size=n))))
    return SystemModel(DirectLink(draw(finite), draw(st.floats(0, 50)), draw(phase)), irss)


@settings(max_examples=60, deadline=None)
@given(models(), st.floats(0.1, 8), st.floats(-10, 60))
def test_round_trip_bit_exact(model, rate, snr_db):
    cfg = RunConfig(model, OutageQuery.from_db(rate, snr_db),
                    theta=PhaseShifts.zeros(model), seed=12345)
    back = parse_config(dump_config(cfg))
    assert back.model == model
    assert back.theta == cfg.theta
    assert back.seed == 12345 and back.query.rate == rate
    assert math.isclose(back.query.snr, cfg.query.snr, rel_tol=1e-14)
