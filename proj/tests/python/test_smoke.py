import csv
import io
import json
import math

import numpy as np
import pytest

import seqgeom


def test_special_functions():
    x = 2.0
    assert seqgeom.bessel_i(0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sinh(x), rel=1e-12)
    assert seqgeom.bessel_k(0.5, x) == pytest.approx(math.sqrt(math.pi / (2 * x)) * math.exp(-x), rel=1e-12)
    assert seqgeom.chi2_quantile(2, 0.05) == pytest.approx(-2 * math.log(0.05), abs=1e-10)
    assert seqgeom.chi2_cdf(2, 1.0) == pytest.approx(1 - math.exp(-0.5), abs=1e-14)


def test_power_theory():
    assert seqgeom.envelope_power(2, 0.0) == pytest.approx(0.05, abs=1e-8)
    c = seqgeom.coefficients(2, 1.0)
    assert c.K1 == pytest.approx(0.897842, abs=1e-6)
    assert seqgeom.coefficients(2, 0.0).limit
    dp1, dp2 = seqgeom.delta_p(2, 1.0, c.K1, c.K2)
    assert abs(dp1) < 1e-12 and abs(dp2) < 1e-12


def test_geometry_and_sampling():
    fam = seqgeom.CurvedFamily("vMF", 2, 0.2)
    u = np.array([math.pi / 2, math.pi / 2])
    xi = seqgeom.direction(fam, u)
    assert np.linalg.norm(xi) == pytest.approx(1.0)
    assert seqgeom.mean_curvature(fam, u) == pytest.approx(-1 / fam.r_dagger, rel=1e-8)
    g = seqgeom.metric(fam, u)
    assert g.shape == (2, 2)
    x = seqgeom.sample(fam, u, 20000, seed=3)
    assert x.shape == (20000, 3)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
    se = x.std(axis=0) / math.sqrt(len(x))
    assert np.all(np.abs(x.mean(axis=0) - fam.r_dagger * xi) < 5 * se)
    assert np.array_equal(x, seqgeom.sample(fam, u, 20000, seed=3))


def test_run_experiment():
    overrides = json.dumps({"s_grid": [0.0, 2.0], "H1": 8, "reps": 2})
    text = seqgeom.run_experiment("nonseq-sim", "hyperboloid", overrides)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 10
    assert {r["test"] for r in rows} == {"MLT", "Wald", "LRT", "EST", "OPT"}
    assert text == seqgeom.run_experiment("nonseq-sim", "hyperboloid", overrides)
    cfg = json.loads(seqgeom.config_json("seq-sim", "vMF"))
    assert cfg["K"] == 1000.0
    with pytest.raises(Exception):
        seqgeom.run_experiment("nonseq-sim", "vMF", json.dumps({"bogus": 1}))
