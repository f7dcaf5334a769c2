from fractions import Fraction
import csv
import io
import json
import math

import numpy as np
import pytest

from tentfarey.contfrac import parse_number, witness
from tentfarey.errors import InputError
from tentfarey.experiments import (default_schedule, run_convergence, run_limsup_report,
                                   run_witnesses)
from tentfarey.maps import invariant_density
from tentfarey.observables import FunctionObservable, SingularPower, indicator
from tentfarey.transfer import CSV_COLUMNS


def rows(series):
    return list(csv.DictReader(io.StringIO(series.to_csv())))


def test_schedules():
    assert default_schedule(1)[:3] == [2, 4, 8] and default_schedule(1)[-1] == 2 ** 16
    assert default_schedule(0.5) == list(range(2, 21, 2))


def test_convergence_r_half_example():
    v = SingularPower(1 / 3, 0.4)
    s = run_convergence(Fraction(1, 2), v, [0.2], n_schedule=[6, 14, 22])
    last = s.rows[-1]
    assert last["target"] == pytest.approx(v.integral() * invariant_density(0.5, 0.2))
    assert abs(last["value"] - last["target"]) / last["target"] < 0.05
    assert 0 < s.meta["fitted_ratio"] < 1


def test_convergence_tent_linear():
    s = run_convergence(0, FunctionObservable(lambda t: t), [0.1, 0.7], n_schedule=[2])
    assert [r["value"] for r in s.rows] == pytest.approx([0.5, 0.5])


def test_convergence_farey_grid_trend():
    f = indicator(0.5, 1)
    s = run_convergence(1, f, [0.4], n_schedule=[100, 1000, 10000], N=2 ** 12)
    dev = [abs(r["normalized"] - r["target"]) for r in s.rows]
    assert dev[-1] < dev[0]
    assert s.rows[0]["backend"].startswith("grid[")


def test_convergence_farey_singular_is_split():
    v = SingularPower(float(math.sqrt(2) - 1), 0.5)
    s = run_convergence(1, v, [0.8], n_schedule=[64], N=2 ** 11, split_depth=12)
    assert "tail[exact]" in s.rows[0]["backend"] and "omitted_core" in s.meta


def test_deterministic_csv():
    v = SingularPower(1 / 3, 0.4)
    a = run_convergence(Fraction(1, 2), v, [0.2, 0.6], n_schedule=[4, 8]).to_csv()
    b = run_convergence(Fraction(1, 2), v, [0.2, 0.6], n_schedule=[4, 8], workers=3).to_csv()
    assert a == b
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_limsup_sqrt2():
    s = run_limsup_report(parse_number("sqrt2-1"), 0.5, 400, fit_from=100)
    assert s.meta["period"] == 2
    for z, slope in s.meta["fitted_exponent"].items():
        assert slope == pytest.approx(-1, rel=0.05)
    hits = [r for r in s.rows if r["target"] == "inf"]
    assert hits and all(r["value"] == math.inf for r in hits)
    misses = [r for r in s.rows if r["target"] != "inf"]
    assert all(math.isfinite(r["value"]) for r in misses)


def test_limsup_gamma_period_one():
    s = run_limsup_report(parse_number("(sqrt5-1)/2"), 0.5, 30)
    assert s.meta["period"] == 1
    assert all(r["value"] == math.inf for r in s.rows)


def test_limsup_rational_note():
    s = run_limsup_report(Fraction(2, 3), 0.5, 10)
    assert s.meta["omega"] == ["0"] and "note" in s.meta


def test_limsup_rejects_aperiodic():
    with pytest.raises(InputError):
        run_limsup_report(witness("increasing"), 0.5, 10)


def test_witness_tables():
    a = run_witnesses(0.75, n_max=4, variant="a")
    assert a.meta["label"] == "limsup"
    kappa = [c for c in a.meta["entry_checks"] if c["tau"] == "kappa"]
    assert all(c["holds"] for c in kappa if c["n"] >= 2)
    b = run_witnesses(0.5, variant="b", j_max=30)
    vals = [r["value"] for r in b.rows if r["value"] != "undefined"]
    assert vals[-1] < 1e-6
    assert b.rows[0]["value"] == "undefined"
    j = json.loads(b.to_json())
    assert j["meta"]["theorem"] == "witness-b"
