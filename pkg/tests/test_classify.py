import json

import numpy as np
import pytest

from nordenlift.classify import (CLASSES, INCLUSIONS, MEMBER_ANALYTIC, MEMBER_TABULATED, THREADS_ENV,
                                 ClassResult, Sampling, check_lattice, classify, classify_geometries,
                                 default_tolerance, geometries, residual_AK, residual_norden, residual_w1,
                                 residual_w1w2, residual_w1w3, residual_w2, residual_w2w3, residual_w3,
                                 thread_count)
from nordenlift.errors import InconsistencyError
from nordenlift.families import (ak_family, conformal_ak_family, diagonal_ak, generic_norden,
                                 integrable_norden, perturb, perturb_b1, quasi_ak_family)
from nordenlift.lift import trivial_family
from nordenlift.scalarfn import T
from nordenlift.spaceform import SpaceForm

SAMPLING = Sampling(num_points=12, seed=5)
RESIDUALS = {"AK": residual_AK, "w1": residual_w1, "w2": residual_w2, "w3": residual_w3,
             "w1+w2": residual_w1w2, "w1+w3": residual_w1w3, "w2+w3": residual_w2w3,
             "w1+w2+w3": residual_norden}


@pytest.fixture(scope="module")
def fams():
    integ = integrable_norden(1 + T, T / 2, 2 + T, 0.0, 0.2, 0.1, 1.0, t_max=0.5)
    return {
        "trivial": trivial_family(),
        "diag": diagonal_ak(1.0, 1.0, 1.0),
        "ak": ak_family(1 + T, T / 2, 2.0, 0.1, 1.0, t_max=0.5),
        "w1": conformal_ak_family(1 + T, T / 2, 2 + T, 0.0, 1.0, t_max=0.5),
        "integrable": integ,
        "pb1": perturb_b1(integ, 0.1, 1.0),
        "generic": generic_norden(1.0),
        "quasi": quasi_ak_family(1.0, 0.2, 2.0, 0.1, 0.3, 0.1, 0.2 + 0 * T, 0.1 * T, c=1.0, t_max=0.5,
                                 step=1e-2, fit_a3=True)[0],
    }


def pts(sf, fam, sampling=SAMPLING):
    return sampling.points(sf, fam.t_max)


class TestResiduals:
    def test_trivial_flat_zero(self, fams):
        sf = SpaceForm(2, 0.0)
        for name, fn in RESIDUALS.items():
            assert fn(fams["trivial"], sf, pts(sf, fams["trivial"])) <= 1e-10, name

    @pytest.mark.parametrize("key", ["diag", "ak"])
    def test_ak_small_everywhere(self, fams, key):
        sf = SpaceForm(2, 1.0)
        tol = default_tolerance(fams[key])
        for name, fn in RESIDUALS.items():
            assert fn(fams[key], sf, pts(sf, fams[key])) <= tol, name
        if key == "diag":
            assert residual_AK(fams[key], sf, pts(sf, fams[key])) < 1e-6

    def test_strict_w1(self, fams):
        sf = SpaceForm(2, 1.0)
        p = pts(sf, fams["w1"])
        assert residual_w1(fams["w1"], sf, p) < 1e-5
        assert residual_w1w3(fams["w1"], sf, p) <= MEMBER_ANALYTIC
        for fn in (residual_AK, residual_w2w3, residual_w2, residual_w3):
            assert fn(fams["w1"], sf, p) > 1e-3

    def test_w1_d1_perturbed(self, fams):
        sf = SpaceForm(2, 1.0)
        assert residual_w1(perturb(fams["w1"], "d1", 0.1), sf, pts(sf, fams["w1"])) > 1e-3

    def test_integrability_gates_w1w2(self, fams):
        sf = SpaceForm(2, 1.0)
        p = pts(sf, fams["integrable"])
        assert residual_w1w2(fams["integrable"], sf, p) < 1e-5
        assert residual_w1w2(fams["pb1"], sf, p) > 1e-3

    def test_quasi_and_generic_w3(self, fams):
        sf = SpaceForm(2, 1.0)
        assert residual_w3(fams["quasi"], sf, pts(sf, fams["quasi"])) < 1e-4
        assert residual_w3(fams["generic"], sf, pts(sf, fams["generic"])) > 1e-3
        assert residual_w1w3(fams["generic"], sf, pts(sf, fams["generic"])) > 1e-3

    def test_empty_points(self, fams):
        assert residual_AK(fams["generic"], SpaceForm(2, 1.0), []) == 0.0


class TestClassify:
    def test_trivial_all_eight(self, fams):
        rep = classify(fams["trivial"], SpaceForm(3, 0.0), SAMPLING)
        assert rep.members == list(CLASSES)
        assert rep.verdict == "anti-Kähler"

    def test_strict_w1_lattice(self, fams):
        rep = classify(fams["w1"], SpaceForm(2, 1.0), SAMPLING)
        assert set(rep.members) == {"w1", "w1+w2", "w1+w3", "w1+w2+w3"}
        assert all(rep.classes[k].member is False for k in ("AK", "w2", "w3"))
        assert rep.verdict == "strictly ω₁"

    def test_perturbed_b1_generic(self, fams):
        rep = classify(fams["pb1"], SpaceForm(2, 1.0), SAMPLING)
        assert rep.members == ["w1+w2+w3"]
        assert rep.verdict == "generic Norden (ω₁⊕ω₂⊕ω₃ only)"

    def test_other_verdicts(self, fams):
        sf = SpaceForm(2, 1.0)
        assert classify(fams["integrable"], sf, SAMPLING).verdict == "strictly ω₁⊕ω₂"
        assert classify(fams["quasi"], sf, SAMPLING).verdict == "strictly ω₃"
        assert classify(fams["ak"], sf, SAMPLING).tolerance == MEMBER_TABULATED

    def test_not_norden(self):
        bad = trivial_family().replace(c2=trivial_family().c2 * -1.0)
        rep = classify(bad, SpaceForm(2, 0.0), SAMPLING)
        assert rep.verdict == "not Norden"
        assert rep.members == [] and rep.classes["AK"].residual == 0.0

    def test_ak_dominates(self, fams):
        for n in (2, 3):
            sf = SpaceForm(n, 1.0)
            for fam in fams.values():
                rep = classify(fam, sf, SAMPLING)
                ak = rep.classes["AK"].residual
                for k in CLASSES:
                    assert rep.classes[k].residual <= max(3 * n * ak, 1e-9), (fam.label, k)

    @pytest.mark.parametrize("key", ["w1", "integrable", "generic", "quasi"])
    def test_doubling_points_stable(self, fams, key):
        sf = SpaceForm(2, 1.0)
        a = classify(fams[key], sf, Sampling(num_points=10, seed=5))
        b = classify(fams[key], sf, Sampling(num_points=20, seed=5))
        for k in CLASSES:
            ra, rb = a.classes[k].residual, b.classes[k].residual
            if max(ra, rb) > 1e-3:
                assert 0.5 <= rb / ra <= 2.0, k
        assert a.verdict == b.verdict

    @pytest.mark.parametrize("key", ["ak", "w1", "integrable", "pb1", "generic", "quasi"])
    def test_dimension_agreement(self, fams, key):
        v2 = classify(fams[key], SpaceForm(2, 1.0), SAMPLING)
        v3 = classify(fams[key], SpaceForm(3, 1.0), SAMPLING)
        assert v2.verdict == v3.verdict
        assert [v2.classes[k].member for k in ("w1", "w1+w3")] == [v3.classes[k].member for k in ("w1", "w1+w3")]

    def test_inconclusive_band(self, fams):
        sf = SpaceForm(2, 1.0)
        rep = classify(fams["pb1"], sf, SAMPLING, tol=1e-6, reject=1.0)
        assert "w1+w2" in rep.inconclusive

    def test_json(self, fams):
        d = classify(fams["w1"], SpaceForm(2, 1.0), SAMPLING).as_dict()
        back = json.loads(json.dumps(d))
        assert back["verdict"] == "strictly ω₁" and set(back["classes"]) == set(CLASSES)
        assert back["classes"]["AK"]["samples"] == SAMPLING.num_points


class TestLattice:
    def test_inclusions_reach_top(self):
        for k in CLASSES:
            seen, todo = set(), [k]
            while todo:
                cur = todo.pop()
                seen.add(cur)
                todo.extend(INCLUSIONS[cur])
            assert "w1+w2+w3" in seen

    def test_violation_raises(self):
        classes = {k: ClassResult(0.0, True, 1) for k in CLASSES}
        classes["w1+w3"] = ClassResult(0.5, False, 1)
        with pytest.raises(InconsistencyError, match="ω₁⊕ω₃"):
            check_lattice(classes)

    def test_inconclusive_superclass_allowed(self):
        classes = {k: ClassResult(0.0, True, 1) for k in CLASSES}
        classes["w1+w3"] = ClassResult(1e-5, None, 1)
        check_lattice(classes)


class TestThreads:
    def test_env_parsing(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "4")
        assert thread_count() == 4
        monkeypatch.setenv(THREADS_ENV, "zero")
        assert thread_count() == 1
        monkeypatch.delenv(THREADS_ENV)
        assert thread_count() == 1

    def test_parallel_matches_serial(self, fams, monkeypatch):
        sf = SpaceForm(2, 1.0)
        p = pts(sf, fams["generic"])
        serial = classify_geometries(geometries(fams["generic"], sf, p), 1e-6).as_dict()
        monkeypatch.setenv(THREADS_ENV, "3")
        par = classify_geometries(geometries(fams["generic"], sf, p), 1e-6).as_dict()
        assert serial == par


class TestSampling:
    def test_domain_respected(self):
        sf = SpaceForm(2, -1.0)
        ts = [p.t for p in Sampling(num_points=50, y_radius=3.0).points(sf, 0.5)]
        assert max(ts) < 0.5 and min(ts) >= 0.0

    def test_deterministic(self):
        sf = SpaceForm(3, 1.0)
        a = [p.t for p in Sampling(seed=9).points(sf)]
        b = [p.t for p in Sampling(seed=9).points(sf)]
        assert a == b and np.all(np.array(a) <= 0.5)
