import json

import pytest

from matineq import campaign as camp
from matineq import engine


def test_genspec_is_a_function_of_index():
    c = camp.Campaign("thm31", trials=10)
    assert camp.build_genspec(c, 7).to_json() == camp.build_genspec(c, 7).to_json()
    assert camp.build_genspec(c, 7).to_json() != camp.build_genspec(c, 8).to_json()


@pytest.mark.parametrize("claim", camp.FUZZ_CLAIMS + camp.FALSIFY_TARGETS)
def test_genspec_respects_bounds(claim):
    c = camp.Campaign(claim, dim_max=5, terms_max=3)
    for i in range(40):
        gs = camp.build_genspec(c, i)
        assert camp.PLANS[claim].dim_min <= gs.n <= 5 and 1 <= gs.m <= 3
        if camp.PLANS[claim].k:
            assert 1 <= gs.k <= gs.n


def test_every_claim_has_a_plan():
    assert set(camp.PLANS) == set(engine.CLAIMS)


def test_campaign_validation():
    with pytest.raises(engine.UnknownClaim):
        camp.Campaign("nope")
    with pytest.raises(ValueError):
        camp.Campaign("thm31", dim_max=0)


@pytest.mark.parametrize("claim", camp.FUZZ_CLAIMS)
def test_small_campaigns_hold(claim):
    res = camp.run_campaign(camp.Campaign(claim, trials=40, seed=7))
    assert res.ok
    assert all(r["status"] == "holds" and r["hypotheses_ok"] for r in res.records)


def test_records_are_compact_and_replayable():
    c = camp.Campaign("eq2", trials=3)
    rec = camp.run_trial(c, 1).record
    line = camp.record_line(rec)
    assert "\n" not in line and json.loads(line) == rec
    assert set(rec) >= {"trial", "claim", "n", "m", "f", "genspec", "holds", "margin", "binding_k", "certificate"}
    assert "ms" not in rec
    assert "ms" in camp.run_trial(camp.Campaign("eq2", timing=True), 1).record


def test_worker_count_does_not_change_records():
    c = camp.Campaign("thm31", trials=24, seed=3)
    one = [camp.record_line(r.record) for r in camp.run_trials(c, 0, 24, jobs=1)]
    two = [camp.record_line(r.record) for r in camp.run_trials(c, 0, 24, jobs=2)]
    assert one == two


def _sign_flipped(claim):
    real = engine.CLAIMS[claim].check

    def check(inst, tol=engine.HOLD_TOL, force=False):
        v = real(inst, tol, force)
        if not v.evaluated:
            return v
        return engine._finish(claim, -v.margin - 1.0, v.scale, tol, v.hypotheses, force)

    return engine.ClaimInfo(check, False)


def test_injected_bug_yields_shrunk_witness(monkeypatch):
    monkeypatch.setitem(engine.CLAIMS, "thm31", _sign_flipped("thm31"))
    res = camp.run_campaign(camp.Campaign("thm31", trials=3, dim_max=4))
    assert not res.ok and len(res.witnesses) == 3
    for w, r in zip(res.witnesses, res.records):
        assert w["verdict"]["status"] == "violated" and len(w["terms"]) == 1
        assert w["terms"][0]["A"]["n"] <= r["n"]


def test_injected_bug_shrinks_identity_instances_to_scalars(monkeypatch):
    monkeypatch.setitem(engine.CLAIMS, "eq5", _sign_flipped("eq5"))
    res = camp.run_campaign(camp.Campaign("eq5", trials=2, dim_max=5))
    assert all(len(w["terms"]) == 1 and w["terms"][0]["A"]["n"] == 1 for w in res.witnesses)


def test_falsify_unknown_target():
    with pytest.raises(engine.UnknownClaim):
        camp.falsify("thm31", budget=5)


def test_falsify_loewner_subadd_small_budget():
    res = camp.falsify("loewner-subadd", budget=2000, seed=0, dim_max=2)
    assert res.found and res.trials_used <= 2000
    assert res.witness["verdict"]["status"] == "violated"
    assert res.witness["terms"][0]["A"]["n"] == 2
