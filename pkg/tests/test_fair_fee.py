import pytest

from gmwb.contract import ContractSpec
from gmwb.dp_engine import value_contract
from gmwb.fair_fee import solve_fair_fee


def test_2022_par_fee(m2022, ssa):
    spec = ContractSpec.constant_penalty(0.10, scheme="D")
    res = solve_fair_fee(m2022, spec, mortality=ssa)
    assert res.sellable
    assert abs(res.achieved_value - 100) <= 0.01
    lo, hi = res.bracket
    assert lo <= res.alpha_fair <= hi
    # independent re-evaluation at the returned fee
    v = value_contract(m2022, spec.with_terms(fee=res.alpha_fair), m=2, mortality=ssa).value
    assert v == pytest.approx(res.achieved_value, abs=1e-12)


def test_scheme_override(m2022, ssa):
    spec = ContractSpec.constant_penalty(0.10, scheme="D")
    d = solve_fair_fee(m2022, spec, mortality=ssa)
    s = solve_fair_fee(m2022, spec, scheme="S", mortality=ssa, bracket=(0.0, 0.2))
    # the static scheme is worth less, so it par-prices at a lower fee
    assert s.sellable and s.alpha_fair < d.alpha_fair


def test_unsellable_reported_not_raised(m2021, ssa):
    spec = ContractSpec.constant_penalty(0.15, scheme="D")
    res = solve_fair_fee(m2021, spec, mortality=ssa, bracket=(0.0, 0.05))
    assert not res.sellable and res.alpha_fair is None
    assert res.message.startswith("unsellable at par")


def test_below_par_at_zero_fee(m2022):
    # full penalty and a tiny guarantee: worth less than P even for free
    spec = ContractSpec(penalties=(1.0,), guarantee=0.0, scheme="S")
    res = solve_fair_fee(m2022, spec.with_terms(surrender_allowed=False), bracket=(0.0, 0.1))
    assert not res.sellable and "alpha=0.0" in res.message


def test_tolerance_respected(m2022, ssa):
    spec = ContractSpec.constant_penalty(0.10, scheme="D")
    res = solve_fair_fee(m2022, spec, mortality=ssa, tolerance=0.001)
    assert abs(res.achieved_value - 100) <= 0.001
