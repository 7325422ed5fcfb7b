"""
Tests for src/expert_advice_lab/bounds.py
"""

import math
from decimal import Decimal, localcontext

import numpy as np
import pytest

from src.expert_advice_lab.bounds import (
    restricted_lower_bound_rate,
    theorem1_bound,
    theorem2_bound,
    theorem2_preset_bound,
)
from src.expert_advice_lab.exceptions import InputError
from src.expert_advice_lab.policies import theorem2_initial_guess


class TestTheorem1Bound:
    def test_n_equals_k(self) -> None:
        assert theorem1_bound(8, 8, 1000) == pytest.approx(2 * math.sqrt(2 * math.e * 8 * 1000))

    def test_more_actions_than_experts_uses_n(self) -> None:
        assert theorem1_bound(4, 50, 1000) == theorem1_bound(4, 4, 1000)

    def test_numeric_example(self) -> None:
        assert theorem1_bound(16, 4, 10_000) == pytest.approx(1213.6, abs=0.5)

    def test_monotone_in_n_and_t(self) -> None:
        assert theorem1_bound(64, 4, 1000) > theorem1_bound(16, 4, 1000)
        assert theorem1_bound(16, 4, 2000) > theorem1_bound(16, 4, 1000)

    def test_rejects_empty_dimensions(self) -> None:
        with pytest.raises(InputError):
            theorem1_bound(0, 4, 10)


class TestTheorem2Bound:
    def test_preset_monotone_in_capacity(self) -> None:
        values = [theorem2_preset_bound(16, 10_000, cbar).value for cbar in (0.0, 0.5, 1.0, 3.0, 8.0, 15.0)]
        assert values == sorted(values)
        assert len(set(values)) == len(values)

    def test_preset_at_zero_capacity(self) -> None:
        bound = theorem2_preset_bound(16, 10_000, 0.0)
        log_scale = 2 + math.log(16)
        assert bound.sqrt_term == 0.0
        assert bound.guess_term == 0.0
        assert bound.value == pytest.approx(46 * math.e * log_scale + 1)

    @pytest.mark.parametrize("cbar", [0.0, 0.5, 3.0, 10.0])
    def test_general_form_at_preset_guess_is_within_preset(self, cbar: float) -> None:
        guess = theorem2_initial_guess(16, 10_000)
        general = theorem2_bound(16, 10_000, cbar, guess)
        preset = theorem2_preset_bound(16, 10_000, cbar)
        assert general.value <= preset.value
        # the restart log term collapses to log2(4) at this guess
        assert general.restart_term == pytest.approx(18 * math.e / 5 * 2 * (2 + math.log(16)))

    @pytest.mark.parametrize("n, guess", [(16, None), (16, 0.5), (16, 2.0), (64, None), (64, 8.0)])
    def test_general_form_nondecreasing_in_capacity(self, n: int, guess) -> None:
        horizon = 10_000
        guess = theorem2_initial_guess(n, horizon) if guess is None else guess
        values = [theorem2_bound(n, horizon, cbar, guess).value for cbar in np.linspace(0.0, n - 1, 400)]
        assert all(later >= earlier for earlier, later in zip(values, values[1:]))

    def test_preset_guess_numeric_example(self) -> None:
        with localcontext() as ctx:
            ctx.prec = 40
            e, horizon = Decimal(1).exp(), Decimal(10_000)
            log_scale = 2 + Decimal(16).ln()
            two = Decimal(2).ln()
            # cbar = 1 sits above J and at the ln(... v 1) floor; the restart ratio is exactly 4
            expected = (
                38 * e * (horizon * log_scale).sqrt()
                + (horizon / log_scale).ln() / two
                + 18 * e / 5 * 2 * log_scale
                + 1
            )
        bound = theorem2_bound(16, 10_000, 1.0, theorem2_initial_guess(16, 10_000))
        assert bound.applicable
        assert bound.value == pytest.approx(float(expected), rel=1e-12)
        assert bound.value == pytest.approx(22671.5, abs=0.5)

    def test_guess_term_counts_doublings(self) -> None:
        bound = theorem2_bound(16, 1000, 4.0, 0.5)
        assert bound.guess_term == pytest.approx(3.0)
        assert theorem2_bound(16, 1000, 0.25, 0.5).guess_term == 0.0

    def test_applicability_flag(self) -> None:
        assert not theorem2_preset_bound(16, 4, 1.0).applicable
        assert theorem2_preset_bound(16, 5, 1.0).applicable

    def test_rejects_bad_arguments(self) -> None:
        with pytest.raises(InputError):
            theorem2_bound(16, 100, -1.0, 1.0)
        with pytest.raises(InputError):
            theorem2_bound(16, 100, 1.0, 17.0)
        with pytest.raises(InputError):
            theorem2_preset_bound(0, 100, 1.0)


class TestRestrictedLowerBoundRate:
    def test_value(self) -> None:
        assert restricted_lower_bound_rate(64, 4, 100) == pytest.approx(math.sqrt(4 * 100 * math.log(16)))

    @pytest.mark.parametrize("n, k", [(4, 4), (3, 4), (8, 1)])
    def test_undefined_region(self, n: int, k: int) -> None:
        with pytest.raises(InputError):
            restricted_lower_bound_rate(n, k, 100)
