"""Average (Cesaro) and discounted (Abel) values of finite zero-sum games."""

from .core import (
    GameInstance,
    GameValidationError,
    LassoProcess,
    ValueFunction,
    load_game,
    random_game,
    state_at,
    validate_game,
)
from .payoffs import (
    Abel,
    Cesaro,
    DiscreteAbel,
    DiscreteCesaro,
    Xi,
    Zeta,
    abel_value,
    cesaro_value,
    composite_value,
    discount_to_prob,
    discrete_abel,
    discrete_cesaro,
    prob_to_discount,
)
from .solver import (
    MixedValue,
    PureMaximin,
    brute_force_value,
    continuous_discounted_value,
    discounted_values,
    finite_horizon_values,
    fractional_horizon_value,
    stage_value,
)
from .tauberian import (
    check_discount_estimate,
    check_discretization_bound,
    check_horizon_estimate,
    check_subsolution,
    gap_scan,
    kappa_discount,
    kappa_horizon,
)
from .valuemap import ControlMap, DPMap, EnumerativeMap, check_affine, check_monotone

__version__ = "0.1.0"
