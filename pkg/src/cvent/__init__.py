"""Two-mode continuous-variable entanglement lab.

Analytic Gaussian-state engine (:mod:`cvent.state`), entanglement criteria
(:mod:`cvent.criteria`), beamsplitter optimisation and sweeps
(:mod:`cvent.optimize`), correlation-ellipse geometry (:mod:`cvent.ellipse`)
and a Monte-Carlo homodyne simulator (:mod:`cvent.sampler`).
"""
from ._accel import NUMBA_AVAILABLE, backend
from .criteria import (
    X_GIVEN_Y,
    Y_GIVEN_X,
    epr_biased_5050,
    epr_biased_general,
    epr_symmetric_closed_form,
    epr_value,
    evaluate,
    inseparability,
    inseparability_symmetric_closed_form,
    qkd_rate,
)
from .optimize import infer_inputs, minimize_epr_over_t, sweep, t_optimal, threshold_eta1
from .state import (
    CorrelationMatrix,
    ScenarioConfig,
    SqueezerSpec,
    VariancePair,
    build_scenario,
    db_to_variance,
)

__version__ = "0.1.0"
