"""solab: a simulation laboratory for self-optimizing Hopfield networks.

The package covers the three operational modes of the bipolar Hopfield
network (associative memory, constraint optimization, self-optimization
with Hebbian learning) plus the statistics pipeline that classifies
learning outcomes into novelty/appropriateness regimes.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: F401
    async_step,
    energy,
    is_fixed_point,
    local_field,
    relax,
    theta,
)
from .errors import (  # noqa: F401
    ConfigurationError,
    DimensionMismatchError,
    FitError,
    SolabError,
)
from .metrics import (  # noqa: F401
    BaselineFit,
    CreativityScores,
    Regime,
    above_chance,
    appropriateness_score,
    classify_regime,
    convergence_score,
    fit_baseline,
    novelty_of_energy,
    value_of_energy,
)
from .rng import make_rng, spawn  # noqa: F401
from .selfopt import (  # noqa: F401
    SoConfig,
    SoResult,
    SoRunRecord,
    Stage,
    attractor_set,
    hebbian_update,
    run_so,
)
from .tsp import (  # noqa: F401
    TspInstance,
    brute_force_tour,
    decode_tour,
    encode_tour,
    tour_length,
    tsp_weights,
)
from .weights import ModularSpec, hebbian_store, modular_weights  # noqa: F401
