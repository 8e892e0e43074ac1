"""
coverembed: bounded and deck-equivariant isometric embeddings of the
universal cover of a Riemannian torus, with numerical certification.

The usual path is::

    field = identity_metric(2)
    split = split_metric(field)                       # g = Q1 + c I
    o = certify(clifford_diagonal_oracle(...), split.q1)
    E = build_E(split, o, make_spiral())              # bounded, R^(N + 2n)
    F = build_F(split, o)                             # equivariant, R^(N + n)
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    CoverEmbedError,
    ExprEvaluationError,
    ExprSyntaxError,
    ExtensionUnavailable,
    GroupError,
    MetricError,
    OracleError,
    SpiralError,
)
from .crystal_group import (  # noqa: E402
    AmbientIsometry,
    BieberbachElement,
    act,
    compose,
    induced_action,
    inverse,
    make_element,
    named_group,
    translation,
)
from .metric_field import (  # noqa: E402
    MetricField,
    MetricSplit,
    check_invariance,
    conformal_metric,
    constant_metric,
    eval_metric,
    expression_metric,
    identity_metric,
    min_eigenvalue_over_domain,
    revolution_metric,
    split_metric,
)
from .spiral import SpiralCurve, make_spiral, product_spiral_map  # noqa: E402
from .oracle import (  # noqa: E402
    EmbeddingOracle,
    certify,
    clifford_diagonal_oracle,
    clifford_general_oracle,
    expression_oracle,
    integer_decomposition,
    revolution_oracle,
    verify_oracle,
    warped_oracle_for,
)
from .construct import (  # noqa: E402
    AmbientMap,
    build_E,
    build_F,
    build_Phi,
    covering_phi,
    extend_action,
)
from .sampling import Sampler  # noqa: E402
