"""Loss-landscape statistics and weight-decay training dynamics for two-layer ReLU networks.

The package is organized around the activation-cone picture of the
regularized regression loss: ``data`` generates the dataset families,
``arrangement`` enumerates and samples neuron activation patterns, ``conic``
solves the per-cone convex programs and certifies stationarity, ``landscape``
turns cone classifications into the sweep statistics and closed-form bounds,
``flow`` runs full-batch gradient descent with weight decay, and ``theory``
computes the analytic objects the small-initialization analysis predicts.
"""

__version__ = "0.1.0"

from . import arrangement, conic, data, flow, landscape, theory  # noqa: F401
