"""ORCHID: two-stage multi-UAV coverage orchestration laboratory.

Stochastic clustered scenarios, probabilistic air-to-ground channels,
GBS-aware clustering initialization, from-scratch MAPPO with a one-shot
reset-and-finetune stabilizer, and fairness/efficiency evaluation against
static baselines.
"""

from ._core import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
