"""Entanglement swapping with non-maximally entangled resources in noisy repeater chains."""

from . import measures, protocols, qcore, resources, robustness, states

__all__ = ["qcore", "states", "measures", "protocols", "resources", "robustness"]
__version__ = "0.1.0"
