"""Random dynamical decoupling, Zeno products, and channel-distance bounds."""

from . import bounds, channel, linalg, model, montecarlo, protocol

__all__ = ["bounds", "channel", "linalg", "model", "montecarlo", "protocol"]
__version__ = "0.1.0"
