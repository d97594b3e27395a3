"""Cat-like spin states prepared by collective measurement: dynamics, metrology and noise."""

__version__ = "0.1.0"

from .spin import Axis, KittenSpec, Parity, Spin, StateVector, dicke_state, kitten_state  # noqa: E402

__all__ = ["__version__", "Axis", "KittenSpec", "Parity", "Spin", "StateVector", "dicke_state", "kitten_state"]
