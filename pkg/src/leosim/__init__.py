"""leosim: discrete-event simulation of learned packet routing over LEO constellations."""

__version__ = "0.1.0"
