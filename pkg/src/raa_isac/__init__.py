"""Ray antenna array (RAA) ISAC simulation and estimation toolkit."""

__version__ = "0.1.0"
