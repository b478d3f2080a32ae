"""Destructive beamforming by a malicious reconfigurable intelligent surface."""

__version__ = "0.1.0"
