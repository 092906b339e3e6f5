"""activeirs - joint BS beamforming and active-IRS reflection design."""

__version__ = "0.1.0"
