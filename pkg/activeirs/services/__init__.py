"""Services package for activeirs.

Concrete implementations: channel generation, the conic backend, the IA
solver, the baselines and the experiment runner.
"""
