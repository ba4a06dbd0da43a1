"""Classical, quantum and superquantum correlations in two-party games.

Modules: ``boxes`` (correlation boxes and the p-game), ``local`` (the local
polytope), ``hilbert`` (states, measurements, quantum boxes), ``classical``
(finite probability spaces in operator form), ``scenarios`` (steering,
cloning, tomography), ``decoherence`` and ``runner`` (Monte Carlo play).
"""
__version__ = "0.1.0"
