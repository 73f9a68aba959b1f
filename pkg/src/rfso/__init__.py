"""Performance of a mixed RF/FSO fixed-gain relay link with an impaired amplifier.

Closed-form outage, BEP and ergodic capacity (``rfso.analysis``) checked
against an end-to-end Monte Carlo engine (``rfso.mcsim``), on top of a
self-contained special-function kernel (``rfso.specfun``).
"""
__version__ = "0.1.0"
