"""
IntentEnsemble - Clean Architecture Implementation
Intent-aware ranking ensemble learning toolkit
"""
__version__ = "1.0.0"
