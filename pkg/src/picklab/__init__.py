"""Online order batching, sequencing and routing: exact solver, Reopt simulator, harness."""

__version__ = "0.1.0"
