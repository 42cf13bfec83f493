"""Node-pair embeddings for link forecasting in dynamic networks."""

__version__ = "0.1.0"
