"""sacekit: tooling for staged safety assurance of autonomous systems."""

__version__ = "0.1.0"
