"""Forward-synthesis molecule generation with reinforcement learning."""

__version__ = "0.1.0"
