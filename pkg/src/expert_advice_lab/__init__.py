"""Expert Advice Lab - Tsallis-entropy FTRL for bandits with expert advice."""

__version__ = "0.1.0"
