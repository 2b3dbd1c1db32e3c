"""Li-Yorke and distributional chaos of weighted shift operators."""

__version__ = "0.1.0"
