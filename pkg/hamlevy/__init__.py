name = "ham-levy"
__version__ = "0.3.0"
