"""Day-ahead unit commitment and spot-price analysis under growing wind capacity."""

__version__ = "0.1.0"
