"""Price-movement labelling and bag-of-words classification of StockTwits messages."""

__version__ = "0.1.0"
