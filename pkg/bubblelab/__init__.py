#: Code version recorded in every run manifest
__version__ = '0.3.0'
