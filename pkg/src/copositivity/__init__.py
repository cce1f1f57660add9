"""Signomial copositivity - certified copositivity decisions and SONC certificates."""

__version__ = "0.1.0"
