"""Bundled invariant suite."""

from .runner import SelfTestRunner, run_selftest

__all__ = ["SelfTestRunner", "run_selftest"]
