"""Tests for graphon-ldp."""
