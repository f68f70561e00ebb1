"""Tests for the gasket energy toolkit."""
